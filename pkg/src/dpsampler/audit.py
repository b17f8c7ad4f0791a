"""Executable privacy verification for the package's mechanisms.

Each audit measures a privacy quantity against a claimed budget and returns
an :class:`AuditReport` whose verdict is ``pass`` iff the measured value is
at most the bound plus a 1e-9 numeric slack.  Exhaustive and analytic audits
are binding; Monte Carlo audits are flagged ``advisory`` and never gate
anything.  Every audit is deterministic given its RandomSource, and reports
serialize to canonical JSON for byte-identical re-verification.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import CategoricalDist, PrivacyBudget, RandomSource
from .divergences import hockey_stick_finite
from .elap import ELapParams, elap_sample
from .errors import EnumerationTooLarge, ValidationError
from .gaussian import ZcdpParams, gaussian_mech_renyi
from .kary import RRParams, _rr_apply, rr_pmf, rr_row, shurr_eps0, subrr_eps0

VERDICT_SLACK = 1e-9


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one privacy audit.

    ``measured_max_log_ratio`` carries the audit's binding scalar: the worst
    log-likelihood ratio for pure-DP audits, the measured zCDP parameter rho
    for Renyi audits, and the estimated additive delta for Monte Carlo
    hockey-stick audits (mirrored in ``measured_delta``).  ``details`` always
    holds ``measured`` and ``bound``; the verdict is recomputable from them.
    """

    mechanism: str
    claimed: PrivacyBudget
    measured_max_log_ratio: float
    measured_delta: float
    probe_count: int
    verdict: str
    witness: dict
    advisory: bool = False
    details: dict = field(default_factory=dict)


def _verdict(measured: float, bound: float) -> str:
    return "pass" if measured <= bound + VERDICT_SLACK else "fail"


def report_as_dict(report: AuditReport) -> dict:
    return {
        "mechanism": report.mechanism,
        "claimed": report.claimed.as_dict(),
        "measured_max_log_ratio": report.measured_max_log_ratio,
        "measured_delta": report.measured_delta,
        "probe_count": report.probe_count,
        "verdict": report.verdict,
        "witness": report.witness,
        "advisory": report.advisory,
        "details": report.details,
    }


def report_to_json(report: AuditReport) -> str:
    """Canonical JSON serialization (sorted keys, no whitespace)."""
    return json.dumps(report_as_dict(report), sort_keys=True, separators=(",", ":"))


def report_from_json(payload: str) -> AuditReport:
    raw = json.loads(payload)
    claimed = PrivacyBudget(**raw["claimed"])
    return AuditReport(
        mechanism=raw["mechanism"],
        claimed=claimed,
        measured_max_log_ratio=raw["measured_max_log_ratio"],
        measured_delta=raw["measured_delta"],
        probe_count=raw["probe_count"],
        verdict=raw["verdict"],
        witness=raw["witness"],
        advisory=raw["advisory"],
        details=raw["details"],
    )


def reverify(report: AuditReport) -> bool:
    """Recompute the verdict from the persisted measured/bound pair."""
    expected = _verdict(report.details["measured"], report.details["bound"])
    return report.verdict == expected


# --- local randomized response ------------------------------------------------


def audit_rr_local(k: int, eps0: float, claimed_eps: float | None = None) -> AuditReport:
    """Exhaustive worst-case log pmf ratio of k-ary randomized response.

    The max over inputs x, x' and outcome y equals eps0 exactly; auditing a
    smaller claimed budget therefore fails with a concrete witness.
    """
    params = RRParams(eps0=eps0, k=k)
    bound = eps0 if claimed_eps is None else claimed_eps
    best = (0.0, (1, 1, 1))
    for x, x_alt, y in itertools.product(range(1, k + 1), repeat=3):
        ratio = math.log(rr_pmf(x, y, params) / rr_pmf(x_alt, y, params))
        if ratio > best[0]:
            best = (ratio, (x, x_alt, y))
    measured = best[0]
    return AuditReport(
        mechanism="rr",
        claimed=PrivacyBudget.pure(bound),
        measured_max_log_ratio=measured,
        measured_delta=0.0,
        probe_count=k**3,
        verdict=_verdict(measured, bound),
        witness={"x": best[1][0], "x_alt": best[1][1], "outcome": best[1][2]},
        details={"measured": measured, "bound": bound, "eps0": eps0},
    )


# --- subsampled randomized response --------------------------------------------


def _compositions(total: int, parts: int):
    # all count vectors of length `parts` summing to `total`
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def audit_subrr_pure(
    k: int, n: int, eps: float, claimed_eps: float | None = None
) -> AuditReport:
    """Exhaustive worst-case output-probability ratio of the subsampled mechanism.

    Enumerates datasets by their count vectors (the output law depends only on
    counts) and all single-record replacements, taking the exact max ratio over
    outcomes.  The enumeration budget caps k^n at 10^6.
    """
    if k**n > 10**6:
        raise EnumerationTooLarge(f"k^n = {k**n} exceeds the 10^6 enumeration budget")
    eps0 = subrr_eps0(eps, n)
    params = RRParams(eps0=eps0, k=k)
    rows = np.stack([rr_row(x, params) for x in range(1, k + 1)])
    bound = eps if claimed_eps is None else claimed_eps

    best = (0.0, None)
    pairs = 0
    for counts in _compositions(n, k):
        counts_arr = np.asarray(counts, dtype=np.float64)
        base = counts_arr @ rows / n
        for a in range(k):
            if counts[a] == 0:
                continue
            for b in range(k):
                if b == a:
                    continue
                neighbor = base + (rows[b] - rows[a]) / n
                pairs += 1
                ratios = np.log(base) - np.log(neighbor)
                y = int(np.argmax(ratios))
                if ratios[y] > best[0]:
                    best = (float(ratios[y]), {
                        "counts": list(counts),
                        "replaced": a + 1,
                        "replacement": b + 1,
                        "outcome": y + 1,
                    })
    measured = best[0]
    return AuditReport(
        mechanism="subrr",
        claimed=PrivacyBudget.pure(bound),
        measured_max_log_ratio=measured,
        measured_delta=0.0,
        probe_count=pairs,
        verdict=_verdict(measured, bound),
        witness=best[1] or {},
        details={
            "measured": measured,
            "bound": bound,
            "eps0": eps0,
            "proof_intermediate_log": math.log1p(math.exp(eps0) / n),
        },
    )


# --- shuffled randomized response (Monte Carlo, advisory) ----------------------


def audit_shurr_marginal(
    k: int,
    n: int,
    eps: float,
    delta: float,
    runs: int,
    rng: RandomSource,
    eps0: float | None = None,
    datasets=None,
) -> AuditReport:
    """Monte Carlo check of the first-output marginal gap between neighbors.

    Simulates the shuffled mechanism on the all-ones dataset and its neighbor
    with one record replaced (or an explicit ``datasets`` pair), estimates the
    hockey-stick divergence at beta = e^eps in both directions, and attaches a
    bootstrap confidence halfwidth.  Advisory only; ``eps0`` may be overridden
    to plant violations.
    """
    if runs < 10**4:
        raise ValidationError(f"Monte Carlo audit needs runs >= 1e4, got {runs}")
    if eps0 is None:
        eps0 = shurr_eps0(eps, delta, n)
    params = RRParams(eps0=eps0, k=k)
    if datasets is None:
        values_a = np.ones(n, dtype=np.int64)
        values_b = values_a.copy()
        values_b[-1] = 2
        pair_label = "all-ones vs one replaced by 2"
    else:
        values_a = np.asarray(datasets[0], dtype=np.int64)
        values_b = np.asarray(datasets[1], dtype=np.int64)
        if values_a.size != n or values_b.size != n:
            raise ValidationError("explicit datasets must both have n records")
        pair_label = "explicit pair"

    gen = rng.generator
    counts = np.zeros((2, k), dtype=np.int64)
    for run in range(runs):
        for side, values in enumerate((values_a, values_b)):
            randomized = _rr_apply(values, params, gen)
            first = randomized[gen.permutation(n)[0]]
            counts[side, first - 1] += 1

    beta = math.exp(eps)

    def hs_both(freq_a: np.ndarray, freq_b: np.ndarray) -> float:
        p = CategoricalDist(probs=freq_a / freq_a.sum())
        q = CategoricalDist(probs=freq_b / freq_b.sum())
        return max(hockey_stick_finite(p, q, beta), hockey_stick_finite(q, p, beta))

    measured = hs_both(counts[0].astype(float), counts[1].astype(float))
    boot = np.empty(200)
    for i in range(200):
        res_a = gen.multinomial(runs, counts[0] / runs).astype(float)
        res_b = gen.multinomial(runs, counts[1] / runs).astype(float)
        boot[i] = hs_both(res_a, res_b)
    lo, hi = np.quantile(boot, [0.025, 0.975])
    halfwidth = 0.5 * float(hi - lo)

    bound = delta + halfwidth
    return AuditReport(
        mechanism="shurr",
        claimed=PrivacyBudget.approx(eps, delta),
        measured_max_log_ratio=measured,
        measured_delta=measured,
        probe_count=runs,
        verdict=_verdict(measured, bound),
        witness={"dataset": pair_label, "k": k, "n": n},
        advisory=True,
        details={
            "measured": measured,
            "bound": bound,
            "halfwidth": halfwidth,
            "eps0": eps0,
        },
    )


# --- Euclidean-Laplace mechanism -----------------------------------------------


def audit_elap_mechanism(
    d: int,
    B: float,
    eps: float,
    probes: int,
    rng: RandomSource,
    differing_rows=None,
    n_rows: int = 4,
    sensitivity_multiplier: float = 1.0,
) -> AuditReport:
    """Exact log-density-ratio probe of the Euclidean-Laplace sum mechanism.

    Builds a random pair of neighboring clipped datasets (or uses the supplied
    differing rows), evaluates the closed-form output log-density ratio
    (||y - S'|| - ||y - S||)/b at probe points, and compares the max against
    the realized-shift bound ||S - S'||/b.  Half the probes come from the
    mechanism's own output law, half lie on the segment through S and S'
    extended by 3b on both sides, where the extrema live.  The report is
    advisory when ||S - S'|| exceeds B, i.e. when passing the realized-shift
    bound does not certify the bare eps claim.
    """
    if d > 4:
        raise ValidationError(f"density-ratio audit supports d <= 4, got {d}")
    if probes < 10**3:
        raise ValidationError(f"need probes >= 1e3, got {probes}")
    gen = rng.generator

    def random_in_ball() -> np.ndarray:
        vec = gen.standard_normal(d)
        return vec * (B * gen.random() ** (1.0 / d) / np.linalg.norm(vec))

    shared = [random_in_ball() for _ in range(n_rows - 1)]
    if differing_rows is None:
        differing_rows = (random_in_ball(), random_in_ball())
    row_a = np.asarray(differing_rows[0], dtype=np.float64)
    row_b = np.asarray(differing_rows[1], dtype=np.float64)
    base = np.sum(shared, axis=0) if shared else np.zeros(d)
    sum_a = base + row_a
    sum_b = base + row_b

    b = sensitivity_multiplier * B / eps
    shift = sum_a - sum_b
    shift_norm = float(np.linalg.norm(shift))

    half = probes // 2
    from_law = sum_a + elap_sample(ELapParams(d=d, b=b), rng, size=half)
    direction = shift / shift_norm if shift_norm > 0 else np.eye(d)[0]
    ts = np.linspace(-3.0 * b, shift_norm + 3.0 * b, probes - half)
    on_segment = sum_b[None, :] + ts[:, None] * direction[None, :]
    points = np.vstack([from_law, on_segment])

    log_ratios = (
        np.linalg.norm(points - sum_b[None, :], axis=1)
        - np.linalg.norm(points - sum_a[None, :], axis=1)
    ) / b
    idx = int(np.argmax(np.abs(log_ratios)))
    measured = float(np.abs(log_ratios[idx]))

    bound = shift_norm / b
    bare_eps_ok = measured <= eps + VERDICT_SLACK
    return AuditReport(
        mechanism="elap",
        claimed=PrivacyBudget.pure(eps),
        measured_max_log_ratio=measured,
        measured_delta=0.0,
        probe_count=probes,
        verdict=_verdict(measured, bound),
        witness={
            "sum_a": [float(v) for v in sum_a],
            "sum_b": [float(v) for v in sum_b],
            "argmax_point": [float(v) for v in points[idx]],
        },
        advisory=shift_norm > B + VERDICT_SLACK,
        details={
            "measured": measured,
            "bound": bound,
            "shift_norm": shift_norm,
            "scale": b,
            "bare_eps_ok": bool(bare_eps_ok),
        },
    )


# --- zCDP Gaussian mechanisms ---------------------------------------------------


def audit_zcdp_gaussian(
    params: ZcdpParams, orders, delta_norm: float | None = None
) -> AuditReport:
    """Analytic Renyi-divergence audit of a Gaussian mechanism against eps^2/2.

    For each order the divergence at worst-case sensitivity is
    order * delta^2 / (2 sigma^2); dividing by the order gives a measured rho
    that must stay at or below eps^2/2 at every order simultaneously.
    """
    orders = [float(o) for o in orders]
    if not orders:
        raise ValidationError("need at least one Renyi order")
    delta_used = params.sensitivity() if delta_norm is None else float(delta_norm)
    sigma = math.sqrt(params.sigma2)
    per_order = {}
    measured = 0.0
    for order in orders:
        rho_at_order = gaussian_mech_renyi(delta_used, sigma, order) / order
        per_order[str(order)] = rho_at_order
        measured = max(measured, rho_at_order)
    bound = params.eps**2 / 2.0
    return AuditReport(
        mechanism="zcdp",
        claimed=PrivacyBudget.zcdp(params.eps),
        measured_max_log_ratio=measured,
        measured_delta=0.0,
        probe_count=len(orders),
        verdict=_verdict(measured, bound),
        witness={"variant": params.variant, "sensitivity": delta_used, "sigma": sigma},
        details={"measured": measured, "bound": bound, "rho_per_order": per_order},
    )
