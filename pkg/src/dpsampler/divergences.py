"""Divergences between distributions.

Exact calculators on finite distributions:

* total variation        ``TV(p, q) = (1/2) * sum_i |p_i - q_i|``
* hockey-stick           ``HS_beta(p || q) = sum_i max(0, p_i - beta * q_i)``
* Renyi of order a > 1   ``(1/(a-1)) * log sum_i p_i^a q_i^(1-a)``

plus the closeness relation built from the hockey-stick divergence in both
directions, the conversion bound from (eps, delta)-closeness to TV distance,
and a histogram-based Monte Carlo TV estimator for continuous samplers.

Conventions: ``0 * log(0/0) = 0`` and ``p * log(p/0) = +inf`` in the Renyi
sum; hockey-stick order is restricted to ``beta >= 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import CategoricalDist, RandomSource, VectorDataset
from .errors import (
    DimensionMismatch,
    DomainMismatch,
    EmptyDataset,
    InvalidOrder,
    ValidationError,
)

BOOTSTRAP_RESAMPLES = 200


@dataclass(frozen=True)
class DivergenceOrder:
    """Validated order parameter: Renyi needs order > 1, hockey-stick beta >= 1."""

    kind: str
    value: float

    @classmethod
    def renyi(cls, order: float) -> "DivergenceOrder":
        if not order > 1:
            raise InvalidOrder(f"Renyi order must be > 1, got {order}")
        return cls(kind="renyi", value=float(order))

    @classmethod
    def hockey_stick(cls, beta: float) -> "DivergenceOrder":
        if not beta >= 1:
            raise InvalidOrder(f"hockey-stick order must be >= 1, got {beta}")
        return cls(kind="hockey-stick", value=float(beta))


@dataclass(frozen=True)
class ClosenessResult:
    """Hockey-stick divergence in both directions at beta = e^eps.

    ``delta_at_eps`` is the smallest delta for which the two distributions
    are (eps, delta)-close, i.e. the max of the two directed divergences.
    """

    hs_forward: float
    hs_backward: float
    delta_at_eps: float

    def __post_init__(self):
        if self.hs_forward < 0 or self.hs_backward < 0:
            raise InvalidOrder("hockey-stick divergences must be nonnegative")
        expected = max(self.hs_forward, self.hs_backward)
        if abs(self.delta_at_eps - expected) > 1e-15:
            raise InvalidOrder("delta_at_eps must equal max of the two directions")


def _check_same_domain(p: CategoricalDist, q: CategoricalDist) -> None:
    if p.k != q.k:
        raise DomainMismatch(f"distributions over different domains: {p.k} vs {q.k}")


def tv_distance_finite(p: CategoricalDist, q: CategoricalDist) -> float:
    """Total variation distance, equal to the sup over events of the probability gap."""
    _check_same_domain(p, q)
    return 0.5 * float(np.abs(p.probs - q.probs).sum())


def hockey_stick_finite(p: CategoricalDist, q: CategoricalDist, beta: float) -> float:
    """Hockey-stick divergence sum_i max(0, p_i - beta*q_i) = sup_E (P(E) - beta*Q(E))."""
    _check_same_domain(p, q)
    beta = DivergenceOrder.hockey_stick(beta).value
    return float(np.maximum(p.probs - beta * q.probs, 0.0).sum())


def renyi_finite(p: CategoricalDist, q: CategoricalDist, order: float) -> float:
    """Renyi divergence of the given order; +inf when q lacks support that p has."""
    _check_same_domain(p, q)
    order = DivergenceOrder.renyi(order).value
    support = p.probs > 0
    if np.any(q.probs[support] == 0):
        return math.inf
    pp = p.probs[support]
    qq = q.probs[support]
    # log-space evaluation with a max shift to avoid under/overflow
    log_terms = order * np.log(pp) + (1.0 - order) * np.log(qq)
    shift = log_terms.max()
    total = shift + math.log(float(np.exp(log_terms - shift).sum()))
    return max(total / (order - 1.0), 0.0)


def eps_delta_closeness(p: CategoricalDist, q: CategoricalDist, eps: float) -> ClosenessResult:
    """Smallest delta making p and q (eps, delta)-close, via both hockey-stick directions."""
    if eps < 0:
        raise InvalidOrder(f"eps must be nonnegative, got {eps}")
    beta = math.exp(eps)
    fwd = hockey_stick_finite(p, q, beta)
    bwd = hockey_stick_finite(q, p, beta)
    return ClosenessResult(hs_forward=fwd, hs_backward=bwd, delta_at_eps=max(fwd, bwd))


def hs_to_tv_bound(eps: float, delta: float) -> float:
    """Upper bound on TV distance implied by (eps, delta)-closeness.

    Returns ``2*delta/(e^eps + 1) + (e^eps - 1)``; values above 1 are vacuous
    but returned as computed.
    """
    if eps < 0:
        raise InvalidOrder(f"eps must be nonnegative, got {eps}")
    if not 0 <= delta < 1:
        raise InvalidOrder(f"delta must be in [0, 1), got {delta}")
    return 2.0 * delta / (math.exp(eps) + 1.0) + math.expm1(eps)


@dataclass(frozen=True)
class TvEstimate:
    """Binned TV estimate with a bootstrap confidence halfwidth."""

    estimate: float
    halfwidth: float
    bins_per_axis: int

    def as_dict(self) -> dict:
        return {
            "estimate": self.estimate,
            "halfwidth": self.halfwidth,
            "bins": self.bins_per_axis,
        }


def _histogram(rows: np.ndarray, edges: list[np.ndarray]) -> np.ndarray:
    hist, _ = np.histogramdd(rows, bins=edges)
    return hist.ravel() / rows.shape[0]


def tv_estimate_binned(
    samples_p: VectorDataset,
    samples_q: VectorDataset,
    bins_per_axis: int,
    rng: RandomSource | None = None,
    resamples: int = BOOTSTRAP_RESAMPLES,
) -> TvEstimate:
    """Estimate TV distance between two continuous sample sets by histogramming.

    Both sets are binned with equal-width bins on their joint bounding box
    (expanded by 1% per side); the estimate is half the L1 distance between
    the two bin-frequency vectors.  The halfwidth is half the central-95%
    width of ``resamples`` bootstrap replicates of the estimate.
    """
    if samples_p.d != samples_q.d:
        raise DimensionMismatch(
            f"sample sets have different dimensions: {samples_p.d} vs {samples_q.d}"
        )
    if bins_per_axis < 2:
        raise ValidationError(f"bins_per_axis must be >= 2, got {bins_per_axis}")
    if samples_p.n == 0 or samples_q.n == 0:
        raise EmptyDataset("both sample sets must be nonempty")

    stacked = np.vstack([samples_p.rows, samples_q.rows])
    lo = stacked.min(axis=0)
    hi = stacked.max(axis=0)
    pad = 0.01 * np.maximum(hi - lo, 1e-12)
    edges = [
        np.linspace(lo[j] - pad[j], hi[j] + pad[j], bins_per_axis + 1)
        for j in range(samples_p.d)
    ]

    freq_p = _histogram(samples_p.rows, edges)
    freq_q = _histogram(samples_q.rows, edges)
    estimate = 0.5 * float(np.abs(freq_p - freq_q).sum())

    if rng is None:
        rng = RandomSource(0)
    gen = rng.generator
    reps = np.empty(resamples)
    for b in range(resamples):
        boot_p = samples_p.rows[gen.integers(0, samples_p.n, size=samples_p.n)]
        boot_q = samples_q.rows[gen.integers(0, samples_q.n, size=samples_q.n)]
        reps[b] = 0.5 * float(
            np.abs(_histogram(boot_p, edges) - _histogram(boot_q, edges)).sum()
        )
    lo_q, hi_q = np.quantile(reps, [0.025, 0.975])
    return TvEstimate(
        estimate=estimate,
        halfwidth=0.5 * float(hi_q - lo_q),
        bins_per_axis=bins_per_axis,
    )
