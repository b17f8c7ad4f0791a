"""Finite-domain private samplers built on k-ary randomized response.

Two mechanisms, both calibrated through the local randomizer

    RR_x(y) = e^eps0 / (e^eps0 + k - 1)   if y = x,
              1      / (e^eps0 + k - 1)   otherwise:

* subsampled randomized response: apply RR to one uniformly chosen record
  with eps0 = ln(eps * n); releases a single element.
* shuffled randomized response: apply RR to every record with
  eps0 = ln(f(eps)^2 * n / ln(4/delta) - 1), shuffle, release the first m.
  The shuffle amplifies the local parameter down to a central (eps, delta)
  via the closed-form amplification bound evaluated by :func:`fmt_eps1`.

The exact output law of the subsampled mechanism is the mixture
``(1/n) * sum_i RR_{X_i}``, enumerable for audits; sample-complexity
calculators return integer ceilings of the sufficient bounds.

The amplification bound is inherently (eps, delta): even though the eps > 1
branch of the budget split admits a pure-DP reading, the shuffled mechanism
is reported as (eps, delta)-DP in both regimes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import CategoricalDist, KaryDataset, RandomSource
from .errors import (
    InsufficientSamples,
    InvalidAlpha,
    OutOfDomain,
    PrecisionLimit,
    TooManyOutputs,
    ValidationError,
)

STRONG_ALPHA_FLOOR = 1e-12


def _tolerant_ceil(x: float) -> int:
    """Ceiling that forgives float noise just above an exact integer."""
    return int(math.ceil(x - 1e-9 * max(1.0, abs(x))))


@dataclass(frozen=True)
class RRParams:
    """Local randomizer parameters: privacy parameter eps0 >= 0, domain size k >= 2."""

    eps0: float
    k: int

    def __post_init__(self):
        if self.eps0 < 0:
            raise ValidationError(f"eps0 must be nonnegative, got {self.eps0}")
        if self.k < 2:
            raise ValidationError(f"k must be >= 2, got {self.k}")

    @property
    def keep_prob(self) -> float:
        """Probability of reporting the true value, e^eps0 / (e^eps0 + k - 1)."""
        return 1.0 / (1.0 + (self.k - 1) * math.exp(-self.eps0))


def rr_pmf(x: int, y: int, params: RRParams) -> float:
    """Probability that randomized response maps input x to output y."""
    for v in (x, y):
        if not 1 <= v <= params.k:
            raise OutOfDomain(f"element {v} outside [1..{params.k}]")
    keep = params.keep_prob
    return keep if y == x else (1.0 - keep) / (params.k - 1)


def rr_row(x: int, params: RRParams) -> np.ndarray:
    """Full output pmf of randomized response on input x."""
    if not 1 <= x <= params.k:
        raise OutOfDomain(f"element {x} outside [1..{params.k}]")
    keep = params.keep_prob
    row = np.full(params.k, (1.0 - keep) / (params.k - 1))
    row[x - 1] = keep
    return row


def rr_mixture_weight(k: int, eps0: float) -> float:
    """Mixture weight (k-1) / (k-1 + e^eps0): the TV error RR adds to any input law."""
    w = (k - 1) * math.exp(-eps0)
    return w / (w + 1.0)


def _rr_apply(values: np.ndarray, params: RRParams, gen: np.random.Generator) -> np.ndarray:
    keep = gen.random(values.size) < params.keep_prob
    offset = gen.integers(1, params.k, size=values.size)
    shifted = ((values - 1 + offset) % params.k) + 1
    return np.where(keep, values, shifted)


def rr_sample(x: int, params: RRParams, rng: RandomSource, size: int | None = None):
    """Randomized response output(s) for the single input x."""
    if not 1 <= x <= params.k:
        raise OutOfDomain(f"element {x} outside [1..{params.k}]")
    count = 1 if size is None else int(size)
    out = _rr_apply(np.full(count, x, dtype=np.int64), params, rng.generator)
    return int(out[0]) if size is None else out


# --- subsampled randomized response ----------------------------------------


def subrr_eps0(eps: float, n: int) -> float:
    """Local parameter ln(eps * n); defined only when eps * n > 1."""
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    if eps * n <= 1.0:
        n_min = int(math.floor(1.0 / eps)) + 1
        raise InsufficientSamples(
            f"eps*n = {eps * n} <= 1 leaves the local parameter undefined; "
            f"need n >= {n_min} at eps = {eps}"
        )
    return math.log(eps * n)


def subrr_sample(data: KaryDataset, eps: float, rng: RandomSource) -> int:
    """One private sample: randomized response on a uniformly chosen record."""
    params = RRParams(eps0=subrr_eps0(eps, data.n), k=data.k)
    gen = rng.generator
    r = int(gen.integers(0, data.n))
    return rr_sample(int(data.values[r]), params, rng)


def rr_mixture_dist(data: KaryDataset, eps0: float) -> CategoricalDist:
    """Exact law (1/n) * sum_i RR_{X_i} of randomized response on a random record."""
    params = RRParams(eps0=eps0, k=data.k)
    counts = data.counts()
    probs = np.zeros(data.k)
    for x in range(1, data.k + 1):
        if counts[x - 1]:
            probs += counts[x - 1] * rr_row(x, params)
    return CategoricalDist(probs=probs / data.n)


def subrr_exact_output_dist(data: KaryDataset, eps: float) -> CategoricalDist:
    """Exact output law of the subsampled mechanism at eps0 = ln(eps * n)."""
    return rr_mixture_dist(data, subrr_eps0(eps, data.n))


@dataclass(frozen=True)
class ComplexityReport:
    """Sufficient sample count for a stated accuracy/privacy target."""

    n_required: int
    formula_name: str
    inputs: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.n_required < 1:
            raise ValidationError(f"n_required must be >= 1, got {self.n_required}")

    def as_dict(self) -> dict:
        return {
            "n_required": self.n_required,
            "formula_name": self.formula_name,
            "inputs": dict(self.inputs),
        }


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise InvalidAlpha(f"alpha must be in (0, 1), got {alpha}")


def subrr_sample_complexity(k: int, alpha: float, eps: float) -> ComplexityReport:
    """n = ceil((k-1)(1-alpha) / (alpha*eps)), sufficient for TV error alpha."""
    _check_alpha(alpha)
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    n = max(1, _tolerant_ceil((k - 1) * (1.0 - alpha) / (alpha * eps)))
    return ComplexityReport(
        n_required=n,
        formula_name="kary_single",
        inputs={"k": k, "alpha": alpha, "eps": eps},
    )


# --- shuffled randomized response -------------------------------------------


def shurr_f(eps: float) -> float:
    """Amplification budget split: eps/(16*sqrt(3/2)) below 1, sqrt(eps)/(16*sqrt(3/2)) above."""
    if not eps > 0:
        raise ValidationError(f"eps must be positive, got {eps}")
    scale = 16.0 * math.sqrt(1.5)
    return eps / scale if eps <= 1.0 else math.sqrt(eps) / scale


def shurr_min_n(eps: float, delta: float) -> int:
    """Smallest n for which the shuffled mechanism's local parameter is positive."""
    # eps0 > 0 requires f^2 * n / ln(4/delta) > 2
    return _tolerant_ceil(2.0 * math.log(4.0 / delta) / shurr_f(eps) ** 2) + 1


def shurr_eps0(eps: float, delta: float, n: int) -> float:
    """Local parameter ln(f(eps)^2 * n / ln(4/delta) - 1)."""
    if not 0 < delta < 1:
        raise ValidationError(f"delta must be in (0, 1), got {delta}")
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    ratio = shurr_f(eps) ** 2 * n / math.log(4.0 / delta)
    if ratio <= 1.0 + 1e-9:
        raise InsufficientSamples(
            f"f(eps)^2*n/ln(4/delta) = {ratio} leaves the local parameter undefined; "
            f"need n >= {shurr_min_n(eps, delta)} at eps = {eps}, delta = {delta}"
        )
    return math.log(ratio - 1.0)


def fmt_eps1(eps0: float, delta: float, n: int, k: int) -> float:
    """Central privacy parameter of shuffled randomized response.

    Closed-form amplification-by-shuffling bound:
    log(1 + 8(e^eps0 + 1)(sqrt((k+1)/k * ln(4/delta)/n * 1/(e^eps0 + k - 1))
    + (k+1)/(k*n))).
    """
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if n < 1 or not 0 < delta < 1:
        raise ValidationError(f"need n >= 1 and delta in (0, 1), got n={n}, delta={delta}")
    e0 = math.exp(eps0)
    root = math.sqrt((k + 1) / k * math.log(4.0 / delta) / n / (e0 + k - 1))
    return math.log1p(8.0 * (e0 + 1.0) * (root + (k + 1) / (k * n)))


@dataclass(frozen=True)
class ShuRRConfig:
    """Validated parameters of one shuffled-randomized-response run."""

    eps: float
    delta: float
    m: int
    n: int
    eps0: float = field(init=False)
    f_value: float = field(init=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError(f"m must be >= 1, got {self.m}")
        if self.m > self.n:
            raise TooManyOutputs(f"requested m={self.m} outputs from n={self.n} inputs")
        eps0 = shurr_eps0(self.eps, self.delta, self.n)
        if eps0 <= 0:
            raise InsufficientSamples(
                f"derived local parameter {eps0} <= 0; "
                f"need n >= {shurr_min_n(self.eps, self.delta)}"
            )
        object.__setattr__(self, "eps0", eps0)
        object.__setattr__(self, "f_value", shurr_f(self.eps))


def shurr_run(
    data: KaryDataset, eps: float, delta: float, m: int, rng: RandomSource
) -> np.ndarray:
    """Randomize every record, shuffle uniformly, release the first m results."""
    config = ShuRRConfig(eps=eps, delta=delta, m=m, n=data.n)
    params = RRParams(eps0=config.eps0, k=data.k)
    gen = rng.generator
    randomized = _rr_apply(data.values, params, gen)
    perm = gen.permutation(data.n)
    return randomized[perm[:m]]


def shurr_weak_complexity(
    k: int, alpha: float, eps: float, delta: float, m: int
) -> ComplexityReport:
    """n = max(m, ceil(k*ln(4/delta) / (alpha*f(eps)^2))) for marginal TV error alpha."""
    _check_alpha(alpha)
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    if not 0 < delta < 1:
        raise ValidationError(f"delta must be in (0, 1), got {delta}")
    bound = k * math.log(4.0 / delta) / (alpha * shurr_f(eps) ** 2)
    n = max(m, _tolerant_ceil(bound))
    return ComplexityReport(
        n_required=n,
        formula_name="kary_weak",
        inputs={"k": k, "alpha": alpha, "eps": eps, "delta": delta, "m": m},
    )


def shurr_strong_complexity(
    k: int, alpha: float, eps: float, delta: float, m: int
) -> ComplexityReport:
    """Weak complexity at per-output tolerance alpha/m (union bound)."""
    _check_alpha(alpha)
    if m < 1:
        raise ValidationError(f"m must be >= 1, got {m}")
    per_output = alpha / m
    if per_output < STRONG_ALPHA_FLOOR:
        raise PrecisionLimit(
            f"per-output tolerance alpha/m = {per_output} below floor {STRONG_ALPHA_FLOOR}"
        )
    weak = shurr_weak_complexity(k, per_output, eps, delta, m)
    return ComplexityReport(
        n_required=weak.n_required,
        formula_name="kary_strong",
        inputs={"k": k, "alpha": alpha, "eps": eps, "delta": delta, "m": m},
    )
