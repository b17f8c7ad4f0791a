"""Private single-samplers for Gaussians with known or bounded covariance.

Pure DP path: clip rows to norm B, privatize the sum with Euclidean-Laplace
noise of scale ``b = B/eps`` (an l2-calibrated analogue of the scalar Laplace
mechanism), then add the Gaussian that turns the noisy mean into an
approximate fresh draw.  zCDP paths: clipped empirical mean plus Gaussian
noise, with the noise scale tied to the replacement sensitivity of the
statistic.

A note on sensitivity: replacing one row can move the clipped sum by up to
``2B``, while the pure-DP calibration below uses ``b = B/eps`` (a per-row
budget of eps per unit of sum movement over B).  ``ELapMechanismParams``
exposes ``sensitivity_multiplier`` (default 1.0; 2.0 for the conservative
replacement bound) so the realized log-density ratio can be checked either
way by the audit module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import RandomSource, VectorDataset
from .elap import ELapParams, elap_sample
from .errors import (
    BadSplit,
    InvalidAlpha,
    InvalidOrder,
    NormViolation,
    TooFewSamples,
    ValidationError,
)
from .kary import ComplexityReport, _tolerant_ceil


def clip_to_ball(x, B: float) -> np.ndarray:
    """Project x onto the l2 ball of radius B; direction is preserved."""
    if not B > 0:
        raise ValidationError(f"clip bound must be positive, got {B}")
    vec = np.asarray(x, dtype=np.float64)
    norm = float(np.linalg.norm(vec))
    if norm <= B:
        return vec.copy()
    return vec * (B / norm)


def _clip_rows(rows: np.ndarray, B: float) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    scale = np.minimum(B / np.maximum(norms, 1e-300), 1.0)
    return rows * scale[:, None]


@dataclass(frozen=True)
class ELapMechanismParams:
    """Clip bound B, privacy budget eps, and the derived noise scale b.

    ``sensitivity_multiplier`` scales b: 1.0 reproduces the stated calibration
    b = B/eps; 2.0 covers the worst-case replacement movement of the sum.
    """

    B: float
    eps: float
    sensitivity_multiplier: float = 1.0

    def __post_init__(self):
        if not self.B > 0:
            raise ValidationError(f"B must be positive, got {self.B}")
        if not self.eps > 0:
            raise ValidationError(f"eps must be positive, got {self.eps}")
        if not self.sensitivity_multiplier > 0:
            raise ValidationError("sensitivity_multiplier must be positive")

    @property
    def b(self) -> float:
        return self.sensitivity_multiplier * self.B / self.eps


def elap_mechanism(
    data: VectorDataset,
    params: ELapMechanismParams,
    rng: RandomSource,
    *,
    _noise=None,
) -> np.ndarray:
    """Noisy vector sum: Euclidean-Laplace noise of scale b added to sum of rows.

    The caller is responsible for clipping; rows whose norm exceeds B by more
    than 1e-9 are rejected.
    """
    norms = np.linalg.norm(data.rows, axis=1)
    worst = float(norms.max())
    if worst > params.B + 1e-9:
        raise NormViolation(f"input row norm {worst} exceeds bound B={params.B}")
    total = data.rows.sum(axis=0)
    if _noise is None:  # test hook: pass a fixed noise vector to disable sampling
        _noise = elap_sample(ELapParams(d=data.d, b=params.b), rng)
    return total + np.asarray(_noise, dtype=np.float64)


@dataclass(frozen=True)
class PureGaussianSamplerParams:
    """Mean bound R, dimension d, tolerance alpha, budget eps, clip constant c.

    The clip radius is B = R + c * sqrt(d * ln(1/alpha)).
    """

    R: float
    d: int
    alpha: float
    eps: float
    c: float = 2.0

    def __post_init__(self):
        if not self.R > 0 or self.d < 1 or not self.eps > 0 or not self.c > 0:
            raise ValidationError("R, d, eps, c must all be positive")
        if not 0 < self.alpha < 1:
            raise InvalidAlpha(f"alpha must be in (0, 1), got {self.alpha}")

    @property
    def B(self) -> float:
        return self.R + self.c * math.sqrt(self.d * math.log(1.0 / self.alpha))


def pure_gaussian_sample(
    data: VectorDataset,
    params: PureGaussianSamplerParams,
    rng: RandomSource,
    *,
    _elap_noise=None,
    _gauss_noise=None,
) -> np.ndarray:
    """Pure-DP approximate fresh draw from N(mu, I) given n >= 2 input rows.

    Clips rows to B, privatizes their sum with Euclidean-Laplace noise at
    scale B/eps, and returns Z + (noisy sum)/n with Z ~ N(0, ((n-1)/n) I).
    """
    if data.d != params.d:
        raise ValidationError(f"data dimension {data.d} != params dimension {params.d}")
    n = data.n
    if n < 2:
        raise TooFewSamples(f"need n >= 2 for the (n-1)/n noise calibration, got {n}")
    clipped = VectorDataset(rows=_clip_rows(data.rows, params.B))
    noisy_sum = elap_mechanism(
        clipped, ELapMechanismParams(B=params.B, eps=params.eps), rng, _noise=_elap_noise
    )
    sigma = math.sqrt((n - 1) / n)
    if _gauss_noise is None:  # test hook
        _gauss_noise = sigma * rng.generator.standard_normal(params.d)
    return np.asarray(_gauss_noise, dtype=np.float64) + noisy_sum / n


def pure_sample_complexity(
    d: int, R: float, alpha: float, eps: float, C: float = 1.0, c: float = 2.0
) -> ComplexityReport:
    """n = ceil(C * d * B * ln(d/alpha) * ln(1/alpha) / (alpha * eps))."""
    params = PureGaussianSamplerParams(R=R, d=d, alpha=alpha, eps=eps, c=c)
    if not C > 0:
        raise ValidationError(f"C must be positive, got {C}")
    bound = C * d * params.B * math.log(d / alpha) * math.log(1.0 / alpha) / (alpha * eps)
    return ComplexityReport(
        n_required=max(2, _tolerant_ceil(bound)),
        formula_name="gaussian_pure",
        inputs={"d": d, "R": R, "alpha": alpha, "eps": eps, "C": C, "c": c, "B": params.B},
    )


# --- zCDP samplers -----------------------------------------------------------


def known_cov_clip_bound(d: int, R: float, alpha: float) -> float:
    """Clip radius R + sqrt(2 * (d + ln(1/alpha))) for the known-covariance sampler."""
    if not 0 < alpha < 1:
        raise InvalidAlpha(f"alpha must be in (0, 1), got {alpha}")
    return R + math.sqrt(2.0 * (d + math.log(1.0 / alpha)))


def zcdp_known_cov_sample(
    data: VectorDataset,
    R: float,
    eps: float,
    alpha: float,
    rng: RandomSource,
    *,
    _gauss_noise=None,
) -> np.ndarray:
    """Clipped empirical mean plus N(0, ((n-1)/n) I) noise, under eps^2/2-zCDP.

    Requires n large enough that the noise scale covers the mean's replacement
    sensitivity 2B/n, i.e. 2B/(eps*n) <= sqrt((n-1)/n).
    """
    n = data.n
    B = known_cov_clip_bound(data.d, R, alpha)
    if n < 2 or 2.0 * B / (eps * n) > math.sqrt((n - 1) / n):
        needed = zcdp_known_cov_complexity(data.d, R, alpha, eps).n_required
        raise TooFewSamples(
            f"zCDP condition sigma >= 2B/(eps*n) fails at n={n}; need n >= {needed}"
        )
    clipped_mean = _clip_rows(data.rows, B).mean(axis=0)
    sigma = math.sqrt((n - 1) / n)
    if _gauss_noise is None:  # test hook
        _gauss_noise = sigma * rng.generator.standard_normal(data.d)
    return clipped_mean + np.asarray(_gauss_noise, dtype=np.float64)


def zcdp_known_cov_complexity(d: int, R: float, alpha: float, eps: float) -> ComplexityReport:
    """Smallest n >= 2 with 2B/(eps*n) <= sqrt((n-1)/n), by integer bisection."""
    if not eps > 0 or not R > 0 or d < 1:
        raise ValidationError("d, R, eps must be positive")
    B = known_cov_clip_bound(d, R, alpha)

    def ok(n: int) -> bool:
        return 2.0 * B / (eps * n) <= math.sqrt((n - 1) / n)

    hi = 2
    while not ok(hi):
        hi *= 2
    lo = max(2, hi // 2)
    while lo < hi:
        mid = (lo + hi) // 2
        if ok(mid):
            hi = mid
        else:
            lo = mid + 1
    return ComplexityReport(
        n_required=lo,
        formula_name="gaussian_zcdp_known",
        inputs={"d": d, "R": R, "alpha": alpha, "eps": eps, "B": B},
    )


def bounded_cov_clip_bound(d: int, R: float, alpha: float) -> float:
    """Clip radius R + sqrt(2 * d * ln(2/alpha)) for the bounded-covariance sampler."""
    if not 0 < alpha < 1:
        raise InvalidAlpha(f"alpha must be in (0, 1), got {alpha}")
    return R + math.sqrt(2.0 * d * math.log(2.0 / alpha))


def bounded_cov_sensitivity(n1: int, n2: int, B: float) -> float:
    """Replacement sensitivity of the pre-noise statistic, by direct maximization.

    A changed row enters with coefficient 1/n1 (mean block) or
    sqrt((1 - 1/n1)/(2*n2)) (difference block) and can move by at most 2B.
    """
    if n1 < 1 or n2 < 1:
        raise ValidationError("n1 and n2 must be >= 1")
    coeff = max(1.0 / n1, math.sqrt((1.0 - 1.0 / n1) / (2.0 * n2)))
    return 2.0 * B * coeff


def zcdp_bounded_cov_sample(
    data: VectorDataset,
    B: float,
    sigma2: float,
    rng: RandomSource,
    n1: int | None = None,
    n2: int | None = None,
    *,
    _gauss_noise=None,
) -> np.ndarray:
    """Bounded-covariance single draw from n1 + 2*n2 clipped rows.

    Output is Z + (1/n1) * sum of the first n1 rows
    + sqrt((1 - 1/n1)/(2*n2)) * sum of consecutive differences of the
    remaining 2*n2 rows, with Z ~ N(0, sigma2 * I).  Defaults split the rows
    as n1 = n2 = n/3.
    """
    if not sigma2 > 0:
        raise ValidationError(f"sigma2 must be positive, got {sigma2}")
    n = data.n
    if n1 is None and n2 is None:
        if n % 3 != 0:
            raise BadSplit(f"row count {n} is not divisible by 3 for the n1 = n2 default")
        n1 = n2 = n // 3
    if n1 is None or n2 is None or n1 < 1 or n2 < 1:
        raise BadSplit("both n1 and n2 must be given and >= 1")
    if n != n1 + 2 * n2:
        raise BadSplit(f"row count {n} != n1 + 2*n2 = {n1 + 2 * n2}")

    clipped = _clip_rows(data.rows, B)
    mean_part = clipped[:n1].sum(axis=0) / n1
    pairs = clipped[n1:].reshape(n2, 2, data.d)
    diff_part = math.sqrt((1.0 - 1.0 / n1) / (2.0 * n2)) * (
        pairs[:, 0, :] - pairs[:, 1, :]
    ).sum(axis=0)
    if _gauss_noise is None:  # test hook
        _gauss_noise = math.sqrt(sigma2) * rng.generator.standard_normal(data.d)
    return np.asarray(_gauss_noise, dtype=np.float64) + mean_part + diff_part


def zcdp_bounded_cov_complexity(d: int, R: float, alpha: float, eps: float) -> ComplexityReport:
    """n = ceil(4 * sqrt(d) * B^2 / (alpha * eps^2)) with B = R + sqrt(2d ln(2/alpha))."""
    if not eps > 0 or not R > 0 or d < 1:
        raise ValidationError("d, R, eps must be positive")
    B = bounded_cov_clip_bound(d, R, alpha)
    bound = 4.0 * math.sqrt(d) * B * B / (alpha * eps * eps)
    return ComplexityReport(
        n_required=max(3, _tolerant_ceil(bound)),
        formula_name="gaussian_zcdp_bounded",
        inputs={"d": d, "R": R, "alpha": alpha, "eps": eps, "B": B},
    )


@dataclass(frozen=True)
class ZcdpParams:
    """Parameters of a zCDP Gaussian mechanism run, for auditing.

    Only structural consistency is validated here; whether ``sigma2`` covers
    the sensitivity at budget ``eps`` is exactly what the audit measures.
    """

    variant: str
    B: float
    sigma2: float
    eps: float
    n: int
    n1: int | None = None
    n2: int | None = None

    def __post_init__(self):
        if self.variant not in ("known_cov", "bounded_cov"):
            raise ValidationError(f"unknown variant {self.variant!r}")
        if not self.B > 0 or not self.sigma2 > 0 or not self.eps > 0 or self.n < 1:
            raise ValidationError("B, sigma2, eps must be positive and n >= 1")
        if self.variant == "bounded_cov":
            if self.n1 is None or self.n2 is None:
                raise ValidationError("bounded_cov requires n1 and n2")
            if self.n1 != self.n2:
                raise ValidationError("bounded_cov uses the n1 = n2 parameter choice")
            if self.n != self.n1 + 2 * self.n2:
                raise BadSplit(f"n={self.n} != n1 + 2*n2 = {self.n1 + 2 * self.n2}")

    def sensitivity(self) -> float:
        """Replacement sensitivity of the pre-noise statistic."""
        if self.variant == "known_cov":
            return 2.0 * self.B / self.n
        return bounded_cov_sensitivity(self.n1, self.n2, self.B)


def gaussian_mech_renyi(delta_norm: float, sigma: float, order: float) -> float:
    """Renyi divergence order * delta_norm^2 / (2 * sigma^2) of a shifted Gaussian."""
    if delta_norm < 0:
        raise ValidationError(f"delta_norm must be nonnegative, got {delta_norm}")
    if not sigma > 0:
        raise ValidationError(f"sigma must be positive, got {sigma}")
    if not order > 1:
        raise InvalidOrder(f"order must be > 1, got {order}")
    return order * delta_norm * delta_norm / (2.0 * sigma * sigma)
