"""Combinators that lift single-samplers to multi-samplers.

Two generic constructions:

* repetition: run a single-sampler on m disjoint consecutive blocks of
  input; the outputs are i.i.d. with the single-sampler's marginal, so the
  per-output tolerance is unchanged.
* precision: run a sampler with per-output tolerance alpha/m; a union bound
  makes the m-fold product law alpha-close to the target product.

Composing the two turns a single-sampler into a strong multi-sampler with
sample complexity m * n(alpha/m).  Privacy is inherited: each record is
consumed by exactly one inner call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

from .core import PrivacyBudget, RandomSource
from .errors import InsufficientData, PrecisionLimit
from .gaussian import (
    PureGaussianSamplerParams,
    bounded_cov_clip_bound,
    pure_gaussian_sample,
    pure_sample_complexity,
    zcdp_bounded_cov_complexity,
    zcdp_bounded_cov_sample,
    zcdp_known_cov_complexity,
    zcdp_known_cov_sample,
)
from .kary import (
    STRONG_ALPHA_FLOOR,
    shurr_run,
    shurr_weak_complexity,
    subrr_sample,
    subrr_sample_complexity,
)

OnCall = Callable[[int, int, int, float], None]


@dataclass(frozen=True)
class SamplerSpec:
    """A sampler plus the metadata the combinators need to drive it.

    ``n_per_call(alpha)`` is the input size one invocation consumes at
    tolerance alpha; ``run(data, alpha, rng)`` performs one invocation.
    Single-samplers return one draw per call, weak samplers return their m
    outputs in one call.
    """

    kind: str
    family: str
    alpha: float
    n_per_call: Callable[[float], int]
    run: Callable[[Any, float, RandomSource], Any]
    budget: PrivacyBudget | None = None


def _check_tolerance(alpha: float, m: int) -> float:
    per_output = alpha / m
    if per_output < STRONG_ALPHA_FLOOR:
        raise PrecisionLimit(
            f"per-output tolerance alpha/m = {per_output} below floor {STRONG_ALPHA_FLOOR}"
        )
    return per_output


def weak_via_repetition(
    single: SamplerSpec, m: int, data, rng: RandomSource, on_call: OnCall | None = None
) -> list:
    """m i.i.d. outputs from m disjoint consecutive blocks of the input."""
    block = single.n_per_call(single.alpha)
    if data.n < m * block:
        raise InsufficientData(
            f"need m*n = {m}*{block} = {m * block} records, got {data.n}"
        )
    outputs = []
    for i in range(m):
        start, stop = i * block, (i + 1) * block
        if on_call is not None:
            on_call(i, start, stop, single.alpha)
        outputs.append(single.run(data.subset(start, stop), single.alpha, rng.child(i)))
    return outputs


def strong_via_precision(
    weak: SamplerSpec, m: int, alpha: float, data, rng: RandomSource,
    on_call: OnCall | None = None,
) -> list:
    """Run the weak sampler once at per-output tolerance alpha/m."""
    per_output = _check_tolerance(alpha, m)
    needed = weak.n_per_call(per_output)
    if data.n < needed:
        raise InsufficientData(f"need {needed} records at tolerance {per_output}, got {data.n}")
    if on_call is not None:
        on_call(0, 0, data.n, per_output)
    return list(weak.run(data, per_output, rng.child(0)))


def strong_via_both(
    single: SamplerSpec, m: int, alpha: float, data, rng: RandomSource,
    on_call: OnCall | None = None,
) -> list:
    """Single-sampler at tolerance alpha/m repeated on m disjoint blocks."""
    per_output = _check_tolerance(alpha, m)
    tightened = SamplerSpec(
        kind=single.kind,
        family=single.family,
        alpha=per_output,
        n_per_call=single.n_per_call,
        run=single.run,
        budget=single.budget,
    )
    return weak_via_repetition(tightened, m, data, rng, on_call=on_call)


def repetition_complexity(single: SamplerSpec, m: int) -> int:
    """Total input size m * n(alpha) consumed by repetition."""
    return m * single.n_per_call(single.alpha)


def strong_both_complexity(single: SamplerSpec, m: int, alpha: float) -> int:
    """Total input size m * n(alpha/m) consumed by precision-tightened repetition."""
    return m * single.n_per_call(_check_tolerance(alpha, m))


# --- sampler factories --------------------------------------------------------


def subrr_sampler(k: int, eps: float, alpha: float) -> SamplerSpec:
    """Single-sampler spec for the subsampled randomized-response mechanism."""
    return SamplerSpec(
        kind="single",
        family="kary",
        alpha=alpha,
        n_per_call=lambda a: subrr_sample_complexity(k, a, eps).n_required,
        run=lambda block, a, rng: subrr_sample(block, eps, rng),
        budget=PrivacyBudget.pure(eps),
    )


def shurr_sampler(k: int, eps: float, delta: float, m: int, alpha: float) -> SamplerSpec:
    """Weak multi-sampler spec for the shuffled randomized-response mechanism."""
    return SamplerSpec(
        kind="weak",
        family="kary",
        alpha=alpha,
        n_per_call=lambda a: shurr_weak_complexity(k, a, eps, delta, m).n_required,
        run=lambda data, a, rng: shurr_run(data, eps, delta, m, rng),
        budget=PrivacyBudget.approx(eps, delta),
    )


def pure_gaussian_sampler(
    d: int, R: float, eps: float, alpha: float, c: float = 2.0, C: float = 1.0
) -> SamplerSpec:
    """Single-sampler spec for the pure-DP known-covariance Gaussian mechanism."""
    return SamplerSpec(
        kind="single",
        family="gaussian-pure",
        alpha=alpha,
        n_per_call=lambda a: pure_sample_complexity(d, R, a, eps, C=C, c=c).n_required,
        run=lambda block, a, rng: pure_gaussian_sample(
            block, PureGaussianSamplerParams(R=R, d=d, alpha=a, eps=eps, c=c), rng
        ),
        budget=PrivacyBudget.pure(eps),
    )


def zcdp_known_cov_sampler(d: int, R: float, eps: float, alpha: float) -> SamplerSpec:
    """Single-sampler spec for the zCDP known-covariance Gaussian mechanism."""
    return SamplerSpec(
        kind="single",
        family="gaussian-zcdp-known",
        alpha=alpha,
        n_per_call=lambda a: zcdp_known_cov_complexity(d, R, a, eps).n_required,
        run=lambda block, a, rng: zcdp_known_cov_sample(block, R, eps, a, rng),
        budget=PrivacyBudget.zcdp(eps),
    )


def zcdp_bounded_cov_sampler(d: int, R: float, eps: float, alpha: float) -> SamplerSpec:
    """Single-sampler spec for the zCDP bounded-covariance Gaussian mechanism."""

    def n_per_call(a: float) -> int:
        n = zcdp_bounded_cov_complexity(d, R, a, eps).n_required
        return 3 * int(math.ceil(n / 3))  # rows split as n1 = n2 = n/3

    def run(block, a: float, rng: RandomSource):
        B = bounded_cov_clip_bound(d, R, a)
        sigma2 = a / (4.0 * math.sqrt(d))
        return zcdp_bounded_cov_sample(block, B, sigma2, rng)

    return SamplerSpec(
        kind="single",
        family="gaussian-zcdp-bounded",
        alpha=alpha,
        n_per_call=n_per_call,
        run=run,
        budget=PrivacyBudget.zcdp(eps),
    )
