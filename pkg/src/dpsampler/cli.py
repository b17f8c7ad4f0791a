"""Command-line entry point for reproducible private-sampling experiments.

Subcommands: ``sample-kary``, ``sample-gaussian``, ``elap``, ``complexity``,
``tvdist``, ``audit``, ``sweep``.  Every randomized command requires an
explicit ``--seed``; every run emits a JSON RunReport on stdout echoing the
config and all derived parameters, so any artifact can be regenerated from
its report.  Exit codes: 0 success/pass, 1 usage or data error, 2 binding
audit failure, 3 advisory audit failure.
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .audit import (
    audit_elap_mechanism,
    audit_rr_local,
    audit_shurr_marginal,
    audit_subrr_pure,
    audit_zcdp_gaussian,
    report_as_dict,
)
from .core import (
    RandomSource,
    read_kary_csv,
    read_vector_csv,
    write_kary_csv,
    write_vector_csv,
)
from .divergences import tv_estimate_binned
from .elap import ELapParams, GammaParams, elap_sample, elap_tail_radius, gamma_exact_tail
from .errors import ConfigInvalid, DPSamplerError
from .gaussian import (
    PureGaussianSamplerParams,
    ZcdpParams,
    bounded_cov_clip_bound,
    known_cov_clip_bound,
    pure_gaussian_sample,
    pure_sample_complexity,
    zcdp_bounded_cov_complexity,
    zcdp_bounded_cov_sample,
    zcdp_known_cov_complexity,
    zcdp_known_cov_sample,
)
from .kary import (
    ShuRRConfig,
    fmt_eps1,
    shurr_run,
    shurr_strong_complexity,
    shurr_weak_complexity,
    subrr_eps0,
    subrr_sample,
    subrr_sample_complexity,
)
from .multisampling import (
    pure_gaussian_sampler,
    shurr_sampler,
    strong_via_both,
    strong_via_precision,
    subrr_sampler,
    weak_via_repetition,
    zcdp_bounded_cov_sampler,
    zcdp_known_cov_sampler,
)


@dataclass(frozen=True)
class ExperimentConfig:
    """One CLI task plus everything needed to reproduce it."""

    task: str
    params: dict = field(default_factory=dict)
    input_path: str | None = None
    output_path: str | None = None
    seed: int | None = None

    def as_dict(self) -> dict:
        return {
            "task": self.task,
            "params": dict(self.params),
            "input_path": self.input_path,
            "output_path": self.output_path,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            return cls(
                task=raw["task"],
                params=dict(raw.get("params", {})),
                input_path=raw.get("input_path"),
                output_path=raw.get("output_path"),
                seed=raw.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"malformed config: {exc}") from exc


@dataclass(frozen=True)
class RunReport:
    """Config echo, artifact summary, derived parameters, and provenance."""

    config: dict
    outputs: dict
    derived: dict
    wall_clock_seconds: float
    version: str
    exit_code: int

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "outputs": self.outputs,
            "derived": self.derived,
            "wall_clock_seconds": self.wall_clock_seconds,
            "version": self.version,
            "exit_code": self.exit_code,
        }


def _need(params: dict, *names):
    missing = [name for name in names if params.get(name) is None]
    if missing:
        raise ConfigInvalid(f"missing required parameter(s): {', '.join(missing)}")
    return [params[name] for name in names]


def _rng(config: ExperimentConfig) -> RandomSource:
    if config.seed is None:
        raise ConfigInvalid("this task is randomized; an explicit --seed is required")
    return RandomSource(config.seed)


def _run_sample_kary(config: ExperimentConfig):
    if config.input_path is None:
        raise ConfigInvalid("sample-kary requires --in")
    params = config.params
    (mode, eps) = _need(params, "mode", "eps")
    data = read_kary_csv(config.input_path, k=params.get("k"))
    rng = _rng(config)
    derived = {"k": data.k, "n": data.n}

    if mode == "sub":
        derived["eps0"] = subrr_eps0(eps, data.n)
        outputs = [subrr_sample(data, eps, rng)]
    elif mode == "shuffle":
        (delta, m) = _need(params, "delta", "m")
        cfg = ShuRRConfig(eps=eps, delta=delta, m=m, n=data.n)
        derived.update(
            eps0=cfg.eps0,
            f_value=cfg.f_value,
            eps1=fmt_eps1(cfg.eps0, delta, data.n, data.k),
        )
        outputs = list(shurr_run(data, eps, delta, m, rng))
    elif mode in ("repeat", "precision", "both"):
        (alpha, m) = _need(params, "alpha", "m")
        if mode == "repeat":
            spec = subrr_sampler(data.k, eps, alpha)
            derived["n_per_call"] = spec.n_per_call(alpha)
            outputs = weak_via_repetition(spec, m, data, rng)
        elif mode == "precision":
            (delta,) = _need(params, "delta")
            spec = shurr_sampler(data.k, eps, delta, m, alpha)
            derived["n_required"] = spec.n_per_call(alpha / m)
            outputs = strong_via_precision(spec, m, alpha, data, rng)
        else:
            spec = subrr_sampler(data.k, eps, alpha)
            derived["n_per_call"] = spec.n_per_call(alpha / m)
            outputs = strong_via_both(spec, m, alpha, data, rng)
    else:
        raise ConfigInvalid(f"unknown sample-kary mode {mode!r}")

    if config.output_path:
        write_kary_csv(config.output_path, outputs)
    summary = {"count": len(outputs), "path": config.output_path}
    if config.output_path is None:
        summary["values"] = [int(v) for v in outputs]
    return summary, derived, 0


def _gaussian_sampler_spec(variant: str, d: int, R: float, eps: float, alpha: float, c: float):
    if variant == "pure":
        return pure_gaussian_sampler(d, R, eps, alpha, c=c)
    if variant == "zcdp-known":
        return zcdp_known_cov_sampler(d, R, eps, alpha)
    if variant == "zcdp-bounded":
        return zcdp_bounded_cov_sampler(d, R, eps, alpha)
    raise ConfigInvalid(f"unknown sample-gaussian variant {variant!r}")


def _run_sample_gaussian(config: ExperimentConfig):
    if config.input_path is None:
        raise ConfigInvalid("sample-gaussian requires --in")
    params = config.params
    (variant, alpha, eps, R) = _need(params, "variant", "alpha", "eps", "R")
    data = read_vector_csv(config.input_path)
    if params.get("dim") is not None and params["dim"] != data.d:
        raise ConfigInvalid(f"--dim {params['dim']} does not match data dimension {data.d}")
    rng = _rng(config)
    mode = params.get("mode") or "once"
    c = float(params.get("c") or 2.0)
    derived = {"d": data.d, "n": data.n}

    if mode == "once":
        count = int(params.get("count") or 1)
        if variant == "pure":
            sampler_params = PureGaussianSamplerParams(
                R=R, d=data.d, alpha=alpha, eps=eps, c=c
            )
            derived.update(B=sampler_params.B, sigma2=(data.n - 1) / data.n)
            draw = lambda child: pure_gaussian_sample(data, sampler_params, child)
        elif variant == "zcdp-known":
            derived.update(
                B=known_cov_clip_bound(data.d, R, alpha), sigma2=(data.n - 1) / data.n
            )
            draw = lambda child: zcdp_known_cov_sample(data, R, eps, alpha, child)
        elif variant == "zcdp-bounded":
            B = bounded_cov_clip_bound(data.d, R, alpha)
            sigma2 = alpha / (4.0 * math.sqrt(data.d))
            derived.update(B=B, sigma2=sigma2)
            draw = lambda child: zcdp_bounded_cov_sample(data, B, sigma2, child)
        else:
            raise ConfigInvalid(f"unknown sample-gaussian variant {variant!r}")
        rows = np.vstack([draw(rng.child(i)) for i in range(count)])
    elif mode in ("repeat", "precision", "both"):
        (m,) = _need(params, "m")
        spec = _gaussian_sampler_spec(variant, data.d, R, eps, alpha, c)
        if mode == "repeat":
            derived["n_per_call"] = spec.n_per_call(alpha)
            outputs = weak_via_repetition(spec, int(m), data, rng)
        else:
            # no non-repetition weak gaussian sampler exists, so precision
            # degenerates to repetition at the tightened tolerance
            derived["n_per_call"] = spec.n_per_call(alpha / int(m))
            outputs = strong_via_both(spec, int(m), alpha, data, rng)
        rows = np.vstack(outputs)
    else:
        raise ConfigInvalid(f"unknown sample-gaussian mode {mode!r}")

    if config.output_path:
        write_vector_csv(config.output_path, rows)
    return {"count": int(rows.shape[0]), "path": config.output_path}, derived, 0


def _run_elap(config: ExperimentConfig):
    params = config.params
    (d, b) = _need(params, "dim", "scale")
    elap_params = ELapParams(d=int(d), b=b)
    if params.get("tail"):
        (alpha,) = _need(params, "alpha")
        radius = elap_tail_radius(elap_params, alpha)
        exact = gamma_exact_tail(GammaParams(shape=float(d), rate=1.0 / b), radius)
        return {}, {"tail_radius": radius, "exact_tail": float(exact), "alpha": alpha}, 0
    (count,) = _need(params, "count")
    rng = _rng(config)
    samples = elap_sample(elap_params, rng, size=int(count))
    if config.output_path:
        write_vector_csv(config.output_path, samples)
    return {"count": int(count), "path": config.output_path}, {"d": int(d), "scale": b}, 0


def _run_complexity(config: ExperimentConfig):
    params = config.params
    (family, task) = _need(params, "family", "task")
    if family == "kary":
        (k, alpha, eps) = _need(params, "k", "alpha", "eps")
        if task == "single":
            report = subrr_sample_complexity(int(k), alpha, eps)
        elif task == "weak":
            (delta, m) = _need(params, "delta", "m")
            report = shurr_weak_complexity(int(k), alpha, eps, delta, int(m))
        elif task == "strong":
            (delta, m) = _need(params, "delta", "m")
            report = shurr_strong_complexity(int(k), alpha, eps, delta, int(m))
        else:
            raise ConfigInvalid(f"unknown kary task {task!r}")
    elif family == "gaussian":
        (d, R, alpha, eps) = _need(params, "dim", "R", "alpha", "eps")
        if task == "pure":
            report = pure_sample_complexity(
                int(d), R, alpha, eps,
                C=float(params.get("C") or 1.0), c=float(params.get("c") or 2.0),
            )
        elif task == "zcdp-known":
            report = zcdp_known_cov_complexity(int(d), R, alpha, eps)
        elif task == "zcdp-bounded":
            report = zcdp_bounded_cov_complexity(int(d), R, alpha, eps)
        else:
            raise ConfigInvalid(f"unknown gaussian task {task!r}")
    else:
        raise ConfigInvalid(f"unknown family {family!r}")
    return {"report": report.as_dict()}, {"n_required": report.n_required}, 0


def _run_tvdist(config: ExperimentConfig):
    params = config.params
    (path_p, path_q, bins) = _need(params, "p", "q", "bins")
    rng = _rng(config)
    estimate = tv_estimate_binned(
        read_vector_csv(path_p), read_vector_csv(path_q), int(bins), rng
    )
    return {"report": estimate.as_dict()}, estimate.as_dict(), 0


def _run_audit(config: ExperimentConfig):
    params = config.params
    (mechanism,) = _need(params, "mechanism")
    if mechanism == "rr":
        (k, eps0) = _need(params, "k", "eps0")
        report = audit_rr_local(int(k), eps0, claimed_eps=params.get("claimed_eps"))
    elif mechanism == "subrr":
        (k, n, eps) = _need(params, "k", "n", "eps")
        report = audit_subrr_pure(int(k), int(n), eps, claimed_eps=params.get("claimed_eps"))
    elif mechanism == "shurr":
        (k, n, eps, delta) = _need(params, "k", "n", "eps", "delta")
        report = audit_shurr_marginal(
            int(k), int(n), eps, delta, int(params.get("runs") or 10**4), _rng(config),
            eps0=params.get("eps0"),
        )
    elif mechanism == "elap":
        (d, B, eps) = _need(params, "dim", "B", "eps")
        report = audit_elap_mechanism(
            int(d), B, eps, int(params.get("probes") or 10**4), _rng(config)
        )
    elif mechanism == "zcdp":
        (variant, B, sigma2, eps, n) = _need(params, "variant", "B", "sigma2", "eps", "n")
        zp = ZcdpParams(
            variant=variant, B=B, sigma2=sigma2, eps=eps, n=int(n),
            n1=params.get("n1"), n2=params.get("n2"),
        )
        orders = params.get("orders") or [1.5, 2.0, 4.0, 16.0]
        report = audit_zcdp_gaussian(zp, orders)
    else:
        raise ConfigInvalid(f"unknown audit mechanism {mechanism!r}")

    if report.verdict == "pass":
        code = 0
    else:
        code = 3 if report.advisory else 2
    return {"report": report_as_dict(report)}, report.details, code


def table_sweep(family: str, grid: dict) -> tuple[list[str], list[list]]:
    """Evaluate every applicable complexity calculator over a parameter grid.

    Returns a (header, rows) table with one row per grid cell and one column
    per calculator, labeled by calculator name.
    """
    if not grid or any(len(v) == 0 for v in grid.values()):
        raise ConfigInvalid("sweep grid must be nonempty")
    keys = sorted(grid)
    if family == "kary":
        needed = {"k", "alpha", "eps", "delta", "m"}
        columns = ["kary_single", "kary_weak", "kary_strong"]
    elif family == "gaussian":
        needed = {"dim", "R", "alpha", "eps"}
        columns = ["gaussian_pure", "gaussian_zcdp_known", "gaussian_zcdp_bounded"]
    else:
        raise ConfigInvalid(f"unknown family {family!r}")
    if set(keys) != needed:
        raise ConfigInvalid(f"{family} sweep needs exactly the parameters {sorted(needed)}")

    rows = []
    for combo in itertools.product(*(grid[key] for key in keys)):
        cell = dict(zip(keys, combo))
        if family == "kary":
            values = [
                subrr_sample_complexity(int(cell["k"]), cell["alpha"], cell["eps"]).n_required,
                shurr_weak_complexity(
                    int(cell["k"]), cell["alpha"], cell["eps"], cell["delta"], int(cell["m"])
                ).n_required,
                shurr_strong_complexity(
                    int(cell["k"]), cell["alpha"], cell["eps"], cell["delta"], int(cell["m"])
                ).n_required,
            ]
        else:
            values = [
                pure_sample_complexity(int(cell["dim"]), cell["R"], cell["alpha"], cell["eps"]).n_required,
                zcdp_known_cov_complexity(int(cell["dim"]), cell["R"], cell["alpha"], cell["eps"]).n_required,
                zcdp_bounded_cov_complexity(int(cell["dim"]), cell["R"], cell["alpha"], cell["eps"]).n_required,
            ]
        rows.append([cell[key] for key in keys] + values)
    return keys + columns, rows


def _run_sweep(config: ExperimentConfig):
    params = config.params
    (family,) = _need(params, "family")
    grid = {k: v for k, v in params.items() if k != "family" and v is not None}
    header, rows = table_sweep(family, grid)
    if config.output_path:
        with open(config.output_path, "w") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(str(v) for v in row) + "\n")
    return {"rows": len(rows), "path": config.output_path, "header": header}, {}, 0


_TASKS = {
    "sample-kary": _run_sample_kary,
    "sample-gaussian": _run_sample_gaussian,
    "elap": _run_elap,
    "complexity": _run_complexity,
    "tvdist": _run_tvdist,
    "audit": _run_audit,
    "sweep": _run_sweep,
}


def run(config: ExperimentConfig) -> RunReport:
    """Dispatch a validated config to its task and wrap the result in a report."""
    if config.task not in _TASKS:
        raise ConfigInvalid(f"unknown task {config.task!r}")
    start = time.perf_counter()
    outputs, derived, exit_code = _TASKS[config.task](config)
    return RunReport(
        config=config.as_dict(),
        outputs=outputs,
        derived=derived,
        wall_clock_seconds=time.perf_counter() - start,
        version=__version__,
        exit_code=exit_code,
    )


class _Parser(argparse.ArgumentParser):
    # usage errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(1)


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",")]


def _build_parser() -> _Parser:
    parser = _Parser(prog="dpsampler", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed_required: bool):
        p.add_argument("--seed", type=int, required=seed_required, default=None)
        p.add_argument("--out", default=None, help="artifact output path")
        p.add_argument("--json", default=None, help="also write the run report here")

    p = sub.add_parser("sample-kary", help="private samples from a finite-domain dataset")
    p.add_argument("--mode", required=True, choices=["sub", "shuffle", "repeat", "precision", "both"])
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    common(p, seed_required=True)

    p = sub.add_parser("sample-gaussian", help="private samples from a vector dataset")
    p.add_argument("--variant", required=True, choices=["pure", "zcdp-known", "zcdp-bounded"])
    p.add_argument("--mode", default="once", choices=["once", "repeat", "precision", "both"])
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--in", dest="input_path", required=True)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--count", type=int, default=1, help="independent runs on the same data")
    common(p, seed_required=True)

    p = sub.add_parser("elap", help="sample the Euclidean-Laplace distribution or query its tail")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--tail", action="store_true")
    p.add_argument("--alpha", type=float, default=None)
    common(p, seed_required=False)

    p = sub.add_parser("complexity", help="sufficient sample counts for a sampling task")
    p.add_argument("--family", required=True, choices=["kary", "gaussian"])
    p.add_argument("--task", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--R", type=float, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--C", type=float, default=None)
    common(p, seed_required=False)

    p = sub.add_parser("tvdist", help="binned TV estimate between two CSV sample files")
    p.add_argument("--p", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--bins", type=int, required=True)
    common(p, seed_required=True)

    p = sub.add_parser("audit", help="privacy audits with pass/fail verdicts")
    p.add_argument("--mechanism", required=True, choices=["rr", "subrr", "shurr", "elap", "zcdp"])
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--eps0", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--claimed-eps", dest="claimed_eps", type=float, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--B", type=float, default=None)
    p.add_argument("--sigma2", type=float, default=None)
    p.add_argument("--variant", default=None)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--probes", type=int, default=None)
    p.add_argument("--orders", type=_float_list, default=None)
    common(p, seed_required=False)

    p = sub.add_parser("sweep", help="complexity tables over a parameter grid")
    p.add_argument("--family", required=True, choices=["kary", "gaussian"])
    p.add_argument("--k", type=lambda s: [int(v) for v in s.split(",")], default=None)
    p.add_argument("--dim", type=lambda s: [int(v) for v in s.split(",")], default=None)
    p.add_argument("--R", type=_float_list, default=None)
    p.add_argument("--alpha", type=_float_list, default=None)
    p.add_argument("--eps", type=_float_list, default=None)
    p.add_argument("--delta", type=_float_list, default=None)
    p.add_argument("--m", type=lambda s: [int(v) for v in s.split(",")], default=None)
    common(p, seed_required=False)

    return parser


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    skip = {"command", "seed", "out", "json", "input_path"}
    params = {k: v for k, v in vars(args).items() if k not in skip}
    return ExperimentConfig(
        task=args.command,
        params=params,
        input_path=getattr(args, "input_path", None),
        output_path=args.out,
        seed=args.seed,
    )


def _thread_cap() -> int:
    # reserved cap on internal fan-out; all current operations are sequential,
    # which trivially respects any cap >= 1
    raw = os.environ.get("DP_SAMPLER_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigInvalid(f"DP_SAMPLER_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ConfigInvalid(f"DP_SAMPLER_THREADS must be >= 1, got {cap}")
    return cap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config = _config_from_args(args)
    try:
        _thread_cap()
        report = run(config)
    except DPSamplerError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    payload = json.dumps(report.as_dict(), sort_keys=True)
    print(payload)
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(payload)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
