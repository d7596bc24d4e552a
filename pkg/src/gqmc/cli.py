"""Experiment harness: design construction, integration-error and covering
experiments, and slope reports, all seeded and byte-reproducible.

Seed scheme: every sub-experiment draws from
SeedSequence([root_seed, command_code, i, trial, role]) with command codes
design=1, wce=2, covering=3, so any single row can be regenerated without
rerunning the rest. CSV floats are written with repr() (shortest round-trip),
which makes reruns byte-identical and parsing lossless.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .covering import covering_radius_estimate, expected_random_covering, slope_fit
from .design import DesignProblem, cg_minimize, design_strength, n_schedule, verify_design
from .exceptions import (
    GqmcError,
    InsufficientData,
    MissingDesignFile,
    NoConvergence,
    NonPositiveValue,
)
from .kernels import (
    G24,
    PointConfiguration,
    TraceKernel,
    expected_random_wce,
    kernel_k1,
    kernel_k2,
    wce_squared,
)
from .manifold import read_projectors, write_projectors

CSV_HEADER = ["experiment", "generator", "i", "n", "kernel", "value", "value_kind", "seed", "extra"]

CMD_CODES = {"design": 1, "wce": 2, "covering": 3}

SLOPE_TARGETS = {
    ("wce", "design", "K1"): (-0.975, -0.775),
    ("wce", "mean", "K1"): (-0.55, -0.45),
    ("wce", "mean", "K2"): (-0.55, -0.45),
    ("covering", "design", ""): (-0.33, -0.17),
}
K2_CONVEXITY_MARGIN = 0.1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_MISSING_INPUT = 3

_thread_limiter = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated settings shared by all subcommands."""

    command: str
    i_min: int
    i_max: int
    kernels: tuple[str, ...]
    probes: int
    trials: int
    seed: int
    out: Path
    energy_tol: float = 1e-14
    max_iters: int = 20000
    restarts: int | None = None
    generate: bool = False

    def __post_init__(self) -> None:
        if self.i_min < 1 or self.i_max < self.i_min:
            raise ValueError(f"need 1 <= imin <= imax, got [{self.i_min}, {self.i_max}]")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.probes < 1:
            raise ValueError("probes must be >= 1")
        if self.command == "wce" and not self.kernels:
            raise ValueError("kernel list must not be empty")
        unknown = set(self.kernels) - {"K1", "K2"}
        if unknown:
            raise ValueError(f"unknown kernels: {sorted(unknown)}")

    @property
    def i_range(self) -> range:
        return range(self.i_min, self.i_max + 1)


@dataclass(frozen=True)
class ExperimentRecord:
    """One CSV row of an integration-error or covering experiment."""

    experiment: str
    generator: str
    i: int
    n: int
    kernel: str
    value: float
    value_kind: str
    seed: int
    extra: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.value < 0.0:
            raise ValueError("record values are nonnegative")
        if self.n < 1:
            raise ValueError("record n must be >= 1")

    def to_row(self) -> list[str]:
        return [
            self.experiment,
            self.generator,
            str(self.i),
            str(self.n),
            self.kernel,
            repr(float(self.value)),
            self.value_kind,
            str(self.seed),
            json.dumps(self.extra, sort_keys=True),
        ]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "ExperimentRecord":
        return cls(
            experiment=row["experiment"],
            generator=row["generator"],
            i=int(row["i"]),
            n=int(row["n"]),
            kernel=row["kernel"],
            value=float(row["value"]),
            value_kind=row["value_kind"],
            seed=int(row["seed"]),
            extra=json.loads(row["extra"]) if row["extra"] else {},
        )


def write_records(path: Path, records: list[ExperimentRecord]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for record in records:
            writer.writerow(record.to_row())


def read_records(path: Path) -> list[ExperimentRecord]:
    if not Path(path).exists():
        raise MissingDesignFile(f"no experiment CSV at {path}")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header {reader.fieldnames}")
        return [ExperimentRecord.from_row(row) for row in reader]


def derive_seed(root: int, *path: int) -> int:
    """Stable 63-bit child seed for the documented (command, i, trial) scheme."""
    state = np.random.SeedSequence([root, *path]).generate_state(1, dtype=np.uint64)[0]
    return int(state >> 1)


def derive_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _kernel_by_name(name: str) -> TraceKernel:
    return {"K1": kernel_k1, "K2": kernel_k2}[name]()


def _design_paths(config: ExperimentConfig, i: int) -> tuple[Path, Path]:
    base = config.out / "designs"
    return base / f"design_i{i}.csv", base / f"design_i{i}.json"


def _build_design(config: ExperimentConfig, i: int):
    """Solve the strength-i problem and write its CSV/JSON files."""
    problem = DesignProblem.for_strength(
        i,
        energy_tol=config.energy_tol,
        max_iters=config.max_iters,
        restarts=config.restarts,
    )
    seed = derive_seed(config.seed, CMD_CODES["design"], i)
    try:
        result = cg_minimize(problem, seed)
        failure = None
    except NoConvergence as exc:
        result = exc.result
        failure = str(exc)
    csv_path, json_path = _design_paths(config, i)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    write_projectors(csv_path, result.config.points)
    payload = {
        "i": i,
        "n": result.config.n,
        "t": design_strength(i, problem.space.k),
        "energy": result.energy,
        "gaps": [float(g) for g in result.gaps],
        "iterations": result.iterations,
        "converged": result.converged,
        "seed": result.seed,
    }
    json_path.write_text(json.dumps(payload, indent=2) + "\n")
    return result, payload, failure


def _load_design(config: ExperimentConfig, i: int):
    csv_path, json_path = _design_paths(config, i)
    if not csv_path.exists() or not json_path.exists():
        if config.generate:
            _build_design(config, i)
        else:
            raise MissingDesignFile(f"design files for i={i} not found under {config.out}; run 'gqmc design' or pass --generate")
    points = read_projectors(csv_path, G24)
    meta = json.loads(json_path.read_text())
    return PointConfiguration.equal_weights(points), meta


def cmd_design(config: ExperimentConfig) -> int:
    """Construct designs for every i in range; exit 2 if any misses tolerance."""
    config.out.mkdir(parents=True, exist_ok=True)
    summaries = []
    failures = []
    for i in config.i_range:
        result, payload, failure = _build_design(config, i)
        summaries.append(payload)
        status = "converged" if result.converged else "FAILED"
        print(f"design i={i} n={result.config.n}: {status} energy={result.energy:.3e} iterations={result.iterations}")
        if failure is not None:
            failures.append((i, failure))
    summary_path = config.out / "design_summary.json"
    summary_path.write_text(
        json.dumps({"results": summaries, "all_converged": not failures}, indent=2) + "\n"
    )
    if failures:
        for i, message in failures:
            print(f"no convergence at i={i}: {message}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    return EXIT_OK


def cmd_wce(config: ExperimentConfig) -> int:
    """Integration-error rows: designs, random draws and their means, and the
    expected random-point curve, for every kernel at every scheduled n."""
    config.out.mkdir(parents=True, exist_ok=True)
    kernels = [_kernel_by_name(name) for name in config.kernels]
    records = []
    for i in config.i_range:
        design_config, meta = _load_design(config, i)
        n = design_config.n
        csv_rel = str(_design_paths(config, i)[0].relative_to(config.out))
        for kernel in kernels:
            report = wce_squared(design_config, kernel)
            records.append(
                ExperimentRecord(
                    experiment="wce",
                    generator="design",
                    i=i,
                    n=n,
                    kernel=kernel.name,
                    value=report.wce,
                    value_kind="wce",
                    seed=meta["seed"],
                    extra={
                        "series": "design",
                        "wce_squared": report.wce_squared,
                        "clamped": report.clamped,
                        "energy": meta["energy"],
                        "points_csv": csv_rel,
                    },
                )
            )
        draws = {kernel.name: [] for kernel in kernels}
        squares = {kernel.name: [] for kernel in kernels}
        for trial in range(1, config.trials + 1):
            trial_seed = derive_seed(config.seed, CMD_CODES["wce"], i, trial)
            sample = PointConfiguration.random(G24, n, derive_rng(trial_seed))
            for kernel in kernels:
                report = wce_squared(sample, kernel)
                draws[kernel.name].append(report.wce)
                squares[kernel.name].append(report.wce_squared)
                records.append(
                    ExperimentRecord(
                        experiment="wce",
                        generator="random",
                        i=0,
                        n=n,
                        kernel=kernel.name,
                        value=report.wce,
                        value_kind="wce",
                        seed=trial_seed,
                        extra={"series": "draw", "trial": trial},
                    )
                )
        for kernel in kernels:
            records.append(
                ExperimentRecord(
                    experiment="wce",
                    generator="random",
                    i=0,
                    n=n,
                    kernel=kernel.name,
                    value=math.fsum(draws[kernel.name]) / config.trials,
                    value_kind="wce",
                    seed=derive_seed(config.seed, CMD_CODES["wce"], i, 0),
                    extra={
                        "series": "mean",
                        "trials": config.trials,
                        "mean_wce_squared": math.fsum(squares[kernel.name]) / config.trials,
                    },
                )
            )
            records.append(
                ExperimentRecord(
                    experiment="wce",
                    generator="random",
                    i=0,
                    n=n,
                    kernel=kernel.name,
                    value=expected_random_wce(kernel, n),
                    value_kind="wce",
                    seed=config.seed,
                    extra={"series": "expected"},
                )
            )
        print(f"wce i={i} n={n}: {len(kernels)} kernels, {config.trials} random trials")
    write_records(config.out / "wce.csv", records)
    return EXIT_OK


def cmd_covering(config: ExperimentConfig) -> int:
    """Covering-radius rows for designs and matched random configurations,
    plus the expected-covering reference curve."""
    config.out.mkdir(parents=True, exist_ok=True)
    records = []
    for i in config.i_range:
        design_config, meta = _load_design(config, i)
        n = design_config.n
        probe_seed = derive_seed(config.seed, CMD_CODES["covering"], i, 0)
        estimate = covering_radius_estimate(design_config, config.probes, seed=probe_seed)
        records.append(
            ExperimentRecord(
                experiment="covering",
                generator="design",
                i=i,
                n=n,
                kernel="",
                value=estimate.rho_hat,
                value_kind="rho_hat",
                seed=probe_seed,
                extra={
                    "series": "design",
                    "probes": estimate.probes,
                    "expected_probe_covering": estimate.expected_probe_covering,
                    "upper_hint": estimate.upper_hint,
                },
            )
        )
        for trial in range(1, config.trials + 1):
            config_seed = derive_seed(config.seed, CMD_CODES["covering"], i, trial, 0)
            sample_probe_seed = derive_seed(config.seed, CMD_CODES["covering"], i, trial, 1)
            sample = PointConfiguration.random(G24, n, derive_rng(config_seed))
            sample_estimate = covering_radius_estimate(sample, config.probes, seed=sample_probe_seed)
            records.append(
                ExperimentRecord(
                    experiment="covering",
                    generator="random",
                    i=0,
                    n=n,
                    kernel="",
                    value=sample_estimate.rho_hat,
                    value_kind="rho_hat",
                    seed=sample_probe_seed,
                    extra={
                        "series": "draw",
                        "trial": trial,
                        "probes": sample_estimate.probes,
                        "expected_probe_covering": sample_estimate.expected_probe_covering,
                        "upper_hint": sample_estimate.upper_hint,
                    },
                )
            )
        records.append(
            ExperimentRecord(
                experiment="covering",
                generator="random",
                i=0,
                n=n,
                kernel="",
                value=expected_random_covering(G24, n) if n >= 2 else G24.diameter,
                value_kind="rho_hat",
                seed=config.seed,
                extra={"series": "expected"},
            )
        )
        print(f"covering i={i} n={n}: probes={config.probes}, {config.trials} random trials")
    write_records(config.out / "covering.csv", records)
    return EXIT_OK


def _series(records, experiment, series, kernel=None, min_i=None):
    """(n, value) pairs of one labeled series, ascending in n."""
    picked = [
        r
        for r in records
        if r.experiment == experiment
        and r.extra.get("series") == series
        and (kernel is None or r.kernel == kernel)
        and (min_i is None or r.i >= min_i)
    ]
    picked.sort(key=lambda r: r.n)
    return [(r.n, r.value) for r in picked]


def cmd_report(config: ExperimentConfig) -> int:
    """Slope fits per series against the configured targets."""
    report: dict = {"slopes": {}, "checks": {}}
    wce_path = config.out / "wce.csv"
    covering_path = config.out / "covering.csv"
    if not wce_path.exists() and not covering_path.exists():
        raise MissingDesignFile(f"no experiment CSVs under {config.out}")

    def fit_and_check(key, pairs):
        fit = slope_fit(pairs)
        report["slopes"]["/".join(key)] = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "points": len(pairs),
        }
        if key in SLOPE_TARGETS:
            low, high = SLOPE_TARGETS[key]
            ok = low <= fit.slope <= high
            report["checks"]["/".join(key)] = {"slope": fit.slope, "range": [low, high], "ok": ok}
            print(f"{'PASS' if ok else 'FAIL'} {'/'.join(key)}: slope={fit.slope:+.4f} target=[{low}, {high}]")
        return fit

    if wce_path.exists():
        records = read_records(wce_path)
        for kernel in config.kernels:
            design_pairs = _series(records, "wce", "design", kernel, min_i=2)
            fit_and_check(("wce", "design", kernel), design_pairs)
            mean_pairs = _series(records, "wce", "mean", kernel)
            fit_and_check(("wce", "mean", kernel), mean_pairs)
        if "K2" in config.kernels:
            pairs = _series(records, "wce", "design", "K2", min_i=2)
            if len(pairs) >= 4:
                early = slope_fit(pairs[:3]).slope
                late = slope_fit(pairs[-3:]).slope
                ok = late <= early - K2_CONVEXITY_MARGIN
                report["checks"]["wce/design/K2-convexity"] = {
                    "early_slope": early,
                    "late_slope": late,
                    "margin": K2_CONVEXITY_MARGIN,
                    "ok": ok,
                }
                print(f"{'PASS' if ok else 'FAIL'} wce/design/K2-convexity: early={early:+.4f} late={late:+.4f}")
    if covering_path.exists():
        records = read_records(covering_path)
        design_pairs = _series(records, "covering", "design", min_i=2)
        fit_and_check(("covering", "design", ""), design_pairs)
        draw_pairs = _series(records, "covering", "draw")
        by_n: dict[int, list[float]] = {}
        for n, value in draw_pairs:
            by_n.setdefault(n, []).append(value)
        random_means = sorted((n, math.fsum(vs) / len(vs)) for n, vs in by_n.items())
        if len(random_means) >= 3:
            fit_and_check(("covering", "random", ""), random_means)
        design_by_n = dict(_series(records, "covering", "design", min_i=2))
        matched = [(n, mean) for n, mean in random_means if n in design_by_n]
        if matched:
            wins = sum(1 for n, mean in matched if mean >= design_by_n[n])
            ok = wins >= math.ceil(0.8 * len(matched))
            report["checks"]["covering/random-exceeds-design"] = {
                "wins": wins,
                "matched": len(matched),
                "ok": ok,
            }
            print(f"{'PASS' if ok else 'FAIL'} covering/random-exceeds-design: {wins}/{len(matched)}")

    out_path = config.out / "report.json"
    out_path.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"report written to {out_path}")
    return EXIT_OK


def _limit_threads() -> None:
    global _thread_limiter
    value = os.environ.get("GQMC_THREADS")
    if value:
        from threadpoolctl import threadpool_limits

        _thread_limiter = threadpool_limits(limits=int(value))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gqmc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, trials_default, help_text in [
        ("design", 1, "construct designs for each strength index"),
        ("wce", 200, "worst-case integration errors for designs and random points"),
        ("covering", 1, "covering-radius estimates for designs and random points"),
        ("report", 1, "slope fits over existing experiment CSVs"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--imin", type=int, default=1)
        p.add_argument("--imax", type=int, default=6)
        p.add_argument("--seed", type=int, required=True, help="root seed (no wall-clock default)")
        p.add_argument("--probes", type=int, default=10**6)
        p.add_argument("--trials", type=int, default=trials_default)
        p.add_argument("--kernels", type=str, default="K1,K2", help="comma list among K1,K2")
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--energy-tol", type=float, default=1e-14)
        p.add_argument("--max-iters", type=int, default=20000)
        p.add_argument("--restarts", type=int, default=None)
        p.add_argument("--generate", action="store_true", help="build missing design files on demand")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kernels = tuple(k for k in args.kernels.split(",") if k)
    return ExperimentConfig(
        command=args.command,
        i_min=args.imin,
        i_max=args.imax,
        kernels=kernels,
        probes=args.probes,
        trials=args.trials,
        seed=args.seed,
        out=args.out,
        energy_tol=args.energy_tol,
        max_iters=args.max_iters,
        restarts=args.restarts,
        generate=args.generate,
    )


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        config = config_from_args(args)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _limit_threads()
    commands = {"design": cmd_design, "wce": cmd_wce, "covering": cmd_covering, "report": cmd_report}
    try:
        return commands[config.command](config)
    except (MissingDesignFile, InsufficientData, FileNotFoundError) as exc:
        print(f"missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except NoConvergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except (NonPositiveValue, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GqmcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
