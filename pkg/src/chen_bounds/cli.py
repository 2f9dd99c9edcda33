"""Command-line runner: gen, check, sweep, oracle, report.

Exit status: 0 success, 2 validation failure, 3 exact-mode inequality
violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .ambient import validate_ambient
from .errors import ChenBoundsError, ValidationFailed
from .forge import GeneratorSpec, make_instance, oracle_invariants
from .inequalities import (
    check_chen_fundamental,
    check_delta_tuple,
    check_mean_vs_scalar,
    check_ricci_bound,
    check_sasakian_suite,
    check_scalar_identity,
    check_theta_bound,
    chen_first_slacks,
    delta_tuple_slacks,
    detect_equality_form_basic,
    detect_equality_form_delta,
    is_sasakian_mode,
    ricci_bound_slacks,
)
from .invariants import (
    SearchBudget,
    coordinate_planes,
    coordinate_tuples,
    delta_pair,
    enumerate_tuples,
    inf_sectional,
    random_frames,
    random_planes,
    random_units,
    scalar_curvature,
    theta_k,
)
from .linalg import Subspace
from .submanifold import SubmanifoldPoint

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INVALID, EXIT_VIOLATION, EXIT_IO = 0, 2, 3, 4
CHECK_GROUPS = (
    "scalar_identity",
    "chen_first",
    "ricci_bound",
    "mean_vs_scalar",
    "theta_bound",
    "sasakian",
    "delta_tuple",
    "detectors",
)
SWEEP_PARAMS = {"sigma_scale": "sigma_scale", "lambda": "lam", "c": "c", "kappa": "kappa", "mu": "mu", "n": "n"}
CSV_FIELDS = ("instance", "check", "mode", "lhs", "rhs", "slack", "equality", "passed")


class IoFailure(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    checks: tuple = CHECK_GROUPS
    planes: int = 1024
    vectors: int = 1024
    frames: int = 1024
    budget: SearchBudget = SearchBudget()
    eq_tol: float = 1e-9
    slack_tol: float = 1e-8
    oracle_density: int = 0

    def __post_init__(self):
        if self.eq_tol <= 0 or self.slack_tol <= 0:
            raise ValueError("tolerances must be positive")
        unknown = set(self.checks) - set(CHECK_GROUPS)
        if unknown:
            raise ValueError(f"unknown checks {sorted(unknown)}; choose from {CHECK_GROUPS}")


def dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True) + "\n"


def _write(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _read_json(path: Path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationFailed(str(path), f"malformed JSON: {exc}") from exc


def derived_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


# ----------------------------------------------------------------------------
# instances


def instance_document(spec: GeneratorSpec, S: SubmanifoldPoint) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "spec": spec.to_dict(),
        "spec_hash": spec.spec_hash(),
        "instance": S.to_dict(),
    }


def load_instance(path) -> SubmanifoldPoint:
    data = _read_json(Path(path))
    body = data.get("instance", data) if isinstance(data, dict) else None
    if not isinstance(body, dict):
        raise ValidationFailed(str(path), "not an instance document")
    try:
        S = SubmanifoldPoint.from_dict(body)
    except (ChenBoundsError, KeyError, TypeError, ValueError) as exc:
        raise ValidationFailed(str(path), f"{type(exc).__name__}: {exc}") from exc
    bad = validate_ambient(S.ambient)
    if bad:
        raise ValidationFailed(str(path), f"ambient structure identities fail: {bad}")
    return S


def expand_inputs(inputs) -> list[Path]:
    files = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            files.extend(q for q in p.glob("*.json") if q.name != "manifest.json")
        elif p.exists():
            files.append(p)
        else:
            raise IoFailure(f"no such file or directory: {p}")
    return sorted(set(files))


def generate(spec: GeneratorSpec, count: int, seed: int, workers: int = 1) -> list[tuple[GeneratorSpec, SubmanifoldPoint]]:
    specs = [replace(spec, seed=derived_seed(seed, i)) for i in range(count)]
    return list(zip(specs, _map(make_instance, specs, workers)))


def _map(fn, items, workers: int):
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ----------------------------------------------------------------------------
# check suite


def _worst(lhs: np.ndarray, rhs: np.ndarray) -> int:
    return int(np.argmin(rhs - lhs))


def _tuned(report, cfg: RunConfig):
    report.eq_tol, report.slack_tol = cfg.eq_tol, cfg.slack_tol
    return report


def run_suite(S: SubmanifoldPoint, cfg: RunConfig) -> dict:
    """All selected checks on one instance, each at its worst sampled witness."""
    n = S.n
    seed = cfg.budget.seed
    checks, detectors = [], []
    want = set(cfg.checks)
    if "scalar_identity" in want:
        checks.append(check_scalar_identity(S))
    sasakian = is_sasakian_mode(S)
    pi = U = None
    if n >= 3:
        planes = np.concatenate([coordinate_planes(n), random_planes(seed, cfg.planes, n)])
        pi = Subspace(planes[_worst(*chen_first_slacks(S, planes))])
        units = np.concatenate([np.eye(n), random_units(seed, cfg.vectors, n)])
        U = units[_worst(*ricci_bound_slacks(S, units))]
        if "chen_first" in want:
            checks.append(check_chen_fundamental(S, pi))
        if "ricci_bound" in want:
            checks.append(check_ricci_bound(S, U))
        if "mean_vs_scalar" in want:
            checks.append(check_mean_vs_scalar(S))
        if "theta_bound" in want:
            checks.extend(check_theta_bound(S, k, cfg.budget) for k in range(2, n + 1))
        if "sasakian" in want and sasakian:
            checks.extend(check_sasakian_suite(S, pi, U))
    tuples = [t for t in enumerate_tuples(n) if t.k > 0]
    if "delta_tuple" in want and sasakian:
        for t in tuples:
            frames = np.concatenate([coordinate_tuples(n, t), random_frames(seed, cfg.frames, n)])
            Q = frames[_worst(*delta_tuple_slacks(S, t, frames))]
            L, start = [], 0
            for d in t.dims:
                L.append(Subspace(Q[start:start + d]))
                start += d
            checks.append(check_delta_tuple(S, t, L))
    if "detectors" in want:
        if n >= 3:
            detectors.append(detect_equality_form_basic(S, np.eye(n)[:2]))
        detectors.extend(detect_equality_form_delta(S, t) for t in tuples)
    checks = [_tuned(r, cfg) for r in checks]
    out = {
        "n": n,
        "m": S.ambient.m,
        "sasakian_mode": sasakian,
        "checks": [r.to_dict() for r in checks],
        "detectors": [d.to_dict() for d in detectors],
    }
    if cfg.oracle_density:
        out["oracle"] = oracle_invariants(S, cfg.oracle_density, seed)
    return out


def _check_one(args):
    path, cfg = args
    S = load_instance(path)
    rec = run_suite(S, cfg)
    rec["instance"] = Path(path).name
    return rec


def check_files(files, cfg: RunConfig, workers: int = 1) -> dict:
    # load everything first so a bad file fails fast, before any work
    for f in files:
        load_instance(f)
    records = _map(_check_one, [(str(f), cfg) for f in files], workers)
    violations = []
    for rec in records:
        for c in rec["checks"]:
            if c["passed"] is False:
                violations.append({"instance": rec["instance"], "check": c["name"], "slack": c["slack"]})
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "checks": list(cfg.checks),
            "planes": cfg.planes,
            "vectors": cfg.vectors,
            "frames": cfg.frames,
            "seed": cfg.budget.seed,
            "samples": cfg.budget.samples,
            "multistarts": cfg.budget.multistarts,
            "eq_tol": cfg.eq_tol,
            "slack_tol": cfg.slack_tol,
        },
        "instances": records,
        "violations": violations,
    }


def report_rows(report: dict) -> list[dict]:
    rows = []
    for rec in report["instances"]:
        for c in rec["checks"]:
            rows.append({
                "instance": rec["instance"],
                "check": c["name"],
                "mode": c["mode"],
                "lhs": repr(c["lhs"]),
                "rhs": repr(c["rhs"]),
                "slack": repr(c["slack"]),
                "equality": c["equality"],
                "passed": "" if c["passed"] is None else c["passed"],
            })
    return rows


def to_csv(rows, fields) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


# ----------------------------------------------------------------------------
# sweep and oracle


def sweep(spec: GeneratorSpec, param: str, values, count: int, seed: int, cfg: RunConfig,
          workers: int = 1) -> list[dict]:
    if param not in SWEEP_PARAMS:
        raise ValueError(f"sweep parameter must be one of {sorted(SWEEP_PARAMS)}")
    field_name = SWEEP_PARAMS[param]
    rows = []
    for value in values:
        value = int(value) if param == "n" else float(value)
        base = replace(spec, **{field_name: value})
        base.validate()
        pairs = generate(base, count, seed, workers)
        recs = _map(_suite_only, [(S, cfg) for _, S in pairs], workers)
        worst: dict[tuple, list] = {}
        for rec in recs:
            for c in rec["checks"]:
                key = (c["name"], c["mode"])
                worst.setdefault(key, []).append(c["slack"])
        for (name, mode), slacks in sorted(worst.items()):
            rows.append({
                "parameter": param,
                "value": repr(value),
                "check": name,
                "mode": mode,
                "min_slack": repr(float(min(slacks))),
                "instances": len(slacks),
            })
    return rows


def _suite_only(args):
    S, cfg = args
    return run_suite(S, cfg)


def engine_invariants(S: SubmanifoldPoint, budget: SearchBudget) -> dict:
    out = {"tau": scalar_curvature(S), "inf_K": inf_sectional(S, budget).value}
    delta, tilde = {}, {}
    for t in enumerate_tuples(S.n):
        d, dt = delta_pair(S, t, budget)
        delta[str(t)], tilde[str(t)] = d.value, dt.value
    out["delta"], out["tilde_delta"] = delta, tilde
    out["theta"] = {k: theta_k(S, k, budget).value for k in range(2, S.n + 1)}
    return out


def _oracle_one(args):
    path, density, budget = args
    S = load_instance(path)
    return {
        "instance": Path(path).name,
        "oracle": oracle_invariants(S, density, budget.seed),
        "engine": engine_invariants(S, budget),
    }


# ----------------------------------------------------------------------------
# argument parsing


def _env_seed() -> int:
    raw = os.environ.get("CHEN_BOUNDS_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"CHEN_BOUNDS_SEED must be an integer, got {raw!r}")


def _floats(text: str) -> tuple:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text: str) -> tuple:
    return tuple(int(x) for x in text.replace(",", " ").split())


def _add_spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--m", type=int, default=3)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--mode", choices=("general", "sasakian"), default="general")
    p.add_argument("--family", default="random",
                   choices=("random", "geodesic", "umbilical", "equality_basic", "equality_delta"))
    p.add_argument("--f-source", default="random", choices=("random", "explicit", "kappa_mu", "non_sasakian"))
    p.add_argument("--f", type=_floats, default=None, help="seven coefficients f1 f2 f3 f4 f51 f52 f6")
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--mu", type=float, default=0.0)
    p.add_argument("--h", type=_floats, default=None, help="m eigenvalues of h")
    p.add_argument("--sigma-scale", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--frame", choices=("adapted", "rotated"), default="adapted")
    p.add_argument("--conjugate", action="store_true")
    p.add_argument("--no-tie-f2", action="store_true")
    p.add_argument("--tuple", type=_ints, default=(2,))


def _spec_from(a) -> GeneratorSpec:
    return GeneratorSpec(
        m=a.m, n=a.n, mode=a.mode, family=a.family, f_source=a.f_source, f=a.f, c=a.c,
        kappa=a.kappa, mu=a.mu, h_eigenvalues=a.h, sigma_scale=a.sigma_scale, lam=a.lam,
        frame=a.frame, conjugate=a.conjugate, tie_f2=not a.no_tie_f2, tuple_dims=a.tuple,
    )


def _add_check_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--checks", type=lambda s: tuple(s.split(",")), default=CHECK_GROUPS)
    p.add_argument("--planes", type=int, default=1024)
    p.add_argument("--vectors", type=int, default=1024)
    p.add_argument("--frames", type=int, default=1024)
    p.add_argument("--samples", type=int, default=4096)
    p.add_argument("--multistarts", type=int, default=16)
    p.add_argument("--eq-tol", type=float, default=1e-9)
    p.add_argument("--slack-tol", type=float, default=1e-8)


def _cfg_from(a, seed: int) -> RunConfig:
    return RunConfig(
        checks=a.checks, planes=a.planes, vectors=a.vectors, frames=a.frames,
        budget=SearchBudget(samples=a.samples, multistarts=a.multistarts, seed=seed),
        eq_tol=a.eq_tol, slack_tol=a.slack_tol, oracle_density=getattr(a, "oracle_density", 0),
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chen-bounds", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=None, help="defaults to $CHEN_BOUNDS_SEED or 0")
    parser.add_argument("--workers", type=int, default=1)
    # the same flags are accepted after the subcommand too
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", aliases=["forge"], parents=[common], help="write seeded instance files and a manifest")
    _add_spec_args(g)
    g.add_argument("--count", type=int, default=1)
    g.add_argument("--out", type=Path, required=True)

    c = sub.add_parser("check", parents=[common], help="run the inequality suite over instance files")
    c.add_argument("inputs", nargs="+")
    _add_check_args(c)
    c.add_argument("--oracle-density", type=int, default=0)
    c.add_argument("--out", type=Path, default=None)
    c.add_argument("--csv", type=Path, default=None)

    s = sub.add_parser("sweep", parents=[common], help="min slack per check against a swept generator parameter")
    _add_spec_args(s)
    _add_check_args(s)
    s.add_argument("--param", required=True, choices=sorted(SWEEP_PARAMS))
    s.add_argument("--values", type=_floats, required=True)
    s.add_argument("--count", type=int, default=10)
    s.add_argument("--out", type=Path, default=None)

    o = sub.add_parser("oracle", parents=[common], help="brute-force invariants next to the engine's values")
    o.add_argument("inputs", nargs="+")
    o.add_argument("--density", type=int, default=100_000)
    o.add_argument("--samples", type=int, default=4096)
    o.add_argument("--multistarts", type=int, default=16)
    o.add_argument("--out", type=Path, default=None)

    r = sub.add_parser("report", parents=[common], help="summarize a check report as CSV")
    r.add_argument("report", type=Path)
    r.add_argument("--out", type=Path, default=None)
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        _write(out, text)


def _cmd_gen(a, seed: int) -> int:
    spec = _spec_from(a)
    spec.validate()
    if a.count < 0:
        raise ValueError("--count must be non-negative")
    pairs = generate(spec, a.count, seed, a.workers)
    width = max(5, len(str(max(a.count - 1, 0))))
    entries = []
    for i, (sp, S) in enumerate(pairs):
        name = f"instance_{i:0{width}d}.json"
        _write(a.out / name, dump_json(instance_document(sp, S)))
        entries.append({"file": name, "seed": sp.seed, "spec_hash": sp.spec_hash()})
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "base_seed": seed,
        "count": a.count,
        "spec": spec.to_dict(),
        "spec_hash": spec.spec_hash(),
        "instances": entries,
    }
    _write(a.out / "manifest.json", dump_json(manifest))
    return EXIT_OK


def _cmd_check(a, seed: int) -> int:
    cfg = _cfg_from(a, seed)
    report = check_files(expand_inputs(a.inputs), cfg, a.workers)
    _emit(dump_json(report), a.out)
    if a.csv is not None:
        _write(a.csv, to_csv(report_rows(report), CSV_FIELDS))
    if report["violations"]:
        for v in report["violations"]:
            print(f"violation: {v['instance']} {v['check']} slack={v['slack']!r}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _cmd_sweep(a, seed: int) -> int:
    rows = sweep(_spec_from(a), a.param, a.values, a.count, seed, _cfg_from(a, seed), a.workers)
    fields = ("parameter", "value", "check", "mode", "min_slack", "instances")
    _emit(to_csv(rows, fields), a.out)
    return EXIT_OK


def _cmd_oracle(a, seed: int) -> int:
    budget = SearchBudget(samples=a.samples, multistarts=a.multistarts, seed=seed)
    files = expand_inputs(a.inputs)
    for f in files:
        load_instance(f)
    recs = _map(_oracle_one, [(str(f), a.density, budget) for f in files], a.workers)
    _emit(dump_json({"schema_version": SCHEMA_VERSION, "instances": recs}), a.out)
    return EXIT_OK


def _cmd_report(a, seed: int) -> int:
    report = _read_json(a.report)
    if not isinstance(report, dict) or "instances" not in report:
        raise ValidationFailed(str(a.report), "not a check report")
    _emit(to_csv(report_rows(report), CSV_FIELDS), a.out)
    return EXIT_OK


COMMANDS = {
    "gen": _cmd_gen,
    "forge": _cmd_gen,
    "check": _cmd_check,
    "sweep": _cmd_sweep,
    "oracle": _cmd_oracle,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    seed = a.seed if a.seed is not None else _env_seed()
    try:
        return COMMANDS[a.command](a, seed)
    except IoFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationFailed as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ChenBoundsError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
