"""Command-line driver: ``secrecy-lab <run|verify|capacity|cipher|wiretap|ska>``.

Exit codes: 0 ok, 1 property failure, 2 invalid configuration, 3 resource
guard, 4 numerical accuracy.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from functools import partial
from pathlib import Path

import jsonschema
import numpy as np

from . import SCHEMA_VERSION, __version__
from ._util import fmt17
from .errors import (
    ConfigError,
    DomainError,
    InconsistentSupportError,
    NumericalAccuracyError,
    PreconditionError,
    ResourceError,
    ShapeError,
)
from .experiments import EXPERIMENTS, SEED_STREAM_RULE, input_from_params, pair_from_params, run_cell

JOBS_ENV = "SECRECY_LAB_JOBS"
EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_RESOURCE, EXIT_NUMERIC = 0, 1, 2, 3, 4

RUN_SCHEMA = {
    "type": "object",
    "required": ["experiment", "parameters", "seeds"],
    "properties": {
        "experiment": {"enum": sorted(EXPERIMENTS)},
        "parameters": {"type": "object"},
        "seeds": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
        "output_path": {"type": "string"},
    },
    "additionalProperties": False,
}


# -- configuration ---------------------------------------------------------

def _field_path(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def _line_of(text: str, path) -> int | None:
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = f'"{keys[-1]}"'
    for i, line in enumerate(text.splitlines(), 1):
        if needle in line:
            return i
    return None


def load_json(path: str) -> tuple:
    """Read a JSON file, turning syntax errors into ConfigError with a line number."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read config ({e.strerror})") from e
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from e


def validate(obj, schema: dict, text: str = "", prefix=()) -> None:
    """Check ``obj`` against a JSON schema; report the first error by field and line."""
    errors = sorted(jsonschema.Draft7Validator(schema).iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = list(prefix) + list(e.absolute_path)
        line = _line_of(text, path)
        where = f"line {line}: " if line else ""
        raise ConfigError(f"{where}field {_field_path(path)}: {e.message}")


def load_run_config(path: str) -> dict:
    cfg, text = load_json(path)
    validate(cfg, RUN_SCHEMA, text)
    validate(cfg["parameters"], EXPERIMENTS[cfg["experiment"]].schema, text, ("parameters",))
    return cfg


def _output_dir(args_out, cfg_out) -> Path:
    out = Path(args_out or cfg_out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"output path {out}: {e.strerror}") from e
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output path {out} is not writable")
    return out


def default_jobs() -> int:
    raw = os.environ.get(JOBS_ENV, "1")
    try:
        jobs = int(raw)
    except ValueError as e:
        raise ConfigError(f"{JOBS_ENV}={raw!r} is not an integer") from e
    if jobs < 1:
        raise ConfigError(f"{JOBS_ENV} must be at least 1")
    return jobs


# -- persistence -----------------------------------------------------------

def _cell_text(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt17(v)
    return str(v)


def rows_to_csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        if set(row) != set(columns):
            raise AssertionError(f"row columns {sorted(row)} differ from the schema")
        w.writerow([_cell_text(row[c]) for c in columns])
    return buf.getvalue()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


# -- run -------------------------------------------------------------------

def _timed_cell(experiment: str, cell: dict):
    t0 = time.perf_counter()
    rows = run_cell(experiment, cell)
    return rows, (time.perf_counter() - t0) * 1e3


def run_experiment(cfg: dict, jobs: int = 1) -> tuple:
    """Run every cell of ``cfg``; returns ``(rows, wall_times_ms)`` in config order."""
    exp = EXPERIMENTS[cfg["experiment"]]
    cells = exp.cells(cfg["parameters"], cfg["seeds"])
    fn = partial(_timed_cell, cfg["experiment"])
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(cells))) as pool:
            results = list(pool.map(fn, cells))
    else:
        results = [fn(c) for c in cells]
    rows = [r for res, _ in results for r in res]
    return rows, [ms for _, ms in results]


def write_run(cfg: dict, rows, wall_ms, out: Path, jobs: int) -> tuple:
    name = cfg["experiment"]
    exp = EXPERIMENTS[name]
    text = rows_to_csv(rows, exp.columns)
    csv_path = out / f"{name}.csv"
    csv_path.write_text(text)
    manifest = {
        "artifact": "secrecy-lab",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "experiment": name,
        "config": cfg,
        "columns": list(exp.columns),
        "rows": len(rows),
        "csv": csv_path.name,
        "csv_sha256": hashlib.sha256(text.encode()).hexdigest(),
        "seed_stream": SEED_STREAM_RULE,
        "jobs": jobs,
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "cell_wall_time_ms": [round(ms, 3) for ms in wall_ms],
    }
    man_path = out / f"{name}.manifest.json"
    man_path.write_text(dump_json(manifest))
    return csv_path, man_path


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    out = _output_dir(args.out, cfg.get("output_path"))
    jobs = args.jobs if args.jobs is not None else default_jobs()
    rows, wall = run_experiment(cfg, jobs)
    csv_path, man_path = write_run(cfg, rows, wall, out, jobs)
    print(f"wrote {len(rows)} rows to {csv_path} and manifest {man_path}")
    return EXIT_OK


# -- verify ----------------------------------------------------------------

def cmd_verify(args) -> int:
    from .verify import DEFAULT_SEED, report, run_suite

    suite, seed = args.suite, DEFAULT_SEED
    if args.config:
        cfg, text = load_json(args.config)
        validate(cfg, {"type": "object", "properties": {
            "suite": {"enum": ["metrics", "bounds", "ska", "all"]},
            "seed": {"type": "integer", "minimum": 0}}}, text)
        suite = cfg.get("suite", suite)
        seed = cfg.get("seed", seed)
    rep = report(run_suite(suite, seed, args.perturb))
    rep.update({"suite": suite, "seed": seed})
    _emit(rep, args.out, "verify")
    return EXIT_OK if rep["passed"] else EXIT_PROPERTY


# -- single-shot subcommands -----------------------------------------------

def _emit(obj, out, name: str) -> None:
    text = dump_json(obj)
    if out:
        (_output_dir(out, None) / f"{name}.json").write_text(text)
    sys.stdout.write(text)


_CAPACITY_SCHEMA = {"type": "object", "required": ["kind"], "properties": {
    "kind": {"enum": ["bsc", "gaussian", "dmc", "fading", "compound"]}}}


def capacity_result(cfg: dict) -> dict:
    from . import capacity as cap
    from .channels import channel_from_spec

    kind = cfg["kind"]
    if kind == "bsc":
        return {"kind": kind, "value": cap.bsc_secrecy_capacity(cfg["delta1"], cfg["delta2"])}
    if kind == "gaussian":
        return {"kind": kind, "value": cap.gaussian_secrecy_capacity(cfg["P"], cfg["sigma_m2"], cfg["sigma_e2"])}
    if kind == "dmc":
        opt = cap.dm_secrecy_capacity(pair_from_params(cfg), cfg.get("step", 1e-2), cfg.get("refine_step", 1e-3))
        return {"kind": kind, "value": opt.value, "argmax": opt.argmax}
    if kind == "fading":
        spec = channel_from_spec({**cfg, "kind": "fading"})
        alloc = cap.fading_secrecy_capacity(spec, cfg.get("tol", 1e-9))
        return {"kind": kind, "value": alloc.achieved_rate, "lambda": alloc.lam, "gamma": alloc.gamma,
                "power_used": alloc.power_used, "kkt_residual": cap.kkt_residual(spec, alloc)}
    pairs = [pair_from_params(p) for p in cfg["pairs"]]
    p = input_from_params(cfg, pairs[0].input_size)
    weights = cfg.get("weights", [1.0 / len(pairs)] * len(pairs))
    mixed = cap.mixed_rate(pairs, weights, p)
    return {"kind": kind, "compound_rate": cap.compound_rate(pairs, p), "mixed_rate": mixed.value,
            "averaged_pair_rate": cap.secrecy_rate(mixed.averaged, p)}


def cipher_result(cfg: dict) -> dict:
    from .cipher import MemorylessSource, build_extractor, cipher_secrecy

    src = MemorylessSource(cfg["source"])
    ext = build_extractor(src, cfg["rate"], cfg["n"], cfg.get("seed", 0), cfg.get("method", "greedy"))
    return {"n": cfg["n"], "rate": cfg["rate"], "num_bins": ext.num_bins, **cipher_secrecy(src, ext).as_dict()}


def wiretap_result(cfg: dict) -> dict:
    from .wiretap import (
        ML,
        CodeKind,
        RateConfig,
        Threshold,
        code_metrics,
        error_probability,
        evaluate_code,
        generate_code,
        prop3_rates,
    )

    pair = pair_from_params(cfg)
    kind = CodeKind(cfg.get("kind", "custom"))
    if "prop3" in cfg:
        p3 = cfg["prop3"]
        rates = prop3_rates(p3["delta1"], p3["delta2"], p3["n"], kind, margin=p3.get("margin", 0.1))
    else:
        r = cfg["rates"]
        rates = RateConfig(r.get("R0", 0.0), r["R1"], r["R1prime"], r["n"])
    rule = Threshold(cfg["threshold"]) if "threshold" in cfg else ML
    code = generate_code(pair, input_from_params(cfg, pair.input_size), rates, kind, cfg.get("seed", 0))
    if "save_code" in cfg:
        Path(cfg["save_code"]).write_text(code.to_json())
    eps = cfg.get("epsilon", 0.1)
    out = {"n": rates.n, "M0": code.M0, "M1": code.M1, "M1prime": code.M1prime, "kind": kind.value}
    if code.M0 == 1:
        ev = evaluate_code(code, pair, eps, rule=rule)
        out.update(ev.metrics)
        out.update({"Pe": ev.pe, "Pe_star": ev.pe_star,
                    "tradeoff": [{"b": t.b, "lhs": t.lhs, "rhs": t.rhs, "holds": t.holds} for t in ev.tradeoffs]})
    else:
        out.update(code_metrics(code, pair.eve, eps))
        out["Pe"] = float(error_probability(code, pair.main, rule))
    return out


def ska_result(cfg: dict) -> dict:
    from .ska import TripartiteSource, distill_key, iid_key_bounds

    src = TripartiteSource(np.asarray(cfg["source"], dtype=float))
    b = iid_key_bounds(src)
    rep = distill_key(src, cfg["n"], cfg["rate"], cfg.get("seed", 0), cfg.get("margin", 0.0),
                      cfg.get("epsilon", 0.1))
    return {**rep.as_dict(), "lower": b.lower, "upper": b.upper, "lower_branches": b.lower_branches,
            "upper_branches": b.upper_branches}


_SINGLE = {
    "capacity": (capacity_result, _CAPACITY_SCHEMA),
    "cipher": (cipher_result, {"type": "object", "required": ["source", "rate", "n"]}),
    "wiretap": (wiretap_result, {"type": "object", "required": ["main", "eve"],
                                 "oneOf": [{"required": ["rates"]}, {"required": ["prop3"]}]}),
    "ska": (ska_result, {"type": "object", "required": ["source", "n", "rate"]}),
}


def _single(name: str, args) -> int:
    fn, schema = _SINGLE[name]
    cfg, text = load_json(args.config) if args.config else ({}, "")
    if name == "ska":
        if args.source is not None:
            src, _ = load_json(args.source)
            cfg["source"] = src.get("source", src) if isinstance(src, dict) else src
        for key in ("n", "rate", "seed"):
            if getattr(args, key) is not None:
                cfg[key] = getattr(args, key)
    elif not args.config:
        raise ConfigError(f"{name} needs --config")
    validate(cfg, schema, text)
    try:
        result = fn(cfg)
    except KeyError as e:
        raise ConfigError(f"field {e.args[0]}: required") from e
    _emit(result, args.out, name)
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="secrecy-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required):
        p.add_argument("--config", required=config_required, help="JSON configuration file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--jobs", type=int, help=f"worker processes (default ${JOBS_ENV} or 1)")

    common(sub.add_parser("run", help="run a batch experiment"), True)
    v = sub.add_parser("verify", help="run property suites")
    common(v, False)
    v.add_argument("--suite", choices=["metrics", "bounds", "ska", "all"], default="all")
    v.add_argument("--perturb", help=argparse.SUPPRESS)
    for name in ("capacity", "cipher", "wiretap"):
        common(sub.add_parser(name, help=f"single {name} evaluation"), False)
    s = sub.add_parser("ska", help="distill a key from a tripartite source")
    common(s, False)
    s.add_argument("--source", help="JSON file with the p(x,y,z) array")
    s.add_argument("--n", type=int)
    s.add_argument("--rate", type=float)
    s.add_argument("--seed", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "verify":
            return cmd_verify(args)
        return _single(args.command, args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (DomainError, ShapeError, PreconditionError, InconsistentSupportError) as e:
        print(f"invalid parameters: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceError as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except NumericalAccuracyError as e:
        print(f"numerical accuracy: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
