"""Batch experiments: each one expands its parameters into independent cells.

A cell is a plain dict, so it pickles for process-pool fan-out.  Running a
cell returns a list of rows keyed by the experiment's fixed column list.
Rows are assembled in cell order, which is the order of the config.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .capacity import compound_rate, fading_secrecy_capacity, kkt_residual, mixed_rate, secrecy_rate
from .channels import (
    FadingSpec,
    GaussianSpec,
    WiretapPair,
    bpsk_awgn_densities,
    bpsk_awgn_variational,
    bsc,
    channel_from_spec,
)
from .cipher import MemorylessSource, build_extractor, cipher_secrecy
from .ska import TripartiteSource, conceptual_rates, distill_key, iid_key_bounds
from .wiretap import (
    CodeKind,
    evaluate_code,
    generate_code,
    prop3_rates,
    rate_planner,
    resolvability_bound,
    resolvability_monte_carlo,
)

METRICS = ("S1", "S2", "S3", "S4", "S5", "S6")
TRADEOFF_BS = (0.5, 1.0, 2.0)
STREAMS = {"capacity": 1, "resolvability": 2, "bounds": 3, "cipher": 4, "fading": 5, "ska": 6}

SEED_STREAM_RULE = (
    "code_seed = numpy.random.SeedSequence([seed, n, stream]).generate_state(1)[0]"
    " with stream ids " + ", ".join(f"{k}={v}" for k, v in STREAMS.items())
)


def code_seed(seed: int, n: int, stream: str) -> int:
    """Seed of the generator for one ``(seed, n)`` cell of one stream."""
    return int(np.random.SeedSequence([int(seed), int(n), STREAMS[stream]]).generate_state(1)[0])


def pair_from_params(params: dict, main_key="main", eve_key="eve") -> WiretapPair:
    return WiretapPair(channel_from_spec(params[main_key]), channel_from_spec(params[eve_key]))


def input_from_params(params: dict, size: int) -> np.ndarray:
    if "input" in params:
        return np.asarray(params["input"], dtype=float)
    return np.full(size, 1.0 / size)


# -- prop3 -----------------------------------------------------------------

def _b_tag(b: float) -> str:
    return format(b, "g").replace(".", "p")


def _prop3_columns():
    cols = ["experiment", "n", "seed"]
    for kind in ("cap", "res"):
        cols += [f"{kind}_code_seed", f"{kind}_M1", f"{kind}_M1prime"]
        cols += [f"{kind}_{m}" for m in METRICS]
        cols += [f"{kind}_Pe", f"{kind}_Pe_star"]
        for b in TRADEOFF_BS:
            cols += [f"{kind}_PA0_b{_b_tag(b)}", f"{kind}_tradeoff_slack_b{_b_tag(b)}"]
    return cols


def _prop3_cells(params, seeds):
    return [{"n": n, "seed": s, **params} for n in params["n_list"] for s in seeds]


def _prop3_run(cell):
    d1, d2 = cell["delta1"], cell["delta2"]
    pair = WiretapPair(bsc(d1), bsc(d2))
    n, seed = cell["n"], cell["seed"]
    row = {"experiment": "prop3", "n": n, "seed": seed}
    for tag, kind in (("cap", CodeKind.CAPACITY), ("res", CodeKind.RESOLVABILITY)):
        rates = prop3_rates(d1, d2, n, kind, margin=cell.get("margin", 0.1))
        cs = code_seed(seed, n, kind.value)
        code = generate_code(pair, [0.5, 0.5], rates, kind, cs)
        ev = evaluate_code(code, pair, cell.get("epsilon", 0.1), TRADEOFF_BS)
        row.update({f"{tag}_code_seed": cs, f"{tag}_M1": code.M1, f"{tag}_M1prime": code.M1prime})
        row.update({f"{tag}_{m}": ev.metrics[m] for m in METRICS})
        row.update({f"{tag}_Pe": ev.pe, f"{tag}_Pe_star": ev.pe_star})
        for t in ev.tradeoffs:
            row[f"{tag}_PA0_b{_b_tag(t.b)}"] = t.p_a0
            row[f"{tag}_tradeoff_slack_b{_b_tag(t.b)}"] = t.slack
    return [row]


# -- bounds: resolvability bound against exact S2 of random sub-codes ------

def _bounds_cells(params, seeds):
    return [{"seed": s, **params} for s in seeds]


def _bounds_run(cell):
    eve = channel_from_spec(cell["eve"])
    n = cell["n"]
    p = input_from_params(cell, eve.input_size)
    rp = cell["R1prime"]
    cs = code_seed(cell["seed"], n, "bounds")
    mc = resolvability_monte_carlo(eve, p, rp, n, [cs], M1=cell.get("M1", 2))
    bound = resolvability_bound(eve, p, rp, n, cell["gamma"], cell["tau"])
    return [{
        "experiment": "bounds", "n": n, "seed": cell["seed"], "code_seed": cs,
        "M1prime": bound.M1prime, "S2": mc.mean, "bound": bound.total,
        **{f"term{i + 1}": t for i, t in enumerate(bound.terms)},
    }]


# -- rates: finite-n rate planning -----------------------------------------

def _rates_cells(params, seeds):
    return [{"n": n, "seed": seeds[0], **params} for n in params["n_list"]]


def _rates_run(cell):
    pair = pair_from_params(cell)
    p = input_from_params(cell, pair.input_size)
    plan = rate_planner(pair, p, cell["n"], cell.get("delta", 0.05), cell.get("gamma", 0.01))
    return [{
        "experiment": "rates", "n": cell["n"], "seed": cell["seed"],
        "reliability_cap": plan.reliability_cap, "secrecy_floor": plan.secrecy_floor, "gap": plan.gap,
        "main_mean": plan.main_mean, "eve_mean": plan.eve_mean, "secrecy_rate": secrecy_rate(pair, p),
    }]


# -- cipher ----------------------------------------------------------------

def _cipher_cells(params, seeds):
    return [{"n": n, "seed": s, **params} for n in params["n_list"] for s in seeds]


def _cipher_run(cell):
    src = MemorylessSource(cell["source"])
    cs = code_seed(cell["seed"], cell["n"], "cipher")
    ext = build_extractor(src, cell["rate"], cell["n"], cs, cell.get("method", "greedy"))
    rep = cipher_secrecy(src, ext)
    return [{
        "experiment": "cipher", "n": cell["n"], "seed": cell["seed"], "code_seed": cs,
        "num_bins": ext.num_bins, "V_extractor": rep.V_extractor, "S2_exact": rep.S2_exact,
        "bound": rep.bound, "holds": int(rep.holds),
    }]


# -- fading ----------------------------------------------------------------

def random_fading_spec(rng: np.random.Generator, states: int, power=(0.5, 5.0)) -> FadingSpec:
    gm = rng.exponential(1.0, states)
    ge = rng.exponential(1.0, states)
    probs = rng.dirichlet(np.ones(states))
    probs[-1] = 1.0 - probs[:-1].sum()
    return FadingSpec(tuple(zip(gm, ge, probs)), 1.0, 1.0, float(rng.uniform(*power)))


def _fading_specs(cell):
    if "specs" in cell:
        return [channel_from_spec({"kind": "fading", **s}) for s in cell["specs"]]
    rng = np.random.default_rng(code_seed(cell["seed"], 1, "fading"))
    return [random_fading_spec(rng, cell.get("num_states", 4)) for _ in range(cell.get("num_specs", 20))]


def _fading_cells(params, seeds):
    if "specs" in params:
        return [{"seed": seeds[0], **params}]
    return [{"seed": s, **params} for s in seeds]


def _fading_run(cell):
    rows = []
    for i, spec in enumerate(_fading_specs(cell)):
        alloc = fading_secrecy_capacity(spec, cell.get("tol", 1e-9))
        rows.append({
            "experiment": "fading", "n": 1, "seed": cell["seed"], "spec_index": i,
            "power_budget": spec.power_budget, "lambda": alloc.lam, "rate": alloc.achieved_rate,
            "power_used": alloc.power_used, "kkt_residual": kkt_residual(spec, alloc),
        })
    return rows


# -- compound and mixed ----------------------------------------------------

def _compound_cells(params, seeds):
    return [{"seed": seeds[0], **params}]


def _compound_run(cell):
    pairs = [pair_from_params(p) for p in cell["pairs"]]
    size = pairs[0].input_size
    p = input_from_params(cell, size)
    weights = cell.get("weights", [1.0 / len(pairs)] * len(pairs))
    mixed = mixed_rate(pairs, weights, p)
    return [{
        "experiment": "compound", "n": 1, "seed": cell["seed"], "num_pairs": len(pairs),
        "compound_rate": compound_rate(pairs, p), "mixed_rate": mixed.value,
        "averaged_pair_rate": secrecy_rate(mixed.averaged, p),
    }]


# -- secret-key agreement --------------------------------------------------

def _ska_cells(params, seeds):
    return [{"n": n, "seed": s, **params} for n in params["n_list"] for s in seeds]


def _ska_run(cell):
    src = TripartiteSource(np.asarray(cell["source"], dtype=float))
    bounds = iid_key_bounds(src)
    main, eve = conceptual_rates(src)
    cs = code_seed(cell["seed"], cell["n"], "ska")
    rep = distill_key(src, cell["n"], cell["rate"], cs, cell.get("margin", 0.0), cell.get("epsilon", 0.1))
    return [{
        "experiment": "ska", "n": cell["n"], "seed": cell["seed"], "code_seed": cs,
        "lower": bounds.lower, "upper": bounds.upper,
        "lower_xz": bounds.lower_branches[0], "lower_yz": bounds.lower_branches[1],
        "main_rate": main, "eve_rate": eve, "M1": rep.M1, "M1prime": rep.M1prime,
        "Pe": rep.error_prob, **{m: rep.secrecy[m] for m in METRICS}, "uniformity": rep.uniformity,
    }]


# -- BPSK over AWGN output densities ---------------------------------------

def _awgn_cells(params, seeds):
    return [{"sigma": s, "seed": seeds[0], **params} for s in params["sigmas"]]


def _awgn_run(cell):
    sigma = cell["sigma"]
    z = np.linspace(cell.get("z_min", -4.0), cell.get("z_max", 4.0), cell.get("num_points", 201))
    d = bpsk_awgn_densities(sigma, z)
    v = bpsk_awgn_variational(GaussianSpec(sigma**2))
    return [
        {"experiment": "awgn_fig1", "n": 1, "seed": cell["seed"], "sigma": sigma, "z": zi,
         "p_plus": a, "p_minus": b, "p_z": c, "variational": v}
        for zi, a, b, c in zip(z, d["p_plus"], d["p_minus"], d["p_z"])
    ]


@dataclass(frozen=True)
class Experiment:
    columns: tuple
    cells: Callable
    run_cell: Callable
    schema: dict


def _num(**kw):
    return {"type": "number", **kw}


_POS_INTS = {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}}
_PMF = {"type": "array", "minItems": 1, "items": _num(minimum=0)}
_CHANNEL = {
    "type": "object",
    "required": ["kind"],
    "properties": {"kind": {"enum": ["bsc", "dmc"]}, "delta": _num(minimum=0, maximum=1),
                   "matrix": {"type": "array", "minItems": 1}},
}
_PAIR = {"type": "object", "required": ["main", "eve"], "properties": {"main": _CHANNEL, "eve": _CHANNEL}}


def _obj(required, props):
    return {"type": "object", "required": list(required), "properties": props}


EXPERIMENTS = {
    "prop3": Experiment(
        tuple(_prop3_columns()), _prop3_cells, _prop3_run,
        _obj(["delta1", "delta2", "n_list"], {
            "delta1": _num(minimum=0, maximum=0.5), "delta2": _num(minimum=0, maximum=0.5),
            "n_list": _POS_INTS, "margin": _num(minimum=0), "epsilon": _num(),
        }),
    ),
    "bounds": Experiment(
        ("experiment", "n", "seed", "code_seed", "M1prime", "S2", "bound", "term1", "term2", "term3", "term4",
         "term5"),
        _bounds_cells, _bounds_run,
        _obj(["eve", "n", "R1prime", "gamma", "tau"], {
            "eve": _CHANNEL, "n": {"type": "integer", "minimum": 1}, "R1prime": _num(minimum=0),
            "gamma": _num(exclusiveMinimum=0), "tau": _num(exclusiveMinimum=0), "input": _PMF,
            "M1": {"type": "integer", "minimum": 1},
        }),
    ),
    "rates": Experiment(
        ("experiment", "n", "seed", "reliability_cap", "secrecy_floor", "gap", "main_mean", "eve_mean",
         "secrecy_rate"),
        _rates_cells, _rates_run,
        _obj(["main", "eve", "n_list"], {
            "main": _CHANNEL, "eve": _CHANNEL, "n_list": _POS_INTS, "input": _PMF,
            "delta": _num(exclusiveMinimum=0, exclusiveMaximum=1), "gamma": _num(minimum=0),
        }),
    ),
    "cipher": Experiment(
        ("experiment", "n", "seed", "code_seed", "num_bins", "V_extractor", "S2_exact", "bound", "holds"),
        _cipher_cells, _cipher_run,
        _obj(["source", "rate", "n_list"], {
            "source": _PMF, "rate": _num(minimum=0), "n_list": _POS_INTS,
            "method": {"enum": ["greedy", "random"]},
        }),
    ),
    "fading": Experiment(
        ("experiment", "n", "seed", "spec_index", "power_budget", "lambda", "rate", "power_used", "kkt_residual"),
        _fading_cells, _fading_run,
        _obj([], {
            "specs": {"type": "array", "minItems": 1, "items": _obj(
                ["states", "sigma_m2", "sigma_e2", "power"], {"states": {"type": "array", "minItems": 1}})},
            "num_specs": {"type": "integer", "minimum": 1}, "num_states": {"type": "integer", "minimum": 1},
            "tol": _num(exclusiveMinimum=0),
        }),
    ),
    "compound": Experiment(
        ("experiment", "n", "seed", "num_pairs", "compound_rate", "mixed_rate", "averaged_pair_rate"),
        _compound_cells, _compound_run,
        _obj(["pairs"], {"pairs": {"type": "array", "minItems": 1, "items": _PAIR}, "weights": _PMF,
                         "input": _PMF}),
    ),
    "ska": Experiment(
        ("experiment", "n", "seed", "code_seed", "lower", "upper", "lower_xz", "lower_yz", "main_rate",
         "eve_rate", "M1", "M1prime", "Pe") + METRICS + ("uniformity",),
        _ska_cells, _ska_run,
        _obj(["source", "n_list", "rate"], {
            "source": {"type": "array", "minItems": 2}, "n_list": _POS_INTS, "rate": _num(minimum=0),
            "margin": _num(), "epsilon": _num(),
        }),
    ),
    "awgn_fig1": Experiment(
        ("experiment", "n", "seed", "sigma", "z", "p_plus", "p_minus", "p_z", "variational"),
        _awgn_cells, _awgn_run,
        _obj(["sigmas"], {
            "sigmas": {"type": "array", "minItems": 1, "items": _num(exclusiveMinimum=0)},
            "z_min": _num(), "z_max": _num(), "num_points": {"type": "integer", "minimum": 2},
        }),
    ),
}


def run_cell(experiment: str, cell: dict) -> list:
    """Module-level entry point so worker processes can unpickle it."""
    return EXPERIMENTS[experiment].run_cell(cell)
