"""Property suites behind ``secrecy-lab verify``.

Every property is a list of slacks that must stay above ``-tol``.  The
``perturb`` argument flips the sign of one named property's slacks; it
exists only as a negative control for the harness itself.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .capacity import bsc_secrecy_capacity, dm_secrecy_capacity, fading_secrecy_capacity, kkt_residual
from .channels import WiretapPair, bsc, dmc
from .cipher import MemorylessSource, build_extractor, cipher_secrecy
from .experiments import random_fading_spec
from .metrics import (
    all_metrics,
    divergence_variational_bound,
    pinsker_check,
    variational,
    variational_calculus_checks,
)
from .ska import TripartiteSource, conceptual_rates, iid_key_bounds, public_signal_joint
from .spectrum import block_spectrum, chernoff_bound, tail_above
from .wiretap import CodeKind, RateConfig, evaluate_code, generate_code

DEFAULT_SEED = 20240601
SUITES = ("metrics", "bounds", "ska")
TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    cases: int
    worst_slack: float
    passed: bool


def _h(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


# -- metrics ---------------------------------------------------------------

def _metrics_props(rng, cases=1000):
    pinsker, tri, marg, dp, dvb, norm = [], [], [], [], [], []
    for _ in range(cases):
        a, b = rng.integers(2, 9, size=2)
        joint = rng.dirichlet(np.full(a * b, 0.7)).reshape(a, b)
        v, ub = pinsker_check(joint)
        pinsker.append(ub - v)
        p, q, r = rng.dirichlet(np.ones(a), size=3)
        kernel = rng.dirichlet(np.ones(b), size=a)
        rep = variational_calculus_checks(p, q, r, kernel)
        tri.append(rep.triangle_slack)
        marg.append(rep.marginal_slack)
        dp.append(rep.data_processing_slack)
        u = np.full(a, 1.0 / a)
        mix = u + rng.uniform(0, 1) * (p - u)
        if variational(mix, u) <= 0.5:
            d, rhs = divergence_variational_bound(mix, u)
            dvb.append(rhs - d)
        n = int(rng.integers(1, 20))
        m = all_metrics(joint, n, 0.1)
        norm.append(-max(abs(m["S4"] - m["S1"] / n), abs(m["S5"] - m["S2"] / n)))
    return {
        "pinsker": pinsker,
        "triangle": tri,
        "marginal": marg,
        "data_processing": dp,
        "divergence_variational": dvb,
        "normalized_metrics": norm,
    }


# -- bounds ----------------------------------------------------------------

def _bounds_props(rng):
    chern, cipher, trade, kkt, closed = [], [], [], [], []
    for _ in range(6):
        ch = dmc(rng.dirichlet(np.ones(3), size=2))
        p = rng.dirichlet(np.ones(2))
        base = block_spectrum(ch, p, 1)
        for n in (4, 8, 16):
            spec = block_spectrum(ch, p, n)
            t = spec.mean() + 0.05
            chern.append(chernoff_bound(base, n, t) - tail_above(spec, t))
    for _ in range(10):
        src = MemorylessSource(rng.dirichlet(np.ones(2)))
        for n in (4, 6, 8):
            rep = cipher_secrecy(src, build_extractor(src, 0.5, n, int(rng.integers(2**31))))
            cipher.append(rep.bound - rep.S2_exact)
    for _ in range(4):
        d1 = float(rng.uniform(0.01, 0.2))
        pair = WiretapPair(bsc(d1), bsc(float(rng.uniform(d1, 0.45))))
        code = generate_code(pair, [0.5, 0.5], RateConfig(0.0, 0.3, 0.4, 6), CodeKind.RESOLVABILITY,
                             int(rng.integers(2**31)))
        trade += [t.slack + 1e-9 for t in evaluate_code(code, pair).tradeoffs]
    for _ in range(10):
        spec = random_fading_spec(rng, 4)
        kkt.append(1e-6 - kkt_residual(spec, fading_secrecy_capacity(spec)))
    for _ in range(3):
        d1 = float(rng.uniform(0.0, 0.2))
        d2 = float(rng.uniform(d1, 0.5))
        grid = dm_secrecy_capacity(WiretapPair(bsc(d1), bsc(d2))).value
        closed.append(1e-4 - abs(grid - bsc_secrecy_capacity(d1, d2)))
    return {
        "chernoff_envelope": chern,
        "cipher_leakage": cipher,
        "tradeoff": trade,
        "fading_kkt": kkt,
        "capacity_grid": closed,
    }


# -- secret-key agreement --------------------------------------------------

def _ska_props(rng, cases=500):
    ident, order, swap, public = [], [], [], []
    for i in range(cases):
        nx = 2 + i % 3
        ny, nz = rng.integers(2, 4, size=2)
        src = TripartiteSource(rng.dirichlet(np.full(nx * ny * nz, 0.5)).reshape(nx, ny, nz))
        main, eve = conceptual_rates(src)
        hxy = _h(src.pxy()) - _h(src.pxy().sum(axis=0))
        hxz = _h(src.pxz()) - _h(src.pxz().sum(axis=0))
        ident.append(-max(abs(main - (np.log2(nx) - hxy)), abs(eve - (np.log2(nx) - hxz))))
        b = iid_key_bounds(src)
        order.append(b.upper - b.lower)
        s = iid_key_bounds(src.swap_xy())
        swap.append(-max(abs(b.lower_branches[0] - s.lower_branches[1]),
                         abs(b.lower_branches[1] - s.lower_branches[0])))
        if i < 50:
            joint = public_signal_joint(src)
            expect = np.repeat(src.pmf[..., None] / nx, nx, axis=3)
            public.append(-float(np.abs(joint - expect).max()))
    return {"identities": ident, "bound_order": order, "swap_symmetry": swap, "public_signal": public}


_PROPS = {"metrics": _metrics_props, "bounds": _bounds_props, "ska": _ska_props}


def run_suite(suite: str, seed: int = DEFAULT_SEED, perturb: str | None = None) -> list:
    """Run one suite (or ``all``) and return one :class:`CheckResult` per property."""
    names = SUITES if suite == "all" else (suite,)
    results = []
    for name in names:
        if name not in _PROPS:
            raise KeyError(name)
        rng = np.random.default_rng([seed, SUITES.index(name)])
        for prop, slacks in _PROPS[name](rng).items():
            s = np.asarray(slacks, dtype=float)
            if perturb == f"{name}.{prop}":
                s = -s
            worst = float(s.min()) if s.size else 0.0
            results.append(CheckResult(name, prop, int(s.size), worst, bool(s.size) and worst >= -TOL))
    return results


def report(results) -> dict:
    return {
        "passed": all(r.passed for r in results),
        "failures": [f"{r.suite}.{r.name}" for r in results if not r.passed],
        "checks": [asdict(r) for r in results],
    }
