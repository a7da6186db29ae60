"""Secret-key agreement from a tripartite source via a wiretap code.

Alice broadcasts ``W = U + X mod |X|`` for a uniform ``U``; Bob then sees
``(Y, W)`` and Eve ``(Z, W)``, which is a wiretap channel with input ``U``.
A wiretap code on that channel turns its secret message into a key.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import PMF_ATOL
from .channels import DiscreteChannel, WiretapPair
from .errors import DomainError, ShapeError
from .metrics import entropy, mutual_information
from .wiretap import ML, CodeKind, RateConfig, WiretapCode, code_metrics, error_probability, generate_code


@dataclass(frozen=True, eq=False)
class TripartiteSource:
    """Joint pmf ``p(x, y, z)`` as a 3-D array."""

    pmf: np.ndarray

    def __post_init__(self):
        p = np.array(self.pmf, dtype=float, copy=True)
        if p.ndim != 3 or 0 in p.shape:
            raise ShapeError("source pmf must be a nonempty 3-D array")
        if np.any(p < 0) or abs(p.sum() - 1.0) > PMF_ATOL:
            raise DomainError("source pmf must be nonnegative and sum to 1")
        p.flags.writeable = False
        object.__setattr__(self, "pmf", p)

    @property
    def sizes(self) -> tuple:
        return self.pmf.shape

    def pxy(self) -> np.ndarray:
        return self.pmf.sum(axis=2)

    def pxz(self) -> np.ndarray:
        return self.pmf.sum(axis=1)

    def pyz(self) -> np.ndarray:
        return self.pmf.sum(axis=0)

    def swap_xy(self) -> "TripartiteSource":
        return TripartiteSource(self.pmf.transpose(1, 0, 2))


def conditional_mutual_information(source: TripartiteSource) -> float:
    """``I(X;Y|Z)``."""
    total = 0.0
    for z in range(source.sizes[2]):
        pz = source.pmf[:, :, z].sum()
        if pz > 0:
            total += pz * mutual_information(source.pmf[:, :, z] / pz)
    return total


@dataclass(frozen=True)
class KeyBounds:
    lower: float
    upper: float
    lower_branches: tuple
    upper_branches: tuple


def iid_key_bounds(source: TripartiteSource) -> KeyBounds:
    """Lower ``max(I(X;Y)-I(X;Z), I(X;Y)-I(Y;Z))``, upper ``min(I(X;Y), I(X;Y|Z))``."""
    ixy = mutual_information(source.pxy())
    ixz = mutual_information(source.pxz())
    iyz = mutual_information(source.pyz())
    lower_branches = (ixy - ixz, ixy - iyz)
    upper_branches = (ixy, conditional_mutual_information(source))
    lower, upper = max(lower_branches), min(upper_branches)
    if lower > upper + 1e-12:
        raise AssertionError(f"key bounds crossed: {lower} > {upper}")
    return KeyBounds(lower, upper, lower_branches, upper_branches)


def _conceptual_channel(pxv: np.ndarray) -> DiscreteChannel:
    """``W((v, w) | u) = sum_x p(x, v) 1[w = u + x mod |X|]``, output index ``v |X| + w``."""
    nx, nv = pxv.shape
    w = np.zeros((nx, nv * nx))
    for u in range(nx):
        for x in range(nx):
            cols = np.arange(nv) * nx + (u + x) % nx
            w[u, cols] += pxv[x]
    return DiscreteChannel(w)


def conceptual_wiretap(source: TripartiteSource) -> WiretapPair:
    """Wiretap pair with input ``U`` and outputs ``(Y, U+X)`` and ``(Z, U+X)``."""
    return WiretapPair(_conceptual_channel(source.pxy()), _conceptual_channel(source.pxz()))


def public_signal_joint(source: TripartiteSource) -> np.ndarray:
    """``p(x, y, z, w)`` with ``W = U + X`` and ``U`` uniform and independent."""
    nx = source.sizes[0]
    out = np.zeros(source.sizes + (nx,))
    for u in range(nx):
        for x in range(nx):
            out[x, :, :, (u + x) % nx] += source.pmf[x] / nx
    return out


def conceptual_rates(source: TripartiteSource) -> tuple:
    """``(I(U; Y, W), I(U; Z, W))`` at uniform ``U``."""
    pair = conceptual_wiretap(source)
    nx = source.sizes[0]
    u = np.full(nx, 1.0 / nx)
    return (
        mutual_information(u[:, None] * pair.main.transition),
        mutual_information(u[:, None] * pair.eve.transition),
    )


def conditional_entropy_x_given(pxv: np.ndarray) -> float:
    return entropy(pxv) - entropy(pxv.sum(axis=0))


@dataclass(frozen=True)
class KeyReport:
    rate: float
    error_prob: float
    secrecy: dict
    uniformity: float
    M1: int
    M1prime: int
    n: int
    code: WiretapCode = field(repr=False, compare=False)

    def as_dict(self) -> dict:
        return {
            "rate": self.rate,
            "n": self.n,
            "M1": self.M1,
            "M1prime": self.M1prime,
            "error_prob": self.error_prob,
            "uniformity": self.uniformity,
            **self.secrecy,
        }


def distill_key(source: TripartiteSource, n: int, rate: float, seed: int = 0, margin: float = 0.0,
                epsilon: float = 0.1) -> KeyReport:
    """Run a resolvability-based wiretap code over ``n`` uses of the conceptual channel.

    The randomization rate is Eve's information rate ``I(U; Z, W)`` plus
    ``margin``.  Codewords are distinct whenever the input space allows it.
    The key is the secret message, which is uniform, so its uniformity gap
    ``log2 M1 - H(K)`` is zero.
    """
    if rate < 0:
        raise DomainError("rate must be nonnegative")
    pair = conceptual_wiretap(source)
    nx = source.sizes[0]
    _, eve_rate = conceptual_rates(source)
    rates = RateConfig(0.0, rate, max(0.0, eve_rate + margin), n)
    distinct = rates.M1 * rates.M1prime <= nx**n
    code = generate_code(pair, np.full(nx, 1.0 / nx), rates, CodeKind.RESOLVABILITY, seed, distinct=distinct)
    pe = error_probability(code, pair.main, ML, count="message")
    secrecy = code_metrics(code, pair.eve, epsilon)
    # the key is the secret message, drawn uniformly over its M1 values
    uniformity = 0.0
    return KeyReport(rate, pe, secrecy, uniformity, rates.M1, rates.M1prime, n, code)
