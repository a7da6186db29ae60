"""Channel models and their memoryless block extensions.

All channels are finite row-stochastic matrices ``W[x, z]`` except the
Gaussian model, which is only ever handled at the density level.  Block
sequences are indexed big-endian: the first symbol is the most significant
digit, so ``extend(W, n).row(x)`` lists ``W^n(z^n | x^n)`` in the same order
as :func:`secrecy_lab._util.all_sequences`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, stats

from ._util import PMF_ATOL, as_pmf, fmt17, seq_to_index
from .errors import DomainError, NumericalAccuracyError, ShapeError

ROW_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class DiscreteChannel:
    """Memoryless channel ``W(z|x)`` given by a row-stochastic matrix."""

    transition: np.ndarray

    def __post_init__(self):
        w = np.array(self.transition, dtype=float, copy=True)
        if w.ndim != 2 or 0 in w.shape:
            raise ShapeError("transition must be a nonempty 2-D matrix")
        if np.any(w < 0) or np.any(w > 1) or not np.all(np.isfinite(w)):
            raise DomainError("transition entries must lie in [0, 1]")
        bad = np.abs(w.sum(axis=1) - 1.0) > ROW_ATOL
        if np.any(bad):
            raise DomainError(f"rows {np.flatnonzero(bad).tolist()} do not sum to 1")
        w.flags.writeable = False
        object.__setattr__(self, "transition", w)

    @property
    def input_size(self) -> int:
        return self.transition.shape[0]

    @property
    def output_size(self) -> int:
        return self.transition.shape[1]

    def __eq__(self, other):
        if not isinstance(other, DiscreteChannel):
            return NotImplemented
        return np.array_equal(self.transition, other.transition)

    def __hash__(self):
        return hash(self.transition.tobytes())

    def __repr__(self):
        return f"DiscreteChannel({self.transition.tolist()!r})"


@dataclass(frozen=True)
class WiretapPair:
    main: DiscreteChannel
    eve: DiscreteChannel

    def __post_init__(self):
        if self.main.input_size != self.eve.input_size:
            raise ShapeError("main and eavesdropper channels need equal input alphabets")

    @property
    def input_size(self) -> int:
        return self.main.input_size


@dataclass(frozen=True)
class GaussianSpec:
    noise_variance: float
    constellation: tuple = (-1.0, 1.0)

    def __post_init__(self):
        if not self.noise_variance > 0:
            raise DomainError("noise_variance must be positive")
        pts = tuple(float(c) for c in self.constellation)
        if not pts or len(set(pts)) != len(pts):
            raise DomainError("constellation must be nonempty with distinct points")
        object.__setattr__(self, "constellation", pts)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.noise_variance)


@dataclass(frozen=True)
class FadingSpec:
    """Finite set of fading states ``(h_m, h_e, probability)``.

    ``h_m`` and ``h_e`` are squared gain magnitudes.  Continuous fading laws
    must be quantized by the caller.
    """

    gain_states: tuple
    sigma_m2: float
    sigma_e2: float
    power_budget: float

    def __post_init__(self):
        states = tuple((float(a), float(b), float(p)) for a, b, p in self.gain_states)
        if not states:
            raise DomainError("at least one fading state is required")
        probs = np.array([s[2] for s in states])
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise DomainError("state probabilities must form a pmf")
        if any(s[0] < 0 or s[1] < 0 for s in states):
            raise DomainError("squared gains must be nonnegative")
        if not (self.sigma_m2 > 0 and self.sigma_e2 > 0 and self.power_budget > 0):
            raise DomainError("noise variances and power budget must be positive")
        object.__setattr__(self, "gain_states", states)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s[2] for s in self.gain_states])

    @property
    def snr_main(self) -> np.ndarray:
        return np.array([s[0] for s in self.gain_states]) / self.sigma_m2

    @property
    def snr_eve(self) -> np.ndarray:
        return np.array([s[1] for s in self.gain_states]) / self.sigma_e2


def bsc(delta: float) -> DiscreteChannel:
    if not 0 <= delta <= 0.5:
        raise DomainError(f"crossover probability {delta!r} outside [0, 1/2]")
    return DiscreteChannel(np.array([[1 - delta, delta], [delta, 1 - delta]]))


def dmc(matrix) -> DiscreteChannel:
    return DiscreteChannel(np.asarray(matrix, dtype=float))


def noiseless(size: int) -> DiscreteChannel:
    return DiscreteChannel(np.eye(size))


class BlockChannel:
    """Lazy view of ``W^n(z^n|x^n) = prod_i W(z_i|x_i)``."""

    def __init__(self, channel: DiscreteChannel, n: int):
        if n < 1:
            raise DomainError("blocklength must be at least 1")
        self.channel = channel
        self.n = n

    @property
    def input_count(self) -> int:
        return self.channel.input_size ** self.n

    @property
    def output_count(self) -> int:
        return self.channel.output_size ** self.n

    def prob(self, x, z) -> float:
        x, z = tuple(x), tuple(z)
        if len(x) != self.n or len(z) != self.n:
            raise ShapeError(f"sequences must have length {self.n}")
        w = self.channel.transition
        out = 1.0
        for xi, zi in zip(x, z):
            out *= w[xi, zi]
        return float(out)

    def row(self, x) -> np.ndarray:
        """Full output distribution for one input sequence."""
        return likelihood_rows(self.channel, np.asarray([x]))[0]

    def output_index(self, z) -> int:
        return seq_to_index(z, self.channel.output_size)


def extend(channel: DiscreteChannel, n: int) -> BlockChannel:
    return BlockChannel(channel, n)


def _rows_iterative(w: np.ndarray, words: np.ndarray) -> np.ndarray:
    out = np.ones((words.shape[0], 1))
    for i in range(words.shape[1]):
        out = (out[:, :, None] * w[words[:, i]][:, None, :]).reshape(words.shape[0], -1)
    return out


def likelihood_rows(channel: DiscreteChannel, words: np.ndarray) -> np.ndarray:
    """Output distributions of many input words, shape ``(K, |Z|**n)``.

    The prefix and suffix halves are built separately and joined by one
    outer product, which keeps the big array to a single write.
    """
    words = np.asarray(words, dtype=np.int64)
    if words.ndim != 2:
        raise ShapeError("words must be a (K, n) integer array")
    w = channel.transition
    n = words.shape[1]
    if n < 4:
        return _rows_iterative(w, words)
    half = n // 2
    head = _rows_iterative(w, words[:, :half])
    tail = _rows_iterative(w, words[:, half:])
    return (head[:, :, None] * tail[:, None, :]).reshape(words.shape[0], -1)


def likelihood_block(channel: DiscreteChannel, words: np.ndarray, outputs: np.ndarray) -> np.ndarray:
    """``W^n(outputs[j] | words[k])`` for explicit output digit rows, shape ``(K, J)``."""
    w = channel.transition
    words = np.asarray(words, dtype=np.int64)
    outputs = np.asarray(outputs, dtype=np.int64)
    out = np.ones((words.shape[0], outputs.shape[0]))
    for i in range(words.shape[1]):
        out *= w[words[:, i]][:, outputs[:, i]]
    return out


def output_distribution(channel: DiscreteChannel, input_pmf) -> np.ndarray:
    p = np.asarray(input_pmf, dtype=float)
    if p.shape != (channel.input_size,):
        raise ShapeError(f"input pmf needs length {channel.input_size}, got {p.shape}")
    as_pmf(p, PMF_ATOL, "input pmf")
    return p @ channel.transition


def product_channel(first: DiscreteChannel, second: DiscreteChannel) -> DiscreteChannel:
    """Channel with input ``(x1, x2)`` and output ``(z1, z2)``, both row-major."""
    return DiscreteChannel(np.kron(first.transition, second.transition))


def mix_channels(channels, weights) -> DiscreteChannel:
    weights = as_pmf(weights, name="weights")
    if len(channels) != weights.size:
        raise ShapeError("one weight per channel is required")
    shapes = {c.transition.shape for c in channels}
    if len(shapes) != 1:
        raise ShapeError("averaged channels need identical shapes")
    return DiscreteChannel(sum(a * c.transition for a, c in zip(weights, channels)))


@dataclass(frozen=True)
class QuadratureReport:
    value: float
    abs_error: float
    interval: tuple
    tail_mass_bound: float
    sigma: float = field(default=0.0)


def bpsk_awgn_report(spec: GaussianSpec) -> QuadratureReport:
    """Variational distance between ``p(z|m=+1)`` and ``p(z)`` for BPSK over AWGN.

    The integrand ``|p(z|+1) - (p(z|+1) + p(z|-1))/2|`` is even in ``z``, so
    the integral is twice the integral over ``[0, 1 + 10 sigma]``.
    """
    if sorted(spec.constellation) != [-1.0, 1.0]:
        raise DomainError("only the equiprobable {-1, +1} constellation is supported")
    sigma = spec.sigma
    hi = 1.0 + 10.0 * sigma

    def integrand(z):
        return 0.5 * abs(stats.norm.pdf(z, 1.0, sigma) - stats.norm.pdf(z, -1.0, sigma))

    pieces = [(0.0, 1.0), (1.0, hi)]
    value = 0.0
    err = 0.0
    for a, b in pieces:
        # split the long tail piece so the peak near 1 is always resolved
        knots = [a, b] if b - a <= 20 * sigma else [a, a + 20 * sigma, b]
        for lo, up in zip(knots[:-1], knots[1:]):
            v, e = integrate.quad(integrand, lo, up, epsabs=1e-12, epsrel=1e-10, limit=500)
            value += 2 * v
            err += 2 * e
    if err > 1e-8:
        raise NumericalAccuracyError(f"quadrature error estimate {err:.3g} exceeds 1e-8")
    # each conditional density leaves at most 2 * Phi(-10) outside the window
    tail = 2 * stats.norm.sf(10.0)
    return QuadratureReport(value, err, (-hi, hi), tail, sigma)


def bpsk_awgn_variational(spec: GaussianSpec) -> float:
    return bpsk_awgn_report(spec).value


def bpsk_awgn_densities(sigma: float, z: np.ndarray) -> dict:
    """Sampled densities ``p(z|+1)``, ``p(z|-1)`` and their mixture."""
    plus = stats.norm.pdf(z, 1.0, sigma)
    minus = stats.norm.pdf(z, -1.0, sigma)
    return {"z": z, "p_plus": plus, "p_minus": minus, "p_z": 0.5 * (plus + minus)}


# -- JSON specs ------------------------------------------------------------

def channel_to_spec(channel: DiscreteChannel) -> dict:
    return {"kind": "dmc", "matrix": [[fmt17(v) for v in row] for row in channel.transition]}


def fading_to_spec(spec: FadingSpec) -> dict:
    return {
        "kind": "fading",
        "states": [[fmt17(a), fmt17(b), fmt17(p)] for a, b, p in spec.gain_states],
        "sigma_m2": fmt17(spec.sigma_m2),
        "sigma_e2": fmt17(spec.sigma_e2),
        "power": fmt17(spec.power_budget),
    }


def channel_from_spec(spec):
    """Build a channel from ``{"kind": "bsc"|"dmc"|"fading", ...}``.

    Matrix entries may be numbers or decimal strings; strings written by
    :func:`channel_to_spec` round-trip bit-exactly.
    """
    if isinstance(spec, str):
        spec = json.loads(spec)
    kind = spec.get("kind")
    if kind == "bsc":
        return bsc(float(spec["delta"]))
    if kind == "dmc":
        return dmc([[float(v) for v in row] for row in spec["matrix"]])
    if kind == "fading":
        return FadingSpec(
            tuple(tuple(float(v) for v in s) for s in spec["states"]),
            float(spec["sigma_m2"]),
            float(spec["sigma_e2"]),
            float(spec["power"]),
        )
    raise DomainError(f"unknown channel kind {kind!r}")
