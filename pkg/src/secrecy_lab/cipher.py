"""Shannon cipher system: key extraction from a memoryless source plus a one-time pad.

The extractor maps every source block to one of ``ceil(2^{nR})`` bins.  Its
quality is the exact variational distance of the bin distribution from
uniform.  Encrypting a uniform message with the extracted key by modular
addition leaks at most twice that distance in the S2 metric.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ._util import as_pmf, set_size
from .errors import DomainError, ResourceError
from .metrics import JointDistribution, entropy, variational

ENUMERATION_GUARD = 2**24


@dataclass(frozen=True, eq=False)
class MemorylessSource:
    pmf: np.ndarray

    def __post_init__(self):
        p = as_pmf(self.pmf, name="source pmf").copy()
        p.flags.writeable = False
        object.__setattr__(self, "pmf", p)

    @property
    def alphabet_size(self) -> int:
        return self.pmf.size

    @property
    def entropy(self) -> float:
        return entropy(self.pmf)

    def block_pmf(self, n: int) -> np.ndarray:
        """Probabilities of all ``|K|^n`` blocks in big-endian index order."""
        if self.alphabet_size**n > ENUMERATION_GUARD:
            raise ResourceError(f"{self.alphabet_size}^{n} source blocks exceed the 2^24 guard")
        out = np.ones(1)
        for _ in range(n):
            out = np.outer(out, self.pmf).ravel()
        return out


@dataclass(frozen=True, eq=False)
class Extractor:
    """Deterministic map from source-block index to key value."""

    n: int
    rate: float
    num_bins: int
    mapping: np.ndarray
    bin_mass: np.ndarray
    method: str
    seed: int

    def __call__(self, block_index: int) -> int:
        return int(self.mapping[block_index])

    @property
    def uniformity(self) -> float:
        """``V(p_{f(K^n)}, uniform)``."""
        return variational(self.bin_mass, np.full(self.num_bins, 1.0 / self.num_bins))


def _greedy_bins(probs: np.ndarray, num_bins: int, rng: np.random.Generator):
    # random tie order among equal probabilities, then descending mass
    perm = rng.permutation(probs.size)
    order = perm[np.argsort(-probs[perm], kind="stable")]
    mapping = np.empty(probs.size, dtype=np.int64)
    heap = [(0.0, b) for b in range(num_bins)]
    for idx in order:
        mass, b = heapq.heappop(heap)
        mapping[idx] = b
        heapq.heappush(heap, (mass + probs[idx], b))
    running = np.zeros(num_bins)
    for mass, b in heap:
        running[b] = mass
    return mapping, running


def build_extractor(
    source: MemorylessSource, rate: float, n: int, seed: int = 0, method: str = "greedy"
) -> Extractor:
    """Bin all source blocks of length ``n`` into ``ceil(2^{nR})`` keys.

    Parameters
    ----------
    source : MemorylessSource
        Per-letter source law; blocks are i.i.d.
    rate : float
        Key rate in bits per source symbol.  Rates above the source entropy
        are accepted and simply give a poor extractor.
    n : int
        Blocklength.
    seed : int
        Controls tie order (greedy) or the bin assignment (random).
    method : {"greedy", "random"}
        ``greedy`` assigns blocks by decreasing probability to the currently
        lightest bin (lowest index on ties); ``random`` draws each bin
        uniformly.
    """
    if n < 1:
        raise DomainError("n must be positive")
    if rate < 0:
        raise DomainError("rate must be nonnegative")
    probs = source.block_pmf(n)
    num_bins = set_size(n, rate)
    rng = np.random.default_rng(seed)
    if method == "greedy":
        mapping, running = _greedy_bins(probs, num_bins, rng)
    elif method == "random":
        mapping = rng.integers(0, num_bins, size=probs.size)
        running = None
    else:
        raise DomainError(f"unknown extractor method {method!r}")
    mass = np.bincount(mapping, weights=probs, minlength=num_bins)
    if running is not None and not np.allclose(mass, running, rtol=0, atol=1e-12):
        raise AssertionError("bin masses disagree between accumulation paths")
    mapping.flags.writeable = False
    mass.flags.writeable = False
    return Extractor(n, rate, num_bins, mapping, mass, method, seed)


def otp_encrypt(message: int, key: int, modulus: int) -> int:
    _check_range(message, key, modulus)
    return (message + key) % modulus


def otp_decrypt(cipher: int, key: int, modulus: int) -> int:
    _check_range(cipher, key, modulus)
    return (cipher - key) % modulus


def _check_range(a: int, key: int, modulus: int) -> None:
    if modulus < 1:
        raise DomainError("modulus must be positive")
    if not (0 <= a < modulus and 0 <= key < modulus):
        raise DomainError(f"operands must lie in [0, {modulus})")


def cipher_joint(key_pmf, modulus: int | None = None) -> JointDistribution:
    """Joint of uniform message ``M`` and ciphertext ``Z = M + K mod |K|``."""
    key_pmf = np.asarray(key_pmf, dtype=float)
    size = key_pmf.size if modulus is None else modulus
    if size != key_pmf.size:
        raise DomainError("modulus must equal the key alphabet size")
    m = np.arange(size)[:, None]
    z = np.arange(size)[None, :]
    return JointDistribution(key_pmf[(z - m) % size] / size)


@dataclass(frozen=True)
class CipherReport:
    V_extractor: float
    S2_exact: float
    bound: float
    error_prob: float
    modulus: int

    @property
    def holds(self) -> bool:
        return self.S2_exact <= self.bound + 1e-12

    def as_dict(self) -> dict:
        return {
            "V_extractor": self.V_extractor,
            "S2_exact": self.S2_exact,
            "bound": self.bound,
            "error_prob": self.error_prob,
            "modulus": self.modulus,
        }


def cipher_secrecy(source: MemorylessSource, extractor: Extractor, modulus: int | None = None) -> CipherReport:
    """Exact S2 leakage of the one-time pad keyed by ``extractor``.

    The message is uniform over the key alphabet, so decryption never errs
    and the leakage bound is ``2 V_extractor``.
    """
    modulus = extractor.num_bins if modulus is None else modulus
    if modulus != extractor.num_bins:
        raise DomainError(f"modulus {modulus} differs from the key alphabet size {extractor.num_bins}")
    joint = cipher_joint(extractor.bin_mass, modulus)
    s2 = variational(joint.pmf, joint.product())
    v = extractor.uniformity
    return CipherReport(v, s2, 2 * v, 0.0, modulus)


def decay_rate_fit(ns, values) -> float:
    """Least-squares slope of ``log2 V`` against ``n`` (bits per symbol)."""
    ns = np.asarray(ns, dtype=float)
    v = np.asarray(values, dtype=float)
    keep = v > 0
    if keep.sum() < 2:
        return float("-inf")
    return float(np.polyfit(ns[keep], np.log2(v[keep]), 1)[0])
