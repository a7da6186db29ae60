import math

import numpy as np

from .errors import DomainError, ShapeError

PMF_ATOL = 1e-10


def set_size(n: int, rate: float) -> int:
    """Return ``ceil(2**(n*rate))``, snapping float noise onto integers."""
    x = 2.0 ** (n * rate)
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, x):
        return max(1, int(r))
    return max(1, math.ceil(x))


def as_pmf(p, atol: float = PMF_ATOL, name: str = "pmf") -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"{name} must be a nonempty vector")
    if np.any(arr < 0) or np.any(~np.isfinite(arr)):
        raise DomainError(f"{name} has negative or non-finite entries")
    if abs(arr.sum() - 1.0) > atol:
        raise DomainError(f"{name} sums to {arr.sum()!r}, not 1")
    return arr


def all_sequences(alphabet_size: int, n: int) -> np.ndarray:
    """All sequences of length ``n`` as rows, first symbol most significant."""
    idx = np.arange(alphabet_size ** n, dtype=np.int64)
    digits = np.empty((idx.size, n), dtype=np.int64)
    for i in range(n - 1, -1, -1):
        digits[:, i] = idx % alphabet_size
        idx //= alphabet_size
    return digits


def seq_to_index(seq, alphabet_size: int) -> int:
    out = 0
    for s in seq:
        out = out * alphabet_size + int(s)
    return out


def index_to_seq(index: int, alphabet_size: int, n: int) -> tuple:
    out = []
    for _ in range(n):
        out.append(index % alphabet_size)
        index //= alphabet_size
    return tuple(reversed(out))


def binary_entropy(p: float) -> float:
    if p < 0 or p > 1:
        raise DomainError("binary entropy needs p in [0, 1]")
    if p == 0 or p == 1:
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def fmt17(x) -> str:
    """Decimal rendering with 17 significant digits (round-trips float64)."""
    return format(float(x), ".17g")
