"""Exact finite-n information-density spectra of memoryless channels.

A spectrum is the law of ``(1/n) i(X^n; Z^n)`` as a finite list of atoms.
For a memoryless channel with i.i.d. input, ``i`` is a sum of ``n``
independent per-letter densities, so the block law is an exact ``n``-fold
convolution of the per-letter law.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._util import PMF_ATOL, as_pmf, fmt17
from .channels import DiscreteChannel
from .errors import DomainError, InconsistentSupportError, ResourceError, ShapeError

MERGE_TOL = 1e-12
TIE_TOL = 1e-12
DEFAULT_ATOM_CAP = 1_000_000
DEFAULT_DELTA = 0.05


def _merge(values: np.ndarray, probs: np.ndarray, tol: float = MERGE_TOL):
    """Sort atoms and fuse runs whose consecutive gaps are within ``tol``."""
    order = np.argsort(values, kind="stable")
    values, probs = values[order], probs[order]
    keep = probs > 0
    values, probs = values[keep], probs[keep]
    if values.size == 0:
        return values, probs
    starts = np.concatenate(([True], np.diff(values) > tol))
    group = np.cumsum(starts) - 1
    merged_p = np.bincount(group, weights=probs)
    # first value of each group stands for the group
    merged_v = values[starts]
    return merged_v, merged_p


@dataclass(frozen=True, eq=False)
class InfoDensitySpectrum:
    """Atoms ``(value, probability)`` of the normalized information density.

    ``values`` are in bits per symbol, sorted ascending, and ``n`` is the
    blocklength the values were normalized by.
    """

    values: np.ndarray
    probs: np.ndarray
    n: int = 1

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        p = np.asarray(self.probs, dtype=float)
        if v.shape != p.shape or v.ndim != 1 or v.size == 0:
            raise ShapeError("values and probs must be equal-length nonempty vectors")
        if np.any(np.diff(v) < 0):
            v, p = _merge(v, p)
        if abs(p.sum() - 1.0) > PMF_ATOL or np.any(p < 0):
            raise DomainError("spectrum probabilities must form a pmf")
        v.flags.writeable = False
        p.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "probs", p)

    @property
    def atoms(self) -> list:
        return list(zip(self.values.tolist(), self.probs.tolist()))

    def mean(self) -> float:
        return float(np.dot(self.values, self.probs))

    def cdf(self, t: float) -> float:
        """``P[value <= t]`` with the tie tolerance applied."""
        return float(self.probs[self.values <= t + TIE_TOL].sum())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "probability"])
        for v, p in zip(self.values, self.probs):
            w.writerow([fmt17(v), fmt17(p)])
        return buf.getvalue()


@dataclass(frozen=True)
class SpectralBounds:
    inf_estimate: float
    sup_estimate: float
    quantile_delta: float
    n: int
    mean: float


def _letter_atoms(channel: DiscreteChannel, p: np.ndarray):
    w = channel.transition
    pz = p @ w
    joint = p[:, None] * w
    bad = (pz == 0) & (joint.sum(axis=0) > 0)
    if np.any(bad):
        raise InconsistentSupportError("output with zero probability carries conditional mass")
    mask = joint > 0
    vals = np.log2(w[mask] / np.broadcast_to(pz, w.shape)[mask])
    return vals, joint[mask]


def per_letter_info_density(channel: DiscreteChannel, input_pmf) -> InfoDensitySpectrum:
    """Law of ``log2(W(z|x)/p(z))`` under ``p(x)W(z|x)``."""
    p = as_pmf(input_pmf, name="input pmf")
    if p.size != channel.input_size:
        raise ShapeError(f"input pmf needs length {channel.input_size}")
    v, q = _merge(*_letter_atoms(channel, p))
    return InfoDensitySpectrum(v, q / q.sum(), 1)


def conditional_info_density(channel: DiscreteChannel, input_given_u, u_pmf) -> InfoDensitySpectrum:
    """Per-letter law of ``i(X;Z|U)``, mixing the per-``u`` spectra by ``p(u)``."""
    pu = as_pmf(u_pmf, name="u pmf")
    rows = np.asarray(input_given_u, dtype=float)
    if rows.shape != (pu.size, channel.input_size):
        raise ShapeError("input_given_u must have shape (|U|, |X|)")
    parts = [per_letter_info_density(channel, rows[u]) for u in range(pu.size)]
    return mix_spectra(parts, pu)


def mix_spectra(spectra, weights) -> InfoDensitySpectrum:
    weights = as_pmf(weights, name="weights")
    ns = {s.n for s in spectra}
    if len(ns) != 1:
        raise ShapeError("mixed spectra must share a blocklength")
    v = np.concatenate([s.values for s in spectra])
    p = np.concatenate([w * s.probs for w, s in zip(weights, spectra)])
    v, p = _merge(v, p)
    return InfoDensitySpectrum(v, p, ns.pop())


def convolve_n(spectrum: InfoDensitySpectrum, n: int, atom_cap: int = DEFAULT_ATOM_CAP) -> InfoDensitySpectrum:
    """Exact law of the average of ``n`` i.i.d. copies of a per-letter spectrum.

    Sums are accumulated unnormalized, merged after every step, and divided
    by ``n`` at the end.  Exceeding ``atom_cap`` atoms raises ResourceError.
    """
    if spectrum.n != 1:
        raise DomainError("convolve_n expects a per-letter (n=1) spectrum")
    if n < 1:
        raise DomainError("n must be positive")
    base_v, base_p = spectrum.values, spectrum.probs
    v, p = base_v.copy(), base_p.copy()
    for _ in range(n - 1):
        if v.size * base_v.size > 4 * atom_cap:
            raise ResourceError(f"convolution would exceed {atom_cap} atoms")
        v, p = _merge((v[:, None] + base_v[None, :]).ravel(), (p[:, None] * base_p[None, :]).ravel())
        if v.size > atom_cap:
            raise ResourceError(f"convolution produced {v.size} atoms, cap is {atom_cap}")
    return InfoDensitySpectrum(v / n, p / p.sum(), n)


def block_spectrum(channel: DiscreteChannel, input_pmf, n: int, atom_cap: int = DEFAULT_ATOM_CAP):
    return convolve_n(per_letter_info_density(channel, input_pmf), n, atom_cap)


def tail_above(spectrum: InfoDensitySpectrum, threshold: float) -> float:
    """``P[value > threshold]``; atoms within 1e-12 of the threshold count as ties."""
    return float(spectrum.probs[spectrum.values > threshold + TIE_TOL].sum())


def tail_below(spectrum: InfoDensitySpectrum, threshold: float) -> float:
    return float(spectrum.probs[spectrum.values < threshold - TIE_TOL].sum())


def mass_at(spectrum: InfoDensitySpectrum, threshold: float) -> float:
    return float(spectrum.probs[np.abs(spectrum.values - threshold) <= TIE_TOL].sum())


def tail_at_least(spectrum: InfoDensitySpectrum, threshold: float) -> float:
    """``P[value >= threshold]`` (tie mass included)."""
    return float(spectrum.probs[spectrum.values >= threshold - TIE_TOL].sum())


def quantile(spectrum: InfoDensitySpectrum, level: float) -> float:
    """Smallest atom value whose CDF reaches ``level``."""
    c = np.cumsum(spectrum.probs)
    idx = int(np.searchsorted(c, level - 1e-15, side="left"))
    return float(spectrum.values[min(idx, c.size - 1)])


def spectral_bounds(spectrum: InfoDensitySpectrum, delta: float = DEFAULT_DELTA) -> SpectralBounds:
    """Quantile surrogates for the spectral-inf and spectral-sup rates.

    Parameters
    ----------
    spectrum : InfoDensitySpectrum
        Block spectrum at a fixed ``n``.
    delta : float
        Quantile level in ``(0, 1/2)``.  The inf estimate is the
        ``delta``-quantile and the sup estimate the ``(1 - delta)``-quantile.

    Returns
    -------
    SpectralBounds
        Both estimates plus the exact mean, which is the true limit for
        memoryless channels.
    """
    if not 0 < delta < 0.5:
        raise DomainError("delta must lie in (0, 1/2)")
    return SpectralBounds(
        quantile(spectrum, delta),
        quantile(spectrum, 1 - delta),
        delta,
        spectrum.n,
        spectrum.mean(),
    )


def chernoff_bound(spectrum: InfoDensitySpectrum, n: int, threshold: float) -> float:
    """Chernoff upper bound on ``P[(1/n) sum_i i_i >= threshold]`` for a per-letter spectrum.

    Minimizes ``E[2^{s i}]^n 2^{-s n t}`` over ``s >= 0`` by bounded scalar search.
    """
    from scipy.optimize import minimize_scalar

    v, p = spectrum.values, spectrum.probs

    def log_bound(s):
        # log2 of the per-letter factor, computed stably
        a = s * (v - threshold)
        m = a.max()
        return n * (m + math.log2(np.dot(p, np.exp2(a - m))))

    res = minimize_scalar(log_bound, bounds=(0.0, 200.0), method="bounded", options={"xatol": 1e-10})
    return float(min(1.0, 2.0 ** min(0.0, res.fun)))
