"""Wiretap codes: random generation and exact finite-n evaluation.

A code carries a common message ``k`` (``M0`` values), a secret message ``l``
(``M1`` values) and an auxiliary randomizing message ``m`` (``M1'`` values).
Codewords are stored as ``x_words[k, l, m]`` and flattened in that row-major
order, so the flat index is ``(k * M1 + l) * M1' + m``.

All evaluators enumerate the output space exactly, in blocks of outputs so
memory stays bounded; Monte Carlo is offered only for the error probability.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._util import as_pmf, binary_entropy, set_size
from .channels import DiscreteChannel, WiretapPair, likelihood_block, likelihood_rows
from .errors import DomainError, InfeasibleCostError, ResourceError, ShapeError
from .metrics import JointDistribution, MetricId, all_metrics, secrecy_metric, variational
from .spectrum import block_spectrum, spectral_bounds, tail_at_least

SYMBOL_GUARD = 2**26
EVE_GUARD = 2**24
EXACT_PE_GUARD = 2**22
BLOCK_CELLS = 2**21
ML_TIE_RTOL = 1e-12
MAX_REJECTIONS = 10_000


class CodeKind(str, Enum):
    CAPACITY = "capacity"
    RESOLVABILITY = "resolvability"
    CUSTOM = "custom"


@dataclass(frozen=True)
class RateConfig:
    """Rates in bits per symbol; set sizes are ``ceil(2^{nR})``."""

    R0: float
    R1: float
    R1prime: float
    n: int
    epsilon_n: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("blocklength must be positive")
        if min(self.R0, self.R1, self.R1prime) < 0:
            raise DomainError("rates must be nonnegative")
        if self.epsilon_n is None:
            object.__setattr__(self, "epsilon_n", self.n ** -0.25)
        elif not self.epsilon_n > 0:
            raise DomainError("epsilon_n must be positive")

    @property
    def M0(self) -> int:
        return set_size(self.n, self.R0)

    @property
    def M1(self) -> int:
        return set_size(self.n, self.R1)

    @property
    def M1prime(self) -> int:
        return set_size(self.n, self.R1prime)


@dataclass(frozen=True)
class CostBudget:
    """Additive cost ``c(x)`` per input symbol and block-average budget ``P``."""

    costs: tuple
    budget: float

    def feasible(self, word) -> bool:
        c = np.asarray(self.costs, dtype=float)
        return float(c[np.asarray(word)].mean()) <= self.budget + 1e-12


@dataclass(frozen=True)
class DecodingRule:
    variant: str = "ml"
    gamma: float = 0.0

    def __post_init__(self):
        if self.variant not in ("ml", "threshold"):
            raise DomainError(f"unknown decoding rule {self.variant!r}")
        if self.variant == "threshold" and not self.gamma > 0:
            raise DomainError("threshold decoding needs gamma > 0")


ML = DecodingRule("ml")


def Threshold(gamma: float) -> DecodingRule:
    return DecodingRule("threshold", gamma)


@dataclass(frozen=True, eq=False)
class WiretapCode:
    """Explicit codebook ``{u_k, x_klm}``.

    ``input_given_u`` is the ``(|U|, |X|)`` law the codewords were drawn
    from; threshold decoding and the reference output laws use it.  A
    trivial ``U`` (one symbol) is the usual case.
    """

    rates: RateConfig
    u_words: np.ndarray
    x_words: np.ndarray
    kind: CodeKind = CodeKind.CUSTOM
    cost_budget: CostBudget | None = None
    input_given_u: np.ndarray | None = None
    u_dist: np.ndarray | None = None

    def __post_init__(self):
        r = self.rates
        x = np.array(self.x_words, dtype=np.int64)
        u = np.array(self.u_words, dtype=np.int64)
        if x.shape != (r.M0, r.M1, r.M1prime, r.n):
            raise ShapeError(f"x_words shape {x.shape} != {(r.M0, r.M1, r.M1prime, r.n)}")
        if u.shape != (r.M0, r.n):
            raise ShapeError(f"u_words shape {u.shape} != {(r.M0, r.n)}")
        if x.min() < 0 or u.min() < 0:
            raise DomainError("symbols must be nonnegative indices")
        if self.input_given_u is None:
            size = int(x.max()) + 1
            pxu = np.full((1, size), 1.0 / size)
        else:
            pxu = np.atleast_2d(np.asarray(self.input_given_u, dtype=float))
        if x.max() >= pxu.shape[1] or u.max() >= pxu.shape[0]:
            raise DomainError("codeword symbols outside the input alphabet")
        pu = np.full(pxu.shape[0], 1.0 / pxu.shape[0]) if self.u_dist is None else as_pmf(self.u_dist)
        if self.cost_budget is not None:
            for w in x.reshape(-1, r.n):
                if not self.cost_budget.feasible(w):
                    raise DomainError("a codeword violates the cost budget")
        for arr in (x, u, pxu, pu):
            arr.flags.writeable = False
        object.__setattr__(self, "x_words", x)
        object.__setattr__(self, "u_words", u)
        object.__setattr__(self, "input_given_u", pxu)
        object.__setattr__(self, "u_dist", pu)
        object.__setattr__(self, "kind", CodeKind(self.kind))

    @property
    def n(self) -> int:
        return self.rates.n

    @property
    def M0(self) -> int:
        return self.rates.M0

    @property
    def M1(self) -> int:
        return self.rates.M1

    @property
    def M1prime(self) -> int:
        return self.rates.M1prime

    @property
    def size(self) -> int:
        return self.M0 * self.M1 * self.M1prime

    @property
    def flat_words(self) -> np.ndarray:
        return self.x_words.reshape(-1, self.n)

    def subcode(self, k: int) -> "WiretapCode":
        """The code restricted to common message ``k`` (so ``M0 = 1``)."""
        r = self.rates
        rates = RateConfig(0.0, r.R1, r.R1prime, r.n, r.epsilon_n)
        return WiretapCode(
            rates, self.u_words[k : k + 1], self.x_words[k : k + 1], self.kind,
            self.cost_budget, self.input_given_u, self.u_dist,
        )

    def to_json(self) -> str:
        r = self.rates
        doc = {
            "rates": {"R0": r.R0, "R1": r.R1, "R1prime": r.R1prime, "n": r.n, "epsilon_n": r.epsilon_n},
            "kind": self.kind.value,
            "u_words": self.u_words.tolist(),
            "x_words": self.x_words.tolist(),
            "input_given_u": [[repr(float(v)) for v in row] for row in self.input_given_u],
            "u_dist": [repr(float(v)) for v in self.u_dist],
        }
        if self.cost_budget is not None:
            doc["cost_budget"] = {"costs": list(self.cost_budget.costs), "budget": self.cost_budget.budget}
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text: str) -> "WiretapCode":
        d = json.loads(text)
        cb = d.get("cost_budget")
        return cls(
            RateConfig(**d["rates"]),
            np.array(d["u_words"]),
            np.array(d["x_words"]),
            CodeKind(d["kind"]),
            CostBudget(tuple(cb["costs"]), cb["budget"]) if cb else None,
            np.array([[float(v) for v in row] for row in d["input_given_u"]]),
            np.array([float(v) for v in d["u_dist"]]),
        )


# -- generation ------------------------------------------------------------

def _draw_word(rng, pmf, n, cost_budget):
    for _ in range(MAX_REJECTIONS):
        w = rng.choice(pmf.size, size=n, p=pmf)
        if cost_budget is None or cost_budget.feasible(w):
            return w
    raise InfeasibleCostError(f"no cost-feasible codeword after {MAX_REJECTIONS} draws")


def generate_code(
    pair: WiretapPair | None,
    input_dist,
    rates: RateConfig,
    kind: CodeKind | str = CodeKind.CUSTOM,
    seed: int = 0,
    cost_budget: CostBudget | None = None,
    u_dist=None,
    distinct: bool = False,
) -> WiretapCode:
    """Draw a random code with i.i.d. codeword symbols.

    Parameters
    ----------
    pair : WiretapPair or None
        Used only to check the input alphabet size.
    input_dist : array_like
        Either a pmf over ``X`` (trivial ``U``) or a ``(|U|, |X|)`` matrix of
        conditional pmfs ``p(x|u)``.  ``u_words`` are drawn i.i.d. from
        ``u_dist`` (uniform by default) and each codeword symbol from the row
        of its ``u`` symbol.
    rates : RateConfig
    kind : CodeKind
        Label only; the rates decide the construction.
    seed : int
        Seeds a single ``numpy`` generator; ``u_words`` are drawn first, then
        codewords in flat ``(k, l, m)`` order.
    cost_budget : CostBudget, optional
        Each codeword is redrawn until its average cost fits the budget.
    distinct : bool
        Redraw codewords that repeat an earlier one (requires
        ``|X|^n >= M0 M1 M1'``).
    """
    pxu = np.atleast_2d(np.asarray(input_dist, dtype=float))
    for row in pxu:
        as_pmf(row, name="input distribution")
    if pair is not None and pxu.shape[1] != pair.input_size:
        raise ShapeError("input distribution does not match the channel input alphabet")
    pu = np.full(pxu.shape[0], 1.0 / pxu.shape[0]) if u_dist is None else as_pmf(u_dist, name="u_dist")
    if pu.size != pxu.shape[0]:
        raise ShapeError("u_dist length must equal the number of conditional rows")
    M0, M1, M1p, n = rates.M0, rates.M1, rates.M1prime, rates.n
    total = M0 * M1 * M1p
    if total * n > SYMBOL_GUARD:
        raise ResourceError(f"{total} codewords of length {n} exceed the symbol guard")
    if distinct and total > pxu.shape[1] ** n:
        raise DomainError("more codewords requested than distinct sequences exist")
    if cost_budget is not None:
        c = np.asarray(cost_budget.costs, dtype=float)
        if c.shape != (pxu.shape[1],):
            raise ShapeError("one cost per input symbol is required")
        if c[pxu.max(axis=0) > 0].min() > cost_budget.budget:
            raise InfeasibleCostError("every supported symbol exceeds the cost budget")

    rng = np.random.default_rng(seed)
    u_words = rng.choice(pu.size, size=(M0, n), p=pu)
    trivial_u = pxu.shape[0] == 1
    if trivial_u and cost_budget is None and not distinct:
        x = rng.choice(pxu.shape[1], size=(total, n), p=pxu[0])
    else:
        x = np.empty((total, n), dtype=np.int64)
        seen = set()
        for j in range(total):
            k = j // (M1 * M1p)
            for _ in range(MAX_REJECTIONS):
                if trivial_u:
                    w = _draw_word(rng, pxu[0], n, cost_budget)
                else:
                    w = np.array([rng.choice(pxu.shape[1], p=pxu[s]) for s in u_words[k]])
                    if cost_budget is not None and not cost_budget.feasible(w):
                        continue
                if not distinct or w.tobytes() not in seen:
                    break
            else:
                raise InfeasibleCostError(f"codeword {j}: no admissible draw after {MAX_REJECTIONS} tries")
            seen.add(w.tobytes())
            x[j] = w
    return WiretapCode(
        rates, u_words, x.reshape(M0, M1, M1p, n), CodeKind(kind), cost_budget, pxu, pu
    )


def prop3_rates(delta1: float, delta2: float, n: int, kind, epsilon_n: float | None = None,
                margin: float = 0.1) -> RateConfig:
    """Rates of the binary symmetric separation experiment.

    Both constructions send ``R1 = h(delta2) - h(delta1)``.  The capacity
    based code picks ``R1' = 1 - h(delta2) - epsilon_n`` (clamped at 0), the
    resolvability based one ``R1' = 1 - h(delta2) + margin``.
    """
    if not 0 <= delta1 < delta2 <= 0.5:
        raise DomainError("need 0 <= delta1 < delta2 <= 1/2")
    eps = n ** -0.25 if epsilon_n is None else epsilon_n
    r1 = binary_entropy(delta2) - binary_entropy(delta1)
    kind = CodeKind(kind)
    if kind is CodeKind.CAPACITY:
        r1p = max(0.0, 1 - binary_entropy(delta2) - eps)
    elif kind is CodeKind.RESOLVABILITY:
        r1p = 1 - binary_entropy(delta2) + margin
    else:
        raise DomainError("prop3 rates are defined for capacity or resolvability codes")
    return RateConfig(0.0, r1, r1p, n, eps)


# -- exact enumeration helpers ---------------------------------------------

def _ml_choice(L: np.ndarray) -> np.ndarray:
    """Index of the first candidate within ``1e-12`` relative of the max, along axis -2."""
    best = L.max(axis=-2, keepdims=True)
    return np.argmax(L >= best * (1 - ML_TIE_RTOL), axis=-2)


def _threshold_choice(L: np.ndarray, ref: np.ndarray, log_level: float) -> np.ndarray:
    """Unique candidate with ``log2(L/ref) >= log_level``; index 0 otherwise."""
    passing = L >= ref[..., None, :] * 2.0**log_level
    count = passing.sum(axis=-2)
    return np.where(count == 1, np.argmax(passing, axis=-2), 0)


def _u_channel(code: WiretapCode, channel: DiscreteChannel) -> DiscreteChannel:
    return DiscreteChannel(code.input_given_u @ channel.transition)


def _marginal_rows(code: WiretapCode, channel: DiscreteChannel) -> np.ndarray:
    """``p(y^n)`` under the code's i.i.d. reference law, as one row."""
    letter = DiscreteChannel((code.u_dist @ code.input_given_u @ channel.transition)[None, :])
    return likelihood_rows(letter, np.zeros((1, code.n), dtype=np.int64))[0]


def _check_alphabet(code: WiretapCode, channel: DiscreteChannel):
    if code.input_given_u.shape[1] != channel.input_size:
        raise ShapeError("code input alphabet differs from the channel input alphabet")


def _row_chunks(channel: DiscreteChannel, words: np.ndarray, group: int = 1):
    """Yield ``(start, rows)`` with ``rows[j] = W^n(. | words[start + j])`` over all outputs.

    Chunks hold whole groups of ``group`` consecutive words and at most
    about ``BLOCK_CELLS`` probabilities when that allows more than one group.
    """
    outputs = channel.output_size ** words.shape[1]
    per = max(1, BLOCK_CELLS // max(outputs * group, 1)) * group
    for start in range(0, words.shape[0], per):
        yield start, likelihood_rows(channel, words[start : start + per])


def _ml_scan(channel: DiscreteChannel, words: np.ndarray):
    """ML decision over ``words`` for every output, with the winning likelihood."""
    outputs = channel.output_size ** words.shape[1]
    best = np.zeros(outputs)
    choice = np.zeros(outputs, dtype=np.int64)
    cols = np.arange(outputs)
    for start, R in _row_chunks(channel, words):
        local = _ml_choice(R)
        value = R[local, cols]
        better = value > best * (1 + ML_TIE_RTOL)
        choice[better] = start + local[better]
        best[better] = value[better]
    return choice, best


def _threshold_scan(channel: DiscreteChannel, words: np.ndarray, ref: np.ndarray, log_level: float):
    """Threshold decision over ``words``: the unique passing word, else word 0."""
    outputs = ref.size
    level = ref * 2.0**log_level
    count = np.zeros(outputs, dtype=np.int64)
    first = np.zeros(outputs, dtype=np.int64)
    first_val = np.zeros(outputs)
    zero_val = None
    cols = np.arange(outputs)
    for start, R in _row_chunks(channel, words):
        if zero_val is None:
            zero_val = R[0].copy()
        passing = R >= level
        new = (count == 0) & passing.any(axis=0)
        local = np.argmax(passing, axis=0)
        first[new] = start + local[new]
        first_val[new] = R[local, cols][new]
        count += passing.sum(axis=0)
    unique = count == 1
    return np.where(unique, first, 0), np.where(unique, first_val, zero_val)


# -- eavesdropper side -----------------------------------------------------

def _eve_guard(code: WiretapCode, eve: DiscreteChannel):
    _check_alphabet(code, eve)
    if eve.output_size**code.n > EVE_GUARD:
        raise ResourceError(f"|Z|^n = {eve.output_size}^{code.n} exceeds the 2^24 guard")


def eve_joint(code: WiretapCode, eve: DiscreteChannel, k: int = 0) -> JointDistribution:
    """``p(l, z^n) = (1/M1)(1/M1') sum_m W^n(z^n | x_klm)`` for fixed ``k``."""
    _eve_guard(code, eve)
    words = code.x_words[k].reshape(-1, code.n)
    M1p = code.M1prime
    out = np.empty((code.M1, eve.output_size**code.n))
    for start, R in _row_chunks(eve, words, M1p):
        g0 = start // M1p
        out[g0 : g0 + R.shape[0] // M1p] = R.reshape(-1, M1p, R.shape[1]).sum(axis=1)
    out /= code.M1 * M1p
    return JointDistribution(out)


def code_secrecy(code: WiretapCode, eve: DiscreteChannel, metric: MetricId, k: int = 0) -> float:
    return secrecy_metric(eve_joint(code, eve, k), metric)


def code_metrics(code: WiretapCode, eve: DiscreteChannel, epsilon: float, k: int = 0) -> dict:
    return all_metrics(eve_joint(code, eve, k), code.n, epsilon)


def _eve_correct(code: WiretapCode, eve: DiscreteChannel, rule: DecodingRule) -> np.ndarray:
    """Per-codeword probability that Eve, told ``(k, l)``, recovers ``m``."""
    _eve_guard(code, eve)
    n, S = code.n, code.M1prime
    words = code.flat_words
    correct = np.empty(code.size)
    pzu = likelihood_rows(_u_channel(code, eve), code.u_words) if rule.variant == "threshold" else None
    for start, R in _row_chunks(eve, words, S):
        L = R.reshape(-1, S, R.shape[1])
        if rule.variant == "ml":
            g = _ml_choice(L)
        else:
            ks = (start // S + np.arange(L.shape[0])) // code.M1
            g = _threshold_choice(L, pzu[ks], math.log2(S) + n * rule.gamma)
        hit = np.arange(S)[None, :, None] == g[:, None, :]
        correct[start : start + R.shape[0]] = (L * hit).sum(axis=-1).ravel()
    return correct


# -- legitimate receiver ---------------------------------------------------

class ErrorEstimate(float):
    """Monte Carlo error probability; ``half_width`` is the 95% interval half-width."""

    def __new__(cls, value, half_width, trials):
        obj = super().__new__(cls, value)
        obj.half_width = half_width
        obj.trials = trials
        return obj


def _bob_scan(code: WiretapCode, main: DiscreteChannel, rule: DecodingRule):
    """Decoded flat codeword index and its likelihood for every output."""
    words = code.flat_words
    if rule.variant == "ml":
        return _ml_scan(main, words)
    n, inner = code.n, code.M1 * code.M1prime
    pyu = likelihood_rows(_u_channel(code, main), code.u_words)
    level = math.log2(inner) + n * rule.gamma
    if code.M0 == 1:
        return _threshold_scan(main, words, pyu[0], level)
    py = _marginal_rows(code, main)
    k_hat = _threshold_choice(pyu[None], py[None], math.log2(code.M0) + n * rule.gamma)[0]
    choice = np.zeros(py.size, dtype=np.int64)
    value = np.zeros(py.size)
    for k in range(code.M0):
        c, v = _threshold_scan(main, words[k * inner : (k + 1) * inner], pyu[k], level)
        sel = k_hat == k
        choice[sel] = k * inner + c[sel]
        value[sel] = v[sel]
    return choice, value


def _bob_correct(code: WiretapCode, main: DiscreteChannel, rule: DecodingRule, count: str) -> np.ndarray:
    _check_alphabet(code, main)
    choice, value = _bob_scan(code, main, rule)
    if count == "codeword":
        return np.bincount(choice, weights=value, minlength=code.size)
    # any codeword of the decoded message group counts as correct
    group = code.M1prime
    msg = choice // group
    correct = np.empty(code.size)
    for start, R in _row_chunks(main, code.flat_words, group):
        rows_msg = (start + np.arange(R.shape[0])) // group
        correct[start : start + R.shape[0]] = np.where(rows_msg[:, None] == msg[None, :], R, 0.0).sum(axis=1)
    return correct


def _bob_decide_sampled(code: WiretapCode, main: DiscreteChannel, rule: DecodingRule, y: np.ndarray):
    """Decoder applied to explicit output rows (Monte Carlo path)."""
    L = likelihood_block(main, code.flat_words, y)
    if rule.variant == "ml":
        return _ml_choice(L)
    n, inner = code.n, code.M1 * code.M1prime
    pyu = likelihood_block(_u_channel(code, main), code.u_words, y)
    level = math.log2(inner) + n * rule.gamma
    if code.M0 == 1:
        return _threshold_choice(L[None], pyu, level)[0]
    letter = DiscreteChannel((code.u_dist @ code.input_given_u @ main.transition)[None, :])
    py = likelihood_block(letter, np.zeros((1, n), dtype=np.int64), y)
    k_hat = _threshold_choice(pyu[None], py, math.log2(code.M0) + n * rule.gamma)[0]
    within = _threshold_choice(L.reshape(code.M0, inner, -1), pyu, level)
    return k_hat * inner + within[k_hat, np.arange(y.shape[0])]


def error_probability(
    code: WiretapCode,
    main: DiscreteChannel,
    rule: DecodingRule = ML,
    count: str = "codeword",
    mc_trials: int | None = None,
    seed: int = 0,
):
    """Average error probability of Bob's decoder.

    ``count="codeword"`` scores the full ``(k, l, m)`` decision and
    ``count="message"`` only ``(k, l)``.  Exact when ``|Y|^n <= 2^22``;
    otherwise a Monte Carlo :class:`ErrorEstimate` if ``mc_trials`` is given.
    """
    if count not in ("codeword", "message"):
        raise DomainError("count must be 'codeword' or 'message'")
    if main.output_size**code.n > EXACT_PE_GUARD:
        if mc_trials is None:
            raise ResourceError("output space too large for exact evaluation; pass mc_trials")
        return _mc_error(code, main, rule, count, mc_trials, seed)
    return float(1.0 - _bob_correct(code, main, rule, count).mean())


def _mc_error(code, main, rule, count, trials, seed) -> ErrorEstimate:
    rng = np.random.default_rng(seed)
    words = code.flat_words
    sent = rng.integers(0, code.size, size=trials)
    cum = np.cumsum(main.transition, axis=1)
    errors = 0
    batch = max(1, BLOCK_CELLS // code.size)
    group = code.M1prime if count == "message" else 1
    for start in range(0, trials, batch):
        s = sent[start : start + batch]
        draws = rng.random(words[s].shape)
        y = np.minimum((draws[..., None] > cum[words[s]]).sum(axis=-1), main.output_size - 1)
        g = _bob_decide_sampled(code, main, rule, y)
        errors += int(np.sum(g // group != s // group))
    p = errors / trials
    return ErrorEstimate(p, 1.96 * math.sqrt(max(p * (1 - p), 1e-300) / trials), trials)


def error_probability_star(code: WiretapCode, pair: WiretapPair, rule: DecodingRule = ML) -> float:
    """``Pe*``: Bob misses ``(k, l, m)`` or Eve, told ``(k, l)``, misses ``m``.

    Bob and Eve outputs are conditionally independent given the codeword, so
    the per-codeword success probabilities multiply.
    """
    for ch in (pair.main, pair.eve):
        if ch.output_size**code.n > EXACT_PE_GUARD:
            raise ResourceError("output space too large for exact Pe*")
    bob = _bob_correct(code, pair.main, rule, "codeword")
    eve = _eve_correct(code, pair.eve, rule)
    return float(1.0 - np.mean(bob * eve))


# -- bounds ----------------------------------------------------------------

@dataclass(frozen=True)
class TradeoffResult:
    lhs: float
    rhs: float
    pe_star: float
    s2: float
    p_a0: float
    b: float

    @property
    def holds(self) -> bool:
        return self.lhs >= self.rhs - 1e-9

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def a0_probability(code: WiretapCode, eve: DiscreteChannel, b, k: int = 0):
    """``P[A0]`` for ``Xbar`` the codeword index ``(l, m)`` and ``Zbar = Z^n``.

    ``A0 = {2^{-b sqrt n}/M1 < p(xbar|z) <= 2^{b sqrt n}/M1}`` under the joint
    ``p(xbar, z) = W^n(z | x_{k l m}) / (M1 M1')``.  ``b`` may be a sequence,
    in which case an array of probabilities is returned.
    """
    _eve_guard(code, eve)
    bs = np.atleast_1d(np.asarray(b, dtype=float))
    n = code.n
    words = code.x_words[k].reshape(-1, n)
    K = words.shape[0]
    pz = np.zeros(eve.output_size**n)
    for _, R in _row_chunks(eve, words):
        pz += R.sum(axis=0)
    pz /= K
    lo = 2.0 ** (-bs * math.sqrt(n)) / code.M1
    hi = 2.0 ** (bs * math.sqrt(n)) / code.M1
    total = np.zeros(bs.size)
    safe = np.where(pz > 0, pz, 1.0)
    for _, R in _row_chunks(eve, words):
        pxz = R / K
        post = pxz / safe
        for i in range(bs.size):
            total[i] += pxz[(post > lo[i]) & (post <= hi[i])].sum()
    return float(total[0]) if np.ndim(b) == 0 else total


def tradeoff_check(code: WiretapCode, pair: WiretapPair, b: float, rule: DecodingRule = ML,
                   pe_star: float | None = None, s2: float | None = None) -> TradeoffResult:
    """Evaluate ``Pe* + S2 >= 1 - 2^{-b sqrt n + 1} - P[A0]`` exactly.

    ``pe_star`` and ``s2`` may be passed in when already computed.
    """
    if not b > 0:
        raise DomainError("b must be positive")
    if pe_star is None:
        pe_star = error_probability_star(code, pair, rule)
    if s2 is None:
        s2 = code_secrecy(code, pair.eve, MetricId(2))
    pa0 = a0_probability(code, pair.eve, b)
    rhs = 1.0 - 2.0 ** (-b * math.sqrt(code.n) + 1) - pa0
    return TradeoffResult(pe_star + s2, rhs, pe_star, s2, pa0, b)


@dataclass(frozen=True)
class ResolvabilityBound:
    total: float
    terms: tuple
    rho: float
    M1prime: int
    n: int


def resolvability_bound(eve: DiscreteChannel, input_pmf, R1prime: float, n: int, gamma: float,
                        tau: float) -> ResolvabilityBound:
    """Finite-n resolvability bound on the expected S2 of a random sub-code.

    Evaluates ``4 tau + 4 P[i >= a + log rho / n] + 4 P[i >= a] + 4 2^{-n gamma}/rho^2
    + (4/rho^2) P[i >= a - gamma]`` with ``a = log2(M1')/n``,
    ``rho = (2^tau - 1)/2`` and ``i`` the normalized information density of
    ``n`` uses of ``eve``; every tail is exact.
    """
    rho = (2.0**tau - 1.0) / 2.0
    if not rho > 0:
        raise DomainError("tau must be positive so that rho > 0")
    M1p = set_size(n, R1prime)
    a = math.log2(M1p) / n
    spec = block_spectrum(eve, input_pmf, n)
    terms = (
        4 * tau,
        4 * tail_at_least(spec, a + math.log2(rho) / n),
        4 * tail_at_least(spec, a),
        4 * 2.0 ** (-n * gamma) / rho**2,
        4 / rho**2 * tail_at_least(spec, a - gamma),
    )
    return ResolvabilityBound(float(sum(terms)), terms, rho, M1p, n)


@dataclass(frozen=True)
class MonteCarloS2:
    mean: float
    std_error: float
    values: tuple = field(repr=False)


def resolvability_monte_carlo(eve: DiscreteChannel, input_pmf, R1prime: float, n: int, seeds,
                              M1: int = 2) -> MonteCarloS2:
    """Exact S2 of independently seeded resolvability sub-codebooks."""
    rates = RateConfig(0.0, math.log2(M1) / n if M1 > 1 else 0.0, R1prime, n)
    vals = []
    for s in seeds:
        code = generate_code(None, input_pmf, rates, CodeKind.RESOLVABILITY, seed=int(s))
        vals.append(code_secrecy(code, eve, MetricId(2)))
    v = np.asarray(vals)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return MonteCarloS2(float(v.mean()), se, tuple(vals))


@dataclass(frozen=True)
class RatePlan:
    reliability_cap: float
    secrecy_floor: float
    gap: float
    main_mean: float
    eve_mean: float
    delta: float
    gamma: float


def rate_planner(pair: WiretapPair, input_pmf, n: int, delta: float = 0.05, gamma: float = 0.01) -> RatePlan:
    """Finite-n rate limits from the reliability and resolvability conditions.

    ``reliability_cap`` bounds ``R1 + R1'`` by the ``delta``-quantile of the
    main spectrum less ``2 gamma``; ``secrecy_floor`` asks ``R1'`` to clear
    the ``(1 - delta)``-quantile of the eavesdropper spectrum plus ``2 gamma``.
    """
    main = spectral_bounds(block_spectrum(pair.main, input_pmf, n), delta)
    eve = spectral_bounds(block_spectrum(pair.eve, input_pmf, n), delta)
    cap = main.inf_estimate - 2 * gamma
    floor = eve.sup_estimate + 2 * gamma
    return RatePlan(cap, floor, cap - floor, main.mean, eve.mean, delta, gamma)


def s2_of_joint(joint: JointDistribution) -> float:
    return variational(joint.pmf, joint.product())


@dataclass(frozen=True)
class CodeEvaluation:
    metrics: dict
    pe: float
    pe_star: float
    tradeoffs: tuple


def evaluate_code(code: WiretapCode, pair: WiretapPair, epsilon: float = 0.1, bs=(0.5, 1.0, 2.0),
                  rule: DecodingRule = ML) -> CodeEvaluation:
    """Secrecy metrics, ``Pe``, ``Pe*`` and tradeoff checks of an ``M0 = 1`` code.

    Same numbers as the individual evaluators, but the eavesdropper rows
    are enumerated only twice: once for the joint (which also yields
    ``p(z)``) and once for Eve's decoding and ``P[A0]``.
    """
    if code.M0 != 1:
        raise DomainError("evaluate_code handles codes without a common message")
    eve = pair.eve
    _eve_guard(code, eve)
    if pair.main.output_size**code.n > EXACT_PE_GUARD:
        raise ResourceError("output space too large for exact Pe")
    joint = eve_joint(code, eve)
    metrics = all_metrics(joint, code.n, epsilon)
    pz = joint.marginal_z()
    safe = np.where(pz > 0, pz, 1.0)

    n, S, K = code.n, code.M1prime, code.size
    bs = tuple(float(b) for b in bs)
    lo = [2.0 ** (-b * math.sqrt(n)) / code.M1 for b in bs]
    hi = [2.0 ** (b * math.sqrt(n)) / code.M1 for b in bs]
    pa0 = np.zeros(len(bs))
    eve_ok = np.empty(K)
    pzu = likelihood_rows(_u_channel(code, eve), code.u_words) if rule.variant == "threshold" else None
    for start, R in _row_chunks(eve, code.flat_words, S):
        L = R.reshape(-1, S, R.shape[1])
        if rule.variant == "ml":
            g = _ml_choice(L)
        else:
            g = _threshold_choice(L, np.broadcast_to(pzu[0], (L.shape[0], pz.size)), math.log2(S) + n * rule.gamma)
        hit = np.arange(S)[None, :, None] == g[:, None, :]
        eve_ok[start : start + R.shape[0]] = (L * hit).sum(axis=-1).ravel()
        pxz = R / K
        post = pxz / safe
        for i in range(len(bs)):
            pa0[i] += pxz[(post > lo[i]) & (post <= hi[i])].sum()

    bob_ok = _bob_correct(code, pair.main, rule, "codeword")
    pe = float(1.0 - bob_ok.mean())
    pe_star = float(1.0 - np.mean(bob_ok * eve_ok))
    s2 = metrics["S2"]
    trade = tuple(
        TradeoffResult(pe_star + s2, 1.0 - 2.0 ** (-b * math.sqrt(n) + 1) - float(p), pe_star, s2, float(p), b)
        for b, p in zip(bs, pa0)
    )
    return CodeEvaluation(metrics, pe, pe_star, trade)
