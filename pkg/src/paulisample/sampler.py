"""Drawing Pauli strings bit by bit from exact or estimated marginals.

The adaptive sampler walks the binary prefix tree of interleaved Pauli
bits.  At each of the 2n levels it asks its marginal source for the
masses of the two child prefixes and branches proportionally.  With an
exact source this reproduces the weight distribution; with a noisy
source (a Bell-dataset estimator) the output stays close to the truth
as long as prefix masses are estimated to relative accuracy along the
likely paths.  `unsafe_mass` and `tv_error_bound` quantify that
guarantee, and `induced_distribution` replays the walk exactly for
analysis.

Negative or zero estimates are legal inputs here:

- one child negative: take the other child (a deterministic step),
- both children negative, or both zero: fair coin,

and every such event is tallied in the returned diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import bell_sample
from .paulis import (
    MAX_DENSE_QUBITS,
    PureState,
    QubitOrdering,
    pauli_distribution,
    schmidt_rank,
)


def prefix_tables(probs):
    """Halving tables: tables[m][u] is the mass of the m-bit prefix u."""
    level = np.asarray(probs, dtype=float)
    tables = [level]
    while level.size > 1:
        level = level.reshape(-1, 2).sum(axis=1)
        tables.append(level)
    tables.reverse()
    return tables


class ExactMarginalOracle:
    """Constant-time prefix masses for a dense pure-state distribution."""

    def __init__(self, state: PureState, ordering: QubitOrdering | None = None):
        if state.n > MAX_DENSE_QUBITS:
            raise ValueError(f"dense oracle limited to {MAX_DENSE_QUBITS} qubits")
        if ordering is not None:
            state = ordering.apply_to_state(state)
        self.n = state.n
        self.tables = prefix_tables(pauli_distribution(state).probs)

    def prefix_mass(self, bits):
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        if len(bits) > 2 * self.n:
            raise ValueError("prefix longer than the register")
        idx = 0
        for b in bits:
            idx = (idx << 1) | b
        return float(self.tables[len(bits)][idx])


@dataclass
class SamplerDiagnostics:
    """What the walk did besides producing rows."""

    shots: int
    deterministic_steps: np.ndarray
    zero_mass_coins: int
    negative_coins: int
    min_conditional: float


def _branch_probability(a, b):
    """Probability of the 1-branch plus an event tag for diagnostics."""
    if a >= 0 and b >= 0:
        total = a + b
        if total == 0:
            return 0.5, "zero"
        return b / total, None
    if a < 0 and b < 0:
        return 0.5, "negative"
    return (1.0 if a < 0 else 0.0), "deterministic"


def adapted_ancestral_sample(source, shots, rng):
    """Draw bit rows (shots, 2n) from any prefix_mass source.

    Shots are advanced level by level; each level computes the branch
    probability once per distinct live prefix, so the number of source
    queries is bounded by twice the number of distinct prefixes rather
    than by 2n * shots.
    """
    n = source.n
    levels = 2 * n
    cur = np.zeros(shots, dtype=np.int64)
    det = np.zeros(levels, dtype=np.int64)
    zero_coins = 0
    negative_coins = 0
    min_conditional = math.inf
    for m in range(levels):
        uniq, inverse, counts = np.unique(cur, return_inverse=True, return_counts=True)
        p_one = np.empty(uniq.size)
        probabilistic = np.zeros(uniq.size, dtype=bool)
        for t, u in enumerate(uniq):
            bits = [(int(u) >> (m - 1 - i)) & 1 for i in range(m)]
            a = source.prefix_mass(bits + [0])
            b = source.prefix_mass(bits + [1])
            p_one[t], event = _branch_probability(a, b)
            if event == "deterministic":
                det[m] += counts[t]
            elif event == "zero":
                zero_coins += int(counts[t])
                probabilistic[t] = True
            elif event == "negative":
                negative_coins += int(counts[t])
                probabilistic[t] = True
            else:
                probabilistic[t] = True
        bit = (rng.random(shots) < p_one[inverse]).astype(np.int64)
        taken = np.where(bit == 1, p_one[inverse], 1.0 - p_one[inverse])
        live = probabilistic[inverse]
        if live.any():
            min_conditional = min(min_conditional, float(taken[live].min()))
        cur = (cur << 1) | bit
    shifts = levels - 1 - np.arange(levels)
    rows = ((cur[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    diag = SamplerDiagnostics(
        shots=shots,
        deterministic_steps=det,
        zero_mass_coins=zero_coins,
        negative_coins=negative_coins,
        min_conditional=min_conditional,
    )
    return rows, diag


def exact_pauli_sample(state, shots, rng, ordering=None):
    """Direct draws from the dense weight distribution; rows of bits."""
    if state.n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense sampling limited to {MAX_DENSE_QUBITS} qubits")
    if ordering is not None:
        state = ordering.apply_to_state(state)
    n = state.n
    cdf = np.cumsum(pauli_distribution(state).probs)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    shifts = 2 * n - 1 - np.arange(2 * n)
    return ((draws[:, None] >> shifts[None, :]) & 1).astype(np.uint8)


def difference_rows(codes_a, codes_b):
    """Bitwise XOR of two outcome-code arrays, returned as bit rows."""
    codes = np.bitwise_xor(codes_a, codes_b)
    n = codes.shape[1]
    out = np.empty((codes.shape[0], 2 * n), dtype=np.uint8)
    out[:, 0::2] = codes >> 1
    out[:, 1::2] = codes & 1
    return out


def bell_difference_sample(state, shots, rng, *, channel=None):
    """XOR of two independent Bell shots per row.

    For stabilizer states the result is distributed exactly as the
    weight distribution; in general it follows the XOR self-convolution
    of the Bell outcome distribution, which can differ.
    """
    data = bell_sample(state, 2 * shots, rng, channel=channel)
    return difference_rows(data.codes[0::2], data.codes[1::2])


@dataclass
class PathEntanglementReport:
    """Schmidt ranks along nested prefix cuts of a qubit ordering."""

    ranks: tuple
    log2_ranks: tuple
    peak: float
    peak_cut: int


def path_entanglement(state, ordering=None):
    """Rank profile over cuts 1..n-1 in the given qubit order."""
    if ordering is not None:
        state = ordering.apply_to_state(state)
    n = state.n
    if n < 2:
        return PathEntanglementReport(ranks=(), log2_ranks=(), peak=0.0, peak_cut=0)
    ranks = tuple(schmidt_rank(state, k) for k in range(1, n))
    logs = tuple(float(np.log2(r)) for r in ranks)
    peak = max(logs)
    return PathEntanglementReport(
        ranks=ranks, log2_ranks=logs, peak=peak, peak_cut=1 + logs.index(peak)
    )


def greedy_ordering_exact(state):
    """Order qubits so each prefix cut has the smallest reachable rank.

    At every step the qubit whose addition minimizes the Schmidt rank
    of the prefix is appended; ties go to the lowest qubit index.
    """
    n = state.n
    chosen: list[int] = []
    remaining = list(range(1, n + 1))
    while remaining:
        best_q = None
        best_rank = None
        for q in remaining:
            trial = chosen + [q]
            rest = [r for r in remaining if r != q]
            perm = QubitOrdering(tuple(trial + rest))
            moved = perm.apply_to_state(state)
            rank = schmidt_rank(moved, len(trial)) if len(trial) < n else 1
            if best_rank is None or rank < best_rank:
                best_rank = rank
                best_q = q
        chosen.append(best_q)
        remaining.remove(best_q)
    return QubitOrdering(tuple(chosen))


def greedy_ordering_from_dataset(dataset):
    """Order qubits by empirical prefix concentration of Bell codes.

    Each step appends the qubit that maximizes the collision mass
    sum_u phat(prefix codes u)^2; concentrated prefixes mean narrow
    branching for the adaptive sampler.  Ties go to the lowest index.
    """
    codes = dataset.codes.astype(np.int64)
    shots, n = codes.shape
    if shots == 0:
        raise ValueError("cannot order from an empty dataset")
    chosen: list[int] = []
    remaining = list(range(1, n + 1))
    ids = np.zeros(shots, dtype=np.int64)
    while remaining:
        best_q = None
        best_score = None
        best_ids = None
        for q in remaining:
            trial = ids * 4 + codes[:, q - 1]
            _, counts = np.unique(trial, return_counts=True)
            score = float(np.sum((counts / shots) ** 2))
            if best_score is None or score > best_score:
                best_score = score
                best_q = q
                best_ids = trial
        chosen.append(best_q)
        remaining.remove(best_q)
        ids = best_ids
    return QubitOrdering(tuple(chosen))


def induced_distribution(marginal_fn, n):
    """Exact output distribution of the adaptive walk for a given source.

    Replays the branching rules over the whole prefix tree, so the cost
    is 2^(2n) queries; intended for small-n analysis and tests.
    """
    mass = np.array([1.0])
    for m in range(2 * n):
        new = np.empty(mass.size * 2)
        for u in range(mass.size):
            bits = [(u >> (m - 1 - i)) & 1 for i in range(m)]
            a = marginal_fn(bits + [0])
            b = marginal_fn(bits + [1])
            p_one, _ = _branch_probability(a, b)
            new[2 * u] = mass[u] * (1.0 - p_one)
            new[2 * u + 1] = mass[u] * p_one
        mass = new
    return mass


def unsafe_mass(probs, gamma):
    """Mass outside the safe set: strings with some light letter prefix.

    A string is safe when every even prefix of k letters has mass at
    least gamma / 2^k.
    """
    probs = np.asarray(probs, dtype=float)
    tables = prefix_tables(probs)
    n = (len(tables) - 1) // 2
    safe = np.ones(probs.size, dtype=bool)
    for k in range(1, n + 1):
        level = tables[2 * k]
        ok = level >= gamma / 2**k
        safe &= np.repeat(ok, probs.size // level.size)
    return float(probs[~safe].sum())


def tv_error_bound(f_gamma, epsilon, n, gamma):
    """Output-distribution error bound from unsafe mass and marginal error."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return f_gamma + math.expm1(4.0 * epsilon * n / gamma)
