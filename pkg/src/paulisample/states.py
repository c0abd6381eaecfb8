"""Reproducible construction of the benchmark states and Pauli noise.

Every builder is driven by a StateRecipe carrying a kind, a qubit count, a
seed, and kind-specific params.  The same recipe always produces the same
amplitudes: randomness flows through numpy SeedSequence streams derived
from the recipe seed and a fixed purpose tag, so adding draws in one
builder never shifts another.
"""

from __future__ import annotations

import hashlib
import zlib
from dataclasses import dataclass, field

import numpy as np

from .clifford import identity_clifford, random_clifford, single_qubit_cliffords
from .gates import apply_1q, apply_cz, apply_pauli_bits
from .paulis import PauliString, PureState

RECIPE_KINDS = (
    "product",
    "t_doped",
    "subset_phase",
    "tilted",
    "bell_pairs",
    "cluster2d",
    "phi_tau",
    "local_clifford_rotated",
)

T_STATE = np.array([1.0, np.exp(1j * np.pi / 4)]) / np.sqrt(2)

_FACTORS = {
    "zero": np.array([1.0, 0.0], dtype=complex),
    "one": np.array([0.0, 1.0], dtype=complex),
    "plus": np.array([1.0, 1.0], dtype=complex) / np.sqrt(2),
    "minus": np.array([1.0, -1.0], dtype=complex) / np.sqrt(2),
    "t": T_STATE,
    "i": np.array([1.0, 1j], dtype=complex) / np.sqrt(2),
}


def derived_rng(seed, *purpose):
    """Independent generator for (seed, purpose path)."""
    key = tuple(zlib.crc32(str(p).encode()) for p in purpose)
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=key))


@dataclass
class StateRecipe:
    """Serializable description of a state; same recipe, same amplitudes."""

    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in RECIPE_KINDS:
            raise ValueError(f"unknown recipe kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("n must be positive")

    def digest(self):
        """Short stable hash used in dataset headers."""
        items = ",".join(f"{k}={self.params[k]!r}" for k in sorted(self.params))
        text = f"{self.kind}|{self.n}|{self.seed}|{items}"
        return hashlib.sha256(text.encode()).hexdigest()[:12]


def tensor_product(factors):
    amps = np.array([1.0 + 0j])
    for f in factors:
        amps = np.kron(amps, f)
    return amps


def make_product(n, factors=None):
    """Tensor product of named or explicit single-qubit states."""
    if factors is None:
        factors = ["zero"] * n
    if len(factors) != n:
        raise ValueError("need one factor per qubit")
    vecs = []
    for f in factors:
        if isinstance(f, str):
            try:
                vecs.append(_FACTORS[f.lower()])
            except KeyError as exc:
                raise ValueError(f"unknown factor {f!r}") from exc
        else:
            v = np.asarray(f, dtype=complex)
            vecs.append(v / np.linalg.norm(v))
    return PureState(tensor_product(vecs))


def make_t_doped(n, t, rng, force_identity=False):
    """A Clifford applied to t phase-rotated qubits padded with zeros.

    With force_identity the Clifford is skipped, which pins the state to
    the bare t-fold phase-rotated product for exact-value tests.
    """
    if not 0 <= t <= n:
        raise ValueError(f"need 0 <= t <= n, got t={t}")
    amps = tensor_product([T_STATE] * t + [_FACTORS["zero"]] * (n - t))
    state = PureState(amps)
    if force_identity:
        return state
    return random_clifford(n, rng).apply_to_state(state)


def make_subset_phase(n, subset_size, rng, zero_phases=False):
    """Equal-weight real state on a uniformly chosen basis subset.

    Signs are fair coins unless zero_phases pins them all to +1.
    """
    dim = 1 << n
    if not 1 <= subset_size <= dim:
        raise ValueError(f"subset size must be in 1..{dim}")
    support = rng.choice(dim, size=subset_size, replace=False)
    signs = np.ones(subset_size)
    if not zero_phases:
        signs = 1.0 - 2.0 * rng.integers(0, 2, size=subset_size)
    amps = np.zeros(dim, dtype=complex)
    amps[support] = signs / np.sqrt(subset_size)
    return PureState(amps)


def make_tilted(n, epsilon, theta, inner_amplitudes):
    """sqrt(1-eps) e^(i theta) |0...0> plus sqrt(eps) |1>|inner>."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    inner = np.asarray(inner_amplitudes, dtype=complex)
    if inner.size != 1 << (n - 1):
        raise ValueError("inner state must have n-1 qubits")
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = np.sqrt(1.0 - epsilon) * np.exp(1j * theta)
    amps[1 << (n - 1):] = np.sqrt(epsilon) * inner
    return PureState(amps)


def make_bell_pairs(n):
    """Maximally entangled pairs between qubits i and n/2 + i."""
    if n % 2:
        raise ValueError("pair chain needs an even qubit count")
    half = n // 2
    amps = np.zeros(1 << n, dtype=complex)
    b = np.arange(1 << half)
    amps[(b << half) | b] = 2.0 ** (-half / 2.0)
    return PureState(amps)


def make_cluster2d(side):
    """Graph state on a side x side grid: plus states, CZ on every edge."""
    n = side * side
    amps = np.full(1 << n, 2.0 ** (-n / 2.0), dtype=complex)
    for r in range(side):
        for c in range(side):
            q = r * side + c + 1
            if c + 1 < side:
                amps = apply_cz(amps, q, q + 1)
            if r + 1 < side:
                amps = apply_cz(amps, q, q + side)
    return PureState(amps)


def make_phi_tau(n, tau):
    """Spiked flat state: sqrt(tau)|0..0> + sqrt(1-tau)|+..+>, normalized.

    Requires 0 < tau <= 1/2 and 2 sqrt(tau(1-tau)/2^n) < tau so that the
    weight classes stay strictly ordered.
    """
    if not 0.0 < tau <= 0.5:
        raise ValueError(f"tau must lie in (0, 1/2], got {tau}")
    m = np.sqrt(tau * (1.0 - tau) / (1 << n))
    if not 2.0 * m < tau:
        raise ValueError(f"need 2 sqrt(tau(1-tau)/2^n) < tau, got {2 * m} >= {tau}")
    amps = np.full(1 << n, np.sqrt((1.0 - tau) / (1 << n)), dtype=complex)
    amps[0] += np.sqrt(tau)
    return PureState(amps / np.sqrt(1.0 + 2.0 * m))


def make_local_clifford_rotated(state, rng):
    """Independent uniform single-qubit Cliffords, one per qubit."""
    table = single_qubit_cliffords()
    amps = state.amplitudes
    picks = rng.integers(0, len(table), size=state.n)
    for q, k in enumerate(picks, start=1):
        amps = apply_1q(amps, table[k], q)
    return PureState(amps, check=False)


def build_state(recipe: StateRecipe):
    """Materialize a recipe into amplitudes."""
    p = recipe.params
    n = recipe.n
    kind = recipe.kind
    if kind == "product":
        return make_product(n, p.get("factors"))
    if kind == "t_doped":
        rng = derived_rng(recipe.seed, "t_doped", "clifford")
        return make_t_doped(n, p["t"], rng, force_identity=p.get("force_identity", False))
    if kind == "subset_phase":
        rng = derived_rng(recipe.seed, "subset_phase")
        return make_subset_phase(
            n, p.get("subset_size", 1 << (n - 1)), rng, zero_phases=p.get("zero_phases", False)
        )
    if kind == "tilted":
        if "inner" in p:
            inner = build_state(StateRecipe(**p["inner"])).amplitudes
        else:
            rng = derived_rng(recipe.seed, "tilted", "inner")
            raw = rng.normal(size=1 << (n - 1)) + 1j * rng.normal(size=1 << (n - 1))
            inner = raw / np.linalg.norm(raw)
        return make_tilted(n, p["epsilon"], p.get("theta", 0.0), inner)
    if kind == "bell_pairs":
        return make_bell_pairs(n)
    if kind == "cluster2d":
        side = p["side"]
        if side * side != n:
            raise ValueError(f"cluster2d needs n = side^2, got n={n}, side={side}")
        return make_cluster2d(side)
    if kind == "phi_tau":
        return make_phi_tau(n, p["tau"])
    if kind == "local_clifford_rotated":
        base = build_state(StateRecipe(**p["base"]))
        rng = derived_rng(recipe.seed, "local_rotation")
        return make_local_clifford_rotated(base, rng)
    raise ValueError(f"unknown recipe kind {kind!r}")


class PauliNoiseChannel:
    """Probabilistic Pauli errors: identity with probability 1 - sum(rates).

    rates maps non-identity Pauli labels (strings like "XI") to error
    probabilities.  attenuation(x) is the factor by which the channel
    scales the expectation of P_x.
    """

    def __init__(self, n, rates):
        self.n = n
        self.labels = []
        self.error_bits = []
        probs = []
        for label, rate in sorted(rates.items()):
            if rate < 0:
                raise ValueError(f"negative rate for {label}")
            ps = PauliString.from_label(label)
            if ps.n != n:
                raise ValueError(f"label {label} has wrong length for n={n}")
            if ps.weight() == 0:
                raise ValueError("identity carries the remaining probability; do not list it")
            if rate > 0:
                self.labels.append(label)
                self.error_bits.append(ps.bits)
                probs.append(float(rate))
        self.error_probs = np.array(probs)
        self.total_rate = float(self.error_probs.sum())
        if self.total_rate > 1.0 + 1e-12:
            raise ValueError(f"rates sum to {self.total_rate} > 1")

    def attenuation(self, pauli: PauliString):
        """(1 - xi) + sum_y xi_y (-1)^<x, y>, the expectation transfer factor."""
        c = 1.0 - self.total_rate
        for bits, q in zip(self.error_bits, self.error_probs):
            v_x, w_x = pauli.v, pauli.w
            v_y, w_y = bits[0::2], bits[1::2]
            parity = int(np.sum(v_x & w_y) + np.sum(w_x & v_y)) & 1
            c += q * (-1.0 if parity else 1.0)
        return c

    def draw_error(self, rng):
        """Index into labels, or None for the identity branch."""
        u = rng.random()
        if u >= self.total_rate:
            return None
        return int(np.searchsorted(np.cumsum(self.error_probs), u, side="right"))

    def apply_error(self, state: PureState, which):
        if which is None:
            return state
        amps = apply_pauli_bits(state.amplitudes, self.error_bits[which])
        return PureState(amps, check=False)


def sample_noisy_copy(state, channel, rng):
    """One draw through the channel; returns (state, applied label or None)."""
    which = channel.draw_error(rng)
    out = channel.apply_error(state, which)
    label = None if which is None else channel.labels[which]
    return out, label
