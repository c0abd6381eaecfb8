"""Pauli strings on n qubits and the outcome distributions they induce.

Conventions used across the package:

* A Pauli string is a bit vector x = (v1, w1, ..., vn, wn) in {0,1}^(2n).
  Site i carries i^(vi wi) X^vi Z^wi, so the two-bit code (vi, wi) reads
  00 -> I, 01 -> Z, 10 -> X, 11 -> Y.  The full operator is
  P_x = i^(v.w) X^v Z^w with v.w the integer inner product; the phase makes
  every P_x Hermitian with square one.
* Flat index of a string: qubit 1 is the most significant base-4 digit,
  digit_i = 2 vi + wi.  Equivalently the 2n bits read MSB-first as an
  integer.
* Computational basis: qubit 1 is the most significant bit of the index.
* For a normalized pure state, weight(x) = <psi|P_x|psi>^2 / 2^n is a
  probability distribution over the 4^n strings.

Dense tables of size 4^n are the workhorse here; they are capped at
n = MAX_DENSE_QUBITS.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_DENSE_QUBITS = 12

# Probabilities below this are treated as zero when counting support.
SUPPORT_TOL = 1e-10

# Relative singular value cutoff for Schmidt ranks.
RANK_TOL = 1e-10

# Per-site X^v Z^w without the Y phase; pauli_matrix applies i^(v.w) once
# globally, which turns the (1,1) entry into Y = [[0, -i], [i, 0]].
_XZ_1Q = {
    (0, 0): np.eye(2, dtype=complex),
    (0, 1): np.array([[1, 0], [0, -1]], dtype=complex),
    (1, 0): np.array([[0, 1], [1, 0]], dtype=complex),
    (1, 1): np.array([[0, -1], [1, 0]], dtype=complex),
}

CODE_LETTERS = "IZXY"
_LETTER_CODES = {c: k for k, c in enumerate(CODE_LETTERS)}


def _require_dense(n):
    if not 1 <= n <= MAX_DENSE_QUBITS:
        raise ValueError(f"dense tables support 1..{MAX_DENSE_QUBITS} qubits, got n={n}")


class PauliString:
    """An n-qubit Pauli string stored as 2n interleaved (v, w) bits."""

    __slots__ = ("bits",)

    def __init__(self, bits):
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1 or arr.size == 0 or arr.size % 2 != 0:
            raise ValueError("bits must be a flat array of even positive length")
        if np.any(arr > 1):
            raise ValueError("bits must be 0/1")
        self.bits = arr

    @property
    def n(self):
        return self.bits.size // 2

    @property
    def v(self):
        return self.bits[0::2]

    @property
    def w(self):
        return self.bits[1::2]

    @classmethod
    def from_label(cls, label):
        """Build from a string like "XIZY", qubit 1 first."""
        try:
            codes = [_LETTER_CODES[c] for c in label.upper()]
        except KeyError as exc:
            raise ValueError(f"unknown Pauli letter in {label!r}") from exc
        if not codes:
            raise ValueError("empty label")
        bits = []
        for c in codes:
            bits.extend(divmod(c, 2))
        return cls(bits)

    @classmethod
    def from_index(cls, index, n):
        """Inverse of .index() for a given qubit count."""
        if not 0 <= index < 4**n:
            raise ValueError(f"index {index} out of range for n={n}")
        bits = [(index >> (2 * n - 1 - j)) & 1 for j in range(2 * n)]
        return cls(bits)

    def index(self):
        out = 0
        for b in self.bits:
            out = (out << 1) | int(b)
        return out

    def label(self):
        return "".join(CODE_LETTERS[2 * int(a) + int(b)] for a, b in zip(self.v, self.w))

    def y_count(self):
        """Number of sites carrying Y."""
        return int(np.sum(self.v & self.w))

    def phase_exponent(self):
        """k such that P_x = i^k X^v Z^w."""
        return self.y_count() % 4

    def weight(self):
        """Number of non-identity sites."""
        return int(np.sum(self.v | self.w))

    def __eq__(self, other):
        return isinstance(other, PauliString) and np.array_equal(self.bits, other.bits)

    def __hash__(self):
        return hash(self.bits.tobytes())

    def __repr__(self):
        return f"PauliString({self.label()!r})"


def transpose_sign(pauli: PauliString):
    """Sign s with P^T = s P; -1 exactly when the Y count is odd."""
    return -1 if pauli.y_count() % 2 else 1


class PureState:
    """A normalized pure state as a dense complex vector, qubit 1 = MSB."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, check=True):
        amps = np.asarray(amplitudes, dtype=complex)
        if amps.ndim != 1 or amps.size == 0 or amps.size & (amps.size - 1):
            raise ValueError("amplitudes must be a flat vector of length 2^n")
        if check:
            norm = np.linalg.norm(amps)
            if abs(norm - 1.0) > 1e-10:
                raise ValueError(f"state not normalized: |norm - 1| = {abs(norm - 1.0):.3e}")
        self.amplitudes = amps

    @property
    def n(self):
        return self.amplitudes.size.bit_length() - 1

    def __repr__(self):
        return f"PureState(n={self.n})"


class QubitOrdering:
    """A bijection of qubit positions.

    Position j of the reordered register holds original qubit perm[j-1]
    (1-indexed).  The identity ordering leaves everything in place.
    """

    __slots__ = ("perm",)

    def __init__(self, perm):
        p = tuple(int(q) for q in perm)
        if sorted(p) != list(range(1, len(p) + 1)):
            raise ValueError(f"not a permutation of 1..{len(p)}: {p}")
        self.perm = p

    @classmethod
    def identity(cls, n):
        return cls(range(1, n + 1))

    @property
    def n(self):
        return len(self.perm)

    def apply_to_state(self, state: PureState):
        """Reorder qubits so position j carries original qubit perm[j-1]."""
        n = state.n
        if n != self.n:
            raise ValueError("ordering size does not match state")
        if self.perm == tuple(range(1, n + 1)):
            return state
        axes = [q - 1 for q in self.perm]
        amps = state.amplitudes.reshape((2,) * n).transpose(axes).reshape(-1)
        return PureState(np.ascontiguousarray(amps), check=False)

    def restore_labels(self, rows):
        """Map sample rows taken in this ordering back to original positions.

        rows has shape (N, 2n) with interleaved (v, w) bits per position.
        """
        rows = np.asarray(rows)
        out = np.empty_like(rows)
        for j, q in enumerate(self.perm):
            out[:, 2 * (q - 1)] = rows[:, 2 * j]
            out[:, 2 * (q - 1) + 1] = rows[:, 2 * j + 1]
        return out

    def __repr__(self):
        return f"QubitOrdering{self.perm}"


@dataclass
class PauliDistribution:
    """Dense outcome distribution over the 4^n Pauli strings.

    probs[k] is the weight of the string with flat index k.  alphas holds the
    signed expectations tr(rho P_x); purity is tr(rho^2) (1.0 for the pure
    builders here).
    """

    n: int
    probs: np.ndarray
    alphas: np.ndarray = None
    purity: float = 1.0

    def __post_init__(self):
        _require_dense(self.n)
        self.probs = np.asarray(self.probs, dtype=float)
        if self.probs.shape != (4**self.n,):
            raise ValueError("probs must have shape (4^n,)")
        total = float(self.probs.sum())
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, not 1")
        if self.alphas is not None:
            self.alphas = np.asarray(self.alphas, dtype=float)
            if self.alphas.shape != self.probs.shape:
                raise ValueError("alphas must match probs in shape")

    def support_size(self):
        return int(np.count_nonzero(self.probs > SUPPORT_TOL))


def pauli_matrix(pauli: PauliString):
    """Dense 2^n x 2^n matrix of P_x, phase included."""
    _require_dense(pauli.n)
    out = np.array([[1.0 + 0j]])
    for a, b in zip(pauli.v, pauli.w):
        out = np.kron(out, _XZ_1Q[int(a), int(b)])
    return (1j) ** pauli.phase_exponent() * out


def _masks(pauli: PauliString):
    n = pauli.n
    vmask = 0
    wmask = 0
    for i in range(n):
        vmask = (vmask << 1) | int(pauli.v[i])
        wmask = (wmask << 1) | int(pauli.w[i])
    return vmask, wmask


def expectation(state: PureState, pauli: PauliString):
    """<psi|P_x|psi> by bit action, no matrices.

    X^v Z^w |z> = (-1)^(w.z) |z XOR v>, so the sum runs over basis indices
    with an XOR permutation and a parity sign.
    """
    if pauli.n != state.n:
        raise ValueError("qubit counts differ")
    vmask, wmask = _masks(pauli)
    amps = state.amplitudes
    z = np.arange(amps.size, dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(z & wmask) & 1)
    val = np.sum(np.conj(amps[z ^ vmask]) * signs * amps)
    val = (1j) ** pauli.phase_exponent() * val
    assert abs(val.imag) < 1e-9
    return float(val.real)


def _walsh_hadamard_last(arr):
    """Transform b[w] = sum_z (-1)^(w.z) a[z] along the last axis."""
    m = arr.shape[-1].bit_length() - 1
    a = arr.reshape(arr.shape[:-1] + (2,) * m)
    for ax in range(-m, 0):
        plus = a.take(0, axis=ax) + a.take(1, axis=ax)
        minus = a.take(0, axis=ax) - a.take(1, axis=ax)
        a = np.stack([plus, minus], axis=ax)
    return a.reshape(arr.shape)


def _spread_table(n):
    """spread[x] has bit j of x at position 2j (Morton half-interleave)."""
    x = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(x)
    for j in range(n):
        out |= ((x >> j) & 1) << (2 * j)
    return out


def pauli_distribution(state: PureState):
    """Full dense distribution with signed expectations for a pure state.

    Column w of the Walsh-Hadamard transform of g_v(z) = conj(psi(z XOR v))
    psi(z) is sum_z (-1)^(w.z) g_v(z), which is the expectation of X^v Z^w;
    multiplying by i^(v.w) restores the Hermitian phase.
    """
    n = state.n
    _require_dense(n)
    psi = state.amplitudes
    dim = psi.size
    z = np.arange(dim, dtype=np.int64)
    g = np.conj(psi[z[:, None] ^ z[None, :]]) * psi[None, :]
    h = _walsh_hadamard_last(g)

    ycount = np.bitwise_count(z[:, None] & z[None, :]).astype(np.uint8) & 3
    re, im = h.real, h.imag
    alpha2d = np.where(
        ycount == 0, re, np.where(ycount == 1, -im, np.where(ycount == 2, -re, im))
    )

    spread = _spread_table(n)
    idx = ((spread << 1)[:, None] | spread[None, :]).ravel()
    alphas = np.empty(4**n)
    alphas[idx] = alpha2d.ravel()
    probs = alphas * alphas / dim
    return PauliDistribution(n=n, probs=probs, alphas=alphas)


def reduced_density(state: PureState, k):
    """Density matrix of the first k qubits."""
    if not 0 < k <= state.n:
        raise ValueError(f"bad cut k={k} for n={state.n}")
    block = state.amplitudes.reshape(1 << k, -1)
    return block @ block.conj().T


def _even_marginal_from_rho(rho, bits):
    """tr(rho_A P_A rho_A P_A) / 2^k for a complete k-qubit prefix."""
    k = len(bits) // 2
    pa = PauliString(bits)
    vmask, wmask = _masks(pa)
    dim = 1 << k
    z = np.arange(dim, dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(z & wmask) & 1)
    perm = z ^ vmask
    # (P rho P)[z, z'] = (-1)^(w.(z XOR z')) rho[z XOR v, z' XOR v]; the
    # i^(v.w) phases cancel since P appears twice.
    prp = (signs[:, None] * signs[None, :]) * rho[np.ix_(perm, perm)]
    val = np.einsum("ij,ji->", rho, prp)
    assert abs(val.imag) < 1e-9
    return float(val.real) / dim


def exact_marginal(state: PureState, prefix_bits, ordering: QubitOrdering = None):
    """Probability that a sampled string starts with the given bits.

    prefix_bits lists (v1, w1, v2, w2, ...) truncated anywhere; an odd prefix
    is the sum of its two one-bit extensions.  With an ordering, the prefix
    refers to the reordered register.
    """
    if ordering is not None:
        state = ordering.apply_to_state(state)
    bits = [int(b) for b in prefix_bits]
    if any(b not in (0, 1) for b in bits):
        raise ValueError("prefix bits must be 0/1")
    if len(bits) > 2 * state.n:
        raise ValueError("prefix longer than 2n bits")
    if not bits:
        return 1.0
    if len(bits) % 2 == 1:
        return exact_marginal(state, bits + [0]) + exact_marginal(state, bits + [1])
    rho = reduced_density(state, len(bits) // 2)
    return _even_marginal_from_rho(rho, bits)


def schmidt_rank(state: PureState, k, ordering: QubitOrdering = None):
    """Schmidt rank across the cut first k qubits vs the rest."""
    if ordering is not None:
        state = ordering.apply_to_state(state)
    if not 0 < k < state.n:
        raise ValueError(f"cut must satisfy 0 < k < n, got k={k}")
    sv = np.linalg.svd(state.amplitudes.reshape(1 << k, -1), compute_uv=False)
    return int(np.count_nonzero(sv > RANK_TOL * sv[0]))


def renyi_entropy(probs, alpha):
    """Renyi entropy in bits; alpha = 0 counts support, alpha = 1 is Shannon."""
    if alpha < 0:
        raise ValueError(f"order must be nonnegative, got {alpha}")
    p = np.asarray(probs, dtype=float)
    p = p[p > SUPPORT_TOL]
    if alpha == 0:
        return float(np.log2(p.size))
    if alpha == 1:
        return float(-np.sum(p * np.log2(p)))
    return float(np.log2(np.sum(p**alpha)) / (1.0 - alpha))


@dataclass
class EntropyReport:
    """Entropies of a state's Pauli distribution plus per-cut Schmidt data.

    magic[a] = H_a(probs) - n; it vanishes exactly on stabilizer states and
    is additive under tensor products.  schmidt_log2[k-1] is log2 of the
    Schmidt rank across the cut after qubit k.
    """

    n: int
    renyi: dict
    magic: dict
    support_size: int
    schmidt_ranks: tuple
    schmidt_log2: tuple


def entropy_report(state: PureState, alphas=(0, 1, 2)):
    dist = pauli_distribution(state)
    renyi = {a: renyi_entropy(dist.probs, a) for a in alphas}
    magic = {a: h - state.n for a, h in renyi.items()}
    if state.n > 1:
        ranks = tuple(schmidt_rank(state, k) for k in range(1, state.n))
    else:
        ranks = ()
    return EntropyReport(
        n=state.n,
        renyi=renyi,
        magic=magic,
        support_size=dist.support_size(),
        schmidt_ranks=ranks,
        schmidt_log2=tuple(float(np.log2(r)) for r in ranks),
    )


def weight_cdf(dist: PauliDistribution, tau):
    """Total probability of strings whose squared expectation is below tau.

    Strictly below: outcomes with alpha^2 == tau are excluded.
    """
    if tau <= 0:
        raise ValueError(f"threshold must be positive, got {tau}")
    if dist.alphas is None:
        raise ValueError("distribution carries no signed expectations")
    return float(np.sum(dist.probs[dist.alphas**2 < tau]))


def imaginarity(state: PureState):
    """1 - |<psi|psi*>|^2; zero iff some global phase makes the state real."""
    s = np.sum(state.amplitudes**2)
    return float(1.0 - abs(s) ** 2)
