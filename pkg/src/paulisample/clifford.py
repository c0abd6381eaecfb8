"""Uniformly random Clifford unitaries and their dense application.

A Clifford (mod global phase) is stored as a pair: a binary symplectic
matrix giving the Pauli label action, and a Pauli layer.  Labels live in
{0,1}^(2n) with interleaved (v, w) bits and transform by right
multiplication, x -> x S.  The pairing is <x, y> = sum_i x_v_i y_w_i +
x_w_i y_v_i mod 2.

Sampling is exactly uniform: the image of the first basis vector is uniform
over the 4^n - 1 nonzero labels, its partner is uniform over the 2^(2n-1)
labels pairing to 1 with it, and the construction recurses on a
deterministically chosen symplectic basis of the complement.  Multiplying
the 2^(n^2) prod_j (4^j - 1) symplectic count by the 4^n Pauli layers gives
the full group order mod phase, and the map from choices to elements is a
bijection, so every element is equally likely.

The symplectic part is turned into an H/S/CX/CZ circuit by column
elimination; the circuit's label action is checked in the tests, both
symbolically and by dense conjugation at small n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gates import H_GATE, S_GATE, apply_gate_list, apply_pauli_bits
from .paulis import PureState


def symplectic_product(x, y):
    """Pairing of two interleaved label vectors, mod 2."""
    x = np.asarray(x, dtype=np.uint8)
    y = np.asarray(y, dtype=np.uint8)
    return int(np.sum(x[0::2] & y[1::2]) + np.sum(x[1::2] & y[0::2])) & 1


def _pair_swap(x):
    out = np.empty_like(x)
    out[0::2] = x[1::2]
    out[1::2] = x[0::2]
    return out


def _bits_of(value, width):
    return np.array([(value >> j) & 1 for j in range(width)], dtype=np.uint8)


def _independent_subset(vectors):
    """Greedy GF(2) row reduction; keeps the original vectors."""
    echelon = []
    pivots = []
    kept = []
    for v in vectors:
        r = v.copy()
        for e, p in zip(echelon, pivots):
            if r[p]:
                r ^= e
        nz = np.flatnonzero(r)
        if nz.size:
            echelon.append(r)
            pivots.append(int(nz[0]))
            kept.append(v)
    return kept


def _symplectic_gram_schmidt(vectors):
    """Arrange independent spanning vectors into pairs (a1, b1, a2, b2, ...)."""
    vecs = [v.copy() for v in vectors]
    out = []
    while vecs:
        a = vecs.pop(0)
        partner = None
        for j, wv in enumerate(vecs):
            if symplectic_product(a, wv) == 1:
                partner = j
                break
        assert partner is not None, "degenerate span in symplectic reduction"
        b = vecs.pop(partner)
        out.append(a)
        out.append(b)
        vecs = [(wv ^ (symplectic_product(wv, b) * a) ^ (symplectic_product(wv, a) * b)) for wv in vecs]
        vecs = [wv for wv in vecs if np.any(wv)]
    return out


def random_symplectic(n, rng):
    """Exactly uniform binary symplectic matrix, rows = basis vector images."""
    rows = []
    comp = np.eye(2 * n, dtype=np.uint8)
    for _ in range(n):
        k2 = comp.shape[0]
        # image of the pair's first vector: uniform nonzero combination
        c = _bits_of(int(rng.integers(1, 1 << k2)), k2)
        a = (c @ comp) % 2
        # partner: uniform over coordinate solutions of <c, d> = 1, where the
        # form in comp coordinates is the standard interleaved pairing
        u = _pair_swap(c)
        j0 = int(np.flatnonzero(u)[0])
        d = np.zeros(k2, dtype=np.uint8)
        d[j0] = 1
        tbits = _bits_of(int(rng.integers(0, 1 << (k2 - 1))), k2 - 1)
        ti = 0
        for i in range(k2):
            if i == j0:
                continue
            if tbits[ti]:
                d[i] ^= 1
                d[j0] ^= u[i]
            ti += 1
        b = (d @ comp) % 2
        rows.append(a.astype(np.uint8))
        rows.append(b.astype(np.uint8))
        if k2 == 2:
            break
        # deterministic symplectic basis of the complement, in coordinates
        cand = []
        for i in range(k2):
            v = np.zeros(k2, dtype=np.uint8)
            v[i] = 1
            v = v ^ (symplectic_product(v, d) * c) ^ (symplectic_product(v, c) * d)
            if np.any(v):
                cand.append(v)
        basis = _independent_subset(cand)
        assert len(basis) == k2 - 2
        paired = _symplectic_gram_schmidt(basis)
        comp = (np.array(paired, dtype=np.uint8) @ comp) % 2
    return np.array(rows, dtype=np.uint8)


def _col_action(mat, gate):
    """Apply a gate's label action to every row of mat, in place."""
    kind = gate[0]
    if kind == "h":
        q = gate[1]
        mat[:, [2 * q - 2, 2 * q - 1]] = mat[:, [2 * q - 1, 2 * q - 2]]
    elif kind == "s":
        q = gate[1]
        mat[:, 2 * q - 1] ^= mat[:, 2 * q - 2]
    elif kind == "cx":
        c, t = gate[1], gate[2]
        mat[:, 2 * t - 2] ^= mat[:, 2 * c - 2]
        mat[:, 2 * c - 1] ^= mat[:, 2 * t - 1]
    elif kind == "cz":
        aq, bq = gate[1], gate[2]
        mat[:, 2 * bq - 1] ^= mat[:, 2 * aq - 2]
        mat[:, 2 * aq - 1] ^= mat[:, 2 * bq - 2]
    else:
        raise ValueError(f"unknown gate {kind!r}")


def symplectic_of_circuit(gate_list, n):
    """Label action of a circuit, gates listed in application order."""
    mat = np.eye(2 * n, dtype=np.uint8)
    for gate in gate_list:
        _col_action(mat, gate)
    return mat


def circuit_from_symplectic(sym):
    """H/S/CX/CZ circuit whose label action equals the given matrix."""
    n = sym.shape[0] // 2
    mat = sym.copy().astype(np.uint8)
    ops = []

    def do(*gate):
        ops.append(gate)
        _col_action(mat, gate)

    def sqrt_x(q):
        # label action v_q ^= w_q
        do("h", q)
        do("s", q)
        do("h", q)

    for i in range(1, n + 1):
        rx = 2 * i - 2
        rz = 2 * i - 1
        # move some support of the X-image row onto v_i
        if mat[rx, 2 * i - 2] == 0:
            if mat[rx, 2 * i - 1] == 1:
                do("h", i)
            else:
                q = next(
                    q for q in range(i + 1, n + 1)
                    if mat[rx, 2 * q - 2] or mat[rx, 2 * q - 1]
                )
                if mat[rx, 2 * q - 2] == 0:
                    do("h", q)
                do("cx", i, q)
                do("cx", q, i)
                do("cx", i, q)
        # clear the rest of the X-image row; CX(i, q) feeds w_q back into
        # w_i, so the local S fix must come after the remote loop
        for q in range(i + 1, n + 1):
            if mat[rx, 2 * q - 2]:
                do("cx", i, q)
            if mat[rx, 2 * q - 1]:
                do("cz", i, q)
        if mat[rx, 2 * i - 1]:
            do("s", i)
        assert mat[rx, 2 * i - 2] == 1 and mat[rx].sum() == 1
        # the Z-image row now has w_i = 1 by preservation of the pairing;
        # clear its other columns with gates that fix the X-image row
        for q in range(i + 1, n + 1):
            while mat[rz, 2 * q - 2] or mat[rz, 2 * q - 1]:
                if mat[rz, 2 * q - 1]:
                    do("cx", q, i)
                else:
                    do("h", q)
        if mat[rz, 2 * i - 2]:
            sqrt_x(i)
        assert mat[rz, 2 * i - 1] == 1 and mat[rz].sum() == 1
    assert np.array_equal(mat, np.eye(2 * n, dtype=np.uint8))
    # ops reduced sym to the identity and every op is an involution on
    # labels, so the circuit applying them in reverse realizes sym
    return [tuple(g) for g in reversed(ops)]


@dataclass
class CliffordElement:
    """Symplectic label action plus a Pauli layer; applied right to left."""

    symplectic: np.ndarray
    pauli_bits: np.ndarray
    gates: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.gates is None:
            self.gates = circuit_from_symplectic(self.symplectic)

    @property
    def n(self):
        return self.symplectic.shape[0] // 2

    def transform_label(self, bits):
        """Image of a label under conjugation, sign not tracked."""
        return (np.asarray(bits, dtype=np.uint8) @ self.symplectic) % 2

    def apply_to_state(self, state: PureState):
        amps = apply_gate_list(state.amplitudes, self.gates)
        amps = apply_pauli_bits(amps, self.pauli_bits)
        return PureState(amps, check=False)


def identity_clifford(n):
    return CliffordElement(
        symplectic=np.eye(2 * n, dtype=np.uint8),
        pauli_bits=np.zeros(2 * n, dtype=np.uint8),
        gates=[],
    )


def random_clifford(n, rng):
    """Exactly uniform Clifford element mod global phase."""
    sym = random_symplectic(n, rng)
    pauli = rng.integers(0, 2, size=2 * n).astype(np.uint8)
    return CliffordElement(symplectic=sym, pauli_bits=pauli)


def phase_insensitive_equal(a, b, tol=1e-6):
    """Whether two single-qubit unitaries agree up to a global phase."""
    return abs(np.trace(a.conj().T @ b)) > 2.0 - tol


def single_qubit_cliffords():
    """The 24 one-qubit Cliffords as matrices, canonical phase, fixed order."""

    def canonical(mat):
        flat = mat.reshape(-1)
        k = int(np.flatnonzero(np.abs(flat) > 1e-9)[0])
        out = np.round(mat * (np.conj(flat[k]) / abs(flat[k])), 9)
        out[out == 0] = 0  # strip signed zeros for a stable sort key
        return out

    found = []
    frontier = [np.eye(2, dtype=complex)]
    while frontier:
        mat = frontier.pop(0)
        if any(phase_insensitive_equal(mat, m) for m in found):
            continue
        found.append(mat)
        frontier.append(H_GATE @ mat)
        frontier.append(S_GATE @ mat)
    assert len(found) == 24
    return sorted((canonical(m) for m in found), key=lambda m: m.tobytes())
