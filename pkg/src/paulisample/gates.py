"""Dense gate application on state vectors.

All helpers are functional: they take and return flat amplitude arrays with
qubit 1 in the most significant bit position.  Qubit arguments are 1-indexed
to match the rest of the package.
"""

from __future__ import annotations

import numpy as np

H_GATE = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
S_GATE = np.array([[1, 0], [0, 1j]], dtype=complex)


def _nq(amps):
    return amps.size.bit_length() - 1


def apply_1q(amps, gate, q):
    """Apply a 2x2 unitary to qubit q."""
    n = _nq(amps)
    assert 1 <= q <= n
    view = amps.reshape(1 << (q - 1), 2, -1)
    out = np.empty_like(view)
    out[:, 0, :] = gate[0, 0] * view[:, 0, :] + gate[0, 1] * view[:, 1, :]
    out[:, 1, :] = gate[1, 0] * view[:, 0, :] + gate[1, 1] * view[:, 1, :]
    return out.reshape(-1)


def apply_cx(amps, control, target):
    """Flip target where control is 1."""
    n = _nq(amps)
    assert control != target
    z = np.arange(amps.size, dtype=np.int64)
    cmask = 1 << (n - control)
    tmask = 1 << (n - target)
    src = z[(z & cmask) != 0]
    out = amps.copy()
    out[src ^ tmask] = amps[src]
    return out

def apply_cz(amps, a, b):
    """Phase -1 where both qubits are 1."""
    n = _nq(amps)
    assert a != b
    z = np.arange(amps.size, dtype=np.int64)
    amask = 1 << (n - a)
    bmask = 1 << (n - b)
    both = ((z & amask) != 0) & ((z & bmask) != 0)
    out = amps.copy()
    out[both] = -out[both]
    return out


def apply_pauli_masks(amps, vmask, wmask, phase_exponent):
    """Apply i^k X^v Z^w given integer bit masks over basis indices."""
    z = np.arange(amps.size, dtype=np.int64)
    signs = 1.0 - 2.0 * (np.bitwise_count(z & wmask) & 1)
    out = np.empty_like(amps)
    out[z ^ vmask] = signs * amps
    return (1j) ** (phase_exponent % 4) * out


def apply_pauli_bits(amps, bits):
    """Apply the Pauli string given as interleaved (v, w) bits."""
    bits = np.asarray(bits, dtype=np.uint8)
    v = bits[0::2]
    w = bits[1::2]
    vmask = 0
    wmask = 0
    for i in range(v.size):
        vmask = (vmask << 1) | int(v[i])
        wmask = (wmask << 1) | int(w[i])
    return apply_pauli_masks(amps, vmask, wmask, int(np.sum(v & w)))


def apply_gate_list(amps, gate_list):
    """Run a list of ("h"|"s", q) or ("cx"|"cz", a, b) instructions in order."""
    for instr in gate_list:
        kind = instr[0]
        if kind == "h":
            amps = apply_1q(amps, H_GATE, instr[1])
        elif kind == "s":
            amps = apply_1q(amps, S_GATE, instr[1])
        elif kind == "cx":
            amps = apply_cx(amps, instr[1], instr[2])
        elif kind == "cz":
            amps = apply_cz(amps, instr[1], instr[2])
        else:
            raise ValueError(f"unknown gate {kind!r}")
    return amps
