"""Two-copy Bell measurements and marginal estimation from the outcomes.

A Bell measurement on qubit pairs (i, n + i) of a two-copy register
projects onto the basis (P_x tensor 1)|EPR_n>, so each shot yields one
four-valued code per qubit: 0, 1, 2, 3 for the pair states usually
written Phi+, Phi-, Psi+, Psi-.  The code equals 2v + w for the Pauli
bits (v, w) of the basis label, matching the letter codes in `paulis`.

Outcome probabilities for input psi tensor phi are
|sum_u (-1)^(w.u) psi(u XOR v) phi(u)|^2 / 2^n, one Walsh-Hadamard
transform per shift v.  Note the first factor is NOT conjugated; for
real psi = phi the outcome distribution coincides with the Pauli
weight distribution of psi.

`MarginalEstimator` turns a dataset of such shots into unbiased
estimates of prefix marginals of the Pauli distribution.  Writing
M[c, y] for the per-qubit eigenvalue table and s[y] for the two-copy
overlap signs, the front product over a k-letter prefix times the
suffix sign product has expectation 2^k * purity * marginal, so
dividing the empirical mean by (2^k * purity estimate) recovers the
marginal.  Estimates are never clamped; sampling noise can take them
below zero and callers are expected to cope.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np

from .paulis import (
    MAX_DENSE_QUBITS,
    PauliString,
    PureState,
    QubitOrdering,
    _spread_table,
    _walsh_hadamard_last,
)


class DatasetTooSmallError(RuntimeError):
    """Raised when the purity estimate is not positive, so no marginal
    can be formed from this dataset."""


def eigenvalue_tables():
    """Per-qubit tables (M, s) driving the estimator.

    M[letter_code, outcome_code] is the eigenvalue of the letter's
    two-copy action on the Bell pair state; s[outcome_code] is the sign
    picked up by an unconstrained trailing qubit (-1 only on the
    antisymmetric pair state).
    """
    m = np.array(
        [
            [1, 1, 1, 1],
            [1, 1, -1, -1],
            [1, -1, 1, -1],
            [-1, 1, 1, -1],
        ],
        dtype=np.int8,
    )
    s = np.array([1, 1, 1, -1], dtype=np.int8)
    return m, s


def bell_probabilities(state: PureState, partner: PureState | None = None):
    """Dense outcome distribution over flat pair-code indices.

    partner defaults to a second copy of state.  Flat indexing matches
    PauliString.index(): qubit-major, code 2v + w per qubit.
    """
    psi = state.amplitudes
    phi = psi if partner is None else partner.amplitudes
    n = state.n
    if partner is not None and partner.n != n:
        raise ValueError("partner state acts on a different number of qubits")
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense outcome table limited to {MAX_DENSE_QUBITS} qubits")
    dim = 1 << n
    z = np.arange(dim)
    spread = _spread_table(n)
    flat = np.empty(dim * dim)
    block = max(1, (1 << 20) // dim)
    for start in range(0, dim, block):
        v = z[start : start + block]
        g = psi[v[:, None] ^ z[None, :]] * phi[None, :]
        q2 = np.abs(_walsh_hadamard_last(g)) ** 2 / dim
        idx = (spread[v] << 1)[:, None] | spread[None, :]
        flat[idx.ravel()] = q2.ravel()
    return flat


@dataclass
class BellDataset:
    """Shots from pairwise Bell measurements: one code 0..3 per qubit."""

    n: int
    codes: np.ndarray
    seed: int | None = None
    state_digest: str | None = None
    channel_text: str | None = None

    def __post_init__(self):
        self.codes = np.asarray(self.codes, dtype=np.uint8)
        if self.codes.ndim != 2 or self.codes.shape[1] != self.n:
            raise ValueError(f"codes must have shape (shots, {self.n})")
        if self.codes.size and self.codes.max() > 3:
            raise ValueError("codes must lie in 0..3")

    @property
    def shots(self):
        return self.codes.shape[0]

    def bit_rows(self):
        """Rows of interleaved bits (v1, w1, v2, ...), shape (shots, 2n)."""
        out = np.empty((self.shots, 2 * self.n), dtype=np.uint8)
        out[:, 0::2] = self.codes >> 1
        out[:, 1::2] = self.codes & 1
        return out

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("#bell-dataset v1\n")
            fh.write(f"#n={self.n}\n")
            fh.write(f"#shots={self.shots}\n")
            if self.seed is not None:
                fh.write(f"#seed={self.seed}\n")
            if self.state_digest is not None:
                fh.write(f"#state={self.state_digest}\n")
            if self.channel_text is not None:
                fh.write(f"#channel={self.channel_text}\n")
            for row in self.codes:
                fh.write("".join("0123"[c] for c in row))
                fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().rstrip("\n")
            if header != "#bell-dataset v1":
                raise ValueError(f"unrecognized dataset header {header!r}")
            meta = {}
            pos = fh.tell()
            line = fh.readline()
            while line.startswith("#"):
                key, _, value = line[1:].rstrip("\n").partition("=")
                meta[key] = value
                pos = fh.tell()
                line = fh.readline()
            fh.seek(pos)
            n = int(meta["n"])
            shots = int(meta["shots"])
            codes = np.empty((shots, n), dtype=np.uint8)
            for i in range(shots):
                row = fh.readline().strip()
                if len(row) != n:
                    raise ValueError(f"row {i} has length {len(row)}, expected {n}")
                codes[i] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) - ord("0")
        return cls(
            n=n,
            codes=codes,
            seed=int(meta["seed"]) if "seed" in meta else None,
            state_digest=meta.get("state"),
            channel_text=meta.get("channel"),
        )


def bell_sample(state, shots, rng, *, partner=None, channel=None, seed=None, state_digest=None):
    """Draw Bell-measurement shots on state tensor partner (default two copies).

    If a Pauli noise channel is given, each of the two copies passes
    through it independently per shot.  An error pair (a, b) shifts the
    outcome label by XOR with a and b, so noise is applied by drawing
    the error indices and XORing their flat labels into the draws.
    """
    n = state.n
    flat = bell_probabilities(state, partner)
    cdf = np.cumsum(flat)
    cdf[-1] = 1.0
    draws = np.searchsorted(cdf, rng.random(shots), side="right")
    channel_text = None
    if channel is not None:
        if channel.n != n:
            raise ValueError("channel acts on a different number of qubits")
        error_flats = np.array(
            [PauliString(bits).index() for bits in channel.error_bits], dtype=np.int64
        )
        edges = np.cumsum(channel.error_probs)
        for _copy in range(2):
            u = rng.random(shots)
            which = np.searchsorted(edges, u, side="right")
            hit = u < channel.total_rate
            if hit.any():
                masks = np.where(hit, error_flats[np.minimum(which, len(error_flats) - 1)], 0)
                draws ^= masks
        channel_text = ",".join(
            f"{label}:{rate:g}" for label, rate in zip(channel.labels, channel.error_probs)
        )
    shifts = 2 * (n - 1 - np.arange(n))
    codes = ((draws[:, None] >> shifts[None, :]) & 3).astype(np.uint8)
    return BellDataset(
        n=n, codes=codes, seed=seed, state_digest=state_digest, channel_text=channel_text
    )


@dataclass
class EstimatorStats:
    """Bookkeeping for cache behaviour; useful in tests and diagnostics."""

    front_hits: int = 0
    front_misses: int = 0
    front_evictions: int = 0


class MarginalEstimator:
    """Prefix-marginal estimates from one Bell dataset.

    The per-shot front products for a letter prefix are cached (bounded,
    least-recently-used) so that extending a prefix by one letter costs
    a single elementwise multiply.  Scalar estimates are cached without
    bound.  All public methods are safe to call from multiple threads.
    """

    def __init__(self, dataset: BellDataset, ordering: QubitOrdering | None = None,
                 cache_size: int = 256):
        if dataset.shots == 0:
            raise ValueError("cannot estimate from an empty dataset")
        if cache_size < 1:
            raise ValueError("cache_size must be positive")
        codes = dataset.codes
        self.n = dataset.n
        if ordering is not None:
            if len(ordering.perm) != self.n:
                raise ValueError("ordering length does not match dataset")
            codes = codes[:, [q - 1 for q in ordering.perm]]
        m, s = eigenvalue_tables()
        # eig[i, j, c] = M[c, code of shot i at position j]
        self._eig = m.T[codes]
        svals = s[codes]
        shots = codes.shape[0]
        suffix = np.ones((shots, self.n + 1), dtype=np.int8)
        suffix[:, : self.n] = np.cumprod(svals[:, ::-1], axis=1)[:, ::-1]
        self._suffix = suffix
        self._q0 = float(suffix[:, 0].mean(dtype=np.float64))
        self._cache_size = cache_size
        self._fronts: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._scalars: dict[tuple, float] = {}
        self._lock = threading.Lock()
        self.stats = EstimatorStats()

    def purity(self):
        """Mean suffix sign product; estimates the squared state overlap."""
        return self._q0

    def _front(self, letters):
        if not letters:
            return None
        cached = self._fronts.get(letters)
        if cached is not None:
            self._fronts.move_to_end(letters)
            self.stats.front_hits += 1
            return cached
        self.stats.front_misses += 1
        parent = self._front(letters[:-1])
        col = self._eig[:, len(letters) - 1, letters[-1]]
        front = col if parent is None else parent * col
        self._fronts[letters] = front
        if len(self._fronts) > self._cache_size:
            self._fronts.popitem(last=False)
            self.stats.front_evictions += 1
        return front

    def _front_mean(self, letters):
        value = self._scalars.get(letters)
        if value is not None:
            return value
        front = self._front(letters)
        tail = self._suffix[:, len(letters)]
        prod = tail if front is None else front * tail
        value = float(prod.mean(dtype=np.float64))
        self._scalars[letters] = value
        return value

    def estimate_letter_prefix(self, letters):
        """Marginal of the first len(letters) letters, codes 0..3 each."""
        letters = tuple(int(c) for c in letters)
        if len(letters) > self.n:
            raise ValueError("prefix longer than the register")
        if any(c < 0 or c > 3 for c in letters):
            raise ValueError("letter codes must lie in 0..3")
        if not letters:
            return 1.0
        with self._lock:
            if self._q0 <= 0:
                raise DatasetTooSmallError(
                    f"purity estimate {self._q0} is not positive; collect more shots"
                )
            scale = self._q0 * (1 << len(letters))
            return self._front_mean(letters) / scale

    def estimate_marginal(self, bits):
        """Marginal of a bit prefix (v1, w1, v2, ...), any length up to 2n.

        Odd-length prefixes are the exact sum of their two even-length
        extensions, mirroring the dense marginal contract.
        """
        bits = tuple(int(b) for b in bits)
        if any(b not in (0, 1) for b in bits):
            raise ValueError("bits must be 0 or 1")
        if len(bits) > 2 * self.n:
            raise ValueError("prefix longer than the register")
        letters = tuple(2 * bits[i] + bits[i + 1] for i in range(0, len(bits) - 1, 2))
        if len(bits) % 2 == 0:
            return self.estimate_letter_prefix(letters)
        head = letters + (2 * bits[-1],)
        low = self.estimate_letter_prefix(head)
        high = self.estimate_letter_prefix(head[:-1] + (head[-1] | 1,))
        return low + high

    def prefix_mass(self, bits):
        """Alias so the estimator plugs into the adaptive sampler."""
        return self.estimate_marginal(bits)
