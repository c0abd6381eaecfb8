"""Two-party overlap estimation over a classical channel.

Alice holds one pure state, Bob another; neither ever touches the
peer's amplitudes.  Everything that crosses between them travels
through an append-only `ClassicalChannel`, so a transcript fully
determines the final estimate.

Symmetric protocol: a fair coin decides, per sample, which party's
sampler produces the next Pauli label, realizing the even mixture of
the two weight distributions.  Both parties estimate their own signed
expectation for every label, and Alice averages the agreement score
of the estimate pairs.  The average estimates (1 + overlap)/2.

Asymmetric protocol: Alice alone samples labels and sends her
expectation estimates; Bob divides his estimates by Alice's after
flooring their magnitude, and Alice averages the ratios, estimating
the overlap directly at the price of a larger variance.

`active_party` exposes which party's private operation is currently
running; tests use it to verify that amplitudes are only read by
their owner.
"""

from __future__ import annotations

import hashlib
import math
import threading
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .bell import MarginalEstimator, bell_sample
from .paulis import PauliString, PureState, expectation, transpose_sign
from .sampler import adapted_ancestral_sample, exact_pauli_sample

SAMPLER_MODES = ("exact-oracle", "ancestral-from-bell", "bell-direct")

# per-thread so that concurrent protocol runs cannot pop each other's frames
_ACTIVE = threading.local()


def _frames():
    try:
        return _ACTIVE.frames
    except AttributeError:
        _ACTIVE.frames = []
        return _ACTIVE.frames


def active_party():
    """Name of the party running a private operation right now, or None."""
    frames = _frames()
    return frames[-1] if frames else None


@contextmanager
def _acting(name):
    frames = _frames()
    frames.append(name)
    try:
        yield
    finally:
        frames.pop()


def agreement_score(u, v):
    """(u + v)^2 / (2 (u^2 + v^2)): 1 for equal values, 0 for opposite.

    Symmetric and bounded in [0, 1]; undefined at the origin.
    """
    denom = u * u + v * v
    if denom == 0:
        raise ValueError("agreement score undefined at (0, 0)")
    return 0.5 * (u + v) ** 2 / denom


def floor_magnitude(z, lam):
    """z pushed away from zero: z if |z| > lam else its sign times lam.

    The sign of exactly zero counts as positive, so the result is
    never smaller than lam in magnitude.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if abs(z) > lam:
        return float(z)
    return lam if z >= 0 else -lam


def median_of_means(values, groups):
    """Median of group means; robust drop-in for the plain mean."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValueError("no values to aggregate")
    groups = max(1, min(int(groups), values.size))
    chunks = np.array_split(values, groups)
    return float(np.median([chunk.mean() for chunk in chunks]))


def _aggregate(values, aggregator, mom_groups):
    if aggregator == "mean":
        return float(np.mean(values))
    if aggregator == "median-of-means":
        return median_of_means(values, mom_groups)
    raise ValueError(f"unknown aggregator {aggregator!r}")


@dataclass(frozen=True)
class Message:
    sender: str
    topic: str
    payload: tuple


class ClassicalChannel:
    """Append-only message log; the only legal cross-party data path."""

    def __init__(self):
        self._log: list[Message] = []

    def post(self, sender, topic, payload):
        self._log.append(Message(sender=sender, topic=topic, payload=tuple(payload)))

    def latest(self, topic):
        for msg in reversed(self._log):
            if msg.topic == topic:
                return msg.payload
        raise KeyError(f"no message with topic {topic!r}")

    def transcript(self):
        return tuple(self._log)


def transcript_lines(transcript):
    """Line-per-message rendering: sender, topic, payload digest."""
    lines = []
    for msg in transcript:
        digest = hashlib.sha256(repr(msg.payload).encode("utf-8")).hexdigest()[:10]
        lines.append(f"{msg.sender} {msg.topic} {digest}")
    return lines


class Party:
    """One participant; the state is private to this object's methods."""

    def __init__(self, name, state: PureState, rng, *, bell_shots=4096, ordering=None):
        self.name = name
        self._state = state
        self.rng = rng
        self.bell_shots = bell_shots
        self.ordering = ordering
        self._estimator = None

    @property
    def n(self):
        return self._state.n

    def _bell_estimator(self):
        if self._estimator is None:
            data = bell_sample(self._state, self.bell_shots, self.rng)
            self._estimator = MarginalEstimator(data, ordering=self.ordering)
        return self._estimator

    def sample_labels(self, count, mode):
        """Draw Pauli labels from this party's weight distribution."""
        if mode not in SAMPLER_MODES:
            raise ValueError(f"unknown sampler mode {mode!r}")
        if count == 0:
            return ()
        with _acting(self.name):
            if mode == "exact-oracle":
                rows = exact_pauli_sample(self._state, count, self.rng, ordering=self.ordering)
                if self.ordering is not None:
                    rows = self.ordering.restore_labels(rows)
            elif mode == "ancestral-from-bell":
                rows, _ = adapted_ancestral_sample(self._bell_estimator(), count, self.rng)
                if self.ordering is not None:
                    rows = self.ordering.restore_labels(rows)
            else:
                # direct Bell outcomes; matches the weight distribution
                # for real-amplitude states only
                rows = bell_sample(self._state, count, self.rng).bit_rows()
            return tuple(PauliString(row).label() for row in rows)

    def measure_alpha(self, label, shots):
        """Signed expectation estimate from two-outcome measurements.

        shots=None is the exact hook: returns the true expectation.
        """
        with _acting(self.name):
            alpha = expectation(self._state, PauliString.from_label(label))
            if shots is None:
                return float(alpha)
            if shots < 1:
                raise ValueError("shots must be at least 1")
            p_plus = min(max(0.5 * (1.0 + alpha), 0.0), 1.0)
            wins = int(self.rng.binomial(shots, p_plus))
            return 2.0 * wins / shots - 1.0

    def measure_many(self, labels, shots):
        return tuple(self.measure_alpha(label, shots) for label in labels)


@dataclass
class ProtocolResult:
    kind: str
    estimate: float
    trace_estimate: float
    mode: str
    zero_pairs: int = 0
    params: dict = field(default_factory=dict)
    transcript: tuple = ()


def run_symmetric(alice: Party, bob: Party, n1, n2, rng, *, mode="exact-oracle",
                  channel=None, aggregator="mean", mom_groups=16):
    """Coin-mixed sampling, per-party measurement, agreement averaging.

    n2 is the per-label measurement budget for each party; pass None to
    use exact expectations (test hook).  Returns the overlap-form
    estimate together with the derived trace estimate 2*estimate - 1.
    """
    if alice.n != bob.n:
        raise ValueError("parties hold states of different sizes")
    if n1 < 1:
        raise ValueError("need at least one sampled label")
    channel = ClassicalChannel() if channel is None else channel
    from_alice = int(np.sum(rng.random(n1) < 0.5))
    channel.post(alice.name, "samples/alice", alice.sample_labels(from_alice, mode))
    channel.post(bob.name, "samples/bob", bob.sample_labels(n1 - from_alice, mode))

    labels = channel.latest("samples/alice") + channel.latest("samples/bob")
    channel.post(alice.name, "alphas/alice", alice.measure_many(labels, n2))
    channel.post(bob.name, "alphas/bob", bob.measure_many(labels, n2))

    # Alice aggregates from the transcript alone
    scores = []
    zero_pairs = 0
    for u, v in zip(channel.latest("alphas/alice"), channel.latest("alphas/bob")):
        if u == 0.0 and v == 0.0:
            zero_pairs += 1
            scores.append(0.5)
        else:
            scores.append(agreement_score(u, v))
    estimate = _aggregate(scores, aggregator, mom_groups)
    channel.post(alice.name, "estimate", (estimate,))
    return ProtocolResult(
        kind="symmetric",
        estimate=estimate,
        trace_estimate=2.0 * estimate - 1.0,
        mode=mode,
        zero_pairs=zero_pairs,
        params={"n1": n1, "n2": n2, "aggregator": aggregator},
        transcript=channel.transcript(),
    )


def run_asymmetric(alice: Party, bob: Party, n1, n_rho, n_sigma, lam, *,
                   mode="exact-oracle", channel=None, aggregator="mean", mom_groups=16):
    """One-sided sampling with magnitude-floored ratio averaging.

    Alice samples n1 labels from her own distribution and posts her
    expectation estimates (n_rho shots each); Bob posts the ratio of
    his estimate (n_sigma shots) to Alice's floored one; Alice averages
    the ratios into a direct trace estimate in [-1/lam, 1/lam].
    """
    if alice.n != bob.n:
        raise ValueError("parties hold states of different sizes")
    if not 0.0 < lam < 1.0:
        raise ValueError("lam must lie strictly between 0 and 1")
    if n1 < 1:
        raise ValueError("need at least one sampled label")
    channel = ClassicalChannel() if channel is None else channel
    labels = alice.sample_labels(n1, mode)
    channel.post(alice.name, "samples/alice", labels)
    channel.post(alice.name, "alphas/alice", alice.measure_many(labels, n_rho))

    peer_labels = channel.latest("samples/alice")
    peer_alphas = channel.latest("alphas/alice")
    bob_alphas = bob.measure_many(peer_labels, n_sigma)
    ratios = tuple(b / floor_magnitude(a, lam) for a, b in zip(peer_alphas, bob_alphas))
    channel.post(bob.name, "ratios/bob", ratios)

    estimate = _aggregate(channel.latest("ratios/bob"), aggregator, mom_groups)
    channel.post(alice.name, "estimate", (estimate,))
    return ProtocolResult(
        kind="asymmetric",
        estimate=estimate,
        trace_estimate=estimate,
        mode=mode,
        params={"n1": n1, "n_rho": n_rho, "n_sigma": n_sigma, "lam": lam,
                "aggregator": aggregator},
        transcript=channel.transcript(),
    )


def imaginarity_sample_count(epsilon, delta, sampling_error=0.0):
    """Samples needed for the transpose-sign estimator's guarantee."""
    if epsilon <= sampling_error:
        raise ValueError("epsilon must exceed the sampling error")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie strictly between 0 and 1")
    return math.ceil(2.0 * math.log(2.0 / delta) / (epsilon - sampling_error) ** 2)


def estimate_imaginarity_from_samples(samples):
    """One minus the mean transpose sign of sampled Pauli strings."""
    signs = [transpose_sign(p) for p in samples]
    if not signs:
        raise ValueError("no samples given")
    return 1.0 - float(np.mean(signs))


def run_imaginarity(party: Party, epsilon, delta, *, mode="exact-oracle", channel=None):
    """Sample labels, sum transpose signs, report the imaginarity estimate."""
    k = imaginarity_sample_count(epsilon, delta)
    channel = ClassicalChannel() if channel is None else channel
    labels = party.sample_labels(k, mode)
    channel.post(party.name, "samples", labels)
    estimate = estimate_imaginarity_from_samples(
        PauliString.from_label(lab) for lab in channel.latest("samples")
    )
    channel.post(party.name, "estimate", (estimate,))
    return ProtocolResult(
        kind="imaginarity",
        estimate=estimate,
        trace_estimate=1.0 - estimate,
        mode=mode,
        params={"k": k, "epsilon": epsilon, "delta": delta},
        transcript=channel.transcript(),
    )
