"""Brute-force verification of the analytic bounds behind the estimators.

Each check enumerates or probes the claimed inequality on concrete
states and reports the worst observed margin.  The collection doubles
as the `lemma-suite` CLI command and as the acceptance gate for the
bound-shaped claims that cannot be tested through sampling alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .paulis import (
    PauliString,
    PureState,
    exact_marginal,
    expectation,
    imaginarity,
    pauli_distribution,
    renyi_entropy,
    schmidt_rank,
    weight_cdf,
)
from .states import PauliNoiseChannel, make_local_clifford_rotated, make_phi_tau, make_product


@dataclass(frozen=True)
class LemmaResult:
    name: str
    passed: bool
    detail: str


def _random_state(n, rng):
    raw = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return PureState(raw / np.linalg.norm(raw))


def check_schmidt_marginal_floor(rng):
    """Complete-prefix weights are at least alpha^2 / (2^k r_k)."""
    worst = np.inf
    for n in (3, 4, 5):
        state = _random_state(n, rng)
        for k in range(1, n):
            r = schmidt_rank(state, k)
            for idx in range(4**k):
                head = PauliString.from_index(idx, k).bits
                bits = np.concatenate([head, np.zeros(2 * (n - k), dtype=head.dtype)])
                alpha = expectation(state, PauliString(bits))
                margin = exact_marginal(state, head) - alpha**2 / (2**k * r)
                worst = min(worst, margin)
    return LemmaResult(
        name="schmidt-marginal-floor",
        passed=worst >= -1e-9,
        detail=f"worst margin {worst:+.2e} over n in 3..5",
    )


def check_cdf_support_bound(rng):
    """Weight CDF below tau is at most 2^m0 tau."""
    worst = -np.inf
    for n in (2, 3, 4, 5, 6):
        dist = pauli_distribution(_random_state(n, rng))
        m0 = renyi_entropy(dist.probs, 0) - n
        for tau in (0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0):
            worst = max(worst, weight_cdf(dist, tau) - 2.0**m0 * tau)
    return LemmaResult(
        name="cdf-support-bound",
        passed=worst <= 1e-9,
        detail=f"worst excess {worst:+.2e}",
    )


def check_cdf_shannon_bound(rng):
    """Weight CDF below tau is at most m1 / log2(1/tau)."""
    worst = -np.inf
    for n in (2, 3, 4, 5):
        dist = pauli_distribution(_random_state(n, rng))
        m1 = renyi_entropy(dist.probs, 1) - n
        for tau in (0.01, 0.05, 0.1, 0.3, 0.7):
            worst = max(worst, weight_cdf(dist, tau) - m1 / np.log2(1.0 / tau))
    return LemmaResult(
        name="cdf-shannon-bound",
        passed=worst <= 1e-9,
        detail=f"worst excess {worst:+.2e}",
    )


def _agreement_vals(pts):
    return 0.5 * (pts[:, 0] + pts[:, 1]) ** 2 / (pts[:, 0] ** 2 + pts[:, 1] ** 2)


def check_agreement_lipschitz(rng, probes=1_000_000):
    """Difference quotient of the agreement score stays below 1/r."""
    worst_ratio = {}
    for r in (0.1, 0.3):
        def draw():
            pts = rng.uniform(-1, 1, size=(int(1.5 * probes), 2))
            pts = pts[np.hypot(pts[:, 0], pts[:, 1]) >= r]
            return pts[:probes]
        p, q = draw(), draw()
        k = min(len(p), len(q))
        p, q = p[:k], q[:k]
        dist = np.hypot(p[:, 0] - q[:, 0], p[:, 1] - q[:, 1])
        ratio = np.abs(_agreement_vals(p) - _agreement_vals(q)) / dist
        worst_ratio[r] = float(ratio.max())
    passed = all(worst_ratio[r] <= 1.0 / r for r in worst_ratio)
    shown = ", ".join(f"r={r}: {v:.2f} <= {1 / r:.1f}" for r, v in worst_ratio.items())
    return LemmaResult(name="lipschitz-agreement", passed=passed, detail=shown)


def check_ratio_lipschitz(rng, probes=1_000_000):
    """Difference quotient of y/x stays below sqrt(2)/lam.

    Probed on |x| >= lam with |y| <= |x|, where the constant is exact;
    without the second restriction the quotient can exceed any bound
    proportional to 1/lam.
    """
    worst_ratio = {}
    for lam in (0.1, 0.3):
        def draw():
            x = rng.uniform(-1, 1, size=2 * probes)
            x = x[np.abs(x) >= lam][:probes]
            y = rng.uniform(-1, 1, size=len(x)) * np.abs(x)
            return x, y
        x1, y1 = draw()
        x2, y2 = draw()
        k = min(len(x1), len(x2))
        x1, y1, x2, y2 = x1[:k], y1[:k], x2[:k], y2[:k]
        ratio = np.abs(y1 / x1 - y2 / x2) / np.hypot(x1 - x2, y1 - y2)
        worst_ratio[lam] = float(ratio.max())
    passed = all(worst_ratio[lam] <= np.sqrt(2.0) / lam for lam in worst_ratio)
    shown = ", ".join(
        f"lam={lam}: {v:.2f} <= {np.sqrt(2) / lam:.2f}" for lam, v in worst_ratio.items()
    )
    return LemmaResult(name="lipschitz-ratio", passed=passed, detail=shown)


def check_noise_pointwise_floor(rng):
    """Channel output weights never drop below (1 - 2 xi)^2 times the input."""
    worst = np.inf
    for n in (2, 3):
        state = _random_state(n, rng)
        rates = {}
        while not rates:
            for _ in range(3):
                label = "".join("IXZY"[rng.integers(0, 4)] for _ in range(n))
                if set(label) != {"I"}:
                    rates[label] = float(rng.uniform(0.01, 0.08))
        channel = PauliNoiseChannel(n, rates)
        dist = pauli_distribution(state)
        beta = np.array(
            [channel.attenuation(PauliString.from_index(i, n)) for i in range(4**n)]
        )
        beta *= dist.alphas
        noisy = beta**2 / np.sum(beta**2)
        floor = (1.0 - 2.0 * channel.total_rate) ** 2
        worst = min(worst, float(np.min(noisy - floor * dist.probs)))
    return LemmaResult(
        name="noise-pointwise-floor",
        passed=worst >= -1e-12,
        detail=f"worst margin {worst:+.2e}",
    )


def check_spiked_flat_family():
    """Spiked flat states at tau = 1/sqrt(n): small-weight mass and entropies."""
    details = []
    passed = True
    for n in (4, 9):
        tau = 1.0 / np.sqrt(n)
        state = make_phi_tau(n, tau)
        dist = pauli_distribution(state)
        mass = weight_cdf(dist, tau**2)
        cap = 2.0 * tau * (1.0 - tau)
        passed &= mass <= cap + 1e-12
        details.append(f"n={n}: F={mass:.3f} <= {cap:.3f}")
    m0 = renyi_entropy(dist.probs, 0) - 9
    m1 = renyi_entropy(dist.probs, 1) - 9
    passed &= m0 > 8.0 and m1 > 3.0
    details.append(f"n=9: m0={m0:.3f} > 8, m1={m1:.3f} > 3")
    return LemmaResult(name="spiked-flat-family", passed=bool(passed), detail="; ".join(details))


def check_imaginarity_gap(rng, trials=200):
    """Random local rotations leave tiny real-conjugate overlap on average."""
    n = 4
    base = make_product(n)
    overlaps = [
        1.0 - imaginarity(make_local_clifford_rotated(base, rng)) for _ in range(trials)
    ]
    mean = float(np.mean(overlaps))
    sem = float(np.std(overlaps, ddof=1)) / np.sqrt(trials)
    bound = (2.0 / 3.0) ** n + 5.0 * sem
    return LemmaResult(
        name="imaginarity-gap",
        passed=mean <= bound,
        detail=f"mean overlap {mean:.4f} <= {bound:.4f}",
    )


def run_all_checks(seed=20260823, probes=1_000_000):
    """Every lemma check with one seeded stream; returns results in fixed order."""
    rng = np.random.default_rng(seed)
    return [
        check_schmidt_marginal_floor(rng),
        check_cdf_support_bound(rng),
        check_cdf_shannon_bound(rng),
        check_agreement_lipschitz(rng, probes=probes),
        check_ratio_lipschitz(rng, probes=probes),
        check_noise_pointwise_floor(rng),
        check_spiked_flat_family(),
        check_imaginarity_gap(rng),
    ]
