"""Command-line experiment driver.

Subcommands:
  fig-sweep    trial grid over dope count, shot budget, and protocol;
               writes a per-trial CSV and a *_summary.csv next to it
  lemma-suite  brute-force bound checks, printed as a table
  pauli-sample Bell data -> adapted ancestral samples -> label file,
               with an exact total-variation report at small n
  ip-run       one protocol configuration, repeated over trials

Every run is reproducible: the same config and seed give the same
bytes (the per-trial runtime column is excluded from that promise).
Exit codes: 0 success, 1 failed check, 2 config error.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .bell import MarginalEstimator, bell_sample
from .config import (
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    ConfigError,
    ResultRow,
    SummaryRow,
    load_config,
    write_csv,
)
from .lemmas import run_all_checks
from .paulis import MAX_DENSE_QUBITS, PauliString, QubitOrdering, pauli_distribution
from .protocols import Party, run_asymmetric, run_symmetric
from .sampler import adapted_ancestral_sample, greedy_ordering_from_dataset
from .states import build_state

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _overlap(state_a, state_b):
    return float(abs(np.vdot(state_a.amplitudes, state_b.amplitudes)) ** 2)


def _trial_seeds(seed_root, grid_index, trial):
    """Stable per-trial streams, independent of worker scheduling."""
    ss = np.random.SeedSequence(entropy=int(seed_root), spawn_key=(grid_index, trial))
    shown = int(ss.generate_state(1)[0])
    return shown, [np.random.default_rng(child) for child in ss.spawn(3)]


def _run_trial(cfg, protocol, state_a, state_b, n2, rngs):
    rng_a, rng_b, rng_coin = rngs
    alice = Party("alice", state_a, rng_a)
    bob = Party("bob", state_b, rng_b)
    if protocol == "symmetric":
        result = run_symmetric(alice, bob, cfg.n1, n2, rng_coin, mode=cfg.mode)
    else:
        result = run_asymmetric(alice, bob, cfg.n1, n2, n2, cfg.lam, mode=cfg.mode)
    return result.trace_estimate


def _grid_worker(cfg, grid_index, protocol, tag, state_a, state_b, n2, seed_root):
    truth = _overlap(state_a, state_b)
    rows = []
    estimates = []
    for trial in range(cfg.trials):
        shown, rngs = _trial_seeds(seed_root, grid_index, trial)
        start = time.perf_counter()
        estimate = _run_trial(cfg, protocol, state_a, state_b, n2, rngs)
        runtime = time.perf_counter() - start
        estimates.append(estimate)
        rows.append(ResultRow(
            experiment=cfg.experiment, protocol=protocol, t=tag,
            n=cfg.recipe.n, n1=cfg.n1, n2=n2, trial=trial, seed=shown,
            estimate=estimate, abs_error=abs(estimate - truth),
            runtime_s=runtime,
        ))
    spread = float(np.std(estimates, ddof=1)) if len(estimates) > 1 else 0.0
    summary = SummaryRow(
        experiment=cfg.experiment, protocol=protocol, t=tag,
        n=cfg.recipe.n, n1=cfg.n1, n2=n2, trials=cfg.trials,
        mean_abs_error=float(np.mean([r.abs_error for r in rows])),
        stddev_estimate=spread,
    )
    return rows, summary


def _summary_path(out):
    stem, dot, ext = out.rpartition(".")
    return f"{stem}_summary.{ext}" if dot else f"{out}_summary"


def _recipe_with_t(recipe, t):
    from .states import StateRecipe

    return StateRecipe(kind=recipe.kind, n=recipe.n, seed=recipe.seed,
                       params={**recipe.params, "t": int(t)})


def cmd_fig_sweep(args):
    cfg = load_config(args.config)
    if cfg.recipe.kind != "t_doped":
        raise ConfigError("fig-sweep needs a t_doped state recipe")
    if cfg.recipe_b is not None:
        raise ConfigError("fig-sweep compares a state against itself")
    seed_root = cfg.seed_root if args.seed is None else args.seed
    out = args.out or cfg.out
    t_values = cfg.t_values or (int(cfg.recipe.params.get("t", 0)),)
    n2_values = cfg.n2_values or (cfg.n2,)
    protocols = ("symmetric", "asymmetric") if cfg.protocol == "both" else (cfg.protocol,)

    states = {t: build_state(_recipe_with_t(cfg.recipe, t)) for t in t_values}
    grid = [(t, n2, protocol)
            for t in t_values for n2 in n2_values for protocol in protocols]
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        futures = [
            pool.submit(_grid_worker, cfg, gi, protocol, t,
                        states[t], states[t], n2, seed_root)
            for gi, (t, n2, protocol) in enumerate(grid)
        ]
        outcomes = [f.result() for f in futures]

    rows = [row for trial_rows, _ in outcomes for row in trial_rows]
    write_csv(out, RESULT_COLUMNS, rows)
    write_csv(_summary_path(out), SUMMARY_COLUMNS, [s for _, s in outcomes])
    print(f"wrote {len(rows)} rows to {out}")
    print(f"wrote {len(outcomes)} summaries to {_summary_path(out)}")
    return EXIT_OK


def cmd_lemma_suite(args):
    results = run_all_checks(seed=args.seed if args.seed is not None else 20260823,
                             probes=args.probes)
    width = max(len(r.name) for r in results)
    for r in results:
        print(f"{r.name:<{width}}  {'pass' if r.passed else 'FAIL'}  {r.detail}")
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return EXIT_OK if failed == 0 else EXIT_CHECK_FAILED


def _interleaved_ordering(n):
    if n % 2:
        raise ConfigError("interleaved ordering needs an even qubit count")
    half = n // 2
    perm = []
    for j in range(1, half + 1):
        perm += [j, half + j]
    return QubitOrdering(perm)


def _empirical_tv(rows, probs):
    n2 = rows.shape[1]
    powers = (1 << np.arange(n2 - 1, -1, -1)).astype(np.int64)
    idx = rows.astype(np.int64) @ powers
    emp = np.bincount(idx, minlength=probs.size) / rows.shape[0]
    return 0.5 * float(np.abs(emp - probs).sum())


def cmd_pauli_sample(args):
    cfg = load_config(args.config)
    seed = cfg.seed_root if args.seed is None else args.seed
    out = args.out or "samples.txt"
    state = build_state(cfg.recipe)
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))

    data = bell_sample(state, args.bell, rng, state_digest=cfg.recipe.digest())
    if args.ordering == "identity":
        ordering = None
    elif args.ordering == "interleaved":
        ordering = _interleaved_ordering(state.n)
    else:
        ordering = greedy_ordering_from_dataset(data)
    estimator = MarginalEstimator(data, ordering=ordering)
    rows, diag = adapted_ancestral_sample(estimator, args.samples, rng)
    if ordering is not None:
        rows = ordering.restore_labels(rows)

    header = [
        "#pauli-samples v1",
        f"#n={state.n}",
        f"#recipe={cfg.recipe.digest()}",
        f"#seed={seed}",
        f"#ordering={args.ordering}",
        f"#bell={args.bell}",
    ]
    tv = None
    if state.n <= min(8, MAX_DENSE_QUBITS):
        tv = _empirical_tv(rows, pauli_distribution(state).probs)
        header.append(f"#tv={tv:.6f}")
    with open(out, "w", encoding="utf-8") as fh:
        fh.write("\n".join(header) + "\n")
        for row in rows:
            fh.write(PauliString(row).label() + "\n")

    print(f"wrote {args.samples} samples to {out}")
    print(f"deterministic steps per level: {diag.deterministic_steps.tolist()}")
    if tv is not None:
        print(f"tv={tv:.6f}")
    return EXIT_OK


def cmd_ip_run(args):
    cfg = load_config(args.config)
    if cfg.protocol == "both":
        raise ConfigError("ip-run needs protocol = symmetric or asymmetric")
    seed_root = cfg.seed_root if args.seed is None else args.seed
    out = args.out or cfg.out
    state_a = build_state(cfg.recipe)
    state_b = state_a if cfg.recipe_b is None else build_state(cfg.recipe_b)
    tag = int(cfg.recipe.params.get("t", -1))
    n2 = cfg.n2 if cfg.protocol == "symmetric" else cfg.n_rho
    rows, summary = _grid_worker(cfg, 0, cfg.protocol, tag, state_a, state_b,
                                 n2, seed_root)
    write_csv(out, RESULT_COLUMNS, rows)
    print(f"wrote {len(rows)} rows to {out}")
    print(f"mean abs error {summary.mean_abs_error:.6f}, "
          f"stddev {summary.stddev_estimate:.6f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="xpcli", description="Pauli-sampling experiment driver"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("fig-sweep", help="trial grid over t, shots, protocol")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--seed", type=int, default=None)
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--threads", type=int, default=4)
    sweep.set_defaults(func=cmd_fig_sweep)

    lemmas = sub.add_parser("lemma-suite", help="run every brute-force bound check")
    lemmas.add_argument("--seed", type=int, default=None)
    lemmas.add_argument("--probes", type=int, default=1_000_000)
    lemmas.set_defaults(func=cmd_lemma_suite)

    sample = sub.add_parser("pauli-sample", help="Bell data to ancestral samples")
    sample.add_argument("--config", required=True)
    sample.add_argument("--bell", type=int, default=10_000)
    sample.add_argument("--samples", type=int, default=10_000)
    sample.add_argument("--ordering", choices=("identity", "interleaved", "greedy"),
                        default="identity")
    sample.add_argument("--seed", type=int, default=None)
    sample.add_argument("--out", default=None)
    sample.set_defaults(func=cmd_pauli_sample)

    ip = sub.add_parser("ip-run", help="one protocol config over trials")
    ip.add_argument("--config", required=True)
    ip.add_argument("--seed", type=int, default=None)
    ip.add_argument("--out", default=None)
    ip.set_defaults(func=cmd_ip_run)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
