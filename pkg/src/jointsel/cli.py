"""Command-line interface.

Subcommands: simulate, fit, study, compare, prior-calc, config (init).
Every under-specified modeling choice is visible in the config file that
``jointsel config init`` writes.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .chainio import write_chain
from .config import PRIORS, RunConfig
from .data import ingest_dataset, read_truth, write_dataset
from .engine import fit_dataset
from .masks import (
    DirichletWeights,
    build_concentration,
    enumerate_masks,
    negativity_scan,
    pi_covariance,
    q_to_pi,
)
from .simulate import ScenarioSpec, generate_dataset
from .study import compare_priors, render_bias_table, render_tables, run_replication_study, write_summary
from .survival import FEATURE_NAMES


def _load_config(args) -> RunConfig:
    config = RunConfig.load(args.config) if args.config else RunConfig()
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    if getattr(args, "out", None) is not None:
        config.out = args.out
    if getattr(args, "prior", None) is not None:
        config.model = dataclasses.replace(config.model, prior=args.prior)
    if getattr(args, "scenario", None) is not None:
        config.study.scenario = args.scenario
    if getattr(args, "n", None) is not None:
        config.study.n_subjects = args.n
    if getattr(args, "replicates", None) is not None:
        config.study.replicates = args.replicates
    if getattr(args, "threads", None) is not None:
        config.study.threads = args.threads
    return config


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=None, help="JSON config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", type=str, default=None, help="output directory")


def cmd_config_init(args) -> int:
    config = RunConfig()
    text = config.to_json()
    if args.path:
        Path(args.path).write_text(text)
        print(f"wrote defaults to {args.path}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(args) -> int:
    config = _load_config(args)
    spec = ScenarioSpec.from_defaults(
        config.study.scenario,
        config.study.n_subjects,
        seed=config.seed,
        censoring_target=config.study.censoring_target,
    )
    dataset, truth = generate_dataset(spec)
    out = Path(config.out)
    write_dataset(dataset, out, truth=truth)
    print(
        f"scenario {spec.scenario}: wrote {len(dataset)} subjects to {out} "
        f"(realized censoring {truth['realized_censoring']:.2f})"
    )
    return 0


def cmd_fit(args) -> int:
    config = _load_config(args)
    dataset = ingest_dataset(args.data)
    truth = read_truth(args.data)
    model = config.model
    if truth is not None:
        model = dataclasses.replace(
            model, thresholds=tuple(truth["thresholds"]), a_max=truth["a_max"]
        )
    output = fit_dataset(model, dataset, config.chain, seed=config.seed)
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    chain_path = out / "chain.jscol"
    write_chain(output, chain_path)
    freq = output.inclusion_frequency()
    gfreq = output.group_frequency()
    lines = [f"fit with {model.prior} prior ({output.n_draws} draws)"]
    if "t_hat" in output.meta:
        lines.append(f"empirical slab rate t-hat = {output.meta['t_hat']:.4f}")
    for g in range(freq.shape[0]):
        lines.append(f"risk factor {g + 1}: inclusion {gfreq[g] * 100:.0f}%")
        for j in range(freq.shape[1]):
            lines.append(f"  {FEATURE_NAMES[j]:>9}: {freq[g, j] * 100:.0f}%")
    report = "\n".join(lines) + f"\nchain written to {chain_path}\n"
    (out / "fit.txt").write_text(report)
    sys.stdout.write(report)
    return 0


def cmd_study(args) -> int:
    config = _load_config(args)
    summary = run_replication_study(config)
    out = Path(config.out)
    paths = write_summary(summary, out)
    (out / "bias.txt").write_text(render_bias_table(summary))
    sys.stdout.write(render_tables(summary))
    sys.stdout.write(render_bias_table(summary))
    print(f"summaries written to {', '.join(str(p) for p in paths)}")
    return 0


def cmd_compare(args) -> int:
    config = _load_config(args)
    priors = args.priors.split(",")
    for p in priors:
        if p not in PRIORS:
            raise SystemExit(f"unknown prior {p!r}")
    summaries = []
    for p in priors:
        c = dataclasses.replace(config, model=dataclasses.replace(config.model, prior=p))
        summaries.append(run_replication_study(c))
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    write_summary(summaries, out)
    reports = compare_priors(summaries)
    text = "".join(r.render() for r in reports)
    (out / "comparison.txt").write_text(text)
    sys.stdout.write(render_tables(summaries))
    sys.stdout.write(text)
    return 0


def cmd_prior_calc(args) -> int:
    weights = DirichletWeights(values=tuple(args.weights))
    J = weights.n_features
    catalog = enumerate_masks(J)
    conc = build_concentration(weights, catalog)
    q = conc / conc.sum()
    pi = q_to_pi(q, catalog)
    print(f"J = {J} features, {len(catalog)} feature combinations")
    print("mask  prior-mean q")
    for mask, qc in zip(catalog.masks, q):
        print(f"  {mask}  {qc:.4f}")
    print("feature  prior inclusion probability")
    for j in range(J):
        print(f"  {j + 1}  {pi[j]:.4f}")
    if J >= 2:
        cov = pi_covariance(weights, 0, 1, J)
        print(f"Cov(pi_j, pi_k) = {cov:.6g} for every feature pair")
    if args.scan_trials > 0:
        report = negativity_scan(J, args.scan_trials, rng_seed=args.scan_seed)
        print(report.render())
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="jointsel",
        description="Joint longitudinal-survival models with bi-level feature selection",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a scenario dataset with truth sidecar")
    _add_common(p)
    p.add_argument("--scenario", choices=["I", "II", "III", "IV"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit one dataset, write chain and posterior summary")
    _add_common(p)
    p.add_argument("data", type=Path, help="dataset directory")
    p.add_argument("--prior", choices=list(PRIORS), default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("study", help="full replication study for one prior")
    _add_common(p)
    p.add_argument("--prior", choices=list(PRIORS), default=None)
    p.add_argument("--scenario", choices=["I", "II", "III", "IV"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_study)

    p = sub.add_parser("compare", help="paired-seed comparison of several priors")
    _add_common(p)
    p.add_argument("--priors", type=str, default="BSGS-D,BSGS,SS")
    p.add_argument("--scenario", choices=["I", "II", "III", "IV"], default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--replicates", type=int, default=None)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("prior-calc", help="tabulate prior probabilities and covariance")
    p.add_argument("--weights", type=float, nargs="+", default=[4.0, 3.0, 2.0, 1.0])
    p.add_argument("--scan-trials", type=int, default=0)
    p.add_argument("--scan-seed", type=int, default=0)
    p.set_defaults(func=cmd_prior_calc)

    p = sub.add_parser("config", help="configuration utilities")
    config_sub = p.add_subparsers(dest="config_command", required=True)
    pi = config_sub.add_parser("init", help="print or write the full default config")
    pi.add_argument("path", nargs="?", default=None)
    pi.set_defaults(func=cmd_config_init)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
