"""Replication studies: R simulated datasets x one prior, aggregated into
selection percentages, bias and MSE, plus paired prior comparisons."""

from __future__ import annotations

import csv
import dataclasses
import io
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import binomtest

from .config import PRIORS, RunConfig
from .data import Dataset, ingest_dataset, read_truth
from .engine import ChainOutput, fit_dataset
from .simulate import ScenarioSpec, calibrate_censoring, generate_dataset
from .survival import FEATURE_NAMES

__all__ = [
    "ReplicateRecord",
    "SelectionSummary",
    "StudyError",
    "run_replication_study",
    "render_tables",
    "compare_priors",
    "PairedComparison",
]

logger = logging.getLogger(__name__)

CHAIN_SEED_OFFSET = 100003


class StudyError(RuntimeError):
    pass


@dataclass
class ReplicateRecord:
    index: int
    data_seed: int
    ok: bool
    error: str | None = None
    feature_freq: np.ndarray | None = None  # (G, J) posterior inclusion frequency
    group_freq: np.ndarray | None = None  # (G,)
    alpha_raw_mean: np.ndarray | None = None  # (G, J) posterior mean, raw scale
    t_hat: float | None = None
    true_alpha: np.ndarray | None = None


@dataclass
class SelectionSummary:
    """Aggregated study outcome in the layout of the paper's tables."""

    prior: str
    scenario: str | None
    n_subjects: int
    replicates: int
    threshold: float
    feature_pct: np.ndarray  # (G, J) percent of replicates selecting the feature
    feature_se: np.ndarray  # (G, J) binomial MC standard error, percent
    mean_incl_prob: np.ndarray  # (G, J) mean posterior inclusion probability, percent
    group_pct: np.ndarray  # (G,)
    group_se: np.ndarray  # (G,)
    true_alpha: np.ndarray | None = None
    bias: np.ndarray | None = None  # (G, J), NaN where truth is zero/unknown
    mse: np.ndarray | None = None
    records: list[ReplicateRecord] = field(default_factory=list)

    @property
    def n_groups(self) -> int:
        return self.feature_pct.shape[0]

    @property
    def n_features(self) -> int:
        return self.feature_pct.shape[1]


def _fit_one_replicate(config: RunConfig, r: int, censor_rate: float | None) -> ReplicateRecord:
    data_seed = config.seed + r
    record = ReplicateRecord(index=r, data_seed=data_seed, ok=False)
    try:
        model = dataclasses.replace(config.model)
        truth_alpha = None
        if config.study.dataset is not None:
            dataset = ingest_dataset(config.study.dataset)
            truth = read_truth(config.study.dataset)
            if truth is not None:
                truth_alpha = np.asarray(truth["true_alpha"])
        else:
            spec = ScenarioSpec.from_defaults(
                config.study.scenario,
                config.study.n_subjects,
                seed=data_seed,
                censoring_target=config.study.censoring_target,
            )
            dataset, sidecar = generate_dataset(spec, censor_rate=censor_rate)
            truth_alpha = spec.true_alpha
            model = dataclasses.replace(
                model,
                thresholds=tuple(spec.truth.thresholds),
                a_max=spec.truth.a_max,
            )
        output = fit_dataset(
            model, dataset, config.chain, seed=data_seed + CHAIN_SEED_OFFSET
        )
        record.ok = True
        record.feature_freq = output.inclusion_frequency()
        record.group_freq = output.group_frequency()
        record.alpha_raw_mean = output.alpha_mean_raw()
        record.t_hat = output.meta.get("t_hat")
        record.true_alpha = truth_alpha
    except Exception as exc:  # noqa: BLE001 - replicate failures are data
        record.error = f"{type(exc).__name__}: {exc}"
    return record


def run_replication_study(config: RunConfig) -> SelectionSummary:
    """Run R replicates of (simulate -> fit) and aggregate selections.

    Failed replicates are recorded and excluded with a warning; more than
    10 percent failures aborts the study.
    """
    plan = config.study
    censor_rate = None
    if plan.dataset is None:
        pilot_spec = ScenarioSpec.from_defaults(
            plan.scenario, plan.n_subjects, seed=config.seed, censoring_target=plan.censoring_target
        )
        censor_rate = calibrate_censoring(pilot_spec, pilot_size=max(500, plan.n_subjects))

    indices = list(range(plan.replicates))
    if plan.threads > 1:
        with ProcessPoolExecutor(max_workers=plan.threads) as pool:
            records = list(
                pool.map(_fit_one_replicate, [config] * len(indices), indices, [censor_rate] * len(indices))
            )
    else:
        records = [_fit_one_replicate(config, r, censor_rate) for r in indices]

    failures = [rec for rec in records if not rec.ok]
    for rec in failures:
        logger.warning("replicate %d failed: %s", rec.index, rec.error)
    if len(failures) > 0.10 * plan.replicates:
        raise StudyError(
            f"{len(failures)}/{plan.replicates} replicates failed; first error: "
            f"{failures[0].error}"
        )
    good = [rec for rec in records if rec.ok]
    if not good:
        raise StudyError("no successful replicates")

    feature_sel = np.stack([rec.feature_freq > plan.threshold for rec in good]).astype(float)
    group_sel = np.stack([rec.group_freq > plan.threshold for rec in good]).astype(float)
    incl = np.stack([rec.feature_freq for rec in good])
    alpha_means = np.stack([rec.alpha_raw_mean for rec in good])
    R = len(good)

    pct = 100.0 * feature_sel.mean(axis=0)
    se = 100.0 * np.sqrt(feature_sel.mean(axis=0) * (1 - feature_sel.mean(axis=0)) / R)
    gpct = 100.0 * group_sel.mean(axis=0)
    gse = 100.0 * np.sqrt(group_sel.mean(axis=0) * (1 - group_sel.mean(axis=0)) / R)

    truth = good[0].true_alpha
    bias = mse = None
    if truth is not None:
        truth = np.asarray(truth, dtype=float)
        bias = np.full_like(truth, np.nan)
        mse = np.full_like(truth, np.nan)
        nz = truth != 0
        err = alpha_means - truth[None, :, :]
        bias[nz] = err.mean(axis=0)[nz]
        mse[nz] = (err**2).mean(axis=0)[nz]

    return SelectionSummary(
        prior=config.model.prior,
        scenario=None if plan.dataset else plan.scenario,
        n_subjects=plan.n_subjects,
        replicates=R,
        threshold=plan.threshold,
        feature_pct=pct,
        feature_se=se,
        mean_incl_prob=100.0 * incl.mean(axis=0),
        group_pct=gpct,
        group_se=gse,
        true_alpha=truth,
        bias=bias,
        mse=mse,
        records=records,
    )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def _ordered(summaries: list[SelectionSummary]) -> list[SelectionSummary]:
    order = {"BSGS-D": 0, "BSGS": 1, "BSGS-D-I": 2, "SS": 3}
    return sorted(summaries, key=lambda s: order.get(s.prior, 99))


def _feature_name(j: int) -> str:
    return FEATURE_NAMES[j] if j < len(FEATURE_NAMES) else f"f{j + 1}"


def render_tables(
    summaries: SelectionSummary | list[SelectionSummary],
    fmt: str = "text",
) -> str:
    """Selection-percentage table, one row per (risk factor, feature),
    one column pair per prior, in the fixed BSGS-D, BSGS, BSGS-D I, SS
    order.  ``fmt`` is "text" or "csv"; both carry identical numbers."""
    if isinstance(summaries, SelectionSummary):
        summaries = [summaries]
    if fmt not in ("text", "csv"):
        raise ValueError("format must be 'text' or 'csv'")
    summaries = _ordered(summaries)
    G, J = summaries[0].n_groups, summaries[0].n_features
    priors = [s.prior for s in summaries]

    rows: list[list[str]] = []
    for g in range(G):
        group_cells = [f"{s.group_pct[g]:.0f} ({s.group_se[g]:.1f})" for s in summaries]
        rows.append([f"risk factor {g + 1}", "", *group_cells])
        for j in range(J):
            cells = [
                f"{s.feature_pct[g, j]:.0f} ({s.feature_se[g, j]:.1f})" for s in summaries
            ]
            rows.append(["", _feature_name(j), *cells])

    header = ["Risk factor", "Feature", *priors]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
        return buf.getvalue()
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def render_bias_table(summary: SelectionSummary) -> str:
    """Bias/MSE lines for the truly nonzero coefficients."""
    if summary.true_alpha is None:
        return "no truth sidecar: bias/MSE unavailable\n"
    lines = [f"bias and MSE of true features ({summary.prior})"]
    nz = np.argwhere(summary.true_alpha != 0)
    for g, j in nz:
        lines.append(
            f"  alpha[{g + 1},{_feature_name(j)}]: truth={summary.true_alpha[g, j]:+.4f}  "
            f"bias={summary.bias[g, j]:+.4f}  MSE={summary.mse[g, j]:.5f}"
        )
    return "\n".join(lines) + "\n"


def write_summary(summaries, out_dir: str | Path, stem: str = "summary") -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for fmt, suffix in (("text", ".txt"), ("csv", ".csv")):
        p = out / f"{stem}{suffix}"
        p.write_text(render_tables(summaries, fmt))
        paths.append(p)
    return paths


# ---------------------------------------------------------------------------
# Paired comparison
# ---------------------------------------------------------------------------


@dataclass
class PairedComparison:
    prior_a: str
    prior_b: str
    diff_pct: np.ndarray  # (G, J) selection-percentage difference a - b
    sign_p: np.ndarray  # (G, J) sign-test p-value on paired indicators
    overselected: list[tuple[int, int]]  # unimportant features where a > b
    true_alpha: np.ndarray | None

    def render(self) -> str:
        lines = [f"paired comparison: {self.prior_a} vs {self.prior_b}"]
        G, J = self.diff_pct.shape
        for g in range(G):
            for j in range(J):
                star = ""
                if self.true_alpha is not None and self.true_alpha[g, j] != 0:
                    star = " [true]"
                lines.append(
                    f"  ({g + 1},{_feature_name(j)}): diff={self.diff_pct[g, j]:+.0f} pts "
                    f"(sign test p={self.sign_p[g, j]:.3f}){star}"
                )
        if self.overselected:
            pretty = ", ".join(f"({g + 1},{_feature_name(j)})" for g, j in self.overselected)
            lines.append(f"  unimportant features with {self.prior_a} > {self.prior_b}: {pretty}")
        return "\n".join(lines) + "\n"


def compare_priors(summaries: list[SelectionSummary]) -> list[PairedComparison]:
    """Pairwise paired-seed comparisons between priors run on the same
    replicate seeds.  Raises when the seeds do not align."""
    if len(summaries) < 2:
        raise ValueError("need at least two priors to compare")
    base_seeds = [rec.data_seed for rec in summaries[0].records]
    for s in summaries[1:]:
        seeds = [rec.data_seed for rec in s.records]
        if seeds != base_seeds:
            raise ValueError(
                f"replicate seeds differ between {summaries[0].prior} and {s.prior}; "
                "paired comparison would be invalid"
            )
    out = []
    summaries = _ordered(summaries)
    for ai in range(len(summaries)):
        for bi in range(ai + 1, len(summaries)):
            a, b = summaries[ai], summaries[bi]
            sel_a = np.stack(
                [rec.feature_freq > a.threshold for rec in a.records if rec.ok]
            ).astype(float)
            sel_b = np.stack(
                [rec.feature_freq > b.threshold for rec in b.records if rec.ok]
            ).astype(float)
            if sel_a.shape != sel_b.shape:
                raise ValueError("paired comparison needs matching replicate outcomes")
            diff = 100.0 * (sel_a.mean(axis=0) - sel_b.mean(axis=0))
            G, J = diff.shape
            pvals = np.ones((G, J))
            for g in range(G):
                for j in range(J):
                    da = sel_a[:, g, j] - sel_b[:, g, j]
                    n_pos = int((da > 0).sum())
                    n_neg = int((da < 0).sum())
                    if n_pos + n_neg > 0:
                        pvals[g, j] = binomtest(n_pos, n_pos + n_neg, 0.5).pvalue
            over = []
            if a.true_alpha is not None:
                for g in range(G):
                    for j in range(J):
                        if a.true_alpha[g, j] == 0 and diff[g, j] > 0:
                            over.append((g, j))
            out.append(
                PairedComparison(
                    prior_a=a.prior,
                    prior_b=b.prior,
                    diff_pct=diff,
                    sign_p=pvals,
                    overselected=over,
                    true_alpha=a.true_alpha,
                )
            )
    return out
