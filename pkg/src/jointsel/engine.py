"""Metropolis-within-Gibbs engine for the joint model.

One sweep updates, in fixed order: longitudinal fixed effects (conjugate
proposal, Metropolis-corrected for the survival factor), per-subject
random effects (same treatment, vectorized across subjects), the
block-diagonal random-effects covariance (conjugate inverse-Wishart),
error variances (conjugate inverse-gamma), baseline-hazard spline
coefficients and baseline-covariate coefficients (adaptive random-walk
Metropolis), then the full selection layer.

``likelihood_mode`` switches data terms off: "longitudinal" drops the
survival factor (useful for conjugacy checks), "prior" drops everything
(the sweep becomes a prior sampler).
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import invwishart

from .config import ChainSettings, ModelSpec
from .data import Dataset
from .longitudinal import BlockCovariance, legendre_basis
from .priors import AdaptiveStep, IterationError, SelectionState, SelectionUpdater, empirical_t_update
from .survival import SurvivalWorkspace, bspline_knot_vector

__all__ = [
    "ModelDesign",
    "ChainState",
    "ChainOutput",
    "gibbs_sweep",
    "run_chain",
    "fit_dataset",
    "diagnostics",
    "DiagnosticsReport",
]

MODES = ("full", "longitudinal", "prior")


# ---------------------------------------------------------------------------
# Design: everything fixed given the data
# ---------------------------------------------------------------------------


class ModelDesign:
    """Packed data arrays plus the survival workspace for one dataset."""

    def __init__(self, dataset: Dataset, spec: ModelSpec) -> None:
        self.spec = spec
        G = spec.n_risk_factors
        if dataset.n_risk_factors != G:
            raise ValueError(
                f"dataset has {dataset.n_risk_factors} risk factors, spec wants {G}"
            )
        self.n = len(dataset)
        self.G = G
        self.m = spec.poly_order + 1
        self.a_max = float(spec.a_max) if spec.a_max is not None else dataset.max_age
        subjects = dataset.subjects

        # Long-format packed longitudinal arrays per factor.
        self.subj_idx: list[np.ndarray] = []
        self.basis: list[np.ndarray] = []
        self.y: list[np.ndarray] = []
        for g in range(G):
            sid, ages, vals = [], [], []
            for i, s in enumerate(subjects):
                a = s.ages[g]
                sid.extend([i] * a.size)
                ages.extend(a.tolist())
                vals.extend(s.values[g].tolist())
            ages_arr = np.asarray(ages)
            self.subj_idx.append(np.asarray(sid, dtype=np.int64))
            self.basis.append(legendre_basis(ages_arr, self.a_max, spec.poly_order))
            self.y.append(np.asarray(vals))

        # Per-subject cross products for conjugate updates.
        self.xtx = np.zeros((self.n, G, self.m, self.m))
        self.xty = np.zeros((self.n, G, self.m))
        self.n_obs = np.zeros((self.n, G))
        for g in range(G):
            bg, yg, idx = self.basis[g], self.y[g], self.subj_idx[g]
            np.add.at(self.xtx[:, g], idx, bg[:, :, None] * bg[:, None, :])
            np.add.at(self.xty[:, g], idx, bg * yg[:, None])
            np.add.at(self.n_obs[:, g], idx, 1.0)
        self.sum_xtx = self.xtx.sum(axis=0)
        self.sum_xty = self.xty.sum(axis=0)

        times = dataset.observed_times()
        events = dataset.event_flags()
        covs = np.stack([s.covariates for s in subjects])
        a0 = np.array([s.baseline_age for s in subjects])

        if spec.thresholds is not None:
            thresholds = np.asarray(spec.thresholds, dtype=float)
        else:
            thresholds = np.array([np.median(self.y[g]) for g in range(G)])
        self.thresholds = thresholds

        n_interior = spec.n_spline_coeffs - spec.spline_degree - 1
        if n_interior < 0:
            raise ValueError("spline coefficient count too small for the degree")
        t_hi = float(times.max()) * (1.0 + 1e-9)
        event_times = times[events] if events.any() else times
        if n_interior > 0:
            qs = np.linspace(0, 1, n_interior + 2)[1:-1]
            interior = np.quantile(event_times, qs)
            interior = np.clip(interior, 1e-9, t_hi * (1 - 1e-9))
            interior = np.unique(interior)
            # Degenerate quantiles collapse; space survivors evenly instead.
            if interior.size < n_interior:
                interior = np.linspace(0, t_hi, n_interior + 2)[1:-1]
        else:
            interior = np.array([])
        self.knots = bspline_knot_vector(interior, 0.0, t_hi, spec.spline_degree)

        self.workspace = SurvivalWorkspace(
            times=times,
            events=events,
            covariates=covs,
            baseline_ages=a0,
            a_max=self.a_max,
            order=spec.poly_order,
            thresholds=thresholds,
            knots=self.knots,
            degree=spec.spline_degree,
            n_nodes=spec.quad_nodes,
            area_t0=spec.area_t0,
        )
        self.n_cov = covs.shape[1]
        self.n_spline = self.workspace.n_spline

        self.beta_ls = self._least_squares_beta()

    def _least_squares_beta(self) -> np.ndarray:
        out = np.zeros((self.G, self.m))
        for g in range(self.G):
            xtx = self.sum_xtx[g] + 1e-8 * np.eye(self.m)
            out[g] = np.linalg.solve(xtx, self.sum_xty[g])
        return out

    def calibrate_scales(self) -> np.ndarray:
        coeffs = np.broadcast_to(self.beta_ls, (self.n, self.G, self.m)).copy()
        return self.workspace.calibrate_scales(coeffs)


# ---------------------------------------------------------------------------
# Chain state
# ---------------------------------------------------------------------------


@dataclass
class ChainState:
    beta: np.ndarray  # (G, m)
    b: np.ndarray  # (n, G, m)
    cov: BlockCovariance
    sigma: np.ndarray  # (G,)
    spline: np.ndarray  # (n_spline,) log-baseline coefficients, intercept first
    gamma: np.ndarray  # (n_cov,)
    selection: SelectionState
    iteration: int = 0

    def coeffs(self) -> np.ndarray:
        return self.beta[None, :, :] + self.b


def initial_state(
    design: ModelDesign, updater: SelectionUpdater, rng: np.random.Generator
) -> ChainState:
    G, m = design.G, design.m
    return ChainState(
        beta=design.beta_ls.copy(),
        b=np.zeros((design.n, G, m)),
        cov=BlockCovariance(blocks=tuple(np.eye(G) for _ in range(m))),
        sigma=np.ones(G),
        spline=np.zeros(design.n_spline),
        gamma=np.zeros(design.n_cov),
        selection=updater.initial_state(rng),
        iteration=0,
    )


# ---------------------------------------------------------------------------
# Sweep
# ---------------------------------------------------------------------------


class SweepKernel:
    """Holds adaptation state and performs full Gibbs sweeps."""

    def __init__(
        self,
        design: ModelDesign,
        updater: SelectionUpdater,
        mode: str = "full",
    ) -> None:
        if mode not in MODES:
            raise ValueError(f"likelihood mode must be one of {MODES}")
        self.design = design
        self.updater = updater
        self.mode = mode
        self.spline_steps = [AdaptiveStep() for _ in range(design.n_spline)]
        self.gamma_steps = [AdaptiveStep() for _ in range(design.n_cov)]
        self.beta_accept = AdaptiveStep()  # bookkeeping only; proposal is conjugate
        self.b_accepted = 0
        self.b_proposed = 0

    # -- survival availability --------------------------------------------------

    @property
    def survival_on(self) -> bool:
        return self.mode == "full"

    @property
    def longitudinal_on(self) -> bool:
        return self.mode in ("full", "longitudinal")

    def sync_workspace(self, state: ChainState) -> None:
        if self.survival_on:
            self.design.workspace.set_state(
                state.coeffs(), state.selection.alpha_flat(), state.spline, state.gamma
            )

    # -- individual updates -------------------------------------------------------

    def _update_beta(self, state: ChainState, rng: np.random.Generator) -> None:
        d = self.design
        hyper = d.spec.hyper
        ws = d.workspace
        w_lik = 1.0 if self.longitudinal_on else 0.0
        for g in range(d.G):
            prec = w_lik * d.sum_xtx[g] / state.sigma[g] ** 2 + np.eye(d.m) / hyper.beta_sd**2
            xb = np.einsum("nab,nb->a", d.xtx[:, g], state.b[:, g, :])
            lin = w_lik * (d.sum_xty[g] - xb) / state.sigma[g] ** 2
            chol = np.linalg.cholesky(prec)
            mean = np.linalg.solve(prec, lin)
            z = rng.standard_normal(d.m)
            cand = mean + np.linalg.solve(chol.T, z)
            if self.survival_on:
                coeffs = state.coeffs()
                coeffs[:, g, :] = cand[None, :] + state.b[:, g, :]
                ll_new = ws.subject_loglik_for_coeffs(coeffs).sum()
                ll_old = ws.loglik()
                accept = math.log(rng.uniform()) < ll_new - ll_old
            else:
                accept = True
            self.beta_accept.update(accept, False)
            if accept:
                state.beta[g] = cand
                if self.survival_on:
                    ws.commit_coeffs_rows(coeffs, np.ones(d.n, dtype=bool))

    def _update_b(self, state: ChainState, rng: np.random.Generator) -> None:
        d = self.design
        ws = d.workspace
        n, G, m = d.n, d.G, d.m
        dim = G * m
        w_lik = 1.0 if self.longitudinal_on else 0.0
        dense = state.cov.dense()
        dinv = np.linalg.inv(dense)
        prec = np.broadcast_to(dinv, (n, dim, dim)).copy()
        lin = np.zeros((n, dim))
        if w_lik:
            for g in range(G):
                sl = slice(g * m, (g + 1) * m)
                prec[:, sl, sl] += d.xtx[:, g] / state.sigma[g] ** 2
                resid = d.xty[:, g] - d.xtx[:, g] @ state.beta[g]
                lin[:, sl] = resid / state.sigma[g] ** 2
        chol = np.linalg.cholesky(prec)
        mean = np.linalg.solve(prec, lin[:, :, None])[:, :, 0]
        z = rng.standard_normal((n, dim))
        noise = np.linalg.solve(np.swapaxes(chol, 1, 2), z[:, :, None])[:, :, 0]
        cand_b = (mean + noise).reshape(n, G, m)
        if self.survival_on:
            coeffs_cand = state.beta[None, :, :] + cand_b
            ll_new = ws.subject_loglik_for_coeffs(coeffs_cand)
            ll_old = ws.loglik_per_subject()
            accept = np.log(rng.uniform(size=n)) < ll_new - ll_old
            state.b[accept] = cand_b[accept]
            ws.commit_coeffs_rows(coeffs_cand, accept)
            self.b_accepted += int(accept.sum())
            self.b_proposed += n
        else:
            state.b = cand_b
            self.b_accepted += n
            self.b_proposed += n

    def _update_cov(self, state: ChainState, rng: np.random.Generator) -> None:
        d = self.design
        df0 = d.G + d.spec.hyper.wishart_df_add
        blocks = []
        for p in range(d.m):
            bp = state.b[:, :, p]
            scale = np.eye(d.G) + bp.T @ bp
            blocks.append(invwishart.rvs(df=df0 + d.n, scale=scale, random_state=rng))
        blocks = [np.atleast_2d(bl) for bl in blocks]
        state.cov = BlockCovariance(blocks=tuple(0.5 * (bl + bl.T) for bl in blocks))

    def _update_sigma(self, state: ChainState, rng: np.random.Generator) -> None:
        d = self.design
        hyper = d.spec.hyper
        for g in range(d.G):
            if self.longitudinal_on:
                coeff = state.beta[g][None, :] + state.b[d.subj_idx[g], g, :]
                resid = d.y[g] - np.einsum("nm,nm->n", d.basis[g], coeff)
                shape = hyper.sigma_shape + resid.size / 2.0
                rate = hyper.sigma_rate + float(resid @ resid) / 2.0
            else:
                shape, rate = hyper.sigma_shape, hyper.sigma_rate
            state.sigma[g] = math.sqrt(1.0 / rng.gamma(shape, 1.0 / rate))

    def _update_spline(self, state: ChainState, rng: np.random.Generator, adapting: bool) -> None:
        d = self.design
        ws = d.workspace
        sd = d.spec.hyper.spline_sd
        cur_ll = ws.loglik() if self.survival_on else 0.0
        for qi in range(d.n_spline):
            stepper = self.spline_steps[qi]
            cand = state.spline.copy()
            cand[qi] += stepper.step * rng.standard_normal()
            ll_new = ws.loglik_spline(cand) if self.survival_on else 0.0
            log_ratio = (state.spline[qi] ** 2 - cand[qi] ** 2) / (2 * sd * sd) + ll_new - cur_ll
            accept = math.log(rng.uniform()) < log_ratio
            stepper.update(accept, adapting)
            if accept:
                state.spline = cand
                cur_ll = ll_new
        if self.survival_on:
            ws.commit_spline(state.spline)

    def _update_gamma(self, state: ChainState, rng: np.random.Generator, adapting: bool) -> None:
        d = self.design
        ws = d.workspace
        sd = d.spec.hyper.gamma_sd
        cur_ll = ws.loglik() if self.survival_on else 0.0
        for ci in range(d.n_cov):
            stepper = self.gamma_steps[ci]
            cand = state.gamma.copy()
            cand[ci] += stepper.step * rng.standard_normal()
            ll_new = ws.loglik_gamma(cand) if self.survival_on else 0.0
            log_ratio = (state.gamma[ci] ** 2 - cand[ci] ** 2) / (2 * sd * sd) + ll_new - cur_ll
            accept = math.log(rng.uniform()) < log_ratio
            stepper.update(accept, adapting)
            if accept:
                state.gamma = cand
                cur_ll = ll_new
        if self.survival_on:
            ws.commit_gamma(state.gamma)

    def _update_selection(self, state: ChainState, rng: np.random.Generator, adapting: bool) -> None:
        ws = self.design.workspace
        if self.survival_on:
            loglik = ws.loglik_alpha
        else:
            loglik = lambda alpha_flat: 0.0  # noqa: E731 - prior-only sampler
        self.updater.sweep(state.selection, loglik, rng, adapting)
        if self.survival_on:
            ws.commit_alpha(state.selection.alpha_flat())

    # -- full sweep -----------------------------------------------------------------

    def sweep(self, state: ChainState, rng: np.random.Generator, adapting: bool = False) -> None:
        try:
            self._update_beta(state, rng)
            self._update_b(state, rng)
            self._update_cov(state, rng)
            self._update_sigma(state, rng)
            self._update_spline(state, rng, adapting)
            self._update_gamma(state, rng, adapting)
            self._update_selection(state, rng, adapting)
        except IterationError:
            raise
        except FloatingPointError as exc:  # pragma: no cover - defensive
            raise IterationError(f"numeric failure at iteration {state.iteration}: {exc}") from exc
        state.iteration += 1

    def acceptance_ledger(self) -> dict[str, float]:
        ledger = {
            "beta": self.beta_accept.rate(),
            "random_effects": self.b_accepted / self.b_proposed if self.b_proposed else math.nan,
            "spline": float(np.mean([s.rate() for s in self.spline_steps]))
            if self.spline_steps
            else math.nan,
            "gamma": float(np.mean([s.rate() for s in self.gamma_steps]))
            if self.gamma_steps
            else math.nan,
        }
        ledger.update(self.updater.acceptance_rates())
        return ledger


def gibbs_sweep(
    state: ChainState,
    design: ModelDesign,
    updater: SelectionUpdater,
    rng: np.random.Generator,
    mode: str = "full",
    adapting: bool = False,
    kernel: SweepKernel | None = None,
) -> ChainState:
    """One full sweep; convenience wrapper over :class:`SweepKernel`."""
    kern = kernel or SweepKernel(design, updater, mode)
    if kernel is None:
        kern.sync_workspace(state)
    kern.sweep(state, rng, adapting)
    return state


# ---------------------------------------------------------------------------
# Chain driver
# ---------------------------------------------------------------------------


@dataclass
class ChainOutput:
    """Thinned post-burn-in draws plus run metadata."""

    alpha: np.ndarray  # (S, G, J) standardized coefficients
    group_ind: np.ndarray  # (S, G) int8
    feature_ind: np.ndarray  # (S, G, J) int8
    s2: np.ndarray  # (S,)
    inv_s2: np.ndarray  # (S,)
    group_prob: np.ndarray  # (S, G)
    scales: np.ndarray  # (G, J) feature standardization constants
    t_rate: float
    seed: int
    iterations: int
    burn_in: int
    thin: int
    acceptance: dict = field(default_factory=dict)
    wall_seconds: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def n_draws(self) -> int:
        return self.alpha.shape[0]

    def inclusion_frequency(self) -> np.ndarray:
        """Posterior inclusion frequency per (g, j)."""
        return self.feature_ind.mean(axis=0)

    def group_frequency(self) -> np.ndarray:
        return self.group_ind.mean(axis=0)

    def alpha_mean_raw(self) -> np.ndarray:
        """Posterior mean on the raw (unstandardized) feature scale."""
        return self.alpha.mean(axis=0) / self.scales


def _make_updater(spec: ModelSpec, t_rate: float) -> SelectionUpdater:
    h = spec.hyper
    return SelectionUpdater(
        prior=spec.prior,
        n_groups=spec.n_risk_factors,
        n_features=spec.n_features,
        group_beta=h.group_beta,
        feature_beta=h.feature_beta,
        ss_beta=h.ss_beta,
        t_rate=t_rate,
        literal_mixture_weights=h.literal_mixture_weights,
        fix_dirichlet_weights=h.fix_dirichlet_weights,
    )


def run_chain(
    spec: ModelSpec,
    design: ModelDesign,
    iterations: int,
    burn_in: int,
    thin: int,
    seed: int,
    mode: str = "full",
    t_rate: float | None = None,
    adapt: bool = True,
) -> ChainOutput:
    """Run one chain; deterministic given (spec, design data, seed)."""
    if iterations <= burn_in:
        raise ValueError("iterations must exceed burn_in (no post-burn-in draws)")
    rate = t_rate if t_rate is not None else spec.hyper.slab_rate
    updater = _make_updater(spec, rate)
    rng = np.random.default_rng(seed)
    state = initial_state(design, updater, rng)
    kernel = SweepKernel(design, updater, mode)
    kernel.sync_workspace(state)

    n_keep = (iterations - burn_in) // thin
    G, J = spec.n_risk_factors, spec.n_features
    out = ChainOutput(
        alpha=np.zeros((n_keep, G, J)),
        group_ind=np.zeros((n_keep, G), dtype=np.int8),
        feature_ind=np.zeros((n_keep, G, J), dtype=np.int8),
        s2=np.zeros(n_keep),
        inv_s2=np.zeros(n_keep),
        group_prob=np.zeros((n_keep, G)),
        scales=design.workspace.scales.copy(),
        t_rate=rate,
        seed=seed,
        iterations=iterations,
        burn_in=burn_in,
        thin=thin,
    )
    t0 = _time.perf_counter()
    kept = 0
    for it in range(iterations):
        adapting = adapt and it < burn_in
        try:
            kernel.sweep(state, rng, adapting)
        except IterationError as exc:
            raise IterationError(f"iteration {it}: {exc}", exc.state_dump) from exc
        if it >= burn_in and (it - burn_in) % thin == thin - 1:
            sel = state.selection
            out.alpha[kept] = sel.alpha()
            out.group_ind[kept] = sel.group_active
            out.feature_ind[kept] = sel.indicator().astype(np.int8)
            out.s2[kept] = sel.s2
            out.inv_s2[kept] = 1.0 / sel.s2
            out.group_prob[kept] = sel.group_prob
            kept += 1
    out.alpha = out.alpha[:kept]
    out.group_ind = out.group_ind[:kept]
    out.feature_ind = out.feature_ind[:kept]
    out.s2 = out.s2[:kept]
    out.inv_s2 = out.inv_s2[:kept]
    out.group_prob = out.group_prob[:kept]
    out.acceptance = kernel.acceptance_ledger()
    out.wall_seconds = _time.perf_counter() - t0
    return out


def fit_dataset(
    spec: ModelSpec,
    dataset: Dataset,
    chain: ChainSettings,
    seed: int,
    mode: str = "full",
) -> ChainOutput:
    """Full fitting pipeline: for the sparse-group priors this is the
    two-stage empirical-Bayes run (pilot at rate 1, final at the
    reciprocal posterior mean of 1/s^2)."""
    design = ModelDesign(dataset, spec)
    design.calibrate_scales()
    if spec.prior in ("BSGS-D", "BSGS-D-I", "BSGS") and chain.pilot_iterations > 0:
        pilot = run_chain(
            spec,
            design,
            iterations=chain.pilot_iterations,
            burn_in=chain.pilot_burn_in,
            thin=chain.thin,
            seed=seed,
            mode=mode,
            t_rate=spec.hyper.slab_rate,
            adapt=chain.adapt,
        )
        t_hat = empirical_t_update(pilot.inv_s2)
        final = run_chain(
            spec,
            design,
            iterations=chain.iterations,
            burn_in=chain.burn_in,
            thin=chain.thin,
            seed=seed + 1,
            mode=mode,
            t_rate=t_hat,
            adapt=chain.adapt,
        )
        final.meta["pilot_t_rate"] = spec.hyper.slab_rate
        final.meta["t_hat"] = t_hat
        return final
    return run_chain(
        spec,
        design,
        iterations=chain.iterations,
        burn_in=chain.burn_in,
        thin=chain.thin,
        seed=seed,
        mode=mode,
        adapt=chain.adapt,
    )


# ---------------------------------------------------------------------------
# Convergence diagnostics
# ---------------------------------------------------------------------------


def _split_rhat(chains: np.ndarray) -> float:
    """Variance-ratio PSRF on split half-chains.

    Defined as sqrt(1 + B/W) with B the variance of split means and W the
    mean within-split variance, so identical chains give exactly 1.
    """
    splits = []
    for c in chains:
        half = len(c) // 2
        if half < 1:
            raise ValueError("chains too short to split")
        splits.append(c[:half])
        splits.append(c[half : 2 * half])
    means = np.array([s.mean() for s in splits])
    variances = np.array([s.var(ddof=1) if len(s) > 1 else 0.0 for s in splits])
    w = variances.mean()
    b = means.var(ddof=0)
    if w == 0.0:
        return 1.0 if b == 0.0 else math.inf
    return math.sqrt(1.0 + b / w)


def effective_sample_size(draws: np.ndarray) -> float:
    """ESS via the initial-positive-sequence autocorrelation estimator."""
    x = np.asarray(draws, dtype=float)
    n = x.size
    if n < 4 or np.allclose(x, x[0]):
        return float(n)
    x = x - x.mean()
    acov = np.correlate(x, x, mode="full")[n - 1 :] / n
    if acov[0] == 0:
        return float(n)
    rho = acov / acov[0]
    s = 0.0
    t = 1
    while t + 1 < n:
        pair = rho[t] + rho[t + 1]
        if pair < 0:
            break
        s += pair
        t += 2
    return float(n / (1.0 + 2.0 * s))


@dataclass
class DiagnosticsReport:
    rhat: dict
    ess: dict
    indicator_spread: dict

    def render(self) -> str:
        lines = ["convergence diagnostics"]
        for name, value in sorted(self.rhat.items()):
            lines.append(f"  R-hat[{name}] = {value:.4f}   ESS = {self.ess[name]:.0f}")
        for name, value in sorted(self.indicator_spread.items()):
            lines.append(f"  inclusion-frequency spread[{name}] = {value:.3f}")
        return "\n".join(lines)


def diagnostics(outputs: list[ChainOutput]) -> DiagnosticsReport:
    """Split R-hat / ESS for continuous scalars; inclusion-frequency
    agreement across chains for the indicators."""
    if len(outputs) < 2:
        raise ValueError("diagnostics need at least two chains")
    G, J = outputs[0].alpha.shape[1], outputs[0].alpha.shape[2]
    rhat, ess = {}, {}
    series = {"s2": [o.s2 for o in outputs]}
    for g in range(G):
        for j in range(J):
            series[f"alpha[{g + 1},{j + 1}]"] = [o.alpha[:, g, j] for o in outputs]
    for name, chains in series.items():
        arr = [np.asarray(c) for c in chains]
        rhat[name] = _split_rhat(arr)
        ess[name] = float(sum(effective_sample_size(c) for c in arr))
    spread = {}
    freqs = np.stack([o.inclusion_frequency() for o in outputs])  # (chains, G, J)
    for g in range(G):
        for j in range(J):
            spread[f"feature[{g + 1},{j + 1}]"] = float(
                freqs[:, g, j].max() - freqs[:, g, j].min()
            )
    gfreqs = np.stack([o.group_frequency() for o in outputs])
    for g in range(G):
        spread[f"group[{g + 1}]"] = float(gfreqs[:, g].max() - gfreqs[:, g].min())
    return DiagnosticsReport(rhat=rhat, ess=ess, indicator_spread=spread)
