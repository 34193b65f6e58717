"""Bi-level spike-and-slab selection layers.

Four priors share one state layout and one likelihood interface (a
callable mapping a flat association-coefficient vector to a log
likelihood):

* ``BSGS-D``    - per-group inclusion probability pi_g with Beta prior;
  within an included group the active feature subset follows a
  categorical distribution over the 2^J - 1 nonempty masks with a
  Dirichlet prior whose per-cardinality weights are ordered half-Cauchy.
* ``BSGS-D-I``  - same, with binomial-scaled Dirichlet weights.
* ``BSGS``      - the original sparse-group prior: one shared group-level
  probability and one shared feature-level probability, independent
  feature indicators, both with conjugate Beta updates.
* ``SS``        - no group level; independent spike-and-slab on each
  coefficient with Beta(1, 10) inclusion probabilities and a Gaussian
  slab with Gamma-distributed precision.

Coefficients factor as alpha_gj = tau_gj * d_gj with tau_gj >= 0 the
half-normal magnitude (zero when excluded) and d_gj a standard-normal
slab coordinate.  Excluded coordinates keep prior-refreshed values
(Kuo-Mallick retention) so re-entry proposals cancel exactly against the
prior, making every indicator flip an exact Bernoulli draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .masks import (
    DirichletWeights,
    MaskCatalog,
    WeightVariant,
    build_concentration,
    enumerate_masks,
    q_to_pi,
)

__all__ = [
    "SelectionState",
    "SelectionUpdater",
    "empirical_t_update",
    "IterationError",
]

LogLik = Callable[[np.ndarray], float]

HALF_CAUCHY_LOGNORM = math.log(2.0 / math.pi)


class IterationError(RuntimeError):
    """Non-finite likelihood at the current state; carries a state dump."""

    def __init__(self, message: str, state_dump: dict | None = None) -> None:
        super().__init__(message)
        self.state_dump = state_dump or {}


def _half_cauchy_logpdf(x: float) -> float:
    return HALF_CAUCHY_LOGNORM - math.log1p(x * x)


def _dirichlet_logpdf(q: np.ndarray, conc: np.ndarray) -> float:
    from scipy.special import gammaln

    return float(
        gammaln(conc.sum()) - gammaln(conc).sum() + ((conc - 1.0) * np.log(q)).sum()
    )


def _bernoulli_from_logodds(logodds: float, rng: np.random.Generator) -> bool:
    if logodds == math.inf:
        return True
    if logodds == -math.inf:
        return False
    p = 1.0 / (1.0 + math.exp(-logodds))
    return bool(rng.uniform() < p)


class AdaptiveStep:
    """Robbins-Monro scalar step adaptation toward a target acceptance."""

    def __init__(self, init: float = 0.5, target: float = 0.44) -> None:
        self.log_step = math.log(init)
        self.target = target
        self.n = 0
        self.accepted = 0
        self.proposed = 0

    @property
    def step(self) -> float:
        return math.exp(self.log_step)

    def update(self, accepted: bool, adapting: bool) -> None:
        self.proposed += 1
        self.accepted += int(accepted)
        if adapting:
            self.n += 1
            gain = self.n ** -0.7
            self.log_step += gain * ((1.0 if accepted else 0.0) - self.target)
            self.log_step = min(max(self.log_step, -12.0), 6.0)

    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else math.nan


@dataclass
class SelectionState:
    """Full selection-layer state for one chain.

    ``mask_bits[g]`` is the active-feature subset of group g (a retained
    phantom subset while the group is excluded).  ``slab_t`` keeps the
    half-normal magnitudes and ``d`` the slab coordinates for every
    coordinate, active or not; ``feature_tau`` zeroes the excluded ones.
    """

    prior: str
    n_groups: int
    n_features: int
    group_active: np.ndarray  # (G,) bool
    mask_bits: np.ndarray  # (G,) int
    slab_t: np.ndarray  # (G, J)
    d: np.ndarray  # (G, J)
    group_prob: np.ndarray  # (G,)
    feature_prob: np.ndarray  # (G, J)
    q: np.ndarray | None  # (G, C) for BSGS-D variants
    dirichlet_a: np.ndarray | None  # (G, J)
    s2: float
    t_rate: float
    ss_tau2: float = 1.0  # slab precision of the SS prior

    def indicator(self) -> np.ndarray:
        j = np.arange(self.n_features)
        bits = (self.mask_bits[:, None] >> j[None, :]) & 1
        return bits.astype(float) * self.group_active[:, None]

    @property
    def feature_tau(self) -> np.ndarray:
        return self.slab_t * self.indicator()

    def alpha(self) -> np.ndarray:
        return self.feature_tau * self.d

    def alpha_flat(self) -> np.ndarray:
        return self.alpha().ravel()

    def to_dict(self) -> dict:
        out = {
            "prior": self.prior,
            "group_active": self.group_active.astype(int).tolist(),
            "mask_bits": self.mask_bits.tolist(),
            "slab_t": self.slab_t.tolist(),
            "d": self.d.tolist(),
            "group_prob": self.group_prob.tolist(),
            "feature_prob": self.feature_prob.tolist(),
            "s2": self.s2,
            "t_rate": self.t_rate,
            "ss_tau2": self.ss_tau2,
        }
        if self.q is not None:
            out["q"] = self.q.tolist()
            out["dirichlet_a"] = self.dirichlet_a.tolist()
        return out


def empirical_t_update(inv_s2_samples: np.ndarray) -> float:
    """Two-stage slab-rate estimate: reciprocal posterior mean of 1/s^2."""
    samples = np.asarray(inv_s2_samples, dtype=float)
    if samples.size == 0:
        raise ValueError("empirical rate update needs stored 1/s^2 samples")
    return float(1.0 / samples.mean())


class SelectionUpdater:
    """Metropolis-within-Gibbs updates for one chain's selection layer."""

    def __init__(
        self,
        prior: str,
        n_groups: int,
        n_features: int,
        group_beta: tuple[float, float] = (1.0, 1.0),
        feature_beta: tuple[float, float] = (1.0, 1.0),
        ss_beta: tuple[float, float] = (1.0, 10.0),
        t_rate: float = 1.0,
        literal_mixture_weights: bool = False,
        fix_dirichlet_weights: tuple[float, ...] | None = None,
    ) -> None:
        if prior not in ("BSGS-D", "BSGS-D-I", "BSGS", "SS"):
            raise ValueError(f"unknown selection prior {prior!r}")
        self.prior = prior
        self.G = n_groups
        self.J = n_features
        self.group_beta = group_beta
        self.feature_beta = feature_beta
        self.ss_beta = ss_beta
        self.t_rate = t_rate
        self.literal = literal_mixture_weights
        self.fixed_weights = fix_dirichlet_weights
        self.catalog: MaskCatalog = enumerate_masks(n_features)
        self.variant = (
            WeightVariant.BINOMIAL_SCALED if prior == "BSGS-D-I" else WeightVariant.PLAIN
        )
        self.steps_t = [[AdaptiveStep() for _ in range(self.J)] for _ in range(self.G)]
        self.steps_d = [[AdaptiveStep() for _ in range(self.J)] for _ in range(self.G)]
        self.steps_a = [[AdaptiveStep() for _ in range(self.J)] for _ in range(self.G)]

    # -- prior draws ---------------------------------------------------------

    def _draw_ordered_weights(self, rng: np.random.Generator) -> np.ndarray:
        if self.fixed_weights is not None:
            return np.asarray(self.fixed_weights, dtype=float)
        if self.variant is WeightVariant.PLAIN:
            vals = np.sort(np.abs(rng.standard_cauchy(self.J)))[::-1]
            return vals
        binom = np.array([math.comb(self.J, k) for k in range(1, self.J + 1)])
        for _ in range(100000):
            vals = np.abs(rng.standard_cauchy(self.J))
            if np.all(np.diff(vals / binom) < 0):
                return vals
        raise RuntimeError("could not draw ordered binomial-scaled weights")

    def draw_from_prior(self, rng: np.random.Generator) -> SelectionState:
        """Exact draw of the selection layer from its prior."""
        G, J = self.G, self.J
        s2 = 1.0 / rng.gamma(1.0, 1.0 / self.t_rate)
        state = SelectionState(
            prior=self.prior,
            n_groups=G,
            n_features=J,
            group_active=np.ones(G, dtype=bool),
            mask_bits=np.zeros(G, dtype=np.int64),
            slab_t=np.abs(rng.standard_normal((G, J))) * math.sqrt(s2),
            d=rng.standard_normal((G, J)),
            group_prob=np.ones(G),
            feature_prob=np.zeros((G, J)),
            q=None,
            dirichlet_a=None,
            s2=s2,
            t_rate=self.t_rate,
        )
        if self.prior in ("BSGS-D", "BSGS-D-I"):
            a, b = self.group_beta
            state.group_prob = rng.beta(a, b, size=G)
            state.group_active = rng.uniform(size=G) < self._incl(state.group_prob)
            state.dirichlet_a = np.stack([self._draw_ordered_weights(rng) for _ in range(G)])
            state.q = np.empty((G, len(self.catalog)))
            for g in range(G):
                conc = self._concentration(state.dirichlet_a[g])
                state.q[g] = self._safe_dirichlet(conc, rng)
                state.feature_prob[g] = q_to_pi(state.q[g], self.catalog)
                state.mask_bits[g] = self.catalog.masks[
                    rng.choice(len(self.catalog), p=state.q[g])
                ].bits
        elif self.prior == "BSGS":
            a, b = self.group_beta
            c, dd = self.feature_beta
            pi0 = rng.beta(a, b)
            pi1 = rng.beta(c, dd)
            state.group_prob = np.full(G, pi0)
            state.feature_prob = np.full((G, J), pi1)
            state.group_active = rng.uniform(size=G) < self._incl(pi0)
            incl = rng.uniform(size=(G, J)) < self._incl(pi1)
            state.mask_bits = self._bits_from_bool(incl)
        else:  # SS
            c, dd = self.ss_beta
            state.group_active = np.ones(G, dtype=bool)
            state.feature_prob = rng.beta(c, dd, size=(G, J))
            state.ss_tau2 = rng.gamma(1.0, 1.0)
            state.slab_t = np.ones((G, J))
            state.d = rng.standard_normal((G, J)) / math.sqrt(state.ss_tau2)
            incl = rng.uniform(size=(G, J)) < self._incl(state.feature_prob)
            state.mask_bits = self._bits_from_bool(incl)
        return state

    def initial_state(self, rng: np.random.Generator) -> SelectionState:
        """Warm start: everything included with small magnitudes."""
        G, J = self.G, self.J
        full = (1 << J) - 1
        state = SelectionState(
            prior=self.prior,
            n_groups=G,
            n_features=J,
            group_active=np.ones(G, dtype=bool),
            mask_bits=np.full(G, full, dtype=np.int64),
            slab_t=np.full((G, J), 0.1),
            d=np.full((G, J), 0.1),
            group_prob=np.full(G, 0.5),
            feature_prob=np.full((G, J), 0.5),
            q=None,
            dirichlet_a=None,
            s2=1.0,
            t_rate=self.t_rate,
        )
        if self.prior in ("BSGS-D", "BSGS-D-I"):
            init_w = (
                np.asarray(self.fixed_weights, dtype=float)
                if self.fixed_weights is not None
                else np.arange(J, 0, -1, dtype=float)
            )
            state.dirichlet_a = np.tile(init_w, (G, 1))
            state.q = np.empty((G, len(self.catalog)))
            for g in range(G):
                conc = self._concentration(state.dirichlet_a[g])
                state.q[g] = conc / conc.sum()
                state.feature_prob[g] = q_to_pi(state.q[g], self.catalog)
        if self.prior == "SS":
            state.slab_t = np.ones((G, J))
        return state

    # -- helpers ---------------------------------------------------------------

    def _incl(self, pi):
        """Inclusion probability under the configured mixture reading."""
        return (1.0 - pi) if self.literal else pi

    @staticmethod
    def _bits_from_bool(incl: np.ndarray) -> np.ndarray:
        J = incl.shape[1]
        weights = (1 << np.arange(J)).astype(np.int64)
        return (incl.astype(np.int64) * weights).sum(axis=1)

    def _concentration(self, weights_row: np.ndarray) -> np.ndarray:
        w = DirichletWeights(values=tuple(weights_row), variant=self.variant)
        return build_concentration(w, self.catalog)

    @staticmethod
    def _safe_dirichlet(conc: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        q = rng.dirichlet(conc)
        q = np.clip(q, 1e-290, None)
        return q / q.sum()

    def _ordering_ok(self, weights_row: np.ndarray) -> bool:
        if np.any(weights_row <= 0):
            return False
        if self.variant is WeightVariant.PLAIN:
            seq = weights_row
        else:
            binom = np.array([math.comb(self.J, k) for k in range(1, self.J + 1)])
            seq = weights_row / binom
        return bool(np.all(np.diff(seq) < 0))

    @staticmethod
    def _row_alpha(state: SelectionState, g: int) -> np.ndarray:
        j = np.arange(state.n_features)
        ind = ((state.mask_bits[g] >> j) & 1).astype(float)
        return state.slab_t[g] * ind * state.d[g]

    def _check_finite(self, value: float, state: SelectionState, where: str) -> None:
        if math.isnan(value):
            raise IterationError(
                f"non-finite log likelihood during {where}", state.to_dict()
            )

    # -- sweep -----------------------------------------------------------------

    def sweep(
        self,
        state: SelectionState,
        loglik: LogLik,
        rng: np.random.Generator,
        adapting: bool = False,
    ) -> float:
        """One full selection-layer pass; returns the final log likelihood."""
        alpha = state.alpha()
        cur_ll = loglik(alpha.ravel())
        self._check_finite(cur_ll, state, "sweep entry")
        if self.prior == "SS":
            return self._sweep_ss(state, alpha, cur_ll, loglik, rng, adapting)
        for g in range(self.G):
            self._refresh_excluded(state, g, rng)
            cur_ll = self._update_group(state, alpha, cur_ll, g, loglik, rng)
            if state.group_active[g]:
                for j in range(self.J):
                    cur_ll = self._update_feature(
                        state, alpha, cur_ll, g, j, loglik, rng, adapting
                    )
            if self.prior in ("BSGS-D", "BSGS-D-I"):
                self._update_group_prob(state, g, rng)
                self._update_q_and_weights(state, g, rng, adapting)
        if self.prior == "BSGS":
            self._update_shared_probs(state, rng)
        self._update_slab_variance(state, rng)
        return cur_ll

    # Refreshing excluded coordinates never changes the likelihood: only
    # coordinates with zero effective coefficient move.
    def _refresh_excluded(self, state: SelectionState, g: int, rng: np.random.Generator) -> None:
        s = math.sqrt(state.s2)
        if self.prior in ("BSGS-D", "BSGS-D-I"):
            if not state.group_active[g]:
                state.mask_bits[g] = self.catalog.masks[
                    rng.choice(len(self.catalog), p=state.q[g])
                ].bits
                state.slab_t[g] = np.abs(rng.standard_normal(self.J)) * s
                state.d[g] = rng.standard_normal(self.J)
            else:
                for j in range(self.J):
                    if not (state.mask_bits[g] >> j) & 1:
                        state.slab_t[g, j] = abs(rng.standard_normal()) * s
                        state.d[g, j] = rng.standard_normal()
        else:  # BSGS
            pi1 = self._incl(state.feature_prob[0, 0])
            if not state.group_active[g]:
                incl = rng.uniform(size=self.J) < pi1
                state.mask_bits[g] = self._bits_from_bool(incl[None, :])[0]
                state.slab_t[g] = np.abs(rng.standard_normal(self.J)) * s
                state.d[g] = rng.standard_normal(self.J)
            else:
                for j in range(self.J):
                    if not (state.mask_bits[g] >> j) & 1:
                        state.slab_t[g, j] = abs(rng.standard_normal()) * s
                        state.d[g, j] = rng.standard_normal()

    def _update_group(
        self,
        state: SelectionState,
        alpha: np.ndarray,
        cur_ll: float,
        g: int,
        loglik: LogLik,
        rng: np.random.Generator,
    ) -> float:
        row_on = self._row_alpha(state, g)
        cand = alpha.copy()
        cand[g] = row_on
        ll_on = loglik(cand.ravel()) if not state.group_active[g] else cur_ll
        cand[g] = 0.0
        ll_off = loglik(cand.ravel()) if state.group_active[g] else cur_ll
        self._check_finite(ll_on if state.group_active[g] else ll_off, state, "group flip")
        pi = self._incl(state.group_prob[g])
        if pi <= 0.0:
            logodds = -math.inf
        elif pi >= 1.0:
            logodds = math.inf
        else:
            logodds = math.log(pi) - math.log1p(-pi) + ll_on - ll_off
        include = _bernoulli_from_logodds(logodds, rng)
        state.group_active[g] = include
        alpha[g] = row_on if include else 0.0
        return ll_on if include else ll_off

    def _update_group_prob(self, state, g: int, rng: np.random.Generator) -> None:
        a, b = self.group_beta
        z = 1.0 if state.group_active[g] else 0.0
        obs = z if not self.literal else 1.0 - z
        state.group_prob[g] = rng.beta(a + obs, b + 1.0 - obs)

    def _update_feature(
        self,
        state: SelectionState,
        alpha: np.ndarray,
        cur_ll: float,
        g: int,
        j: int,
        loglik: LogLik,
        rng: np.random.Generator,
        adapting: bool,
    ) -> float:
        in_mask = bool((state.mask_bits[g] >> j) & 1)
        mask_in = int(state.mask_bits[g]) | (1 << j)
        mask_out = int(state.mask_bits[g]) & ~(1 << j)
        if self.prior in ("BSGS-D", "BSGS-D-I") and not self.literal:
            # Mask-categorical prior: odds are mask-probability ratios and
            # the empty subset is forbidden while the group is active.
            if mask_out == 0:
                log_prior_odds = math.inf
            else:
                q_in = state.q[g][self.catalog.index_of(mask_in)]
                q_out = state.q[g][self.catalog.index_of(mask_out)]
                if q_in <= 0.0 and q_out <= 0.0:
                    log_prior_odds = 0.0
                elif q_out <= 0.0:
                    log_prior_odds = math.inf
                elif q_in <= 0.0:
                    log_prior_odds = -math.inf
                else:
                    log_prior_odds = math.log(q_in) - math.log(q_out)
        else:
            pi = self._incl(state.feature_prob[g, j])
            if pi <= 0.0:
                log_prior_odds = -math.inf
            elif pi >= 1.0:
                log_prior_odds = math.inf
            else:
                log_prior_odds = math.log(pi) - math.log1p(-pi)

        val_in = state.slab_t[g, j] * state.d[g, j]
        cand = alpha.copy()
        cand[g, j] = val_in
        ll_in = loglik(cand.ravel()) if not in_mask else cur_ll
        cand[g, j] = 0.0
        ll_out = loglik(cand.ravel()) if in_mask else cur_ll
        if log_prior_odds == math.inf:
            include = True
        elif log_prior_odds == -math.inf:
            include = False
        else:
            include = _bernoulli_from_logodds(log_prior_odds + ll_in - ll_out, rng)
        if include:
            state.mask_bits[g] = mask_in
            alpha[g, j] = val_in
            cur_ll = ll_in
        else:
            state.mask_bits[g] = mask_out
            alpha[g, j] = 0.0
            cur_ll = ll_out

        if include:
            cur_ll = self._metropolis_t(state, alpha, cur_ll, g, j, loglik, rng, adapting)
            cur_ll = self._metropolis_d(state, alpha, cur_ll, g, j, loglik, rng, adapting)
        return cur_ll

    def _metropolis_t(self, state, alpha, cur_ll, g, j, loglik, rng, adapting) -> float:
        stepper = self.steps_t[g][j]
        t_old = state.slab_t[g, j]
        t_new = abs(t_old + stepper.step * rng.standard_normal())
        cand = alpha.copy()
        cand[g, j] = t_new * state.d[g, j]
        ll_new = loglik(cand.ravel())
        log_ratio = (t_old * t_old - t_new * t_new) / (2.0 * state.s2) + ll_new - cur_ll
        accept = math.log(rng.uniform()) < log_ratio
        stepper.update(accept, adapting)
        if accept:
            state.slab_t[g, j] = t_new
            alpha[g, j] = cand[g, j]
            return ll_new
        return cur_ll

    def _metropolis_d(self, state, alpha, cur_ll, g, j, loglik, rng, adapting) -> float:
        stepper = self.steps_d[g][j]
        d_old = state.d[g, j]
        d_new = d_old + stepper.step * rng.standard_normal()
        cand = alpha.copy()
        cand[g, j] = state.slab_t[g, j] * d_new
        ll_new = loglik(cand.ravel())
        log_ratio = (d_old * d_old - d_new * d_new) / 2.0 + ll_new - cur_ll
        accept = math.log(rng.uniform()) < log_ratio
        stepper.update(accept, adapting)
        if accept:
            state.d[g, j] = d_new
            alpha[g, j] = cand[g, j]
            return ll_new
        return cur_ll

    def _update_q_and_weights(
        self, state: SelectionState, g: int, rng: np.random.Generator, adapting: bool
    ) -> None:
        conc = self._concentration(state.dirichlet_a[g])
        post = conc.copy()
        if state.group_active[g] and state.mask_bits[g] != 0:
            post[self.catalog.index_of(int(state.mask_bits[g]))] += 1.0
        state.q[g] = self._safe_dirichlet(post, rng)
        if self.fixed_weights is None:
            for j in range(self.J):
                stepper = self.steps_a[g][j]
                a_old = state.dirichlet_a[g, j]
                a_new = a_old * math.exp(stepper.step * rng.standard_normal())
                row = state.dirichlet_a[g].copy()
                row[j] = a_new
                if not self._ordering_ok(row):
                    stepper.update(False, adapting)
                    continue
                conc_old = self._concentration(state.dirichlet_a[g])
                conc_new = self._concentration(row)
                log_ratio = (
                    _half_cauchy_logpdf(a_new)
                    - _half_cauchy_logpdf(a_old)
                    + _dirichlet_logpdf(state.q[g], conc_new)
                    - _dirichlet_logpdf(state.q[g], conc_old)
                    + math.log(a_new)
                    - math.log(a_old)
                )
                accept = math.log(rng.uniform()) < log_ratio
                stepper.update(accept, adapting)
                if accept:
                    state.dirichlet_a[g, j] = a_new
        state.feature_prob[g] = q_to_pi(state.q[g], self.catalog)

    def _update_shared_probs(self, state: SelectionState, rng: np.random.Generator) -> None:
        a, b = self.group_beta
        c, dd = self.feature_beta
        z_groups = state.group_active.astype(float)
        obs_g = z_groups if not self.literal else 1.0 - z_groups
        pi0 = rng.beta(a + obs_g.sum(), b + self.G - obs_g.sum())
        active = state.group_active
        if np.any(active):
            ind = state.indicator()[active]
            obs_f = ind if not self.literal else 1.0 - ind
            pi1 = rng.beta(c + obs_f.sum(), dd + obs_f.size - obs_f.sum())
        else:
            pi1 = rng.beta(c, dd)
        state.group_prob[:] = pi0
        state.feature_prob[:, :] = pi1

    def _update_slab_variance(self, state: SelectionState, rng: np.random.Generator) -> None:
        taus = state.feature_tau[state.indicator() > 0]
        shape = 1.0 + taus.size / 2.0
        rate = state.t_rate + float(np.sum(taus * taus)) / 2.0
        inv_s2 = rng.gamma(shape, 1.0 / rate)
        state.s2 = 1.0 / inv_s2

    # -- SS prior ----------------------------------------------------------------

    def _sweep_ss(
        self,
        state: SelectionState,
        alpha: np.ndarray,
        cur_ll: float,
        loglik: LogLik,
        rng: np.random.Generator,
        adapting: bool,
    ) -> float:
        c, dd = self.ss_beta
        slab_sd = 1.0 / math.sqrt(state.ss_tau2)
        state.slab_t[:, :] = 1.0
        for g in range(self.G):
            for j in range(self.J):
                in_mask = bool((state.mask_bits[g] >> j) & 1)
                if not in_mask:
                    state.d[g, j] = rng.standard_normal() * slab_sd
                pi = self._incl(state.feature_prob[g, j])
                val_in = state.d[g, j]
                cand = alpha.copy()
                cand[g, j] = val_in
                ll_in = loglik(cand.ravel()) if not in_mask else cur_ll
                cand[g, j] = 0.0
                ll_out = loglik(cand.ravel()) if in_mask else cur_ll
                self._check_finite(ll_in if in_mask else ll_out, state, "ss flip")
                if pi <= 0.0:
                    include = False
                elif pi >= 1.0:
                    include = True
                else:
                    include = _bernoulli_from_logodds(
                        math.log(pi) - math.log1p(-pi) + ll_in - ll_out, rng
                    )
                if include:
                    state.mask_bits[g] |= 1 << j
                    alpha[g, j] = val_in
                    cur_ll = ll_in
                    cur_ll = self._metropolis_ss_slab(
                        state, alpha, cur_ll, g, j, loglik, rng, adapting
                    )
                else:
                    state.mask_bits[g] &= ~(1 << j)
                    alpha[g, j] = 0.0
                    cur_ll = ll_out
                z = 1.0 if include else 0.0
                obs = z if not self.literal else 1.0 - z
                state.feature_prob[g, j] = rng.beta(c + obs, dd + 1.0 - obs)
        # Conjugate Gamma update of the slab precision from included values.
        incl = state.indicator() > 0
        vals = state.d[incl]
        shape = 1.0 + vals.size / 2.0
        rate = 1.0 + float(np.sum(vals * vals)) / 2.0
        state.ss_tau2 = rng.gamma(shape, 1.0 / rate)
        return cur_ll

    def _metropolis_ss_slab(self, state, alpha, cur_ll, g, j, loglik, rng, adapting) -> float:
        stepper = self.steps_d[g][j]
        d_old = state.d[g, j]
        d_new = d_old + stepper.step * rng.standard_normal()
        cand = alpha.copy()
        cand[g, j] = d_new
        ll_new = loglik(cand.ravel())
        log_ratio = state.ss_tau2 * (d_old * d_old - d_new * d_new) / 2.0 + ll_new - cur_ll
        accept = math.log(rng.uniform()) < log_ratio
        stepper.update(accept, adapting)
        if accept:
            state.d[g, j] = d_new
            alpha[g, j] = d_new
            return ll_new
        return cur_ll

    def acceptance_rates(self) -> dict[str, float]:
        def avg(steps) -> float:
            rates = [s.rate() for row in steps for s in row if s.proposed]
            return float(np.mean(rates)) if rates else math.nan

        return {
            "slab_t": avg(self.steps_t),
            "slab_d": avg(self.steps_d),
            "dirichlet_a": avg(self.steps_a),
        }
