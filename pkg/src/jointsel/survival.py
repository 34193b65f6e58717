"""Proportional-hazards submodel with trajectory features.

The hazard for subject i at study time u is

    lambda_i(u) = lambda_0(u) * exp(w_i^T gamma + sum_gj alpha_gj f_gj(age_i(u)))

where age_i(u) = baseline age + u, log lambda_0 is a B-spline expansion,
and f_gj are the four trajectory features (value, slope, area, threshold)
of the g-th risk factor, scaled to comparable magnitudes.  Cumulative
hazards are Gauss-Legendre quadratures of the hazard.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .longitudinal import legendre_area_basis, legendre_basis, legendre_slope_basis

__all__ = [
    "bspline_knot_vector",
    "bspline_basis",
    "feature_value",
    "feature_slope",
    "feature_area",
    "feature_threshold",
    "SubjectHazard",
    "log_hazard",
    "cumulative_hazard",
    "survival_loglik",
    "SurvivalWorkspace",
]

logger = logging.getLogger(__name__)

N_FEATURES = 4  # value, slope, area, threshold
FEATURE_NAMES = ("value", "slope", "area", "threshold")


@lru_cache(maxsize=16)
def gauss_legendre(n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    return x, w


# ---------------------------------------------------------------------------
# B-spline basis
# ---------------------------------------------------------------------------


def bspline_knot_vector(
    interior: np.ndarray, lo: float, hi: float, degree: int
) -> np.ndarray:
    """Clamped knot vector: degree+1 copies of each boundary around the
    strictly ascending interior knots."""
    interior = np.asarray(interior, dtype=float)
    if interior.size and (np.any(np.diff(interior) <= 0)):
        raise ValueError("interior knots must be strictly ascending")
    if interior.size and (interior[0] <= lo or interior[-1] >= hi):
        raise ValueError("interior knots must lie strictly inside (lo, hi)")
    if hi <= lo:
        raise ValueError("knot span is empty")
    return np.concatenate(
        [np.full(degree + 1, lo), interior, np.full(degree + 1, hi)]
    )


def bspline_basis(t, knots: np.ndarray, degree: int) -> np.ndarray:
    """Cox-de Boor B-spline basis values; last axis has
    len(knots) - degree - 1 components summing to one on the span.

    Times outside the span are clamped to the boundary; this happens when
    candidate event times wander past the fitted range and is logged once
    per call rather than raised.
    """
    knots = np.asarray(knots, dtype=float)
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    flat = np.atleast_1d(t).astype(float).ravel()
    lo, hi = knots[0], knots[-1]
    n_basis = len(knots) - degree - 1
    if n_basis < 1:
        raise ValueError("knot vector too short for requested degree")

    oob = (flat < lo) | (flat > hi)
    if np.any(oob):
        logger.warning(
            "clamping %d evaluation time(s) outside spline span [%g, %g]",
            int(oob.sum()),
            lo,
            hi,
        )
        flat = np.clip(flat, lo, hi)

    out = np.zeros((flat.size, n_basis))
    # Degree-0 seed: right-open indicator cells, except the last cell
    # which closes at hi so the basis sums to one at the right endpoint.
    cells = np.zeros((flat.size, len(knots) - 1))
    for q in range(len(knots) - 1):
        if knots[q + 1] <= knots[q]:
            continue
        inside = (flat >= knots[q]) & (flat < knots[q + 1])
        if knots[q + 1] == hi:
            inside |= flat == hi
        cells[inside, q] = 1.0
    # Elevate degree.
    for d in range(1, degree + 1):
        new = np.zeros((flat.size, len(knots) - d - 1))
        for q in range(len(knots) - d - 1):
            left_den = knots[q + d] - knots[q]
            right_den = knots[q + d + 1] - knots[q + 1]
            term = 0.0
            if left_den > 0:
                term = (flat - knots[q]) / left_den * cells[:, q]
            if right_den > 0:
                term = term + (knots[q + d + 1] - flat) / right_den * cells[:, q + 1]
            new[:, q] = term
        cells = new
    out = cells[:, :n_basis]
    shaped = out.reshape(np.atleast_1d(t).shape + (n_basis,))
    return shaped[0] if scalar else shaped


# ---------------------------------------------------------------------------
# Trajectory features
# ---------------------------------------------------------------------------


def feature_value(beta_g, b_ig, age, a_max: float):
    """Current value of the true trajectory at the given age."""
    coeffs = np.asarray(beta_g, dtype=float) + np.asarray(b_ig, dtype=float)
    return legendre_basis(age, a_max, order=len(coeffs) - 1) @ coeffs


def feature_slope(beta_g, b_ig, age, a_max: float):
    """Instantaneous slope of the true trajectory."""
    coeffs = np.asarray(beta_g, dtype=float) + np.asarray(b_ig, dtype=float)
    return legendre_slope_basis(age, a_max, order=len(coeffs) - 1) @ coeffs


def feature_area(beta_g, b_ig, age, a_max: float, t0: float = 0.0, n_nodes: int = 15):
    """Cumulative area under the trajectory from t0 to the given age,
    by Gauss-Legendre quadrature (exact here since mu is polynomial)."""
    age_arr = np.asarray(age, dtype=float)
    if np.any(age_arr < t0):
        raise ValueError("area feature needs age >= lower limit t0")
    coeffs = np.asarray(beta_g, dtype=float) + np.asarray(b_ig, dtype=float)
    x, w = gauss_legendre(n_nodes)
    half = (age_arr - t0) / 2.0
    nodes = t0 + half[..., None] * (x + 1.0)
    basis = legendre_basis(nodes, a_max, order=len(coeffs) - 1)
    vals = basis @ coeffs
    return half * (vals @ w)


def feature_threshold(beta_g, b_ig, age, a_max: float, threshold: float):
    """Indicator that the trajectory strictly exceeds the threshold."""
    vals = feature_value(beta_g, b_ig, age, a_max)
    return (np.asarray(vals) > threshold).astype(float)


# ---------------------------------------------------------------------------
# Single-subject hazard (functional form; simulator and tests)
# ---------------------------------------------------------------------------


@dataclass
class SubjectHazard:
    """Everything needed to evaluate one subject's hazard over study time.

    ``log_base`` maps study times to log lambda_0, ``features`` maps study
    times to the scaled feature matrix with last axis of length G*J
    (flattened g-major), and ``offset`` is w_i^T gamma.
    """

    log_base: Callable[[np.ndarray], np.ndarray]
    features: Callable[[np.ndarray], np.ndarray]
    alpha_flat: np.ndarray
    offset: float = 0.0


def log_hazard(subject: SubjectHazard, t) -> np.ndarray:
    """log lambda_i(t); excluded features (alpha = 0) contribute exactly 0."""
    t = np.asarray(t, dtype=float)
    lin = subject.features(t) @ subject.alpha_flat
    return subject.log_base(t) + subject.offset + lin


def cumulative_hazard(subject: SubjectHazard, t: float, n_nodes: int = 15) -> float:
    """H_i(t) = int_0^t lambda_i(s) ds via Gauss-Legendre quadrature."""
    if t < 0:
        raise ValueError("cumulative hazard needs t >= 0")
    if t == 0:
        return 0.0
    x, w = gauss_legendre(n_nodes)
    half = t / 2.0
    nodes = half * (x + 1.0)
    return float(half * np.exp(log_hazard(subject, nodes)) @ w)


def survival_loglik(
    subject: SubjectHazard, time: float, event: bool, n_nodes: int = 15
) -> float:
    """delta * log lambda(T) - H(T) for one subject."""
    ll = -cumulative_hazard(subject, time, n_nodes)
    if event:
        ll += float(log_hazard(subject, time))
    return ll


# ---------------------------------------------------------------------------
# Vectorized likelihood workspace for the sampler
# ---------------------------------------------------------------------------


class SurvivalWorkspace:
    """Caches every fixed design quantity of the survival likelihood and
    maintains the feature/linear-predictor state for fast updates.

    The per-subject log likelihood is

        ll_i = delta_i * (base_T + w gamma + f_T alpha) - H_i
        H_i  = (T_i / 2) * sum_k omega_k exp(base_ik + w gamma + F_ik alpha)

    where base is the log baseline hazard at the quadrature nodes (study
    time) and F are scaled features at the node ages.  All mutating
    methods keep the caches consistent.
    """

    def __init__(
        self,
        times: np.ndarray,
        events: np.ndarray,
        covariates: np.ndarray,
        baseline_ages: np.ndarray,
        a_max: float,
        order: int,
        thresholds: np.ndarray,
        knots: np.ndarray,
        degree: int,
        n_nodes: int = 15,
        area_t0: float = 0.0,
    ) -> None:
        self.times = np.asarray(times, dtype=float)
        self.events = np.asarray(events, dtype=bool)
        self.w = np.atleast_2d(np.asarray(covariates, dtype=float))
        if self.w.shape[0] != self.times.size:
            self.w = self.w.T
        self.a0 = np.asarray(baseline_ages, dtype=float)
        self.a_max = float(a_max)
        self.order = order
        self.m = order + 1
        self.G = len(thresholds)
        self.thresholds = np.asarray(thresholds, dtype=float)
        self.knots = np.asarray(knots, dtype=float)
        self.degree = degree
        self.n_nodes = n_nodes
        self.area_t0 = float(area_t0)

        n = self.times.size
        x, wt = gauss_legendre(n_nodes)
        self.half_t = self.times / 2.0  # (n,)
        self.quad_w = wt  # (K,)
        study_nodes = self.half_t[:, None] * (x + 1.0)[None, :]  # (n, K)
        node_ages = np.minimum(self.a0[:, None] + study_nodes, self.a_max)
        event_ages = np.minimum(self.a0 + self.times, self.a_max)

        self.phi_val = legendre_basis(node_ages, a_max, order)  # (n, K, m)
        self.phi_slope = legendre_slope_basis(node_ages, a_max, order)
        self.phi_area = self._area_basis(node_ages)
        self.phi_val_T = legendre_basis(event_ages, a_max, order)  # (n, m)
        self.phi_slope_T = legendre_slope_basis(event_ages, a_max, order)
        self.phi_area_T = self._area_basis(event_ages)

        nb = len(self.knots) - degree - 1
        b_nodes = bspline_basis(study_nodes, self.knots, degree)  # (n, K, nb)
        b_T = bspline_basis(self.times, self.knots, degree)  # (n, nb)
        ones_nodes = np.ones(b_nodes.shape[:-1] + (1,))
        self.spline_design = np.concatenate([ones_nodes, b_nodes], axis=-1)
        self.spline_design_T = np.concatenate([np.ones((n, 1)), b_T], axis=-1)
        self.n_spline = nb + 1

        self.scales = np.ones((self.G, N_FEATURES))
        # Mutable state caches, populated by set_state.
        self.F: np.ndarray | None = None  # (n, K, G*J) scaled features
        self.fT: np.ndarray | None = None  # (n, G*J)
        self.base: np.ndarray | None = None  # (n, K)
        self.base_T: np.ndarray | None = None  # (n,)
        self.wg: np.ndarray | None = None  # (n,)
        self.lin: np.ndarray | None = None  # (n, K) F @ alpha
        self.lin_T: np.ndarray | None = None  # (n,)
        self.alpha_flat = np.zeros(self.G * N_FEATURES)

    # -- fixed-design helpers ------------------------------------------------

    def _area_basis(self, ages: np.ndarray) -> np.ndarray:
        """Quadrature of the value basis from t0 to each age (last axis m)."""
        x, wt = gauss_legendre(self.n_nodes)
        half = (ages - self.area_t0) / 2.0
        nodes = self.area_t0 + half[..., None] * (x + 1.0)
        basis = legendre_basis(nodes, self.a_max, self.order)
        return half[..., None] * np.einsum("...lm,l->...m", basis, wt)

    # -- feature construction --------------------------------------------------

    def raw_features(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Unscaled features at quadrature nodes and at event times.

        coeffs has shape (n, G, m) = beta_g + b_ig per subject and factor.
        Returns (n, K, G, J) and (n, G, J).
        """
        val = np.einsum("nkm,ngm->nkg", self.phi_val, coeffs)
        slope = np.einsum("nkm,ngm->nkg", self.phi_slope, coeffs)
        area = np.einsum("nkm,ngm->nkg", self.phi_area, coeffs)
        thr = (val > self.thresholds[None, None, :]).astype(float)
        nodes = np.stack([val, slope, area, thr], axis=-1)
        val_t = np.einsum("nm,ngm->ng", self.phi_val_T, coeffs)
        slope_t = np.einsum("nm,ngm->ng", self.phi_slope_T, coeffs)
        area_t = np.einsum("nm,ngm->ng", self.phi_area_T, coeffs)
        thr_t = (val_t > self.thresholds[None, :]).astype(float)
        at_t = np.stack([val_t, slope_t, area_t, thr_t], axis=-1)
        return nodes, at_t

    def scaled_features(self, coeffs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        nodes, at_t = self.raw_features(coeffs)
        n = coeffs.shape[0]
        nodes = (nodes / self.scales).reshape(n, self.n_nodes, -1)
        at_t = (at_t / self.scales).reshape(n, -1)
        return nodes, at_t

    def calibrate_scales(self, coeffs: np.ndarray, floor: float = 1e-6) -> np.ndarray:
        """Fix feature scales to the empirical SD of features evaluated at
        the observed event/censoring times under the given trajectories."""
        _, at_t = self.raw_features(coeffs)
        sd = at_t.std(axis=0)
        sd[sd < floor] = 1.0
        self.scales = sd
        return sd

    # -- state management ------------------------------------------------------

    def set_state(
        self,
        coeffs: np.ndarray,
        alpha_flat: np.ndarray,
        spline_coeffs: np.ndarray,
        gamma: np.ndarray,
    ) -> None:
        """Rebuild every cache from a full parameter state."""
        self.F, self.fT = self.scaled_features(coeffs)
        self.alpha_flat = np.asarray(alpha_flat, dtype=float).copy()
        self.base = self.spline_design @ spline_coeffs
        self.base_T = self.spline_design_T @ spline_coeffs
        self.wg = self.w @ np.asarray(gamma, dtype=float)
        self.lin = self.F @ self.alpha_flat
        self.lin_T = self.fT @ self.alpha_flat

    def _loglik_from(self, base, base_t, wg, lin, lin_t) -> tuple[float, np.ndarray]:
        expo = base + wg[:, None] + lin
        with np.errstate(over="ignore"):
            hz = np.exp(expo)
        h = self.half_t * (hz @ self.quad_w)
        ll = np.where(self.events, base_t + wg + lin_t, 0.0) - h
        return float(ll.sum()), ll

    def loglik(self) -> float:
        total, _ = self._loglik_from(self.base, self.base_T, self.wg, self.lin, self.lin_T)
        return total

    def loglik_per_subject(self) -> np.ndarray:
        _, ll = self._loglik_from(self.base, self.base_T, self.wg, self.lin, self.lin_T)
        return ll

    def cumulative_hazards(self) -> np.ndarray:
        expo = self.base + self.wg[:, None] + self.lin
        with np.errstate(over="ignore"):
            hz = np.exp(expo)
        return self.half_t * (hz @ self.quad_w)

    # -- candidate evaluations (no state change unless committed) --------------

    def loglik_alpha(self, alpha_flat: np.ndarray) -> float:
        lin = self.F @ alpha_flat
        lin_t = self.fT @ alpha_flat
        total, _ = self._loglik_from(self.base, self.base_T, self.wg, lin, lin_t)
        return total

    def commit_alpha(self, alpha_flat: np.ndarray) -> None:
        self.alpha_flat = np.asarray(alpha_flat, dtype=float).copy()
        self.lin = self.F @ self.alpha_flat
        self.lin_T = self.fT @ self.alpha_flat

    def loglik_spline(self, spline_coeffs: np.ndarray) -> float:
        base = self.spline_design @ spline_coeffs
        base_t = self.spline_design_T @ spline_coeffs
        total, _ = self._loglik_from(base, base_t, self.wg, self.lin, self.lin_T)
        return total

    def commit_spline(self, spline_coeffs: np.ndarray) -> None:
        self.base = self.spline_design @ spline_coeffs
        self.base_T = self.spline_design_T @ spline_coeffs

    def loglik_gamma(self, gamma: np.ndarray) -> float:
        wg = self.w @ gamma
        total, _ = self._loglik_from(self.base, self.base_T, wg, self.lin, self.lin_T)
        return total

    def commit_gamma(self, gamma: np.ndarray) -> None:
        self.wg = self.w @ np.asarray(gamma, dtype=float)

    def subject_loglik_for_coeffs(self, coeffs: np.ndarray) -> np.ndarray:
        """Per-subject log likelihood if trajectories were ``coeffs``."""
        f, ft = self.scaled_features(coeffs)
        lin = f @ self.alpha_flat
        lin_t = ft @ self.alpha_flat
        _, ll = self._loglik_from(self.base, self.base_T, self.wg, lin, lin_t)
        return ll

    def commit_coeffs_rows(self, coeffs: np.ndarray, rows: np.ndarray) -> None:
        """Adopt candidate trajectories for the selected subjects."""
        if not np.any(rows):
            return
        f, ft = self.scaled_features(coeffs[rows])
        self.F[rows] = f
        self.fT[rows] = ft
        self.lin[rows] = f @ self.alpha_flat
        self.lin_T[rows] = ft @ self.alpha_flat
