"""Mixed-effects longitudinal submodel on a shifted Legendre basis.

Each risk factor g follows y_ig(a) = mu_ig(a) + eps with
mu_ig(a) = phi(a)^T (beta_g + b_ig); the fixed and random designs share
the basis.  Random effects across risk factors are coupled through a
block-diagonal covariance: one G x G block per polynomial order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "legendre_basis",
    "legendre_slope_basis",
    "legendre_area_basis",
    "BlockCovariance",
    "mu",
    "mu_derivative",
    "longitudinal_loglik",
    "random_effects_loglik",
]

LOG_2PI = math.log(2.0 * math.pi)


def _check_order(order: int) -> None:
    if order not in (1, 2):
        raise ValueError(f"polynomial order must be 1 or 2, got {order}")


def legendre_basis(age, a_max: float, order: int = 2) -> np.ndarray:
    """Shifted Legendre basis (1, P_1, ..., P_order) at the given age(s).

    P_1(a) = 2a/a_max - 1 and P_2(a) = (3 P_1(a)^2 - 1) / 2, so every
    non-constant component lies in [-1, 1] on [0, a_max].

    ``age`` may be a scalar or array; the basis index is the last axis.
    """
    _check_order(order)
    a = np.asarray(age, dtype=float)
    if np.any(a < -1e-12) or np.any(a > a_max + 1e-12):
        raise ValueError(f"age outside [0, {a_max}]")
    u = 2.0 * a / a_max - 1.0
    cols = [np.ones_like(u), u]
    if order == 2:
        cols.append(0.5 * (3.0 * u * u - 1.0))
    return np.stack(cols, axis=-1)


def legendre_slope_basis(age, a_max: float, order: int = 2) -> np.ndarray:
    """d/da of each basis component: (0, 2/a_max, 6(2a/a_max - 1)/a_max)."""
    _check_order(order)
    a = np.asarray(age, dtype=float)
    u = 2.0 * a / a_max - 1.0
    cols = [np.zeros_like(u), np.full_like(u, 2.0 / a_max)]
    if order == 2:
        cols.append(6.0 * u / a_max)
    return np.stack(cols, axis=-1)


def legendre_area_basis(age, a_max: float, order: int = 2) -> np.ndarray:
    """Antiderivatives int_0^a of each basis component.

    Closed forms via int_{-1}^{x} P_k = (P_{k+1} - P_{k-1}) / (2k + 1):
    the area of a trajectory c^T phi over (t0, t) is c^T (A(t) - A(t0)).
    """
    _check_order(order)
    a = np.asarray(age, dtype=float)
    u = 2.0 * a / a_max - 1.0
    half = a_max / 2.0
    p2 = 0.5 * (3.0 * u * u - 1.0)
    cols = [a + np.zeros_like(u), half * (p2 - 1.0) / 3.0]
    if order == 2:
        p3 = 0.5 * (5.0 * u**3 - 3.0 * u)
        cols.append(half * (p3 - u) / 5.0)
    return np.stack(cols, axis=-1)


@dataclass(frozen=True)
class BlockCovariance:
    """Random-effects covariance: one symmetric PD G x G block per order.

    blocks[p][g, g'] = Cov(b_{i g p}, b_{i g' p}); effects of different
    polynomial orders are independent.
    """

    blocks: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        blocks = tuple(np.asarray(b, dtype=float) for b in self.blocks)
        object.__setattr__(self, "blocks", blocks)
        g = blocks[0].shape[0]
        for p, b in enumerate(blocks):
            if b.shape != (g, g):
                raise ValueError(f"block {p} has shape {b.shape}, expected ({g}, {g})")
            if np.max(np.abs(b - b.T)) > 1e-10:
                raise ValueError(f"block {p} is not symmetric")
            if np.linalg.eigvalsh(b)[0] <= 0:
                raise ValueError(f"block {p} is not positive definite")

    @property
    def n_groups(self) -> int:
        return self.blocks[0].shape[0]

    @property
    def n_orders(self) -> int:
        return len(self.blocks)

    def dense(self) -> np.ndarray:
        """Full covariance of b_i in (factor-major, order-minor) layout."""
        g, m = self.n_groups, self.n_orders
        out = np.zeros((g * m, g * m))
        for p, block in enumerate(self.blocks):
            for gi in range(g):
                for gj in range(g):
                    out[gi * m + p, gj * m + p] = block[gi, gj]
        return out


def mu(beta_g: np.ndarray, b_ig: np.ndarray, age, a_max: float) -> np.ndarray:
    """Mean trajectory phi(age)^T (beta_g + b_ig) for one subject/factor."""
    coeffs = np.asarray(beta_g, dtype=float) + np.asarray(b_ig, dtype=float)
    basis = legendre_basis(age, a_max, order=len(coeffs) - 1)
    return basis @ coeffs


def mu_derivative(beta_g: np.ndarray, b_ig: np.ndarray, age, a_max: float) -> np.ndarray:
    """Analytic d mu / d age; matches finite differences of :func:`mu`."""
    coeffs = np.asarray(beta_g, dtype=float) + np.asarray(b_ig, dtype=float)
    basis = legendre_slope_basis(age, a_max, order=len(coeffs) - 1)
    return basis @ coeffs


def longitudinal_loglik(
    residuals_by_factor: list[np.ndarray] | tuple[np.ndarray, ...],
    sigma: np.ndarray,
) -> float:
    """Gaussian log likelihood of raw residuals grouped by risk factor.

    residuals_by_factor[g] holds every (y - mu) for factor g across all
    subjects and visits; sigma[g] is the factor's error scale.
    """
    sigma = np.asarray(sigma, dtype=float)
    if np.any(sigma <= 0):
        raise ValueError("error scales must be positive")
    total = 0.0
    for g, res in enumerate(residuals_by_factor):
        r = np.asarray(res, dtype=float)
        n = r.size
        total += -0.5 * n * (LOG_2PI + 2.0 * math.log(sigma[g]))
        total += -0.5 * float(np.sum(r * r)) / (sigma[g] ** 2)
    return total


def random_effects_loglik(b: np.ndarray, cov: BlockCovariance) -> float:
    """Log density of random effects under the block-diagonal normal prior.

    ``b`` has shape (n_subjects, G, n_orders).  The density factorizes
    over orders: order p contributes a G-variate normal with covariance
    cov.blocks[p] for every subject.
    """
    b = np.asarray(b, dtype=float)
    if b.ndim == 2:
        b = b[None, :, :]
    n, g, m = b.shape
    if g != cov.n_groups or m != cov.n_orders:
        raise ValueError(
            f"random effects shaped {(g, m)} do not match covariance "
            f"({cov.n_groups}, {cov.n_orders})"
        )
    total = 0.0
    for p in range(m):
        block = cov.blocks[p]
        chol = np.linalg.cholesky(block)
        logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
        x = b[:, :, p]  # (n, G)
        sol = np.linalg.solve(chol, x.T)  # (G, n)
        quad = float(np.sum(sol * sol))
        total += -0.5 * (n * (g * LOG_2PI + logdet) + quad)
    return total
