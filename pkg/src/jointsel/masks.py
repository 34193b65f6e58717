"""Combinatorial calculus for correlated within-group inclusion priors.

A risk factor with J candidate features has C = 2^J - 1 nonempty feature
subsets ("masks").  A Dirichlet distribution over the masks induces
marginal inclusion probabilities for the individual features; everything
in this module is a deterministic function of the Dirichlet concentration
vector, so it is all exactly testable against Monte-Carlo draws.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "WeightVariant",
    "FeatureMask",
    "MaskCatalog",
    "DirichletWeights",
    "enumerate_masks",
    "build_concentration",
    "q_to_pi",
    "pi_covariance",
    "pi_variance",
    "negativity_scan",
    "NegativityReport",
]

MAX_FEATURES = 16


class WeightVariant(Enum):
    """How per-cardinality Dirichlet weights map onto mask concentrations."""

    PLAIN = "plain"
    BINOMIAL_SCALED = "binomial_scaled"


@dataclass(frozen=True)
class FeatureMask:
    """A nonempty subset of the J feature slots of one risk factor.

    ``bits`` uses bit j (0-based) for feature j+1, so the paper-style
    string for J=3 with only the first feature selected renders "100".
    """

    bits: int
    n_features: int

    def __post_init__(self) -> None:
        if self.bits <= 0 or self.bits >= (1 << self.n_features):
            raise ValueError(
                f"mask bits {self.bits:#b} invalid for {self.n_features} features "
                "(empty and out-of-range masks are excluded)"
            )

    @property
    def cardinality(self) -> int:
        return bin(self.bits).count("1")

    def contains(self, feature: int) -> bool:
        """Membership of 0-based feature index."""
        return bool((self.bits >> feature) & 1)

    def features(self) -> tuple[int, ...]:
        """0-based indices of the selected features, ascending."""
        return tuple(j for j in range(self.n_features) if self.contains(j))

    def __str__(self) -> str:
        return "".join("1" if self.contains(j) else "0" for j in range(self.n_features))


@dataclass(frozen=True)
class MaskCatalog:
    """All 2^J - 1 nonempty masks in canonical order.

    Masks are grouped by ascending cardinality; within a cardinality block
    they are ordered lexicographically by their sorted feature-index
    tuples, which reproduces the (100, 010, 001, 110, 101, 011, 111)
    listing at J=3.
    """

    n_features: int
    masks: tuple[FeatureMask, ...]
    _index: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {m.bits: c for c, m in enumerate(self.masks)}
        )

    def __len__(self) -> int:
        return len(self.masks)

    def index_of(self, bits: int) -> int:
        """Catalog position of a mask given its bit pattern."""
        return self._index[bits]

    def cardinalities(self) -> np.ndarray:
        return np.array([m.cardinality for m in self.masks], dtype=np.int64)

    def membership_matrix(self) -> np.ndarray:
        """C x J boolean matrix; entry (c, j) is True when mask c has feature j."""
        J = self.n_features
        out = np.zeros((len(self.masks), J), dtype=bool)
        for c, m in enumerate(self.masks):
            for j in m.features():
                out[c, j] = True
        return out


@dataclass(frozen=True)
class DirichletWeights:
    """Per-cardinality Dirichlet weights (a_1 ... a_J) for one risk factor.

    PLAIN weights must be strictly decreasing and positive.  For
    BINOMIAL_SCALED the scaled sequence a_j / binom(J, j) must be strictly
    decreasing and positive, compensating for block sizes.
    """

    values: tuple[float, ...]
    variant: WeightVariant = WeightVariant.PLAIN

    def __post_init__(self) -> None:
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "values", vals)
        if any(not math.isfinite(v) or v <= 0 for v in vals):
            raise ValueError("Dirichlet weights must be positive and finite")
        seq = self.scaled()
        if any(seq[i] <= seq[i + 1] for i in range(len(seq) - 1)):
            raise ValueError(
                f"{self.variant.value} weights must be strictly decreasing "
                f"after scaling, got {seq}"
            )

    @property
    def n_features(self) -> int:
        return len(self.values)

    def scaled(self) -> tuple[float, ...]:
        """The sequence whose ordering the variant constrains."""
        if self.variant is WeightVariant.PLAIN:
            return self.values
        J = self.n_features
        return tuple(v / math.comb(J, k + 1) for k, v in enumerate(self.values))


def enumerate_masks(n_features: int) -> MaskCatalog:
    """Enumerate all nonempty feature subsets in canonical block order.

    Parameters
    ----------
    n_features : int
        J, number of candidate features per risk factor; 1 <= J <= 16.
    """
    if not 1 <= n_features <= MAX_FEATURES:
        raise ValueError(f"feature count must be in [1, {MAX_FEATURES}], got {n_features}")
    masks = []
    for k in range(1, n_features + 1):
        for combo in itertools.combinations(range(n_features), k):
            bits = 0
            for j in combo:
                bits |= 1 << j
            masks.append(FeatureMask(bits=bits, n_features=n_features))
    return MaskCatalog(n_features=n_features, masks=tuple(masks))


def _expand_concentration(
    values: np.ndarray, variant: WeightVariant, catalog: MaskCatalog
) -> np.ndarray:
    J = catalog.n_features
    per_card = np.asarray(values, dtype=float)
    if variant is WeightVariant.BINOMIAL_SCALED:
        per_card = per_card / np.array([math.comb(J, k) for k in range(1, J + 1)])
    cards = catalog.cardinalities()
    return per_card[cards - 1]


def build_concentration(weights: DirichletWeights, catalog: MaskCatalog) -> np.ndarray:
    """Expand per-cardinality weights into the length-C concentration vector.

    PLAIN assigns a_k to every mask of cardinality k; BINOMIAL_SCALED
    assigns a_k / binom(J, k) so each cardinality block carries total
    weight a_k regardless of how many masks it contains.
    """
    if weights.n_features != catalog.n_features:
        raise ValueError(
            f"weights for J={weights.n_features} do not match catalog J={catalog.n_features}"
        )
    return _expand_concentration(np.asarray(weights.values), weights.variant, catalog)


def q_to_pi(q: np.ndarray, catalog: MaskCatalog) -> np.ndarray:
    """Marginal feature-inclusion probabilities from mask probabilities.

    pi_j = sum of q_c over all masks c containing feature j.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (len(catalog),):
        raise ValueError(f"q has shape {q.shape}, expected ({len(catalog)},)")
    if np.any(q < -1e-12) or abs(q.sum() - 1.0) > 1e-9:
        raise ValueError("q must be a probability vector over the mask catalog")
    return catalog.membership_matrix().T.astype(float) @ q


def _aggregate_sums(weights: DirichletWeights, j: int, k: int | None) -> tuple[float, float, float]:
    """(a_t, S_j, S_jk): total concentration and sums over masks containing
    feature j, and over masks containing both j and k (S_jj = S_j)."""
    catalog = enumerate_masks(weights.n_features)
    conc = build_concentration(weights, catalog)
    member = catalog.membership_matrix()
    a_t = float(conc.sum())
    s_j = float(conc[member[:, j]].sum())
    if k is None or k == j:
        s_jk = s_j
    else:
        s_jk = float(conc[member[:, j] & member[:, k]].sum())
    return a_t, s_j, s_jk


def pi_covariance(weights: DirichletWeights, j: int, k: int, n_features: int) -> float:
    """Closed-form Cov(pi_j, pi_k), j != k, under PLAIN weights.

    Since pi_j is a fixed aggregation of Dirichlet coordinates, the
    covariance follows from the Dirichlet covariance matrix:

        Cov(pi_j, pi_k) = (a_t * S_jk - S_j * S_k) / (a_t^2 (a_t + 1))

    with a_t the total concentration, S_j the concentration mass of masks
    containing j, and S_jk the mass of masks containing both.  This
    reduces exactly to the published J = 2, 3, 4 special cases.
    """
    if weights.variant is not WeightVariant.PLAIN:
        raise ValueError("covariance closed form is defined for PLAIN weights")
    if weights.n_features != n_features:
        raise ValueError("weight length does not match feature count")
    if n_features < 2:
        raise ValueError("covariance requires at least two features")
    if j == k:
        raise ValueError("use pi_variance for the diagonal")
    if not (0 <= j < n_features and 0 <= k < n_features):
        raise ValueError("feature index out of range")
    a_t, s_j, s_jk = _aggregate_sums(weights, j, k)
    # By symmetry of PLAIN weights every feature has the same mass S_j.
    return (a_t * s_jk - s_j * s_j) / (a_t * a_t * (a_t + 1.0))


def pi_variance(weights: DirichletWeights, j: int, n_features: int) -> float:
    """Var(pi_j) from the same Dirichlet aggregation identity."""
    if weights.variant is not WeightVariant.PLAIN:
        raise ValueError("variance closed form is defined for PLAIN weights")
    if weights.n_features != n_features:
        raise ValueError("weight length does not match feature count")
    if not 0 <= j < n_features:
        raise ValueError("feature index out of range")
    a_t, s_j, _ = _aggregate_sums(weights, j, None)
    return s_j * (a_t - s_j) / (a_t * a_t * (a_t + 1.0))


@dataclass(frozen=True)
class NegativityReport:
    """Outcome of a randomized search for nonnegative inclusion covariances."""

    n_features: int
    trials: int
    violations: int
    min_covariance: float
    max_covariance: float
    offending_weights: tuple[tuple[float, ...], ...]

    def render(self) -> str:
        lines = [
            f"negativity scan: J={self.n_features}, trials={self.trials}",
            f"  covariance range: [{self.min_covariance:.6g}, {self.max_covariance:.6g}]",
            f"  nonnegative covariances found: {self.violations}",
        ]
        for w in self.offending_weights[:10]:
            lines.append("  offending weights: " + ", ".join(f"{v:.6g}" for v in w))
        return "\n".join(lines)


def sample_plain_weights(n_features: int, rng: np.random.Generator) -> DirichletWeights:
    """Random strictly-decreasing positive weights (half-Cauchy scale mix)."""
    raw = np.abs(rng.standard_cauchy(n_features)) + 1e-3
    vals = np.sort(raw)[::-1]
    # Ties have probability zero but perturb defensively.
    for i in range(1, n_features):
        if vals[i] >= vals[i - 1]:
            vals[i] = vals[i - 1] * (1 - 1e-9)
    return DirichletWeights(values=tuple(vals), variant=WeightVariant.PLAIN)


def negativity_scan(
    n_features: int, trials: int, rng_seed: int | np.random.Generator = 0
) -> NegativityReport:
    """Probe the negative-covariance conjecture at a given J.

    Samples ``trials`` valid ordered weight vectors and evaluates the
    covariance for every feature pair, recording any nonnegative value.
    For J in {2, 3, 4} the count is provably zero; for larger J the count
    is informational.
    """
    if n_features < 2:
        raise ValueError("scan needs at least two features")
    rng = (
        rng_seed
        if isinstance(rng_seed, np.random.Generator)
        else np.random.default_rng(rng_seed)
    )
    violations = 0
    offenders: list[tuple[float, ...]] = []
    min_cov = math.inf
    max_cov = -math.inf
    for _ in range(trials):
        w = sample_plain_weights(n_features, rng)
        cov = pi_covariance(w, 0, 1, n_features)
        min_cov = min(min_cov, cov)
        max_cov = max(max_cov, cov)
        if cov >= 0:
            violations += 1
            if len(offenders) < 32:
                offenders.append(w.values)
    return NegativityReport(
        n_features=n_features,
        trials=trials,
        violations=violations,
        min_covariance=min_cov,
        max_covariance=max_cov,
        offending_weights=tuple(offenders),
    )
