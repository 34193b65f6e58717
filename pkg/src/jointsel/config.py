"""Run configuration: model spec, chain settings, study plan.

Everything under-specified upstream has an explicit default here so a
``config init`` dump makes every choice visible and overridable.  Configs
round-trip through JSON.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["PRIORS", "Hyper", "ModelSpec", "ChainSettings", "StudyPlan", "RunConfig"]

PRIORS = ("BSGS-D", "BSGS-D-I", "BSGS", "SS")


@dataclass
class Hyper:
    """Prior hyperparameters; defaults are the documented weak choices."""

    beta_sd: float = 100.0  # longitudinal fixed effects
    gamma_sd: float = 100.0  # baseline-covariate coefficients
    spline_sd: float = 10.0  # log baseline hazard spline coefficients
    sigma_shape: float = 0.01  # inverse-gamma for sigma_g^2
    sigma_rate: float = 0.01
    wishart_df_add: float = 2.0  # IW df = G + this
    group_beta: tuple[float, float] = (1.0, 1.0)  # Beta(a, b) on pi_g
    feature_beta: tuple[float, float] = (1.0, 1.0)  # Beta(c, d), BSGS feature layer
    ss_beta: tuple[float, float] = (1.0, 10.0)  # Beta on SS inclusion probs
    slab_rate: float = 1.0  # t in Gamma(1, t) for 1/s^2
    literal_mixture_weights: bool = False  # point mass carries pi instead of 1-pi
    fix_dirichlet_weights: tuple[float, ...] | None = None  # freeze a_g for diagnostics


@dataclass
class ModelSpec:
    """Structural description of the joint model to fit."""

    n_risk_factors: int = 3
    n_features: int = 4
    poly_order: int = 2
    n_spline_coeffs: int = 5  # B-spline coefficients beyond the intercept
    spline_degree: int = 3
    quad_nodes: int = 15
    a_max: float | None = None  # None: maximum observed age
    area_t0: float = 0.0
    thresholds: tuple[float, ...] | None = None  # None: empirical medians
    prior: str = "BSGS-D"
    hyper: Hyper = field(default_factory=Hyper)

    def __post_init__(self) -> None:
        if self.prior not in PRIORS:
            raise ValueError(f"unknown prior {self.prior!r}; choose one of {PRIORS}")
        if not 1 <= self.n_features <= 16:
            raise ValueError("feature count must be in [1, 16]")
        if self.poly_order not in (1, 2):
            raise ValueError("polynomial order must be 1 or 2")


@dataclass
class ChainSettings:
    iterations: int = 20000
    burn_in: int = 5000
    thin: int = 5
    pilot_iterations: int = 5000
    pilot_burn_in: int = 2000
    adapt: bool = True

    def __post_init__(self) -> None:
        if self.iterations <= self.burn_in:
            raise ValueError("iterations must exceed burn_in")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")


@dataclass
class StudyPlan:
    replicates: int = 100
    threshold: float = 0.5  # posterior inclusion frequency for "selected"
    threads: int = 1
    scenario: str | None = "I"
    n_subjects: int = 800
    censoring_target: float = 0.25
    dataset: str | None = None  # external data path, overrides scenario

    def __post_init__(self) -> None:
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("selection threshold must be in (0, 1)")


@dataclass
class RunConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    chain: ChainSettings = field(default_factory=ChainSettings)
    study: StudyPlan = field(default_factory=StudyPlan)
    seed: int = 20260801
    out: str = "runs/out"

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    def spec_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()[:16]

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        model_raw = dict(raw.get("model", {}))
        hyper_raw = dict(model_raw.pop("hyper", {}))
        for key in ("group_beta", "feature_beta", "ss_beta"):
            if key in hyper_raw and hyper_raw[key] is not None:
                hyper_raw[key] = tuple(hyper_raw[key])
        if hyper_raw.get("fix_dirichlet_weights") is not None:
            hyper_raw["fix_dirichlet_weights"] = tuple(hyper_raw["fix_dirichlet_weights"])
        if model_raw.get("thresholds") is not None:
            model_raw["thresholds"] = tuple(model_raw["thresholds"])
        return cls(
            model=ModelSpec(hyper=Hyper(**hyper_raw), **model_raw),
            chain=ChainSettings(**raw.get("chain", {})),
            study=StudyPlan(**raw.get("study", {})),
            seed=int(raw.get("seed", 20260801)),
            out=str(raw.get("out", "runs/out")),
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        with Path(path).open() as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())
