from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .._validation import as_points, check_count, check_positive
from ..costs import GroundCost, as_cost
from ..divergences import DivergenceSpec
from ..measures import DiscreteMeasure, LatentSampler, empirical
from ..models import ParamMap, arch_from_config

WGAN_VARIANTS = ("lipschitz-neg", "c-transform")


class NonFiniteObjectiveError(FloatingPointError):
    """A fit produced a NaN or infinite objective or gradient."""


def child_seed(seed: int, stream: int) -> int:
    """Independent 64-bit seed for a named sub-stream of an experiment seed."""
    ss = np.random.SeedSequence(int(seed) % 2**64, spawn_key=(int(stream),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# sub-stream ids
LATENT, GENERATOR, ENCODER, POTENTIAL, SEMIDUAL = range(5)


@dataclass(frozen=True, eq=False)
class FitConfig:
    """Everything a fit needs. The latent sample is drawn once, at construction.

    ``latent_points`` pins the latent sample explicitly; otherwise ``m``
    points are drawn from ``latent_family`` in dimension ``latent_dim`` with
    a seed derived from ``seed``.
    """

    data: DiscreteMeasure
    generator: ParamMap
    cost: GroundCost = GroundCost("sqeuclidean")
    latent_family: str = "uniform-box"
    latent_dim: int = 1
    m: int | None = None
    latent_points: np.ndarray | None = None
    encoder: ParamMap | None = None
    potential: ParamMap | None = None
    step: float = 1e-2
    encoder_step: float | None = None
    potential_step: float | None = None
    n_iter: int = 500
    n_inner: int = 5
    lam: float = 1000.0
    clip: float = 0.1
    divergence: DivergenceSpec = DivergenceSpec()
    wgan_variant: str | None = None
    semidual_iter: int = 10_000
    semidual_step: float = 1.0
    seed: int = 0
    latent: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "cost", as_cost(self.cost))
        object.__setattr__(self, "divergence", DivergenceSpec.from_config(self.divergence))
        for name in ("step", "lam", "clip", "semidual_step"):
            check_positive(getattr(self, name), name)
        for name in ("encoder_step", "potential_step"):
            if getattr(self, name) is not None:
                check_positive(getattr(self, name), name)
        for name in ("n_iter", "n_inner", "semidual_iter"):
            check_count(getattr(self, name), name)
        if self.wgan_variant is not None and self.wgan_variant not in WGAN_VARIANTS:
            raise ValueError(f"wgan_variant must be one of {WGAN_VARIANTS}")

        if self.latent_points is not None:
            Z = as_points(self.latent_points, "latent_points")
            Z.flags.writeable = False
            object.__setattr__(self, "latent_dim", Z.shape[1])
            object.__setattr__(self, "m", Z.shape[0])
        else:
            m = check_count(self.m if self.m is not None else self.data.n_atoms, "m")
            sampler = LatentSampler(self.latent_family, self.latent_dim, child_seed(self.seed, LATENT))
            Z = sampler.sample(m)
            Z.flags.writeable = False
            object.__setattr__(self, "m", m)
        object.__setattr__(self, "latent", Z)

        if self.generator.input_dim != self.latent_dim:
            raise ValueError(
                f"generator input dimension {self.generator.input_dim} != latent dimension {self.latent_dim}"
            )
        if self.generator.output_dim != self.data.dim:
            raise ValueError(
                f"generator output dimension {self.generator.output_dim} != data dimension {self.data.dim}"
            )
        if self.encoder is not None and (
            self.encoder.input_dim != self.data.dim or self.encoder.output_dim != self.latent_dim
        ):
            raise ValueError("encoder must map data dimension to latent dimension")
        if self.potential is not None and (
            self.potential.input_dim != self.data.dim or self.potential.output_dim != 1
        ):
            raise ValueError("potential must map data dimension to a scalar")

    @property
    def latent_measure(self) -> DiscreteMeasure:
        return empirical(self.latent)

    @property
    def encoder_step_(self) -> float:
        return self.encoder_step if self.encoder_step is not None else self.step

    @property
    def potential_step_(self) -> float:
        return self.potential_step if self.potential_step is not None else self.step

    @property
    def wgan_variant_(self) -> str:
        if self.wgan_variant is not None:
            return self.wgan_variant
        return "lipschitz-neg" if self.cost.kind == "euclidean" else "c-transform"

    def replace(self, **changes) -> "FitConfig":
        """Copy with changes. The latent sample is redrawn unless pinned."""
        return replace(self, **changes)

    def summary(self) -> dict:
        return {
            "cost": self.cost.kind,
            "latent_family": None if self.latent_points is not None else self.latent_family,
            "latent_dim": self.latent_dim,
            "m": self.m,
            "n": self.data.n_atoms,
            "generator": self.generator.arch.to_config(),
            "encoder": None if self.encoder is None else self.encoder.arch.to_config(),
            "potential": None if self.potential is None else self.potential.arch.to_config(),
            "step": self.step,
            "encoder_step": self.encoder_step_,
            "potential_step": self.potential_step_,
            "n_iter": self.n_iter,
            "n_inner": self.n_inner,
            "lambda": self.lam,
            "clip": self.clip,
            "divergence": self.divergence.to_config(),
            "wgan_variant": self.wgan_variant_,
            "seed": self.seed,
        }


def make_config(data, generator=None, *, latent_dim=None, encoder=None, potential=None,
                generator_init=None, encoder_init=None, potential_init=None, seed=0,
                **kwargs) -> FitConfig:
    """Build a :class:`FitConfig` from plain data and architecture configs.

    ``data`` is a measure or an array of points (uniformly weighted).
    Architectures are dicts such as ``{"arch": "mlp", "layers": [1, 8, 2]}``
    or architecture objects; ``None`` gives an affine map between the
    latent and data dimensions (a scalar potential for ``potential``).
    Initial parameters are seeded from ``seed`` unless given explicitly.
    """
    if not isinstance(data, DiscreteMeasure):
        data = empirical(data)
    p = data.dim
    if latent_dim is None:
        if kwargs.get("latent_points") is not None:
            latent_dim = as_points(kwargs["latent_points"]).shape[1]
        else:
            latent_dim = 1
    d = latent_dim

    def build(spec, default, init, stream):
        if spec is None:
            spec = default
        arch = arch_from_config(spec)
        params = arch.init_params(child_seed(seed, stream)) if init is None else init
        return ParamMap(arch, params)

    gen = generator if isinstance(generator, ParamMap) else build(
        generator, {"arch": "affine", "d_in": d, "d_out": p}, generator_init, GENERATOR)
    enc = encoder if isinstance(encoder, ParamMap) else build(
        encoder, {"arch": "affine", "d_in": p, "d_out": d}, encoder_init, ENCODER)
    pot = potential if isinstance(potential, ParamMap) else build(
        potential, {"arch": "affine", "d_in": p, "d_out": 1}, potential_init, POTENTIAL)
    return FitConfig(data=data, generator=gen, encoder=enc, potential=pot,
                     latent_dim=d, seed=seed, **kwargs)


@dataclass(eq=False)
class FitResult:
    """Outcome of one fit.

    ``trace`` holds one objective value per iteration; ``extras`` carries
    per-estimator diagnostics (separate loss terms, parameter histories).
    """

    estimator: str
    params: dict
    trace: np.ndarray
    final_objective: float
    true_energy: float
    wallclock_s: float
    extras: dict = field(default_factory=dict)
    energy_trace: np.ndarray | None = None
    config: dict = field(default_factory=dict)

    @property
    def n_iter(self) -> int:
        return len(self.trace)

    def trace_columns(self):
        """Header and rows for the flat CSV trace."""
        header = ["iter", "objective"]
        cols = [self.trace]
        if self.energy_trace is not None:
            header.append("true_energy")
            cols.append(self.energy_trace)
        for key in ("reconstruction", "penalty"):
            if key in self.extras:
                header.append(key)
                cols.append(self.extras[key])
        rows = [[k] + [c[k] for c in cols] for k in range(len(self.trace))]
        return header, rows

    def to_dict(self, include_history=False) -> dict:
        extras = {k: v for k, v in self.extras.items()
                  if include_history or not k.endswith("_history")}
        return {
            "estimator": self.estimator,
            "params": {k: np.asarray(v).tolist() for k, v in self.params.items()},
            "trace": np.asarray(self.trace).tolist(),
            "energy_trace": None if self.energy_trace is None else np.asarray(self.energy_trace).tolist(),
            "final_objective": self.final_objective,
            "true_energy": self.true_energy,
            "wallclock_s": self.wallclock_s,
            "extras": extras,
            "config": self.config,
        }
