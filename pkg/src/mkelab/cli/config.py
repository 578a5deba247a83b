"""Experiment configuration: one flat JSON document per experiment."""

from __future__ import annotations

import copy
import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from ..estimators import FitConfig, make_config
from ..measures import empirical, read_measure_csv
from .datasets import make_dataset

SEED_ENV = "MKELAB_SEED"

KNOWN_KEYS = {
    "seed", "cost", "data", "latent", "generator", "encoder", "potential",
    "step", "encoder_step", "potential_step", "n_iter", "n_inner", "lambda",
    "lambda_grid", "clip", "divergence", "wgan_variant", "semidual_iter",
    "semidual_step", "fd_step", "max_retries", "output_dir", "formats", "description",
}

DEFAULT_LAMBDA_GRID = [1.0, 10.0, 100.0, 1000.0]


class ConfigError(ValueError):
    """Malformed or inconsistent experiment configuration."""


def config_hash(echo: dict) -> str:
    """Git-style blob hash of the canonical JSON text of a config."""
    body = json.dumps(echo, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha1(b"blob %d\0" % len(body) + body).hexdigest()


@dataclass
class ExperimentConfig:
    raw: dict
    base_dir: Path
    fit: FitConfig

    @property
    def echo(self) -> dict:
        return self.raw

    @property
    def hash(self) -> str:
        return config_hash(self.raw)

    @property
    def lambda_grid(self):
        return [float(x) for x in self.raw.get("lambda_grid", DEFAULT_LAMBDA_GRID)]

    @property
    def fd_step(self) -> float:
        return float(self.raw.get("fd_step", 1e-4))

    @property
    def max_retries(self) -> int:
        return int(self.raw.get("max_retries", 5))

    @property
    def output_dir(self):
        out = self.raw.get("output_dir")
        return None if out is None else self.base_dir / out


def _load_data(spec, base_dir: Path):
    if not isinstance(spec, dict):
        raise ConfigError("'data' must be an object")
    source = spec.get("source", "synthetic" if "family" in spec else None)
    if source == "csv":
        path = Path(spec["path"])
        path = path if path.is_absolute() else base_dir / path
        if not path.exists():
            raise FileNotFoundError(f"data file not found: {path}")
        # absolute path in the echo keeps records re-runnable from anywhere
        spec["path"] = str(path.resolve())
        return read_measure_csv(path)
    if source == "inline":
        return empirical(spec["points"])
    if source == "synthetic":
        missing = {"family", "n"} - spec.keys()
        if missing:
            raise ConfigError(f"synthetic data needs {sorted(missing)}")
        return empirical(make_dataset(
            spec["family"], spec["n"], noise=spec.get("noise", 0.0), seed=spec.get("seed", 0),
            dim=spec.get("dim", 2), center=spec.get("center"), scale=spec.get("scale", 1.0),
        ))
    raise ConfigError(f"unknown data source {source!r} (expected csv, inline or synthetic)")


def _split_arch(spec):
    if spec is None:
        return None, None
    spec = dict(spec)
    init = spec.pop("init", None)
    return spec, init


def build_experiment(raw: dict, base_dir=".", seed_override=None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    raw = copy.deepcopy(raw)
    if seed_override is not None:
        raw["seed"] = int(seed_override)
    raw.setdefault("seed", 0)
    base_dir = Path(base_dir)
    if "data" not in raw:
        raise ConfigError("config needs a 'data' section")
    data = _load_data(raw["data"], base_dir)

    latent = raw.get("latent", {})
    kwargs = {}
    if "points" in latent:
        kwargs["latent_points"] = latent["points"]
        latent_dim = None
    else:
        latent_dim = int(latent.get("dim", 1))
        kwargs["latent_family"] = latent.get("family", "uniform-box")
        if "m" in latent:
            kwargs["m"] = int(latent["m"])
    for key, name in (("step", "step"), ("encoder_step", "encoder_step"),
                      ("potential_step", "potential_step"), ("n_iter", "n_iter"),
                      ("n_inner", "n_inner"), ("lambda", "lam"), ("clip", "clip"),
                      ("divergence", "divergence"), ("wgan_variant", "wgan_variant"),
                      ("semidual_iter", "semidual_iter"), ("semidual_step", "semidual_step")):
        if key in raw:
            kwargs[name] = raw[key]
    gen, gen_init = _split_arch(raw.get("generator"))
    enc, enc_init = _split_arch(raw.get("encoder"))
    pot, pot_init = _split_arch(raw.get("potential"))
    try:
        fit = make_config(
            data, gen, latent_dim=latent_dim, encoder=enc, potential=pot,
            generator_init=gen_init, encoder_init=enc_init, potential_init=pot_init,
            seed=int(raw["seed"]), cost=raw.get("cost", "sqeuclidean"), **kwargs,
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad config: {exc}") from None
    return ExperimentConfig(raw, base_dir, fit)


def load_experiment(path) -> ExperimentConfig:
    """Read a config file, or the config echo inside a result record."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    if isinstance(raw, dict) and "config" in raw and "config_hash" in raw:
        raw = raw["config"]
    seed = os.environ.get(SEED_ENV)
    if seed is not None:
        try:
            seed = int(seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {seed!r}") from None
    return build_experiment(raw, path.parent, seed)
