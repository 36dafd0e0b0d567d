"""Experiment configuration files.

Configs are YAML documents. Matrices are row-major lists of lists; field
names follow :class:`ExperimentConfig`. A minimal file::

    dims: {p: 1, r: 1}
    theta0: [[0.9, 1.0]]
    Qx: [[1.0]]
    Qu: [[1.0]]
    noise: {kind: gaussian, C: [[1.0]]}
    beta: 1.2
    horizon: 1000
    replicates: 4
    base_seed: 7
    bootstrap_source: empirical
    breaks:
      - {time: 400, A: [[0.5]], B: [[1.0]]}
"""

from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from ..bootstrap import SOURCES
from ..model import DEFAULT_STATE_CAP, CostPair, Dimensions, LqModel, NoiseModel, check_theta, join_theta

BUNDLED = ("paper.cfg", "break1.cfg", "break2.cfg")


class ConfigError(ValueError):
    """Invalid or unreadable experiment configuration."""


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    dims: Dimensions
    theta0: np.ndarray
    Qx: np.ndarray
    Qu: np.ndarray
    noise: NoiseModel
    beta: float = 1.2
    horizon: int = 10_000
    replicates: int = 20
    base_seed: int = 0
    bootstrap_source: str = "empirical"
    breaks: tuple = ()  # ((time, theta), ...)
    output_dir: str = "results"
    state_cap: float = DEFAULT_STATE_CAP
    workers: int = None
    source: str = field(default=None, compare=False)

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be >= 1")
        if not self.beta > 1:
            raise ConfigError(f"beta must exceed 1, got {self.beta}")
        if self.bootstrap_source not in SOURCES:
            raise ConfigError(f"bootstrap_source must be one of {SOURCES}")
        if not self.state_cap > 0:
            raise ConfigError("state_cap must be positive")
        times = [t for t, _ in self.breaks]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigError(f"break times must be strictly increasing, got {times}")
        if any(t < 0 or t >= self.horizon for t in times):
            raise ConfigError(f"break times must lie in [0, horizon), got {times}")
        try:
            self.model()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def model(self):
        return LqModel(self.dims, self.theta0, CostPair(self.Qx, self.Qu), self.noise)

    def with_overrides(self, **kw):
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw) if kw else self


def _matrix(raw, name):
    try:
        arr = np.array(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name}: not a numeric matrix") from exc
    if arr.ndim != 2:
        raise ConfigError(f"{name}: expected a list of rows")
    return arr


def _require(doc, key):
    if key not in doc:
        raise ConfigError(f"missing required field {key!r}")
    return doc[key]


def parse_config(doc, source=None):
    if not isinstance(doc, dict):
        raise ConfigError("config must be a mapping")
    known = {"dims", "theta0", "Qx", "Qu", "noise", "beta", "horizon", "replicates", "base_seed",
             "bootstrap_source", "breaks", "output_dir", "state_cap", "workers"}
    unknown = set(doc) - known
    if unknown:
        raise ConfigError(f"unknown fields: {sorted(unknown)}")
    try:
        d = _require(doc, "dims")
        dims = Dimensions(int(d["p"]), int(d["r"]))
    except (KeyError, TypeError) as exc:
        raise ConfigError("dims must have integer p and r") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        theta0 = check_theta(_matrix(_require(doc, "theta0"), "theta0"), dims, "theta0")
        noise_doc = doc.get("noise") or {"kind": "gaussian"}
        kind = noise_doc.get("kind", "gaussian")
        if kind == "gaussian":
            C = _matrix(noise_doc["C"], "noise.C") if "C" in noise_doc else np.eye(dims.p)
            noise = NoiseModel.gaussian(C)
        elif kind == "empirical":
            noise = NoiseModel.empirical(_matrix(_require(noise_doc, "atoms"), "noise.atoms"))
        else:
            raise ConfigError(f"unknown noise kind {kind!r}")
        breaks = []
        for i, b in enumerate(doc.get("breaks") or []):
            theta = join_theta(_matrix(b["A"], f"breaks[{i}].A"), _matrix(b["B"], f"breaks[{i}].B"))
            breaks.append((int(b["time"]), check_theta(theta, dims, f"breaks[{i}]")))
        workers = doc.get("workers")
        return ExperimentConfig(
            dims=dims,
            theta0=theta0,
            Qx=_matrix(_require(doc, "Qx"), "Qx"),
            Qu=_matrix(_require(doc, "Qu"), "Qu"),
            noise=noise,
            beta=float(doc.get("beta", 1.2)),
            horizon=int(doc.get("horizon", 10_000)),
            replicates=int(doc.get("replicates", 20)),
            base_seed=int(doc.get("base_seed", 0)),
            bootstrap_source=str(doc.get("bootstrap_source", "empirical")),
            breaks=tuple(breaks),
            output_dir=str(doc.get("output_dir", "results")),
            state_cap=float(doc.get("state_cap", DEFAULT_STATE_CAP)),
            workers=None if workers is None else int(workers),
            source=source,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{type(exc).__name__}: {exc}") from exc


def bundled_path(name):
    return resources.files("lqboot.harness").joinpath("configs", name)


def load_config(path):
    """Read a config file; bare names of bundled configs (``paper.cfg``,
    ``break1.cfg``, ``break2.cfg``) resolve to the packaged copies."""
    p = Path(path)
    if not p.exists() and p.name == str(path) and path in BUNDLED:
        text = bundled_path(path).read_text()
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return parse_config(doc, source=str(path))
