"""Simulation configuration and its JSON form."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigurationError
from .models import SpectrumSpec
from .shrinkers import EstimatorKind

__all__ = ["SimulationConfig"]

_FIELDS = {"n", "p", "spectrum", "rotate_population", "estimators", "trials", "master_seed", "normalized"}


@dataclass(frozen=True)
class SimulationConfig:
    """One Monte Carlo risk experiment.

    Example JSON::

        {"n": 100, "p": 50,
         "spectrum": {"kind": "geometric", "ratio": 100},
         "estimators": ["sample", "stein_dispersed", "tsai"],
         "trials": 200, "master_seed": 42,
         "rotate_population": false, "normalized": true}
    """

    n: int
    p: int
    spectrum: SpectrumSpec
    estimators: tuple[EstimatorKind, ...]
    trials: int
    master_seed: int
    rotate_population: bool = False
    normalized: bool = True

    def __post_init__(self) -> None:
        for name in ("n", "p", "trials", "master_seed"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigurationError(f"{name}: expected an integer, got {value!r}")
        if self.p < 1:
            raise ConfigurationError(f"p: must be >= 1, got {self.p}")
        if self.n <= self.p:
            raise ConfigurationError(f"n: must exceed p={self.p}, got {self.n}")
        if self.trials < 1:
            raise ConfigurationError(f"trials: must be >= 1, got {self.trials}")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigurationError("master_seed: must be a 64-bit unsigned integer")
        if self.spectrum.p != self.p:
            raise ConfigurationError(f"spectrum.p: {self.spectrum.p} does not match p={self.p}")
        if not self.estimators:
            raise ConfigurationError("estimators: at least one estimator is required")
        if len(set(self.estimators)) != len(self.estimators):
            raise ConfigurationError("estimators: duplicate entries")

    @property
    def concentration(self) -> float:
        return self.p / self.n

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SimulationConfig:
        if not isinstance(d, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(d) - _FIELDS
        if unknown:
            raise ConfigurationError(f"unknown field(s): {', '.join(sorted(unknown))}")
        missing = {"n", "p", "spectrum", "estimators", "trials", "master_seed"} - set(d)
        if missing:
            raise ConfigurationError(f"missing field(s): {', '.join(sorted(missing))}")
        if not isinstance(d["estimators"], list):
            raise ConfigurationError("estimators: expected a list of estimator names")
        try:
            spectrum = SpectrumSpec.from_dict(d["spectrum"], p=d["p"])
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"spectrum: {exc}") from None
        return cls(
            n=d["n"],
            p=d["p"],
            spectrum=spectrum,
            estimators=tuple(EstimatorKind.parse(e) for e in d["estimators"]),
            trials=d["trials"],
            master_seed=d["master_seed"],
            rotate_population=bool(d.get("rotate_population", False)),
            normalized=bool(d.get("normalized", True)),
        )

    @classmethod
    def from_json(cls, path: str | Path) -> SimulationConfig:
        try:
            d = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        return cls.from_dict(d)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "p": self.p,
            "spectrum": self.spectrum.to_dict(),
            "rotate_population": self.rotate_population,
            "estimators": [e.value for e in self.estimators],
            "trials": self.trials,
            "master_seed": self.master_seed,
            "normalized": self.normalized,
        }
