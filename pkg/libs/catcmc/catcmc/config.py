"""Run configuration: a pydantic model built from command-line flags, a YAML
file, or both (flags win)."""
import logging
from pathlib import Path
from typing import Literal, Optional

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from catcmc import settings
from catcmc.base.schema import BoundaryData
from catcmc.exceptions import ConfigError
from catcmc.modes import LOWER_MODES

logger = logging.getLogger(__name__)

Command = Literal[
    "solve-neck", "solve-disk", "sweep-tau", "derivative", "nondegeneracy", "verify"
]


class BoundarySpec(BaseModel):
    """Fourier coefficients {k: (a_k, b_k)} of a_k cos(kx) + b_k sin(kx) on the
    circles s = +l (`plus`, also the disk boundary) and s = -l (`minus`)."""

    plus: dict[int, tuple[float, float]] = Field(default_factory=dict)
    minus: dict[int, tuple[float, float]] = Field(default_factory=dict)

    def modes(self) -> set[int]:
        return set(self.plus) | set(self.minus)

    def strip_lower(self) -> "BoundarySpec":
        return BoundarySpec(
            plus={k: v for k, v in self.plus.items() if abs(k) >= LOWER_MODES},
            minus={k: v for k, v in self.minus.items() if abs(k) >= LOWER_MODES},
        )

    def to_boundary(self, n_x: int) -> BoundaryData:
        return BoundaryData.from_modes(n_x, plus=self.plus, minus=self.minus)


class RunConfig(BaseModel):
    command: Command
    tau: Optional[float] = None
    tau_list: list[float] = Field(default_factory=lambda: [0.1, 0.05, 0.025])
    delta: float = 0.0
    boundary: BoundarySpec = Field(default_factory=BoundarySpec)
    lower_modes_allowed: bool = False
    gamma: Optional[float] = None
    n_x: Optional[int] = None
    n_s: Optional[int] = None
    n_r: Optional[int] = None
    tol: Optional[float] = None
    max_iter: Optional[int] = None
    smallness: Optional[float] = None
    newton: bool = False
    dtau_fraction: float = Field(default=0.1, gt=0.0, le=0.1)
    bottom_delta_sign: Optional[Literal[1, -1]] = None
    lmin: float = 0.5
    lmax: float = 3.0
    steps: int = 200
    suite: str = "all"
    output_dir: Optional[str] = None

    @model_validator(mode="after")
    def check_boundary(self):
        lower = sorted(k for k in self.boundary.modes() if abs(k) < LOWER_MODES)
        if lower:
            if not self.lower_modes_allowed:
                raise ValueError(
                    f"boundary modes {lower} are lower modes; the modified problem "
                    "only takes modes |k| >= 2 (set lower_modes_allowed to strip them)"
                )
            logger.warning("stripping lower boundary modes %s", lower)
            self.boundary = self.boundary.strip_lower()

        cutoff = self.resolved_n_x() // 3
        high = sorted(k for k in self.boundary.modes() if abs(k) > cutoff)
        if high:
            raise ValueError(
                f"boundary modes {high} exceed n_x/3 = {cutoff} and would be "
                "removed by de-aliasing"
            )
        if self.command == "solve-neck" and self.tau is None:
            raise ValueError("solve-neck needs tau")
        return self

    def resolved_n_x(self) -> int:
        return settings.n_x() if self.n_x is None else self.n_x

    def resolved_output_dir(self) -> Path:
        return Path(settings.output_dir() if self.output_dir is None else self.output_dir)

    def grid(self) -> dict:
        """Grid keyword arguments for `neck_params`."""
        return {"gamma": self.gamma, "n_x": self.n_x, "n_s": self.n_s}


def build_config(**values) -> RunConfig:
    try:
        return RunConfig(**values)
    except ValidationError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: Optional[str], **overrides) -> RunConfig:
    """Read a YAML run configuration and apply the non-None overrides."""
    values: dict = {}
    if path is not None:
        try:
            with open(path) as f:
                loaded = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError(f"config {path} must be a mapping")
        values.update(loaded or {})
    values.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(**values)


def parse_modes(items: tuple[str, ...]) -> dict[int, tuple[float, float]]:
    """Parse flags of the form `k:a,b` (or `k:a`) into a coefficient map."""
    modes: dict[int, tuple[float, float]] = {}
    for item in items:
        try:
            k, _, coefficients = item.partition(":")
            parts = [float(c) for c in coefficients.split(",")]
            a, b = (parts + [0.0])[:2]
            modes[int(k)] = (a, b)
        except ValueError as exc:
            raise ConfigError(f"cannot parse boundary mode {item!r}; use k:a,b") from exc
    return modes
