"""Runtime settings and scenario configuration.

Runtime settings (logging, output directory) come from the environment like any service
setting. Everything that influences numerics lives in a :class:`ScenarioConfig`, read from a
TOML scenario file and patched by ``section.key=value`` overrides.
"""

import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, Literal, Optional, Sequence

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from dirac_ist import __app_name__, __version__
from dirac_ist.core.exceptions import ConfigurationException
from dirac_ist.models.fields import Grid2D, LaxParameters

SCENARIO_SCHEMA_VERSION = "1.0"


class Settings(BaseSettings):
    """Runtime settings loaded from environment variables."""

    # Application
    APP_NAME: str = Field(default=__app_name__, description="Application name")
    APP_VERSION: str = Field(default=__version__, description="Application version")

    # Logging
    LOG_LEVEL: str = Field(default="INFO", description="Logging level")
    LOG_FORMAT: str = Field(default="json", description="Log format: json or text")

    # Output
    OUTPUT_DIR: Optional[str] = Field(default=None, description="Overrides run.output_dir of every scenario")

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore"
    )

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate log level."""
        allowed = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed:
            raise ValueError(f"LOG_LEVEL must be one of {allowed}")
        return v.upper()

    @field_validator("LOG_FORMAT")
    @classmethod
    def validate_log_format(cls, v: str) -> str:
        """Validate log format."""
        allowed = ["json", "text"]
        if v.lower() not in allowed:
            raise ValueError(f"LOG_FORMAT must be one of {allowed}")
        return v.lower()


# Global settings instance
settings = Settings()


class GridSpec(BaseModel):
    """Square computational box."""

    model_config = ConfigDict(extra="forbid")

    x_min: float = Field(default=-4.0, description="Left edge")
    x_max: float = Field(default=4.0, description="Right edge")
    y_min: float = Field(default=-4.0, description="Bottom edge")
    y_max: float = Field(default=4.0, description="Top edge")
    n: int = Field(default=64, description="Points per axis, a power of two in [32, 512]")

    @field_validator("n")
    @classmethod
    def validate_n(cls, v: int) -> int:
        """Validate the refinement-friendly point count."""
        if v < 32 or v > 512 or v & (v - 1):
            raise ValueError("n must be a power of two between 32 and 512")
        return v

    @model_validator(mode="after")
    def validate_steps(self) -> "GridSpec":
        """Both axes must share one step."""
        if self.x_max <= self.x_min or self.y_max <= self.y_min:
            raise ValueError("grid bounds must be increasing")
        if not math.isclose(self.x_max - self.x_min, self.y_max - self.y_min, rel_tol=1e-12):
            raise ValueError("x and y extents must be equal so both steps agree")
        return self

    def to_grid(self) -> Grid2D:
        """Build the grid value object."""
        return Grid2D(self.x_min, self.x_max, self.y_min, self.y_max, self.n)


class GaussianSpec(BaseModel):
    """One Gaussian bump eps * exp(-((x-x0)^2 + (y-y0)^2) / w^2) * exp(i phase)."""

    model_config = ConfigDict(extra="forbid")

    amplitude: float = Field(default=0.0, description="Peak modulus eps")
    x0: float = Field(default=0.0, description="Centre x")
    y0: float = Field(default=0.0, description="Centre y")
    width: float = Field(default=0.7, gt=0.0, description="Width w")
    phase: float = Field(default=0.0, description="Constant phase in radians")


def _default_component(x0: float, y0: float, phase: float) -> GaussianSpec:
    return GaussianSpec(amplitude=0.1, x0=x0, y0=y0, width=0.7, phase=phase)


class PotentialSpec(BaseModel):
    """Initial potential: an analytic family or a file."""

    model_config = ConfigDict(extra="forbid")

    family: Literal["gaussian", "zero", "file"] = Field(default="gaussian", description="Initial-data family")
    path: Optional[str] = Field(default=None, description="Potential file for family = file")
    support_fraction: float = Field(default=0.6, gt=0.0, le=1.0, description="Support box as fraction of the grid")
    taper_fraction: float = Field(default=0.8, gt=0.0, lt=1.0, description="Untapered share of the support box")
    q1: Optional[GaussianSpec] = Field(default_factory=lambda: _default_component(0.3, -0.2, 0.0))
    q2: Optional[GaussianSpec] = Field(default_factory=lambda: _default_component(-0.3, 0.2, 0.5))
    q3: Optional[GaussianSpec] = Field(default_factory=lambda: _default_component(0.2, 0.3, -0.4))
    q4: Optional[GaussianSpec] = Field(default_factory=lambda: _default_component(-0.2, -0.3, 1.0))

    @model_validator(mode="after")
    def validate_path(self) -> "PotentialSpec":
        """A file family needs a path."""
        if self.family == "file" and not self.path:
            raise ValueError("potential.path is required when potential.family = 'file'")
        return self


class TimeSpec(BaseModel):
    """Time horizon and stepping."""

    model_config = ConfigDict(extra="forbid")

    t_final: float = Field(default=0.5, ge=0.0, description="Final time")
    dt: Optional[float] = Field(default=None, gt=0.0, description="Direct-solver step; CFL-derived when unset")
    cfl: float = Field(default=0.9, gt=0.0, le=1.0, description="CFL number for the direct solver")
    snapshot_stride: int = Field(default=1, ge=1, description="Steps between stored snapshots")


class ScatteringSpec(BaseModel):
    """Kernel window and scattering checks."""

    model_config = ConfigDict(extra="forbid")

    padding: int = Field(default=0, ge=0, description="Extra kernel nodes per side beyond the computed minimum")
    edge_tol: float = Field(default=1e-6, gt=0.0, description="Kernel edge-decay tolerance")
    domain_tol: float = Field(default=1e-10, gt=0.0, description="Largest |q| tolerated on the box frame")


class MarchenkoSpec(BaseModel):
    """Nyström solver options."""

    model_config = ConfigDict(extra="forbid")

    method: Literal["dense", "reduced"] = Field(default="dense", description="B-equation solver")
    cond_limit: float = Field(default=1e12, gt=1.0, description="Largest accepted condition estimate")


class ToleranceSpec(BaseModel):
    """Acceptance tolerances."""

    model_config = ConfigDict(extra="forbid")

    compare: float = Field(default=5e-2, gt=0.0, description="IST against direct solver, relative L2")
    roundtrip: float = Field(default=2e-2, gt=0.0, description="Forward then inverse, relative L2")


class ConvergenceSpec(BaseModel):
    """Refinement study selection."""

    model_config = ConfigDict(extra="forbid")

    study: Literal["roundtrip", "propagate", "direct", "transport"] = Field(default="roundtrip")
    levels: int = Field(default=3, ge=2, le=4, description="Number of refinement levels")


class RunSpec(BaseModel):
    """Output and execution options."""

    model_config = ConfigDict(extra="forbid")

    output_dir: str = Field(default="output", description="Directory for data files and reports")
    format: Literal["binary", "text"] = Field(default="binary", description="Field file format")
    strict: bool = Field(default=False, description="Escalate diagnostics to errors")
    seed: int = Field(default=0, ge=0, description="Seed for the smooth test fields")
    threads: int = Field(default=1, ge=1, description="Worker threads")


class ScenarioConfig(BaseModel):
    """Complete description of one computation."""

    model_config = ConfigDict(extra="forbid")

    schema_version: str = Field(default=SCENARIO_SCHEMA_VERSION, description="Scenario grammar version")
    grid: GridSpec = Field(default_factory=GridSpec)
    lax: LaxParameters = Field(default_factory=lambda: LaxParameters(b1=1.0, b2=0.0, b3=-1.0))
    potential: PotentialSpec = Field(default_factory=PotentialSpec)
    time: TimeSpec = Field(default_factory=TimeSpec)
    scattering: ScatteringSpec = Field(default_factory=ScatteringSpec)
    marchenko: MarchenkoSpec = Field(default_factory=MarchenkoSpec)
    tolerances: ToleranceSpec = Field(default_factory=ToleranceSpec)
    convergence: ConvergenceSpec = Field(default_factory=ConvergenceSpec)
    run: RunSpec = Field(default_factory=RunSpec)

    @model_validator(mode="after")
    def validate_support(self) -> "ScenarioConfig":
        """Gaussian centres must sit inside the support box."""
        grid = self.grid
        half = 0.5 * self.potential.support_fraction * (grid.x_max - grid.x_min)
        cx = 0.5 * (grid.x_min + grid.x_max)
        cy = 0.5 * (grid.y_min + grid.y_max)
        for name in ("q1", "q2", "q3", "q4"):
            spec = getattr(self.potential, name)
            if spec is not None and spec.amplitude != 0.0:
                if abs(spec.x0 - cx) >= half or abs(spec.y0 - cy) >= half:
                    raise ValueError(f"potential.{name} centre lies outside the support box")
        return self

    def with_grid_size(self, n: int) -> "ScenarioConfig":
        """Copy of this scenario on the same box with n points per axis."""
        grid = self.grid.model_copy(update={"n": n})
        return self.model_copy(update={"grid": grid})


def parse_override(raw: str) -> tuple[list[str], Any]:
    """Split a ``section.key=value`` override.

    Args:
        raw: Override text from the command line

    Returns:
        Dotted key path and parsed value (a TOML literal, else the bare string)
    """
    key, sep, value = raw.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigurationException(
            f"Override must look like section.key=value: {raw!r}",
            details={"override": raw}
        )
    value = value.strip()
    try:
        parsed = tomllib.loads(f"value = {value}")["value"]
    except tomllib.TOMLDecodeError:
        parsed = value
    return key.split("."), parsed


def default_scenario_data() -> Dict[str, Any]:
    """Plain nested dictionary of the default scenario, the base every file and override patches."""
    return ScenarioConfig().model_dump(exclude={"lax": {"k1", "k2", "k3", "k4"}})


def merge_scenario_data(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively merge ``update`` into ``base`` in place; untouched keys keep their values."""
    for key, value in update.items():
        current = base.get(key)
        if isinstance(value, dict) and isinstance(current, dict):
            merge_scenario_data(current, value)
        else:
            base[key] = value
    return base


def apply_overrides(data: Dict[str, Any], overrides: Sequence[str]) -> Dict[str, Any]:
    """Apply dotted overrides to a nested scenario dictionary in place."""
    for raw in overrides:
        path, value = parse_override(raw)
        node = data
        for part in path[:-1]:
            child = node.setdefault(part, {})
            if not isinstance(child, dict):
                raise ConfigurationException(
                    f"Override path crosses a scalar at {part!r}",
                    details={"override": raw}
                )
            node = child
        node[path[-1]] = value
    return data


def load_scenario(
    path: Optional[Path] = None,
    overrides: Sequence[str] = (),
    output_dir: Optional[str] = None,
) -> ScenarioConfig:
    """Read, patch and validate a scenario.

    Precedence, lowest first: defaults, file, overrides, OUTPUT_DIR environment setting,
    ``output_dir`` argument. Files and overrides patch single keys; every other key keeps its value.

    Args:
        path: TOML scenario file; defaults are used when omitted
        overrides: ``section.key=value`` strings
        output_dir: Output directory from the command line

    Returns:
        Validated scenario
    """
    data = default_scenario_data()
    if path is not None:
        try:
            with open(path, "rb") as fh:
                merge_scenario_data(data, tomllib.load(fh))
        except FileNotFoundError as exc:
            raise ConfigurationException(f"Scenario file not found: {path}", details={"path": str(path)}) from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigurationException(
                f"Scenario file is not valid: {exc}",
                details={"path": str(path)}
            ) from exc

    apply_overrides(data, overrides)

    run = data.setdefault("run", {})
    if settings.OUTPUT_DIR:
        run["output_dir"] = settings.OUTPUT_DIR
    if output_dir:
        run["output_dir"] = output_dir

    try:
        return ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigurationException(
            "Scenario validation failed",
            details={"errors": json.loads(exc.json(include_url=False))}
        ) from exc
