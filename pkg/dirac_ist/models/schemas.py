"""Pydantic models for manifests, reports and error documents."""

from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from dirac_ist.models.fields import Grid2D

REPORT_SCHEMA_VERSION = "1.0"


class ErrorDetail(BaseModel):
    """Error detail model."""

    message: str = Field(..., description="Error message")
    details: Optional[Dict[str, Any]] = Field(default=None, description="Additional error details")
    run_id: Optional[str] = Field(default=None, description="Run ID for tracking")
    exit_code: int = Field(..., description="Process exit code")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "message": "Nyström system is too ill-conditioned",
                "details": {"stage": "reconstruct", "cond": 3.1e12},
                "run_id": "550e8400-e29b-41d4-a716-446655440000",
                "exit_code": 2
            }
        }
    )


class ErrorResponse(BaseModel):
    """Error document written to standard error."""

    success: bool = Field(default=False, description="Success status")
    error: ErrorDetail = Field(..., description="Error details")


class GridInfo(BaseModel):
    """Serialised :class:`Grid2D`."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    n: int

    @classmethod
    def from_grid(cls, grid: Grid2D) -> "GridInfo":
        return cls(x_min=grid.x_min, x_max=grid.x_max, y_min=grid.y_min, y_max=grid.y_max, n=grid.n)

    def to_grid(self) -> Grid2D:
        return Grid2D(self.x_min, self.x_max, self.y_min, self.y_max, self.n)


class AxisInfo(BaseModel):
    """Serialised kernel axis."""

    c_min: float
    h: float
    m: int


class ScatteringManifest(BaseModel):
    """Companion of the four kernel table files."""

    schema_version: str = Field(default=REPORT_SCHEMA_VERSION)
    kind: Literal["scattering"] = "scattering"
    axis: AxisInfo
    grid: GridInfo = Field(..., description="Physical grid the data was computed on")
    t: float = Field(default=0.0, description="Evolution time of the tables")
    format: Literal["binary", "text"] = "binary"
    tables: List[str] = Field(default_factory=lambda: ["F13", "F23", "G31", "G32"])


class SnapshotInfo(BaseModel):
    """One stored potential of a trajectory."""

    index: int
    t: float
    file: str
    energy: float
    outflow: float = Field(..., description="Largest |v12|, |v21| on the outflow edges")


class RunManifest(BaseModel):
    """Companion of potential files written by a command."""

    schema_version: str = Field(default=REPORT_SCHEMA_VERSION)
    kind: Literal["potential", "trajectory", "reconstruction"]
    grid: GridInfo
    b1: Optional[float] = None
    b2: Optional[float] = None
    b3: Optional[float] = None
    t_final: float = 0.0
    dt: Optional[float] = None
    steps: int = 0
    format: Literal["binary", "text"] = "binary"
    snapshots: List[SnapshotInfo] = Field(default_factory=list)


class ConditionSummary(BaseModel):
    """Nyström conditioning over all reconstructed nodes."""

    method: Literal["dense", "reduced"]
    nodes: int
    cond_min: float
    cond_max: float
    cond_median: float
    residual_max: float


class FieldError(BaseModel):
    """Discrepancy of one potential component."""

    field: str
    rel_l2: float = Field(..., description="||q_ist - q_ref|| / ||q_ref||, absolute when the reference is zero")
    max_abs: float


class StageDiagnostics(BaseModel):
    """Numerical diagnostics collected along the spectral pipeline."""

    kernel_m: int
    padding: int
    edge_magnitude_initial: float
    edge_magnitude_evolved: float
    conditioning: Optional[ConditionSummary] = None


class ComparisonReport(BaseModel):
    """Spectral solution against the direct solver at the final time."""

    schema_version: str = Field(default=REPORT_SCHEMA_VERSION)
    n: int
    t_final: float
    b1: float
    b2: float
    b3: float
    method: Literal["dense", "reduced"]
    dt: float
    steps: int
    tolerance: float
    passed: bool
    max_rel_l2: float
    fields: List[FieldError]
    diagnostics: StageDiagnostics
    outflow_max: float = Field(..., description="Largest outflow value of v12, v21 over the direct run")
    energy_initial: float
    energy_direct: float
    energy_ist: float
    timings: Optional[Dict[str, float]] = Field(default=None, description="Stage timings; never part of report.json")

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "schema_version": "1.0",
                "n": 64,
                "t_final": 0.5,
                "b1": 1.0,
                "b2": 0.0,
                "b3": -1.0,
                "method": "reduced",
                "tolerance": 0.05,
                "passed": True,
                "max_rel_l2": 0.012
            }
        }
    )


class RefinementRow(BaseModel):
    """One level of a refinement study."""

    study: str
    n: int
    h: float
    error: float
    order: Optional[float] = Field(default=None, description="log2 of the error ratio to the previous level")


class ResidualRow(BaseModel):
    """One level of a Lax-pair residual study."""

    check: str
    n: int
    h: float
    dt: float
    residual: float
    order: Optional[float] = None


class TimingReport(BaseModel):
    """Wall-clock seconds per stage of one invocation."""

    run_id: str
    command: str
    stages: Dict[str, float]
    total_seconds: float


class StudyReport(BaseModel):
    """Rows of a refinement or Lax-pair study."""

    schema_version: str = Field(default=REPORT_SCHEMA_VERSION)
    kind: Literal["refinement", "lax"]
    n_coarse: int
    levels: int
    rows: List[Union[RefinementRow, ResidualRow]] = Field(default_factory=list)
