"""Workload spec files: YAML validated by pydantic models."""

from pathlib import Path
from typing import Any, Dict, Literal, Optional, Union

import yaml
from pydantic import BaseModel, Field, ValidationError, model_validator

from src.utils.errors import WorkloadSpecError

KIB = 1024
MIB = 1024 * KIB


class OpMix(BaseModel):
    read: float = Field(0.0, ge=0.0, le=1.0)
    write: float = Field(1.0, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _sums_to_one(self) -> "OpMix":
        if abs(self.read + self.write - 1.0) > 1e-9:
            raise ValueError(f"read + write must equal 1, got {self.read + self.write}")
        return self


class SizeDistribution(BaseModel):
    """Payload sizes of workload records, in bytes."""
    min: int = Field(32, ge=0)
    max: int = Field(160, ge=0)
    distribution: Literal["uniform", "fixed", "geometric"] = "uniform"

    @model_validator(mode="after")
    def _ordered(self) -> "SizeDistribution":
        if self.max < self.min:
            raise ValueError("max must be >= min")
        return self


class Retention(BaseModel):
    """How long workload data stays reachable."""
    cohort_bytes: int = Field(1 * MIB, gt=0)
    cohort_ops: int = Field(10_000, gt=0)
    transient_bytes: int = Field(8 * KIB, ge=0)
    survivor_window: int = Field(2, ge=0)
    index_fraction: float = Field(0.1, ge=0.0, le=1.0)
    batch_vertices: int = Field(2_000, gt=0)
    edges_per_vertex: int = Field(4, ge=0)
    batches_live: int = Field(1, ge=1)


class WorkloadSpec(BaseModel):
    """A deterministic, seed-driven operation trace description."""
    kind: Literal["buffer", "batch", "churn", "mixed"]
    name: Optional[str] = None
    duration_ops: int = Field(..., gt=0)
    op_mix: OpMix = Field(default_factory=OpMix)
    object_size_dist: SizeDistribution = Field(default_factory=SizeDistribution)
    retention: Retention = Field(default_factory=Retention)
    pretenure_enabled: bool = True
    seed: int = 0
    threads: int = Field(1, ge=1)
    checkpoint_every: int = Field(0, ge=0)
    heap: Dict[str, Any] = Field(default_factory=dict)

    @property
    def label(self) -> str:
        return self.name or self.kind

    def identity(self) -> Dict[str, Any]:
        """Fields that must match for two runs to be comparable."""
        return {
            "workload": self.label,
            "kind": self.kind,
            "op_mix": self.op_mix.model_dump(),
            "seed": self.seed,
            "duration_ops": self.duration_ops,
            "pretenure_enabled": self.pretenure_enabled,
        }


def parse_workload(data: Dict[str, Any], source: Optional[str] = None) -> WorkloadSpec:
    try:
        return WorkloadSpec.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or "spec"
        raise WorkloadSpecError(f"{location}: {first['msg']}", source) from exc


def load_workload(path: Union[str, Path]) -> WorkloadSpec:
    """Read and validate a workload spec file."""
    path = Path(path)
    if not path.exists():
        raise WorkloadSpecError("file not found", str(path))
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise WorkloadSpecError(f"invalid YAML: {exc}", str(path)) from exc
    if not isinstance(data, dict):
        raise WorkloadSpecError("top level must be a mapping", str(path))
    spec = parse_workload(data, str(path))
    if spec.name is None:
        spec = spec.model_copy(update={"name": path.stem})
    return spec
