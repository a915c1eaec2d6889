"""Configuration management for LFPP Lab."""

import os
from pathlib import Path
from typing import List, Optional, Tuple

import yaml
from pydantic import BaseModel, Field, field_validator

from lfpp.utils.analytic import XI_SQRT83
from lfpp.utils.gff import DEFAULT_EXACT_MAX_SIDE, DEFAULT_FOURIER_OFFSET

DEFAULT_CONFIG_PATH = Path.home() / ".lfpp" / "config.yaml"
OUTPUT_ENV_VAR = "LFPP_LAB_OUT"


def default_out_dir() -> str:
    """Output directory from LFPP_LAB_OUT, else ./lfpp-out."""
    return os.environ.get(OUTPUT_ENV_VAR, "lfpp-out")


class SamplerConfig(BaseModel):
    """Field sampler settings."""

    padding_factor: float = Field(default=1.0, ge=0.0)
    fourier_offset: float = DEFAULT_FOURIER_OFFSET
    exact_max_side: int = Field(default=DEFAULT_EXACT_MAX_SIDE, ge=2)
    calibration_level: Optional[int] = None
    calibration_replicates: Optional[int] = None
    calibration_seed: Optional[int] = None


class EngineConfig(BaseModel):
    """Shortest-path engine settings."""

    overflow_limit: float = Field(default=700.0, gt=0.0)


class SimulateConfig(BaseModel):
    """Default experiment plan for ``lfpp simulate``."""

    xi: List[float] = Field(default_factory=lambda: [0.0, XI_SQRT83])
    k: List[int] = Field(default_factory=lambda: [5, 6, 7])
    reps: int = Field(default=20, ge=1)
    sampler: str = "fourier"
    multi_xi: List[float] = Field(default_factory=list)
    census_alpha: List[float] = Field(default_factory=list)

    @field_validator("sampler")
    @classmethod
    def _known_sampler(cls, value: str) -> str:
        if value not in ("exact", "exact_dgff", "fourier", "layered"):
            raise ValueError(f"unknown sampler '{value}'")
        return value


class EstimateConfig(BaseModel):
    """Exponent fitting settings."""

    quantile: float = Field(default=0.5, gt=0.0, lt=1.0)
    lambda_slack: float = Field(default=0.15, ge=0.0)
    g_slack: float = Field(default=0.15, ge=0.0)
    census_slack: float = Field(default=0.3, ge=0.0)
    min_k: int = Field(default=4, ge=0)


class HarnessConfig(BaseModel):
    """Execution settings shared by every command."""

    master_seed: int = Field(default=0, ge=0, lt=2**64)
    workers: int = Field(default=1, ge=1)
    out_dir: str = Field(default_factory=default_out_dir)
    memory_budget_bytes: int = Field(default=2 * 1024**3, gt=0)


class PreviousBound(BaseModel):
    """A config-supplied overlay curve, e.g. an earlier published bound for d_gamma.

    The curve is given as tabulated (x, y) points and drawn dashed.
    """

    label: str
    figure: str = "d_bounds"
    points: List[Tuple[float, float]] = Field(min_length=2)


class PlotConfig(BaseModel):
    """Figure rendering settings."""

    samples: int = Field(default=512, ge=2)
    width: int = Field(default=640, ge=100)
    height: int = Field(default=480, ge=100)
    previous_bounds: List[PreviousBound] = Field(default_factory=list)


class Config(BaseModel):
    """Main configuration model."""

    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    engine: EngineConfig = Field(default_factory=EngineConfig)
    simulate: SimulateConfig = Field(default_factory=SimulateConfig)
    estimate: EstimateConfig = Field(default_factory=EstimateConfig)
    harness: HarnessConfig = Field(default_factory=HarnessConfig)
    plot: PlotConfig = Field(default_factory=PlotConfig)

    @classmethod
    def load(cls, path: Optional[Path] = None) -> "Config":
        """Load configuration from ``path`` or ~/.lfpp/config.yaml."""
        config_path = Path(path) if path else DEFAULT_CONFIG_PATH
        if config_path.exists():
            with open(config_path) as f:
                data = yaml.safe_load(f)
                if data:
                    return cls(**data)
        return cls()

    def save(self, path: Optional[Path] = None) -> Path:
        """Save configuration to ``path`` or ~/.lfpp/config.yaml."""
        config_path = Path(path) if path else DEFAULT_CONFIG_PATH
        config_path.parent.mkdir(parents=True, exist_ok=True)
        with open(config_path, "w") as f:
            yaml.dump(
                self.model_dump(mode="json"), f, default_flow_style=False, sort_keys=False
            )
        return config_path
