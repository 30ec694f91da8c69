"""
Pipeline configuration loaded from TOML

Precedence: built-in defaults < Settings/environment < config file < CLI flags.
"""
import copy
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python < 3.11 fallback
    import tomli as tomllib

from pydantic import BaseModel, Field, ValidationError, validator

from app.exceptions import ConfigError
from app.models import DetectorParams, MemMethod, PemFormula, SimConfig, SplitRounding
from .settings import get_settings

logger = logging.getLogger(__name__)

PATH_SECTION_KEYS = (
    "network", "receptions", "feedback", "schedule", "campus_polygons",
    "encounters", "truth", "provider_rules",
)


class PathsConfig(BaseModel):
    """Input files of the pipeline stages"""
    network: Optional[Path] = None
    receptions: Optional[Path] = None
    feedback: Optional[Path] = None
    schedule: Optional[Path] = None
    campus_polygons: Optional[Path] = None
    encounters: Optional[Path] = None
    truth: Optional[Path] = None
    provider_rules: Optional[Path] = None


class FeedbackConfig(BaseModel):
    """Observed-encounter processing"""
    prompt_interval_s: float = Field(default=900.0, ge=0.0)
    bin_width_bpm: float = Field(default=5.0, gt=0.0)
    spread_multiplier: float = Field(default=3.0, gt=0.0)
    min_samples: int = Field(default=30, ge=1)
    link_tolerance_s: float = Field(default=60.0, ge=0.0)


class AnalysisConfig(BaseModel):
    """Network matching, binning and metric options"""
    max_snap_distance_m: float = Field(default=25.0, gt=0.0)
    split_rounding: SplitRounding = SplitRounding.FLOOR
    pem_formula: PemFormula = PemFormula.MEM_SHARE
    mem_method: MemMethod = MemMethod.MEAN_OF_RATIOS
    campus: Optional[str] = Field(default=None, description="Restrict the analysis to one campus polygon")
    correlation_days: List[int] = Field(default_factory=lambda: [0, 1, 2, 3, 4, 5])
    percentiles: List[float] = Field(default_factory=lambda: [50.0, 75.0, 90.0, 95.0, 99.0])

    @validator("correlation_days", each_item=True)
    def valid_day(cls, v):
        if not 0 <= v <= 6:
            raise ValueError("days are numbered 0 (Monday) to 6 (Sunday)")
        return v


class PipelineConfig(BaseModel):
    """Single source of truth for a pipeline run"""
    seed: int = 7
    timezone: str = "America/Chicago"
    output_dir: Path = Path("./output")
    storage_backend: str = Field(default="file_storage", description="Output backend; 'memory' writes nothing to disk")
    max_workers: int = Field(default=1, ge=1)
    paths: PathsConfig = Field(default_factory=PathsConfig)
    detector: DetectorParams = Field(default_factory=DetectorParams)
    feedback: FeedbackConfig = Field(default_factory=FeedbackConfig)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    simulation: SimConfig = Field(default_factory=SimConfig)

    @validator("timezone")
    def valid_timezone(cls, v):
        from zoneinfo import ZoneInfo, ZoneInfoNotFoundError
        try:
            ZoneInfo(v)
        except (ZoneInfoNotFoundError, ValueError):
            raise ValueError(f"unknown timezone: {v}")
        return v

    @classmethod
    def load(
        cls,
        path: Optional[Union[str, Path]] = None,
        overrides: Optional[Dict[str, Any]] = None,
    ) -> "PipelineConfig":
        """
        Build the configuration for a run

        Args:
            path: Optional TOML config file; relative paths inside it resolve against its directory
            overrides: Values from CLI flags, nested by section

        Raises:
            ConfigError: If the file is missing, unreadable or invalid
        """
        settings = get_settings()
        data: Dict[str, Any] = {
            "timezone": settings.default_timezone,
            "output_dir": settings.output_dir,
            "storage_backend": settings.storage_backend,
            "max_workers": settings.max_workers,
            "paths": {"provider_rules": settings.provider_rules_path},
        }

        if path is not None:
            path = Path(path)
            if not path.is_file():
                raise ConfigError(f"config file not found: {path}")
            try:
                with open(path, "rb") as f:
                    file_data = tomllib.load(f)
            except tomllib.TOMLDecodeError as e:
                raise ConfigError(f"{path}: {e}")
            _resolve_paths(file_data, path.parent)
            data = _deep_merge(data, file_data)
            logger.info(f"Loaded pipeline config from {path}")

        data = _deep_merge(data, overrides or {})
        _propagate(data)

        try:
            return cls.parse_obj(data)
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}")

    def require(self, name: str) -> Path:
        """
        Path of a configured input that must exist

        Raises:
            ConfigError: If the path is unset or missing
        """
        value = getattr(self.paths, name)
        if value is None:
            raise ConfigError(f"no {name} path configured (set [paths].{name} or pass --{name.replace('_', '-')})")
        if not Path(value).exists():
            raise ConfigError(f"{name} path does not exist: {value}")
        return Path(value)


def _deep_merge(base: Dict[str, Any], update: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def _resolve_paths(data: Dict[str, Any], root: Path) -> None:
    def resolve(value):
        p = Path(value)
        return str(p if p.is_absolute() else (root / p))

    for key in PATH_SECTION_KEYS:
        if data.get("paths", {}).get(key):
            data["paths"][key] = resolve(data["paths"][key])
    if data.get("output_dir"):
        data["output_dir"] = resolve(data["output_dir"])
    for key in ("network", "schedule"):
        if data.get("simulation", {}).get(key):
            data["simulation"][key] = resolve(data["simulation"][key])


def _propagate(data: Dict[str, Any]) -> None:
    """Top-level seed and timezone apply wherever a section does not set its own"""
    detector = data.setdefault("detector", {})
    detector.setdefault("timezone", data["timezone"])
    simulation = data.setdefault("simulation", {})
    simulation.setdefault("timezone", data["timezone"])
    simulation.setdefault("seed", data.get("seed", 7))
    simulation.setdefault("detector", dict(detector))
