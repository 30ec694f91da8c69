"""
Configuration module
"""
from .settings import Settings, get_settings
from .pipeline import AnalysisConfig, FeedbackConfig, PathsConfig, PipelineConfig

__all__ = [
    "Settings",
    "get_settings",
    "AnalysisConfig",
    "FeedbackConfig",
    "PathsConfig",
    "PipelineConfig",
]
