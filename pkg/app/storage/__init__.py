"""
Storage module for pipeline inputs and outputs
"""
from .base import BaseStorage
from .factory import StorageFactory
from .file_storage import FileStorage
from .memory_storage import MemoryStorage
from .loaders import (
    SCHEDULE_CSV_HEADER,
    load_campus_polygons,
    load_encounters,
    load_feedback,
    load_geojson,
    load_receptions,
    load_schedule,
    load_truth,
    schedule_rows,
)

__all__ = [
    "BaseStorage",
    "StorageFactory",
    "FileStorage",
    "MemoryStorage",
    "SCHEDULE_CSV_HEADER",
    "load_campus_polygons",
    "load_encounters",
    "load_feedback",
    "load_geojson",
    "load_receptions",
    "load_schedule",
    "load_truth",
    "schedule_rows",
]
