"""
Local file system storage implementation
"""
import csv
import json
import logging
import os
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence, Union

from .base import BaseStorage
from app.config import get_settings

logger = logging.getLogger(__name__)
settings = get_settings()


def dumps(obj: Any, indent: Optional[int] = None) -> str:
    """Deterministic JSON: sorted keys, no NaN, UTF-8 text kept as is"""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False, indent=indent)


class FileStorage(BaseStorage):
    """Local file system output backend; repeated writes of equal data are byte-identical"""

    def __init__(self, base_dir: Optional[Union[str, Path]] = None):
        """
        Initialize file storage

        Args:
            base_dir: Base directory for output files.
                     Defaults to settings.output_dir
        """
        self.base_dir = Path(base_dir or settings.output_dir)
        os.makedirs(self.base_dir, exist_ok=True)
        logger.info(f"FileStorage initialized with base_dir: {self.base_dir}")

    def path(self, name: str) -> Path:
        return self.base_dir / name

    def exists(self, name: str) -> bool:
        return self.path(name).exists()

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        destination = self.path(name)
        count = 0
        with open(destination, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
                count += 1
        logger.info(f"Wrote {count} rows to: {destination}")
        return destination

    def write_jsonl(self, name: str, records: Iterable[dict]) -> Path:
        destination = self.path(name)
        count = 0
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            for record in records:
                f.write(dumps(record))
                f.write("\n")
                count += 1
        logger.info(f"Wrote {count} records to: {destination}")
        return destination

    def write_json(self, name: str, obj: Any) -> Path:
        destination = self.path(name)
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps(obj, indent=2))
            f.write("\n")
        logger.info(f"Wrote JSON document to: {destination}")
        return destination

    def write_geojson(self, name: str, collection: dict) -> Path:
        if collection.get("type") != "FeatureCollection":
            raise ValueError("GeoJSON output must be a FeatureCollection")
        destination = self.path(name)
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            f.write(dumps(collection))
            f.write("\n")
        logger.info(f"Wrote {len(collection.get('features', []))} features to: {destination}")
        return destination
