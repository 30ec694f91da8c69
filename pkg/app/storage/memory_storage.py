"""
In-memory output backend
"""
import csv
import io
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence

from .base import BaseStorage
from .file_storage import dumps

logger = logging.getLogger(__name__)


class MemoryStorage(BaseStorage):
    """Keeps rendered outputs as text keyed by name; produces the same bytes as FileStorage"""

    def __init__(self):
        self.files: Dict[str, str] = {}

    def path(self, name: str) -> Path:
        return Path(name)

    def exists(self, name: str) -> bool:
        return name in self.files

    def text(self, name: str) -> str:
        return self.files[name]

    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        self.files[name] = buffer.getvalue()
        return self.path(name)

    def write_jsonl(self, name: str, records: Iterable[dict]) -> Path:
        self.files[name] = "".join(dumps(record) + "\n" for record in records)
        return self.path(name)

    def write_json(self, name: str, obj: Any) -> Path:
        self.files[name] = dumps(obj, indent=2) + "\n"
        return self.path(name)

    def write_geojson(self, name: str, collection: dict) -> Path:
        if collection.get("type") != "FeatureCollection":
            raise ValueError("GeoJSON output must be a FeatureCollection")
        self.files[name] = dumps(collection) + "\n"
        return self.path(name)
