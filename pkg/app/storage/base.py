"""
Base storage interface
"""
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Iterable, Sequence


class BaseStorage(ABC):
    """Abstract base class for output backends"""

    @abstractmethod
    def write_csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
        """
        Write a CSV table with a header row

        Args:
            name: File name relative to the backend root
            header: Column names
            rows: Row tuples; values are written with str()

        Returns:
            Path where the table was written
        """
        pass

    @abstractmethod
    def write_jsonl(self, name: str, records: Iterable[dict]) -> Path:
        """
        Write one JSON object per line

        Returns:
            Path where the records were written
        """
        pass

    @abstractmethod
    def write_json(self, name: str, obj: Any) -> Path:
        """
        Write a single JSON document

        Returns:
            Path where the document was written
        """
        pass

    @abstractmethod
    def write_geojson(self, name: str, collection: dict) -> Path:
        """
        Write a GeoJSON FeatureCollection

        Returns:
            Path where the collection was written
        """
        pass

    @abstractmethod
    def path(self, name: str) -> Path:
        """Location a file of this name is (or would be) written to"""
        pass

    @abstractmethod
    def exists(self, name: str) -> bool:
        """
        Check if a file exists in storage

        Args:
            name: File name relative to the backend root

        Returns:
            True if exists, False otherwise
        """
        pass
