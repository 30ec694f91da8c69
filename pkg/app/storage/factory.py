"""
Storage factory for creating output backends
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Type, Union

from app.exceptions import ConfigError
from .base import BaseStorage
from .file_storage import FileStorage
from .memory_storage import MemoryStorage

logger = logging.getLogger(__name__)


class StorageFactory:
    """Factory class for creating output backends"""

    # Registry of available output backends
    _storage_backends: Dict[str, Type[BaseStorage]] = {
        "file_storage": FileStorage,
        "memory": MemoryStorage,
    }

    _default_backend = "file_storage"

    @classmethod
    def create(cls, backend: Optional[str] = None, **kwargs) -> BaseStorage:
        """
        Create an output backend

        Args:
            backend: Backend name, defaults to 'file_storage'
            **kwargs: Passed to the backend constructor (e.g. base_dir)

        Raises:
            ConfigError: If backend is not registered
        """
        backend = backend or cls._default_backend

        if backend not in cls._storage_backends:
            available = ", ".join(sorted(cls._storage_backends))
            raise ConfigError(f"Unsupported storage backend: '{backend}'. Available backends: {available}")

        logger.debug(f"Creating storage backend: {backend}")
        return cls._storage_backends[backend](**kwargs)

    @classmethod
    def for_output(cls, out_dir: Union[str, Path], backend: Optional[str] = None) -> BaseStorage:
        """Backend rooted at a command's output directory"""
        if (backend or cls._default_backend) == "file_storage":
            return cls.create(backend, base_dir=out_dir)
        return cls.create(backend)

    @classmethod
    def get_available_backends(cls) -> List[str]:
        return sorted(cls._storage_backends)
