"""
Application configuration settings
"""
from functools import lru_cache
from pathlib import Path
from typing import Optional

from pydantic import BaseSettings
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

DEFAULT_PROVIDER_RULES = Path(__file__).with_name("provider_rules.toml")


class Settings(BaseSettings):
    """Application settings"""

    # Application
    app_name: str = "Scooter Encounter Analyzer"
    version: str = "1.0.0"
    environment: str = "development"

    # Logging
    log_level: str = "INFO"
    log_file: Optional[str] = None
    log_json: bool = False

    # Pipeline defaults
    default_timezone: str = "America/Chicago"
    output_dir: str = "./output"
    storage_backend: str = "file_storage"
    provider_rules_path: str = str(DEFAULT_PROVIDER_RULES)
    max_workers: int = 1


@lru_cache()
def get_settings() -> Settings:
    """Get cached settings instance"""
    return Settings()
