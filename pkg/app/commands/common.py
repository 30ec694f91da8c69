"""
Helpers shared by the CLI subcommands
"""
import logging
from pathlib import Path
from typing import Optional
from zoneinfo import ZoneInfo

from app.config import PipelineConfig, get_settings
from app.exceptions import ConfigError
from app.services.ble import ProviderClassifier
from app.services.geo_graph import AtomicNetwork, assign_campus, build_graph
from app.storage import BaseStorage, StorageFactory, load_campus_polygons, load_geojson

logger = logging.getLogger(__name__)


def output_storage(config: PipelineConfig) -> BaseStorage:
    return StorageFactory.for_output(config.output_dir, config.storage_backend)


def zone_of(config: PipelineConfig) -> ZoneInfo:
    return ZoneInfo(config.timezone)


def classifier_of(config: PipelineConfig) -> ProviderClassifier:
    rules = config.paths.provider_rules
    return ProviderClassifier.from_file(rules) if rules else ProviderClassifier.default()


def existing_path(value: Optional[Path], name: str) -> Optional[Path]:
    """
    Optional input path that must exist when given

    Raises:
        ConfigError: If the path is set but missing
    """
    if value is None:
        return None
    if not Path(value).exists():
        raise ConfigError(f"{name} path does not exist: {value}")
    return Path(value)


def write_summary(storage: BaseStorage, command: str, summary: dict, stem: Optional[str] = None) -> dict:
    """Write `<stem>_summary.json` (stem defaults to the command); the only output carrying the tool version"""
    document = dict(summary, command=command, version=get_settings().version)
    storage.write_json(f"{stem or command}_summary.json", document)
    return document


def load_network(config: PipelineConfig) -> AtomicNetwork:
    """
    Atomic network of the configured GeoJSON, with campuses attached and the
    optional campus restriction applied

    Raises:
        ConfigError: If the network path is missing or the campus has no segments
    """
    network = build_graph(load_geojson(config.require("network")))
    for diagnostic in network.diagnostics:
        logger.warning(f"Network feature {diagnostic.feature_index}: {diagnostic.message}")
    if network.crossings:
        logger.warning(f"{len(network.crossings)} segment pairs cross away from shared vertices (kept unsplit)")

    polygons_path = existing_path(config.paths.campus_polygons, "campus_polygons")
    if polygons_path is not None:
        network = network.with_campus(assign_campus(network, load_campus_polygons(polygons_path)))

    campus = config.analysis.campus
    if campus:
        if polygons_path is None:
            raise ConfigError(f"analysis.campus={campus!r} needs a campus_polygons path")
        network = network.restricted_to(campus)
        if len(network) == 0:
            raise ConfigError(f"campus {campus!r} contains no segments")
        logger.info(f"Analysis restricted to campus {campus}: {len(network)} segments")
    return network
