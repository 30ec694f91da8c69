"""
BLE advertisement parsing, provider fingerprinting and RSSI proximity
"""
import logging
import math
import re
import sys
from pathlib import Path
from typing import Iterable, List, Mapping, Optional, Pattern, Tuple, Union

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - Python < 3.11 fallback
    import tomli as tomllib

from pydantic import ValidationError

from app.config import get_settings
from app.exceptions import ConfigError, DomainError
from app.models import (
    AdvertisementData,
    Encounter,
    MatchField,
    MatchKind,
    Provider,
    ProviderBaselines,
    ProviderRule,
    ProximityClass,
    ProximityEstimate,
)

logger = logging.getLogger(__name__)

# AD structure types
AD_FLAGS = 0x01
AD_UUID16_INCOMPLETE = 0x02
AD_UUID16_COMPLETE = 0x03
AD_SHORT_LOCAL_NAME = 0x08
AD_COMPLETE_LOCAL_NAME = 0x09
AD_TX_POWER = 0x0A
AD_MANUFACTURER_DATA = 0xFF

DEFAULT_PATH_LOSS_EXPONENT = 2.0
PATH_LOSS_EXPONENT_RANGE = (1.5, 4.0)
FAR_THRESHOLD_FT = 25.0


def parse_advertisement(payload: bytes) -> AdvertisementData:
    """
    Walk the length-type-value AD structures of an advertising payload

    Args:
        payload: Raw advertising data

    Returns:
        Decoded fields; a truncated structure ends parsing silently
    """
    result = AdvertisementData()
    service_uuids: List[str] = []
    i = 0
    while i < len(payload):
        length = payload[i]
        if length == 0 or i + 1 + length > len(payload):
            break
        ad_type = payload[i + 1]
        value = payload[i + 2:i + 1 + length]

        if ad_type in (AD_SHORT_LOCAL_NAME, AD_COMPLETE_LOCAL_NAME):
            # Complete name wins over a shortened one
            if result.local_name is None or ad_type == AD_COMPLETE_LOCAL_NAME:
                result.local_name = value.decode("utf-8", errors="ignore")
        elif ad_type == AD_FLAGS and value:
            result.flags = value[0]
        elif ad_type == AD_TX_POWER and value:
            result.tx_power_dbm = int.from_bytes(value[:1], byteorder="little", signed=True)
        elif ad_type == AD_MANUFACTURER_DATA and len(value) >= 2:
            result.manufacturer_id = int.from_bytes(value[0:2], byteorder="little")
            result.manufacturer_data = value[2:]
        elif ad_type in (AD_UUID16_INCOMPLETE, AD_UUID16_COMPLETE):
            for j in range(0, len(value) - 1, 2):
                service_uuids.append(value[j:j + 2][::-1].hex().upper())

        i += length + 1

    result.service_uuids_16 = service_uuids
    return result


def build_advertisement(local_name: str, manufacturer_id: Optional[int] = None, extra: bytes = b"") -> bytes:
    """Assemble a payload with flags, a complete local name and optional manufacturer data"""
    name = local_name.encode("utf-8")
    payload = bytes([2, AD_FLAGS, 0x06]) + bytes([len(name) + 1, AD_COMPLETE_LOCAL_NAME]) + name
    if manufacturer_id is not None:
        data = manufacturer_id.to_bytes(2, byteorder="little") + extra
        payload += bytes([len(data) + 1, AD_MANUFACTURER_DATA]) + data
    return payload


class ProviderClassifier:
    """Fingerprints the service provider of a scooter from its advertising payload"""

    def __init__(
        self,
        rules: Iterable[ProviderRule],
        baselines: Optional[ProviderBaselines] = None,
    ):
        self.rules: Tuple[ProviderRule, ...] = tuple(rules)
        self.baselines = baselines or ProviderBaselines()
        self._compiled: List[Tuple[ProviderRule, Pattern]] = []
        for rule in self.rules:
            pattern = rule.pattern if rule.match == MatchKind.REGEX else re.escape(rule.pattern)
            try:
                self._compiled.append((rule, re.compile(pattern, re.IGNORECASE)))
            except re.error as e:
                raise ConfigError(f"invalid provider rule pattern {rule.pattern!r}: {e}")
        logger.debug(f"ProviderClassifier initialised with {len(self.rules)} rules")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "ProviderClassifier":
        """
        Load rules and baselines from a TOML rule file

        Raises:
            ConfigError: If the file is missing or malformed
        """
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"provider rule file not found: {path}")
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path}: {e}")

        try:
            rules = [ProviderRule.parse_obj(item) for item in data.get("rules", [])]
            raw_baselines = dict(data.get("baselines", {}))
            default = raw_baselines.pop("default", ProviderBaselines().default)
            baselines = ProviderBaselines(by_provider=raw_baselines, default=default)
        except ValidationError as e:
            raise ConfigError(f"{path}: {e}")

        logger.info(f"Loaded {len(rules)} provider rules from {path}")
        return cls(rules, baselines)

    @classmethod
    def default(cls) -> "ProviderClassifier":
        """Classifier built from the configured rule file"""
        return cls.from_file(get_settings().provider_rules_path)

    def classify(self, payload: bytes) -> Provider:
        """
        Return the provider of the first matching rule, Unknown when none match

        Args:
            payload: Raw advertising data
        """
        if not payload:
            return Provider.UNKNOWN
        local_name = parse_advertisement(payload).local_name or ""
        raw = payload.decode("latin-1")
        for rule, pattern in self._compiled:
            text = local_name if rule.target == MatchField.LOCAL_NAME else raw
            if text and pattern.search(text):
                return rule.provider
        return Provider.UNKNOWN


def classify_provider(payload: bytes, classifier: Optional[ProviderClassifier] = None) -> Provider:
    """Fingerprint a payload with the given or the default classifier"""
    return (classifier or ProviderClassifier.default()).classify(payload)


def estimate_distance(
    rssi_db: float,
    provider: Provider,
    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT,
    baselines: Optional[ProviderBaselines] = None,
) -> float:
    """
    Invert the log-distance path-loss model anchored at one foot

    Returns:
        Estimated distance in feet

    Raises:
        DomainError: If rssi_db is not negative or the exponent is out of range
    """
    if rssi_db >= 0:
        raise DomainError(f"rssi_db must be negative, got {rssi_db}")
    low, high = PATH_LOSS_EXPONENT_RANGE
    if not low <= path_loss_exponent <= high:
        raise DomainError(f"path_loss_exponent must be within [{low}, {high}], got {path_loss_exponent}")
    baseline = (baselines or ProviderBaselines()).baseline(provider)
    return 10 ** ((baseline - rssi_db) / (10.0 * path_loss_exponent))


def expected_rssi(
    distance_ft: float,
    provider: Provider,
    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT,
    baselines: Optional[ProviderBaselines] = None,
) -> float:
    """Noise-free RSSI at a distance; distances below one foot are floored"""
    baseline = (baselines or ProviderBaselines()).baseline(provider)
    return baseline - 10.0 * path_loss_exponent * math.log10(max(distance_ft, 1.0))


def proximity_class(
    rssi_db: float,
    provider: Provider,
    path_loss_exponent: float = DEFAULT_PATH_LOSS_EXPONENT,
    baselines: Optional[ProviderBaselines] = None,
    far_threshold_ft: float = FAR_THRESHOLD_FT,
) -> ProximityEstimate:
    """
    Classify an RSSI reading as within one foot, near or far

    Providers without a calibrated baseline are never classified as within one
    foot; their estimate uses the default baseline and is flagged low-confidence.
    """
    baselines = baselines or ProviderBaselines()
    distance_ft = estimate_distance(rssi_db, provider, path_loss_exponent, baselines)
    calibrated = baselines.has_baseline(provider)

    if calibrated and rssi_db >= baselines.baseline(provider):
        proximity = ProximityClass.WITHIN_ONE_FOOT
    elif distance_ft > far_threshold_ft:
        proximity = ProximityClass.FAR
    else:
        proximity = ProximityClass.NEAR

    return ProximityEstimate(proximity=proximity, distance_ft=distance_ft, low_confidence=not calibrated)


def within_one_foot_share(
    encounters: Iterable[Encounter],
    baselines: Optional[ProviderBaselines] = None,
) -> Mapping[str, float]:
    """Fraction of each calibrated provider's encounters whose max RSSI is within one foot"""
    baselines = baselines or ProviderBaselines()
    totals: dict = {}
    close: dict = {}
    for encounter in encounters:
        if not baselines.has_baseline(encounter.provider):
            continue
        key = encounter.provider.value
        totals[key] = totals.get(key, 0) + 1
        if encounter.max_rssi_db >= baselines.baseline(encounter.provider):
            close[key] = close.get(key, 0) + 1
    return {key: close.get(key, 0) / totals[key] for key in sorted(totals)}
