"""
Data models for the encounter analysis pipeline
"""
from .enums import (
    DAY_NAMES,
    UNMATCHED_CLASS,
    EncounterKind,
    FunctionalClass,
    Group,
    Keying,
    MatchField,
    MatchKind,
    MemMethod,
    PemFormula,
    PoiKind,
    Provider,
    ProximityClass,
    SplitRounding,
    StartleClass,
)
from .reception import (
    AdvertisementData,
    BleReception,
    GpsFix,
    ProviderBaselines,
    ProviderRule,
    ProximityEstimate,
)
from .encounter import ENCOUNTER_CSV_HEADER, CorpusSummary, DetectorParams, Encounter
from .feedback import (
    FEEDBACK_CSV_HEADER,
    DirectionMatrix,
    FeedbackRecord,
    HeartRateProfile,
    ObservedPredictedLink,
)
from .segment import (
    DEFAULT_CLASS_TABLE,
    SEGMENT_CSV_HEADER,
    AtomicSegment,
    FeatureDiagnostic,
    FunctionalClassMap,
)
from .binning import (
    FrequencyDistribution,
    HourlyCount,
    KeyGroups,
    LocatedEncounter,
    ScheduleCorrelation,
    TimeBin,
    ZoneKey,
)
from .metrics import (
    METRICS_CSV_HEADER,
    RSSI_GROUPS_CSV_HEADER,
    MetricsRow,
    MetricsTable,
    PoiEvent,
    RssiGroupStats,
    Session,
    TesResult,
)
from .simulation import (
    TRUTH_CSV_HEADER,
    GridSpec,
    GroundTruthEncounter,
    MatchedPair,
    ReceptionModel,
    ScoreReport,
    SimConfig,
)

__all__ = [
    "DAY_NAMES",
    "UNMATCHED_CLASS",
    "EncounterKind",
    "FunctionalClass",
    "Group",
    "Keying",
    "MatchField",
    "MatchKind",
    "MemMethod",
    "PemFormula",
    "PoiKind",
    "Provider",
    "ProximityClass",
    "SplitRounding",
    "StartleClass",
    "AdvertisementData",
    "BleReception",
    "GpsFix",
    "ProviderBaselines",
    "ProviderRule",
    "ProximityEstimate",
    "ENCOUNTER_CSV_HEADER",
    "CorpusSummary",
    "DetectorParams",
    "Encounter",
    "FEEDBACK_CSV_HEADER",
    "DirectionMatrix",
    "FeedbackRecord",
    "HeartRateProfile",
    "ObservedPredictedLink",
    "DEFAULT_CLASS_TABLE",
    "SEGMENT_CSV_HEADER",
    "AtomicSegment",
    "FeatureDiagnostic",
    "FunctionalClassMap",
    "FrequencyDistribution",
    "HourlyCount",
    "KeyGroups",
    "LocatedEncounter",
    "ScheduleCorrelation",
    "TimeBin",
    "ZoneKey",
    "METRICS_CSV_HEADER",
    "RSSI_GROUPS_CSV_HEADER",
    "MetricsRow",
    "MetricsTable",
    "PoiEvent",
    "RssiGroupStats",
    "Session",
    "TesResult",
    "TRUTH_CSV_HEADER",
    "GridSpec",
    "GroundTruthEncounter",
    "MatchedPair",
    "ReceptionModel",
    "ScoreReport",
    "SimConfig",
]
