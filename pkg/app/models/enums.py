"""
Enum definitions for the encounter analysis pipeline
"""
from enum import Enum


class Provider(str, Enum):
    """E-scooter service providers recognised from BLE payloads"""
    BIRD = "Bird"
    LIME = "Lime"
    BLUE_DUCK = "BlueDuck"
    UNKNOWN = "Unknown"


class ProximityClass(str, Enum):
    """Coarse distance class derived from RSSI"""
    WITHIN_ONE_FOOT = "WithinOneFoot"
    NEAR = "Near"
    FAR = "Far"


class MatchKind(str, Enum):
    """How a provider rule pattern is matched"""
    SUBSTRING = "substring"
    REGEX = "regex"


class MatchField(str, Enum):
    """Which part of the payload a provider rule inspects"""
    LOCAL_NAME = "local_name"
    RAW = "raw"


class EncounterKind(str, Enum):
    """Source of an encounter"""
    PREDICTED = "Predicted"
    OBSERVED = "Observed"


class StartleClass(str, Enum):
    """Heart-rate reaction to an observed encounter"""
    ELEVATED = "Elevated"
    NORMAL = "Normal"
    UNKNOWN = "Unknown"


class FunctionalClass(str, Enum):
    """Functional classification of an atomic segment"""
    ARTERIAL = "Arterial"
    COLLECTOR = "Collector"
    LOCAL = "Local"
    SHARED_USE_PATH = "SharedUsePath"
    SIDEWALK = "Sidewalk"
    OTHER = "Other"


UNMATCHED_CLASS = "Unmatched"


class Keying(str, Enum):
    """Key space used when counting encounters"""
    SPACE = "space"
    TIME = "time"
    WEEK_TIME = "weektime"
    SPACE_TIME = "spacetime"
    HOUR = "hour"


class Group(str, Enum):
    """Encounter-count group of a key"""
    HIGH = "High"
    LOW = "Low"


class SplitRounding(str, Enum):
    """Rounding of M/2 when splitting keys into High/Low groups"""
    FLOOR = "floor"
    CEIL = "ceil"


class PemFormula(str, Enum):
    """Definition used for Percent Encounters per Mile"""
    MEM_SHARE = "mem_share"
    TES_SHARE = "tes_share"


class MemMethod(str, Enum):
    """Aggregation used for Mean Encounters per Mile"""
    MEAN_OF_RATIOS = "mean_of_ratios"
    RATIO_OF_TOTALS = "ratio_of_totals"


class PoiKind(str, Enum):
    """Role of a point of interest in pedestrian/rider flows"""
    ATTRACTOR = "Attractor"
    GENERATOR = "Generator"
    BOTH = "Both"


DAY_NAMES = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
