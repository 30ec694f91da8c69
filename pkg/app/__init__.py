"""
Scooter Encounter Analyzer - BLE encounter detection and campus safety metrics
"""
__version__ = "1.0.0"
