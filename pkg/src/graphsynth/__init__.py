"""Stabilizer state preparation via graph decimation search."""

__version__ = "0.1.0"

BRIDGE_PROTOCOL_VERSION = "graphsynth-bridge/1"
