"""homenetclf: classify home network faults from raw networking tool output."""

__version__ = "0.1.0"
