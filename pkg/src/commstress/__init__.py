"""commstress: a deterministic benchmark for cooperative multi-agent
communication under parameterized channel impairments."""

__version__ = "0.1.0"
