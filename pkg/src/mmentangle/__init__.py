"""Event-level simulation of the rotating two-interferometer entanglement experiment."""

__version__ = "0.1.0"
