"""Carbon-aware client and time-slot scheduling for federated learning."""

__version__ = "0.1.0"
