"""Coverage-hole tooling for random sensor deployments."""

__version__ = "0.1.0"
