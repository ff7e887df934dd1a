from .sweep_repository import SweepRepository

__all__ = [
    "SweepRepository",
]
