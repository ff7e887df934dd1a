"""
app/core/serializers
Central export hub for all serializers.
"""

from .experiment import ExperimentConfigSerializer, parse_int_list, parse_n_sweep

__all__ = [
    "ExperimentConfigSerializer",
    "parse_int_list",
    "parse_n_sweep",
]
