"""Simulation and inference for Chen-distributed lifetimes under improved
adaptive Type-II progressive censoring."""

from .chen import ChenParams
from .censoring import Case, CensoringPlan, CensoredSample

__all__ = ["ChenParams", "Case", "CensoringPlan", "CensoredSample"]
__version__ = "0.1.0"
