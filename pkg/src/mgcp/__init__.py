"""Multiparameter generalized counting processes: exact laws, samplers and checks."""

from mgcp.fractional_variants import FractionalOrders, VariantKind
from mgcp.gcp_core import MultiTime, PmfTable, RateMatrix
from mgcp.integrals import IntegralSpec
from mgcp.samplers import RngStream
from mgcp.special_functions import MlfParams, SeriesConvergenceError, SeriesResult, mlf3

__all__ = [
    "FractionalOrders",
    "IntegralSpec",
    "MlfParams",
    "MultiTime",
    "PmfTable",
    "RateMatrix",
    "RngStream",
    "SeriesConvergenceError",
    "SeriesResult",
    "VariantKind",
    "mlf3",
]

__version__ = "0.1.0"
