"""Sine cosine crow search (SCCSA) with CSA, SCA and a benchmark harness."""
from ._kernels import BACKEND
from .algorithms import CsaParams, RandomSearchParams, RunRecord, ScaParams, SccsaParams, run
from .benchmarks import evaluate, get_benchmark, register
from .core import ArgumentError, Bounds, ConfigurationError, DimensionError, Problem, RngStream

__version__ = "0.1.0"
