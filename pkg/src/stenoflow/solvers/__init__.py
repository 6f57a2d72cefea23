"""Subdomain solver backends and their shared contract."""

from .base import (ConstraintResult, SolverInput, SubdomainSolver,
                   constraint_layer, postprocess)
from .cnn import CnnModel, CnnSolver, cnn_forward, default_architecture, init_weights
from .laplace import LaplaceSolver, laplace_dirichlet
from .stream import StreamFunctionSolver, stream_solution
from .weights import inspect_weights, load_model, save_model

__all__ = [
    "SolverInput",
    "SubdomainSolver",
    "ConstraintResult",
    "postprocess",
    "constraint_layer",
    "CnnModel",
    "CnnSolver",
    "cnn_forward",
    "default_architecture",
    "init_weights",
    "LaplaceSolver",
    "laplace_dirichlet",
    "StreamFunctionSolver",
    "stream_solution",
    "load_model",
    "save_model",
    "inspect_weights",
]
