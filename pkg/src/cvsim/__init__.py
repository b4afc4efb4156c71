"""Gaussian continuous-variable optics simulator."""

from .gaussian import (
    GaussianState,
    LinearProcess,
    QuadratureForm,
    SymplecticOp,
    UnitsConvention,
    UnphysicalStateError,
    apply,
    coherent,
    fidelity,
    homodyne_condition,
    homodyne_project,
    linear_process,
    squeezed_vacuum,
    tensor,
    vacuum,
)

__version__ = "0.1.0"
