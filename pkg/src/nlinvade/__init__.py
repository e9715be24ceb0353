"""Two-species competition with nonlocal dispersal and moving invasion fronts.

Subpackage map:
  kernels     dispersal kernels, validation, quadrature stencils
  eigenvalue  principal eigenvalue of the dispersal operator on an interval
  dynamics    spatially homogeneous system: equilibria, classification,
              bound iterations, invariant-region checks
  simulator   the coupled free-boundary field solver (reduced and general form)
  diagnostics run metrics, regime detection, consistency checks
  config      scenario configuration (sectioned key=value text)
  runner      scenario execution, parameter sweeps, file emission
  cli         command-line entry points
"""

from .kernels import KernelSpec, ValidatedKernel, validate_kernel

__all__ = ["KernelSpec", "ValidatedKernel", "validate_kernel"]
__version__ = "0.1.0"
