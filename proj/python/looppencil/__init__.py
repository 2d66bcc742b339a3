"""Quadratic Sturm-Liouville pencils on a star graph with a loop.

Forward spectral solver plus the two partial inverse problems (boundary edge
and loop), backed by the C++ core.
"""

from looppencil._core import (
    Pencil,
    __version__,
    d_function,
    delta,
    dm,
    extract_kernels,
    forward_spectrum,
    integrate_edge,
    invert_edge,
    locate_eigenvalues,
    omega_sequence,
    q_func,
    sine_type_check,
    solve_betas,
)

__all__ = [
    "Pencil",
    "__version__",
    "d_function",
    "delta",
    "dm",
    "extract_kernels",
    "forward_spectrum",
    "integrate_edge",
    "invert_edge",
    "locate_eigenvalues",
    "omega_sequence",
    "q_func",
    "sine_type_check",
    "solve_betas",
]
