"""Three-point semidefinite programming bounds for energy of codes.

Exact arithmetic, Gegenbauer kernels, a code catalog, dual programs with
exact rational certificates, and the pipeline certifying universal
optimality of line configurations such as the 7 lines of the rhombic
dodecahedron.
"""

__version__ = "0.1.0"
