"""Package-wide limits and validation tolerances.

The CLI ``--tol`` flag rewrites :data:`VALIDATION_TOL`; library callers may
also assign to these names directly.
"""

MAX_QUBITS = 4

# Hermiticity / trace / positivity checks on user-supplied matrices
VALIDATION_TOL = 1e-8
# unitarity check on user-supplied gates
UNITARY_TOL = 1e-8
# relative positivity tolerance for process matrices (scaled by trace)
POSITIVITY_TOL = 1e-10
