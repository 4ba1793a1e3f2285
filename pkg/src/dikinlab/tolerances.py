"""Central numeric tolerances.

Change a value here and every module picks it up; nothing else hard-codes
these thresholds.
"""

# Cholesky pivots below this (relative to the largest diagonal entry) abort.
PIVOT_TOL = 1e-14

# |p(root)| <= ROOT_RESIDUAL * max|a_k| for poly_roots.
ROOT_RESIDUAL = 1e-8
ROOT_MAX_ITER = 5000

# Bisection stopping width.
BISECT_TOL = 1e-14

# Period-4 threshold search bracket.
PERIOD4_BRACKET = (0.80, 0.88)

# Grid used to locate sign changes before bisection.
SCAN_POINTS = 10_000

# AFS defaults.
GAP_EPSILON = 1e-10
RECORD_GAP = 1e-3
FEAS_TOL = 1e-8
