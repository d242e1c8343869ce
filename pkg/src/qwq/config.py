"""Global numerical tolerances.

Functions read these at call time, so assigning e.g. ``qwq.config.ATOL = 1e-10``
takes effect everywhere.
"""

# unitarity, density-matrix and Kraus-completeness checks
ATOL = 1e-12

# joint coin-walker states after many channel applications
STATE_ATOL = 1e-10
STATE_PSD_ATOL = 1e-8

# probabilities below this count as zero when checking support overlap
SUPPORT_EPS = 1e-14

# eigenvalues in [-EIG_CLIP, 0) are treated as rounding noise
EIG_CLIP = 1e-10
