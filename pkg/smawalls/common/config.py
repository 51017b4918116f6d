import numpy as np

# Q-tensor manifold
MANIFOLD_TOL = 1e-12  # tolerance for exactly constructed tensors
PARSED_MANIFOLD_TOL = 1e-9  # tolerance for user supplied tensors
ZERO_JUMP_TOL = 1e-14  # |Q+ - Q-| below this is treated as no jump
BISECTOR_TOL = 1e-12  # default tolerance on |Q+nu.nu - Q-nu.nu| for the singular density
FORM_AGREEMENT_TOL = 1e-12  # both angular forms of the envelope density must agree

# grids and curves
GRID_UNIFORMITY_TOL = 1e-12
ON_CURVE_TOL = 1e-12  # distance to the jump curve below which the director is undefined
MIN_GRID_POINTS = 3

# finite differences
FD_STEP = 1e-6
FD_FLOOR = 1e-8  # absolute floor of the gradient norm in relative errors

# model defaults
DEFAULT_K1 = 2.0
DEFAULT_MU = 1.0
DEFAULT_ALPHA = 0.5
DEFAULT_EPSILON = 1e-12
DEFAULT_QUARTER_U0 = float(np.log(2.0))  # rho = 1/2, mid radius of the quarter disk

# solver defaults
DEFAULT_MESH_SCHEDULE = tuple(range(50, 101, 10))
DEFAULT_GRAD_TOL = 1e-8  # inf-norm
DEFAULT_MAX_ITERS = 500  # per continuation stage
DEFAULT_F_TOL = 1e-14  # relative decrease regarded as stagnation
WOLFE_C1 = 1e-4
WOLFE_C2 = 0.9
LINE_SEARCH_MAX_STEP = 50.0
BACKTRACK_SHRINK = 0.5
BACKTRACK_MAX_HALVINGS = 60
EXACT_SEARCH_MAX_DOUBLINGS = 60
SMOOTHING_LEVELS = (1e-4, 1e-6, 1e-8, 1e-10)  # regularization warm start levels, coarse first
NEWTON_MAX_ITERS = 50  # banded Newton refinement after BFGS, per stage
NEWTON_MAX_SHIFTS = 40  # Levenberg shifts tried before giving up on a Hessian
NEWTON_SHIFT_START = 1e-8  # first shift, relative to the largest diagonal entry
HESSIAN_FD_STEP = 1e-10
COMPLEX_STEP = 1e-30

# bv probe
PROBE_MARGIN = 0.1  # collar width of C' around the unit square C
PROBE_UNDERCUT_TOL = 1e-9  # a competitor beats the flat interface below flat - tol
PARTITION_AREA_TOL = 1e-9
