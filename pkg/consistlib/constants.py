"""
This file contains the numerical defaults and fixed vocabularies used across consistlab
"""

# Machine epsilon for float64, used for roundoff floors
EPS = 2.220446049250313e-16

######################################################################
# Conic solver settings (K-functionals, sum norms, dual norms)
DEFAULT_SOLVER = "CLARABEL"
CLARABEL_OPTIONS = {
    "tol_gap_abs": 1e-9,
    "tol_gap_rel": 1e-9,
    "tol_feas": 1e-9,
    "max_iter": 200,
}
# Relative duality gap above which a K-functional result is flagged approximate
K_GAP_TOLERANCE = 1e-6
# Relative closeness at which a dyadic K term is considered saturated
K_SATURATION_TOLERANCE = 1e-7

######################################################################
# Interpolation functors
DEFAULT_DYADIC_RANGE = 24
ASCENT_RESTARTS = 32
# Candidate budget for operator norms on spaces without closed forms
GENERIC_ASCENT_CANDIDATES = 12
GENERIC_ASCENT_ROUNDS = 2

######################################################################
# Semigroups and resolvents
PADE13_THETA = 5.371920351148152
PADE13_COEFFICIENTS = (
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
)
MAX_CONDITION = 1e12
RESIDUAL_TOLERANCE = 1e-10
LAPLACE_HORIZON_FACTOR = 40.0
LAPLACE_GAUSS_ORDER = 8
LAPLACE_CHECK_ORDER = 6
LAPLACE_DEFAULT_STEPS = 400
EULER_SAFETY = 1.5

######################################################################
# Elliptic operators and Gaussian fits
GAUSSIAN_C_SWEEP = (0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0)
GAUSSIAN_TAIL_CLIP = 1e-30
GAUSSIAN_ROUNDOFF_FACTOR = 100.0
GAUSSIAN_KNEE_SLACK = 0.05
GAUSSIAN_DEFAULT_QUANTILE = 0.999

######################################################################
# Checks and reports
VERDICT_PASS = "pass"
VERDICT_FAIL = "fail"
VERDICT_INCONCLUSIVE = "inconclusive"
VERDICTS = (VERDICT_PASS, VERDICT_FAIL, VERDICT_INCONCLUSIVE)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2

# Generator-interpolation acceptance bracket
BRACKET_LEVEL_FACTOR = 2.0
RHO_RANGE = (1e-2, 1e2)

TABLE_HEADER = ["scenario", "check", "verdict", "constant_name", "value", "tolerance", "seed"]
REPORT_FORMATS = ("tree", "table")
NUMBER_FORMAT = ".17g"

# Every finite-dimensional restatement is announced in the report header
FINITE_DIMENSION_NOTE = (
    "finite dimension: domain and space identities are restated as two-sided norm "
    "equivalences with refinement-stable constants")

SCENARIO_SECTIONS = ("name", "seed", "spaces", "generators", "functors", "checks", "ladder", "description")
