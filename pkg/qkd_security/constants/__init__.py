"""
Numeric tolerances, resource caps and published grids
"""

TOOL_NAME = "bb84-security-analysis"
TOOL_VERSION = "0.1.0"

# Tolerances
NORM_TOL = 1e-10
UNITARY_TOL = 1e-9
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8

# Resource caps
DEFAULT_MAX_DIM = 2 ** 12
DEFAULT_SPAN_CAP_BITS = 24
MAX_SYMMETRIZE_QUBITS = 4
MAX_EXACT_PROTOCOL_QUBITS = 8
MAX_CRITERION_QUBITS = 4

# Exit codes
EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

# Rate equation right-hand sides used for the published rate table
RATE_RHS = 0.99
RATE_RHS_STARRED = 0.9999

# Published reliability/rate grid
TABLE1_N_VALUES = [12500, 50000, 200000, 800000, 3200000]
TABLE1_EPS_VALUES = [0.005, 0.01, 0.02]
TABLE1_P_ALLOWED_VALUES = [0.02, 0.035, 0.05]
TABLE1_BLANK_CELLS = {(12500, 0.005), (3200000, 0.02)}

# Environment variable names
ENV_SEED = "QKD_SEED"
ENV_MAX_DIM = "QKD_MAX_DIM"
ENV_SPAN_CAP_BITS = "QKD_SPAN_CAP_BITS"
ENV_OUTPUT_DIR = "QKD_OUTPUT_DIR"
ENV_LOG_LEVEL = "QKD_LOG_LEVEL"
ENV_WORKERS = "QKD_WORKERS"
