import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv(override=True)

# Logging configuration
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

# Verifier configuration
FTC_THREADS = int(os.getenv("FTC_THREADS", "4"))

# SDP backend configuration (cvxpy solver names)
FTC_SOLVER = os.getenv("FTC_SOLVER", "CLARABEL")
FTC_FALLBACK_SOLVER = os.getenv("FTC_FALLBACK_SOLVER", "SCS")
FTC_SOLVER_TOL = float(os.getenv("FTC_SOLVER_TOL", "1e-8"))

# Output configuration
FTC_OUTPUT_DIR = os.getenv("FTC_OUTPUT_DIR", "output")
