import os
from dotenv import load_dotenv

load_dotenv()  # Load environment variables from .env file

# Genericity: relative gap below which two GT eigenvalues count as colliding
GAP_TOL_REL = float(os.getenv('CATSTOKES_GAP_TOL', '1e-8'))
HERMITIAN_TOL = float(os.getenv('CATSTOKES_HERMITIAN_TOL', '1e-12'))
POLE_TOL = 1e-12
# Allowed ||C C^dagger - I||_F for an assembled connection matrix
UNITARITY_TOL = float(os.getenv('CATSTOKES_UNITARITY_TOL', '1e-8'))

# Quantum layer
DIM_CAP = int(os.getenv('CATSTOKES_DIM_CAP', '64'))
BLOCK_COND_CAP = 1e12

# ODE oracle
ODE_TOL = float(os.getenv('CATSTOKES_ODE_TOL', '1e-10'))
Z_MIN = float(os.getenv('CATSTOKES_Z_MIN', '1e-4'))
Z_OUT = float(os.getenv('CATSTOKES_Z_OUT', '200.0'))
ASYMPTOTIC_TERMS = 4
FROBENIUS_TERMS = 3
# Unitarity defect above which a numeric connection matrix is rejected
ORACLE_MATCH_TOL = float(os.getenv('CATSTOKES_ORACLE_MATCH_TOL', '1e-7'))

# Isomonodromy flow
FLOW_TOL = float(os.getenv('CATSTOKES_FLOW_TOL', '1e-10'))
DRIFT_FACTOR = 100.0

# AM map sinh quotients
RADICAND_CLAMP = 1e-12
RADICAND_FAIL = 1e-10
SINH_LOG_SPACE_GAP = 30.0

THREADS = int(os.getenv('CATSTOKES_THREADS', '1'))
DEFAULT_SEED = int(os.getenv('CATSTOKES_SEED', '7'))
CACHE_SIZE = int(os.getenv('CATSTOKES_CACHE_SIZE', '128'))

COMMANDS = {
    'gt': "Gelfand-Tsetlin coordinates",
    'stokes': "Stokes matrices at the caterpillar point",
    'rhb': "Riemann-Hilbert-Birkhoff map",
    'am': "Alekseev-Meinrenken map",
    'isoflow': "Isomonodromy flow with caterpillar asymptotics",
    'oracle': "Numerical connection matrix from the linear system",
    'crystal': "Gelfand-Tsetlin crystal",
    'qstokes': "Quantum Stokes matrices on a representation",
    'rll': "RLL relation residuals",
    'check': "Acceptance suite",
}
