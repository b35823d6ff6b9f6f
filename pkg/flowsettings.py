import os
from importlib.metadata import version
from inspect import currentframe, getframeinfo
from pathlib import Path

from decouple import config
from theflow.settings.default import *  # noqa

cur_frame = currentframe()
if cur_frame is None:
    raise ValueError("Cannot get the current frame.")
this_file = getframeinfo(cur_frame).filename
this_dir = Path(this_file).parent

CATCMC_PACKAGE_NAME = "catcmc"

CATCMC_VERSION = config("CATCMC_VERSION", None)
if not CATCMC_VERSION:
    try:
        CATCMC_VERSION = version(CATCMC_PACKAGE_NAME)
    except Exception:
        CATCMC_VERSION = "local"

# parallel workers for tau sweeps; results are collected in input order
CATCMC_THREADS = config("CATCMC_THREADS", default=os.cpu_count() or 1, cast=int)

# solver defaults, see SolveReport for the values actually used in a run
CATCMC_SMALLNESS = config("CATCMC_SMALLNESS", default=1e-2, cast=float)
CATCMC_MAX_ITER = config("CATCMC_MAX_ITER", default=50, cast=int)
CATCMC_TOL_FACTOR = config("CATCMC_TOL_FACTOR", default=1e-9, cast=float)
CATCMC_GAMMA = config("CATCMC_GAMMA", default=0.5, cast=float)

# grids
CATCMC_N_X = config("CATCMC_N_X", default=32, cast=int)
CATCMC_N_S = config("CATCMC_N_S", default=201, cast=int)
CATCMC_N_R = config("CATCMC_N_R", default=200, cast=int)

CATCMC_OUTPUT_DIR = config(
    "CATCMC_OUTPUT_DIR", default=str(this_dir / "catcmc_output"), cast=str
)
