"""Library view of the deployment settings.

Values are looked up on the theflow settings object (the project's
`flowsettings.py`), falling back to the environment through decouple and then
to the defaults below, so the library works without a settings module.
"""
import logging
import os

from decouple import config

logger = logging.getLogger(__name__)

try:
    from theflow.settings import settings as flowsettings
except ImportError:  # pragma: no cover
    flowsettings = None


def _setting(name: str, default, cast):
    value = None
    if flowsettings is not None:
        try:
            value = getattr(flowsettings, name, None)
        except ImportError:
            logger.debug("No settings module found, using environment for %s", name)
    if value is None:
        value = config(name, default=default, cast=cast)
    return cast(value)


def threads() -> int:
    return max(1, _setting("CATCMC_THREADS", os.cpu_count() or 1, int))


def smallness() -> float:
    return _setting("CATCMC_SMALLNESS", 1e-2, float)


def max_iter() -> int:
    return _setting("CATCMC_MAX_ITER", 50, int)


def tol_factor() -> float:
    return _setting("CATCMC_TOL_FACTOR", 1e-9, float)


def gamma() -> float:
    return _setting("CATCMC_GAMMA", 0.5, float)


def n_x() -> int:
    return _setting("CATCMC_N_X", 32, int)


def n_s() -> int:
    return _setting("CATCMC_N_S", 201, int)


def n_r() -> int:
    return _setting("CATCMC_N_R", 200, int)


def output_dir() -> str:
    return _setting("CATCMC_OUTPUT_DIR", "catcmc_output", str)
