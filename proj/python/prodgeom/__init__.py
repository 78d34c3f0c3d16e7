"""Hypersurfaces of S^2 x S^2: frames, structure-equation checks, sinh-Gordon data, parallels."""

from ._prodgeom import *  # noqa: F401,F403
from ._prodgeom import (  # noqa: F401
    MINIMAL_DISTANCE,
    CheckReport,
    ContractError,
    Error,
    FocalPointError,
    NonconvergenceError,
)


def all_pass(reports):
    return all(r.passed for r in reports)
