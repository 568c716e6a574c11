"""Dimensional constants for the sixth-order problem in R^6 (n = 3)."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Constants:
    """Constants entering the radial calculus in R^6.

    gamma6 is the normalization of the fundamental solution of Delta^3
    (Delta^3 log|x| = gamma6 * delta_0), omega5 and omega6 are the surface
    areas of S^5 and S^6, and Lambda1 = (2n-1)!|S^{2n}| with n = 3 is the
    curvature quantum.
    """

    gamma6: float = 64.0 * math.pi**3
    omega5: float = math.pi**3
    omega6: float = 16.0 * math.pi**3 / 15.0
    Lambda1: float = 128.0 * math.pi**3


CONSTANTS = Constants()

GAMMA6 = CONSTANTS.gamma6
OMEGA5 = CONSTANTS.omega5
OMEGA6 = CONSTANTS.omega6
LAMBDA1 = CONSTANTS.Lambda1

# Critical radius below which the sharp curvature-excess expansion applies:
# delta* = sqrt(1 - 1/sqrt(3)).
DELTA_STAR = math.sqrt(1.0 - 1.0 / math.sqrt(3.0))


def constants_dict() -> dict:
    """Constants as a plain dict, for JSON reports."""
    return {
        "gamma6": GAMMA6,
        "omega5": OMEGA5,
        "omega6": OMEGA6,
        "Lambda1": LAMBDA1,
        "delta_star": DELTA_STAR,
    }
