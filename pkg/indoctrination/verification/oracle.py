import logging
import math
import warnings
from enum import Enum

import numpy as np
from astropy.utils.exceptions import AstropyUserWarning
from pydantic import BaseModel, confloat, conint, validator

from ..core import (
    NullDebateError,
    UnimodalityError,
    check_consistent,
    deviation_payoff_function,
)

__all__ = [
    "SearchMethod",
    "DeviationReport",
    "golden_section_maximize",
    "best_response",
    "certify_equilibrium",
    "max_payoff_gain",
    "is_certified",
]

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARED = (3 - math.sqrt(5)) / 2

DEFAULT_SEARCH_TOL = 1e-9
DEFAULT_CERTIFICATION_TOL = 1e-6

# Largest negative payoff gain a report may carry
GAIN_FLOOR = -1e-12

# Relative slack allowed before three points count as non-concave
CONCAVITY_SLACK = 1e-12


class SearchMethod(str, Enum):
    """
    Where the best response was found.
    """

    BOUNDARY = "boundary"
    INTERIOR_SEARCH = "interior-search"


class DeviationReport(BaseModel):
    """
    Outcome of searching for a profitable deviation of one player.

    Parameters
    ----------

    player : int
        Player index.

    current_effort : float
        The player's effort in the profile being certified.

    best_effort : float
        The best response to everyone else's effort.

    payoff_gain : float
        Payoff at ``best_effort`` minus payoff at ``current_effort``.

    method : `SearchMethod`
        Whether the best response is the boundary ``0`` or came out of the
        interior search.

    within_tolerance : bool
        Whether ``payoff_gain`` is within the certification tolerance.
    """

    player: conint(ge=0)
    current_effort: confloat(ge=0)
    best_effort: confloat(ge=0)
    payoff_gain: float
    method: SearchMethod
    within_tolerance: bool

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("payoff_gain")
    @classmethod
    def validate_gain(cls, v):
        if v < GAIN_FLOOR:
            raise ValueError(f"Payoff gain ({v}) cannot be below {GAIN_FLOOR}.")
        return v


def _check_concave(fa, fc, fd, fb):
    floor = min(fa, fb)
    if not math.isfinite(floor):
        return
    if min(fc, fd) < floor - CONCAVITY_SLACK * (1 + abs(floor)):
        raise UnimodalityError(
            f"Interior values ({fc}, {fd}) fall below the bracket ends "
            f"({fa}, {fb}); the objective is not concave."
        )


def golden_section_maximize(func, lower, upper, tol=DEFAULT_SEARCH_TOL):
    """
    Maximize a concave function of one variable on ``[lower, upper]``.

    Each step reuses one of the two interior evaluations, and every bracket
    is checked for concavity along the way.

    Parameters
    ----------

    func : callable
        Scalar objective.

    lower, upper : float
        Search interval.

    tol : float, optional
        Width of the final bracket.

    Returns
    -------

    tuple of float
        The best point seen and its value.

    Raises
    ------

    UnimodalityError
        If an interior point falls below both ends of its bracket.

    Examples
    --------
    >>> x, fx = golden_section_maximize(lambda x: -(x - 2) ** 2, 1, 5)
    >>> abs(x - 2) < 1e-8
    True
    """
    a, b = min(lower, upper), max(lower, upper)
    fa, fb = func(a), func(b)
    h = b - a
    steps = 0 if h <= tol else int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))

    c = a + INV_PHI_SQUARED * h
    d = a + INV_PHI * h
    fc, fd = func(c), func(d)
    for _ in range(steps):
        _check_concave(fa, fc, fd, fb)
        h = INV_PHI * h
        if fc > fd:
            b, fb = d, fd
            d, fd = c, fc
            c = a + INV_PHI_SQUARED * h
            fc = func(c)
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + INV_PHI * h
            fd = func(d)

    candidates = [(a, fa), (c, fc), (d, fd), (b, fb)]
    return max(candidates, key=lambda point: point[1])


def _search(j, profile, config, delta, upper, tol):
    # Best effort, its payoff and the method that found it
    if upper is None:
        upper = 4 * config.span
    if upper <= 0:
        raise ValueError(f"Upper search bound ({upper}) must be greater than 0.")
    objective = deviation_payoff_function(j, profile, config, delta=delta)

    def payoff_at(effort):
        return float(objective(effort))

    effort, value = golden_section_maximize(payoff_at, 0.0, upper, tol=tol)
    boundary_value = payoff_at(0.0)
    if boundary_value >= value:
        return 0.0, boundary_value, SearchMethod.BOUNDARY
    if upper - effort <= 10 * tol:
        warnings.warn(
            f"Best response of player {j} is at the upper search bound {upper}; "
            "the bound may be too small.",
            AstropyUserWarning,
        )
    return effort, value, SearchMethod.INTERIOR_SEARCH


def best_response(j, profile, config, delta=None, upper=None, tol=DEFAULT_SEARCH_TOL):
    """
    Effort that maximizes player ``j``'s payoff, everyone else held fixed.

    The payoff is concave in the player's own effort, so a golden-section
    search on ``[0, upper]`` finds the interior optimum; the result is then
    compared against the boundary ``0``.

    Parameters
    ----------

    j : int
        Player index.

    profile : `~indoctrination.EffortProfile`
        Efforts of all players; the player's own effort is ignored.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    delta : float, optional
        Exposure level. If ``None`` the full-monitoring payoff is used.

    upper : float, optional
        Upper end of the search interval. Defaults to ``4 |O_1 - O_k|``:
        staying silent pays at least ``-|O_1 - O_k|`` while an effort ``e``
        pays at most ``-e``, so no larger effort can be optimal.

    tol : float, optional
        Width of the final search bracket.

    Returns
    -------

    float

    Examples
    --------
    >>> from indoctrination import EffortProfile, OpinionConfig
    >>> config = OpinionConfig(opinions=(0, 1), sizes=(1, 1))
    >>> profile = EffortProfile.from_group_efforts(config, (0, 1))
    >>> best_response(0, profile, config)
    0.0
    """
    effort, _, _ = _search(j, profile, config, delta, upper, tol)
    return effort


def certify_equilibrium(
    profile,
    config,
    delta=None,
    tol=DEFAULT_CERTIFICATION_TOL,
    upper=None,
    search_tol=DEFAULT_SEARCH_TOL,
):
    """
    Look for a profitable deviation of every player.

    Parameters
    ----------

    profile : `~indoctrination.EffortProfile`
        Candidate equilibrium; at least one effort must be positive.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    delta : float, optional
        Exposure level. If ``None`` the full-monitoring game is checked.

    tol : float, optional
        Largest payoff gain that still counts as no deviation.

    upper, search_tol : float, optional
        Passed to the best-response search.

    Returns
    -------

    list of `DeviationReport`
        One report per player. The profile is an equilibrium when every
        report is within tolerance; see `is_certified`.

    Raises
    ------

    NullDebateError
        If every effort is zero.
    """
    check_consistent(profile, config)
    if not any(e > 0 for e in profile.efforts):
        raise NullDebateError("Cannot certify a profile in which nobody exerts effort.")

    reports = []
    for j in range(profile.n):
        current = profile.efforts[j]
        current_value = float(
            deviation_payoff_function(j, profile, config, delta=delta)(current)
        )
        effort, value, method = _search(j, profile, config, delta, upper, search_tol)
        if current_value >= value:
            effort, value = current, current_value
        gain = value - current_value
        reports.append(
            DeviationReport(
                player=j,
                current_effort=current,
                best_effort=effort,
                payoff_gain=gain,
                method=method,
                within_tolerance=gain <= tol,
            )
        )

    worst = max_payoff_gain(reports)
    if worst > tol:
        logger.warning(
            f"Profile is not an equilibrium: a player can gain {worst} "
            f"(tolerance {tol})"
        )
    else:
        logger.debug(f"Profile certified; largest deviation gain {worst}")
    return reports


def max_payoff_gain(reports):
    """
    Largest payoff gain across deviation reports.
    """
    return max(report.payoff_gain for report in reports)


def is_certified(reports, tol=DEFAULT_CERTIFICATION_TOL):
    """
    ``True`` if no player can gain more than ``tol`` by deviating.
    """
    return bool(np.all([report.payoff_gain <= tol for report in reports]))
