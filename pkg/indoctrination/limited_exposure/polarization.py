import logging
import math

import numpy as np
from astropy.table import Table
from pydantic import BaseModel, confloat

from ..core import NullDebateError, SolverConvergenceError, _values
from .solver import DEFAULT_MAX_ITER, DEFAULT_TOL, limited_config, solve_equilibrium

__all__ = [
    "SWEEP_COLUMNS",
    "PolarizationValue",
    "polarization",
    "polarization_reduced",
    "polarization_reduced_derivative",
    "exposure_grid",
    "sweep",
]

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("delta", "w", "e1", "e2", "polarization")


class PolarizationValue(BaseModel):
    """
    Expected squared-mass-weighted opinion gap of a debate; never negative.
    """

    value: confloat(ge=0)

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    def __float__(self):
        return float(self.value)


def polarization(agg, config):
    """
    Polarization of a debate with the given aggregate efforts.

    With ``p_i = E_i / sum(E)`` the polarization is
    ``sum_i sum_l p_i**2 p_l |O_i - O_l|``.

    Parameters
    ----------

    agg : `~indoctrination.AggregateEfforts` or array-like
        Aggregate effort of every opinion.

    config : `~indoctrination.OpinionConfig`
        Opinion values.

    Returns
    -------

    `PolarizationValue`

    Raises
    ------

    NullDebateError
        If the total effort is zero.

    Examples
    --------
    >>> from indoctrination import OpinionConfig
    >>> config = OpinionConfig(opinions=(0, 1, 2), sizes=(1, 1, 1))
    >>> polarization((1, 0, 1), config).value
    0.5
    """
    values = _values(agg)
    if values.size != config.k:
        raise ValueError(
            f"Got {values.size} aggregate efforts for {config.k} opinions."
        )
    total = math.fsum(values)
    if total <= 0:
        raise NullDebateError("Polarization is undefined when nobody exerts effort.")
    probs = values / total
    opinions = np.asarray(config.opinions, dtype=float)
    gaps = np.abs(opinions[:, np.newaxis] - opinions[np.newaxis, :])
    value = float(np.sum(probs[:, np.newaxis] ** 2 * probs[np.newaxis, :] * gaps))
    return PolarizationValue(value=value)


def polarization_reduced(w):
    """
    Polarization of the limited-exposure equilibrium as a function of ``W``
    alone, ``(W**2 + W / 2 + 1 / 2) / (1 + W)**3``.

    Examples
    --------
    >>> polarization_reduced(0).value
    0.5
    """
    if w < 0:
        raise ValueError(f"W must be nonnegative, got {w}.")
    return PolarizationValue(value=(w**2 + w / 2 + 1 / 2) / (1 + w) ** 3)


def polarization_reduced_derivative(w):
    """
    Derivative of `polarization_reduced` with respect to ``W``,
    ``-(W**2 - W + 1) / (1 + W)**4``; negative for every ``W``.
    """
    return -(w**2 - w + 1) / (1 + w) ** 4


def exposure_grid(start=0.01, stop=1.0, steps=100):
    """
    Evenly spaced exposure levels, both ends included.

    Examples
    --------
    >>> exposure_grid(0.25, 1, 4)
    array([0.25, 0.5 , 0.75, 1.  ])
    """
    return np.linspace(start, stop, steps)


def sweep(grid=None, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """
    Solve the limited-exposure equilibrium across a grid of exposure levels.

    Parameters
    ----------

    grid : array-like, optional
        Strictly increasing exposure levels in ``(0, 1]``. Defaults to
        `exposure_grid`.

    tol : float, optional
        Tolerance passed to the ``W`` solver.

    max_iter : int, optional
        Iteration limit passed to the ``W`` solver.

    Returns
    -------

    `~astropy.table.Table`
        One row per exposure level with columns ``delta``, ``w``, ``e1``,
        ``e2`` and ``polarization``.

    Raises
    ------

    SolverConvergenceError
        If the solver fails at any grid point; the message names the point.
    """
    grid = exposure_grid() if grid is None else np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("The exposure grid must be a nonempty 1-d sequence.")
    if np.any(grid <= 0) or np.any(grid > 1):
        raise ValueError(f"Exposure levels must lie in (0, 1], got {grid}.")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("The exposure grid must be strictly increasing.")

    config = limited_config()
    rows = []
    for delta in grid:
        try:
            eq = solve_equilibrium(float(delta), tol=tol, max_iter=max_iter)
        except SolverConvergenceError as err:
            message = f"Sweep failed at delta={delta}: {err}"
            raise SolverConvergenceError(message) from err
        rows.append(
            (eq.delta, eq.w, eq.e1, eq.e2, polarization(eq.aggregates, config).value)
        )
    logger.info(f"Solved the limited-exposure game at {len(rows)} exposure levels")
    return Table(rows=rows, names=SWEEP_COLUMNS, meta={"tol": tol})
