import logging
import math

import numpy as np
from astropy.table import Table
from pydantic import BaseModel, validator

from ..core import (
    ObservedDistribution,
    SolverConvergenceError,
    as_delta,
    observed_distribution_limited,
)
from ..limited_exposure import limited_config, solve_equilibrium

__all__ = [
    "FULL_EXPOSURE_STATIONARY",
    "SMALL_EXPOSURE_STATIONARY",
    "TRAJECTORY_COLUMNS",
    "OpinionDistribution",
    "TransitionMatrix",
    "transition_matrix",
    "transition_matrix_closed_form",
    "process_step",
    "iterate_to_stationary",
    "stationary_closed_form",
    "stationary_eigenvector",
    "simulate_process",
    "middle_mass",
    "extreme_to_moderate_ratio",
    "stationary_identity_residual",
]

logger = logging.getLogger(__name__)

DEFAULT_STATIONARY_TOL = 1e-10
DEFAULT_STATIONARY_MAX_ITER = 10**6

# Tolerance on the row sums of a transition matrix
ROW_SUM_TOL = 1e-12

TRAJECTORY_COLUMNS = ("stage", "pi1", "pi2", "pi3")


def _closed_form_probs(delta, r_star):
    root = math.sqrt(delta + r_star / 2)
    norm = 2 * root + r_star
    return (root / norm, r_star / norm, root / norm)


# Limit of the stationary distribution at full exposure, where the chain is
# no longer irreducible and the closed form does not apply.
FULL_EXPOSURE_STATIONARY = (0.5, 0.0, 0.5)

# Limit of the stationary distribution as the exposure level goes to zero,
# where r* tends to 2**(1/3).
SMALL_EXPOSURE_STATIONARY = _closed_form_probs(0.0, 2 ** (1 / 3))


class OpinionDistribution(ObservedDistribution):
    """
    Population shares of the three opinions in one generation.
    """

    @validator("probs")
    @classmethod
    def validate_three_opinions(cls, v):
        if len(v) != 3:
            raise ValueError(f"The process has exactly 3 opinions, got {len(v)}.")
        return v

    @property
    def full_support(self):
        return all(p > 0 for p in self.probs)


class TransitionMatrix(BaseModel):
    """
    Row-stochastic 3x3 matrix of the indoctrination process.

    Row ``i`` is the distribution of opinions a child of a parent with
    opinion ``i`` ends up holding. The matrix is centrosymmetric: entry
    ``(i, j)`` equals entry ``(2 - i, 2 - j)`` exactly.
    """

    rows: tuple[
        tuple[float, float, float],
        tuple[float, float, float],
        tuple[float, float, float],
    ]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("rows")
    @classmethod
    def validate_rows(cls, v):
        q = np.array(v, dtype=float)
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError(f"Transition probabilities must lie in [0, 1], got {v}.")
        sums = [math.fsum(row) for row in v]
        if any(abs(s - 1) > ROW_SUM_TOL for s in sums):
            raise ValueError(f"Every row must sum to 1, got row sums {sums}.")
        if not np.array_equal(q, q[::-1, ::-1]):
            raise ValueError(f"Transition matrix is not centrosymmetric: {v}.")
        return v

    @property
    def matrix(self):
        return np.array(self.rows, dtype=float)


def _as_distribution(pi):
    if isinstance(pi, OpinionDistribution):
        return pi
    probs = pi.probs if isinstance(pi, ObservedDistribution) else pi
    return OpinionDistribution(probs=tuple(float(p) for p in probs))


def _check_interior(delta):
    delta = as_delta(delta)
    if delta == 1:
        raise ValueError(
            "At full exposure the process is not irreducible; use "
            "FULL_EXPOSURE_STATIONARY for the limit instead."
        )
    return delta


def transition_matrix(eq):
    """
    Transition matrix of the indoctrination process at a limited-exposure
    equilibrium.

    Row ``i`` is the distribution of observed opinions perceived from
    opinion ``i``. The same matrix applies at every stage, since the
    equilibrium aggregates do not depend on the population shares.

    Parameters
    ----------

    eq : `~indoctrination.limited_exposure.LimitedEquilibrium`
        Equilibrium at the exposure level of interest.

    Returns
    -------

    `TransitionMatrix`

    Examples
    --------
    >>> from indoctrination.limited_exposure import solve_equilibrium
    >>> transition_matrix(solve_equilibrium(1)).rows
    ((0.5, 0.0, 0.5), (0.5, 0.0, 0.5), (0.5, 0.0, 0.5))
    """
    config = limited_config()
    rows = tuple(
        observed_distribution_limited(eq.aggregates, config, eq.delta, i).probs
        for i in range(config.k)
    )
    return TransitionMatrix(rows=rows)


def transition_matrix_closed_form(delta, r_star):
    """
    Transition matrix written in terms of the exposure level and
    ``r* = E_2 / E_1``.
    """
    delta = as_delta(delta)
    if r_star < 0:
        raise ValueError(f"r_star must be nonnegative, got {r_star}.")
    outer = 1 + delta * r_star + delta**2
    middle = 2 * delta + r_star
    first = (1 / outer, delta * r_star / outer, delta**2 / outer)
    return TransitionMatrix(
        rows=(first, (delta / middle, r_star / middle, delta / middle), first[::-1])
    )


def process_step(pi, q):
    """
    Advance the population shares by one generation, ``pi_t = pi_{t-1} Q``.

    Parameters
    ----------

    pi : `OpinionDistribution` or sequence of float
        Current shares.

    q : `TransitionMatrix`
        Transition matrix.

    Returns
    -------

    `OpinionDistribution`

    Examples
    --------
    >>> q = TransitionMatrix(rows=((0.5, 0.25, 0.25), (0, 1, 0), (0.25, 0.25, 0.5)))
    >>> process_step((1, 0, 0), q).probs
    (0.5, 0.25, 0.25)
    """
    probs = np.asarray(_as_distribution(pi).probs) @ q.matrix
    probs = probs / math.fsum(probs)
    return OpinionDistribution(probs=tuple(probs.tolist()))


def iterate_to_stationary(
    pi0,
    delta,
    tol=DEFAULT_STATIONARY_TOL,
    max_iter=DEFAULT_STATIONARY_MAX_ITER,
):
    """
    Run the indoctrination process until the shares stop moving.

    Parameters
    ----------

    pi0 : `OpinionDistribution` or sequence of float
        Initial shares; every opinion must be represented.

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1)``.

    tol : float, optional
        The iteration stops once the L1 distance between successive shares
        is at most ``tol``.

    max_iter : int, optional
        Maximum number of generations.

    Returns
    -------

    tuple
        The limiting `OpinionDistribution` and the number of generations.

    Raises
    ------

    ValueError
        If ``pi0`` lacks full support or ``delta`` is 1.

    SolverConvergenceError
        If ``max_iter`` generations are not enough.
    """
    pi0 = _as_distribution(pi0)
    if not pi0.full_support:
        raise ValueError(f"Initial shares must all be positive, got {pi0.probs}.")
    delta = _check_interior(delta)
    if tol <= 0:
        raise ValueError(f"tol ({tol}) must be greater than 0.")

    q = transition_matrix(solve_equilibrium(delta)).matrix
    current = np.asarray(pi0.probs, dtype=float)
    for iteration in range(1, max_iter + 1):
        following = current @ q
        following = following / math.fsum(following)
        if np.sum(np.abs(following - current)) <= tol:
            logger.debug(
                f"Process at delta={delta} converged after {iteration} generations"
            )
            return OpinionDistribution(probs=tuple(following.tolist())), iteration
        current = following

    raise SolverConvergenceError(
        f"Process at delta={delta} did not converge to tol={tol} within "
        f"{max_iter} generations."
    )


def stationary_closed_form(delta):
    """
    Stationary distribution of the process in closed form.

    With ``r* = 2 W`` the stationary shares are proportional to
    ``(sqrt(delta + r*/2), r*, sqrt(delta + r*/2))``.

    Parameters
    ----------

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1)``.

    Returns
    -------

    `OpinionDistribution`
    """
    delta = _check_interior(delta)
    eq = solve_equilibrium(delta)
    return OpinionDistribution(probs=_closed_form_probs(delta, eq.r_star))


def stationary_eigenvector(q):
    """
    Left eigenvector of ``q`` for the eigenvalue closest to one, scaled to
    sum to one.
    """
    values, vectors = np.linalg.eig(q.matrix.T)
    index = np.argmin(np.abs(values - 1))
    vector = np.real(vectors[:, index])
    vector = vector / math.fsum(vector)
    return OpinionDistribution(probs=tuple(vector.tolist()))


def simulate_process(pi0, delta, stages, resolve_each_stage=False):
    """
    Trajectory of the population shares over a number of generations.

    Parameters
    ----------

    pi0 : `OpinionDistribution` or sequence of float
        Initial shares.

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1]``.

    stages : int
        Number of generations to run.

    resolve_each_stage : bool, optional
        If ``True`` the equilibrium and the transition matrix are recomputed
        at every stage instead of being reused.

    Returns
    -------

    `~astropy.table.Table`
        Columns ``stage``, ``pi1``, ``pi2`` and ``pi3``; row 0 holds ``pi0``.

    Raises
    ------

    RuntimeError
        If a recomputed transition matrix differs from the first one.
    """
    pi = _as_distribution(pi0)
    delta = as_delta(delta)
    if stages < 0:
        raise ValueError(f"stages ({stages}) must be nonnegative.")

    q = transition_matrix(solve_equilibrium(delta))
    rows = [(0, *pi.probs)]
    for stage in range(1, stages + 1):
        if resolve_each_stage:
            q_stage = transition_matrix(solve_equilibrium(delta))
            if q_stage.rows != q.rows:
                raise RuntimeError(
                    f"Transition matrix at stage {stage} differs from stage 0."
                )
        pi = process_step(pi, q)
        rows.append((stage, *pi.probs))
    return Table(rows=rows, names=TRAJECTORY_COLUMNS, meta={"delta": delta})


def middle_mass(delta):
    """
    Stationary share of the moderate opinion; decreasing in ``delta``.
    """
    return stationary_closed_form(delta).probs[1]


def extreme_to_moderate_ratio(delta):
    """
    Ratio ``pi_1 / pi_2 = sqrt(delta + r*/2) / r*`` of extreme to moderate
    stationary shares; increasing in ``delta``.
    """
    delta = _check_interior(delta)
    r_star = solve_equilibrium(delta).r_star
    return math.sqrt(delta + r_star / 2) / r_star


def stationary_identity_residual(delta):
    """
    Residual of ``(2 delta + r*) sqrt(delta + r*/2) = 1 + delta**2 + delta r*``,
    which holds at every equilibrium and makes the closed-form stationary
    distribution a fixed point of the transition matrix.
    """
    delta = as_delta(delta)
    r_star = solve_equilibrium(delta).r_star
    lhs = (2 * delta + r_star) * math.sqrt(delta + r_star / 2)
    return lhs - (1 + delta**2 + delta * r_star)
