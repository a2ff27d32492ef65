import logging

import numpy as np
from pydantic import BaseModel, confloat, root_validator
from scipy import optimize

from ..core import (
    AggregateEfforts,
    EffortProfile,
    OpinionConfig,
    SolverConvergenceError,
    as_delta,
)

__all__ = [
    "LIMITED_EXPOSURE_OPINIONS",
    "SMALL_EXPOSURE_W",
    "LimitedEquilibrium",
    "limited_config",
    "q_residual",
    "q_partials",
    "solve_w",
    "solve_w_polynomial",
    "dw_ddelta",
    "solve_equilibrium",
    "reverted_foc_residuals",
]

logger = logging.getLogger(__name__)

# The limited-exposure game is played on three opinions one unit apart
LIMITED_EXPOSURE_OPINIONS = (0.0, 1.0, 2.0)

DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 200
DEFAULT_FOC_TOL = 1e-9

# Root of 4 W**3 = 1, the limit of W as the exposure level goes to zero
SMALL_EXPOSURE_W = 4 ** (-1 / 3)


def limited_config(sizes=(1, 1, 1)):
    """
    Opinion configuration of the limited-exposure game with the given sizes.
    """
    return OpinionConfig(opinions=LIMITED_EXPOSURE_OPINIONS, sizes=tuple(sizes))


class LimitedEquilibrium(BaseModel):
    """
    Equilibrium aggregates of the three-opinion limited-exposure game.

    Parameters
    ----------

    delta : float
        Exposure level in ``(0, 1]``.

    w : float
        Ratio ``E_2 / (E_1 + E_3)`` of moderate to extreme effort.

    e1, e2, e3 : float
        Aggregate effort of each opinion; ``e1 == e3``.

    r_star : float
        Ratio ``E_2 / E_1 = 2 w``.
    """

    delta: confloat(gt=0, le=1)
    w: confloat(ge=0)
    e1: confloat(gt=0)
    e2: confloat(ge=0)
    e3: confloat(gt=0)
    r_star: confloat(ge=0)

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @root_validator(skip_on_failure=True)
    @classmethod
    def validate_ratios(cls, values):
        e1, e2, e3, w = values["e1"], values["e2"], values["e3"], values["w"]
        if e1 != e3:
            raise ValueError(f"Extreme aggregates must be equal, got {e1} and {e3}.")
        if abs(w - e2 / (2 * e1)) > 1e-12:
            raise ValueError(f"w={w} does not match e2 / (2 e1) = {e2 / (2 * e1)}.")
        if abs(values["r_star"] - 2 * w) > 1e-12:
            raise ValueError(f"r_star={values['r_star']} does not equal 2 w = {2 * w}.")
        return values

    @property
    def aggregates(self):
        return AggregateEfforts(values=(self.e1, self.e2, self.e3))

    def to_profile(self, sizes=(1, 1, 1)):
        """
        Per-player profile splitting each aggregate evenly within its group.

        Parameters
        ----------

        sizes : tuple of int, optional
            Number of players holding each of the three opinions.

        Returns
        -------

        `~indoctrination.EffortProfile`
            Players ordered group by group, as in ``limited_config(sizes)``.
        """
        config = limited_config(sizes)
        per_player = np.array([self.e1, self.e2, self.e3]) / np.array(config.sizes)
        return EffortProfile.from_group_efforts(
            config, np.repeat(per_player, config.sizes).tolist()
        )


def q_residual(w, delta):
    """
    Residual of the implicit equation linking ``W`` and the exposure level,
    ``4 (delta + W)**3 - (1 + delta**2 + 2 delta W)**2``.

    Examples
    --------
    >>> q_residual(0, 1)
    0
    >>> q_residual(0, 0.5)
    -1.0625
    """
    return 4 * (delta + w) ** 3 - (1 + delta**2 + 2 * delta * w) ** 2


def q_partials(w, delta):
    """
    Partial derivatives of `q_residual` with respect to ``W`` and ``delta``.

    Returns
    -------

    tuple of float
        ``(dQ/dW, dQ/d delta)``.
    """
    s = delta + w
    bracket = 1 + delta**2 + 2 * delta * w
    dq_dw = 12 * s**2 - 4 * delta * bracket
    dq_ddelta = 12 * s**2 - 4 * s * bracket
    return dq_dw, dq_ddelta


def solve_w(delta, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """
    Solve the implicit equation for the moderate-to-extreme effort ratio ``W``.

    The root is bracketed by ``[0, 1]`` for every exposure level and found by
    bisection. At full exposure the root sits on the boundary and ``0`` is
    returned without iterating.

    Parameters
    ----------

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1]``.

    tol : float, optional
        Absolute tolerance on ``W``.

    max_iter : int, optional
        Maximum number of bisection steps.

    Returns
    -------

    float
        The unique root in ``[0, 1]``.

    Raises
    ------

    SolverConvergenceError
        If the tolerance is not reached within ``max_iter`` steps.
    """
    delta = as_delta(delta)
    if tol <= 0:
        raise ValueError(f"tol ({tol}) must be greater than 0.")
    if delta == 1:
        return 0.0

    root, info = optimize.bisect(
        q_residual,
        0.0,
        1.0,
        args=(delta,),
        xtol=tol,
        maxiter=max_iter,
        full_output=True,
        disp=False,
    )
    if not info.converged:
        raise SolverConvergenceError(
            f"Bisection for W at delta={delta} stopped after {info.iterations} "
            f"iterations without reaching tol={tol} ({info.flag})."
        )
    logger.debug(
        f"solve_w: delta={delta} converged to W={root} in {info.iterations} steps"
    )
    return root


def solve_w_polynomial(delta, imag_tol=1e-7, bracket_tol=1e-9):
    """
    Solve for ``W`` by expanding the implicit equation into a cubic and
    taking its real root in ``[0, 1]``.

    This is independent of the bisection in `solve_w` and is used to
    cross-check it.

    Raises
    ------

    SolverConvergenceError
        If the cubic does not have exactly one real root in ``[0, 1]``.
    """
    delta = as_delta(delta)
    coefficients = [
        4.0,
        12 * delta - 4 * delta**2,
        12 * delta**2 - 4 * delta - 4 * delta**3,
        4 * delta**3 - (1 + delta**2) ** 2,
    ]
    roots = np.roots(coefficients)
    real = roots[np.abs(roots.imag) <= imag_tol].real
    inside = real[(real >= -bracket_tol) & (real <= 1 + bracket_tol)]
    if inside.size != 1:
        raise SolverConvergenceError(
            f"Expected one real root in [0, 1] at delta={delta}, got {roots}."
        )
    return float(np.clip(inside[0], 0, 1))


def dw_ddelta(delta, tol=DEFAULT_TOL):
    """
    Slope of ``W`` with respect to the exposure level, from the implicit
    function theorem.
    """
    w = solve_w(delta, tol=tol)
    dq_dw, dq_ddelta = q_partials(w, as_delta(delta))
    return -dq_ddelta / dq_dw


def reverted_foc_residuals(eq):
    """
    Residuals of the two first-order conditions that remain once ``E_1 = E_3``.

    Returns
    -------

    tuple of float
        ``2 delta**2 + 2 delta W - E_1 (1 + delta**2 + 2 delta W)**2`` and
        ``2 delta - E_1 (2 delta + 2 W)**2``.
    """
    delta, w, e1 = eq.delta, eq.w, eq.e1
    extreme = 2 * delta**2 + 2 * delta * w - e1 * (1 + delta**2 + 2 * delta * w) ** 2
    moderate = 2 * delta - e1 * (2 * delta + 2 * w) ** 2
    return extreme, moderate


def solve_equilibrium(
    delta, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, foc_tol=DEFAULT_FOC_TOL
):
    """
    Equilibrium aggregates of the limited-exposure game.

    Parameters
    ----------

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1]``.

    tol : float, optional
        Tolerance passed to `solve_w`.

    max_iter : int, optional
        Iteration limit passed to `solve_w`.

    foc_tol : float, optional
        Largest acceptable first-order-condition residual.

    Returns
    -------

    `LimitedEquilibrium`

    Raises
    ------

    SolverConvergenceError
        If the root finder fails or the first-order conditions are not met.

    Examples
    --------
    >>> eq = solve_equilibrium(1)
    >>> eq.w, eq.e1, eq.e2, eq.e3
    (0.0, 0.5, 0.0, 0.5)
    """
    delta = as_delta(delta)
    w = solve_w(delta, tol=tol, max_iter=max_iter)
    e1 = delta / (2 * (delta + w) ** 2)
    eq = LimitedEquilibrium(
        delta=delta, w=w, e1=e1, e2=2 * w * e1, e3=e1, r_star=2 * w
    )
    residuals = reverted_foc_residuals(eq)
    if max(abs(r) for r in residuals) > foc_tol:
        raise SolverConvergenceError(
            f"First-order conditions at delta={delta} have residuals {residuals}, "
            f"above foc_tol={foc_tol}."
        )
    return eq
