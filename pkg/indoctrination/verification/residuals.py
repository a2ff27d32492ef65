import math

import numpy as np

from ..core import (
    NullDebateError,
    _values,
    as_delta,
    deviation_payoff_function,
    payoff_derivative,
)
from ..limited_exposure import limited_config

__all__ = [
    "foc_residual_baseline",
    "foc_residual_limited",
    "foc_difference_matrix",
    "finite_difference_check",
    "payoff_derivative",
]


def foc_residual_baseline(agg, config, i):
    """
    First-order-condition residual of opinion ``i`` under full monitoring,
    ``sum_l E_l |O_l - O_i| - (sum_l E_l)**2``.

    The residual is zero at an interior optimum and nonpositive when the
    optimum is silence.

    Parameters
    ----------

    agg : `~indoctrination.AggregateEfforts` or array-like
        Aggregate effort of every opinion.

    config : `~indoctrination.OpinionConfig`
        Opinion values.

    i : int
        Opinion index.

    Returns
    -------

    float

    Raises
    ------

    NullDebateError
        If the total effort is zero.

    Examples
    --------
    >>> from indoctrination import OpinionConfig
    >>> config = OpinionConfig(opinions=(0, 1), sizes=(1, 1))
    >>> foc_residual_baseline((1, 0), config, 0)
    -1.0
    """
    values = _values(agg)
    total = math.fsum(values)
    if total <= 0:
        raise NullDebateError("First-order conditions need a positive total effort.")
    return math.fsum(values * config.distances(i)) - total**2


def foc_residual_limited(agg, delta, i):
    """
    First-order-condition residual of opinion ``i`` in the limited-exposure
    game, with every aggregate discounted by ``delta ** |i - l|``.

    Examples
    --------
    >>> foc_residual_limited((0.5, 0, 0.5), 1, 1)
    0.0
    """
    config = limited_config()
    values = _values(agg)
    weights = as_delta(delta) ** config.distances(i)
    perceived = weights * values
    total = math.fsum(perceived)
    if total <= 0:
        raise NullDebateError(f"Perceived total effort from opinion {i} is zero.")
    return math.fsum(perceived * config.distances(i)) - total**2


def foc_difference_matrix(k):
    """
    Coefficients of the differences between first-order conditions of
    adjacent opinions.

    Subtracting the condition of opinion ``i + 1`` from that of opinion
    ``i`` leaves ``(O_{i+1} - O_i) * H_i(E)`` with
    ``H_i(E) = -sum_{l <= i} E_l + sum_{l > i} E_l``. Row ``i`` of the
    returned matrix holds the coefficients of ``H_i``.

    Parameters
    ----------

    k : int
        Number of opinions, at least 2.

    Returns
    -------

    `numpy.ndarray`
        Shape ``(k - 1, k)``.

    Examples
    --------
    >>> foc_difference_matrix(3)
    array([[-1.,  1.,  1.],
           [-1., -1.,  1.]])
    """
    if k < 2:
        raise ValueError(f"Need at least two opinions, got {k}.")
    rows = np.arange(k - 1)[:, np.newaxis]
    cols = np.arange(k)[np.newaxis, :]
    return np.where(cols <= rows, -1.0, 1.0)


def finite_difference_check(j, profile, config, delta=None, h=1e-5):
    """
    Central-difference estimate of the derivative of player ``j``'s payoff
    with respect to the player's own effort.

    Compare with `~indoctrination.payoff_derivative`; the two agree up to
    an error of order ``h**2``.

    Parameters
    ----------

    j : int
        Player index.

    profile : `~indoctrination.EffortProfile`
        Efforts of all players.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    delta : float, optional
        Exposure level. If ``None`` the full-monitoring payoff is used.

    h : float, optional
        Step size; must satisfy ``0 < h < e_j``.

    Returns
    -------

    float
    """
    effort = profile.efforts[j]
    if not 0 < h < effort:
        raise ValueError(
            f"Step size h={h} must be positive and smaller than the "
            f"effort {effort} of player {j}."
        )
    objective = deviation_payoff_function(j, profile, config, delta=delta)
    upper, lower = objective([effort + h, effort - h])
    return float((upper - lower) / (2 * h))
