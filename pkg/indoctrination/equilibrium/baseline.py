import numpy as np
from pydantic import BaseModel, root_validator

from ..core import AggregateEfforts, EffortProfile, check_consistent

__all__ = [
    "BaselineEquilibrium",
    "aggregate_equilibrium",
    "symmetric_equilibrium",
    "symmetric_payoffs",
    "solve_baseline",
    "validate_split",
]


class BaselineEquilibrium(BaseModel):
    """
    Equilibrium of the full-monitoring game.

    Parameters
    ----------

    aggregates : `~indoctrination.AggregateEfforts`
        Aggregate effort of every opinion. Moderate opinions are silent and
        both extreme opinions carry a quarter of the distance between them.

    symmetric_profile : `~indoctrination.EffortProfile`
        The symmetric equilibrium, in which players sharing an opinion exert
        the same effort.

    per_opinion_payoff : tuple of float
        Payoff of a player of each opinion under ``symmetric_profile``.

    Notes
    -----
    Only the aggregates are pinned down in equilibrium; any split of the
    extreme aggregates within their groups is also an equilibrium. Use
    `validate_split` to check a particular split.
    """

    aggregates: AggregateEfforts
    symmetric_profile: EffortProfile
    per_opinion_payoff: tuple[float, ...]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @root_validator(skip_on_failure=True)
    @classmethod
    def validate_aggregates(cls, values):
        agg = values["aggregates"].values
        if any(v != 0 for v in agg[1:-1]):
            raise ValueError(f"Moderate aggregates must be zero, got {agg}.")
        if agg[0] != agg[-1]:
            raise ValueError(
                f"Extreme aggregates must be equal, got {agg[0]} and {agg[-1]}."
            )
        if len(values["per_opinion_payoff"]) != len(agg):
            raise ValueError("Need exactly one payoff per opinion.")
        return values


def aggregate_equilibrium(config):
    """
    Aggregate effort of every opinion in equilibrium.

    Every moderate opinion has zero aggregate effort and both extreme
    opinions have ``|O_1 - O_k| / 4``, whatever the group sizes and the
    positions of the moderates.

    Parameters
    ----------

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    Returns
    -------

    `~indoctrination.AggregateEfforts`

    Examples
    --------
    >>> from indoctrination import OpinionConfig
    >>> config = OpinionConfig(opinions=(0, 0.2, 0.7, 1), sizes=(3, 1, 4, 2))
    >>> aggregate_equilibrium(config).values
    (0.25, 0.0, 0.0, 0.25)
    """
    values = np.zeros(config.k)
    values[0] = values[-1] = config.span / 4
    return AggregateEfforts(values=tuple(values.tolist()))


def symmetric_equilibrium(config):
    """
    The unique symmetric equilibrium profile.

    Moderates exert nothing; each player of extreme opinion ``i`` exerts
    ``|O_1 - O_k| / (4 n_i)``, so smaller extreme groups are individually
    louder.

    Parameters
    ----------

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    Returns
    -------

    `~indoctrination.EffortProfile`
        Players ordered group by group.
    """
    per_group = np.zeros(config.k)
    for i in (0, config.k - 1):
        per_group[i] = config.span / (4 * config.sizes[i])
    efforts = np.repeat(per_group, config.sizes)
    return EffortProfile.from_group_efforts(config, efforts.tolist())


def symmetric_payoffs(config):
    """
    Payoff of a player of each opinion under the symmetric equilibrium.

    Moderates get ``-|O_1 - O_k| / 2``; extreme players additionally pay
    their own effort and get ``-|O_1 - O_k| / 2 * (1 + 1 / (2 n_i))``.

    Returns
    -------

    `numpy.ndarray`
        One payoff per opinion.
    """
    sizes = np.asarray(config.sizes, dtype=float)
    extreme = np.zeros(config.k)
    extreme[0] = extreme[-1] = 1
    return -config.span / 2 * (1 + extreme / (2 * sizes))


def solve_baseline(config):
    """
    Bundle the equilibrium aggregates, the symmetric profile and its payoffs.

    Returns
    -------

    `BaselineEquilibrium`
    """
    return BaselineEquilibrium(
        aggregates=aggregate_equilibrium(config),
        symmetric_profile=symmetric_equilibrium(config),
        per_opinion_payoff=tuple(symmetric_payoffs(config).tolist()),
    )


def validate_split(profile, config, tol=1e-12):
    """
    Check whether a profile is one of the (asymmetric) equilibria.

    A profile is an equilibrium exactly when every moderate player exerts
    zero effort and each extreme group's efforts add up to
    ``|O_1 - O_k| / 4``.

    Parameters
    ----------

    profile : `~indoctrination.EffortProfile`
        Candidate profile.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    tol : float, optional
        Absolute tolerance on the group sums and moderate efforts.

    Returns
    -------

    bool
    """
    check_consistent(profile, config)
    assignment = np.asarray(profile.assignment)
    efforts = np.asarray(profile.efforts, dtype=float)
    target = config.span / 4
    for i in range(config.k):
        in_group = efforts[assignment == i]
        if config.is_extreme(i):
            if abs(in_group.sum() - target) > tol:
                return False
        elif np.any(in_group > tol):
            return False
    return True
