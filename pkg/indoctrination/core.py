import math

import numpy as np
from pydantic import BaseModel, confloat, root_validator, validator

__all__ = [
    "NullDebateError",
    "SolverConvergenceError",
    "UnimodalityError",
    "NullDebatePayoff",
    "NULL_DEBATE_PAYOFF",
    "OpinionConfig",
    "EffortProfile",
    "AggregateEfforts",
    "ObservedDistribution",
    "ExposureLevel",
    "as_delta",
    "check_consistent",
    "check_limited_layout",
    "exposure_weights",
    "aggregate",
    "observed_distribution",
    "observed_distribution_limited",
    "expected_distance",
    "payoff",
    "payoff_limited",
    "deviation_payoff_function",
    "deviation_payoffs",
    "payoff_derivative",
]

# Tolerance for a probability vector to count as lying on the simplex
SIMPLEX_TOL = 1e-12

# Tolerance on the opinion spacing of the limited-exposure game
UNIT_SPACING_TOL = 1e-12


class NullDebateError(ValueError):
    """
    Raised when the total effort (as perceived from some viewpoint) is zero,
    so that no distribution of observed opinions exists.
    """


class SolverConvergenceError(RuntimeError):
    """
    Raised when an iterative solver does not reach its tolerance within
    its iteration limit.
    """


class UnimodalityError(RuntimeError):
    """
    Raised when a one-dimensional search sees three points that violate
    concavity of the objective.
    """


class NullDebatePayoff(float):
    """
    Payoff of the null debate, in which nobody exerts any effort.

    The payoff of the all-zero profile is the infimum of payoffs over all
    nonzero profiles, which is negative infinity because efforts are
    unbounded. The sentinel equals ``-inf``, compares below every finite
    payoff and refuses to take part in arithmetic.

    Examples
    --------
    >>> from indoctrination import NULL_DEBATE_PAYOFF
    >>> NULL_DEBATE_PAYOFF < -1e300
    True
    >>> NULL_DEBATE_PAYOFF
    NULL_DEBATE_PAYOFF
    """

    def __new__(cls):
        return super().__new__(cls, -math.inf)

    def __repr__(self):
        return "NULL_DEBATE_PAYOFF"

    def __reduce__(self):
        return (NullDebatePayoff, ())

    def _refuse_arithmetic(self, *args):
        raise TypeError("The null-debate payoff cannot be used in arithmetic.")

    __add__ = __radd__ = __sub__ = __rsub__ = _refuse_arithmetic
    __mul__ = __rmul__ = __truediv__ = __rtruediv__ = _refuse_arithmetic
    __floordiv__ = __rfloordiv__ = __mod__ = __rmod__ = _refuse_arithmetic
    __pow__ = __rpow__ = __neg__ = __pos__ = __abs__ = _refuse_arithmetic


NULL_DEBATE_PAYOFF = NullDebatePayoff()


class OpinionConfig(BaseModel):
    """
    The opinion line and the number of players holding each opinion.

    Parameters
    ----------

    opinions : tuple of float
        Strictly increasing opinion values ``O_1 < ... < O_k``, with ``k >= 2``.

    sizes : tuple of int
        Number of players holding each opinion; every entry is at least one.

    Attributes
    ----------

    k : int
        Number of distinct opinions.

    n : int
        Total number of players.

    span : float
        Distance ``|O_1 - O_k|`` between the two extreme opinions.

    assignment : tuple of int
        Opinion index of every player, players ordered group by group.

    Notes
    -----
    Opinion indices are 0-based: index ``0`` is ``O_1`` and index ``k - 1``
    is ``O_k``. Every other index is a moderate opinion.

    Examples
    --------
    >>> config = OpinionConfig(opinions=(0, 1, 2), sizes=(2, 5, 2))
    >>> config.k, config.n, config.span
    (3, 9, 2.0)
    """

    opinions: tuple[float, ...]
    sizes: tuple[int, ...]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("opinions")
    @classmethod
    def validate_opinions(cls, v):
        if len(v) < 2:
            raise ValueError(f"At least two opinions are required, got {len(v)}.")
        if not all(math.isfinite(o) for o in v):
            raise ValueError(f"Opinions must be finite, got {v}.")
        if any(right <= left for left, right in zip(v, v[1:])):
            raise ValueError(f"Opinions must be strictly increasing, got {v}.")
        return v

    # When the switch to pydantic v2 happens, this root_validator will need
    # to be replaced by a model_validator decorator.
    @root_validator(skip_on_failure=True)
    @classmethod
    def validate_sizes(cls, values):
        opinions, sizes = values["opinions"], values["sizes"]
        if len(sizes) != len(opinions):
            raise ValueError(
                f"Got {len(sizes)} group sizes for {len(opinions)} opinions."
            )
        if any(size < 1 for size in sizes):
            raise ValueError(f"Every group size must be at least 1, got {sizes}.")
        return values

    @property
    def k(self):
        return len(self.opinions)

    @property
    def n(self):
        return sum(self.sizes)

    @property
    def span(self):
        return abs(self.opinions[-1] - self.opinions[0])

    @property
    def assignment(self):
        return tuple(np.repeat(np.arange(self.k), self.sizes).tolist())

    def is_extreme(self, i):
        """
        ``True`` if opinion index ``i`` is one of the two extreme opinions.
        """
        return i == 0 or i == self.k - 1

    def distances(self, viewpoint):
        """
        Distances ``|O_l - O_i|`` from opinion ``viewpoint`` to every opinion.
        """
        opinions = np.asarray(self.opinions, dtype=float)
        return np.abs(opinions - opinions[viewpoint])


class EffortProfile(BaseModel):
    """
    Effort of every player along with the opinion each player holds.

    Parameters
    ----------

    efforts : tuple of float
        Nonnegative effort ``e_j`` of each player.

    assignment : tuple of int
        Opinion index of each player, same length as ``efforts``.
    """

    efforts: tuple[float, ...]
    assignment: tuple[int, ...]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("efforts")
    @classmethod
    def validate_efforts(cls, v):
        if not all(math.isfinite(e) and e >= 0 for e in v):
            raise ValueError(f"Efforts must be finite and nonnegative, got {v}.")
        return v

    @root_validator(skip_on_failure=True)
    @classmethod
    def validate_assignment(cls, values):
        efforts, assignment = values["efforts"], values["assignment"]
        if len(efforts) != len(assignment):
            raise ValueError(
                f"Got {len(efforts)} efforts but {len(assignment)} opinion "
                "assignments."
            )
        if any(i < 0 for i in assignment):
            raise ValueError(f"Opinion indices must be nonnegative, got {assignment}.")
        return values

    @classmethod
    def from_group_efforts(cls, config, efforts):
        """
        Make a profile whose players are ordered group by group, as in
        ``config.assignment``.

        Parameters
        ----------

        config : `~indoctrination.OpinionConfig`
            Opinions and group sizes.

        efforts : sequence of float
            Effort of each player, in the order of ``config.assignment``.

        Returns
        -------

        `~indoctrination.EffortProfile`
        """
        return cls(efforts=tuple(efforts), assignment=config.assignment)

    @property
    def n(self):
        return len(self.efforts)

    def with_effort(self, j, effort):
        """
        Return a copy of the profile in which player ``j`` exerts ``effort``.
        """
        efforts = list(self.efforts)
        efforts[j] = effort
        return EffortProfile(efforts=tuple(efforts), assignment=self.assignment)


class AggregateEfforts(BaseModel):
    """
    Sum of the efforts of the players holding each opinion.
    """

    values: tuple[float, ...]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("values")
    @classmethod
    def validate_values(cls, v):
        if not all(math.isfinite(e) and e >= 0 for e in v):
            raise ValueError(
                f"Aggregate efforts must be finite and nonnegative, got {v}."
            )
        return v

    @property
    def total(self):
        return math.fsum(self.values)


class ObservedDistribution(BaseModel):
    """
    Distribution of publicly observed opinions, one probability per opinion.
    """

    probs: tuple[float, ...]

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"

    @validator("probs")
    @classmethod
    def validate_probs(cls, v):
        if not all(-SIMPLEX_TOL <= p <= 1 + SIMPLEX_TOL for p in v):
            raise ValueError(f"Probabilities must lie in [0, 1], got {v}.")
        if abs(math.fsum(v) - 1) > SIMPLEX_TOL:
            raise ValueError(f"Probabilities must sum to 1, got sum {math.fsum(v)}.")
        return v


class ExposureLevel(BaseModel):
    """
    Fraction of an opinion signal retained per unit of opinion distance.

    ``delta = 1`` is full monitoring.
    """

    delta: confloat(gt=0, le=1)

    class Config:
        allow_mutation = False
        validate_all = True
        extra = "forbid"


def as_delta(delta):
    """
    Return ``delta`` as a validated float, accepting either a number or an
    `~indoctrination.ExposureLevel`. ``None`` passes through unchanged.
    """
    if delta is None:
        return None
    if isinstance(delta, ExposureLevel):
        return delta.delta
    return ExposureLevel(delta=delta).delta


def _values(agg):
    # Accept AggregateEfforts or anything array-like
    if isinstance(agg, AggregateEfforts):
        return np.asarray(agg.values, dtype=float)
    values = np.asarray(agg, dtype=float)
    if np.any(values < 0):
        raise ValueError(f"Aggregate efforts must be nonnegative, got {values}.")
    return values


def check_consistent(profile, config):
    """
    Check that a profile has exactly ``config.sizes[i]`` players holding
    opinion ``i`` for every ``i``.

    Raises
    ------

    ValueError
        If the profile and the configuration disagree.
    """
    assignment = np.asarray(profile.assignment, dtype=int)
    if assignment.size and assignment.max() >= config.k:
        raise ValueError(
            f"Profile assigns opinion index {assignment.max()} but the "
            f"configuration has only {config.k} opinions."
        )
    counts = np.bincount(assignment, minlength=config.k)
    if tuple(counts.tolist()) != tuple(config.sizes):
        raise ValueError(
            f"Profile has group sizes {tuple(counts.tolist())} but the "
            f"configuration has {tuple(config.sizes)}."
        )


def check_limited_layout(config, tol=UNIT_SPACING_TOL):
    """
    Check that ``config`` is a limited-exposure layout: three opinions one
    unit apart.

    Raises
    ------

    ValueError
        If there are not exactly three opinions or the spacing is not one.
    """
    if config.k != 3:
        raise ValueError(
            f"The limited-exposure game has exactly 3 opinions, got {config.k}."
        )
    gaps = np.diff(config.opinions)
    if np.any(np.abs(gaps - 1) > tol):
        raise ValueError(
            "The limited-exposure game requires opinions one unit apart, got "
            f"{config.opinions}."
        )


def exposure_weights(config, delta, viewpoint):
    """
    Retention factors ``delta ** |O_i - O_l|`` seen from opinion ``viewpoint``.

    With ``delta=None`` (full monitoring) every weight is one.
    """
    if delta is None:
        return np.ones(config.k)
    return as_delta(delta) ** config.distances(viewpoint)


def aggregate(profile, config):
    """
    Sum the efforts of the players holding each opinion.

    Parameters
    ----------

    profile : `~indoctrination.EffortProfile`
        Efforts and opinion assignment of every player.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes; must agree with ``profile``.

    Returns
    -------

    `~indoctrination.AggregateEfforts`
        ``E_i`` for every opinion ``i``.

    Examples
    --------
    >>> config = OpinionConfig(opinions=(0, 1), sizes=(2, 1))
    >>> profile = EffortProfile.from_group_efforts(config, (0.1, 0.15, 0.25))
    >>> aggregate(profile, config).values
    (0.25, 0.25)
    """
    check_consistent(profile, config)
    values = np.bincount(
        np.asarray(profile.assignment, dtype=int),
        weights=np.asarray(profile.efforts, dtype=float),
        minlength=config.k,
    )
    return AggregateEfforts(values=tuple(values.tolist()))


def observed_distribution(agg):
    """
    Distribution of publicly observed opinions under full monitoring.

    Parameters
    ----------

    agg : `~indoctrination.AggregateEfforts` or array-like
        Aggregate effort of every opinion.

    Returns
    -------

    `~indoctrination.ObservedDistribution`
        ``E_i / sum(E)`` for every opinion.

    Raises
    ------

    NullDebateError
        If the total effort is zero.
    """
    values = _values(agg)
    total = math.fsum(values)
    if total <= 0:
        raise NullDebateError("Total effort is zero: nobody takes part in the debate.")
    return ObservedDistribution(probs=tuple((values / total).tolist()))


def observed_distribution_limited(agg, config, delta, viewpoint):
    """
    Distribution of observed opinions as perceived from opinion ``viewpoint``
    when signals lose a factor ``delta`` per unit of opinion distance.

    Parameters
    ----------

    agg : `~indoctrination.AggregateEfforts` or array-like
        Aggregate effort of every opinion.

    config : `~indoctrination.OpinionConfig`
        Opinion values; only the opinions are used.

    delta : float or `~indoctrination.ExposureLevel`
        Exposure level in ``(0, 1]``.

    viewpoint : int
        Opinion index of the observer.

    Returns
    -------

    `~indoctrination.ObservedDistribution`

    Raises
    ------

    NullDebateError
        If the perceived total effort is zero.

    Examples
    --------
    >>> config = OpinionConfig(opinions=(0, 1, 2), sizes=(1, 1, 1))
    >>> observed_distribution_limited((1, 1, 1), config, 0.5, 1).probs
    (0.25, 0.5, 0.25)
    """
    values = _values(agg)
    if values.size != config.k:
        raise ValueError(
            f"Got {values.size} aggregate efforts for {config.k} opinions."
        )
    perceived = exposure_weights(config, delta, viewpoint) * values
    total = math.fsum(perceived)
    if total <= 0:
        raise NullDebateError(
            f"Perceived total effort from opinion {viewpoint} is zero."
        )
    return ObservedDistribution(probs=tuple((perceived / total).tolist()))


def expected_distance(dist, config, viewpoint):
    """
    Expected distance between opinion ``viewpoint`` and the observed opinion.
    """
    probs = np.asarray(dist.probs, dtype=float)
    return math.fsum(probs * config.distances(viewpoint))


def payoff(j, profile, config):
    """
    Payoff of player ``j`` under full monitoring.

    The payoff is the negative of the player's own effort minus the expected
    distance between the player's opinion and the observed opinion.

    Parameters
    ----------

    j : int
        Player index.

    profile : `~indoctrination.EffortProfile`
        Efforts of all players.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    Returns
    -------

    float
        The payoff, or `~indoctrination.NULL_DEBATE_PAYOFF` when nobody
        exerts any effort.
    """
    agg = aggregate(profile, config)
    try:
        dist = observed_distribution(agg)
    except NullDebateError:
        return NULL_DEBATE_PAYOFF
    i = profile.assignment[j]
    return -profile.efforts[j] - expected_distance(dist, config, i)


def payoff_limited(j, profile, config, delta):
    """
    Payoff of player ``j`` in the limited-exposure game.

    Same as `~indoctrination.payoff`, except that the distribution of
    observed opinions is the one perceived from the player's own opinion.
    The game is defined for three opinions one unit apart.

    Raises
    ------

    ValueError
        If ``config`` is not a limited-exposure layout.
    """
    check_limited_layout(config)
    agg = aggregate(profile, config)
    i = profile.assignment[j]
    try:
        dist = observed_distribution_limited(agg, config, delta, i)
    except NullDebateError:
        return NULL_DEBATE_PAYOFF
    return -profile.efforts[j] - expected_distance(dist, config, i)


def _fixed_terms(j, profile, config, delta):
    # Perceived total and distance-weighted mass of everyone but player j,
    # from player j's viewpoint. Player j's own signal has weight 1 and
    # distance 0, so it only enters the total.
    check_consistent(profile, config)
    if delta is not None:
        check_limited_layout(config)
    assignment = np.asarray(profile.assignment, dtype=int)
    efforts = np.asarray(profile.efforts, dtype=float)
    others = np.ones(profile.n, dtype=bool)
    others[j] = False
    fixed = np.bincount(assignment[others], weights=efforts[others], minlength=config.k)
    i = assignment[j]
    weights = exposure_weights(config, delta, i)
    fixed_total = float(fixed @ weights)
    fixed_mass = float(fixed @ (weights * config.distances(i)))
    return fixed_total, fixed_mass


def deviation_payoff_function(j, profile, config, delta=None):
    """
    Payoff of player ``j`` as a function of the player's own effort, with
    everyone else's effort held fixed.

    Parameters
    ----------

    j : int
        Player index.

    profile : `~indoctrination.EffortProfile`
        Efforts of all players; only the opponents' efforts matter.

    config : `~indoctrination.OpinionConfig`
        Opinions and group sizes.

    delta : float, optional
        Exposure level. If ``None`` the full-monitoring payoff is used,
        otherwise the limited-exposure payoff.

    Returns
    -------

    callable
        Maps an array of candidate efforts to an array of payoffs. Candidates
        at which the perceived total effort is zero get ``-inf``.
    """
    fixed_total, fixed_mass = _fixed_terms(j, profile, config, delta)

    def objective(efforts):
        efforts = np.asarray(efforts, dtype=float)
        total = fixed_total + efforts
        with np.errstate(divide="ignore", invalid="ignore"):
            values = -efforts - fixed_mass / total
        return np.where(total > 0, values, -np.inf)

    return objective


def deviation_payoffs(j, profile, config, efforts, delta=None):
    """
    Evaluate `deviation_payoff_function` at the candidate ``efforts``.
    """
    return deviation_payoff_function(j, profile, config, delta=delta)(efforts)


def payoff_derivative(j, profile, config, delta=None):
    """
    Derivative of player ``j``'s payoff with respect to the player's own
    effort, at the current profile.

    The derivative is ``-1 + N / D**2`` where ``D`` is the perceived total
    effort and ``N`` the perceived distance-weighted effort. Multiplying by
    ``D**2`` gives the first-order-condition residual of the player's opinion.

    Raises
    ------

    NullDebateError
        If the perceived total effort is zero.
    """
    fixed_total, fixed_mass = _fixed_terms(j, profile, config, delta)
    total = fixed_total + profile.efforts[j]
    if total <= 0:
        raise NullDebateError(f"Player {j} perceives zero total effort.")
    return -1 + fixed_mass / total**2
