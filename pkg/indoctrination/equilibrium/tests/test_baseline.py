import numpy as np
import pytest
from pydantic import ValidationError

from indoctrination import (
    AggregateEfforts,
    EffortProfile,
    OpinionConfig,
    aggregate,
    payoff,
)
from indoctrination.equilibrium import (
    BaselineEquilibrium,
    aggregate_equilibrium,
    solve_baseline,
    symmetric_equilibrium,
    symmetric_payoffs,
    validate_split,
)
from indoctrination.verification import (
    best_response,
    certify_equilibrium,
    foc_residual_baseline,
    max_payoff_gain,
)


def _random_configs(count, seed=1024):
    """
    Random configurations with 2 to 6 opinions in [-5, 5] and 1 to 6
    players per opinion.
    """
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(count):
        k = int(rng.integers(2, 7))
        opinions = np.sort(rng.uniform(-5, 5, size=k))
        sizes = rng.integers(1, 7, size=k)
        configs.append(
            OpinionConfig(
                opinions=tuple(opinions.tolist()), sizes=tuple(sizes.tolist())
            )
        )
    return configs


RANDOM_CONFIGS = _random_configs(50)


@pytest.mark.parametrize(
    "opinions, expected",
    [
        ((0, 1), (0.25, 0.25)),
        ((0, 3), (0.75, 0.75)),
        ((0, 0.2, 0.7, 1), (0.25, 0, 0, 0.25)),
    ],
)
def test_aggregate_equilibrium(opinions, expected):
    config = OpinionConfig(opinions=opinions, sizes=(3, 1, 4, 2)[: len(opinions)])
    assert aggregate_equilibrium(config).values == expected


def test_aggregate_equilibrium_ignores_moderates():
    base = aggregate_equilibrium(OpinionConfig(opinions=(-2, 3), sizes=(1, 4)))
    for moderates in [(0,), (-1, 2.5), (-1.5, 0, 1, 2)]:
        opinions = (-2, *moderates, 3)
        config = OpinionConfig(opinions=opinions, sizes=(2,) * len(opinions))
        values = aggregate_equilibrium(config).values
        assert (values[0], values[-1]) == base.values
        assert all(v == 0 for v in values[1:-1])


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_aggregate_equilibrium_random(config):
    values = aggregate_equilibrium(config).values
    quarter = abs(config.opinions[0] - config.opinions[-1]) / 4
    assert values[0] == quarter
    assert values[-1] == quarter
    assert all(v == 0 for v in values[1:-1])


@pytest.mark.parametrize(
    "opinions, sizes, expected",
    [
        ((0, 1, 2), (2, 5, 2), (0.25, 0.25, 0, 0, 0, 0, 0, 0.25, 0.25)),
        ((0, 1), (1, 1), (0.25, 0.25)),
        ((0, 4), (4, 1), (0.25, 0.25, 0.25, 0.25, 1.0)),
    ],
)
def test_symmetric_equilibrium(opinions, sizes, expected):
    config = OpinionConfig(opinions=opinions, sizes=sizes)
    profile = symmetric_equilibrium(config)
    assert profile.efforts == expected
    assert profile.assignment == config.assignment


@pytest.mark.parametrize(
    "opinions, sizes, expected",
    [
        ((0, 1, 2), (2, 5, 2), (-1.25, -1.0, -1.25)),
        ((0, 1), (1, 1), (-0.75, -0.75)),
    ],
)
def test_symmetric_payoffs(opinions, sizes, expected):
    config = OpinionConfig(opinions=opinions, sizes=sizes)
    np.testing.assert_allclose(symmetric_payoffs(config), expected)


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_symmetric_payoffs_match_direct_payoff(config):
    profile = symmetric_equilibrium(config)
    predicted = symmetric_payoffs(config)
    for j, i in enumerate(profile.assignment):
        assert payoff(j, profile, config) == pytest.approx(predicted[i], abs=1e-12)
    if config.k >= 3:
        # Moderates keep a strictly higher payoff than either extreme
        assert np.all(predicted[1:-1] > max(predicted[0], predicted[-1]))


def test_symmetric_payoffs_scale_with_distance():
    config = OpinionConfig(opinions=(0, 0.4, 1), sizes=(2, 3, 1))
    stretched = OpinionConfig(opinions=(0, 1.2, 3), sizes=(2, 3, 1))
    np.testing.assert_allclose(
        symmetric_payoffs(stretched), 3 * symmetric_payoffs(config)
    )


def test_extreme_payoff_increases_with_group_size():
    payoffs = [
        symmetric_payoffs(OpinionConfig(opinions=(0, 1), sizes=(n, 1)))[0]
        for n in range(1, 8)
    ]
    assert np.all(np.diff(payoffs) > 0)


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_extreme_first_order_conditions_hold(config):
    agg = aggregate_equilibrium(config)
    for i in (0, config.k - 1):
        assert foc_residual_baseline(agg, config, i) == pytest.approx(0, abs=1e-12)


@pytest.mark.parametrize("config", RANDOM_CONFIGS)
def test_symmetric_equilibrium_is_certified(config):
    profile = symmetric_equilibrium(config)
    reports = certify_equilibrium(profile, config)
    assert len(reports) == config.n
    assert max_payoff_gain(reports) <= 1e-6
    assert all(report.within_tolerance for report in reports)


@pytest.mark.parametrize("config", RANDOM_CONFIGS[:10])
def test_best_response_at_symmetric_equilibrium(config):
    profile = symmetric_equilibrium(config)
    for j in range(config.n):
        assert best_response(j, profile, config) == pytest.approx(
            profile.efforts[j], abs=1e-6
        )


def test_solve_baseline():
    config = OpinionConfig(opinions=(0, 1, 2), sizes=(2, 5, 2))
    baseline = solve_baseline(config)
    assert baseline.aggregates.values == (0.5, 0, 0.5)
    assert aggregate(baseline.symmetric_profile, config) == baseline.aggregates
    assert baseline.per_opinion_payoff == (-1.25, -1.0, -1.25)


def test_baseline_equilibrium_rejects_loud_moderates():
    config = OpinionConfig(opinions=(0, 1, 2), sizes=(1, 1, 1))
    profile = EffortProfile.from_group_efforts(config, (0.5, 0.1, 0.5))
    with pytest.raises(ValidationError, match="Moderate aggregates"):
        BaselineEquilibrium(
            aggregates=AggregateEfforts(values=(0.5, 0.1, 0.5)),
            symmetric_profile=profile,
            per_opinion_payoff=(-1.25, -1.0, -1.25),
        )


def test_validate_split():
    config = OpinionConfig(opinions=(0, 1, 2), sizes=(2, 1, 3))
    # Asymmetric splits of the extreme aggregates are also equilibria
    asymmetric = EffortProfile.from_group_efforts(
        config, (0.5, 0.0, 0.0, 0.1, 0.15, 0.25)
    )
    assert validate_split(asymmetric, config)
    assert validate_split(symmetric_equilibrium(config), config)
    loud_moderate = asymmetric.with_effort(2, 0.01)
    assert not validate_split(loud_moderate, config)
    short = asymmetric.with_effort(0, 0.4)
    assert not validate_split(short, config)


def test_asymmetric_split_is_certified():
    config = OpinionConfig(opinions=(0, 1, 2), sizes=(2, 1, 3))
    asymmetric = EffortProfile.from_group_efforts(
        config, (0.5, 0.0, 0.0, 0.1, 0.15, 0.25)
    )
    assert max_payoff_gain(certify_equilibrium(asymmetric, config)) <= 1e-6
