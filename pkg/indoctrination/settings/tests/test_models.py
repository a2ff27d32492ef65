from pathlib import Path

import pytest
from pydantic import ValidationError

from indoctrination.settings import Command, OutputFormat, RunConfig

DEFAULT_EQUILIBRIUM_SETTINGS = dict(
    command="equilibrium", opinions=(0, 1, 2), sizes=(2, 5, 2)
)


def test_create_equilibrium_settings_correctly():
    config = RunConfig(**DEFAULT_EQUILIBRIUM_SETTINGS)
    assert config.command is Command.EQUILIBRIUM
    assert config.opinions == (0, 1, 2)
    assert config.sizes == (2, 5, 2)
    assert config.format is OutputFormat.JSON
    assert config.tol == 1e-12
    assert config.certification_tol == 1e-6


def test_defaults_of_optional_inputs():
    config = RunConfig(command="process", delta=0.5)
    assert config.grid == (0.01, 1, 100)
    assert config.limited_sizes == (1, 1, 1)
    assert config.initial_shares == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert RunConfig(command="limited", delta=1, sizes=(2, 1, 2)).limited_sizes == (
        2,
        1,
        2,
    )


def test_settings_are_immutable():
    config = RunConfig(**DEFAULT_EQUILIBRIUM_SETTINGS)
    with pytest.raises(TypeError):
        config.tol = 1e-3


@pytest.mark.parametrize(
    "settings, match",
    [
        (dict(command="equilibrium"), "needs opinions, sizes"),
        (dict(command="equilibrium", opinions=(0, 1)), "needs sizes"),
        (dict(command="limited"), "needs delta"),
        (dict(command="process"), "needs delta"),
        (dict(command="verify"), "needs input"),
    ],
)
def test_missing_command_inputs(settings, match):
    with pytest.raises(ValidationError, match=match):
        RunConfig(**settings)


@pytest.mark.parametrize(
    "settings, match",
    [
        (dict(opinions=(0, 1), sizes=(1, 1, 1)), "3 group sizes for 2 opinions"),
        (dict(opinions=(1, 0), sizes=(1, 1)), "strictly increasing"),
        (dict(opinions=(0, 1), sizes=(1, 0)), "at least 1"),
    ],
)
def test_invalid_equilibrium_configuration(settings, match):
    with pytest.raises(ValidationError, match=match):
        RunConfig(command="equilibrium", **settings)


@pytest.mark.parametrize("delta", [0, -0.5, 1.5])
def test_delta_out_of_range(delta):
    with pytest.raises(ValidationError, match="delta"):
        RunConfig(command="limited", delta=delta)


def test_process_needs_interior_delta():
    with pytest.raises(ValidationError, match="below 1"):
        RunConfig(command="process", delta=1)


@pytest.mark.parametrize("sizes", [(1, 1), (1, 0, 1), (1, 1, 1, 1)])
def test_limited_sizes(sizes):
    with pytest.raises(ValidationError, match="three positive sizes"):
        RunConfig(command="limited", delta=0.5, sizes=sizes)


def test_opinions_only_for_equilibrium():
    with pytest.raises(ValidationError, match="does not take opinions"):
        RunConfig(command="sweep", opinions=(0, 1))


@pytest.mark.parametrize(
    "grid, match",
    [
        ((0.5, 0.1, 10), "must be below"),
        ((0, 1, 10), "grid"),
        ((0.1, 1, 0), "grid"),
    ],
)
def test_invalid_grid(grid, match):
    with pytest.raises(ValidationError, match=match):
        RunConfig(command="sweep", grid=grid)


def test_single_point_grid():
    assert RunConfig(command="sweep", grid=(1, 1, 1)).grid == (1, 1, 1)


@pytest.mark.parametrize(
    "pi0, match",
    [
        ((0.5, 0.5, 0), "positive"),
        ((0.5, 0.3, 0.3), "sum to 1"),
    ],
)
def test_invalid_initial_shares(pi0, match):
    with pytest.raises(ValidationError, match=match):
        RunConfig(command="process", delta=0.5, pi0=pi0)


def test_verify_settings(tmp_path):
    path = tmp_path / "equilibrium.json"
    config = RunConfig(command="verify", input=path, format="csv")
    assert config.input == Path(path)
    assert config.format is OutputFormat.CSV


def test_unknown_settings_are_rejected():
    with pytest.raises(ValidationError, match="extra fields"):
        RunConfig(command="sweep", steps=10)
    with pytest.raises(ValidationError, match="command"):
        RunConfig(command="plot")
