import numpy as np
import pytest
from pydantic import ValidationError

from indoctrination import SolverConvergenceError, aggregate
from indoctrination.limited_exposure import (
    LIMITED_EXPOSURE_OPINIONS,
    SMALL_EXPOSURE_W,
    LimitedEquilibrium,
    dw_ddelta,
    exposure_grid,
    limited_config,
    q_partials,
    q_residual,
    reverted_foc_residuals,
    solve_equilibrium,
    solve_w,
    solve_w_polynomial,
)

DELTAS = exposure_grid()


def test_q_residual_values():
    assert q_residual(0, 1) == 0
    assert q_residual(0, 0.5) == -1.0625


@pytest.mark.parametrize("delta", DELTAS)
def test_q_residual_brackets_root(delta):
    assert q_residual(1, delta) == pytest.approx((1 + delta) ** 3 * (3 - delta))
    assert q_residual(1, delta) > 0
    if delta < 1:
        assert q_residual(0, delta) < 0
    else:
        assert q_residual(0, delta) == 0


def test_solve_w_full_exposure():
    assert solve_w(1) == 0


def test_solve_w_half_exposure():
    w = solve_w(0.5)
    assert w == pytest.approx(0.3683, abs=1e-4)
    assert abs(q_residual(w, 0.5)) <= 1e-10


def test_solve_w_small_exposure_limit():
    assert SMALL_EXPOSURE_W == pytest.approx(0.62996, abs=1e-5)
    assert abs(solve_w(0.001) - SMALL_EXPOSURE_W) <= 1e-3
    assert abs(solve_w(1e-4) - SMALL_EXPOSURE_W) <= 1e-3


def test_solve_w_strictly_decreasing():
    w = np.array([solve_w(delta) for delta in DELTAS])
    assert np.all(np.diff(w) < 0)
    assert abs(w[-1]) <= 1e-9


@pytest.mark.parametrize("delta", [0.01, 0.2, 0.5, 0.77, 0.99, 1.0])
def test_solve_w_matches_polynomial_root(delta):
    assert solve_w(delta) == pytest.approx(solve_w_polynomial(delta), abs=1e-9)


def test_solve_w_reports_non_convergence():
    with pytest.raises(SolverConvergenceError, match="delta=0.5"):
        solve_w(0.5, tol=1e-12, max_iter=5)


def test_solve_w_rejects_bad_input():
    with pytest.raises(ValueError, match="tol"):
        solve_w(0.5, tol=0)
    for bad in (0, 1.2):
        with pytest.raises(ValidationError):
            solve_w(bad)


@pytest.mark.parametrize("delta", [0.05, 0.3, 0.6, 0.95, 1.0])
def test_q_partials_positive_and_match_finite_differences(delta):
    w = solve_w(delta)
    dq_dw, dq_ddelta = q_partials(w, delta)
    assert dq_dw > 0
    assert dq_ddelta > 0
    h = 1e-6
    fd_w = (q_residual(w + h, delta) - q_residual(w - h, delta)) / (2 * h)
    fd_delta = (q_residual(w, delta + h) - q_residual(w, delta - h)) / (2 * h)
    assert dq_dw == pytest.approx(fd_w, rel=1e-6)
    assert dq_ddelta == pytest.approx(fd_delta, rel=1e-6)


@pytest.mark.parametrize("delta", [0.05, 0.3, 0.6, 0.95])
def test_dw_ddelta(delta):
    slope = dw_ddelta(delta)
    assert slope < 0
    h = 1e-5
    fd = (solve_w(delta + h) - solve_w(delta - h)) / (2 * h)
    assert slope == pytest.approx(fd, rel=1e-5)


def test_solve_equilibrium_full_exposure():
    eq = solve_equilibrium(1)
    assert (eq.w, eq.e1, eq.e2, eq.e3, eq.r_star) == (0, 0.5, 0, 0.5, 0)


def test_solve_equilibrium_half_exposure():
    eq = solve_equilibrium(0.5)
    assert eq.e1 == pytest.approx(0.5 / (2 * (0.5 + eq.w) ** 2))
    assert eq.e1 == pytest.approx(0.3316, abs=1e-4)
    assert eq.e2 == pytest.approx(0.2443, abs=1e-4)
    assert eq.r_star == 2 * eq.w
    assert eq.w == pytest.approx(0.368350, abs=1e-6)
    assert eq.r_star == pytest.approx(0.73670, abs=1e-5)


@pytest.mark.parametrize("delta", DELTAS)
def test_solve_equilibrium_invariants(delta):
    eq = solve_equilibrium(delta)
    assert eq.e1 == eq.e3
    assert eq.w == pytest.approx(eq.e2 / (2 * eq.e1), abs=1e-12)
    assert eq.r_star == 2 * eq.w
    for residual in reverted_foc_residuals(eq):
        assert abs(residual) <= 1e-9


def test_solve_equilibrium_rejects_loose_root():
    with pytest.raises(SolverConvergenceError, match="First-order conditions"):
        solve_equilibrium(0.5, tol=1e-3)


def test_limited_equilibrium_validation():
    with pytest.raises(ValidationError, match="Extreme aggregates"):
        LimitedEquilibrium(delta=0.5, w=0.5, e1=0.3, e2=0.3, e3=0.31, r_star=1)
    with pytest.raises(ValidationError, match="r_star"):
        LimitedEquilibrium(delta=0.5, w=0.5, e1=0.3, e2=0.3, e3=0.3, r_star=0.9)
    with pytest.raises(ValidationError, match="does not match"):
        LimitedEquilibrium(delta=0.5, w=0.4, e1=0.3, e2=0.3, e3=0.3, r_star=0.8)


@pytest.mark.parametrize("sizes", [(1, 1, 1), (2, 3, 2)])
def test_to_profile_keeps_aggregates(sizes):
    eq = solve_equilibrium(0.4)
    profile = eq.to_profile(sizes)
    config = limited_config(sizes)
    assert config.opinions == LIMITED_EXPOSURE_OPINIONS
    assert profile.n == sum(sizes)
    np.testing.assert_allclose(
        aggregate(profile, config).values, eq.aggregates.values, rtol=1e-14
    )
