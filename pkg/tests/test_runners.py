import math
import random
from fractions import Fraction

import numpy as np
import pytest

from circlebias.circle import bias_of_rows, count_range, exact_bias, frac
from circlebias.runners import (
    EventBudgetError,
    RunnerSystem,
    antipodal_pairs,
    aperture_max_bias_exact,
    chernoff_experiment,
    delta_integral_check,
    max_bias_exact,
    max_bias_grid,
    pair_moment_estimate,
    positions_at,
    second_moment_estimate,
)


def random_system(rng, n_max=8, speed_max=None, distinct=False, denom=64):
    n = rng.randint(1, n_max)
    starts = tuple(Fraction(rng.randrange(denom), denom) for _ in range(n))
    if distinct:
        speeds = tuple(range(1, n + 1))
    else:
        cap = speed_max or 12
        speeds = tuple(rng.randint(1, cap) for _ in range(n))
    return RunnerSystem(starts, speeds)


def grid_max(sys, steps):
    starts = np.array([float(s) for s in sys.starts])
    speeds = np.array([float(v) for v in sys.speeds])
    ts = np.arange(steps) / steps
    P = (starts[None, :] + ts[:, None] * speeds[None, :]) % 1.0
    return float(bias_of_rows(P).max())


# ------------------------------------------------------------ positions_at ----


def test_positions_rigid_rotation():
    sys = RunnerSystem((0, Fraction(1, 2)), (1, 1))
    assert positions_at(sys, Fraction(1, 4)) == [Fraction(1, 4), Fraction(3, 4)]


def test_positions_time_zero():
    sys = RunnerSystem((Fraction(5, 4), Fraction(-1, 3)), (3, 7))
    assert positions_at(sys, 0) == [Fraction(1, 4), Fraction(2, 3)]


def test_positions_direct_arithmetic():
    sys = RunnerSystem((0, 0), (1, 2))
    assert positions_at(sys, Fraction(1, 3)) == [Fraction(1, 3), Fraction(2, 3)]


def test_system_validation():
    with pytest.raises(ValueError):
        RunnerSystem((0, 0), (1,))
    with pytest.raises(ValueError):
        RunnerSystem((), ())
    assert RunnerSystem((0, 0, 0), (1, 1, 2)).k == 2


# ----------------------------------------------------------- exact optimum ----


def test_single_runner():
    tw = max_bias_exact(RunnerSystem((0,), (1,)))
    assert tw.report.bias == 1
    assert tw.t == 0


def test_distinct_speed_lower_bound_sqrt_n_half():
    rng = random.Random(2024)
    for _ in range(10):
        sys = RunnerSystem(
            tuple(Fraction(rng.randrange(64), 64) for _ in range(4)), (1, 2, 3, 4)
        )
        tw = max_bias_exact(sys)
        assert 4 * tw.report.bias**2 >= 4  # bias >= sqrt(4)/2 = 1, exact compare


def test_duplicated_speeds_lower_bound_and_grid():
    rng = random.Random(99)
    sys = RunnerSystem(
        tuple(Fraction(rng.randrange(64), 64) for _ in range(6)), (1, 1, 2, 2, 3, 3)
    )
    tw = max_bias_exact(sys)
    assert 12 * tw.report.bias**2 >= 3  # bias >= sqrt(k/12), k = 3
    assert grid_max(sys, 100_000) <= float(tw.report.bias) + 1e-9


def test_exact_rejects_non_integer_speeds():
    with pytest.raises(ValueError):
        max_bias_exact(RunnerSystem((0, 0), (1.0, math.sqrt(2))))
    with pytest.raises(ValueError):
        max_bias_exact(RunnerSystem((0.25, 0.5), (1, 2)))  # float starts


def test_exact_witness_report_matches_time():
    rng = random.Random(5)
    for _ in range(10):
        sys = random_system(rng, n_max=6)
        tw = max_bias_exact(sys)
        assert tw.report.bias == exact_bias(positions_at(sys, tw.t)).bias


def test_exact_never_beaten_by_grid():
    rng = random.Random(6)
    for _ in range(10):
        sys = random_system(rng, n_max=6, speed_max=8)
        tw = max_bias_exact(sys)
        assert grid_max(sys, 10_000) <= float(tw.report.bias) + 1e-9


def test_time_shift_invariance():
    rng = random.Random(7)
    for _ in range(10):
        sys = random_system(rng, n_max=6, speed_max=8)
        c = Fraction(rng.randrange(1, 40), 7)
        shifted = RunnerSystem(
            tuple(frac(s + v * c) for s, v in zip(sys.starts, sys.speeds)), sys.speeds
        )
        assert max_bias_exact(sys).report.bias == max_bias_exact(shifted).report.bias


def test_speed_shift_invariance():
    rng = random.Random(8)
    for _ in range(10):
        sys = random_system(rng, n_max=6, speed_max=8)
        shift = rng.randint(-5, 5)
        moved = RunnerSystem(sys.starts, tuple(v + shift for v in sys.speeds))
        assert max_bias_exact(sys).report.bias == max_bias_exact(moved).report.bias


def test_event_budget():
    sys = RunnerSystem((0, 0, 0), (0, 3, 10**7))
    with pytest.raises(EventBudgetError):
        max_bias_exact(sys, event_cap=100)


# ------------------------------------------------------------- grid search ----


def test_grid_equal_speeds_constant():
    sys = RunnerSystem((Fraction(1, 8), Fraction(5, 8), Fraction(1, 2)), (3, 3, 3))
    tw = max_bias_grid(sys, steps=500, refine_iters=5)
    assert tw.report.bias == pytest.approx(
        float(exact_bias(positions_at(sys, 0)).bias), abs=1e-12
    )


def test_grid_below_exact():
    rng = random.Random(11)
    for _ in range(5):
        sys = random_system(rng, n_max=5, speed_max=6)
        exact = float(max_bias_exact(sys).report.bias)
        tw = max_bias_grid(sys, steps=2000, refine_iters=20)
        assert tw.report.bias <= exact + 1e-9


def test_grid_irrational_speeds_close_approach():
    sys = RunnerSystem((0, 0), (1.0, math.sqrt(2)))
    tw = max_bias_grid(sys, steps=10_000, refine_iters=0)
    assert tw.report.bias >= 1.9


# -------------------------------------------------------- aperture optimum ----


def test_aperture_lower_bound_distinct_speeds():
    rng = random.Random(13)
    sys = RunnerSystem(
        tuple(Fraction(rng.randrange(64), 64) for _ in range(4)), (1, 2, 3, 4)
    )
    g = Fraction(1, 2)
    tw = aperture_max_bias_exact(sys, g)
    assert tw.report.bias**2 >= (g - g * g) * 4  # >= sqrt((g - g^2) n)


def test_aperture_vs_grid_oracle():
    sys = RunnerSystem((0, Fraction(1, 2)), (1, 2))
    g = Fraction(1, 4)
    tw = aperture_max_bias_exact(sys, g)
    best = max(
        max_bias_grid(sys, steps=20_000, refine_iters=0, gamma=float(g)).report.bias,
        0.0,
    )
    assert best <= float(tw.report.bias) + 1e-9
    assert float(tw.report.bias) <= best + 1e-3


def test_aperture_dominated_by_full_bias():
    rng = random.Random(17)
    for _ in range(5):
        sys = random_system(rng, n_max=5, speed_max=6)
        full = max_bias_exact(sys).report.bias
        for g in (Fraction(1, 4), Fraction(1, 2)):
            assert aperture_max_bias_exact(sys, g).report.bias <= full


# ----------------------------------------------------------- antipodal pairs ----


def test_antipodal_construction():
    sys1 = antipodal_pairs(1)
    assert sys1.starts == (0, Fraction(1, 2))
    assert sys1.speeds == (1, 1)
    sys2 = antipodal_pairs(2)
    assert sys2.n == 4
    assert sys2.k == 2


def test_antipodal_aperture_bias_stays_small():
    # closed half-circle counts sit in [k, k+4] at all times, so the
    # aperture-1/2 deviation never exceeds 4 even maximized over time
    k = 3
    tw = aperture_max_bias_exact(antipodal_pairs(k), Fraction(1, 2))
    assert 0 <= tw.report.bias <= 4


def test_antipodal_half_circle_counts():
    k = 3
    sys = antipodal_pairs(k)
    rng = random.Random(303)
    half = Fraction(1, 2)
    for _ in range(100):
        t = Fraction(rng.randrange(1 << 20), 1 << 20)
        cfg = positions_at(sys, t)
        lo, hi = count_range(cfg, half, "closed")
        assert k <= lo and hi <= k + 4
        assert count_range(cfg, half, "half_open") == (k, k)


# --------------------------------------------------------------- quadrature ----


def test_second_moment_distinct_speeds():
    rng = random.Random(21)
    sys = RunnerSystem(
        tuple(Fraction(rng.randrange(64), 64) for _ in range(5)), (1, 2, 3, 4, 5)
    )
    est = second_moment_estimate(sys, 0.3, quadrature_steps=400)
    assert est == pytest.approx(1.05, abs=0.02)


def test_second_moment_single_runner():
    sys = RunnerSystem((Fraction(1, 3),), (2,))
    est = second_moment_estimate(sys, 0.5, quadrature_steps=400)
    assert est == pytest.approx(0.25, abs=0.01)


def test_second_moment_gamma_average_lower_bound():
    # with duplicated speeds the (alpha, t) moment can collapse, but averaged
    # over gamma it stays above k/12
    sys = RunnerSystem((0, Fraction(1, 2), Fraction(1, 4), Fraction(3, 4)), (1, 1, 2, 2))
    gammas = (np.arange(40) + 0.5) / 40
    avg = float(
        np.mean([second_moment_estimate(sys, g, quadrature_steps=160) for g in gammas])
    )
    assert avg >= 2 / 12 - 0.02


def test_pair_moment_is_gamma_squared():
    est = pair_moment_estimate(Fraction(1, 8), 1, Fraction(3, 8), 4, 0.3, 400)
    assert est == pytest.approx(0.09, abs=0.01)


def test_delta_integral():
    for m in (1, 7):
        res = delta_integral_check(m)
        assert res.exact == Fraction(1, 12)
        assert res.estimate == pytest.approx(1 / 12, abs=1e-4)
    with pytest.raises(ValueError):
        delta_integral_check(0)


# ---------------------------------------------------------------- chernoff ----


def test_chernoff_smoke():
    rep = chernoff_experiment(16, 1, seed=1)
    assert rep["m"] == 1
    assert rep["trials"] == 1
    assert rep["rng"] == "numpy-pcg64"
    assert 0.0 <= rep["pass_fraction"] <= 1.0
    assert len(rep["per_trial"]) == 1


def test_chernoff_deterministic():
    a = chernoff_experiment(64, 2, seed=9)
    b = chernoff_experiment(64, 2, seed=9)
    assert a == b


def test_chernoff_rejects_small_n():
    with pytest.raises(ValueError):
        chernoff_experiment(8, 1, seed=0)
