import numpy as np
import pytest

from uqtail import (DOWN, UP, InvalidParameters, Model, empirical_distribution,
                    excursion_verdict, full_kernel, ld_excursions, make_params,
                    regime_prediction, simulate)

A = make_params(10, 11, 0.1, 10)
B = make_params(20, 60, 0.01, 1)
T2 = make_params(10, 30, 0.1, 10, model=Model.MODEL2)


def test_determinism():
    t1 = simulate(A, Model.MODEL1, steps=500, seed=12)
    t2 = simulate(A, Model.MODEL1, steps=500, seed=12)
    assert np.array_equal(t1.x, t2.x) and np.array_equal(t1.status, t2.status)
    t3 = simulate(A, Model.MODEL1, steps=500, seed=13)
    assert not np.array_equal(t1.x, t3.x)


def test_moves_are_legal():
    traj = simulate(A, Model.MODEL1, steps=2000, seed=0)
    for i in range(2000):
        row = full_kernel(A, Model.MODEL1, traj.state(i))
        assert row.prob(traj.state(i + 1)) > 0


def test_moves_are_legal_model2():
    traj = simulate(T2, Model.MODEL2, steps=1000, seed=0)
    for i in range(1000):
        row = full_kernel(T2, Model.MODEL2, traj.state(i))
        assert row.prob(traj.state(i + 1)) > 0


def test_near_empty_system_hugs_zero():
    params = make_params(0.0011, 11, 0.1, 10)
    traj = simulate(params, Model.MODEL1, steps=5000, seed=1)
    assert np.mean(traj.x == 0) > 0.99


def test_start_state_respected():
    traj = simulate(A, Model.MODEL1, steps=10, seed=0, start=(5, DOWN))
    assert traj.state(0) == (5, DOWN)


def test_empirical_distribution_normalized():
    traj = simulate(A, Model.MODEL1, steps=200000, seed=2)
    emp = empirical_distribution(traj, burn_in=10000)
    assert sum(emp.entries.values()) == pytest.approx(1.0, abs=1e-12)
    up = sum(v for k, v in emp.entries.items() if k[1] == UP)
    assert up == pytest.approx(10 / 10.1, abs=0.01)
    assert emp.notes == ()


def test_transience_diagnostic():
    unstable = make_params(14, 11, 0.1, 10)
    traj = simulate(unstable, Model.MODEL1, steps=100000, seed=3)
    emp = empirical_distribution(traj, burn_in=0)
    assert any("transient" in note for note in emp.notes)


def test_empirical_rejects_bad_burn_in():
    traj = simulate(A, Model.MODEL1, steps=100, seed=0)
    with pytest.raises(InvalidParameters):
        empirical_distribution(traj, burn_in=100)


def test_excursion_invariants():
    traj = simulate(A, Model.MODEL1, steps=200000, seed=4)
    excursions = ld_excursions(traj, level_k=30)
    assert excursions
    for e in excursions:
        assert e.end_step > e.start_step
        assert 0.0 <= e.down_fraction <= 1.0
        assert e.peak >= 30
        assert traj.x[e.start_step] <= 2
        assert np.all(traj.x[e.start_step + 1:e.end_step] < 30)


def test_excursion_requires_level_above_base():
    traj = simulate(A, Model.MODEL1, steps=100, seed=0)
    with pytest.raises(InvalidParameters):
        ld_excursions(traj, level_k=2, base_level=2)


def test_no_excursions_is_empty_list():
    traj = simulate(A, Model.MODEL1, steps=200, seed=0)
    assert ld_excursions(traj, level_k=150) == []


def test_regime_prediction():
    assert regime_prediction(A) == "UpDominated"
    assert regime_prediction(B) == "DownDominated"
    p = make_params(10, 30, 0.1, 10, p=0.5, model=Model.MODEL2)
    assert regime_prediction(p) == "UpDominated"  # mu*p = 15 < lam+beta = 20
    with pytest.raises(InvalidParameters):
        regime_prediction(make_params(10, 20, 0.1, 10))


def test_excursion_verdict_majority():
    traj = simulate(B, Model.MODEL1, steps=70000, seed=11)
    excursions = ld_excursions(traj, level_k=30)
    assert excursion_verdict(excursions) == "DownDominated"
    with pytest.raises(ValueError):
        excursion_verdict([])


def test_trajectory_csv():
    traj = simulate(A, Model.MODEL1, steps=5, seed=9)
    text = traj.to_csv()
    lines = text.splitlines()
    assert any(line.startswith("# lambda=") for line in lines)
    assert any(line.startswith("# seed=9") for line in lines)
    assert lines[-1].startswith("5,")
