import json

import pytest

from uqtail import (DOWN, UP, InvalidParameters, InvalidState, Model,
                    default_uniformization, make_params, params_from_json)
from uqtail.params import check_state


def test_default_uniformization():
    assert default_uniformization(10, 11, 0.1, 10, Model.MODEL1) == pytest.approx(31.1)
    assert default_uniformization(10, 30, 0.1, 10, Model.MODEL2) == pytest.approx(80.1)
    assert default_uniformization(10, 30, 0.1, 10, Model.RSRD) == pytest.approx(80.1)


def test_make_params_fills_c():
    p = make_params(10, 11, 0.1, 10)
    assert p.C == pytest.approx(31.1)
    assert p.p == 1.0


def test_explicit_c_validated():
    with pytest.raises(InvalidParameters):
        make_params(10, 11, 0.1, 10, C=5.0)
    p = make_params(10, 11, 0.1, 10, C=40.0)
    assert p.C == 40.0


@pytest.mark.parametrize("kwargs", [
    dict(lam=-1.0, mu=11, alpha=0.1, beta=10),
    dict(lam=10, mu=0.0, alpha=0.1, beta=10),
    dict(lam=10, mu=11, alpha=-0.1, beta=10),
    dict(lam=10, mu=11, alpha=0.1, beta=0.0),
])
def test_positive_rates_required(kwargs):
    with pytest.raises(InvalidParameters):
        make_params(**kwargs)


def test_p_range():
    with pytest.raises(InvalidParameters):
        make_params(10, 30, 0.1, 10, p=0.0, model=Model.MODEL2)
    with pytest.raises(InvalidParameters):
        make_params(10, 30, 0.1, 10, p=1.1, model=Model.MODEL2)
    with pytest.raises(InvalidParameters):
        make_params(10, 11, 0.1, 10, p=0.5, model=Model.MODEL1)


def test_json_round_trip():
    p = make_params(10, 30, 0.1, 10, p=0.5, model=Model.MODEL2)
    text = p.to_json(Model.MODEL2)
    d = json.loads(text)
    assert d["lambda"] == 10
    assert d["model"] == "model2"
    p2, model = params_from_json(text)
    assert model is Model.MODEL2
    assert p2 == p


def test_check_state():
    check_state((0, UP), Model.MODEL1)
    check_state((3, 2, DOWN), Model.MODEL2)
    check_state((-4, UP), Model.MODEL1, free=True)
    with pytest.raises(InvalidState):
        check_state((-1, UP), Model.MODEL1)
    with pytest.raises(InvalidState):
        check_state((0, 0, 2), Model.MODEL2)
    with pytest.raises(InvalidState):
        check_state((0, UP), Model.MODEL2)
