import math

import pytest

import odrslab


def star(n):
    return {
        "n_offline": n,
        "capacities": [1] * n,
        "arrivals": [{"edges": [{"i": i, "x": 1.0 / n} for i in range(n)]}],
    }


def test_optimize_matching():
    opt = odrslab.optimize_params("matching")
    assert opt["alpha"] == pytest.approx(0.6528, abs=5e-4)


def test_online_round_keeps_sum():
    x = [0.3, 0.5, 0.7, 0.25, 0.25]
    bits = odrslab.online_round(x, 7)
    assert len(bits) == len(x)
    assert math.floor(sum(x)) <= sum(bits) <= math.ceil(sum(x))


def test_crs_exact_selection():
    dist = {"elements": [0, 1], "atoms": [{"set": [0], "p": 0.5}, {"set": [0, 1], "p": 0.5}]}
    out = odrslab.crs(dist, [0.5, 0.5])
    a = out["alpha"]
    assert out["selection"] == pytest.approx([a * 0.5, a * 0.5], abs=1e-12)


def test_round_star_exact():
    rep = odrslab.round_instance(star(4), alg="odrs")
    assert len(rep["edges"]) == 4
    assert odrslab.exact_ratio(star(4)) >= 0.652


def test_validate_reports_bad_sum():
    inst = star(2)
    inst["arrivals"][0]["edges"][0]["x"] = 0.9
    assert odrslab.validate(inst)


def test_bad_params_raise():
    with pytest.raises(ValueError):
        odrslab.ratio_bound(0.5, 0.5, "matching")
