import math

import numpy as np
import pytest

from innoreg.indices import (ShareVector, hoover_index, indices_table,
                             related_variety, theil_index, unrelated_variety,
                             variety_decomposition)
from innoreg.panel import load_employment

LN2 = math.log(2.0)


def sv(values, parents=None):
    return ShareVector(shares=values, parents=parents or {})


def test_theil_known_values():
    assert theil_index(sv({"a": 1.0})) == 0.0
    assert theil_index(sv({"a": 0.5, "b": 0.25, "c": 0.25})) == pytest.approx(
        1.5 * LN2, abs=1e-12)  # = 1.0397...
    n = 7
    uniform = sv({f"i{k}": 1.0 / n for k in range(n)})
    assert theil_index(uniform) == pytest.approx(math.log(n), abs=1e-12)


def test_zero_shares_contribute_nothing():
    base = sv({"a": 0.5, "b": 0.5})
    padded = sv({"a": 0.5, "b": 0.5, "c": 0.0})
    assert theil_index(padded) == theil_index(base)


def test_share_vector_validation():
    with pytest.raises(ValueError):
        ShareVector(shares={})
    with pytest.raises(ValueError):
        sv({"a": -0.1, "b": 1.1})
    with pytest.raises(ValueError):
        sv({"a": 0.6, "b": 0.6})  # sums to 1.2


def test_from_employment_normalizes():
    v = ShareVector.from_employment({"a": 30, "b": 10}, parents={"a": "m", "b": "m"})
    assert v.shares["a"] == pytest.approx(0.75)
    with pytest.raises(ValueError):
        ShareVector.from_employment({"a": 0, "b": 0})


def test_variety_decomposition_worked_example():
    # two parents: m = {a: .4, b: .1}, s = {c: .3, d: .2}
    v = sv({"a": 0.4, "b": 0.1, "c": 0.3, "d": 0.2},
           parents={"a": "m", "b": "m", "c": "s", "d": "s"})
    uv = unrelated_variety(v)
    rv = related_variety(v)
    th = theil_index(v)
    assert uv == pytest.approx(LN2, abs=1e-12)  # P_m = P_s = 0.5
    # sum_g sum_i p_i ln(P_g / p_i)
    expected_rv = (0.4 * math.log(0.5 / 0.4) + 0.1 * math.log(0.5 / 0.1)
                   + 0.3 * math.log(0.5 / 0.3) + 0.2 * math.log(0.5 / 0.2))
    assert rv == pytest.approx(expected_rv, abs=1e-12)
    assert th == pytest.approx(uv + rv, abs=1e-12)
    res = variety_decomposition(v)
    assert (res.theil, res.related, res.unrelated) == (th, rv, uv)


def test_decomposition_identity_random():
    rng = np.random.default_rng(20240817)
    parents = {f"i{k}": f"g{k % 5}" for k in range(40)}
    for _ in range(300):
        n = rng.integers(2, 40)
        w = rng.gamma(0.6, size=int(n))
        w /= w.sum()
        v = ShareVector(shares={f"i{k}": float(w[k]) for k in range(int(n))},
                        parents=parents)
        res = variety_decomposition(v)
        assert abs(res.theil - (res.related + res.unrelated)) < 1e-9


def test_missing_parent_raises():
    v = sv({"a": 0.7, "b": 0.3}, parents={"a": "m"})
    with pytest.raises(ValueError, match="'b'"):
        unrelated_variety(v)
    # zero-share industries never need a parent
    v2 = sv({"a": 1.0, "b": 0.0}, parents={"a": "m"})
    assert unrelated_variety(v2) == 0.0


def test_single_parent_means_no_unrelated_variety():
    v = sv({"a": 0.6, "b": 0.4}, parents={"a": "m", "b": "m"})
    assert unrelated_variety(v) == pytest.approx(0.0, abs=1e-12)
    assert related_variety(v) == pytest.approx(theil_index(v), abs=1e-12)


def test_hoover_known_value():
    res = hoover_index({"a": 70, "b": 30}, {"a": 50, "b": 50})
    assert res.value == pytest.approx(0.2, abs=1e-12)
    assert res.display == pytest.approx(20.0, abs=1e-12)


def test_hoover_bounds_and_extremes():
    rng = np.random.default_rng(5)
    for _ in range(100):
        r = rng.random(6) + 1e-3
        n = rng.random(6) + 1e-3
        res = hoover_index({f"i{k}": r[k] for k in range(6)},
                           {f"i{k}": n[k] for k in range(6)})
        assert 0.0 <= res.value <= 1.0
    same = hoover_index({"a": 2, "b": 8}, {"a": 20, "b": 80})
    assert same.value == pytest.approx(0.0, abs=1e-12)
    # disjoint supports -> maximal specialization
    disjoint = hoover_index({"a": 5, "b": 0}, {"a": 0, "b": 5})
    assert disjoint.value == pytest.approx(1.0, abs=1e-12)


def test_hoover_requires_positive_totals():
    with pytest.raises(ValueError):
        hoover_index({"a": 0}, {"a": 3})
    with pytest.raises(ValueError):
        hoover_index({"a": 3}, {"a": 0})


def test_indices_table_from_employment_csv(tmp_path):
    path = tmp_path / "emp.csv"
    path.write_text(
        "region,year,industry,parent,employment\n"
        "north,2001,food,manuf,40\n"
        "north,2001,textile,manuf,10\n"
        "north,2001,retail,serv,30\n"
        "north,2001,finance,serv,20\n"
        "south,2001,food,manuf,25\n"
        "south,2001,textile,manuf,25\n"
        "south,2001,retail,serv,25\n"
        "south,2001,finance,serv,25\n")
    table = indices_table(load_employment(str(path)))
    assert [(r["region"], r["year"]) for r in table] == [
        ("north", 2001), ("south", 2001)]
    north, south = table
    assert north["theil"] == pytest.approx(1.27986, abs=1e-4)
    assert north["unrelated"] == pytest.approx(LN2, abs=1e-9)
    assert north["theil"] == pytest.approx(north["related"] + north["unrelated"],
                                           abs=1e-9)
    assert south["theil"] == pytest.approx(math.log(4), abs=1e-12)
    # equal 50/50 parent split in both regions and nationally
    assert south["unrelated"] == pytest.approx(LN2, abs=1e-9)
    assert north["hoover"] == pytest.approx(10.0, abs=1e-9)  # display scale x100


def test_indices_table_industry_subset(tmp_path):
    path = tmp_path / "emp.csv"
    path.write_text(
        "region,year,industry,parent,employment\n"
        "north,2001,food,manuf,40\n"
        "north,2001,textile,manuf,10\n"
        "north,2001,retail,serv,50\n"
        "south,2001,food,manuf,25\n"
        "south,2001,textile,manuf,25\n"
        "south,2001,retail,serv,50\n")
    table = indices_table(load_employment(str(path)),
                          industries=["food", "textile"], scale=1.0)
    north = table[0]
    # shares renormalized within the subset: (.8, .2)
    assert north["theil"] == pytest.approx(
        0.8 * math.log(1 / 0.8) + 0.2 * math.log(1 / 0.2), abs=1e-12)
    assert north["unrelated"] == 0.0  # single parent remains
    # national subset totals: food 65, textile 35
    assert north["hoover"] == pytest.approx(
        0.5 * (abs(0.8 - 0.65) + abs(0.2 - 0.35)), abs=1e-12)
