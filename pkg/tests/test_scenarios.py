import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gstep.scenarios import (ScenarioError, build_scenarios, compute_net_load, extract_representative_days,
                             growth_factor, kmeans, load_scenarios, save_scenarios, scenarios_for)

from conftest import system


def test_net_load_without_renewables_is_scaled_load():
    load = np.arange(48, dtype=float).reshape(48, 1) + 1.0
    vs = compute_net_load(load, np.zeros_like(load))
    assert len(vs) == 2
    np.testing.assert_allclose(np.concatenate([v.values for v in vs]), load[:, 0] / 48.0)


def test_net_load_zero_when_load_equals_renewables():
    load = np.random.default_rng(1).uniform(10, 20, (72, 3))
    vs = compute_net_load(load, load.copy())
    assert all(not v.values.any() for v in vs)


def test_net_load_two_zones_two_days_by_hand():
    h = np.arange(48)
    load = np.column_stack([100.0 + h, 150.0 + 2 * h])
    ren = np.column_stack([np.zeros(48), np.full(48, 10.0)])
    vs = compute_net_load(load, ren)
    peak = 150.0 + 2 * 47 - 10.0
    for d in range(2):
        expect = []
        for z in range(2):
            for hh in range(24):
                t = d * 24 + hh
                expect.append((load[t, z] - ren[t, z]) / peak)
        assert vs[d].day_index == d + 1
        assert len(vs[d].values) == 48
        np.testing.assert_allclose(vs[d].values, expect, rtol=0, atol=1e-15)


@pytest.mark.parametrize("ren", [np.zeros((47, 1)), np.full((48, 1), np.nan)])
def test_net_load_rejects_bad_input(ren):
    with pytest.raises(ScenarioError):
        compute_net_load(np.ones((48, 1)), ren)


def test_kmeans_identical_vectors():
    X = np.ones((7, 4))
    res = kmeans(X, 1)
    assert list(res.labels) == [0] * 7


def test_kmeans_k_out_of_range():
    with pytest.raises(ScenarioError):
        kmeans(np.ones((5, 2)), 2)
    with pytest.raises(ScenarioError):
        kmeans(np.eye(3), 0)


def _best_two_partition(X):
    best, arg = np.inf, None
    n = len(X)
    for mask in range(1, 2 ** (n - 1)):
        lab = np.array([(mask >> i) & 1 for i in range(n)])
        cost = sum(((X[lab == c] - X[lab == c].mean(axis=0)) ** 2).sum() for c in (0, 1))
        if cost < best:
            best, arg = cost, lab
    return arg


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_kmeans_separated_clouds_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 0.1, (5, 3)), rng.normal(5, 0.1, (6, 3))])
    res = kmeans(X, 2, seed=seed)
    oracle = _best_two_partition(X)
    same = np.array_equal(res.labels, oracle) or np.array_equal(res.labels, 1 - oracle)
    assert same


def test_kmeans_deterministic():
    X = np.random.default_rng(3).normal(size=(60, 8))
    a, b = kmeans(X, 5, seed=11), kmeans(X, 5, seed=11)
    assert np.array_equal(a.labels, b.labels) and np.array_equal(a.centroids, b.centroids)


def test_kmeans_reaches_fixed_point():
    X = np.random.default_rng(4).normal(size=(40, 3))
    res = kmeans(X, 4, seed=0)
    assert np.array_equal(np.argmin(((X[:, None] - res.centroids[None]) ** 2).sum(2), axis=1), res.labels)
    for c in range(4):
        np.testing.assert_allclose(res.centroids[c], X[res.labels == c].mean(axis=0))


def test_single_day_cluster_without_extremes():
    X = np.array([[0.0, 0.0], [5.0, 5.0], [5.1, 5.0]])
    res = kmeans(X, 2, seed=0)
    sel = extract_representative_days(res, X, extremes=False)
    lone = [s for s in sel if s.day_index == 1]
    assert lone and lone[0].weight == 1 and lone[0].kind == "normal"


def test_selection_matches_exhaustive_scan():
    rng = np.random.default_rng(5)
    X = np.vstack([rng.normal(0, 1, (4, 6)), rng.normal(6, 1, (6, 6))])
    res = kmeans(X, 2, seed=0)
    sel = extract_representative_days(res, X, extremes=True)
    for c in range(2):
        mem = [i for i in range(10) if res.labels[i] == c]
        d = {i: float(np.linalg.norm(X[i] - res.centroids[c])) for i in mem}
        near = min(mem, key=lambda i: (d[i], i))
        far = max((i for i in mem if i != near), key=lambda i: (d[i], -i))
        got = {s.kind: s for s in sel if s.cluster == c}
        assert got["normal"].day_index == near + 1 and got["normal"].weight == len(mem) - 1
        assert got["extreme"].day_index == far + 1 and got["extreme"].weight == 1


def test_ties_go_to_smallest_day():
    X = np.array([[1.0], [-1.0], [1.0], [-1.0]])
    res = kmeans(X, 1, seed=0)
    sel = extract_representative_days(res, X, extremes=True)
    assert [(s.kind, s.day_index) for s in sel] == [("normal", 1), ("extreme", 2)]


@pytest.mark.parametrize("extremes", [False, True])
def test_year_clustering_weights(extremes):
    m = system("isone")
    s = build_scenarios(m, k=5, seed=0, extremes=extremes)
    for y in s.epochs:
        days = s.days(y)
        assert len(days) == (10 if extremes else 5)
        assert sum(d.weight for d in days) == 365
        assert all(d.weight == 1 for d in days if d.kind == "extreme")


def test_selected_rows_are_verbatim_source_days():
    m = system("pjm")
    s = build_scenarios(m, k=4, seed=2, extremes=True)
    ts = m.timeseries
    for y, days in s.epochs.items():
        g = growth_factor(m, y)
        for d in days:
            rows = slice((d.source_day - 1) * 24, d.source_day * 24)
            for z, v in d.load.items():
                np.testing.assert_array_equal(v, ts.load.column(z)[rows] * g)
            for kind, tab in d.profiles.items():
                for z, v in tab.items():
                    np.testing.assert_array_equal(v, ts.profiles[kind].column(z)[rows])


def test_growth_to_epoch_final_year():
    m = system("isone")
    cfg = m.config
    assert growth_factor(m, 1) == pytest.approx(1.023 ** (cfg.start_year + cfg.years_per_epoch - 1 - cfg.base_year))


def test_scenario_file_round_trip(tmp_path):
    m = system("toy3")
    s = scenarios_for(m)
    p = save_scenarios(s, tmp_path / "s.json")
    t = load_scenarios(p)
    assert t.epochs.keys() == s.epochs.keys()
    for y in s.epochs:
        for a, b in zip(s.days(y), t.days(y)):
            assert (a.id, a.kind, a.weight, a.source_day) == (b.id, b.kind, b.weight, b.source_day)
            for z in a.load:
                np.testing.assert_array_equal(a.load[z], b.load[z])


def test_extremes_fold_back_into_normal_days():
    s = build_scenarios(system("pjm"), k=3, seed=0, extremes=True)
    plain = s.without_extremes()
    for y in s.epochs:
        assert len(plain.days(y)) == 3 and plain.total_weight(y) == 365


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(1, 6), st.integers(0, 10_000), st.booleans())
def test_weight_conservation_property(n_days, k, seed, extremes):
    X = np.random.default_rng(seed).normal(size=(n_days, 5))
    k = min(k, n_days)
    res = kmeans(X, k, seed=seed)
    sel = extract_representative_days(res, X, extremes=extremes)
    assert sum(s.weight for s in sel) == n_days
    assert all(s.weight >= 1 for s in sel)
    assert all(s.weight == 1 for s in sel if s.kind == "extreme")
    assert len({s.day_index for s in sel}) == len(sel)


def test_enumerated_small_year_is_exact():
    # k = number of days: every day is its own cluster
    X = np.array(list(itertools.product([0.0, 1.0], repeat=3)))
    res = kmeans(X, len(X), seed=0)
    sel = extract_representative_days(res, X, extremes=True)
    assert sorted(s.day_index for s in sel) == list(range(1, 9))
    assert all(s.weight == 1 for s in sel)
