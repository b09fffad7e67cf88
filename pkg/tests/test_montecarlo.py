"""Accumulator algebra, merge invariance, coupling, CSV output."""

import csv
import math

import numpy as np
import pytest

from fracperc import montecarlo as MC
from fracperc import sampler as S
from fracperc.analytic import ModelParams
from fracperc.montecarlo import McEstimate


def test_estimate_matches_numpy():
    rng = np.random.default_rng(0)
    data = rng.normal(3.0, 2.0, size=500)
    est = McEstimate()
    for x in data:
        est.push(float(x))
    assert est.count == 500
    assert est.mean == pytest.approx(data.mean(), rel=1e-12)
    assert est.variance == pytest.approx(data.var(ddof=1), rel=1e-10)
    assert est.stderr == pytest.approx(data.std(ddof=1) / math.sqrt(500), rel=1e-10)


def test_estimate_merge_equals_pooled():
    rng = np.random.default_rng(1)
    data = rng.exponential(1.0, size=999)
    pooled = McEstimate()
    for x in data:
        pooled.push(float(x))
    parts = [McEstimate() for _ in range(7)]
    for i, x in enumerate(data):
        parts[i % 7].push(float(x))
    merged = McEstimate()
    for part in parts:
        merged.merge(part)
    assert merged.count == pooled.count
    assert merged.mean == pytest.approx(pooled.mean, rel=1e-13)
    assert merged.m2 == pytest.approx(pooled.m2, rel=1e-10)


def test_empty_estimate():
    est = McEstimate()
    assert math.isnan(est.stderr)
    est.merge(McEstimate())
    assert est.count == 0


def test_stderr_scales_like_inverse_sqrt_count():
    rng = np.random.default_rng(3)
    small, large = McEstimate(), McEstimate()
    for x in rng.normal(size=2000):
        small.push(float(x))
    for x in rng.normal(size=32000):
        large.push(float(x))
    ratio = large.stderr / small.stderr
    assert ratio == pytest.approx(0.25, rel=0.15)


def test_merge_invariance_across_shardings():
    pr = ModelParams(2, 0.6, 2)
    base = MC.run_experiment(pr, 3, 800, seed=5, shards=1)
    for shards in (8, 64):
        other = MC.run_experiment(pr, 3, 800, seed=5, shards=shards)
        for key, est in base.estimates.items():
            rel = abs(other.estimates[key].mean - est.mean) / max(1.0, abs(est.mean))
            assert rel <= 1e-12


def test_agreement_with_analytic_small():
    from fracperc import analytic

    pr = ModelParams(3, 0.7, 2)
    result = MC.run_experiment(pr, 3, 2500, seed=21)
    for (target, functional), est in result.estimates.items():
        k = {"V0": 0, "V1": 1, "V2": 2}[functional]
        exact = float(analytic.ev(pr, 3, k, target))
        assert abs(est.mean - exact) < 4 * est.stderr


def test_rescaled_mean_attached_only_in_regime():
    res = MC.run_experiment(ModelParams(2, 0.6, 2), 2, 50, seed=2)
    assert res.rescaled_mean("F", "V2") is not None
    scale = (4 / (4 * 0.6)) ** 2
    assert res.rescaled_mean("F", "V2") == pytest.approx(
        res.estimates[("F", "V2")].mean * scale
    )
    res_low = MC.run_experiment(ModelParams(2, 0.2, 2), 2, 50, seed=2)
    assert res_low.rescaled_mean("F", "V0") is None


def test_coupled_grids_are_monotone_in_p():
    # shared uniforms: the p-grid coupling nests realizations cell-wise
    for i in range(20):
        prev = None
        for p in (0.3, 0.5, 0.7, 0.9):
            occ = S.sample(ModelParams(2, p, 2), 5, seed=99, sample_index=i).occupancy
            if prev is not None:
                assert not (prev & ~occ).any()
            prev = occ


def test_coupled_spanning_probability_monotone():
    values = []
    for p in (0.5, 0.65, 0.8, 0.95):
        est = MC.spanning_probability(ModelParams(2, p, 2), 5, 150, seed=31)
        values.append(est.mean)
    assert all(a <= b for a, b in zip(values, values[1:]))


def test_spanning_trivial():
    assert MC.spanning_probability(ModelParams(2, 1.0, 2), 3, 20, seed=0).mean == 1.0
    assert MC.spanning_probability(ModelParams(2, 0.0, 2), 3, 20, seed=0).mean == 0.0
    est = MC.spanning_probability(ModelParams(2, 1.0, 2), 3, 20, seed=0, axis="y")
    assert est.mean == 1.0


def test_independent_seeds_differ_from_coupled():
    s1 = MC.per_p_seed(7, 0.4)
    s2 = MC.per_p_seed(7, 0.42)
    assert s1 != s2 != 7
    a = S.sample(ModelParams(2, 0.5, 2), 4, seed=s1).occupancy
    b = S.sample(ModelParams(2, 0.5, 2), 4, seed=s2).occupancy
    assert not np.array_equal(a, b)


def test_d1_experiment():
    from fracperc import analytic

    pr = ModelParams(2, 0.7, 1)
    res = MC.run_experiment(pr, 4, 1500, seed=13, functionals=("V0", "V1"))
    exact = float(analytic.ev_vk_1d(pr, 4, 1))
    est = res.estimates[("F", "V1")]
    assert abs(est.mean - exact) < 4 * est.stderr
    with pytest.raises(ValueError):
        MC.run_experiment(pr, 2, 10, seed=0, functionals=("V2",))


def test_sample_count_validation():
    with pytest.raises(ValueError):
        MC.run_experiment(ModelParams(2, 0.5, 2), 2, 1, seed=0)


def test_oracle_bridge_at_level_one():
    # sample means meet the exact enumeration values at 4 sigma
    from fractions import Fraction

    from fracperc import oracle

    p = Fraction(3, 5)
    pr = ModelParams(2, float(p), 2)
    result = MC.run_experiment(pr, 1, 100_000, seed=2718, functionals=("V0",))
    for target in ("F", "C"):
        est = result.estimates[(target, "V0")]
        exact = float(oracle.enumerate_2d(2, p, 1, "V0", target))
        assert abs(est.mean - exact) < 4 * est.stderr, (target, est.mean, exact)


def test_csv_round_trip(tmp_path):
    res = MC.run_experiment(ModelParams(2, 0.6, 2), 3, 60, seed=8)
    rows = res.to_rows()
    path = tmp_path / "out.csv"
    MC.write_csv(rows, path)
    with open(path) as fh:
        back = list(csv.DictReader(fh))
    assert len(back) == len(rows)
    for raw, row in zip(back, rows):
        assert int(raw["count"]) == row["count"]
        assert float(raw["mean"]) == row["mean"]  # 17 digits round-trip exactly
        if row["rescaled_mean"] is None:
            assert raw["rescaled_mean"] == ""
        else:
            assert float(raw["rescaled_mean"]) == row["rescaled_mean"]


def test_manifest(tmp_path):
    path = tmp_path / "run.manifest.json"
    manifest = MC.write_manifest(
        path, seed=123, config_text="a=1\n", elapsed=0.5, extra={"rows": 4}
    )
    assert manifest["seed"] == 123
    assert manifest["rows"] == 4
    import json

    on_disk = json.loads(path.read_text())
    assert on_disk["config_sha256"] == MC.config_digest("a=1\n")
