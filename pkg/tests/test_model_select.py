import csv
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcboost import model_select
from mcboost.baselines import BaselineResult
from mcboost.data_io import Dataset
from mcboost.engine import TrainConfig
from mcboost.model_select import (
    DEFAULT_E_GRID,
    CvResult,
    EGrid,
    average_ranks,
    select_E,
    select_rounds,
    wilcoxon_z,
    write_wilcoxon,
)
from mcboost.stumps import Stump
from tests.oracles import brute_force_ranks

TABLE = Path(__file__).resolve().parents[1] / "data" / "published_errors.csv"


def table_columns():
    with open(TABLE, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: [float(r[k]) for r in rows] for k in rows[0] if k != "dataset"}


@pytest.fixture(scope="module")
def splits():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(160, 3))
    y = np.where(X[:, 0] + rng.normal(scale=0.7, size=160) > 0, 1, -1)
    data = Dataset(X, y)
    return data.subset(np.arange(100)), data.subset(np.arange(100, 160))


class TestEGrid:
    def test_default(self):
        assert len(DEFAULT_E_GRID) == 19
        assert DEFAULT_E_GRID[0] == 0.05 and DEFAULT_E_GRID[-1] == 0.95

    @pytest.mark.parametrize("values", [(), (0.0, 0.5), (0.5, 1.0), (0.3, 0.2), (0.2, 0.2)])
    def test_rejects(self, values):
        with pytest.raises(ValueError):
            EGrid(values)

    def test_from_values_sorts(self):
        assert EGrid.from_values([0.5, 0.2, 0.5]).values == (0.2, 0.5)


class TestSelectE:
    def fake(self, monkeypatch, errors):
        """Replace training so each E scores the given validation error."""

        class Fake:
            def __init__(self, E):
                self.E = E

        def fit(args):
            _, _, config = args
            return config.E, Fake(config.E), errors[config.E]

        monkeypatch.setattr(model_select, "_fit_and_score", fit)

    def test_tie_prefers_largest(self, monkeypatch, splits):
        self.fake(monkeypatch, {0.2: 0.10, 0.3: 0.10})
        assert select_E(*splits, EGrid((0.2, 0.3))).chosen == 0.3

    def test_unique_minimum(self, monkeypatch, splits):
        self.fake(monkeypatch, {0.2: 0.10, 0.3: 0.20})
        assert select_E(*splits, EGrid((0.2, 0.3))).chosen == 0.2

    def test_single_candidate(self, monkeypatch, splits):
        self.fake(monkeypatch, {0.4: 0.5})
        assert select_E(*splits, EGrid((0.4,))).chosen == 0.4

    def test_failures_excluded(self, monkeypatch, splits):
        def fit(args):
            E = args[2].E
            return (E, None, "boom") if E == 0.5 else (E, object(), 0.3)

        monkeypatch.setattr(model_select, "_fit_and_score", fit)
        result = select_E(*splits, EGrid((0.2, 0.5)))
        assert result.chosen == 0.2
        assert result.failed == [(0.5, "boom")]

    def test_real_training(self, splits):
        grid = EGrid((0.1, 0.3, 0.5, 0.7, 0.9))
        result = select_E(*splits, grid, TrainConfig(n_max=200))
        best = min(err for _, err in result.table)
        assert dict(result.table)[result.chosen] == best
        assert [E for E, _ in result.table] == list(grid.values)
        assert result.models[result.chosen].ensemble.error_rate(splits[1]) == best

    def test_grid_order_irrelevant(self, splits):
        a = select_E(*splits, EGrid.from_values([0.9, 0.1, 0.5]))
        b = select_E(*splits, EGrid.from_values([0.1, 0.5, 0.9]))
        assert a.chosen == b.chosen and a.table == b.table

    def test_parallel_matches_serial(self, splits):
        grid = EGrid((0.2, 0.6))
        serial = select_E(*splits, grid)
        parallel = select_E(*splits, grid, n_jobs=2)
        assert serial.table == parallel.table and serial.chosen == parallel.chosen

    def test_report_csv(self, tmp_path):
        CvResult(0.3, [(0.2, 0.1), (0.3, 0.1)], "rule").write(tmp_path / "cv.csv")
        with open(tmp_path / "cv.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["candidate", "validation_error", "chosen"]
        assert [r[2] for r in rows[1:]] == ["0", "1"]


class TestSelectRounds:
    def fake_run(self, monkeypatch, errors):
        calls = []

        def fake_train(data, config):
            calls.append(config)
            run = BaselineResult("adaboost", [(Stump(0, 0.0), 1.0)] * len(errors))
            run.staged_errors = lambda _data: np.array(errors)
            return run

        monkeypatch.setattr(model_select, "train_baseline", fake_train)
        return calls

    def test_tie_prefers_smallest(self, monkeypatch, splits):
        self.fake_run(monkeypatch, [0.3, 0.1, 0.1])
        assert select_rounds(*splits, 3).chosen == 2

    def test_monotone_decreasing(self, monkeypatch, splits):
        self.fake_run(monkeypatch, [0.4, 0.3, 0.2, 0.1])
        assert select_rounds(*splits, 4).chosen == 4

    def test_first_round_best(self, monkeypatch, splits):
        self.fake_run(monkeypatch, [0.1, 0.2, 0.3])
        assert select_rounds(*splits, 3).chosen == 1

    def test_one_training_run(self, monkeypatch, splits):
        real = model_select.train_baseline
        calls = []

        def counting(data, config):
            calls.append(config)
            return real(data, config)

        monkeypatch.setattr(model_select, "train_baseline", counting)
        result = select_rounds(*splits, 60)
        assert len(calls) == 1
        assert len(result.table) == len(result.models["run"].rounds)

    def test_prefix_errors_match_retraining(self, splits):
        from mcboost.baselines import adaboost_train

        result = select_rounds(*splits, 20)
        for t in (1, 7, 20):
            assert result.table[t - 1][1] == adaboost_train(splits[0], t).ensemble.error_rate(splits[1])


class TestWilcoxon:
    def test_table_mc_vs_ab(self):
        cols = table_columns()
        result = wilcoxon_z(cols["MC"], cols["AB"])
        assert result.n_effective == 12
        assert result.z == pytest.approx(2.8, abs=0.05)

    @pytest.mark.parametrize("other,expected", [("L2B", 2.92), ("LP", 2.92), ("AB-CG", 2.67), ("MD", 2.17)])
    def test_table_other_columns(self, other, expected):
        cols = table_columns()
        assert wilcoxon_z(cols["MC"], cols[other]).z == pytest.approx(expected, abs=0.15)

    def test_identical_refused(self):
        with pytest.raises(ValueError):
            wilcoxon_z([0.1] * 6, [0.1] * 6)

    def test_hand_computed(self):
        # differences 1, 2, -3, 4, 5: W = 1+2+4+5 = 12, n = 5
        a = np.zeros(5)
        b = np.array([1.0, 2.0, -3.0, 4.0, 5.0])
        result = wilcoxon_z(a, b)
        assert result.W == 12.0
        assert result.z == pytest.approx((12 - 7.5) / math.sqrt(13.75))

    def test_average_ranks_against_counting(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            v = rng.integers(0, 6, size=rng.integers(1, 15))
            np.testing.assert_array_equal(average_ranks(v), brute_force_ranks(v))

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 10**6), n=st.integers(5, 30))
    def test_antisymmetry(self, seed, n):
        rng = np.random.default_rng(seed)
        a = rng.integers(0, 8, size=n) / 4
        b = a + rng.choice([-1, 1], size=n) * rng.integers(1, 5, size=n) / 4
        forward, backward = wilcoxon_z(a, b), wilcoxon_z(b, a)
        m = forward.n_effective
        assert backward.W == m * (m + 1) / 2 - forward.W
        assert backward.z == pytest.approx(-forward.z, abs=1e-12)

    def test_write(self, tmp_path):
        write_wilcoxon(wilcoxon_z([0.0] * 5, [1.0, 2.0, -3.0, 4.0, 5.0]), tmp_path / "w.csv")
        with open(tmp_path / "w.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["n_effective", "W", "z"]
        assert rows[1][:2] == ["5", "12.0"]
