import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from layerprobe.metrics import (
    LayerReport,
    TrendFit,
    accuracy,
    group_breakdown,
    layer_trend,
    macro_f1,
    selectivity,
    separability_gap,
    write_report_csv,
    read_csv_rows,
)


class TestAccuracy:
    def test_perfect(self):
        assert accuracy([1, 2, 3], [1, 2, 3]) == 1.0

    def test_disjoint(self):
        assert accuracy(["a", "a"], ["b", "b"]) == 0.0

    def test_three_of_four(self):
        assert accuracy([0, 1, 2, 3], [0, 1, 2, 9]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            accuracy([1], [1, 2])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            accuracy([], [])

    @given(seed=st.integers(0, 1000))
    @settings(max_examples=20, deadline=None)
    def test_permutation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        pred = rng.integers(0, 3, size=20)
        gold = rng.integers(0, 3, size=20)
        perm = rng.permutation(20)
        assert accuracy(pred, gold) == accuracy(pred[perm], gold[perm])


class TestMacroF1:
    def test_perfect_two_class(self):
        assert macro_f1([0, 1, 0, 1], [0, 1, 0, 1], [0, 1]) == 1.0

    def test_always_predict_a_on_balanced_gold(self):
        # Class A: P=0.5, R=1 -> F1=2/3.  Class B: P=R=0 -> F1=0.  Mean=1/3.
        pred = ["A"] * 4
        gold = ["A", "A", "B", "B"]
        assert macro_f1(pred, gold, ["A", "B"]) == pytest.approx(1 / 3)

    def test_vacuous_class_contributes_zero(self):
        # Class "C" appears in neither pred nor gold.
        value = macro_f1([0, 1], [0, 1], [0, 1, "C"])
        assert value == pytest.approx(2 / 3)

    def test_empty_class_set(self):
        with pytest.raises(ValueError, match="empty"):
            macro_f1([0], [0], [])

    def test_gold_outside_class_set(self):
        with pytest.raises(ValueError, match="outside"):
            macro_f1([0], [7], [0, 1])

    def test_one_iff_all_perfect(self):
        assert macro_f1([0, 1, 2], [0, 1, 2], [0, 1, 2]) == 1.0
        assert macro_f1([0, 1, 1], [0, 1, 2], [0, 1, 2]) < 1.0


class TestSelectivityAndGap:
    def test_paper_band_example(self):
        assert selectivity(0.95, 0.40) == pytest.approx(0.55)

    def test_equal_accuracies_zero(self):
        assert selectivity(0.7, 0.7) == 0.0

    def test_gap_arithmetic(self):
        assert separability_gap(0.8, 0.6) == pytest.approx(0.2)

    def test_antisymmetry(self):
        for a, b in [(0.9, 0.2), (0.3, 0.8), (0.5, 0.5)]:
            assert selectivity(a, b) == -selectivity(b, a)
            assert separability_gap(a, b) == -separability_gap(b, a)

    def test_range_checks(self):
        with pytest.raises(ValueError):
            selectivity(1.2, 0.5)
        with pytest.raises(ValueError):
            separability_gap(0.5, -0.1)


class TestLayerTrend:
    def test_exact_descending_line(self):
        fit = layer_trend([1.0, 0.5, 0.0])
        assert fit.slope == pytest.approx(-1.0)
        assert fit.r_squared == pytest.approx(1.0)

    def test_constant_accuracies(self):
        fit = layer_trend([0.8, 0.8, 0.8, 0.8])
        assert fit.slope == 0.0
        assert fit.r_squared == 1.0

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            layer_trend([0.5])

    def test_normalized_depth_scale(self):
        # 13 layers dropping from 0.9 to 0.6: slope per unit depth = -0.3.
        values = np.linspace(0.9, 0.6, 13)
        fit = layer_trend(values)
        assert fit.slope == pytest.approx(-0.3)

    @given(
        shift=st.floats(min_value=-0.3, max_value=0.3),
        seed=st.integers(0, 100),
    )
    @settings(max_examples=20, deadline=None)
    def test_slope_invariant_under_constant_shift(self, shift, seed):
        rng = np.random.default_rng(seed)
        accs = rng.uniform(0.31, 0.69, size=8)
        base = layer_trend(accs)
        shifted = layer_trend(accs + shift)
        assert shifted.slope == pytest.approx(base.slope, abs=1e-10)
        assert shifted.r_squared == pytest.approx(base.r_squared, abs=1e-8)

    def test_r_squared_invariant_under_affine_rescale(self):
        accs = np.array([0.9, 0.7, 0.75, 0.5, 0.45])
        base = layer_trend(accs)
        rescaled = layer_trend(0.5 * accs + 0.2)
        assert rescaled.r_squared == pytest.approx(base.r_squared)
        assert rescaled.slope == pytest.approx(0.5 * base.slope)


class TestGroupBreakdown:
    def test_single_layer_reduces_to_group_accuracy(self):
        pred = [[0, 1, 0, 1]]
        gold = [0, 1, 1, 1]
        groups = ["x", "x", "y", "y"]
        out = group_breakdown(pred, gold, groups)
        assert out == {"x": 1.0, "y": 0.5}

    def test_average_over_layers(self):
        # One example, correct at 3 of 12 layers -> 0.25.
        preds = [[0]] * 3 + [[1]] * 9
        out = group_breakdown(preds, [0], ["only"])
        assert out["only"] == pytest.approx(0.25)

    def test_weighted_recovery_of_overall_accuracy(self):
        rng = np.random.default_rng(0)
        gold = rng.integers(0, 3, size=40)
        groups = rng.choice(["n", "v", "a"], size=40)
        preds = [rng.integers(0, 3, size=40) for _ in range(4)]
        out = group_breakdown(preds, gold, groups)
        sizes = {g: np.sum(groups == g) for g in out}
        weighted = sum(out[g] * sizes[g] for g in out) / 40
        overall = np.mean([accuracy(p, gold) for p in preds])
        assert weighted == pytest.approx(overall)

    def test_empty_groups_rejected(self):
        with pytest.raises(ValueError):
            group_breakdown([[0]], [0], np.array(["g"])[:0].reshape(0))


class TestReportTypes:
    def test_layer_report_bounds(self):
        with pytest.raises(ValueError):
            LayerReport("m", "inflection", "linear", 0, 1.2, 0.5, 10)
        with pytest.raises(ValueError):
            TrendFit(slope=0.1, r_squared=1.5)

    def test_report_csv_round_trip(self, tmp_path):
        rows = [
            {"layer": 0, "accuracy": 0.91, "macro_f1": 0.8, "selectivity": 0.4, "gap": None},
            {"layer": 1, "accuracy": 0.93, "macro_f1": 0.82, "selectivity": 0.45, "gap": 0.01},
        ]
        path = tmp_path / "report.csv"
        write_report_csv(path, rows)
        got = read_csv_rows(path)
        assert got[0]["accuracy"] == "0.910000"
        assert got[0]["gap"] == ""
        assert got[1]["gap"] == "0.010000"

    def test_report_csv_byte_identical(self, tmp_path):
        rows = [{"layer": 0, "accuracy": 0.5, "macro_f1": 0.5, "selectivity": 0.0, "gap": 0.0}]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        write_report_csv(a, rows)
        write_report_csv(b, rows)
        assert a.read_bytes() == b.read_bytes()
