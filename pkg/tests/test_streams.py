import numpy as np
import pytest

from fesl.core import FormatError, InvalidInputError, Phase, StreamSchedule, Task
from fesl.streams import (
    Source,
    apply_feature_map,
    build_cycle,
    default_overlap,
    default_schedule,
    derived_seed,
    gaussian_map,
    generate_teacher_dataset,
    generated_stream,
    load_batch,
    read_stream,
    synthesize_second_space,
    synthesize_stream,
    two_view_stream,
    write_stream,
)


class TestLoadBatch:
    def test_csv_direct_parse(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,+1\n3,4,-1\n")
        X, y, spec = load_batch(p, "csv")
        np.testing.assert_array_equal(X, [[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(y, [1.0, -1.0])
        assert spec.n == 2 and spec.d1 == 2

    def test_csv_ragged_row(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,1\n3,1\n")
        with pytest.raises(FormatError, match=":2"):
            load_batch(p, "csv")

    def test_csv_bad_number_reports_line(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,1\n3,x,1\n")
        with pytest.raises(FormatError, match=":2"):
            load_batch(p, "csv")

    def test_empty_file(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("")
        with pytest.raises(FormatError):
            load_batch(p, "csv")
        p2 = tmp_path / "d.svm"
        p2.write_text("\n")
        with pytest.raises(FormatError):
            load_batch(p2, "svm")

    def test_sparse_densification(self, tmp_path):
        p = tmp_path / "d.svm"
        p.write_text("1 3:0.5 7:1.0\n-1 1:2.0\n")
        X, y, _ = load_batch(p, "svm", dim=8)
        expected = np.zeros((2, 8))
        expected[0, 2] = 0.5
        expected[0, 6] = 1.0
        expected[1, 0] = 2.0
        np.testing.assert_array_equal(X, expected)
        np.testing.assert_array_equal(y, [1.0, -1.0])

    def test_sparse_dim_from_largest_index(self, tmp_path):
        p = tmp_path / "d.svm"
        p.write_text("1 2:1.0\n-1 5:3.0\n")
        X, _, _ = load_batch(p, "svm")
        assert X.shape == (2, 5)

    def test_sparse_rejects_zero_based_indices(self, tmp_path):
        p = tmp_path / "d.svm"
        p.write_text("1 0:1.0\n")
        with pytest.raises(FormatError, match=":1"):
            load_batch(p, "svm")

    @pytest.mark.parametrize("raw,expected", [
        ("0", -1.0), ("1", 1.0),
    ])
    def test_zero_one_labels_remap(self, tmp_path, raw, expected):
        p = tmp_path / "d.csv"
        p.write_text(f"1,2,{raw}\n3,4,{'1' if raw == '0' else '0'}\n")
        _, y, _ = load_batch(p, "csv")
        assert y[0] == expected

    def test_one_two_labels_remap(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,1\n3,4,2\n")
        _, y, _ = load_batch(p, "csv")
        np.testing.assert_array_equal(y, [-1.0, 1.0])

    def test_unmappable_labels(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,3\n3,4,9\n")
        with pytest.raises(FormatError):
            load_batch(p, "csv")

    def test_regression_labels_kept(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("1,2,0.37\n3,4,-1.2\n")
        _, y, _ = load_batch(p, "csv", task=Task.REGRESSION)
        np.testing.assert_array_equal(y, [0.37, -1.2])


class TestSynthesis:
    def test_same_seed_same_output(self):
        X = np.random.default_rng(0).normal(size=(5, 3))
        a = synthesize_second_space(X, 4, seed=9)
        b = synthesize_second_space(X, 4, seed=9)
        np.testing.assert_array_equal(a, b)
        c = synthesize_second_space(X, 4, seed=10)
        assert not np.array_equal(a, c)

    def test_zero_row_stays_zero(self):
        X = np.zeros((2, 3))
        X[1] = [1.0, 2.0, 3.0]
        out = synthesize_second_space(X, 5, seed=1)
        np.testing.assert_array_equal(out[0], np.zeros(5))

    def test_identity_map_hook(self):
        X = np.random.default_rng(1).normal(size=(4, 3))
        np.testing.assert_array_equal(apply_feature_map(X, np.eye(3)), X)

    def test_linearity_in_the_input(self):
        X = np.random.default_rng(2).normal(size=(4, 3))
        a = synthesize_second_space(2.5 * X, 6, seed=3)
        b = 2.5 * synthesize_second_space(X, 6, seed=3)
        np.testing.assert_allclose(a, b, atol=1e-12)

    def test_gaussian_map_shape(self):
        G = gaussian_map(3, 7, seed=0)
        assert G.shape == (3, 7)


class TestBuildCycle:
    def small_inputs(self, n=7, d1=2, d2=3, seed=0):
        rng = np.random.default_rng(seed)
        X1 = rng.normal(size=(n, d1))
        X2 = rng.normal(size=(n, d2))
        y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
        return X1, X2, y

    def test_phase_pattern(self):
        X1, X2, y = self.small_inputs()
        sched = StreamSchedule(t1=4, t2=3, b=2, d1=2, d2=3)
        stream = build_cycle(X1, X2, y, sched, seed=5)
        got = [inst.phase for inst in stream.instances]
        O, V, N = Phase.OLD_ONLY, Phase.OVERLAP, Phase.NEW_ONLY
        assert got == [O, O, V, V, N, N, N]

    def test_single_old_round_boundary(self):
        X1, X2, y = self.small_inputs()
        sched = StreamSchedule(t1=4, t2=3, b=3, d1=2, d2=3)
        stream = build_cycle(X1, X2, y, sched, seed=5)
        assert [i.phase for i in stream.instances].count(Phase.OLD_ONLY) == 1

    def test_same_seed_same_order(self):
        X1, X2, y = self.small_inputs()
        sched = StreamSchedule(t1=4, t2=3, b=2, d1=2, d2=3)
        a = build_cycle(X1, X2, y, sched, seed=11)
        b = build_cycle(X1, X2, y, sched, seed=11)
        for ia, ib in zip(a.instances, b.instances):
            assert ia.label == ib.label
            if ia.x_old is not None:
                np.testing.assert_array_equal(ia.x_old, ib.x_old)

    def test_phase_counts_over_random_schedules(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            t1 = int(rng.integers(2, 12))
            t2 = int(rng.integers(3, 12))
            b = int(rng.integers(1, t1))
            X1, X2, y = self.small_inputs(n=t1 + t2, seed=int(rng.integers(1000)))
            stream = build_cycle(X1, X2, y,
                                 StreamSchedule(t1=t1, t2=t2, b=b, d1=2, d2=3),
                                 seed=int(rng.integers(1000)))
            phases = [i.phase for i in stream.instances]
            assert phases.count(Phase.OLD_ONLY) == t1 - b
            assert phases.count(Phase.OVERLAP) == b
            assert phases.count(Phase.NEW_ONLY) == t2

    def test_overlap_rows_are_consistent_pairs(self):
        # with an identity second space the two views must coincide
        rng = np.random.default_rng(7)
        X1 = rng.normal(size=(8, 3))
        sched = StreamSchedule(t1=5, t2=3, b=2, d1=3, d2=3)
        stream = build_cycle(X1, X1.copy(), np.ones(8), sched, seed=2)
        for inst in stream.instances:
            if inst.phase is Phase.OVERLAP:
                np.testing.assert_array_equal(inst.x_old, inst.x_new)

    def test_insufficient_rows(self):
        X1, X2, y = self.small_inputs(n=5)
        sched = StreamSchedule(t1=4, t2=3, b=2, d1=2, d2=3)
        with pytest.raises(InvalidInputError):
            build_cycle(X1, X2, y, sched, seed=0)


class TestDefaults:
    def test_overlap_defaults(self):
        assert default_overlap(800, Source.SYNTHETIC_GAUSSIAN) == 5
        assert default_overlap(1001, Source.SYNTHETIC_GAUSSIAN) == 10
        assert default_overlap(20_000, Source.TWO_VIEW) == 50

    def test_schedule_splits_in_half(self):
        sched = default_schedule(690, 42, 29)
        assert sched.t1 == 345 and sched.t2 == 345 and sched.b == 5

    def test_derived_seeds_differ_by_label(self):
        assert derived_seed(3, "map") != derived_seed(3, "shuffle")
        assert derived_seed(3, "map") == derived_seed(3, "map")


class TestStreamBuilders:
    def test_generated_stream_is_reproducible(self):
        a = generated_stream(40, 4, 3, seed=5)
        b = generated_stream(40, 4, 3, seed=5)
        np.testing.assert_array_equal(a.new_matrix(), b.new_matrix())
        assert a.seed == 5

    def test_teacher_labels_follow_the_teacher(self):
        X, y, spec = generate_teacher_dataset(300, 6, seed=11)
        assert set(np.unique(y)) <= {-1.0, 1.0}
        assert spec.task is Task.CLASSIFICATION
        # labels must be linearly realizable: some direction fits them all
        scores = X @ np.linalg.lstsq(X, y, rcond=None)[0]
        assert np.mean(np.sign(scores) == y) > 0.9

    def test_synthesize_stream_uses_independent_subseeds(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(30, 4))
        y = np.where(rng.random(30) < 0.5, 1.0, -1.0)
        stream = synthesize_stream(X, y, Task.CLASSIFICATION, 3, seed=4)
        # the Gaussian map must not be a copy of leading feature draws
        assert stream.schedule.d2 == 3
        assert stream.seed == 4

    def test_two_view_stream(self):
        rng = np.random.default_rng(2)
        X1 = rng.normal(size=(120, 4))
        X2 = rng.normal(size=(120, 6))
        y = np.where(rng.random(120) < 0.5, 1.0, -1.0)
        stream = two_view_stream(X1, X2, y, Task.CLASSIFICATION, seed=8, b=7)
        assert stream.schedule.b == 7
        assert stream.schedule.d1 == 4 and stream.schedule.d2 == 6


class TestStreamFiles:
    def test_roundtrip_bytes_and_values(self, tmp_path):
        stream = generated_stream(24, 3, 2, seed=13, name="tiny")
        p1 = tmp_path / "s1.txt"
        p2 = tmp_path / "s2.txt"
        write_stream(stream, p1)
        loaded = read_stream(p1)
        write_stream(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert loaded.name == "tiny" and loaded.seed == 13
        np.testing.assert_array_equal(loaded.new_matrix(), stream.new_matrix())
        np.testing.assert_array_equal(loaded.old_matrix(), stream.old_matrix())
        np.testing.assert_array_equal(loaded.labels_new_phase(),
                                      stream.labels_new_phase())

    def test_rejects_non_stream_file(self, tmp_path):
        p = tmp_path / "x.txt"
        p.write_text("hello\n")
        with pytest.raises(FormatError):
            read_stream(p)
