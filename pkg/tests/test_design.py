"""
Tests for datasets, designs, RIP estimation, screening and CSV ingestion
"""
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from design.csv_io import load_csv, load_vector, save_csv
from design.dataset import (
    CovarianceSpec,
    Dataset,
    GroundTruth,
    attach_response,
    fixed_signal,
    generate_design,
    is_normalized,
    normalize_columns,
    denormalize_columns,
    split_rows,
    to_original_scale,
)
from design.rip import estimate_rip, isometry_defect
from design.screening import screen_by_correlation
from utils.errors import (
    ConfigurationError,
    DegenerateInputError,
    DimensionMismatchError,
    LengthMismatchError,
    NonNumericCellError,
    RaggedRowError,
)


class TestDataset:
    def test_rejects_one_dimensional_design(self):
        with pytest.raises(DimensionMismatchError):
            Dataset(X=np.ones(3))

    def test_rejects_response_of_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            Dataset(X=np.ones((3, 2)), y=np.ones(4))

    def test_rejects_non_finite_entries(self):
        X = np.ones((2, 2))
        X[0, 1] = np.nan
        with pytest.raises(DegenerateInputError):
            Dataset(X=X)

    def test_arrays_are_read_only_copies(self):
        X = np.ones((2, 2))
        ds = Dataset(X=X, y=np.zeros(2))
        X[0, 0] = 5.0
        assert ds.X[0, 0] == 1.0
        assert not ds.X.flags.writeable
        assert not ds.y.flags.writeable

    def test_require_response(self):
        with pytest.raises(DegenerateInputError):
            Dataset(X=np.ones((2, 2))).require_response()

    def test_row_and_column_subsets(self):
        ds = Dataset(X=np.arange(12.0).reshape(4, 3), y=np.arange(4.0))
        rows = ds.rows([1, 3])
        assert rows.n == 2 and np.array_equal(rows.y, [1.0, 3.0])
        cols = ds.columns([2, 0])
        assert cols.p == 2 and np.array_equal(cols.X[:, 0], ds.X[:, 2])
        with pytest.raises(DegenerateInputError):
            ds.rows([])


class TestCovariance:
    @pytest.mark.parametrize("kind, rho", [("identity", 1.0), ("toeplitz", -0.1), ("banded", 0.2)])
    def test_invalid_specs(self, kind, rho):
        with pytest.raises(ConfigurationError):
            CovarianceSpec(kind=kind, p=3, rho=rho)

    def test_toeplitz_matrix(self):
        cov = CovarianceSpec(kind="toeplitz", p=4, rho=0.5).matrix()
        assert cov[0, 2] == pytest.approx(0.25)
        assert np.allclose(np.diag(cov), 1.0)

    @pytest.mark.parametrize("kind, rho", [("toeplitz", 0.5), ("equicorrelated", 0.5)])
    def test_empirical_covariance(self, kind, rho):
        ds = generate_design(20000, CovarianceSpec(kind=kind, p=3, rho=rho), seed=1)
        empirical = np.cov(ds.X, rowvar=False)
        assert np.allclose(empirical, CovarianceSpec(kind=kind, p=3, rho=rho).matrix(), atol=0.05)

    def test_generation_is_seeded(self):
        spec = CovarianceSpec(kind="identity", p=5)
        assert np.array_equal(generate_design(10, spec, 4).X, generate_design(10, spec, 4).X)
        assert not np.array_equal(generate_design(10, spec, 4).X, generate_design(10, spec, 5).X)


class TestGroundTruth:
    def test_weak_and_strong_classification(self):
        beta = fixed_signal(100, [0.1, 3.0])
        truth = GroundTruth.from_beta(beta, sigma=1.0, n=100)
        assert truth.weak_support == (0,)
        assert truth.strong_support == (1,)
        assert truth.m == 3.0
        assert truth.kappa == 1.0

    def test_noiseless_support_is_all_strong(self):
        truth = GroundTruth.from_beta(fixed_signal(10, [-1.0, 2.0, 2.0, 3.0]), sigma=0.0, n=20)
        assert truth.strong_support == (0, 1, 2, 3)
        assert truth.m == 1.0 and truth.kappa == 3.0

    def test_overlapping_supports_rejected(self):
        with pytest.raises(ConfigurationError):
            GroundTruth(beta_star=np.array([1.0, 0.0]), sigma=0.0, strong_support=(0,), weak_support=(0,))

    def test_partition_must_cover_support(self):
        with pytest.raises(ConfigurationError):
            GroundTruth(beta_star=np.array([1.0, 2.0]), sigma=0.0, strong_support=(0,))

    def test_noiseless_response(self):
        truth = GroundTruth.from_beta(fixed_signal(6, [1.0, -2.0]), 0.0, 8)
        ds = attach_response(generate_design(8, CovarianceSpec(kind="identity", p=6), 0), truth, 1)
        assert np.array_equal(ds.y, ds.X @ truth.beta_star)

    def test_signal_positions_checked(self):
        with pytest.raises(ConfigurationError):
            fixed_signal(3, [1.0], positions=[3])


class TestNormalization:
    def test_columns_have_norm_sqrt_n(self):
        ds = generate_design(30, CovarianceSpec(kind="identity", p=4), 2)
        normalized = normalize_columns(ds)
        assert is_normalized(normalized)
        assert np.allclose(denormalize_columns(normalized).X, ds.X)

    def test_zero_column_reports_index(self):
        X = np.ones((4, 3))
        X[:, 1] = 0.0
        with pytest.raises(DegenerateInputError) as info:
            normalize_columns(Dataset(X=X))
        assert info.value.index == 1

    def test_original_scale_keeps_predictions(self):
        truth = GroundTruth.from_beta(fixed_signal(5, [1.0, 2.0]), 0.0, 20)
        raw = attach_response(generate_design(20, CovarianceSpec(kind="identity", p=5), 7), truth, 8)
        normalized = normalize_columns(raw)
        beta_normalized = np.array([0.3, -1.0, 0.0, 2.0, 0.5])
        beta_raw = to_original_scale(beta_normalized, normalized)
        assert np.allclose(normalized.X @ beta_normalized, raw.X @ beta_raw)

    @given(st.lists(st.floats(min_value=0.5, max_value=10.0), min_size=3, max_size=3),
           st.integers(min_value=0, max_value=1000))
    def test_normalization_is_idempotent(self, scales, seed):
        ds = generate_design(6, CovarianceSpec(kind="identity", p=3), seed)
        scaled = Dataset(X=ds.X * np.array(scales))
        once = normalize_columns(scaled)
        assert normalize_columns(once) is once
        assert np.allclose(normalize_columns(Dataset(X=once.X)).X, once.X)

    def test_split_rows(self):
        ds = Dataset(X=np.arange(18.0).reshape(9, 2))
        parts = split_rows(ds, [1 / 3, 1 / 3, 1 / 3])
        assert [part.n for part in parts] == [3, 3, 3]
        assert np.array_equal(parts[1].X[0], ds.X[3])
        with pytest.raises(ConfigurationError):
            split_rows(ds, [0.5, 0.2])


class TestRip:
    def test_orthonormal_design_has_zero_constant(self):
        ds = Dataset(X=2.0 * np.eye(4))
        estimate = estimate_rip(ds, 2, budget=100)
        assert estimate.exact
        assert estimate.delta_lower == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("s", [1, 2, 3])
    def test_exhaustive_matches_brute_force(self, seed, s):
        rng = np.random.default_rng(seed)
        ds = Dataset(X=rng.standard_normal((12, 8)))
        brute = 0.0
        for support in combinations(range(8), s):
            columns = ds.X[:, list(support)]
            eigenvalues = np.linalg.eigvalsh(columns.T @ columns / 12 - np.eye(s))
            brute = max(brute, float(np.max(np.abs(eigenvalues))))
        estimate = estimate_rip(ds, s, budget=10 ** 6)
        assert estimate.exact
        assert estimate.delta_lower == pytest.approx(min(brute, 1.0))

    def test_sampled_estimate_is_a_lower_bound(self):
        ds = Dataset(X=np.random.default_rng(0).standard_normal((15, 10)))
        sampled = estimate_rip(ds, 3, budget=20, seed=1)
        exact = estimate_rip(ds, 3, budget=10 ** 6)
        assert not sampled.exact and sampled.supports_tested == 20
        assert sampled.delta_lower <= exact.delta_lower + 1e-12
        assert isometry_defect(ds, sampled.worst_support) == pytest.approx(sampled.delta_lower) or sampled.delta_lower == 1.0

    def test_invalid_sparsity(self):
        with pytest.raises(ConfigurationError):
            estimate_rip(Dataset(X=np.eye(3)), 4, budget=10)


class TestScreening:
    def test_keeps_the_correlated_columns_in_index_order(self):
        rng = np.random.default_rng(0)
        y = rng.standard_normal(40)
        X = rng.standard_normal((40, 6)) * 0.01
        X[:, 4] = y
        X[:, 1] = y + 0.1 * rng.standard_normal(40)
        reduced, index_map = screen_by_correlation(Dataset(X=X, y=y), 2)
        assert list(index_map) == [1, 4]
        assert np.array_equal(reduced.X[:, 1], X[:, 4])

    def test_ties_go_to_the_lower_index(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal(20)
        X = rng.standard_normal((20, 4)) * 0.01
        X[:, 3] = y
        X[:, 2] = y
        _, index_map = screen_by_correlation(Dataset(X=X, y=y), 1)
        assert list(index_map) == [2]

    def test_constant_columns_rank_last(self):
        y = np.array([1.0, 2.0, 3.0, 5.0])
        X = np.column_stack([np.ones(4), np.array([0.1, -0.3, 0.2, 0.0])])
        _, index_map = screen_by_correlation(Dataset(X=X, y=y), 1)
        assert list(index_map) == [1]

    @pytest.mark.parametrize("keep", [0, 5])
    def test_keep_out_of_range(self, keep):
        with pytest.raises(ConfigurationError):
            screen_by_correlation(Dataset(X=np.eye(4), y=np.ones(4)), keep)


class TestCsv:
    def test_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        ds = Dataset(X=rng.standard_normal((5, 3)), y=rng.standard_normal(5))
        save_csv(ds, str(tmp_path / "X.csv"), str(tmp_path / "y.csv"))
        loaded = load_csv(str(tmp_path / "X.csv"), str(tmp_path / "y.csv"))
        assert np.array_equal(loaded.X, ds.X)
        assert np.array_equal(loaded.y, ds.y)

    def test_header_names(self, tmp_path):
        ds = Dataset(X=np.eye(2), y=np.ones(2))
        save_csv(ds, str(tmp_path / "X.csv"), str(tmp_path / "y.csv"), header=True)
        loaded = load_csv(str(tmp_path / "X.csv"), str(tmp_path / "y.csv"), header=True)
        assert loaded.names == ("x1", "x2")

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "X.csv"
        path.write_text("1,2,3\n4,5\n")
        with pytest.raises(RaggedRowError) as info:
            load_csv(str(path))
        assert info.value.row == 2
        assert (info.value.expected, info.value.found) == (3, 2)

    def test_non_numeric_cell(self, tmp_path):
        path = tmp_path / "X.csv"
        path.write_text("1,2\n3,abc\n")
        with pytest.raises(NonNumericCellError) as info:
            load_csv(str(path))
        assert (info.value.row, info.value.column, info.value.cell) == (2, 2, "abc")

    def test_length_mismatch(self, tmp_path):
        (tmp_path / "X.csv").write_text("1,2\n3,4\n")
        (tmp_path / "y.csv").write_text("1\n2\n3\n")
        with pytest.raises(LengthMismatchError):
            load_csv(str(tmp_path / "X.csv"), str(tmp_path / "y.csv"))

    def test_vector_accepts_single_row(self, tmp_path):
        path = tmp_path / "w.csv"
        path.write_text("1,2,3\n")
        assert np.array_equal(load_vector(str(path)), [1.0, 2.0, 3.0])
