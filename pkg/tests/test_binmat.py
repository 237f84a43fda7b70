import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from binmf import BinaryMatrix, CsvFormat, density, load_csv, split_holdout, write_csv
from binmf.errors import DimensionError, ParseError

from conftest import mat


def cells_strategy(max_dim=6):
    return st.integers(1, max_dim).flatmap(
        lambda f: st.integers(1, max_dim).flatmap(
            lambda n: st.lists(
                st.lists(st.sampled_from([-1, 0, 1]), min_size=n, max_size=n),
                min_size=f, max_size=f)))


class TestLoadCsv:
    def test_basic_grid_with_missing(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("1,0\nNA,1")
        V = load_csv(p)
        assert (V.n_rows, V.n_cols) == (2, 2)
        assert V.observed.tolist() == [[0, 0], [0, 1], [1, 1]]
        assert V.cells[1, 0] == -1
        assert V.cells[0, 0] == 1 and V.cells[0, 1] == 0

    def test_single_cell(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("1")
        V = load_csv(p)
        assert (V.n_rows, V.n_cols) == (1, 1)
        assert V.n_observed == 1 and V.values[0] == 1

    def test_ragged_rows(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("1,0\n1")
        with pytest.raises(DimensionError):
            load_csv(p)

    def test_empty_file(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("")
        with pytest.raises(DimensionError):
            load_csv(p)

    def test_bad_token_reports_location(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("1,0\n0,2")
        with pytest.raises(ParseError) as exc:
            load_csv(p)
        assert exc.value.row == 2 and exc.value.col == 2

    def test_empty_token_is_missing(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("1,,0")
        V = load_csv(p)
        assert V.cells[0, 1] == -1

    def test_header_row_skipped(self, tmp_path):
        p = tmp_path / "v.csv"
        p.write_text("a,b\n1,0\n")
        V = load_csv(p, CsvFormat(header=True))
        assert (V.n_rows, V.n_cols) == (1, 2)

    @settings(max_examples=30, deadline=None)
    @given(cells_strategy())
    def test_round_trip(self, tmp_path_factory, grid):
        V = BinaryMatrix(np.array(grid, dtype=np.int8))
        p = tmp_path_factory.mktemp("rt") / "v.csv"
        write_csv(V, p)
        assert load_csv(p) == V


class TestBinaryMatrix:
    def test_observed_sorted_row_major_no_duplicates(self):
        V = mat("1,NA,0;NA,1,1")
        codes = V.rows * V.n_cols + V.cols
        assert np.all(np.diff(codes) > 0)
        assert set(map(tuple, V.observed.tolist())) == {(0, 0), (0, 2), (1, 1), (1, 2)}

    def test_counts(self):
        V = mat("1,NA,0;NA,1,1")
        assert V.row_obs.tolist() == [2, 2]
        assert V.col_obs.tolist() == [1, 1, 2]

    def test_cells_are_read_only(self):
        V = mat("1,0")
        with pytest.raises(ValueError):
            V.cells[0, 0] = 0

    def test_cell_index(self):
        V = mat("1,NA;0,1")
        assert V.cell_index(1, 1) == 2
        with pytest.raises(ValueError):
            V.cell_index(0, 1)

    def test_rejects_bad_states(self):
        with pytest.raises(ValueError):
            BinaryMatrix(np.array([[3]], dtype=np.int8))
        with pytest.raises(DimensionError):
            BinaryMatrix(np.zeros((0, 2), dtype=np.int8))


class TestSplitHoldout:
    def test_counts_10x10(self):
        V = BinaryMatrix(np.ones((10, 10), dtype=np.int8))
        split = split_holdout(V, 0.25, seed=7)
        assert split.test.shape[0] == 25
        assert split.train.n_observed == 75

    def test_deterministic(self):
        V = BinaryMatrix(np.ones((10, 10), dtype=np.int8))
        a = split_holdout(V, 0.25, seed=7)
        b = split_holdout(V, 0.25, seed=7)
        assert np.array_equal(a.test, b.test)
        assert a.train == b.train

    def test_too_few_cells(self):
        with pytest.raises(ValueError):
            split_holdout(mat("1"), 0.5, seed=0)

    @pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
    def test_fraction_domain(self, fraction):
        V = BinaryMatrix(np.ones((3, 3), dtype=np.int8))
        with pytest.raises(ValueError):
            split_holdout(V, fraction, seed=0)

    @settings(max_examples=30, deadline=None)
    @given(cells_strategy(), st.integers(0, 2**31), st.floats(0.05, 0.95))
    def test_partition_and_restore(self, grid, seed, fraction):
        V = BinaryMatrix(np.array(grid, dtype=np.int8))
        if V.n_observed < 2:
            return
        split = split_holdout(V, fraction, seed)
        test_cells = {(int(f), int(n)) for f, n, _ in split.test}
        train_cells = set(map(tuple, split.train.observed.tolist()))
        assert not test_cells & train_cells
        assert test_cells | train_cells == set(map(tuple, V.observed.tolist()))
        assert split.restore() == V


class TestDensity:
    def test_half(self):
        assert density(mat("1,0;0,1")) == 0.5

    def test_all_ones(self):
        assert density(BinaryMatrix(np.ones((3, 3), dtype=np.int8))) == 1.0

    def test_missing_excluded(self):
        assert density(mat("1,NA;NA,0")) == 0.5

    def test_no_observed_cells_error(self):
        V = mat("1,1").with_cells_missing([0, 0], [0, 1])
        with pytest.raises(ValueError):
            density(V)

    @settings(max_examples=25, deadline=None)
    @given(cells_strategy(), st.randoms(use_true_random=False))
    def test_permutation_invariant(self, grid, pyrandom):
        V = BinaryMatrix(np.array(grid, dtype=np.int8))
        if V.n_observed == 0:
            return
        rows = list(range(V.n_rows))
        cols = list(range(V.n_cols))
        pyrandom.shuffle(rows)
        pyrandom.shuffle(cols)
        permuted = BinaryMatrix(V.cells[np.ix_(rows, cols)])
        assert density(permuted) == density(V)
