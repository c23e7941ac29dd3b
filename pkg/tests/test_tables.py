"""Table construction, ingestion, pair summaries, and enumeration."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simadjust.errors import DomainError, InputError, ResourceError
from simadjust.tables import (
    TableSet,
    count_fixed_margins,
    domain_size,
    enumerate_domain,
    enumerate_fixed_margins,
    enumerate_restricted_domain,
    pair_table,
    read_labels_csv,
    read_table_csv,
    table_from_counts,
    table_from_labels,
    toy_table,
)

from oracles import all_tables_oracle, fixed_margin_tables_oracle, pair_counts_oracle


# ---------------------------------------------------------------------------
# construction and validation

def test_margins_and_total():
    t = table_from_counts([[1, 2], [3, 4]])
    assert t.row_margins == (3, 7)
    assert t.col_margins == (4, 6)
    assert t.total == 10
    assert t.shape == (2, 2)
    assert t.is_square()
    assert t.cells() == (1, 2, 3, 4)


def test_rejects_ragged_rows():
    with pytest.raises(InputError, match="row 2"):
        table_from_counts([[1, 2], [3]])


def test_rejects_negative_and_non_integer_cells():
    with pytest.raises(InputError, match=r"\(2,1\) is negative"):
        table_from_counts([[1, 2], [-1, 3]])
    with pytest.raises(InputError, match="not an integer"):
        table_from_counts([[1, 2], [1.5, 3]])
    with pytest.raises(InputError, match="not an integer"):
        table_from_counts([[True, 2], [1, 3]])


def test_rejects_empty_and_zero_tables():
    with pytest.raises(InputError):
        table_from_counts([])
    with pytest.raises(InputError, match="total"):
        table_from_counts([[0, 0], [0, 0]])


def test_tables_are_hashable_and_comparable():
    a = table_from_counts([[1, 0], [0, 1]])
    b = table_from_counts([[1, 0], [0, 1]])
    assert a == b
    assert len({a, b}) == 1


def test_from_labels_first_appearance_order():
    t = table_from_labels(["b", "a", "b"], ["x", "y", "x"])
    # "b" seen first -> row 0
    assert t.counts == ((2, 0), (0, 1))
    assert t.labels_x == ("b", "a")
    assert t.labels_y == ("x", "y")


def test_from_labels_padding_and_errors():
    t = table_from_labels([0, 0], [1, 1], n_rows=3, n_cols=2)
    assert t.shape == (3, 2)
    assert t.row_margins == (2, 0, 0)
    with pytest.raises(InputError, match="differ in length"):
        table_from_labels([1], [1, 2])
    with pytest.raises(InputError, match="smaller"):
        table_from_labels([1, 2], [1, 1], n_rows=1)


def test_toy_table():
    t = toy_table(2, 5)
    assert t.counts == ((2,), (3,))
    assert t.row_margins == (2, 3)
    assert t.col_margins == (5,)
    with pytest.raises(InputError):
        toy_table(6, 5)
    with pytest.raises(InputError):
        toy_table(-1, 5)


# ---------------------------------------------------------------------------
# pair summaries

def test_pair_table_known_values():
    diag = pair_table(table_from_counts([[2, 0], [0, 2]]))
    assert (diag.same_same, diag.same_diff, diag.diff_same, diag.diff_diff) == (2, 0, 0, 4)
    mixed = pair_table(table_from_counts([[1, 1], [1, 1]]))
    assert (mixed.same_same, mixed.same_diff, mixed.diff_same, mixed.diff_diff) == (0, 2, 2, 2)


def test_pair_table_needs_two_observations():
    with pytest.raises(DomainError):
        pair_table(table_from_counts([[1]]))


@settings(max_examples=60, deadline=None)
@given(
    st.lists(
        st.lists(st.integers(min_value=0, max_value=3), min_size=2, max_size=3),
        min_size=2,
        max_size=3,
    ).filter(
        lambda rows: len({len(r) for r in rows}) == 1
        and sum(sum(r) for r in rows) >= 2
    )
)
def test_pair_table_matches_pair_enumeration(rows):
    t = table_from_counts(rows)
    got = pair_table(t)
    assert (
        got.same_same,
        got.same_diff,
        got.diff_same,
        got.diff_diff,
    ) == pair_counts_oracle(t)
    assert got.total_pairs == t.total * (t.total - 1) // 2


# ---------------------------------------------------------------------------
# enumeration

@pytest.mark.parametrize("total,rows,cols", [(3, 2, 2), (4, 2, 2), (2, 3, 2), (5, 2, 1)])
def test_enumerate_domain_matches_product_oracle(total, rows, cols):
    ours = {t.counts for t in enumerate_domain(total, rows, cols)}
    oracle = {t.counts for t in all_tables_oracle(total, rows, cols)}
    assert ours == oracle
    assert len(ours) == domain_size(total, rows, cols)


@pytest.mark.parametrize(
    "u,v",
    [((2, 2), (2, 2)), ((2, 2), (1, 3)), ((3, 1, 2), (2, 2, 2)), ((4,), (1, 3))],
)
def test_enumerate_fixed_margins_matches_filter_oracle(u, v):
    ours = [t.counts for t in enumerate_fixed_margins(u, v)]
    oracle = {t.counts for t in fixed_margin_tables_oracle(u, v)}
    assert set(ours) == oracle
    assert len(ours) == len(oracle)  # no duplicates
    assert count_fixed_margins(u, v) == len(oracle)


def test_enumerate_fixed_margins_rejects_mismatched_totals():
    with pytest.raises(InputError, match="disagree"):
        enumerate_fixed_margins((2, 1), (1, 1))


def test_restricted_domain_zeroes_disallowed_cells():
    tables = list(enumerate_restricted_domain(3, 2, 2, [(0, 0), (1, 1)]))
    assert len(tables) == 4
    for t in tables:
        assert t.counts[0][1] == 0 and t.counts[1][0] == 0


def test_enumeration_budget_raises_resource_error():
    with pytest.raises(ResourceError, match="budget"):
        enumerate_domain(100, 3, 3, budget=1000)
    # unknown-count sets are only caught during iteration
    lazy = TableSet(
        lambda: iter(all_tables_oracle(6, 2, 2)), None, "lazy", budget=5
    )
    with pytest.raises(ResourceError, match="budget"):
        list(lazy)


def test_enumeration_is_deterministic_and_restartable():
    ts = enumerate_domain(3, 2, 2)
    first = [t.counts for t in ts]
    second = [t.counts for t in ts]
    assert first == second


# ---------------------------------------------------------------------------
# CSV ingestion

def test_read_table_csv(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("1,2\n3,4\n")
    t = read_table_csv(str(p))
    assert t.counts == ((1, 2), (3, 4))


def test_read_table_csv_header_and_errors(tmp_path):
    p = tmp_path / "t.csv"
    p.write_text("a,b\n1,2\n3,4\n")
    assert read_table_csv(str(p), header=True).counts == ((1, 2), (3, 4))
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    with pytest.raises(InputError, match="ragged"):
        read_table_csv(str(bad))
    frac = tmp_path / "frac.csv"
    frac.write_text("1,2\n3,4.5\n")
    with pytest.raises(InputError, match=r"\(2,2\)"):
        read_table_csv(str(frac))
    with pytest.raises(InputError, match="cannot read"):
        read_table_csv(str(tmp_path / "missing.csv"))


def test_read_labels_csv(tmp_path):
    p = tmp_path / "l.csv"
    p.write_text("x,y\na,a\na,b\nb,a\nb,b\n")
    t = read_labels_csv(str(p), header=True)
    assert t.counts == ((1, 1), (1, 1))
    with_header_row = read_labels_csv(str(p))
    assert with_header_row.total == 5
    wide = tmp_path / "w.csv"
    wide.write_text("a,b,c\n")
    with pytest.raises(InputError, match="expected 2"):
        read_labels_csv(str(wide))


@settings(max_examples=40, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=12
    )
)
def test_margins_always_consistent(pairs):
    x = [a for a, _ in pairs]
    y = [b for _, b in pairs]
    t = table_from_labels(x, y)
    assert sum(t.row_margins) == t.total == sum(t.col_margins)
    assert t.total == len(pairs)
