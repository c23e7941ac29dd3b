"""Adjustment pipeline: max specs, degeneracy, iterated adjustment, measures."""

from fractions import Fraction

import pytest

from simadjust.adjust import (
    MEASURE_IDS,
    MaxSpec,
    adjust,
    adjusted_index,
    named_measure,
    resolve_max,
)
from simadjust.errors import CapabilityError, InputError, ShapeError
from simadjust.indices import get_index
from simadjust.nullmodels import IND2, PERM, MonteCarloConfig, expectation, get_model
from simadjust.tables import table_from_counts, toy_table

from oracles import domain_max_oracle


def F(a, b=1):
    return Fraction(a, b)


# ---------------------------------------------------------------------------
# MaxSpec parsing

@pytest.mark.parametrize(
    "text,kind",
    [
        ("domain", "domain_max"),
        ("model", "model_max"),
        ("pair_mean", "pair_mean"),
        ("pair-min", "pair_min"),
        ("standardize", "standardize"),
    ],
)
def test_parse_keywords(text, kind):
    assert MaxSpec.parse(text).kind == kind


def test_parse_fixed_forms():
    assert MaxSpec.parse("fixed(3/4)").value == F(3, 4)
    assert MaxSpec.parse("fixed:3/4").value == F(3, 4)
    assert MaxSpec.parse("fixed(4)").value == 4
    assert MaxSpec.parse("fixed(-0.5)").value == F(-1, 2)


def test_parse_rejects_garbage():
    for bad in ("", "maximum", "fixed()", "fixed(x)", "fixed"):
        with pytest.raises(InputError):
            MaxSpec.parse(bad)


def test_describe_round_trips():
    for text in ("domain", "model", "pair_mean", "pair-min", "standardize", "fixed(3/4)"):
        spec = MaxSpec.parse(text)
        assert MaxSpec.parse(spec.describe()).kind == spec.kind


# ---------------------------------------------------------------------------
# domain max registry vs brute force

@pytest.mark.parametrize("index_id", ["p", "q_joint", "q_row", "q_col", "rand"])
@pytest.mark.parametrize("total", [2, 3, 4, 5])
def test_domain_max_registry_vs_brute_force(index_id, total):
    index = get_index(index_id)
    t = table_from_counts([[total - 1, 0], [1, 0]])
    got, tag = resolve_max(
        MaxSpec.domain_max(), index, PERM, t, exact=True
    )
    assert tag == "closed_form"
    assert got == domain_max_oracle(index, total, 2, 2) == 1


@pytest.mark.parametrize("u1,n", [(1, 2), (2, 4), (3, 5)])
def test_toy_domain_max_registry_vs_brute_force(u1, n):
    t = toy_table(u1, n)
    got, _ = resolve_max(MaxSpec.domain_max(), get_index("toy_u1"), IND2, t, exact=True)
    assert got == domain_max_oracle(get_index("toy_u1"), n, 2, 1) == n
    got_sq, _ = resolve_max(
        MaxSpec.domain_max(), get_index("toy_u1_squared"), IND2, t, exact=True
    )
    assert got_sq == domain_max_oracle(get_index("toy_u1_squared"), n, 2, 1) == n * n


def test_domain_max_enumeration_agrees_with_registry():
    t = table_from_counts([[1, 1], [0, 2]])
    index = get_index("q_joint")
    by_registry, tag1 = resolve_max(MaxSpec.domain_max(), index, PERM, t, exact=True)
    by_enum, tag2 = resolve_max(
        MaxSpec.domain_max(), index, PERM, t, method="enumeration", exact=True
    )
    assert tag1 == "closed_form" and tag2 == "enumeration"
    assert by_registry == by_enum == 1


# ---------------------------------------------------------------------------
# other max kinds

def test_fixed_max_verbatim():
    t = toy_table(1, 2)
    value, tag = resolve_max(
        MaxSpec.fixed(F(4)), get_index("toy_u1_squared"), IND2, t, exact=True
    )
    assert (value, tag) == (4, "fixed")


def test_pair_maxima_values():
    t = table_from_counts([[1, 1], [1, 1]])
    # both margins (2,2): q_u = q_v = 1/3
    mean_v, tag = resolve_max(MaxSpec.pair_mean(), get_index("q_joint"), PERM, t, exact=True)
    assert (mean_v, tag) == (F(1, 3), "closed_form")
    skew = table_from_counts([[3, 0], [1, 1]])
    # rows (3,2): q_u = 4/10; cols (4,1): q_v = 6/10
    mean_v, _ = resolve_max(MaxSpec.pair_mean(), get_index("q_joint"), PERM, skew, exact=True)
    min_v, _ = resolve_max(MaxSpec.pair_min(), get_index("q_joint"), PERM, skew, exact=True)
    assert mean_v == F(1, 2)
    assert min_v == F(2, 5)


def test_model_max_by_enumeration():
    # largest p on the margin class of [[1,1],[0,2]] is 3/4
    t = table_from_counts([[1, 1], [0, 2]])
    value, tag = resolve_max(MaxSpec.model_max(), get_index("p"), PERM, t, exact=True)
    assert value == F(3, 4)
    assert tag == "enumeration"


def test_standardize_max_is_mean_plus_sd():
    t = table_from_counts([[2, 1], [1, 2]])
    index = get_index("q_joint")
    value, tag = resolve_max(MaxSpec.standardize(), index, PERM, t)
    from simadjust.nullmodels import variance

    e = expectation(PERM, t, index, method="enumeration")
    v = variance(PERM, t, index, method="enumeration")
    assert value == pytest.approx(e.value + v.value**0.5, abs=1e-15)
    assert tag.startswith("standardize(")


def test_standardize_has_no_exact_mode():
    t = table_from_counts([[2, 1], [1, 2]])
    with pytest.raises(CapabilityError, match="exact"):
        resolve_max(MaxSpec.standardize(), get_index("q_joint"), PERM, t, exact=True)


# ---------------------------------------------------------------------------
# adjust

def test_adjust_toy_square_fixed_max():
    r = adjust(
        get_index("toy_u1_squared"), IND2, MaxSpec.fixed(F(4)), toy_table(1, 2), exact=True
    )
    assert r.raw == 1
    assert r.expected.value == F(3, 2)
    assert r.max_value == 4
    assert r.adjusted == F(-1, 5)
    assert not r.degenerate
    assert isinstance(r.adjusted, Fraction)


def test_adjust_float_mode_matches_exact():
    exact = adjust(
        get_index("toy_u1_squared"), IND2, MaxSpec.fixed(F(4)), toy_table(1, 2), exact=True
    )
    inexact = adjust(
        get_index("toy_u1_squared"), IND2, MaxSpec.fixed(F(4)), toy_table(1, 2)
    )
    assert isinstance(inexact.adjusted, float)
    assert inexact.adjusted == pytest.approx(float(exact.adjusted), abs=1e-15)


def test_degenerate_returns_convention():
    # 1x1 table: the only table in every support, max == mean
    t = table_from_counts([[3]])
    r = adjust(get_index("p"), PERM, MaxSpec.domain_max(), t, exact=True)
    assert r.degenerate and r.adjusted == 0
    r_c = adjust(get_index("p"), PERM, MaxSpec.domain_max(), t, c=F(1, 2), exact=True)
    assert r_c.adjusted == F(1, 2)
    assert r_c.convention_c == F(1, 2)
    r_f = adjust(get_index("p"), PERM, MaxSpec.domain_max(), t, c=0.25)
    assert isinstance(r_f.adjusted, float) and r_f.adjusted == 0.25


def test_adjust_respects_shape_rules():
    wide = table_from_counts([[1, 2, 0], [0, 1, 1]])
    with pytest.raises(ShapeError):
        adjust(get_index("p"), PERM, MaxSpec.domain_max(), wide)
    with pytest.raises(ShapeError):
        adjust(get_index("q_joint"), get_model("ind1"), MaxSpec.domain_max(), wide)


# ---------------------------------------------------------------------------
# iterated adjustment

def test_adjusted_index_re_anchors_per_table():
    ai = adjusted_index(get_index("toy_u1_squared"), IND2, MaxSpec.fixed(F(4)))
    assert ai.evaluate(toy_table(1, 2), exact=True) == F(-1, 5)
    # same spec at a different anchor: mean changes with the table
    other = ai.evaluate(toy_table(2, 2), exact=True)
    assert other != F(-1, 5)


def test_double_adjustment_golden_value():
    base = adjusted_index(get_index("toy_u1_squared"), IND2, MaxSpec.fixed(F(4)))
    second = adjust(base, IND2, MaxSpec.domain_max(), toy_table(1, 2), exact=True)
    assert second.adjusted == -1
    assert second.max_value == 0  # best reachable first-stage value at n=2 is u1=0
    assert second.expected.value == F(-1, 10)


def test_adjusted_index_identifier_and_shape():
    ai = adjusted_index(get_index("p"), PERM, MaxSpec.domain_max())
    assert "p" in ai.identifier and "perm" in ai.identifier
    assert ai.requires_square
    with pytest.raises(ShapeError):
        ai.evaluate(table_from_counts([[1, 2, 0], [0, 1, 1]]))


def test_adjusted_index_mc_noise_is_reproducible():
    mc = MonteCarloConfig(seed=5, samples=400)
    ai = adjusted_index(
        get_index("q_joint"), PERM, MaxSpec.pair_mean(), method="monte_carlo", mc=mc
    )
    t = table_from_counts([[2, 1], [1, 2]])
    assert ai.evaluate(t) == ai.evaluate(t)


# ---------------------------------------------------------------------------
# named measures

def test_named_measure_golden_values():
    t = table_from_counts([[1, 1], [0, 2]])
    assert named_measure("cohen_kappa", t, exact=True).adjusted == F(1, 2)
    assert named_measure("kappa_over_kappa_m", t, exact=True).adjusted == 1
    assert named_measure("scott_pi", t, exact=True).adjusted == F(7, 15)
    flat = table_from_counts([[1, 1], [1, 1]])
    assert named_measure("ari", flat, exact=True).adjusted == F(-1, 2)
    assert named_measure("hari", flat, exact=True).adjusted == F(-1, 2)


def test_standardized_measures_run_in_float_mode():
    t = table_from_counts([[2, 1], [1, 2]])
    r = named_measure("standardized_q", t)
    assert isinstance(r.adjusted, float)
    with pytest.raises(CapabilityError):
        named_measure("standardized_q", t, exact=True)


def test_measure_registry():
    assert set(MEASURE_IDS) == {
        "cohen_kappa",
        "kappa_over_kappa_m",
        "scott_pi",
        "ari",
        "hari",
        "standardized_p",
        "standardized_q",
    }
    with pytest.raises(InputError, match="unknown measure"):
        named_measure("nope", table_from_counts([[1]]))


def test_ari_equals_textbook_formula():
    # (q - q_u q_v) / ((q_u + q_v)/2 - q_u q_v) on a case with nonzero parts
    t = table_from_counts([[2, 0], [1, 1]])
    from simadjust.indices import pair_agreement

    qu = pair_agreement(t.row_margins, t.total)
    qv = pair_agreement(t.col_margins, t.total)
    q = get_index("q_joint").fn(t)
    expected = (q - qu * qv) / ((qu + qv) / 2 - qu * qv)
    assert named_measure("ari", t, exact=True).adjusted == expected
