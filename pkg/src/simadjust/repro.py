"""Closed forms for the squared-first-row-count worked example, plus grids.

The worked example adjusts the squared first-row count under the
independent-redraw null (``ind2``) on a single-column table, where
everything reduces to one binomial variable: the first-row count follows
Binomial(n, u1/n) under the null. That makes the adjusted value, its null
mean, and the twice-adjusted value available in closed form, which this
module provides in both exact rational and log-gamma float arithmetic.

These closed forms exist to be checked against the generic pipeline (the
test suite does so exactly for small n) and to make the large-n divergence
grid and the asymptotic ratio cheap to compute.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import InputError

__all__ = [
    "UNDERFLOW_SENTINEL",
    "adjusted_value",
    "adjusted_mean",
    "double_adjusted_value",
    "single_expectation",
    "nested_expectation",
    "standardized_value",
    "standardized_variance",
    "affine_fit_residual",
    "binomial_pmf",
    "CounterexampleRecord",
    "counterexample_record",
    "GridCell",
    "grid",
    "write_grid_csv",
    "asymptotic_ratio",
]

# Written to the neg_log10_diff column when the divergence underflows to
# zero in double precision; the underflow flag is set alongside.
UNDERFLOW_SENTINEL = 300.0
_UNDERFLOW_FLOOR = 1e-300


def _validate(u1: int, n: int) -> None:
    if not isinstance(n, int) or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    if not isinstance(u1, int) or not 0 <= u1 <= n:
        raise InputError(f"u1 must be an integer in [0, {n}], got {u1!r}")


def binomial_pmf(u1: int, n: int, k: int, exact: bool = False):
    """P(count = k) for Binomial(n, u1/n)."""
    _validate(u1, n)
    if not 0 <= k <= n:
        return Fraction(0) if exact else 0.0
    if exact:
        p = Fraction(u1, n)
        return math.comb(n, k) * p**k * (1 - p) ** (n - k)
    if u1 == 0:
        return 1.0 if k == 0 else 0.0
    if u1 == n:
        return 1.0 if k == n else 0.0
    p = u1 / n
    log_pmf = (
        math.lgamma(n + 1)
        - math.lgamma(k + 1)
        - math.lgamma(n - k + 1)
        + k * math.log(p)
        + (n - k) * math.log1p(-p)
    )
    return math.exp(log_pmf)


def adjusted_value(u1: int, n: int, c=0, exact: bool = False):
    """Adjusted squared first-row count: -u1 / (n^2 + (n-1) u1).

    The denominator max - mean vanishes exactly at u1 = n, where the
    convention constant c is returned.
    """
    _validate(u1, n)
    if u1 == n:
        return Fraction(c) if exact else float(c)
    if exact:
        return Fraction(-u1, n * n + (n - 1) * u1)
    return -u1 / (n * n + (n - 1) * u1)


def adjusted_mean(u1: int, n: int, c=0, exact: bool = False):
    """Null mean of the adjusted value, re-anchored at each support point.

    Equals c * P(count = n) plus the pmf-weighted sum of the closed-form
    adjusted values below n.
    """
    _validate(u1, n)
    if exact:
        acc = Fraction(c) * binomial_pmf(u1, n, n, exact=True)
        for k in range(n):
            acc += adjusted_value(k, n, c, exact=True) * binomial_pmf(
                u1, n, k, exact=True
            )
        return acc
    acc = float(c) * binomial_pmf(u1, n, n)
    for k in range(n):
        acc += adjusted_value(k, n, c) * binomial_pmf(u1, n, k)
    return acc


def double_adjusted_value(u1: int, n: int, c=0, exact: bool = False):
    """Second-round adjustment using the domain max of the adjusted value.

    Over the single-column domain the adjusted value attains its largest
    value max(0, c) (0 at u1 = 0, c at u1 = n, negative in between), so the
    second round divides by max(0, c) minus the null mean of the adjusted
    value. Degenerate rounds fall back to c as usual.
    """
    _validate(u1, n)
    one = Fraction(1) if exact else 1.0
    c_val = Fraction(c) if exact else float(c)
    zero = 0 * one
    top = max(zero, c_val)
    first = adjusted_value(u1, n, c, exact=exact)
    mean = adjusted_mean(u1, n, c, exact=exact)
    if top == mean:
        return c_val
    return (first - mean) / (top - mean)


def single_expectation(u1: int, n: int, exact: bool = False):
    """Null mean of the squared count: u1 + ((n-1)/n) u1^2."""
    _validate(u1, n)
    value = u1 + Fraction(n - 1, n) * u1 * u1
    return value if exact else float(value)


def nested_expectation(u1: int, n: int, exact: bool = False):
    """Null mean of the re-anchored null mean of the squared count.

    Anchoring the inner mean at each support point inflates the answer to
    ((2n-1)/n) u1 + ((n-1)/n)^2 u1^2, which differs from the single mean
    whenever 0 < u1.
    """
    _validate(u1, n)
    value = Fraction(2 * n - 1, n) * u1 + Fraction(n - 1, n) ** 2 * u1 * u1
    return value if exact else float(value)


def standardized_value(u1: int, n: int, c=0) -> float:
    """Standardized first-row count at the observed table: 0 unless the
    null variance vanishes (u1 in {0, n}), where c applies."""
    _validate(u1, n)
    var = u1 * (1 - u1 / n)
    if var == 0:
        return float(c)
    return 0.0


def standardized_variance(u1: int, n: int, c=0) -> float:
    """Null variance of the standardized first-row count.

    Each support point standardizes to 0 except the endpoints (null
    variance zero there), which contribute c; the variance is that of a
    {0, c}-valued variable and never reaches 1.
    """
    _validate(u1, n)
    p_end = binomial_pmf(u1, n, 0) + binomial_pmf(u1, n, n)
    c2 = float(c) * float(c)
    return c2 * p_end - (float(c) * p_end) ** 2


def affine_fit_residual(n: int, c=0) -> float:
    """Largest residual of the best affine fit of the adjusted value
    against the squared count over the full support.

    A nonzero residual witnesses that the adjusted value is not an affine
    transform of the squared count on the support.
    """
    if not isinstance(n, int) or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    ks = np.arange(n + 1)
    values = np.array([adjusted_value(int(k), n, c) for k in ks])
    design = np.column_stack([np.ones(n + 1), (ks * ks).astype(float)])
    coef, *_ = np.linalg.lstsq(design, values, rcond=None)
    return float(np.max(np.abs(design @ coef - values)))


@dataclass(frozen=True)
class CounterexampleRecord:
    """Numbered failure-mode snapshot at one (u1, n, c).

    Parts: 1 nested mean inflation, 2 non-membership in the affine family,
    3 nonzero mean of the adjusted value, 4 non-idempotency, 5 standardized
    variance below one. Fields not touched by a part stay None.
    """

    part: int
    u1: int
    n: int
    c: float
    violated: bool
    expectation: float | None = None
    nested: float | None = None
    adjusted: float | None = None
    adjusted_mean: float | None = None
    double_adjusted: float | None = None
    standardized: float | None = None
    standardized_var: float | None = None
    affine_residual: float | None = None


_RESIDUAL_TOL = 1e-9


def counterexample_record(part: int, u1: int, n: int, c=0) -> CounterexampleRecord:
    """Evaluate one numbered failure mode at (u1, n, c)."""
    _validate(u1, n)
    if part not in (1, 2, 3, 4, 5):
        raise InputError(f"part must be in 1..5, got {part!r}")
    c_f = float(c)
    if part == 1:
        single = single_expectation(u1, n)
        nested = nested_expectation(u1, n)
        return CounterexampleRecord(
            part, u1, n, c_f,
            violated=abs(single - nested) > _RESIDUAL_TOL,
            expectation=single,
            nested=nested,
        )
    if part == 2:
        residual = affine_fit_residual(n, c)
        return CounterexampleRecord(
            part, u1, n, c_f,
            violated=residual > _RESIDUAL_TOL,
            affine_residual=residual,
        )
    if part == 3:
        mean = adjusted_mean(u1, n, c)
        return CounterexampleRecord(
            part, u1, n, c_f,
            violated=abs(mean) > _RESIDUAL_TOL,
            adjusted_mean=mean,
        )
    if part == 4:
        one = adjusted_value(u1, n, c)
        mean = adjusted_mean(u1, n, c)
        two = double_adjusted_value(u1, n, c)
        return CounterexampleRecord(
            part, u1, n, c_f,
            violated=abs(one - two) > _RESIDUAL_TOL,
            adjusted=one,
            adjusted_mean=mean,
            double_adjusted=two,
        )
    value = standardized_value(u1, n, c)
    var = standardized_variance(u1, n, c)
    return CounterexampleRecord(
        part, u1, n, c_f,
        violated=abs(var - 1.0) > _RESIDUAL_TOL,
        standardized=value,
        standardized_var=var,
    )


@dataclass(frozen=True)
class GridCell:
    """One (c, n, u1) cell of the divergence grid."""

    c: float
    n: int
    u1: int
    as_value: float
    a2s_value: float
    neg_log10_diff: float
    underflow: bool


def grid(
    n_max: int = 100, c_values: Sequence[float] = (0.0, 1.0, -1.0)
) -> list[GridCell]:
    """Divergence between single and double adjustment over a (n, u1) grid.

    For each c, every n in [2, n_max] and u1 in [1, n-1] gets the closed
    form adjusted and twice-adjusted values and -log10 of their absolute
    difference. A difference underflowing double precision is recorded with
    the sentinel and flagged. Rows are sorted by (c, n, u1).
    """
    if n_max < 2:
        raise InputError(f"n_max must be at least 2, got {n_max}")
    if not c_values:
        raise InputError("at least one c value is required")
    cells: list[GridCell] = []
    for c in sorted(float(x) for x in c_values):
        for n in range(2, n_max + 1):
            ks = np.arange(n + 1)
            # adjusted value per support point; the top point carries c
            f = np.empty(n + 1)
            f[:n] = -ks[:n] / (n * n + (n - 1) * ks[:n])
            f[n] = c
            log_binom = np.array(
                [
                    math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
                    for k in range(n + 1)
                ]
            )
            top = max(0.0, c)
            for u1 in range(1, n):
                p = u1 / n
                pmf = np.exp(log_binom + ks * math.log(p) + (n - ks) * math.log1p(-p))
                mean = float(f @ pmf)
                as_value = float(f[u1])
                denom = top - mean
                a2s = c if denom == 0.0 else (as_value - mean) / denom
                diff = abs(as_value - a2s)
                if diff < _UNDERFLOW_FLOOR:
                    cells.append(
                        GridCell(c, n, u1, as_value, a2s, UNDERFLOW_SENTINEL, True)
                    )
                else:
                    cells.append(
                        GridCell(c, n, u1, as_value, a2s, -math.log10(diff), False)
                    )
    return cells


def write_grid_csv(cells: Sequence[GridCell], path: str) -> None:
    """Long-format CSV: c,n,u1,as_value,a2s_value,neg_log10_diff,underflow."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["c", "n", "u1", "as_value", "a2s_value", "neg_log10_diff", "underflow"]
        )
        for cell in cells:
            writer.writerow(
                [
                    format(cell.c, ".17g"),
                    cell.n,
                    cell.u1,
                    format(cell.as_value, ".17g"),
                    format(cell.a2s_value, ".17g"),
                    format(cell.neg_log10_diff, ".17g"),
                    int(cell.underflow),
                ]
            )


def asymptotic_ratio(j: int, c, n: int) -> dict:
    """Ratio of the double to single adjustment, scaled by 1/n, at u1 = n-j.

    As n grows the ratio approaches 2/(e^j - 1) for c > 0 and -2 for c < 0.
    c = 0 is unsupported: the scaling regime changes and no finite limit of
    this form exists.
    """
    if not isinstance(n, int) or n < 2:
        raise InputError(f"n must be an integer >= 2, got {n!r}")
    if not isinstance(j, int) or not 1 <= j <= n - 1:
        raise InputError(f"j must be an integer in [1, n-1], got {j!r}")
    c_f = float(c)
    if c_f == 0.0:
        raise InputError(
            "c = 0 is unsupported for the asymptotic ratio; use a nonzero c"
        )
    u1 = n - j
    one = adjusted_value(u1, n, c_f)
    two = double_adjusted_value(u1, n, c_f)
    ratio = two / (n * one)
    limit = 2.0 / (math.exp(j) - 1.0) if c_f > 0 else -2.0
    return {
        "j": j,
        "c": c_f,
        "n": n,
        "u1": u1,
        "adjusted": one,
        "double_adjusted": two,
        "ratio": ratio,
        "limit": limit,
        "abs_error": abs(ratio - limit),
    }
