"""Machine checks of the distributional properties of adjusted indices.

Each check returns a :class:`PropertyReport` with a three-way verdict:

``holds``
    verified over the full support (enumeration or closed form) within
    tolerance;
``violated``
    a concrete witness was found;
``inconclusive``
    only sampled evidence was available and it found nothing (Monte Carlo
    can refute, never confirm).

Checks anchor every support member at its own null model: the mean-zero
property, for instance, asks whether the adjusted value of a random table,
each table adjusted with the model re-anchored at that table, averages to
zero under the model at the observed table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .adjust import AdjustedIndex, MaxSpec, adjust, resolve_max
from .errors import InputError, ResourceError
from .indices import LinearMember
from .nullmodels import (
    MonteCarloConfig,
    NullModel,
    expectation,
    sample_tables,
    support_size,
    support_with_probabilities,
)
from .tables import DEFAULT_ENUMERATION_BUDGET, ContingencyTable

__all__ = [
    "PropertyReport",
    "DEFAULT_TOLERANCE",
    "check_constancy",
    "check_mean_zero",
    "check_variance_one",
    "check_idempotency",
    "check_nested_collapse",
    "check_linear_equivalence",
    "PROPERTY_IDS",
    "run_check",
]

DEFAULT_TOLERANCE = 1e-9

# Monte Carlo refutation threshold, in standard errors.
_SIGMA_GATE = 4.0


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one property check."""

    property: str
    verdict: str
    tolerance: float | None
    methods: dict = field(default_factory=dict)
    witnesses: tuple = ()
    details: dict = field(default_factory=dict)

    def holds(self) -> bool:
        return self.verdict == "holds"


def _tol(tolerance: float | None, exact: bool):
    if exact:
        return 0
    return DEFAULT_TOLERANCE if tolerance is None else tolerance


def _resolve_check_method(
    method: str,
    model: NullModel,
    t: ContingencyTable,
    mc: MonteCarloConfig | None,
    budget: int | None,
) -> str:
    if method not in ("auto", "enumeration", "monte_carlo"):
        raise InputError(
            f"unknown check method '{method}'; use auto, enumeration or monte_carlo"
        )
    if method != "auto":
        if method == "monte_carlo" and mc is None:
            raise InputError("monte_carlo check needs a MonteCarloConfig (seed)")
        return method
    cap = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    size = support_size(model, t)
    if size is not None and size <= cap:
        return "enumeration"
    if mc is not None:
        return "monte_carlo"
    shown = "unknown size" if size is None else f"{size} tables"
    raise ResourceError(
        f"support ({shown}) exceeds the enumeration budget of {cap}; provide "
        "a Monte Carlo configuration or raise the budget"
    )


def _counts_of(t: ContingencyTable) -> list[list[int]]:
    return [list(row) for row in t.counts]


def _num(x):
    return x if isinstance(x, (int, Fraction)) else float(x)


def check_constancy(
    index,
    model: NullModel,
    max_spec: MaxSpec,
    t: ContingencyTable,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Are the expectation and the max constant across the support?

    This is the sufficient condition for the adjustment to behave as an
    affine rescaling on the support; when it fails, mean-zero and
    idempotency are no longer guaranteed.
    """
    tol = _tol(tolerance, exact)
    how = _resolve_check_method(method, model, t, mc, budget)
    anchor_e = expectation(model, t, index, method="auto", exact=exact, budget=budget).value
    anchor_m, anchor_m_method = resolve_max(
        max_spec, index, model, t, method="auto", exact=exact, budget=budget
    )
    witnesses = []
    checked = 0
    members: Iterator[ContingencyTable]
    if how == "enumeration":
        members = (m for m, _ in support_with_probabilities(model, t, budget))
    else:
        members = iter(sample_tables(model, t, mc))
    for member in members:
        e = expectation(
            model, member, index, method="auto", exact=exact, budget=budget
        ).value
        m, _ = resolve_max(
            max_spec, index, model, member, method="auto", exact=exact, budget=budget
        )
        checked += 1
        if abs(e - anchor_e) > tol or abs(m - anchor_m) > tol:
            witnesses.append(
                {
                    "counts": _counts_of(member),
                    "expected": _num(e),
                    "max": _num(m),
                    "anchor_expected": _num(anchor_e),
                    "anchor_max": _num(anchor_m),
                }
            )
            if len(witnesses) >= 5:
                break
    if witnesses:
        verdict = "violated"
    elif how == "enumeration":
        verdict = "holds"
    else:
        verdict = "inconclusive"
    return PropertyReport(
        property="constancy",
        verdict=verdict,
        tolerance=float(tol),
        methods={"support": how, "max": anchor_m_method},
        witnesses=tuple(witnesses),
        details={"members_checked": checked},
    )


def check_mean_zero(
    index,
    model: NullModel,
    max_spec: MaxSpec,
    t: ContingencyTable,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Does the adjusted index average to zero under the model at t?

    Each support member is adjusted with the model re-anchored at itself.
    """
    tol = _tol(tolerance, exact)
    how = _resolve_check_method(method, model, t, mc, budget)
    adjusted = AdjustedIndex(index, model, max_spec, c=c, method="auto", budget=budget)
    if how == "enumeration":
        if exact:
            mean = Fraction(0)
            for member, prob in support_with_probabilities(model, t, budget):
                mean += prob * adjusted.evaluate(member, exact=True)
        else:
            mean = 0.0
            for member, prob in support_with_probabilities(model, t, budget):
                mean += float(prob) * adjusted.evaluate(member)
        ok = abs(mean) <= tol
        return PropertyReport(
            property="mean_zero",
            verdict="holds" if ok else "violated",
            tolerance=float(tol),
            methods={"support": "enumeration"},
            witnesses=() if ok else ({"mean": _num(mean)},),
            details={"mean": _num(mean)},
        )
    values = np.asarray(
        [adjusted.evaluate(member) for member in sample_tables(model, t, mc)],
        dtype=float,
    )
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values)))
    if abs(mean) > _SIGMA_GATE * stderr + tol:
        verdict = "violated"
        witnesses = ({"mean": mean, "stderr": stderr},)
    else:
        verdict = "inconclusive"
        witnesses = ()
    return PropertyReport(
        property="mean_zero",
        verdict=verdict,
        tolerance=float(tol),
        methods={"support": "monte_carlo"},
        witnesses=witnesses,
        details={"mean": mean, "stderr": stderr, "samples": len(values)},
    )


def check_variance_one(
    index,
    model: NullModel,
    t: ContingencyTable,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Does the standardized index have unit variance under the model at t?

    Standardization divides the centered index by its null standard
    deviation (the ``standardize`` max spec); members whose null variance is
    zero fall back to the degenerate constant c. Float-only: standard
    deviations are irrational in general.
    """
    tol = _tol(tolerance, False)
    how = _resolve_check_method(method, model, t, mc, budget)
    standardized = AdjustedIndex(
        index, model, MaxSpec.standardize(), c=c, method="auto", budget=budget
    )
    if how == "enumeration":
        mean = 0.0
        second = 0.0
        for member, prob in support_with_probabilities(model, t, budget):
            x = standardized.evaluate(member)
            p = float(prob)
            mean += p * x
            second += p * x * x
        var = second - mean * mean
        ok = abs(var - 1.0) <= tol
        return PropertyReport(
            property="variance_one",
            verdict="holds" if ok else "violated",
            tolerance=float(tol),
            methods={"support": "enumeration"},
            witnesses=() if ok else ({"variance": var, "mean": mean},),
            details={"variance": var, "mean": mean},
        )
    values = np.asarray(
        [standardized.evaluate(member) for member in sample_tables(model, t, mc)],
        dtype=float,
    )
    n = len(values)
    s2 = float(values.var(ddof=1))
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    stderr = math.sqrt(max(m4 - m2 * m2 * (n - 3) / (n - 1), 0.0) / n)
    if abs(s2 - 1.0) > _SIGMA_GATE * stderr + tol:
        verdict = "violated"
        witnesses = ({"variance": s2, "stderr": stderr},)
    else:
        verdict = "inconclusive"
        witnesses = ()
    return PropertyReport(
        property="variance_one",
        verdict=verdict,
        tolerance=float(tol),
        methods={"support": "monte_carlo"},
        witnesses=witnesses,
        details={"variance": s2, "stderr": stderr, "samples": n},
    )


def check_idempotency(
    index,
    model: NullModel,
    max_spec: MaxSpec,
    t: ContingencyTable,
    c=0,
    second_max: MaxSpec | str = "derived",
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Does adjusting the adjusted index change nothing at t?

    ``second_max`` chooses the max for the second round: the string
    ``"derived"`` uses the affine image of the first max (identically 1 on
    non-degenerate tables), or pass any :class:`MaxSpec` (for instance the
    domain max of the adjusted index) to probe a concrete second round.
    """
    tol = _tol(tolerance, exact)
    first = AdjustedIndex(index, model, max_spec, c=c, method=method, mc=mc, budget=budget)
    first_result = adjust(
        index, model, max_spec, t, c=c, method=method, mc=mc, exact=exact, budget=budget
    )
    one = first_result.adjusted
    methods = {
        "expected": first_result.expected.method,
        "max": first_result.max_method,
    }
    if isinstance(second_max, str):
        if second_max != "derived":
            raise InputError(
                f"second_max must be 'derived' or a MaxSpec, got {second_max!r}"
            )
        # Affine image of the first max: alpha + beta * S_max = 1 wherever the
        # first round is non-degenerate; a degenerate first round makes the
        # second degenerate as well.
        e_first = expectation(
            model, t, first, method="enumeration" if method == "auto" else method,
            mc=mc, exact=exact, budget=budget,
        )
        methods["second_expected"] = e_first.method
        methods["second_max"] = "derived"
        c_value = Fraction(c) if exact else float(c)
        if first_result.degenerate:
            two = c_value
        else:
            one_max = Fraction(1) if exact else 1.0
            if e_first.value == one_max:
                two = c_value
            else:
                two = (one - e_first.value) / (one_max - e_first.value)
    else:
        second_result = adjust(
            first, model, second_max, t, c=c, method=method, mc=mc,
            exact=exact, budget=budget,
        )
        two = second_result.adjusted
        methods["second_expected"] = second_result.expected.method
        methods["second_max"] = second_result.max_method
    ok = abs(one - two) <= tol
    return PropertyReport(
        property="idempotency",
        verdict="holds" if ok else "violated",
        tolerance=float(tol),
        methods=methods,
        witnesses=() if ok else (
            {"counts": _counts_of(t), "adjusted": _num(one), "twice_adjusted": _num(two)},
        ),
        details={"adjusted": _num(one), "twice_adjusted": _num(two)},
    )


def check_nested_collapse(
    index,
    model: NullModel,
    t: ContingencyTable,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Does re-anchoring inside the expectation change nothing?

    Compares E[S] at t with the average over the support of each member's
    own expectation. Equality holds when the expectation is constant across
    the support; data-dependent models break it.
    """
    tol = _tol(tolerance, exact)
    how = _resolve_check_method(method, model, t, mc, budget)
    outer = expectation(model, t, index, method="auto", exact=exact, budget=budget)
    if how == "enumeration":
        if exact:
            nested = Fraction(0)
            for member, prob in support_with_probabilities(model, t, budget):
                nested += prob * expectation(
                    model, member, index, method="auto", exact=True, budget=budget
                ).value
        else:
            nested = 0.0
            for member, prob in support_with_probabilities(model, t, budget):
                nested += float(prob) * expectation(
                    model, member, index, method="auto", budget=budget
                ).value
        diff = abs(outer.value - nested)
        ok = diff <= tol
        return PropertyReport(
            property="nested_collapse",
            verdict="holds" if ok else "violated",
            tolerance=float(tol),
            methods={"support": "enumeration", "outer": outer.method},
            witnesses=() if ok else (
                {"single": _num(outer.value), "nested": _num(nested)},
            ),
            details={"single": _num(outer.value), "nested": _num(nested)},
        )
    values = np.asarray(
        [
            expectation(model, member, index, method="auto", budget=budget).value
            for member in sample_tables(model, t, mc)
        ],
        dtype=float,
    )
    nested_mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(len(values)))
    if abs(nested_mean - outer.value) > _SIGMA_GATE * stderr + tol:
        verdict = "violated"
        witnesses = (
            {"single": float(outer.value), "nested": nested_mean, "stderr": stderr},
        )
    else:
        verdict = "inconclusive"
        witnesses = ()
    return PropertyReport(
        property="nested_collapse",
        verdict=verdict,
        tolerance=float(tol),
        methods={"support": "monte_carlo", "outer": outer.method},
        witnesses=witnesses,
        details={
            "single": float(outer.value),
            "nested": nested_mean,
            "stderr": stderr,
            "samples": len(values),
        },
    )


def check_linear_equivalence(
    member: LinearMember,
    model: NullModel,
    max_spec: MaxSpec,
    t: ContingencyTable,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    tolerance: float | None = None,
    budget: int | None = None,
) -> PropertyReport:
    """Is adjusting T = alpha + beta * S the same as adjusting S?

    The transformed index is adjusted against the affine image of the base
    max (alpha + beta * max). Under the standardize max the expected
    relation carries the sign of beta instead.
    """
    tol = _tol(tolerance, exact)
    alpha, beta = member.coefficients(t)
    base_result = adjust(
        member.base, model, max_spec, t, c=c, method=method, mc=mc,
        exact=exact, budget=budget,
    )
    c_value = Fraction(c) if exact else float(c)
    methods = {
        "base_expected": base_result.expected.method,
        "base_max": base_result.max_method,
    }
    if max_spec.kind == "standardize":
        member_result = adjust(
            member, model, max_spec, t, c=c, method=method, mc=mc,
            exact=exact, budget=budget,
        )
        transformed = member_result.adjusted
        methods["member_expected"] = member_result.expected.method
        methods["member_max"] = member_result.max_method
        sign = 1 if beta > 0 else -1
        if base_result.degenerate:
            # zero null deviation on one side is zero on the other
            target = c_value
        elif sign > 0:
            target = base_result.adjusted
        else:
            target = -base_result.adjusted
        relation = f"adjusted(T) == sign(beta) * adjusted(S), sign={sign}"
    else:
        raw_t = member.evaluate(t, exact=exact)
        e_t = expectation(
            model, t, member, method="enumeration" if method == "auto" else method,
            mc=mc, exact=exact, budget=budget,
        )
        a = alpha if exact else float(alpha)
        b = beta if exact else float(beta)
        max_t = a + b * base_result.max_value
        methods["member_expected"] = e_t.method
        methods["member_max"] = f"affine({base_result.max_method})"
        # The affine image satisfies max_T - E[T] = beta * (max_S - E[S])
        # identically, so degeneracy transfers from the base; testing the
        # float difference here instead would let round-off fabricate a
        # huge spurious ratio.
        if base_result.degenerate or max_t == e_t.value:
            transformed = c_value
        else:
            transformed = (raw_t - e_t.value) / (max_t - e_t.value)
        target = base_result.adjusted
        relation = "adjusted(T) == adjusted(S)"
    diff = abs(transformed - target)
    ok = diff <= tol
    return PropertyReport(
        property="linear_equivalence",
        verdict="holds" if ok else "violated",
        tolerance=float(tol),
        methods=methods,
        witnesses=() if ok else (
            {
                "counts": _counts_of(t),
                "adjusted_base": _num(base_result.adjusted),
                "adjusted_member": _num(transformed),
                "alpha": _num(alpha if exact else float(alpha)),
                "beta": _num(beta if exact else float(beta)),
            },
        ),
        details={
            "adjusted_base": _num(base_result.adjusted),
            "adjusted_member": _num(transformed),
            "relation": relation,
        },
    )


PROPERTY_IDS = (
    "constancy",
    "mean_zero",
    "variance_one",
    "idempotency",
    "nested_collapse",
    "linear_equivalence",
)


def run_check(name: str, **kwargs) -> PropertyReport:
    """Dispatch a check by name (CLI entry)."""
    dispatch = {
        "constancy": check_constancy,
        "mean_zero": check_mean_zero,
        "variance_one": check_variance_one,
        "idempotency": check_idempotency,
        "nested_collapse": check_nested_collapse,
        "linear_equivalence": check_linear_equivalence,
    }
    try:
        fn = dispatch[name]
    except KeyError:
        raise InputError(
            f"unknown property '{name}'; available: {', '.join(PROPERTY_IDS)}"
        ) from None
    return fn(**kwargs)
