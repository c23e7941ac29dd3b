"""Chance adjustment of indices: (raw - expected) / (max - expected).

An adjustment is fully specified by an index, a null model, a maximum
specification and a degenerate-case constant c. When max == expected the
ratio is undefined and the adjusted value is c by convention (0 unless the
caller chooses otherwise).

Maximum specifications:

``domain_max``     largest index value over all tables with the same total
                   and shape (registry of verified closed forms, else
                   enumeration)
``model_max``      largest index value over the null model's support
``pair_mean``      average of the two margin pair-agreement rates
``pair_min``       smaller of the two margin pair-agreement rates
``standardize``    expected + sqrt(variance): the adjusted value becomes a
                   z-score
``fixed(v)``       a constant supplied by the caller

Named measures bundle well-known choices: ``cohen_kappa`` (Cohen 1960) is
raw agreement adjusted under the fixed-margins model with the domain max,
``scott_pi`` (Scott 1955) swaps in the pooled-margin model, ``ari``
(Hubert and Arabie 1985) adjusts pair agreement with the margin-mean max,
``hari`` uses the margin-min max instead, and ``kappa_over_kappa_m``
replaces the domain max with the support max.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .errors import CapabilityError, InputError, ResourceError
from .indices import get_index, pair_agreement
from .nullmodels import (
    EstimateResult,
    MonteCarloConfig,
    NullModel,
    _check_model,
    _sample_arrays,
    _stream_counts,
    _stream_rngs,
    _tables_from_arrays,
    expectation,
    get_model,
    support,
    support_size,
    variance,
)
from .tables import (
    DEFAULT_ENUMERATION_BUDGET,
    ContingencyTable,
    domain_size,
    enumerate_domain,
)

__all__ = [
    "MaxSpec",
    "AdjustmentResult",
    "AdjustedIndex",
    "adjust",
    "adjusted_index",
    "resolve_max",
    "NAMED_MEASURES",
    "MEASURE_IDS",
    "named_measure",
    "register_domain_max_closed_form",
]


@dataclass(frozen=True)
class MaxSpec:
    """Which maximum the adjustment divides by."""

    kind: str
    value: Fraction | None = None

    _KINDS = ("domain_max", "model_max", "pair_mean", "pair_min", "standardize", "fixed")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise InputError(
                f"unknown max spec '{self.kind}'; available: {', '.join(self._KINDS)}"
            )
        if (self.kind == "fixed") != (self.value is not None):
            raise InputError("max spec 'fixed' requires a value; others take none")

    @classmethod
    def domain_max(cls) -> "MaxSpec":
        return cls("domain_max")

    @classmethod
    def model_max(cls) -> "MaxSpec":
        return cls("model_max")

    @classmethod
    def pair_mean(cls) -> "MaxSpec":
        return cls("pair_mean")

    @classmethod
    def pair_min(cls) -> "MaxSpec":
        return cls("pair_min")

    @classmethod
    def standardize(cls) -> "MaxSpec":
        return cls("standardize")

    @classmethod
    def fixed(cls, value) -> "MaxSpec":
        return cls("fixed", Fraction(value))

    @classmethod
    def parse(cls, text: str) -> "MaxSpec":
        """Parse CLI spellings: 'domain', 'model', 'pair_mean', 'pair-min',
        'standardize', 'fixed(3/4)', 'fixed:0.8'."""
        s = text.strip().lower()
        aliases = {
            "domain": "domain_max",
            "domain_max": "domain_max",
            "model": "model_max",
            "model_max": "model_max",
            "pair_mean": "pair_mean",
            "pair_min": "pair_min",
            "standardize": "standardize",
        }
        # dash and underscore spellings are interchangeable for keywords,
        # but not inside fixed(...) where "-" is a sign
        if s.replace("-", "_") in aliases:
            return cls(aliases[s.replace("-", "_")])
        raw = None
        if s.startswith("fixed(") and s.endswith(")"):
            raw = s[len("fixed(") : -1]
        elif s.startswith("fixed:"):
            raw = s[len("fixed:") :]
        if raw is not None:
            try:
                return cls.fixed(Fraction(raw))
            except (ValueError, ZeroDivisionError):
                raise InputError(f"cannot parse fixed max value {raw!r}") from None
        raise InputError(
            f"cannot parse max spec {text!r}; expected one of domain, model, "
            "pair_mean, pair_min, standardize, fixed(VALUE)"
        )

    def describe(self) -> str:
        if self.kind == "fixed":
            return f"fixed({self.value})"
        return self.kind


# Verified largest index values over the fixed-(total, shape) domain. Each
# entry is checked against brute-force domain enumeration in the test suite
# before being trusted here.
_DOMAIN_MAX_CLOSED: dict[str, Callable[[ContingencyTable], Fraction]] = {
    "p": lambda t: Fraction(1),
    "q_joint": lambda t: Fraction(1),
    "q_row": lambda t: Fraction(1),
    "q_col": lambda t: Fraction(1),
    "rand": lambda t: Fraction(1),
    "toy_u1": lambda t: Fraction(t.total),
    "toy_u1_squared": lambda t: Fraction(t.total * t.total),
}


def register_domain_max_closed_form(
    index_id: str, fn: Callable[[ContingencyTable], Fraction]
) -> None:
    _DOMAIN_MAX_CLOSED[index_id] = fn


def _max_over(tables, index, exact: bool):
    best = None
    for member in tables:
        value = index.evaluate(member, exact=exact)
        if best is None or value > best:
            best = value
    return best


def _sampled_max(model: NullModel, t: ContingencyTable, index, mc: MonteCarloConfig):
    rngs = _stream_rngs(mc.seed, mc.streams)
    counts = _stream_counts(mc.samples, mc.streams)
    best = None
    for rng, count in zip(rngs, counts):
        if count == 0:
            continue
        for member in _tables_from_arrays(_sample_arrays(model, t, rng, count)):
            value = index.evaluate(member)
            if best is None or value > best:
                best = value
    return best


def resolve_max(
    spec: MaxSpec,
    index,
    model: NullModel,
    t: ContingencyTable,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    budget: int | None = None,
) -> tuple[Fraction | float, str]:
    """Resolve the max spec to a value and a method tag.

    Monte Carlo max estimation (``monte_carlo`` tag) is approximate: the max
    over a sample is a lower bound on the true max.
    """
    cap = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    if spec.kind == "fixed":
        return (spec.value if exact else float(spec.value)), "fixed"
    if spec.kind in ("pair_mean", "pair_min"):
        qu = pair_agreement(t.row_margins, t.total)
        qv = pair_agreement(t.col_margins, t.total)
        value = (qu + qv) / 2 if spec.kind == "pair_mean" else min(qu, qv)
        return (value if exact else float(value)), "closed_form"
    if spec.kind == "standardize":
        if exact:
            raise CapabilityError(
                "standardize max involves a square root and has no exact "
                "rational form; use float mode"
            )
        e = expectation(model, t, index, method=method, mc=mc, budget=budget)
        v = variance(model, t, index, method=method, mc=mc, budget=budget)
        if v.value < 0:
            # enumeration round-off can graze below zero
            sd = 0.0
        else:
            sd = float(v.value) ** 0.5
        return e.value + sd, f"standardize(mean={e.method},var={v.method})"
    if spec.kind == "domain_max":
        fn = _DOMAIN_MAX_CLOSED.get(index.identifier)
        if fn is not None and method in ("auto", "closed_form"):
            value = fn(t)
            return (value if exact else float(value)), "closed_form"
        if method == "closed_form":
            raise CapabilityError(
                f"no closed-form domain max registered for '{index.identifier}'"
            )
        size = domain_size(t.total, t.n_rows, t.n_cols)
        if method in ("auto", "enumeration") and size <= cap:
            best = _max_over(
                enumerate_domain(t.total, t.n_rows, t.n_cols, cap), index, exact
            )
            return best, "enumeration"
        if method == "enumeration":
            raise ResourceError(
                f"domain of {size} tables exceeds the enumeration budget of {cap}"
            )
        if exact:
            raise CapabilityError(
                "Monte Carlo cannot produce exact rational results"
            )
        if mc is None:
            raise ResourceError(
                f"domain of {size} tables exceeds the enumeration budget of "
                f"{cap}; provide a Monte Carlo configuration for an "
                "approximate (lower-bound) max"
            )
        from .nullmodels import FIXED_UNIFORM

        return _sampled_max(FIXED_UNIFORM, t, index, mc), "monte_carlo"
    # model_max
    if method == "closed_form":
        raise CapabilityError(
            f"no closed-form support max for model '{model.identifier}'"
        )
    size = support_size(model, t)
    if method in ("auto", "enumeration") and size is not None and size <= cap:
        best = _max_over(support(model, t, cap), index, exact)
        return best, "enumeration"
    if method == "enumeration":
        shown = "unknown size" if size is None else f"{size} tables"
        raise ResourceError(
            f"support ({shown}) exceeds the enumeration budget of {cap}"
        )
    if exact:
        raise CapabilityError("Monte Carlo cannot produce exact rational results")
    if mc is None:
        shown = "unknown size" if size is None else f"{size} tables"
        raise ResourceError(
            f"support ({shown}) exceeds the enumeration budget of {cap}; "
            "provide a Monte Carlo configuration for an approximate "
            "(lower-bound) max"
        )
    return _sampled_max(model, t, index, mc), "monte_carlo"


@dataclass(frozen=True)
class AdjustmentResult:
    """Everything a report needs about one adjustment."""

    index_id: str
    model_id: str
    max_spec: str
    raw: float | Fraction
    expected: EstimateResult
    max_value: float | Fraction
    max_method: str
    adjusted: float | Fraction
    degenerate: bool
    convention_c: float | Fraction


def adjust(
    index,
    model: NullModel,
    max_spec: MaxSpec,
    t: ContingencyTable,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    budget: int | None = None,
) -> AdjustmentResult:
    """Chance-adjust ``index`` at table ``t`` under ``model``.

    ``c`` is returned as the adjusted value when the denominator vanishes
    (max equals expectation, a point-mass null). In float mode degeneracy is
    float equality of the two converted values; closed-form and enumeration
    engines produce identical floats for identical rationals, so the test is
    exact wherever it matters. Monte Carlo estimates are noisy and will not
    hit the degenerate branch; do not use them to detect point masses.
    """
    _check_model(model, t)
    index.check_table(t)
    raw = index.evaluate(t, exact=exact)
    expected = expectation(
        model, t, index, method=method, mc=mc, exact=exact, budget=budget
    )
    max_value, max_method = resolve_max(
        max_spec, index, model, t, method=method, mc=mc, exact=exact, budget=budget
    )
    c_value = Fraction(c) if exact else float(c)
    degenerate = max_value == expected.value
    if degenerate:
        adjusted = c_value
    else:
        adjusted = (raw - expected.value) / (max_value - expected.value)
    return AdjustmentResult(
        index_id=index.identifier,
        model_id=model.identifier,
        max_spec=max_spec.describe(),
        raw=raw,
        expected=expected,
        max_value=max_value,
        max_method=max_method,
        adjusted=adjusted,
        degenerate=degenerate,
        convention_c=c_value,
    )


class AdjustedIndex:
    """The adjusted value as an index of its own.

    Evaluating at any table re-anchors the null model and max at that table,
    which is what iterated adjustment and the distributional property checks
    need. Behaves like :class:`Index` (identifier, check_table, evaluate).
    """

    def __init__(
        self,
        base,
        model: NullModel,
        max_spec: MaxSpec,
        c=0,
        method: str = "auto",
        mc: MonteCarloConfig | None = None,
        budget: int | None = None,
    ) -> None:
        self.base = base
        self.model = model
        self.max_spec = max_spec
        self.c = c
        self.method = method
        self.mc = mc
        self.budget = budget
        self.identifier = (
            f"adjusted({base.identifier}|{model.identifier}|{max_spec.describe()})"
        )

    @property
    def requires_square(self) -> bool:
        return self.base.requires_square or self.model.requires_square

    @property
    def needs_pairs(self) -> bool:
        return self.base.needs_pairs

    def check_table(self, t: ContingencyTable) -> None:
        self.base.check_table(t)
        _check_model(self.model, t)

    def evaluate(self, t: ContingencyTable, exact: bool = False):
        return adjust(
            self.base,
            self.model,
            self.max_spec,
            t,
            c=self.c,
            method=self.method,
            mc=self.mc,
            exact=exact,
            budget=self.budget,
        ).adjusted


def adjusted_index(
    base,
    model: NullModel,
    max_spec: MaxSpec,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    budget: int | None = None,
) -> AdjustedIndex:
    return AdjustedIndex(base, model, max_spec, c, method, mc, budget)


NAMED_MEASURES: dict[str, tuple[str, str, MaxSpec]] = {
    "cohen_kappa": ("p", "perm", MaxSpec.domain_max()),
    "kappa_over_kappa_m": ("p", "perm", MaxSpec.model_max()),
    "scott_pi": ("p", "ind1", MaxSpec.domain_max()),
    "ari": ("q_joint", "perm", MaxSpec.pair_mean()),
    "hari": ("q_joint", "perm", MaxSpec.pair_min()),
    "standardized_p": ("p", "perm", MaxSpec.standardize()),
    "standardized_q": ("q_joint", "perm", MaxSpec.standardize()),
}

MEASURE_IDS = tuple(NAMED_MEASURES)


def named_measure(
    name: str,
    t: ContingencyTable,
    c=0,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    budget: int | None = None,
) -> AdjustmentResult:
    """Compute a bundled (index, model, max) combination by name."""
    try:
        index_id, model_id, spec = NAMED_MEASURES[name]
    except KeyError:
        raise InputError(
            f"unknown measure '{name}'; available: {', '.join(MEASURE_IDS)}"
        ) from None
    return adjust(
        get_index(index_id),
        get_model(model_id),
        spec,
        t,
        c=c,
        method=method,
        mc=mc,
        exact=exact,
        budget=budget,
    )
