"""Null models over contingency tables and expectation engines.

A null model turns an observed table into a distribution over tables (its
support). Four models ship:

``perm``
    Uniformly random relabelling of the second coordinate; both margins are
    held fixed, cell counts follow the multivariate hypergeometric law.
``ind2``
    Independent redraw of both coordinates per observation: multinomial over
    cells with probabilities (u_i / N)(v_j / N).
``ind1``
    Like ``ind2`` but both coordinates share the pooled category law
    (u_i + v_i) / 2N. Positional pooling, so the table must be square.
``fixed_uniform``
    Multinomial with equal probability 1/(I J) for every cell; the support
    is the full fixed-total domain and does not depend on the observed counts.

Expectations and variances of an index under a model come from one of three
engines: a registry of closed forms (exact, verified against enumeration
before being frozen in), exhaustive enumeration with exact rational
probabilities, or Monte Carlo with reproducible seeded streams.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator

import numpy as np

from .errors import (
    CapabilityError,
    InputError,
    ResourceError,
    ShapeError,
)
from .tables import (
    DEFAULT_ENUMERATION_BUDGET,
    ContingencyTable,
    TableSet,
    count_fixed_margins,
    domain_size,
    enumerate_domain,
    enumerate_fixed_margins,
    enumerate_restricted_domain,
)

__all__ = [
    "NullModel",
    "PERM",
    "IND2",
    "IND1",
    "FIXED_UNIFORM",
    "MODEL_IDS",
    "get_model",
    "MonteCarloConfig",
    "EstimateResult",
    "support",
    "support_size",
    "probability",
    "support_with_probabilities",
    "sample",
    "sample_tables",
    "expectation",
    "variance",
    "register_expectation_closed_form",
    "register_variance_closed_form",
    "has_closed_form",
]


@dataclass(frozen=True)
class NullModel:
    """Identifier plus the conditioning information the model preserves."""

    identifier: str
    conditioning: str
    requires_square: bool = False


PERM = NullModel("perm", "both margins fixed; uniform relabelling")
IND2 = NullModel("ind2", "independent coordinates with margin-frequency laws")
IND1 = NullModel(
    "ind1",
    "independent coordinates sharing the pooled margin law",
    requires_square=True,
)
FIXED_UNIFORM = NullModel("fixed_uniform", "equal probability for every cell")

_MODELS = {m.identifier: m for m in (PERM, IND2, IND1, FIXED_UNIFORM)}
MODEL_IDS = tuple(_MODELS)


def get_model(identifier: str) -> NullModel:
    try:
        return _MODELS[identifier]
    except KeyError:
        raise InputError(
            f"unknown null model '{identifier}'; available: {', '.join(MODEL_IDS)}"
        ) from None


def _check_model(model: NullModel, t: ContingencyTable) -> None:
    if model.identifier not in _MODELS:
        raise InputError(f"unknown null model '{model.identifier}'")
    if model.requires_square and not t.is_square():
        raise ShapeError(
            f"model '{model.identifier}' pools categories positionally and needs "
            f"a square table, got {t.n_rows}x{t.n_cols}"
        )


def _cell_probabilities(
    model: NullModel, t: ContingencyTable
) -> tuple[tuple[Fraction, ...], ...]:
    # per-observation cell law for the three iid models
    n = t.total
    if model.identifier == "ind2":
        u, v = t.row_margins, t.col_margins
        return tuple(
            tuple(Fraction(ui * vj, n * n) for vj in v) for ui in u
        )
    if model.identifier == "ind1":
        w = tuple(ui + vi for ui, vi in zip(t.row_margins, t.col_margins))
        return tuple(
            tuple(Fraction(wi * wj, 4 * n * n) for wj in w) for wi in w
        )
    if model.identifier == "fixed_uniform":
        k = t.n_rows * t.n_cols
        return tuple(
            tuple(Fraction(1, k) for _ in range(t.n_cols))
            for _ in range(t.n_rows)
        )
    raise InputError(f"model '{model.identifier}' has no per-cell law")


def support(
    model: NullModel, t: ContingencyTable, budget: int | None = None
) -> TableSet:
    """The set of tables carrying positive probability under the model at t."""
    _check_model(model, t)
    if model.identifier == "perm":
        return enumerate_fixed_margins(t.row_margins, t.col_margins, budget)
    if model.identifier == "fixed_uniform":
        return enumerate_domain(t.total, t.n_rows, t.n_cols, budget)
    probs = _cell_probabilities(model, t)
    allowed = [
        (i, j)
        for i in range(t.n_rows)
        for j in range(t.n_cols)
        if probs[i][j] > 0
    ]
    return enumerate_restricted_domain(
        t.total, t.n_rows, t.n_cols, allowed, budget
    )


def support_size(model: NullModel, t: ContingencyTable) -> int | None:
    """Exact member count of the support, or None when counting is itself
    too expensive."""
    _check_model(model, t)
    if model.identifier == "perm":
        return count_fixed_margins(t.row_margins, t.col_margins)
    if model.identifier == "fixed_uniform":
        return domain_size(t.total, t.n_rows, t.n_cols)
    probs = _cell_probabilities(model, t)
    k = sum(1 for row in probs for p in row if p > 0)
    return math.comb(t.total + k - 1, k - 1)


def probability(
    model: NullModel, t: ContingencyTable, member: ContingencyTable
) -> Fraction:
    """Exact probability of ``member`` under the model anchored at ``t``.

    Tables outside the support get probability 0 (including shape or total
    mismatches for the cell-probability models; for ``perm`` a margin
    mismatch).
    """
    _check_model(model, t)
    if member.shape != t.shape or member.total != t.total:
        return Fraction(0)
    n = t.total
    if model.identifier == "perm":
        if (
            member.row_margins != t.row_margins
            or member.col_margins != t.col_margins
        ):
            return Fraction(0)
        num = 1
        for m in t.row_margins:
            num *= math.factorial(m)
        for m in t.col_margins:
            num *= math.factorial(m)
        den = math.factorial(n)
        for cell in member.cells():
            den *= math.factorial(cell)
        return Fraction(num, den)
    probs = _cell_probabilities(model, t)
    coeff = math.factorial(n)
    mass = Fraction(1)
    for i in range(t.n_rows):
        for j in range(t.n_cols):
            cell = member.counts[i][j]
            coeff //= math.factorial(cell)
            if cell:
                if probs[i][j] == 0:
                    return Fraction(0)
                mass *= probs[i][j] ** cell
    return coeff * mass


def support_with_probabilities(
    model: NullModel, t: ContingencyTable, budget: int | None = None
) -> Iterator[tuple[ContingencyTable, Fraction]]:
    """Iterate (member, exact probability) over the support."""
    for member in support(model, t, budget):
        yield member, probability(model, t, member)


# ---------------------------------------------------------------------------
# Monte Carlo

@dataclass(frozen=True)
class MonteCarloConfig:
    """Reproducible sampling plan: total draw count split over seeded streams."""

    seed: int
    samples: int = 100_000
    streams: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or self.seed < 0:
            raise InputError(f"seed must be a nonnegative integer, got {self.seed!r}")
        if self.samples < 2:
            raise InputError(f"samples must be at least 2, got {self.samples}")
        if not 1 <= self.streams <= self.samples:
            raise InputError(
                f"streams must lie in [1, samples], got {self.streams}"
            )


def _stream_rngs(seed: int, streams: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(streams)
    return [np.random.default_rng(child) for child in children]


def _stream_counts(samples: int, streams: int) -> list[int]:
    base, extra = divmod(samples, streams)
    return [base + (1 if k < extra else 0) for k in range(streams)]


def _sample_arrays(
    model: NullModel, t: ContingencyTable, rng: np.random.Generator, count: int
) -> np.ndarray:
    """Draw ``count`` tables as an int64 array of shape (count, I, J)."""
    n = t.total
    n_rows, n_cols = t.shape
    if model.identifier == "perm":
        x_idx = np.repeat(np.arange(n_rows), t.row_margins)
        y_idx = np.repeat(np.arange(n_cols), t.col_margins)
        out = np.empty((count, n_rows, n_cols), dtype=np.int64)
        # chunk so the (batch, n) key matrix stays modest
        batch = max(1, min(count, 5_000_000 // max(n, 1)))
        done = 0
        while done < count:
            m = min(batch, count - done)
            # argsort of iid uniforms is a uniformly random permutation
            order = np.argsort(rng.random((m, n)), axis=1)
            permuted_y = y_idx[order]
            flat = x_idx[None, :] * n_cols + permuted_y
            offsets = np.arange(m)[:, None] * (n_rows * n_cols)
            tallies = np.bincount(
                (flat + offsets).ravel(), minlength=m * n_rows * n_cols
            )
            out[done : done + m] = tallies.reshape(m, n_rows, n_cols)
            done += m
        return out
    probs = _cell_probabilities(model, t)
    pvals = np.array([float(p) for row in probs for p in row])
    pvals = pvals / pvals.sum()
    # guard against float rounding pushing the partial sum past 1
    while pvals[:-1].sum() > 1.0:
        pvals = pvals / pvals[:-1].sum()
    draws = rng.multinomial(n, pvals, size=count)
    return draws.reshape(count, n_rows, n_cols).astype(np.int64)


def _tables_from_arrays(arrays: np.ndarray) -> list[ContingencyTable]:
    return [
        ContingencyTable(tuple(tuple(int(c) for c in row) for row in arr))
        for arr in arrays
    ]


def sample(
    model: NullModel,
    t: ContingencyTable,
    seed: int,
    count: int,
) -> list[ContingencyTable]:
    """Draw ``count`` tables from the model at ``t``, reproducibly.

    Uses stream 0 of the seed's stream family, so a one-stream expectation
    run sees exactly these tables.
    """
    _check_model(model, t)
    if count < 1:
        raise InputError(f"count must be positive, got {count}")
    rng = _stream_rngs(seed, 1)[0]
    return _tables_from_arrays(_sample_arrays(model, t, rng, count))


def sample_tables(
    model: NullModel, t: ContingencyTable, mc: "MonteCarloConfig"
) -> list[ContingencyTable]:
    """Draw a full Monte Carlo plan's worth of tables, streams in order."""
    _check_model(model, t)
    out: list[ContingencyTable] = []
    for rng, count in zip(_stream_rngs(mc.seed, mc.streams), _stream_counts(mc.samples, mc.streams)):
        if count:
            out.extend(_tables_from_arrays(_sample_arrays(model, t, rng, count)))
    return out


# ---------------------------------------------------------------------------
# Closed-form registry

_EXPECTATION_CLOSED: dict[
    tuple[str, str], Callable[[ContingencyTable], Fraction]
] = {}
_VARIANCE_CLOSED: dict[
    tuple[str, str], Callable[[ContingencyTable], Fraction]
] = {}


def register_expectation_closed_form(
    model_id: str, index_id: str, fn: Callable[[ContingencyTable], Fraction]
) -> None:
    _EXPECTATION_CLOSED[(model_id, index_id)] = fn


def register_variance_closed_form(
    model_id: str, index_id: str, fn: Callable[[ContingencyTable], Fraction]
) -> None:
    _VARIANCE_CLOSED[(model_id, index_id)] = fn


def has_closed_form(model_id: str, index_id: str, stat: str = "mean") -> bool:
    reg = _EXPECTATION_CLOSED if stat == "mean" else _VARIANCE_CLOSED
    return (model_id, index_id) in reg


def _e_perm_p(t: ContingencyTable) -> Fraction:
    # match probability of independently drawn row/col categories, margins fixed
    n = t.total
    return Fraction(
        sum(ui * vi for ui, vi in zip(t.row_margins, t.col_margins)), n * n
    )


def _e_perm_q_joint(t: ContingencyTable) -> Fraction:
    # pair agreement factorizes over the two margin partitions
    from .indices import pair_agreement

    return pair_agreement(t.row_margins, t.total) * pair_agreement(
        t.col_margins, t.total
    )


def _e_ind1_p(t: ContingencyTable) -> Fraction:
    if not t.is_square():
        raise ShapeError("pooled-margin agreement needs a square table")
    n = t.total
    w = [ui + vi for ui, vi in zip(t.row_margins, t.col_margins)]
    return Fraction(sum(wi * wi for wi in w), 4 * n * n)


def _e_ind2_toy_u1(t: ContingencyTable) -> Fraction:
    return Fraction(t.row_margins[0])


def _e_ind2_toy_u1_squared(t: ContingencyTable) -> Fraction:
    n = t.total
    u1 = t.row_margins[0]
    return u1 + Fraction(n - 1, n) * u1 * u1


def _var_ind2_toy_u1(t: ContingencyTable) -> Fraction:
    n = t.total
    u1 = t.row_margins[0]
    return u1 * (1 - Fraction(u1, n))


register_expectation_closed_form("perm", "p", _e_perm_p)
register_expectation_closed_form("perm", "q_joint", _e_perm_q_joint)
register_expectation_closed_form("ind1", "p", _e_ind1_p)
register_expectation_closed_form("ind2", "toy_u1", _e_ind2_toy_u1)
register_expectation_closed_form("ind2", "toy_u1_squared", _e_ind2_toy_u1_squared)
register_variance_closed_form("ind2", "toy_u1", _var_ind2_toy_u1)


# ---------------------------------------------------------------------------
# Engines

@dataclass(frozen=True)
class EstimateResult:
    """A number plus how it was obtained.

    ``stderr``/``samples``/``seed``/``streams`` are populated only for
    Monte Carlo estimates.
    """

    value: float | Fraction
    method: str
    stderr: float | None = None
    samples: int | None = None
    seed: int | None = None
    streams: int | None = None


_METHODS = ("auto", "closed_form", "enumeration", "monte_carlo")


def _resolve_method(
    method: str,
    model: NullModel,
    t: ContingencyTable,
    index_id: str,
    mc: MonteCarloConfig | None,
    stat: str,
    budget: int | None,
) -> str:
    if method not in _METHODS:
        raise InputError(
            f"unknown method '{method}'; available: {', '.join(_METHODS)}"
        )
    if method != "auto":
        return method
    if has_closed_form(model.identifier, index_id, stat):
        return "closed_form"
    cap = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
    size = support_size(model, t)
    if size is not None and size <= cap:
        return "enumeration"
    if mc is not None:
        return "monte_carlo"
    shown = "unknown size" if size is None else f"{size} tables"
    raise ResourceError(
        f"support of '{model.identifier}' at this table ({shown}) exceeds the "
        f"enumeration budget of {cap}; provide a Monte Carlo configuration "
        "(seed and sample count) or raise the budget"
    )


def _index_values_mc(
    model: NullModel,
    t: ContingencyTable,
    index,
    mc: MonteCarloConfig,
) -> np.ndarray:
    return np.asarray(
        [index.evaluate(tbl) for tbl in sample_tables(model, t, mc)], dtype=float
    )


def expectation(
    model: NullModel,
    t: ContingencyTable,
    index,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    budget: int | None = None,
) -> EstimateResult:
    """Mean of ``index`` over the model's distribution at ``t``."""
    _check_model(model, t)
    index.check_table(t)
    how = _resolve_method(method, model, t, index.identifier, mc, "mean", budget)
    if how == "closed_form":
        fn = _EXPECTATION_CLOSED.get((model.identifier, index.identifier))
        if fn is None:
            raise CapabilityError(
                f"no closed-form mean registered for index '{index.identifier}' "
                f"under model '{model.identifier}'"
            )
        value = fn(t)
        return EstimateResult(value if exact else float(value), "closed_form")
    if how == "enumeration":
        if exact:
            acc = Fraction(0)
            for member, prob in support_with_probabilities(model, t, budget):
                acc += prob * index.evaluate(member, exact=True)
            return EstimateResult(acc, "enumeration")
        acc_f = 0.0
        for member, prob in support_with_probabilities(model, t, budget):
            acc_f += float(prob) * index.evaluate(member)
        return EstimateResult(acc_f, "enumeration")
    # monte_carlo
    if exact:
        raise CapabilityError("Monte Carlo cannot produce exact rational results")
    if mc is None:
        raise InputError("monte_carlo method needs a MonteCarloConfig (seed)")
    values = _index_values_mc(model, t, index, mc)
    stderr = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return EstimateResult(
        float(np.mean(values)),
        "monte_carlo",
        stderr=stderr,
        samples=mc.samples,
        seed=mc.seed,
        streams=mc.streams,
    )


def variance(
    model: NullModel,
    t: ContingencyTable,
    index,
    method: str = "auto",
    mc: MonteCarloConfig | None = None,
    exact: bool = False,
    budget: int | None = None,
) -> EstimateResult:
    """Variance of ``index`` over the model's distribution at ``t``."""
    _check_model(model, t)
    index.check_table(t)
    how = _resolve_method(
        method, model, t, index.identifier, mc, "variance", budget
    )
    if how == "closed_form":
        fn = _VARIANCE_CLOSED.get((model.identifier, index.identifier))
        if fn is None:
            raise CapabilityError(
                f"no closed-form variance registered for index "
                f"'{index.identifier}' under model '{model.identifier}'"
            )
        value = fn(t)
        return EstimateResult(value if exact else float(value), "closed_form")
    if how == "enumeration":
        if exact:
            mean = Fraction(0)
            second = Fraction(0)
            for member, prob in support_with_probabilities(model, t, budget):
                s = index.evaluate(member, exact=True)
                mean += prob * s
                second += prob * s * s
            return EstimateResult(second - mean * mean, "enumeration")
        mean_f = 0.0
        second_f = 0.0
        for member, prob in support_with_probabilities(model, t, budget):
            s = index.evaluate(member)
            p = float(prob)
            mean_f += p * s
            second_f += p * s * s
        return EstimateResult(second_f - mean_f * mean_f, "enumeration")
    if exact:
        raise CapabilityError("Monte Carlo cannot produce exact rational results")
    if mc is None:
        raise InputError("monte_carlo method needs a MonteCarloConfig (seed)")
    values = _index_values_mc(model, t, index, mc)
    n = len(values)
    s2 = float(np.var(values, ddof=1))
    centered = values - values.mean()
    m2 = float(np.mean(centered**2))
    m4 = float(np.mean(centered**4))
    # standard error of the sample variance via fourth central moment
    stderr = math.sqrt(max(m4 - m2 * m2 * (n - 3) / (n - 1), 0.0) / n)
    return EstimateResult(
        s2,
        "monte_carlo",
        stderr=stderr,
        samples=mc.samples,
        seed=mc.seed,
        streams=mc.streams,
    )
