"""Similarity indices over contingency tables.

Every index evaluates exactly: counts are integers, so each value is a
rational number computed with :class:`fractions.Fraction` and converted to
float only at the caller's request. Shape requirements (square table,
enough observations for pairs) are enforced at evaluation time.

Identifiers are stable strings used by the CLI and registries:

=================  =============================================
``p``              raw agreement, diagonal share (square tables)
``q_joint``        pair agreement of the joint cell partition
``q_row``          pair agreement of the row margin partition
``q_col``          pair agreement of the column margin partition
``rand``           pair concordance rate across both partitions
``toy_u1``         first-row margin count
``toy_u1_squared`` square of the first-row margin count
=================  =============================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .errors import ContractError, DomainError, InputError, ShapeError
from .tables import ContingencyTable

__all__ = [
    "Index",
    "LinearMember",
    "INDEX_IDS",
    "get_index",
    "raw_agreement",
    "pair_agreement",
    "rand_value",
    "linear_member",
    "rand_member",
    "negation_member",
    "identity_member",
    "MEMBER_IDS",
    "get_member",
]


def _check_table(t: ContingencyTable, requires_square: bool, needs_pairs: bool,
                 identifier: str) -> None:
    if requires_square and not t.is_square():
        raise ShapeError(
            f"index '{identifier}' needs a square table, got {t.n_rows}x{t.n_cols}"
        )
    if needs_pairs and t.total < 2:
        raise DomainError(
            f"index '{identifier}' needs at least 2 observations, got {t.total}"
        )


@dataclass(frozen=True)
class Index:
    """A named exact evaluator over tables.

    ``fn`` returns a Fraction (or int); ``evaluate`` converts to float unless
    ``exact`` is requested.
    """

    identifier: str
    fn: Callable[[ContingencyTable], Fraction]
    requires_square: bool = False
    needs_pairs: bool = False

    def check_table(self, t: ContingencyTable) -> None:
        _check_table(t, self.requires_square, self.needs_pairs, self.identifier)

    def evaluate(self, t: ContingencyTable, exact: bool = False):
        self.check_table(t)
        value = self.fn(t)
        return value if exact else float(value)


def raw_agreement(t: ContingencyTable) -> Fraction:
    """Share of observations on the diagonal. Square tables only."""
    _check_table(t, True, False, "p")
    diag = sum(t.counts[i][i] for i in range(t.n_rows))
    return Fraction(diag, t.total)


def pair_agreement(block_sizes: Sequence[int], total: int) -> Fraction:
    """Probability that a uniform pair of observations shares a block.

    ``block_sizes`` is any partition of ``total`` into labelled blocks (cell
    counts, row margins or column margins).
    """
    if total < 2:
        raise DomainError(f"pair agreement needs at least 2 observations, got {total}")
    if sum(block_sizes) != total:
        raise InputError(
            f"block sizes sum to {sum(block_sizes)}, expected {total}"
        )
    return Fraction(
        sum(math.comb(b, 2) for b in block_sizes), math.comb(total, 2)
    )


def _q_joint(t: ContingencyTable) -> Fraction:
    return pair_agreement(t.cells(), t.total)


def _q_row(t: ContingencyTable) -> Fraction:
    return pair_agreement(t.row_margins, t.total)


def _q_col(t: ContingencyTable) -> Fraction:
    return pair_agreement(t.col_margins, t.total)


def rand_value(t: ContingencyTable) -> Fraction:
    """Rate of observation pairs on which the two partitions concur.

    Equal to 1 - q(rows) - q(cols) + 2 q(cells): a pair concurs when it is
    together in both partitions or apart in both.
    """
    _check_table(t, False, True, "rand")
    return 1 - _q_row(t) - _q_col(t) + 2 * _q_joint(t)


def _toy_u1(t: ContingencyTable) -> Fraction:
    return Fraction(t.row_margins[0])


def _toy_u1_squared(t: ContingencyTable) -> Fraction:
    return Fraction(t.row_margins[0] ** 2)


_INDICES: dict[str, Index] = {
    "p": Index("p", raw_agreement, requires_square=True),
    "q_joint": Index("q_joint", _q_joint, needs_pairs=True),
    "q_row": Index("q_row", _q_row, needs_pairs=True),
    "q_col": Index("q_col", _q_col, needs_pairs=True),
    "rand": Index("rand", rand_value, needs_pairs=True),
    "toy_u1": Index("toy_u1", _toy_u1),
    "toy_u1_squared": Index("toy_u1_squared", _toy_u1_squared),
}

INDEX_IDS = tuple(_INDICES)


def get_index(identifier: str) -> Index:
    try:
        return _INDICES[identifier]
    except KeyError:
        raise InputError(
            f"unknown index '{identifier}'; available: {', '.join(INDEX_IDS)}"
        ) from None


@dataclass(frozen=True)
class LinearMember:
    """Affine transform T = alpha(n) + beta(n) * S of a base index.

    ``alpha`` and ``beta`` may depend on the table but must be constant
    across any one null support for the equivalence results to apply; that
    is the caller's promise, not checked here. ``beta`` must never be zero;
    evaluation raises ContractError if it is.
    """

    identifier: str
    base: Index
    alpha: Callable[[ContingencyTable], Fraction]
    beta: Callable[[ContingencyTable], Fraction]

    @property
    def requires_square(self) -> bool:
        return self.base.requires_square

    @property
    def needs_pairs(self) -> bool:
        return self.base.needs_pairs

    def check_table(self, t: ContingencyTable) -> None:
        self.base.check_table(t)

    def coefficients(self, t: ContingencyTable) -> tuple[Fraction, Fraction]:
        a = Fraction(self.alpha(t))
        b = Fraction(self.beta(t))
        if b == 0:
            raise ContractError(
                f"member '{self.identifier}' has zero slope on table {t}"
            )
        return a, b

    def evaluate(self, t: ContingencyTable, exact: bool = False):
        a, b = self.coefficients(t)
        value = a + b * self.base.fn(t)
        return value if exact else float(value)


def linear_member(
    identifier: str,
    base: Index,
    alpha: Callable[[ContingencyTable], Fraction],
    beta: Callable[[ContingencyTable], Fraction],
) -> LinearMember:
    return LinearMember(identifier, base, alpha, beta)


def rand_member() -> LinearMember:
    """The pair concordance rate written as an affine transform of q_joint.

    alpha = 1 - q(rows) - q(cols) and beta = 2 depend only on the margins,
    so they are constant on any margin-preserving support.
    """
    base = get_index("q_joint")
    return LinearMember(
        "rand_member",
        base,
        alpha=lambda t: 1 - _q_row(t) - _q_col(t),
        beta=lambda t: Fraction(2),
    )


def negation_member(base_id: str = "q_joint") -> LinearMember:
    """T = -S: slope -1, intercept 0."""
    base = get_index(base_id)
    return LinearMember(
        f"neg_{base_id}",
        base,
        alpha=lambda t: Fraction(0),
        beta=lambda t: Fraction(-1),
    )


def identity_member(base_id: str = "q_joint") -> LinearMember:
    """T = S: slope 1, intercept 0."""
    base = get_index(base_id)
    return LinearMember(
        f"identity_{base_id}",
        base,
        alpha=lambda t: Fraction(0),
        beta=lambda t: Fraction(1),
    )


_MEMBER_FACTORIES: dict[str, Callable[[], LinearMember]] = {
    "rand_member": rand_member,
    "neg_q_joint": negation_member,
    "identity_q_joint": identity_member,
}

MEMBER_IDS = tuple(_MEMBER_FACTORIES)


def get_member(identifier: str) -> LinearMember:
    try:
        return _MEMBER_FACTORIES[identifier]()
    except KeyError:
        raise InputError(
            f"unknown member '{identifier}'; available: {', '.join(MEMBER_IDS)}"
        ) from None
