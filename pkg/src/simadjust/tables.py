"""Contingency tables: construction, ingestion, pair summaries, enumeration.

The central type is :class:`ContingencyTable`, an immutable integer count
matrix. Everything downstream (indices, null models, adjustment) consumes
tables; nothing mutates them, so instances are safe to share across threads
and to use as dict keys.

Enumeration produces :class:`TableSet` objects: restartable lazy collections
with a known (or lazily enforced) size and a hard budget so a script cannot
accidentally walk billions of tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

from .errors import DomainError, InputError, ResourceError

__all__ = [
    "DEFAULT_ENUMERATION_BUDGET",
    "ContingencyTable",
    "PairTable",
    "TableSet",
    "table_from_counts",
    "table_from_labels",
    "toy_table",
    "pair_table",
    "enumerate_domain",
    "enumerate_restricted_domain",
    "enumerate_fixed_margins",
    "domain_size",
    "count_fixed_margins",
    "read_table_csv",
    "read_labels_csv",
]

# Cap on how many tables an enumeration may yield before giving up.
DEFAULT_ENUMERATION_BUDGET = 5_000_000


@dataclass(frozen=True)
class ContingencyTable:
    """Immutable I x J matrix of nonnegative integer counts, total >= 1.

    ``counts[i][j]`` is the number of observations placed in row category i
    by the first labelling and column category j by the second. Row and
    column margins and the grand total are derived, never stored by callers.

    Original label values (when the table was built from label vectors) ride
    along in ``labels_x`` / ``labels_y`` so reports can name categories; they
    do not affect equality of enumerated tables, which carry ``None``.
    """

    counts: tuple[tuple[int, ...], ...]
    labels_x: tuple | None = None
    labels_y: tuple | None = None

    def __post_init__(self) -> None:
        if not self.counts or not self.counts[0]:
            raise InputError("table must have at least one row and one column")
        width = len(self.counts[0])
        for i, row in enumerate(self.counts):
            if len(row) != width:
                raise InputError(
                    f"row {i + 1} has {len(row)} columns, expected {width}"
                )
            for j, cell in enumerate(row):
                if isinstance(cell, bool) or not isinstance(cell, int):
                    raise InputError(
                        f"cell ({i + 1},{j + 1}) is not an integer: {cell!r}"
                    )
                if cell < 0:
                    raise InputError(
                        f"cell ({i + 1},{j + 1}) is negative: {cell}"
                    )
        if sum(c for row in self.counts for c in row) < 1:
            raise InputError("table total must be at least 1")

    @property
    def n_rows(self) -> int:
        return len(self.counts)

    @property
    def n_cols(self) -> int:
        return len(self.counts[0])

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_rows, self.n_cols)

    @property
    def row_margins(self) -> tuple[int, ...]:
        return tuple(sum(row) for row in self.counts)

    @property
    def col_margins(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.counts))

    @property
    def total(self) -> int:
        return sum(c for row in self.counts for c in row)

    def is_square(self) -> bool:
        return self.n_rows == self.n_cols

    def cells(self) -> tuple[int, ...]:
        """Counts flattened row-major."""
        return tuple(c for row in self.counts for c in row)

    def __str__(self) -> str:
        return "[" + "; ".join(" ".join(str(c) for c in row) for row in self.counts) + "]"


def table_from_counts(rows: Sequence[Sequence[int]]) -> ContingencyTable:
    """Build a table from a nested sequence of counts, validating as it goes."""
    return ContingencyTable(tuple(tuple(row) for row in rows))


def table_from_labels(
    x: Sequence,
    y: Sequence,
    n_rows: int | None = None,
    n_cols: int | None = None,
) -> ContingencyTable:
    """Cross-tabulate two equal-length label vectors.

    Labels map to category indices in first-appearance order. Passing
    ``n_rows`` / ``n_cols`` pads with empty categories beyond those observed
    (useful when the category space is known to be larger than the sample).
    """
    if len(x) != len(y):
        raise InputError(
            f"label vectors differ in length: {len(x)} vs {len(y)}"
        )
    if len(x) == 0:
        raise InputError("label vectors are empty")
    x_levels: dict = {}
    y_levels: dict = {}
    for value in x:
        x_levels.setdefault(value, len(x_levels))
    for value in y:
        y_levels.setdefault(value, len(y_levels))
    n_r = len(x_levels) if n_rows is None else n_rows
    n_c = len(y_levels) if n_cols is None else n_cols
    if n_r < len(x_levels):
        raise InputError(
            f"n_rows={n_r} is smaller than the {len(x_levels)} observed row labels"
        )
    if n_c < len(y_levels):
        raise InputError(
            f"n_cols={n_c} is smaller than the {len(y_levels)} observed column labels"
        )
    grid = [[0] * n_c for _ in range(n_r)]
    for a, b in zip(x, y):
        grid[x_levels[a]][y_levels[b]] += 1
    return ContingencyTable(
        tuple(tuple(row) for row in grid),
        labels_x=tuple(x_levels),
        labels_y=tuple(y_levels),
    )


def toy_table(u1: int, n: int) -> ContingencyTable:
    """Single-column, two-row table [[u1], [n - u1]].

    The degenerate second labelling (everything in one column) makes the
    first row count the only free statistic; the toy indices read it off.
    """
    if not isinstance(u1, int) or not isinstance(n, int):
        raise InputError("u1 and n must be integers")
    if n < 1:
        raise InputError(f"n must be at least 1, got {n}")
    if not 0 <= u1 <= n:
        raise InputError(f"u1 must lie in [0, {n}], got {u1}")
    return ContingencyTable(((u1,), (n - u1,)))


@dataclass(frozen=True)
class PairTable:
    """2x2 cross-classification of the C(N,2) observation pairs.

    Each unordered pair of observations either shares a row category or not,
    and shares a column category or not. All four cells are exact integers.
    """

    same_same: int
    same_diff: int
    diff_same: int
    diff_diff: int

    @property
    def total_pairs(self) -> int:
        return self.same_same + self.same_diff + self.diff_same + self.diff_diff


def _pairs(w: int) -> int:
    return w * (w - 1) // 2


def pair_table(t: ContingencyTable) -> PairTable:
    """Summarize a table at the pair level. Requires N >= 2."""
    n = t.total
    if n < 2:
        raise DomainError(f"pair summary needs at least 2 observations, got {n}")
    joint = sum(_pairs(c) for c in t.cells())
    rows = sum(_pairs(r) for r in t.row_margins)
    cols = sum(_pairs(c) for c in t.col_margins)
    return PairTable(
        same_same=joint,
        same_diff=rows - joint,
        diff_same=cols - joint,
        diff_diff=_pairs(n) - rows - cols + joint,
    )


class TableSet:
    """Restartable lazy collection of tables sharing a grand total.

    ``count`` is the exact number of members when cheaply known, else None;
    in either case iteration enforces ``budget`` and raises ResourceError
    rather than yield past it.
    """

    def __init__(
        self,
        factory: Callable[[], Iterator[ContingencyTable]],
        count: int | None,
        description: str,
        budget: int | None = None,
    ) -> None:
        self._factory = factory
        self.count = count
        self.description = description
        self.budget = DEFAULT_ENUMERATION_BUDGET if budget is None else budget
        if count is not None and count > self.budget:
            raise ResourceError(
                f"{description}: {count} tables exceeds enumeration budget "
                f"of {self.budget}"
            )

    def __iter__(self) -> Iterator[ContingencyTable]:
        yielded = 0
        for t in self._factory():
            yielded += 1
            if yielded > self.budget:
                raise ResourceError(
                    f"{self.description}: enumeration budget of {self.budget} "
                    "tables exceeded"
                )
            yield t
    def __repr__(self) -> str:
        size = "?" if self.count is None else str(self.count)
        return f"TableSet({self.description}, count={size})"


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    # weak compositions in ascending lexicographic order
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _bounded_compositions(
    total: int, bounds: tuple[int, ...]
) -> Iterator[tuple[int, ...]]:
    # weak compositions with per-part upper bounds, ascending lexicographic
    if len(bounds) == 1:
        if total <= bounds[0]:
            yield (total,)
        return
    for first in range(min(total, bounds[0]) + 1):
        for rest in _bounded_compositions(total - first, bounds[1:]):
            yield (first,) + rest


def domain_size(total: int, n_rows: int, n_cols: int) -> int:
    """Number of I x J tables with the given grand total (stars and bars)."""
    k = n_rows * n_cols
    return math.comb(total + k - 1, k - 1)


def enumerate_domain(
    total: int,
    n_rows: int,
    n_cols: int,
    budget: int | None = None,
) -> TableSet:
    """All I x J tables with grand total N, ascending row-major cell order."""
    if total < 1 or n_rows < 1 or n_cols < 1:
        raise InputError("total, n_rows and n_cols must all be positive")

    def factory() -> Iterator[ContingencyTable]:
        for flat in _compositions(total, n_rows * n_cols):
            counts = tuple(
                flat[i * n_cols : (i + 1) * n_cols] for i in range(n_rows)
            )
            yield ContingencyTable(counts)

    return TableSet(
        factory,
        domain_size(total, n_rows, n_cols),
        f"domain({total}, {n_rows}x{n_cols})",
        budget,
    )


def enumerate_restricted_domain(
    total: int,
    n_rows: int,
    n_cols: int,
    allowed: Sequence[tuple[int, int]],
    budget: int | None = None,
) -> TableSet:
    """Tables with grand total N whose mass sits only on the allowed cells.

    Used for the supports of cell-probability models where some cells carry
    probability zero.
    """
    allowed = sorted(set(allowed))
    if not allowed:
        raise InputError("allowed cell set is empty")
    for (i, j) in allowed:
        if not (0 <= i < n_rows and 0 <= j < n_cols):
            raise InputError(f"allowed cell ({i},{j}) is outside the {n_rows}x{n_cols} grid")
    k = len(allowed)

    def factory() -> Iterator[ContingencyTable]:
        for flat in _compositions(total, k):
            grid = [[0] * n_cols for _ in range(n_rows)]
            for (i, j), value in zip(allowed, flat):
                grid[i][j] = value
            yield ContingencyTable(tuple(tuple(row) for row in grid))

    return TableSet(
        factory,
        math.comb(total + k - 1, k - 1),
        f"restricted-domain({total}, {n_rows}x{n_cols}, {k} cells)",
        budget,
    )


@lru_cache(maxsize=None)
def _count_fixed_margins(rows: tuple[int, ...], cols: tuple[int, ...]) -> int:
    if not rows:
        return 1 if all(c == 0 for c in cols) else 0
    total = 0
    for comp in _bounded_compositions(rows[0], cols):
        remaining = tuple(c - x for c, x in zip(cols, comp))
        total += _count_fixed_margins(rows[1:], remaining)
    return total


# DP state space for margin counting is bounded by prod(v_j + 1); beyond this
# give up on cheap counting and let callers fall back to sampling.
_COUNT_STATE_LIMIT = 2_000_000


def count_fixed_margins(
    row_margins: Sequence[int], col_margins: Sequence[int]
) -> int | None:
    """Number of tables with the given margins, or None when counting would
    itself blow the budget."""
    u = tuple(row_margins)
    v = tuple(col_margins)
    if sum(u) != sum(v):
        raise InputError(
            f"margins disagree on the total: sum(rows)={sum(u)}, sum(cols)={sum(v)}"
        )
    states = 1
    for c in v:
        states *= min(c, sum(u)) + 1
        if states > _COUNT_STATE_LIMIT:
            return None
    return _count_fixed_margins(u, v)


def enumerate_fixed_margins(
    row_margins: Sequence[int],
    col_margins: Sequence[int],
    budget: int | None = None,
) -> TableSet:
    """All tables with the given row and column margins, lexicographic order."""
    u = tuple(row_margins)
    v = tuple(col_margins)
    if any(m < 0 for m in u) or any(m < 0 for m in v):
        raise InputError("margins must be nonnegative")
    if sum(u) != sum(v):
        raise InputError(
            f"margins disagree on the total: sum(rows)={sum(u)}, sum(cols)={sum(v)}"
        )
    if sum(u) < 1:
        raise InputError("margins must describe at least one observation")

    def rows_from(
        remaining_rows: tuple[int, ...], remaining_cols: tuple[int, ...]
    ) -> Iterator[tuple[tuple[int, ...], ...]]:
        if not remaining_rows:
            yield ()
            return
        for comp in _bounded_compositions(remaining_rows[0], remaining_cols):
            rest = tuple(c - x for c, x in zip(remaining_cols, comp))
            for tail in rows_from(remaining_rows[1:], rest):
                yield (comp,) + tail

    def factory() -> Iterator[ContingencyTable]:
        for counts in rows_from(u, v):
            yield ContingencyTable(counts)

    return TableSet(
        factory,
        count_fixed_margins(u, v),
        f"fixed-margins({u}, {v})",
        budget,
    )


def _parse_count(text: str, row: int, col: int) -> int:
    s = text.strip()
    try:
        return int(s)
    except ValueError:
        raise InputError(
            f"cell ({row},{col}) is not an integer count: {text!r}"
        ) from None


def _read_rows(path: str) -> list[list[str]]:
    try:
        with open(path, newline="") as fh:
            return [r for r in csv.reader(fh) if r and any(f.strip() for f in r)]
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None


def read_table_csv(path: str, header: bool = False) -> ContingencyTable:
    """Read a count matrix from a delimited file. No header by default."""
    rows = _read_rows(path)
    if header and rows:
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    counts = []
    for i, row in enumerate(rows, start=1):
        counts.append(
            tuple(_parse_count(cell, i, j) for j, cell in enumerate(row, start=1))
        )
    widths = {len(r) for r in counts}
    if len(widths) != 1:
        raise InputError(
            f"{path}: ragged rows, widths {sorted(widths)}"
        )
    return table_from_counts(counts)


def read_labels_csv(path: str, header: bool = False) -> ContingencyTable:
    """Read a two-column label file and cross-tabulate it."""
    rows = _read_rows(path)
    if header and rows:
        rows = rows[1:]
    if not rows:
        raise InputError(f"{path}: no data rows")
    x, y = [], []
    for i, row in enumerate(rows, start=1):
        if len(row) != 2:
            raise InputError(
                f"{path}: row {i} has {len(row)} fields, expected 2 (x,y)"
            )
        x.append(row[0].strip())
        y.append(row[1].strip())
    return table_from_labels(x, y)
