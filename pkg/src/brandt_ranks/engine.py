"""Generic finite-semigroup machinery over an indexed Cayley table.

A FiniteSemigroup is an immutable label list plus the full addition table
as an m x m matrix of element indices. Subsets of elements travel as
IndexSet values backed by int bitmasks, so closure and search loops stay
bit-parallel. Everything here is pure and safe to share between threads.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Callable, Iterable, Iterator, Literal, Sequence

import numpy as np

from .errors import (
    ClosureViolationError,
    InvalidParameterError,
    TableParseError,
    TableValidationError,
)

EXHAUSTIVE_ASSOC_LIMIT = 256
SAMPLED_TRIPLES = 1_000_000


def iter_bits(bits: int) -> Iterator[int]:
    """Yield the set bit positions of ``bits`` in ascending order."""
    while bits:
        low = bits & -bits
        yield low.bit_length() - 1
        bits ^= low


class IndexSet:
    """A subset of [0, m) supporting size, union, insert and ordered iteration."""

    __slots__ = ("m", "bits")

    def __init__(self, m: int, indices: Iterable[int] = ()):
        if m < 0:
            raise InvalidParameterError("universe size must be nonnegative")
        self.m = m
        self.bits = 0
        for i in indices:
            self.add(i)

    @classmethod
    def from_bits(cls, m: int, bits: int) -> "IndexSet":
        if bits < 0 or bits >> m:
            raise InvalidParameterError("bitmask exceeds universe size")
        out = cls(m)
        out.bits = bits
        return out

    def add(self, i: int) -> None:
        if not 0 <= i < self.m:
            raise InvalidParameterError(f"index {i} out of range [0, {self.m})")
        self.bits |= 1 << i

    def union(self, other: "IndexSet") -> "IndexSet":
        if not isinstance(other, IndexSet) or other.m != self.m:
            raise InvalidParameterError("universe size mismatch in union")
        return IndexSet.from_bits(self.m, self.bits | other.bits)

    __or__ = union

    def copy(self) -> "IndexSet":
        return IndexSet.from_bits(self.m, self.bits)

    def __contains__(self, i: int) -> bool:
        return 0 <= i < self.m and (self.bits >> i) & 1 == 1

    def __iter__(self) -> Iterator[int]:
        return iter_bits(self.bits)

    def __len__(self) -> int:
        return self.bits.bit_count()

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, IndexSet) and other.m == self.m and other.bits == self.bits
        )

    def __hash__(self) -> int:
        return hash((self.m, self.bits))

    def __repr__(self) -> str:
        return f"IndexSet(m={self.m}, indices={list(self)})"


def _associativity_failure(table: np.ndarray, m: int) -> tuple[int, int, int] | None:
    """Return a violating triple (a, b, c), or None if the table looks associative.

    Exhaustive for m <= EXHAUSTIVE_ASSOC_LIMIT; above that a fixed-seed sample
    of SAMPLED_TRIPLES random triples is checked instead.
    """
    if m <= EXHAUSTIVE_ASSOC_LIMIT:
        for a in range(m):
            left = table[table[a]]  # (a+b)+c over all b, c
            right = table[a][table]  # a+(b+c)
            if not np.array_equal(left, right):
                b, c = np.argwhere(left != right)[0]
                return a, int(b), int(c)
        return None
    rng = np.random.default_rng(0)
    chunk = 250_000
    for _ in range(SAMPLED_TRIPLES // chunk):
        a, b, c = rng.integers(0, m, size=(3, chunk))
        left = table[table[a, b], c]
        right = table[a, table[b, c]]
        if not np.array_equal(left, right):
            k = int(np.flatnonzero(left != right)[0])
            return int(a[k]), int(b[k]), int(c[k])
    return None


class FiniteSemigroup:
    """An indexed element list with labels plus its full Cayley table.

    Associativity is validated at construction (exhaustively for small
    tables, by seeded sampling above EXHAUSTIVE_ASSOC_LIMIT elements).
    Instances are immutable after construction.
    """

    def __init__(self, labels, table, n: int | None = None, elements=None):
        labels = tuple(str(x) for x in labels)
        m = len(labels)
        if m == 0:
            raise TableValidationError("empty element list")
        if len(set(labels)) != m:
            raise TableValidationError("labels must be distinct")
        try:
            arr = np.asarray(table)
            if not np.issubdtype(arr.dtype, np.integer):
                raise TableValidationError("table entries must be integers")
            arr = arr.astype(np.int32)
        except TableValidationError:
            raise
        except Exception:
            raise TableValidationError("table must be a square integer matrix") from None
        if arr.shape != (m, m):
            raise TableValidationError(
                f"table shape {arr.shape} does not match {m} labels"
            )
        if int(arr.min()) < 0 or int(arr.max()) >= m:
            raise TableValidationError("table entries must be element indices in [0, m)")
        bad = _associativity_failure(arr, m)
        if bad is not None:
            a, b, c = bad
            raise TableValidationError(
                f"associativity fails at ({labels[a]}, {labels[b]}, {labels[c]})"
            )
        arr.setflags(write=False)
        self.labels = labels
        self.table = arr
        self.n = n
        self.elements = tuple(elements) if elements is not None else None
        self._rows: list[list[int]] | None = None

    @property
    def m(self) -> int:
        return len(self.labels)

    @property
    def rows(self) -> list[list[int]]:
        """The table as plain Python lists; cached, for tight search loops."""
        if self._rows is None:
            self._rows = self.table.tolist()
        return self._rows

    @classmethod
    def from_elements(
        cls,
        elements: Sequence,
        add_fn: Callable,
        labels: Sequence[str] | None = None,
        n: int | None = None,
    ) -> "FiniteSemigroup":
        """Build the Cayley table of ``elements`` under ``add_fn``.

        Raises ClosureViolationError naming the offending pair if some sum
        falls outside the element list.
        """
        elements = list(elements)
        if not elements:
            raise InvalidParameterError("element list must be nonempty")
        lab = [str(e) for e in elements] if labels is None else [str(s) for s in labels]
        index: dict = {}
        for i, e in enumerate(elements):
            if e in index:
                raise InvalidParameterError(f"duplicate element {lab[i]!r}")
            index[e] = i
        rows_py = []
        get = index.get
        for i, a in enumerate(elements):
            row = []
            append = row.append
            for j, b in enumerate(elements):
                k = get(add_fn(a, b))
                if k is None:
                    raise ClosureViolationError(lab[i], lab[j])
                append(k)
            rows_py.append(row)
        return cls(lab, rows_py, n=n, elements=elements)

    def label_list(self, indices: Iterable[int]) -> list[str]:
        return [self.labels[i] for i in indices]

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise InvalidParameterError(f"unknown element label {label!r}") from None

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FiniteSemigroup)
            and self.labels == other.labels
            and self.n == other.n
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"FiniteSemigroup(m={self.m}, n={self.n})"


# --- closure and generation ------------------------------------------------


def extend_closure(rows: list[list[int]], bits: int, elems: list[int], x: int) -> int:
    """Absorb element ``x`` into a closed set given as (bits, member list).

    ``elems`` must list exactly the members of ``bits`` and is mutated by
    appending the newly reachable elements; the updated bitmask is returned.
    Callers that need rollback truncate ``elems`` back to its prior length.
    """
    if bits >> x & 1:
        return bits
    bits |= 1 << x
    elems.append(x)
    stack = [x]
    pop = stack.pop
    push = stack.append
    add = elems.append
    while stack:
        a = pop()
        ra = rows[a]
        for b in elems:
            c = ra[b]
            if not bits >> c & 1:
                bits |= 1 << c
                add(c)
                push(c)
            c = rows[b][a]
            if not bits >> c & 1:
                bits |= 1 << c
                add(c)
                push(c)
    return bits


def closure_bits(rows: list[list[int]], seed_bits: int) -> int:
    """Bitmask of the subsemigroup generated by ``seed_bits`` (empty -> empty)."""
    bits = 0
    elems: list[int] = []
    for x in iter_bits(seed_bits):
        bits = extend_closure(rows, bits, elems, x)
    return bits


def _coerce_bits(sg: FiniteSemigroup, subset) -> int:
    if isinstance(subset, IndexSet):
        if subset.m != sg.m:
            raise InvalidParameterError("IndexSet universe does not match semigroup")
        return subset.bits
    bits = 0
    for i in subset:
        if not 0 <= int(i) < sg.m:
            raise InvalidParameterError(f"index {i} out of range [0, {sg.m})")
        bits |= 1 << int(i)
    return bits


def closure(sg: FiniteSemigroup, subset) -> IndexSet:
    """Least superset of ``subset`` closed under the table; empty stays empty."""
    return IndexSet.from_bits(sg.m, closure_bits(sg.rows, _coerce_bits(sg, subset)))


def is_generating(sg: FiniteSemigroup, subset) -> bool:
    return closure_bits(sg.rows, _coerce_bits(sg, subset)) == (1 << sg.m) - 1


def is_independent(sg: FiniteSemigroup, subset) -> bool:
    """True iff no member lies in the subsemigroup generated by the others."""
    bits = _coerce_bits(sg, subset)
    if bits == 0:
        raise InvalidParameterError("independence is defined for nonempty subsets")
    rows = sg.rows
    for a in iter_bits(bits):
        if closure_bits(rows, bits & ~(1 << a)) >> a & 1:
            return False
    return True


# --- structural predicates ---------------------------------------------------


def greens_classes(sg: FiniteSemigroup, side: Literal["R", "L"]) -> list[list[int]]:
    """Partition of [0, m) by equality of principal one-sided ideals.

    a R b iff {a} + aS equals {b} + bS as sets (monoid-completion semantics);
    L mirrors with left products.
    """
    if side not in ("R", "L"):
        raise InvalidParameterError("side must be 'R' or 'L'")
    rows = sg.rows
    m = sg.m
    sigs: dict[int, list[int]] = {}
    if side == "R":
        for a in range(m):
            bits = 1 << a
            for c in rows[a]:
                bits |= 1 << c
            sigs.setdefault(bits, []).append(a)
    else:
        cols: list[int] = [1 << a for a in range(m)]
        for b in range(m):
            row = rows[b]
            for a in range(m):
                cols[a] |= 1 << row[a]
        for a in range(m):
            sigs.setdefault(cols[a], []).append(a)
    return sorted(sigs.values())


def is_band(sg: FiniteSemigroup) -> bool:
    """True iff every element is idempotent."""
    rows = sg.rows
    return all(rows[a][a] == a for a in range(sg.m))


def indecomposables(sg: FiniteSemigroup) -> IndexSet:
    """Elements with no expression b + c where both b and c differ from it.

    In a one-element semigroup the single element is returned (there are no
    candidate witnesses), a documented edge case of the definition.
    """
    rows = sg.rows
    m = sg.m
    decomposable = bytearray(m)
    for a in range(m):
        row = rows[a]
        for b in range(m):
            c = row[b]
            if c != a and c != b:
                decomposable[c] = 1
    return IndexSet(m, (i for i in range(m) if not decomposable[i]))


def is_prime_subset(sg: FiniteSemigroup, subset) -> bool:
    """True iff a + b in U always forces a in U or b in U (U nonempty)."""
    bits = _coerce_bits(sg, subset)
    if bits == 0:
        raise InvalidParameterError("prime subsets are nonempty by definition")
    rows = sg.rows
    m = sg.m
    for a in range(m):
        if bits >> a & 1:
            continue
        row = rows[a]
        for b in range(m):
            if bits >> b & 1:
                continue
            if bits >> row[b] & 1:
                return False
    return True


# --- table IO ----------------------------------------------------------------


def export_table(sg: FiniteSemigroup, fmt: Literal["json", "csv"] = "json") -> str:
    """Serialize labels plus table; ``import_table`` inverts this bit-exactly."""
    if fmt == "json":
        payload = {
            "n": sg.n,
            "labels": list(sg.labels),
            "table": [[int(x) for x in row] for row in sg.rows],
        }
        return json.dumps(payload)
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(sg.labels)
        for row in sg.rows:
            writer.writerow(row)
        return buf.getvalue()
    raise InvalidParameterError(f"unknown format {fmt!r}")


def import_table(data: bytes | str) -> FiniteSemigroup:
    """Parse a JSON or CSV table file and validate it (incl. associativity)."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    if text.lstrip().startswith("{"):
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TableParseError(
                f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
            ) from None
        if not isinstance(payload, dict) or "labels" not in payload or "table" not in payload:
            raise TableParseError("JSON table needs 'labels' and 'table' keys")
        n = payload.get("n")
        if n is not None and (not isinstance(n, int) or n < 1):
            raise TableParseError("'n' must be null or a positive integer")
        labels = payload["labels"]
        table = payload["table"]
        if not isinstance(labels, list) or not isinstance(table, list):
            raise TableParseError("'labels' and 'table' must be lists")
        return FiniteSemigroup(labels, table, n=n)
    reader = csv.reader(io.StringIO(text))
    rows = [row for row in reader if row]
    if not rows:
        raise TableParseError("empty CSV input")
    labels = rows[0]
    m = len(labels)
    if len(rows) != m + 1:
        raise TableParseError(f"expected {m} table rows after the label row, got {len(rows) - 1}")
    table = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != m:
            raise TableParseError(f"line {r}: expected {m} entries, got {len(row)}")
        try:
            table.append([int(x) for x in row])
        except ValueError as exc:
            raise TableParseError(f"line {r}: {exc}") from None
    return FiniteSemigroup(labels, table, n=None)
