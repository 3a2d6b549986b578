"""Single-node reference evaluation, used to verify distributed results.

A deliberately simple nested-loop evaluator over a plain triple list, with
bag semantics. Patterns are reordered so each one shares a variable with the
rows built so far whenever possible, which keeps intermediates small without
changing the result multiset. A row budget guards against accidental
cross-product blowups in generated test data.
"""

from collections import Counter
from typing import Iterable, Sequence

from .errors import ResultSizeLimitError
from .terms import (
    BindingRow, EMPTY_ROW, Term, Triple, TriplePattern, pattern_vars,
)

DEFAULT_ROW_LIMIT = 1_000_000


def _match(pattern: TriplePattern, triple: Triple, row: BindingRow) -> BindingRow | None:
    new: dict[Term, Term] = {}
    for pos in range(3):
        want = pattern[pos]
        got = triple[pos]
        if want.is_variable:
            bound = row.get(want)
            if bound is None:
                bound = new.get(want)
            if bound is None:
                new[want] = got
            elif bound != got:
                return None
        elif want != got:
            return None
    if not new:
        return row
    merged = dict(row.items)
    merged.update(new)
    return BindingRow(tuple(sorted(merged.items())))


def _evaluation_order(patterns: Sequence[TriplePattern]) -> list[int]:
    order: list[int] = []
    bound: set[Term] = set()
    remaining = list(range(len(patterns)))
    while remaining:
        pick = next((i for i in remaining if pattern_vars(patterns[i]) & bound),
                    remaining[0])
        remaining.remove(pick)
        order.append(pick)
        bound |= pattern_vars(patterns[pick])
    return order


def oracle_eval(patterns: Sequence[TriplePattern], triples: Sequence[Triple],
                select: Sequence[Term] | None = None,
                limit: int = DEFAULT_ROW_LIMIT) -> list[BindingRow]:
    """Evaluate a basic graph pattern over a triple list, bag semantics."""
    if not patterns:
        raise ValueError("cannot evaluate an empty pattern list")
    rows: list[BindingRow] = [EMPTY_ROW]
    for idx in _evaluation_order(patterns):
        pattern = patterns[idx]
        out: list[BindingRow] = []
        for row in rows:
            for triple in triples:
                extended = _match(pattern, triple, row)
                if extended is not None:
                    out.append(extended)
                    if len(out) > limit:
                        raise ResultSizeLimitError(limit)
        rows = out
        if not rows:
            break
    if select is None:
        return rows
    select_tuple = tuple(select)
    projected = []
    for row in rows:
        items = tuple(sorted((v, t) for v, t in row.items if v in select_tuple))
        projected.append(BindingRow(items))
    return projected


def as_multiset(rows: Iterable[BindingRow]) -> Counter:
    """Rows as a multiset, for order-insensitive comparison."""
    return Counter(rows)
