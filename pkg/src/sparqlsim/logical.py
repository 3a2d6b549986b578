"""Logical join trees and query-shape classification.

The logical plan fixes the grouping of triple patterns into n-ary joins;
physical strategies then decide per join whether to partition or broadcast.

Grouping rule: process each join variable once they are "complete", i.e. in
ascending order of the last (textual) pattern that mentions them, breaking
ties by first mention and then by variable order. A variable's join step
collects every pending subtree and every not-yet-consumed pattern containing
it. Variables fully contained inside an existing subtree add no step. For a
connected pattern set this always terminates in a single tree, and it yields
the natural nesting for hierarchies: satellite groups close before the
variable that links them to the center.

The hash-key set of a join step is the full intersection of its children's
variable sets (always nonempty and containing the grouping variable), so
partitioned execution can co-locate on every shared variable at once.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Sequence, Union

from .errors import CartesianProductError
from .terms import Term, TriplePattern, pattern_vars


@dataclass(frozen=True, slots=True)
class Leaf:
    """One triple pattern, by textual position in the query."""

    index: int
    pattern: TriplePattern

    @property
    def vars(self) -> frozenset[Term]:
        return pattern_vars(self.pattern)

    @property
    def label(self) -> str:
        return f"t{self.index + 1}"

    @property
    def first_index(self) -> int:
        return self.index


@dataclass(frozen=True, slots=True)
class JoinNode:
    """An n-ary natural join of two or more subplans.

    ``var`` is the grouping variable that created the step (None for an
    explicit cross product); ``on`` is the hash-key set, the intersection of
    all children's variable sets (empty only for cross products).
    """

    var: Term | None
    on: frozenset[Term]
    children: tuple[Union[Leaf, "JoinNode"], ...]
    cross: bool = False

    def __post_init__(self):
        if len(self.children) < 2:
            raise ValueError("a join needs at least two children")
        if self.cross:
            if self.on or self.var is not None:
                raise ValueError("a cross product has no join variables")
        elif not self.on:
            raise ValueError("a non-cross join needs a nonempty variable set")

    @property
    def vars(self) -> frozenset[Term]:
        out: set[Term] = set()
        for child in self.children:
            out |= child.vars
        return frozenset(out)

    @property
    def first_index(self) -> int:
        return min(child.first_index for child in self.children)


LogicalNode = Union[Leaf, JoinNode]


def join_variables(patterns: Sequence[TriplePattern]) -> dict[Term, list[int]]:
    """Variables occurring in at least two patterns, with the (sorted)
    indices of the patterns mentioning them."""
    mentions: dict[Term, list[int]] = {}
    for i, p in enumerate(patterns):
        for v in sorted(pattern_vars(p)):
            mentions.setdefault(v, []).append(i)
    return {v: idxs for v, idxs in mentions.items() if len(idxs) >= 2}


def connected_components(patterns: Sequence[TriplePattern]) -> list[list[int]]:
    """Components of the variable-sharing graph, each sorted by pattern
    index, listed by their smallest member. Ground patterns are singleton
    components."""
    n = len(patterns)
    parent = list(range(n))

    def find(a: int) -> int:
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for idxs in join_variables(patterns).values():
        head = idxs[0]
        for other in idxs[1:]:
            union(head, other)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [groups[root] for root in sorted(groups)]


def _grouping_order(patterns: Sequence[TriplePattern]) -> list[tuple[Term, list[int]]]:
    jvars = join_variables(patterns)
    return sorted(jvars.items(), key=lambda item: (item[1][-1], item[1][0], item[0]))


def _build_component(patterns: Sequence[TriplePattern], members: list[int]) -> LogicalNode:
    if len(members) == 1:
        i = members[0]
        return Leaf(i, patterns[i])

    member_set = set(members)
    pending: list[LogicalNode] = []
    unconsumed = set(members)

    for v, mention_idxs in _grouping_order(patterns):
        if mention_idxs[0] not in member_set:
            continue
        children: list[LogicalNode] = [t for t in pending if v in t.vars]
        leaf_idxs = [i for i in mention_idxs if i in unconsumed]
        children.extend(Leaf(i, patterns[i]) for i in leaf_idxs)
        if len(children) < 2:
            # Variable already closed inside a single subtree.
            continue
        on = children[0].vars
        for child in children[1:]:
            on = on & child.vars
        node = JoinNode(var=v, on=on, children=tuple(children))
        pending = [t for t in pending if v not in t.vars]
        pending.append(node)
        unconsumed.difference_update(leaf_idxs)

    if len(pending) != 1 or unconsumed:
        raise AssertionError("connected component did not reduce to one tree")
    return pending[0]


def build_logical(patterns: Sequence[TriplePattern], allow_cross: bool = False) -> LogicalNode:
    """Build the canonical logical join tree for a pattern list.

    Disconnected pattern sets raise :class:`CartesianProductError` unless
    cross products are allowed, in which case the component trees (ordered by
    first pattern index) are combined under a single cross-product join.
    """
    if not patterns:
        raise ValueError("cannot plan an empty pattern list")
    components = connected_components(patterns)
    if len(components) > 1 and not allow_cross:
        raise CartesianProductError(len(components))
    trees = [_build_component(patterns, members) for members in components]
    if len(trees) == 1:
        return trees[0]
    return JoinNode(var=None, on=frozenset(), children=tuple(trees), cross=True)


def iter_joins(node: LogicalNode) -> list[JoinNode]:
    """All join nodes of a tree, children before parents."""
    out: list[JoinNode] = []

    def walk(n: LogicalNode) -> None:
        if isinstance(n, JoinNode):
            for child in n.children:
                walk(child)
            out.append(n)

    walk(node)
    return out


class Shape(Enum):
    STAR = "star"
    CHAIN = "chain"
    SNOWFLAKE = "snowflake"
    COMPLEX = "complex"


@dataclass(frozen=True, slots=True)
class ShapeInfo:
    shape: Shape
    center: Term | None = None
    # For stars: "subject" / "object" / "mixed", by where the center sits.
    orientation: str | None = None


def _positions_of(term: Term, pattern: TriplePattern) -> list[int]:
    return [pos for pos, t in enumerate(pattern.positions()) if t == term]


def _entity_positions(term: Term, pattern: TriplePattern) -> list[int]:
    """Positions of ``term`` restricted to subject/object."""
    return [pos for pos in _positions_of(term, pattern) if pos != 1]


def _star_center(patterns: Sequence[TriplePattern],
                 used: frozenset[Term] = frozenset()) -> Term | None:
    """Center of a star: an unused variable occurring at subject or object in
    every pattern, with every other variable local to a single pattern."""
    common = pattern_vars(patterns[0])
    for p in patterns[1:]:
        common = common & pattern_vars(p)
    occurrences: dict[Term, int] = {}
    for p in patterns:
        for v in pattern_vars(p):
            occurrences[v] = occurrences.get(v, 0) + 1
    for center in sorted(common):
        if center in used:
            continue
        if not all(_entity_positions(center, p) for p in patterns):
            continue
        if all(count == 1 for v, count in occurrences.items() if v != center):
            return center
    return None


def _star_orientation(center: Term, patterns: Sequence[TriplePattern]) -> str:
    at_subject = all(center == p.s for p in patterns)
    at_object = all(center == p.o for p in patterns)
    if at_subject and not at_object:
        return "subject"
    if at_object and not at_subject:
        return "object"
    return "mixed"


def _is_chain(patterns: Sequence[TriplePattern]) -> bool:
    """Path check: the pattern adjacency graph is a simple path whose links
    are single distinct variables sitting at subject/object on both sides."""
    n = len(patterns)
    if n < 2:
        return False
    var_sets = [pattern_vars(p) for p in patterns]
    adj: list[list[int]] = [[] for _ in range(n)]
    links: dict[tuple[int, int], frozenset[Term]] = {}
    for i in range(n):
        for j in range(i + 1, n):
            shared = var_sets[i] & var_sets[j]
            if shared:
                adj[i].append(j)
                adj[j].append(i)
                links[(i, j)] = shared

    degrees = [len(a) for a in adj]
    if sorted(degrees) != [1, 1] + [2] * (n - 2):
        return False
    if len(links) != n - 1:
        return False

    link_vars: list[Term] = []
    for (i, j), shared in links.items():
        if len(shared) != 1:
            return False
        (v,) = shared
        if not (_entity_positions(v, patterns[i]) and _entity_positions(v, patterns[j])):
            return False
        link_vars.append(v)
    if len(set(link_vars)) != len(link_vars):
        return False

    # Degree sequence plus edge count rules out cycles only if connected.
    seen = {0}
    stack = [0]
    while stack:
        for nxt in adj[stack.pop()]:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return len(seen) == n


def _peel_set(patterns: Sequence[TriplePattern], remaining: frozenset[int],
              center: Term) -> frozenset[int]:
    """Satellite-star arm for ``center``: remaining patterns that hold the
    center at subject/object and whose other variables occur nowhere else
    among the remaining patterns."""
    counts: dict[Term, int] = {}
    for i in remaining:
        for v in pattern_vars(patterns[i]):
            counts[v] = counts.get(v, 0) + 1
    arm = []
    for i in remaining:
        p = patterns[i]
        if not _entity_positions(center, p):
            continue
        if center not in pattern_vars(p):
            continue
        if all(counts[v] == 1 for v in pattern_vars(p) if v != center):
            arm.append(i)
    return frozenset(arm)


def _is_snowflake(patterns: Sequence[TriplePattern]) -> bool:
    """Snowflake: repeatedly peel satellite star arms off the outside until a
    central star of at least two patterns remains. Peel choices are searched
    with memoized backtracking, so arm and center roles never depend on a
    lucky greedy order."""
    all_idx = frozenset(range(len(patterns)))
    memo: dict[tuple[frozenset[int], frozenset[Term]], bool] = {}

    def solve(remaining: frozenset[int], used: frozenset[Term]) -> bool:
        key = (remaining, used)
        hit = memo.get(key)
        if hit is not None:
            return hit
        subset = [patterns[i] for i in sorted(remaining)]
        if len(subset) >= 2 and _star_center(subset, used) is not None:
            memo[key] = True
            return True
        result = False
        rest_vars: set[Term] = set()
        for i in remaining:
            rest_vars |= pattern_vars(patterns[i])
        for center in sorted(v for v in rest_vars if v not in used):
            arm = _peel_set(patterns, remaining, center)
            if not arm or arm == remaining:
                continue
            outside = remaining - arm
            if not any(center in pattern_vars(patterns[i]) for i in outside):
                continue
            if solve(outside, used | {center}):
                result = True
                break
        memo[key] = result
        return result

    return solve(all_idx, frozenset())


def classify_shape(patterns: Sequence[TriplePattern]) -> ShapeInfo:
    """Classify a connected pattern list, most specific shape first:
    star, then chain, then snowflake, then complex."""
    if not patterns:
        raise ValueError("cannot classify an empty pattern list")

    if len(patterns) == 1:
        p = patterns[0]
        entity_vars = sorted(v for v in pattern_vars(p) if _entity_positions(v, p))
        if entity_vars:
            center = entity_vars[0]
            return ShapeInfo(Shape.STAR, center, _star_orientation(center, patterns))
        return ShapeInfo(Shape.COMPLEX)

    center = _star_center(patterns)
    if center is not None:
        return ShapeInfo(Shape.STAR, center, _star_orientation(center, patterns))
    if _is_chain(patterns):
        return ShapeInfo(Shape.CHAIN)
    if _is_snowflake(patterns):
        return ShapeInfo(Shape.SNOWFLAKE)
    return ShapeInfo(Shape.COMPLEX)
