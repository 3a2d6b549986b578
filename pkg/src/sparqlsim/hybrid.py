"""Adaptive strategy: plan each join step from measured sizes, then run it.

The strategy evaluates all selections first (optionally sharing one store
pass), so every planning decision works with exact input sizes rather than
estimates. Joins are then chosen greedily, two inputs at a time:

* the opening pair is the connected pair with the cheapest join step,
  breaking ties toward the partitioned algorithm, then the smaller combined
  size, then textual order;
* each following step extends the running intermediate with the connected
  pattern whose cheapest join step is lowest, breaking ties by selection
  size and then textual order;
* for one step, the candidate algorithms are a partitioned join on the
  shared variables (pay for every input not already co-located) and a
  broadcast join in either direction (pay (m-1) copies of the side that
  moves, nothing if it is already replicated). Equal-cost steps prefer
  partitioned, then broadcasting the smaller side, then broadcasting the
  running intermediate.

Each chosen step executes immediately, so its real output size (not an
estimate) drives the next decision. Step costs compare modeled transfer
tuple counts directly; the communication weight scales all candidates
equally and cannot change the ranking.

Consecutive partitioned joins on the same key collapse into one n-ary node
in the reported plan. The collapsed form moves exactly the same tuples: the
running input is already keyed on the join variables, so only the newcomer
is repartitioned, stepwise or not.
"""

from dataclasses import dataclass
from typing import Sequence

from .cluster import (
    Cluster, Dataset, Relation, TransferLedger, check_placement,
)
from .errors import CartesianProductError
from .executor import (
    ExecutionTrace, TraceEntry, run_merged_selection, run_selection,
)
from .logical import connected_components
from .ops import SelectionSpec, brjoin, pjoin, project
from .physical import BrjoinNode, PhysNode, PhysicalPlan, PjoinNode, SelectionNode
from .terms import Term, TriplePattern

MERGE_MODES = ("on", "off", "auto")


@dataclass(slots=True)
class _Slot:
    """A joinable intermediate: its data, its plan subtree so far, and the
    smallest pattern index it covers (for textual tie-breaks)."""

    rel: Relation
    node: PhysNode
    first_index: int

    @property
    def size(self) -> int:
        return self.rel.count

    @property
    def schema(self) -> frozenset[Term]:
        return self.rel.schema


@dataclass(frozen=True, slots=True)
class _Option:
    """One candidate algorithm for joining a fixed (first, second) pair."""

    kind: str                  # "pjoin" | "brjoin"
    cost: int                  # modeled transfer tuples
    rank: int                  # 0 pjoin, 1 broadcast smaller side, 2 larger
    seq: int                   # enumeration order, last tie-break
    on: frozenset[Term]
    target: int | None = None  # brjoin: index into (first, second)
    cross: bool = False

    @property
    def sort_key(self) -> tuple[int, int, int]:
        return (self.cost, self.rank, self.seq)


@dataclass(frozen=True, slots=True)
class HybridRun:
    plan: PhysicalPlan
    relation: Relation
    # Number of (pair, algorithm) costings performed; stays quadratic in the
    # pattern count because each step only prices the remaining candidates.
    evaluations: int


def _step_options(first: _Slot, second: _Slot, m: int) -> list[_Option]:
    """All algorithm candidates for joining this ordered pair."""
    shared = frozenset(first.schema & second.schema)
    opts: list[_Option] = []
    seq = 0
    if shared:
        cost = 0
        for slot in (first, second):
            state = slot.rel.partition
            if state.is_keyed_on(shared) or state.is_replicated:
                continue
            cost += slot.size
        opts.append(_Option("pjoin", cost, 0, seq, shared))
        seq += 1
    cross = not shared
    for moving, target in ((first, 1), (second, 0)):
        other = second if target == 1 else first
        cost = 0 if moving.rel.partition.is_replicated else (m - 1) * moving.size
        rank = 1 if moving.size <= other.size else 2
        opts.append(_Option("brjoin", cost, rank, seq, shared,
                            target=target, cross=cross))
        seq += 1
    return opts


class _HybridPlanner:
    def __init__(self, patterns: Sequence[TriplePattern], dataset: Dataset,
                 cluster: Cluster, ledger: TransferLedger, *,
                 merge_scan: str = "auto", allow_cross: bool = False,
                 trace: ExecutionTrace | None = None, validate: bool = False):
        if merge_scan not in MERGE_MODES:
            raise ValueError(f"merge_scan must be one of {MERGE_MODES}, got {merge_scan!r}")
        self.patterns = list(patterns)
        self.dataset = dataset
        self.cluster = cluster
        self.ledger = ledger
        self.merge_scan = merge_scan
        self.allow_cross = allow_cross
        self.trace = trace
        self.validate = validate
        self.evaluations = 0
        self._join_seq = 0

    def run(self) -> tuple[PhysNode, Relation, tuple[tuple[int, ...], ...]]:
        components = connected_components(self.patterns)
        if len(components) > 1 and not self.allow_cross:
            raise CartesianProductError(len(components))

        slots, merged_groups = self._run_selections()
        results = [self._greedy_component([slots[i] for i in members])
                   for members in components]
        final = results[0]
        for nxt in results[1:]:
            final = self._execute_step(final, nxt, self._best_option(final, nxt))
        return final.node, final.rel, merged_groups

    def _run_selections(self) -> tuple[list[_Slot], tuple[tuple[int, ...], ...]]:
        specs = [SelectionSpec.compile(i, p) for i, p in enumerate(self.patterns)]
        merge = self.merge_scan in ("on", "auto") and len(specs) >= 2
        if merge:
            rels = run_merged_selection(specs, self.dataset, self.cluster,
                                        self.ledger, self.trace, self.validate)
            groups: tuple[tuple[int, ...], ...] = (tuple(s.index for s in specs),)
        else:
            rels = [run_selection(s, self.dataset, self.cluster, self.ledger,
                                  self.trace, self.validate) for s in specs]
            groups = ()
        slots = [_Slot(rel, SelectionNode(spec.index, spec.pattern), spec.index)
                 for spec, rel in zip(specs, rels)]
        return slots, groups

    def _best_option(self, first: _Slot, second: _Slot) -> _Option:
        opts = _step_options(first, second, self.cluster.m)
        self.evaluations += len(opts)
        return min(opts, key=lambda o: o.sort_key)

    def _best_start(self, remaining: list[_Slot]) -> tuple[int, int, _Option]:
        """The cheapest opening pair over all connected pairs."""
        best_pair: tuple[tuple, int, int, _Option] | None = None
        for i in range(len(remaining)):
            for j in range(i + 1, len(remaining)):
                a, b = remaining[i], remaining[j]
                if not (a.schema & b.schema):
                    continue
                first, second = sorted((a, b), key=lambda s: (s.size, s.first_index))
                opt = self._best_option(first, second)
                key = (opt.cost, opt.rank, a.size + b.size,
                       (a.first_index, b.first_index))
                if best_pair is None or key < best_pair[0]:
                    best_pair = (key, i, j, opt)
        if best_pair is None:
            raise AssertionError("connected component has no joinable pair")
        return best_pair[1], best_pair[2], best_pair[3]

    def _greedy_component(self, slots: list[_Slot]) -> _Slot:
        if len(slots) == 1:
            return slots[0]

        remaining = list(slots)
        i, j, opt = self._best_start(remaining)
        first, second = sorted((remaining[i], remaining[j]),
                               key=lambda s: (s.size, s.first_index))
        acc = self._execute_step(first, second, opt)
        del remaining[j], remaining[i]

        while remaining:
            best_ext: tuple[tuple, int, _Option] | None = None
            for k, slot in enumerate(remaining):
                if not (acc.schema & slot.schema):
                    continue
                opt = self._best_option(acc, slot)
                key = (opt.cost, slot.size, slot.first_index)
                if best_ext is None or key < best_ext[0]:
                    best_ext = (key, k, opt)
            if best_ext is None:
                raise AssertionError("connected component stalled mid-join")
            _, k, opt = best_ext
            acc = self._execute_step(acc, remaining[k], opt)
            del remaining[k]
        return acc

    def _execute_step(self, first: _Slot, second: _Slot, opt: _Option) -> _Slot:
        rels = [first.rel, second.rel]
        shapes = tuple((r.count, r.partition) for r in rels)
        self._join_seq += 1
        if opt.kind == "pjoin":
            op = f"pjoin#{self._join_seq}"
            rel = pjoin(opt.on, rels, self.cluster, self.ledger, op)
            if isinstance(first.node, PjoinNode) and first.node.on == opt.on:
                children = first.node.children + (second.node,)
            else:
                children = (first.node, second.node)
            node: PhysNode = PjoinNode(opt.on, children)
            entry = TraceEntry(kind="pjoin", operator=op, inputs=shapes,
                               output_size=rel.count, output_state=rel.partition,
                               on=opt.on)
        else:
            op = f"brjoin#{self._join_seq}"
            rel = brjoin(opt.on, rels, opt.target, self.cluster, self.ledger, op,
                         allow_empty_on=opt.cross)
            node = BrjoinNode(opt.on, (first.node, second.node), opt.target,
                              cross=opt.cross)
            entry = TraceEntry(kind="brjoin", operator=op, inputs=shapes,
                               output_size=rel.count, output_state=rel.partition,
                               on=opt.on, target=opt.target)
        if self.trace is not None:
            self.trace.add(entry)
        if self.validate:
            check_placement(rel)
        return _Slot(rel, node, min(first.first_index, second.first_index))


def plan_and_execute_hybrid(patterns: Sequence[TriplePattern], dataset: Dataset,
                            cluster: Cluster, ledger: TransferLedger, *,
                            merge_scan: str = "auto", allow_cross: bool = False,
                            select: Sequence[Term] | None = None,
                            trace: ExecutionTrace | None = None,
                            validate: bool = False) -> HybridRun:
    """Run the adaptive strategy end to end.

    Returns the executed plan (as a replayable :class:`PhysicalPlan`), the
    result relation, and the number of candidate costings performed.
    """
    planner = _HybridPlanner(patterns, dataset, cluster, ledger,
                             merge_scan=merge_scan, allow_cross=allow_cross,
                             trace=trace, validate=validate)
    root, rel, merged_groups = planner.run()
    if select is not None:
        rel = project(rel, select)
        if validate:
            check_placement(rel)
    plan = PhysicalPlan("hybrid", root, merged_groups)
    return HybridRun(plan=plan, relation=rel, evaluations=planner.evaluations)
