"""Physical plan execution and the execution trace.

The executor walks a :class:`PhysicalPlan` bottom-up over a distributed
dataset, charging every scan and transfer to a :class:`TransferLedger`. It
also appends one entry per operator to an :class:`ExecutionTrace`; the trace
carries exactly the quantities the cost model prices (input sizes, layouts,
store and shared-subset sizes), so :func:`trace_cost` can recompute a run's
modeled cost from the trace alone and be checked against the ledger.

Selections can be served from a ``leaf_cache`` so that a strategy that
already measured them (to pick broadcast targets, say) does not scan or
charge twice.
"""

from dataclasses import dataclass, field
from typing import Sequence

from .cluster import (
    Cluster, Dataset, PartitionState, Relation, TransferLedger, check_placement,
)
from .cost import (
    CostEstimate, CostParams, DEFAULT_PARAMS, brjoin_broadcast_size,
    pjoin_shuffle_size,
)
from .ops import (
    SelectionSpec, brjoin, merged_selection, pjoin, project, triple_selection,
)
from .physical import BrjoinNode, PhysicalPlan, PhysNode, PjoinNode, SelectionNode
from .terms import Term


@dataclass(frozen=True, slots=True)
class TraceEntry:
    """One executed operator, with everything the cost model needs."""

    kind: str                       # "selection" | "merged-selection" | "pjoin" | "brjoin"
    operator: str                   # ledger operator id
    inputs: tuple[tuple[int, PartitionState], ...]
    output_size: int
    output_state: PartitionState
    on: frozenset[Term] = frozenset()
    target: int | None = None       # brjoin only
    dataset_size: int = 0           # selections only
    pattern_count: int = 0          # merged selections: patterns sharing the pass
    subset_size: int = 0            # merged selections: shared subset size


@dataclass(slots=True)
class ExecutionTrace:
    entries: list[TraceEntry] = field(default_factory=list)

    def add(self, entry: TraceEntry) -> None:
        self.entries.append(entry)

    def selection_entries(self) -> list[TraceEntry]:
        return [e for e in self.entries if e.kind in ("selection", "merged-selection")]

    def join_entries(self) -> list[TraceEntry]:
        return [e for e in self.entries if e.kind in ("pjoin", "brjoin")]


def trace_cost(trace: ExecutionTrace, m: int,
               params: CostParams = DEFAULT_PARAMS) -> CostEstimate:
    """Recompute a run's modeled cost from its trace.

    With unit weights this must equal the ledger: access = tuples scanned,
    transfer = modeled shuffles plus broadcast copies.
    """
    access = 0.0
    transfer = 0.0
    for e in trace.entries:
        if e.kind == "selection":
            access += e.dataset_size
        elif e.kind == "merged-selection":
            access += e.dataset_size + e.pattern_count * e.subset_size
        elif e.kind == "pjoin":
            transfer += pjoin_shuffle_size(e.inputs, e.on)
        elif e.kind == "brjoin":
            transfer += brjoin_broadcast_size(e.inputs, e.target, m)
        else:
            raise ValueError(f"unknown trace entry kind: {e.kind}")
    return CostEstimate(access=params.theta_acc * access,
                        transfer=params.theta_comm * transfer)


def run_selection(spec: SelectionSpec, dataset: Dataset, cluster: Cluster,
                  ledger: TransferLedger, trace: ExecutionTrace | None = None,
                  validate: bool = False) -> Relation:
    """One pattern selection with ledger and trace entries."""
    rel = triple_selection(spec, dataset, cluster, ledger)
    if trace is not None:
        trace.add(TraceEntry(
            kind="selection", operator=f"sel[{spec.label}]", inputs=(),
            output_size=rel.count, output_state=rel.partition,
            dataset_size=dataset.size))
    if validate:
        check_placement(rel)
    return rel


def run_merged_selection(specs: Sequence[SelectionSpec], dataset: Dataset,
                         cluster: Cluster, ledger: TransferLedger,
                         trace: ExecutionTrace | None = None,
                         validate: bool = False) -> list[Relation]:
    """One shared-pass selection group with ledger and trace entries."""
    rels, subset = merged_selection(specs, dataset, cluster, ledger)
    if trace is not None:
        labels = ",".join(s.label for s in specs)
        trace.add(TraceEntry(
            kind="merged-selection", operator=f"merged-sel[{labels}]", inputs=(),
            output_size=sum(r.count for r in rels), output_state=rels[0].partition,
            dataset_size=dataset.size, pattern_count=len(specs), subset_size=subset))
    if validate:
        for rel in rels:
            check_placement(rel)
    return rels


class Executor:
    """Runs one physical plan over one dataset."""

    def __init__(self, dataset: Dataset, cluster: Cluster, ledger: TransferLedger,
                 trace: ExecutionTrace | None = None, validate: bool = False,
                 leaf_cache: dict[int, Relation] | None = None):
        self.dataset = dataset
        self.cluster = cluster
        self.ledger = ledger
        self.trace = trace
        self.validate = validate
        self.leaf_cache: dict[int, Relation] = dict(leaf_cache) if leaf_cache else {}
        self._join_seq = 0

    def run(self, plan: PhysicalPlan, select: Sequence[Term] | None = None) -> Relation:
        self._run_merged_groups(plan)
        result = self._execute(plan.root)
        if select is not None:
            result = project(result, select)
            if self.validate:
                check_placement(result)
        return result

    def _run_merged_groups(self, plan: PhysicalPlan) -> None:
        for group in plan.merged_groups:
            cached = [idx in self.leaf_cache for idx in group]
            if all(cached):
                continue
            if any(cached):
                raise AssertionError("merged scan group partially cached")
            specs = [SelectionSpec.compile(idx, self._pattern_of(plan.root, idx))
                     for idx in group]
            rels = run_merged_selection(specs, self.dataset, self.cluster,
                                        self.ledger, self.trace, self.validate)
            for spec, rel in zip(specs, rels):
                self.leaf_cache[spec.index] = rel

    @staticmethod
    def _pattern_of(root: PhysNode, index: int):
        for leaf in _iter_leaves(root):
            if leaf.index == index:
                return leaf.pattern
        raise KeyError(f"merged scan group references t{index + 1}, "
                       "which is not a leaf of the plan")

    def _execute(self, node: PhysNode) -> Relation:
        if isinstance(node, SelectionNode):
            rel = self.leaf_cache.get(node.index)
            if rel is None:
                spec = SelectionSpec.compile(node.index, node.pattern)
                rel = run_selection(spec, self.dataset, self.cluster, self.ledger,
                                    self.trace, self.validate)
                self.leaf_cache[node.index] = rel
            return rel

        inputs = [self._execute(child) for child in node.children]
        shapes = tuple((r.count, r.partition) for r in inputs)
        self._join_seq += 1
        if isinstance(node, PjoinNode):
            op = f"pjoin#{self._join_seq}"
            out = pjoin(node.on, inputs, self.cluster, self.ledger, op)
            entry = TraceEntry(kind="pjoin", operator=op, inputs=shapes,
                               output_size=out.count, output_state=out.partition,
                               on=node.on)
        elif isinstance(node, BrjoinNode):
            op = f"brjoin#{self._join_seq}"
            out = brjoin(node.on, inputs, node.target, self.cluster, self.ledger,
                         op, allow_empty_on=node.cross)
            entry = TraceEntry(kind="brjoin", operator=op, inputs=shapes,
                               output_size=out.count, output_state=out.partition,
                               on=node.on, target=node.target)
        else:
            raise TypeError(f"unknown plan node: {node!r}")
        if self.trace is not None:
            self.trace.add(entry)
        if self.validate:
            check_placement(out)
        return out


def _iter_leaves(node: PhysNode):
    if isinstance(node, SelectionNode):
        yield node
    else:
        for child in node.children:
            yield from _iter_leaves(child)


def execute_plan(plan: PhysicalPlan, dataset: Dataset, cluster: Cluster,
                 ledger: TransferLedger, *, select: Sequence[Term] | None = None,
                 trace: ExecutionTrace | None = None, validate: bool = False,
                 leaf_cache: dict[int, Relation] | None = None) -> Relation:
    """Convenience wrapper around :class:`Executor`."""
    return Executor(dataset, cluster, ledger, trace, validate, leaf_cache).run(plan, select)
