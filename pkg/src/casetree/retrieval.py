"""Case-tree compilation and interruptible retrieval.

The case base is compiled once into a prefix-sharing tree: each node carries
a predicate pattern ``{name, values}``, each outgoing arc a test
``[choice == v]``, and each case owns exactly one root-to-leaf branch whose
node/test labels spell out its perceptions in descending priority order.
Cases with a common high-priority prefix share nodes, which is where the
memory saving and the shared query work come from.

Retrieval scans the tree breadth first under a budget. Each arc test costs
one comparison and asks the oracle for every way the node's free generic
agents can be bound so that the tested value holds; bindings accumulate
along a branch and constrain deeper tests, and branches never share
bindings. Every case therefore has a usable partial score at any
interruption point. When pruning is on, a test contradicted under every
candidate binding abandons the branch and freezes the scores of the cases
below it; with pruning off the scan keeps walking and converges to the
offline similarity of every case.

Budget kinds: a comparison budget is enforced per test (the used count never
exceeds it); deadline and external cancellation are observed at node
boundaries, so no test is abandoned midway.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .cases import (
    GenericCase,
    Perception,
    Substitution,
    TargetCase,
    Value,
)
from .similarity import DEFAULT_PARAMS, SimilarityParams, partial_score, scored_unify


class TreeError(ValueError):
    """Raised when a case base cannot be compiled."""


class RetrievalError(RuntimeError):
    """Oracle failure during a scan; ``partial`` holds the results so far."""

    def __init__(self, message: str, partial: "RetrievalResult | None" = None):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# tree structure

@dataclass(eq=False)
class Slot:
    """Target of an arc: continuation nodes, plus ids of cases ending here."""

    nodes: list["TreeNode"] = field(default_factory=list)
    case_ids: list[str] = field(default_factory=list)


@dataclass(eq=False)
class TreeNode:
    predicate: str
    values: tuple[Value, ...]
    depth: int
    arcs: list["Arc"] = field(default_factory=list)

    @property
    def generic_labels(self) -> frozenset[str]:
        return frozenset(v.name for v in self.values if v.kind == "generic")

    def label(self) -> str:
        return f"{self.predicate}({','.join(str(v) for v in self.values)})"


@dataclass(eq=False)
class Arc:
    node: "TreeNode"
    test: bool | str
    child: Slot = field(default_factory=Slot)
    touched: list[tuple[str, int]] = field(default_factory=list)  # (case id, orig index)
    below: frozenset[str] = frozenset()


@dataclass(eq=False)
class CaseTree:
    """Immutable after build_tree; shareable across concurrent scans."""

    root: Slot
    cases: dict[str, GenericCase]
    priority: tuple[str, ...]
    paths: dict[str, tuple[Arc, ...]]

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.iter_nodes())

    @property
    def leaf_count(self) -> int:
        return sum(len(slot.case_ids) for slot in self.iter_slots())

    @property
    def depth(self) -> int:
        return max((len(path) for path in self.paths.values()), default=0)

    def iter_nodes(self) -> Iterable[TreeNode]:
        stack = list(self.root.nodes)
        while stack:
            node = stack.pop()
            yield node
            for arc in node.arcs:
                stack.extend(arc.child.nodes)

    def iter_slots(self) -> Iterable[Slot]:
        yield self.root
        for node in self.iter_nodes():
            for arc in node.arcs:
                yield arc.child

    def arc_count(self) -> int:
        return sum(len(node.arcs) for node in self.iter_nodes())

    def path_perceptions(self, case_id: str) -> tuple[Perception, ...]:
        """Read a case's perceptions back off its branch, in priority order."""
        return tuple(
            Perception(arc.node.predicate, arc.node.values, arc.test)
            for arc in self.paths[case_id]
        )


def priority_order(case: GenericCase, priority: Sequence[str]) -> list[int]:
    """Indices of the case's perceptions sorted by descending priority.

    Perceptions of the same predicate keep their declaration order.
    """
    rank = {name: i for i, name in enumerate(priority)}
    for p in case.perceptions:
        if p.name not in rank:
            raise TreeError(f"predicate {p.name!r} missing from the priority order")
    return sorted(range(len(case.perceptions)), key=lambda i: rank[case.perceptions[i].name])


def build_tree(base: Sequence[GenericCase], priority: Sequence[str]) -> CaseTree:
    """Compile the case base into the prefix-sharing tree.

    Inserts each case's perceptions in descending priority, reusing a node
    when its {predicate, values} pattern matches and an arc when its tested
    choice value matches, creating them otherwise; the branch ends in a leaf
    named by the case id.
    """
    root = Slot()
    cases: dict[str, GenericCase] = {}
    paths: dict[str, tuple[Arc, ...]] = {}

    for case in base:
        if case.id in cases:
            raise TreeError(f"duplicate case id {case.id!r}")
        cases[case.id] = case
        slot = root
        path: list[Arc] = []
        for pos, idx in enumerate(priority_order(case, priority)):
            p = case.perceptions[idx]
            node = next(
                (n for n in slot.nodes if n.predicate == p.name and n.values == p.values),
                None,
            )
            if node is None:
                node = TreeNode(p.name, p.values, depth=pos)
                slot.nodes.append(node)
            arc = next((a for a in node.arcs if a.test == p.choice), None)
            if arc is None:
                arc = Arc(node, p.choice)
                node.arcs.append(arc)
            arc.touched.append((case.id, idx))
            path.append(arc)
            slot = arc.child
        slot.case_ids.append(case.id)
        paths[case.id] = tuple(path)

    tree = CaseTree(root=root, cases=cases, priority=tuple(priority), paths=paths)
    below: dict[int, set[str]] = {}
    for case_id, path in paths.items():
        for arc in path:
            below.setdefault(id(arc), set()).add(case_id)
    for node in tree.iter_nodes():
        for arc in node.arcs:
            arc.below = frozenset(below.get(id(arc), ()))
    return tree


def perception_node_count(tree: CaseTree) -> int:
    """Predicate nodes stored by the tree (leaves excluded)."""
    return tree.node_count


def linear_perception_count(base: Sequence[GenericCase]) -> int:
    """Perceptions stored by the flat list of the same cases."""
    return sum(len(c.perceptions) for c in base)


# ---------------------------------------------------------------------------
# budgets

@dataclass(frozen=True)
class ScanBudget:
    """Interruption budget: a comparison count, a deadline, or unbounded."""

    kind: str = "unbounded"
    max_comparisons: int = 0
    seconds: float = 0.0

    def __post_init__(self):
        if self.kind not in ("unbounded", "comparisons", "deadline"):
            raise ValueError(f"unknown budget kind {self.kind!r}")
        if self.kind == "comparisons" and self.max_comparisons < 0:
            raise ValueError("comparison budget must be >= 0")
        if self.kind == "deadline" and self.seconds <= 0:
            raise ValueError("deadline must be positive")

    @classmethod
    def comparisons(cls, n: int) -> "ScanBudget":
        return cls("comparisons", max_comparisons=n)

    @classmethod
    def deadline(cls, seconds: float) -> "ScanBudget":
        return cls("deadline", seconds=seconds)

    @classmethod
    def unbounded(cls) -> "ScanBudget":
        return cls()


UNBOUNDED = ScanBudget()


# ---------------------------------------------------------------------------
# the oracle

class TargetOracle:
    """Prolog-style completion queries against one target case.

    ``completions(name, values, desired)`` returns one binding dict per way
    the pattern's generic labels can be filled so that the instantiated
    perception occurs in the target with the desired choice value. A fully
    ground pattern yields ``[{}]`` on success and ``[]`` on failure.
    """

    def __init__(self, target: TargetCase):
        self.target = target
        self._by_name: dict[str, list[Perception]] = {}
        for p in target.perceptions:
            self._by_name.setdefault(p.name, []).append(p)

    @property
    def size(self) -> int:
        return len(self.target)

    def completions(self, name: str, values: tuple[Value, ...],
                    desired: bool | str) -> list[dict[str, str]]:
        out: set[tuple[tuple[str, str], ...]] = set()
        for entry in self._by_name.get(name, ()):
            if entry.choice != desired or len(entry.values) != len(values):
                continue
            binding: dict[str, str] = {}
            ok = True
            for pv, tv in zip(values, entry.values):
                if pv.kind == "generic":
                    if tv.kind != "concrete" or binding.get(pv.name, tv.name) != tv.name:
                        ok = False
                        break
                    binding[pv.name] = tv.name
                elif pv != tv:
                    ok = False
                    break
            if ok:
                out.add(tuple(sorted(binding.items())))
        return [dict(pairs) for pairs in sorted(out)]


# ---------------------------------------------------------------------------
# results

@dataclass(frozen=True)
class CaseOutcome:
    score: float
    scanned: int
    pruned: bool
    evaluated: bool
    substitution: Substitution


@dataclass(frozen=True, eq=True)
class RetrievalResult:
    best_case: str | None
    score: float
    substitution: Substitution
    per_case: dict[str, CaseOutcome]
    tests_used: int
    elapsed_us: int = field(compare=False, default=0)

    def scores(self) -> dict[str, float]:
        return {cid: oc.score for cid, oc in self.per_case.items()}


def _argmax(per_case: dict[str, CaseOutcome], require_evaluated: bool):
    """Highest score wins; exact ties go to the lowest case id."""
    pool = [
        (cid, oc) for cid, oc in per_case.items()
        if oc.evaluated or not require_evaluated
    ]
    if not pool:
        return None, 0.0, Substitution()
    best_id = min(pool, key=lambda kv: (-kv[1].score, kv[0]))[0]
    best = per_case[best_id]
    return best_id, best.score, best.substitution


# ---------------------------------------------------------------------------
# the tree scanner

_Alt = tuple[tuple[tuple[str, str], ...], frozenset[int]]  # (sorted binding, matched positions)


def _merge(binding: tuple[tuple[str, str], ...], completion: dict[str, str]):
    """Extend a branch binding with one completion; None when inconsistent
    or when injectivity would break."""
    current = dict(binding)
    for label, cid in completion.items():
        have = current.get(label)
        if have is None:
            current[label] = cid
        elif have != cid:
            return None
    ids = list(current.values())
    if len(set(ids)) != len(ids):
        return None
    return tuple(sorted(current.items()))


def _dominance_filter(alts: list[_Alt]) -> list[_Alt]:
    """Drop alternatives that a less-constrained, better-matched one subsumes."""
    alts = sorted(set(alts), key=lambda a: (len(a[0]), a[0], sorted(a[1])))
    kept: list[_Alt] = []
    for a in alts:
        a_map, a_matched = dict(a[0]), a[1]
        dominated = False
        for b in alts:
            if b == a:
                continue
            b_map, b_matched = dict(b[0]), b[1]
            if b_matched >= a_matched and all(a_map.get(l) == c for l, c in b_map.items()):
                if b_matched > a_matched or len(b_map) < len(a_map):
                    dominated = True
                    break
        if not dominated:
            kept.append(a)
    return kept


class _ScanState:
    """Mutable bookkeeping for one scan; never shared between scans."""

    def __init__(self, tree: CaseTree, target_size: int, alpha: float):
        self.tree = tree
        self.target_size = target_size
        self.alpha = alpha
        self.score = {cid: 0.0 for cid in tree.cases}
        self.sub = {cid: Substitution() for cid in tree.cases}
        self.scanned = {cid: 0 for cid in tree.cases}
        self.pruned = {cid: False for cid in tree.cases}
        # original perception index per branch position, per case
        self.position_index: dict[str, dict[int, int]] = {cid: {} for cid in tree.cases}
        for node in tree.iter_nodes():
            for arc in node.arcs:
                for cid, orig in arc.touched:
                    self.position_index[cid][node.depth] = orig

    def update_case(self, cid: str, alts: list[_Alt], labels_at: tuple[frozenset[str], ...]):
        case = self.tree.cases[cid]
        weights = case.weights
        total = case.total_weight
        pos_index = self.position_index[cid]
        best = (self.score[cid], self.sub[cid])
        for binding, matched in alts:
            orig = sorted(pos_index[p] for p in matched)
            w = 0.0
            for i in orig:
                w += weights[i]
            value = partial_score(w, len(matched), total, self.target_size, self.alpha)
            if value > best[0]:
                best = (value, self._restricted(binding, matched, labels_at))
            elif value == best[0]:
                sub = self._restricted(binding, matched, labels_at)
                if sub < best[1]:
                    best = (value, sub)
        self.score[cid], self.sub[cid] = best

    @staticmethod
    def _restricted(binding, matched, labels_at) -> Substitution:
        used: set[str] = set()
        for p in matched:
            used.update(labels_at[p])
        return Substitution(tuple((l, c) for l, c in binding if l in used))

    def result(self, tests_used: int, elapsed_us: int, pruned_score: str) -> RetrievalResult:
        per_case = {}
        for cid in self.tree.cases:
            score = self.score[cid]
            if self.pruned[cid] and pruned_score == "zero":
                score = 0.0
            per_case[cid] = CaseOutcome(
                score=score,
                scanned=self.scanned[cid],
                pruned=self.pruned[cid],
                evaluated=True,
                substitution=self.sub[cid],
            )
        best_id, best_score, best_sub = _argmax(per_case, require_evaluated=False)
        return RetrievalResult(
            best_case=best_id,
            score=best_score,
            substitution=best_sub,
            per_case=per_case,
            tests_used=tests_used,
            elapsed_us=elapsed_us,
        )


def scan_tree(tree: CaseTree, oracle: TargetOracle,
              budget: ScanBudget = UNBOUNDED,
              params: SimilarityParams = DEFAULT_PARAMS,
              prune: bool = True,
              pruned_score: str = "frozen",
              cancel=None) -> RetrievalResult:
    """Breadth-first anytime retrieval over the case tree.

    Returns the best case under the anytime score together with every case's
    (score, scanned count, pruned flag). Pruned cases keep their frozen score
    in the final ranking unless ``pruned_score`` is "zero".
    """
    if pruned_score not in ("frozen", "zero"):
        raise ValueError(f"pruned_score must be 'frozen' or 'zero', got {pruned_score!r}")
    if oracle.size < 1:
        raise ValueError("cannot scan against an empty target")

    start = time.perf_counter()
    state = _ScanState(tree, oracle.size, params.alpha)
    tests_used = 0
    deadline_at = start + budget.seconds if budget.kind == "deadline" else None

    root_alts: list[_Alt] = [((), frozenset())]
    queue: deque[tuple[TreeNode, list[_Alt], tuple[frozenset[str], ...]]] = deque(
        (node, root_alts, ()) for node in tree.root.nodes
    )

    def make_result() -> RetrievalResult:
        elapsed = int((time.perf_counter() - start) * 1_000_000)
        return state.result(tests_used, elapsed, pruned_score)

    while queue:
        node, alts, labels_at = queue.popleft()
        if deadline_at is not None and time.perf_counter() >= deadline_at:
            return make_result()
        if cancel is not None and cancel.is_set():
            return make_result()
        child_labels = labels_at + (node.generic_labels,)
        for arc in node.arcs:
            if budget.kind == "comparisons" and tests_used + 1 > budget.max_comparisons:
                return make_result()
            tests_used += 1
            try:
                completions = oracle.completions(node.predicate, node.values, arc.test)
            except Exception as exc:  # surface with partial results attached
                raise RetrievalError(
                    f"oracle failed at {node.label()}=[{arc.test}]: {exc}",
                    partial=make_result(),
                ) from exc

            new_alts: list[_Alt] = list(alts)
            validated = False
            for binding, matched in alts:
                for completion in completions:
                    merged = _merge(binding, completion)
                    if merged is not None:
                        validated = True
                        new_alts.append((merged, matched | {node.depth}))

            if not validated and prune:
                for cid in arc.below:
                    if not state.pruned[cid]:
                        state.scanned[cid] += 1
                        state.pruned[cid] = True
                continue

            child_alts = _dominance_filter(new_alts) if validated else list(alts)
            for cid in arc.below:
                state.scanned[cid] += 1
                state.update_case(cid, child_alts, child_labels)
            for child in arc.child.nodes:
                queue.append((child, child_alts, child_labels))

    return make_result()


# ---------------------------------------------------------------------------
# the linear baseline

def scan_linear(base: Sequence[GenericCase], oracle: TargetOracle,
                budget: ScanBudget = UNBOUNDED,
                params: SimilarityParams = DEFAULT_PARAMS,
                order: Sequence[str] | None = None,
                cancel=None) -> RetrievalResult:
    """Classic flat retrieval: full unification case by case, in the given
    order. Each case costs as many comparisons as it has perceptions and is
    either fully evaluated or not reached; unreached cases rank as score 0
    and are flagged unevaluated.
    """
    by_id = {c.id: c for c in base}
    if len(by_id) != len(base):
        raise TreeError("duplicate case id in base")
    if order is None:
        order = [c.id for c in base]
    if sorted(order) != sorted(by_id):
        raise ValueError("order must be a permutation of the base's case ids")
    if oracle.size < 1 and base:
        raise ValueError("cannot scan against an empty target")

    start = time.perf_counter()
    deadline_at = start + budget.seconds if budget.kind == "deadline" else None
    per_case = {
        cid: CaseOutcome(0.0, 0, False, False, Substitution()) for cid in by_id
    }
    tests_used = 0
    for cid in order:
        case = by_id[cid]
        cost = len(case.perceptions)
        if budget.kind == "comparisons" and tests_used + cost > budget.max_comparisons:
            break
        if deadline_at is not None and time.perf_counter() >= deadline_at:
            break
        if cancel is not None and cancel.is_set():
            break
        try:
            score, sub, _ = scored_unify(case, oracle.target, params)
        except Exception as exc:
            raise RetrievalError(
                f"evaluation failed on {cid}: {exc}",
                partial=_linear_result(per_case, tests_used, start),
            ) from exc
        tests_used += cost
        per_case[cid] = CaseOutcome(score, cost, False, True, sub)

    return _linear_result(per_case, tests_used, start)


def _linear_result(per_case, tests_used, start) -> RetrievalResult:
    best_id, best_score, best_sub = _argmax(per_case, require_evaluated=True)
    return RetrievalResult(
        best_case=best_id,
        score=best_score,
        substitution=best_sub,
        per_case=dict(per_case),
        tests_used=tests_used,
        elapsed_us=int((time.perf_counter() - start) * 1_000_000),
    )
