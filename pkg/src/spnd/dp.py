"""Dynamic program over the decomposition tree.

Subproblem: for a tree node spanning subgraph G' with terminals (a, b), and
a residue tuple assigning net inflow-minus-outflow targets to a, b and to
whichever of source/sink lie strictly inside G' (every other vertex gets 0),
the table entry is the minimum purchase cost of an edge subset of G' that
can route those residues. Tuples sum to zero and every entry is bounded by
the flow bound F, so an entry is addressed by its free coordinates: the
a-slot plus one coordinate per interior special, the b-slot being implied.

A flow of value v from source to sink corresponds to the root tuple placing
-v on the source slot and +v on the sink slot; both solvers reduce to such
queries. Series nodes combine children in one forced way; parallel nodes
minimize over an integer split of the a-residue between the two children.

Tables are dense numpy arrays, one axis per free coordinate, each axis
ranging over the node's residue domain: integers in [-Fn, Fn] where
Fn = min(F, total capacity of the subgraph), optionally intersected with an
explicit residue set (see solve_lattice). Infeasible entries hold a cost
sentinel larger than the whole graph's cost. A build may also pin the
source/sink residues to a single query value, which collapses every table
to one axis; the budget-feasibility probe used by the approximation scheme
relies on this.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .decompose import DecompNode, DecompTree, decompose
from .errors import InfeasibleError
from .instance import EdgeRecord, MultiGraph, ProblemInstance, Solution
from .flow import max_flow, solution_from_edges

_SPECIAL_ORDER = ("s", "t")


class ResidueDomain:
    """Sorted, negation-symmetric set of residue values for one table axis."""

    __slots__ = ("values", "radius", "_contiguous", "_index")

    def __init__(self, values: np.ndarray, contiguous: bool):
        self.values = values
        self.radius = int(values[-1]) if len(values) else 0
        self._contiguous = contiguous
        self._index = None

    @staticmethod
    def range(radius: int) -> "ResidueDomain":
        return ResidueDomain(np.arange(-radius, radius + 1, dtype=np.int64), True)

    @staticmethod
    def explicit(values: Iterable[int]) -> "ResidueDomain":
        arr = np.unique(np.asarray(list(values), dtype=np.int64))
        if len(arr) == 0 or 0 not in arr or not np.array_equal(arr, -arr[::-1]):
            raise ValueError("residue domain must contain 0 and be symmetric under negation")
        return ResidueDomain(arr, False)

    def clipped(self, radius: int) -> "ResidueDomain":
        if self._contiguous:
            return ResidueDomain.range(min(self.radius, radius))
        lo = np.searchsorted(self.values, -radius, side="left")
        hi = np.searchsorted(self.values, radius, side="right")
        return ResidueDomain(self.values[lo:hi], False)

    def __len__(self) -> int:
        return len(self.values)

    def positions(self, vals):
        """Clipped positions plus a validity mask, for elementwise gathers."""
        vals = np.asarray(vals, dtype=np.int64)
        if self._contiguous:
            pos = vals + self.radius
            valid = (vals >= -self.radius) & (vals <= self.radius)
            return np.clip(pos, 0, len(self.values) - 1), valid
        pos = np.searchsorted(self.values, vals)
        pos_c = np.clip(pos, 0, len(self.values) - 1)
        valid = (pos < len(self.values)) & (self.values[pos_c] == vals)
        return pos_c, valid

    def pos_of(self, value: int) -> int | None:
        if self._contiguous:
            return value + self.radius if -self.radius <= value <= self.radius else None
        if self._index is None:
            self._index = {int(v): i for i, v in enumerate(self.values)}
        return self._index.get(int(value))


@dataclass(frozen=True)
class ResidueTuple:
    """Residues at (a, [s], [t], b); present entries sum to zero."""

    r_a: int
    r_b: int
    r_s: int | None = None
    r_t: int | None = None

    def __post_init__(self):
        if sum(self.entries()) != 0:
            raise ValueError(f"residue tuple does not sum to zero: {self}")

    def entries(self) -> tuple[int, ...]:
        out = [self.r_a]
        if self.r_s is not None:
            out.append(self.r_s)
        if self.r_t is not None:
            out.append(self.r_t)
        out.append(self.r_b)
        return tuple(out)

    def specials(self) -> tuple[str, ...]:
        labels = []
        if self.r_s is not None:
            labels.append("s")
        if self.r_t is not None:
            labels.append("t")
        return tuple(labels)

    def special_value(self, label: str) -> int:
        value = self.r_s if label == "s" else self.r_t
        assert value is not None
        return value


@dataclass(frozen=True)
class LeafChoice:
    buy: bool


@dataclass(frozen=True)
class SeriesChoice:
    left: ResidueTuple
    right: ResidueTuple


@dataclass(frozen=True)
class ParallelChoice:
    split: int
    left: ResidueTuple
    right: ResidueTuple


@dataclass(frozen=True)
class DPEntry:
    cost: int
    choice: LeafChoice | SeriesChoice | ParallelChoice | None


@dataclass
class NodeTable:
    node_id: int
    specials: tuple[str, ...]  # interior specials, in ("s", "t") order
    domain: ResidueDomain
    f_node: int
    cost: np.ndarray
    split: np.ndarray | None
    admissible: int


def all_case_labels() -> list[str]:
    """Every structural combination case the DP can face at an inner node.

    The label records the node kind and where source/sink sit relative to
    the children: at the series join, inside the left child, or inside the
    right child. Mirrored placements get distinct labels.
    """
    labels = ["series:none", "parallel:none"]
    for lab in _SPECIAL_ORDER:
        labels += [
            f"series:{lab}@join",
            f"series:{lab}L",
            f"series:{lab}R",
            f"parallel:{lab}L",
            f"parallel:{lab}R",
        ]
    for sp in ("s@join", "sL", "sR"):
        for tp in ("t@join", "tL", "tR"):
            if sp.endswith("join") and tp.endswith("join"):
                continue
            labels.append(f"series:{sp}+{tp}")
    for sp in ("sL", "sR"):
        for tp in ("tL", "tR"):
            labels.append(f"parallel:{sp}+{tp}")
    return labels


class DPTable:
    """Built tables for every tree node, plus query and reconstruction."""

    def __init__(
        self,
        tree: DecompTree,
        f_bound: int,
        infinity: int,
        capacities: dict[str, int],
        pinned: dict[str, int] | None,
        pin_value: int | None,
    ):
        self.tree = tree
        self.f_bound = f_bound
        self.infinity = infinity
        self.capacities = capacities
        self.pinned = pinned  # pinned residue per special label, or None
        self.pin_value = pin_value
        self.tables: dict[int, NodeTable] = {}
        self.case_counts: dict[str, int] = {}

    @property
    def state_count(self) -> int:
        return sum(nt.admissible for nt in self.tables.values())

    def per_node_states(self) -> dict[int, int]:
        return {nid: nt.admissible for nid, nt in self.tables.items()}

    # -- lookups ---------------------------------------------------------

    def _node_specials(self, node: DecompNode) -> tuple[str, ...]:
        return tuple(lab for lab in _SPECIAL_ORDER if lab in node.interior_specials)

    def _check_tuple(self, node: DecompNode, rt: ResidueTuple) -> None:
        want = self._node_specials(node)
        if rt.specials() != want:
            raise ValueError(
                f"tuple specials {rt.specials()} do not match node {node.id} specials {want}"
            )
        if self.pinned is not None:
            for lab in want:
                if rt.special_value(lab) != self.pinned[lab]:
                    raise ValueError(
                        f"table was built with {lab} pinned to {self.pinned[lab]}, "
                        f"got {rt.special_value(lab)}"
                    )

    def _coords(self, nt: NodeTable, rt: ResidueTuple) -> tuple[int, ...] | None:
        coords = [nt.domain.pos_of(rt.r_a)]
        if self.pinned is None:
            for lab in nt.specials:
                coords.append(nt.domain.pos_of(rt.special_value(lab)))
        if any(c is None for c in coords):
            return None
        return tuple(coords)

    def cost_of(self, node_id: int, rt: ResidueTuple) -> int:
        node = self.tree.node(node_id)
        self._check_tuple(node, rt)
        nt = self.tables[node_id]
        coords = self._coords(nt, rt)
        if coords is None:
            return self.infinity
        return int(nt.cost[coords])

    def split_of(self, node_id: int, rt: ResidueTuple) -> int:
        nt = self.tables[node_id]
        coords = self._coords(nt, rt)
        assert coords is not None and nt.split is not None
        return int(nt.split[coords])

    # -- structure helpers ----------------------------------------------

    def placements(self, node: DecompNode) -> dict[str, str]:
        """Where each interior special of ``node`` sits: join/left/right."""
        left = self.tree.node(node.left)
        right = self.tree.node(node.right)
        special_vertex = {"s": self.tree.source, "t": self.tree.sink}
        out: dict[str, str] = {}
        for lab in self._node_specials(node):
            if node.kind == "series" and node.join == special_vertex[lab]:
                out[lab] = "join"
            elif lab in left.interior_specials:
                out[lab] = "left"
            else:
                assert lab in right.interior_specials, "special lost between children"
                out[lab] = "right"
        return out

    def case_label(self, node: DecompNode) -> str:
        place = self.placements(node)
        parts = []
        for lab in _SPECIAL_ORDER:
            if lab not in place:
                continue
            where = place[lab]
            parts.append(f"{lab}@join" if where == "join" else f"{lab}{'L' if where == 'left' else 'R'}")
        return f"{node.kind}:{'+'.join(parts) or 'none'}"

    def series_children(self, node: DecompNode, rt: ResidueTuple) -> tuple[ResidueTuple, ResidueTuple]:
        """The forced child tuples of a series combination."""
        place = self.placements(node)
        sum_left = sum(rt.special_value(lab) for lab, w in place.items() if w == "left")
        r_join = sum(rt.special_value(lab) for lab, w in place.items() if w == "join")
        x = -(rt.r_a + sum_left)
        y = r_join + rt.r_a + sum_left
        left_kw = {}
        right_kw = {}
        for lab, where in place.items():
            if where == "left":
                left_kw[f"r_{lab}"] = rt.special_value(lab)
            elif where == "right":
                right_kw[f"r_{lab}"] = rt.special_value(lab)
        left_rt = ResidueTuple(r_a=rt.r_a, r_b=x, **left_kw)
        right_rt = ResidueTuple(r_a=y, r_b=rt.r_b, **right_kw)
        return left_rt, right_rt

    def parallel_children(
        self, node: DecompNode, rt: ResidueTuple, split: int
    ) -> tuple[ResidueTuple, ResidueTuple]:
        """Child tuples of a parallel combination for a given a-split."""
        place = self.placements(node)
        sum_left = sum(rt.special_value(lab) for lab, w in place.items() if w == "left")
        b_left = -(split + sum_left)
        left_kw = {}
        right_kw = {}
        for lab, where in place.items():
            if where == "left":
                left_kw[f"r_{lab}"] = rt.special_value(lab)
            else:
                right_kw[f"r_{lab}"] = rt.special_value(lab)
        left_rt = ResidueTuple(r_a=split, r_b=b_left, **left_kw)
        right_rt = ResidueTuple(r_a=rt.r_a - split, r_b=rt.r_b - b_left, **right_kw)
        return left_rt, right_rt

    def entry(self, node_id: int, rt: ResidueTuple) -> DPEntry:
        """Cost plus the reconstruction choice behind it."""
        node = self.tree.node(node_id)
        cost = self.cost_of(node_id, rt)
        if cost >= self.infinity:
            return DPEntry(self.infinity, None)
        if node.kind == "leaf":
            return DPEntry(cost, LeafChoice(buy=rt.r_a != 0))
        if node.kind == "series":
            left_rt, right_rt = self.series_children(node, rt)
            return DPEntry(cost, SeriesChoice(left_rt, right_rt))
        split = self.split_of(node_id, rt)
        left_rt, right_rt = self.parallel_children(node, rt, split)
        return DPEntry(cost, ParallelChoice(split, left_rt, right_rt))

    # -- queries ---------------------------------------------------------

    def root_tuple(self, v: int) -> ResidueTuple:
        """Tuple demanding a flow of value v from source to sink."""
        root = self.tree.node(self.tree.root)
        a, b = root.terminals
        s, t = self.tree.source, self.tree.sink
        r_a = (-v if s == a else 0) + (v if t == a else 0)
        r_b = (-v if s == b else 0) + (v if t == b else 0)
        kw = {}
        if "s" in root.interior_specials:
            kw["r_s"] = -v
        if "t" in root.interior_specials:
            kw["r_t"] = v
        return ResidueTuple(r_a=r_a, r_b=r_b, **kw)

    def query_cost(self, v: int) -> int:
        if v < 0 or v > self.f_bound:
            raise ValueError(f"flow value {v} out of range [0, {self.f_bound}]")
        if self.pin_value is not None and v != self.pin_value:
            raise ValueError(f"table was built pinned to flow value {self.pin_value}, got {v}")
        return self.cost_of(self.tree.root, self.root_tuple(v))

    def query(self, v: int) -> tuple[int, frozenset[str] | None]:
        """Min cost of supporting flow v, with a witness edge set."""
        cost = self.query_cost(v)
        if cost >= self.infinity:
            return self.infinity, None
        return cost, self.reconstruct(self.tree.root, self.root_tuple(v))

    def reconstruct(self, node_id: int, rt: ResidueTuple) -> frozenset[str]:
        """Walk the stored choices and collect the purchased edge ids."""
        purchased: list[str] = []
        stack: list[tuple[int, ResidueTuple]] = [(node_id, rt)]
        while stack:
            nid, cur = stack.pop()
            node = self.tree.node(nid)
            entry = self.entry(nid, cur)
            assert entry.choice is not None, "reconstructing an infeasible entry"
            if node.kind == "leaf":
                if entry.choice.buy:
                    purchased.append(node.edge_id)
            else:
                stack.append((node.left, entry.choice.left))
                stack.append((node.right, entry.choice.right))
        return frozenset(purchased)


# -- scalar reference combinators ----------------------------------------


def leaf_cost(edge: EdgeRecord, rt: ResidueTuple, infinity: int, capacity: int | None = None) -> int:
    """Cost of routing residue (r, -r) across a single purchasable edge."""
    if rt.specials():
        raise ValueError("leaf nodes cannot contain source or sink strictly inside")
    cap = edge.capacity if capacity is None else capacity
    r = rt.r_a
    if r == 0:
        return 0
    return edge.cost if abs(r) <= cap else infinity


def combine_series(table: DPTable, node_id: int, rt: ResidueTuple) -> DPEntry:
    """Recompute a series entry from child tables (single forced combination)."""
    node = table.tree.node(node_id)
    assert node.kind == "series"
    table._check_tuple(node, rt)
    left_rt, right_rt = table.series_children(node, rt)
    if any(abs(e) > table.f_bound for e in left_rt.entries() + right_rt.entries()):
        return DPEntry(table.infinity, None)
    cost = table.cost_of(node.left, left_rt) + table.cost_of(node.right, right_rt)
    if cost >= table.infinity:
        return DPEntry(table.infinity, None)
    return DPEntry(cost, SeriesChoice(left_rt, right_rt))


def combine_parallel(table: DPTable, node_id: int, rt: ResidueTuple) -> DPEntry:
    """Recompute a parallel entry by scanning every admissible a-split.

    Ties prefer the smallest split value, matching the stored tables.
    """
    node = table.tree.node(node_id)
    assert node.kind == "parallel"
    table._check_tuple(node, rt)
    left_dom = table.tables[node.left].domain
    best = DPEntry(table.infinity, None)
    for r in left_dom.values.tolist():
        left_rt, right_rt = table.parallel_children(node, rt, r)
        if any(abs(e) > table.f_bound for e in left_rt.entries() + right_rt.entries()):
            continue
        cost = table.cost_of(node.left, left_rt) + table.cost_of(node.right, right_rt)
        if cost < best.cost:
            best = DPEntry(cost, ParallelChoice(r, left_rt, right_rt))
    return best


# -- vectorized build -----------------------------------------------------


def _axis_values(dom: ResidueDomain, axis: int, ndim: int) -> np.ndarray:
    shape = [1] * ndim
    shape[axis] = len(dom)
    return dom.values.reshape(shape)


def _build_leaf(
    node: DecompNode,
    dom: ResidueDomain,
    cost: int,
    capacity: int,
    sentinel: int,
) -> tuple[np.ndarray, int]:
    vals = dom.values
    arr = np.where(
        vals == 0,
        np.int64(0),
        np.where(np.abs(vals) <= capacity, np.int64(cost), np.int64(sentinel)),
    ).astype(np.int64)
    return arr, len(vals)


class _Builder:
    def __init__(
        self,
        tree: DecompTree,
        f_bound: int,
        capacities: dict[str, int],
        base_domain: ResidueDomain | None,
        pin_value: int | None,
    ):
        self.tree = tree
        self.f_bound = f_bound
        self.capacities = capacities
        self.base_domain = base_domain
        self.pin_value = pin_value
        graph = tree.graph
        self.sentinel = graph.total_cost() + 1
        self.pinned = None if pin_value is None else {"s": -pin_value, "t": pin_value}
        self.table = DPTable(tree, f_bound, self.sentinel, capacities, self.pinned, pin_value)

    def domain_for(self, f_node: int) -> ResidueDomain:
        if self.base_domain is None:
            return ResidueDomain.range(f_node)
        return self.base_domain.clipped(f_node)

    def build(self) -> DPTable:
        table = self.table
        u_total: dict[int, int] = {}
        for node in (self.tree.node(i) for i in self.tree.postorder_ids()):
            if node.kind == "leaf":
                u_total[node.id] = self.capacities[node.edge_id]
            else:
                u_total[node.id] = u_total[node.left] + u_total[node.right]
            f_node = min(self.f_bound, u_total[node.id])
            dom = self.domain_for(f_node)
            if node.kind == "leaf":
                edge = self.tree.graph.edge_by_id(node.edge_id)
                cost, admissible = _build_leaf(
                    node, dom, edge.cost, self.capacities[edge.id], self.sentinel
                )
                table.tables[node.id] = NodeTable(node.id, (), dom, f_node, cost, None, admissible)
                continue
            label = table.case_label(node)
            table.case_counts[label] = table.case_counts.get(label, 0) + 1
            if node.kind == "series":
                nt = self._build_series(node, dom, f_node)
            else:
                nt = self._build_parallel(node, dom, f_node)
            table.tables[node.id] = nt
        return table

    # Per-special value within the combination formulas: a broadcastable
    # axis array in full mode, a plain pinned int otherwise.
    def _special_values(self, specials, dom, ndim):
        if self.pinned is not None:
            return {lab: self.pinned[lab] for lab in specials}
        return {
            lab: _axis_values(dom, 1 + specials.index(lab), ndim) for lab in specials
        }

    def _child_gather(self, child_id: int, a_vals, specials_vals: dict):
        """Look up a child table at a-slot values ``a_vals`` (array or int)

        and at the child's own special coordinates. Returns (cost, valid)."""
        nt = self.table.tables[child_id]
        pos_a, valid = nt.domain.positions(a_vals)
        idx = [pos_a]
        if self.pinned is None:
            for lab in nt.specials:
                pos, ok = nt.domain.positions(specials_vals[lab])
                idx.append(pos)
                valid = valid & ok
        return nt.cost[tuple(idx)], valid

    def _admissibility(self, dom: ResidueDomain, va, svals: dict, shape) -> tuple[np.ndarray, int]:
        rb = -(va + sum(svals.values())) if svals else -va
        _, ok = dom.positions(rb)
        ok = np.broadcast_to(ok, shape)
        return ok, int(ok.sum())

    def _build_series(self, node: DecompNode, dom: ResidueDomain, f_node: int) -> NodeTable:
        table = self.table
        specials = table._node_specials(node)
        ndim = 1 if self.pinned is not None else 1 + len(specials)
        shape = (len(dom),) * ndim
        va = _axis_values(dom, 0, ndim)
        svals = self._special_values(specials, dom, ndim)
        place = table.placements(node)
        left_ids = [lab for lab in specials if place[lab] == "left"]
        join_ids = [lab for lab in specials if place[lab] == "join"]
        sum_left = sum((svals[lab] for lab in left_ids), np.int64(0))
        r_join = sum((svals[lab] for lab in join_ids), np.int64(0))
        left_cost, left_ok = self._child_gather(node.left, va, svals)
        y = r_join + va + sum_left
        right_cost, right_ok = self._child_gather(node.right, y, svals)
        total = np.minimum(left_cost + right_cost, self.sentinel)
        ok_mask, admissible = self._admissibility(dom, va, svals, shape)
        cost = np.where(left_ok & right_ok & ok_mask, total, np.int64(self.sentinel))
        cost = np.ascontiguousarray(np.broadcast_to(cost, shape))
        return NodeTable(node.id, specials, dom, f_node, cost, None, admissible)

    def _build_parallel(self, node: DecompNode, dom: ResidueDomain, f_node: int) -> NodeTable:
        table = self.table
        specials = table._node_specials(node)
        ndim = 1 if self.pinned is not None else 1 + len(specials)
        shape = (len(dom),) * ndim
        va = _axis_values(dom, 0, ndim)
        svals = self._special_values(specials, dom, ndim)
        place = table.placements(node)
        left_nt = self.table.tables[node.left]
        best = np.full(shape, self.sentinel, dtype=np.int64)
        split = np.zeros(shape, dtype=np.int64)
        sentinel = self.sentinel
        for r in left_nt.domain.values.tolist():
            left_cost, left_ok = self._child_gather(node.left, r, svals)
            left_cost = np.where(left_ok, left_cost, sentinel)
            if np.all(left_cost >= sentinel):
                continue
            right_cost, right_ok = self._child_gather(node.right, va - r, svals)
            cand = np.minimum(left_cost + np.where(right_ok, right_cost, sentinel), sentinel)
            better = cand < best
            if better.any():
                best = np.where(better, cand, best)
                split = np.where(better, np.int64(r), split)
        ok_mask, admissible = self._admissibility(dom, va, svals, shape)
        best = np.ascontiguousarray(np.broadcast_to(np.where(ok_mask, best, sentinel), shape))
        split = np.ascontiguousarray(np.broadcast_to(split, shape))
        return NodeTable(node.id, specials, dom, f_node, best, split, admissible)


def build_table(
    tree: DecompTree,
    f_bound: int | None = None,
    *,
    capacity_override: Mapping[str, int] | None = None,
    residue_values: Iterable[int] | None = None,
    pin: int | None = None,
) -> DPTable:
    """Build DP tables for every node in postorder.

    ``f_bound`` defaults to the max flow of the fully purchased graph under
    the effective capacities. ``capacity_override`` substitutes capacities
    by edge id without touching costs. ``residue_values`` restricts every
    tuple coordinate and every parallel split to an explicit residue set.
    ``pin`` fixes the source residue to -pin and the sink residue to +pin,
    building single-axis tables that only answer that one flow query.
    """
    graph = tree.graph
    capacities = {e.id: e.capacity for e in graph.edges}
    if capacity_override is not None:
        for eid, cap in capacity_override.items():
            if eid not in capacities:
                raise KeyError(f"unknown edge id {eid!r} in capacity override")
            if cap < 0:
                raise ValueError("capacities cannot be negative")
            capacities[eid] = cap
    if f_bound is None:
        f_bound = effective_max_flow(graph, capacities)
    if f_bound < 0:
        raise ValueError("flow bound cannot be negative")
    if pin is not None and not (0 <= pin <= f_bound):
        raise ValueError(f"pinned flow value {pin} out of range [0, {f_bound}]")
    base = None
    if residue_values is not None:
        base = ResidueDomain.explicit(residue_values)
    return _Builder(tree, f_bound, capacities, base, pin).build()


def effective_max_flow(graph: MultiGraph, capacities: Mapping[str, int]) -> int:
    """Max source-sink flow with every edge purchased, capacities overridden."""
    edges = tuple(
        EdgeRecord(e.id, e.u, e.v, e.cost, capacities[e.id]) for e in graph.edges
    )
    patched = MultiGraph(
        vertex_count=graph.vertex_count,
        edges=edges,
        source=graph.source,
        sink=graph.sink,
        declared_terminals=graph.declared_terminals,
    )
    value, _ = max_flow(patched)
    return value


def upper_bound_flow(instance: ProblemInstance) -> int:
    """Max flow when everything is purchased: no solution can exceed it."""
    value, _ = max_flow(instance.graph)
    return value


def dp_query(table: DPTable, v: int) -> tuple[int, frozenset[str] | None]:
    """Min cost of an edge subset supporting flow value v, with witness."""
    return table.query(v)


def solve_capndp(
    instance: ProblemInstance,
    *,
    tree: DecompTree | None = None,
    table: DPTable | None = None,
) -> Solution:
    """Cheapest purchase whose max flow meets the demand."""
    if instance.demand is None:
        raise ValueError("instance has no demand")
    if tree is None:
        tree = decompose(instance.graph)
    demand = instance.demand
    if table is None:
        f_bound = upper_bound_flow(instance)
        if demand > f_bound:
            raise InfeasibleError(
                f"demand {demand} exceeds the best attainable flow {f_bound}"
            )
        table = build_table(tree, f_bound)
    elif demand > table.f_bound:
        raise InfeasibleError(
            f"demand {demand} exceeds the best attainable flow {table.f_bound}"
        )
    cost, edges = table.query(demand)
    if edges is None:
        raise InfeasibleError(f"demand {demand} is not attainable")
    solution = solution_from_edges(instance, edges)
    assert solution.total_cost == cost and solution.achieved_flow >= demand
    return solution


def solve_bcmfp(
    instance: ProblemInstance,
    *,
    tree: DecompTree | None = None,
    table: DPTable | None = None,
) -> Solution:
    """Max attainable flow within the budget (largest affordable query)."""
    if instance.budget is None:
        raise ValueError("instance has no budget")
    if tree is None:
        tree = decompose(instance.graph)
    if table is None:
        table = build_table(tree, upper_bound_flow(instance))
    budget = instance.budget
    lo, hi = 0, table.f_bound
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if table.query_cost(mid) <= budget:
            lo = mid
        else:
            hi = mid - 1
    cost, edges = table.query(lo)
    assert edges is not None and cost <= budget
    return solution_from_edges(instance, edges)


def feasible(
    instance: ProblemInstance,
    budget: int,
    flow_value: int,
    capacity_override: Mapping[str, int] | None = None,
    *,
    tree: DecompTree | None = None,
) -> tuple[bool, frozenset[str] | None]:
    """Is there a purchase of cost <= budget supporting the given flow value

    under the (possibly overridden) capacities? Returns a witness on YES."""
    ok, edges, _ = feasible_detailed(
        instance, budget, flow_value, capacity_override, tree=tree
    )
    return ok, edges


def feasible_detailed(
    instance: ProblemInstance,
    budget: int,
    flow_value: int,
    capacity_override: Mapping[str, int] | None = None,
    *,
    tree: DecompTree | None = None,
) -> tuple[bool, frozenset[str] | None, dict]:
    """Like :func:`feasible` but also reports per-query statistics."""
    if flow_value < 0:
        raise ValueError("flow value cannot be negative")
    if tree is None:
        tree = decompose(instance.graph)
    table = build_table(
        tree, flow_value, capacity_override=capacity_override, pin=flow_value
    )
    cost = table.query_cost(flow_value)
    stats = {
        "states": table.state_count,
        "f_bound": table.f_bound,
        "cost": None if cost >= table.infinity else cost,
    }
    if cost > budget or cost >= table.infinity:
        return False, None, stats
    _, edges = table.query(flow_value)
    return True, edges, stats
