"""Lattice-restricted residue domains and edge-upgrade gadgets."""

import random
import warnings
from itertools import product

import pytest

from spnd import (
    EdgeRecord,
    InfeasibleError,
    LatticeSpec,
    MultiGraph,
    ProblemInstance,
    UpgradeRecord,
    build_table,
    decompose,
    expand_upgrades,
    generate_sp,
    lattice_residues,
    map_back,
    oracle_bcmfp,
    oracle_capndp,
    parse_instance,
    solution_from_edges,
    solve_bcmfp,
    solve_capndp,
    solve_lattice,
    solve_lattice_detailed,
    solve_with_upgrades,
    upper_bound_flow,
    validate_lattice,
)
from spnd.extensions import normalize_menu


# -- lattice residues --------------------------------------------------------


def test_lattice_residue_examples():
    got = lattice_residues(LatticeSpec((5,), 3), m=2, f_bound=100)
    assert got.tolist() == list(range(-60, 61, 5))
    assert len(got) == 25

    assert lattice_residues(LatticeSpec((0,), 4), m=3, f_bound=10).tolist() == [0]

    got2 = lattice_residues(LatticeSpec((2, 3), 1), m=1, f_bound=5)
    assert got2.tolist() == [-5, -3, -2, -1, 0, 1, 2, 3, 5]


def test_lattice_spec_validation():
    with pytest.raises(ValueError):
        LatticeSpec((), 1)
    with pytest.raises(ValueError):
        LatticeSpec((-2,), 1)
    with pytest.raises(ValueError):
        LatticeSpec((2,), 0)


def test_lattice_residue_budget_warning():
    with pytest.warns(RuntimeWarning):
        lattice_residues(LatticeSpec((1, 2), 5), m=10, f_bound=50, state_budget=100)


def test_validate_lattice(diamond):
    validate_lattice(diamond.graph, LatticeSpec((1,), 2))
    with pytest.raises(ValueError) as err:
        validate_lattice(diamond.graph, LatticeSpec((2,), 1))
    assert "e3=1" in str(err.value)


# -- lattice solving ---------------------------------------------------------


def test_lattice_solve_matches_unrestricted_on_diamond(diamond):
    spec = LatticeSpec((1,), 2)
    inst = diamond.with_demand(3)
    restricted = solve_lattice(inst, spec)
    unrestricted = solve_capndp(inst)
    assert restricted.total_cost == unrestricted.total_cost == 5
    assert restricted.achieved_flow == unrestricted.achieved_flow


def _with_capacities(instance, caps):
    g = instance.graph
    edges = tuple(
        EdgeRecord(e.id, e.u, e.v, e.cost, caps[e.id]) for e in g.edges
    )
    graph = MultiGraph(
        vertex_count=g.vertex_count,
        edges=edges,
        source=g.source,
        sink=g.sink,
        declared_terminals=g.declared_terminals,
    )
    return ProblemInstance(
        graph=graph,
        budget=instance.budget,
        demand=instance.demand,
        upgrades=instance.upgrades,
    )


def test_lattice_solve_on_rescaled_capacities(diamond):
    inst = _with_capacities(diamond, {"e1": 2, "e2": 2, "e3": 2}).with_demand(2)
    spec = LatticeSpec((2,), 1)
    assert solve_lattice(inst, spec).total_cost == solve_capndp(inst).total_cost


def test_vacuous_lattice_has_identical_states(diamond):
    # Basis (1) with a large enough bound covers every integer in range, so
    # nothing is pruned and the state counts must agree exactly.
    inst = diamond.with_budget(4)
    outcome = solve_lattice_detailed(inst, LatticeSpec((1,), 6))
    tree = decompose(inst.graph)
    full = build_table(tree, upper_bound_flow(inst))
    assert outcome.table.state_count == full.state_count
    assert outcome.solution.achieved_flow == solve_bcmfp(inst).achieved_flow


def test_proper_lattice_prunes_states():
    inst = parse_instance(
        "graph 3\nsource 0\nsink 2\n"
        "edge e1 0 1 1 5\nedge e2 1 2 1 5\nedge e3 0 2 3 5\n"
        "budget 5\n"
    )
    spec = LatticeSpec((5,), 1)
    outcome = solve_lattice_detailed(inst, spec)
    tree = decompose(inst.graph)
    full = build_table(tree, upper_bound_flow(inst))
    assert outcome.table.state_count < full.state_count
    reference = solve_bcmfp(inst)
    assert outcome.solution.achieved_flow == reference.achieved_flow == 10
    assert outcome.solution.total_cost == reference.total_cost


def _lattice_instance(seed):
    """A generated instance whose capacities are redrawn from a small lattice."""
    base = generate_sp(seed, edge_budget=6, cap_max=4)
    rng = random.Random(7000 + seed)
    k = rng.randint(1, 2)
    basis = tuple(sorted(rng.randint(1, 5) for _ in range(k)))
    bound = rng.randint(1, 5)
    spec = LatticeSpec(basis, bound)
    caps = {}
    for e in base.graph.edges:
        for _ in range(40):
            val = sum(rng.randint(-bound, bound) * d for d in basis)
            if 1 <= val <= 12:
                caps[e.id] = val
                break
        else:
            caps[e.id] = basis[0]
    inst = _with_capacities(base, caps)
    if seed % 2:
        inst = inst.with_budget(rng.randint(0, inst.graph.total_cost()))
    else:
        inst = inst.with_demand(rng.randint(0, upper_bound_flow(inst)))
    return inst, spec


@pytest.mark.parametrize("seed", range(1, 41))
def test_lattice_solve_equals_unrestricted(seed):
    inst, spec = _lattice_instance(seed)
    validate_lattice(inst.graph, spec)
    outcome = solve_lattice_detailed(inst, spec)
    if inst.problem == "bcmfp":
        reference = solve_bcmfp(inst)
        assert outcome.solution.achieved_flow == reference.achieved_flow, f"seed {seed}"
    else:
        reference = solve_capndp(inst)
        assert outcome.solution.total_cost == reference.total_cost, f"seed {seed}"

    f = upper_bound_flow(inst)
    allowed = lattice_residues(spec, inst.graph.edge_count, f)
    tree = decompose(inst.graph)
    full = build_table(tree, f)
    if len(allowed) < 2 * f + 1:
        assert outcome.table.state_count < full.state_count, f"seed {seed}"
    else:
        assert outcome.table.state_count == full.state_count, f"seed {seed}"


# -- upgrade menus and gadgets ------------------------------------------------


def test_normalize_menu_sorts_and_deduplicates():
    assert normalize_menu("g", [(7, 20), (4, 10)]) == ((4, 10), (7, 20))
    with pytest.warns(RuntimeWarning):
        kept = normalize_menu("g", [(5, 10), (4, 10)])
    assert kept == ((4, 10),)
    with pytest.warns(RuntimeWarning):
        kept2 = normalize_menu("g", [(4, 10), (5, 10), (7, 20)])
    assert kept2 == ((4, 10), (7, 20))


def _upgrade_only_instance(menu, budget):
    text_choices = " ".join(f"{c} {u}" for c, u in menu)
    return parse_instance(
        f"graph 2\nsource 0\nsink 1\nupedge g1 0 1 {len(menu)} {text_choices}\nbudget {budget}\n"
    )


def test_two_choice_gadget_shape():
    inst = _upgrade_only_instance([(4, 10), (7, 20)], budget=7)
    expanded, gmap = expand_upgrades(inst)
    g = expanded.graph
    assert g.edge_count == 4
    assert g.vertex_count == 4
    guards = [g.edge_by_id(eid) for eid in gmap.gadget("g1").guard_edge_ids]
    assert [(e.cost, e.capacity) for e in guards] == [(0, 20), (0, 20)]
    choices = [g.edge_by_id(eid) for eid in gmap.gadget("g1").choice_edge_ids]
    assert [(e.cost, e.capacity) for e in choices] == [(4, 10), (7, 20)]
    decompose(g)  # must stay series-parallel


def test_single_choice_becomes_plain_edge():
    inst = _upgrade_only_instance([(3, 9)], budget=3)
    expanded, gmap = expand_upgrades(inst)
    assert expanded.graph.edge_count == 1
    assert expanded.graph.vertex_count == 2
    edge = expanded.graph.edges[0]
    assert (edge.cost, edge.capacity) == (3, 9)
    assert gmap.gadget("g1").guard_edge_ids == ()


@pytest.mark.parametrize("k", [2, 3, 4])
def test_gadget_size_formula(k):
    menu = [(i, 2 * i) for i in range(1, k + 1)]
    inst = _upgrade_only_instance(menu, budget=sum(c for c, _ in menu))
    expanded, _ = expand_upgrades(inst)
    assert expanded.graph.edge_count == 3 * k - 2
    assert expanded.graph.vertex_count == 2 * k
    decompose(expanded.graph)


def test_map_back_reads_choices():
    inst = _upgrade_only_instance([(4, 10), (7, 20)], budget=11)
    expanded, gmap = expand_upgrades(inst)
    g = gmap.gadget("g1")

    sol = solution_from_edges(expanded, set(g.guard_edge_ids) | {g.choice_edge_ids[1]})
    plan = map_back(sol, gmap)
    assert plan.choices == {"g1": 2}
    assert plan.interpreted_cost == 7
    assert plan.interpreted_flow == 20

    # Paying for both choices is wasteful but interpretable: the larger one
    # carries the whole 20 units through the guards.
    both = solution_from_edges(
        expanded, set(g.guard_edge_ids) | set(g.choice_edge_ids)
    )
    assert both.achieved_flow == 20
    plan_both = map_back(both, gmap)
    assert plan_both.choices == {"g1": 2}
    assert plan_both.interpreted_cost == 7

    plan_none = map_back(solution_from_edges(expanded, set()), gmap)
    assert plan_none.choices == {"g1": 0}
    assert plan_none.interpreted_flow == 0


def test_map_back_normalizes_missing_guards():
    inst = _upgrade_only_instance([(4, 10), (7, 20)], budget=7)
    expanded, gmap = expand_upgrades(inst)
    g = gmap.gadget("g1")
    orphan = solution_from_edges(expanded, {g.choice_edge_ids[1]})
    assert orphan.achieved_flow == 0
    plan = map_back(orphan, gmap)
    assert plan.choices == {"g1": 2}
    assert set(g.guard_edge_ids) <= set(plan.normalized_purchased)
    assert plan.interpreted_flow == 20


@pytest.mark.parametrize("seed", range(1, 26))
def test_single_gadget_equals_best_affordable_choice(seed):
    rng = random.Random(seed)
    k = rng.randint(1, 3)
    menu = [(rng.randint(0, 20), rng.randint(1, 20)) for _ in range(k)]
    total = sum(c for c, _ in menu)
    for budget in range(total + 1):
        inst = _upgrade_only_instance(menu, budget)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            sol, plan, _ = solve_with_upgrades(inst)
        best = max([u for c, u in menu if c <= budget], default=0)
        assert sol.achieved_flow == best, f"seed {seed} budget {budget}"
        assert plan.interpreted_flow == best
        assert plan.interpreted_cost <= budget


def test_solve_with_upgrades_passthrough(diamond):
    inst = diamond.with_budget(5)
    sol, plan, gmap = solve_with_upgrades(inst)
    assert sol == solve_bcmfp(inst)
    assert plan.choices == {}
    assert gmap.gadgets == ()


def _mixed_upgrade_instance(seed, gadget_count):
    base = generate_sp(seed, edge_budget=5, cap_max=5)
    rng = random.Random(4000 + seed)
    edges = list(base.graph.edges)
    rng.shuffle(edges)
    converted = edges[:gadget_count]
    plain = edges[gadget_count:]
    upgrades = []
    for i, e in enumerate(converted):
        k = rng.randint(1, 3)
        menu = sorted(
            ((rng.randint(0, 8), rng.randint(1, 6)) for _ in range(k)),
            key=lambda cu: (cu[1], cu[0]),
        )
        dedup = {}
        for c, u in menu:
            dedup.setdefault(u, (c, u))
        menu = sorted(dedup.values(), key=lambda cu: (cu[1], cu[0]))
        upgrades.append(UpgradeRecord(f"u{i}", e.u, e.v, tuple(menu)))
    graph = MultiGraph(
        vertex_count=base.graph.vertex_count,
        edges=tuple(plain),
        source=base.graph.source,
        sink=base.graph.sink,
        declared_terminals=base.graph.declared_terminals,
    )
    richest = sum(c for up in upgrades for c, _ in up.choices) + sum(e.cost for e in plain)
    inst = ProblemInstance(
        graph=graph, budget=rng.randint(0, richest), demand=None, upgrades=tuple(upgrades)
    )
    return inst


def _brute_force_over_choices(inst):
    """Optimal flow over every per-gadget single choice, via the oracle."""
    best = -1
    options = [range(len(up.choices) + 1) for up in inst.upgrades]
    for combo in product(*options):
        edges = list(inst.graph.edges)
        for up, pick in zip(inst.upgrades, combo):
            if pick:
                c, u = up.choices[pick - 1]
                edges.append(EdgeRecord(f"{up.id}#chosen", up.u, up.v, c, u))
        graph = MultiGraph(
            vertex_count=inst.graph.vertex_count,
            edges=tuple(edges),
            source=inst.graph.source,
            sink=inst.graph.sink,
        )
        flat = ProblemInstance(graph=graph, budget=inst.budget, demand=None, upgrades=())
        best = max(best, oracle_bcmfp(flat).achieved_flow)
    return best


@pytest.mark.parametrize("seed", range(1, 16))
def test_multi_gadget_end_to_end(seed):
    inst = _mixed_upgrade_instance(seed, gadget_count=2)
    sol, plan, _ = solve_with_upgrades(inst)
    expected = _brute_force_over_choices(inst)
    assert sol.achieved_flow == expected, f"seed {seed}"
    assert plan.interpreted_flow == expected
    assert plan.interpreted_cost <= inst.budget


def test_three_gadget_end_to_end():
    inst = _mixed_upgrade_instance(3, gadget_count=3)
    sol, plan, _ = solve_with_upgrades(inst)
    assert sol.achieved_flow == _brute_force_over_choices(inst)
    assert plan.interpreted_cost <= inst.budget


def test_capndp_with_upgrades():
    inst = _upgrade_only_instance([(4, 10), (7, 20)], budget=0).with_demand(15)
    sol, plan, _ = solve_with_upgrades(inst)
    assert plan.choices == {"g1": 2}
    assert sol.total_cost == 7
    with pytest.raises(InfeasibleError):
        solve_with_upgrades(inst.with_demand(21))
