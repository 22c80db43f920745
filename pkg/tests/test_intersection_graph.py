import itertools
import json

import networkx as nx
import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from higman_lines.errors import TruncationInsufficient, ValidationError
from higman_lines.higman_complex import build_ball, classical, make_sigma, stabilizer_intersection_class
from higman_lines.intersection_graph import (
    ThetaBall,
    canonical_cycle,
    induced_cycles,
    induced_cycles_naive,
    region,
    theta,
    theta_dot,
    theta_equivariance,
    verify_correspondence,
)

MIXED = make_sigma("1,2;2,3;1,2;2,3;1,2;2,3")


@pytest.fixture(scope="module")
def hig21():
    b = build_ball(classical(), 2, 1)
    return b, theta(b)


@pytest.fixture(scope="module")
def hig22():
    b = build_ball(classical(), 2, 2)
    return b, theta(b)


def test_theta_basics(hig21):
    b, th = hig21
    assert len(th.nodes) == len(b.vertices)
    base = b.cells[0].vertices
    for i in range(5):
        assert th.has_edge(base[i], base[(i + 1) % 5])
    for v in b.interior_vertices():
        outs = b.out_neighbors(v)
        assert all(th.has_edge(x, y) for x, y in itertools.combinations(outs, 2))


def test_theta_edges_agree_with_stabilizer_classes(hig21):
    b, th = hig21
    inner = b.interior_vertices()
    for u, v in itertools.combinations(inner, 2):
        cls = stabilizer_intersection_class(b, u, v)
        assert th.has_edge(u, v) == (cls != "trivial")


def test_base_cell_is_induced_cycle(hig21):
    b, th = hig21
    cyc = canonical_cycle(b.cells[0].vertices)
    assert cyc in induced_cycles(th, 5, b.cells[0].vertices)
    # the non-consecutive pair x1, x3 is not joined, as inducedness needs
    x = b.cells[0].vertices
    assert stabilizer_intersection_class(b, x[1], x[3]) == "trivial"
    assert not th.has_edge(x[1], x[3])


def test_triangle_among_out_neighbours(hig22):
    b, th = hig22
    v = next(v for v in b.interior_vertices() if len(b.out_neighbors(v)) >= 3)
    three = b.out_neighbors(v)[:3]
    tri = induced_cycles(th, 3, three)
    assert tri == [canonical_cycle(three)]


def test_region_edge_cases(hig21):
    b, th = hig21
    assert induced_cycles(th, 5, [b.cells[0].vertices[0]]) == []
    with pytest.raises(ValidationError):
        induced_cycles(th, 2, th.nodes)
    with pytest.raises(ValidationError):
        region(b, 0)
    assert set(region(b, 1)) <= set(b.interior_vertices())


def test_matches_naive_enumeration(hig21):
    b, th = hig21
    small = region(b, 2)
    assert len(small) <= 20
    assert induced_cycles(th, 5, small) == induced_cycles_naive(th, 5, small)
    x = b.cells[0].vertices[0]
    near = sorted({x} | set(b.neighbors(x)) | {w for y in b.neighbors(x) for w in b.neighbors(y)})[:20]
    for k in (3, 4, 5):
        assert induced_cycles(th, k, near) == induced_cycles_naive(th, k, near)


def _random_graph(n, edges):
    adj = {v: set() for v in range(n)}
    for u, v in edges:
        if u != v:
            adj[u].add(v)
            adj[v].add(u)
    return ThetaBall(tuple(range(n)), adj, {v: True for v in range(n)}, 5)


@settings(max_examples=60, deadline=None)
@given(st.integers(5, 11).flatmap(
    lambda n: st.tuples(st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)),
                                               max_size=3 * n))),
    st.integers(3, 6))
def test_cycle_search_agrees_with_networkx(graph, k):
    n, edges = graph
    th = _random_graph(n, edges)
    fast = induced_cycles(th, k, range(n))
    assert fast == induced_cycles_naive(th, k, range(n))
    g = nx.Graph(th.edges)
    g.add_nodes_from(range(n))
    expected = set()
    for sub in itertools.combinations(range(n), k):
        h = g.subgraph(sub)
        if h.number_of_edges() == k and all(d == 2 for _, d in h.degree()) and nx.is_connected(h):
            expected.add(canonical_cycle([c[0] for c in nx.find_cycle(h)]))
    assert set(fast) == expected


@pytest.mark.parametrize("r,s,margin", [(2, 1, 1), (2, 2, 1), (3, 1, 1), (3, 1, 2)])
def test_correspondence(r, s, margin):
    b = build_ball(classical(), r, s)
    th = theta(b)
    rep = verify_correspondence(b, th, region(b, margin))
    assert rep.passed, rep.witnesses[:3]
    assert rep.details["induced_cycles"] == rep.details["cells_in_region"] > 0


def test_correspondence_mixed_sigma():
    b = build_ball(MIXED, 2, 2)
    rep = verify_correspondence(b, theta(b), region(b))
    assert rep.passed


def test_fault_injection(hig21):
    b, th = hig21
    x = b.cells[0].vertices
    broken = th.without_edge(x[0], x[1])
    rep = verify_correspondence(b, broken, region(b))
    assert not rep.passed
    assert any(w["kind"] == "cell_not_induced_cycle" and [x[0], x[1]] in w["missing_edges"]
               for w in rep.witnesses)


def test_boundary_region_rejected(hig21):
    b, th = hig21
    with pytest.raises(TruncationInsufficient):
        verify_correspondence(b, th, th.nodes)


def test_equivariance(hig21):
    b, th = hig21
    for tau in (0, 2):
        rep = theta_equivariance(th, b, tau)
        assert rep.passed and rep.details["pairs_checked"] > 0
    with pytest.raises(ValidationError):
        theta_equivariance(th, b)


def test_adversarial_relabeling():
    b = build_ball(MIXED, 2, 1)
    th = theta(b)
    # rotate the base cell by one step and fix everything else
    x = b.cells[0].vertices
    vmap = {w: w for w in th.nodes}
    for i in range(b.k):
        vmap[x[i]] = x[(i + 1) % b.k]
    rep = theta_equivariance(th, b, vertex_map=vmap)
    assert not rep.passed and rep.witnesses
    # and a swap of two vertices in different positions
    inner = b.interior_vertices()
    u = inner[0]
    v = next(w for w in inner if w != u and not th.has_edge(u, w)
             and len(th.adj[w]) != len(th.adj[u]))
    swap = {w: w for w in th.nodes}
    swap[u], swap[v] = v, u
    assert not theta_equivariance(th, b, vertex_map=swap).passed


def test_json_and_dot(hig21):
    b, th = hig21
    assert ThetaBall.from_json(json.loads(json.dumps(th.to_json()))) == th
    small = build_ball(classical(), 1, 1)
    st_ = theta(small)
    (g,) = pydot.graph_from_dot_data(theta_dot(small, st_))
    dashed = [e for e in g.get_edges() if e.get("style") == "dashed"]
    assert len(g.get_edges()) == len(small.edges) + len(dashed)
    assert len(dashed) == len([e for e in st_.edges if small.edge_between(*e) is None])
