from __future__ import annotations

import json

import pydot
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from higman_lines.bs_algebra import make_params, multiply, normalize
from higman_lines.cayley_lines import (
    CayleyBall,
    GapReport,
    LambdaGraph,
    StandardLine,
    adjacency_predicate,
    bass_serre_address,
    ball,
    cayley_dot,
    comparability_check,
    containment_check,
    coordinate,
    count_strongly_comparable,
    gaps,
    gaps_bruteforce,
    geodesic,
    lambda_dot,
    lambda_graph,
    line_of,
    malnormal_check,
    tree_distance,
    tree_neighbors,
    tree_order,
    tree_degree_check,
    type_detection_witness,
)
from higman_lines.errors import ResourceCapExceeded, TruncationInsufficient, ValidationError

BS12 = make_params(1, 2)
BS23 = make_params(2, 3)
BS24 = make_params(2, 4)


def aline(p, word):
    return line_of(normalize(p, word), "a")


def naive_ball(p, radius):
    """Breadth-first search over raw words, deduplicated by normal form."""
    seen = {p.identity()}
    frontier = [""]
    for _ in range(radius):
        nxt = []
        for w in frontier:
            for c in "aAtT":
                g = normalize(p, w + c)
                if g not in seen:
                    seen.add(g)
                    nxt.append(w + c)
        frontier = nxt
    return seen


@pytest.fixture(scope="module")
def lam23():
    return lambda_graph(ball(BS23, 6))


@pytest.fixture(scope="module")
def lam24():
    return lambda_graph(ball(BS24, 5))


def test_small_balls():
    assert len(ball(BS23, 0)) == 1
    assert len(ball(BS23, 1)) == 5
    with pytest.raises(ValidationError):
        ball(BS23, -1)
    with pytest.raises(ResourceCapExceeded):
        ball(BS23, 8, max_vertices=100)


@pytest.mark.parametrize("p", [BS12, BS23, BS24])
def test_ball_matches_naive_enumeration(p):
    b = ball(p, 6)
    assert set(b.vertices) == naive_ball(p, 6)
    assert all(b.dist[v] <= 6 for v in b.vertices)


def test_line_of_examples():
    assert line_of(BS23.a(5), "a").rep == BS23.identity()
    assert line_of(normalize(BS12, "t a T"), "a").rep == BS12.identity()
    assert line_of(normalize(BS23, "t a"), "t") == line_of(normalize(BS23, "t a t^5"), "t")
    with pytest.raises(ValidationError):
        line_of(BS23.a(1), "b")


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([BS12, BS23, BS24]), st.lists(st.sampled_from("aAtT"), max_size=12),
       st.integers(-6, 6), st.sampled_from("at"))
def test_line_rep_is_stable_along_line(p, word, k, label):
    g = normalize(p, word)
    line = line_of(g, label)
    step = p.a(k) if label == "a" else p.t(k)
    h = multiply(g, step)
    assert line_of(h, label) == line
    assert coordinate(line, h) - coordinate(line, g) == k


def test_addresses_and_order():
    assert bass_serre_address(aline(BS24, "")).address == ()
    assert bass_serre_address(aline(BS24, "t")).address == ((0, 1),)
    e, tat = aline(BS24, ""), aline(BS24, "t a t")
    assert tree_distance(e, tat) == 2
    assert tree_order(e, tat) == "less"
    assert tree_order(tat, e) == "greater"
    assert tree_order(e, e) == "equal"
    s1, s2 = aline(BS24, "t"), aline(BS24, "a t")
    assert tree_order(s1, s2) == "incomparable"
    with pytest.raises(ValidationError):
        bass_serre_address(line_of(BS24.t(1), "t"))


@pytest.mark.parametrize("p", [BS12, BS23, BS24, make_params(3, 5)])
def test_tree_degrees(p):
    out, inn = tree_neighbors(aline(p, "t a T"))
    assert len(out) == abs(p.n) and len(inn) == p.m
    assert all(tree_order(aline(p, "t a T"), w) == "less" for w in out)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.sampled_from("aAtT"), max_size=10), st.lists(st.sampled_from("aAtT"), max_size=10))
def test_tree_order_antisymmetric(w1, w2):
    u, v = aline(BS23, w1), aline(BS23, w2)
    flip = {"less": "greater", "greater": "less", "equal": "equal", "incomparable": "incomparable"}
    assert tree_order(v, u) == flip[tree_order(u, v)]
    assert tree_distance(u, v) == len(geodesic(u, v)) - 1


def test_lambda_radius_zero():
    lam = lambda_graph(ball(BS23, 0))
    assert len(lam.nodes) == 2 and len(lam.links) == 1


def test_lambda_structure(lam24):
    assert len(lam24.links) == len(lam24.ball.vertices)
    assert lam24.is_bipartite()
    assert not lam24.has_multi_links()
    assert tree_degree_check(lam24).passed
    assert comparability_check(lam24).passed


def test_empty_link_at_distance_two():
    lam = lambda_graph(ball(BS24, 5))
    e, tat = aline(BS24, ""), aline(BS24, "t a t")
    assert not lam.common_tlines(e, tat)
    with pytest.raises(TruncationInsufficient):
        gaps(lam, e, tat)


def test_gaps_match_formula_and_oracle(lam23):
    e, up = aline(BS23, ""), aline(BS23, "t")
    rep = gaps(lam23, e, up)
    assert rep.passed and rep.d == 1
    assert rep.formula_gap == BS23.h * BS23.p
    assert gaps_bruteforce(lam23, e, up) % rep.formula_gap == 0
    back = gaps(lam23, up, e)
    assert back.direction == "lower" and back.measured_gap == 3
    assert GapReport.from_json(json.loads(json.dumps(rep.to_json()))) == rep


def test_containment_examples(lam23):
    u1, u2, u3 = aline(BS23, "T"), aline(BS23, ""), aline(BS23, "t")
    rep = containment_check(lam23, u1, u2, u3)
    assert rep.passed
    with pytest.raises(ValidationError):
        containment_check(lam23, u1, u1, u3)


def test_adjacency_distance_two_has_midpoint_witness(lam23):
    u1, u3 = aline(BS23, "T"), aline(BS23, "t")
    # the shared t-lines are too short to decide anything at radius 6
    with pytest.raises(TruncationInsufficient):
        adjacency_predicate(lam23, u1, u3)
    verdict = adjacency_predicate(lambda_graph(ball(BS23, 7)), u1, u3)
    assert verdict.value is False
    assert verdict.witness == (aline(BS23, ""),)
    assert adjacency_predicate(lam23, u1, aline(BS23, "")).value is True


def test_adjacency_rejects_incomparable(lam23):
    with pytest.raises(ValidationError):
        adjacency_predicate(lam23, aline(BS23, "t"), aline(BS23, "a t"))


def test_counts_bs23(lam23):
    assert count_strongly_comparable(lam23, aline(BS23, "t"), aline(BS23, "")) == (BS23.q, BS23.p)
    with pytest.raises(ValidationError):
        count_strongly_comparable(lam23, aline(BS23, ""), aline(BS23, "t"))


def test_type_detection(lam23):
    a_rep = type_detection_witness(lam23, aline(BS23, ""))
    assert a_rep.passed and len(a_rep.details["cover"]) == BS23.m
    t_rep = type_detection_witness(lam23, line_of(BS23.identity(), "t"))
    assert t_rep.passed and "uncovered_line" in t_rep.details


def test_malnormality():
    assert malnormal_check(ball(BS23, 6), 6).passed
    assert malnormal_check(ball(BS12, 6), 6).passed


def test_json_roundtrips(lam24):
    b = lam24.ball
    assert CayleyBall.from_json(json.loads(json.dumps(b.to_json()))) == b
    assert LambdaGraph.from_json(json.loads(json.dumps(lam24.to_json()))) == lam24
    u = aline(BS24, "t a T")
    assert StandardLine.from_json(BS24, u.to_json()) == u
    bad = u.to_json()
    bad["rep"]["tail"] = "3"
    with pytest.raises(ValidationError):
        StandardLine.from_json(BS24, bad)


def test_dot_output_parses(lam24):
    b = ball(BS23, 2)
    (g,) = pydot.graph_from_dot_data(cayley_dot(b))
    assert len(g.get_nodes()) >= len(b.vertices)
    assert len(g.get_edges()) == len(b.edges)
    (g2,) = pydot.graph_from_dot_data(lambda_dot(lambda_graph(b)))
    assert len(g2.get_edges()) == len(lambda_graph(b).links)
