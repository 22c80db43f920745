import json
import math

import pydot
import pytest

from higman_lines.bs_algebra import make_params, normalize, subgroup_membership
from higman_lines.errors import ResourceCapExceeded, TruncationInsufficient, ValidationError
from higman_lines.higman_complex import (
    DevelopedBall,
    LinkGraph,
    Sigma,
    act_f_sigma,
    build_ball,
    check_links,
    classical,
    common_power_witness,
    embeds_in,
    f_sigma,
    girth_check,
    link_of,
    make_sigma,
    quotient_check,
    skeleton_dot,
    stabilizer_intersection_class,
)

MIXED = make_sigma("1,2;2,3;1,2;2,3;1,2;2,3")


@pytest.fixture(scope="module")
def small():
    return build_ball(classical(), 2, 1)


@pytest.fixture(scope="module")
def medium():
    return build_ball(classical(), 2, 2)


def test_sigma_parsing():
    s = make_sigma("1,2;2,3;-3,2;1,-2")
    assert s.k == 4
    assert s.pairs[2] == (2, -3)
    # group of type-3 vertices comes from pair 2, which was swapped
    assert s.groups[3] == make_params(2, -3) and s.t_sign[3] == -1
    assert s.t_sign[0] == 1
    assert make_sigma([(1, 2)] * 4) == classical(4)
    assert Sigma.from_json(json.loads(json.dumps(s.to_json()))) == s
    with pytest.raises(ValidationError):
        make_sigma("1,2;1,2;1,2")
    with pytest.raises(ValidationError):
        make_sigma("1,2;2,2;1,2;1,2")
    with pytest.raises(ValidationError):
        make_sigma("1,2;x;1,2;1,2")


def test_f_sigma():
    assert f_sigma(classical()).order == 5
    assert f_sigma(MIXED).translations == (0, 2, 4)
    assert f_sigma(make_sigma("1,2;-1,-2;1,2;-1,-2")).order == 4
    assert f_sigma(make_sigma("1,2;1,3;1,2;1,2")).translations == (0,)


def test_cell_counts(small):
    # base cell, plus every cell at a base-cell vertex, within one generator
    assert len(build_ball(classical(), 0, 1).cells) == 1
    assert len(build_ball(classical(), 1, 1).cells) == 1 + 5 * 2
    assert len(small.cells) == 101
    with pytest.raises(ResourceCapExceeded):
        build_ball(classical(), 3, 2, max_cells=50)
    with pytest.raises(ValidationError):
        build_ball(classical(), 1, 0)


def test_cells_are_polygons(small):
    assert quotient_check(small).passed
    for c in small.cells:
        assert [small.vertices[v].type for v in c.vertices] == list(range(5))
        for i, e in enumerate(c.edges):
            edge = small.edges[e]
            assert (edge.src, edge.dst) == (c.vertices[i], c.vertices[(i + 1) % 5])


@pytest.mark.parametrize("threads", [1, 4])
def test_links(medium, threads):
    rep = check_links(medium, threads=threads)
    assert rep.passed, rep.witnesses[:3]
    assert int(rep.details["min_girth"]) >= 4


def test_mixed_sigma_links():
    b = build_ball(MIXED, 2, 2)
    assert check_links(b).passed
    assert quotient_check(b).passed


def test_link_of_boundary_raises(small):
    boundary = next(v.id for v in small.vertices if not v.interior)
    with pytest.raises(TruncationInsufficient):
        link_of(small, boundary)


def test_girth():
    square = LinkGraph(0, [0, 1], [2, 3], [(0, 2, 0), (0, 3, 1), (1, 2, 2), (1, 3, 3)])
    assert girth_check(square) == 4
    doubled = LinkGraph(0, [0], [1], [(0, 1, 0), (0, 1, 1)])
    assert girth_check(doubled) == 2
    tree = LinkGraph(0, [0], [1, 2], [(0, 1, 0), (0, 2, 1)])
    assert girth_check(tree) == math.inf


def test_stabilizer_classes(small):
    base = small.cells[0]
    v0, v1, v2 = base.vertices[:3]
    assert stabilizer_intersection_class(small, v0, v1) == "nontrivial_adjacent"
    # out-neighbours of one vertex share its a-line subgroup image
    x = next(v for v in small.interior_vertices() if len(small.out_neighbors(v)) >= 2)
    u, w = small.out_neighbors(x)[:2]
    assert stabilizer_intersection_class(small, u, w) == "nontrivial_common_source"
    assert stabilizer_intersection_class(small, v0, v2) == "trivial"
    with pytest.raises(ValidationError):
        stabilizer_intersection_class(small, v0, v0)


@pytest.mark.parametrize("s1,s2", [(s1, s2) for s1 in range(-3, 4) for s2 in range(-3, 4) if s1 < s2])
@pytest.mark.parametrize("sigma", [classical(), MIXED])
def test_common_power(sigma, s1, s2):
    for i in range(sigma.k):
        w = common_power_witness(sigma, i, s1, s2)
        assert w.exponent != 0
        # independent check via the raw relator orientation
        m, n = sigma.raw[(i - 1) % sigma.k]
        p = make_params(m, n)
        t_exp = 1 if abs(m) < abs(n) else -1
        for s in (s1, s2):
            conj = normalize(p, [("t", -t_exp * s), ("a", w.exponent), ("t", t_exp * s)])
            assert subgroup_membership(conj, "a") is not None


def test_common_power_validation():
    with pytest.raises(ValidationError):
        common_power_witness(classical(), 0, 1, 1)
    with pytest.raises(ValidationError):
        common_power_witness(classical(), 0, 0, 5)


def test_f_sigma_action(small):
    for tau in range(5):
        rel = act_f_sigma(small, tau)
        assert rel.report.passed, rel.report.witnesses
    b = build_ball(MIXED, 2, 1)
    assert act_f_sigma(b, 2).report.passed
    with pytest.raises(ValidationError):
        act_f_sigma(b, 1)


def test_embedding(small):
    assert embeds_in(build_ball(classical(), 1, 1), small)
    assert not embeds_in(small, build_ball(classical(), 1, 1))


def test_json_roundtrip_and_hash(small):
    data = json.loads(json.dumps(small.to_json()))
    again = DevelopedBall.from_json(data)
    assert again == small
    assert again.digest() == small.digest() == build_ball(classical(), 2, 1).digest()
    data["cells"][3]["depth"] += 1
    with pytest.raises(ValidationError):
        DevelopedBall.from_json(data)


def test_dot_parses(small):
    b = build_ball(classical(), 1, 1)
    (g,) = pydot.graph_from_dot_data(skeleton_dot(b))
    assert len(g.get_edges()) == len(b.edges)
