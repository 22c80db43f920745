"""Finite pieces of the developed complex of a generalized Higman group.

The group is ``<a_0, ..., a_{k-1} | a_i a_{i+1}^{m_i} a_i^{-1} = a_{i+1}^{n_i}>``.
Its developed complex has one 2-cell per group element, a vertex of type ``j``
per coset of ``G_j = <a_{j-1}, a_j>`` and an edge of type ``j`` per coset of
``<a_j>``, running from the type-``j`` vertex to the type-``j+1`` vertex.

``G_j`` is a Baumslag-Solitar group with ``t = a_{j-1}`` and ``a = a_j``.
At a vertex of type ``j`` the incident edges are therefore the a-lines
(type ``j``, pointing out) and the t-lines (type ``j-1``, pointing in) of
that group, and the incident cells are its elements.

We never multiply in the Higman group itself.  Each vertex carries a *chart*,
a partial bijection between the cells at that vertex and elements of its
vertex group, rooted at the cell that first created the vertex.  Going across
an edge changes charts by a known rule: if cells ``C`` and ``D`` at a
type-``j`` vertex differ by ``a_j^c`` (so they sit on one a-line), then at
the type-``j+1`` vertex across that edge they differ by ``a_j^c`` again,
which is ``t^c`` there.  The same holds for t-lines and the previous vertex.
"""

from __future__ import annotations

import hashlib
import itertools
import math
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import cayley_lines as cl
from .bs_algebra import BsElement, BsParams, invert, make_params, multiply, normalize, subgroup_membership
from .errors import ChartInconsistency, ResourceCapExceeded, TruncationInsufficient, ValidationError
from .reports import FAIL, PASS, SCHEMA_VERSION, Report, dumps

DEFAULT_MAX_CELLS = int(os.environ.get("HIGMAN_LINES_MAX_CELLS", "400000"))


# -- presentations ---------------------------------------------------------------

@dataclass(frozen=True)
class Sigma:
    """Relator exponents ``(m_i, n_i)``, indices in ``Z/kZ``.

    ``raw`` keeps the pairs as given; ``groups[j]`` is the canonical
    Baumslag-Solitar group at vertices of type ``j`` (built from pair ``j-1``)
    and ``t_sign[j]`` is ``-1`` when canonicalizing swapped ``m`` and ``n``,
    i.e. when ``a_{j-1}`` is ``t^-1`` of that group.
    """

    raw: Tuple[Tuple[int, int], ...]
    pairs: Tuple[Tuple[int, int], ...] = field(init=False, compare=False)
    groups: Tuple[BsParams, ...] = field(init=False, compare=False, repr=False)
    t_sign: Tuple[int, ...] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        k = len(self.raw)
        if k < 4:
            raise ValidationError(f"need at least 4 generators, got {k}")
        canon, swapped = [], []
        for m, n in self.raw:
            p = make_params(m, n)
            canon.append(p)
            swapped.append(abs(m) > abs(n))
        object.__setattr__(self, "pairs", tuple((p.m, p.n) for p in canon))
        object.__setattr__(self, "groups", tuple(canon[(j - 1) % k] for j in range(k)))
        object.__setattr__(self, "t_sign", tuple(-1 if swapped[(j - 1) % k] else 1 for j in range(k)))

    @property
    def k(self) -> int:
        return len(self.raw)

    def __str__(self):
        return ";".join(f"{m},{n}" for m, n in self.raw)

    def to_json(self):
        return {"raw": [[m, n] for m, n in self.raw], "pairs": [[m, n] for m, n in self.pairs]}

    @classmethod
    def from_json(cls, data):
        return make_sigma([tuple(p) for p in data["raw"]])


def make_sigma(pairs) -> Sigma:
    """Build a presentation from pairs or from ``"m1,n1;m2,n2;..."`` text."""
    if isinstance(pairs, str):
        try:
            pairs = [tuple(int(x) for x in chunk.split(",")) for chunk in pairs.split(";") if chunk.strip()]
        except ValueError as exc:
            raise ValidationError(f"bad sigma syntax: {exc}") from None
    out = []
    for pair in pairs:
        if len(pair) != 2:
            raise ValidationError(f"each entry needs two integers, got {pair!r}")
        out.append((int(pair[0]), int(pair[1])))
    return Sigma(tuple(out))


def classical(k: int = 5) -> Sigma:
    return make_sigma([(1, 2)] * k)


@dataclass(frozen=True)
class FSigma:
    k: int
    translations: Tuple[int, ...]

    def __contains__(self, tau):
        return tau % self.k in self.translations

    @property
    def order(self) -> int:
        return len(self.translations)

    def to_json(self):
        return {"schema": SCHEMA_VERSION, "kind": "f_sigma", "k": self.k,
                "translations": list(self.translations), "order": self.order}

    @classmethod
    def from_json(cls, data) -> "FSigma":
        return cls(int(data["k"]), tuple(int(t) for t in data["translations"]))


def f_sigma(sigma: Sigma) -> FSigma:
    """Translations of Z/kZ that carry each relator pair to itself up to sign."""
    k = sigma.k
    good = []
    for tau in range(k):
        ok = True
        for i in range(k):
            m, n = sigma.raw[i]
            mt, nt = sigma.raw[(i + tau) % k]
            if (mt, nt) != (m, n) and (mt, nt) != (-m, -n):
                ok = False
                break
        if ok:
            good.append(tau)
    return FSigma(k, tuple(good))


# -- the developed ball ----------------------------------------------------------

@dataclass
class Vertex:
    id: int
    type: int
    chart: Dict[BsElement, int] = field(default_factory=dict)
    alines: Dict[BsElement, int] = field(default_factory=dict)  # a-line rep -> out-edge
    tlines: Dict[BsElement, int] = field(default_factory=dict)  # t-line rep -> in-edge
    interior: bool = False


@dataclass
class Edge:
    id: int
    type: int
    src: int
    dst: int
    ref: Tuple[BsElement, BsElement]  # chart elements of one cell on the edge at src, dst


@dataclass
class Cell:
    id: int
    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]
    charts: Tuple[BsElement, ...]
    depth: int
    address: Tuple[Tuple[int, BsElement], ...]


@dataclass(frozen=True)
class ModelPolygon:
    k: int

    @property
    def vertices(self):
        return tuple(range(self.k))

    @property
    def edges(self):
        return tuple((i, (i + 1) % self.k) for i in range(self.k))

    base_cell: int = 0


class DevelopedBall:
    """Cells within ``r`` chart steps of the base cell, stars cut at word length ``s``."""

    def __init__(self, sigma: Sigma, r: int, s: int):
        self.sigma = sigma
        self.r = r
        self.s = s
        self.vertices: List[Vertex] = []
        self.edges: List[Edge] = []
        self.cells: List[Cell] = []
        self._pair_edge: Dict[Tuple[int, int], int] = {}

    @property
    def k(self):
        return self.sigma.k

    @property
    def polygon(self) -> ModelPolygon:
        return ModelPolygon(self.k)

    def group(self, j: int) -> BsParams:
        return self.sigma.groups[j % self.k]

    # -- construction helpers ------------------------------------------------
    def _new_vertex(self, j: int) -> Vertex:
        v = Vertex(len(self.vertices), j % self.k)
        self.vertices.append(v)
        return v

    def _edge_between(self, i, vi: Vertex, ei: BsElement, vn: Vertex, en: BsElement) -> int:
        """The type-``i`` edge from ``vi`` to ``vn`` through cells at ``ei``/``en``."""
        akey = cl.line_of(ei, "a").rep
        tkey = cl.line_of(en, "t").rep
        eid = vi.alines.get(akey)
        other = vn.tlines.get(tkey)
        if eid is None and other is None:
            if (vi.id, vn.id) in self._pair_edge:
                raise ChartInconsistency(f"second edge between vertices {vi.id} and {vn.id}")
            eid = len(self.edges)
            self.edges.append(Edge(eid, i % self.k, vi.id, vn.id, (ei, en)))
            vi.alines[akey] = eid
            vn.tlines[tkey] = eid
            self._pair_edge[(vi.id, vn.id)] = eid
            return eid
        if eid != other:
            raise ChartInconsistency(
                f"edge tables disagree between vertices {vi.id} and {vn.id}: {eid} vs {other}"
            )
        return eid

    def _across_out(self, v: Vertex, elem: BsElement):
        """Follow the out-edge of ``v`` on the a-line of ``elem``."""
        eid = v.alines.get(cl.line_of(elem, "a").rep)
        if eid is None:
            return None
        e = self.edges[eid]
        c = elem.tail - e.ref[0].tail
        far = self.vertices[e.dst]
        sign = self.sigma.t_sign[far.type]
        return far, multiply(e.ref[1], self.group(far.type).t(sign * c))

    def _across_in(self, v: Vertex, elem: BsElement):
        """Follow the in-edge of ``v`` on the t-line of ``elem``."""
        eid = v.tlines.get(cl.line_of(elem, "t").rep)
        if eid is None:
            return None
        e = self.edges[eid]
        c = subgroup_membership(multiply(invert(e.ref[1]), elem), "t")
        far = self.vertices[e.src]
        sign = self.sigma.t_sign[v.type]
        return far, multiply(e.ref[0], self.group(far.type).a(sign * c))

    def _add_cell(self, v: Vertex, elem: BsElement, depth: int, address) -> Cell:
        k = self.k
        j = v.type
        verts: List[Optional[Vertex]] = [None] * k
        elems: List[Optional[BsElement]] = [None] * k
        verts[j], elems[j] = v, elem
        # forward along out-edges
        i = j
        steps_fwd = 0
        while steps_fwd < k - 1:
            hop = self._across_out(verts[i], elems[i])
            if hop is None:
                break
            i = (i + 1) % k
            verts[i], elems[i] = hop
            steps_fwd += 1
        # backward along in-edges
        i = j
        steps_bwd = 0
        while steps_fwd + steps_bwd < k - 1:
            hop = self._across_in(verts[i], elems[i])
            if hop is None:
                break
            i = (i - 1) % k
            verts[i], elems[i] = hop
            steps_bwd += 1
        for i in range(k):
            if verts[i] is None:
                verts[i] = self._new_vertex(i)
                elems[i] = self.group(i).identity()
        cid = len(self.cells)
        for i in range(k):
            if elems[i] in verts[i].chart:
                raise ChartInconsistency(
                    f"chart slot {elems[i]} at vertex {verts[i].id} already holds cell "
                    f"{verts[i].chart[elems[i]]}"
                )
        for i in range(k):
            verts[i].chart[elems[i]] = cid
        eids = tuple(
            self._edge_between(i, verts[i], elems[i], verts[(i + 1) % k], elems[(i + 1) % k])
            for i in range(k)
        )
        cell = Cell(cid, tuple(x.id for x in verts), eids, tuple(elems), depth, tuple(address))
        self.cells.append(cell)
        return cell

    # -- queries ---------------------------------------------------------------
    def locate(self, address) -> Optional[int]:
        """Follow a chart address from the base cell; None if it leaves the ball."""
        cur = self.cells[0]
        for j, h in address:
            v = self.vertices[cur.vertices[j]]
            cid = v.chart.get(multiply(cur.charts[j], h))
            if cid is None:
                return None
            cur = self.cells[cid]
        return cur.id

    def cells_at(self, vid: int) -> List[int]:
        return sorted(self.vertices[vid].chart.values())

    def neighbors(self, vid: int) -> List[int]:
        v = self.vertices[vid]
        out = [self.edges[e].dst for e in v.alines.values()]
        inn = [self.edges[e].src for e in v.tlines.values()]
        return sorted(set(out + inn))

    def out_neighbors(self, vid: int) -> List[int]:
        return sorted({self.edges[e].dst for e in self.vertices[vid].alines.values()})

    def in_neighbors(self, vid: int) -> List[int]:
        return sorted({self.edges[e].src for e in self.vertices[vid].tlines.values()})

    def edge_between(self, v1: int, v2: int) -> Optional[int]:
        return self._pair_edge.get((v1, v2), self._pair_edge.get((v2, v1)))

    def interior_vertices(self) -> List[int]:
        return [v.id for v in self.vertices if v.interior]

    def interior_cells(self) -> List[int]:
        return [c.id for c in self.cells if c.depth < self.r]

    # -- serialization -----------------------------------------------------------
    def to_json(self, with_hash: bool = True) -> dict:
        data = {
            "schema": SCHEMA_VERSION,
            "kind": "developed_ball",
            "sigma": self.sigma.to_json(),
            "r": self.r,
            "s": self.s,
            "vertices": [[v.id, v.type, v.interior] for v in self.vertices],
            "edges": [[e.id, e.type, e.src, e.dst] for e in self.edges],
            "cells": [
                {
                    "id": c.id,
                    "depth": c.depth,
                    "vertices": list(c.vertices),
                    "edges": list(c.edges),
                    "charts": [x.to_json() for x in c.charts],
                    "address": [[j, h.to_json()] for j, h in c.address],
                }
                for c in self.cells
            ],
        }
        if with_hash:
            data["sha256"] = self.digest()
        return data

    def digest(self) -> str:
        return hashlib.sha256(dumps(self.to_json(with_hash=False)).encode()).hexdigest()

    @classmethod
    def from_json(cls, data: dict) -> "DevelopedBall":
        sigma = Sigma.from_json(data["sigma"])
        ball = cls(sigma, int(data["r"]), int(data["s"]))
        for vid, typ, interior in data["vertices"]:
            ball.vertices.append(Vertex(vid, typ, interior=bool(interior)))
        for cdata in data["cells"]:
            charts = tuple(
                BsElement.from_json(ball.group(j), x) for j, x in enumerate(cdata["charts"])
            )
            address = tuple((j, BsElement.from_json(ball.group(j), h)) for j, h in cdata["address"])
            ball.cells.append(Cell(cdata["id"], tuple(cdata["vertices"]), tuple(cdata["edges"]),
                                   charts, cdata["depth"], address))
        for eid, typ, src, dst in data["edges"]:
            ball.edges.append(Edge(eid, typ, src, dst, None))
        for c in ball.cells:
            for i, (vid, x) in enumerate(zip(c.vertices, c.charts)):
                ball.vertices[vid].chart[x] = c.id
                e = ball.edges[c.edges[i]]
                nxt = (i + 1) % ball.k
                if e.ref is None:
                    e.ref = (x, c.charts[nxt])
                ball.vertices[vid].alines[cl.line_of(x, "a").rep] = e.id
                ball.vertices[c.vertices[nxt]].tlines[cl.line_of(c.charts[nxt], "t").rep] = e.id
        for e in ball.edges:
            ball._pair_edge[(e.src, e.dst)] = e.id
        if "sha256" in data and ball.digest() != data["sha256"]:
            raise ValidationError("developed ball does not match its recorded hash")
        return ball

    def __eq__(self, other):
        return isinstance(other, DevelopedBall) and self.to_json(False) == other.to_json(False)

    __hash__ = None


def build_ball(sigma: Sigma, r: int, s: int, max_cells: Optional[int] = None) -> DevelopedBall:
    """Breadth-first development from the base cell.

    Every cell at depth ``< r`` is expanded: at each of its vertices, all cells
    whose chart element differs from it by a word of length ``<= s`` in that
    vertex group are added (at depth + 1) if not already present.  Vertices of
    expanded cells are flagged interior.
    """
    if r < 0:
        raise ValidationError("r must be >= 0")
    if s < 1:
        raise ValidationError("s must be >= 1")
    cap = DEFAULT_MAX_CELLS if max_cells is None else max_cells
    ball = DevelopedBall(sigma, r, s)
    k = sigma.k
    stars = [cl.ball(sigma.groups[j], s).vertices for j in range(k)]
    ball._add_cell(ball._new_vertex(0), sigma.groups[0].identity(), 0, ())
    frontier = [0]
    for depth in range(r):
        nxt = []
        for cid in frontier:
            cell = ball.cells[cid]
            for j in range(k):
                v = ball.vertices[cell.vertices[j]]
                v.interior = True
                for h in stars[j]:
                    x = multiply(cell.charts[j], h)
                    if x in v.chart:
                        continue
                    new = ball._add_cell(v, x, depth + 1, cell.address + ((j, h),))
                    nxt.append(new.id)
                    if len(ball.cells) > cap:
                        raise ResourceCapExceeded(
                            f"development of {sigma} with r={r}, s={s} exceeds {cap} cells"
                        )
        frontier = nxt
    return ball


# -- links -------------------------------------------------------------------------

@dataclass
class LinkGraph:
    """Link of a vertex: nodes are incident edges, links are incident cells."""

    vertex: int
    out_edges: List[int]
    in_edges: List[int]
    links: List[Tuple[int, int, int]]  # (out_edge, in_edge, cell)

    def is_bipartite(self) -> bool:
        outs, ins = set(self.out_edges), set(self.in_edges)
        return not (outs & ins) and all(o in outs and i in ins for o, i, _ in self.links)


def link_of(ball: DevelopedBall, vid: int) -> LinkGraph:
    v = ball.vertices[vid]
    if not v.interior:
        raise TruncationInsufficient(f"vertex {vid} is on the boundary of the ball")
    links = []
    for x, cid in v.chart.items():
        o = v.alines[cl.line_of(x, "a").rep]
        i = v.tlines[cl.line_of(x, "t").rep]
        links.append((o, i, cid))
    links.sort(key=lambda x: x[2])
    return LinkGraph(vid, sorted(v.alines.values()), sorted(v.tlines.values()), links)


def girth_check(link: LinkGraph) -> float:
    """Length of the shortest cycle, counting a doubled link as a 2-cycle; inf if none."""
    seen = set()
    for o, i, _ in link.links:
        if (o, i) in seen:
            return 2
        seen.add((o, i))
    adj: Dict[Tuple[str, int], list] = {}
    for o, i, _ in link.links:
        adj.setdefault(("o", o), []).append(("i", i))
        adj.setdefault(("i", i), []).append(("o", o))
    best = math.inf
    for root in sorted(adj):
        dist = {root: 0}
        parent = {root: None}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            if 2 * dist[x] + 1 >= best:
                break
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def _link_matches_lambda(ball: DevelopedBall, vid: int, lam: cl.LambdaGraph) -> Optional[str]:
    """Compare the star of ``vid`` around its first expanded cell with the line graph."""
    v = ball.vertices[vid]
    ref = min(c for c in v.chart.values() if ball.cells[c].depth < ball.r)
    cell = ball.cells[ref]
    g0 = cell.charts[cell.vertices.index(vid)]
    out_map: Dict[int, cl.StandardLine] = {}
    in_map: Dict[int, cl.StandardLine] = {}
    for h in lam.ball.vertices:
        x = multiply(g0, h)
        if x not in v.chart:
            return f"cell at chart element {x} missing"
        la, lt = lam.lines_at[h]
        o = v.alines[cl.line_of(x, "a").rep]
        i = v.tlines[cl.line_of(x, "t").rep]
        if out_map.setdefault(o, la) != la or in_map.setdefault(i, lt) != lt:
            return f"edge {o if out_map[o] != la else i} carries two lines"
    if len(set(out_map.values())) != len(out_map) or len(set(in_map.values())) != len(in_map):
        return "two edges carry the same line"
    if len(out_map) + len(in_map) != len(lam.nodes):
        return "node counts differ"
    return None


def check_links(ball: DevelopedBall, threads: int = 1) -> Report:
    """Interior links: bipartite, girth >= 4, and isomorphic to the truncated line graph."""
    lambdas = [cl.lambda_graph(cl.ball(ball.group(j), ball.s)) for j in range(ball.k)]
    interior = ball.interior_vertices()

    def one(vid):
        link = link_of(ball, vid)
        problems = []
        v = ball.vertices[vid]
        if not link.is_bipartite():
            problems.append("not bipartite")
        if any(ball.edges[e].src != vid or ball.edges[e].type != v.type for e in link.out_edges):
            problems.append("out-edge orientation")
        if any(ball.edges[e].dst != vid or ball.edges[e].type != (v.type - 1) % ball.k
               for e in link.in_edges):
            problems.append("in-edge orientation")
        g = girth_check(link)
        if g < 4:
            problems.append(f"girth {g}")
        bad = _link_matches_lambda(ball, vid, lambdas[v.type])
        if bad:
            problems.append(bad)
        return vid, g, problems

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, interior))
    else:
        results = [one(v) for v in interior]
    witnesses = [{"vertex": vid, "problems": p} for vid, _, p in results if p]
    girths = [g for _, g, _ in results]
    details = {
        "r": ball.r, "s": ball.s, "interior_vertices": len(interior),
        "min_girth": None if not girths else (str(min(girths)) if min(girths) != math.inf else "inf"),
    }
    return Report("interior_links", FAIL if witnesses else PASS, details, witnesses)


def quotient_check(ball: DevelopedBall) -> Report:
    """Each cell maps onto the model polygon: one vertex and one edge of every type, in order."""
    k = ball.k
    witnesses = []
    for c in ball.cells:
        types = [ball.vertices[v].type for v in c.vertices]
        etypes = [ball.edges[e].type for e in c.edges]
        ends = [(ball.edges[e].src, ball.edges[e].dst) for e in c.edges]
        if (types != list(range(k)) or etypes != list(range(k))
                or ends != [(c.vertices[i], c.vertices[(i + 1) % k]) for i in range(k)]
                or len(set(c.vertices)) != k):
            witnesses.append({"cell": c.id})
    shared = {}
    for c in ball.cells:
        for a, b in itertools.combinations(sorted(c.edges), 2):
            shared.setdefault((a, b), []).append(c.id)
    for pair, cids in shared.items():
        if len(cids) > 1:
            witnesses.append({"cells_sharing_two_edges": cids, "edges": list(pair)})
    details = {"cells": len(ball.cells), "vertices": len(ball.vertices), "edges": len(ball.edges)}
    return Report("quotient", FAIL if witnesses else PASS, details, witnesses)


# -- stabilizers ------------------------------------------------------------------------

def stabilizer_intersection_class(ball: DevelopedBall, v1: int, v2: int) -> str:
    """``nontrivial_adjacent`` / ``nontrivial_common_source`` / ``trivial``.

    Adjacent vertices share an edge group.  Otherwise the stabilizers meet
    exactly when both are reached from a common vertex along out-edges.  Only
    mediators present in the ball can be found, so a negative answer is only
    given for interior vertices.
    """
    if v1 == v2:
        raise ValidationError("vertices must be distinct")
    if ball.edge_between(v1, v2) is not None:
        return "nontrivial_adjacent"
    if ball.vertices[v1].type == ball.vertices[v2].type:
        if set(ball.in_neighbors(v1)) & set(ball.in_neighbors(v2)):
            return "nontrivial_common_source"
    if not (ball.vertices[v1].interior and ball.vertices[v2].interior):
        raise TruncationInsufficient(f"a mediator for {v1}, {v2} could lie outside the ball")
    return "trivial"


@dataclass(frozen=True)
class PowerWitness:
    i: int
    s1: int
    s2: int
    exponent: int
    params: BsParams

    def to_json(self):
        return {"i": self.i, "s1": self.s1, "s2": self.s2, "exponent": str(self.exponent),
                "element": f"a_{self.i}^{self.exponent}", "group": self.params.to_json()}

    @classmethod
    def from_json(cls, data) -> "PowerWitness":
        return cls(int(data["i"]), int(data["s1"]), int(data["s2"]), int(data["exponent"]),
                   BsParams.from_json(data["group"]))


def common_power_witness(sigma: Sigma, i: int, s1: int, s2: int, bound: int = 3) -> PowerWitness:
    """A nontrivial power of ``a_i`` in both ``a_{i-1}^s G a_{i-1}^-s`` (s = s1, s2).

    Works inside ``G_i = <a_{i-1}, a_i>``, where conjugating by ``t^s`` turns
    ``a^{|n|^s}`` (``s >= 0``) or ``a^{m^|s|}`` (``s < 0``) into a power of ``a``.
    The exponent is checked by normal forms before it is returned.
    """
    if s1 == s2:
        raise ValidationError("s1 and s2 must differ")
    if max(abs(s1), abs(s2)) > bound:
        raise ValidationError(f"|s| exceeds bound {bound}")
    j = i % sigma.k
    params = sigma.groups[j]
    sign = sigma.t_sign[j]

    def needed(s):
        s = sign * s
        return abs(params.n) ** s if s >= 0 else params.m ** (-s)

    big = math.lcm(needed(s1), needed(s2))
    for s in (s1, s2):
        st = sign * s
        conj = normalize(params, [("t", -st), ("a", big), ("t", st)])
        if subgroup_membership(conj, "a") is None:
            raise AssertionError(f"a^{big} not in the conjugate by a_{{i-1}}^{s}")
    return PowerWitness(j, s1, s2, big, params)


# -- symmetry -------------------------------------------------------------------------

@dataclass
class Relabeling:
    tau: int
    cells: Dict[int, int]
    vertices: Dict[int, int]
    edges: Dict[int, int]
    report: Report


def act_f_sigma(ball: DevelopedBall, tau: int) -> Relabeling:
    """Rotate types by ``tau`` and check it is an automorphism of the ball.

    Cells are matched through their chart addresses with shifted types; the
    chart elements themselves are unchanged because the two vertex groups
    have identical presentations.
    """
    fs = f_sigma(ball.sigma)
    if tau not in fs:
        raise ValidationError(f"translation {tau} is not in F_sigma = {list(fs.translations)}")
    k = ball.k
    tau %= k
    cmap: Dict[int, int] = {}
    vmap: Dict[int, int] = {}
    emap: Dict[int, int] = {}
    witnesses = []
    for c in ball.cells:
        image = ball.locate(tuple(((j + tau) % k, h) for j, h in c.address))
        if image is None:
            witnesses.append({"cell": c.id, "problem": "image outside ball"})
            continue
        cmap[c.id] = image
        ic = ball.cells[image]
        for j in range(k):
            jt = (j + tau) % k
            for mp, a, b in ((vmap, c.vertices[j], ic.vertices[jt]), (emap, c.edges[j], ic.edges[jt])):
                if mp.setdefault(a, b) != b:
                    witnesses.append({"cell": c.id, "problem": "not well defined", "item": a})
    for name, mp, total in (("cells", cmap, len(ball.cells)), ("vertices", vmap, len(ball.vertices)),
                            ("edges", emap, len(ball.edges))):
        if len(set(mp.values())) != len(mp) or len(mp) != total:
            witnesses.append({"problem": f"{name} map is not a bijection"})
    for e in ball.edges:
        if e.id in emap:
            f = ball.edges[emap[e.id]]
            if (vmap.get(e.src), vmap.get(e.dst)) != (f.src, f.dst) or f.type != (e.type + tau) % k:
                witnesses.append({"edge": e.id, "problem": "orientation or type"})
    for v in ball.vertices:
        if v.id in vmap and ball.vertices[vmap[v.id]].interior != v.interior:
            witnesses.append({"vertex": v.id, "problem": "interior flag"})
    details = {"tau": tau, "cells": len(cmap), "vertices": len(vmap), "edges": len(emap)}
    report = Report("f_sigma_action", FAIL if witnesses else PASS, details, witnesses[:20])
    return Relabeling(tau, cmap, vmap, emap, report)


def embeds_in(small: DevelopedBall, big: DevelopedBall) -> bool:
    """Do all cells of ``small`` appear in ``big`` with the same incidences?"""
    vmap = {}
    for c in small.cells:
        image = big.locate(c.address)
        if image is None:
            return False
        ic = big.cells[image]
        for a, b in zip(c.vertices, ic.vertices):
            if vmap.setdefault(a, b) != b:
                return False
    return len(set(vmap.values())) == len(vmap)


# -- DOT -------------------------------------------------------------------------------

_PALETTE = ["red", "blue", "darkgreen", "orange", "purple", "brown", "magenta", "cyan"]


def skeleton_dot(ball: DevelopedBall, extra_edges: Sequence[Tuple[int, int]] = ()) -> str:
    out = ["digraph developed {", f'  label="sigma {ball.sigma} r={ball.r} s={ball.s}";']
    for v in ball.vertices:
        color = _PALETTE[v.type % len(_PALETTE)]
        shape = "doublecircle" if v.interior else "circle"
        out.append(f'  v{v.id} [label="{v.id}:x{v.type}", color={color}, shape={shape}];')
    for e in ball.edges:
        color = _PALETTE[e.type % len(_PALETTE)]
        out.append(f'  v{e.src} -> v{e.dst} [color={color}, label="e{e.type}"];')
    for a, b in extra_edges:
        out.append(f"  v{a} -> v{b} [style=dashed, dir=none, color=gray];")
    out.append("}")
    return "\n".join(out) + "\n"
