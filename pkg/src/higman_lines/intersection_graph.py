"""The intersection graph of vertex stabilizers on a developed ball.

Two vertices are joined when their stabilizers meet nontrivially, which on
the complex means: they share an edge, or both are reached from one vertex
along out-edges.  Inside a deep enough region the induced k-cycles of this
graph are exactly the boundaries of 2-cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import ResourceCapExceeded, TruncationInsufficient, ValidationError
from .higman_complex import DevelopedBall, act_f_sigma
from .reports import FAIL, PASS, SCHEMA_VERSION, Report

DEFAULT_CYCLE_CAP = 2_000_000


@dataclass
class ThetaBall:
    nodes: Tuple[int, ...]
    adj: Dict[int, Set[int]]
    interior: Dict[int, bool]
    k: int

    @property
    def edges(self) -> List[Tuple[int, int]]:
        return sorted((u, v) for u in self.adj for v in self.adj[u] if u < v)

    def has_edge(self, u, v) -> bool:
        return v in self.adj.get(u, ())

    def certain(self, u, v) -> bool:
        """Non-edges are only trusted between interior vertices."""
        return self.interior[u] and self.interior[v]

    def without_edge(self, u, v) -> "ThetaBall":
        adj = {x: set(ys) for x, ys in self.adj.items()}
        adj[u].discard(v)
        adj[v].discard(u)
        return ThetaBall(self.nodes, adj, dict(self.interior), self.k)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "theta",
            "k": self.k,
            "nodes": [[v, self.interior[v]] for v in self.nodes],
            "edges": [list(e) for e in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ThetaBall":
        nodes = tuple(v for v, _ in data["nodes"])
        adj = {v: set() for v in nodes}
        for u, v in data["edges"]:
            adj[u].add(v)
            adj[v].add(u)
        return cls(nodes, adj, {v: bool(f) for v, f in data["nodes"]}, int(data["k"]))

    def __eq__(self, other):
        return isinstance(other, ThetaBall) and self.to_json() == other.to_json()

    __hash__ = None


def theta(ball: DevelopedBall, nodes: Optional[Iterable[int]] = None) -> ThetaBall:
    """Intersection graph on ``nodes`` (default: every vertex of the ball)."""
    keep = set(range(len(ball.vertices))) if nodes is None else set(nodes)
    adj: Dict[int, Set[int]] = {v: set() for v in keep}
    for e in ball.edges:
        if e.src in keep and e.dst in keep:
            adj[e.src].add(e.dst)
            adj[e.dst].add(e.src)
    for x in range(len(ball.vertices)):
        outs = [w for w in ball.out_neighbors(x) if w in keep]
        for u, v in itertools.combinations(outs, 2):
            adj[u].add(v)
            adj[v].add(u)
    order = tuple(sorted(keep))
    return ThetaBall(order, adj, {v: ball.vertices[v].interior for v in order}, ball.k)


def region(ball: DevelopedBall, margin: int = 1) -> List[int]:
    """Vertices of cells at depth ``<= r - margin``.

    ``margin = 1`` gives exactly the vertices whose stars were expanded.
    Larger margins move further from the truncation boundary.
    """
    if margin < 1:
        raise ValidationError("margin must be >= 1 (depth-r cells are never expanded)")
    limit = ball.r - margin
    return sorted({v for c in ball.cells if c.depth <= limit for v in c.vertices})


def canonical_cycle(seq: Sequence[int]) -> Tuple[int, ...]:
    """Lexicographically least rotation/reflection."""
    n = len(seq)
    best = None
    for s in (list(seq), list(reversed(seq))):
        for i in range(n):
            cand = tuple(s[i:] + s[:i])
            if best is None or cand < best:
                best = cand
    return best


def induced_cycles(th: ThetaBall, k: int, region_nodes: Iterable[int],
                   cap: int = DEFAULT_CYCLE_CAP) -> List[Tuple[int, ...]]:
    """All induced k-cycles inside the region, each in canonical form, sorted."""
    if k < 3:
        raise ValidationError("cycle length must be at least 3")
    inside = set(region_nodes)
    adj = {v: sorted(w for w in th.adj.get(v, ()) if w in inside) for v in inside}
    found = []
    work = 0

    def extend(path):
        nonlocal work
        last = path[-1]
        start = path[0]
        for w in adj[last]:
            work += 1
            if work > cap:
                raise ResourceCapExceeded(f"cycle search exceeded {cap} steps; shrink the region")
            if w <= start or w in path:
                continue
            # w may only touch the previous node (and the start, when closing)
            inner = path[1:-1]
            if any(th.has_edge(w, x) for x in inner):
                continue
            touches_start = th.has_edge(w, start)
            if len(path) == k - 1:
                if touches_start and path[1] < w:
                    found.append(tuple(path + [w]))
            elif not touches_start:
                extend(path + [w])

    for s in sorted(inside):
        for x in adj[s]:
            if x > s:
                extend([s, x])
    return sorted(canonical_cycle(c) for c in found)


def induced_cycles_naive(th: ThetaBall, k: int, region_nodes: Iterable[int]) -> List[Tuple[int, ...]]:
    """Same answer by testing every k-subset; only for small regions."""
    nodes = sorted(region_nodes)
    if len(nodes) > 20:
        raise ResourceCapExceeded("naive enumeration is limited to 20 nodes")
    out = []
    for sub in itertools.combinations(nodes, k):
        sub_adj = {v: [w for w in sub if w != v and th.has_edge(v, w)] for v in sub}
        if any(len(ws) != 2 for ws in sub_adj.values()):
            continue
        # walk the 2-regular subgraph; it is a k-cycle iff the walk covers it
        prev, cur, seq = None, sub[0], []
        while True:
            seq.append(cur)
            nxt = [w for w in sub_adj[cur] if w != prev][0]
            prev, cur = cur, nxt
            if cur == sub[0]:
                break
        if len(seq) == k:
            out.append(canonical_cycle(seq))
    return sorted(out)


def verify_correspondence(ball: DevelopedBall, th: ThetaBall, region_nodes: Iterable[int],
                          cap: int = DEFAULT_CYCLE_CAP) -> Report:
    """Induced k-cycles in the region are exactly the 2-cell boundaries in it."""
    nodes = sorted(set(region_nodes))
    outside = [v for v in nodes if not ball.vertices[v].interior]
    if outside:
        raise TruncationInsufficient(f"region contains boundary vertices, e.g. {outside[:5]}")
    k = ball.k
    inside = set(nodes)
    cell_cycles: Dict[Tuple[int, ...], List[int]] = {}
    for c in ball.cells:
        if all(v in inside for v in c.vertices):
            cell_cycles.setdefault(canonical_cycle(c.vertices), []).append(c.id)
    cycles = induced_cycles(th, k, nodes, cap)
    cycle_set = set(cycles)
    witnesses = []
    for cyc, cids in sorted(cell_cycles.items()):
        if len(cids) > 1:
            witnesses.append({"kind": "cells_share_boundary", "cells": cids, "cycle": list(cyc)})
        if cyc not in cycle_set:
            cell = ball.cells[cids[0]]
            verts = cell.vertices
            missing = [[verts[i], verts[(i + 1) % k]] for i in range(k)
                       if not th.has_edge(verts[i], verts[(i + 1) % k])]
            chords = [[a, b] for a, b in itertools.combinations(verts, 2)
                      if th.has_edge(a, b) and ball.edge_between(a, b) is None]
            witnesses.append({"kind": "cell_not_induced_cycle", "cell": cell.id, "cycle": list(cyc),
                              "missing_edges": missing, "chords": chords})
    for cyc in cycles:
        if cyc not in cell_cycles:
            witnesses.append({
                "kind": "cycle_without_cell", "cycle": list(cyc),
                "types": [ball.vertices[v].type for v in cyc],
            })
    details = {
        "region_size": len(nodes),
        "induced_cycles": len(cycles),
        "cells_in_region": sum(len(v) for v in cell_cycles.values()),
        "r": ball.r, "s": ball.s,
    }
    return Report("cycle_cell_correspondence", FAIL if witnesses else PASS, details, witnesses)


def theta_equivariance(th: ThetaBall, ball: DevelopedBall, tau: Optional[int] = None,
                       vertex_map: Optional[Dict[int, int]] = None) -> Report:
    """Check a relabeling maps Θ-edges to Θ-edges and non-edges to non-edges.

    Pass ``tau`` to use the type rotation from :func:`act_f_sigma`, or an
    explicit ``vertex_map`` to test an arbitrary relabeling.
    """
    if vertex_map is None:
        if tau is None:
            raise ValidationError("give tau or vertex_map")
        vertex_map = act_f_sigma(ball, tau).vertices
    nodes = [v for v in th.nodes if th.interior[v] and v in vertex_map and vertex_map[v] in th.interior]
    witnesses = []
    pairs = 0
    for u, v in itertools.combinations(nodes, 2):
        fu, fv = vertex_map[u], vertex_map[v]
        if not (th.certain(u, v) and th.certain(fu, fv)):
            continue
        pairs += 1
        if th.has_edge(u, v) != th.has_edge(fu, fv):
            witnesses.append({"u": u, "v": v, "image": [fu, fv], "edge_before": th.has_edge(u, v)})
            if len(witnesses) >= 20:
                break
    details = {"tau": tau, "pairs_checked": pairs}
    return Report("theta_equivariance", FAIL if witnesses else PASS, details, witnesses)


def theta_dot(ball: DevelopedBall, th: ThetaBall) -> str:
    """1-skeleton with Θ-only edges drawn dashed."""
    from .higman_complex import skeleton_dot

    extra = [(u, v) for u, v in th.edges if ball.edge_between(u, v) is None]
    return skeleton_dot(ball, extra)
