"""Cayley balls of BS(m, n), standard lines, the line graph and the Bass-Serre tree.

A *standard line* is a left coset ``g<a>`` (an a-line) or ``g<t>`` (a t-line).
The line graph has one node per line and one link per group element (the
element where an a-line meets a t-line).  Type-a nodes are the vertices of the
Bass-Serre tree; a t-edge ``g -> g t`` orients the tree edge between
``g<a>`` and ``g t<a>``.

All lemma checks here only look at *decided* data: a point ``x`` on an a-line
is decided up to distance ``d`` when the whole t-segment ``x t^-d .. x t^d``
lies inside the ball.  A t-line through ``x`` can only meet an a-line at tree
distance ``d`` at one of the two ends of that segment, so membership questions
about it are then answered without guessing.  Checks that cannot find enough
decided data raise :class:`TruncationInsufficient` instead of returning a
verdict.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .bs_algebra import BsElement, BsParams, invert, multiply, subgroup_membership
from .errors import ResourceCapExceeded, TruncationInsufficient, ValidationError
from .reports import FAIL, PASS, SCHEMA_VERSION, Report

DEFAULT_MAX_VERTICES = int(os.environ.get("HIGMAN_LINES_MAX_VERTICES", "500000"))

# neighbor slots: g·a, g·a^-1, g·t, g·t^-1
A_FWD, A_BWD, T_FWD, T_BWD = range(4)


class NoCommonLine(TruncationInsufficient):
    """No t-line visible in the ball meets both a-lines."""


# -- Cayley ball ------------------------------------------------------------

class CayleyBall:
    """All elements of word length <= radius, in breadth-first order."""

    def __init__(self, params: BsParams, radius: int, vertices: Sequence[BsElement],
                 dist: Dict[BsElement, int]):
        self.params = params
        self.radius = radius
        self.vertices = tuple(vertices)
        self.dist = dist
        gens = _generators(params)
        self.nbr: Dict[BsElement, tuple] = {}
        self._segments: dict = {}
        for g in self.vertices:
            slots = []
            for gen in gens:
                h = multiply(g, gen)
                slots.append(h if h in dist else None)
            self.nbr[g] = tuple(slots)

    def __len__(self):
        return len(self.vertices)

    def __contains__(self, g):
        return g in self.dist

    @property
    def edges(self) -> List[Tuple[BsElement, BsElement, str]]:
        out = []
        for g in self.vertices:
            slots = self.nbr[g]
            if slots[A_FWD] is not None:
                out.append((g, slots[A_FWD], "a"))
            if slots[T_FWD] is not None:
                out.append((g, slots[T_FWD], "t"))
        return out

    def t_segment(self, x: BsElement, d: int) -> Optional[List[BsElement]]:
        """``[x t^-d, ..., x, ..., x t^d]`` if it lies in the ball, else None."""
        key = (x, d)
        if key not in self._segments:
            self._segments[key] = self._t_segment(x, d)
        return self._segments[key]

    def _t_segment(self, x, d):
        fwd = [x]
        cur = x
        for _ in range(d):
            cur = self.nbr[cur][T_FWD]
            if cur is None:
                return None
            fwd.append(cur)
        bwd = []
        cur = x
        for _ in range(d):
            cur = self.nbr[cur][T_BWD]
            if cur is None:
                return None
            bwd.append(cur)
        return bwd[::-1] + fwd

    def to_json(self) -> dict:
        index = {g: i for i, g in enumerate(self.vertices)}
        return {
            "schema": SCHEMA_VERSION,
            "kind": "cayley_ball",
            "params": self.params.to_json(),
            "radius": self.radius,
            "vertices": [g.to_json() for g in self.vertices],
            "edges": [[index[s], index[t], lab] for s, t, lab in self.edges],
        }

    @classmethod
    def from_json(cls, data: dict) -> "CayleyBall":
        from .bs_algebra import BsParams as _P

        params = _P.from_json(data["params"])
        verts = [BsElement.from_json(params, v) for v in data["vertices"]]
        rebuilt = ball(params, int(data["radius"]))
        if list(rebuilt.vertices) != verts:
            raise ValidationError("vertex list does not match the ball it claims to be")
        edges = [(verts[s], verts[t], lab) for s, t, lab in data["edges"]]
        if edges != rebuilt.edges:
            raise ValidationError("edge list does not match the ball it claims to be")
        return rebuilt

    def __eq__(self, other):
        return (isinstance(other, CayleyBall) and self.params == other.params
                and self.radius == other.radius and self.vertices == other.vertices)

    __hash__ = None


def _generators(params: BsParams):
    return (params.a(1), params.a(-1), params.t(1), params.t(-1))


def ball(params: BsParams, radius: int, max_vertices: Optional[int] = None) -> CayleyBall:
    if radius < 0:
        raise ValidationError("radius must be >= 0")
    cap = DEFAULT_MAX_VERTICES if max_vertices is None else max_vertices
    gens = _generators(params)
    e = params.identity()
    dist = {e: 0}
    order = [e]
    queue = deque([e])
    while queue:
        g = queue.popleft()
        if dist[g] == radius:
            continue
        for gen in gens:
            h = multiply(g, gen)
            if h not in dist:
                dist[h] = dist[g] + 1
                order.append(h)
                if len(order) > cap:
                    raise ResourceCapExceeded(
                        f"ball of radius {radius} in {params} exceeds {cap} vertices"
                    )
                queue.append(h)
    return CayleyBall(params, radius, order, dist)


# -- standard lines -----------------------------------------------------------

@dataclass(frozen=True)
class StandardLine:
    label: str
    rep: BsElement
    truncated: bool = field(default=False, compare=False)

    def sort_key(self):
        return (self.label, self.rep.sort_key())

    def __lt__(self, other):
        return self.sort_key() < other.sort_key()

    def __str__(self):
        return f"{self.rep}<{self.label}>"

    def to_json(self) -> dict:
        return {"label": self.label, "rep": self.rep.to_json(), "truncated": self.truncated}

    @classmethod
    def from_json(cls, params: BsParams, data: dict) -> "StandardLine":
        line = cls(data["label"], BsElement.from_json(params, data["rep"]), bool(data.get("truncated")))
        if line_of(line.rep, line.label) != line:
            raise ValidationError(f"{line} is not a canonical representative")
        return line


def _t_rep(g: BsElement) -> BsElement:
    # Along g t^k the syllable count moves by exactly one per step and, once it
    # starts growing in a direction, keeps growing; so it has a unique minimum.
    params = g.params
    for step in (params.t(1), params.t(-1)):
        cur = g
        moved = False
        while True:
            nxt = multiply(cur, step)
            if nxt.t_length < cur.t_length:
                cur, moved = nxt, True
            else:
                break
        if moved:
            return cur
    return g


def line_of(g: BsElement, label: str) -> StandardLine:
    """The standard line through ``g``, with its canonical representative.

    a-lines: drop the trailing a-power.  t-lines: the element of ``g<t>``
    with the fewest t-syllables (unique).
    """
    if label == "a":
        return StandardLine("a", BsElement(g.params, g.syllables, 0))
    if label == "t":
        return StandardLine("t", _t_rep(g))
    raise ValidationError(f"label must be 'a' or 't', got {label!r}")


def coordinate(line: StandardLine, g: BsElement) -> int:
    """Position of ``g`` along ``line``: ``g = rep·a^k`` or ``g = rep·t^k``."""
    if line.label == "a":
        return g.tail - line.rep.tail
    k = subgroup_membership(multiply(invert(line.rep), g), "t")
    if k is None:
        raise ValidationError(f"{g} is not on {line}")
    return k


# -- Bass-Serre tree ------------------------------------------------------------

@dataclass(frozen=True)
class TreeVertex:
    """Reduced path from the base vertex ``<a>``: a tuple of (residue, t_sign)."""

    address: Tuple[Tuple[int, int], ...]

    def __len__(self):
        return len(self.address)

    def to_json(self):
        return [[str(r), s] for r, s in self.address]

    @classmethod
    def from_json(cls, data) -> "TreeVertex":
        return cls(tuple((int(r), int(s)) for r, s in data))


def bass_serre_address(line: StandardLine) -> TreeVertex:
    if line.label != "a":
        raise ValidationError("only a-lines are Bass-Serre tree vertices")
    return TreeVertex(line.rep.syllables)


def _lcp(v1: TreeVertex, v2: TreeVertex) -> int:
    k = 0
    for x, y in zip(v1.address, v2.address):
        if x != y:
            break
        k += 1
    return k


def tree_distance(v1, v2) -> int:
    v1, v2 = _as_tree_vertex(v1), _as_tree_vertex(v2)
    c = _lcp(v1, v2)
    return len(v1) + len(v2) - 2 * c


def _as_tree_vertex(v) -> TreeVertex:
    return v if isinstance(v, TreeVertex) else bass_serre_address(v)


def tree_order(v1, v2) -> str:
    """``equal`` / ``less`` / ``greater`` / ``incomparable`` for the edge orientation order.

    The edge from ``w`` to its ``(r, +1)`` extension points away from ``w``; the
    edge to an ``(r, -1)`` extension points toward ``w``.  So ``v1 < v2`` iff the
    geodesic climbs from ``v1`` to the branch point only through ``-1`` steps
    and descends to ``v2`` only through ``+1`` steps.
    """
    v1, v2 = _as_tree_vertex(v1), _as_tree_vertex(v2)
    c = _lcp(v1, v2)
    up = [s for _, s in v1.address[c:]]
    down = [s for _, s in v2.address[c:]]
    if not up and not down:
        return "equal"
    if all(s < 0 for s in up) and all(s > 0 for s in down):
        return "less"
    if all(s > 0 for s in up) and all(s < 0 for s in down):
        return "greater"
    return "incomparable"


def a_line_at(params: BsParams, v: TreeVertex) -> StandardLine:
    return StandardLine("a", BsElement(params, v.address, 0))


def tree_neighbors(line: StandardLine) -> Tuple[List[StandardLine], List[StandardLine]]:
    """(out-neighbors, in-neighbors) of an a-line, computed from the group law."""
    params = line.rep.params
    t, T = params.t(1), params.t(-1)
    out = {line_of(multiply(multiply(line.rep, params.a(r)), t), "a") for r in range(abs(params.n))}
    inn = {line_of(multiply(multiply(line.rep, params.a(r)), T), "a") for r in range(params.m)}
    return sorted(out), sorted(inn)


def geodesic(v1, v2) -> List[TreeVertex]:
    v1, v2 = _as_tree_vertex(v1), _as_tree_vertex(v2)
    c = _lcp(v1, v2)
    path = [TreeVertex(v1.address[:k]) for k in range(len(v1), c - 1, -1)]
    path += [TreeVertex(v2.address[:k]) for k in range(c + 1, len(v2) + 1)]
    return path


def tree_ball(center: StandardLine, radius: int) -> List[StandardLine]:
    seen = {center}
    frontier = [center]
    for _ in range(radius):
        nxt = []
        for u in frontier:
            out, inn = tree_neighbors(u)
            for w in out + inn:
                if w not in seen:
                    seen.add(w)
                    nxt.append(w)
        frontier = nxt
    return sorted(seen)


# -- line graph ---------------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    d: int
    direction: str  # "lower": measured on the lower line (u2 < u1); "upper" otherwise
    measured_gap: int
    formula_gap: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.measured_gap == self.formula_gap

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": "gap_report",
            "d": self.d,
            "direction": self.direction,
            "measured_gap": str(self.measured_gap),
            "formula_gap": str(self.formula_gap),
            "samples": self.samples,
            "status": PASS if self.passed else FAIL,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GapReport":
        return cls(int(data["d"]), data["direction"], int(data["measured_gap"]),
                   int(data["formula_gap"]), int(data["samples"]))


class LambdaGraph:
    """Lines meeting a Cayley ball, linked at the ball vertices where they cross."""

    def __init__(self, ball: CayleyBall):
        self.ball = ball
        self.params = ball.params
        self.points: Dict[StandardLine, Dict[int, BsElement]] = defaultdict(dict)
        self.lines_at: Dict[BsElement, Tuple[StandardLine, StandardLine]] = {}
        links = []
        for g in ball.vertices:
            la, lt = line_of(g, "a"), line_of(g, "t")
            self.points[la][coordinate(la, g)] = g
            self.points[lt][coordinate(lt, g)] = g
            self.lines_at[g] = (la, lt)
            links.append((la, lt, g))
        self.points = dict(self.points)
        self.truncated = {}
        for line, pts in self.points.items():
            ks = sorted(pts)
            self.truncated[line] = ks[-1] - ks[0] + 1 != len(ks)
        self.nodes = tuple(
            StandardLine(l.label, l.rep, self.truncated[l]) for l in sorted(self.points)
        )
        self.links = tuple(links)
        self._runs: dict = {}
        self._tlines_of: Dict[StandardLine, set] = defaultdict(set)
        self._alines_of: Dict[StandardLine, set] = defaultdict(set)
        for la, lt, _ in links:
            self._tlines_of[la].add(lt)
            self._alines_of[lt].add(la)

    # -- basic structure ----------------------------------------------------
    def a_nodes(self) -> List[StandardLine]:
        return [u for u in self.nodes if u.label == "a"]

    def t_nodes(self) -> List[StandardLine]:
        return [u for u in self.nodes if u.label == "t"]

    def link(self, u: StandardLine) -> set:
        """Visible neighbors of ``u`` in the line graph."""
        return set(self._tlines_of.get(u, ())) if u.label == "a" else set(self._alines_of.get(u, ()))

    def common_tlines(self, u1: StandardLine, u2: StandardLine) -> set:
        return self.link(u1) & self.link(u2)

    def is_bipartite(self) -> bool:
        return all(la.label == "a" and lt.label == "t" for la, lt, _ in self.links)

    def has_multi_links(self) -> bool:
        pairs = [(la, lt) for la, lt, _ in self.links]
        return len(set(pairs)) != len(pairs)

    # -- decided data ---------------------------------------------------------
    def decided_runs(self, line: StandardLine, targets: Sequence[Tuple[StandardLine, int]]):
        """Maximal runs of consecutive decided points of an a-line.

        Each run is a list of ``(coordinate, memberships)`` where
        ``memberships[j]`` says whether the t-line through that point meets
        ``targets[j]`` (given as ``(a_line, tree_distance)``).
        """
        key = (line, tuple(targets))
        if key not in self._runs:
            self._runs[key] = self._decided_runs(line, targets)
        return self._runs[key]

    def _decided_runs(self, line, targets):
        reach = max((d for _, d in targets), default=0)
        pts = self.points.get(line, {})
        runs, cur, prev = [], [], None
        for k in sorted(pts):
            seg = self.ball.t_segment(pts[k], reach)
            if seg is None:
                if cur:
                    runs.append(cur)
                cur, prev = [], None
                continue
            memb = []
            for target, d in targets:
                lo, hi = seg[reach - d], seg[reach + d]
                memb.append(self.lines_at[lo][0] == target or self.lines_at[hi][0] == target)
            if prev is not None and k != prev + 1 and cur:
                runs.append(cur)
                cur = []
            cur.append((k, tuple(memb)))
            prev = k
        if cur:
            runs.append(cur)
        return runs

    def to_json(self) -> dict:
        index = {u: i for i, u in enumerate(self.nodes)}
        vindex = {g: i for i, g in enumerate(self.ball.vertices)}
        return {
            "schema": SCHEMA_VERSION,
            "kind": "lambda_graph",
            "params": self.params.to_json(),
            "radius": self.ball.radius,
            "nodes": [u.to_json() for u in self.nodes],
            "links": [[index[la], index[lt], vindex[g]] for la, lt, g in self.links],
        }

    @classmethod
    def from_json(cls, data: dict) -> "LambdaGraph":
        params = BsParams.from_json(data["params"])
        lam = lambda_graph(ball(params, int(data["radius"])))
        nodes = [StandardLine.from_json(params, u) for u in data["nodes"]]
        if nodes != list(lam.nodes) or [u.truncated for u in nodes] != [u.truncated for u in lam.nodes]:
            raise ValidationError("node list does not match the graph it claims to be")
        if [list(x) for x in lam.to_json()["links"]] != [list(x) for x in data["links"]]:
            raise ValidationError("link list does not match the graph it claims to be")
        return lam

    def __eq__(self, other):
        return (isinstance(other, LambdaGraph) and self.ball == other.ball
                and self.nodes == other.nodes and self.links == other.links)

    __hash__ = None


def lambda_graph(ball: CayleyBall) -> LambdaGraph:
    return LambdaGraph(ball)


# -- lemma checks ------------------------------------------------------------------

def _require_a(*lines):
    for u in lines:
        if u.label != "a":
            raise ValidationError(f"{u} is not an a-line")


def _pair_gap(params: BsParams, base: StandardLine, other: StandardLine) -> Optional[int]:
    """Expected spacing of the common t-lines of ``base`` and ``other`` along ``base``."""
    rel = tree_order(base, other)
    d = tree_distance(base, other)
    if rel == "less":
        return params.h * params.q ** d
    if rel == "greater":
        return params.h * params.p ** d
    if rel == "equal":
        return 1
    return None


def gaps(lam: LambdaGraph, u1: StandardLine, u2: StandardLine) -> GapReport:
    """Measure the spacing of the common t-lines of ``u1`` and ``u2`` along ``u2``.

    Only gaps whose whole interior is decided count: every point strictly
    between two consecutive members must be decided as a non-member.
    """
    _require_a(u1, u2)
    rel = tree_order(u2, u1)
    if rel in ("equal", "incomparable"):
        raise ValidationError(f"lines must be comparable and distinct (got {rel})")
    if not lam.common_tlines(u1, u2):
        raise NoCommonLine(f"no visible t-line meets both {u1} and {u2}")
    params = lam.params
    d = tree_distance(u1, u2)
    formula = params.h * (params.q if rel == "less" else params.p) ** d
    measured = set()
    samples = 0
    for run in lam.decided_runs(u2, [(u1, d)]):
        members = [k for k, (hit,) in run if hit]
        for k1, k2 in zip(members, members[1:]):
            measured.add(k2 - k1)
            samples += 1
    if not measured:
        raise TruncationInsufficient(
            f"no fully decided gap between {u1} and {u2} at radius {lam.ball.radius}"
        )
    if len(measured) > 1:
        # unequal spacing is itself a violation; report the smallest
        return GapReport(d, "lower" if rel == "less" else "upper", min(measured), formula, samples)
    return GapReport(d, "lower" if rel == "less" else "upper", measured.pop(), formula, samples)


def gaps_bruteforce(lam: LambdaGraph, u1: StandardLine, u2: StandardLine) -> Optional[int]:
    """gcd of the positions along ``u2`` of every visible t-line meeting both lines.

    Uses only the visible incidences of the line graph; None if fewer than
    two such t-lines are visible.
    """
    import math

    pos = sorted(
        coordinate(u2, g)
        for g, (la, lt) in lam.lines_at.items()
        if la == u2 and lt in lam.common_tlines(u1, u2)
    )
    if len(pos) < 2:
        return None
    g = 0
    for a, b in zip(pos, pos[1:]):
        g = math.gcd(g, b - a)
    return g


def _decide_subset(lam, line, a_target, b_target):
    """Evaluate ``A ⊆ B`` and ``B \\ A ≠ ∅`` on decided points of ``line``.

    ``a_target``/``b_target`` are ``(a_line, distance)``; A (resp. B) is the set
    of t-lines through ``line`` meeting that target.  Returns
    ``(subset_violation, strict_witness, longest_run, a_members)``.
    """
    violation = strict = None
    longest = 0
    a_members = 0
    for run in lam.decided_runs(line, [a_target, b_target]):
        longest = max(longest, len(run))
        for k, (in_a, in_b) in run:
            a_members += in_a
            if in_a and not in_b and violation is None:
                violation = k
            if in_b and not in_a and strict is None:
                strict = k
    return violation, strict, longest, a_members


def containment_check(lam: LambdaGraph, u1: StandardLine, u2: StandardLine,
                      u3: StandardLine) -> Report:
    """For ``u1 < u2 < u3``: common links shrink as the lines spread apart.

    Checks Λ13 ⊊ Λ12 and Λ13 ⊆ Λ23, with Λ13 = Λ23 exactly when m | n.
    """
    _require_a(u1, u2, u3)
    if tree_order(u1, u2) != "less" or tree_order(u2, u3) != "less":
        raise ValidationError("containment_check needs u1 < u2 < u3")
    params = lam.params
    d12, d23, d13 = tree_distance(u1, u2), tree_distance(u2, u3), tree_distance(u1, u3)
    witnesses = []

    # on the lowest line: A = Λ13, B = Λ12
    viol1, strict1, run1, mem1 = _decide_subset(lam, u1, (u3, d13), (u2, d12))
    # on the highest line: A = Λ13, B = Λ23
    viol3, strict3, run3, mem3 = _decide_subset(lam, u3, (u1, d13), (u2, d23))
    if mem1 + mem3 == 0:
        raise TruncationInsufficient("no decided t-line meets both u1 and u3")
    if viol1 is not None:
        witnesses.append({"relation": "L13 <= L12", "line": "u1", "coordinate": str(viol1)})
    if viol3 is not None:
        witnesses.append({"relation": "L13 <= L23", "line": "u3", "coordinate": str(viol3)})

    # strictness on u1: a decided window as long as the Λ13 spacing settles it
    if strict1 is not None:
        strict12 = True
    elif run1 >= params.h * params.q ** d13:
        strict12 = False
    else:
        strict12 = None
    if strict3 is not None:
        strict23 = True
    elif run3 >= params.h * params.p ** d13:
        strict23 = False
    else:
        strict23 = None

    expect23 = params.p > 1
    details = {
        "d12": d12, "d23": d23, "d13": d13,
        "strict_13_in_12": strict12, "strict_13_in_23": strict23,
        "expected_strict_13_in_23": expect23,
        "radius": lam.ball.radius,
    }
    if strict12 is False:
        witnesses.append({"relation": "L13 != L12", "observed": "equal on a full period"})
    if strict23 is not None and strict23 != expect23:
        witnesses.append({"relation": "L13 vs L23", "observed": "strict" if strict23 else "equal"})
    if witnesses:
        return Report("corollary_containment", FAIL, details, witnesses)
    if strict12 is None or strict23 is None:
        raise TruncationInsufficient(f"strictness undecided at radius {lam.ball.radius}: {details}")
    return Report("corollary_containment", PASS, details)


def _and3(values):
    values = list(values)
    if any(v is False for v in values):
        return False
    if all(v is True for v in values):
        return True
    return None


def _or3(values):
    values = list(values)
    if any(v is True for v in values):
        return True
    if all(v is False for v in values):
        return False
    return None


def _common_links_inside(lam, u1, u2, w, min_members):
    """Is Λ(u1,u2) ⊆ lk(w)?  Evaluated on the upper line of the pair.

    False on a decided counterexample; True if some decided run holds at
    least ``min_members`` common t-lines that all meet ``w``; None otherwise.
    """
    hi, lo = (u1, u2) if tree_order(u2, u1) == "less" else (u2, u1)
    d = tree_distance(u1, u2)
    dw = tree_distance(hi, w)
    best = 0
    for run in lam.decided_runs(hi, [(lo, d), (w, dw)]):
        count = 0
        for _, (in_pair, in_w) in run:
            if in_pair and not in_w:
                return False
            count += in_pair
        best = max(best, count)
    return True if best >= min_members else None


def _links_equal(lam, base, x, y):
    """Is Λ(base,x) = Λ(base,y)?  Evaluated along ``base``."""
    key = ("eq", base, x, y)
    if key not in lam._runs:
        lam._runs[key] = _links_equal_uncached(lam, base, x, y)
    return lam._runs[key]


def _links_equal_uncached(lam, base, x, y):
    gx, gy = _pair_gap(lam.params, base, x), _pair_gap(lam.params, base, y)
    need = max(g for g in (gx, gy, 1) if g is not None)
    dx, dy = tree_distance(base, x), tree_distance(base, y)
    longest = 0
    for run in lam.decided_runs(base, [(x, dx), (y, dy)]):
        longest = max(longest, len(run))
        for _, (ix, iy) in run:
            if ix != iy:
                return False
    return True if longest >= need else None


def _pair_nonempty(lam, u1, u2):
    """Is Λ(u1,u2) nonempty?  A decided member says yes; a decided window as long
    as the expected spacing with no member says no."""
    rel = tree_order(u1, u2)
    if rel == "incomparable":
        return False
    if rel == "equal":
        return True
    hi, lo = (u2, u1) if rel == "less" else (u1, u2)
    d = tree_distance(u1, u2)
    need = lam.params.h * lam.params.p ** d
    longest = 0
    for run in lam.decided_runs(hi, [(lo, d)]):
        longest = max(longest, len(run))
        if any(hit for _, (hit,) in run):
            return True
    return False if longest >= need else None


@dataclass
class AdjacencyVerdict:
    value: bool
    lemma: str
    witness: Optional[tuple]
    candidates: int
    search_radius: int

    def to_json(self):
        return {
            "value": self.value,
            "lemma": self.lemma,
            "witness": None if self.witness is None else [w.to_json() for w in self.witness],
            "candidates": self.candidates,
            "search_radius": self.search_radius,
        }

    @classmethod
    def from_json(cls, params: BsParams, data: dict) -> "AdjacencyVerdict":
        wit = data["witness"]
        if wit is not None:
            wit = tuple(StandardLine.from_json(params, w) for w in wit)
        return cls(data["value"], data["lemma"], wit, data["candidates"], data["search_radius"])


def adjacency_predicate(lam: LambdaGraph, u1: StandardLine, u2: StandardLine,
                        search_radius: int = 1) -> AdjacencyVerdict:
    """Decide tree adjacency of comparable a-lines from line-graph data alone.

    m ∤ n: adjacent iff no third vertex's link contains Λ12.
    m | n: adjacent iff Λ12 ≠ ∅ and no pair (u3, u4) has Λ12 ⊆ Λ34 and
    Λ34 = Λ3i for some i.

    The third (and fourth) vertex ranges over a-lines within ``search_radius``
    tree steps of u1 or u2.  By convexity of the tree any containing vertex
    forces one at distance 1, so radius 1 is enough for the m ∤ n case.
    """
    _require_a(u1, u2)
    if tree_order(u1, u2) not in ("less", "greater"):
        raise ValidationError("adjacency_predicate needs comparable distinct a-lines")
    params = lam.params
    # vertices between u1 and u2 first, so witnesses are the natural midpoints
    between = {a_line_at(params, v) for v in geodesic(u1, u2)[1:-1]}
    cands = sorted(
        (set(tree_ball(u1, search_radius)) | set(tree_ball(u2, search_radius))) - {u1, u2},
        key=lambda w: (w not in between, w.sort_key()),
    )
    min_members = params.q
    contain = {w: _common_links_inside(lam, u1, u2, w, min_members) for w in cands}

    if not params.divides:
        if any(v is True for v in contain.values()):
            w = next(w for w in cands if contain[w] is True)
            return AdjacencyVerdict(False, "m∤n", (w,), len(cands), search_radius)
        if all(v is False for v in contain.values()):
            return AdjacencyVerdict(True, "m∤n", None, len(cands), search_radius)
        raise TruncationInsufficient(f"adjacency of {u1}, {u2} undecided at radius {lam.ball.radius}")

    nonempty = _pair_nonempty(lam, u1, u2)
    if nonempty is False:
        return AdjacencyVerdict(False, "m|n", None, len(cands), search_radius)
    # only pairs of certified containers can give a positive witness
    sure = [w for w in cands if contain[w] is True]
    for u3, u4 in itertools.permutations(sure, 2):
        if _or3(_links_equal(lam, u3, u4, ui) for ui in (u1, u2)) is True:
            return AdjacencyVerdict(False, "m|n", (u3, u4), len(cands), search_radius)
    if nonempty is None:
        raise TruncationInsufficient(f"cannot decide whether {u1}, {u2} share a t-line")
    live = [w for w in cands if contain[w] is not False]
    for u3, u4 in itertools.permutations(live, 2):
        status = _and3([contain[u3], contain[u4],
                        _or3(_links_equal(lam, u3, u4, ui) for ui in (u1, u2))])
        if status is not False:
            raise TruncationInsufficient(
                f"adjacency of {u1}, {u2} undecided at radius {lam.ball.radius}"
            )
    return AdjacencyVerdict(True, "m|n", None, len(cands), search_radius)


def count_strongly_comparable(lam: LambdaGraph, u1: StandardLine, u2: StandardLine) -> Tuple[int, int]:
    """For adjacent ``u1 > u2``: how many neighbors of each share t-lines with both.

    The other endpoint of the edge is not counted.
    """
    _require_a(u1, u2)
    if tree_order(u1, u2) != "greater" or tree_distance(u1, u2) != 1:
        raise ValidationError("count_strongly_comparable needs adjacent u1 > u2")
    sizes = []
    for base, other in ((u1, u2), (u2, u1)):
        out, inn = tree_neighbors(base)
        count = 0
        for w in out + inn:
            if w == other:
                continue
            hit = _pair_nonempty(lam, w, other)
            if hit is None:
                raise TruncationInsufficient(f"cannot decide whether {w} meets {other}")
            count += hit
        sizes.append(count)
    return sizes[0], sizes[1]


def type_detection_witness(lam: LambdaGraph, u: StandardLine, search_bound: int = 3) -> Report:
    """Type-a lines have a finite covering set of distance-2 neighbors; type-t lines don't.

    For an a-line the covering set is its in-neighbors and the cover is
    checked on every decided t-line through it.  For a t-line, each visible
    distance-2 t-line is followed upward from the a-line it shares with
    ``u`` until the two part (exactly, by normal forms); the position just
    above all of them is an a-line of ``u``'s link that no candidate meets,
    so no subset of the candidates, of any size, covers the link.
    ``search_bound`` is only recorded.
    """
    details = {"line": str(u), "label": u.label, "radius": lam.ball.radius}
    if u.label == "a":
        _, inn = tree_neighbors(u)
        cover = set(inn)
        pts = lam.points.get(u, {})
        decided = uncovered = 0
        for k in sorted(pts):
            back = lam.ball.nbr[pts[k]][T_BWD]
            if back is None:
                continue
            decided += 1
            if lam.lines_at[back][0] not in cover:
                uncovered += 1
        if decided == 0:
            raise TruncationInsufficient(f"no decided t-line through {u}")
        far = [str(v) for v in inn if not lam.common_tlines(u, v)]
        details.update({"cover": [str(v) for v in inn], "decided": decided})
        if uncovered or far:
            return Report("type_detection", FAIL, details,
                          [{"uncovered": uncovered, "not_at_distance_2": far}])
        return Report("type_detection", PASS, details)

    link = lam.link(u)
    if not link:
        raise TruncationInsufficient(f"{u} has an empty visible link")
    params = lam.params
    # Each distance-2 t-line shares only a bounded upward stretch of u's tree
    # geodesic, so one position above all of them is a link element none covers.
    reach = {}
    for l0 in sorted(link):
        x = next(g for g in lam.points[l0].values() if lam.lines_at[g][1] == u)
        j0 = coordinate(u, x)
        for g in lam.points[l0].values():
            v = lam.lines_at[g][1]
            if v == u:
                continue
            d0 = g.tail - x.tail
            up = _shared_climb(params, d0)
            if params.q ** up > abs(d0) * params.p ** up:
                return Report("type_detection", FAIL, details,
                              [{"candidate": str(v), "shared_climb": up, "d0": str(d0)}])
            reach[v] = max(reach.get(v, j0 + up), j0 + up)
    top = max(reach.values(), default=max(coordinate(u, g) for g in lam.points[u].values()))
    witness = multiply(u.rep, params.t(top + 1))
    details.update({"link_size": len(link), "candidates": len(reach), "search_bound": search_bound,
                    "uncovered_position": top + 1, "uncovered_line": str(line_of(witness, "a"))})
    return Report("type_detection", PASS, details)


def _shared_climb(params: BsParams, d0: int) -> int:
    """How many steps up two t-lines through ``x`` and ``x a^d0`` stay on common a-lines."""
    up = 0
    while True:
        conj = multiply(multiply(params.t(-(up + 1)), params.a(d0)), params.t(up + 1))
        if subgroup_membership(conj, "a") is None:
            return up
        up += 1


def malnormal_check(ball: CayleyBall, exponent_bound: int) -> Report:
    """<t> is malnormal, and no conjugate of a nontrivial a-power lies in <t>."""
    params = ball.params
    witnesses = []
    tested = 0
    for g in ball.vertices:
        gi = invert(g)
        in_t = subgroup_membership(g, "t") is not None
        for j in range(-exponent_bound, exponent_bound + 1):
            if j == 0:
                continue
            tested += 1
            conj_t = multiply(multiply(g, params.t(j)), gi)
            if not in_t and subgroup_membership(conj_t, "t") is not None:
                witnesses.append({"kind": "malnormal", "g": str(g), "j": j})
            conj_a = multiply(multiply(g, params.a(j)), gi)
            if subgroup_membership(conj_a, "t") is not None:
                witnesses.append({"kind": "elliptic_in_loxodromic", "g": str(g), "j": j})
    details = {"radius": ball.radius, "exponent_bound": exponent_bound, "tested": tested}
    return Report("malnormal", FAIL if witnesses else PASS, details, witnesses)


def tree_degree_check(lam: LambdaGraph) -> Report:
    """Every fully visible tree vertex has |n| out-edges and m in-edges.

    Neighbors are read off the ball's t-edges; orientation is then compared
    with the address rule of :func:`tree_order`.
    """
    params = lam.params
    checked = 0
    witnesses = []
    for u in lam.a_nodes():
        pts = lam.points[u]
        out, inn = set(), set()
        out_res, in_res = set(), set()
        for k, g in pts.items():
            fwd, bwd = lam.ball.nbr[g][T_FWD], lam.ball.nbr[g][T_BWD]
            if fwd is not None:
                out.add(lam.lines_at[fwd][0])
                out_res.add(k % abs(params.n))
            if bwd is not None:
                inn.add(lam.lines_at[bwd][0])
                in_res.add(k % params.m)
        if len(out_res) < abs(params.n) or len(in_res) < params.m:
            continue
        checked += 1
        bad_order = [str(w) for w in out if tree_order(u, w) != "less" or tree_distance(u, w) != 1]
        bad_order += [str(w) for w in inn if tree_order(u, w) != "greater" or tree_distance(u, w) != 1]
        if len(out) != abs(params.n) or len(inn) != params.m or bad_order:
            witnesses.append({"vertex": str(u), "out": len(out), "in": len(inn), "bad_order": bad_order})
    details = {"radius": lam.ball.radius, "fully_visible": checked,
               "expected_out": abs(params.n), "expected_in": params.m}
    return Report("tree_degree", FAIL if witnesses else PASS, details, witnesses)


def comparability_check(lam: LambdaGraph) -> Report:
    """a-lines sharing a visible t-line are always comparable."""
    witnesses = []
    pairs = 0
    for lt in lam.t_nodes():
        alines = sorted(lam.link(lt))
        for x, y in itertools.combinations(alines, 2):
            pairs += 1
            if tree_order(x, y) == "incomparable":
                witnesses.append({"u1": str(x), "u2": str(y), "via": str(lt)})
    return Report("comparability", FAIL if witnesses else PASS, {"pairs": pairs}, witnesses)


def link_pairs(lam: LambdaGraph, max_distance: int) -> List[Tuple[StandardLine, StandardLine]]:
    """Ordered pairs ``(lower, upper)`` of distinct a-lines sharing a visible t-line."""
    seen = set()
    for lt in lam.t_nodes():
        alines = sorted(lam.link(lt))
        for x, y in itertools.combinations(alines, 2):
            rel = tree_order(x, y)
            if rel == "incomparable" or tree_distance(x, y) > max_distance:
                continue
            seen.add((x, y) if rel == "less" else (y, x))
    return sorted(seen)


# -- batch checks over a whole ball ----------------------------------------------


def _certified_or_raise(check, certified, skipped, radius):
    if certified == 0:
        raise TruncationInsufficient(
            f"{check}: nothing certifiable at radius {radius} ({skipped} candidates skipped)"
        )


def gap_survey(lam: LambdaGraph, max_distance: int = 2) -> Report:
    """Run :func:`gaps` on every ordered pair sharing a visible t-line."""
    params = lam.params
    observed: Dict[str, set] = defaultdict(set)
    witnesses = []
    certified = skipped = 0
    for lo, hi in link_pairs(lam, max_distance):
        for u1, u2 in ((lo, hi), (hi, lo)):
            try:
                rep = gaps(lam, u1, u2)
            except TruncationInsufficient:
                skipped += 1
                continue
            certified += 1
            observed[f"d={rep.d} {rep.direction}"].add(rep.measured_gap)
            oracle = gaps_bruteforce(lam, u1, u2)
            if not rep.passed or (oracle is not None and oracle % rep.formula_gap):
                witnesses.append({"u1": str(u1), "u2": str(u2), "measured": str(rep.measured_gap),
                                  "formula": str(rep.formula_gap), "gcd_oracle": str(oracle)})
    _certified_or_raise("gaps", certified, skipped, lam.ball.radius)
    details = {
        "radius": lam.ball.radius, "max_distance": max_distance,
        "certified": certified, "skipped": skipped,
        "observed": {k: sorted(str(g) for g in v) for k, v in sorted(observed.items())},
        "formula": {f"d={d} {dr}": str(params.h * (params.q if dr == "lower" else params.p) ** d)
                    for d in range(1, max_distance + 1) for dr in ("lower", "upper")},
    }
    return Report("gaps", FAIL if witnesses else PASS, details, witnesses)


def certifiable_triples(lam: LambdaGraph, max_distance: int = 3):
    """``u1 < u2 < u3`` with u2 inside the tree geodesic of a visibly linked pair."""
    for lo, hi in link_pairs(lam, max_distance):
        path = geodesic(lo, hi)
        for mid in path[1:-1]:
            yield lo, a_line_at(lam.params, mid), hi


def containment_survey(lam: LambdaGraph, max_distance: int = 3) -> Report:
    witnesses = []
    certified = skipped = 0
    strict = Counter()
    for u1, u2, u3 in certifiable_triples(lam, max_distance):
        try:
            rep = containment_check(lam, u1, u2, u3)
        except TruncationInsufficient:
            skipped += 1
            continue
        certified += 1
        strict[str(rep.details["strict_13_in_23"])] += 1
        if not rep.passed:
            witnesses.append({"u1": str(u1), "u2": str(u2), "u3": str(u3), "details": rep.details,
                              "witnesses": rep.witnesses})
    _certified_or_raise("containment", certified, skipped, lam.ball.radius)
    details = {"radius": lam.ball.radius, "certified": certified, "skipped": skipped,
               "strict_13_in_23": dict(strict), "expected_strict": lam.params.p > 1}
    return Report("corollary_containment", FAIL if witnesses else PASS, details, witnesses)


def adjacency_survey(lam: LambdaGraph, max_distance: int = 3, search_radius: int = 1) -> Report:
    """The line-graph adjacency test agrees with tree distance 1 on every decided pair."""
    witnesses = []
    certified = skipped = 0
    tally = Counter()
    for lo, hi in link_pairs(lam, max_distance):
        try:
            verdict = adjacency_predicate(lam, lo, hi, search_radius)
        except TruncationInsufficient:
            skipped += 1
            continue
        certified += 1
        d = tree_distance(lo, hi)
        tally[f"d={d} {verdict.value}"] += 1
        if verdict.value != (d == 1):
            witnesses.append({"u1": str(lo), "u2": str(hi), "distance": d, "verdict": verdict.to_json()})
    _certified_or_raise("adjacency", certified, skipped, lam.ball.radius)
    details = {"radius": lam.ball.radius, "certified": certified, "skipped": skipped,
               "lemma": "m|n" if lam.params.divides else "m∤n", "tally": dict(sorted(tally.items()))}
    return Report("adjacency_predicate", FAIL if witnesses else PASS, details, witnesses)


def count_survey(lam: LambdaGraph) -> Report:
    """count_strongly_comparable gives (q, p) on every decided edge of the tree."""
    params = lam.params
    witnesses = []
    certified = skipped = 0
    seen = Counter()
    for lo, hi in link_pairs(lam, 1):
        try:
            got = count_strongly_comparable(lam, hi, lo)
        except TruncationInsufficient:
            skipped += 1
            continue
        certified += 1
        seen[f"{got[0]},{got[1]}"] += 1
        if got != (params.q, params.p):
            witnesses.append({"u1": str(hi), "u2": str(lo), "counts": list(got)})
    _certified_or_raise("counts", certified, skipped, lam.ball.radius)
    details = {"radius": lam.ball.radius, "certified": certified, "skipped": skipped,
               "observed": dict(seen), "expected": [params.q, params.p]}
    return Report("strongly_comparable_counts", FAIL if witnesses else PASS, details, witnesses)


def type_survey(lam: LambdaGraph, max_length: Optional[int] = None, search_bound: int = 3) -> Report:
    """Type detection on every line whose representative lies well inside the ball."""
    limit = lam.ball.radius // 2 if max_length is None else max_length
    witnesses = []
    certified = skipped = 0
    for u in lam.nodes:
        if lam.ball.dist.get(u.rep, limit + 1) > limit:
            continue
        try:
            rep = type_detection_witness(lam, u, search_bound)
        except TruncationInsufficient:
            skipped += 1
            continue
        certified += 1
        if not rep.passed:
            witnesses.append({"line": str(u), "witnesses": rep.witnesses})
    _certified_or_raise("type detection", certified, skipped, lam.ball.radius)
    details = {"radius": lam.ball.radius, "max_length": limit, "certified": certified, "skipped": skipped}
    return Report("type_detection", FAIL if witnesses else PASS, details, witnesses)


# -- DOT export -----------------------------------------------------------------------

def _q(s) -> str:
    return '"' + str(s).replace('"', r"\"") + '"'


def cayley_dot(ball: CayleyBall) -> str:
    index = {g: i for i, g in enumerate(ball.vertices)}
    lines = [f"digraph cayley {{", f"  label={_q(str(ball.params) + ' radius ' + str(ball.radius))};"]
    for g, i in index.items():
        lines.append(f"  v{i} [label={_q(g)}];")
    for s, t, lab in ball.edges:
        color = "blue" if lab == "a" else "red"
        lines.append(f"  v{index[s]} -> v{index[t]} [label={lab}, color={color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lambda_dot(lam: LambdaGraph) -> str:
    index = {u: i for i, u in enumerate(lam.nodes)}
    out = ["graph lambda {"]
    for u, i in index.items():
        shape = "box" if u.label == "a" else "ellipse"
        style = ", style=dashed" if u.truncated else ""
        out.append(f"  n{i} [label={_q(u)}, shape={shape}{style}];")
    for la, lt, g in lam.links:
        out.append(f"  n{index[la]} -- n{index[lt]} [label={_q(g)}];")
    out.append("}")
    return "\n".join(out) + "\n"
