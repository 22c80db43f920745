"""A line-preserving bijection of BS(1,2) that breaks the order on a-lines.

Fix ``n >= 0`` and ``s = 2^n``.  A t-line is *high* when it is
``a^(k s) <t>`` for an integer ``k``, and *low* otherwise.  The map

    phi(x) = x          if x lies on a high t-line
    phi(x) = a^s x      otherwise

sends t-lines to t-lines (left multiplication does), keeps the order along
them, sends a-lines to a-lines, but reverses some pairs on a-lines.  Left
multiplication by ``a^s`` permutes the high t-lines and the low ones
separately, which is what makes phi a bijection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .bs_algebra import BsElement, BsParams, make_params, multiply
from .cayley_lines import A_FWD, T_FWD, CayleyBall, coordinate, line_of
from .errors import TruncationInsufficient, ValidationError
from .reports import FAIL, PASS, Report

BS12 = make_params(1, 2)


@dataclass(frozen=True)
class ExoticParams:
    n: int
    shift: int = field(init=False, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 0:
            raise ValidationError(f"n must be a nonnegative integer, got {self.n!r}")
        object.__setattr__(self, "shift", 2 ** self.n)


def _check_group(params: BsParams):
    if params != BS12:
        raise ValidationError(f"the exotic map lives on BS(1,2), not {params}")


def classify(v: BsElement, params: ExoticParams) -> str:
    """``"high"`` or ``"low"`` for the t-line through ``v``."""
    _check_group(v.params)
    rep = line_of(v, "t").rep
    # the fewest-syllable element of a^x <t> is a^x itself
    if not rep.syllables and rep.tail % params.shift == 0:
        return "high"
    return "low"


def phi(v: BsElement, params: ExoticParams) -> BsElement:
    if classify(v, params) == "high":
        return v
    return multiply(v.params.a(params.shift), v)


def phi_inverse(v: BsElement, params: ExoticParams) -> BsElement:
    # a^s maps low t-lines onto low t-lines, so the class of v decides
    if classify(v, params) == "high":
        return v
    return multiply(v.params.a(-params.shift), v)


def _order_witness(ball: CayleyBall, params: ExoticParams) -> Optional[tuple]:
    """A pair ``x < y`` on one a-line whose images come out in reverse order."""
    g = ball.params
    s = params.shift
    fast = [(g.a(1), g.a(2))] if params.n == 1 else []
    if params.n >= 1:
        fast.append((g.a(s - 1), g.a(s)))
    for x, y in fast:
        if x in ball and y in ball and _reversed(x, y, params):
            return x, y
    # consecutive points suffice: a non-increasing sequence has a descent
    for x in ball.vertices:
        y = ball.nbr[x][A_FWD]
        if y is not None and _reversed(x, y, params):
            return x, y
    return None


def _reversed(x, y, params) -> bool:
    fx, fy = phi(x, params), phi(y, params)
    line = line_of(fx, "a")
    return line_of(fy, "a") == line and coordinate(line, fx) > coordinate(line, fy)


def verify_exotic(ball: CayleyBall, params: ExoticParams) -> Report:
    """Check phi on the ball: injective, line-preserving, t-order kept, a-order broken."""
    _check_group(ball.params)
    witnesses = []
    images = {}
    counts = {"high": 0, "low": 0}
    for x in ball.vertices:
        counts[classify(x, params)] += 1
        fx = phi(x, params)
        if fx in images:
            witnesses.append({"kind": "not_injective", "x": str(x), "y": str(images[fx])})
        images[fx] = x
        if phi_inverse(fx, params) != x:
            witnesses.append({"kind": "inverse_mismatch", "x": str(x)})

    a_edges = t_edges = 0
    for x in ball.vertices:
        fx = phi(x, params)
        xa, xt = ball.nbr[x][A_FWD], ball.nbr[x][T_FWD]
        if xa is not None:
            a_edges += 1
            if line_of(phi(xa, params), "a") != line_of(fx, "a"):
                witnesses.append({"kind": "a_line_split", "x": str(x)})
        if xt is not None:
            t_edges += 1
            # same t-line, next position along it
            if phi(xt, params) != multiply(fx, ball.params.t(1)):
                witnesses.append({"kind": "t_order", "x": str(x)})

    details = {
        "n": params.n,
        "shift": str(params.shift),
        "radius": ball.radius,
        "high": counts["high"],
        "low": counts["low"],
        "a_edges_checked": a_edges,
        "t_edges_checked": t_edges,
    }
    if witnesses:
        return Report("exotic_bijection", FAIL, details, witnesses)
    found = _order_witness(ball, params)
    if found is None:
        raise TruncationInsufficient(
            f"no a-line order violation visible at radius {ball.radius}; try radius >= {params.shift + 2}"
        )
    x, y = found
    details["order_violation"] = {
        "x": str(x), "y": str(y), "phi_x": str(phi(x, params)), "phi_y": str(phi(y, params)),
    }
    return Report("exotic_bijection", PASS, details,
                  [{"kind": "a_order_violation", "x": x.to_json(), "y": y.to_json(),
                    "phi_x": phi(x, params).to_json(), "phi_y": phi(y, params).to_json()}])
