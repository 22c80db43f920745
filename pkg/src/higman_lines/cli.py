"""Command line entry point: ``higman-lines <group> <command> [options]``.

Exit codes: 0 all checks pass, 1 violation found, 2 usage or validation
error, 3 inconclusive because the ball is too small, 4 resource cap hit.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import List, Optional

from . import cayley_lines as cl
from . import exotic
from . import higman_complex as hc
from . import intersection_graph as ig
from .bs_algebra import make_params, normalize
from .errors import HigmanLinesError, ValidationError
from .reports import PASS, SCHEMA_VERSION, Report, dumps

LEMMAS = ("3.2", "3.4", "3.5", "3.6", "3.7", "malnormal", "counts")


def _env_int(name, default):
    raw = os.environ.get(name)
    return int(raw) if raw else default


def _common(p: argparse.ArgumentParser, formats=("json", "text")):
    p.add_argument("--format", choices=formats, default="json")
    p.add_argument("--output", help="write here instead of stdout")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; output does not depend on it")


def _bs_args(p):
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)


def _radius(p, default=None):
    p.add_argument("--radius", type=int, required=default is None, default=default)


def _sigma_args(p, r=2, s=2):
    p.add_argument("--sigma", default="1,2;1,2;1,2;1,2;1,2", help='e.g. "1,2;1,2;1,2;1,2;1,2"')
    p.add_argument("--r", type=int, default=r)
    p.add_argument("--s", type=int, default=s)
    p.add_argument("--max-cells", type=int, default=_env_int("HIGMAN_LINES_MAX_CELLS", hc.DEFAULT_MAX_CELLS))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="higman-lines", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    bs = groups.add_parser("bs", help="Baumslag-Solitar groups").add_subparsers(dest="command", required=True)
    for name in ("ball", "lambda"):
        p = bs.add_parser(name)
        _bs_args(p)
        _radius(p)
        p.add_argument("--max-vertices", type=int,
                       default=_env_int("HIGMAN_LINES_MAX_VERTICES", cl.DEFAULT_MAX_VERTICES))
        _common(p, ("json", "dot", "text"))
    p = bs.add_parser("gaps")
    _bs_args(p)
    _radius(p)
    p.add_argument("--u1", required=True, help="word for an element on the first a-line")
    p.add_argument("--u2", required=True, help="word for an element on the second a-line")
    _common(p)
    p = bs.add_parser("order")
    _bs_args(p)
    p.add_argument("--u1", required=True)
    p.add_argument("--u2", required=True)
    _common(p)
    p = bs.add_parser("check-lemma")
    p.add_argument("lemma", choices=LEMMAS)
    _bs_args(p)
    _radius(p, 8)
    p.add_argument("--max-distance", type=int, default=None)
    p.add_argument("--search-bound", type=int, default=3)
    p.add_argument("--search-radius", type=int, default=1)
    p.add_argument("--exponent-bound", type=int, default=4)
    _common(p)

    ex = groups.add_parser("exotic", help="the exotic bijection of BS(1,2)").add_subparsers(
        dest="command", required=True)
    p = ex.add_parser("verify")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--radius", type=int, default=None, help="default 2^n + 4")
    _common(p)

    hig = groups.add_parser("higman", help="developed complexes").add_subparsers(dest="command", required=True)
    p = hig.add_parser("ball")
    _sigma_args(p)
    _common(p, ("json", "dot", "text"))
    p = hig.add_parser("links")
    _sigma_args(p)
    _common(p)
    p = hig.add_parser("fsigma")
    p.add_argument("--sigma", required=True)
    _common(p, ("json", "text"))
    p = hig.add_parser("witness")
    p.add_argument("--sigma", default="1,2;1,2;1,2;1,2;1,2")
    p.add_argument("--i", type=int, default=1)
    p.add_argument("--s1", type=int, default=None)
    p.add_argument("--s2", type=int, default=None)
    p.add_argument("--bound", type=int, default=3)
    _common(p)

    th = groups.add_parser("theta", help="intersection graphs").add_subparsers(dest="command", required=True)
    p = th.add_parser("build")
    _sigma_args(p)
    _common(p, ("json", "dot", "text"))
    p = th.add_parser("cycles")
    _sigma_args(p)
    p.add_argument("--k", type=int, default=None, help="cycle length (default: polygon size)")
    p.add_argument("--margin", type=int, default=1)
    _common(p)
    p = th.add_parser("verify")
    _sigma_args(p)
    p.add_argument("--margin", type=int, default=1)
    p.add_argument("--drop-edge", default=None, help="u,v: remove this Θ-edge first (fault injection)")
    _common(p)
    p = th.add_parser("equivariance")
    _sigma_args(p)
    p.add_argument("--tau", type=int, required=True)
    _common(p)
    return parser


# -- commands -------------------------------------------------------------------


def _lambda(args):
    params = make_params(args.m, args.n)
    return cl.lambda_graph(cl.ball(params, args.radius))


def _a_line(params, word):
    return cl.line_of(normalize(params, word), "a")


def cmd_bs(args):
    params = make_params(args.m, args.n)
    if args.command in ("ball", "lambda"):
        ball = cl.ball(params, args.radius, args.max_vertices)
        if args.command == "ball":
            if args.format == "dot":
                return cl.cayley_dot(ball), 0
            if args.format == "text":
                return f"{params} radius {args.radius}: {len(ball)} vertices, {len(ball.edges)} edges\n", 0
            return ball.to_json(), 0
        lam = cl.lambda_graph(ball)
        if args.format == "dot":
            return cl.lambda_dot(lam), 0
        if args.format == "text":
            return (f"{params} radius {args.radius}: {len(lam.a_nodes())} a-lines, "
                    f"{len(lam.t_nodes())} t-lines, {len(lam.links)} links\n"), 0
        return lam.to_json(), 0
    if args.command == "order":
        u1, u2 = _a_line(params, args.u1), _a_line(params, args.u2)
        out = {"schema": SCHEMA_VERSION, "kind": "tree_order", "u1": str(u1), "u2": str(u2),
               "order": cl.tree_order(u1, u2), "distance": cl.tree_distance(u1, u2),
               "address_u1": cl.bass_serre_address(u1).to_json(),
               "address_u2": cl.bass_serre_address(u2).to_json()}
        return out, 0
    if args.command == "gaps":
        lam = cl.lambda_graph(cl.ball(params, args.radius))
        rep = cl.gaps(lam, _a_line(params, args.u1), _a_line(params, args.u2))
        return rep.to_json(), 0 if rep.passed else 1
    lam = cl.lambda_graph(cl.ball(params, args.radius))
    lemma = args.lemma
    if lemma == "3.2":
        rep = cl.type_survey(lam, search_bound=args.search_bound)
    elif lemma == "3.4":
        rep = cl.gap_survey(lam, args.max_distance or 2)
    elif lemma == "3.5":
        rep = cl.containment_survey(lam, args.max_distance or 3)
    elif lemma in ("3.6", "3.7"):
        if (lemma == "3.7") != params.divides:
            need = "m | n" if lemma == "3.7" else "m ∤ n"
            raise ValidationError(f"lemma {lemma} is the {need} case; {params} does not qualify")
        rep = cl.adjacency_survey(lam, args.max_distance or 3, args.search_radius)
    elif lemma == "malnormal":
        rep = cl.malnormal_check(lam.ball, args.exponent_bound)
    else:
        rep = cl.count_survey(lam)
    return rep, None


def cmd_exotic(args):
    params = exotic.ExoticParams(args.n)
    radius = args.radius if args.radius is not None else params.shift + 4
    return exotic.verify_exotic(cl.ball(exotic.BS12, radius), params), None


def _developed(args):
    return hc.build_ball(hc.make_sigma(args.sigma), args.r, args.s, args.max_cells)


def cmd_higman(args):
    if args.command == "fsigma":
        sigma = hc.make_sigma(args.sigma)
        fs = hc.f_sigma(sigma)
        if args.format == "text":
            return f"F_sigma for {sigma}: {{{', '.join(map(str, fs.translations))}}}, order {fs.order}\n", 0
        return fs.to_json(), 0
    if args.command == "witness":
        sigma = hc.make_sigma(args.sigma)
        pairs = ([(args.s1, args.s2)] if args.s1 is not None and args.s2 is not None else
                 [(a, b) for a in range(-args.bound, args.bound + 1)
                  for b in range(-args.bound, args.bound + 1) if a != b])
        found = [hc.common_power_witness(sigma, args.i, a, b, args.bound).to_json() for a, b in pairs]
        return Report("common_power_witness", PASS, {"checked": len(found)}, found), None
    ball = _developed(args)
    if args.command == "ball":
        if args.format == "dot":
            return hc.skeleton_dot(ball), 0
        if args.format == "text":
            return (f"sigma {ball.sigma} r={ball.r} s={ball.s}: {len(ball.cells)} cells, "
                    f"{len(ball.edges)} edges, {len(ball.vertices)} vertices, sha256 {ball.digest()}\n"), 0
        return ball.to_json(), 0
    links = hc.check_links(ball, args.threads)
    quotient = hc.quotient_check(ball)
    status = PASS if links.passed and quotient.passed else "FAIL"
    return Report("higman_links", status, {"links": links.to_json(), "quotient": quotient.to_json(),
                                           "sha256": ball.digest()}), None


def cmd_theta(args):
    ball = _developed(args)
    th = ig.theta(ball)
    if args.command == "build":
        if args.format == "dot":
            return ig.theta_dot(ball, th), 0
        if args.format == "text":
            return f"Θ on {len(th.nodes)} vertices with {len(th.edges)} edges\n", 0
        return th.to_json(), 0
    if args.command == "equivariance":
        return ig.theta_equivariance(th, ball, tau=args.tau), None
    region = ig.region(ball, args.margin)
    if args.command == "cycles":
        k = args.k or ball.k
        cycles = ig.induced_cycles(th, k, region)
        return {"schema": SCHEMA_VERSION, "kind": "induced_cycles", "k": k, "margin": args.margin,
                "region_size": len(region), "count": len(cycles), "cycles": [list(c) for c in cycles]}, 0
    if args.drop_edge:
        try:
            u, v = (int(x) for x in args.drop_edge.split(","))
        except ValueError:
            raise ValidationError("--drop-edge expects two vertex ids like 3,7") from None
        if not th.has_edge(u, v):
            raise ValidationError(f"{u},{v} is not a Θ-edge")
        th = th.without_edge(u, v)
    rep = ig.verify_correspondence(ball, th, region)
    rep.details["margin"] = args.margin
    return rep, None


HANDLERS = {"bs": cmd_bs, "exotic": cmd_exotic, "higman": cmd_higman, "theta": cmd_theta}


def _render(obj, fmt) -> str:
    if isinstance(obj, str):
        return obj
    if isinstance(obj, Report):
        if fmt == "text":
            lines = [f"{obj.check}: {obj.status}"]
            lines += [f"  {k}: {json.dumps(v, sort_keys=True)}" for k, v in sorted(obj.details.items())]
            lines += [f"  witness: {json.dumps(w, sort_keys=True)}" for w in obj.witnesses[:10]]
            return "\n".join(lines) + "\n"
        obj = obj.to_json()
    return dumps(obj) + "\n"


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be >= 1")
    try:
        result, code = HANDLERS[args.group](args)
    except HigmanLinesError as exc:
        err = {"schema": SCHEMA_VERSION, "kind": "error", "error": type(exc).__name__, "message": str(exc)}
        print(dumps(err), file=sys.stderr)
        return exc.exit_code
    if code is None:
        code = 0 if result.passed else 1
    text = _render(result, getattr(args, "format", "json"))
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
