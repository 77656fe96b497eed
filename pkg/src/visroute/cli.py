"""Command-line entry point: ``visroute <verb> [options]``.

Machine-readable output goes to ``--out`` (or stdout); diagnostics go to
stderr.  Exit codes: 0 success, 1 verification failure or bad input,
2 routing got stuck, 3 target unreachable, 4 step budget exceeded.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import bounds, fixtures, suites
from .cones import build_constrained_half_theta6, build_constrained_theta
from .instance import (
    GeomGraph,
    InstanceError,
    InstanceParseError,
    graph_from_json,
    guess_format,
    load_instance,
    random_instance,
    save_instance,
)
from .render import Layers, RenderError, render_svg
from .router import Router, StepBudgetExceeded
from .triangulation import build_cdt, extract_H
from .visibility import build_visibility_graph

EXIT_OK, EXIT_FAIL, EXIT_STUCK, EXIT_UNREACHABLE, EXIT_BUDGET = 0, 1, 2, 3, 4
GRAPHS = ("vis", "theta6", "half-theta6", "cdt")
ALGOS = {"theta": "theta", "face1": "face1", "face2": "face2",
         "face1-on-h": "face1_on_H", "face2-on-h": "face2_on_H"}
ALGO_GRAPH = {"theta": "theta6", "face1": "vis", "face2": "vis",
              "face1-on-h": "cdt", "face2-on-h": "cdt"}
FIXTURES = ("theta-stuck", "subcone", "hidden-closer", "hidden-closer-blocked")


def log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _emit(data: bytes | str, out: str | None) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if out:
        with open(out, "wb") as f:
            f.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=1, sort_keys=True) + "\n").encode("utf-8")


def _read_instance(path: str, fmt: str | None):
    with open(path, "rb") as f:
        return load_instance(f.read(), fmt or guess_format(path))


def build_graph(inst, kind: str) -> GeomGraph:
    if kind == "vis":
        return build_visibility_graph(inst)
    if kind == "theta6":
        return build_constrained_theta(inst, 6)
    if kind == "half-theta6":
        return build_constrained_half_theta6(inst)
    if kind == "cdt":
        return build_cdt(inst).graph
    raise ValueError(f"unknown graph kind {kind!r}")


# --- verbs ------------------------------------------------------------------


def cmd_gen(a) -> int:
    if a.fixture:
        inst = _fixture(a.fixture)
    else:
        if a.n < 2:
            log("gen: --n must be at least 2")
            return EXIT_FAIL
        try:
            inst = random_instance(a.n, seed=a.seed, density=a.density)
        except ValueError as e:
            log(f"gen: {e}")
            return EXIT_FAIL
    _emit(save_instance(inst, a.format), a.out)
    log(f"gen: {inst.n} points, {len(inst.constraints)} constraints")
    return EXIT_OK


def _fixture(name: str):
    if name == "theta-stuck":
        return fixtures.theta_stuck_example()[0]
    if name == "subcone":
        return fixtures.subcone_example()[0]
    return fixtures.hidden_closer_example(name.endswith("blocked"))[0]


def cmd_build(a) -> int:
    inst = _read_instance(a.input, a.format)
    g = build_graph(inst, a.graph)
    _emit(_json_bytes(g.to_json()), a.out)
    log(f"build: {a.graph} with {len(g.edges())} edges")
    return EXIT_OK


def cmd_route(a) -> int:
    inst = _read_instance(a.input, a.format)
    for v in (a.s, a.t):
        if not 0 <= v < inst.n:
            log(f"route: vertex {v} out of range")
            return EXIT_FAIL
    kind = a.graph or ALGO_GRAPH[a.algo]
    if kind != ALGO_GRAPH[a.algo]:
        log(f"route: --algo {a.algo} runs on {ALGO_GRAPH[a.algo]}, not {kind}")
        return EXIT_FAIL
    router = Router(inst, ALGOS[a.algo], build_graph(inst, kind))
    code = EXIT_OK
    try:
        tr = router.route(a.s, a.t, a.max_steps)
    except StepBudgetExceeded as e:
        tr = e.trace
        code = EXIT_BUDGET
    if tr.status == "stuck":
        code = EXIT_STUCK
    elif tr.status == "unreachable":
        code = EXIT_UNREACHABLE
    _emit(_json_bytes(tr.to_json(inst)), a.out)
    log(f"route: {tr.status} after {len(tr.steps)} steps, length {tr.total_length:.6g}")
    return code


def cmd_verify(a) -> int:
    if a.suite == "lowerbound":
        results = [suites.lowerbound_case(a.n or 16, Fraction(a.x), Fraction(a.eps))]
    else:
        kw = {}
        if a.n and a.suite in ("local-ident", "planarity", "spanning", "delivery"):
            kw = {"n_min": min(10, a.n), "n_max": a.n}
        elif a.n:
            kw = {"n_max": a.n}
        trials = a.trials if a.trials is not None else 50
        seeds = range(a.seed, a.seed + trials)
        results = suites.run_suite(a.suite, seeds, jobs=a.jobs, **kw)
    bad = [r for r in results if not r["ok"]]
    report = {"suite": a.suite, "cases": len(results), "failures": len(bad), "results": results}
    _emit(_json_bytes(report), a.out)
    log(f"verify {a.suite}: {len(results) - len(bad)}/{len(results)} cases passed")
    return EXIT_OK if not bad else EXIT_FAIL


def cmd_lowerbound(a) -> int:
    try:
        params = bounds.LowerBoundParams(a.n or 16, Fraction(a.x), Fraction(a.eps))
    except ValueError as e:
        log(f"lowerbound: {e}")
        return EXIT_FAIL
    inst, s, t = bounds.gen_lower_bound(params)
    if a.instance_out:
        with open(a.instance_out, "wb") as f:
            f.write(save_instance(inst, a.format))
    rep = bounds.verify_lower_bound(params)
    out = rep.to_json()
    out.update({"x": str(params.x), "eps": str(params.eps),
                "pi_G_path": list(rep.pi_G.vertices), "pi_H_path": list(rep.pi_H.vertices)})
    _emit(_json_bytes(out), a.out)
    log(f"lowerbound: |pi_H|/|pi_G| = {rep.ratios['H/G']:.6f}, closed form {rep.closed_form:.6f}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_measure(a) -> int:
    if a.input:
        inst = _read_instance(a.input, a.format)
    else:
        inst = random_instance(a.n or 20, seed=a.seed, density=a.density)
    kind = ALGO_GRAPH[a.algo]
    g = build_graph(inst, kind)
    pairs = "all" if a.trials is None else a.trials
    res = bounds.measure_routing_ratio(inst, g, ALGOS[a.algo], pairs=pairs, seed=a.seed)
    if a.csv:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(res["rows"][0]) if res["rows"] else ["s", "t"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(res["rows"])
        _emit(buf.getvalue(), a.out)
    else:
        _emit(_json_bytes(res), a.out)
    log(f"measure {a.algo}: max ratio {res['max']}, mean {res['mean']}, "
        f"nondelivered {res['nondelivered']}/{res['pairs']}")
    return EXIT_OK if res["nondelivered"] == 0 else EXIT_FAIL


def cmd_render(a) -> int:
    inst = _read_instance(a.input, a.format)
    graph = None
    if a.graph_file:
        with open(a.graph_file) as f:
            graph = graph_from_json(inst, json.load(f))
    elif a.graph:
        graph = build_graph(inst, a.graph)
    trace = None
    if a.trace:
        with open(a.trace) as f:
            trace = [(st["from"], st["to"]) for st in json.load(f)["steps"]]
    pi_G = pi_H = None
    if a.s is not None and a.t is not None:
        if not (0 <= a.s < inst.n and 0 <= a.t < inst.n):
            log(f"render: --s/--t must lie in 0..{inst.n - 1}")
            return EXIT_FAIL
        T = build_cdt(inst)
        pg = bounds.shortest_path(T.graph, a.s, a.t)
        ph = bounds.shortest_path(extract_H(T, a.s, a.t).H, a.s, a.t)
        pi_G = pg.vertices if pg else None
        pi_H = ph.vertices if ph else None
        if graph is None:
            graph = T.graph
    layers = Layers(labels=not a.no_labels, graph=not a.no_graph, trace=not a.no_trace,
                    paths=not a.no_paths)
    try:
        svg = render_svg(inst, graph, pi_G, pi_H, trace, layers, equal_aspect=not a.stretch)
    except RenderError as e:
        log(f"render: {e}")
        return EXIT_FAIL
    _emit(svg, a.out)
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="visroute", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, instance=False):
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("text", "json"), default=None,
                        help="instance format (default: from file extension, else text)")
        if instance:
            sp.add_argument("input", help="instance file")

    g = sub.add_parser("gen", help="write a random or fixture instance")
    common(g)
    g.add_argument("--n", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--density", type=float, default=0.0)
    g.add_argument("--fixture", choices=FIXTURES)
    g.set_defaults(func=cmd_gen)

    b = sub.add_parser("build", help="build a graph on an instance")
    common(b, instance=True)
    b.add_argument("--graph", choices=GRAPHS, default="half-theta6")
    b.set_defaults(func=cmd_build)

    r = sub.add_parser("route", help="route one message and write its trace")
    common(r, instance=True)
    r.add_argument("--algo", choices=tuple(ALGOS), default="face1")
    r.add_argument("--graph", choices=GRAPHS)
    r.add_argument("--s", type=int, required=True)
    r.add_argument("--t", type=int, required=True)
    r.add_argument("--max-steps", type=int)
    r.set_defaults(func=cmd_route)

    v = sub.add_parser("verify", help="run a verification suite")
    common(v)
    v.add_argument("suite", choices=tuple(suites.SUITES) + ("lowerbound",))
    v.add_argument("--n", type=int)
    v.add_argument("--trials", type=int)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--x", default="1000")
    v.add_argument("--eps", default="1/1000")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_verify)

    lb = sub.add_parser("lowerbound", help="generate and check the staggered-rows construction")
    common(lb)
    lb.add_argument("--n", type=int, default=16)
    lb.add_argument("--x", default="1000")
    lb.add_argument("--eps", default="1/1000")
    lb.add_argument("--instance-out", help="also write the generated instance here")
    lb.set_defaults(func=cmd_lowerbound)

    m = sub.add_parser("measure", help="routing ratio statistics over many pairs")
    common(m)
    m.add_argument("input", nargs="?", help="instance file (default: generate one)")
    m.add_argument("--algo", choices=tuple(ALGOS), default="face1")
    m.add_argument("--n", type=int)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--density", type=float, default=0.3)
    m.add_argument("--trials", type=int, help="number of sampled pairs (default: all pairs)")
    m.add_argument("--csv", action="store_true", help="per-pair CSV instead of a JSON summary")
    m.set_defaults(func=cmd_measure)

    d = sub.add_parser("render", help="draw an instance as SVG")
    common(d, instance=True)
    d.add_argument("--graph", choices=GRAPHS)
    d.add_argument("--graph-file", help="graph JSON written by `build`")
    d.add_argument("--trace", help="trace JSON written by `route`")
    d.add_argument("--s", type=int, help="with --t: overlay shortest paths in the CDT and in H")
    d.add_argument("--t", type=int)
    d.add_argument("--stretch", action="store_true", help="scale axes independently")
    d.add_argument("--no-labels", action="store_true")
    d.add_argument("--no-graph", action="store_true")
    d.add_argument("--no-trace", action="store_true")
    d.add_argument("--no-paths", action="store_true")
    d.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    if a.verb == "gen" and a.format is None:
        a.format = guess_format(a.out) if a.out else "text"
    elif a.verb == "lowerbound" and a.format is None:
        a.format = guess_format(a.instance_out) if a.instance_out else "text"
    try:
        return a.func(a)
    except (InstanceError, InstanceParseError) as e:
        log(f"{a.verb}: invalid instance: {e}")
        return EXIT_FAIL
    except OSError as e:
        log(f"{a.verb}: {e}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
