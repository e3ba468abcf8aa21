"""``igs`` command line: theory, lyapunov, generate, boxdim, selftest."""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, boxcover, lyapunov, report, spectral
from .errors import IGSError, ParseError
from .graph import ColoredDigraph, chi, diameter_bounds, distance
from .system import generate, parse_system_file


def _fmt_vec(v):
    return "(" + ",".join(str(int(x)) for x in v) + ")"


def _fmt_mat(m):
    return "[" + ", ".join(_fmt_vec(r) for r in np.asarray(m)) + "]"


def _emit(rep, args):
    if getattr(args, "json", None):
        rep.write(args.json)
        print(f"report written to {args.json}")


def _base_report(args, spec, command, **params):
    return report.DimensionReport(
        command=command,
        parameters=params,
        system_id=report.system_id(spec) if spec is not None else None,
        system=getattr(spec, "source", None),
    )


# ----------------------------------------------------------------------------- theory


def cmd_theory(args):
    spec = parse_system_file(args.system)
    th = spectral.deterministic_dimension(spec)
    print(f"system {spec.source}")
    print(f"M = {_fmt_mat(th.arc_matrix)}")
    for i, vs in enumerate(th.path_chi_sets, start=1):
        print(f"V_{i} = {{{', '.join(_fmt_vec(v) for v in vs)}}}")
    radii = th.rho_min.radii
    print(f"D has {len(th.family)} matrices:")
    for m, r in zip(th.family.members, radii):
        print(f"  {_fmt_mat(m)}  rho = {r:.6f}")
    print(f"rho(M) = {th.rho_m:.6f}")
    mins = ", ".join(_fmt_mat(m) for m in th.rho_min.members)
    print(f"rho_min = {th.rho_min.value:.6f} attained by {mins}")
    print(f"dimension = log {th.rho_m:.6g} / log {th.rho_min.value:.6g} = {th.dimension:.4f}")
    rep = _base_report(args, spec, "theory")
    rep.theoretical = report.spectral_section(th)
    _emit(rep, args)
    return rep


# ----------------------------------------------------------------------------- lyapunov


def cmd_lyapunov(args):
    spec = parse_system_file(args.system)
    rt = lyapunov.random_dimension(spec, args.steps, args.trials, args.seed)
    print(f"system {spec.source}")
    print(f"{'set':<32} {'estimate':>10} {'stderr':>10}")
    for lab, e in zip(rt.lmin.labels, rt.lmin.estimates):
        print(f"{lyapunov.format_label(lab):<32} {e.value:>10.4f} {e.stderr:>10.4f}")
    print(f"L(M) = {rt.l_m.value:.4f} +- {rt.l_m.stderr:.4f}"
          f"   (log rho(E M) = {rt.bound.value:.4f})")
    ties = ""
    if len(rt.lmin.ties) > 1:
        ties = f"   ({len(rt.lmin.ties)} sets tie within 2 stderr)"
    print(f"L_min = {rt.lmin.estimate.value:.4f} +- {rt.lmin.estimate.stderr:.4f}"
          f" at {lyapunov.format_label(rt.lmin.label)}{ties}")
    print(f"dimension = {rt.dimension:.4f} +- {rt.stderr:.4f}")
    rep = _base_report(args, spec, "lyapunov", steps=args.steps, trials=args.trials, seed=args.seed)
    rep.theoretical = report.lyapunov_section(rt)
    _emit(rep, args)
    return rep


# ----------------------------------------------------------------------------- generate


def graph_stats(g, a=None, b=None):
    d = diameter_bounds(g)
    out = {
        "num_nodes": g.num_nodes,
        "num_arcs": g.num_arcs,
        "chi": chi(g).tolist(),
        "diameter": d.value if d.exact else [d.lower, d.upper],
    }
    if a is not None:
        out["ab_distance"] = distance(g, a, b)
    return out


def cmd_generate(args):
    spec = parse_system_file(args.system)
    trace = generate(spec, args.steps, args.seed)
    g = trace.final
    stats = graph_stats(g, trace.a_node, trace.b_node)
    doc = {
        "system_id": report.system_id(spec),
        "system": spec.source,
        "steps": args.steps,
        "seed": args.seed,
        "tool_version": __version__,
        "stats": stats,
        "graph": g.to_dict(),
    }
    if args.out:
        Path(args.out).write_text(json.dumps(doc, separators=(",", ":")) + "\n", encoding="utf-8")
        for k, v in stats.items():
            print(f"{k} = {v}")
        print(f"graph written to {args.out}")
    else:
        print(json.dumps(doc, separators=(",", ":")))
    return doc


# ----------------------------------------------------------------------------- boxdim


def read_graph_file(path) -> ColoredDigraph:
    """A JSON graph (bare, or under a ``graph`` key as written by ``generate``),
    or a whitespace edge list ``tail head [color]``."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
        return ColoredDigraph.from_dict(d.get("graph", d))
    arcs = []
    for k, line in enumerate(text.splitlines(), start=1):
        parts = line.split("#")[0].split()
        if not parts:
            continue
        try:
            t, h = int(parts[0]), int(parts[1])
            c = int(parts[2]) if len(parts) > 2 else 1
        except (ValueError, IndexError) as exc:
            raise ParseError(f"{path}: line {k}: expected 'tail head [color]'") from exc
        arcs.append((t, h, c))
    if not arcs:
        raise ParseError(f"{path}: no arcs")
    return ColoredDigraph.from_arcs(arcs, max(c for _, _, c in arcs))


def _theory_value(spec, args):
    if spec.is_deterministic:
        th = spectral.deterministic_dimension(spec)
        return th.dimension, 0.0, report.spectral_section(th)
    rt = lyapunov.random_dimension(spec, seed=args.seed)
    return rt.dimension, rt.stderr, report.lyapunov_section(rt)


def cmd_boxdim(args):
    from .graph import validate_graph

    spec = None
    if args.graph:
        g0 = read_graph_file(args.graph)
        validate_graph(g0)
        graphs = [(None, g0)]
    else:
        if not args.system:
            raise ParseError("boxdim needs a system file or --graph")
        spec = parse_system_file(args.system)
        seeds = range(args.seed, args.seed + args.repeat)
        graphs = [(s, generate(spec, args.steps, s).final) for s in seeds]
    results = []
    for s, g in graphs:
        res = boxcover.estimate_box_dimension(g, args.lmin, args.lmax)
        results.append(res)
        tag = f"seed {s}: " if s is not None else ""
        print(f"{tag}|V| = {g.num_nodes}, |E| = {g.num_arcs}, diameter = {res.curve.diameter}, "
              f"L = {res.fit.range[0]}..{res.fit.range[1]}, "
              f"estimate = {res.estimate:.4f} +- {res.stderr:.4f}"
              + (" (greedy counts repaired to be monotone)" if res.curve.repaired else ""))
    first = results[0]
    if args.csv:
        boxcover.write_curve_csv(first.curve, args.csv)
    if args.svg:
        boxcover.write_curve_svg(first.curve, first.fit, args.svg)
    seeds = [s for s, _ in graphs]
    emp = report.empirical_section(results, seeds, args.steps if spec else None)
    if len(results) > 1:
        print(f"mean over {len(results)} runs = {emp['value']:.4f} +- {emp['stderr']:.4f}")
    rep = _base_report(args, spec, "boxdim", steps=args.steps, seed=args.seed, repeat=args.repeat,
                       lmin=args.lmin, lmax=args.lmax, graph=args.graph)
    rep.empirical = emp
    if spec is not None and not args.no_theory:
        value, se, section = _theory_value(spec, args)
        rep.theoretical = section
        print(f"theory = {value:.4f}" + (f" +- {se:.4f}" if se else "")
              + f"   empirical = {emp['value']:.4f}   gap = {value - emp['value']:+.4f}")
    _emit(rep, args)
    return rep


# ----------------------------------------------------------------------------- selftest


def cmd_selftest(args):
    from . import selftest

    checks = selftest.run(args.systems or None, quick=args.quick)
    for c in checks:
        print(c.line())
    failed = [c for c in checks if not c.ok and not c.info]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    if failed:
        raise SelftestFailed(f"{len(failed)} selftest checks failed")
    return checks


class SelftestFailed(IGSError):
    exit_code = 1


# ----------------------------------------------------------------------------- main


def build_parser():
    p = argparse.ArgumentParser(prog="igs", description=__doc__)
    p.add_argument("--version", action="version", version=f"igs {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("theory", help="spectral dimension of a deterministic system")
    t.add_argument("system", help="system JSON file or bundled system name")
    t.add_argument("--json", metavar="PATH", help="write a JSON report")
    t.set_defaults(func=cmd_theory)

    ly = sub.add_parser("lyapunov", help="Lyapunov dimension of a random system")
    ly.add_argument("system")
    ly.add_argument("--steps", type=int, default=lyapunov.DEFAULT_STEPS)
    ly.add_argument("--trials", type=int, default=lyapunov.DEFAULT_TRIALS)
    ly.add_argument("--seed", type=int, required=True)
    ly.add_argument("--json", metavar="PATH")
    ly.set_defaults(func=cmd_lyapunov)

    g = sub.add_parser("generate", help="write the level-n graph of a system")
    g.add_argument("system")
    g.add_argument("--steps", type=int, required=True)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", metavar="PATH", help="output file (default: JSON on stdout)")
    g.set_defaults(func=cmd_generate)

    b = sub.add_parser("boxdim", help="box-counting dimension by greedy ball covering")
    b.add_argument("system", nargs="?")
    b.add_argument("--graph", metavar="PATH", help="estimate on a graph file instead")
    b.add_argument("--steps", type=int, default=5)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--repeat", type=int, default=1, help="seeds seed..seed+repeat-1")
    b.add_argument("--lmin", type=int, default=2)
    b.add_argument("--lmax", type=int, default=None, help="default: diameter // 2")
    b.add_argument("--csv", metavar="PATH")
    b.add_argument("--svg", metavar="PATH")
    b.add_argument("--no-theory", action="store_true", help="skip the theoretical value")
    b.add_argument("--json", metavar="PATH")
    b.set_defaults(func=cmd_boxdim)

    s = sub.add_parser("selftest", help="run the bundled invariant suite")
    s.add_argument("systems", nargs="*", help="system files (default: bundled systems)")
    s.add_argument("--quick", action="store_true")
    s.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        try:
            args.func(args)
            code = 0
        except IGSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = exc.exit_code
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = 2
    for w in caught:
        print(f"note: {w.message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
