"""Command-line front end: ``graphonlab <subcommand> ...``.

Exit status: 0 on success or pass, 1 on a failed verification, 2 on usage or
input errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import acceptance, adjoints
from . import cr as crmod
from .density import DEFAULT_SAMPLES, DensityEstimate, csv_header, csv_row, density, tk_eval
from .expr import parse_graphon, read
from .forcing import FAMILIES, POINTS, adjoint_identity_check, verify_family
from .graphio import ParseError, load_graphs
from .graphon import GraphonError, discretize
from .graphs import GraphError, QuantumGraph
from .spectral import Polynomial, eigendecompose, spectral_solve
from .wrandom import convergence_experiment, degree_report, induced_p4, sample_graph

DEFAULTS = {
    "seed": 0,
    "samples": DEFAULT_SAMPLES,
    "grid": 256,
    "spectrum_grid": 512,
    "oprod_m": 1024,
    "top": 10,
    "points": POINTS,
    "cf_depth": 40,
    "cf_terms": 10,
    "tree_depth": 6,
}


class UsageError(ValueError):
    pass


def _header(cmd: str, cfg: dict) -> list[str]:
    items = " ".join(f"{k}={v}" for k, v in cfg.items())
    return [f"# graphonlab {cmd}", f"# {items}"]


def _emit(args, lines: list[str]):
    text = "\n".join(lines) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _graphon(expr: str):
    return parse_graphon(expr, src="--graphon")


def _fraction(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"expected a rational number, got {s!r}") from None


def _format_estimate(est: DensityEstimate) -> str:
    out = f"value {est.value:.12g}  stderr {est.stderr:.3g}  method {est.method}  n {est.n}"
    if est.exact is not None:
        out += f"  exact {est.exact}"
    return out


# -- subcommands --------------------------------------------------------------------

def cmd_density(args) -> int:
    gf = load_graphs(args.graph)
    f = gf.main(args.name)
    w = _graphon(args.graphon)
    method = args.method
    if method == "grid":
        if w.step is None:
            w = discretize(w, args.grid)
        method = "exact"
    k = f.k if isinstance(f, QuantumGraph) else len(f.labels)
    cfg = {"graph": args.graph, "graphon": w.name, "method": args.method, "samples": args.samples,
           "grid": args.grid, "seed": args.seed, "labels": args.labels or "-"}
    if args.labels:
        x = [float(v) for v in args.labels.split(",")]
        est = tk_eval(f, w, x, n=args.samples, seed=args.seed, method=method, cap=None)
    else:
        if k and not args.integrate:
            raise UsageError(f"graph has {k} labels: give --labels or --integrate")
        est = density(f, w, method=method, n=args.samples, seed=args.seed, cap=None)
    gname = args.name or Path(args.graph).stem
    if args.out == "csv":
        lines = _header("density", cfg) + [csv_header(), csv_row(gname, w.name, est)]
    else:
        lines = _header("density", cfg) + [f"t({gname}, {w.name})", _format_estimate(est)]
    _emit(args, lines)
    return 0


def _parse_poly(text: str):
    node = read(text, "--poly")
    items = getattr(node, "items", None)
    if not items or getattr(items[0], "text", None) != "poly":
        raise UsageError("--poly expects (poly (i j c)...)")
    terms = []
    for t in items[1:]:
        i, j, c = (a.text for a in t.items)
        terms.append((int(i), int(j), Fraction(c)))
    return terms


def cmd_verify(args) -> int:
    w = _graphon(args.graphon)
    poly = _parse_poly(args.poly) if args.poly else None
    ref = _graphon(args.reference) if args.reference else None
    d = _fraction(args.d) if args.d else None
    rep = verify_family(w, args.family, d=d, poly=poly, reference=ref, samples=args.samples,
                        seed=args.seed, points=args.points)
    cfg = {"family": args.family, "graphon": w.name, "samples": args.samples, "seed": args.seed,
           "points": args.points}
    body = rep.csv() if args.out == "csv" else rep.text()
    _emit(args, _header("verify", cfg) + [body])
    return 0 if rep.passed else 1


def cmd_sample(args) -> int:
    w = _graphon(args.graphon)
    cfg = {"graphon": w.name, "n": args.n, "seed": args.seed}
    if args.convergence:
        if not args.graph:
            raise UsageError("--convergence needs --graph")
        F = load_graphs(args.graph).main(args.name)
        ns = [int(v) for v in args.convergence.split(",")]
        cfg.update(trials=args.trials, sizes=args.convergence, graph=args.graph)
        rows = convergence_experiment(w, F, ns, args.trials, seed=args.seed, target_samples=args.samples)
        lines = _header("sample", cfg) + ["n,trials,mean,std,min,max,target"]
        lines += [f"{r.n},{r.trials},{r.mean:.10g},{r.std:.6g},{r.lo:.10g},{r.hi:.10g},{r.target:.10g}"
                  for r in rows]
        _emit(args, lines)
        return 0
    g = sample_graph(w, args.n, args.seed)
    if args.out == "csv":
        lines = _header("sample", cfg) + ["u,v"] + [f"{u + 1},{v + 1}" for u, v in g.edges]
    else:
        lines = [g.edge_list().rstrip("\n")]
    if args.degree is not None:
        rep = degree_report(g, float(_fraction(args.degree)), args.eps)
        lines.append("# degree " + rep.text())
    if args.p4:
        count, wit = induced_p4(g)
        lines.append(f"# induced P4: {count}" + (f" (e.g. nodes {tuple(v + 1 for v in wit)})" if wit else ""))
    _emit(args, lines)
    return 0


def cmd_spectrum(args) -> int:
    w = _graphon(args.graphon)
    if w.step is None:
        w = discretize(w, args.grid)
    cfg = {"graphon": w.name, "grid": args.grid, "top": args.top, "solve": args.solve or "-"}
    pairs = eigendecompose(w, top_k=args.top)
    lines = _header("spectrum", cfg)
    rows = [("U", i, e.value) for i, e in enumerate(pairs)]
    if args.solve:
        coeffs = [float(_fraction(c)) for c in args.solve.split()]
        sol = spectral_solve(w, coeffs)
        resid = float(np.max(np.abs(Polynomial(coeffs).apply_step(sol) - np.asarray(w.step.vf, dtype=float))))
        top = sorted(sol.eigenpairs, key=lambda e: -abs(e.value))[:args.top]
        rows += [("W", i, e.value) for i, e in enumerate(top)]
        lines.append(f"# forward residual max|p(W)-U| = {resid:.3e}")
    if args.out == "csv":
        lines += ["kernel,index,eigenvalue"] + [f"{k},{i},{v:.17g}" for k, i, v in rows]
    else:
        lines += [f"{k} eigenvalue {i}: {v:.12g}" for k, i, v in rows]
    _emit(args, lines)
    return 0


def cmd_cr(args) -> int:
    sources = [args.cf is not None, args.binary, args.tree is not None]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --cf, --binary, --tree")
    if args.cf is not None:
        alpha = _fraction(args.cf)
        if args.terms is not None and args.truncate is None and not args.show:
            print(" ".join(map(str, crmod.cf_sequence(alpha, args.terms))))
            return 0
        wt = crmod.make_cf(alpha, args.depth)
    elif args.binary:
        wt = crmod.make_binary()
    else:
        wt = crmod.parse_tree(Path(args.tree).read_text(), name=Path(args.tree).stem)
    cfg = {"tree": wt.name, "depth": args.depth, "truncate": args.truncate if args.truncate is not None else "-"}
    lines = _header("cr", cfg)
    bad = crmod.check_invariants(wt, depth=min(args.depth, 12))
    lines.append(f"# degree {wt.degree}  invariants {'ok' if not bad else '; '.join(bad)}")
    if args.truncate is not None:
        g = crmod.truncate(wt, args.truncate)
        st = g.step
        lines.append(f"# stepfunction with {st.m} blocks")
        lines.append("weights " + " ".join(str(v) for v in st.weights))
        lines += ["row " + " ".join(str(v) for v in row) for row in st.values]
    else:
        lines.append(crmod.format_tree(wt, None if isinstance(wt.tree, crmod.FiniteTree) else args.show_depth)
                     .rstrip("\n"))
    _emit(args, lines)
    return 0 if not bad else 1


def _operator(spec: str):
    kind, _, param = spec.partition(":")
    if kind == "scale":
        return adjoints.scale(_fraction(param))
    if kind == "shift":
        return adjoints.shift(_fraction(param))
    if kind == "tensor_fixed":
        return adjoints.tensor_fixed(_graphon(param))
    if kind == "tensor_power":
        return adjoints.tensor_pow(int(param))
    if kind == "poly_kernel":
        return adjoints.poly_kernel(tuple(_fraction(c) for c in param.split(",")))
    if kind == "edge_substitute":
        path, _, name = param.partition(":")
        return adjoints.edge_substitute(load_graphs(path).main(name or None))
    raise UsageError(f"unknown operator {kind!r}; use one of {', '.join(adjoints.KINDS)}")


def cmd_adjoint(args) -> int:
    op = _operator(args.op)
    F = load_graphs(args.graph).main(args.name)
    w = _graphon(args.graphon)
    chk = adjoint_identity_check(op, F, w, n=args.samples, seed=args.seed, m=args.m)
    cfg = {"op": str(op), "graph": args.graph, "graphon": w.name, "samples": args.samples,
           "seed": args.seed, "m": args.m}
    verdict = "PASS" if chk.passed else "FAIL"
    if args.out == "csv":
        body = ["op,lhs,rhs,gap,tol,pass",
                f'"{op}",{chk.lhs.value:.17g},{chk.rhs.value:.17g},{chk.gap:.17g},{chk.tol:.17g},{int(chk.passed)}']
    else:
        body = [f"t(F, op(W))   {_format_estimate(chk.lhs)}",
                f"t(op*(F), W)  {_format_estimate(chk.rhs)}",
                f"gap {chk.gap:.3e}  tol {chk.tol:.3e}  {verdict}"]
    _emit(args, _header("adjoint-check", cfg) + body)
    return 0 if chk.passed else 1


def cmd_selftest(args) -> int:
    only = {int(v) for v in args.only.split(",")} if args.only else None
    print("# graphonlab selftest")
    results = acceptance.run_all(only, echo=lambda s: print(s, flush=True))
    failed = [r.number for r in results if not r.passed]
    print(f"# {len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return 0 if not failed else 1


# -- parser -------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="graphonlab", description="graphon densities, forcing checks and CR-graphons")
    p.add_argument("--workers", type=int, help="worker threads for Monte Carlo (results do not depend on it)")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, samples=True):
        sp.add_argument("--seed", type=int, default=DEFAULTS["seed"])
        if samples:
            sp.add_argument("--samples", type=int, default=DEFAULTS["samples"])
        sp.add_argument("--out", choices=("text", "csv"), default="text")
        sp.add_argument("--output", help="write the report here instead of stdout")

    sp = sub.add_parser("density", help="t(F,W) or t^k(f,W)(x)")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--name", help="graph name inside the file")
    sp.add_argument("--graphon", required=True)
    sp.add_argument("--method", choices=("auto", "exact", "mc", "grid"), default="auto")
    sp.add_argument("--grid", type=int, default=DEFAULTS["grid"])
    sp.add_argument("--labels", help="comma-separated label coordinates for t^k")
    sp.add_argument("--integrate", action="store_true", help="integrate out the labels")
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("verify", help="check a forcing family")
    sp.add_argument("--family", required=True, choices=FAMILIES)
    sp.add_argument("--graphon", required=True)
    sp.add_argument("--d", help="degree for the regular family")
    sp.add_argument("--poly", help="(poly (i j c)...) for monpoly")
    sp.add_argument("--reference", help="reference graphon expression for monpoly")
    sp.add_argument("--points", type=int, default=DEFAULTS["points"])
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("sample", help="W-random graphs")
    sp.add_argument("--graphon", required=True)
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--degree", help="expected degree for the degree report")
    sp.add_argument("--eps", type=float, default=0.1)
    sp.add_argument("--p4", action="store_true", help="scan for induced 4-node paths")
    sp.add_argument("--convergence", help="comma-separated sizes for a density convergence table")
    sp.add_argument("--graph", help="pattern graph file for --convergence")
    sp.add_argument("--name")
    sp.add_argument("--trials", type=int, default=10)
    common(sp)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("spectrum", help="eigenvalues and the inverse-polynomial solve")
    sp.add_argument("--graphon", required=True)
    sp.add_argument("--grid", type=int, default=DEFAULTS["spectrum_grid"])
    sp.add_argument("--top", type=int, default=DEFAULTS["top"])
    sp.add_argument("--solve", help="coefficients a1..an of p, space separated")
    common(sp, samples=False)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("cr", help="CR trees, continued fractions, truncations")
    sp.add_argument("--cf", help="density alpha of the caterpillar graphon")
    sp.add_argument("--binary", action="store_true")
    sp.add_argument("--tree", help="tree file")
    sp.add_argument("--terms", type=int, help="print the leaf-count sequence")
    sp.add_argument("--depth", type=int, default=DEFAULTS["cf_depth"], help="caterpillar cut depth")
    sp.add_argument("--show", action="store_true", help="print the tree even with --terms")
    sp.add_argument("--show-depth", type=int, default=DEFAULTS["tree_depth"], dest="show_depth")
    sp.add_argument("--truncate", type=int, help="emit the stepfunction cut at this depth")
    sp.add_argument("--out", choices=("text", "csv"), default="text")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_cr)

    sp = sub.add_parser("adjoint-check", help="t(F, op(W)) against t(op*(F), W)")
    sp.add_argument("--op", required=True, help="kind:param, e.g. scale:3/2, poly_kernel:1,1/2")
    sp.add_argument("--graph", required=True)
    sp.add_argument("--name")
    sp.add_argument("--graphon", required=True)
    sp.add_argument("--m", type=int, default=DEFAULTS["oprod_m"])
    common(sp)
    sp.set_defaults(func=cmd_adjoint)

    sp = sub.add_parser("selftest", help="run the acceptance suite")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.workers:
        os.environ["GRAPHONLAB_THREADS"] = str(args.workers)
    try:
        return args.func(args)
    except (UsageError, ParseError, GraphError, GraphonError, crmod.CRError, OSError, ValueError) as e:
        print(f"graphonlab {args.cmd}: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
