"""Command-line front end: ``analyze``, ``rectangle``, ``maxcut``, ``generate``.

Every command writes a JSON run report (``--report``, default stdout) and
exits 0 on success. Errors print ``error[CODE]: message`` to stderr and exit
with the code from ``EXIT_CODES``; argparse usage errors exit 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import gamma2, generators, graphs, linalg, maxcut, rectangle
from .core import BooleanMatrix, resolve_budget
from .errors import (
    ContractError,
    FormatError,
    InvariantViolation,
    LimitError,
    NumericalError,
    PartialResultError,
)
from .io import atomic_write_text, corpus_dir, read_graph, read_matrix, resolve_input, write_graph, write_matrix
from .report import RunReport, now, to_plain

log = logging.getLogger("factornorm")

# most specific class first: LimitError is a ContractError
EXIT_CODES = [
    (FormatError, 3, "format"),
    (LimitError, 5, "limit"),
    (ContractError, 4, "contract"),
    (NumericalError, 6, "numerical"),
    (InvariantViolation, 7, "invariant"),
    (PartialResultError, 8, "partial"),
]
EXIT_INTERNAL = 1


def exit_code_for(exc: BaseException) -> tuple[int, str]:
    for cls, code, name in EXIT_CODES:
        if isinstance(exc, cls):
            return code, name
    return EXIT_INTERNAL, "internal"


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_analyze(args) -> RunReport:
    M = read_matrix(args.matrix)
    if not isinstance(M, BooleanMatrix):
        raise ContractError("analyze expects a Boolean matrix file")
    budget = resolve_budget(args.budget)
    m, n = M.shape
    metrics: dict = {"shape": [m, n], "ones": M.ones_total, "density": M.density if M.rows and M.cols else 0.0}
    if m and n:
        tn = linalg.trace_norm(M.to_float())
        metrics.update(trace_norm=tn, normalized_trace_norm=tn / math.sqrt(m * n))
    if M.is_zero():
        metrics["gamma2"] = {"lower": 0.0, "upper": 0.0, "lower_method": "zero", "upper_method": "zero"}
    else:
        br = gamma2.gamma2_bracket(M, budget=budget, seed=args.seed)
        metrics["gamma2"] = {
            "lower": br.lower,
            "upper": br.upper,
            "lower_method": br.lower_method,
            "upper_method": br.upper_method,
            "candidates": {side: {k: _finite(v) for k, v in d.items()} for side, d in br.candidates.items()},
        }
    deg = graphs.degeneracy_order(M)
    c4, wit = graphs.is_c4_free(M)
    metrics.update(degeneracy=deg.degeneracy, c4_free=c4, c4_witness=wit)
    if c4 and not M.is_zero():
        metrics["c4_lower_certificate"] = graphs.c4_lower_certificate(M)
    return RunReport("analyze", {"matrix": str(args.matrix), "budget": budget.name}, args.seed, metrics=metrics)


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".params.json")


def cmd_rectangle(args) -> RunReport:
    src = resolve_input(args.matrix)
    M = read_matrix(src)
    budget = resolve_budget(args.budget)
    trace: dict = {}
    if isinstance(M, BooleanMatrix):
        if args.color == "auto":
            sel, color = rectangle.find_mono_rectangle(M, budget=budget, seed=args.seed, trace=trace)
        else:
            color = int(args.color)
            target = M if color == 0 else M.complement()
            if target.density > 0.5:
                raise ContractError(f"color {color} requested but its complement has density {target.density:.3f} > 1/2")
            sel = rectangle.find_all_zeros_rectangle(target, budget=budget, seed=args.seed, trace=trace)
        verified = sel.is_constant(M, bool(color))
        value = color
    else:
        if args.color != "auto":
            raise ContractError("--color applies to Boolean matrices only")
        sel, value = rectangle.constant_submatrix_integer(M, budget=budget, seed=args.seed, trace=trace)
        verified = sel.is_constant(M, value)
    out = Path(args.out) if args.out else src.with_name(src.name + ".selection.json")
    payload = {"rows": list(sel.rows), "cols": list(sel.cols), "value": value, "verified": verified,
               "parent_shape": list(sel.parent_shape)}
    atomic_write_text(out, json.dumps(to_plain(payload), sort_keys=True, indent=2) + "\n")
    metrics = {"shape": list(sel.shape), "side": sel.side, "value": value, "verified": verified,
               "source": trace.get("source"), "chain": trace.get("chain")}
    side_car = _sidecar(src)
    if side_car.exists():
        meta = json.loads(side_car.read_text())
        ell = meta.get("parameters", {}).get("ell")
        if ell:
            n = min(np.asarray(M.shape if isinstance(M, BooleanMatrix) else np.shape(M)))
            env = 8 * 2.0 ** -int(ell)
            metrics["envelope"] = {"ell": ell, "side_ratio": sel.side / n, "zeros_envelope_ratio": env}
            log.info("side ratio %.4f against 8*2^-%d = %.4f", sel.side / n, ell, env)
    if not verified:
        raise InvariantViolation("selection failed verification")
    return RunReport("rectangle", {"matrix": str(args.matrix), "budget": budget.name, "color": args.color},
                     args.seed, metrics=metrics, artifacts={"selection": str(out)})


def cmd_maxcut(args) -> RunReport:
    G = read_graph(args.graph)
    budget = resolve_budget(args.budget)
    trials = args.trials or budget.rounding_trials
    metrics: dict = {"n": G.n, "m": G.m, "edwards_bound": maxcut.edwards_bound(G.m), "energy": maxcut.graph_energy(G)}
    if args.mode == "exact":
        cut = maxcut.maxcut_exact(G)
    elif args.mode == "local":
        cut = maxcut.maxcut_local_search(G, restarts=args.trials or budget.local_restarts, seed=args.seed)
    else:
        H, keep = G.without_isolated()
        emb = maxcut.spectral_embedding(H)
        rr = maxcut.hyperplane_round_surplus(emb, H, trials=trials, seed=args.seed)
        side = np.zeros(G.n, dtype=bool)
        side[keep] = rr.cut.partition
        cut = maxcut.CutReport.of(G, side, "spectral", trials)
        metrics.update(closed_form_expectation=rr.closed_form_expectation, mean_cut=rr.mean_cut,
                       std_cut=rr.std_cut, trials=trials)
    metrics.update(cut=cut.cut_size, surplus=cut.surplus, method=cut.method, partition=cut.partition.astype(int))
    if args.clique:
        clique, rep = maxcut.inverse_maxcut_clique(G, budget=budget, seed=args.seed)
        metrics["clique"] = {"vertices": clique, "size": len(clique),
                             "stages": {k: v for k, v in rep.items() if not isinstance(v, float) or math.isfinite(v)}}
    return RunReport("maxcut", {"graph": str(args.graph), "mode": args.mode, "trials": trials, "budget": budget.name,
                                "clique": bool(args.clique)}, args.seed, metrics=metrics)


def _gen_kind(args):
    """Instance and the parameters needed to rebuild it."""
    kind = args.kind
    if kind == "tight":
        params = {"ell": args.ell, "k": args.k}
        ex = generators.tight_example(generators.ConstructionParams(args.ell, args.k, args.seed))
        diag = {f: getattr(ex.params, f) for f in ("p", "X", "Y", "Y_prime", "n", "attempt", "zeros_envelope")}
        return ex.matrix, params, {**diag, "certified_upper": ex.factorization.product_norm}, ex
    if kind == "point-line":
        params = {"q": args.q, "p": args.p, "modular": not args.plain}
        return generators.gen_point_line(generators.PointLineParams(args.q, args.p, not args.plain)), params, {}, None
    if kind == "random":
        params = {"m": args.m, "n": args.n, "density": args.density}
        return generators.gen_random_boolean(args.m, args.n, args.density, args.seed), params, {}, None
    sizes = [int(s) if "x" not in s else tuple(int(t) for t in s.split("x")) for s in args.sizes]
    params = {"sizes": [list(s) if isinstance(s, tuple) else s for s in sizes]}
    kind_name = kind.replace("-", "_")
    arg = sizes if kind_name in ("disjoint_cliques", "bipartite_complete", "permutation_blowup") else sizes[:1]
    return generators.gen_structured(kind_name, arg, args.seed), params, {}, None


def cmd_generate(args) -> RunReport:
    if args.from_params:
        meta = json.loads(Path(args.from_params).read_text())
        for k, v in meta["parameters"].items():
            if k == "modular":
                args.plain = not v
            elif k == "sizes":
                args.sizes = [str(s) if isinstance(s, int) else "x".join(map(str, s)) for s in v]
            else:
                setattr(args, k, v)
        args.kind = meta["parameters"].get("kind", args.kind)
        args.seed = meta.get("seed", args.seed)
    if args.kind is None:
        raise ContractError("generate needs a kind")
    obj, params, diag, extra = _gen_kind(args)
    params = {"kind": args.kind, **params}
    ext = ".graph" if isinstance(obj, graphs.Graph) else ".mat"
    default_dir = corpus_dir() or Path(".")
    out = Path(args.out) if args.out else default_dir / f"{args.kind}-{args.seed}{ext}"
    artifacts = {"output": str(out)}
    if ext == ".graph":
        write_graph(out, obj)
        metrics = {"n": obj.n, "m": obj.m}
    else:
        write_matrix(out, obj)
        metrics = {"shape": list(obj.shape), "ones": obj.ones_total}
    if extra is not None:
        fu, fv = out.with_name(out.name + ".U"), out.with_name(out.name + ".V")
        write_matrix(fu, extra.factorization.U, "real")
        write_matrix(fv, extra.factorization.V, "real")
        artifacts.update(U=str(fu), V=str(fv))
    metrics.update(diag)
    side = _sidecar(out)
    atomic_write_text(side, json.dumps({"parameters": params, "seed": args.seed}, sort_keys=True, indent=2) + "\n")
    artifacts["params"] = str(side)
    return RunReport("generate", params, args.seed, metrics=metrics, artifacts=artifacts)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--budget", choices=["fast", "default", "thorough"], default="default")
    common.add_argument("--report", help="write the JSON run report here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="factornorm", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="gamma_2 bracket, density, degeneracy, C4 status")
    a.add_argument("matrix")
    a.set_defaults(func=cmd_analyze)

    r = sub.add_parser("rectangle", parents=[common], help="monochromatic or constant submatrix")
    r.add_argument("matrix")
    r.add_argument("--color", choices=["auto", "0", "1"], default="auto")
    r.add_argument("--out", help="selection file (default: <matrix>.selection.json)")
    r.set_defaults(func=cmd_rectangle)

    m = sub.add_parser("maxcut", parents=[common], help="cut, surplus, rounding, inverse clique")
    m.add_argument("graph")
    m.add_argument("--mode", choices=["exact", "local", "spectral"], default="exact")
    m.add_argument("--trials", type=int, default=None)
    m.add_argument("--clique", action="store_true", help="also run the inverse-MaxCut clique pipeline")
    m.set_defaults(func=cmd_maxcut)

    g = sub.add_parser("generate", parents=[common], help="write a generated instance and its params sidecar")
    g.add_argument("kind", nargs="?", choices=["tight", "point-line", "random", "complete", "odd-clique",
                                               "disjoint-cliques", "bipartite-complete", "permutation-blowup"])
    g.add_argument("--out")
    g.add_argument("--from-params", help="regenerate from a params sidecar")
    g.add_argument("--ell", type=int, default=3)
    g.add_argument("--k", type=int, default=100)
    g.add_argument("--q", type=int, default=3)
    g.add_argument("--p", type=int, default=5)
    g.add_argument("--plain", action="store_true", help="point-line without the modulus")
    g.add_argument("--m", type=int, default=16)
    g.add_argument("--n", type=int, default=16)
    g.add_argument("--density", type=float, default=0.5)
    g.add_argument("--sizes", nargs="+", default=["5"], help="sizes; blow-up blocks may be RxC")
    g.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    started = now()
    try:
        report = args.func(args)
    except Exception as exc:  # noqa: BLE001 - mapped to exit codes
        code, name = exit_code_for(exc)
        print(f"error[{name}]: {exc}", file=sys.stderr)
        if code == EXIT_INTERNAL and args.verbose:
            raise
        return code
    report.timestamps = {"started": started, "finished": now()}
    text = report.to_json()
    if args.report:
        atomic_write_text(args.report, text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
