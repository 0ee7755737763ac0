"""Command-line interface: ``syzlab betti | jets | sweep | mh1 | validate | regularity | duality``.

Exit codes: 0 success, 1 invalid input, 2 size budget exceeded.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from .exact_linalg import FieldSpec
from .jets import STRATEGIES, CycleError, check_cycle, parse_cycle, search_violating_cycle
from .kernel_criterion import HypothesisNotAsserted, summand_implication_check, tensor_m_h1
from .koszul import DEFAULT_BUDGET, FORMAT_VERSION, SizeBudgetExceeded, betti_table
from .asymptotics_lab import SweepSpec, canonical_duality_check, regularity_scan, run_sweep
from .sections import (EllipticSystem, FileSystemAlgebra, FormatError, GradedSectionSystem,
                       ProjLineSystem, SectionsError, ToricSystem, parse_points, simplex,
                       validate_system)

CACHE_ENV = "SYZLAB_CACHE"
EXIT_OK, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


class DiskCache:
    """Ranks and dimensions keyed by the sha256 of a canonical JSON key."""

    def __init__(self, root: os.PathLike):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, key: str) -> Path:
        digest = hashlib.sha256(f"v{FORMAT_VERSION}:{key}".encode()).hexdigest()
        return self.root / f"{digest}.json"

    def get(self, key: str) -> Optional[dict]:
        path = self._path(key)
        try:
            hit = json.loads(path.read_text())
        except (OSError, ValueError):
            return None
        return hit.get("value") if hit.get("key") == key else None

    def put(self, key: str, value: dict) -> None:
        path = self._path(key)
        tmp = path.with_suffix(f".{os.getpid()}.tmp")
        tmp.write_text(json.dumps({"key": key, "value": value}, sort_keys=True))
        os.replace(tmp, path)


# ---------------------------------------------------------------------------
# argument plumbing


def _d_range(text: str) -> List[int]:
    try:
        lo, hi = (int(x) for x in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo..hi, got {text!r}") from None
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _add_system_args(p: argparse.ArgumentParser, needs_d: bool = True) -> None:
    g = p.add_argument_group("system")
    g.add_argument("--system", choices=("projline", "elliptic", "toric", "file"), default="projline")
    g.add_argument("--b", type=int, default=0, help="degree of B (projline, elliptic)")
    g.add_argument("--d", type=int, default=None,
                   help="degree of L" + ("" if needs_d else " (default 1; B alone matters here)"))
    g.add_argument("--A", type=_rational, default=Fraction(0), help="elliptic: y^2 = x^3 + A x + Bw")
    g.add_argument("--Bw", type=_rational, default=Fraction(1), help="elliptic constant term")
    g.add_argument("--pb", default=None, help="toric P_B lattice points, e.g. '0,0'")
    g.add_argument("--pa", default=None, help="toric P_A lattice points (default: standard simplex)")
    g.add_argument("--pp", default=None, help="toric P_P lattice points (default: origin)")
    g.add_argument("--dim", type=int, default=2, help="toric dimension when --pa/--pb are omitted")
    g.add_argument("--path", default=None, help="structure-constant file for --system file")
    p.set_defaults(needs_d=needs_d)


def _add_run_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("run")
    g.add_argument("--field", default="auto", help="auto | rational | prime[:P] | multi:N")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("text", "json", "csv"), default="text")
    g.add_argument("--cache", default=os.environ.get(CACHE_ENV), help=f"rank cache directory (env {CACHE_ENV})")
    g.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    g.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="max matrix side / nonzeros")
    g.add_argument("--timings", action="store_true", help="include wall times in the output")


def _toric_points(text: Optional[str], default) -> list:
    return parse_points(text) if text else default


def make_system(args, d: Optional[int] = None) -> GradedSectionSystem:
    if d is None:
        d = args.d
    if d is None:
        if args.needs_d and args.system != "file":
            raise UsageError("--d is required")
        d = 1
    if args.system == "projline":
        return ProjLineSystem(args.b, d)
    if args.system == "elliptic":
        return EllipticSystem(args.A, args.Bw, args.b, d)
    if args.system == "toric":
        pa = _toric_points(args.pa, simplex(args.dim, 1))
        n = len(pa[0])
        pb = _toric_points(args.pb, [(0,) * n])
        pp = _toric_points(args.pp, None)
        return ToricSystem.from_family(pb, pa, d, pp)
    if not args.path:
        raise UsageError("--system file needs --path")
    return FileSystemAlgebra.load(args.path)


def _field(args) -> FieldSpec:
    try:
        return FieldSpec.parse(args.field, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, payload: Dict[str, Any], text: str) -> None:
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")
    elif args.format == "csv":
        rows = payload.get("csv")
        sys.stdout.write(rows if rows is not None else text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_betti(args) -> int:
    s = make_system(args)
    f = _field(args)
    cache = DiskCache(args.cache) if args.cache else None
    bt = betti_table(s, args.pmax, args.qmax, f, jobs=args.jobs, budget=args.budget, cache=cache)
    if args.format == "json":
        sys.stdout.write(bt.to_json(args.timings))
    elif args.format == "csv":
        sys.stdout.write(bt.to_csv())
    else:
        sys.stdout.write(f"# {json.dumps(s.descriptor(), sort_keys=True)} field={f.describe()}\n")
        sys.stdout.write(bt.to_text())
        for (p, q), err in sorted(bt.errors.items()):
            sys.stdout.write(f"# K_{p},{q}: {err}\n")
        if args.timings:
            for (p, q), c in sorted(bt.cells.items()):
                sys.stdout.write(f"# K_{p},{q}: {c.seconds:.3f}s\n")
    if any("SizeBudgetExceeded" in e for e in bt.errors.values()):
        return EXIT_BUDGET
    return EXIT_INPUT if bt.errors else EXIT_OK


def cmd_jets_check(args) -> int:
    s = make_system(args)
    f = _field(args)
    cycle = parse_cycle(s, args.cycle)
    chk = check_cycle(s, cycle, f)
    verdict = "OK" if chk.independent else "FAILS"
    payload = {"kind": "jets_check", "system": s.descriptor(), "cycle": cycle.format(s),
               "rank": chk.rank, "target_dim": chk.target_dim, "verdict": verdict,
               "certified": chk.certified, "field": f.describe()}
    text = (f"cycle {cycle.format(s)}: rank {chk.rank} of {chk.target_dim}, {verdict}"
            f" ({'certified' if chk.certified else 'not certified'}, field {f.describe()})\n")
    _emit(args, payload, text)
    return EXIT_OK


def cmd_jets_search(args) -> int:
    s = make_system(args)
    res = search_violating_cycle(s, args.p, budget=args.trials, strategy=args.strategy,
                                 seed=args.seed, box=args.box, f=FieldSpec.rational())
    payload = {"kind": "jets_search", "system": s.descriptor(), **res.to_dict(s)}
    lines = [f"p={res.p} seed={res.seed} strategy={res.strategy} method={res.method} trials={res.trials}",
             f"verdict: {res.verdict} ({'certified' if res.certified else 'not certified'})"]
    if res.cycle is not None:
        lines.append(f"violating cycle: {res.cycle.format(s)}"
                     + (f" (rank {res.rank} of {res.target_dim})" if res.rank is not None else ""))
    if res.note:
        lines.append(f"note: {res.note}")
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK


def cmd_sweep(args) -> int:
    params: Dict[str, Any] = {}
    if args.system in ("projline", "elliptic"):
        params["b"] = args.b
    if args.system == "elliptic":
        params["A"] = args.A
        params["B"] = args.Bw
    if args.system == "toric":
        pa = _toric_points(args.pa, simplex(args.dim, 1))
        n = len(pa[0])
        params["pa"] = [list(u) for u in pa]
        params["pb"] = [list(u) for u in _toric_points(args.pb, [(0,) * n])]
        if args.pp:
            params["pp"] = [list(u) for u in parse_points(args.pp)]
    if args.system == "file":
        raise UsageError("sweeps need a family parameterized by d (projline, elliptic, toric)")
    quantities = tuple(q.strip() for q in args.quantities.split(",") if q.strip())
    try:
        spec = SweepSpec(args.system, args.p, tuple(args.d_range), params, _field(args), quantities,
                         args.seed, args.trials, args.budget)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rep = run_sweep(spec, jobs=args.jobs)
    payload = rep.to_dict(args.timings)
    if args.format == "csv":
        keys = ["d", "r_d", "kp1", "mh1"] + (["seconds"] if args.timings else [])
        rows = [",".join(keys)] + [",".join("" if r.get(k) is None else str(r[k]) for k in keys)
                                   for r in payload["records"]]
        payload = dict(payload, csv="\n".join(rows) + "\n")
        _emit(args, payload, "")
    else:
        _emit(args, payload, rep.to_text(args.timings))
    if any("SizeBudgetExceeded" in n for r in rep.records for n in r.notes):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_mh1(args) -> int:
    s = make_system(args)
    f = _field(args)
    if args.implication:
        rep = summand_implication_check(s, args.p, f, args.budget)
        payload = {"kind": "mh1", **rep.to_dict()}
        text = (f"h1((M_L)^(x{args.p + 1}) (x) B) = {rep.h1}\n"
                f"K_{args.p},1 = {rep.k_p1}\nimplication: {rep.verdict}\n")
        if "caveat" in payload:
            text += f"caveat: {payload['caveat']}\n"
    else:
        h1 = tensor_m_h1(s, args.p, f, args.budget)
        payload = {"kind": "mh1", "system": s.descriptor(), "p": args.p, "tensor_m_h1": h1,
                   "field": f.describe(), "hypothesis": s.hypothesis_source}
        text = f"{h1}\n"
    _emit(args, payload, text)
    return EXIT_OK


def cmd_validate(args) -> int:
    s = make_system(args)
    rep = validate_system(s, max_triples=args.max_triples, seed=args.seed)
    payload = {"kind": "validate", **rep.to_dict()}
    lines = [f"checked {rep.checked_triples} triples" + (" (sampled)" if rep.sampled else "")]
    lines += [f"violation: {v}" for v in rep.violations]
    lines.append("OK" if rep.ok else "INVALID")
    _emit(args, payload, "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_INPUT


def cmd_regularity(args) -> int:
    s = make_system(args)
    rep = regularity_scan(s, args.pmax, _field(args), args.budget, jobs=args.jobs)
    lines = [f"h0(B) = {rep.h0_b}; rows q = 0..{rep.q_max}, p = 0..{rep.p_max}"]
    lines += [f"deviation: {d}" for d in rep.deviations]
    lines.append("OK" if rep.ok else "DEVIATIONS FOUND")
    _emit(args, rep.to_dict(), "\n".join(lines) + "\n")
    if any("SizeBudgetExceeded" in d for d in rep.deviations):
        return EXIT_BUDGET
    return EXIT_OK


def cmd_duality(args) -> int:
    s = make_system(args, d=args.d_range[0])
    rep = canonical_duality_check(s, args.p, args.d_range, _field(args))
    lines = [f"{'d':>4} {'r_d':>5} {'K_p1(K_X)':>10} {'K_dual':>8}"]
    for r in rep.rows:
        lines.append(f"{r['d']:>4} {r['r_d']:>5} {r['with_canonical']:>10} {r['dual']:>8}"
                     + ("" if r["equal"] else "  MISMATCH"))
    lines.append("OK" if rep.ok else "MISMATCH")
    _emit(args, rep.to_dict(), "\n".join(lines) + "\n")
    return EXIT_OK if rep.ok else EXIT_INPUT


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="syzlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("betti", help="Betti table of K_{p,q}(X, B; L)")
    _add_system_args(p)
    _add_run_args(p)
    p.add_argument("--pmax", type=int, default=3)
    p.add_argument("--qmax", type=int, default=2)
    p.set_defaults(func=cmd_betti)

    jets = sub.add_parser("jets", help="jet conditions imposed by zero-cycles on H^0(B)")
    jsub = jets.add_subparsers(dest="jets_command", required=True, parser_class=_Parser)
    p = jsub.add_parser("check", help="rank of the jet map on an explicit cycle")
    _add_system_args(p, needs_d=False)
    _add_run_args(p)
    p.add_argument("cycle", help="'point^mult + point^mult + ...'")
    p.set_defaults(func=cmd_jets_check)
    p = jsub.add_parser("search", help="look for a violating degree-(p+1) cycle")
    _add_system_args(p, needs_d=False)
    _add_run_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--strategy", choices=STRATEGIES, default="auto")
    p.add_argument("--box", type=int, default=5, help="coordinate box for random points")
    p.set_defaults(func=cmd_jets_search)

    p = sub.add_parser("sweep", help="K_{p,1} over a window of d against the jet prediction")
    _add_system_args(p, needs_d=False)
    _add_run_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d-range", type=_d_range, required=True, help="lo..hi")
    p.add_argument("--quantities", default="kp1,mh1,jets")
    p.add_argument("--trials", type=int, default=2000, help="jet search budget off curves")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("mh1", help="h^1 of (⊗^{p+1} M_L) ⊗ B")
    _add_system_args(p)
    _add_run_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--implication", action="store_true", help="also compute K_{p,1} and test the implication")
    p.set_defaults(func=cmd_mh1)

    p = sub.add_parser("validate", help="check a section system's structure constants")
    _add_system_args(p, needs_d=False)
    _add_run_args(p)
    p.add_argument("--max-triples", type=int, default=20_000)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("regularity", help="vanishing of rows q >= dim X + 2 and of row 0")
    _add_system_args(p)
    _add_run_args(p)
    p.add_argument("--pmax", type=int, default=4)
    p.set_defaults(func=cmd_regularity)

    p = sub.add_parser("duality", help="K_{p,1}(X, K_X; L_d) against K_{r_d-1-p,1}(X; L_d) on a curve")
    _add_system_args(p, needs_d=False)
    _add_run_args(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--d-range", type=_d_range, required=True, help="lo..hi")
    p.set_defaults(func=cmd_duality)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeBudgetExceeded as exc:
        print(f"syzlab: size budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"syzlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (CycleError, FormatError, HypothesisNotAsserted, SectionsError, ValueError, OSError) as exc:
        print(f"syzlab: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
