"""Command line interface: ``pfreal {solve,eliminant,monodromy,survey,bound}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .classify import records, solutions_csv, solutions_json, split_real
from .eliminant import eliminant_analysis
from .errors import NonGenericCoordinateError, PrecisionError, StructuralError
from .pf_model import PV, PowerSystemError, bezout_bound, build_system, complex_bound, load_system
from .tracker import HomotopyConfig, solve_all

EXIT_OK, EXIT_STRUCTURAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _load(path: str):
    try:
        return load_system(path)
    except FileNotFoundError as err:
        raise UsageError(f"cannot read {path}: {err.strerror}") from err
    except json.JSONDecodeError as err:
        raise UsageError(f"{path}: malformed JSON ({err})") from err
    except (PowerSystemError, KeyError, TypeError, ValueError) as err:
        raise UsageError(f"{path}: invalid system ({err})") from err


def cmd_solve(args) -> int:
    ps = _load(args.system)
    ss = solve_all(build_system(ps), HomotopyConfig(seed=args.seed))
    if ss.failed_count:
        raise StructuralError(f"{ss.failed_count} paths failed after retry")
    recs = records(ss, ps)
    if args.format == "csv":
        sys.stdout.write(solutions_csv(recs, ps))
    else:
        real, _ = split_real(ss.solutions)
        extra = {
            "n_complex": len(ss.solutions),
            "n_real": len(real),
            "n_trivial": sum(r.is_trivial for r in recs),
            "paths": {"total": ss.total_paths, "finite": ss.finite_paths, "diverged": ss.diverged_count, "failed": ss.failed_count},
        }
        sys.stdout.write(solutions_json(recs, ps, extra) + "\n")
    return EXIT_OK


def cmd_eliminant(args) -> int:
    ps = _load(args.system)
    if not ps.is_lossless() or any(b.p != 0 for b in ps.others) or any(b.kind != PV for b in ps.others):
        raise UsageError("the eliminant needs a lossless zero-injection network of PV buses")
    ss = solve_all(build_system(ps), HomotopyConfig(seed=args.seed))
    if ss.failed_count:
        raise StructuralError(f"{ss.failed_count} paths failed after retry")
    res = eliminant_analysis(ss, vm=[b.vm for b in ps.others])
    names = ps.variable_names()
    print(f"eliminant in {names[res.coord_index]}^2:")
    print("  " + res.eliminant.format(4))
    c = res.counts
    print(f"descartes sign changes: {c.descartes_max}")
    print(f"sturm positive roots:   {c.sturm_positive}")
    print(f"sturm negative roots:   {c.sturm_negative}")
    print(f"real solutions: {res.n_trivial} trivial + 2*{c.sturm_positive} = {res.n_real} (direct count {res.n_direct})")
    if res.n_real != res.n_direct:
        raise StructuralError(f"eliminant count {res.n_real} disagrees with direct count {res.n_direct}")
    return EXIT_OK


def cmd_monodromy(args) -> int:
    from .monodromy import generate_group

    ps = _load(args.system)
    g = generate_group(ps, HomotopyConfig(seed=args.seed), budget=args.budget, seed=args.seed, slice=args.slice)
    print(json.dumps(g.report()))
    return EXIT_OK


def cmd_survey(args) -> int:
    from .survey import SurveyConfig, run_survey

    cfg = SurveyConfig(n_instances=args.n, sigma=args.sigma, mean=args.mean, seed=args.seed, out=args.out, workers=args.workers)
    res = run_survey(cfg)
    print(json.dumps(res.summary()["histogram"]))
    print(f"failures: {res.failures}, max real: {res.max_real}")
    return EXIT_OK


def cmd_bound(args) -> int:
    print(complex_bound(args.n))
    print(f"bezout: {bezout_bound(args.n)}")
    return EXIT_OK


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfreal", description="All complex solutions of small power-flow systems.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a network and print the solution table")
    s.add_argument("--system", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--format", choices=("json", "csv"), default="json")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("eliminant", help="univariate eliminant and real-root counts")
    s.add_argument("--system", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_eliminant)

    s = sub.add_parser("monodromy", help="monodromy group by random loops")
    s.add_argument("--system", required=True)
    s.add_argument("--budget", type=_positive_int, default=25)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--slice", choices=("zero-injection", "full"), default="zero-injection")
    s.set_defaults(func=cmd_monodromy)

    s = sub.add_parser("survey", help="random four-bus survey")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--sigma", type=float, default=8.0)
    s.add_argument("--mean", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default="results.csv")
    s.add_argument("--workers", type=_positive_int, default=None)
    s.set_defaults(func=cmd_survey)

    s = sub.add_parser("bound", help="complex-solution and Bezout bounds")
    s.add_argument("--n", type=_positive_int, required=True)
    s.set_defaults(func=cmd_bound)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as err:
        print(f"pfreal: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (StructuralError, NonGenericCoordinateError, PrecisionError) as err:
        print(f"pfreal: structural error: {err}", file=sys.stderr)
        return EXIT_STRUCTURAL
    except ValueError as err:
        print(f"pfreal: error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
