"""Command line front end: ``python -m lssd <command> ...`` from ``backend/``."""

import argparse
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from typing import List, Optional

from .certificate import DEFAULT_GRID_POINTS, T_STAR, build_report, certify_upper_bound
from .classical import (
    example1_pc,
    example1_product_value,
    example1_product_strategy,
    pc_bruteforce,
    strategy_value,
)
from .config import Settings, configure_logging
from .core_model import (
    alpha_threshold,
    example2_state,
    format_rational,
    load_game,
    noisy_bit_game,
    parse_rational,
    product_game,
    theorem1_game,
)
from .errors import BudgetExceededError, CertificateInvalidError, LssdError, ParseError, ValidationError
from .hypergraph import (
    fractional_matching,
    load_hypergraph,
    max_matching,
    verify_theorem3,
)
from .nosignaling import build_ns_lp, dump_box, load_box, pns_binary_inputs, pns_exact, save_box, validate_box
from .quantum import dump_strategy, eval_strategy, optimal_state, optimize_qubit, paper_strategy
from .seesaw import cqq_seesaw
from .simplex import dump_lp

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_BUDGET = 3

EXAMPLE2_TARGET = Fraction(9, 16)


def _float(value: float) -> str:
    return f"{value:.12g}"


def _status(ok: bool) -> str:
    return "PASS" if ok else "FAIL"


def _print_json(data) -> None:
    print(json.dumps(data, indent=2))


def cmd_pc(args, settings: Settings) -> int:
    dist = load_game(args.game)
    value, strat = pc_bruteforce(dist, budget=settings.bruteforce_budget,
                                 threads=settings.resolve_threads(args.threads))
    if args.json:
        _print_json({"value": format_rational(value), "strategy": [list(t) for t in strat.tables]})
    else:
        print(format_rational(value))
        for i, table in enumerate(strat.tables, start=1):
            print(f"f_{i}: " + " ".join(str(x) for x in table))
    return EXIT_OK


def cmd_pns(args, settings: Settings) -> int:
    dist = load_game(args.game)
    if args.dump_lp:
        with open(args.dump_lp, "w", encoding="utf-8") as handle:
            handle.write(dump_lp(build_ns_lp(dist, reduced=not args.full)))
    value, box = pns_exact(dist, reduced=not args.full)
    if args.dump_box:
        save_box(box, args.dump_box)
    if args.json:
        _print_json({"value": format_rational(value), "box": dump_box(box)})
    else:
        print(format_rational(value))
        print(dump_box(box), end="")
    return EXIT_OK


def cmd_validate_box(args, settings: Settings) -> int:
    box = load_box(args.box)
    try:
        validate_box(box)
    except ValidationError as exc:
        print(f"invalid: {exc}")
        return EXIT_CHECK_FAILED
    print("valid")
    return EXIT_OK


def cmd_pq_lower(args, settings: Settings) -> int:
    dist = load_game(args.game)
    if args.paper_strategy:
        strat = paper_strategy()
        value = eval_strategy(dist, strat)
        strat = replace(strat, state=optimal_state(dist, strat))
    else:
        seed = settings.seed if args.seed is None else args.seed
        value, strat = optimize_qubit(dist, seeds=args.seeds, budget=args.budget, seed=seed,
                                      threads=settings.resolve_threads(args.threads))
    print(_float(value))
    print(dump_strategy(strat, value))
    return EXIT_OK


def cmd_verify_sos(args, settings: Settings) -> int:
    report = build_report(grid_points=args.grid or None)
    data = report.to_dict()
    if args.json:
        _print_json(data)
    else:
        print(f"identity_ok: {report.identity_ok}")
        for name, ok in report.psd_ok.items():
            print(f"psd_ok[{name}]: {ok}  pivots: {', '.join(report.pivots[name])}")
        print(f"lambda: {report.lambda_value}")
        if report.grid_max_eigenvalue is not None:
            print(f"grid_max_eigenvalue: {_float(report.grid_max_eigenvalue)}  grid_ok: {report.grid_ok}")
        if report.mismatch:
            print(f"mismatch: {report.mismatch}")
        print(f"valid: {report.valid}")
    return EXIT_OK if report.valid else EXIT_CHECK_FAILED


def cmd_theorem1(args, settings: Settings) -> int:
    dist = theorem1_game()
    pc, _ = pc_bruteforce(dist, budget=settings.bruteforce_budget)
    pns, _ = pns_exact(dist)
    pq = eval_strategy(dist, paper_strategy())
    try:
        certify_upper_bound()
        certified = True
    except CertificateInvalidError as exc:
        logger.error(f"Upper bound certificate rejected: {exc}")
        certified = False
    t_star = float(T_STAR)
    rows = [
        ("p_c", format_rational(pc), "2/5", pc == Fraction(2, 5)),
        ("p_q", _float(pq), str(T_STAR), abs(pq - t_star) <= 1e-9 and certified),
        ("p_ns", format_rational(pns), "1/2", pns == Fraction(1, 2)),
    ]
    ok = all(row[3] for row in rows) and pc < Fraction(pq) < pns
    if args.json:
        _print_json({
            name: {"value": value, "expected": expected, "pass": passed}
            for name, value, expected, passed in rows
        } | {"certificate_valid": certified, "pass": ok})
    else:
        for name, value, expected, passed in rows:
            print(f"{name:<5} {value:<20} expected {expected:<32} {_status(passed)}")
        print(f"separation p_c < p_q < p_ns: {_status(ok)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_example1(args, settings: Settings) -> int:
    alpha = parse_rational(args.alpha)
    dist = noisy_bit_game(alpha)
    pc, _ = pc_bruteforce(dist)
    closed = example1_pc(alpha)
    pns, _ = pns_exact(dist)
    formula = pns_binary_inputs(dist, max_d=settings.permutation_max_d).value
    print(f"p_c: {format_rational(pc)}")
    print(f"closed form: {format_rational(closed)}")
    print(f"p_ns: {format_rational(pns)}")
    print(f"permutation formula: {format_rational(formula)}")
    return EXIT_OK if pc == closed == pns == formula else EXIT_CHECK_FAILED


def cmd_example1_product(args, settings: Settings) -> int:
    alpha = alpha_threshold(args.denominator or settings.alpha_denominator)
    single, _ = pc_bruteforce(noisy_bit_game(alpha))
    product = product_game(noisy_bit_game(alpha), noisy_bit_game(alpha))
    pc_product, _ = pc_bruteforce(product, budget=settings.bruteforce_budget,
                                  threads=settings.resolve_threads(args.threads))
    strategy = strategy_value(product, example1_product_strategy())
    ok = pc_product > single * single and strategy == example1_product_value(alpha)
    print(f"alpha: {format_rational(alpha)}")
    print(f"single p_c: {format_rational(single)} ({_float(float(single))})")
    print(f"single p_c squared: {_float(float(single * single))}")
    print(f"product strategy value: {_float(float(strategy))}")
    print(f"product p_c: {_float(float(pc_product))}")
    print(f"superadditive: {_status(ok)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_example2(args, settings: Settings) -> int:
    seed = settings.seed if args.seed is None else args.seed
    value, _, _ = cqq_seesaw(example2_state(), restarts=args.restarts, iters=args.iters, seed=seed,
                             threads=settings.resolve_threads(args.threads))
    ok = value >= float(EXAMPLE2_TARGET) - 1e-4
    print(f"see-saw value: {_float(value)}")
    print(f"at least 9/16 - 1e-4: {_status(ok)}")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_hypergraph(args, settings: Settings) -> int:
    g = load_hypergraph(args.hypergraph)
    if args.verify:
        report = verify_theorem3(g, budget=settings.bruteforce_budget, max_edges=settings.matching_max_edges,
                                 threads=settings.resolve_threads(args.threads))
        if args.json:
            _print_json(report.to_dict())
        else:
            print(f"nu: {report.nu}")
            print(f"nu_f: {format_rational(report.nu_fractional)}")
            print(f"p_c: {format_rational(report.pc)}")
            print(f"p_ns: {format_rational(report.pns)}")
            for name, passed in report.checks.items():
                print(f"{name}: {_status(passed)}")
        return EXIT_OK if report.passed else EXIT_CHECK_FAILED
    nu, witness = max_matching(g, settings.matching_max_edges)
    print(f"nu: {nu}")
    print("matching: " + " ".join(str(i) for i in witness))
    print(f"nu_f: {format_rational(fractional_matching(g))}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lssd", description="Simultaneous state discrimination solvers")
    parser.add_argument("--threads", type=int, default=None, help="worker threads (LSSD_THREADS wins)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pc", help="exact classical value")
    p.add_argument("game")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_pc)

    p = sub.add_parser("pns", help="exact no-signaling value")
    p.add_argument("game")
    p.add_argument("--dump-box")
    p.add_argument("--dump-lp")
    p.add_argument("--full", action="store_true", help="solve the unreduced LP")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_pns)

    p = sub.add_parser("validate-box", help="check a box file for no-signaling")
    p.add_argument("box")
    p.set_defaults(handler=cmd_validate_box)

    p = sub.add_parser("pq-lower", help="qubit lower bound on the entangled value")
    p.add_argument("game")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--budget", type=int, default=4000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--paper-strategy", action="store_true")
    p.set_defaults(handler=cmd_pq_lower)

    p = sub.add_parser("verify-sos", help="exact check of the upper-bound certificate")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID_POINTS,
                   help="scan an N x N grid of (a, b) against t*; 0 skips the scan")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_verify_sos)

    p = sub.add_parser("theorem1", help="classical, quantum and no-signaling separation")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_theorem1)

    p = sub.add_parser("example1", help="noisy bit game at a rational alpha")
    p.add_argument("--alpha", required=True)
    p.set_defaults(handler=cmd_example1)

    p = sub.add_parser("example1-product", help="two copies of the noisy bit game at alpha ~ 1 - 1/sqrt(2)")
    p.add_argument("--denominator", type=int, default=None)
    p.set_defaults(handler=cmd_example1_product)

    p = sub.add_parser("example2", help="see-saw on the cloning-attack state")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--iters", type=int, default=100)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(handler=cmd_example2)

    p = sub.add_parser("hypergraph", help="matching numbers of a hypergraph game")
    p.add_argument("hypergraph")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(handler=cmd_hypergraph)
    return parser


def main(argv: Optional[List[str]] = None, settings: Optional[Settings] = None) -> int:
    args = build_parser().parse_args(argv)
    if settings is None:
        settings = Settings.from_env()
        configure_logging(settings)
    try:
        return args.handler(args, settings)
    except ParseError as exc:
        logger.error(f"Parse error: {exc}")
        return EXIT_PARSE_ERROR
    except BudgetExceededError as exc:
        logger.error(f"Budget exceeded: {exc}")
        print(f"budget exceeded: {exc.required} required, budget {exc.budget}")
        return EXIT_BUDGET
    except (ValidationError, OSError) as exc:
        logger.error(f"Invalid input: {exc}")
        return EXIT_PARSE_ERROR
    except LssdError as exc:
        logger.error(f"Check failed: {exc}")
        return EXIT_CHECK_FAILED


if __name__ == "__main__":
    sys.exit(main())
