"""Command-line front end: solve, eval, check, compare, demo.

Output is machine-readable JSON by default (--pretty for a table).  Exit
codes: 0 success / expected polarity, 1 unexpected check polarity, 2 parse
or validation error, 3 equilibrium verification failure, 4 demo mismatch.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass

from . import analysis, fixtures, solver
from .graph import GameFormatError, GraphError, game_from_json
from .payoff import (
    ContractingBase,
    DEFAULT_EPS,
    DEFAULT_EPS_CMP,
    MultiDiscountedSpec,
    PayoffFormatError,
    from_multi_discounted,
    payoff_from_json,
)
from .randgen import sample_up_words, all_short_words
from .words import WordError, format_word, parse_word

EXIT_OK = 0
EXIT_POLARITY = 1
EXIT_PARSE = 2
EXIT_VERIFY = 3
EXIT_DEMO = 4


@dataclass
class RunConfig:
    eps: float = DEFAULT_EPS
    eps_cmp: float = DEFAULT_EPS_CMP
    seed: int = 0
    method: str = "vi"
    output: str | None = None

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.eps_cmp < self.eps:
            raise ValueError("eps-cmp must be at least eps")


def _config_from_args(args) -> RunConfig:
    seed = args.seed
    if seed is None:
        seed = int(os.environ.get("CONTPAY_SEED", "0"))
    return RunConfig(eps=args.eps, eps_cmp=args.eps_cmp, seed=seed,
                     method=getattr(args, "method", "vi"),
                     output=getattr(args, "output", None))


def _emit(obj: dict, config: RunConfig, pretty: bool) -> None:
    if pretty:
        text = json.dumps(obj, indent=2, sort_keys=False)
    else:
        text = json.dumps(obj, separators=(", ", ": "), sort_keys=False)
    if config.output:
        with open(config.output, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _load_payoff(path: str, alphabet=None):
    return payoff_from_json(_load_json(path), alphabet)


def _as_base(payoff) -> ContractingBase:
    if isinstance(payoff, MultiDiscountedSpec):
        return from_multi_discounted(payoff)
    return payoff


def cmd_solve(args) -> int:
    config = _config_from_args(args)
    try:
        game = game_from_json(_load_json(args.game))
        payoff = _load_payoff(args.payoff, game.alphabet)
    except (OSError, json.JSONDecodeError, GameFormatError, PayoffFormatError,
            GraphError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    base = _as_base(payoff)
    if config.method == "vi":
        eq = solver.solve_value_iteration(game, base, config.eps, config.eps_cmp)
    elif config.method == "si":
        eq = solver.strategy_improvement(game, base, "greedy", config.eps,
                                         config.eps_cmp, seed=config.seed)
    elif config.method == "rand":
        eq = solver.random_switch_solve(game, base, config.seed, config.eps,
                                        config.eps_cmp)
    else:
        print(f"error: unknown method {config.method!r}", file=sys.stderr)
        return EXIT_PARSE
    report = solver.verify_equilibrium(game, base, eq.sigma, eq.tau, 10.0 * config.eps)
    out = solver.equilibrium_to_json(game, base, eq)
    out["verified"] = report.passed
    out["verify_gap"] = report.gap
    _emit(out, config, args.pretty)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_eval(args) -> int:
    config = _config_from_args(args)
    try:
        payoff = _load_payoff(args.payoff)
        word = parse_word(args.word, payoff.alphabet)
    except (OSError, json.JSONDecodeError, PayoffFormatError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    value = payoff.eval_word(word)
    if args.pretty:
        _emit({"word": args.word, "value": value}, config, True)
    else:
        print(f"{value:.15g}")
    return EXIT_OK


def cmd_compare(args) -> int:
    """Order two words by the payoff on the pre-post-map scale."""
    config = _config_from_args(args)
    try:
        payoff = _load_payoff(args.payoff)
        w1 = parse_word(args.word1, payoff.alphabet)
        w2 = parse_word(args.word2, payoff.alphabet)
    except (OSError, json.JSONDecodeError, PayoffFormatError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    v1 = payoff.eval_raw(w1)
    v2 = payoff.eval_raw(w2)
    if abs(v1 - v2) <= config.eps_cmp:
        order = "="
    else:
        order = "<" if v1 < v2 else ">"
    _emit({"left": v1, "right": v2, "order": order,
           "eps_cmp": config.eps_cmp}, config, args.pretty)
    return EXIT_OK


def _check_report(which: str, payoff, args, config: RunConfig) -> dict:
    alphabet = payoff.alphabet
    prefixes = all_short_words(alphabet, args.max_prefix_len)
    words = sample_up_words(alphabet, args.max_prefix_len, args.max_cycle_len,
                            cap=args.max_words)
    tol = args.tol
    sample = {
        "max_prefix_len": args.max_prefix_len,
        "max_cycle_len": args.max_cycle_len,
        "prefixes": len(prefixes),
        "words": len(words),
    }
    tolerances = {"tol": tol, "eps_cmp": config.eps_cmp}
    witness = None
    if which == "prefix-monotone":
        pairs = [(words[i], words[j]) for i in range(len(words))
                 for j in range(i + 1, len(words))]
        sample["pairs"] = len(pairs)
        w = analysis.check_prefix_monotone(payoff, prefixes, pairs, tol)
        result = "witness" if w else "none"
        witness = w
    elif which == "shift-det":
        tolerances["tol_eq"] = tol
        tolerances["tol_gap"] = 10.0 * tol
        w = analysis.check_shift_deterministic(payoff, words, range(alphabet.size),
                                               tol, 10.0 * tol)
        result = "witness" if w else "none"
        witness = w
    elif which == "fairly-mixing":
        failures = []
        for u in prefixes:
            if not u:
                continue
            for alpha in words:
                if not analysis.check_fairly_mixing(payoff, u, alpha, tol):
                    failures.append((u, alpha))
        result = "pass" if not failures else "fail"
        sample["failures"] = len(failures)
    else:  # multi-discounted
        vals = [(abs(payoff.eval_word(a) - payoff.eval_word(b)), i, j)
                for i, a in enumerate(words) for j, b in enumerate(words) if i < j]
        gap, i, j = max(vals)
        anchors = (words[i], words[j])
        verdict = analysis.detect_multi_discounted(payoff, anchors, words, tol)
        result = verdict.kind
        witness = verdict.witness
        sample["anchor_gap"] = gap
    report = {
        "check": which.replace("-", "_"),
        "result": result,
        "witness": None,
        "sample": sample,
        "tolerances": tolerances,
    }
    if witness is not None:
        def show(w):
            if hasattr(w, "cycle"):
                return format_word(w, alphabet)
            from .words import format_letters
            return format_letters(w, alphabet)

        report["witness"] = {
            "kind": witness.kind,
            "words": [show(w) for w in witness.words],
            "values": list(witness.values),
            "margin": witness.margin,
        }
    return report


def cmd_check(args) -> int:
    config = _config_from_args(args)
    try:
        payoff = _load_payoff(args.payoff)
    except (OSError, json.JSONDecodeError, PayoffFormatError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    report = _check_report(args.which, payoff, args, config)
    _emit(report, config, args.pretty)
    if args.expect is not None and report["result"] != args.expect:
        return EXIT_POLARITY
    return EXIT_OK


def _demo_not_multi(config: RunConfig, pretty: bool) -> int:
    base = fixtures.non_multi_base()
    rows = []
    worst = 0.0
    for word, pinned in fixtures.non_multi_word_values():
        got = base.eval_word(word)
        worst = max(worst, abs(got - pinned))
        rows.append({"word": format_word(word, base.alphabet),
                     "expected": pinned, "computed": got})
    arena = fixtures.three_choice_arena()
    methods = {
        "vi": solver.solve_value_iteration(arena.graph, base, config.eps, config.eps_cmp),
        "si": solver.strategy_improvement(arena.graph, base, "greedy", config.eps,
                                          config.eps_cmp),
        "rand": solver.random_switch_solve(arena.graph, base, config.seed,
                                           config.eps, config.eps_cmp),
    }
    solve_rows = []
    go_left = dict(zip(arena.choice_nodes, arena.left_edges))
    all_left = True
    for name, eq in methods.items():
        vals = [eq.values[v] for v in arena.choice_nodes]
        worst = max(worst,
                    max(abs(a - b) for a, b in zip(vals, fixtures.THREE_CHOICE_VALUES)))
        picks = eq.sigma.as_dict()
        left = all(picks[v] == go_left[v] for v in arena.choice_nodes)
        all_left = all_left and left
        solve_rows.append({"method": name, "values": vals, "goes_left": left})
    verdict = analysis.detect_multi_discounted(
        base,
        (fixtures.non_multi_word_values()[0][0], fixtures.non_multi_word_values()[1][0]),
        [w for w, _ in fixtures.non_multi_word_values()],
        1e-6,
    )
    ok = worst <= 1e-9 and all_left and verdict.kind == "not_multi_discounted"
    _emit({"demo": "not-multi", "values": rows, "solves": solve_rows,
           "detector": verdict.kind, "max_error": worst, "ok": ok},
          config, pretty)
    return EXIT_OK if ok else EXIT_DEMO


def _demo_fig1(config: RunConfig, pretty: bool) -> int:
    from .graph import build_two_entry_choice_game

    payoff = fixtures.order_breaking_payoff()
    words = sample_up_words(payoff.alphabet, 1, 1)
    prefixes = all_short_words(payoff.alphabet, 1)
    pairs = [(words[i], words[j]) for i in range(len(words))
             for j in range(i + 1, len(words))]
    witness = analysis.check_prefix_monotone(payoff, prefixes, pairs, 1e-6)
    if witness is None:
        _emit({"demo": "fig1", "ok": False, "reason": "no witness found"},
              config, pretty)
        return EXIT_DEMO
    u, v, beta, gamma = witness.words
    arena = build_two_entry_choice_game(
        payoff.alphabet, beta.prefix, beta.cycle, gamma.prefix, gamma.cycle,
        entry_u=u, entry_v=v,
    )
    result = solver.brute_force_solve(arena.graph, payoff)
    per_entry = []
    for si in range(len(result.sigmas)):
        per_entry.append((result.sigma_values[si][arena.entry_a],
                          result.sigma_values[si][arena.entry_b]))
    best_a = max(p[0] for p in per_entry)
    best_b = max(p[1] for p in per_entry)
    uniform = any(a >= best_a - 1e-12 and b >= best_b - 1e-12 for a, b in per_entry)
    ok = not uniform
    _emit({
        "demo": "fig1",
        "witness": {
            "words": [format_word(w, payoff.alphabet) if hasattr(w, "cycle")
                      else "".join(payoff.alphabet.name(x) for x in w)
                      for w in witness.words],
            "values": list(witness.values),
            "margin": witness.margin,
        },
        "entry_values": per_entry,
        "uniform_positional_optimum": uniform,
        "ok": ok,
    }, config, pretty)
    return EXIT_OK if ok else EXIT_DEMO


def _demo_mdp(config: RunConfig, pretty: bool) -> int:
    base = fixtures.non_multi_base()
    letter = base.alphabet.index("2")
    found = analysis.find_mdp_violation(base, letter, fixtures.mdp_candidate_triples())
    if found is None:
        _emit({"demo": "mdp", "ok": False, "reason": "no violation found"},
              config, pretty)
        return EXIT_DEMO
    bare_margin, pref_margin = analysis.verify_mdp_violation(base, found)
    ok = bare_margin > 1e-4 and pref_margin > 1e-4
    _emit({
        "demo": "mdp",
        "letter": base.alphabet.name(found.letter),
        "lassos": [format_word(w, base.alphabet)
                   for w in (found.beta, found.gamma, found.delta)],
        "dist_p": list(found.dist_p),
        "dist_q": list(found.dist_q),
        "p_loses_at_prefixed_start_by": pref_margin,
        "q_loses_at_bare_start_by": bare_margin,
        "ok": ok,
    }, config, pretty)
    return EXIT_OK if ok else EXIT_DEMO


def cmd_demo(args) -> int:
    config = _config_from_args(args)
    if args.which == "not-multi":
        return _demo_not_multi(config, args.pretty)
    if args.which == "fig1":
        return _demo_fig1(config, args.pretty)
    return _demo_mdp(config, args.pretty)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="contpay",
        description="Solve labeled graph games under contracting-base payoffs "
                    "and check payoff properties.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--eps", type=float, default=DEFAULT_EPS)
        p.add_argument("--eps-cmp", type=float, default=DEFAULT_EPS_CMP)
        p.add_argument("--seed", type=int, default=None,
                       help="RNG seed (falls back to $CONTPAY_SEED, then 0)")
        p.add_argument("--output", default=None, help="write JSON here instead of stdout")
        p.add_argument("--pretty", action="store_true")

    p = sub.add_parser("solve", help="solve a game under a payoff and verify")
    p.add_argument("game")
    p.add_argument("payoff")
    p.add_argument("--method", choices=("vi", "si", "rand"), default="vi")
    common(p)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("eval", help="evaluate a payoff on a word u(v)")
    p.add_argument("payoff")
    p.add_argument("word")
    common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("compare", help="order two words by the payoff")
    p.add_argument("payoff")
    p.add_argument("word1")
    p.add_argument("word2")
    common(p)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("check", help="run a sampling property check")
    p.add_argument("payoff")
    p.add_argument("--which", required=True,
                   choices=("prefix-monotone", "shift-det", "fairly-mixing",
                            "multi-discounted"))
    p.add_argument("--max-prefix-len", type=int, default=2)
    p.add_argument("--max-cycle-len", type=int, default=2)
    p.add_argument("--max-words", type=int, default=24)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--expect", default=None,
                   choices=("witness", "none", "pass", "fail", "multi_discounted",
                            "not_multi_discounted", "inconclusive"))
    common(p)
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("demo", help="reproduce a bundled construction")
    p.add_argument("which", choices=("not-multi", "fig1", "mdp"))
    common(p)
    p.set_defaults(fn=cmd_demo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
