"""Command-line entry point.

Thin adapters only: every subcommand parses flags, calls the library, and
serializes the result (JSON objects/lines or headed CSV with comma
delimiter and LF endings). Output is deterministic for a fixed
(flags, seed) pair. Exit codes: 0 success, 2 parameter/usage error with a
one-line diagnostic, 3 I/O failure.

Relative --output style paths are resolved against $ONESIDED_OUTPUT_DIR
when it is set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections import Counter
from pathlib import Path
from typing import List, Optional

from . import histogram_padding as hp
from . import mechanisms as mech
from . import psi_padding as psi
from . import verifier
from .mechanisms import MechanismSpec, ParameterError, PrivacyBudget
from .sampler import RngStream, sample_batch

FAMILY_FLAGS = {
    "laplace": mech.TRUNC_LAPLACE,
    "geometric": mech.DOUBLE_GEOMETRIC,
    "negbin": mech.NEG_BINOMIAL,
    "uniform": mech.DISCRETE_UNIFORM,
    "binomial": mech.BINOMIAL,
}
SOLVABLE = ("laplace", "geometric", "negbin")


def _resolve_path(path: str) -> Path:
    p = Path(path)
    base = os.environ.get("ONESIDED_OUTPUT_DIR")
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def _emit(text: str, output: Optional[str]) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        _resolve_path(output).write_text(text)


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _add_budget_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epsilon", type=float, help="privacy-loss parameter")
    p.add_argument("--delta", type=float, help="failure probability")
    p.add_argument("--sensitivity", type=float, default=1.0,
                   help="worst-case query change between neighbors (default 1)")


def _add_family_flag(p: argparse.ArgumentParser, choices) -> None:
    p.add_argument("--family", required=True, choices=choices)
    p.add_argument("--n-max", type=int, default=None,
                   help="support maximum N (uniform/binomial families only)")
    p.add_argument("--singly-truncated", action="store_true",
                   help="laplace only: truncate at zero but keep the upper tail")
    p.add_argument("--sign", choices=(mech.OVERVALUED, mech.UNDERVALUED),
                   default=mech.OVERVALUED)


def _spec_from_args(args) -> MechanismSpec:
    family = FAMILY_FLAGS[args.family]
    sens = args.sensitivity
    if isinstance(sens, float) and sens.is_integer():
        sens = int(sens)
    if family in (mech.DISCRETE_UNIFORM, mech.BINOMIAL):
        if args.n_max is None:
            raise ParameterError(f"--family {args.family} requires --n-max")
        if family == mech.DISCRETE_UNIFORM:
            return mech.uniform_spec(args.n_max, int(sens), sign=args.sign)
        return mech.binomial_spec(args.n_max, int(sens), sign=args.sign)
    if args.epsilon is None or args.delta is None:
        raise ParameterError(f"--family {args.family} requires --epsilon and --delta")
    budget = PrivacyBudget(args.epsilon, args.delta, sens)
    doubly = not getattr(args, "singly_truncated", False)
    return mech.solve_spec(family, budget, doubly=doubly, sign=args.sign)


# ---------------------------------------------------------------------------
# subcommands


def cmd_solve(args) -> int:
    if args.family not in SOLVABLE:
        raise ParameterError(
            f"--family must be one of {', '.join(SOLVABLE)} for solve"
        )
    spec = _spec_from_args(args)
    _emit(_json_line(mech.spec_to_dict(spec)) + "\n", args.output)
    return 0


def cmd_sample(args) -> int:
    spec = _spec_from_args(args)
    rng = RngStream(args.seed, args.stream)
    draws = sample_batch(spec, rng, args.count)
    if spec.integer_valued:
        body = "".join(f"{int(v)}\n" for v in draws)
    else:
        body = "".join(f"{float(v)!r}\n" for v in draws)
    _emit(body, args.output)
    return 0


def _verdicts_for_spec(spec: MechanismSpec, epsilons: List[float], shift: int):
    """Tabulate once, then run the oracle across the epsilon grid."""
    if spec.family == mech.TRUNC_LAPLACE:
        sens = spec.budget.sensitivity
        cells = max(100, int(round(1000 * spec.budget.epsilon)))
        step = sens / cells
        pmf = verifier.discretize_continuous(spec.params, step)
        shift = verifier.shift_cells(spec.params, step, sens)
    else:
        pmf = verifier.tabulate_spec(spec)
    out = []
    for v in verifier.privacy_curve(pmf, shift, epsilons):
        out.append(
            verifier.PrivacyVerdict(
                v.epsilon,
                min(v.delta_required + pmf.tail_mass, 1.0),
                v.direction_worst,
            )
        )
    return out


def cmd_verify(args) -> int:
    spec = _spec_from_args(args)
    if args.epsilon_grid:
        epsilons = [float(tok) for tok in args.epsilon_grid.split(",")]
    elif spec.budget is not None:
        epsilons = [spec.budget.epsilon]
    else:
        family = FAMILY_FLAGS[args.family]
        acc = mech.heuristic_accounting(family, args.n_max, int(args.sensitivity))
        epsilons = [acc.epsilon]
    lines = []
    for v in _verdicts_for_spec(spec, epsilons, int(args.sensitivity)):
        lines.append(_json_line({
            "epsilon": v.epsilon,
            "delta_required": v.delta_required,
            "direction_worst": v.direction_worst,
        }))
    _emit("".join(line + "\n" for line in lines), args.output)
    return 0


def cmd_pmf_dump(args) -> int:
    spec = _spec_from_args(args)
    rows = ["x,probability"]
    if spec.family == mech.TRUNC_LAPLACE:
        step = spec.params.b / 1000.0
        pmf = verifier.discretize_continuous(spec.params, step)
        for i, mass in enumerate(pmf.probs):
            rows.append(f"{(i + 0.5) * step!r},{float(mass)!r}")
    else:
        pmf = verifier.tabulate_spec(spec)
        for i, mass in enumerate(pmf.probs):
            rows.append(f"{pmf.origin + i},{float(mass)!r}")
    _emit("\n".join(rows) + "\n", args.output)
    return 0


def cmd_psi_sim(args) -> int:
    if args.intersection > min(args.size_x, args.size_y):
        raise ParameterError("intersection cannot exceed either input size")
    spec_x = _spec_from_args(args)
    if FAMILY_FLAGS[args.family] == mech.DOUBLE_GEOMETRIC and (
        args.epsilon_y is not None or args.delta_y is not None
    ):
        eps_y = args.epsilon_y if args.epsilon_y is not None else args.epsilon
        delta_y = args.delta_y if args.delta_y is not None else args.delta
        budget_y = PrivacyBudget(eps_y, delta_y, int(args.sensitivity))
        spec_y = mech.solve_spec(FAMILY_FLAGS[args.family], budget_y, sign=args.sign)
    else:
        spec_y = spec_x

    pools = psi.build_pools(
        spec_x,
        spec_x if args.union else None,
        intersect_spec_y=spec_y,
        union_spec_y=spec_y if args.union else None,
    )
    # synthetic universe: D_Y overlaps D_X in exactly `intersection` ids
    d_x = frozenset(f"u:{i:08d}" for i in range(args.size_x))
    start = args.size_x - args.intersection
    d_y = frozenset(f"u:{i:08d}" for i in range(start, start + args.size_y))
    px = psi.PartyInput(d_x, spec_x, psi.ROLE_X,
                        union_noise_spec=spec_x if args.union else None)
    py = psi.PartyInput(d_y, spec_y, psi.ROLE_Y,
                        union_noise_spec=spec_y if args.union else None)

    root = RngStream(args.seed, args.stream)
    lines = []
    noise_x_view = Counter()
    noise_y_view = Counter()
    for k in range(args.reps):
        run_rng = root.substream(k)
        if args.one_party:
            in_x, in_y = psi.one_party_pad(px, py, pools, run_rng.substream(1))
        else:
            in_x = psi.pad_input(px, pools, run_rng.substream(0), union_mode=args.union)
            in_y = psi.pad_input(py, pools, run_rng.substream(1), union_mode=args.union)
        transcript = psi.run_blackbox_psi(in_x, in_y)
        view_x = psi.party_view(transcript, in_x, pools, union_mode=args.union)
        view_y = psi.party_view(transcript, in_y, pools, union_mode=args.union)
        noise_x_view[view_x.dp_intersection - args.intersection] += 1
        noise_y_view[view_y.dp_intersection - args.intersection] += 1
        lines.append(_json_line({
            "run": k,
            "z_x": in_x.z_own, "z_y": in_y.z_own,
            "v_x": in_x.v_own, "v_y": in_y.v_own,
            "transcript": {
                "size_x": transcript.size_x, "size_y": transcript.size_y,
                "intersection_size": transcript.intersection_size,
                "union_size": transcript.union_size,
            },
            "view_x": view_x.__dict__, "view_y": view_y.__dict__,
        }))
    _emit("".join(line + "\n" for line in lines), args.output)
    if args.hist_csv:
        top = max(list(noise_x_view) + list(noise_y_view), default=0)
        rows = ["noise,view_x_count,view_y_count"]
        for v in range(0, top + 1):
            rows.append(f"{v},{noise_x_view.get(v, 0)},{noise_y_view.get(v, 0)}")
        _resolve_path(args.hist_csv).write_text("\n".join(rows) + "\n")
    return 0


def _read_histogram_csv(path: Path) -> hp.EventHistogram:
    lines = [ln for ln in path.read_text().splitlines() if ln.strip()]
    if not lines or lines[0].split(",")[0].strip() != "bin":
        raise ParameterError("histogram CSV must start with a 'bin,count' header")
    by_bin = {}
    for ln in lines[1:]:
        b, c = ln.split(",")
        by_bin[int(b)] = int(c)
    k_max = max(by_bin)
    return hp.EventHistogram(tuple(by_bin.get(i, 0) for i in range(k_max + 1)))


def cmd_hist_pad(args) -> int:
    spec = _spec_from_args(args)
    hist = _read_histogram_csv(_resolve_path(args.input))
    padded = hp.pad_histogram(hist, spec, RngStream(args.seed, args.stream))
    rows = ["bin,true_count,dummy_count,leaked_count"]
    for i, (t, d) in enumerate(zip(hist.counts, padded.dummy_counts)):
        rows.append(f"{i},{t},{d},{t + d}")
    _emit("\n".join(rows) + "\n", args.output)
    report = hp.cost_compare(max(hist.total_users, 1), hist.k_max, spec,
                             shuffle_constant=args.shuffle_constant)
    cost_json = _json_line(report.__dict__) + "\n"
    if args.cost_json:
        _resolve_path(args.cost_json).write_text(cost_json)
    else:
        sys.stdout.write(cost_json)
    return 0


def cmd_cost(args) -> int:
    spec = _spec_from_args(args)
    report = hp.cost_compare(args.n_users, args.k_max, spec,
                             shuffle_constant=args.shuffle_constant)
    _emit(_json_line(report.__dict__) + "\n", args.output)
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="onesided",
        description="One-sided DP noise: solvers, sampling, verification, "
                    "PSI padding simulation, and histogram padding.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, choices=tuple(FAMILY_FLAGS)):
        _add_family_flag(p, choices)
        _add_budget_flags(p)
        p.add_argument("--output", default=None, help="write to file instead of stdout")

    p = sub.add_parser("solve", help="solve a family's parameters for a budget")
    common(p, choices=SOLVABLE)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sample", help="emit newline-delimited noise draws")
    common(p)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--count", type=int, required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("verify", help="brute-force delta at one or more epsilons")
    common(p)
    p.add_argument("--epsilon-grid", default=None,
                   help="comma-separated ascending epsilons (default: the budget's)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pmf-dump", help="dump the probability table as CSV")
    common(p)
    p.set_defaults(func=cmd_pmf_dump)

    p = sub.add_parser("psi-sim", help="seeded two-party PSI padding runs")
    common(p, choices=("geometric", "uniform", "binomial"))
    p.add_argument("--epsilon-y", type=float, default=None,
                   help="party Y budget (defaults to --epsilon)")
    p.add_argument("--delta-y", type=float, default=None)
    p.add_argument("--size-x", type=int, required=True)
    p.add_argument("--size-y", type=int, required=True)
    p.add_argument("--intersection", type=int, required=True)
    p.add_argument("--union", action="store_true", help="also pad the union size")
    p.add_argument("--one-party", action="store_true",
                   help="only party X observes the intersection size")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--reps", type=int, default=1)
    p.add_argument("--hist-csv", default=None,
                   help="also write an aggregate view-noise histogram CSV")
    p.set_defaults(func=cmd_psi_sim)

    p = sub.add_parser("hist-pad", help="pad an event-count histogram CSV")
    common(p, choices=("geometric", "negbin", "uniform", "binomial"))
    p.add_argument("--input", required=True, help="CSV with a bin,count header")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream", type=int, default=0)
    p.add_argument("--cost-json", default=None,
                   help="write the cost report here instead of stdout")
    p.add_argument("--shuffle-constant", type=float, default=5.5)
    p.set_defaults(func=cmd_hist_pad)

    p = sub.add_parser("cost", help="DP padding versus constant-time cost model")
    common(p, choices=("geometric", "negbin", "uniform", "binomial"))
    p.add_argument("--n-users", type=int, required=True)
    p.add_argument("--k-max", type=int, required=True)
    p.add_argument("--shuffle-constant", type=float, default=5.5)
    p.set_defaults(func=cmd_cost)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse prints its own usage diagnostics
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
