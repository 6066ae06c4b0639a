"""Command line front end.

Subcommands:

* ``norm``         certified L^p norm of a network derivative over a box grid
* ``heat-verify``  refinement loop certifying one heat-equation candidate
* ``heat-certify`` fair search over several candidate weight files
* ``info``         parse and summarize a weight file

Exit codes: 0 success (verified where applicable), 1 refinement budget
exhausted, 2 parse/configuration errors, 3 capability errors (unsupported
depth or derivative order).  No command writes a partial report on failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import heat, quadrature, reporting
from .derivatives import MultiIndex
from .errors import CapabilityError, ShapeError, UnsupportedOrderError
from .model import load_network
from .parallel import DEFAULT_CHUNK, chunk_ranges, resolve_workers

EXIT_OK = 0
EXIT_BUDGET = 1
EXIT_PARSE = 2
EXIT_CAPABILITY = 3

_PARSE_ERRORS = (
    FileNotFoundError,
    IsADirectoryError,
    PermissionError,
    json.JSONDecodeError,
    KeyError,
    TypeError,
    ValueError,  # includes ShapeError, DomainError, GridMismatchError
)
_CAPABILITY_ERRORS = (CapabilityError, UnsupportedOrderError)


def _csv_floats(text: str):
    return [float(v) for v in text.split(",") if v != ""]


def _csv_ints(text: str):
    return [int(v) for v in text.split(",") if v != ""]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="certiquad",
        description="Certified quadrature and heat-equation verification for networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    norm = sub.add_parser("norm", help="certified L^p norm of a network derivative")
    norm.add_argument("--weights", required=True, help="weight JSON file")
    norm.add_argument("--p", type=int, default=2)
    norm.add_argument("--alpha", default=None, help="derivative exponents a1,...,ad (default all zero)")
    norm.add_argument("--lower", required=True, help="domain lower corner l1,...,ld")
    norm.add_argument("--upper", required=True, help="domain upper corner u1,...,ud")
    norm.add_argument("--eps", type=float, required=True, help="grid cube side")
    norm.add_argument("--out", default=None, help="certificate JSON output path")
    norm.add_argument("--boxes-csv", default=None, help="stream per-box contributions to CSV")
    norm.add_argument("--fig", default=None, help="render local estimate/error maps to this file")
    norm.add_argument("--no-fig", action="store_true", help="skip the figure that normally accompanies --boxes-csv")
    norm.add_argument("--workers", type=int, default=None)

    verify = sub.add_parser("heat-verify", help="verify one candidate against the heat problem")
    verify.add_argument("--weights", required=True)
    verify.add_argument("--problem", required=True, help="problem config JSON")
    verify.add_argument("--eps0", type=float, default=None, help="override target tolerance")
    verify.add_argument("--eps-init", type=float, default=None, help="override starting grid size")
    verify.add_argument("--max-refine", type=int, default=None, help="override refinement budget")
    verify.add_argument("--out", default=None, help="report JSON output path")
    verify.add_argument("--workers", type=int, default=None)

    certify = sub.add_parser("heat-certify", help="search candidate weight files for the first certifiable one")
    certify.add_argument("--weights", required=True, nargs="+", help="candidate weight JSON files in order")
    certify.add_argument("--problem", required=True)
    certify.add_argument("--eps0", type=float, default=None)
    certify.add_argument("--eps-init", type=float, default=None)
    certify.add_argument("--max-refine", type=int, default=None)
    certify.add_argument("--out", default=None)
    certify.add_argument("--workers", type=int, default=None)

    info = sub.add_parser("info", help="parse and summarize a weight file")
    info.add_argument("--weights", required=True)
    return parser


def _print_norm_table(cert) -> None:
    header = f"{'p':>3} {'eps':>12} {'I_p':>14} {'R_p':>14} {'lower':>14} {'upper':>14}"
    row = (
        f"{cert.p:>3d} {cert.eps:>12.4e} {cert.estimate:>14.6e} "
        f"{cert.error_bound:>14.6e} {cert.norm_lower:>14.6e} {cert.norm_upper:>14.6e}"
    )
    print(header)
    print(row)


def _cmd_norm(args) -> int:
    net = load_network(args.weights)
    lower = _csv_floats(args.lower)
    upper = _csv_floats(args.upper)
    if args.alpha is None:
        alpha = MultiIndex.zero(net.input_dim)
    else:
        alpha = MultiIndex(tuple(_csv_ints(args.alpha)))
    if alpha.dim != net.input_dim:
        raise ShapeError(
            f"alpha has {alpha.dim} entries but the network input dimension is {net.input_dim}"
        )
    workers = resolve_workers(args.workers)
    grid = quadrature.build_uniform_grid(lower, upper, args.eps)
    cert = quadrature.lp_power_estimate(net, alpha, grid, args.p, workers=workers)
    _print_norm_table(cert)
    fig_path = args.fig
    if fig_path is None and args.boxes_csv and not args.no_fig:
        fig_path = f"{args.boxes_csv}.png"
    if args.boxes_csv or fig_path:
        side = grid.uniform_side
        per_chunk = [
            quadrature.box_contributions(net, alpha, grid.centers[a:b], side, args.p)
            for a, b in chunk_ranges(grid.n_boxes, DEFAULT_CHUNK)
        ]
        if args.boxes_csv:
            starts = list(chunk_ranges(grid.n_boxes, DEFAULT_CHUNK))
            reporting.stream_boxes_csv(
                args.boxes_csv,
                (
                    (grid.centers[a:b], est, rad)
                    for (a, b), (est, rad) in zip(starts, per_chunk)
                ),
                grid.dim,
            )
        if fig_path:
            est = np.concatenate([c[0] for c in per_chunk])
            rad = np.concatenate([c[1] for c in per_chunk])
            if not reporting.render_box_maps(fig_path, grid.centers, est, rad, side):
                print("figure skipped: grids above two dimensions are not rendered", file=sys.stderr)
    if args.out:
        reporting.write_report(args.out, cert.to_json_dict())
    return EXIT_OK


def _load_problem(args):
    problem, settings = heat.load_problem_config(args.problem)
    eps0 = args.eps0 if args.eps0 is not None else settings.eps0
    eps_init = args.eps_init if args.eps_init is not None else settings.eps_init
    max_ref = args.max_refine if args.max_refine is not None else settings.max_refinements
    return problem, eps0, eps_init, max_ref


def _cmd_heat_verify(args) -> int:
    net = load_network(args.weights)
    problem, eps0, eps_init, max_ref = _load_problem(args)
    workers = resolve_workers(args.workers)
    outcome = heat.local_verify(
        net, problem, eps0, eps_init=eps_init, max_refinements=max_ref, workers=workers
    )
    print(
        f"verdict={outcome.verdict.value} bound={outcome.certified_bound:.6e} "
        f"eps_final={outcome.eps_final:.4e} iterations={outcome.iterations}"
    )
    if args.out:
        reporting.write_report(args.out, outcome.to_json_dict())
    return EXIT_OK if outcome.verdict is heat.Verdict.CERTIFIED else EXIT_BUDGET


def _cmd_heat_certify(args) -> int:
    nets = [load_network(path) for path in args.weights]
    problem, eps0, eps_init, max_ref = _load_problem(args)
    workers = resolve_workers(args.workers)
    index, outcome = heat.global_verify(
        nets, problem, eps0, eps_init=eps_init, max_refinements=max_ref, workers=workers
    )
    print(
        f"index={index} verdict={outcome.verdict.value} "
        f"bound={outcome.certified_bound:.6e}"
    )
    if args.out:
        reporting.write_report(
            args.out,
            {
                "index": index,
                "weights": args.weights[index],
                "outcome": outcome.to_json_dict(),
            },
        )
    return EXIT_OK if outcome.verdict is heat.Verdict.CERTIFIED else EXIT_BUDGET


def _cmd_info(args) -> int:
    net = load_network(args.weights)
    act = net.activation
    act_text = act.kind if act.kind == "relu" else f"repu({act.order})"
    print(f"input_dim: {net.input_dim}")
    print(f"hidden_widths: {list(net.hidden_widths)}")
    print(f"activation: {act_text}")
    print(f"parameters: {net.n_parameters}")
    return EXIT_OK


_COMMANDS = {
    "norm": _cmd_norm,
    "heat-verify": _cmd_heat_verify,
    "heat-certify": _cmd_heat_certify,
    "info": _cmd_info,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _CAPABILITY_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except _PARSE_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
