"""Command-line front end for the tangent field toolkit."""
import argparse
import logging
import sys
import time
from typing import Dict, List, Optional

import numpy as np

from app.config import config
from app.curves import base_capture
from app.disconnect import estimate_lambda, working_lambda
from app.errors import InvalidInputError, ScaleResolutionError, TangentFieldError, VerificationError
from app.geometry import DiscreteSet, aw_discrepancy
from app.schemas import RunManifest
from app.tangents import ScaleSchedule, approximates_tangent, blowup
from app.tools import data_processor as io
from app.tools.analyzer import measure_c0
from app.tools.examples import example_cantor_stack, example_comb, middle_thirds
from app.tools.hcurve import build_H
from app.tools.library import library_payload, target_library
from app.tools.pipeline import select_ys, stage_radius, theorem_pipeline
from app.tools.splice import splice
from app.tools.visualizer import render_svg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INVALID = 2


class Run:
    """Paths and parameters touched by one command, for the manifest."""

    def __init__(self, command: str, parameters: Dict):
        self.command = command
        self.parameters = parameters
        self.inputs: List[str] = []
        self.outputs: List[str] = []

    def read(self, path: str) -> str:
        self.inputs.append(path)
        return path

    def write_json(self, path: Optional[str], payload: Dict) -> None:
        if path:
            self.outputs.append(io.write_json(path, payload))

    def write_text(self, path: Optional[str], text: str) -> None:
        if path:
            io._atomic_write(path, text)
            self.outputs.append(path)

    def write_csv(self, path: Optional[str], frame) -> None:
        if path:
            self.outputs.append(io.write_csv(path, frame))


def _library(args, run: Run, d: int):
    if getattr(args, "library", None):
        return io.read_library(run.read(args.library))
    return target_library(d, args.radius, args.targets)


def cmd_lambda(args, run: Run) -> int:
    K, _ = io.read_set(run.read(args.set))
    report = estimate_lambda(K)
    run.write_json(args.out, io.report_payload(report))
    print(repr(report.lambda_estimate))
    return EXIT_OK


def cmd_blowup(args, run: Run) -> int:
    K = io.read_object(run.read(args.set))
    if isinstance(K, DiscreteSet) and args.scale < K.resolution / args.radius:
        raise ScaleResolutionError(f"scale {args.scale:g} is below resolution / radius = {K.resolution / args.radius:g}")
    T = blowup(K, np.asarray(args.point, dtype=float), args.scale, args.radius)
    run.write_json(args.out, io.truncated_payload(T))
    run.write_text(args.svg, render_svg(set_=T.base, title=f"blowup at scale {args.scale:g}"))
    print(f"{len(T.base)} points")
    return EXIT_OK


def cmd_discrepancy(args, run: Run) -> int:
    A, _ = io.read_set(run.read(args.a))
    B, _ = io.read_set(run.read(args.b))
    values = {repr(R): aw_discrepancy(A, B, R) for R in args.radius}
    run.write_json(args.out, {"discrepancy": values})
    for R, v in values.items():
        print(f"{R} {v!r}")
    return EXIT_OK


def cmd_capture(args, run: Run) -> int:
    K, _ = io.read_set(run.read(args.set))
    cert = base_capture(K)
    run.write_json(args.out, io.curve_payload(cert.curve, {"coverage": cert.coverage,
                                                          "parameters": cert.parameter_index.tolist()}))
    run.write_text(args.svg, render_svg(set_=K, curve=cert.curve, title="base capture"))
    print(repr(cert.curve.total_length))
    return EXIT_OK


def cmd_build_h(args, run: Run) -> int:
    lib = _library(args, run, args.dimension)
    H = build_H(args.dimension, lib, args.depth)
    profiles = H.certify()
    meta = {
        "budget": H.budget,
        "length": H.curve.total_length,
        "block_scales": H.block_scales,
        "certificate": {name: {"verdict": p.verdict, "discrepancies": p.discrepancies} for name, p in profiles.items()},
    }
    run.write_json(args.out, io.curve_payload(H.curve, meta))
    run.write_json(args.library_out, library_payload(lib))
    for name, p in profiles.items():
        print(f"{name} {p.verdict} {p.rows[-1].discrepancy!r}")
    return EXIT_OK if all(p.verdict for p in profiles.values()) else EXIT_FAILED


def cmd_splice(args, run: Run) -> int:
    K, _ = io.read_set(run.read(args.set))
    lib = _library(args, run, K.dimension)
    x = np.asarray(args.point, dtype=float)
    lam = args.lam if args.lam is not None else working_lambda(estimate_lambda(K))
    H = build_H(K.dimension, lib, len(lib))
    radius = stage_radius([x], K)
    ys = select_ys(K, x, radius / (1.0 + lam / 16.0))
    G = base_capture(K)
    F, records = splice(G, K, x, ys, H, lam, args.delta)
    run.write_json(args.out_curve, io.curve_payload(F.curve))
    run.write_json(args.out_audit, {
        "lambda": lam,
        "splices": [r.to_payload() for r in records],
        "c0": measure_c0(records),
        "length_before": G.curve.total_length,
        "length_after": F.curve.total_length,
    })
    print(repr(F.curve.total_length - G.curve.total_length))
    return EXIT_OK


def cmd_pipeline(args, run: Run) -> int:
    K, _ = io.read_set(run.read(args.set))
    lib = _library(args, run, K.dimension)
    try:
        F, state = theorem_pipeline(K, args.stages, args.delta, lib, lam=args.lam)
    except TangentFieldError as e:
        state = getattr(e, "state", None)
        if state is not None:
            run.write_json(args.out_audit, state.to_payload())
        raise
    run.write_json(args.out_curve, io.curve_payload(F.curve))
    audit = state.to_payload()
    audit["c0"] = measure_c0([r for stage in state.records for r in stage])
    run.write_json(args.out_audit, audit)
    run.write_text(args.svg, render_svg(set_=K, curve=F.curve, title=f"{args.stages}-stage capture"))
    passed = sum(v.verdict for v in state.verdicts)
    print(f"{passed}/{len(state.verdicts)} witnesses pass, spent {state.spent!r} of {args.delta!r}")
    return EXIT_OK if state.passed else EXIT_FAILED


def cmd_examples(args, run: Run) -> int:
    if args.name == "cantor-stack":
        stack = example_cantor_stack(args.dimension, args.kmax, args.depth)
        run.write_json(args.out, io.set_payload(stack.set, stack.metadata()))
        print(f"{len(stack.set)} points")
    elif args.name == "comb":
        comb = example_comb(args.stages, args.teeth)
        run.write_json(args.out, io.curve_payload(comb.curve, comb.metadata()))
        print(repr(comb.stage_lengths[-1]))
    else:
        K = middle_thirds(args.depth, args.dimension, args.resolution)
        run.write_json(args.out, io.set_payload(K))
        print(f"{len(K)} points")
    return EXIT_OK


def cmd_verify(args, run: Run) -> int:
    K = io.read_object(run.read(args.set))
    lib = io.read_library(run.read(args.library))
    T = lib.get(args.target).set
    schedule = ScaleSchedule(tuple(args.scales))
    profile = approximates_tangent(K, np.asarray(args.point, dtype=float), schedule, T, args.tol)
    run.write_csv(args.csv, profile.to_frame())
    print(f"{profile.verdict} {profile.rows[-1].discrepancy!r}")
    return EXIT_OK if profile.verdict else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tangentfield", description="Lipschitz captures with prescribed pseudotangents")
    parser.add_argument("--log-level", default=config.LOG_LEVEL)
    parser.add_argument("--manifest", help="write a RunManifest JSON here")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("lambda", help="estimate the uniform disconnectedness constant")
    p.add_argument("set")
    p.add_argument("--out")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("blowup", help="rescale a set or curve about a point")
    p.add_argument("set")
    p.add_argument("--point", type=float, nargs="+", required=True)
    p.add_argument("--scale", type=float, required=True)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_blowup)

    p = sub.add_parser("discrepancy", help="truncated Attouch-Wets discrepancy at one or more radii")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--radius", type=float, action="append", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_discrepancy)

    p = sub.add_parser("capture", help="spanning-tree capture of a set")
    p.add_argument("set")
    p.add_argument("--out")
    p.add_argument("--svg")
    p.set_defaults(func=cmd_capture)

    for name, func, help_ in (
        ("build-h", cmd_build_h, "build H for a target library"),
        ("splice", cmd_splice, "splice H copies near one point"),
        ("pipeline", cmd_pipeline, "run the staged construction"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--library", help="library JSON (default: canonical targets)")
        p.add_argument("--targets", type=int, default=3)
        p.add_argument("--radius", type=float, default=1.0)
        p.set_defaults(func=func)
        if name == "build-h":
            p.add_argument("--dimension", type=int, default=2)
            p.add_argument("--depth", type=int, default=12)
            p.add_argument("--out")
            p.add_argument("--library-out")
            continue
        p.add_argument("set")
        p.add_argument("--delta", type=float, default=0.5)
        p.add_argument("--lambda", dest="lam", type=float)
        p.add_argument("--out-curve")
        p.add_argument("--out-audit")
        if name == "splice":
            p.add_argument("--point", type=float, nargs="+", required=True)
        else:
            p.add_argument("--stages", type=int, default=3)
            p.add_argument("--svg")

    p = sub.add_parser("examples", help="write an example set or curve")
    p.add_argument("name", choices=["cantor-stack", "comb", "middle-thirds"])
    p.add_argument("--dimension", type=int, default=2)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--stages", type=int, default=3)
    p.add_argument("--teeth", type=int, default=4)
    p.add_argument("--resolution", type=float, default=1e-4)
    p.add_argument("--out")
    p.set_defaults(func=cmd_examples)

    p = sub.add_parser("verify", help="check a library target as a tangent")
    p.add_argument("set")
    p.add_argument("--point", type=float, nargs="+", required=True)
    p.add_argument("--library", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--scales", type=float, nargs="+", required=True)
    p.add_argument("--tol", type=float, required=True)
    p.add_argument("--csv")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    parameters = {k: v for k, v in vars(args).items() if k not in ("func", "manifest", "log_level")}
    run = Run(args.command, parameters)
    started = time.perf_counter()
    try:
        status = args.func(args, run)
    except InvalidInputError as e:
        logger.error(f"invalid input: {e}")
        print(f"error: {e}", file=sys.stderr)
        status = EXIT_INVALID
    except VerificationError as e:
        logger.error(f"verification failed: {e}")
        print(f"verification failed: {e}", file=sys.stderr)
        status = EXIT_FAILED
    except TangentFieldError as e:
        logger.error(f"error: {e}", exc_info=True)
        status = EXIT_INVALID
    if args.manifest:
        manifest = RunManifest(command=run.command, inputs=run.inputs, parameters=run.parameters,
                               outputs=run.outputs, status=status, wall_time=time.perf_counter() - started)
        io.write_json(args.manifest, manifest.model_dump())
    return status


if __name__ == "__main__":
    sys.exit(main())
