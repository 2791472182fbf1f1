"""``planar-pnp`` command line: one-shot solves and benchmark sweeps.

Exit codes: 0 success, 1 input or usage error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import PlanarPnPError
from .geometry import CameraOffset, Intrinsics
from .harness import ScenarioConfig, run_sweep
from .solver import SolveRequest, solve

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2
CSV_COLUMNS = ("sweep_value", "mean_trans_err", "mean_rot_err_rad", "mean_time_s", "failures", "trials")
RAW_COLUMNS = ("sweep_value", "trial_index", "trans_err", "rot_err_rad", "time_s", "converged", "failed")
BENCH_KINDS = {"points": "points", "noise": "noise", "time": "timing"}


class InputError(ValueError):
    """Malformed solve input; the message names the offending line or field."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _number(obj, key, where):
    if key not in obj:
        raise InputError(f"{where}: missing field '{key}'")
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InputError(f"{where}.{key}: expected a finite number, got {value!r}")
    return float(value)


def load_request(path, prior_deg: float | None = None) -> SolveRequest:
    """Parse and validate a solve input document (JSON)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise InputError(f"{path}: top level must be an object")

    intr = doc.get("intrinsics")
    if not isinstance(intr, dict):
        raise InputError("intrinsics: missing or not an object")
    fx, fy = _number(intr, "fx", "intrinsics"), _number(intr, "fy", "intrinsics")
    cx, cy = _number(intr, "cx", "intrinsics"), _number(intr, "cy", "intrinsics")
    if fx <= 0 or fy <= 0:
        raise InputError("intrinsics: fx and fy must be positive")

    off = doc.get("camera_offset")
    try:
        if isinstance(off, dict):
            offset = CameraOffset.from_quaternion(*(_number(off, k, "camera_offset") for k in "wxyz"))
        elif isinstance(off, list):
            rot = np.array(off, dtype=float)
            if rot.shape != (3, 3):
                raise InputError(f"camera_offset: expected 3x3 rows, got shape {rot.shape}")
            offset = CameraOffset.from_rotation(rot)
        else:
            raise InputError("camera_offset: expected a 3x3 row-major matrix or {w, x, y, z}")
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"camera_offset: {exc}") from exc

    corrs = doc.get("correspondences")
    if not isinstance(corrs, list):
        raise InputError("correspondences: missing or not a list")
    if len(corrs) < 2:
        raise InputError(f"correspondences: at least 2 are required, got {len(corrs)}")
    world, pixels = [], []
    for i, c in enumerate(corrs):
        where = f"correspondences[{i}]"
        if not isinstance(c, dict):
            raise InputError(f"{where}: expected an object")
        world.append([_number(c, k, where) for k in ("px", "py", "pz")])
        pixels.append([_number(c, k, where) for k in ("u", "v")])

    if prior_deg is None and doc.get("heading_prior_deg") is not None:
        prior_deg = _number(doc, "heading_prior_deg", "document")
    return SolveRequest(
        world_points=np.array(world),
        pixels=np.array(pixels),
        intrinsics=Intrinsics(fx, fy, cx, cy),
        camera_offset=offset,
        heading_prior=None if prior_deg is None else math.radians(prior_deg),
    )


def request_document(req: SolveRequest, heading_prior_deg: float | None = None) -> dict:
    """Inverse of :func:`load_request`, used to write fixtures."""
    intr = req.intrinsics
    doc = {
        "intrinsics": {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy},
        "camera_offset": req.camera_offset.rotation.tolist(),
        "correspondences": [
            {"px": p[0], "py": p[1], "pz": p[2], "u": q[0], "v": q[1]}
            for p, q in zip(req.world_points.tolist(), req.pixels.tolist())
        ],
    }
    if heading_prior_deg is not None:
        doc["heading_prior_deg"] = heading_prior_deg
    return doc


def cmd_solve(args) -> int:
    try:
        req = load_request(args.file, args.prior_deg)
        sol = solve(req)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PlanarPnPError as exc:
        # includes a mounting that looks straight up or down the z axis
        print(f"solver error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_SOLVER
    res = sol.refine_result
    candidates = sol.init_diagnostics.n_pose_candidates if sol.init_diagnostics else 1
    lines = {
        "x": repr(float(sol.pose.x)),
        "y": repr(float(sol.pose.y)),
        "theta_rad": repr(float(sol.pose.theta)),
        "theta_deg": repr(math.degrees(sol.pose.theta)),
        "reprojection_error": repr(float(sol.reprojection_error)),
        "iterations": str(res.iterations),
        "candidates_considered": str(candidates),
    }
    for key, value in lines.items():
        print(f"{key}={value}")
    if not res.converged:
        print(f"solver error: refinement stopped at {res.termination_reason.value} "
              "without converging", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def write_rows(rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([
            format(row.swept_value, "g"),
            repr(float(row.mean_translational_error)),
            repr(float(row.mean_rotational_error)),
            repr(float(row.mean_time)),
            row.failure_count,
            row.trials,
        ])


def write_raw(rows, stream) -> None:
    """Per-trial records; times are ``nan`` for sweeps that do not measure them."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(RAW_COLUMNS)
    for row in rows:
        timed = not math.isnan(row.mean_time)
        for rec in row.records:
            writer.writerow([
                format(row.swept_value, "g"),
                rec.trial_index,
                repr(float(rec.translational_error)),
                repr(float(rec.rotational_error)),
                repr(float(rec.solve_time if timed else math.nan)),
                int(rec.converged),
                int(rec.failed),
            ])


def _open_out(path):
    try:
        return open(path, "w", newline="", encoding="ascii")
    except OSError as exc:
        print(f"error: cannot write {path}: {exc.strerror}", file=sys.stderr)
        return None


def cmd_bench(args) -> int:
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    out = sys.stdout if args.out is None else _open_out(args.out)
    if out is None:
        return EXIT_INPUT
    raw = None
    try:
        if args.raw is not None and (raw := _open_out(args.raw)) is None:
            return EXIT_INPUT
        cfg = ScenarioConfig(trials=args.trials, master_seed=args.seed)
        rows = run_sweep(BENCH_KINDS[args.kind], cfg)
        write_rows(rows, out)
        if raw is not None:
            write_raw(rows, raw)
    finally:
        for stream in (out, raw):
            if stream is not None and stream is not sys.stdout:
                stream.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="planar-pnp", description="Planar (x, y, heading) PnP solver.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="solve one input document")
    p.add_argument("file")
    p.add_argument("--prior-deg", type=float, default=None,
                   help="approximate heading in degrees; skips the polynomial initializer")
    p.set_defaults(func=cmd_solve)

    b = sub.add_parser("bench", help="run a synthetic benchmark sweep, CSV output")
    b.add_argument("kind", choices=sorted(BENCH_KINDS))
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--trials", type=int, default=250)
    b.add_argument("--out", default=None, help="output path (default: standard output)")
    b.add_argument("--raw", default=None, help="also write per-trial records to this path")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
