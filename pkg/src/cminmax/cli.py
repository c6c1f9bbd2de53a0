"""Command-line entry point: ``detect``, ``generate``, ``cone``, ``bench``, ``expected-rotations``.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
runtime failures (unreadable input, no corners, exhausted budgets).
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import bench
from .cone import VertexFan, min_bounding_cone
from .detector import DetectorConfig, detect
from .errors import CMinMaxError, ConfigError, DimensionError
from .io import corners_to_csv, image_to_cloud, read_cloud, read_csv_cloud, write_cloud, write_ply
from .schedule import Harvest, Mode, ScheduleConfig, expected_random_rotations, read_config_values
from .shapes import Sampling, ShapeKind, generate, spec_from_name

log = logging.getLogger("cminmax")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3

# Defaults for point-cloud input: extra rotations guard against sampling noise.
CLOUD_SAFETY = 2.0
ADAPTIVE_GUESS_DEG = 90.0


def _add_detect(sub) -> None:
    p = sub.add_parser("detect", help="detect corners of a point cloud or binary image")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="point cloud file (.csv or ASCII .ply)")
    src.add_argument("--image", help="binary PGM image (P2 or P5)")
    p.add_argument("--threshold", type=int, default=128, help="foreground level, 0-255 scale")
    p.add_argument("--dim", type=int, help="expected dimension of the cloud")
    p.add_argument("--mode", choices=["det", "rand", "adapt"])
    p.add_argument("--phi-max-deg", type=float, help="largest vertex angle (adaptive: initial guess)")
    p.add_argument("--step-deg", type=float, help="explicit rotation step, bypasses phi-max")
    p.add_argument("--count", type=int, help="explicit rotation count (2D, with --step-deg)")
    p.add_argument("--seed", type=int)
    p.add_argument("--safety", type=float, help="schedule safety factor (>= 1)")
    p.add_argument("--shrink", type=float, help="adaptive gap shrink factor")
    p.add_argument("--cluster-radius", type=float)
    p.add_argument("--tie-tol", type=float)
    p.add_argument("--min-support", type=int)
    p.add_argument("--extremes", choices=[h.value for h in Harvest], default=Harvest.ALL.value)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--patience", type=int, help="random mode: quiet rotations before stopping")
    p.add_argument("--max-rotations", type=int, default=10**6)
    p.add_argument("--output", help="corner CSV path (default: stdout)")
    p.add_argument("--config", help="key=value schedule config file; flags override it")
    p.add_argument("--noisy", action="store_true", help="require support >= 2 per corner")


def _add_generate(sub) -> None:
    p = sub.add_parser("generate", help="write a synthetic shape cloud")
    p.add_argument("--shape", required=True, help="polygon name, platonic/4D solid, random-polygon or file")
    p.add_argument("--n", type=int, help="polygon vertex count")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--edge", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0, help="random-polygon seed")
    p.add_argument("--path", help="source cloud for --shape file")
    p.add_argument("--sampling", choices=[s.value for s in Sampling], default=Sampling.VERTICES.value)
    p.add_argument("--points", type=int, default=0, help="total points, vertices included")
    p.add_argument("--sampling-seed", type=int, default=0)
    p.add_argument("--noise", type=float, default=0.0, help="gaussian noise sigma")
    p.add_argument("--out", required=True, help=".csv or .ply")
    p.add_argument("--out-truth", help="true vertices as CSV")


def _add_cone(sub) -> None:
    p = sub.add_parser("cone", help="minimum bounding cone of a vertex fan")
    p.add_argument("--input", required=True, help="CSV: apex row, then one neighbour per row")


def _add_bench(sub) -> None:
    p = sub.add_parser("bench", help="timing suites against the hull baseline")
    p.add_argument("--suite", choices=sorted(bench.SUITES), required=True)
    p.add_argument("--out", required=True, help="CSV path")
    p.add_argument("--repeats", type=int, default=3)


def _add_expected(sub) -> None:
    p = sub.add_parser("expected-rotations", help="mean random rotations to see N vertices")
    p.add_argument("--n", type=int, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cminmax", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for add in (_add_detect, _add_generate, _add_cone, _add_bench, _add_expected):
        add(sub)
    return parser


def _schedule_from_args(args, dim: int) -> ScheduleConfig:
    values: dict[str, str] = {}
    if args.config:
        values.update(read_config_values(args.config))
    values.setdefault("dim", str(dim))
    if int(values["dim"]) != dim:
        raise DimensionError(f"config dim {values['dim']} but the cloud is {dim}-D")
    flags = {
        "mode": args.mode, "phi_max_deg": args.phi_max_deg, "step_deg": args.step_deg,
        "count": args.count, "seed": args.seed, "safety_factor": args.safety, "shrink": args.shrink,
    }
    values.update({k: str(v) for k, v in flags.items() if v is not None})
    values.setdefault("safety_factor", str(CLOUD_SAFETY))
    if Mode.parse(values.get("mode", "det")) is Mode.ADAPTIVE:
        values.setdefault("phi_max_deg", str(ADAPTIVE_GUESS_DEG))
    return ScheduleConfig.from_mapping(values)


def cmd_detect(args) -> int:
    if args.input:
        cloud = read_cloud(args.input)
    else:
        cloud = image_to_cloud(args.image, args.threshold)
    if args.dim is not None and args.dim != cloud.dim:
        raise DimensionError(f"--dim {args.dim} but the cloud is {cloud.dim}-D")
    schedule = _schedule_from_args(args, cloud.dim)
    min_support = args.min_support if args.min_support is not None else (2 if args.noisy else 1)
    cfg = DetectorConfig(
        schedule,
        tie_tol=args.tie_tol,
        cluster_radius=args.cluster_radius,
        min_support=min_support,
        random_stop_patience=args.patience,
        harvest=Harvest(args.extremes),
        workers=args.threads,
        max_rotations=args.max_rotations,
    )
    corners = detect(cloud, cfg)
    text = corners_to_csv(corners)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    d = corners.diagnostics
    print(
        f"{len(corners)} corners, {d.rotations_total or d.rotations_executed} rotations, "
        f"{d.candidates_harvested} candidates, {d.ties_rejected} ties rejected",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_generate(args) -> int:
    kwargs = dict(radius=args.radius, edge=args.edge, seed=args.seed, path=args.path,
                  sampling=Sampling(args.sampling), points=args.points,
                  sampling_seed=args.sampling_seed, noise_sigma=args.noise)
    if args.n is not None:
        kwargs["n"] = args.n
    if args.shape == ShapeKind.FROM_FILE.value and not args.path:
        raise ConfigError("--shape file needs --path")
    spec = spec_from_name(args.shape, **kwargs)
    cloud, truth = generate(spec)
    if args.out.lower().endswith(".ply"):
        write_ply(cloud, args.out)
    else:
        write_cloud(cloud, args.out)
    if args.out_truth:
        write_cloud(truth, args.out_truth)
    log.info("wrote %d points, %d true vertices", cloud.n, truth.n)
    return EXIT_OK


def cmd_cone(args) -> int:
    rows = read_csv_cloud(args.input).points
    if len(rows) < 2:
        raise ConfigError("a fan needs an apex row and at least one neighbour")
    cone = min_bounding_cone(VertexFan.from_neighbors(rows[0], rows[1:]))
    print(f"omega = {math.degrees(cone.half_angle):.4f} deg")
    print(f"2omega = {cone.angle_deg:.4f} deg")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        rows = bench.SUITES[args.suite](args.repeats)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    bench.write_rows(rows, args.out)
    log.info("wrote %d rows to %s", len(rows), args.out)
    return EXIT_OK


def cmd_expected(args) -> int:
    print(f"{expected_random_rotations(args.n):.6g}")
    return EXIT_OK


COMMANDS = {
    "detect": cmd_detect,
    "generate": cmd_generate,
    "cone": cmd_cone,
    "bench": cmd_bench,
    "expected-rotations": cmd_expected,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CMinMaxError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def run() -> None:
    sys.exit(main())
