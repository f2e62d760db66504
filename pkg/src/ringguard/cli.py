"""Command-line client for the simulator service layer.

Commands:
    run        execute a scenario headless, write the log and metrics
    serve      host a realtime teleoperation scenario over HTTP/WebSocket
    calibrate  size a ring for a target diameter band

Exit codes: 0 success, 2 validation failure, 3 runtime fault.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import RingDefinitionError, ScenarioValidationError
from .scenario import load_scenario

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3


def _cmd_run(args: argparse.Namespace) -> int:
    from .engine import EventLog
    from .service.app import run_scenario
    from .service.schemas import RunRequest

    try:
        doc = json.loads(Path(args.scenario).read_text())
    except FileNotFoundError:
        print(f"scenario file not found: {args.scenario}", file=sys.stderr)
        return EXIT_VALIDATION
    except json.JSONDecodeError as exc:
        print(f"scenario is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    request = RunRequest(scenario=doc, seed=args.seed, duration_s=args.duration)
    try:
        response = run_scenario(request)
    except ScenarioValidationError as exc:
        print("scenario validation failed:", file=sys.stderr)
        for problem in exc.problems:
            print(f"  - {problem}", file=sys.stderr)
        return EXIT_VALIDATION

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "events.jsonl").write_bytes(response.events_jsonl.encode())
    (out / "metrics.json").write_text(
        json.dumps(response.metrics.model_dump(), indent=2, sort_keys=True) + "\n"
    )
    log = EventLog.from_jsonl(response.events_jsonl.encode())
    (out / "telemetry.csv").write_text(log.telemetry_csv())

    m = response.metrics
    print(f"scenario: {doc.get('name', 'scenario')}")
    print(f"records:  {response.record_count}")
    print(f"outcome:  {m.mission_outcome}")
    print(f"peak contact force: {m.peak_contact_force_n:.3f} N over {m.contact_count} contacts")
    if m.expansion_latency_s is not None:
        print(f"expansion latency:  {m.expansion_latency_s:.3f} s")
    print(f"wrote {out / 'events.jsonl'}, metrics.json, telemetry.csv")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service.app import serve_realtime

    try:
        scenario = load_scenario(args.scenario)
    except (ScenarioValidationError, FileNotFoundError) as exc:
        print(f"cannot serve: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    try:
        serve_realtime(scenario, port=args.port, host=args.host, timescale=args.timescale)
    except ScenarioValidationError as exc:
        print(f"cannot serve: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def _cmd_calibrate(args: argparse.Namespace) -> int:
    from .service.app import calibrate
    from .service.schemas import CalibrateRequest

    try:
        response = calibrate(
            CalibrateRequest(
                units=args.units,
                target_max_diameter_m=args.target_max_diameter,
                collapsed_diameter_m=args.min_diameter,
            )
        )
    except (RingDefinitionError, ValueError) as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.json:
        print(json.dumps(response.model_dump(), indent=2, sort_keys=True))
    else:
        print(f"units:            {response.units}")
        print(f"segment length:   {response.segment_length_m * 1000:.3f} mm")
        print(f"kink angle:       {response.kink_angle_deg:.4f} deg")
        print(
            "outer diameter:   "
            f"{2 * response.outer_radius_band_m[0] * 100:.1f} cm .. "
            f"{2 * response.outer_radius_band_m[1] * 100:.1f} cm"
        )
        print(f"rack stroke:      {response.rack_stroke_m * 1000:.1f} mm")
        print(
            f"deployment angle: {response.theta_min_rad:.6f} .. "
            f"{response.theta_max_rad:.6f} rad"
        )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ringguard",
        description="Simulator for an aerial robot with an expandable scissor-ring guard",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario headless")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument("--out", required=True, help="output directory")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument(
        "--duration", type=float, default=None, help="override the duration in seconds"
    )
    run_p.set_defaults(func=_cmd_run)

    serve_p = sub.add_parser("serve", help="serve a realtime teleop scenario")
    serve_p.add_argument("--scenario", required=True)
    serve_p.add_argument("--port", type=int, required=True)
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--timescale", type=float, default=1.0)
    serve_p.set_defaults(func=_cmd_serve)

    cal_p = sub.add_parser("calibrate", help="size a ring for a diameter band")
    cal_p.add_argument("--target-max-diameter", type=float, default=0.85)
    cal_p.add_argument("--min-diameter", type=float, default=0.52)
    cal_p.add_argument("--units", type=int, default=16)
    cal_p.add_argument("--json", action="store_true", help="machine-readable output")
    cal_p.set_defaults(func=_cmd_calibrate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # runtime fault: anything past validation
        print(f"runtime fault: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
