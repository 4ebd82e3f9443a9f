"""Command-line front end.

Subcommands: search, simulate, sweep, cascade, reftable.  Lengths are
given in millimeters and phases in units of pi on the command line;
everything is converted to SI once at parse time.  Exit codes: 0
success, 1 invalid input, 2 empty or failed search, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace
from pathlib import Path

from .beam import BeamParameter, SingularPropagationError, accumulate_gouy, OpticalPath, wrap_phase
from .cascade import AnalyticStage, CascadeNode, four_channel_tree, route, routing_matrix, write_routing_csv
from .interferometer import (
    ArmLengthMismatchError,
    InterferometerConfig,
    MisalignmentSpec,
    calibrate_ref_phase,
    simulate_port_fields,
    visibility_sweep,
    write_sweep_csv,
)
from .modes import (
    LGMode,
    QuadratureError,
    Superposition,
    intensity_grid,
    write_intensity_csv,
    write_intensity_pgm,
)
from .reference import REFERENCE_ROWS, REFERENCE_WAIST, REFERENCE_WAVELENGTH
from .search import (
    ConfigurationRecord,
    LensCatalog,
    SearchRequest,
    evaluate_configuration,
    search,
    solve_all_distances,
    write_results_csv,
)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_EMPTY = 2
EXIT_NUMERICAL = 3


class CliError(Exception):
    """Invalid command-line input."""


def _beam_from_args(args) -> BeamParameter:
    if args.w0_mm <= 0 or args.lambda_nm <= 0:
        raise CliError("waist and wavelength must be positive")
    return BeamParameter.from_waist(
        args.w0_mm * 1e-3, args.lambda_nm * 1e-9, z=getattr(args, "z_mm", 0.0) * 1e-3
    )


def _add_beam_flags(parser) -> None:
    parser.add_argument("--w0-mm", type=float, default=1.0, help="input waist radius, mm")
    parser.add_argument("--lambda-nm", type=float, default=810.0, help="wavelength, nm")
    parser.add_argument(
        "--z-mm", type=float, default=0.0,
        help="entry-plane z relative to the waist, mm (negative before the waist)",
    )


def _parse_lens_system(args) -> tuple[float, float, float, float, float]:
    lenses = [float(v) for v in args.lenses.split(",")]
    distances = [float(v) for v in args.distances.split(",")]
    if len(lenses) != 3 or len(distances) != 2:
        raise CliError("expected --lenses f1,f2,f3 and --distances d1,d2 (mm)")
    f1, f2, f3 = (v * 1e-3 for v in lenses)
    d1, d2 = (v * 1e-3 for v in distances)
    if d1 <= 0 or d2 <= 0:
        raise CliError("distances must be positive")
    if 0.0 in (f1, f2, f3):
        raise CliError("focal lengths must be nonzero")
    return f1, d1, f2, d2, f3


def _parse_modes(text: str) -> list[LGMode]:
    """Semicolon-separated p,l pairs, e.g. '0,0;1,0;2,2'."""
    modes = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(",")
        if len(parts) != 2:
            raise CliError(f"bad mode spec {chunk!r}; expected 'p,l'")
        try:
            p, l = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise CliError(f"bad mode spec {chunk!r}: {exc}") from exc
        if p < 0:
            raise CliError(f"radial index must be non-negative in {chunk!r}")
        modes.append(LGMode(p, l))
    if not modes:
        raise CliError("no modes given")
    return modes


def _parse_superposition(text: str) -> Superposition:
    """Terms like '(2,0)+(0,2)', equal weights."""
    terms = []
    for chunk in text.replace(" ", "").split("+"):
        if not (chunk.startswith("(") and chunk.endswith(")")):
            raise CliError(f"bad superposition term {chunk!r}; expected '(p,l)'")
        p_text, l_text = chunk[1:-1].split(",")
        terms.append(LGMode(int(p_text), int(l_text)))
    return Superposition(tuple(terms))


def _provenance(args, extra: list[str] = ()) -> list[str]:
    skip = {"func", "out"}
    flags = ", ".join(
        f"{key}={value}" for key, value in sorted(vars(args).items())
        if key not in skip and not callable(value)
    )
    return [f"parameters: {flags}", *extra]


def cmd_search(args) -> int:
    beam = _beam_from_args(args)
    catalog = LensCatalog.from_file(args.catalog) if args.catalog else LensCatalog()
    if len(catalog) == 0:
        print("search: catalog is empty", file=sys.stderr)
        return EXIT_EMPTY
    request = SearchRequest(
        targetN=args.target_n,
        qIn=beam,
        catalog=catalog,
        phaseTolerance=args.phase_tol * math.pi,
        maxResidual=args.max_residual_m,
        maxResults=args.max_results,
    )
    records = search(request)
    if not records:
        print("search: no configuration found", file=sys.stderr)
        return EXIT_EMPTY
    write_results_csv(args.out, records, _provenance(args))
    print(f"search: {len(records)} configuration(s) written to {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    f1, d1, f2, d2, f3 = _parse_lens_system(args)
    beam = _beam_from_args(args)
    cfg = InterferometerConfig.three_lens(
        f1, d1, f2, d2, f3, beam, refPhase=args.ref_phase_pi * math.pi
    )
    if args.calibrate:
        target = _parse_modes(args.calibrate)[0]
        cfg = replace(cfg, refPhase=calibrate_ref_phase(cfg, target))
    if args.superposition:
        modes = [LGMode(t.p, t.l) for t in _parse_superposition(args.superposition).terms]
    else:
        modes = _parse_modes(args.modes)
    rows = [(mode, simulate_port_fields(cfg, mode)) for mode in modes]
    write_sweep_csv(args.out, rows, _provenance(args))
    if args.images:
        image_dir = Path(args.images)
        image_dir.mkdir(parents=True, exist_ok=True)
        _write_port_images(cfg, modes, image_dir)
    print(f"simulate: {len(rows)} mode(s) written to {args.out}")
    return EXIT_OK


def _write_port_images(cfg: InterferometerConfig, modes, image_dir: Path, samples: int = 128) -> None:
    """Intensity of each mode after each arm, as CSV matrix and graymap."""
    for mode in modes:
        for arm_name, arm in (("armA", cfg.armA), ("armB", cfg.armB)):
            result = accumulate_gouy(cfg.qIn, arm)
            extent = 3.0 * result.qOut.waist_radius_at_plane * math.sqrt(mode.order)
            grid = intensity_grid(Superposition((mode,)), result.qOut, extent, samples)
            stem = f"p{mode.p}_l{mode.l}_{arm_name}"
            write_intensity_csv(image_dir / f"{stem}.csv", grid, extent)
            write_intensity_pgm(image_dir / f"{stem}.pgm", grid, extent)


def cmd_sweep(args) -> int:
    f1, d1, f2, d2, f3 = _parse_lens_system(args)
    beam = _beam_from_args(args)
    cfg = InterferometerConfig.three_lens(f1, d1, f2, d2, f3, beam)
    calibration = _parse_modes(args.calibrate)[0]
    mis = MisalignmentSpec(
        w0Actual=args.w0_actual_mm * 1e-3,
        zOffset=args.z_offset_mm * 1e-3,
        d1Error=args.d1_error_mm * 1e-3,
        d2Error=args.d2_error_mm * 1e-3,
        calibrationMode=calibration,
    )
    modes = _parse_modes(args.modes)
    results = visibility_sweep(cfg, mis, modes)
    with open(args.out, "w") as fh:
        for line in _provenance(args):
            fh.write(f"# {line}\n")
        fh.write("p,ell,m,visibility\n")
        for mode, visibility in results:
            fh.write(f"{mode.p},{mode.l},{mode.order},{visibility:.8g}\n")
    print(f"sweep: {len(results)} mode(s) written to {args.out}")
    return EXIT_OK


def _tree_from_json(node) -> CascadeNode:
    if node is None or node == {}:
        return CascadeNode()
    if "delta_gouy_pi" not in node:
        raise CliError("cascade node missing 'delta_gouy_pi'")
    stage = AnalyticStage(
        deltaGouy=float(node["delta_gouy_pi"]) * math.pi,
        refPhase=float(node.get("ref_phase_pi", 0.0)) * math.pi,
    )
    return CascadeNode(
        sorter=stage,
        port1=_tree_from_json(node["port1"]) if node.get("port1") else None,
        port2=_tree_from_json(node["port2"]) if node.get("port2") else None,
    )


def cmd_cascade(args) -> int:
    if args.tree:
        with open(args.tree) as fh:
            tree = _tree_from_json(json.load(fh))
    else:
        tree = four_channel_tree()
    modes = _parse_modes(args.modes)
    matrix = routing_matrix(tree, modes)
    write_routing_csv(args.out, modes, matrix, _provenance(args))
    print(f"cascade: {len(modes)} mode(s) routed over {tree.n_channels} channel(s), written to {args.out}")
    return EXIT_OK


def cmd_reftable(args) -> int:
    """Re-derive every reference configuration and compare line by line."""
    beam = BeamParameter.from_waist(REFERENCE_WAIST, REFERENCE_WAVELENGTH)
    records = []
    all_ok = True
    for row in REFERENCE_ROWS:
        f1, f2, f3 = (v * 1e-3 for v in row.lenses_mm)
        d1_ref, d2_ref = (v * 1e-3 for v in row.distances_mm)
        roots = solve_all_distances(f1, f2, f3, beam)
        # a triple can have several q-match roots; compare the nearest one
        solved = min(
            roots,
            key=lambda r: math.hypot(r[0] - d1_ref, r[1] - d2_ref),
            default=None,
        )
        record = ConfigurationRecord(
            f1=f1, f2=f2, f3=f3, d1=d1_ref, d2=d2_ref, nHigh=row.n
        )
        record = evaluate_configuration(record, beam)
        records.append(record)
        phase_err = abs(record.deltaGouy / math.pi - row.delta_gouy_over_pi)
        vis0_err = abs(record.visP0 * 100 - row.vis_p0_percent)
        visn_err = abs(record.visPn * 100 - row.vis_pn_percent)
        if solved is None:
            dist_text = "no solution"
            dist_ok = False
        else:
            d1_mm, d2_mm = solved[0] * 1e3, solved[1] * 1e3
            dist_ok = abs(d1_mm - row.distances_mm[0]) <= 2.0 and abs(d2_mm - row.distances_mm[1]) <= 2.0
            dist_text = f"solved D1/D2 = {d1_mm:7.1f}/{d2_mm:7.1f} mm"
        phase_ok = phase_err <= 0.002
        vis_ok = vis0_err <= 1.0 and visn_err <= 1.0
        ok = phase_ok and dist_ok and vis_ok
        all_ok &= ok
        print(
            f"n={row.n}: phase {record.deltaGouy / math.pi:+.3f}pi (ref {row.delta_gouy_over_pi:+.3f}pi) "
            f"[{'ok' if phase_ok else 'FAIL'}]  {dist_text} (ref {row.distances_mm[0]}/{row.distances_mm[1]}) "
            f"[{'ok' if dist_ok else 'FAIL'}]  vis {record.visP0 * 100:.2f}/{record.visPn * 100:.2f}% "
            f"(ref {row.vis_p0_percent}/{row.vis_pn_percent}) [{'ok' if vis_ok else 'FAIL'}]"
        )
    if args.out:
        write_results_csv(args.out, records, _provenance(args))
    print("reftable:", "all rows agree" if all_ok else "disagreements found (see FAIL markers)")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gouysort",
        description="Gouy-phase radial-mode sorter: simulation and lens-system search",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_search = sub.add_parser("search", help="search the lens catalog for a pi/n phase target")
    p_search.add_argument("--target-n", type=int, required=True, help="target phase pi/n, n >= 2")
    p_search.add_argument("--catalog", help="focal-length list, mm, one per line, '#' comments")
    p_search.add_argument("--phase-tol", type=float, default=0.01, help="phase tolerance, units of pi")
    p_search.add_argument("--max-residual-m", type=float, default=1e-4, help="max |q| mismatch, m")
    p_search.add_argument("--max-results", type=int, default=20)
    p_search.add_argument("--out", default="search_results.csv")
    _add_beam_flags(p_search)
    p_search.set_defaults(func=cmd_search)

    p_sim = sub.add_parser("simulate", help="simulate one interferometer configuration")
    p_sim.add_argument("--lenses", required=True, help="f1,f2,f3 in mm")
    p_sim.add_argument("--distances", required=True, help="d1,d2 in mm")
    p_sim.add_argument("--modes", default="0,0", help="semicolon-separated p,l pairs")
    p_sim.add_argument("--superposition", help="equal-weight terms, e.g. '(2,0)+(0,2)'")
    p_sim.add_argument("--ref-phase-pi", type=float, default=0.0)
    p_sim.add_argument("--calibrate", help="calibrate reference phase on this p,l mode")
    p_sim.add_argument("--images", help="directory for per-port intensity images")
    p_sim.add_argument("--out", default="simulate_results.csv")
    _add_beam_flags(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="visibility sweep under misalignment")
    p_sweep.add_argument("--lenses", required=True)
    p_sweep.add_argument("--distances", required=True)
    p_sweep.add_argument("--modes", default="0,0;1,0;2,0;3,0")
    p_sweep.add_argument("--w0-actual-mm", type=float, required=True)
    p_sweep.add_argument("--z-offset-mm", type=float, default=0.0)
    p_sweep.add_argument("--d1-error-mm", type=float, default=0.0)
    p_sweep.add_argument("--d2-error-mm", type=float, default=0.0)
    p_sweep.add_argument("--calibrate", default="2,0")
    p_sweep.add_argument("--out", default="sweep_results.csv")
    _add_beam_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cascade = sub.add_parser("cascade", help="route modes through a sorter tree")
    p_cascade.add_argument("--tree", help="JSON tree file; omit for the built-in p=0..3 tree")
    p_cascade.add_argument("--modes", default="0,0;1,0;2,0;3,0")
    p_cascade.add_argument("--out", default="routing_matrix.csv")
    p_cascade.set_defaults(func=cmd_cascade)

    p_table = sub.add_parser("reftable", help="compare against the published configuration table")
    p_table.add_argument("--out", help="optional CSV output")
    p_table.set_defaults(func=cmd_reftable)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (CliError, ValueError, ArmLengthMismatchError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    except (QuadratureError, SingularPropagationError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
