"""
Command-line front end.

Subcommands ``run``, ``beampattern``, ``sweep`` and ``ephemeris`` each read a
JSON scenario (``--config``) and write CSV files into ``--out``. Exit code 0
on success, 2 for an invalid scenario or arguments, 3 for a failure while
computing.
"""
from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .channel import beam_pattern, build_slots, direction_angles, station_wave_vectors
from .orbit import constellation_state, ground_station_ecef, make_time_grid, visibility_mask
from .scenario import ScenarioError, ScenarioSpec, parse_scenario, power_dbw, spec_hash, to_dict
from .solver import SCHEMES, optimize, to_db

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3


class UsageError(ValueError):
    pass


def fmt(x) -> str:
    """Deterministic float text: 12 significant digits, ``inf``/``-inf`` spelled out."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    return f"{x:.12g}"


def write_csv(path: Path, header, rows, sort_key=None) -> None:
    rows = sorted(rows, key=sort_key) if sort_key else list(rows)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def prepare(spec: ScenarioSpec):
    """Time grid and slot geometry for a scenario; grid warnings are returned, not raised."""
    shell, station = spec.shell(), spec.station()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        grid = make_time_grid(shell, spec.M)
    slots = build_slots(grid.midpoints, shell, station, spec.theta_u_rad, spec.phi_u0_rad)
    return grid, slots, [str(w.message) for w in caught]


def solve_scheme(spec: ScenarioSpec, scheme: str, slots=None):
    """Optimize one scheme; returns (result, captured warning messages)."""
    notes = []
    if slots is None:
        _, slots, notes = prepare(spec)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = optimize(slots, spec.station(), spec.solver(scheme))
    return result, notes + [str(w.message) for w in caught]


def _schemes(spec: ScenarioSpec, arg: str | None) -> tuple[str, ...]:
    if not arg:
        return spec.schemes
    names = tuple(s.strip() for s in arg.split(",") if s.strip())
    for s in names:
        if s not in SCHEMES:
            raise UsageError(f"--scheme: unknown scheme {s!r}; expected one of {SCHEMES}")
    return names


def _pool_map(fn, jobs, workers: int):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))


def _bundle(spec: ScenarioSpec, command: str, extra: dict) -> dict:
    return {
        "command": command,
        "version": __version__,
        "spec_hash": spec_hash(spec),
        "spec": to_dict(spec),
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        **extra,
    }


def cmd_run(spec: ScenarioSpec, out: Path, schemes, workers: int) -> dict:
    grid, slots, notes = prepare(spec)
    t0 = time.perf_counter()
    outcomes = _pool_map(solve_scheme, [(spec, s, slots) for s in schemes], workers)
    wall = time.perf_counter() - t0
    lam = spec.wavelength

    rates, trace, layout, gains, meta = [], [], [], [], {}
    for scheme, (res, msgs) in zip(schemes, outcomes):
        rates += [(m + 1, grid.midpoints[m], scheme, r) for m, r in enumerate(res.per_slot_rates)]
        trace += [(i, scheme, v) for i, v in enumerate(res.trace)]
        layout += [(scheme, n + 1, p[0] / lam, p[1] / lam) for n, p in enumerate(res.layout)]
        gains.append((scheme, to_db(res.desired_gain), to_db(res.interference_gain)))
        meta[scheme] = {
            "avg_rate": res.avg_rate,
            "iterations": res.iterations,
            "converged": res.converged,
            "unservable_slots": [m + 1 for m in res.unservable_slots],
            "timings_s": res.timings,
            "warnings": sorted(set(msgs)),
        }

    write_csv(out / "rates.csv", ("slot_index", "t_m", "scheme", "rate_bpshz"), rates, lambda r: (r[0], r[2]))
    write_csv(out / "trace.csv", ("iteration", "scheme", "avg_rate"), trace, lambda r: (r[1], r[0]))
    write_csv(out / "layout.csv", ("scheme", "antenna", "x_over_lambda", "y_over_lambda"), layout,
              lambda r: (r[0], r[1]))
    write_csv(out / "gains.csv", ("scheme", "desired_db", "interference_db"), gains, lambda r: r[0])
    bundle = _bundle(spec, "run", {"schemes": meta, "grid_warnings": notes, "wall_time_s": wall,
                                   "workers": workers})
    (out / "bundle.json").write_text(json.dumps(bundle, indent=2, sort_keys=True))
    return bundle


def parse_slots(arg: str, M: int) -> list[int]:
    try:
        slots = [int(s) for s in arg.split(",") if s.strip()]
    except ValueError as exc:
        raise UsageError(f"--slots: expected comma-separated integers, got {arg!r}") from exc
    if not slots:
        raise UsageError("--slots: at least one slot is required")
    for m in slots:
        if not 1 <= m <= M:
            raise UsageError(f"--slots: slot {m} outside 1..{M}")
    return sorted(set(slots))


def pattern_rows(spec: ScenarioSpec, slot, positions, w):
    """Grid rows plus one marker row per visible satellite, for a unit-norm `w`."""
    lam = spec.wavelength
    w = np.asarray(w, dtype=complex)
    w = w / np.linalg.norm(w)
    elev = np.arange(0.0, 90.0 + 1e-9, spec.elev_step)
    azim = np.arange(-180.0, 180.0 + 1e-9, spec.azim_step)
    E, A = np.meshgrid(elev, azim, indexing="ij")
    gains = beam_pattern(positions, w, station_wave_vectors(np.radians(E), np.radians(A), lam))
    rows = [(e, a, g, to_db(g), "") for e, a, g in zip(E.ravel(), A.ravel(), gains.ravel())]
    for role, link in [("serving", slot.serving)] + [("interferer", lk) for lk in slot.interferers]:
        el, az = direction_angles(link.a_eff, lam)
        g = float(beam_pattern(positions, w, link.a_eff[None, :])[0])
        rows.append((math.degrees(el), math.degrees(az), g, to_db(g), f"{role}:{link.sat.label}"))
    return rows


def cmd_beampattern(spec: ScenarioSpec, out: Path, schemes, slot_arg: str, workers: int) -> dict:
    chosen = parse_slots(slot_arg, spec.M)
    grid, slots, notes = prepare(spec)
    outcomes = _pool_map(solve_scheme, [(spec, s, slots) for s in schemes], workers)
    files, skipped = [], []
    header = ("elev_deg", "azim_deg", "gain_linear", "gain_db", "marker")
    for scheme, (res, _) in zip(schemes, outcomes):
        for m in chosen:
            slot = slots[m - 1]
            if not slot.servable:
                skipped.append(m)
                continue
            name = f"pattern_slot{m:04d}_{scheme}.csv"
            write_csv(out / name, header, pattern_rows(spec, slot, res.layout, res.weights[m - 1]),
                      lambda r: (r[0], r[1], r[4]))
            files.append(name)
    bundle = _bundle(spec, "beampattern", {"files": files, "unservable_slots": sorted(set(skipped)),
                                           "grid_warnings": notes})
    (out / "bundle.json").write_text(json.dumps(bundle, indent=2, sort_keys=True))
    return bundle


def sweep_points(spec: ScenarioSpec) -> list[ScenarioSpec]:
    """Cartesian product of the sweep axes applied to the base scenario."""
    axes = [(name, spec.sweep[name]) for name in ("N", "P_s", "theta_u", "KJ") if name in spec.sweep]
    points = []
    for combo in itertools.product(*(values for _, values in axes)):
        changes = {}
        for (name, _), value in zip(axes, combo):
            if name == "KJ":
                changes["K"], changes["J"] = value
            else:
                changes[name] = value
        points.append(spec.variant(sweep={}, **changes).validate())
    return points


def _sweep_job(point: ScenarioSpec, scheme: str):
    res, _ = solve_scheme(point, scheme)
    return (point.N, power_dbw(point.P_s), point.theta_u, point.K, point.J, scheme, res.avg_rate,
            res.iterations)


def cmd_sweep(spec: ScenarioSpec, out: Path, schemes, workers: int) -> dict:
    if not spec.sweep:
        raise ScenarioError("sweep", "scenario defines no sweep axes")
    points = sweep_points(spec)
    jobs = [(p, s) for p in points for s in schemes]
    rows = _pool_map(_sweep_job, jobs, workers)
    header = ("N", "P_s_dBW", "theta_u_deg", "K", "J", "scheme", "avg_rate", "iterations")
    write_csv(out / "sweep.csv", header, rows, lambda r: r[:6])
    bundle = _bundle(spec, "sweep", {"points": len(points), "rows": len(rows), "workers": workers})
    (out / "bundle.json").write_text(json.dumps(bundle, indent=2, sort_keys=True))
    return bundle


def cmd_ephemeris(spec: ScenarioSpec, out: Path) -> dict:
    shell = spec.shell()
    grid, slots, notes = prepare(spec)
    rows = []
    for m, (t, slot) in enumerate(zip(grid.midpoints, slots), start=1):
        ids, pos, alpha = constellation_state(shell, t)
        r_u = ground_station_ecef(shell, spec.theta_u_rad, t, spec.phi_u0_rad)
        visible = visibility_mask(shell, r_u, pos, alpha)
        roles = {lk.sat: "interferer" for lk in slot.interferers}
        if slot.servable:
            roles[slot.serving.sat] = "serving"
        for sat, p, v in zip(ids, pos, visible):
            rows.append((m, t, sat.j, sat.k, p[0], p[1], p[2], int(v), roles.get(sat, "")))
    header = ("slot_index", "t_m", "j", "k", "x_m", "y_m", "z_m", "visible", "role")
    write_csv(out / "ephemeris.csv", header, rows, lambda r: (r[0], r[2], r[3]))
    bundle = _bundle(spec, "ephemeris", {"grid_warnings": notes, "unservable_slots":
                                         [m + 1 for m, s in enumerate(slots) if not s.servable]})
    (out / "bundle.json").write_text(json.dumps(bundle, indent=2, sort_keys=True))
    return bundle


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="leoma", description=__doc__.strip().splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, schemes=True):
        p.add_argument("--config", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output directory (created if missing)")
        if schemes:
            p.add_argument("--scheme", help="comma-separated subset of MA,SFPA,DFPA")
            p.add_argument("--workers", type=int, default=1, help="worker processes")
        return p

    common(sub.add_parser("run", help="optimize every scheme over the time grid"))
    bp = common(sub.add_parser("beampattern", help="array gain over elevation and azimuth"))
    bp.add_argument("--slots", required=True, help="comma-separated 1-based slot indices")
    common(sub.add_parser("sweep", help="average rate over the scenario's sweep axes"))
    common(sub.add_parser("ephemeris", help="satellite positions and visibility per slot"), schemes=False)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    try:
        spec = parse_scenario(args.config)
        workers = getattr(args, "workers", 1)
        if workers < 1:
            raise UsageError(f"--workers must be at least 1, got {workers}")
        schemes = _schemes(spec, getattr(args, "scheme", None))
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "beampattern":
            parse_slots(args.slots, spec.M)
    except (ScenarioError, UsageError, OSError) as exc:
        print(f"leoma: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        if args.command == "run":
            cmd_run(spec, out, schemes, workers)
        elif args.command == "beampattern":
            cmd_beampattern(spec, out, schemes, args.slots, workers)
        elif args.command == "sweep":
            cmd_sweep(spec, out, schemes, workers)
        else:
            cmd_ephemeris(spec, out)
    except ScenarioError as exc:
        print(f"leoma: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"leoma: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
