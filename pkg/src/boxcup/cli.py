"""Command-line entry point for the relaxation-width pipeline.

Each figure-style output maps to one subcommand:

* ``gen-bounds``  write the hypergraph and random bound sets as JSON
* ``run``         full width pipeline: widths, differences, profile,
                  per-edge volumes, regressions
* ``volumes``     per-edge closed-form volumes only (no LP solves)
* ``profile``     recompute profile.csv from an existing widths.csv
* ``regress``     recompute regression.csv from widths.csv + volumes.csv
* ``worst-case``  the a3 sweep for a list of b3 values
* ``report``      print a summary and render figures from the CSVs

All randomness flows from one master seed through named substreams, and
numbers are serialized with 12 significant digits, so repeating a command
with the same seed and flags reproduces every output byte for byte, at
any thread count.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import experiment, figures, instances
from .seeding import substream_seed

__all__ = ["RunConfig", "execute", "emit_report", "main"]

WIDTHS_CSV = "widths.csv"
DIFFERENCES_CSV = "differences.csv"
PROFILE_CSV = "profile.csv"
VOLUMES_CSV = "volumes.csv"
REGRESSION_CSV = "regression.csv"
WORSTCASE_CSV = "worstcase.csv"
BOUNDS_JSON = "bounds.json"
HYPERGRAPH_JSON = "hypergraph.json"

_REPORT_REQUIRED = (WIDTHS_CSV, DIFFERENCES_CSV, PROFILE_CSV, VOLUMES_CSV, REGRESSION_CSV)


class CliError(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline invocation depends on."""

    scenario: str = "dense"
    bound_sets: int = 10
    directions: int = 5000
    seed: int = 0
    out_dir: str = "results"
    threads: int = 1
    volumes_only: bool = False
    b3_list: tuple[int, ...] = ()  # nonempty switches to worst-case mode

    def __post_init__(self) -> None:
        if self.scenario not in instances.SCENARIOS:
            raise CliError(f"unknown scenario {self.scenario!r}")
        if self.bound_sets < 1 or self.directions < 1 or self.threads < 1:
            raise CliError("counts and thread count must be at least 1")


def _fmt(value: float) -> str:
    return f"{value:.12g}"


def _write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _read_csv(path: Path) -> list[dict[str, str]]:
    if not path.is_file():
        raise CliError(f"missing {path.name} in {path.parent}")
    with open(path, newline="") as handle:
        try:
            return list(csv.DictReader(handle))
        except csv.Error as exc:
            raise CliError(f"corrupt {path.name}: {exc}") from exc


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _prepare_out_dir(out_dir: str) -> Path:
    path = Path(out_dir)
    try:
        path.mkdir(parents=True, exist_ok=True)
        probe = path / ".write-probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {out_dir!r} is not writable: {exc}") from exc
    return path


def _generate_bound_sets(h: instances.Hypergraph, config: RunConfig) -> list[instances.BoundsSet]:
    return [
        instances.gen_bounds(h.n, substream_seed(config.seed, f"bounds/{set_id}"))
        for set_id in range(config.bound_sets)
    ]


def _write_instance_files(
    out: Path, config: RunConfig, h: instances.Hypergraph, bound_sets
) -> None:
    payload = {"scenario": config.scenario}
    payload.update(h.to_json_dict())
    _write_json(out / HYPERGRAPH_JSON, payload)
    _write_json(
        out / BOUNDS_JSON,
        {
            "scenario": config.scenario,
            "seed": config.seed,
            "n": h.n,
            "bound_sets": [bs.to_json_dict() for bs in bound_sets],
        },
    )


def _write_widths(out: Path, records) -> None:
    _write_csv(
        out / WIDTHS_CSV,
        ["bound_set_id", "relaxation", "omega", "std_error"],
        [
            [str(r.bound_set_id), r.relaxation, _fmt(r.omega), _fmt(r.std_error)]
            for r in records
        ],
    )


def _write_differences(out: Path, rows) -> None:
    _write_csv(
        out / DIFFERENCES_CSV,
        ["bound_set_id", "d_h3", "d_23", "d_13", "sort_key"],
        [
            [str(r.bound_set_id), _fmt(r.d_h3), _fmt(r.d_23), _fmt(r.d_13), _fmt(r.sort_key)]
            for r in rows
        ],
    )


def _write_profile(out: Path, curve) -> None:
    _write_csv(
        out / PROFILE_CSV,
        ["tau", "frac_1", "frac_2", "frac_3"],
        [
            [
                _fmt(tau),
                _fmt(curve.fractions["1"][i]),
                _fmt(curve.fractions["2"][i]),
                _fmt(curve.fractions["3"][i]),
            ]
            for i, tau in enumerate(curve.tau)
        ],
    )


def _write_volumes(out: Path, vol_rows) -> None:
    _write_csv(
        out / VOLUMES_CSV,
        ["bound_set_id", "edge_id", "vol_h", "vol_1", "vol_2", "vol_3"],
        [
            [str(set_id), str(edge_id), _fmt(vh), _fmt(v1), _fmt(v2), _fmt(v3)]
            for set_id, edge_id, vh, v1, v2, v3 in vol_rows
        ],
    )


def _write_regressions(out: Path, series) -> None:
    _write_csv(
        out / REGRESSION_CSV,
        ["series", "slope", "intercept", "r2"],
        [
            [
                name,
                _fmt(fit.slope),
                _fmt(fit.intercept),
                "undefined" if fit.r_squared is None else _fmt(fit.r_squared),
            ]
            for name, fit in series
        ],
    )


def _write_worstcase(out: Path, rows) -> None:
    _write_csv(
        out / WORSTCASE_CSV,
        ["b3", "a3", "omega_1", "omega_2", "omega_3", "d_23", "d_21"],
        [
            [
                str(r.b3),
                str(r.a3),
                _fmt(r.omega_1),
                _fmt(r.omega_2),
                _fmt(r.omega_3),
                _fmt(r.d_23),
                _fmt(r.d_21),
            ]
            for r in rows
        ],
    )


def execute(config: RunConfig) -> int:
    """Run one pipeline mode and write its artifact files.

    Full mode writes bounds.json, hypergraph.json, widths.csv,
    differences.csv, profile.csv, volumes.csv and regression.csv;
    volumes-only mode stops after volumes.csv; a nonempty b3 list ignores
    the scenario and writes worstcase.csv instead.
    """
    out = _prepare_out_dir(config.out_dir)

    if config.b3_list:
        rows = []
        for b3 in config.b3_list:
            rows.extend(
                experiment.worst_case_sweep(b3, config.directions, config.seed, config.threads)
            )
        _write_worstcase(out, rows)
        return 0

    h = instances.make_hypergraph(config.scenario)
    bound_sets = _generate_bound_sets(h, config)
    _write_instance_files(out, config, h, bound_sets)

    vol_rows = experiment.per_edge_volume_table(h, bound_sets)
    _write_volumes(out, vol_rows)
    if config.volumes_only:
        return 0

    directions = instances.gen_directions(
        len(h.edges), config.directions, substream_seed(config.seed, "directions")
    )
    records = experiment.make_width_records(h, bound_sets, directions, config.threads)
    _write_widths(out, records)
    _write_differences(out, experiment.width_difference_report(records))
    _write_profile(out, experiment.performance_profile(records))
    radii = experiment.radii_from_volume_table(vol_rows)
    omegas = {
        rel: np.array(
            [per[rel] for _, per in sorted(experiment.omega_table(records).items())]
        )
        for rel in instances.RELAXATIONS
    }
    _write_regressions(out, experiment.regressions_from_radii(radii, omegas))
    return 0


def _load_omegas(out: Path) -> tuple[list[int], dict[str, np.ndarray]]:
    rows = _read_csv(out / WIDTHS_CSV)
    table: dict[int, dict[str, float]] = {}
    for row in rows:
        table.setdefault(int(row["bound_set_id"]), {})[row["relaxation"]] = float(row["omega"])
    set_ids = sorted(table)
    omegas = {
        rel: np.array([table[i][rel] for i in set_ids]) for rel in instances.RELAXATIONS
    }
    return set_ids, omegas


def _records_from_widths_csv(out: Path) -> list[experiment.WidthRecord]:
    return [
        experiment.WidthRecord(
            bound_set_id=int(row["bound_set_id"]),
            relaxation=row["relaxation"],
            omega=float(row["omega"]),
            std_error=float(row["std_error"]),
        )
        for row in _read_csv(out / WIDTHS_CSV)
    ]


def _volume_rows_from_csv(out: Path) -> list[tuple[int, int, float, float, float, float]]:
    return [
        (
            int(row["bound_set_id"]),
            int(row["edge_id"]),
            float(row["vol_h"]),
            float(row["vol_1"]),
            float(row["vol_2"]),
            float(row["vol_3"]),
        )
        for row in _read_csv(out / VOLUMES_CSV)
    ]


def emit_report(out_dir: str, render_figures: bool = True) -> str:
    """Summarize a results directory; optionally render figures next to it.

    Reads only; the summary is a pure function of the CSV contents.
    """
    out = Path(out_dir)
    for name in _REPORT_REQUIRED:
        if not (out / name).is_file():
            raise CliError(f"missing {name} in {out_dir}")

    lines: list[str] = [f"results directory: {out_dir}"]

    diff_rows = _read_csv(out / DIFFERENCES_CSV)
    n = len(diff_rows)
    hull_viol = sum(1 for r in diff_rows if float(r["d_h3"]) > 1e-9)
    d23_neg = sum(1 for r in diff_rows if float(r["d_23"]) < 0.0)
    d13_lt_d23 = sum(1 for r in diff_rows if float(r["d_13"]) < float(r["d_23"]))
    lines.append("== width ordering ==")
    lines.append(f"bound sets: {n}")
    lines.append(f"hull wider than system 3 (omega_h - omega_3 > 1e-9): {hull_viol} of {n}")
    lines.append(f"system 2 beat system 3 (omega_2 - omega_3 < 0): {d23_neg} of {n}")
    lines.append(f"system 1 beat system 2 (d_13 < d_23): {d13_lt_d23} of {n}")

    vol_rows = _volume_rows_from_csv(out)
    vol_viol = sum(
        1 for _, _, vh, v1, v2, v3 in vol_rows if not (vh <= v3 <= v2 <= v1)
    )
    lines.append("== volume ordering ==")
    lines.append(
        f"violations of vol_h <= vol_3 <= vol_2 <= vol_1: {vol_viol} of {len(vol_rows)} edge rows"
    )

    reg_rows = _read_csv(out / REGRESSION_CSV)
    lines.append("== regressions (R^2) ==")
    for row in reg_rows:
        lines.append(f"{row['series']}: {row['r2']}")

    worst_path = out / WORSTCASE_CSV
    worst_blocks: dict[int, list[dict[str, str]]] = {}
    if worst_path.is_file():
        for row in _read_csv(worst_path):
            worst_blocks.setdefault(int(row["b3"]), []).append(row)
        lines.append("== worst-case peaks ==")
        for b3 in sorted(worst_blocks):
            block = worst_blocks[b3]
            peak = max(block, key=lambda r: float(r["d_23"]))
            lines.append(
                f"b3 = {b3}: peak omega_2 - omega_3 = {peak['d_23']} at a3 = {peak['a3']}"
                f" (b3/3 = {_fmt(b3 / 3)})"
            )

    if render_figures:
        lines.append("== figures ==")
        lines.extend(_render_figures(out, diff_rows, reg_rows, worst_blocks))

    return "\n".join(lines) + "\n"


def _render_figures(out: Path, diff_rows, reg_rows, worst_blocks) -> list[str]:
    written: list[Path] = []
    written.append(
        figures.save_differences_figure(
            np.array([float(r["d_h3"]) for r in diff_rows]),
            np.array([float(r["d_23"]) for r in diff_rows]),
            np.array([float(r["d_13"]) for r in diff_rows]),
            out / "differences.png",
        )
    )
    prof_rows = _read_csv(out / PROFILE_CSV)
    written.append(
        figures.save_profile_figure(
            np.array([float(r["tau"]) for r in prof_rows]),
            {
                rel: np.array([float(r[f"frac_{rel}"]) for r in prof_rows])
                for rel in ("1", "2", "3")
            },
            out / "profile.png",
        )
    )

    _, omegas = _load_omegas(out)
    radii = experiment.radii_from_volume_table(_volume_rows_from_csv(out))
    fits = {}
    for row in reg_rows:
        r2 = None if row["r2"] == "undefined" else float(row["r2"])
        fits[row["series"]] = (float(row["slope"]), float(row["intercept"]), r2)
    written.append(
        figures.save_radius_width_figure(
            {rel: (radii[rel], omegas[rel]) for rel in instances.RELAXATIONS},
            {rel: fits[f"radius_{rel}"] for rel in instances.RELAXATIONS},
            out / "radius_width.png",
        )
    )
    written.append(
        figures.save_pair_distance_figure(
            {
                rel: (radii[rel] - radii["h"], omegas[rel] - omegas["h"])
                for rel in ("3", "2", "1")
            },
            {rel: fits[f"pair_{rel}h"] for rel in ("3", "2", "1")},
            out / "pair_distance.png",
        )
    )
    for b3, block in sorted(worst_blocks.items()):
        written.append(
            figures.save_worstcase_figure(
                b3,
                np.array([int(r["a3"]) for r in block]),
                np.array([float(r["d_23"]) for r in block]),
                np.array([float(r["d_21"]) for r in block]),
                out / f"worstcase_b{b3}.png",
            )
        )
    return [f"wrote {p.name}" for p in written]


def _default_threads() -> int:
    env = os.environ.get("BOXCUP_THREADS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _add_common(parser: argparse.ArgumentParser, *, scenario=False, counts=False) -> None:
    if scenario:
        parser.add_argument(
            "--scenario", choices=instances.SCENARIOS, default="dense",
            help="hypergraph scenario (default: dense)",
        )
        parser.add_argument(
            "--bound-sets", type=int, default=10, metavar="N",
            help="number of random bound sets (default: 10)",
        )
    if counts:
        parser.add_argument(
            "--directions", type=int, default=5000, metavar="N",
            help="number of unit objective directions (default: 5000)",
        )
        parser.add_argument(
            "--threads", type=int, default=None, metavar="N",
            help="worker processes (default: BOXCUP_THREADS or all cores)",
        )
    parser.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
    parser.add_argument(
        "--out", default="results", metavar="DIR", help="output directory (default: results)"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boxcup",
        description="Compare the hull and double-McCormick relaxations of "
        "box-constrained trinomial programs by volume and LP width.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-bounds", help="write hypergraph.json and bounds.json")
    _add_common(p, scenario=True)

    p = sub.add_parser("run", help="full width pipeline for one scenario")
    _add_common(p, scenario=True, counts=True)
    p.add_argument(
        "--paper-scale", action="store_true",
        help="use 30 bound sets and 100000 directions (long-running)",
    )

    p = sub.add_parser("volumes", help="per-edge closed-form volumes only")
    _add_common(p, scenario=True)

    p = sub.add_parser("profile", help="recompute profile.csv from widths.csv")
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--tau-points", type=int, default=200, metavar="N")

    p = sub.add_parser("regress", help="recompute regression.csv from widths + volumes")
    p.add_argument("--out", default="results", metavar="DIR")

    p = sub.add_parser("worst-case", help="a3 sweep with vertices 1..5 on [0,1]")
    p.add_argument(
        "--b3", default="30,60", metavar="LIST",
        help="comma-separated b3 values (default: 30,60)",
    )
    p.add_argument("--directions", type=int, default=5000, metavar="N")
    p.add_argument("--threads", type=int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="results", metavar="DIR")

    p = sub.add_parser("report", help="summarize a results directory and render figures")
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--no-figures", action="store_true", help="text summary only")
    return parser


def _dispatch(args: argparse.Namespace) -> int:
    threads = getattr(args, "threads", None)
    threads = _default_threads() if threads is None else max(1, threads)

    if args.command == "gen-bounds":
        config = RunConfig(
            scenario=args.scenario, bound_sets=args.bound_sets, seed=args.seed,
            out_dir=args.out,
        )
        out = _prepare_out_dir(config.out_dir)
        h = instances.make_hypergraph(config.scenario)
        _write_instance_files(out, config, h, _generate_bound_sets(h, config))
        return 0

    if args.command == "run":
        bound_sets, directions = args.bound_sets, args.directions
        if args.paper_scale:
            bound_sets, directions = 30, 100_000
        return execute(
            RunConfig(
                scenario=args.scenario, bound_sets=bound_sets, directions=directions,
                seed=args.seed, out_dir=args.out, threads=threads,
            )
        )

    if args.command == "volumes":
        return execute(
            RunConfig(
                scenario=args.scenario, bound_sets=args.bound_sets, seed=args.seed,
                out_dir=args.out, volumes_only=True,
            )
        )

    if args.command == "profile":
        out = Path(args.out)
        records = _records_from_widths_csv(out)
        curve = experiment.performance_profile(
            records, experiment.default_tau_grid(args.tau_points)
        )
        _write_profile(out, curve)
        return 0

    if args.command == "regress":
        out = Path(args.out)
        _, omegas = _load_omegas(out)
        radii = experiment.radii_from_volume_table(_volume_rows_from_csv(out))
        _write_regressions(out, experiment.regressions_from_radii(radii, omegas))
        return 0

    if args.command == "worst-case":
        try:
            b3_list = tuple(int(tok) for tok in args.b3.split(",") if tok.strip())
        except ValueError as exc:
            raise CliError(f"bad --b3 list {args.b3!r}: {exc}") from exc
        if not b3_list:
            raise CliError("--b3 list is empty")
        return execute(
            RunConfig(
                directions=args.directions, seed=args.seed, out_dir=args.out,
                threads=threads, b3_list=b3_list,
            )
        )

    if args.command == "report":
        sys.stdout.write(emit_report(args.out, render_figures=not args.no_figures))
        return 0

    raise CliError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (CliError, ValueError, OSError) as exc:
        print(f"boxcup: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
