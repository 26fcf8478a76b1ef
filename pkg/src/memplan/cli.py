"""Command-line interface.

Subcommands cover the whole offline workflow: ``generate`` synthetic
profiles, ``scale`` profiles to a new workload size, ``plan`` a static
placement, ``migrate`` after an energy-requirement change, ``evaluate``
and ``compare`` placements, and ``sweep`` ratios across capacity
configurations. Outputs are plain data files (csv/json or the plan text
formats) and are byte-identical across runs for identical inputs.

Exit codes: 0 success, 1 usage or input error, 2 infeasible plan (the
artifact is still written so sweeps and scripts can branch on it).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .baselines import (place_all_dram, place_all_nvm, place_mpki_threshold,
                        place_random)
from .energy import GIB, DeviceSpec, PRESETS, load_device_spec
from .evaluator import (comparison_csv, comparison_json, compare, evaluate,
                        report_csv, report_json)
from .migration import MigrationRequest, plan_migration, write_migration_plan
from .planner import (CapacityError, PlacementPlan, load_plan, plan_static,
                      sweep_ratios, write_plan)
from .profiles import (DEFAULT_MAJOR_THRESHOLD, GeneratorSpec, ProfileError,
                       derive_scaling_vector, extrapolate, generate_synthetic,
                       load_profile_dir, load_profiles, write_profiles)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default; 2 is reserved for
    # infeasible plans here.
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_device_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("device")
    group.add_argument("--device", help="device spec JSON file")
    group.add_argument("--preset", choices=sorted(PRESETS),
                       help="bundled device preset")
    group.add_argument("--dram-capacity-gib", type=float,
                       help="override DRAM capacity (GiB)")
    group.add_argument("--nvm-capacity-gib", type=float,
                       help="override NVM capacity (GiB)")


def _device_from_args(args) -> DeviceSpec:
    if args.device and args.preset:
        raise ValueError("give either --device or --preset, not both")
    if args.device:
        dev = load_device_spec(args.device)
    elif args.preset:
        dev = PRESETS[args.preset]()
    else:
        dev = DeviceSpec()
    if args.dram_capacity_gib is not None:
        dev = replace(dev, dram_capacity=args.dram_capacity_gib * GIB)
    if args.nvm_capacity_gib is not None:
        dev = replace(dev, nvm_capacity=args.nvm_capacity_gib * GIB)
    return dev


def _add_planning_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--major-threshold", type=float,
                        default=DEFAULT_MAJOR_THRESHOLD,
                        help="accessed-volume bound (bytes) below which "
                             "objects are pinned to DRAM")
    parser.add_argument("--reserved-dram", type=float, default=0.0,
                        help="DRAM bytes set aside for code/stack")
    parser.add_argument("--include-minor-energy", action="store_true",
                        help="count minor-object DRAM energy on both sides "
                             "of the budget")


def _parse_float_list(text: str, option: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ValueError(f"{option}: expected comma-separated numbers") from None
    if not values:
        raise ValueError(f"{option}: expected at least one value")
    return values


def _parse_range(text: str, option: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"{option}: expected LO:HI")
    return float(parts[0]), float(parts[1])


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)


def _cmd_generate(args) -> int:
    spec = GeneratorSpec(
        count=args.count,
        skew_count=args.skew_count,
        skew_share=args.skew_share,
        with_mpki=args.with_mpki,
        label=args.label,
        workload_size=args.workload_size,
        **({"size_range": _parse_range(args.size_range, "--size-range")}
           if args.size_range else {}),
        **({"lifetime_range": _parse_range(args.lifetime_range,
                                           "--lifetime-range")}
           if args.lifetime_range else {}),
    )
    profiles = generate_synthetic(spec, args.seed)
    write_profiles(profiles, args.out)
    return EXIT_OK


def _cmd_scale(args) -> int:
    sets = load_profile_dir(args.profiles_dir)
    if any(s.workload_size is None for s in sets):
        raise ValueError("every manifest entry needs a workload_size")
    sets.sort(key=lambda s: s.workload_size)
    vector = derive_scaling_vector(sets)
    scaled = extrapolate(sets[-1], vector, args.target)
    write_profiles(scaled, args.out)
    return EXIT_OK


def _load_profile_arg(args):
    return load_profiles(args.profiles)


def _finish_plan(plan: PlacementPlan, out: str) -> int:
    write_plan(plan, out)
    if not plan.feasible:
        print("infeasible: cannot satisfy "
              + ", ".join(plan.binding_constraints), file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_plan(args) -> int:
    if args.ratio <= 0:
        raise ValueError("--ratio must be > 0")
    profiles = _load_profile_arg(args)
    dev = _device_from_args(args)
    plan = plan_static(profiles, dev, args.ratio, args.major_threshold,
                       reserved_dram_bytes=args.reserved_dram,
                       include_minor_in_budget=args.include_minor_energy)
    return _finish_plan(plan, args.out)


def _cmd_migrate(args) -> int:
    profiles = _load_profile_arg(args)
    dev = _device_from_args(args)
    current = load_plan(args.current)
    request = MigrationRequest(time=args.time, new_ratio=args.new_ratio,
                               strict=not args.best_effort)
    plan = plan_migration(profiles, dev, current, request,
                          transient_capacity=args.transient_capacity,
                          plan_future=not args.no_future)
    write_migration_plan(plan, args.out)
    if plan.future_plan is not None and args.future_out:
        write_plan(plan.future_plan, args.future_out)
    if not plan.feasible:
        print("infeasible: cannot satisfy "
              + ", ".join(plan.binding_constraints)
              + "; current placement retained", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    profiles = _load_profile_arg(args)
    dev = _device_from_args(args)
    plan = load_plan(args.plan)
    report = evaluate(profiles, dev, plan)
    text = report_csv(report) if args.format == "csv" else report_json(report)
    _write_text(args.out, text)
    return EXIT_OK


def _cmd_compare(args) -> int:
    profiles = _load_profile_arg(args)
    dev = _device_from_args(args)
    named: list[tuple[str, PlacementPlan]] = []
    for spec in args.plan or []:
        name, _, path = spec.partition("=")
        if not path:
            raise ValueError(f"--plan expects NAME=PATH, got {spec!r}")
        named.append((name, load_plan(path)))
    if args.all_dram:
        named.append(("all-dram", place_all_dram(
            profiles, dev, args.major_threshold, args.reserved_dram)))
    if args.all_nvm:
        named.append(("all-nvm", place_all_nvm(
            profiles, dev, args.major_threshold, args.reserved_dram)))
    for threshold in (_parse_float_list(args.mpki_thresholds,
                                        "--mpki-thresholds")
                      if args.mpki_thresholds else []):
        named.append((f"mpki_{threshold:g}", place_mpki_threshold(
            profiles, dev, threshold, args.major_threshold,
            args.reserved_dram)))
    for seed in (_parse_float_list(args.random_seeds, "--random-seeds")
                 if args.random_seeds else []):
        named.append((f"random_{int(seed)}", place_random(
            profiles, dev, int(seed), args.major_threshold,
            args.reserved_dram)))
    if not named:
        raise ValueError("compare needs at least one plan "
                         "(--plan/--all-dram/--all-nvm/--mpki-thresholds/"
                         "--random-seeds)")
    rows = compare(profiles, dev, named,
                   include_matched_optimal=args.matched_optimal)
    text = comparison_csv(rows) if args.format == "csv" \
        else comparison_json(rows)
    _write_text(args.out, text)
    return EXIT_OK


_SWEEP_COLUMNS = ("dram_gib", "nvm_gib", "ratio", "status", "objective_ns",
                  "planned_energy_nj", "energy_budget_nj",
                  "evaluated_energy_nj", "evaluated_ratio", "capacity_ok")


def _cmd_sweep(args) -> int:
    profiles = _load_profile_arg(args)
    base = _device_from_args(args)
    ratios = _parse_float_list(args.ratios, "--ratios")
    if any(r <= 0 for r in ratios):
        raise ValueError("--ratios must all be > 0")
    configs = []
    for part in args.capacities.split(","):
        if part.strip():
            configs.append(_parse_range(part.strip(), "--capacities"))
    if not configs:
        raise ValueError("--capacities: expected at least one DRAM:NVM pair")

    rows = []
    for dram_gib, nvm_gib in configs:
        dev = base.with_capacities(dram_gib * GIB, nvm_gib * GIB)
        plans = sweep_ratios(profiles, dev, ratios, args.major_threshold,
                             reserved_dram_bytes=args.reserved_dram,
                             include_minor_in_budget=args.include_minor_energy)
        for ratio, plan in zip(ratios, plans):
            if plan.feasible:
                report = evaluate(profiles, dev, plan)
                evaluated = report.total_energy_nj
                evaluated_ratio = report.energy_ratio_vs_all_dram
                capacity_ok = report.capacity_ok
            else:
                evaluated = float("nan")
                evaluated_ratio = float("nan")
                capacity_ok = False
            rows.append({
                "dram_gib": dram_gib,
                "nvm_gib": nvm_gib,
                "ratio": ratio,
                "status": plan.status,
                "objective_ns": plan.objective_ns,
                "planned_energy_nj": plan.planned_energy_nj,
                "energy_budget_nj": plan.energy_budget_nj,
                "evaluated_energy_nj": evaluated,
                "evaluated_ratio": evaluated_ratio,
                "capacity_ok": capacity_ok,
            })

    if args.format == "csv":
        lines = [",".join(_SWEEP_COLUMNS)]
        for row in rows:
            cells = []
            for column in _SWEEP_COLUMNS:
                value = row[column]
                if isinstance(value, bool):
                    cells.append(str(int(value)))
                elif isinstance(value, float):
                    cells.append(repr(value))
                else:
                    cells.append(str(value))
            lines.append(",".join(cells))
        text = "\n".join(lines) + "\n"
    else:
        text = json.dumps(rows, indent=2, sort_keys=True) + "\n"
    _write_text(args.out, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="memplan",
                     description="DRAM/NVM object placement planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[], help="synthesize a profile file")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--skew-count", type=int, default=0)
    p.add_argument("--skew-share", type=float)
    p.add_argument("--with-mpki", action="store_true")
    p.add_argument("--label", default="synthetic")
    p.add_argument("--workload-size", type=float, default=1.0)
    p.add_argument("--size-range", help="object size bounds, bytes, LO:HI")
    p.add_argument("--lifetime-range", help="lifetime bounds, seconds, LO:HI")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("scale",
                       help="extrapolate profiles to a new workload size")
    p.add_argument("--profiles-dir", required=True,
                   help="directory with manifest.json and profile files")
    p.add_argument("--target", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser("plan", help="compute a static placement")
    p.add_argument("--profiles", required=True)
    p.add_argument("--ratio", type=float, required=True,
                   help="energy budget as a fraction of all-DRAM energy")
    _add_planning_options(p)
    _add_device_options(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("migrate",
                       help="replan live objects for a new energy requirement")
    p.add_argument("--profiles", required=True)
    p.add_argument("--current", required=True, help="current plan file")
    p.add_argument("--time", type=float, required=True,
                   help="seconds into the run when the request arrives")
    p.add_argument("--new-ratio", type=float, required=True)
    p.add_argument("--best-effort", action="store_true",
                   help="treat the ratio as a wish, not a hard limit")
    p.add_argument("--transient-capacity", action="store_true",
                   help="require room for source and destination copies "
                        "during migration")
    p.add_argument("--no-future", action="store_true",
                   help="skip the companion plan for objects allocated later")
    _add_device_options(p)
    p.add_argument("--out", required=True)
    p.add_argument("--future-out",
                   help="where to write the companion plan for future objects")
    p.set_defaults(func=_cmd_migrate)

    p = sub.add_parser("evaluate", help="score one plan from scratch")
    p.add_argument("--profiles", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_device_options(p)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("compare", help="tabulate several placements")
    p.add_argument("--profiles", required=True)
    p.add_argument("--plan", action="append", metavar="NAME=PATH")
    p.add_argument("--all-dram", action="store_true")
    p.add_argument("--all-nvm", action="store_true")
    p.add_argument("--mpki-thresholds",
                   help="comma-separated thresholds for the LLC-MPKI baseline")
    p.add_argument("--random-seeds",
                   help="comma-separated seeds for random placements")
    p.add_argument("--matched-optimal", action="store_true",
                   help="add an optimal plan at each row's achieved ratio")
    _add_planning_options(p)
    _add_device_options(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("sweep",
                       help="plan across capacity configurations and ratios")
    p.add_argument("--profiles", required=True)
    p.add_argument("--ratios", required=True, help="e.g. 1.0,0.9,0.8")
    p.add_argument("--capacities", required=True,
                   help="DRAM:NVM GiB pairs, e.g. 8:16,4:16,2:16")
    _add_planning_options(p)
    _add_device_options(p)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ProfileError, CapacityError) as exc:
        print(f"memplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError, KeyError) as exc:
        print(f"memplan: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def console_main() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_main()
