"""Independent scoring of placement plans.

Recomputes energy and latency for any plan from the profiles and device
constants alone, never trusting planner-reported totals, and checks
capacity and budget. Two capacity views are reported: the static one
(every object counted for its whole size regardless of lifetime, the view
the planners constrain) and a time-resolved one (peak bytes concurrently
allocated per device).

Energy totals cover the major objects, the same population the budget is
defined over; the DRAM energy of minor objects is reported separately (or
folded in when the plan was built that way).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .energy import DeviceSpec, dram_energy, nvm_energy
from .planner import DRAM, NVM, PlacementPlan, plan_static
from .profiles import ProfileSet, filter_major

_REL_TOL = 1e-9


@dataclass(frozen=True)
class EvaluationReport:
    """Evaluator-recomputed scores and checks for one plan."""

    total_energy_nj: float
    latency_objective_ns: float
    energy_ratio_vs_all_dram: float
    capacity_ok_dram: bool
    capacity_ok_nvm: bool
    budget_ok: bool
    static_dram_bytes: float
    static_nvm_bytes: float
    peak_dram_bytes: float
    peak_nvm_bytes: float
    minor_dram_energy_nj: float
    breakdown: dict[str, float]

    @property
    def capacity_ok(self) -> bool:
        return self.capacity_ok_dram and self.capacity_ok_nvm


def _peak_bytes(objects: Iterable, device: str,
                placements: dict[str, str]) -> float:
    # Sweep alloc/dealloc events; frees at time t happen before allocations
    # at the same instant (half-open lifetimes).
    events = []
    for obj in objects:
        if placements[obj.id] != device:
            continue
        events.append((obj.alloc_time, obj.size))
        events.append((obj.dealloc_time, -obj.size))
    events.sort(key=lambda e: (e[0], e[1]))
    level = 0.0
    peak = 0.0
    for _, delta in events:
        level += delta
        peak = max(peak, level)
    return peak


def evaluate(profiles: ProfileSet, dev: DeviceSpec,
             plan: PlacementPlan) -> EvaluationReport:
    """Score a plan from scratch; every profiled object must be placed."""
    for obj in profiles:
        if obj.id not in plan.placements:
            raise ValueError(f"plan does not cover object {obj.id!r}")
        if plan.placements[obj.id] not in (DRAM, NVM):
            raise ValueError(f"object {obj.id!r} has no concrete device")

    major, minor = filter_major(profiles, plan.major_threshold)
    breakdown: dict[str, float] = {}
    latency = 0.0
    for obj in major:
        if plan.placements[obj.id] == DRAM:
            breakdown[obj.id] = dram_energy(obj, dev)
            latency += dev.dram_latency * obj.llc_misses
        else:
            breakdown[obj.id] = nvm_energy(obj, dev)
            latency += dev.nvm_latency * obj.llc_misses
    minor_energy = float(sum(dram_energy(o, dev) for o in minor))

    total = float(sum(breakdown.values()))
    denom = float(sum(dram_energy(o, dev) for o in major))
    if plan.minor_energy_in_budget:
        total += minor_energy
        denom += minor_energy
    if denom > 0:
        ratio = total / denom
    else:
        ratio = 1.0 if total == 0 else float("inf")

    static_dram = sum(o.size for o in profiles if plan.placements[o.id] == DRAM)
    static_nvm = sum(o.size for o in profiles if plan.placements[o.id] == NVM)
    dram_limit = dev.dram_capacity - plan.reserved_dram_bytes
    capacity_ok_dram = static_dram <= dram_limit + _REL_TOL * max(1.0, dram_limit)
    capacity_ok_nvm = static_nvm <= dev.nvm_capacity \
        + _REL_TOL * max(1.0, dev.nvm_capacity)

    budget = plan.energy_budget_nj
    budget_ok = True
    if math.isfinite(budget):
        budget_ok = total <= budget + _REL_TOL * max(1.0, abs(budget))

    return EvaluationReport(
        total_energy_nj=total,
        latency_objective_ns=latency,
        energy_ratio_vs_all_dram=ratio,
        capacity_ok_dram=capacity_ok_dram,
        capacity_ok_nvm=capacity_ok_nvm,
        budget_ok=budget_ok,
        static_dram_bytes=static_dram,
        static_nvm_bytes=static_nvm,
        peak_dram_bytes=_peak_bytes(profiles, DRAM, plan.placements),
        peak_nvm_bytes=_peak_bytes(profiles, NVM, plan.placements),
        minor_dram_energy_nj=minor_energy,
        breakdown=breakdown,
    )


@dataclass(frozen=True)
class ComparisonRow:
    plan: str
    energy_nj: float
    ratio: float
    latency_ns: float
    capacity_ok: bool


def compare(profiles: ProfileSet, dev: DeviceSpec,
            plans: Sequence[tuple[str, PlacementPlan]],
            include_matched_optimal: bool = False) -> list[ComparisonRow]:
    """One evaluator row per named plan, in order.

    With ``include_matched_optimal`` each feasible input plan is followed
    by an optimal plan computed at the energy ratio the input achieved,
    which by construction can only match or beat its latency.
    """
    if not plans:
        raise ValueError("compare needs at least one plan")
    rows = []
    for name, plan in plans:
        report = evaluate(profiles, dev, plan)
        rows.append(ComparisonRow(
            plan=name,
            energy_nj=report.total_energy_nj,
            ratio=report.energy_ratio_vs_all_dram,
            latency_ns=report.latency_objective_ns,
            capacity_ok=report.capacity_ok,
        ))
        if include_matched_optimal and report.capacity_ok \
                and report.energy_ratio_vs_all_dram > 0 \
                and math.isfinite(report.energy_ratio_vs_all_dram):
            matched = plan_static(
                profiles, dev, report.energy_ratio_vs_all_dram,
                plan.major_threshold,
                reserved_dram_bytes=plan.reserved_dram_bytes,
                include_minor_in_budget=plan.minor_energy_in_budget)
            matched_report = evaluate(profiles, dev, matched) \
                if matched.feasible else None
            rows.append(ComparisonRow(
                plan=f"{name}:optimal",
                energy_nj=matched_report.total_energy_nj
                if matched_report else float("nan"),
                ratio=matched_report.energy_ratio_vs_all_dram
                if matched_report else float("nan"),
                latency_ns=matched_report.latency_objective_ns
                if matched_report else float("nan"),
                capacity_ok=matched_report.capacity_ok
                if matched_report else False,
            ))
    return rows


COMPARISON_COLUMNS = ("plan", "energy_nJ", "ratio", "latency_ns", "capacity_ok")


def comparison_csv(rows: Sequence[ComparisonRow]) -> str:
    lines = [",".join(COMPARISON_COLUMNS)]
    for row in rows:
        lines.append(",".join((
            row.plan,
            repr(row.energy_nj),
            repr(row.ratio),
            repr(row.latency_ns),
            str(int(row.capacity_ok)),
        )))
    return "\n".join(lines) + "\n"


def comparison_json(rows: Sequence[ComparisonRow]) -> str:
    payload = [{
        "plan": row.plan,
        "energy_nJ": row.energy_nj,
        "ratio": row.ratio,
        "latency_ns": row.latency_ns,
        "capacity_ok": row.capacity_ok,
    } for row in rows]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_json(report: EvaluationReport) -> str:
    payload = {
        "total_energy_nj": report.total_energy_nj,
        "latency_objective_ns": report.latency_objective_ns,
        "energy_ratio_vs_all_dram": report.energy_ratio_vs_all_dram,
        "capacity_ok_dram": report.capacity_ok_dram,
        "capacity_ok_nvm": report.capacity_ok_nvm,
        "budget_ok": report.budget_ok,
        "static_dram_bytes": report.static_dram_bytes,
        "static_nvm_bytes": report.static_nvm_bytes,
        "peak_dram_bytes": report.peak_dram_bytes,
        "peak_nvm_bytes": report.peak_nvm_bytes,
        "minor_dram_energy_nj": report.minor_dram_energy_nj,
        "per_object_energy_nj": report.breakdown,
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def report_csv(report: EvaluationReport) -> str:
    lines = ["metric,value"]
    scalar = (
        ("total_energy_nj", repr(report.total_energy_nj)),
        ("latency_objective_ns", repr(report.latency_objective_ns)),
        ("energy_ratio_vs_all_dram", repr(report.energy_ratio_vs_all_dram)),
        ("capacity_ok_dram", str(int(report.capacity_ok_dram))),
        ("capacity_ok_nvm", str(int(report.capacity_ok_nvm))),
        ("budget_ok", str(int(report.budget_ok))),
        ("static_dram_bytes", repr(report.static_dram_bytes)),
        ("static_nvm_bytes", repr(report.static_nvm_bytes)),
        ("peak_dram_bytes", repr(report.peak_dram_bytes)),
        ("peak_nvm_bytes", repr(report.peak_nvm_bytes)),
        ("minor_dram_energy_nj", repr(report.minor_dram_energy_nj)),
    )
    lines.extend(f"{k},{v}" for k, v in scalar)
    lines.append("")
    lines.append("id,energy_nj")
    lines.extend(f"{object_id},{repr(value)}"
                 for object_id, value in report.breakdown.items())
    return "\n".join(lines) + "\n"
