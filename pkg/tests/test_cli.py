import json

import pytest

from memplan.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main
from memplan.energy import GIB
from memplan.energy import testbed1 as make_testbed1
from memplan.evaluator import evaluate
from memplan.planner import load_plan
from memplan.profiles import (GeneratorSpec, derive_scaling_vector,
                              extrapolate, generate_synthetic, load_profiles,
                              write_profile_dir)

MB = 1 << 20


@pytest.fixture
def workload(tmp_path):
    path = tmp_path / "w.prof"
    rc = main(["generate", "--count", "10", "--seed", "7", "--skew-count",
               "3", "--skew-share", "0.9", "--with-mpki", "--out", str(path)])
    assert rc == EXIT_OK
    return path


def run(args):
    return main([str(a) for a in args])


class TestGenerate:
    def test_output_loads_and_is_deterministic(self, tmp_path):
        a = tmp_path / "a.prof"
        b = tmp_path / "b.prof"
        for path in (a, b):
            assert run(["generate", "--count", 6, "--seed", 3,
                        "--out", path]) == EXIT_OK
        assert a.read_bytes() == b.read_bytes()
        assert len(load_profiles(a)) == 6

    def test_bad_spec_is_usage_error(self, tmp_path):
        rc = run(["generate", "--count", 0, "--seed", 1,
                  "--out", tmp_path / "x.prof"])
        assert rc == EXIT_USAGE

    def test_missing_required_flag_exits_one(self, capsys, tmp_path):
        with pytest.raises(SystemExit) as err:
            run(["generate", "--count", 6, "--out", tmp_path / "x.prof"])
        assert err.value.code == EXIT_USAGE


class TestPlan:
    def test_feasible_plan_round_trips_through_evaluator(self, workload,
                                                         tmp_path):
        out = tmp_path / "p.plan"
        rc = run(["plan", "--profiles", workload, "--ratio", 0.8,
                  "--preset", "testbed1", "--dram-capacity-gib", 0.05,
                  "--nvm-capacity-gib", 1, "--major-threshold", 0,
                  "--out", out])
        assert rc == EXIT_OK
        plan = load_plan(out)
        assert plan.feasible
        profiles = load_profiles(workload)
        dev = make_testbed1(dram_capacity=0.05 * GIB, nvm_capacity=1 * GIB)
        report = evaluate(profiles, dev, plan)
        assert report.capacity_ok
        assert report.budget_ok
        assert report.energy_ratio_vs_all_dram <= 0.8 * (1 + 1e-9)

    def test_zero_ratio_is_usage_error(self, workload, tmp_path):
        rc = run(["plan", "--profiles", workload, "--ratio", 0,
                  "--out", tmp_path / "p.plan"])
        assert rc == EXIT_USAGE

    def test_infeasible_exits_two_but_writes_artifact(self, workload,
                                                      tmp_path):
        out = tmp_path / "p.plan"
        rc = run(["plan", "--profiles", workload, "--ratio", 1e-9,
                  "--dram-capacity-gib", 0, "--nvm-capacity-gib", 1,
                  "--major-threshold", 0, "--out", out])
        assert rc == EXIT_INFEASIBLE
        assert not load_plan(out).feasible

    def test_missing_profile_file_exits_one(self, tmp_path):
        rc = run(["plan", "--profiles", tmp_path / "nope.prof",
                  "--ratio", 0.8, "--out", tmp_path / "p.plan"])
        assert rc == EXIT_USAGE

    def test_device_spec_file(self, workload, tmp_path):
        from memplan.energy import write_device_spec
        device_path = tmp_path / "dev.json"
        write_device_spec(make_testbed1(dram_capacity=0.05 * GIB,
                                        nvm_capacity=1 * GIB), device_path)
        out = tmp_path / "p.plan"
        rc = run(["plan", "--profiles", workload, "--ratio", 0.9,
                  "--device", device_path, "--major-threshold", 0,
                  "--out", out])
        assert rc == EXIT_OK
        assert load_plan(out).feasible

    def test_device_and_preset_conflict(self, workload, tmp_path):
        rc = run(["plan", "--profiles", workload, "--ratio", 0.9,
                  "--device", tmp_path / "d.json", "--preset", "testbed1",
                  "--out", tmp_path / "p.plan"])
        assert rc == EXIT_USAGE


class TestMigrate:
    def test_migration_artifact(self, workload, tmp_path):
        plan_path = tmp_path / "p.plan"
        run(["plan", "--profiles", workload, "--ratio", 1.0,
             "--preset", "testbed1", "--dram-capacity-gib", 0.05,
             "--nvm-capacity-gib", 1, "--major-threshold", 0,
             "--out", plan_path])
        out = tmp_path / "m.txt"
        rc = run(["migrate", "--profiles", workload, "--current", plan_path,
                  "--time", 4, "--new-ratio", 0.9, "--preset", "testbed1",
                  "--dram-capacity-gib", 0.05, "--nvm-capacity-gib", 1,
                  "--out", out])
        assert rc in (EXIT_OK, EXIT_INFEASIBLE)
        text = out.read_text()
        assert text.startswith("hmms-migration-v1\n")
        assert "id,from,to,migrate,migce_nJ,migct_ns" in text

    def test_strict_impossible_budget_exits_two(self, workload, tmp_path):
        plan_path = tmp_path / "p.plan"
        run(["plan", "--profiles", workload, "--ratio", 1.0,
             "--dram-capacity-gib", 0.05, "--nvm-capacity-gib", 1,
             "--major-threshold", 0, "--out", plan_path])
        rc = run(["migrate", "--profiles", workload, "--current", plan_path,
                  "--time", 4, "--new-ratio", 1e-9,
                  "--dram-capacity-gib", 0.05, "--nvm-capacity-gib", 1,
                  "--out", tmp_path / "m.txt"])
        assert rc == EXIT_INFEASIBLE


class TestEvaluateAndCompare:
    def test_evaluate_json(self, workload, tmp_path):
        plan_path = tmp_path / "p.plan"
        run(["plan", "--profiles", workload, "--ratio", 0.9,
             "--dram-capacity-gib", 0.05, "--nvm-capacity-gib", 1,
             "--major-threshold", 0, "--out", plan_path])
        out = tmp_path / "report.json"
        rc = run(["evaluate", "--profiles", workload, "--plan", plan_path,
                  "--dram-capacity-gib", 0.05, "--nvm-capacity-gib", 1,
                  "--format", "json", "--out", out])
        assert rc == EXIT_OK
        report = json.loads(out.read_text())
        assert report["budget_ok"] is True
        assert "per_object_energy_nj" in report

    def test_compare_csv_columns(self, workload, tmp_path):
        out = tmp_path / "cmp.csv"
        rc = run(["compare", "--profiles", workload, "--all-dram",
                  "--all-nvm", "--mpki-thresholds", "0.01,0.025,0.05",
                  "--major-threshold", 0, "--dram-capacity-gib", 1,
                  "--nvm-capacity-gib", 4, "--out", out])
        assert rc == EXIT_OK
        lines = out.read_text().splitlines()
        assert lines[0] == "plan,energy_nJ,ratio,latency_ns,capacity_ok"
        assert len(lines) == 1 + 2 + 3

    def test_compare_without_sources_is_usage_error(self, workload):
        assert run(["compare", "--profiles", workload]) == EXIT_USAGE


class TestSweep:
    def test_grid_shape_and_determinism(self, workload, tmp_path):
        args = ["sweep", "--profiles", workload,
                "--ratios", "1.0,0.9,0.85,0.8,0.75",
                "--capacities", "0.05:1,0.02:1,0.01:1",
                "--major-threshold", 0]
        first = tmp_path / "s1.csv"
        second = tmp_path / "s2.csv"
        assert run(args + ["--out", first]) == EXIT_OK
        assert run(args + ["--out", second]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()
        lines = first.read_text().splitlines()
        assert len(lines) == 1 + 3 * 5
        assert lines[0].startswith("dram_gib,nvm_gib,ratio,status")

    def test_json_format(self, workload, tmp_path):
        out = tmp_path / "s.json"
        rc = run(["sweep", "--profiles", workload, "--ratios", "1.0,0.8",
                  "--capacities", "0.05:1", "--major-threshold", 0,
                  "--format", "json", "--out", out])
        assert rc == EXIT_OK
        rows = json.loads(out.read_text())
        assert len(rows) == 2
        assert {"dram_gib", "ratio", "status"} <= set(rows[0])

    def test_bad_capacities_usage_error(self, workload, tmp_path):
        rc = run(["sweep", "--profiles", workload, "--ratios", "1.0",
                  "--capacities", "oops", "--out", tmp_path / "s.csv"])
        assert rc == EXIT_USAGE


class TestScale:
    def test_matches_library_extrapolation(self, tmp_path):
        sets = []
        base = generate_synthetic(
            GeneratorSpec(count=5, label="w1", workload_size=1.0), 3)
        sets.append(base)
        # Grow every pattern by a fixed amount per workload unit.
        from memplan.profiles import ScalingVector
        grads = {o.id: {"size": float(MB), "accessed_volume": float(MB),
                        "llc_misses": 64.0, "dirty_blocks": 4.0,
                        "lifetime": 0.5} for o in base}
        vector = ScalingVector(grads)
        sets.append(extrapolate(base, vector, 2.0))
        sets.append(extrapolate(base, vector, 3.0))
        family = tmp_path / "family"
        write_profile_dir(sets, family)

        out = tmp_path / "scaled.prof"
        rc = run(["scale", "--profiles-dir", family, "--target", 5.0,
                  "--out", out])
        assert rc == EXIT_OK
        got = load_profiles(out, workload_size=5.0)
        want = extrapolate(sets[-1], derive_scaling_vector(sets), 5.0)
        assert got.objects == want.objects

    def test_missing_manifest_usage_error(self, tmp_path):
        rc = run(["scale", "--profiles-dir", tmp_path, "--target", 2.0,
                  "--out", tmp_path / "x.prof"])
        assert rc == EXIT_USAGE
