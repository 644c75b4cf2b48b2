import numpy as np
import pytest

from privlevels.attacks import run_mia
from privlevels.data import (
    CATEGORICAL,
    NUMERIC_CONTINUOUS,
    NUMERIC_INTEGER,
    ColumnSpec,
    SchemaViolation,
    split_holdout,
)
from privlevels.simulate import (
    CalibrationTarget,
    CategoricalDist,
    ColumnRule,
    Equation,
    Exponential,
    LogNormal,
    Normal,
    Scenario,
    SimulatorSpec,
    TargetStat,
    Uniform,
    calibrate,
    compute_statistic,
    corner_case_sweep,
    evaluation_loss,
    fill_targets,
    load_simulator_spec,
    plant_scenarios,
    save_simulator_spec,
    simulate,
)

from .conftest import mixed_dataset, mixed_schema


def normal_spec(mu=0.0, sigma=1.0, free=None):
    return SimulatorSpec(
        columns=(ColumnRule("x", NUMERIC_CONTINUOUS, Normal(mu=mu, sigma=sigma)),),
        free_params=free or {},
    )


# -- simulation --------------------------------------------------------------


def test_simulate_normal_moments():
    ds = simulate(normal_spec(), 100_000, seed=1)
    x = ds.column("x")
    assert abs(x.mean()) <= 0.01  # ~3 sigma band at this n
    assert abs(x.std() - 1.0) <= 0.01


def test_structural_equation_exact():
    spec = SimulatorSpec(
        columns=(
            ColumnRule("x", NUMERIC_CONTINUOUS, Uniform(0.0, 1.0)),
            ColumnRule("y", NUMERIC_CONTINUOUS, Equation(intercept=0.0, terms={"x": 2.0})),
        )
    )
    ds = simulate(spec, 5000, seed=2)
    assert np.array_equal(ds.column("y"), 2.0 * ds.column("x"))


def test_indicator_equation_is_binary():
    spec = SimulatorSpec(
        columns=(
            ColumnRule("x", NUMERIC_CONTINUOUS, Normal(0.0, 1.0)),
            ColumnRule(
                "flag",
                NUMERIC_INTEGER,
                Equation(intercept=0.0, terms={"x": 1.0}, indicator=True),
            ),
        )
    )
    ds = simulate(spec, 2000, seed=3)
    flags = set(ds.column("flag").tolist())
    assert flags <= {0, 1}
    assert np.array_equal(ds.column("flag") == 1, ds.column("x") > 0)


def test_simulate_empty_and_negative():
    assert simulate(normal_spec(), 0, seed=1).n_rows == 0
    with pytest.raises(ValueError):
        simulate(normal_spec(), -1, seed=1)


def test_simulate_deterministic_and_prefix_stable():
    spec = normal_spec()
    a = simulate(spec, 1000, seed=4)
    b = simulate(spec, 1000, seed=4)
    assert a.equals(b, ignore_row_ids=False)
    assert simulate(spec, 100, seed=4).equals(a.select_rows(range(100)))


def test_spec_validation():
    with pytest.raises(ValueError, match="not defined earlier"):
        SimulatorSpec(
            columns=(
                ColumnRule("y", NUMERIC_CONTINUOUS, Equation(terms={"x": 1.0})),
                ColumnRule("x", NUMERIC_CONTINUOUS, Normal(0, 1)),
            )
        )
    with pytest.raises(ValueError, match="sigma"):
        Normal(mu=0.0, sigma=0.0)
    with pytest.raises(ValueError, match="rate"):
        Exponential(rate=-1.0)
    with pytest.raises(ValueError, match="weights"):
        CategoricalDist(weights=(0.0, 0.0))
    with pytest.raises(ValueError, match="categories"):
        ColumnRule("c", CATEGORICAL, CategoricalDist(weights=(1.0, 1.0)))
    with pytest.raises(ValueError, match="bounds"):
        normal_spec(free={"x.mu": (1.0, 1.0)})
    with pytest.raises(ValueError, match="parameter path"):
        normal_spec(free={"x.nope": (0.0, 1.0)})


def test_distribution_families_sane():
    spec = SimulatorSpec(
        columns=(
            ColumnRule("u", NUMERIC_CONTINUOUS, Uniform(-2.0, 3.0)),
            ColumnRule("ln", NUMERIC_CONTINUOUS, LogNormal(0.0, 0.5)),
            ColumnRule("e", NUMERIC_CONTINUOUS, Exponential(rate=2.0)),
            ColumnRule(
                "c", CATEGORICAL, CategoricalDist((0.7, 0.3)), categories=("a", "b")
            ),
        )
    )
    ds = simulate(spec, 50_000, seed=5)
    assert ds.column("u").min() >= -2.0 and ds.column("u").max() <= 3.0
    assert ds.column("ln").min() > 0.0
    assert abs(ds.column("e").mean() - 0.5) <= 0.02  # mean = 1/rate
    freq = np.bincount(ds.column("c"), minlength=2) / ds.n_rows
    assert abs(freq[0] - 0.7) <= 0.01


def test_spec_json_round_trip(tmp_path):
    spec = SimulatorSpec(
        columns=(
            ColumnRule("x", NUMERIC_CONTINUOUS, Normal(1.0, 2.0)),
            ColumnRule(
                "y", NUMERIC_CONTINUOUS, Equation(intercept=3.0, terms={"x": -1.5},
                                                  noise_sigma=0.1)
            ),
            ColumnRule("c", CATEGORICAL, CategoricalDist((2.0, 1.0)), categories=("p", "q")),
        ),
        free_params={"x.mu": (0.0, 5.0), "y.terms.x": (-3.0, 0.0)},
    )
    save_simulator_spec(spec, tmp_path / "spec.json")
    loaded = load_simulator_spec(tmp_path / "spec.json")
    assert loaded == spec
    assert loaded.content_hash() == spec.content_hash()


# -- calibration ----------------------------------------------------------------


def test_calibrate_recovers_normal_parameters():
    # Light version of the acceptance criterion (budget 120, sim_n 8000).
    spec = normal_spec(mu=2.0, sigma=1.0, free={"x.mu": (0.0, 10.0), "x.sigma": (0.5, 5.0)})
    target = CalibrationTarget(
        stats=(TargetStat("x", "mean", value=5.0), TargetStat("x", "std", value=2.0))
    )
    result = calibrate(spec, target, budget=120, sim_n=8000, seed=11)
    assert abs(result.params["x.mu"] - 5.0) <= 0.1
    assert abs(result.params["x.sigma"] - 2.0) <= 0.1
    assert evaluation_loss(result.spec, target, 8000, result.seed) == result.loss


def test_calibrate_descent_contract():
    # Targets equal to the statistics of the box-center spec (computed with the
    # CRN seed) make the initial loss 0; the optimizer must never end worse.
    free = {"x.mu": (1.0, 3.0), "x.sigma": (0.5, 1.5)}  # centers: mu=2, sigma=1
    spec = normal_spec(mu=2.0, sigma=1.0, free=free)
    seed = 13
    baseline = simulate(spec, 4000, seed=seed)
    target = CalibrationTarget(
        stats=(
            TargetStat("x", "mean", value=compute_statistic(baseline, TargetStat("x", "mean"))),
            TargetStat("x", "std", value=compute_statistic(baseline, TargetStat("x", "std"))),
        )
    )
    result = calibrate(spec, target, budget=60, sim_n=4000, seed=seed)
    initial_loss = result.trace[0].loss
    assert initial_loss == pytest.approx(0.0, abs=1e-20)
    assert result.loss <= initial_loss


def test_calibrate_projects_into_box():
    # The target mean is far above what the box allows: the optimum sits on the
    # boundary and the returned parameters must still be feasible.
    spec = normal_spec(mu=1.0, sigma=1.0, free={"x.mu": (0.0, 2.0)})
    target = CalibrationTarget(stats=(TargetStat("x", "mean", value=50.0),))
    result = calibrate(spec, target, budget=40, sim_n=2000, seed=14)
    assert 0.0 <= result.params["x.mu"] <= 2.0
    assert result.params["x.mu"] >= 1.9  # pushed against the upper bound
    for entry in result.trace:
        assert 0.0 <= entry.params["x.mu"] <= 2.0


def test_calibrate_trace_is_faithful():
    spec = normal_spec(free={"x.mu": (0.0, 4.0), "x.sigma": (0.5, 2.0)})
    target = CalibrationTarget(stats=(TargetStat("x", "mean", value=1.0),))
    result = calibrate(spec, target, budget=30, sim_n=1000, seed=15)
    assert result.evaluations == len(result.trace) <= 30
    assert result.loss == min(entry.loss for entry in result.trace)
    sampled = result.trace[len(result.trace) // 2]
    assert evaluation_loss(
        spec.with_params(sampled.params), target, 1000, 15
    ) == sampled.loss


def test_calibrate_budget_validation():
    spec = normal_spec(free={"x.mu": (0.0, 4.0)})
    target = CalibrationTarget(stats=(TargetStat("x", "mean", value=1.0),))
    with pytest.raises(ValueError, match="at least 10"):
        calibrate(spec, target, budget=5, sim_n=100, seed=0)
    with pytest.raises(ValueError, match="no free parameters"):
        calibrate(normal_spec(), target, budget=20, sim_n=100, seed=0)

    # 12 free weight parameters need a 13-point simplex: budget 12 clears the
    # floor of 10 but cannot seat the initial simplex.
    cats = tuple(f"c{i}" for i in range(12))
    wide = SimulatorSpec(
        columns=(
            ColumnRule("c", CATEGORICAL, CategoricalDist((1.0,) * 12), categories=cats),
        ),
        free_params={f"c.weights.{i}": (0.1, 1.0) for i in range(12)},
    )
    freq_target = CalibrationTarget(
        stats=(TargetStat("c", "category_frequency", category="c0", value=0.5),)
    )
    with pytest.raises(ValueError, match="initial simplex"):
        calibrate(wide, freq_target, budget=12, sim_n=100, seed=0)


def test_calibration_target_validation():
    with pytest.raises(ValueError, match="not all"):
        CalibrationTarget(stats=(TargetStat("x", "mean", value=1.0, weight=0.0),))
    with pytest.raises(ValueError, match="quantile"):
        TargetStat("x", "quantile", value=1.0)
    with pytest.raises(ValueError, match="no value"):
        spec = normal_spec(free={"x.mu": (0.0, 4.0)})
        calibrate(
            spec,
            CalibrationTarget(stats=(TargetStat("x", "mean"),)),
            budget=20,
            sim_n=100,
            seed=0,
        )


def test_fill_targets_from_reference_data():
    ds = mixed_dataset(n=100, seed=1)
    target = CalibrationTarget(
        stats=(
            TargetStat("x", "mean"),
            TargetStat("count", "quantile", q=0.5),
            TargetStat("color", "category_frequency", category="red"),
        )
    )
    filled = fill_targets(target, ds)
    assert filled.stats[0].value == pytest.approx(float(ds.column("x").mean()))
    assert filled.stats[1].value == pytest.approx(float(np.quantile(ds.column("count"), 0.5)))
    assert filled.stats[2].value == pytest.approx(float(np.mean(ds.column("color") == 0)))


def test_simulated_output_resists_mia():
    # Rows are parametric draws: membership signal must sit in the chance band.
    from privlevels.reference import reference_dataset

    data = reference_dataset(n=600, seed=21)
    split = split_holdout(data, 0.5, seed=3)
    spec = SimulatorSpec(
        columns=(
            ColumnRule("age", NUMERIC_INTEGER, Uniform(18, 95)),
            ColumnRule("income", NUMERIC_CONTINUOUS, LogNormal(10.2, 0.6)),
            ColumnRule("balance", NUMERIC_CONTINUOUS, Normal(20_000.0, 30_000.0)),
            ColumnRule(
                "region",
                CATEGORICAL,
                CategoricalDist((1.0, 1.0, 1.0, 1.0)),
                categories=("north", "south", "east", "west"),
            ),
            ColumnRule(
                "segment",
                CATEGORICAL,
                CategoricalDist((1.0, 1.0, 1.0)),
                categories=("retail", "premium", "private"),
            ),
        )
    )
    synthetic = simulate(spec, 600, seed=22)
    auc = run_mia(synthetic, split.members, split.non_members).score
    assert 0.42 <= auc <= 0.58  # ~3 sigma around 0.5 for 300/300


# -- scenario planting ------------------------------------------------------------


def _full_template(value_x=50.0):
    return {"x": value_x, "count": 7, "color": "red"}


def test_plant_scenarios_counts_and_sidecar():
    ds = mixed_dataset(n=95, seed=2)
    widened, sidecar = plant_scenarios(ds, [Scenario("spike", _full_template(), 5)], seed=4)
    assert widened.n_rows == 100
    assert len(sidecar) == 5
    assert set(sidecar.values()) == {"spike"}
    planted_ids = set(sidecar)
    original_ids = set(ds.row_ids.tolist())
    assert planted_ids.isdisjoint(original_ids)
    # non-planted rows unchanged, in their original order
    survivors = widened.select_rows(
        [i for i, rid in enumerate(widened.row_ids.tolist()) if rid not in planted_ids]
    )
    assert survivors.equals(ds, ignore_row_ids=False)


def test_plant_scenarios_empty_list_is_identity():
    ds = mixed_dataset(n=20)
    widened, sidecar = plant_scenarios(ds, [], seed=1)
    assert widened.equals(ds, ignore_row_ids=False) and sidecar == {}


def test_plant_scenarios_partition_sizes():
    ds = mixed_dataset(n=50, seed=3)
    widened, sidecar = plant_scenarios(
        ds,
        [Scenario("a", _full_template(10.0), 3), Scenario("b", _full_template(20.0), 7)],
        seed=5,
    )
    names = list(sidecar.values())
    assert names.count("a") == 3 and names.count("b") == 7
    assert widened.n_rows == 60


def test_plant_scenarios_sampled_cells_and_validation():
    ds = mixed_dataset(n=10, seed=4)
    sampled = Scenario(
        "s",
        {"x": {"uniform": [-1.0, 1.0]}, "count": {"choice": [1, 2, 3]}, "color": "blue"},
        4,
    )
    widened, sidecar = plant_scenarios(ds, [sampled], seed=6)
    planted = widened.select_rows(
        [i for i, rid in enumerate(widened.row_ids.tolist()) if rid in sidecar]
    )
    assert np.all(np.abs(planted.column("x")) <= 1.0)
    assert set(planted.column("count").tolist()) <= {1, 2, 3}

    with pytest.raises(ValueError, match="missing columns"):
        plant_scenarios(ds, [Scenario("bad", {"x": 1.0}, 1)], seed=1)
    with pytest.raises(SchemaViolation):
        plant_scenarios(ds, [Scenario("oob", _full_template(1e6), 1)], seed=1)


# -- corner sweep ----------------------------------------------------------------


def test_corner_sweep_numeric_boundaries():
    schema = (ColumnSpec("t", NUMERIC_CONTINUOUS, bounds=(-100.0, 100.0)),)
    sweep = corner_case_sweep(schema)
    values = set(sweep.column("t").tolist())
    assert {-100.0, 100.0, 0.0} <= values


def test_corner_sweep_covers_every_category():
    schema = (ColumnSpec("c", CATEGORICAL, categories=("a", "b", "c")),)
    sweep = corner_case_sweep(schema)
    assert sweep.n_rows == 4  # baseline + one row per category
    assert set(sweep.column("c").tolist()) == {0, 1, 2}


def test_corner_sweep_one_factor_at_a_time_count():
    schema = mixed_schema()
    # x in [-100, 100]: {min, max, 0} (0 in bounds, -|max| == min deduped) -> 3
    # count in [0, 50]: {0, 50} plus 0-in-bounds deduped -> 2
    # color: 3 categories -> 3
    sweep = corner_case_sweep(schema)
    assert sweep.n_rows == 1 + 3 + 2 + 3
    baseline = sweep.row_values(0)
    for i in range(1, sweep.n_rows):
        row = sweep.row_values(i)
        assert sum(a != b for a, b in zip(row, baseline)) <= 1  # OFAT rows


def test_corner_sweep_extras_appended():
    schema = (ColumnSpec("t", NUMERIC_CONTINUOUS, bounds=(0.0, 10.0)),)
    sweep = corner_case_sweep(schema, extras={"t": [7.25]})
    assert 7.25 in set(sweep.column("t").tolist())
    assert sweep.provenance == "corner-sweep"
