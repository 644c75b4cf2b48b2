import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privlevels.attacks import (
    ATTRIBUTE_INFERENCE,
    MIA,
    AttackReport,
    CertificationThresholds,
    PropertySpec,
    auc_from_scores,
    certify,
    run_attribute_inference,
    run_mia,
    run_property_inference,
)
from privlevels.data import (
    CATEGORICAL,
    NUMERIC_CONTINUOUS,
    ColumnSpec,
    Dataset,
    split_holdout,
)
from privlevels.distance import column_ranges, dcr, record_distances
from privlevels.noise import swap_columns
from privlevels.reference import reference_dataset
from privlevels.rng import generator

from .conftest import mixed_dataset


# -- mixed distance ------------------------------------------------------------


def test_record_distance_matches_hand_computation():
    schema = (
        ColumnSpec("v", NUMERIC_CONTINUOUS),
        ColumnSpec("c", CATEGORICAL, categories=("a", "b")),
    )
    query = Dataset.from_values(schema, {"v": [0.0, 10.0], "c": [0, 1]})
    ref = Dataset.from_values(schema, {"v": [5.0], "c": [0]})
    ranges = {"v": 10.0}
    d = record_distances(query, ref, ["v", "c"], ranges)
    # row 0: (|0-5|/10 + 0) / 2 = 0.25;  row 1: (|10-5|/10 + 1) / 2 = 0.75
    assert d[0, 0] == pytest.approx(0.25)
    assert d[1, 0] == pytest.approx(0.75)


def test_dcr_matches_brute_force():
    # Oracle: double loop over records using the metric definition directly.
    query = mixed_dataset(n=20, seed=1)
    ref = mixed_dataset(n=30, seed=2)
    columns = ["x", "count", "color"]
    ranges = column_ranges(query, columns)
    fast = dcr(query, ref, columns, ranges)

    def cell_distance(i, j):
        parts = [
            abs(query.cell(i, "x") - ref.cell(j, "x")) / ranges["x"],
            abs(query.cell(i, "count") - ref.cell(j, "count")) / ranges["count"],
            1.0 if query.cell(i, "color") != ref.cell(j, "color") else 0.0,
        ]
        return sum(parts) / 3.0

    slow = np.array(
        [min(cell_distance(i, j) for j in range(ref.n_rows)) for i in range(query.n_rows)]
    )
    assert np.allclose(fast, slow, atol=1e-12)


# -- AUC -------------------------------------------------------------------------


def _auc_brute_force(pos, neg):
    wins = sum((p > q) + 0.5 * (p == q) for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_auc_matches_pairwise_oracle(seed):
    rng = generator(seed, "auc-test")
    pos = rng.integers(0, 6, 25).astype(float)  # plenty of ties
    neg = rng.integers(0, 6, 35).astype(float)
    assert auc_from_scores(pos, neg) == pytest.approx(_auc_brute_force(pos, neg))


def test_auc_extremes():
    assert auc_from_scores([2.0, 3.0], [0.0, 1.0]) == 1.0
    assert auc_from_scores([0.0], [5.0]) == 0.0
    assert auc_from_scores([1.0], [1.0]) == 0.5


# -- membership inference ----------------------------------------------------------


def test_mia_copy_of_members_is_detected():
    data = reference_dataset(n=400, seed=77)
    split = split_holdout(data, 0.5, seed=1)
    synthetic = split.members.without_identifiers()
    report = run_mia(synthetic, split.members, split.non_members)
    assert report.attack == MIA and report.algorithm == "dcr-rank-mia"
    assert report.score >= 0.95
    assert report.details["mean_member_dcr"] == 0.0


def test_mia_single_closest_member_ranks_first():
    schema = (ColumnSpec("v", NUMERIC_CONTINUOUS),)
    synthetic = Dataset.from_values(schema, {"v": [0.0]})
    members = Dataset.from_values(schema, {"v": [0.001]}, row_ids=[100])
    non_members = Dataset.from_values(schema, {"v": [5.0, 7.0, 9.0]}, row_ids=[1, 2, 3])
    report = run_mia(synthetic, members, non_members)
    assert report.score == 1.0  # the member outranks every non-member


def test_mia_invariances():
    data = reference_dataset(n=300, seed=78)
    split = split_holdout(data, 0.5, seed=2)
    synthetic = split.members.without_identifiers()
    base = run_mia(synthetic, split.members, split.non_members).score

    relabeled = run_mia(
        synthetic,
        split.members.with_row_ids(np.arange(1000, 1000 + split.members.n_rows)),
        split.non_members,
    ).score
    perm = generator(3, "mia-test").permutation(synthetic.n_rows)
    shuffled = run_mia(synthetic.select_rows(perm), split.members, split.non_members).score
    assert relabeled == base
    assert shuffled == base


def test_mia_input_validation():
    data = mixed_dataset(n=20)
    split = split_holdout(data, 0.5, seed=3)
    empty = data.select_rows([])
    with pytest.raises(ValueError, match="empty"):
        run_mia(empty, split.members, split.non_members)
    with pytest.raises(ValueError, match="non-empty"):
        run_mia(data, empty, split.non_members)
    mismatched = Dataset.from_values(
        (ColumnSpec("z", NUMERIC_CONTINUOUS),), {"z": [1.0]}
    )
    with pytest.raises(ValueError, match="comparable"):
        run_mia(mismatched, split.members, split.non_members)


# -- attribute inference -------------------------------------------------------------


def test_aia_exact_copy_k1_is_perfect():
    targets = reference_dataset(n=300, seed=79)
    synthetic = targets.without_identifiers()
    report = run_attribute_inference(
        synthetic, targets, ["age", "income", "region"], "segment", k=1
    )
    assert report.score == 1.0
    assert report.attack == ATTRIBUTE_INFERENCE


def test_aia_independent_secret_matches_chance():
    rng = generator(5, "aia-test")
    schema = (
        ColumnSpec("q", NUMERIC_CONTINUOUS),
        ColumnSpec("s", CATEGORICAL, categories=("a", "b", "c", "d")),
    )
    targets = Dataset.from_values(
        schema, {"q": rng.random(2000), "s": rng.integers(0, 4, 2000)}
    )
    synthetic = Dataset.from_values(
        schema, {"q": rng.random(2000), "s": rng.integers(0, 4, 2000)}
    )
    report = run_attribute_inference(synthetic, targets, ["q"], "s", k=5)
    assert abs(report.score - 0.25) <= 0.05


def test_aia_degenerate_single_class():
    schema = (
        ColumnSpec("q", NUMERIC_CONTINUOUS),
        ColumnSpec("s", CATEGORICAL, categories=("only", "other")),
    )
    targets = Dataset.from_values(schema, {"q": [0.1, 0.2, 0.3], "s": [0, 0, 0]})
    synthetic = Dataset.from_values(schema, {"q": [0.15, 0.25], "s": [0, 0]})
    report = run_attribute_inference(synthetic, targets, ["q"], "s", k=1)
    assert report.score == 1.0 and report.baseline == 1.0 and report.uplift == 0.0


def test_aia_vote_ties_take_lowest_code():
    schema = (
        ColumnSpec("q", NUMERIC_CONTINUOUS),
        ColumnSpec("s", CATEGORICAL, categories=("lo", "hi")),
    )
    # k=2 neighbors vote one each; the tie must resolve to code 0 ("lo").
    synthetic = Dataset.from_values(schema, {"q": [0.0, 1.0], "s": [1, 0]})
    targets = Dataset.from_values(schema, {"q": [0.5], "s": [0]})
    report = run_attribute_inference(synthetic, targets, ["q"], "s", k=2)
    assert report.score == 1.0


def test_aia_validation():
    data = mixed_dataset(n=30)
    with pytest.raises(ValueError, match="categorical"):
        run_attribute_inference(data, data, ["color"], "x", k=1)
    with pytest.raises(ValueError, match="quasi-identifier"):
        run_attribute_inference(data, data, ["color"], "color", k=1)
    with pytest.raises(ValueError, match="exceeds"):
        run_attribute_inference(data, data, ["x"], "color", k=31)


# -- property inference ----------------------------------------------------------------


def test_pia_exact_copy_has_zero_errors():
    data = mixed_dataset(n=200, seed=6)
    report = run_property_inference(data, data)
    assert report.score == 0.0
    assert all(entry["error"] == 0.0 for entry in report.details["per_statistic"])


def test_pia_relative_error_arithmetic():
    schema = (ColumnSpec("v", NUMERIC_CONTINUOUS),)
    real = Dataset.from_values(schema, {"v": [100.0] * 10})
    synthetic = Dataset.from_values(schema, {"v": [110.0] * 10})
    report = run_property_inference(synthetic, real, [PropertySpec("v", "mean")])
    assert report.score == pytest.approx(0.10)


def test_pia_swapped_columns_recover_exactly():
    data = mixed_dataset(n=150, seed=7)
    swapped = swap_columns(data, ["x", "count"], seed=9)
    report = run_property_inference(swapped, data)
    assert report.score == 0.0  # swap preserves every single-column statistic


def test_pia_wrong_column_kind():
    data = mixed_dataset(n=30)
    with pytest.raises(ValueError, match="histogram"):
        run_property_inference(data, data, [PropertySpec("x", "histogram")])
    with pytest.raises(ValueError, match="numeric"):
        run_property_inference(data, data, [PropertySpec("color", "mean")])


# -- certification ------------------------------------------------------------------


def _report(attack, score, baseline=0.0):
    return AttackReport(
        attack=attack, algorithm="test", score=score, baseline=baseline, config={}, seed=0
    )


def test_certify_margins():
    verdict = certify(
        [_report(MIA, 0.52, baseline=0.5)],
        CertificationThresholds(max_mia_auc=0.60, required=(MIA,)),
    )
    assert verdict.passed
    assert verdict.margins[MIA] == pytest.approx(0.08)


def test_certify_failure_names_attack():
    verdict = certify(
        [_report(ATTRIBUTE_INFERENCE, 0.70, baseline=0.40)],
        CertificationThresholds(max_aia_uplift=0.10, required=(ATTRIBUTE_INFERENCE,)),
    )
    assert not verdict.passed
    assert verdict.failing == (ATTRIBUTE_INFERENCE,)
    assert verdict.margins[ATTRIBUTE_INFERENCE] == pytest.approx(-0.20)


def test_certify_empty_required_set_is_flagged_vacuous_pass():
    verdict = certify([], CertificationThresholds())
    assert verdict.passed
    assert any("vacuous" in w for w in verdict.warnings)


def test_certify_missing_report_is_an_error():
    thresholds = CertificationThresholds(max_mia_auc=0.6, required=(MIA,))
    with pytest.raises(ValueError, match="missing required"):
        certify([], thresholds)


@settings(max_examples=50, deadline=None)
@given(
    score=st.floats(0.0, 1.0),
    limit=st.floats(0.0, 1.0),
    slack=st.floats(0.0, 0.5),
)
def test_certify_is_monotone_in_thresholds(score, limit, slack):
    reports = [_report(MIA, score, baseline=0.5)]
    tight = certify(reports, CertificationThresholds(max_mia_auc=limit, required=(MIA,)))
    weak_limit = min(1.0, limit + slack)
    weak = certify(reports, CertificationThresholds(max_mia_auc=weak_limit, required=(MIA,)))
    if tight.passed:
        assert weak.passed  # weakening a threshold can never flip pass -> fail
