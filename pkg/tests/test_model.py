"""Risk-exposure scoring, the contribution ladder, CPT generation, model assembly."""

import random

import pytest

from mast.diagram import combination_index, validate
from mast.model import (
    DEFAULT_OUTCOME_VALUES,
    FACTOR_IDS,
    OUTCOME_STATES,
    RiskFactor,
    build_model,
    contribution,
    generate_cpt,
    infer_training,
    risk_exposure,
)

import oracles

TABLE1_IMPACTS = [6, 9, 2, 4]  # software, new_staff, quality, environment
TABLE1_EVIDENCE = {
    "software": "Possible",
    "new_staff": "Remote",
    "quality": "Possible",
    "environment": "Probable",
}


class TestRiskExposure:
    @pytest.mark.parametrize("value,impact,expected", [
        (0.5, 6, 3.0),
        (0.99999, 4, 3.99996),
        (0.00001, 9, 0.00009),
        (0.5, 2, 1.0),
        (0.73, 0, 0.0),
    ])
    def test_products_are_exact(self, value, impact, expected):
        assert risk_exposure(value, impact) == expected

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            risk_exposure(1.5, 5)
        with pytest.raises(ValueError):
            risk_exposure(0.5, 11)
        with pytest.raises(ValueError):
            risk_exposure(-0.1, 5)


class TestContribution:
    @pytest.mark.parametrize("exposure,expected", [
        (3.0, 1.0),
        (3.99996, 1.5),
        (1.0, 0.5),
        (0.00009, 0.0),
        (0.999999, 0.0),
        (10.0, 4.5),
    ])
    def test_published_examples(self, exposure, expected):
        assert contribution(exposure) == expected

    @pytest.mark.parametrize("boundary,expected", [
        (1.0, 0.5), (2.0, 0.5), (3.0, 1.0), (4.0, 1.5), (5.0, 2.0),
        (6.0, 2.5), (7.0, 3.0), (8.0, 3.5), (9.0, 4.0), (10.0, 4.5),
    ])
    def test_integer_boundaries_take_lower_bucket(self, boundary, expected):
        assert contribution(boundary) == expected

    def test_matches_branch_list_oracle_on_grid(self):
        exposure = 0.0
        while exposure <= 10.0:
            assert contribution(exposure) == oracles.ladder_contribution(exposure)
            exposure = round(exposure + 0.125, 6)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            contribution(-0.5)
        with pytest.raises(ValueError):
            contribution(10.5)


class TestRiskFactor:
    def test_defaults(self):
        f = RiskFactor(id="software", label="x", impact=6)
        assert f.outcome_values == dict(DEFAULT_OUTCOME_VALUES)
        assert sum(f.prior.values()) == pytest.approx(1.0, abs=1e-9)

    def test_impact_range_enforced(self):
        with pytest.raises(ValueError, match="impact"):
            RiskFactor(id="f", label="f", impact=10.5)

    def test_outcome_values_must_decrease(self):
        with pytest.raises(ValueError, match="decreasing"):
            RiskFactor(id="f", label="f", impact=5,
                       outcome_values={"Probable": 0.5, "Possible": 0.5, "Remote": 0.1})

    def test_prior_must_normalize(self):
        with pytest.raises(ValueError, match="sum"):
            RiskFactor(id="f", label="f", impact=5,
                       prior={"Probable": 0.5, "Possible": 0.5, "Remote": 0.5})


def factors_for(impacts):
    return [RiskFactor(id=fid, label=fid, impact=impact)
            for fid, impact in zip(FACTOR_IDS, impacts)]


class TestGenerateCpt:
    def test_table1_column(self):
        cpt = generate_cpt(factors_for(TABLE1_IMPACTS))
        combo = tuple(TABLE1_EVIDENCE[fid] for fid in FACTOR_IDS)
        scales = [f.scale for f in factors_for(TABLE1_IMPACTS)]
        column = cpt.columns[combination_index(combo, scales)]
        assert column[0] == pytest.approx(0.3, abs=1e-12)
        assert column[1] == pytest.approx(0.7, abs=1e-12)

    def test_all_remote_is_zero(self):
        rng = random.Random(1)
        impacts = [rng.uniform(0, 10) for _ in range(4)]
        cpt = generate_cpt(factors_for(impacts))
        scales = [f.scale for f in factors_for(impacts)]
        column = cpt.columns[combination_index(("Remote",) * 4, scales)]
        assert column == (0.0, 1.0)

    def test_max_impacts_all_probable_clamps_to_one(self):
        cpt = generate_cpt(factors_for([10, 10, 10, 10]))
        assert cpt.columns[0] == (1.0, 0.0)  # all-Probable is the first canonical combination

    def test_all_columns_match_nested_loop_oracle(self):
        rng = random.Random(2)
        for _ in range(20):
            impacts = [rng.uniform(0, 10) for _ in range(4)]
            cpt = generate_cpt(factors_for(impacts))
            expected = oracles.training_columns(impacts)
            assert len(cpt.columns) == 81
            for ours, theirs in zip(cpt.columns, expected):
                assert ours[0] == theirs[0]
                assert ours[1] == theirs[1]

    def test_granularity_and_normalization(self):
        rng = random.Random(3)
        for _ in range(40):
            impacts = [rng.uniform(0, 10) for _ in range(4)]
            cpt = generate_cpt(factors_for(impacts))
            for column in cpt.columns:
                p_yes = column[0]
                assert 0.0 <= p_yes <= 1.0
                assert abs(p_yes - round(p_yes / 0.05) * 0.05) <= 1e-12
                assert abs(sum(column) - 1.0) <= 1e-12


class TestBuildModel:
    def test_diagram_is_valid_and_wired(self):
        model = build_model(TABLE1_IMPACTS, 100000.0)
        assert validate(model.diagram) == []
        training = model.diagram.chance_node("training")
        assert training.scale.states == ("Yes", "No")
        assert training.parents == FACTOR_IDS
        cost = model.diagram.utility_nodes[0]
        assert cost.parents == ("training",)
        assert cost.utilities == (100000.0, 0.0)

    def test_table1_column_through_model(self):
        model = build_model(TABLE1_IMPACTS)
        training = model.diagram.chance_node("training")
        scales = model.diagram.parent_scales(training.parents)
        combo = tuple(TABLE1_EVIDENCE[fid] for fid in FACTOR_IDS)
        column = training.cpt.columns[combination_index(combo, scales)]
        assert column[0] == pytest.approx(0.3, abs=1e-12)

    def test_zero_impacts_never_train(self):
        model = build_model([0, 0, 0, 0])
        training = model.diagram.chance_node("training")
        assert all(column == (0.0, 1.0) for column in training.cpt.columns)

    def test_rejects_bad_arity_and_range(self):
        with pytest.raises(ValueError, match="4 impacts"):
            build_model([6, 9, 4])
        with pytest.raises(ValueError, match="impact"):
            build_model([6, 9, 4, 11])
        with pytest.raises(ValueError, match="base cost"):
            build_model(TABLE1_IMPACTS, -5)

    def test_overrides_regenerate_cpt(self):
        flat = {"Probable": 0.9, "Possible": 0.5, "Remote": 0.1}
        model = build_model([10, 0, 0, 0], outcome_values={"software": flat})
        training = model.diagram.chance_node("training")
        # software Remote now has exposure 0.1*10 = 1 -> contribution 0.5 -> P(Yes) 0.05
        scales = model.diagram.parent_scales(training.parents)
        column = training.cpt.columns[combination_index(("Remote",) * 4, scales)]
        assert column[0] == pytest.approx(0.05, abs=1e-12)

    def test_unknown_override_id_rejected(self):
        with pytest.raises(ValueError, match="unknown factor"):
            build_model(TABLE1_IMPACTS, priors={"ghost": {"Probable": 1.0}})


class TestInferTraining:
    def test_table1_golden(self):
        model = build_model(TABLE1_IMPACTS)
        estimate = infer_training(model, TABLE1_EVIDENCE)
        assert estimate.probability == pytest.approx(0.3, abs=1e-12)
        assert estimate.percentage == pytest.approx(30.0, abs=1e-10)
        assert estimate.cost == pytest.approx(30000.0, abs=1e-9)
        assert estimate.percentage == estimate.probability * 100.0

    def test_all_remote(self):
        model = build_model(TABLE1_IMPACTS)
        estimate = infer_training(model, {fid: "Remote" for fid in FACTOR_IDS})
        assert estimate.probability == 0.0
        assert estimate.percentage == 0.0
        assert estimate.cost == 0.0

    def test_no_evidence_matches_weighted_oracle(self):
        model = build_model(TABLE1_IMPACTS)
        estimate = infer_training(model, {})
        expected = oracles.posterior(model.diagram, {}, "training")["Yes"]
        assert estimate.probability == pytest.approx(expected, abs=1e-12)
        assert estimate.cost == pytest.approx(
            oracles.expected_utility(model.diagram, {}), abs=1e-9)

    def test_rejects_evidence_on_training(self):
        model = build_model(TABLE1_IMPACTS)
        with pytest.raises(ValueError, match="risk factors"):
            infer_training(model, {"training": "Yes"})

    def test_rejects_evidence_on_cost(self):
        model = build_model(TABLE1_IMPACTS)
        with pytest.raises(ValueError, match="risk factors"):
            infer_training(model, {"cost": "Yes"})

    def test_full_evidence_equals_cpt_lookup(self):
        rng = random.Random(4)
        for _ in range(25):
            impacts = [rng.uniform(0, 10) for _ in range(4)]
            model = build_model(impacts)
            evidence = {fid: rng.choice(OUTCOME_STATES) for fid in FACTOR_IDS}
            training = model.diagram.chance_node("training")
            scales = model.diagram.parent_scales(training.parents)
            combo = tuple(evidence[fid] for fid in FACTOR_IDS)
            direct = training.cpt.columns[combination_index(combo, scales)][0]
            estimate = infer_training(model, evidence)
            assert estimate.probability == pytest.approx(direct, abs=1e-12)


class TestMonotonicity:
    SEVERITY_RANK = {"Remote": 0, "Possible": 1, "Probable": 2}

    def test_more_probable_evidence_never_lowers_p_yes(self):
        rng = random.Random(5)
        ladder = ["Remote", "Possible", "Probable"]
        for _ in range(60):
            impacts = [rng.uniform(0, 10) for _ in range(4)]
            model = build_model(impacts)
            evidence = {fid: rng.choice(ladder) for fid in FACTOR_IDS}
            fid = rng.choice(FACTOR_IDS)
            rank = self.SEVERITY_RANK[evidence[fid]]
            if rank == 2:
                continue
            bumped = dict(evidence)
            bumped[fid] = ladder[rank + 1]
            low = infer_training(model, evidence).probability
            high = infer_training(model, bumped).probability
            assert high >= low

    def test_higher_impact_never_lowers_p_yes(self):
        rng = random.Random(6)
        for _ in range(60):
            impacts = [rng.uniform(0, 10) for _ in range(4)]
            evidence = {fid: rng.choice(OUTCOME_STATES) for fid in FACTOR_IDS}
            index = rng.randrange(4)
            raised = list(impacts)
            raised[index] = rng.uniform(impacts[index], 10.0)
            low = infer_training(build_model(impacts), evidence).probability
            high = infer_training(build_model(raised), evidence).probability
            assert high >= low

    def test_clamp_reachable(self):
        model = build_model([10, 10, 10, 10])
        estimate = infer_training(model, {fid: "Probable" for fid in FACTOR_IDS})
        assert estimate.probability == 1.0
