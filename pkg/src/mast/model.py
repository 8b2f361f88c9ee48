"""The staff-training risk model: weighted risk factors, CPT generation, cost estimate.

Four risk factors drive a Yes/No "Staff Training" node; a utility node prices
training at a base cost when required and 0 otherwise. Each CPT column is
built by scoring every factor's risk exposure (outcome value x impact weight),
mapping exposures to half-step contributions, summing, and scaling to a
probability with a clamp at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import inference
from .diagram import (
    ChanceNode,
    CptTable,
    InfluenceDiagram,
    OutcomeScale,
    UtilityNode,
    enumerate_combinations,
    validate,
)

OUTCOME_STATES = ("Probable", "Possible", "Remote")
TRAINING_STATES = ("Yes", "No")

DEFAULT_OUTCOME_VALUES: Mapping[str, float] = {
    "Probable": 0.99999,
    "Possible": 0.5,
    "Remote": 0.00001,
}
UNIFORM_PRIOR: Mapping[str, float] = {state: 1.0 / 3.0 for state in OUTCOME_STATES}

DEFAULT_BASE_COST = 100000.0
TRAINING_NODE_ID = "training"
COST_NODE_ID = "cost"

# Stable factor ids and display labels, in canonical declaration order.
DEFAULT_FACTORS: tuple[tuple[str, str], ...] = (
    ("software", "Lack of experience with project software"),
    ("new_staff", "Newly Appointed Staff"),
    ("quality", "Staff not well versed with the required quality standards"),
    ("environment", "Lack of experience with project environment"),
)
FACTOR_IDS = tuple(fid for fid, _ in DEFAULT_FACTORS)

MAX_IMPACT = 10.0


@dataclass(frozen=True)
class RiskFactor:
    """A 3-state risk variable with a numeric outcome map and a severity weight in [0, 10]."""

    id: str
    label: str
    impact: float
    outcome_values: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_OUTCOME_VALUES))
    prior: Mapping[str, float] = field(default_factory=lambda: dict(UNIFORM_PRIOR))

    def __post_init__(self) -> None:
        object.__setattr__(self, "impact", float(self.impact))
        object.__setattr__(self, "outcome_values", dict(self.outcome_values))
        object.__setattr__(self, "prior", dict(self.prior))
        if not 0.0 <= self.impact <= MAX_IMPACT:
            raise ValueError(f"impact for {self.id!r} must be in [0, 10], got {self.impact}")
        missing = [s for s in OUTCOME_STATES if s not in self.outcome_values]
        if missing:
            raise ValueError(f"outcome values for {self.id!r} missing states: {', '.join(missing)}")
        values = [self.outcome_values[s] for s in OUTCOME_STATES]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError(f"outcome values for {self.id!r} must be in [0, 1]")
        if not values[0] > values[1] > values[2]:
            raise ValueError(
                f"outcome values for {self.id!r} must be strictly decreasing "
                f"Probable > Possible > Remote, got {values}")
        prior_values = [self.prior.get(s) for s in OUTCOME_STATES]
        if any(v is None for v in prior_values) or set(self.prior) != set(OUTCOME_STATES):
            raise ValueError(f"prior for {self.id!r} must cover exactly the states {OUTCOME_STATES}")
        if abs(sum(prior_values) - 1.0) > 1e-9:
            raise ValueError(f"prior for {self.id!r} must sum to 1, got {sum(prior_values)!r}")

    @property
    def scale(self) -> OutcomeScale:
        return OutcomeScale(OUTCOME_STATES, numeric_values=self.outcome_values)


@dataclass(frozen=True)
class MastModel:
    """The assembled staff-training decision network plus its factor parameters."""

    factors: tuple[RiskFactor, ...]
    training_node_id: str
    base_cost: float
    diagram: InfluenceDiagram

    @property
    def factor_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.factors)

    def factor(self, factor_id: str) -> RiskFactor:
        for f in self.factors:
            if f.id == factor_id:
                return f
        raise KeyError(
            f"unknown factor {factor_id!r} (valid: {', '.join(self.factor_ids)})")


@dataclass(frozen=True)
class TrainingEstimate:
    """P(training required), the same value as a percentage, and the expected cost."""

    probability: float
    percentage: float
    cost: float


def risk_exposure(outcome_value: float, impact: float) -> float:
    """Exposure = occurrence value x severity weight; the plain product, unrounded."""
    if not 0.0 <= outcome_value <= 1.0:
        raise ValueError(f"outcome value must be in [0, 1], got {outcome_value}")
    if not 0.0 <= impact <= MAX_IMPACT:
        raise ValueError(f"impact must be in [0, 10], got {impact}")
    return outcome_value * impact


def contribution(exposure: float) -> float:
    """Map an exposure in [0, 10] to its half-step contribution.

    First-matching-branch ladder; integer boundaries fall in the lower bucket
    (2.0 -> 0.5, 3.0 -> 1.0, ...). Comparisons are exact, no epsilon.
    """
    if not 0.0 <= exposure <= 10.0:
        raise ValueError(f"exposure must be in [0, 10], got {exposure}")
    if exposure < 1.0:
        return 0.0
    if exposure <= 2.0:
        return 0.5
    if exposure <= 3.0:
        return 1.0
    if exposure <= 4.0:
        return 1.5
    if exposure <= 5.0:
        return 2.0
    if exposure <= 6.0:
        return 2.5
    if exposure <= 7.0:
        return 3.0
    if exposure <= 8.0:
        return 3.5
    if exposure <= 9.0:
        return 4.0
    return 4.5


def generate_cpt(factors: Sequence[RiskFactor]) -> CptTable:
    """Training CPT: one (Yes, No) column per factor-state combination.

    For each combination, the summed contributions are divided by 10 and
    clamped at 1 to give P(Yes).
    """
    scales = [f.scale for f in factors]
    columns = []
    for combo in enumerate_combinations(scales):
        total = 0.0
        for factor, state in zip(factors, combo):
            total += contribution(risk_exposure(factor.outcome_values[state], factor.impact))
        p_yes = total / 10.0
        if p_yes > 1.0:
            p_yes = 1.0
        columns.append((p_yes, 1.0 - p_yes))
    return CptTable(
        child_states=TRAINING_STATES,
        parent_ids=tuple(f.id for f in factors),
        columns=tuple(columns),
    )


def assemble_model(factors: Sequence[RiskFactor], base_cost: float = DEFAULT_BASE_COST) -> MastModel:
    """Wire factors -> training -> cost into a validated diagram."""
    if base_cost < 0:
        raise ValueError(f"base cost must be >= 0, got {base_cost}")
    factors = tuple(factors)
    ids = [f.id for f in factors]
    if len(set(ids)) != len(ids):
        raise ValueError(f"factor ids must be unique, got {ids}")

    cpt = generate_cpt(factors)
    chance_nodes = [
        ChanceNode(id=f.id, label=f.label, scale=f.scale, prior=f.prior)
        for f in factors
    ]
    chance_nodes.append(ChanceNode(
        id=TRAINING_NODE_ID,
        label="Staff Training",
        scale=OutcomeScale(TRAINING_STATES),
        parents=tuple(ids),
        cpt=cpt,
    ))
    cost_node = UtilityNode(
        id=COST_NODE_ID,
        label="Cost",
        parents=(TRAINING_NODE_ID,),
        utilities=(float(base_cost), 0.0),
    )
    diagram = InfluenceDiagram(chance_nodes=tuple(chance_nodes), utility_nodes=(cost_node,))
    violations = validate(diagram)
    if violations:
        raise ValueError(
            "generated diagram failed validation: " + "; ".join(str(v) for v in violations))
    return MastModel(
        factors=factors,
        training_node_id=TRAINING_NODE_ID,
        base_cost=float(base_cost),
        diagram=diagram,
    )


def build_model(
    impacts: Sequence[float],
    base_cost: float = DEFAULT_BASE_COST,
    *,
    outcome_values: Mapping[str, Mapping[str, float]] | None = None,
    priors: Mapping[str, Mapping[str, float]] | None = None,
    labels: Mapping[str, str] | None = None,
) -> MastModel:
    """Build the four-factor model from impact weights, in canonical factor order.

    ``outcome_values``, ``priors`` and ``labels`` optionally override single
    factors by id; everything else uses the defaults.
    """
    if len(impacts) != len(DEFAULT_FACTORS):
        raise ValueError(f"expected {len(DEFAULT_FACTORS)} impacts, got {len(impacts)}")
    overrides_ok = set(FACTOR_IDS)
    for name, mapping in (("outcome_values", outcome_values), ("priors", priors), ("labels", labels)):
        unknown = set(mapping or {}) - overrides_ok
        if unknown:
            raise ValueError(f"{name} override for unknown factor ids: {', '.join(sorted(unknown))}")

    factors = []
    for (fid, default_label), impact in zip(DEFAULT_FACTORS, impacts):
        factors.append(RiskFactor(
            id=fid,
            label=(labels or {}).get(fid, default_label),
            impact=impact,
            outcome_values=(outcome_values or {}).get(fid, DEFAULT_OUTCOME_VALUES),
            prior=(priors or {}).get(fid, UNIFORM_PRIOR),
        ))
    return assemble_model(factors, base_cost)


def infer_training(
    model: MastModel,
    evidence: inference.Evidence,
    *,
    state_limit: int = inference.DEFAULT_STATE_LIMIT,
) -> TrainingEstimate:
    """Training probability, percentage and expected cost under the given evidence.

    Evidence may only name risk factors; a factor without evidence is
    marginalized over its prior (the clear-evidence semantics).
    """
    for node_id in evidence:
        if node_id not in model.factor_ids:
            raise ValueError(
                f"evidence is only accepted on risk factors, not {node_id!r} "
                f"(valid: {', '.join(model.factor_ids)})")
    post = inference.posterior(
        model.diagram, evidence, model.training_node_id, state_limit=state_limit)
    probability = post["Yes"]
    cost = inference.expected_utility(model.diagram, evidence, state_limit=state_limit)
    return TrainingEstimate(
        probability=probability,
        percentage=probability * 100.0,
        cost=cost,
    )
