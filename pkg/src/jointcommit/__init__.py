"""Reputation-gated joint commitment in the one-shot Prisoner's Dilemma.

Analytic reputation predictions and payoffs, rare-mutation fixation
probabilities, the selection-mutation Monte Carlo, an image-matrix opinion
simulation that validates the predictions, and a CLI harness that runs the
standard experiment set and writes CSV files.
"""

__version__ = "0.1.0"

from .strategies import (
    ALL_STRATEGIES,
    DEFAULT_NORM,
    CommitmentRule,
    CooperationRule,
    Norm,
    Opinion,
    Strategy,
    assess,
    choose_action,
    commit_offer,
    form_arrangement,
    is_faker,
    is_mean,
    is_nice,
)
from .payoffs import (
    COOPERATION_COST,
    GameParams,
    PopulationState,
    PredictionKind,
    Regime,
    ReputationPrediction,
    absorption_probability,
    average_payoff,
    commit_probability,
    pairwise_payoff,
    payoff_matrix,
    predict_reputation,
    predicted_reputations,
    redemption_possible,
)
from .evolution import (
    EvolutionParams,
    Trajectory,
    cooperation_frequency,
    evolution_step,
    fermi_adoption_probability,
    initial_population,
    run_evolution,
    sweep,
)
from .fixation import (
    FixationQuery,
    FixationResult,
    fixation_probability,
    fixation_table,
    format_table_text,
    state_payoffs,
)
from .reputation import (
    ImageMatrix,
    ReputationReport,
    RoundRecord,
    play_round,
    sample_compositions,
    simulate_reputations,
)
