"""Multi-agent LLM debates over explicit, strength-weighted belief boxes."""

from .backend import (
    BackendConfig,
    ChatMessage,
    HTTPBackend,
    RequestContext,
    ScriptedBackend,
    load_script,
    rules_script,
)
from .core import (
    BeliefBox,
    OpenMindedness,
    Polarity,
    Proposition,
    belief_change_rate,
    mean_belief_score,
    openness_coefficient,
    revise_strength,
    round_half_up,
)
from .datasets import AporiaSample, MMLUSample, load_aporia, load_dataset, load_mmlu, make_belief, sample_items
from .debate import Agent, DebateConfig, DebateTranscript, extract_change, run_debate, trajectory
from .errors import (
    BackendError,
    BeliefBoxError,
    ConfigError,
    DataError,
    DataQualityError,
    DomainError,
    NumericError,
    ParseError,
    UndefinedStatisticError,
)
from .experiments import (
    ExperimentResult,
    run_bfi2,
    run_openmindedness,
    run_peer_pressure,
    run_persuasion,
    score_bfi2,
)
from .parsing import parse_choice, parse_likert, parse_yes_no
from .stats import RegressionReport, f_test_univariate, mae, pearson_r

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "AporiaSample",
    "BackendConfig",
    "BackendError",
    "BeliefBox",
    "BeliefBoxError",
    "ChatMessage",
    "ConfigError",
    "DataError",
    "DataQualityError",
    "DebateConfig",
    "DebateTranscript",
    "DomainError",
    "ExperimentResult",
    "HTTPBackend",
    "MMLUSample",
    "NumericError",
    "OpenMindedness",
    "ParseError",
    "Polarity",
    "Proposition",
    "RegressionReport",
    "RequestContext",
    "ScriptedBackend",
    "UndefinedStatisticError",
    "belief_change_rate",
    "extract_change",
    "f_test_univariate",
    "load_aporia",
    "load_dataset",
    "load_mmlu",
    "load_script",
    "mae",
    "make_belief",
    "mean_belief_score",
    "openness_coefficient",
    "parse_choice",
    "parse_likert",
    "parse_yes_no",
    "pearson_r",
    "revise_strength",
    "round_half_up",
    "rules_script",
    "run_bfi2",
    "run_debate",
    "run_openmindedness",
    "run_peer_pressure",
    "run_persuasion",
    "sample_items",
    "score_bfi2",
    "trajectory",
]
