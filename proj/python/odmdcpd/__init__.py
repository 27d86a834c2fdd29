"""Streaming change-point detection via truncated online DMD with control."""

from ._core import (
    ConfigError,
    CpdConfig,
    CpdEngine,
    CpdScore,
    DataError,
    GeneratedSeries,
    HankelConfig,
    ModeSet,
    NabProfile,
    NumericalError,
    OnlineDmd,
    OnlineSvd,
    RankSuggestion,
    ScoreBasis,
    StateError,
    StepsSpec,
    TwoTankSpec,
    WindowLayout,
    default_window_length,
    expand_control_matrix,
    generate_steps,
    hankelize,
    nab_score,
    simulate_two_tanks,
    suggest_rank,
)

__all__ = [
    "ConfigError",
    "CpdConfig",
    "CpdEngine",
    "CpdScore",
    "DataError",
    "GeneratedSeries",
    "HankelConfig",
    "ModeSet",
    "NabProfile",
    "NumericalError",
    "OnlineDmd",
    "OnlineSvd",
    "RankSuggestion",
    "ScoreBasis",
    "StateError",
    "StepsSpec",
    "TwoTankSpec",
    "WindowLayout",
    "default_window_length",
    "expand_control_matrix",
    "generate_steps",
    "hankelize",
    "nab_score",
    "simulate_two_tanks",
    "suggest_rank",
]

__version__ = "0.1.0"
