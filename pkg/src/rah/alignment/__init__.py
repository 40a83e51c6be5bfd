from .control import (
    Decision,
    FilterRule,
    ForwardDecision,
    IntentRules,
    ObfuscationError,
    ObfuscationPlan,
    Strategy,
    filter_recommendations,
    obfuscate,
)
from .loop import VARIANTS, LoopConfig, LoopTrace, RunError, learn_one, learn_set, proxy_actions
from .store import MigrationError, PersonalityDecodeError, store_load, store_save

__all__ = [
    "VARIANTS",
    "Decision",
    "FilterRule",
    "ForwardDecision",
    "IntentRules",
    "LoopConfig",
    "LoopTrace",
    "MigrationError",
    "ObfuscationError",
    "ObfuscationPlan",
    "PersonalityDecodeError",
    "RunError",
    "Strategy",
    "filter_recommendations",
    "learn_one",
    "learn_set",
    "obfuscate",
    "proxy_actions",
    "store_load",
    "store_save",
]
