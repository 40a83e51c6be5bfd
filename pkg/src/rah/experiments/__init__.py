from .config import ConfigError, ExperimentConfig, default_config_text, load_config, parse_config
from .e1 import F1Report, e1_alignment, macro_f1
from .e2 import E2Result, e2_proxy
from .e3 import E3Result, e3_bias
from .report import run_control, run_e1, run_e2, run_e3, summarize
from .scenarios import Scenario, ScenarioError, parse_scenario, run_scenario

__all__ = [
    "ConfigError",
    "E2Result",
    "E3Result",
    "ExperimentConfig",
    "F1Report",
    "Scenario",
    "ScenarioError",
    "default_config_text",
    "e1_alignment",
    "e2_proxy",
    "e3_bias",
    "load_config",
    "macro_f1",
    "parse_config",
    "parse_scenario",
    "run_control",
    "run_e1",
    "run_e2",
    "run_e3",
    "run_scenario",
    "summarize",
]
