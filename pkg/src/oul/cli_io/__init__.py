"""Configuration files, result tables and the ``oul`` command line."""
from .acceptance import CHECKS, SUITES, CheckContext, CheckResult, run_check, run_suite
from .commands import cmd_covariance, cmd_eigfun, cmd_ness, cmd_propagate, cmd_spectrum, cmd_verify, report_json
from .config import ModelConfig, Options, GridOptions, parse_config, parse_config_text, serialize_config
from .table import ResultTable

__all__ = [
    "CHECKS",
    "SUITES",
    "CheckContext",
    "CheckResult",
    "run_check",
    "run_suite",
    "cmd_covariance",
    "cmd_eigfun",
    "cmd_ness",
    "cmd_propagate",
    "cmd_spectrum",
    "cmd_verify",
    "report_json",
    "ModelConfig",
    "Options",
    "GridOptions",
    "parse_config",
    "parse_config_text",
    "serialize_config",
    "ResultTable",
]
