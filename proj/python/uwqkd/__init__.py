"""Underwater QKD link models: BB84, relays, decoy states and Monte Carlo gate timing."""

import json

from ._core import (
    BracketError,
    ConfigError,
    ConvergenceError,
    DomainError,
    LinkGeometry,
    LinkParams,
    ModelError,
    Scenario,
    TurbulenceParams,
    WaterType,
    achievable_distance,
    binary_entropy,
    commands,
    correction_coefficient,
    decoy_report,
    direct_link_report,
    load,
    optimal_relay_count,
    parse,
    path_loss,
    power_transfer_mu,
    presets,
    qber_upper_bound,
    relay_accumulated_background,
    run,
    simulate,
    wave_structure_closed,
    wave_structure_numeric,
)


def table(command, scenario):
    """Runs a subcommand and returns its table as a dict with schema, rows and metadata."""
    return json.loads(run(command, scenario, "json"))


__version__ = "0.1.0"
