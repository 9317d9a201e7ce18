"""Experiment drivers, configuration files, CSV output and the CLI."""
from .config import ScenarioConfig, format_config, parse_config, read_config, write_config
from .drivers import (
    AdsorptionRun,
    ConvergenceRow,
    IsothermPoint,
    run_adsorption,
    run_convergence,
    run_coupled_convergence,
    run_isotherm_point,
    run_isotherm_sweep,
    run_stability_demo,
    simulate,
    stability_bracket,
)
