"""Scenario generators, table/sweep runners, model files and the CLI."""
from .runs import (  # noqa: F401
    CsvTable,
    ErrorRecord,
    ExperimentConfig,
    make_scenario,
    run_conditioning_table,
    run_error_sweep,
    run_geometry_table,
)
from .scenarios import gen_helmholtz, gen_transcendental  # noqa: F401
from .modelio import dumps_model, load_model, loads_model, save_model  # noqa: F401
from .cli import cli_main  # noqa: F401
