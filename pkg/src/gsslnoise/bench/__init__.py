"""Experiment grid runner and reporting."""

from .config import load_config, parse_config, build_config
from .grid import (
    ALGORITHM_ORDER,
    DEFAULT_ALGORITHMS,
    DEFAULT_LABEL_FRACTIONS,
    DEFAULT_NOISE_RATES,
    AffinitySpec,
    AlgorithmSpec,
    ConfigError,
    DatasetSpec,
    ExperimentRecord,
    GridConfig,
    accuracies,
    run_grid,
    sort_records,
)
from .report import (
    AggregateRow,
    aggregate,
    emit_report,
    read_aggregate_csv,
    read_records_csv,
    render_markdown,
    write_aggregate_csv,
    write_records_csv,
)
