from gmi.bench.generators import SyntheticGenerator, example1_models, make_confounded_generators
from gmi.bench.harness import (
    DEFAULT_GAMMA_GRID,
    BenchmarkConfig,
    BenchmarkTask,
    MetricsReport,
    build_benchmark,
    run_benchmark,
    gamma_sweep,
    report_json,
    report_table,
    sweep_csv,
)

__all__ = [
    "SyntheticGenerator",
    "example1_models",
    "make_confounded_generators",
    "DEFAULT_GAMMA_GRID",
    "BenchmarkConfig",
    "BenchmarkTask",
    "MetricsReport",
    "build_benchmark",
    "run_benchmark",
    "gamma_sweep",
    "report_json",
    "report_table",
    "sweep_csv",
]
