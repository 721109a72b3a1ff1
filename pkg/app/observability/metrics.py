"""Prometheus metrics for solver runs.

Counters and the duration histogram live in the default registry; a run
writes them to a text file next to its sidecar log (there is no HTTP
endpoint to scrape).
"""
from __future__ import annotations

from pathlib import Path

from prometheus_client import REGISTRY, Counter, Histogram, write_to_textfile

# Prometheus metric names as constants
SOLVES_NAME = "ghostlab_solves_total"
SOLVE_ITERATIONS_NAME = "ghostlab_descent_iterations_total"
LINE_SEARCH_FAILURES_NAME = "ghostlab_line_search_failures_total"
STAGE_ABORTS_NAME = "ghostlab_stage_aborts_total"
SOLVE_DURATION_NAME = "ghostlab_solve_duration_seconds"

# -----------------------------------------------------------------------------
# Metric objects
# -----------------------------------------------------------------------------
# All metrics are labelled by integrand family (p_power, double_phase, log_multiphase).
SOLVES = Counter(
    name=SOLVES_NAME,
    documentation="Solves started (minimize or ghost continuation)",
    labelnames=["family"],
)

SOLVE_ITERATIONS = Counter(
    name=SOLVE_ITERATIONS_NAME,
    documentation="Accepted descent steps",
    labelnames=["family"],
)

LINE_SEARCH_FAILURES = Counter(
    name=LINE_SEARCH_FAILURES_NAME,
    documentation="Armijo searches that exhausted their backtracks",
    labelnames=["family"],
)

STAGE_ABORTS = Counter(
    name=STAGE_ABORTS_NAME,
    documentation="Continuation stages that ended the schedule early",
    labelnames=["family"],
)

# Buckets span quick p=2 solves up to sweep points at m=64.
SOLVE_DURATION = Histogram(
    name=SOLVE_DURATION_NAME,
    documentation="Wall time of one solve in seconds",
    labelnames=["family"],
    buckets=(0.01, 0.1, 0.5, 1, 5, 15, 60, 300, float("inf")),
)


def write_metrics(path: Path | str) -> None:
    """Dump the registry in Prometheus text format."""
    write_to_textfile(str(path), REGISTRY)
