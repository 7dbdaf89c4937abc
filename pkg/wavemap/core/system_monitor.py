import logging
import os
import time

import psutil

try:
    from wavemap.core.logger import get_logger
    logger = get_logger(__name__)
except ImportError:
    logger = logging.getLogger(__name__)


def get_memory_usage_mb() -> float:
    """Returns the current process memory usage in MB."""
    process = psutil.Process(os.getpid())
    return process.memory_info().rss / 1024 / 1024


def runtime_metadata(started: float, workers: int = 1, evaluations: int = 0) -> dict:
    """Elapsed wall time since `started` (perf_counter), memory and worker count."""
    return {
        "elapsed_s": round(time.perf_counter() - started, 3),
        "memory_mb": round(get_memory_usage_mb(), 2),
        "workers": workers,
        "evaluations": evaluations,
        "cpu_count": psutil.cpu_count(logical=True),
    }


def log_run_status(label: str, metadata: dict):
    """Logs the runtime metadata of a finished run."""
    logger.info(
        f"{label} | Elapsed: {metadata['elapsed_s']:.2f}s | "
        f"RAM: {metadata['memory_mb']:.2f} MB | Workers: {metadata['workers']} | "
        f"Evaluations: {metadata['evaluations']}"
    )
