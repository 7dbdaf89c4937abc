import logging
import logging.handlers
import time

from wavemap.core import logger as wavemap_logger
from wavemap.core.system_monitor import get_memory_usage_mb, log_run_status, runtime_metadata


def test_log_file_follows_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVEMAP_LOG_DIR", str(tmp_path / "logs"))
    path = wavemap_logger.get_log_file()
    assert path == tmp_path / "logs" / "wavemap.log"
    assert path.parent.is_dir()


def test_handlers_attached_once():
    first = wavemap_logger.get_logger("wavemap.tests.handlers")
    second = wavemap_logger.get_logger("wavemap.tests.handlers")
    assert first is second
    assert len(first.handlers) == 2
    assert not first.propagate
    kinds = {type(handler) for handler in first.handlers}
    assert logging.StreamHandler in kinds
    assert logging.handlers.RotatingFileHandler in kinds


def test_runtime_metadata():
    metadata = runtime_metadata(time.perf_counter(), workers=3, evaluations=7)
    assert metadata["workers"] == 3
    assert metadata["evaluations"] == 7
    assert metadata["elapsed_s"] >= 0
    assert metadata["memory_mb"] > 0
    assert get_memory_usage_mb() > 0


def test_run_status_is_logged(caplog):
    monitor_logger = logging.getLogger("wavemap.core.system_monitor")
    monitor_logger.propagate = True
    try:
        with caplog.at_level(logging.INFO, logger="wavemap.core.system_monitor"):
            log_run_status("Scan done", {"elapsed_s": 1.5, "memory_mb": 10.0, "workers": 1, "evaluations": 4})
    finally:
        monitor_logger.propagate = False
    assert "Scan done | Elapsed: 1.50s" in caplog.text


def test_root_handler_does_not_skip_setup(monkeypatch):
    monkeypatch.delenv("WAVEMAP_LOG_LEVEL", raising=False)
    root = logging.getLogger()
    foreign = logging.NullHandler()
    root.addHandler(foreign)
    try:
        logger = wavemap_logger.get_logger("wavemap.tests.under_root_handler")
    finally:
        root.removeHandler(foreign)
    assert len(logger.handlers) == 2
    assert logger.level == logging.INFO
    assert not logger.propagate
