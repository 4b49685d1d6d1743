"""Process-wide compute settings: FFT worker threads and determinism."""

import logging
import os
import threading
from dataclasses import dataclass

logger = logging.getLogger(__name__)


@dataclass
class RuntimeSettings:
    threads: int = 1
    deterministic: bool = False


_settings = RuntimeSettings(threads=max(1, os.cpu_count() or 1))
_lock = threading.Lock()


def configure(threads: int = None, deterministic: bool = False) -> RuntimeSettings:
    """Set worker threads and determinism for the rest of the process.

    Deterministic mode pins FFTs and frame-level parallelism to one thread.
    """
    with _lock:
        if threads is not None:
            if threads < 1:
                raise ValueError(f"threads must be >= 1, got {threads}")
            _settings.threads = threads
        _settings.deterministic = deterministic
        logger.debug(
            "Runtime configured: threads=%d deterministic=%s",
            _settings.threads, _settings.deterministic,
        )
        return RuntimeSettings(_settings.threads, _settings.deterministic)


def fft_workers() -> int:
    return 1 if _settings.deterministic else _settings.threads


def pool_size() -> int:
    return 1 if _settings.deterministic else _settings.threads


def is_deterministic() -> bool:
    return _settings.deterministic
