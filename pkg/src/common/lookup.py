"""Persistent lookup table for per-operator Lipschitz constants.

One JSON file per key under CS_PAT_CACHE, published by writing a temp file
and renaming it into place with os.replace. Inserts are first-writer-wins: a
value already on disk is never replaced. Writers in one process are
serialized; separate processes estimating the same operator with the same
seed store the same value.
"""

import json
import logging
import os
import tempfile
import threading
from typing import Callable, Dict, Optional

logger = logging.getLogger(__name__)

CACHE_ENV_VAR = "CS_PAT_CACHE"

_publish_lock = threading.Lock()


def _read_entry(path: str) -> Optional[float]:
    try:
        with open(path) as f:
            return float(json.load(f)["lipschitz"])
    except FileNotFoundError:
        return None
    except (ValueError, KeyError, TypeError, json.JSONDecodeError):
        logger.warning("Ignoring unreadable Lipschitz entry %s", path)
        return None


class LipschitzTable:
    def __init__(self, directory: Optional[str] = None):
        self.directory = directory if directory is not None else os.environ.get(CACHE_ENV_VAR)
        self._memory: Dict[str, float] = {}
        self._lock = threading.Lock()
        if self.directory:
            os.makedirs(self.directory, exist_ok=True)

    def _path(self, key: str) -> str:
        return os.path.join(self.directory, f"{key}.json")

    def get(self, key: str) -> Optional[float]:
        with self._lock:
            if key in self._memory:
                return self._memory[key]
        if not self.directory:
            return None
        value = _read_entry(self._path(key))
        if value is None:
            return None
        with self._lock:
            self._memory.setdefault(key, value)
            return self._memory[key]

    def insert_if_absent(self, key: str, value: float) -> float:
        """Store value unless the key exists; return the value now stored."""
        with self._lock:
            if key in self._memory:
                return self._memory[key]
            if self.directory:
                value = self._publish(key, float(value))
            self._memory[key] = float(value)
            return self._memory[key]

    def _publish(self, key: str, value: float) -> float:
        path = self._path(key)
        with _publish_lock:
            existing = _read_entry(path)
            if existing is not None:
                logger.info("Lipschitz entry %s already present, keeping %.6g", key, existing)
                return existing
            fd, tmp_path = tempfile.mkstemp(dir=self.directory, suffix=".tmp")
            try:
                with os.fdopen(fd, "w") as f:
                    json.dump({"key": key, "lipschitz": value}, f)
                os.replace(tmp_path, path)
            except BaseException:
                if os.path.exists(tmp_path):
                    os.unlink(tmp_path)
                raise
        return value

    def get_or_compute(self, key: str, compute: Callable[[], float]) -> float:
        value = self.get(key)
        if value is not None:
            logger.debug("Lipschitz cache hit for %s", key)
            return value
        logger.info("Estimating Lipschitz constant for operator %s", key[:12])
        return self.insert_if_absent(key, compute())


_default_table: Optional[LipschitzTable] = None
_default_lock = threading.Lock()


def default_table() -> LipschitzTable:
    global _default_table
    with _default_lock:
        if _default_table is None or _default_table.directory != os.environ.get(CACHE_ENV_VAR):
            _default_table = LipschitzTable()
        return _default_table
