"""Content-addressed on-disk response cache wrapping any backend."""

from __future__ import annotations

import json
import logging
import os
import tempfile
import threading
from collections import defaultdict
from pathlib import Path

from .messages import AgentRequest, AgentResponse, Backend, stable_digest

logger = logging.getLogger(__name__)


def cache_key(request: AgentRequest, backend_identity: str) -> str:
    return stable_digest({**request.canonical(), "backend": backend_identity})


class CachedBackend:
    """Readers run concurrently; writers for the same key are serialized.

    Values are written to a temp file and renamed into place, so a reader never
    observes a partial file written by this process.
    """

    def __init__(self, inner: Backend, directory: str | Path):
        self.inner = inner
        self.identity = inner.identity
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.hits = 0
        self.misses = 0
        self._locks: dict[str, threading.Lock] = defaultdict(threading.Lock)
        self._guard = threading.Lock()

    def path_for(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def _read(self, path: Path) -> AgentResponse | None:
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            return None
        try:
            return AgentResponse.from_dict(json.loads(text))
        except (ValueError, KeyError, TypeError) as exc:
            logger.warning("corrupt cache entry %s (%s); recomputing", path.name, exc)
            return None

    def _write(self, path: Path, response: AgentResponse) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.directory, prefix=".tmp-", suffix=".json")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(response.to_dict(), fh, sort_keys=True)
        os.replace(tmp, path)

    def complete(self, request: AgentRequest) -> AgentResponse:
        key = cache_key(request, self.identity)
        path = self.path_for(key)
        hit = self._read(path)
        if hit is not None:
            self.hits += 1
            return hit
        with self._guard:
            lock = self._locks[key]
        with lock:
            hit = self._read(path)
            if hit is not None:
                self.hits += 1
                return hit
            self.misses += 1
            response = self.inner.complete(request)
            self._write(path, response)
            return response
