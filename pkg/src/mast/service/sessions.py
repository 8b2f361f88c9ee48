"""In-memory model sessions with per-session write serialization.

Each session holds one staff-training model plus the evidence entered so far.
Mutations (evidence changes, impact patches) take the session's lock, bump the
revision by exactly one, and optionally snapshot the session to disk as a
native document so a restarted service can restore it.
"""

from __future__ import annotations

import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from .. import model_io
from ..model import DEFAULT_BASE_COST, MastModel, build_model

SNAPSHOT_SUFFIX = ".mast.json"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class ModelSession:
    model_id: str
    model: MastModel
    evidence: dict[str, str]
    created_at: str
    updated_at: str
    revision: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


@dataclass(frozen=True)
class SessionView:
    """A consistent read of one session: model, evidence copy, and the
    revision they were captured at."""

    model_id: str
    model: MastModel
    evidence: dict[str, str]
    revision: int
    created_at: str
    updated_at: str


class UnknownSessionError(KeyError):
    pass


class SessionStore:
    """Threadsafe registry of model sessions, optionally snapshotted to a directory."""

    def __init__(self, snapshot_dir: str | Path | None = None):
        self._sessions: dict[str, ModelSession] = {}
        self._registry_lock = threading.Lock()
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        if self.snapshot_dir is not None:
            self.snapshot_dir.mkdir(parents=True, exist_ok=True)
            self._restore_snapshots()

    def _restore_snapshots(self) -> None:
        assert self.snapshot_dir is not None
        for path in sorted(self.snapshot_dir.glob(f"*{SNAPSHOT_SUFFIX}")):
            try:
                document = model_io.load_document(path)
            except model_io.ModelFormatError:
                continue
            if document.mast is None:
                continue
            model_id = path.name[: -len(SNAPSHOT_SUFFIX)]
            now = _now()
            self._sessions[model_id] = ModelSession(
                model_id=model_id,
                model=document.mast,
                evidence=dict(document.evidence or {}),
                created_at=now,
                updated_at=now,
            )

    def _snapshot(self, session: ModelSession) -> None:
        if self.snapshot_dir is None:
            return
        path = self.snapshot_dir / f"{session.model_id}{SNAPSHOT_SUFFIX}"
        model_io.save_model(session.model, path, evidence=session.evidence)

    def create(self, impacts: Sequence[float], base_cost: float = DEFAULT_BASE_COST) -> ModelSession:
        model = build_model(impacts, base_cost)
        now = _now()
        session = ModelSession(
            model_id=secrets.token_urlsafe(16),
            model=model,
            evidence={},
            created_at=now,
            updated_at=now,
        )
        with self._registry_lock:
            self._sessions[session.model_id] = session
        self._snapshot(session)
        return session

    def get(self, model_id: str) -> ModelSession:
        with self._registry_lock:
            try:
                return self._sessions[model_id]
            except KeyError:
                raise UnknownSessionError(model_id) from None

    def read(self, model_id: str) -> SessionView:
        """Capture model + evidence + revision atomically; inference then runs
        outside the lock, so reads never block each other for long."""
        session = self.get(model_id)
        with session.lock:
            return SessionView(
                model_id=session.model_id,
                model=session.model,
                evidence=dict(session.evidence),
                revision=session.revision,
                created_at=session.created_at,
                updated_at=session.updated_at,
            )

    def mutate(self, model_id: str, change: Callable[[ModelSession], None]) -> ModelSession:
        """Apply a change under the session lock; bumps revision and snapshots."""
        session = self.get(model_id)
        with session.lock:
            change(session)
            session.revision += 1
            session.updated_at = _now()
            self._snapshot(session)
        return session
