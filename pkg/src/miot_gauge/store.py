"""File-backed store: catalogs, assessment revisions, append-only history.

Layout::

    <root>/catalogs/<checksum>.json
    <root>/assessments/<id>/rev-00001.json
    <root>/assessments/<id>/history.log      # one JSON event per line

Revisions are immutable. A writer materializes the new revision in a temp
file and hard-links it into place: link(2) fails with EEXIST when another
writer already won that revision number, so a torn write can never clobber
committed data and two racing writers cannot both claim the same revision.
Optimistic concurrency on top: callers pass the revision their edit was based
on and get a ConflictError when it is stale. History is append-only; events
carry the canonical serialization of each change, and replaying them from the
start reconstructs the latest revision byte for byte.
"""

from __future__ import annotations

import json
import os
import threading
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .assessment import Assessment
from .canonical import canonical_bytes, canonical_line, utc_now_iso
from .catalog import ExpectationCatalog, load_catalog
from .errors import ConflictError, NotFoundError, ParseError, StorageError
from .scoring import ScoreReport

_REV_DIGITS = 5

# Writer locks are per (store root, assessment id) and process-wide, so any
# number of Store instances over the same directory serialize correctly.
_locks: dict[tuple[str, str], threading.Lock] = defaultdict(threading.Lock)
_locks_guard = threading.Lock()


def _lock_for(root: Path, assessment_id: str) -> threading.Lock:
    with _locks_guard:
        return _locks[(str(root.resolve()), assessment_id)]


class EventKind(str, Enum):
    CREATED = "Created"
    RESPONSE_SET = "ResponseSet"
    SCORED = "Scored"
    STATUS_CHANGED = "StatusChanged"


@dataclass(frozen=True)
class HistoryEvent:
    sequence: int
    timestamp: str
    kind: EventKind
    payload: dict

    def to_dict(self) -> dict:
        return {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "kind": self.kind.value,
            "payload": self.payload,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "HistoryEvent":
        try:
            return cls(
                sequence=int(raw["sequence"]),
                timestamp=raw["timestamp"],
                kind=EventKind(raw["kind"]),
                payload=raw["payload"],
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"malformed history event: {exc}") from exc


def _atomic_write(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def _exclusive_link(path: Path, data: bytes) -> None:
    """Write ``data`` to ``path``, failing if ``path`` already exists."""
    tmp = path.with_name(path.name + f".tmp-{os.getpid()}-{threading.get_ident()}")
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    try:
        os.link(tmp, path)
    except FileExistsError:
        raise ConflictError(f"revision file {path.name} already exists") from None
    finally:
        os.unlink(tmp)


class Store:
    def __init__(self, root) -> None:
        self.root = Path(root)
        try:
            (self.root / "catalogs").mkdir(parents=True, exist_ok=True)
            (self.root / "assessments").mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise StorageError(f"cannot initialize store at {self.root}: {exc}") from exc

    # -- catalogs ----------------------------------------------------------

    def put_catalog(self, catalog: ExpectationCatalog) -> None:
        path = self.root / "catalogs" / f"{catalog.checksum}.json"
        if not path.exists():
            _atomic_write(path, catalog.canonical_bytes())

    def get_catalog(self, checksum: str) -> ExpectationCatalog:
        path = self.root / "catalogs" / f"{checksum}.json"
        if not path.exists():
            raise NotFoundError(f"no catalog with checksum {checksum[:12]}... in store")
        return load_catalog(path)

    # -- assessments -------------------------------------------------------

    def _dir(self, assessment_id: str) -> Path:
        return self.root / "assessments" / assessment_id

    def _rev_path(self, assessment_id: str, revision: int) -> Path:
        return self._dir(assessment_id) / f"rev-{revision:0{_REV_DIGITS}d}.json"

    def latest_revision(self, assessment_id: str) -> int:
        directory = self._dir(assessment_id)
        if not directory.is_dir():
            return 0
        revisions = [
            int(p.stem.split("-", 1)[1])
            for p in directory.glob("rev-*.json")
        ]
        return max(revisions, default=0)

    def exists(self, assessment_id: str) -> bool:
        return self.latest_revision(assessment_id) > 0

    def save_assessment(
        self, assessment: Assessment, base_revision: int | None = None
    ) -> int:
        """Persist a snapshot; returns the new revision number.

        ``base_revision`` is the revision the caller's edit was based on
        (None for a brand-new assessment). A stale base raises ConflictError.
        Byte-identical re-saves return the current revision without writing.
        """
        with _lock_for(self.root, assessment.id):
            return self._save_locked(assessment, base_revision)

    def _save_locked(self, assessment: Assessment, base_revision: int | None) -> int:
        latest = self.latest_revision(assessment.id)
        if base_revision is None:
            if latest:
                raise ConflictError(
                    f"assessment {assessment.id} already exists at revision {latest}"
                )
        elif base_revision != latest:
            raise ConflictError(
                f"stale base revision {base_revision}; latest is {latest}"
            )

        data = assessment.canonical_bytes()
        now = utc_now_iso()
        if latest == 0:
            events = [(EventKind.CREATED, {"assessment": assessment.to_dict()})]
        else:
            previous = self._load_revision(assessment.id, latest)
            if previous.canonical_bytes() == data:
                return latest
            events = self._change_events(previous, assessment)

        directory = self._dir(assessment.id)
        try:
            directory.mkdir(parents=True, exist_ok=True)
            _exclusive_link(self._rev_path(assessment.id, latest + 1), data)
            self._append_events(assessment.id, events, now)
        except OSError as exc:
            raise StorageError(f"cannot persist assessment: {exc}") from exc
        return latest + 1

    @staticmethod
    def _change_events(previous: Assessment, current: Assessment) -> list:
        for field_name in ("id", "device", "catalog_version", "catalog_checksum",
                           "include_optional", "created_at"):
            if getattr(previous, field_name) != getattr(current, field_name):
                raise StorageError(
                    f"assessment identity field {field_name!r} changed between "
                    "revisions; only responses and status may evolve"
                )
        changed = [
            current.responses[eid].to_dict()
            for eid in sorted(current.responses)
            if previous.responses.get(eid) != current.responses[eid]
        ]
        if set(previous.responses) - set(current.responses):
            raise StorageError("responses may be replaced but never removed")
        events = [
            (
                EventKind.RESPONSE_SET,
                {"updated_at": current.updated_at, "responses": changed},
            )
        ]
        if previous.status != current.status:
            events.append(
                (
                    EventKind.STATUS_CHANGED,
                    {
                        "from": previous.status.value,
                        "to": current.status.value,
                        "updated_at": current.updated_at,
                    },
                )
            )
        return events

    def _append_events(self, assessment_id: str, events, timestamp: str) -> None:
        sequence = self._last_sequence(assessment_id)
        path = self._dir(assessment_id) / "history.log"
        lines = []
        for kind, payload in events:
            sequence += 1
            event = HistoryEvent(sequence, timestamp, kind, payload)
            lines.append(canonical_line(event.to_dict()) + "\n")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write("".join(lines))
            fh.flush()
            os.fsync(fh.fileno())

    def _last_sequence(self, assessment_id: str) -> int:
        path = self._dir(assessment_id) / "history.log"
        if not path.exists():
            return 0
        last = 0
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    last = json.loads(line)["sequence"]
        return int(last)

    def _load_revision(self, assessment_id: str, revision: int) -> Assessment:
        path = self._rev_path(assessment_id, revision)
        if not path.exists():
            raise NotFoundError(
                f"assessment {assessment_id} has no revision {revision}"
            )
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise StorageError(f"corrupt revision file {path.name}: {exc}") from exc
        return Assessment.from_dict(raw)

    def load_assessment(
        self, assessment_id: str, revision: int | None = None
    ) -> Assessment:
        latest = self.latest_revision(assessment_id)
        if latest == 0:
            raise NotFoundError(f"no assessment with id {assessment_id}")
        return self._load_revision(assessment_id, revision or latest)

    def update_assessment(self, assessment_id: str, base_revision: int, mutate) -> tuple[Assessment, int]:
        """Load-mutate-save under the writer lock; returns (snapshot, revision)."""
        with _lock_for(self.root, assessment_id):
            latest = self.latest_revision(assessment_id)
            if latest == 0:
                raise NotFoundError(f"no assessment with id {assessment_id}")
            if base_revision != latest:
                raise ConflictError(
                    f"stale base revision {base_revision}; latest is {latest}"
                )
            updated = mutate(self._load_revision(assessment_id, latest))
            revision = self._save_locked(updated, latest)
            return self._load_revision(assessment_id, revision), revision

    # -- history -----------------------------------------------------------

    def list_history(self, assessment_id: str) -> list[HistoryEvent]:
        path = self._dir(assessment_id) / "history.log"
        if not path.exists():
            raise NotFoundError(f"no assessment with id {assessment_id}")
        events = []
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if not line.strip():
                    continue
                try:
                    events.append(HistoryEvent.from_dict(json.loads(line)))
                except json.JSONDecodeError as exc:
                    raise StorageError(f"corrupt history line: {exc}") from exc
        for position, event in enumerate(events, start=1):
            if event.sequence != position:
                raise StorageError(
                    f"history sequence gap: expected {position}, got {event.sequence}"
                )
        return events

    def record_score(self, assessment_id: str, report: ScoreReport) -> None:
        """Append a Scored event; the report itself is the payload."""
        with _lock_for(self.root, assessment_id):
            if not self.exists(assessment_id):
                raise NotFoundError(f"no assessment with id {assessment_id}")
            self._append_events(
                assessment_id,
                [(EventKind.SCORED, {"report": report.to_dict()})],
                utc_now_iso(),
            )

    def replay_history(self, assessment_id: str) -> bytes:
        """Canonical bytes of the assessment reconstructed from events alone."""
        state: dict | None = None
        for event in self.list_history(assessment_id):
            if event.kind is EventKind.CREATED:
                state = json.loads(json.dumps(event.payload["assessment"]))
            elif event.kind is EventKind.RESPONSE_SET:
                if state is None:
                    raise StorageError("history does not start with Created")
                state["updated_at"] = event.payload["updated_at"]
                for response in event.payload["responses"]:
                    state["responses"][str(response["expectation_id"])] = response
            elif event.kind is EventKind.STATUS_CHANGED:
                if state is None:
                    raise StorageError("history does not start with Created")
                state["status"] = event.payload["to"]
                state["updated_at"] = event.payload["updated_at"]
            # Scored events carry no assessment state.
        if state is None:
            raise StorageError("empty history")
        return canonical_bytes(state)
