"""Append-only command journal plus periodic snapshots.

Each journal line is one committed engine command::

    {"seq": 7, "ts": "...", "command": "provision", "payload": {...},
     "result_hash": "<state hash after the command>", "checksum": "..."}

``checksum`` covers every other field, so a damaged line is detected before
it is applied. Replaying a journal from an empty engine must land on each
entry's ``result_hash``; the first mismatch halts replay with that entry's
sequence number. A final line cut short by a crash is dropped, which leaves
the state of the last complete command.
"""

from __future__ import annotations

import json
import logging
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Optional

from otic._util import canonical_json, digest
from otic.errors import CorruptJournal
from otic.session import Engine

logger = logging.getLogger(__name__)

SNAPSHOT_EVERY = 100
JOURNAL_NAME = "journal.jsonl"
SNAPSHOT_NAME = "snapshot.json"


def entry_checksum(entry: Mapping) -> str:
    return digest({k: v for k, v in entry.items() if k != "checksum"})


def read_journal(path: Path) -> tuple[list[dict], bool]:
    """Parse a journal file; returns (entries, tail_was_truncated)."""
    if not path.exists():
        return [], False
    lines = path.read_text().split("\n")
    complete_tail = lines[-1] == ""
    lines = [ln for ln in lines if ln.strip()]
    entries = []
    for i, line in enumerate(lines):
        try:
            entries.append(json.loads(line))
        except json.JSONDecodeError:
            last = i == len(lines) - 1
            if last and not complete_tail:
                logger.warning("dropping truncated journal tail after seq %d", len(entries))
                return entries, True
            raise CorruptJournal(i + 1, "unparseable entry") from None
    return entries, False


def replay(entries: Iterable[Mapping], engine: Optional[Engine] = None,
           after_seq: int = 0) -> Engine:
    """Re-execute journal entries on ``engine`` (a fresh one by default)."""
    engine = engine or Engine()
    expected = after_seq + 1
    for entry in entries:
        seq = entry.get("seq")
        if not isinstance(seq, int):
            raise CorruptJournal(expected, "missing sequence number")
        if seq <= after_seq:
            continue
        if entry.get("checksum") != entry_checksum(entry):
            raise CorruptJournal(seq, "checksum mismatch")
        if seq != expected:
            raise CorruptJournal(seq, f"expected seq {expected}")
        engine.execute(entry["command"], entry["payload"])
        if engine.state_hash() != entry["result_hash"]:
            raise CorruptJournal(seq, "state hash mismatch after replay")
        expected += 1
    return engine


class Journal:
    def __init__(self, path: Path, next_seq: int = 1):
        self.path = Path(path)
        self.next_seq = next_seq

    def append(self, command: str, payload: Mapping, result_hash: str) -> dict:
        entry = {
            "seq": self.next_seq,
            "ts": datetime.now(timezone.utc).isoformat(),
            "command": command,
            "payload": payload,
            "result_hash": result_hash,
        }
        entry["checksum"] = entry_checksum(entry)
        with self.path.open("a") as fh:
            fh.write(canonical_json(entry) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        self.next_seq += 1
        return entry


class StateStore:
    """A state directory holding ``journal.jsonl`` and ``snapshot.json``."""

    def __init__(self, state_dir: os.PathLike | str, snapshot_every: int = SNAPSHOT_EVERY):
        self.dir = Path(state_dir)
        self.snapshot_every = snapshot_every
        self.journal_path = self.dir / JOURNAL_NAME
        self.snapshot_path = self.dir / SNAPSHOT_NAME

    def open(self) -> Engine:
        """Load the latest state and wire the engine to journal every commit."""
        self.dir.mkdir(parents=True, exist_ok=True)
        entries, truncated = read_journal(self.journal_path)
        if truncated:
            self._rewrite(entries)
        engine, seq = self._load_snapshot()
        engine = replay(entries, engine, after_seq=seq)
        last = entries[-1]["seq"] if entries else seq
        journal = Journal(self.journal_path, next_seq=max(last, seq) + 1)

        def on_commit(command: str, payload: dict, state_hash: str) -> None:
            entry = journal.append(command, payload, state_hash)
            if entry["seq"] % self.snapshot_every == 0:
                self.snapshot(engine, entry["seq"])

        engine.on_commit = on_commit
        engine.journal = journal
        return engine

    def snapshot(self, engine: Engine, seq: Optional[int] = None) -> Path:
        if seq is None:
            entries, _ = read_journal(self.journal_path)
            seq = entries[-1]["seq"] if entries else 0
        doc = {"version": 1, "seq": seq, "hash": engine.state_hash(),
               "state": engine.state_document()}
        tmp = self.snapshot_path.with_suffix(".tmp")
        tmp.write_text(canonical_json(doc))
        tmp.replace(self.snapshot_path)
        return self.snapshot_path

    def replay_from_scratch(self) -> Engine:
        entries, _ = read_journal(self.journal_path)
        return replay(entries)

    def _load_snapshot(self) -> tuple[Engine, int]:
        if not self.snapshot_path.exists():
            return Engine(), 0
        doc = json.loads(self.snapshot_path.read_text())
        engine = Engine.from_state_document(doc["state"])
        if engine.state_hash() != doc["hash"]:
            raise CorruptJournal(doc["seq"], "snapshot hash mismatch")
        return engine, doc["seq"]

    def _rewrite(self, entries: list[dict]) -> None:
        tmp = self.journal_path.with_suffix(".tmp")
        tmp.write_text("".join(canonical_json(e) + "\n" for e in entries))
        tmp.replace(self.journal_path)
