"""Durable single-process job queue backed by an append-only journal.

Every state change is one JSON line in ``journal.jsonl``; queue state is a
pure fold over the journal, so a process killed mid-batch resumes exactly
where the last fsynced line left it. Jobs are idempotent by job_id: a second
enqueue of a known id is a no-op, which is what makes re-running an ingest
over the same directory safe.

Claimed jobs become invisible for a visibility timeout; if the worker dies
without acking, the job surfaces again and its attempt counter grows. After
max_attempts failures the job parks in the dead state for inspection.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional

from .errors import QueueUnavailable

VISIBILITY_TIMEOUT = 60.0
MAX_ATTEMPTS = 5

PENDING = "pending"
CLAIMED = "claimed"
DONE = "done"
DEAD = "dead"


@dataclass
class Job:
    job_id: str
    payload: dict
    state: str = PENDING
    attempts: int = 0
    not_before: float = 0.0
    last_error: str = ""


class JobQueue:
    """Journal-backed queue; all mutation goes through the journal."""

    def __init__(
        self,
        directory: Path,
        visibility_timeout: float = VISIBILITY_TIMEOUT,
        max_attempts: int = MAX_ATTEMPTS,
        clock: Callable[[], float] = time.time,
    ):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.journal_path = self.directory / "journal.jsonl"
        self.visibility_timeout = visibility_timeout
        self.max_attempts = max_attempts
        self.clock = clock
        self._jobs: dict[str, Job] = {}
        self._replay()

    # -- journal -------------------------------------------------------------

    def _replay(self) -> None:
        if not self.journal_path.exists():
            return
        with open(self.journal_path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    event = json.loads(line)
                except json.JSONDecodeError:
                    raise QueueUnavailable(
                        f"corrupt journal line {line_no} in {self.journal_path}"
                    ) from None
                self._apply(event)

    def _append(self, event: dict) -> None:
        try:
            with open(self.journal_path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(event, sort_keys=True, separators=(",", ":")))
                fh.write("\n")
                fh.flush()
        except OSError as exc:
            raise QueueUnavailable(str(exc)) from exc
        self._apply(event)

    def _apply(self, event: dict) -> None:
        kind = event["event"]
        job_id = event["job_id"]
        if kind == "enqueue":
            if job_id not in self._jobs:
                self._jobs[job_id] = Job(job_id=job_id, payload=event["payload"])
            return
        job = self._jobs.get(job_id)
        if job is None:
            return
        if kind == "claim":
            job.state = CLAIMED
            job.attempts = event["attempt"]
            job.not_before = event["ts"] + self.visibility_timeout
        elif kind == "ack":
            job.state = DONE
        elif kind == "fail":
            job.last_error = event.get("reason", "")
            if job.attempts >= self.max_attempts:
                job.state = DEAD
            else:
                job.state = PENDING
                job.not_before = event["ts"]

    # -- operations -----------------------------------------------------------

    def enqueue(self, job_id: str, payload: dict) -> bool:
        """Add a job; returns False when the id is already known."""
        if job_id in self._jobs:
            return False
        self._append({"event": "enqueue", "job_id": job_id, "payload": payload})
        return True

    def claim(self) -> Optional[Job]:
        """Claim the oldest visible pending job, or a timed-out claimed one."""
        now = self.clock()
        for job in self._jobs.values():
            visible_pending = job.state == PENDING and job.not_before <= now
            expired_claim = job.state == CLAIMED and job.not_before <= now
            if not (visible_pending or expired_claim):
                continue
            if job.attempts >= self.max_attempts:
                if expired_claim:
                    # worker died on the final attempt; park the job
                    self._append(
                        {
                            "event": "fail",
                            "job_id": job.job_id,
                            "reason": "visibility timeout on final attempt",
                            "ts": now,
                        }
                    )
                continue
            self._append(
                {
                    "event": "claim",
                    "job_id": job.job_id,
                    "attempt": job.attempts + 1,
                    "ts": now,
                }
            )
            return job
        return None

    def ack(self, job_id: str) -> None:
        job = self._jobs.get(job_id)
        if job is None or job.state != CLAIMED:
            raise QueueUnavailable(f"cannot ack job {job_id!r} in state "
                                   f"{job.state if job else 'missing'}")
        self._append({"event": "ack", "job_id": job_id})

    def fail(self, job_id: str, reason: str = "") -> None:
        job = self._jobs.get(job_id)
        if job is None or job.state != CLAIMED:
            raise QueueUnavailable(f"cannot fail job {job_id!r} in state "
                                   f"{job.state if job else 'missing'}")
        self._append(
            {"event": "fail", "job_id": job_id, "reason": reason, "ts": self.clock()}
        )

    # -- introspection ----------------------------------------------------------

    def job(self, job_id: str) -> Optional[Job]:
        return self._jobs.get(job_id)

    def counts(self) -> dict[str, int]:
        out = {PENDING: 0, CLAIMED: 0, DONE: 0, DEAD: 0}
        for job in self._jobs.values():
            out[job.state] += 1
        return out

    def pending_ids(self) -> list[str]:
        return [j.job_id for j in self._jobs.values() if j.state == PENDING]
