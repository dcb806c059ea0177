"""Journal-backed queue: idempotent enqueue, visibility, retry, replay."""

import json

import pytest

from casework.errors import QueueUnavailable
from casework.queue import CLAIMED, DEAD, DONE, PENDING, JobQueue


class FakeClock:
    def __init__(self, start=1000.0):
        self.now = start

    def __call__(self):
        return self.now

    def advance(self, seconds):
        self.now += seconds


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def queue(tmp_path, clock):
    return JobQueue(tmp_path / "q", visibility_timeout=60.0, max_attempts=5, clock=clock)


class TestEnqueue:
    def test_enqueue_then_claim(self, queue):
        assert queue.enqueue("j1", {"path": "a.eml"}) is True
        job = queue.claim()
        assert job.job_id == "j1"
        assert job.payload == {"path": "a.eml"}
        assert job.state == CLAIMED
        assert job.attempts == 1

    def test_enqueue_is_idempotent_by_id(self, queue):
        assert queue.enqueue("j1", {"path": "a.eml"}) is True
        assert queue.enqueue("j1", {"path": "other.eml"}) is False
        assert queue.job("j1").payload == {"path": "a.eml"}
        assert queue.counts()[PENDING] == 1

    def test_claim_order_is_enqueue_order(self, queue):
        for i in range(3):
            queue.enqueue(f"j{i}", {})
        assert queue.claim().job_id == "j0"
        assert queue.claim().job_id == "j1"
        assert queue.claim().job_id == "j2"
        assert queue.claim() is None


class TestVisibility:
    def test_claimed_job_is_invisible_until_timeout(self, queue, clock):
        queue.enqueue("j1", {})
        queue.claim()
        assert queue.claim() is None
        clock.advance(59.9)
        assert queue.claim() is None
        clock.advance(0.2)
        job = queue.claim()
        assert job.job_id == "j1"
        assert job.attempts == 2

    def test_ack_finishes_the_job(self, queue, clock):
        queue.enqueue("j1", {})
        queue.claim()
        queue.ack("j1")
        assert queue.job("j1").state == DONE
        clock.advance(3600)
        assert queue.claim() is None

    def test_failed_job_returns_immediately(self, queue):
        queue.enqueue("j1", {})
        queue.claim()
        queue.fail("j1", reason="boom")
        job = queue.job("j1")
        assert job.state == PENDING
        assert job.last_error == "boom"
        assert queue.claim().attempts == 2


class TestRetryBudget:
    def test_job_parks_dead_after_max_attempts(self, queue):
        queue.enqueue("j1", {})
        for attempt in range(1, 6):
            job = queue.claim()
            assert job.attempts == attempt
            queue.fail("j1", reason=f"attempt {attempt}")
        assert queue.job("j1").state == DEAD
        assert queue.claim() is None
        assert queue.counts()[DEAD] == 1

    def test_timeout_on_final_attempt_parks_dead(self, queue, clock):
        queue.enqueue("j1", {})
        for _ in range(4):
            queue.claim()
            queue.fail("j1")
        queue.claim()  # fifth and final attempt, never acked
        clock.advance(61)
        assert queue.claim() is None
        assert queue.job("j1").state == DEAD

    def test_dead_job_does_not_block_others(self, queue):
        queue.enqueue("j1", {})
        queue.enqueue("j2", {})
        for _ in range(5):
            queue.claim()
            queue.fail("j1")
        assert queue.claim().job_id == "j2"


class TestStateGuards:
    def test_ack_requires_claimed(self, queue):
        queue.enqueue("j1", {})
        with pytest.raises(QueueUnavailable):
            queue.ack("j1")
        with pytest.raises(QueueUnavailable):
            queue.ack("missing")

    def test_fail_requires_claimed(self, queue):
        queue.enqueue("j1", {})
        with pytest.raises(QueueUnavailable):
            queue.fail("j1")
        queue.claim()
        queue.ack("j1")
        with pytest.raises(QueueUnavailable):
            queue.fail("j1")


class TestDurability:
    def test_state_rebuilds_from_journal(self, tmp_path, clock):
        queue = JobQueue(tmp_path / "q", clock=clock)
        queue.enqueue("a", {"n": 1})
        queue.enqueue("b", {"n": 2})
        queue.enqueue("c", {"n": 3})
        queue.claim()
        queue.ack("a")
        queue.claim()
        queue.fail("b", reason="transient")

        rebuilt = JobQueue(tmp_path / "q", clock=clock)
        assert rebuilt.job("a").state == DONE
        assert rebuilt.job("b").state == PENDING
        assert rebuilt.job("b").attempts == 1
        assert rebuilt.job("b").last_error == "transient"
        assert rebuilt.job("c").state == PENDING
        assert rebuilt.claim().job_id == "b"

    def test_claim_survives_restart_with_visibility(self, tmp_path, clock):
        queue = JobQueue(tmp_path / "q", clock=clock)
        queue.enqueue("a", {})
        queue.claim()

        rebuilt = JobQueue(tmp_path / "q", clock=clock)
        assert rebuilt.job("a").state == CLAIMED
        assert rebuilt.claim() is None
        clock.advance(61)
        assert rebuilt.claim().job_id == "a"

    def test_corrupt_journal_line_is_detected(self, tmp_path, clock):
        queue = JobQueue(tmp_path / "q", clock=clock)
        queue.enqueue("a", {})
        with open(queue.journal_path, "a", encoding="utf-8") as fh:
            fh.write("{broken\n")
        with pytest.raises(QueueUnavailable):
            JobQueue(tmp_path / "q", clock=clock)

    def test_journal_lines_are_canonical_json(self, queue):
        queue.enqueue("j1", {"b": 2, "a": 1})
        queue.claim()
        queue.ack("j1")
        lines = queue.journal_path.read_text().splitlines()
        assert len(lines) == 3
        for line in lines:
            event = json.loads(line)
            assert line == json.dumps(event, sort_keys=True, separators=(",", ":"))

    def test_counts_and_pending_ids(self, queue):
        for i in range(4):
            queue.enqueue(f"j{i}", {})
        queue.claim()
        queue.ack("j0")
        queue.claim()
        counts = queue.counts()
        assert counts[DONE] == 1
        assert counts[CLAIMED] == 1
        assert counts[PENDING] == 2
        assert queue.pending_ids() == ["j2", "j3"]
