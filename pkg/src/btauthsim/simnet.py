"""Deterministic discrete-event network for driving handshake runs.

Messages are delivered in (time, schedule-order) order with a fixed per-hop
latency. When an intruder is registered, the topology is a chain: honest
devices have no direct link, so every honest transmission physically arrives
at the intruder, whatever the message claims. The transcript records
physical transmitter and receiver per hop; claimed identities live inside
the messages.
"""

import heapq
import json
from dataclasses import dataclass
from enum import Enum

from .crypto import DeviceId
from .protocol import (
    AuthOutcome,
    AuthStatus,
    DeviceState,
    Message,
    MsgKind,
    handle,
    outcome_of,
    start as protocol_start,
)

__all__ = [
    "LinkConfig",
    "TranscriptEvent",
    "Transcript",
    "Detection",
    "run",
    "delay_detector",
    "transcript_rtt",
]


class Detection(Enum):
    NONE = "None"
    DELAY_FLAGGED = "DelayFlagged"


@dataclass(frozen=True)
class LinkConfig:
    latency_ms: int = 10
    timeout_ms: int = 2000

    def __post_init__(self):
        if self.latency_ms <= 0:
            raise ValueError("latency must be positive")
        if self.timeout_ms <= self.latency_ms:
            raise ValueError("timeout must exceed the single-hop latency")


@dataclass(frozen=True)
class TranscriptEvent:
    seq: int
    time: int
    from_id: DeviceId
    to_id: DeviceId
    kind: MsgKind
    payload: bytes

    @property
    def payload_hex(self) -> str:
        return self.payload.hex()

    def to_text_line(self) -> str:
        return (
            f"seq={self.seq} t={self.time} from={self.from_id} to={self.to_id} "
            f"kind={self.kind.value} payload={self.payload_hex}"
        )

    def to_json_line(self) -> str:
        record = {
            "seq": self.seq,
            "t": self.time,
            "from": str(self.from_id),
            "to": str(self.to_id),
            "kind": self.kind.value,
            "payload": self.payload_hex,
        }
        return json.dumps(record, separators=(",", ":"))


@dataclass(frozen=True)
class Transcript:
    events: tuple[TranscriptEvent, ...]
    links: LinkConfig
    end_time: int
    seed: int

    def to_text(self) -> str:
        return "".join(e.to_text_line() + "\n" for e in self.events)

    def to_jsonl(self) -> str:
        return "".join(e.to_json_line() + "\n" for e in self.events)


def run(
    devices,
    intruder,
    links: LinkConfig,
    initiator: DeviceId,
    target: DeviceId,
    seed: int,
) -> tuple[Transcript, dict[DeviceId, AuthOutcome]]:
    """Drive one handshake to quiescence or timeout.

    devices are the honest endpoints; intruder (optional) is any object with
    an id, an intercept(msg, now) -> [Message] method, and a
    start_attack(now) -> [Message] method. The initiator may be the
    intruder's own id, in which case the run opens with its attack messages.
    The seed is bookkeeping only (devices carry their own streams); it is
    stamped into the transcript for reporting.
    """
    registry: dict[DeviceId, DeviceState] = {}
    for dev in devices:
        registry[dev.id] = dev
    if target not in registry:
        raise ValueError(f"unregistered device referenced: {target}")
    intruder_id = intruder.id if intruder is not None else None

    queue: list[tuple[int, int, Message, DeviceId, DeviceId]] = []
    schedule_seq = 0

    def schedule(msg: Message, sender: DeviceId, now: int) -> None:
        nonlocal schedule_seq
        if sender == intruder_id:
            physical_to = msg.receiver
        elif intruder_id is not None:
            physical_to = intruder_id
        else:
            physical_to = msg.receiver
        if physical_to != intruder_id and physical_to not in registry:
            raise ValueError(f"unregistered device referenced: {physical_to}")
        heapq.heappush(queue, (now + links.latency_ms, schedule_seq, msg, sender, physical_to))
        schedule_seq += 1

    if intruder_id is not None and initiator == intruder_id:
        for msg in intruder.start_attack(0):
            schedule(msg, intruder_id, 0)
    elif initiator in registry:
        for msg in protocol_start(registry[initiator], target, 0):
            schedule(msg, initiator, 0)
    else:
        raise ValueError(f"unregistered device referenced: {initiator}")

    events: list[TranscriptEvent] = []
    last_time = 0
    while queue:
        time, _, msg, physical_from, physical_to = heapq.heappop(queue)
        if time > links.timeout_ms:
            last_time = links.timeout_ms
            break
        last_time = time
        events.append(
            TranscriptEvent(
                seq=len(events),
                time=time,
                from_id=physical_from,
                to_id=physical_to,
                kind=msg.kind,
                payload=msg.payload,
            )
        )
        if physical_to == intruder_id:
            replies = intruder.intercept(msg, time)
        else:
            replies = handle(registry[physical_to], msg, time)
        for reply in replies:
            schedule(reply, physical_to, time)

    outcomes = {dev_id: outcome_of(dev) for dev_id, dev in registry.items()}
    finished = all(out.status is not AuthStatus.TIMED_OUT for out in outcomes.values())
    end_time = last_time if finished else links.timeout_ms
    return (
        Transcript(events=tuple(events), links=links, end_time=end_time, seed=seed),
        outcomes,
    )


def transcript_rtt(transcript: Transcript, device: DeviceId) -> int | None:
    """Worst challenge-to-response round trip for one device, reconstructed
    from delivery times alone (send time = delivery time minus one hop)."""
    latency = transcript.links.latency_ms
    sends = [
        e.time - latency
        for e in transcript.events
        if e.kind is MsgKind.CHALLENGE and e.from_id == device
    ]
    arrivals = [
        e.time for e in transcript.events if e.kind is MsgKind.RESPONSE and e.to_id == device
    ]
    worst = None
    cursor = 0
    for sent in sends:
        while cursor < len(arrivals) and arrivals[cursor] < sent:
            cursor += 1
        if cursor == len(arrivals):
            break
        rtt = arrivals[cursor] - sent
        cursor += 1
        if worst is None or rtt > worst:
            worst = rtt
    return worst


def delay_detector(
    transcript: Transcript,
    baseline_rtt: int,
    threshold_factor: float,
    device: DeviceId,
) -> Detection:
    """Flag a device whose observed round trip exceeds factor x baseline."""
    if baseline_rtt <= 0:
        raise ValueError("baseline rtt must be positive")
    if threshold_factor <= 1:
        raise ValueError("threshold factor must exceed 1")
    observed = transcript_rtt(transcript, device)
    if observed is not None and observed > threshold_factor * baseline_rtt:
        return Detection.DELAY_FLAGGED
    return Detection.NONE
