"""Event-driven device state machines for three mutual authentication handshakes.

Variants:
  legacy       both sides challenge; the responder answers immediately and
               issues its counter-challenge in the same step
  improved     the responder withholds its answer until its own
               counter-challenge has been answered (nested ordering)
  dh-improved  a public-value exchange runs first and the agreed session key
               is folded into the challenge-response key

Devices never self-transition on time; timeout bookkeeping belongs to the
network loop driving them. Each state machine is single-owner: one driving
loop mutates it, and devices share nothing but messages.
"""

import random
from dataclasses import dataclass, field
from enum import Enum

from .crypto import (
    Aco,
    Challenge,
    DeviceId,
    DhKeyPair,
    DhParams,
    LinkKey,
    SessionKey,
    Sres,
    dh_keypair,
    dh_shared,
    e1,
    encryption_key,
    session_key_from_shared,
    xor_bytes,
)

__all__ = [
    "ProtocolError",
    "Variant",
    "MsgKind",
    "Message",
    "Role",
    "Phase",
    "AuthStatus",
    "AuthOutcome",
    "DeviceState",
    "new_device",
    "start",
    "handle",
    "rtt_estimate",
    "outcome_of",
    "encode_public",
    "decode_public",
]


class ProtocolError(Exception):
    """Driver misuse of a state machine (not a wire-data failure)."""


class Variant(Enum):
    LEGACY = "legacy"
    IMPROVED = "improved"
    DH_IMPROVED = "dh-improved"


class MsgKind(Enum):
    AUTH_REQUEST = "AuthRequest"
    CHALLENGE = "ChallengeMsg"
    RESPONSE = "ResponseMsg"
    DH_PUBLIC = "DhPublicMsg"
    AUTH_SUCCESS = "AuthSuccess"
    AUTH_FAIL = "AuthFail"


_PAYLOAD_WIDTH = {
    MsgKind.AUTH_REQUEST: 6,
    MsgKind.CHALLENGE: 16,
    MsgKind.RESPONSE: 4,
    MsgKind.DH_PUBLIC: 16,
    MsgKind.AUTH_SUCCESS: 0,
    MsgKind.AUTH_FAIL: 0,
}


@dataclass(frozen=True)
class Message:
    """One protocol message. sender is the claimed originator address; who
    physically transmitted it is the network's business, not the message's."""

    kind: MsgKind
    sender: DeviceId
    receiver: DeviceId
    payload: bytes = b""

    def __post_init__(self):
        if self.sender == self.receiver:
            raise ValueError("message sender and receiver must differ")
        want = _PAYLOAD_WIDTH[self.kind]
        if len(self.payload) != want:
            raise ValueError(
                f"{self.kind.value} payload must be {want} octets, got {len(self.payload)}"
            )


def encode_public(value: int) -> bytes:
    return value.to_bytes(16, "big")


def decode_public(payload: bytes) -> int:
    return int.from_bytes(payload, "big")


class Role(Enum):
    INITIATOR = "Initiator"
    RESPONDER = "Responder"


class Phase(Enum):
    IDLE = "Idle"
    DH_EXCHANGE = "DhExchange"
    AWAIT_CHALLENGE = "AwaitChallenge"
    AWAIT_RESPONSE = "AwaitResponse"
    AWAIT_CONFIRM = "AwaitConfirm"
    DONE = "Done"
    FAILED = "Failed"


class AuthStatus(Enum):
    MUTUAL_SUCCESS = "MutualSuccess"
    FAILED = "Failed"
    TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class AuthOutcome:
    status: AuthStatus
    messages_exchanged: int
    authenticated_with: DeviceId | None


@dataclass
class DeviceState:
    id: DeviceId
    variant: Variant
    link_key: LinkKey
    rng: random.Random
    dh_params: DhParams | None = None
    role: Role | None = None
    peer: DeviceId | None = None
    phase: Phase = Phase.IDLE
    # effective_key is what e1 actually runs with: the link key, XORed with
    # the session key once a public-value exchange has completed
    effective_key: LinkKey = None  # type: ignore[assignment]
    pending_challenge_sent: Challenge | None = None
    pending_challenge_received: Challenge | None = None
    challenge_sent_at: int | None = None
    answered_peer: bool = False
    peer_authenticated: bool = False
    dh: DhKeyPair | None = None
    session: SessionKey | None = None
    first_leg_challenge: Challenge | None = None
    first_leg_aco: Aco | None = None
    enc_key: bytes | None = None
    rtt_samples: list[tuple[Challenge, int, int]] = field(default_factory=list)
    sent_count: int = 0
    recv_count: int = 0

    def __post_init__(self):
        if self.effective_key is None:
            self.effective_key = self.link_key


def new_device(
    id: DeviceId,
    variant: Variant,
    link_key: LinkKey,
    rng_seed: int,
    dh_params: DhParams | None = None,
) -> DeviceState:
    """Fresh idle device with a deterministic per-device challenge stream."""
    if variant is Variant.DH_IMPROVED and dh_params is None:
        raise ValueError("dh-improved devices need group parameters")
    return DeviceState(
        id=id,
        variant=variant,
        link_key=link_key,
        rng=random.Random(rng_seed),
        dh_params=dh_params,
    )


def start(device: DeviceState, peer: DeviceId, now: int) -> list[Message]:
    """Open the handshake toward peer: address announcement plus either the
    first challenge (legacy, improved) or this side's public value."""
    if device.phase is not Phase.IDLE:
        raise ProtocolError("start on a device that already left Idle")
    device.role = Role.INITIATOR
    device.peer = peer
    out = [Message(MsgKind.AUTH_REQUEST, device.id, peer, device.id.addr)]
    if device.variant is Variant.DH_IMPROVED:
        device.dh = _fresh_keypair(device)
        out.append(Message(MsgKind.DH_PUBLIC, device.id, peer, encode_public(device.dh.s_public)))
        device.phase = Phase.DH_EXCHANGE
    else:
        out.append(_issue_challenge(device, now))
        device.phase = Phase.AWAIT_RESPONSE
    device.sent_count += len(out)
    return out


def handle(device: DeviceState, msg: Message, now: int) -> list[Message]:
    """Advance the state machine on one delivered message.

    Returns the messages to transmit in response. A message kind that is
    illegal in the current phase fails the handshake with an AuthFail; the
    terminal phases absorb everything silently.
    """
    if msg.receiver != device.id:
        raise ProtocolError(f"message for {msg.receiver} delivered to {device.id}")
    device.recv_count += 1
    if device.phase in (Phase.DONE, Phase.FAILED):
        return []
    if msg.kind is MsgKind.AUTH_FAIL:
        device.phase = Phase.FAILED
        return []

    if device.phase is Phase.IDLE and msg.kind is MsgKind.AUTH_REQUEST:
        out = _on_auth_request(device, msg)
    elif device.phase is Phase.DH_EXCHANGE and msg.kind is MsgKind.DH_PUBLIC:
        out = _on_dh_public(device, msg, now)
    elif device.phase is Phase.AWAIT_CHALLENGE and msg.kind is MsgKind.CHALLENGE:
        out = _on_first_challenge(device, msg, now)
    elif device.phase is Phase.AWAIT_RESPONSE and msg.kind is MsgKind.CHALLENGE:
        out = _on_counter_challenge(device, msg)
    elif device.phase is Phase.AWAIT_RESPONSE and msg.kind is MsgKind.RESPONSE:
        out = _on_response(device, msg, now)
    elif device.phase is Phase.AWAIT_CONFIRM and msg.kind is MsgKind.AUTH_SUCCESS:
        _complete(device)
        out = []
    else:
        out = _fail(device, msg)
    device.sent_count += len(out)
    return out


def rtt_estimate(device: DeviceState) -> int | None:
    """Worst observed challenge-to-response round trip, if any completed."""
    if not device.rtt_samples:
        return None
    return max(received - sent for _, sent, received in device.rtt_samples)


def _fresh_keypair(device: DeviceState) -> DhKeyPair:
    params = device.dh_params
    assert params is not None
    return dh_keypair(params, device.rng.randrange(1, params.p))


def _issue_challenge(device: DeviceState, now: int) -> Message:
    challenge = Challenge(device.rng.randbytes(16))
    device.pending_challenge_sent = challenge
    device.challenge_sent_at = now
    assert device.peer is not None
    return Message(MsgKind.CHALLENGE, device.id, device.peer, challenge.value)


def _answer(device: DeviceState, challenge: Challenge, first_leg: bool) -> Message:
    sres, aco = e1(device.effective_key, challenge, device.id)
    if first_leg:
        device.first_leg_aco = aco
    device.answered_peer = True
    assert device.peer is not None
    return Message(MsgKind.RESPONSE, device.id, device.peer, sres.value)


def _fail(device: DeviceState, msg: Message) -> list[Message]:
    device.phase = Phase.FAILED
    target = device.peer if device.peer is not None else msg.sender
    return [Message(MsgKind.AUTH_FAIL, device.id, target)]


def _complete(device: DeviceState) -> None:
    device.phase = Phase.DONE
    if device.first_leg_aco is not None and device.first_leg_challenge is not None:
        device.enc_key = encryption_key(
            device.effective_key, device.first_leg_aco, device.first_leg_challenge
        )


def _on_auth_request(device: DeviceState, msg: Message) -> list[Message]:
    device.role = Role.RESPONDER
    device.peer = DeviceId(msg.payload)
    device.phase = (
        Phase.DH_EXCHANGE if device.variant is Variant.DH_IMPROVED else Phase.AWAIT_CHALLENGE
    )
    return []


def _on_dh_public(device: DeviceState, msg: Message, now: int) -> list[Message]:
    params = device.dh_params
    assert params is not None
    out = []
    if device.dh is None:
        device.dh = _fresh_keypair(device)
        assert device.peer is not None
        out.append(Message(MsgKind.DH_PUBLIC, device.id, device.peer, encode_public(device.dh.s_public)))
    try:
        shared = dh_shared(params, decode_public(msg.payload), device.dh.r_private)
    except ValueError:
        return _fail(device, msg)
    device.session = session_key_from_shared(shared, params)
    device.effective_key = LinkKey(xor_bytes(device.link_key.value, device.session.value))
    if device.role is Role.INITIATOR:
        out.append(_issue_challenge(device, now))
        device.phase = Phase.AWAIT_RESPONSE
    else:
        device.phase = Phase.AWAIT_CHALLENGE
    return out


def _on_first_challenge(device: DeviceState, msg: Message, now: int) -> list[Message]:
    challenge = Challenge(msg.payload)
    device.pending_challenge_received = challenge
    device.first_leg_challenge = challenge
    if device.variant is Variant.LEGACY:
        # answer at once, then counter-challenge in the same step
        out = [_answer(device, challenge, first_leg=True), _issue_challenge(device, now)]
    else:
        # withhold the answer until our own challenge has been answered
        out = [_issue_challenge(device, now)]
    device.phase = Phase.AWAIT_RESPONSE
    return out


def _on_counter_challenge(device: DeviceState, msg: Message) -> list[Message]:
    if device.role is not Role.INITIATOR or device.pending_challenge_received is not None:
        return _fail(device, msg)
    challenge = Challenge(msg.payload)
    device.pending_challenge_received = challenge
    out = [_answer(device, challenge, first_leg=False)]
    if device.peer_authenticated:
        device.phase = Phase.AWAIT_CONFIRM
    return out


def _on_response(device: DeviceState, msg: Message, now: int) -> list[Message]:
    if device.peer_authenticated or device.pending_challenge_sent is None:
        return _fail(device, msg)
    # timing is recorded before verification: a wrong answer still took time
    assert device.challenge_sent_at is not None
    device.rtt_samples.append((device.pending_challenge_sent, device.challenge_sent_at, now))
    assert device.peer is not None
    expected, aco = e1(device.effective_key, device.pending_challenge_sent, device.peer)
    if device.role is Role.INITIATOR:
        device.first_leg_challenge = device.pending_challenge_sent
        device.first_leg_aco = aco
    if Sres(msg.payload) != expected:
        return _fail(device, msg)
    device.peer_authenticated = True
    if device.answered_peer:
        # our earlier answer plus this verification closes the loop; tell
        # the peer and finish
        assert device.peer is not None
        confirm = Message(MsgKind.AUTH_SUCCESS, device.id, device.peer)
        _complete(device)
        return [confirm]
    if device.role is Role.RESPONDER:
        # nested ordering: the withheld answer goes out only now
        assert device.pending_challenge_received is not None
        out = [_answer(device, device.pending_challenge_received, first_leg=True)]
        device.phase = Phase.AWAIT_CONFIRM
        return out
    # initiator verified before answering the counter-challenge; keep waiting
    return []


def outcome_of(device: DeviceState) -> AuthOutcome:
    """Summarize a device's terminal result after its driving loop stopped."""
    if device.phase is Phase.DONE:
        status = AuthStatus.MUTUAL_SUCCESS
    elif device.phase is Phase.FAILED:
        status = AuthStatus.FAILED
    else:
        status = AuthStatus.TIMED_OUT
    return AuthOutcome(
        status=status,
        messages_exchanged=device.sent_count + device.recv_count,
        authenticated_with=device.peer if status is AuthStatus.MUTUAL_SUCCESS else None,
    )
