"""Man-in-the-middle intruder and attack judgment.

The intruder sits between two victims, playing each victim's peer toward the
other. It can relay traffic verbatim, relay while substituting its own
public values, or originate a handshake toward one victim under the other's
address. Everything it observes lands in a grow-only knowledge set of raw
octet strings; the verdict functions turn outcomes plus transcript into the
attack scorecard.
"""

import random
from dataclasses import dataclass, field
from enum import Enum

from .crypto import Challenge, DeviceId, DhKeyPair, DhParams, LinkKey, dh_keypair, e1
from .protocol import (
    AuthOutcome,
    AuthStatus,
    Message,
    MsgKind,
    Variant,
    encode_public,
)
from .simnet import Detection, Transcript

__all__ = [
    "IntruderMode",
    "IntruderState",
    "Integrity",
    "Confidentiality",
    "AttackVerdict",
    "new_intruder",
    "start_attack",
    "intercept",
    "verdict",
    "dlog_bruteforce",
]


class IntruderMode(Enum):
    RELAY_ACTIVE = "relay-active"
    RELAY_PASSIVE = "relay-passive"
    ORIGINATE_TO_A = "originate"


class Integrity(Enum):
    MAINTAINED = "Maintained"
    BROKEN = "Broken"


class Confidentiality(Enum):
    MAINTAINED = "Maintained"
    BREACHED = "Breached"


@dataclass(frozen=True)
class AttackVerdict:
    attack_success: bool
    integrity: Integrity
    confidentiality: Confidentiality
    detection: Detection


@dataclass
class IntruderState:
    id: DeviceId
    mode: IntruderMode
    variant: Variant
    victim_a: DeviceId
    victim_b: DeviceId
    rng: random.Random
    dh_params: DhParams | None = None
    impersonating: dict[DeviceId, DeviceId] = field(default_factory=dict)
    knowledge: set[bytes] = field(default_factory=set)
    dh_own: DhKeyPair | None = None
    # origination bookkeeping
    own_challenge: Challenge | None = None
    own_challenge_answered: bool = False
    relayed_first_challenge: bool = False
    held_challenge: Message | None = None
    initiated: set[DeviceId] = field(default_factory=set)

    def intercept(self, msg: Message, now: int) -> list[Message]:
        return intercept(self, msg, now)

    def start_attack(self, now: int) -> list[Message]:
        return start_attack(self, now)


def new_intruder(
    id: DeviceId,
    mode: IntruderMode,
    variant: Variant,
    victim_a: DeviceId,
    victim_b: DeviceId,
    rng_seed: int = 0,
    dh_params: DhParams | None = None,
) -> IntruderState:
    """Outsider intruder between victim_a and victim_b; it holds no link key.

    In originate mode the attack direction is fixed: the intruder opens
    toward victim_a under victim_b's address.
    """
    if variant is Variant.DH_IMPROVED and dh_params is None and mode is not IntruderMode.RELAY_PASSIVE:
        raise ValueError("an active intruder against the dh variant needs the group parameters")
    return IntruderState(
        id=id,
        mode=mode,
        variant=variant,
        victim_a=victim_a,
        victim_b=victim_b,
        rng=random.Random(rng_seed),
        dh_params=dh_params,
        impersonating={victim_a: victim_b, victim_b: victim_a},
    )


def _note(intruder: IntruderState, msg: Message) -> None:
    intruder.knowledge.add(msg.payload)
    intruder.knowledge.add(msg.sender.addr)
    intruder.knowledge.add(msg.receiver.addr)


def _emit(intruder: IntruderState, msgs: list[Message]) -> list[Message]:
    for msg in msgs:
        intruder.knowledge.add(msg.payload)
    return msgs


def _ensure_own_keypair(intruder: IntruderState) -> DhKeyPair:
    if intruder.dh_own is None:
        params = intruder.dh_params
        if params is None:
            raise ValueError("group parameters required to forge public values")
        intruder.dh_own = dh_keypair(params, intruder.rng.randrange(1, params.p))
    return intruder.dh_own


def start_attack(intruder: IntruderState, now: int) -> list[Message]:
    """Kickoff messages; non-empty only for the originating mode."""
    if intruder.mode is not IntruderMode.ORIGINATE_TO_A:
        return []
    victim = intruder.victim_a
    fake = intruder.impersonating[victim]
    out = [Message(MsgKind.AUTH_REQUEST, fake, victim, fake.addr)]
    if intruder.variant is Variant.DH_IMPROVED:
        pair = _ensure_own_keypair(intruder)
        out.append(Message(MsgKind.DH_PUBLIC, fake, victim, encode_public(pair.s_public)))
    else:
        out.append(_issue_own_challenge(intruder, victim, fake))
    return _emit(intruder, out)


def _issue_own_challenge(intruder: IntruderState, victim: DeviceId, fake: DeviceId) -> Message:
    challenge = Challenge(intruder.rng.randbytes(16))
    intruder.own_challenge = challenge
    return Message(MsgKind.CHALLENGE, fake, victim, challenge.value)


def intercept(intruder: IntruderState, msg: Message, now: int) -> list[Message]:
    """React to one message that physically arrived at the intruder."""
    _note(intruder, msg)
    if intruder.mode is IntruderMode.RELAY_PASSIVE:
        return _emit(intruder, [msg])
    if intruder.mode is IntruderMode.RELAY_ACTIVE:
        if msg.kind is MsgKind.DH_PUBLIC:
            pair = _ensure_own_keypair(intruder)
            swapped = Message(
                MsgKind.DH_PUBLIC, msg.sender, msg.receiver, encode_public(pair.s_public)
            )
            return _emit(intruder, [swapped])
        return _emit(intruder, [msg])
    return _emit(intruder, _originate_step(intruder, msg))


def _originate_step(intruder: IntruderState, msg: Message) -> list[Message]:
    a, b = intruder.victim_a, intruder.victim_b
    source = msg.sender

    if msg.kind is MsgKind.DH_PUBLIC:
        if source == a and intruder.own_challenge is None:
            # a's public answered ours; now the challenge leg can start
            return [_issue_own_challenge(intruder, a, intruder.impersonating[a])]
        if source == b and intruder.held_challenge is not None:
            released = intruder.held_challenge
            intruder.held_challenge = None
            return [released]
        return []

    if msg.kind is MsgKind.CHALLENGE:
        if source == a and not intruder.relayed_first_challenge:
            # a's counter-challenge becomes a fresh handshake toward b under
            # a's address; b's own counter-challenge will be dropped, so
            # nothing downstream can ever be answered
            intruder.relayed_first_challenge = True
            intruder.initiated.add(b)
            out = [Message(MsgKind.AUTH_REQUEST, a, b, a.addr)]
            if intruder.variant is Variant.DH_IMPROVED:
                pair = _ensure_own_keypair(intruder)
                out.append(Message(MsgKind.DH_PUBLIC, a, b, encode_public(pair.s_public)))
                intruder.held_challenge = msg
            else:
                out.append(msg)
            return out
        return []

    if msg.kind is MsgKind.RESPONSE:
        if source == a and intruder.own_challenge is not None and not intruder.own_challenge_answered:
            # the harvest: a victim's answer to a challenge we chose
            intruder.own_challenge_answered = True
            return []
        dest = msg.receiver
        if dest == a or dest in intruder.initiated:
            return [msg]
        return []

    # confirmations and failures die here; the stalled victim is left to
    # its timeout
    return []


def verdict(
    intruder: IntruderState,
    outcomes: dict[DeviceId, AuthOutcome],
    transcript: Transcript,
    detection: Detection,
    link_key: LinkKey,
) -> AttackVerdict:
    """Score the run. link_key is judge-side knowledge: it identifies which
    captured challenge-response pairs are the victims' real credentials, and
    is never given to the intruder itself."""
    honest = set(outcomes)
    all_success = all(o.status is AuthStatus.MUTUAL_SUCCESS for o in outcomes.values())
    direct_hops = any(e.from_id in honest and e.to_id in honest for e in transcript.events)
    attack_success = all_success and not direct_hops and len(transcript.events) > 0

    integrity = Integrity.MAINTAINED
    emitted: set[tuple[DeviceId, MsgKind, bytes]] = set()
    for event in transcript.events:
        if event.from_id == intruder.id and event.to_id in honest:
            impersonated = intruder.impersonating.get(event.to_id)
            if (impersonated, event.kind, event.payload) not in emitted:
                integrity = Integrity.BROKEN
        if event.from_id in honest:
            emitted.add((event.from_id, event.kind, event.payload))

    confidentiality = Confidentiality.MAINTAINED
    challenges = [item for item in intruder.knowledge if len(item) == 16]
    responses = {item for item in intruder.knowledge if len(item) == 4}
    for raw in challenges:
        for claimant in honest:
            sres, _ = e1(link_key, Challenge(raw), claimant)
            if sres.value in responses:
                confidentiality = Confidentiality.BREACHED

    return AttackVerdict(
        attack_success=attack_success,
        integrity=integrity,
        confidentiality=confidentiality,
        detection=detection,
    )


def dlog_bruteforce(params: DhParams, s_public: int) -> tuple[int, int]:
    """Ascending-scan discrete logarithm: the exponent and the trial count.

    Cost grows linearly in the recovered exponent, which is the whole point
    measured by the experiment scripts.
    """
    if not 1 <= s_public <= params.p - 1:
        raise ValueError(f"public value must be in [1, p-1], got {s_public}")
    acc = 1
    for r in range(1, params.p):
        acc = acc * params.alpha % params.p
        if acc == s_public:
            return r, r
    raise ValueError("value is outside the generator's image")
