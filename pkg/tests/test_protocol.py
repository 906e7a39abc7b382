"""Handshake state machines: flows, orderings, failures, determinism."""

from collections import deque

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from btauthsim.crypto import Challenge, DeviceId, DhParams, LinkKey, e1
from btauthsim.protocol import (
    AuthStatus,
    Message,
    MsgKind,
    Phase,
    ProtocolError,
    Variant,
    handle,
    new_device,
    outcome_of,
    rtt_estimate,
    start,
)

ADDR_A = DeviceId.from_hex("aa0000000001")
ADDR_B = DeviceId.from_hex("bb0000000002")
KEY1 = LinkKey(bytes(range(16)))
KEY2 = LinkKey(bytes(range(16, 32)))
PARAMS = DhParams(p=2147483647, alpha=7)


def pump(devices, first_msgs, latency=10):
    """Drive directly linked devices with in-order uniform-latency delivery.

    Returns the delivery log as (time, message) pairs.
    """
    queue = deque((latency, m) for m in first_msgs)
    log = []
    while queue:
        t, msg = queue.popleft()
        log.append((t, msg))
        for out in handle(devices[msg.receiver], msg, t):
            queue.append((t + latency, out))
    return log


def honest_pair(variant, seed_a=1, seed_b=2, key_a=KEY1, key_b=KEY1):
    params = PARAMS if variant is Variant.DH_IMPROVED else None
    dev_a = new_device(ADDR_A, variant, key_a, seed_a, dh_params=params)
    dev_b = new_device(ADDR_B, variant, key_b, seed_b, dh_params=params)
    return dev_a, dev_b


def run_honest(variant, **kw):
    dev_a, dev_b = honest_pair(variant, **kw)
    log = pump({ADDR_A: dev_a, ADDR_B: dev_b}, start(dev_a, ADDR_B, 0))
    return dev_a, dev_b, log


class TestLegacyHonest:
    def test_flow_and_outcome(self):
        dev_a, dev_b, log = run_honest(Variant.LEGACY)
        kinds = [m.kind for _, m in log]
        assert kinds == [
            MsgKind.AUTH_REQUEST,
            MsgKind.CHALLENGE,
            MsgKind.RESPONSE,
            MsgKind.CHALLENGE,
            MsgKind.RESPONSE,
            MsgKind.AUTH_SUCCESS,
        ]
        assert log[-1][0] == 40
        for dev in (dev_a, dev_b):
            out = outcome_of(dev)
            assert out.status is AuthStatus.MUTUAL_SUCCESS
            assert out.messages_exchanged == 6
        assert outcome_of(dev_a).authenticated_with == ADDR_B
        assert outcome_of(dev_b).authenticated_with == ADDR_A

    def test_round_trip_times(self):
        dev_a, dev_b, _ = run_honest(Variant.LEGACY)
        assert rtt_estimate(dev_a) == 20
        assert rtt_estimate(dev_b) == 20

    def test_ciphering_key_agreed(self):
        dev_a, dev_b, _ = run_honest(Variant.LEGACY)
        assert dev_a.enc_key is not None
        assert dev_a.enc_key == dev_b.enc_key

    def test_ciphering_key_depends_on_link_key(self):
        a1, _, _ = run_honest(Variant.LEGACY, key_a=KEY1, key_b=KEY1)
        a2, _, _ = run_honest(Variant.LEGACY, key_a=KEY2, key_b=KEY2)
        assert a1.enc_key != a2.enc_key

    def test_responder_answers_immediately(self):
        dev_a, dev_b = honest_pair(Variant.LEGACY)
        first = start(dev_a, ADDR_B, 0)
        assert handle(dev_b, first[0], 10) == []
        replies = handle(dev_b, first[1], 10)
        assert [m.kind for m in replies] == [MsgKind.RESPONSE, MsgKind.CHALLENGE]


class TestImprovedHonest:
    def test_flow_and_outcome(self):
        dev_a, dev_b, log = run_honest(Variant.IMPROVED)
        kinds = [m.kind for _, m in log]
        assert kinds == [
            MsgKind.AUTH_REQUEST,
            MsgKind.CHALLENGE,
            MsgKind.CHALLENGE,
            MsgKind.RESPONSE,
            MsgKind.RESPONSE,
            MsgKind.AUTH_SUCCESS,
        ]
        assert log[-1][0] == 50
        assert outcome_of(dev_a).status is AuthStatus.MUTUAL_SUCCESS
        assert outcome_of(dev_b).status is AuthStatus.MUTUAL_SUCCESS

    def test_responder_response_strictly_after_initiator_response(self):
        _, _, log = run_honest(Variant.IMPROVED)
        responses = [i for i, (_, m) in enumerate(log) if m.kind is MsgKind.RESPONSE]
        senders = [log[i][1].sender for i in responses]
        assert senders == [ADDR_A, ADDR_B]

    def test_responder_withholds_on_first_challenge(self):
        dev_a, dev_b = honest_pair(Variant.IMPROVED)
        first = start(dev_a, ADDR_B, 0)
        handle(dev_b, first[0], 10)
        replies = handle(dev_b, first[1], 10)
        assert [m.kind for m in replies] == [MsgKind.CHALLENGE]

    def test_withheld_answer_released_by_valid_response(self):
        dev_a, dev_b = honest_pair(Variant.IMPROVED)
        first = start(dev_a, ADDR_B, 0)
        handle(dev_b, first[0], 10)
        (counter,) = handle(dev_b, first[1], 10)
        (answer,) = handle(dev_a, counter, 20)
        assert answer.kind is MsgKind.RESPONSE
        released = handle(dev_b, answer, 30)
        assert [m.kind for m in released] == [MsgKind.RESPONSE]
        expected, _ = e1(KEY1, Challenge(first[1].payload), ADDR_B)
        assert released[0].payload == expected.value

    def test_round_trip_times(self):
        dev_a, dev_b, _ = run_honest(Variant.IMPROVED)
        assert rtt_estimate(dev_a) == 40
        assert rtt_estimate(dev_b) == 20


class TestDhImprovedHonest:
    def test_flow_and_outcome(self):
        dev_a, dev_b, log = run_honest(Variant.DH_IMPROVED)
        kinds = [m.kind for _, m in log]
        assert kinds == [
            MsgKind.AUTH_REQUEST,
            MsgKind.DH_PUBLIC,
            MsgKind.DH_PUBLIC,
            MsgKind.CHALLENGE,
            MsgKind.CHALLENGE,
            MsgKind.RESPONSE,
            MsgKind.RESPONSE,
            MsgKind.AUTH_SUCCESS,
        ]
        assert log[-1][0] == 70
        assert outcome_of(dev_a).status is AuthStatus.MUTUAL_SUCCESS
        assert outcome_of(dev_b).status is AuthStatus.MUTUAL_SUCCESS

    def test_session_keys_agree_and_shift_the_auth_key(self):
        dev_a, dev_b, _ = run_honest(Variant.DH_IMPROVED)
        assert dev_a.session is not None
        assert dev_a.session == dev_b.session
        assert dev_a.effective_key == dev_b.effective_key
        assert dev_a.effective_key != dev_a.link_key

    def test_public_values_in_group_range(self):
        _, _, log = run_honest(Variant.DH_IMPROVED)
        publics = [int.from_bytes(m.payload, "big") for _, m in log if m.kind is MsgKind.DH_PUBLIC]
        assert len(publics) == 2
        assert all(1 <= s <= PARAMS.p - 1 for s in publics)

    def test_round_trip_times(self):
        dev_a, dev_b, _ = run_honest(Variant.DH_IMPROVED)
        assert rtt_estimate(dev_a) == 40
        assert rtt_estimate(dev_b) == 20

    def test_requires_group_parameters(self):
        with pytest.raises(ValueError):
            new_device(ADDR_A, Variant.DH_IMPROVED, KEY1, 1)


class TestFailures:
    @pytest.mark.parametrize("variant", list(Variant), ids=lambda v: v.value)
    def test_mismatched_link_keys_fail(self, variant):
        dev_a, dev_b, _ = run_honest(variant, key_a=KEY1, key_b=KEY2)
        assert outcome_of(dev_a).status is AuthStatus.FAILED
        assert outcome_of(dev_b).status is AuthStatus.FAILED

    def test_wrong_response_rejected(self):
        dev_a, dev_b = honest_pair(Variant.LEGACY)
        start(dev_a, ADDR_B, 0)
        forged = Message(MsgKind.RESPONSE, ADDR_B, ADDR_A, b"\x00\x00\x00\x00")
        out = handle(dev_a, forged, 10)
        assert [m.kind for m in out] == [MsgKind.AUTH_FAIL]
        assert dev_a.phase is Phase.FAILED

    def test_illegal_kind_in_phase(self):
        dev_b = new_device(ADDR_B, Variant.LEGACY, KEY1, 2)
        stray = Message(MsgKind.CHALLENGE, ADDR_A, ADDR_B, b"\x00" * 16)
        out = handle(dev_b, stray, 10)
        assert [m.kind for m in out] == [MsgKind.AUTH_FAIL]
        assert dev_b.phase is Phase.FAILED

    def test_auth_fail_is_terminal_and_silent(self):
        dev_a, dev_b = honest_pair(Variant.LEGACY)
        start(dev_a, ADDR_B, 0)
        assert handle(dev_a, Message(MsgKind.AUTH_FAIL, ADDR_B, ADDR_A), 10) == []
        assert dev_a.phase is Phase.FAILED

    def test_terminal_phases_absorb(self):
        dev_a, _, _ = run_honest(Variant.LEGACY)
        stray = Message(MsgKind.CHALLENGE, ADDR_B, ADDR_A, b"\x07" * 16)
        assert handle(dev_a, stray, 99) == []
        assert dev_a.phase is Phase.DONE


class TestDriverContract:
    def test_start_twice_rejected(self):
        dev_a = new_device(ADDR_A, Variant.LEGACY, KEY1, 1)
        start(dev_a, ADDR_B, 0)
        with pytest.raises(ProtocolError):
            start(dev_a, ADDR_B, 0)

    def test_misrouted_message_rejected(self):
        dev_a = new_device(ADDR_A, Variant.LEGACY, KEY1, 1)
        msg = Message(MsgKind.AUTH_REQUEST, ADDR_B, DeviceId(b"\xcc" * 6), ADDR_B.addr)
        with pytest.raises(ProtocolError):
            handle(dev_a, msg, 0)

    def test_fresh_device_state(self):
        dev = new_device(ADDR_A, Variant.LEGACY, KEY1, 1)
        assert dev.phase is Phase.IDLE
        assert not dev.peer_authenticated
        assert dev.dh is None
        assert rtt_estimate(dev) is None

    def test_same_seed_same_first_challenge(self):
        one = new_device(ADDR_A, Variant.LEGACY, KEY1, 42)
        two = new_device(ADDR_B, Variant.LEGACY, KEY1, 42)
        c1 = start(one, ADDR_B, 0)[1].payload
        c2 = start(two, ADDR_A, 0)[1].payload
        assert c1 == c2


class TestMessageValidation:
    def test_payload_width_enforced(self):
        with pytest.raises(ValueError):
            Message(MsgKind.CHALLENGE, ADDR_A, ADDR_B, b"\x00" * 15)
        with pytest.raises(ValueError):
            Message(MsgKind.RESPONSE, ADDR_A, ADDR_B, b"\x00" * 16)
        with pytest.raises(ValueError):
            Message(MsgKind.AUTH_SUCCESS, ADDR_A, ADDR_B, b"\x00")

    def test_self_addressed_rejected(self):
        with pytest.raises(ValueError):
            Message(MsgKind.AUTH_SUCCESS, ADDR_A, ADDR_A)


class TestDeterminism:
    @pytest.mark.parametrize("variant", list(Variant), ids=lambda v: v.value)
    def test_identical_seeds_identical_logs(self, variant):
        _, _, log1 = run_honest(variant, seed_a=7, seed_b=9)
        _, _, log2 = run_honest(variant, seed_a=7, seed_b=9)
        assert [(t, m.kind, m.sender, m.receiver, m.payload) for t, m in log1] == (
            [(t, m.kind, m.sender, m.receiver, m.payload) for t, m in log2]
        )

    @given(st.integers(min_value=0, max_value=2**32), st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=40, deadline=None)
    def test_honest_runs_always_succeed(self, seed_a, seed_b):
        for variant, expected_len in [
            (Variant.LEGACY, 6),
            (Variant.IMPROVED, 6),
            (Variant.DH_IMPROVED, 8),
        ]:
            dev_a, dev_b, log = run_honest(variant, seed_a=seed_a, seed_b=seed_b)
            assert outcome_of(dev_a).status is AuthStatus.MUTUAL_SUCCESS
            assert outcome_of(dev_b).status is AuthStatus.MUTUAL_SUCCESS
            assert len(log) == expected_len

    @given(st.integers(min_value=0, max_value=2**32))
    @settings(max_examples=25, deadline=None)
    def test_nested_ordering_invariant(self, seed):
        for variant in (Variant.IMPROVED, Variant.DH_IMPROVED):
            _, _, log = run_honest(variant, seed_a=seed, seed_b=seed + 1)
            first_responder_resp = None
            first_initiator_resp = None
            for i, (_, m) in enumerate(log):
                if m.kind is MsgKind.RESPONSE and m.sender == ADDR_B:
                    first_responder_resp = first_responder_resp or i
                if m.kind is MsgKind.RESPONSE and m.sender == ADDR_A:
                    first_initiator_resp = first_initiator_resp or i
            assert first_initiator_resp is not None
            assert first_responder_resp is not None
            assert first_responder_resp > first_initiator_resp
