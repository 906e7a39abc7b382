"""Key-derivation functions and value-type validation."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from btauthsim.crypto import (
    Aco,
    Challenge,
    DeviceId,
    DhParams,
    InitKey,
    LinkKey,
    Pin,
    SessionKey,
    Sres,
    combination_link_key,
    e1,
    encryption_key,
    init_key,
    session_key_from_shared,
    xor_bytes,
)

Z16 = Challenge(b"\x00" * 16)
ZKEY = LinkKey(b"\x00" * 16)
ZADDR = DeviceId(b"\x00" * 6)
ADDR_A = DeviceId.from_hex("aa0000000001")
ADDR_B = DeviceId.from_hex("bb0000000002")


class TestValueTypes:
    def test_widths_enforced(self):
        with pytest.raises(ValueError):
            DeviceId(b"\x00" * 5)
        with pytest.raises(ValueError):
            Challenge(b"\x00" * 15)
        with pytest.raises(ValueError):
            Sres(b"\x00" * 5)
        with pytest.raises(ValueError):
            Aco(b"\x00" * 16)
        with pytest.raises(ValueError):
            LinkKey(b"")
        with pytest.raises(ValueError):
            InitKey(b"\x00" * 17)
        with pytest.raises(ValueError):
            SessionKey(b"\x00" * 8)

    def test_pin_length_bounds(self):
        Pin(b"0")
        Pin(b"0" * 16)
        with pytest.raises(ValueError):
            Pin(b"")
        with pytest.raises(ValueError):
            Pin(b"0" * 17)

    def test_device_id_hex_round_trip(self):
        assert str(ADDR_A) == "aa0000000001"
        assert DeviceId.from_hex("aa0000000001") == ADDR_A

    def test_frozen(self):
        with pytest.raises(AttributeError):
            Z16.value = b"\x01" * 16  # type: ignore[misc]


class TestE1:
    def test_golden_all_zero(self):
        sres, aco = e1(ZKEY, Z16, ZADDR)
        assert sres.value.hex() == "e168721d"
        assert aco.value.hex() == "fcf1089b38c23c185b2d9740"

    def test_deterministic(self):
        assert e1(ZKEY, Z16, ADDR_A) == e1(ZKEY, Z16, ADDR_A)

    def test_claimant_address_matters(self):
        assert e1(ZKEY, Z16, ADDR_A) != e1(ZKEY, Z16, ADDR_B)

    def test_key_matters(self):
        other = LinkKey(b"\x01" + b"\x00" * 15)
        assert e1(ZKEY, Z16, ADDR_A) != e1(other, Z16, ADDR_A)

    def test_challenge_matters(self):
        other = Challenge(b"\x00" * 15 + b"\x01")
        assert e1(ZKEY, Z16, ADDR_A) != e1(ZKEY, other, ADDR_A)

    @given(st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
    def test_output_widths(self, key, chal):
        sres, aco = e1(LinkKey(key), Challenge(chal), ADDR_A)
        assert len(sres.value) == 4
        assert len(aco.value) == 12


class TestInitKey:
    def test_golden(self):
        assert init_key(Pin(b"0000"), ZADDR, Z16).value.hex() == (
            "56a8bcbc9e4f35227bcf9c373247871d"
        )

    def test_golden_longer_pin(self):
        assert init_key(Pin(b"00000"), ZADDR, Z16).value.hex() == (
            "2f2ff85e765f352a2b23c6378a92f34a"
        )

    def test_pin_length_separates_zero_padded_pins(self):
        # b"0000" and b"0000\x00"-style confusions must not collide; the
        # length octet in the input material guarantees it
        assert init_key(Pin(b"0000"), ZADDR, Z16) != init_key(Pin(b"00000"), ZADDR, Z16)

    def test_all_inputs_matter(self):
        base = init_key(Pin(b"1234"), ADDR_A, Z16)
        assert base != init_key(Pin(b"1235"), ADDR_A, Z16)
        assert base != init_key(Pin(b"1234"), ADDR_B, Z16)
        assert base != init_key(Pin(b"1234"), ADDR_A, Challenge(b"\x01" * 16))


class TestCombinationLinkKey:
    RA = Challenge(b"\x11" * 16)
    RB = Challenge(b"\x22" * 16)

    def test_golden(self):
        key = combination_link_key(self.RA, ADDR_A, self.RB, ADDR_B)
        assert key.value.hex() == "72769791b896519027ea79c544e47f2d"

    def test_symmetric_in_contributions(self):
        assert combination_link_key(self.RA, ADDR_A, self.RB, ADDR_B) == (
            combination_link_key(self.RB, ADDR_B, self.RA, ADDR_A)
        )

    def test_equal_contributions_cancel(self):
        assert combination_link_key(self.RA, ADDR_A, self.RA, ADDR_A).value == b"\x00" * 16

    @given(st.binary(min_size=16, max_size=16), st.binary(min_size=16, max_size=16))
    def test_symmetry_property(self, ra, rb):
        ca, cb = Challenge(ra), Challenge(rb)
        assert combination_link_key(ca, ADDR_A, cb, ADDR_B) == (
            combination_link_key(cb, ADDR_B, ca, ADDR_A)
        )


class TestEncryptionKey:
    def test_golden(self):
        key = encryption_key(ZKEY, Aco(b"\x00" * 12), Z16)
        assert key.hex() == "afa4ba72cc4350e9dffede70391ea517"

    def test_width_and_inputs(self):
        aco = Aco(b"\x07" * 12)
        base = encryption_key(ZKEY, aco, Z16)
        assert len(base) == 16
        assert base != encryption_key(ZKEY, aco, Challenge(b"\x01" * 16))
        assert base != encryption_key(ZKEY, Aco(b"\x08" * 12), Z16)


class TestSessionKeyFromShared:
    def test_golden(self):
        params = DhParams(p=23, alpha=5)
        assert session_key_from_shared(2, params).value.hex() == (
            "6f419c50c84c1f8464295577bd89924b"
        )

    def test_modulus_binds(self):
        assert session_key_from_shared(2, DhParams(23, 5)) != (
            session_key_from_shared(2, DhParams(29, 2))
        )

    def test_range_enforced(self):
        params = DhParams(p=23, alpha=5)
        with pytest.raises(ValueError):
            session_key_from_shared(23, params)
        with pytest.raises(ValueError):
            session_key_from_shared(-1, params)


class TestXorBytes:
    def test_basic(self):
        assert xor_bytes(b"\x0f\xf0", b"\xff\xff") == b"\xf0\x0f"

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            xor_bytes(b"\x00", b"\x00\x00")

    @given(st.binary(max_size=32))
    def test_self_inverse(self, data):
        assert xor_bytes(data, data) == b"\x00" * len(data)
