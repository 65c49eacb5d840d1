"""Token encode/parse/verify, including adversarial input."""

import base64
import json
import random
import string

import pytest

from mmauth.tokens import (HEADER, TokenClaims, TokenSigner, b64url_decode,
                           b64url_encode, parse_token, sim_binding)

KEY = bytes(range(32))


def make_token(**overrides):
    claims = dict(sub="+254700000001", sid="sess-1", iat=1000, exp=1300,
                  nonce="abcd1234", simb="f" * 64)
    claims.update(overrides)
    return TokenSigner(KEY).sign(TokenClaims(**claims))


def test_b64url_round_trip():
    for raw in (b"a", b"ab", b"abc", bytes(range(256))):
        assert b64url_decode(b64url_encode(raw)) == raw
    assert "=" not in b64url_encode(b"any padding gone")


def test_b64url_decode_rejects_junk():
    assert b64url_decode("") is None
    assert b64url_decode("éé") is None
    assert b64url_decode(123) is None


def test_signer_requires_256_bit_key():
    with pytest.raises(ValueError):
        TokenSigner(b"short")


def test_sign_then_parse_recovers_claims():
    token = make_token()
    assert TokenSigner(KEY).signature_valid(token)
    claims = parse_token(token)
    assert claims == {"sub": "+254700000001", "sid": "sess-1", "iat": 1000,
                      "exp": 1300, "nonce": "abcd1234", "simb": "f" * 64}


def test_web_token_omits_sim_binding():
    token = make_token(simb=None)
    assert "simb" not in parse_token(token)


def test_header_is_fixed():
    token = make_token()
    header = json.loads(b64url_decode(token.split(".")[0]))
    assert header == HEADER


def test_any_payload_bit_flip_kills_signature():
    token = make_token()
    h, p, s = token.split(".")
    raw = bytearray(b64url_decode(p))
    raw[3] ^= 0x01
    forged = f"{h}.{b64url_encode(bytes(raw))}.{s}"
    assert not TokenSigner(KEY).signature_valid(forged)


def test_signature_from_other_key_rejected():
    token = make_token()
    assert not TokenSigner(b"\x01" * 32).signature_valid(token)


@pytest.mark.parametrize("broken", [
    None, 7, "", "a.b", "a.b.c.d", "....",
    "not-base64!.x.y",
])
def test_parse_is_total_on_malformed_structure(broken):
    assert parse_token(broken) is None


def test_parse_rejects_wrong_header():
    payload = b64url_encode(json.dumps(
        {"sub": "s", "sid": "i", "iat": 1, "exp": 2, "nonce": "n"}).encode())
    alg_none = b64url_encode(b'{"alg":"none","typ":"JWT"}')
    assert parse_token(f"{alg_none}.{payload}.{payload}") is None


def test_parse_rejects_claim_set_deviations():
    def with_payload(obj) -> str:
        h = b64url_encode(json.dumps(HEADER, separators=(",", ":"),
                                     sort_keys=True).encode())
        p = b64url_encode(json.dumps(obj).encode())
        return f"{h}.{p}.{b64url_encode(b'sig')}"

    good = {"sub": "s", "sid": "i", "iat": 1, "exp": 2, "nonce": "n"}
    assert parse_token(with_payload(good)) == good

    missing = dict(good)
    del missing["nonce"]
    assert parse_token(with_payload(missing)) is None

    extra = dict(good, admin=True)
    assert parse_token(with_payload(extra)) is None

    assert parse_token(with_payload(dict(good, iat="1"))) is None
    assert parse_token(with_payload(dict(good, exp=True))) is None
    assert parse_token(with_payload(dict(good, sub=5))) is None
    assert parse_token(with_payload(dict(good, simb=17))) is None
    assert parse_token(with_payload(["not", "an", "object"])) is None


def test_parse_fuzz_never_raises():
    rng = random.Random(99)
    alphabet = string.printable
    for _ in range(5000):
        blob = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 80)))
        parse_token(blob)  # must not raise
    for _ in range(2000):
        raw = bytes(rng.randrange(256) for _ in range(rng.randrange(0, 60)))
        parse_token(base64.urlsafe_b64encode(raw).decode())


def test_sim_binding_moves_with_swap_epoch():
    salt = b"binding-salt"
    before = sim_binding("8925402100000000000", 0, salt)
    after_swap = sim_binding("8925402100000000001", 1, salt)
    assert before != after_swap
    assert sim_binding("8925402100000000000", 0, salt) == before
    int(before, 16)
    assert len(before) == 64
