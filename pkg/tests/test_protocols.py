import json
import random
import warnings

import pytest
from hypothesis import given, settings, strategies as st

import oracle
from nilkex.groups import PcGroup
from nilkex.matrix import RingDescriptor, UTGroup, heisenberg_hom
from nilkex.platforms import default_params, load_platform
from nilkex.presentation import heisenberg_presentation
from nilkex.protocols import (IncompleteTranscript, InvalidParameters, Message, PrivateKey,
                              ProtocolParams, Transcript, derive_key, is_complete, publish,
                              run_exchange, sample_private_keys, transcript_from_json,
                              transcript_to_json, validate_params)

HG = PcGroup(heisenberg_presentation(), name="heisenberg")
X1, X2 = HG.generator(1), HG.generator(2)
UT4 = UTGroup(4, RingDescriptor.integers())
P1 = ProtocolParams("I", HG, 2, bases=(X1, X2), platform="heisenberg")
P2 = ProtocolParams("II", UT4, 2, x=UT4.unit(1, 2), g=UT4.superdiagonal(), platform="ut4z")


def test_validate_params():
    assert validate_params(P1).valid
    bad = ProtocolParams("I", HG, 2, bases=(X1, X1))
    rep = validate_params(bad)
    assert not rep.valid and "[g1,...,g2]" in rep.problems[0]
    assert validate_params(P2).valid
    with pytest.raises(InvalidParameters):
        run_exchange(bad, keys=[1, 2, 3])


def test_param_shape_errors():
    with pytest.raises(InvalidParameters):
        ProtocolParams("I", HG, 1, bases=(X1,))
    with pytest.raises(InvalidParameters):
        ProtocolParams("II", UT4, 2, x=None, g=UT4.superdiagonal())
    with pytest.raises(InvalidParameters):
        ProtocolParams("III", HG, 2)


def test_private_key_nonzero_and_hidden():
    with pytest.raises(ValueError):
        PrivateKey(1, 0)
    assert "12345" not in repr(PrivateKey(1, 12345))


def test_publish_schedule():
    assert publish(P1, PrivateKey(1, 2)) == [Message(1, "g1", (2, 0, 0))]
    assert publish(P1, PrivateKey(2, 3)) == [Message(2, "g1", (3, 0, 0)), Message(2, "g2", (0, 3, 0))]
    assert publish(P1, PrivateKey(3, 5)) == [Message(3, "g2", (0, 5, 0))]
    msgs = publish(P2, PrivateKey(2, 7))
    assert [(m.role, m.label) for m in msgs] == [(2, "g")]
    assert msgs[0].element == UT4.power(UT4.superdiagonal(), 7)


def test_heisenberg_protocol_one_key():
    res = run_exchange(P1, keys=[2, 3, 5])
    assert res.agreed
    assert set(res.role_keys) == {1, 2, 3}
    assert oracle.heis(res.shared_key) == oracle.mat(3, {(1, 3): 30})
    assert heisenberg_hom(res.shared_key) == UTGroup(3, RingDescriptor.integers()).unit(1, 3, 30)


def test_keys_all_one_give_base_commutator():
    assert run_exchange(P1, keys=[1, 1, 1]).shared_key == (0, 0, 1)
    assert run_exchange(P2, keys=[1, 1, 1]).shared_key == UT4.unit(1, 4)


def test_negative_keys():
    res = run_exchange(P1, keys=[1, -1, 1])
    assert res.agreed
    assert oracle.heis(res.shared_key) == oracle.mat(3, {(1, 3): -1})


def test_ut4_protocol_two_key():
    res = run_exchange(P2, keys=[2, 3, 5])
    assert res.agreed
    assert res.shared_key == UT4.unit(1, 4, 30)


def test_missing_message_reported():
    res = run_exchange(P1, keys=[2, 3, 5])
    partial = Transcript(P1, tuple(m for m in res.transcript.messages if m.role != 3))
    assert not is_complete(partial)
    with pytest.raises(IncompleteTranscript) as info:
        derive_key(P1, PrivateKey(1, 2), partial)
    assert (info.value.role, info.value.label) == (3, "g2")


def test_message_order_is_canonical():
    res = run_exchange(P1, keys=[2, 3, 5])
    shuffled = list(res.transcript.messages)
    random.Random(1).shuffle(shuffled)
    assert Transcript(P1, tuple(shuffled)) == res.transcript


def test_trivial_key_flag_on_finite_platform():
    plat = load_platform("heisenberg-fp:3")
    params = default_params(plat, "I")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_exchange(params, keys=[3, 1, 1])
        assert res.trivial_key
        assert params.group.is_identity(res.shared_key)
        assert not run_exchange(params, keys=[1, 2, 1]).trivial_key


def test_small_order_warning():
    params = default_params(load_platform("heisenberg-fp:5"), "I")
    with pytest.warns(UserWarning, match="order 5"):
        run_exchange(params, keys=[1, 2, 3])


def test_sampled_keys_nonzero_and_bounded():
    keys = sample_private_keys(500, 3, random.Random(0))
    assert set(keys) == {-3, -2, -1, 1, 2, 3}


def test_seeded_exchange_deterministic():
    a = run_exchange(P2, seed=11)
    b = run_exchange(P2, seed=11)
    assert transcript_to_json(a.transcript) == transcript_to_json(b.transcript)
    assert a.shared_key == b.shared_key


PLATFORMS = [("heisenberg", "I"), ("heisenberg", "II"), ("ut3z", "I"), ("ut4z", "I"), ("ut4z", "II"),
             ("ut3zmod:6", "I"), ("heisenberg-fp:5", "I"), ("ut5fp:7", "II"), ("dihedral16.npres", "I"),
             ("dihedral16.npres", "II"), ("quaternion8.npres", "I")]


@pytest.mark.parametrize("spec,protocol", PLATFORMS)
@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32))
def test_agreement_and_round_trip(spec, protocol, seed):
    params = default_params(load_platform(spec), protocol)
    rng = random.Random(seed)
    keys = sample_private_keys(params.parties, 2**32, rng)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = run_exchange(params, keys=keys)
    assert res.agreed
    total = 1
    for k in keys:
        total *= k
    assert params.group.equal(res.shared_key, params.group.power(params.base_value(), total))
    text = transcript_to_json(res.transcript)
    back = transcript_from_json(text)
    assert transcript_to_json(back) == text
    assert back.messages == res.transcript.messages
    # nothing beyond public data is serialized; over finite rings the
    # published entries are reduced, so the raw exponents never show up
    assert not {"keys", "private", "role_keys", "shared_key"} & _all_keys(json.loads(text))
    if params.group.order_bound() is not None:
        for k in keys:
            if abs(k) > 10**4:
                assert str(abs(k)) not in text


def _all_keys(obj):
    if isinstance(obj, dict):
        return set(obj) | set().union(*(_all_keys(v) for v in obj.values()))
    if isinstance(obj, list):
        return set().union(*(_all_keys(v) for v in obj)) if obj else set()
    return set()


def test_transcript_json_shape():
    res = run_exchange(P1, keys=[2, 3, 5])
    data = json.loads(transcript_to_json(res.transcript))
    assert data["protocol"] == "I"
    assert "presentation" in data["platform"]
    assert [m["element"] for m in data["messages"]][0] == [2, 0, 0]


@pytest.mark.parametrize("mutate", [
    lambda d: d.pop("messages"),
    lambda d: d.update(format="other"),
    lambda d: d["messages"].append({"role": 9, "label": "g1", "element": [0, 0, 0]}),
    lambda d: d["messages"].append(dict(d["messages"][0])),
    lambda d: d["messages"][0].update(element=[1, 2]),
])
def test_malformed_transcripts_rejected(mutate):
    from nilkex.protocols import MalformedTranscript
    data = json.loads(transcript_to_json(run_exchange(P1, keys=[2, 3, 5]).transcript))
    mutate(data)
    with pytest.raises(MalformedTranscript):
        transcript_from_json(json.dumps(data))


def test_not_json_rejected():
    from nilkex.protocols import MalformedTranscript
    with pytest.raises(MalformedTranscript):
        transcript_from_json("{ nope")
