"""Multiparty key exchange on nilpotent groups.

Protocol I (class n > 1, bases g1..gn with [g1..gn] != 1): party 1 sends
g1^a1, party n+1 sends gn^a(n+1), party j in 2..n sends g(j-1)^aj and gj^aj.
Every party ends with [g1..gn]^(a1...a(n+1)).

Protocol II (class n+1, not n-Engel, [x, g, ..., g] != 1): every party sends
g^aj; party j computes [x^aj, g^a1, ..., (skip j), ..., g^a(n+1)], which is
[x, g, ..., g]^(a1...a(n+1)).
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

from .groups import Group, element_order, engel_commutator, left_normed_commutator
from .multilinear import DegenerateMapError, engel_map, plain_map

TRANSCRIPT_FORMAT = "nilkex-transcript/1"
DEFAULT_INTEGER_BOUND = 2**128
BRUTE_FORCE_ORDER_LIMIT = 10**6
SMALL_ORDER_WARNING = 2**16


class InvalidParameters(ValueError):
    pass


class IncompleteTranscript(KeyError):
    def __init__(self, role: int, label: str):
        self.role = role
        self.label = label
        super().__init__(f"transcript lacks message ({role}, {label!r})")


@dataclass(frozen=True)
class ProtocolParams:
    protocol: str
    group: Group
    arity: int
    bases: Tuple[Any, ...] = ()
    x: Any = None
    g: Any = None
    platform: str = ""

    def __post_init__(self):
        if self.protocol not in ("I", "II"):
            raise InvalidParameters(f"unknown protocol {self.protocol!r}")
        object.__setattr__(self, "bases", tuple(self.bases))
        if self.protocol == "I":
            if self.arity < 2:
                raise InvalidParameters("Protocol I needs class n > 1")
            if len(self.bases) != self.arity:
                raise InvalidParameters(f"Protocol I needs {self.arity} base elements")
        else:
            if self.arity < 1:
                raise InvalidParameters("Protocol II needs n >= 1")
            if self.x is None or self.g is None:
                raise InvalidParameters("Protocol II needs public elements x and g")

    @property
    def parties(self) -> int:
        return self.arity + 1

    def base_value(self):
        """The element whose (a1...a(n+1))-th power is the shared key."""
        if self.protocol == "I":
            return left_normed_commutator(self.bases, self.group)
        return engel_commutator(self.x, self.g, self.arity, self.group)


@dataclass(frozen=True)
class PrivateKey:
    role: int
    value: int

    def __post_init__(self):
        if self.value == 0:
            raise ValueError("private keys are nonzero integers")

    def __repr__(self):
        return f"PrivateKey(role={self.role}, value=<hidden>)"


@dataclass(frozen=True)
class Message:
    role: int
    label: str
    element: Any


def _label_key(label: str):
    tail = label[1:]
    return (int(tail) if tail.isdigit() else 0, label)


@dataclass(frozen=True)
class Transcript:
    params: ProtocolParams
    messages: Tuple[Message, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.messages, key=lambda m: (m.role, _label_key(m.label))))
        object.__setattr__(self, "messages", ordered)

    def get(self, role: int, label: str):
        for m in self.messages:
            if m.role == role and m.label == label:
                return m.element
        raise IncompleteTranscript(role, label)


@dataclass
class ParamReport:
    valid: bool
    problems: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)
    base_order: Optional[int] = None

    def raise_if_invalid(self) -> None:
        if not self.valid:
            raise InvalidParameters("; ".join(self.problems))


def _base_order(params: ProtocolParams) -> Optional[int]:
    bound = params.group.order_bound()
    if bound is None or bound > BRUTE_FORCE_ORDER_LIMIT:
        return None
    return element_order(params.group, params.base_value(), BRUTE_FORCE_ORDER_LIMIT)


def validate_params(params: ProtocolParams) -> ParamReport:
    report = ParamReport(valid=True)
    try:
        if params.protocol == "I":
            plain_map(params.group, params.bases)
        else:
            engel_map(params.group, params.x, params.g, params.arity)
    except DegenerateMapError as exc:
        report.valid = False
        if params.protocol == "I":
            report.problems.append(f"[g1,...,g{params.arity}] condition violated: {exc}")
        else:
            report.problems.append(f"[x,_{params.arity} g] != 1 condition violated: {exc}")
        return report
    report.base_order = _base_order(params)
    if report.base_order is not None and report.base_order <= SMALL_ORDER_WARNING:
        report.warnings.append(
            f"shared key lies in a cyclic group of order {report.base_order}")
    return report


def schedule(params: ProtocolParams, role: int) -> List[Tuple[str, Any]]:
    """(label, base element) pairs that ``role`` raises to its key and sends."""
    n = params.arity
    if not 1 <= role <= n + 1:
        raise ValueError(f"role {role} outside 1..{n + 1}")
    if params.protocol == "II":
        return [("g", params.g)]
    if role == 1:
        return [("g1", params.bases[0])]
    if role == n + 1:
        return [(f"g{n}", params.bases[n - 1])]
    return [(f"g{role - 1}", params.bases[role - 2]), (f"g{role}", params.bases[role - 1])]


def publish(params: ProtocolParams, key: PrivateKey) -> List[Message]:
    return [Message(key.role, label, params.group.power(base, key.value))
            for label, base in schedule(params, key.role)]


def derive_key(params: ProtocolParams, key: PrivateKey, transcript: Transcript):
    """Shared key from ``key`` and the public transcript alone."""
    grp = params.group
    n = params.arity
    j = key.role
    if not 1 <= j <= n + 1:
        raise ValueError(f"role {j} outside 1..{n + 1}")
    if params.protocol == "I":
        # slot i (1-based) takes g_i^{a_i} from role i for i < j and
        # g_i^{a_(i+1)} from role i+1 for i >= j
        args = []
        for i in range(1, n + 1):
            sender = i if i < j else i + 1
            args.append(transcript.get(sender, f"g{i}"))
        return grp.power(left_normed_commutator(args, grp), key.value)
    others = [transcript.get(i, "g") for i in range(1, n + 2) if i != j]
    return left_normed_commutator([grp.power(params.x, key.value)] + others, grp)


def sample_private_keys(count: int, bound: int, rng: random.Random) -> List[int]:
    """Uniform on [-bound, -1] u [1, bound]."""
    if bound < 1:
        raise ValueError("key bound must be at least 1")
    out = []
    for _ in range(count):
        a = rng.randint(1, bound)
        out.append(a if rng.random() < 0.5 else -a)
    return out


def default_key_bound(group: Group) -> int:
    return group.order_bound() or DEFAULT_INTEGER_BOUND


@dataclass
class ExchangeResult:
    transcript: Transcript
    role_keys: Dict[int, Any]
    shared_key: Any
    expected_key: Any
    agreed: bool
    trivial_key: bool
    report: ParamReport


def run_exchange(params: ProtocolParams, keys: Optional[Sequence[int]] = None,
                 seed: int = 0, bound: Optional[int] = None) -> ExchangeResult:
    """Honest run of all n+1 parties; keys are sampled from ``seed`` when omitted."""
    report = validate_params(params)
    report.raise_if_invalid()
    for w in report.warnings:
        warnings.warn(w, stacklevel=2)
    if keys is None:
        keys = sample_private_keys(params.parties, bound or default_key_bound(params.group),
                                   random.Random(seed))
    if len(keys) != params.parties:
        raise ValueError(f"need {params.parties} private keys, got {len(keys)}")
    priv = [PrivateKey(j + 1, int(a)) for j, a in enumerate(keys)]

    messages: List[Message] = []
    for k in priv:
        messages.extend(publish(params, k))
    transcript = Transcript(params, tuple(messages))

    grp = params.group
    role_keys = {k.role: derive_key(params, k, transcript) for k in priv}
    total = 1
    for k in priv:
        total *= k.value
    expected = grp.power(params.base_value(), total)
    agreed = all(grp.equal(v, expected) for v in role_keys.values())
    if report.base_order is not None:
        trivial = total % report.base_order == 0
    else:
        trivial = grp.is_identity(expected)
    return ExchangeResult(transcript, role_keys, role_keys[1], expected, agreed, trivial, report)


# -- serialization ------------------------------------------------------------------

def transcript_to_dict(t: Transcript) -> Dict[str, Any]:
    from .platforms import platform_record
    p = t.params
    enc = p.group.encode
    if p.protocol == "I":
        public = {"bases": [enc(b) for b in p.bases]}
    else:
        public = {"x": enc(p.x), "g": enc(p.g)}
    return {
        "format": TRANSCRIPT_FORMAT,
        "protocol": p.protocol,
        "arity": p.arity,
        "platform": platform_record(p.platform, p.group),
        "params": public,
        "messages": [{"role": m.role, "label": m.label, "element": enc(m.element)}
                     for m in t.messages],
    }


def transcript_to_json(t: Transcript) -> str:
    return json.dumps(transcript_to_dict(t), indent=2, sort_keys=True) + "\n"


class MalformedTranscript(ValueError):
    pass


def transcript_from_dict(data: Dict[str, Any]) -> Transcript:
    from .platforms import group_from_record
    try:
        if data.get("format") != TRANSCRIPT_FORMAT:
            raise MalformedTranscript(f"unknown transcript format {data.get('format')!r}")
        spec, grp = group_from_record(data["platform"])
        protocol = data["protocol"]
        arity = int(data["arity"])
        pub = data["params"]
        if protocol == "I":
            params = ProtocolParams("I", grp, arity, bases=[grp.decode(b) for b in pub["bases"]],
                                    platform=spec)
        else:
            params = ProtocolParams("II", grp, arity, x=grp.decode(pub["x"]),
                                    g=grp.decode(pub["g"]), platform=spec)
        msgs = tuple(Message(int(m["role"]), str(m["label"]), grp.decode(m["element"]))
                     for m in data["messages"])
    except MalformedTranscript:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedTranscript(f"bad transcript: {exc}") from exc
    expected = {(j, label) for j in range(1, params.parties + 1) for label, _ in schedule(params, j)}
    got = [(m.role, m.label) for m in msgs]
    if len(set(got)) != len(got) or not set(got) <= expected:
        raise MalformedTranscript("messages do not follow the role schedule")
    return Transcript(params, msgs)


def transcript_from_json(text: str) -> Transcript:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedTranscript(f"not JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedTranscript("transcript must be a JSON object")
    return transcript_from_dict(data)


def is_complete(t: Transcript) -> bool:
    want = {(j, label) for j in range(1, t.params.parties + 1)
            for label, _ in schedule(t.params, j)}
    return want <= {(m.role, m.label) for m in t.messages}
