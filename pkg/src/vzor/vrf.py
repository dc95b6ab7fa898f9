"""Verifiable random function and per-epoch committee sortition.

The VRF is built from a deterministic signature: the proof is an Ed25519
signature over the domain-separated input, and the output value is a
256-bit digest of that signature.  Ed25519 signing is deterministic
(RFC 8032), so the construction yields a unique, publicly verifiable
value per (key, input) pair.  The construction is a stand-in with the
standard VRF contract — determinism, uniqueness, verifiability — not an
interchange-compatible ECVRF.

Sortition follows the lowest-score rule by default: every reporter
scores the epoch's entropy pulse, and the ``n`` smallest scores form the
committee.  A threshold mode (score < q/n) is available as an alternate
selection rule.
"""

from __future__ import annotations

from dataclasses import dataclass

from cryptography.exceptions import InvalidSignature
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)

from .beacon import Pulse
from .encoding import be_u64, domain_message, tagged_digest
from .errors import RegistryTooSmall, UnverifiableScore

VRF_ORDER = 1 << 256  # q: output values lie in [0, q)
PUBLIC_KEY_BYTES = 32
SIGNATURE_BYTES = 64

_VRF_SIGN_TAG = "VZOR/vrf/v1"
_VRF_INPUT_TAG = "VZOR/vrf-in/v1"
_VRF_OUTPUT_TAG = "VZOR/vrf-out/v1"
_SORTITION_TAG = "VZOR/sortition/v1"
_COMMITTEE_TAG = "VZOR/committee/v1"


@dataclass(frozen=True)
class ReporterIdentity:
    """Public half of a reporter: small integer id plus verification key."""

    id: int
    public_key: bytes

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("reporter id must be non-negative")
        if len(self.public_key) != PUBLIC_KEY_BYTES:
            raise ValueError("public key must be 32 bytes")


class ReporterSecret:
    """Signing half of a reporter; caches the private key object."""

    __slots__ = ("id", "seed", "_key")

    def __init__(self, reporter_id: int, seed: bytes) -> None:
        if len(seed) != 32:
            raise ValueError("secret seed must be 32 bytes")
        self.id = reporter_id
        self.seed = seed
        self._key = Ed25519PrivateKey.from_private_bytes(seed)

    def sign(self, message: bytes) -> bytes:
        return self._key.sign(message)

    def public_key(self) -> bytes:
        return self._key.public_key().public_bytes_raw()

    def identity(self) -> ReporterIdentity:
        return ReporterIdentity(self.id, self.public_key())


def vrf_keygen(seed: bytes, reporter_id: int = 0) -> tuple[ReporterIdentity, ReporterSecret]:
    """Deterministic keypair from a 256-bit seed."""
    secret = ReporterSecret(reporter_id, seed)
    return secret.identity(), secret


@dataclass(frozen=True)
class VrfOutput:
    """Sortition score with its verifiability proof.

    ``value`` is the 256-bit score, ``proof`` the deterministic signature
    it was derived from, ``input_digest`` a binding to the scored input.
    """

    value: int
    proof: bytes
    input_digest: bytes


def _output_value(proof: bytes, input_digest: bytes) -> int:
    return int.from_bytes(tagged_digest(_VRF_OUTPUT_TAG, proof, input_digest), "big")


def vrf_evaluate(secret: ReporterSecret, input_bytes: bytes) -> VrfOutput:
    """Score an input: sign the domain-separated message, hash to a value."""
    if not input_bytes:
        raise ValueError("VRF input must be non-empty")
    proof = secret.sign(domain_message(_VRF_SIGN_TAG, input_bytes))
    input_digest = tagged_digest(_VRF_INPUT_TAG, input_bytes)
    return VrfOutput(value=_output_value(proof, input_digest), proof=proof, input_digest=input_digest)


def vrf_verify(public_key: bytes, input_bytes: bytes, out: VrfOutput) -> bool:
    """True iff ``out`` was produced under the key matching ``public_key``."""
    if len(out.proof) != SIGNATURE_BYTES or not 0 <= out.value < VRF_ORDER:
        return False
    input_digest = tagged_digest(_VRF_INPUT_TAG, input_bytes)
    if input_digest != out.input_digest:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(public_key).verify(
            out.proof, domain_message(_VRF_SIGN_TAG, input_bytes)
        )
    except (InvalidSignature, ValueError):
        return False
    return _output_value(out.proof, input_digest) == out.value


def sortition_input(pulse_value: bytes, epoch: int) -> bytes:
    """Canonical committee-draw input: tag, pulse value, big-endian epoch."""
    return domain_message(_SORTITION_TAG, pulse_value, be_u64(epoch))


@dataclass(frozen=True)
class SortitionParams:
    """Committee size, selection rule, and VRF security level."""

    committee_size: int = 15
    mode: str = "lowest_n"  # or "threshold"
    security_bits: int = 128

    def __post_init__(self) -> None:
        if self.committee_size < 1:
            raise ValueError("committee size must be >= 1")
        if self.mode not in ("lowest_n", "threshold"):
            raise ValueError(f"unknown sortition mode {self.mode!r}")
        if self.security_bits not in (80, 128, 256):
            raise ValueError("security bits must be one of 80, 128, 256")


@dataclass(frozen=True)
class Committee:
    """Epoch committee: members ordered ascending by score, id as tiebreak."""

    epoch: int
    members: tuple[tuple[ReporterIdentity, VrfOutput], ...]

    @property
    def size(self) -> int:
        return len(self.members)

    def member_ids(self) -> tuple[int, ...]:
        return tuple(ident.id for ident, _ in self.members)

    def public_keys(self) -> dict[int, bytes]:
        return {ident.id: ident.public_key for ident, _ in self.members}

    def digest(self) -> bytes:
        """Digest of the member set: (id, public key) pairs sorted by id."""
        parts = [
            be_u64(ident.id) + ident.public_key
            for ident, _ in sorted(self.members, key=lambda m: m[0].id)
        ]
        return tagged_digest(_COMMITTEE_TAG, *parts)


def evaluate_registry(
    secrets: list[ReporterSecret], pulse: Pulse, epoch: int
) -> list[tuple[ReporterIdentity, VrfOutput]]:
    """Score every reporter against the epoch's sortition input."""
    inp = sortition_input(pulse.value, epoch)
    return [(s.identity(), vrf_evaluate(s, inp)) for s in secrets]


def select_committee(
    pulse: Pulse,
    epoch: int,
    scored: list[tuple[ReporterIdentity, VrfOutput]],
    params: SortitionParams,
) -> Committee:
    """Draw the epoch committee from scored reporters.

    lowest_n mode takes the ``n`` smallest scores (ties broken by smaller
    id); threshold mode takes every score below q/n, so the committee size
    may differ from ``n``.  Selected members' proofs are verified against
    the sortition input; a failing proof raises UnverifiableScore.  Scores
    that do not select their owner cannot change the outcome (an inflated
    score only excludes its owner), so only selected proofs are checked.
    """
    ids = [ident.id for ident, _ in scored]
    if len(set(ids)) != len(ids):
        raise ValueError("duplicate reporter ids in registry")
    ranked = sorted(scored, key=lambda m: (m[1].value, m[0].id))
    if params.mode == "lowest_n":
        if len(ranked) < params.committee_size:
            raise RegistryTooSmall(
                f"registry has {len(ranked)} reporters, committee needs {params.committee_size}"
            )
        selected = ranked[: params.committee_size]
    else:
        # value < q/n without rounding: value * n < q
        selected = [m for m in ranked if m[1].value * params.committee_size < VRF_ORDER]
    inp = sortition_input(pulse.value, epoch)
    for ident, out in selected:
        if not vrf_verify(ident.public_key, inp, out):
            raise UnverifiableScore(f"reporter {ident.id} offered an unverifiable score")
    return Committee(epoch=epoch, members=tuple(selected))


def prediction_bound(b: int, n: int, kappa: int) -> float:
    """Adversarial committee-prediction probability bound: b/n + 2^-kappa."""
    if not 0 <= b <= n:
        raise ValueError("need 0 <= b <= n")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return b / n + 2.0 ** (-kappa)
