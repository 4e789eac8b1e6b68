"""Policy-driven encryption of key-frame NAL payloads.

Only the escaped payload bytes of selected NAL units change. Start codes,
header bytes and every non-selected NAL survive byte-for-byte, so an
encrypted stream still scans as ordinary Annex B with the same NAL layout.

The keystream is applied to the unescaped (RBSP) payload and the result is
re-escaped, so keystream alignment never depends on where emulation
prevention bytes happen to sit. A sidecar CipherHeader records which
ordinals were touched; nothing is signaled in-band.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterable, Sequence

from .aes import KeySchedule, ctr_keystream, encrypt_block, xor_bytes
from .bitstream import (
    NAL_IDR,
    NAL_NON_IDR,
    NalUnit,
    ebsp_to_rbsp,
    parse_slice_info,
    rbsp_to_ebsp,
)
from .errors import (
    BadMagic,
    BadVersion,
    MalformedEscape,
    MalformedHeader,
    OrdinalOutOfRange,
    OutOfBits,
    OutOfRange,
    WrongKey,
)

SIDECAR_MAGIC = b"SEH1"
SIDECAR_VERSION = 1


class EncryptionPolicy(Enum):
    """Which NAL units get ciphered. The value is the sidecar wire byte."""

    IDR_ONLY = 0
    ALL_INTRA = 1


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of applying a policy to a parsed stream."""

    selected_ordinals: "tuple[int, ...]"
    selected_bytes: int  # RBSP bytes that will be ciphered
    total_payload_bytes: int  # RBSP bytes across all slice NALs
    unparsed_ordinals: "tuple[int, ...]" = ()


def select(nals: Iterable[NalUnit], policy: EncryptionPolicy) -> SelectionResult:
    """Pick the ordinals the policy covers.

    Non-VCL NALs (SPS/PPS/SEI/...) are never selected. Under ALL_INTRA a
    non-IDR slice whose header cannot be parsed counts as non-intra and is
    reported in unparsed_ordinals.
    """
    chosen = []
    unparsed = []
    selected_bytes = 0
    total_payload = 0
    for nal in nals:
        if nal.header is None or nal.header.nal_unit_type not in (NAL_NON_IDR, NAL_IDR):
            continue
        try:
            rbsp = ebsp_to_rbsp(nal.ebsp)
        except MalformedEscape:
            rbsp = None
        rbsp_len = len(rbsp) if rbsp is not None else len(nal.ebsp)
        total_payload += rbsp_len
        take = False
        if nal.header.nal_unit_type == NAL_IDR:
            take = True
        elif policy is EncryptionPolicy.ALL_INTRA:
            if rbsp is None:
                unparsed.append(nal.ordinal)
            else:
                try:
                    take = parse_slice_info(rbsp).is_intra
                except (OutOfBits, OutOfRange):
                    unparsed.append(nal.ordinal)
        if take:
            chosen.append(nal.ordinal)
            selected_bytes += rbsp_len
    return SelectionResult(tuple(chosen), selected_bytes, total_payload, tuple(unparsed))


def encrypt_nal(nal: NalUnit, ks: KeySchedule, nonce: bytes) -> NalUnit:
    """Cipher one payload: unescape, XOR the per-NAL keystream, re-escape.

    The header byte stays in the clear; ordinal and start-code length are
    untouched. The escaped length may grow or shrink when the ciphered bytes
    trigger different emulation prevention, but the RBSP length is preserved.
    """
    rbsp = ebsp_to_rbsp(nal.ebsp)
    mask = ctr_keystream(ks, nonce, nal.ordinal, len(rbsp))
    return replace(nal, ebsp=rbsp_to_ebsp(xor_bytes(rbsp, mask)))


def decrypt_nal(nal: NalUnit, ks: KeySchedule, nonce: bytes) -> NalUnit:
    """Invert encrypt_nal. The counter-mode XOR is symmetric, so the same
    unescape/XOR/re-escape pass restores the original payload byte-exactly."""
    return encrypt_nal(nal, ks, nonce)


def key_check_value(ks: KeySchedule) -> bytes:
    """First four bytes of the zero-block ciphertext; rejects wrong keys early."""
    return encrypt_block(b"\x00" * 16, ks)[:4]


@dataclass(frozen=True)
class CipherHeader:
    """Sidecar metadata the decryptor needs: nonce, policy, key check and
    the ordinals that were encrypted (strictly increasing)."""

    policy: EncryptionPolicy
    key_check: bytes
    nonce: bytes
    ordinals: "tuple[int, ...]"

    def __post_init__(self) -> None:
        if len(self.key_check) != 4:
            raise ValueError("key_check must be 4 bytes")
        if len(self.nonce) != 8:
            raise ValueError("nonce must be 8 bytes")
        if any(b <= a for a, b in zip(self.ordinals, self.ordinals[1:])):
            raise ValueError("ordinals must be strictly increasing")
        if any(not 0 <= o < 1 << 32 for o in self.ordinals):
            raise ValueError("ordinals must fit in 32 bits")

    def to_bytes(self) -> bytes:
        head = (
            SIDECAR_MAGIC
            + bytes((SIDECAR_VERSION, self.policy.value))
            + self.key_check
            + self.nonce
            + struct.pack(">I", len(self.ordinals))
        )
        if not self.ordinals:
            return head
        return head + struct.pack(f">{len(self.ordinals)}I", *self.ordinals)

    @classmethod
    def from_bytes(cls, data: bytes) -> "CipherHeader":
        if len(data) < 22:
            raise MalformedHeader(f"sidecar truncated: {len(data)} bytes, need at least 22")
        if data[:4] != SIDECAR_MAGIC:
            raise BadMagic(f"sidecar magic {data[:4]!r} is not {SIDECAR_MAGIC!r}")
        if data[4] != SIDECAR_VERSION:
            raise BadVersion(f"sidecar version {data[4]} is not {SIDECAR_VERSION}")
        if data[5] not in (p.value for p in EncryptionPolicy):
            raise MalformedHeader(f"unknown policy byte {data[5]:#04x}")
        (count,) = struct.unpack_from(">I", data, 18)
        if len(data) != 22 + 4 * count:
            raise MalformedHeader(
                f"sidecar length {len(data)} does not match ordinal count {count}"
            )
        ordinals = struct.unpack_from(f">{count}I", data, 22) if count else ()
        try:
            return cls(EncryptionPolicy(data[5]), data[6:10], data[10:18], tuple(ordinals))
        except ValueError as exc:
            raise MalformedHeader(str(exc)) from exc


def encrypt_stream(
    nals: Sequence[NalUnit],
    ks: KeySchedule,
    policy: EncryptionPolicy,
    nonce: bytes,
) -> "tuple[list[NalUnit], CipherHeader]":
    """Encrypt the policy-selected NALs, leaving everything else untouched."""
    if len(nonce) != 8:
        raise ValueError("nonce must be 8 bytes")
    result = select(nals, policy)
    chosen = frozenset(result.selected_ordinals)
    out = [encrypt_nal(n, ks, nonce) if n.ordinal in chosen else n for n in nals]
    header = CipherHeader(policy, key_check_value(ks), nonce, result.selected_ordinals)
    return out, header


def decrypt_stream(
    nals: Sequence[NalUnit], ks: KeySchedule, header: CipherHeader
) -> "list[NalUnit]":
    """Decrypt exactly the ordinals the sidecar lists.

    The key check runs before any payload is touched; a mismatched key fails
    here with WrongKey (false-accept probability 2^-32).
    """
    if header.key_check != key_check_value(ks):
        raise WrongKey("sidecar key check does not match the supplied key")
    count = len(nals)
    for o in header.ordinals:
        if o >= count:
            raise OrdinalOutOfRange(f"sidecar lists NAL {o} but the stream has {count}")
    chosen = frozenset(header.ordinals)
    return [decrypt_nal(n, ks, header.nonce) if n.ordinal in chosen else n for n in nals]
