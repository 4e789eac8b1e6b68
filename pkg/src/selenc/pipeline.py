"""File-level encrypt/decrypt/inspect chains, key handling and the
synthetic test-stream generator."""

from __future__ import annotations

import math
import os
import random
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .aes import KeySchedule, encrypt_block, key_expansion, xor_bytes
from .bitstream import (
    BitWriter,
    NalUnit,
    ReportRow,
    classify_stream,
    parse_nal_header,
    rbsp_to_ebsp,
    serialize_annexb,
    split_annexb,
)
from .errors import BadHex, EmptyPassphrase, NoStartCode
from .selective import (
    CipherHeader,
    EncryptionPolicy,
    decrypt_stream,
    encrypt_stream,
    select,
)

DEFAULT_KDF_ITERATIONS = 10_000


@dataclass(frozen=True)
class KeySource:
    """A raw 128-bit key or a passphrase to stretch; exactly one is set."""

    raw_key_hex: Optional[str] = None
    passphrase: Optional[str] = None
    kdf_iterations: int = DEFAULT_KDF_ITERATIONS

    def __post_init__(self) -> None:
        if (self.raw_key_hex is None) == (self.passphrase is None):
            raise ValueError("provide exactly one of raw_key_hex or passphrase")
        if self.kdf_iterations < 1:
            raise ValueError("kdf_iterations must be at least 1")

    @classmethod
    def from_raw_hex(cls, text: str) -> "KeySource":
        return cls(raw_key_hex=text)

    @classmethod
    def from_passphrase(cls, text: str, iterations: int = DEFAULT_KDF_ITERATIONS) -> "KeySource":
        return cls(passphrase=text, kdf_iterations=iterations)


def _kdf(passphrase: str, iterations: int) -> bytes:
    # Iterated block-cipher construction (NOT a standard KDF): the padded
    # passphrase blocks act as cipher keys folded into a running digest.
    data = passphrase.encode("utf-8") + b"\x80"
    data += b"\x00" * (-len(data) % 16)
    schedules = [key_expansion(data[i : i + 16]) for i in range(0, len(data), 16)]
    h = b"\x00" * 16
    for _ in range(iterations):
        for ks in schedules:
            h = xor_bytes(encrypt_block(h, ks), h)
    return h


def derive_key(source: KeySource) -> bytes:
    """Resolve a KeySource to 16 key bytes.

    Raw keys are hex-decoded. Passphrases are stretched through the iterated
    cipher construction; the iteration count is the knob that makes guessing
    expensive.
    """
    if source.raw_key_hex is not None:
        text = source.raw_key_hex
        if len(text) != 32:
            raise BadHex(f"raw key must be 32 hex characters, got {len(text)}")
        try:
            return bytes.fromhex(text)
        except ValueError as exc:
            raise BadHex(f"raw key is not valid hex: {text!r}") from exc
    if not source.passphrase:
        raise EmptyPassphrase("passphrase must be non-empty")
    return _kdf(source.passphrase, source.kdf_iterations)


@dataclass(frozen=True)
class PassphraseStrength:
    bits: float
    weak: bool  # estimate falls below the 128-bit key size


def estimate_passphrase_bits(passphrase: str) -> PassphraseStrength:
    """Charset-size entropy model: length x log2(alphabet size).

    The alphabet sums the sizes of the character classes present: lowercase
    26, uppercase 26, digits 10, everything else 33. A crude model, but it
    reproduces the rule of thumb that a single ordinary password falls far
    short of 128 bits.
    """
    if not passphrase:
        return PassphraseStrength(0.0, True)
    charset = 0
    if any("a" <= c <= "z" for c in passphrase):
        charset += 26
    if any("A" <= c <= "Z" for c in passphrase):
        charset += 26
    if any("0" <= c <= "9" for c in passphrase):
        charset += 10
    if any(not ("a" <= c <= "z" or "A" <= c <= "Z" or "0" <= c <= "9") for c in passphrase):
        charset += 33
    bits = len(passphrase) * math.log2(charset)
    return PassphraseStrength(bits, bits < 128.0)


@dataclass(frozen=True)
class StreamReport:
    """Per-NAL rows plus the aggregate byte and work accounting."""

    rows: "tuple[ReportRow, ...]"
    policy: EncryptionPolicy
    selected_ordinals: "tuple[int, ...]"
    leading_garbage: int
    total_bytes: int
    vcl_payload_bytes: int
    selected_bytes: int
    encrypted_fraction: float
    aes_blocks: int

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.name,
            "leading_garbage": self.leading_garbage,
            "total_bytes": self.total_bytes,
            "vcl_payload_bytes": self.vcl_payload_bytes,
            "selected_bytes": self.selected_bytes,
            "selected_ordinals": list(self.selected_ordinals),
            "encrypted_fraction": self.encrypted_fraction,
            "aes_blocks": self.aes_blocks,
            "nals": [
                {
                    "ordinal": r.ordinal,
                    "type": r.nal_type,
                    "name": r.type_name,
                    "size": r.size,
                    "rbsp_size": r.rbsp_size,
                    "slice_type": r.slice_info.slice_type if r.slice_info else None,
                    "is_intra": r.slice_info.is_intra if r.slice_info else None,
                    "unparsed": r.unparsed,
                    "forbidden_bit": r.forbidden_bit,
                }
                for r in self.rows
            ],
        }


def build_report(
    nals: Sequence[NalUnit],
    policy: EncryptionPolicy,
    leading: bytes = b"",
    selected_ordinals: "Optional[Sequence[int]]" = None,
) -> StreamReport:
    """Assemble a StreamReport; selection defaults to what the policy picks."""
    rows = tuple(classify_stream(nals))
    if selected_ordinals is None:
        selected_ordinals = select(nals, policy).selected_ordinals
    chosen = frozenset(selected_ordinals)
    by_ordinal = {r.ordinal: r for r in rows}
    vcl_payload = sum(r.rbsp_size for r in rows if r.nal_type in (1, 5))
    selected_bytes = sum(by_ordinal[o].rbsp_size for o in chosen if o in by_ordinal)
    total = len(leading) + sum(n.wire_size() for n in nals)
    blocks = sum(-(-by_ordinal[o].rbsp_size // 16) for o in chosen if o in by_ordinal)
    return StreamReport(
        rows=rows,
        policy=policy,
        selected_ordinals=tuple(sorted(chosen)),
        leading_garbage=len(leading),
        total_bytes=total,
        vcl_payload_bytes=vcl_payload,
        selected_bytes=selected_bytes,
        encrypted_fraction=selected_bytes / total if total else 0.0,
        aes_blocks=blocks,
    )


def _atomic_write(path, data: bytes) -> None:
    # Write-then-rename in the destination directory so a crash never leaves
    # a half-written file at the target path.
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_stream(path) -> "tuple[bytes, bytes, list[NalUnit]]":
    data = Path(path).read_bytes()
    if not data:
        raise NoStartCode(f"{path}: input file is empty")
    leading, nals = split_annexb(data)
    return data, leading, nals


def cmd_encrypt(
    in_path,
    out_path,
    meta_path,
    key: KeySource,
    policy: EncryptionPolicy = EncryptionPolicy.IDR_ONLY,
    nonce: Optional[bytes] = None,
) -> StreamReport:
    """Encrypt a stream file to out_path and write the sidecar to meta_path.

    With an explicit nonce the run is fully deterministic; otherwise eight
    random bytes are drawn and recorded in the sidecar.
    """
    _, leading, nals = _read_stream(in_path)
    ks = key_expansion(derive_key(key))
    if nonce is None:
        nonce = os.urandom(8)
    out_nals, header = encrypt_stream(nals, ks, policy, nonce)
    _atomic_write(out_path, serialize_annexb(out_nals, leading))
    _atomic_write(meta_path, header.to_bytes())
    return build_report(nals, policy, leading, header.ordinals)


def cmd_decrypt(in_path, meta_path, out_path, key: KeySource) -> StreamReport:
    """Decrypt a stream file using its sidecar; inverse of cmd_encrypt."""
    _, leading, nals = _read_stream(in_path)
    header = CipherHeader.from_bytes(Path(meta_path).read_bytes())
    ks = key_expansion(derive_key(key))
    out_nals = decrypt_stream(nals, ks, header)
    _atomic_write(out_path, serialize_annexb(out_nals, leading))
    return build_report(out_nals, header.policy, leading, header.ordinals)


def cmd_inspect(in_path, policy: EncryptionPolicy = EncryptionPolicy.IDR_ONLY) -> StreamReport:
    """Report a stream's NAL layout without modifying anything."""
    _, leading, nals = _read_stream(in_path)
    return build_report(nals, policy, leading)


def _noise(rng: random.Random, n: int, nonzero_tail: bool = False) -> bytearray:
    buf = bytearray(rng.randbytes(n))
    if nonzero_tail and n:
        buf[-1] = rng.randrange(1, 256)
    return buf


def _slice_filler(rng: random.Random, n: int) -> bytes:
    # Pseudorandom slice data with deliberate zero runs so emulation
    # prevention actually fires.
    buf = _noise(rng, n)
    pos = 0
    while True:
        pos += rng.randrange(8, 32)
        if pos + 4 >= n:
            break
        run = rng.randrange(2, 5)
        buf[pos : pos + run] = b"\x00" * run
        pos += run
    return bytes(buf)


def gen_test_stream(
    out_path,
    gop: int,
    frames: int,
    payload_size: int = 256,
    seed: int = 0,
) -> bytes:
    """Write a deterministic synthetic Annex B stream: SPS, PPS, then one
    slice NAL per frame, IDR at every GOP head.

    Slice RBSPs are exactly payload_size bytes: a valid two-element slice
    header (first_mb_in_slice=0, slice_type 7 for IDR / 0 for P) followed by
    seeded filler containing zero runs. Start codes are 4 bytes except the
    PPS and the first slice, whose predecessors are never encrypted; later
    boundaries must stay unambiguous even when ciphered payloads end in
    zero bytes, and only the 4-byte pattern guarantees that.

    Pass out_path=None to get the bytes without touching the filesystem.
    """
    if gop < 1:
        raise ValueError("gop must be at least 1")
    if frames < 1:
        raise ValueError("frames must be at least 1")
    if payload_size < 1:
        raise ValueError("payload_size must be at least 1")
    rng = random.Random(seed)
    nals: "list[NalUnit]" = []

    def add(scl: int, header_byte: int, rbsp: bytes) -> None:
        nals.append(NalUnit(len(nals), scl, parse_nal_header(header_byte), rbsp_to_ebsp(rbsp)))

    add(4, 0x67, bytes([0x42, 0xC0, 0x1E]) + bytes(_noise(rng, 5, nonzero_tail=True)))
    add(3, 0x68, bytes([0xCE]) + bytes(_noise(rng, 3, nonzero_tail=True)))
    for i in range(frames):
        idr = i % gop == 0
        w = BitWriter()
        w.write_ue(0)  # first_mb_in_slice
        w.write_ue(7 if idr else 0)  # slice_type
        head = w.to_bytes()
        if payload_size < len(head):
            raise ValueError(f"payload_size must be at least {len(head)} for a slice header")
        add(4 if i else 3, 0x65 if idr else 0x41, head + _slice_filler(rng, payload_size - len(head)))
    data = serialize_annexb(nals)
    if out_path is not None:
        _atomic_write(out_path, data)
    return data
