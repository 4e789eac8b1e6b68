"""H.264/AVC Annex B byte-stream parsing and re-serialization.

Everything here works at the NAL-unit and slice-header syntax level; slice
data is never decoded. Parsing is lossless: concatenating the parsed pieces
reproduces the input byte-for-byte from the first start code onward.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import (
    EscapingViolation,
    MalformedEscape,
    NoStartCode,
    OutOfBits,
    OutOfRange,
)

START_CODE_3 = b"\x00\x00\x01"
START_CODE_4 = b"\x00\x00\x00\x01"

NAL_NON_IDR = 1
NAL_IDR = 5
NAL_SEI = 6
NAL_SPS = 7
NAL_PPS = 8

VCL_TYPES = (NAL_NON_IDR, NAL_IDR)

_TYPE_NAMES = {
    NAL_NON_IDR: "non-IDR",
    NAL_IDR: "IDR",
    NAL_SEI: "SEI",
    NAL_SPS: "SPS",
    NAL_PPS: "PPS",
}


def nal_type_name(nal_unit_type: int) -> str:
    return _TYPE_NAMES.get(nal_unit_type, "other")


@dataclass(frozen=True)
class NalHeader:
    """The three bit fields of a NAL header byte."""

    forbidden_zero_bit: int
    nal_ref_idc: int
    nal_unit_type: int

    def __post_init__(self) -> None:
        if not (0 <= self.forbidden_zero_bit <= 1):
            raise ValueError("forbidden_zero_bit must be 0 or 1")
        if not (0 <= self.nal_ref_idc <= 3):
            raise ValueError("nal_ref_idc must fit in 2 bits")
        if not (0 <= self.nal_unit_type <= 31):
            raise ValueError("nal_unit_type must fit in 5 bits")

    def to_byte(self) -> int:
        return (self.forbidden_zero_bit << 7) | (self.nal_ref_idc << 5) | self.nal_unit_type


def parse_nal_header(b: int) -> NalHeader:
    """Split one header byte into forbidden bit, ref idc and unit type.

    A set forbidden bit is reported through the field, never raised, so
    corrupt captures stay inspectable.
    """
    return NalHeader(
        forbidden_zero_bit=(b >> 7) & 0x1,
        nal_ref_idc=(b >> 5) & 0x3,
        nal_unit_type=b & 0x1F,
    )


@dataclass(frozen=True)
class NalUnit:
    """One Annex B NAL unit: start-code width, header and escaped payload.

    ``header`` is None only in the degenerate case of a start code with no
    byte after it (truncated capture); such units serialize back to the bare
    start code.
    """

    ordinal: int
    start_code_len: int
    header: Optional[NalHeader]
    ebsp: bytes

    def __post_init__(self) -> None:
        if self.start_code_len not in (3, 4):
            raise ValueError("start_code_len must be 3 or 4")

    def start_code(self) -> bytes:
        return START_CODE_4 if self.start_code_len == 4 else START_CODE_3

    def to_bytes(self) -> bytes:
        if self.header is None:
            return self.start_code()
        return self.start_code() + bytes((self.header.to_byte(),)) + self.ebsp

    def wire_size(self) -> int:
        return self.start_code_len + (0 if self.header is None else 1 + len(self.ebsp))


def find_escape_violation(ebsp: bytes) -> int:
    """Offset of the first forbidden 00 00 0X (X <= 2) run, or -1 if clean."""
    hits = [i for i in (ebsp.find(b"\x00\x00" + bytes((b,))) for b in (0, 1, 2)) if i != -1]
    return min(hits) if hits else -1


def ebsp_to_rbsp(ebsp: bytes) -> bytes:
    """Strip emulation-prevention 0x03 bytes from an escaped payload.

    A 0x03 is dropped exactly when it follows two zero bytes and precedes a
    byte <= 0x03. Raises MalformedEscape when two zero bytes are followed by
    0x00, 0x01 or 0x02, which a properly escaped payload can never contain.
    """
    if b"\x00\x00" not in ebsp:
        return bytes(ebsp)
    out = bytearray()
    zeros = 0
    i = 0
    n = len(ebsp)
    while i < n:
        b = ebsp[i]
        if zeros >= 2:
            if b <= 0x02:
                raise MalformedEscape(f"unescaped 00 00 {b:02x} at payload offset {i - 2}")
            if b == 0x03 and i + 1 < n and ebsp[i + 1] <= 0x03:
                zeros = 0
                i += 1
                continue
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
        i += 1
    return bytes(out)


def rbsp_to_ebsp(rbsp: bytes) -> bytes:
    """Insert emulation-prevention 0x03 bytes so no 00 00 0X (X <= 2) survives."""
    if b"\x00\x00" not in rbsp:
        return bytes(rbsp)
    out = bytearray()
    zeros = 0
    for b in rbsp:
        if zeros >= 2 and b <= 0x03:
            out.append(0x03)
            zeros = 0
        out.append(b)
        zeros = zeros + 1 if b == 0 else 0
    return bytes(out)


def _next_start_code(data: bytes, start: int) -> "tuple[int, int]":
    """Locate the next start code at or after ``start`` as (offset, length).

    Equivalent to a forward byte scan that tries the 4-byte pattern before
    the 3-byte one at every position, so a payload ending in zero bytes never
    donates bytes to a following 4-byte start code. Returns (-1, 0) if none.
    """
    j = data.find(START_CODE_3, start)
    if j == -1:
        return -1, 0
    if j > start and data[j - 1] == 0x00:
        return j - 1, 4
    return j, 3


def split_annexb(stream: bytes) -> "tuple[bytes, list[NalUnit]]":
    """Split a stream into (bytes before the first start code, NAL units).

    Empty input yields (b"", []). A nonempty stream without any start code
    raises NoStartCode. The final NAL extends to the end of the stream.
    """
    if len(stream) == 0:
        return b"", []
    pos, scl = _next_start_code(stream, 0)
    if pos == -1:
        raise NoStartCode("no 00 00 01 start-code prefix in stream")
    leading = bytes(stream[:pos])
    nals: "list[NalUnit]" = []
    ordinal = 0
    while True:
        body_start = pos + scl
        nxt, nxt_len = _next_start_code(stream, body_start)
        body_end = len(stream) if nxt == -1 else nxt
        body = stream[body_start:body_end]
        header = parse_nal_header(body[0]) if body else None
        nals.append(NalUnit(ordinal, scl, header, bytes(body[1:])))
        ordinal += 1
        if nxt == -1:
            return leading, nals
        pos, scl = nxt, nxt_len


def scan_annexb(stream: bytes) -> "list[NalUnit]":
    """Parse an Annex B stream into NAL units in stream order.

    Bytes before the first start code are tolerated and dropped here; use
    split_annexb when they must be preserved.
    """
    return split_annexb(stream)[1]


def serialize_annexb(nals: Iterable[NalUnit], leading: bytes = b"") -> bytes:
    """Concatenate start codes, header bytes and payloads back into a stream.

    Each payload is checked against the escaping invariant first; a violation
    would let payload bytes mimic a start code and desynchronize any reader.
    """
    out = bytearray(leading)
    for nal in nals:
        v = find_escape_violation(nal.ebsp)
        if v != -1:
            raise EscapingViolation(
                f"NAL {nal.ordinal}: 00 00 {nal.ebsp[v + 2]:02x} at payload offset {v}"
            )
        out += nal.to_bytes()
    return bytes(out)


class BitReader:
    """MSB-first bit cursor over a byte sequence.

    A mutable cursor: share the bytes, not the reader, across threads.
    """

    def __init__(self, source: bytes):
        self.source = source
        self.position = 0  # bit offset from the start of ``source``

    @property
    def bits_left(self) -> int:
        return 8 * len(self.source) - self.position

    def read_bit(self) -> int:
        if self.position >= 8 * len(self.source):
            raise OutOfBits(f"bit read at offset {self.position} past end of buffer")
        byte = self.source[self.position >> 3]
        bit = (byte >> (7 - (self.position & 7))) & 1
        self.position += 1
        return bit

    def read_bits(self, n: int) -> int:
        value = 0
        for _ in range(n):
            value = (value << 1) | self.read_bit()
        return value

    def read_ue(self) -> int:
        """Decode one order-0 Exp-Golomb codeword.

        Count n leading zero bits, consume the terminating 1 bit, then read n
        suffix bits: the value is 2**n - 1 + suffix.
        """
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
        return (1 << zeros) - 1 + self.read_bits(zeros)


class BitWriter:
    """MSB-first bit accumulator, the encoding mirror of BitReader."""

    def __init__(self) -> None:
        self._bits: "list[int]" = []

    @property
    def bit_length(self) -> int:
        return len(self._bits)

    def write_bit(self, bit: int) -> None:
        self._bits.append(bit & 1)

    def write_bits(self, value: int, n: int) -> None:
        for shift in range(n - 1, -1, -1):
            self._bits.append((value >> shift) & 1)

    def write_ue(self, value: int) -> None:
        if value < 0:
            raise ValueError("ue(v) encodes unsigned values only")
        n = (value + 1).bit_length() - 1
        self.write_bits(0, n)
        self.write_bits(value + 1, n + 1)

    def to_bytes(self) -> bytes:
        """Pack accumulated bits, zero-padding the final partial byte."""
        out = bytearray()
        acc = 0
        count = 0
        for bit in self._bits:
            acc = (acc << 1) | bit
            count += 1
            if count == 8:
                out.append(acc)
                acc = 0
                count = 0
        if count:
            out.append(acc << (8 - count))
        return bytes(out)


@dataclass(frozen=True)
class SliceInfo:
    """The two leading slice-header syntax elements."""

    first_mb_in_slice: int
    slice_type: int

    @property
    def is_intra(self) -> bool:
        # slice_type 2/7 are I slices; 5..9 alias 0..4, hence the mod-5 rule.
        return self.slice_type % 5 == 2


def parse_slice_info(rbsp: bytes) -> SliceInfo:
    """Read first_mb_in_slice and slice_type from the start of a slice RBSP."""
    r = BitReader(rbsp)
    first_mb = r.read_ue()
    slice_type = r.read_ue()
    if slice_type > 9:
        raise OutOfRange(f"slice_type {slice_type} outside [0, 9]")
    return SliceInfo(first_mb, slice_type)


@dataclass(frozen=True)
class ReportRow:
    """Per-NAL inspection record."""

    ordinal: int
    nal_type: int
    type_name: str
    size: int  # EBSP payload bytes on the wire
    rbsp_size: int
    slice_info: Optional[SliceInfo]
    unparsed: bool  # slice NAL whose header could not be read
    forbidden_bit: bool


def classify_stream(nals: Iterable[NalUnit]) -> "list[ReportRow]":
    """One inspection row per NAL; never raises on corrupt payloads."""
    rows = []
    for nal in nals:
        if nal.header is None:
            rows.append(ReportRow(nal.ordinal, -1, "empty", 0, 0, None, False, False))
            continue
        t = nal.header.nal_unit_type
        try:
            rbsp: Optional[bytes] = ebsp_to_rbsp(nal.ebsp)
        except MalformedEscape:
            rbsp = None
        info = None
        unparsed = False
        if t in VCL_TYPES:
            if rbsp is None:
                unparsed = True
            else:
                try:
                    info = parse_slice_info(rbsp)
                except (OutOfBits, OutOfRange):
                    unparsed = True
        rows.append(
            ReportRow(
                ordinal=nal.ordinal,
                nal_type=t,
                type_name=nal_type_name(t),
                size=len(nal.ebsp),
                rbsp_size=len(rbsp) if rbsp is not None else len(nal.ebsp),
                slice_info=info,
                unparsed=unparsed,
                forbidden_bit=bool(nal.header.forbidden_zero_bit),
            )
        )
    return rows
