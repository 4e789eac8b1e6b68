import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from selenc.bitstream import (
    BitReader,
    BitWriter,
    NalHeader,
    NalUnit,
    classify_stream,
    ebsp_to_rbsp,
    find_escape_violation,
    nal_type_name,
    parse_nal_header,
    parse_slice_info,
    rbsp_to_ebsp,
    scan_annexb,
    serialize_annexb,
    split_annexb,
)
from selenc.errors import (
    EscapingViolation,
    MalformedEscape,
    NoStartCode,
    OutOfBits,
    OutOfRange,
)


def ue_decode_oracle(bits: str):
    """Independent Exp-Golomb decoder over a '0'/'1' string.

    Returns (value, bits consumed)."""
    zeros = 0
    while bits[zeros] == "0":
        zeros += 1
    suffix = bits[zeros + 1 : zeros + 1 + zeros]
    if len(suffix) < zeros:
        raise ValueError("truncated codeword")
    return (1 << zeros) - 1 + (int(suffix, 2) if suffix else 0), 2 * zeros + 1


def bits_of(data: bytes) -> str:
    return "".join(f"{b:08b}" for b in data)


class TestNalHeader:
    @pytest.mark.parametrize(
        "byte,expected",
        [
            (0x65, (0, 3, 5)),  # IDR slice
            (0x67, (0, 3, 7)),  # SPS
            (0x00, (0, 0, 0)),
            (0x41, (0, 2, 1)),
            (0xE8, (1, 3, 8)),  # forbidden bit set, still parsed
        ],
    )
    def test_bit_fields(self, byte, expected):
        h = parse_nal_header(byte)
        assert (h.forbidden_zero_bit, h.nal_ref_idc, h.nal_unit_type) == expected

    @given(st.integers(0, 255))
    def test_round_trip(self, byte):
        assert parse_nal_header(byte).to_byte() == byte

    def test_field_validation(self):
        with pytest.raises(ValueError):
            NalHeader(0, 4, 1)
        with pytest.raises(ValueError):
            NalHeader(0, 0, 32)

    def test_type_names(self):
        assert nal_type_name(7) == "SPS"
        assert nal_type_name(8) == "PPS"
        assert nal_type_name(6) == "SEI"
        assert nal_type_name(5) == "IDR"
        assert nal_type_name(1) == "non-IDR"
        assert nal_type_name(9) == "other"


class TestScan:
    def test_empty_stream(self):
        assert scan_annexb(b"") == []

    def test_two_nals_mixed_start_codes(self):
        nals = scan_annexb(bytes.fromhex("00000001" "67" "aa" "000001" "65" "bb"))
        assert len(nals) == 2
        first, second = nals
        assert (first.start_code_len, first.header.nal_unit_type, first.ebsp) == (4, 7, b"\xaa")
        assert (second.start_code_len, second.header.nal_unit_type, second.ebsp) == (3, 5, b"\xbb")

    def test_empty_payloads(self):
        nals = scan_annexb(bytes.fromhex("000001" "41" "000001" "41"))
        assert [n.header.nal_unit_type for n in nals] == [1, 1]
        assert [n.ebsp for n in nals] == [b"", b""]

    def test_ordinals_contiguous(self):
        nals = scan_annexb(b"\x00\x00\x01\x41" * 7)
        assert [n.ordinal for n in nals] == list(range(7))

    def test_no_start_code(self):
        with pytest.raises(NoStartCode):
            scan_annexb(b"\xff\x00\xff")
        with pytest.raises(NoStartCode):
            scan_annexb(b"\x00")

    def test_leading_garbage(self):
        leading, nals = split_annexb(b"\xde\xad\x00\x00\x01\x65\x01")
        assert leading == b"\xde\xad"
        assert len(nals) == 1 and nals[0].header.nal_unit_type == 5

    def test_leading_zero_joins_start_code(self):
        # A single zero before 00 00 01 reads as a 4-byte start code.
        leading, nals = split_annexb(b"\xff\x00\x00\x00\x01\x65")
        assert leading == b"\xff"
        assert nals[0].start_code_len == 4

    def test_trailing_start_code_has_no_header(self):
        nals = scan_annexb(b"\x00\x00\x01\x41\xaa\x00\x00\x01")
        assert len(nals) == 2
        assert nals[1].header is None and nals[1].ebsp == b""

    def test_payload_zeros_stay_with_payload_before_4byte_code(self):
        # EBSP may end with up to two zeros; the following 4-byte start code
        # must still be attributed correctly.
        data = b"\x00\x00\x01\x41\xaa\x00\x00" + b"\x00\x00\x00\x01\x41\xbb"
        nals = scan_annexb(data)
        assert [n.start_code_len for n in nals] == [3, 4]
        assert nals[0].ebsp == b"\xaa\x00\x00"
        assert nals[1].ebsp == b"\xbb"


class TestSerialize:
    def test_empty(self):
        assert serialize_annexb([]) == b""

    def test_single_nal(self):
        nal = NalUnit(0, 4, parse_nal_header(0x67), b"\xaa")
        assert serialize_annexb([nal]) == bytes.fromhex("0000000167aa")

    def test_leading_preserved(self):
        nal = NalUnit(0, 3, parse_nal_header(0x41), b"")
        assert serialize_annexb([nal], leading=b"\xba\xad") == b"\xba\xad\x00\x00\x01\x41"

    @pytest.mark.parametrize("bad", [b"\x00\x00\x00", b"\x00\x00\x01", b"\xaa\x00\x00\x02\xff"])
    def test_escaping_violation(self, bad):
        nal = NalUnit(0, 4, parse_nal_header(0x65), bad)
        with pytest.raises(EscapingViolation):
            serialize_annexb([nal])

    @given(st.binary(max_size=300))
    def test_reconstruction_of_arbitrary_streams(self, tail):
        # Whatever follows the first start code, scanning partitions it
        # losslessly.
        stream = b"\x00\x00\x01" + tail
        leading, nals = split_annexb(stream)
        assert leading == b""
        assert b"".join(n.to_bytes() for n in nals) == stream


def valid_nal_lists():
    payload = st.binary(max_size=40).map(rbsp_to_ebsp)
    raw = st.lists(st.tuples(payload, st.integers(0, 255), st.sampled_from((3, 4))), min_size=1, max_size=8)

    def build(items):
        nals = []
        prev_tail_zero = False
        for i, (ebsp, header_byte, scl) in enumerate(items):
            if prev_tail_zero:
                scl = 4  # a 3-byte code after a zero tail would re-scan as 4-byte
            nals.append(NalUnit(i, scl, parse_nal_header(header_byte), ebsp))
            last_byte = ebsp[-1] if ebsp else header_byte
            prev_tail_zero = last_byte == 0
        return nals

    return raw.map(build)


class TestRoundTrip:
    @settings(deadline=None)
    @given(valid_nal_lists())
    def test_scan_of_serialize_is_identity(self, nals):
        data = serialize_annexb(nals)
        rescan = scan_annexb(data)
        assert rescan == nals
        assert serialize_annexb(rescan) == data

    def test_spec_shape_stream(self):
        data = bytes.fromhex("00000001" "67" "aa" "000001" "65" "bb")
        assert serialize_annexb(scan_annexb(data)) == data


class TestEscaping:
    @pytest.mark.parametrize(
        "ebsp,rbsp",
        [
            (b"\xab\xcd", b"\xab\xcd"),
            (b"\x00\x00\x03\x01", b"\x00\x00\x01"),
            (b"\x00\x00\x03\x03", b"\x00\x00\x03"),
            (b"\x00\x00\x03\x00\x01", b"\x00\x00\x00\x01"),
            (b"", b""),
            (b"\x00\x00", b"\x00\x00"),  # trailing pair is legal as-is
            (b"\x00\x00\x03", b"\x00\x00\x03"),  # no following byte: 03 kept
            (b"\x00\x00\x03\xff", b"\x00\x00\x03\xff"),  # 03 before >03 kept
        ],
    )
    def test_unescape_vectors(self, ebsp, rbsp):
        assert ebsp_to_rbsp(ebsp) == rbsp

    @pytest.mark.parametrize(
        "rbsp,ebsp",
        [
            (b"", b""),
            (b"\x00\x00\x01", b"\x00\x00\x03\x01"),
            (b"\x00\x00\x00\x00", b"\x00\x00\x03\x00\x00"),
            (b"\x00\x00\x02", b"\x00\x00\x03\x02"),
            (b"\x00\x00\x03", b"\x00\x00\x03\x03"),
            (b"\x00\x00\x04", b"\x00\x00\x04"),
            (b"\x00\x00\x00\x00\x00", b"\x00\x00\x03\x00\x00\x03\x00"),
        ],
    )
    def test_escape_vectors(self, rbsp, ebsp):
        assert rbsp_to_ebsp(rbsp) == ebsp

    @pytest.mark.parametrize("bad", [b"\x00\x00\x00", b"\x00\x00\x01", b"\xff\x00\x00\x02"])
    def test_malformed_escape(self, bad):
        with pytest.raises(MalformedEscape):
            ebsp_to_rbsp(bad)

    @given(st.binary(max_size=200))
    def test_round_trip_arbitrary(self, rbsp):
        assert ebsp_to_rbsp(rbsp_to_ebsp(rbsp)) == rbsp

    @given(st.lists(st.sampled_from([0, 0, 0, 1, 2, 3, 0xFF]), max_size=120).map(bytes))
    def test_round_trip_zero_heavy(self, rbsp):
        ebsp = rbsp_to_ebsp(rbsp)
        assert find_escape_violation(ebsp) == -1
        assert ebsp_to_rbsp(ebsp) == rbsp

    def test_violation_finder(self):
        assert find_escape_violation(b"\xaa\x00\x00\x01") == 1
        assert find_escape_violation(b"\x00\x00\x03\x01") == -1
        assert find_escape_violation(b"") == -1


class TestBitReader:
    @pytest.mark.parametrize(
        "data,expected",
        [
            (b"\x80", 0),  # "1"
            (b"\x40", 1),  # "010"
            (b"\x38", 6),  # "00111"
        ],
    )
    def test_ue_vectors(self, data, expected):
        assert BitReader(data).read_ue() == expected

    def test_msb_first(self):
        r = BitReader(b"\xa5")
        assert [r.read_bit() for _ in range(8)] == [1, 0, 1, 0, 0, 1, 0, 1]

    def test_read_bits(self):
        r = BitReader(b"\xa5\x0f")
        assert r.read_bits(4) == 0xA
        assert r.read_bits(8) == 0x50
        assert r.bits_left == 4

    def test_out_of_bits(self):
        with pytest.raises(OutOfBits):
            BitReader(b"").read_bit()
        with pytest.raises(OutOfBits):
            BitReader(b"\x00").read_ue()  # all zeros: no stop bit
        with pytest.raises(OutOfBits):
            BitReader(b"\x08").read_ue()  # stop bit arrives, suffix truncated

    def test_position_advances_by_codeword_length(self):
        r = BitReader(b"\x38\x00")
        r.read_ue()
        assert r.position == 5


class TestBitWriter:
    @pytest.mark.parametrize("value,bits", [(0, "1"), (1, "010"), (2, "011"), (6, "00111")])
    def test_ue_bit_patterns(self, value, bits):
        w = BitWriter()
        w.write_ue(value)
        assert bits_of(w.to_bytes())[: len(bits)] == bits
        assert w.bit_length == len(bits)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            BitWriter().write_ue(-1)

    @given(st.lists(st.integers(0, 100_000), min_size=1, max_size=20))
    def test_write_read_round_trip(self, values):
        w = BitWriter()
        for v in values:
            w.write_ue(v)
        r = BitReader(w.to_bytes())
        assert [r.read_ue() for _ in values] == values

    @given(st.integers(0, 100_000))
    def test_against_decode_oracle(self, value):
        w = BitWriter()
        w.write_ue(value)
        got, consumed = ue_decode_oracle(bits_of(w.to_bytes()))
        assert got == value
        assert consumed == w.bit_length


class TestSliceInfo:
    @pytest.mark.parametrize(
        "rbsp,first_mb,slice_type,intra",
        [
            (b"\x88", 0, 7, True),  # "1" then "0001000"
            (b"\xe0", 0, 0, False),  # two "1" codewords
            (b"\xb8", 0, 2, True),  # "1" then "011": 2^1 - 1 + 1
            (b"\x9c", 0, 6, False),  # "1" then "00111"
            (b"\x50", 1, 0, False),  # "010" then "1"
        ],
    )
    def test_vectors(self, rbsp, first_mb, slice_type, intra):
        info = parse_slice_info(rbsp)
        assert (info.first_mb_in_slice, info.slice_type, info.is_intra) == (
            first_mb,
            slice_type,
            intra,
        )

    def test_mod5_rule(self):
        for t in range(10):
            w = BitWriter()
            w.write_ue(0)
            w.write_ue(t)
            info = parse_slice_info(w.to_bytes())
            assert info.slice_type == t
            assert info.is_intra == (t % 5 == 2)

    def test_out_of_range(self):
        w = BitWriter()
        w.write_ue(0)
        w.write_ue(10)
        with pytest.raises(OutOfRange):
            parse_slice_info(w.to_bytes())

    def test_out_of_bits(self):
        with pytest.raises(OutOfBits):
            parse_slice_info(b"")
        with pytest.raises(OutOfBits):
            parse_slice_info(b"\x00")


class TestClassify:
    def test_empty(self):
        assert classify_stream([]) == []

    def test_hand_built_stream(self):
        nals = scan_annexb(
            b"\x00\x00\x00\x01\x67\xaa"  # SPS
            + b"\x00\x00\x01\x68\xbb"  # PPS
            + b"\x00\x00\x01\x65\x88"  # IDR, slice_type 7
        )
        rows = classify_stream(nals)
        assert [r.nal_type for r in rows] == [7, 8, 5]
        assert [r.type_name for r in rows] == ["SPS", "PPS", "IDR"]
        assert rows[2].slice_info.is_intra and not rows[2].unparsed

    def test_unparseable_slice_flagged(self):
        nals = scan_annexb(b"\x00\x00\x01\x41")  # slice NAL with empty payload
        rows = classify_stream(nals)
        assert rows[0].unparsed and rows[0].slice_info is None

    def test_forbidden_bit_flagged(self):
        rows = classify_stream(scan_annexb(b"\x00\x00\x01\xe5\x88"))
        assert rows[0].forbidden_bit

    def test_rbsp_size_accounts_for_escapes(self):
        nal = NalUnit(0, 4, parse_nal_header(0x65), rbsp_to_ebsp(b"\x88\x00\x00\x00\x07"))
        row = classify_stream([nal])[0]
        assert row.size == 6 and row.rbsp_size == 5
