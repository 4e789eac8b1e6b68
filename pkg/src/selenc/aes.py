"""AES-128 block cipher built from its four round transformations.

The S-box and multiplication tables are derived at import time from GF(2^8)
arithmetic (reduction polynomial x^8 + x^4 + x^3 + x + 1) rather than typed
in as constants. The state-matrix transformations expose the algebra for
testing; encrypt_block/decrypt_block run an equivalent flat-byte path that is
fast enough for whole-stream work.

Not constant-time, and not meant to protect real secrets.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BadKeyLength, CounterOverflow

_POLY = 0x11B  # x^8 + x^4 + x^3 + x + 1

BLOCK_SIZE = 16
KEY_SIZE = 16

# Per-round constants applied to the first byte of a word by the key-schedule
# transformation: successive doublings in GF(2^8).
ROUND_CONSTANTS = (0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36)


def _xtime(a: int) -> int:
    a <<= 1
    return a ^ _POLY if a & 0x100 else a


def _gf_mul(a: int, b: int) -> int:
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        a = _xtime(a)
        b >>= 1
    return acc


def _rotl8(v: int, n: int) -> int:
    return ((v << n) | (v >> (8 - n))) & 0xFF


def _build_sbox() -> bytes:
    # Multiplicative inverses via log tables over the generator 0x03, then
    # the affine map y ^ rotl(y,1..4) ^ 0x63.
    exp = [0] * 255
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x ^= _xtime(x)  # multiply by 0x03
    sbox = bytearray(256)
    for a in range(256):
        y = 0 if a == 0 else exp[(255 - log[a]) % 255]
        sbox[a] = y ^ _rotl8(y, 1) ^ _rotl8(y, 2) ^ _rotl8(y, 3) ^ _rotl8(y, 4) ^ 0x63
    return bytes(sbox)


SBOX = _build_sbox()
INV_SBOX = bytes(SBOX.index(i) for i in range(256))

_MUL2 = bytes(_gf_mul(a, 2) for a in range(256))
_MUL3 = bytes(_gf_mul(a, 3) for a in range(256))
_MUL9 = bytes(_gf_mul(a, 9) for a in range(256))
_MUL11 = bytes(_gf_mul(a, 11) for a in range(256))
_MUL13 = bytes(_gf_mul(a, 13) for a in range(256))
_MUL14 = bytes(_gf_mul(a, 14) for a in range(256))

# ShiftRows as a permutation of the flat column-major block: row r of the
# state rotates left by r, i.e. new[r + 4c] = old[r + 4((c + r) % 4)].
_SHIFT_PERM = tuple((i & 3) + 4 * (((i >> 2) + (i & 3)) & 3) for i in range(16))
_INV_SHIFT_PERM = tuple((i & 3) + 4 * (((i >> 2) - (i & 3)) & 3) for i in range(16))


def _xor16(a: bytes, b: bytes) -> bytes:
    return (int.from_bytes(a, "big") ^ int.from_bytes(b, "big")).to_bytes(16, "big")


def xor_bytes(data: bytes, mask: bytes) -> bytes:
    """XOR two equal-length byte strings."""
    if len(data) != len(mask):
        raise ValueError("xor_bytes needs equal lengths")
    n = len(data)
    return (int.from_bytes(data, "big") ^ int.from_bytes(mask, "big")).to_bytes(n, "big")


@dataclass(frozen=True)
class AesState:
    """4x4 byte matrix, column-major over a 16-byte block.

    Block byte i lands in row i % 4, column i // 4.
    """

    cells: "tuple[tuple[int, ...], ...]"

    @classmethod
    def from_block(cls, block: bytes) -> "AesState":
        if len(block) != BLOCK_SIZE:
            raise ValueError("state block must be 16 bytes")
        return cls(tuple(tuple(block[4 * c + r] for c in range(4)) for r in range(4)))

    def to_block(self) -> bytes:
        return bytes(self.cells[r][c] for c in range(4) for r in range(4))


def _map_cells(s: AesState, table: bytes) -> AesState:
    return AesState(tuple(tuple(table[b] for b in row) for row in s.cells))


def sub_bytes(s: AesState) -> AesState:
    """Substitute every cell through the S-box, independent of position."""
    return _map_cells(s, SBOX)


def inv_sub_bytes(s: AesState) -> AesState:
    return _map_cells(s, INV_SBOX)


def _rot(row: "tuple[int, ...]", k: int) -> "tuple[int, ...]":
    k %= 4
    return row[k:] + row[:k]


def shift_rows(s: AesState) -> AesState:
    """Rotate row r left by r positions."""
    return AesState(tuple(_rot(row, r) for r, row in enumerate(s.cells)))


def inv_shift_rows(s: AesState) -> AesState:
    return AesState(tuple(_rot(row, -r) for r, row in enumerate(s.cells)))


def mix_columns(s: AesState) -> AesState:
    """Multiply each column by {03}x^3 + {01}x^2 + {01}x + {02} in GF(2^8)."""
    r0, r1, r2, r3 = s.cells
    out = ([], [], [], [])
    for c in range(4):
        a0, a1, a2, a3 = r0[c], r1[c], r2[c], r3[c]
        out[0].append(_MUL2[a0] ^ _MUL3[a1] ^ a2 ^ a3)
        out[1].append(a0 ^ _MUL2[a1] ^ _MUL3[a2] ^ a3)
        out[2].append(a0 ^ a1 ^ _MUL2[a2] ^ _MUL3[a3])
        out[3].append(_MUL3[a0] ^ a1 ^ a2 ^ _MUL2[a3])
    return AesState(tuple(tuple(row) for row in out))


def inv_mix_columns(s: AesState) -> AesState:
    """Multiply each column by the inverse polynomial {0b}x^3+{0d}x^2+{09}x+{0e}."""
    r0, r1, r2, r3 = s.cells
    out = ([], [], [], [])
    for c in range(4):
        a0, a1, a2, a3 = r0[c], r1[c], r2[c], r3[c]
        out[0].append(_MUL14[a0] ^ _MUL11[a1] ^ _MUL13[a2] ^ _MUL9[a3])
        out[1].append(_MUL9[a0] ^ _MUL14[a1] ^ _MUL11[a2] ^ _MUL13[a3])
        out[2].append(_MUL13[a0] ^ _MUL9[a1] ^ _MUL14[a2] ^ _MUL11[a3])
        out[3].append(_MUL11[a0] ^ _MUL13[a1] ^ _MUL9[a2] ^ _MUL14[a3])
    return AesState(tuple(tuple(row) for row in out))


def add_round_key(s: AesState, round_key: bytes) -> AesState:
    """XOR the state with one 16-byte round key. Its own inverse."""
    if len(round_key) != BLOCK_SIZE:
        raise ValueError("round key must be 16 bytes")
    return AesState(
        tuple(
            tuple(s.cells[r][c] ^ round_key[4 * c + r] for c in range(4)) for r in range(4)
        )
    )


@dataclass(frozen=True)
class KeySchedule:
    """Expanded AES-128 key: 44 four-byte words, grouped into 11 round keys."""

    words: "tuple[bytes, ...]"
    round_keys: "tuple[bytes, ...]"

    NK = 4  # four-byte words in the cipher key


def _t_transform(word: bytes, rcon: int) -> bytes:
    """Rotate left one byte, substitute through the S-box, XOR the constant."""
    rotated = word[1:] + word[:1]
    substituted = rotated.translate(SBOX)
    return bytes((substituted[0] ^ rcon,)) + substituted[1:]


def key_expansion(key: bytes) -> KeySchedule:
    """Expand a 16-byte key into the 44-word schedule.

    The key fills words 0..3; afterwards W[i] = W[i-1] XOR W[i-4], except
    every fourth word where W[i] = T(W[i-1]) XOR W[i-4].
    """
    if len(key) != KEY_SIZE:
        raise BadKeyLength(f"key must be 16 bytes, got {len(key)}")
    words = [bytes(key[i : i + 4]) for i in range(0, 16, 4)]
    for i in range(4, 44):
        prev = words[i - 1]
        if i % 4 == 0:
            prev = _t_transform(prev, ROUND_CONSTANTS[i // 4 - 1])
        words.append(bytes(a ^ b for a, b in zip(prev, words[i - 4])))
    round_keys = tuple(b"".join(words[4 * r : 4 * r + 4]) for r in range(11))
    return KeySchedule(tuple(words), round_keys)


def encrypt_block(block: bytes, ks: KeySchedule) -> bytes:
    """Encrypt one 16-byte block: initial key add, 9 full rounds, final round
    without the column mix."""
    if len(block) != BLOCK_SIZE:
        raise ValueError("block must be 16 bytes")
    rk = ks.round_keys
    s = _xor16(block, rk[0])
    for r in range(1, 10):
        t = s.translate(SBOX)
        t = bytes(map(t.__getitem__, _SHIFT_PERM))
        k = rk[r]
        out = bytearray(16)
        for c in (0, 4, 8, 12):
            a0, a1, a2, a3 = t[c], t[c + 1], t[c + 2], t[c + 3]
            x = a0 ^ a1 ^ a2 ^ a3
            out[c] = a0 ^ x ^ _MUL2[a0 ^ a1] ^ k[c]
            out[c + 1] = a1 ^ x ^ _MUL2[a1 ^ a2] ^ k[c + 1]
            out[c + 2] = a2 ^ x ^ _MUL2[a2 ^ a3] ^ k[c + 2]
            out[c + 3] = a3 ^ x ^ _MUL2[a3 ^ a0] ^ k[c + 3]
        s = bytes(out)
    t = s.translate(SBOX)
    t = bytes(map(t.__getitem__, _SHIFT_PERM))
    return _xor16(t, rk[10])


def decrypt_block(block: bytes, ks: KeySchedule) -> bytes:
    """Exact inverse of encrypt_block: inverse transformations in reverse order."""
    if len(block) != BLOCK_SIZE:
        raise ValueError("block must be 16 bytes")
    rk = ks.round_keys
    s = _xor16(block, rk[10])
    for r in range(9, 0, -1):
        s = bytes(map(s.__getitem__, _INV_SHIFT_PERM)).translate(INV_SBOX)
        s = _xor16(s, rk[r])
        out = bytearray(16)
        for c in (0, 4, 8, 12):
            a0, a1, a2, a3 = s[c], s[c + 1], s[c + 2], s[c + 3]
            out[c] = _MUL14[a0] ^ _MUL11[a1] ^ _MUL13[a2] ^ _MUL9[a3]
            out[c + 1] = _MUL9[a0] ^ _MUL14[a1] ^ _MUL11[a2] ^ _MUL13[a3]
            out[c + 2] = _MUL13[a0] ^ _MUL9[a1] ^ _MUL14[a2] ^ _MUL11[a3]
            out[c + 3] = _MUL11[a0] ^ _MUL13[a1] ^ _MUL9[a2] ^ _MUL14[a3]
        s = bytes(out)
    s = bytes(map(s.__getitem__, _INV_SHIFT_PERM)).translate(INV_SBOX)
    return _xor16(s, rk[0])


@dataclass(frozen=True)
class CounterBlock:
    """16-byte counter-mode input: nonce || NAL ordinal || block index.

    Integers are big-endian. Structural uniqueness: within one stream and
    nonce, every (ordinal, index) pair names a distinct block.
    """

    nonce: bytes
    nal_ordinal: int
    block_index: int

    def __post_init__(self) -> None:
        if len(self.nonce) != 8:
            raise ValueError("nonce must be 8 bytes")
        if not (0 <= self.nal_ordinal < 1 << 32):
            raise ValueError("nal_ordinal must fit in 32 bits")
        if not (0 <= self.block_index < 1 << 32):
            raise ValueError("block_index must fit in 32 bits")

    def to_bytes(self) -> bytes:
        return (
            self.nonce
            + self.nal_ordinal.to_bytes(4, "big")
            + self.block_index.to_bytes(4, "big")
        )


MAX_KEYSTREAM_BYTES = (1 << 32) * BLOCK_SIZE


def ctr_keystream(ks: KeySchedule, nonce: bytes, nal_ordinal: int, nbytes: int) -> bytes:
    """First ``nbytes`` of E(nonce||ordinal||0) || E(nonce||ordinal||1) || ...

    Deterministic in all inputs; applying the same keystream twice by XOR
    restores the plaintext.
    """
    if nbytes < 0:
        raise ValueError("nbytes must be nonnegative")
    if nbytes > MAX_KEYSTREAM_BYTES:
        raise CounterOverflow(f"{nbytes} bytes exceeds the 32-bit block counter")
    if nbytes == 0:
        return b""
    prefix = CounterBlock(nonce, nal_ordinal, 0).to_bytes()[:12]
    blocks = [
        encrypt_block(prefix + j.to_bytes(4, "big"), ks)
        for j in range((nbytes + BLOCK_SIZE - 1) // BLOCK_SIZE)
    ]
    return b"".join(blocks)[:nbytes]
