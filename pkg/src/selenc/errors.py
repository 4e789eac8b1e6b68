"""Exception hierarchy shared across the package."""


class SelencError(Exception):
    """Base class for every error this package raises deliberately."""


class NoStartCode(SelencError):
    """A nonempty stream contains no Annex B start code."""


class EscapingViolation(SelencError):
    """A payload offered for serialization contains a forbidden 00 00 0X run."""


class MalformedEscape(SelencError):
    """An escaped payload contains 0x00 0x00 followed by 0x00, 0x01 or 0x02."""


class OutOfBits(SelencError):
    """A bit-level read ran past the end of its buffer."""


class OutOfRange(SelencError):
    """A parsed syntax element lies outside its legal range."""


class BadKeyLength(SelencError):
    """Cipher key is not exactly 16 bytes."""


class CounterOverflow(SelencError):
    """Requested keystream exceeds the 32-bit block counter space."""


class WrongKey(SelencError):
    """Key-check value in the sidecar does not match the supplied key."""


class OrdinalOutOfRange(SelencError):
    """Sidecar lists a NAL ordinal the stream does not contain."""


class BadMagic(SelencError):
    """Sidecar does not begin with the expected magic bytes."""


class BadVersion(SelencError):
    """Sidecar version byte is not recognized."""


class MalformedHeader(SelencError):
    """Sidecar is truncated or internally inconsistent."""


class BadHex(SelencError):
    """Raw key string is not exactly 32 hexadecimal characters."""


class EmptyPassphrase(SelencError):
    """Passphrase-based key derivation needs a non-empty passphrase."""
