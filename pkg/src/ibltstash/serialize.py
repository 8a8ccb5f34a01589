"""Binary sketch files.

Layout, little-endian throughout::

    header   55 bytes, see HEADER
    cells    n * ceil(w/8) bytes           (signed: n * ceil(2 nu / 8))
    checksum ceil(r/8) bytes
    stash    r * ceil(w/8) bytes           (signed: 2r * ceil(2m / 8))

Signed cells and ternary syndromes pack two bits per trit, first trit in the
lowest bits.  A signed cell lists its sign trit first, then the m keysum trits.
"""

from __future__ import annotations

import struct
from fractions import Fraction

import numpy as np

from .errors import FormatError, SketchError
from .fields import trits_for_width
from .hashing import HashSeeds
from .iblt import table_size
from .signed import SignedSketch
from .sketch import MAX_STASH, SUPPORTED_WIDTHS, Sketch

MAGIC = b"IBLS"
VERSION = 1
FLAG_SIGNED = 0x01
HEADER = struct.Struct("<4sBBBBIIHHHB4Q")
K = 3

# poly_id -> (field kind, degree) of the shipped stash modulus.
POLY_TABLE = (
    ("gf2", 8), ("gf2", 16), ("gf2", 24), ("gf2", 32),
    ("gf3", 6), ("gf3", 11), ("gf3", 16), ("gf3", 21),
)


def poly_id_for(signed: bool, w: int) -> int:
    entry = ("gf3", trits_for_width(w)) if signed else ("gf2", w)
    return POLY_TABLE.index(entry)


def _nbytes(bits: int) -> int:
    return (bits + 7) // 8


def cell_bytes(w: int, signed: bool) -> int:
    return _nbytes(2 * (trits_for_width(w) + 1)) if signed else _nbytes(w)


def syndrome_layout(w: int, r: int, signed: bool) -> tuple:
    """(count, bytes per syndrome)."""
    if signed:
        return 2 * r, _nbytes(2 * trits_for_width(w))
    return r, _nbytes(w)


def expected_size(n: int, w: int, r: int, signed: bool = False) -> int:
    count, each = syndrome_layout(w, r, signed)
    return HEADER.size + n * cell_bytes(w, signed) + _nbytes(r) + count * each


def _trits_to_int(v: int, count: int) -> int:
    """Packed quadbits -> 2 bits per trit."""
    out = 0
    for j in range(count):
        out |= ((v >> (4 * j)) & 0x3) << (2 * j)
    return out


def _int_to_trits(u: int, count: int) -> int:
    out = 0
    for j in range(count):
        t = (u >> (2 * j)) & 0x3
        if t == 3:
            raise FormatError("trit value 3 in packed data")
        out |= t << (4 * j)
    if u >> (2 * count):
        raise FormatError("padding bits set in packed trits")
    return out


def _pack_uints(values, width: int) -> bytes:
    arr = np.asarray(values, dtype="<u8")
    return arr.view(np.uint8).reshape(-1, 8)[:, :width].tobytes()


def _unpack_uints(buf: bytes, count: int, width: int) -> np.ndarray:
    raw = np.frombuffer(buf, dtype=np.uint8).reshape(count, width)
    full = np.zeros((count, 8), dtype=np.uint8)
    full[:, :width] = raw
    return full.reshape(-1).view("<u8").astype(np.uint64)


def serialize(sk) -> bytes:
    signed = isinstance(sk, SignedSketch)
    if not signed and not isinstance(sk, Sketch):
        raise TypeError("expected a Sketch or SignedSketch")
    header = HEADER.pack(
        MAGIC, VERSION, FLAG_SIGNED if signed else 0, sk.w, K,
        sk.n, sk.capacity, sk.r, sk.epsilon_milli, poly_id_for(signed, sk.w),
        sk.nu if signed else 0, *sk.seeds.as_tuple(),
    )
    parts = [header]
    cb = cell_bytes(sk.w, signed)
    if signed:
        m = sk.iblt.m
        shift = 4 * m
        for v in sk.iblt.cells:
            # sign trit first, keysum trits after it
            u = ((v >> shift) & 0x3) | (_trits_to_int(v & ((1 << shift) - 1), m) << 2)
            parts.append(u.to_bytes(cb, "little"))
    else:
        parts.append(_pack_uints(sk.iblt.cells, cb))
    parts.append(sk.checksum.to_bytes(_nbytes(sk.r), "little"))
    _, each = syndrome_layout(sk.w, sk.r, signed)
    if signed:
        m = sk.stash.m
        parts.extend(_trits_to_int(s, m).to_bytes(each, "little") for s in sk.stash.syndromes)
    else:
        parts.append(_pack_uints(sk.stash.syndromes, each))
    return b"".join(parts)


def read_header(data: bytes) -> dict:
    if len(data) < HEADER.size:
        raise FormatError("truncated header")
    (magic, version, flags, w, k, n, d, r, eps_milli, poly_id, nu, *seeds) = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError("bad magic")
    if version != VERSION:
        raise FormatError(f"unsupported version {version}")
    if flags & ~FLAG_SIGNED:
        raise FormatError("unknown flag bits")
    if k != K:
        raise FormatError("only k = 3 is supported")
    if w not in SUPPORTED_WIDTHS:
        raise FormatError(f"unsupported key width {w}")
    signed = bool(flags & FLAG_SIGNED)
    if d < 1 or not 1 <= r <= MAX_STASH:
        raise FormatError("capacity or stash parameter out of range")
    if n != table_size(d, Fraction(eps_milli, 1000)):
        raise FormatError("cell count does not match capacity and epsilon")
    if poly_id != poly_id_for(signed, w):
        raise FormatError("polynomial id does not match the key width")
    if nu != (trits_for_width(w) + 1 if signed else 0):
        raise FormatError("trit count does not match the key width")
    try:
        hs = HashSeeds(tuple(seeds[:3]), seeds[3])
    except (SketchError, ValueError) as exc:
        raise FormatError(f"bad seeds: {exc}") from None
    return dict(signed=signed, w=w, n=n, capacity=d, r=r, epsilon_milli=eps_milli, seeds=hs)


def deserialize(data: bytes):
    data = bytes(data)
    h = read_header(data)
    signed, w, n, r = h["signed"], h["w"], h["n"], h["r"]
    size = expected_size(n, w, r, signed)
    if len(data) != size:
        raise FormatError(f"expected {size} bytes, got {len(data)}")
    cls = SignedSketch if signed else Sketch
    sk = cls(h["capacity"], r, w, h["seeds"], Fraction(h["epsilon_milli"], 1000))
    pos = HEADER.size
    cb = cell_bytes(w, signed)
    body = data[pos:pos + n * cb]
    pos += n * cb
    if signed:
        m = sk.iblt.m
        cells = []
        for i in range(n):
            u = int.from_bytes(body[i * cb:(i + 1) * cb], "little")
            cells.append(_int_to_trits(u >> 2, m) | (_int_to_trits(u & 0x3, 1) << (4 * m)))
        sk.iblt.cells = cells
    else:
        cells = _unpack_uints(body, n, cb)
        if w < 64 and (cells >> np.uint64(w)).any():
            raise FormatError("cell value wider than the key width")
        sk.iblt.cells = cells
    ck = _nbytes(r)
    sk.checksum = int.from_bytes(data[pos:pos + ck], "little")
    pos += ck
    if sk.checksum >> r:
        raise FormatError("checksum wider than r bits")
    count, each = syndrome_layout(w, r, signed)
    raw = data[pos:pos + count * each]
    if signed:
        m = sk.stash.m
        sk.stash.syndromes = [
            _int_to_trits(int.from_bytes(raw[j * each:(j + 1) * each], "little"), m) for j in range(count)
        ]
    else:
        syn = _unpack_uints(raw, count, each)
        if w < 64 and (syn >> np.uint64(w)).any():
            raise FormatError("syndrome wider than the key width")
        sk.stash.syndromes = [int(v) for v in syn]
    return sk


def load(path):
    with open(path, "rb") as fh:
        return deserialize(fh.read())


def save(sk, path) -> None:
    data = serialize(sk)
    with open(path, "wb") as fh:
        fh.write(data)


__all__ = [
    "HEADER", "MAGIC", "POLY_TABLE", "VERSION",
    "cell_bytes", "deserialize", "expected_size", "load", "read_header", "save", "serialize",
]
