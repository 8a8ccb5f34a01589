"""Set reconciliation sketches: an IBLT backed by a small BCH stash.

A :class:`Sketch` of capacity D summarises a key set so that two parties can
recover the symmetric difference of their sets, as long as it has at most D
keys.  :class:`SignedSketch` also tells which side each difference came from.
"""

from .bch import BchSketch, TernaryBchSketch
from .errors import (
    DecodeFailed,
    FormatError,
    IncompatibleSketch,
    KeyRangeError,
    KeyZero,
    MalformedTrits,
    SketchError,
    WidthMismatch,
    ZeroInverse,
)
from .hashing import HashSeeds
from .iblt import Iblt, table_size
from .serialize import deserialize, load, save, serialize
from .signed import SignedIblt, SignedSketch, signed_sym_diff
from .sketch import ReportOutcome, Sketch, Status

__version__ = "0.1.0"

__all__ = [
    "BchSketch", "DecodeFailed", "FormatError", "HashSeeds", "Iblt", "IncompatibleSketch",
    "KeyRangeError", "KeyZero", "MalformedTrits", "ReportOutcome", "SignedIblt", "SignedSketch",
    "Sketch", "SketchError", "Status", "TernaryBchSketch", "WidthMismatch", "ZeroInverse",
    "deserialize", "load", "save", "serialize", "signed_sym_diff", "table_size",
]
