"""Exception hierarchy shared by every sketch component."""


class SketchError(Exception):
    """Base class for all errors raised by this package."""


class KeyZero(SketchError, ValueError):
    """Key 0 is reserved as the empty-cell sentinel."""


class KeyRangeError(SketchError, ValueError):
    """A value falls outside the supported range."""


class ZeroInverse(SketchError, ZeroDivisionError):
    pass


class MalformedTrits(SketchError, ValueError):
    """A packed ternary value holds a quadbit outside {0, 1, 2}."""


class WidthMismatch(SketchError, ValueError):
    pass


class IncompatibleSketch(SketchError, ValueError):
    """Two structures differ in size, width or hash seeds and cannot be combined."""


class DecodeFailed(SketchError):
    """A syndrome sketch holds more elements than its capacity allows."""


class FormatError(SketchError, ValueError):
    """Serialized sketch bytes are malformed."""
