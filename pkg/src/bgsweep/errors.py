"""Exception hierarchy. Every error raised by the package derives from BgsError."""


class BgsError(Exception):
    pass


class MalformedImageError(BgsError, ValueError):
    """Pixel buffer does not match its declared shape or channel count."""


class IncompatibleShapeError(BgsError, ValueError):
    """Two images (or a model and a frame) disagree on dimensions."""


class MalformedGroundTruthError(BgsError, ValueError):
    """A groundtruth label outside {0, 50, 85, 170, 255} in strict mode."""


class CounterOverflowError(BgsError, OverflowError):
    pass


class SequenceError(BgsError):
    """Base for loader failures. ``path`` names the offending file or directory."""

    def __init__(self, message, path=None):
        super().__init__(message if path is None else f"{message}: {path}")
        self.path = path


class MissingSequenceError(SequenceError, FileNotFoundError):
    pass


class NumberingGapError(SequenceError):
    pass


class DecodeError(SequenceError):
    pass


class FrameDimensionError(SequenceError, IncompatibleShapeError):
    pass


class ConfigError(BgsError, ValueError):
    pass
