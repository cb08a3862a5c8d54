"""Exception hierarchy.

Every error raised on bad input derives from :class:`DataError`; the CLI maps
those to exit code 2. :class:`InvariantViolation` maps to exit code 3.
"""
from __future__ import annotations


class PhfusionError(Exception):
    """Base class for all package errors."""


class DataError(PhfusionError):
    """Input data (images, datasets, model files) is unusable."""


class InvariantViolation(PhfusionError):
    """An internal consistency check failed."""


# image_core
class ImageFileNotFound(DataError, FileNotFoundError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"image file not found: {self.path}")


class UnsupportedFormat(DataError):
    def __init__(self, path, detail=""):
        self.path = str(path)
        msg = f"unsupported image format: {self.path}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class CorruptImage(DataError):
    def __init__(self, path, detail=""):
        self.path = str(path)
        msg = f"corrupt image: {self.path}"
        super().__init__(f"{msg} ({detail})" if detail else msg)


class ImageTooSmall(DataError, ValueError):
    pass


class InvalidThresholds(DataError, ValueError):
    pass


# pyramid
class ImageTooSmallForLevel(DataError, ValueError):
    pass


class LevelOutOfRange(DataError, ValueError):
    pass


# dense_sift / features
class PatchOutOfBounds(DataError, ValueError):
    pass


class NoPatchesFit(DataError, ValueError):
    pass


# codebook
class NotEnoughDistinctPoints(DataError, ValueError):
    pass


# svm
class SingleClassInput(DataError, ValueError):
    pass


class DimensionMismatch(DataError, ValueError):
    pass


class TooFewSamplesPerClass(DataError, ValueError):
    pass


# fusion
class EmptyTrainingSet(DataError, ValueError):
    pass


class LengthMismatch(DataError, ValueError):
    pass


# pipeline
class NotADirectory(DataError, NotADirectoryError):
    pass


class TooFewImages(DataError, ValueError):
    def __init__(self, class_name, found, needed):
        self.class_name = class_name
        super().__init__(
            f"class {class_name!r} has {found} images; need at least {needed}"
        )


class TooFewClasses(DataError, ValueError):
    pass


class ClassMismatch(DataError, ValueError):
    pass


# model persistence
class ModelFormatError(DataError):
    """Base for model-file decoding failures."""


class ModelIoError(ModelFormatError, OSError):
    pass


class BadMagic(ModelFormatError):
    pass


class UnsupportedVersion(ModelFormatError):
    pass


class ChecksumMismatch(ModelFormatError):
    pass
