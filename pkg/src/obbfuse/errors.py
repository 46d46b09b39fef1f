"""Exception types shared across the package."""


class ObbfuseError(Exception):
    """Base class for all library-specific errors."""


class DegenerateQuad(ObbfuseError):
    """Quadrilateral has (near-)zero area, coincident vertices, or is not convex."""


class MalformedLine(ObbfuseError):
    """Annotation or detection text line cannot be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class IoFailure(ObbfuseError):
    """File could not be read, decoded, or written."""


class ImageIdMismatch(ObbfuseError):
    """Operation received label sets belonging to different images."""


class ShapeMismatch(ObbfuseError):
    """Tensor or kernel shapes are inconsistent with the operation's contract."""


class MissingWeight(ObbfuseError):
    """A named tensor required by a forward pass is absent from the weight bundle."""


class CategoryMismatch(ObbfuseError):
    """A detection names a category outside the configured class list."""
