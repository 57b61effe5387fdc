"""Exception types shared across the package."""

from __future__ import annotations


class JustlabError(Exception):
    """Base class for domain errors raised by justlab."""


class FormulaSyntaxError(SyntaxError):
    """Malformed formula text. ``offset`` is a zero-based byte offset."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at byte {offset}")
        self.msg = message
        self.text = text
        self.offset = offset


class ShapeMismatch(JustlabError):
    pass


class PremiseNotFound(JustlabError):
    pass


class NotTotalCS(JustlabError):
    pass


class DomainError(JustlabError):
    pass


class BoundExceeded(JustlabError):
    pass


class UnassignedAtom(JustlabError):
    pass


class OutOfFragment(JustlabError):
    pass


class AnnotationError(JustlabError):
    pass


class NotQuasiMember(JustlabError):
    pass


class InvalidCertificate(JustlabError):
    pass


class ModelError(JustlabError):
    """A model is structurally malformed (missing entries, bad indices)."""
