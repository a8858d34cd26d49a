"""Exception hierarchy shared by every engine module.

Each error carries a stable machine ``code`` so the HTTP layer and the CLI
can map failures to responses without string matching.
"""

from __future__ import annotations


class WrapError(Exception):
    """Base class for all engine errors."""

    code = "internal"

    def __init__(self, message: str, details: dict | None = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_json(self) -> dict:
        return {"code": self.code, "message": self.message, "details": self.details}


class DecodeError(WrapError):
    """Input bytes are unreadable under the declared encoding."""

    code = "decode"


class NotInDocumentError(WrapError):
    """A selector was requested for a node detached from the given document."""

    code = "not_in_document"


class ResolutionError(WrapError):
    """No node exists at some step of a selector path."""

    code = "resolution"

    def __init__(self, message: str, step_index: int, details: dict | None = None):
        details = dict(details or {}, step_index=step_index)
        super().__init__(message, details)
        self.step_index = step_index


class FrameError(WrapError):
    """A `>f>` separator landed on a non-iframe or an unloaded iframe."""

    code = "frame"


class RuleGenerationError(WrapError):
    """A block contains no data carriers to build rules from."""

    code = "empty_rules"


class AlignmentError(WrapError):
    """Sub-blocks of one block disagree on their data-carrier counts."""

    code = "alignment"

    def __init__(self, message: str, sub_block: str, details: dict | None = None):
        details = dict(details or {}, sub_block=sub_block)
        super().__init__(message, details)
        self.sub_block = sub_block


class ExtractionError(WrapError):
    """A sub-block selector failed to resolve during extraction."""

    code = "extraction"


class ValidationError(WrapError):
    """A service definition (or patch) violates its invariants."""

    code = "validation"

    def __init__(self, message: str, fields: list[str] | None = None):
        super().__init__(message, {"fields": fields or []})
        self.fields = fields or []


class NotFoundError(WrapError):
    """Unknown service id."""

    code = "not_found"


class AuthorizationError(WrapError):
    """Missing or wrong API key."""

    code = "authorization"


class ParameterError(WrapError):
    """A system parameter has an unusable value (e.g. non-positive page budget)."""

    code = "parameter"


class FilterPathError(WrapError):
    """A filter predicate names a field path unknown to the service."""

    code = "filter_path"


class UpstreamError(WrapError):
    """The page provider failed to produce a page."""

    code = "upstream"


class FixtureNotFoundError(UpstreamError):
    """Fixture-mode lookup missed: the test corpus lacks the requested page."""

    code = "fixture_missing"


class SubmissionError(UpstreamError):
    """The chosen query button cannot be submitted without a script runtime."""

    code = "submission"
