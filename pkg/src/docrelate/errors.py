"""Exception hierarchy shared by all pipeline stages."""


class DocrelateError(Exception):
    """Base class for every error raised by this package."""


# --- ingest ---------------------------------------------------------------

class MalformedInput(DocrelateError):
    """OCR payload does not decode as the declared format."""


class UnsupportedFormat(DocrelateError):
    """Unknown OCR or image format name."""


class MalformedImage(DocrelateError):
    """Raster payload is truncated or not a valid image."""


# --- raster ops -----------------------------------------------------------

class BadKernel(DocrelateError):
    """Morphology kernel size must be odd and >= 1."""


class NoRaster(DocrelateError):
    """Operation requires a raster but the document has none."""


# --- lexicons -------------------------------------------------------------

class LexiconLoadError(DocrelateError):
    """Gazetteer or alias file could not be read."""


# --- relation store -------------------------------------------------------

class SchemaViolation(DocrelateError):
    """Row arity or cell type does not match the relation's columns."""


class UnknownTable(DocrelateError):
    """Relation name not in the schema (and not a staged TEMP)."""


# --- query engine ---------------------------------------------------------

class ParseError(DocrelateError):
    """Query text rejected by the grammar.

    Carries the character offset, the token index, and the set of token
    kinds that would have been accepted at that point.
    """

    def __init__(self, message: str, position: int, token_index: int,
                 expected: frozenset[str] = frozenset()):
        super().__init__(message)
        self.position = position
        self.token_index = token_index
        self.expected = expected


class UnknownColumn(DocrelateError):
    """Column name not present in the queried relation."""


class TypeMismatch(DocrelateError):
    """Comparison or substring over an incompatible column/literal type."""


class NonScalarSubquery(DocrelateError):
    """Nested select yields more than one column."""


# --- NL interface ---------------------------------------------------------

class EmptyUtterance(DocrelateError):
    """Blank input to intent classification."""


class UnmappableUtterance(DocrelateError):
    """No template pattern matched and no slot values were recognized."""


class UnknownRelationPhrase(DocrelateError):
    """No table synonym found in the utterance."""


class SlotArityMismatch(DocrelateError):
    """Template requires more slot values than were recognized."""


# --- workflows ------------------------------------------------------------

class EmptyRecording(DocrelateError):
    """Cannot save a workflow before any extraction step ran."""


class DuplicateName(DocrelateError):
    """Workflow or template name already registered."""


class UnknownWorkflow(DocrelateError):
    """Workflow name not in the registry."""


class UnknownDocument(DocrelateError):
    """Document id not known to the engine."""


class UnknownSession(DocrelateError):
    """Session id not known to the engine."""
