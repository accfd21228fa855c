"""Exception hierarchy.

Everything raised on purpose derives from :class:`RumorGTBError`. Errors caused
by bad input data also derive from :class:`DataError` (and ``ValueError``) so
the CLI can map them to a distinct exit status.
"""


class RumorGTBError(Exception):
    pass


class DataError(RumorGTBError, ValueError):
    pass


class MalformedRecord(DataError):
    pass


class MissingRequired(MalformedRecord):
    pass


class BadTimestamp(MalformedRecord):
    pass


class DuplicateEventId(DataError):
    def __init__(self, event_id):
        super().__init__(f"duplicate event_id {event_id!r}")
        self.event_id = event_id


class DatasetLoadError(DataError):
    """One or more lines of a dataset file failed to parse.

    ``problems`` holds ``(line_number, exception)`` pairs, 1-based.
    """

    def __init__(self, path, problems):
        self.path = path
        self.problems = list(problems)
        first = "; ".join(f"line {ln}: {exc}" for ln, exc in self.problems[:5])
        more = len(self.problems) - 5
        if more > 0:
            first += f"; ... and {more} more"
        super().__init__(f"{path}: {len(self.problems)} bad record(s): {first}")


class EmptyDataset(DataError):
    pass


class NegativeDeadline(DataError):
    pass


class MissingLabels(DataError):
    pass


class SingleClass(DataError):
    pass


class TooFewSamples(DataError):
    pass


class SchemaMismatch(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptyInput(DataError):
    pass


class NonBinaryTargets(DataError):
    pass


class BadU1(DataError):
    pass


class CorruptModel(DataError):
    pass


class UnsupportedVersion(DataError):
    pass
