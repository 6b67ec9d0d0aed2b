"""Exception hierarchy shared across the toolkit."""


class NetWattZapError(Exception):
    """Base class for all toolkit errors."""


class MalformedDocument(NetWattZapError):
    """A dataset document could not be parsed or fails schema checks."""


class DuplicateAbbrev(MalformedDocument):
    """Two grid regions declare the same abbreviation."""


class DuplicateMember(MalformedDocument):
    """An administrative code is claimed by more than one grid region."""


class OpenRing(MalformedDocument):
    """A boundary ring is not closed or has too few vertices."""


class NoBoundary(NetWattZapError):
    """A geometric operation was asked of a region without polygons."""


class MissingStats(NetWattZapError):
    """Strict aggregation found member codes without statistics records.

    The offending codes are available as ``codes``.
    """

    def __init__(self, codes):
        self.codes = tuple(sorted(codes))
        super().__init__(f"no statistics for member codes: {', '.join(self.codes)}")


class MalformedLine(MalformedDocument):
    """A topology file line does not match the expected format."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class MalformedRow(MalformedDocument):
    """A CSV row fails validation."""

    def __init__(self, rowno, message):
        self.rowno = rowno
        super().__init__(f"row {rowno}: {message}")


class DanglingLinkEndpoint(NetWattZapError):
    """A link references a node id that was never defined (strict mode)."""


class UnknownNode(NetWattZapError):
    """A graph or link operation referenced a node that does not exist."""


class UnknownWasg(NetWattZapError):
    """A scenario or lookup referenced a grid id not present in the registry."""


class AllNodesFailed(NetWattZapError):
    """A failure scenario removed every node of the connectivity graph."""


class UnsatisfiableStructure(NetWattZapError):
    """A placement problem is provably infeasible before solving."""
