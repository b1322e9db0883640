"""Shared query result record for the index variants."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class QueryResult:
    """Outcome of an index query.

    ``level`` is the deepest block boundary that produced finisher hits
    (0 when nothing matched).  ``bound`` is the certified upper bound on
    the bottleneck distance to every returned set, derived from the safe
    lemma constants; ``claimed_bound`` is the tighter constant claimed in
    the analysis, reported but never asserted.
    """

    ids: tuple[str, ...]
    level: int
    bound: float = math.inf
    claimed_bound: float = math.inf
    diagnostics: dict = field(default_factory=dict)

    @property
    def empty(self) -> bool:
        return not self.ids
