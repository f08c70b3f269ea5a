"""Result type shared by all wrappers."""

from __future__ import annotations

import dataclasses
from typing import Any

BOTTOM = "bottom"


@dataclasses.dataclass
class WrapperOutput:
    """A released value or the nonresponse symbol, plus run metadata.

    Attributes:
        mechanism: Mechanism name.
        result: The released real, or None for nonresponse.
        released: Released intermediate values such as ell, b or w.
        queries: Distinct subsets evaluated.
        realized_depth: max |x \\ z| over queried z.
        profile: Constant profile name.
        diagnostics: Human-readable notes (never part of the private output).
    """

    mechanism: str
    result: float | None
    released: dict[str, Any]
    queries: int
    realized_depth: int
    profile: str
    diagnostics: list[str] = dataclasses.field(default_factory=list)

    @property
    def is_bottom(self) -> bool:
        return self.result is None

    def to_dict(self) -> dict[str, Any]:
        return {
            "mechanism": self.mechanism,
            "result": BOTTOM if self.result is None else self.result,
            "released": self.released,
            "queries": self.queries,
            "realized_depth": self.realized_depth,
            "profile": self.profile,
            "diagnostics": self.diagnostics,
        }
