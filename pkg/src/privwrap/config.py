"""Configuration dataclasses shared by all mechanisms.

All logarithms in this package are natural logarithms. Random draws come from
numpy's counter-based Philox generator keyed by a 64-bit seed.
"""

from __future__ import annotations

import dataclasses

RNG_NAME = "Philox"


@dataclasses.dataclass(frozen=True)
class Profile:
    """Constant profile for the mechanisms.

    The paper-faithful profile carries the constants the privacy proofs need.
    The test profile shrinks lattice depths so runs fit on a desk and voids the
    privacy guarantees. Its name is written into every report.

    Attributes:
        name: Watermark written into reports.
        q: Depth multiplier of Subset Extension.
        tau: If set, replaces the derived width tau of Subset Extension and TAHOE.
        lam: If set, replaces the derived locality parameter of AutoSense.
    """

    name: str
    q: int = 20
    tau: int | None = None
    lam: int | None = None

    @property
    def unsafe(self) -> bool:
        return self.name != PAPER_PROFILE.name


PAPER_PROFILE = Profile(name="paper-faithful")
# q must exceed 16 for Lipschitz inputs to pass the stability test.
TEST_PROFILE = Profile(name="test-constants", q=17, tau=1, lam=2)


@dataclasses.dataclass(frozen=True)
class EngineLimits:
    """Desk-scale guards.

    Attributes:
        query_budget: Max distinct subsets a single black box may evaluate.
        max_view_nodes: Max nodes of one enumerated lattice view.
        lipschitz_tol: Absolute slack when testing |f(z) - f(z')| <= 1 after
            rescaling, so rounding in f/c is not read as a violation.
    """

    query_budget: int = 10**7
    max_view_nodes: int = 4_000_000
    lipschitz_tol: float = 1e-9


LIMITS = EngineLimits()


@dataclasses.dataclass(frozen=True)
class PrivacyParams:
    """Privacy and accuracy parameters of one evaluation."""

    epsilon: float
    delta: float = 0.0
    beta: float = 0.1
    c: float = 1.0
    r: float | None = None

    def __post_init__(self):
        from privwrap.domain import ValidationError

        if not self.epsilon > 0:
            raise ValidationError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise ValidationError(f"delta must lie in [0, 1), got {self.delta}")
        if not 0 < self.beta < 1:
            raise ValidationError(f"beta must lie in (0, 1), got {self.beta}")
        if not self.c > 0:
            raise ValidationError(f"c must be positive, got {self.c}")
        if self.r is not None and not self.r > 0:
            raise ValidationError(f"r must be positive, got {self.r}")
