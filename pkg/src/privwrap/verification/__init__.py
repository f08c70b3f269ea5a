"""Ground truth for the engine: brute-force oracles, adversarial instances, and a privacy auditor.

Nothing in this package imports the mechanism code it is used to check.
"""

from privwrap.verification.audit import DpAuditReport, audit_outputs, dp_audit, slack
from privwrap.verification.hard_instances import NULL, PLANTED, HardInstance, make_hard_instance

__all__ = [
    "NULL",
    "PLANTED",
    "DpAuditReport",
    "HardInstance",
    "audit_outputs",
    "dp_audit",
    "make_hard_instance",
    "slack",
]
