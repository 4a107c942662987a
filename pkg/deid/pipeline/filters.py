from dataclasses import dataclass

from deid.codec.dataset import DicomObject
from deid.pipeline.config import SOP_CLASS_UID, SopClassSection


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None


def filter_sop_class(obj: DicomObject, policy: SopClassSection) -> FilterDecision:
    """Allow-list keeps only listed classes; deny-list rejects only listed ones."""
    sop_class = obj.dataset.get_text(SOP_CLASS_UID)
    if not sop_class:
        return FilterDecision(False, "missing SOPClassUID")
    listed = sop_class in policy.uid_set
    if policy.mode == "allow" and not listed:
        return FilterDecision(False, f"SOP class {sop_class} not on allow list")
    if policy.mode == "deny" and listed:
        return FilterDecision(False, f"SOP class {sop_class} on deny list")
    return FilterDecision(True)
