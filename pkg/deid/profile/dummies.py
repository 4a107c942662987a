from pydicom.uid import generate_uid

from deid.codec.tags import BINARY_WIDTH, VR

DUMMY_TEXT: dict[VR, str] = {
    VR.AE: "ANONYMIZED",
    VR.AS: "000Y",
    VR.CS: "UNKNOWN",
    VR.DA: "19000101",
    VR.DS: "0",
    VR.DT: "19000101000000",
    VR.IS: "0",
    VR.LO: "ANONYMIZED",
    VR.LT: "ANONYMIZED",
    VR.PN: "ANONYMIZED",
    VR.SH: "ANONYMIZED",
    VR.ST: "ANONYMIZED",
    VR.TM: "000000",
    VR.UC: "ANONYMIZED",
    VR.UR: "",
    VR.UT: "ANONYMIZED",
}


def new_uid(root: str = "2.25") -> str:
    if root == "2.25":
        return str(generate_uid(prefix=None))
    return str(generate_uid(prefix=f"{root}."))


def dummy_value_for(vr: VR, *, uid_root: str = "2.25") -> str | bytes:
    """Fixed VR-valid dummy; UI gets a fresh UID and binary VRs get zeros."""
    if vr is VR.SQ:
        raise ValueError("sequences are dummied recursively, not by value")
    if vr is VR.UI:
        return new_uid(uid_root)
    if vr in DUMMY_TEXT:
        return DUMMY_TEXT[vr]
    width = BINARY_WIDTH.get(vr, 2)
    return b"\x00" * max(width, 2)
