from deid.profile.compose import Profile, ResolvedAction, compose_profile, resolve_multiplex
from deid.profile.engine import (
    AuditRecord,
    anonymize_sequence_recursive,
    apply_profile,
    insert_missing_type2,
    strip_unsafe_private,
)
from deid.profile.options import ProfileOptions
from deid.profile.uid_map import UidMap, remap_uid

__all__ = [
    "AuditRecord",
    "Profile",
    "ProfileOptions",
    "ResolvedAction",
    "UidMap",
    "anonymize_sequence_recursive",
    "apply_profile",
    "compose_profile",
    "insert_missing_type2",
    "remap_uid",
    "resolve_multiplex",
    "strip_unsafe_private",
]
