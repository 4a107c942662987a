"""Deterministic, salted UID replacement shared across a run."""

from __future__ import annotations

import hashlib
import hmac
import logging
import os
import re
import threading
from collections.abc import Iterator
from pathlib import Path

from deid.core.errors import InvalidUid

logger = logging.getLogger(__name__)

_UID_RE = re.compile(r"^[0-9]+(\.[0-9]+)*$")
_ROOT_RE = re.compile(r"^(0|[1-9][0-9]*)(\.(0|[1-9][0-9]*))*$")
MAX_UID_LENGTH = 64


def validate_uid(uid: str) -> str:
    value = uid.strip().rstrip("\x00")
    if not value or len(value) > MAX_UID_LENGTH or not _UID_RE.match(value):
        raise InvalidUid(f"not a valid UID: {uid!r}")
    return value


class UidMap:
    """original UID -> replacement UID, injective and thread-safe.

    A replacement is ``root + "." + decimal(HMAC-SHA256(salt, uid))`` cut to
    64 characters. Values that already are replacements in this map are
    returned unchanged, so remapping an already processed object is a no-op.
    """

    def __init__(self, root: str = "2.25", salt: bytes = b""):
        if not _ROOT_RE.match(root) or len(root) > MAX_UID_LENGTH - 10:
            raise InvalidUid(f"invalid UID root {root!r}")
        self.root = root
        self._salt = salt
        self._forward: dict[str, str] = {}
        self._reverse: dict[str, str] = {}
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._forward)

    def __contains__(self, uid: object) -> bool:
        with self._lock:
            return uid in self._forward

    def items(self) -> Iterator[tuple[str, str]]:
        with self._lock:
            snapshot = list(self._forward.items())
        return iter(snapshot)

    def get(self, uid: str) -> str | None:
        with self._lock:
            return self._forward.get(uid)

    def is_replacement(self, uid: str) -> bool:
        with self._lock:
            return uid in self._reverse

    def _candidate(self, uid: str, counter: int) -> str:
        message = uid.encode("utf-8") if counter == 0 else f"{uid}\x00{counter}".encode("utf-8")
        digest = hmac.new(self._salt, message, hashlib.sha256).digest()
        rendered = f"{self.root}.{int.from_bytes(digest, 'big')}"
        return rendered[:MAX_UID_LENGTH]

    def remap(self, uid: str) -> str:
        original = validate_uid(uid)
        with self._lock:
            existing = self._forward.get(original)
            if existing is not None:
                return existing
            if original in self._reverse:
                return original
            counter = 0
            candidate = self._candidate(original, counter)
            while candidate in self._reverse or candidate in self._forward:
                counter += 1
                candidate = self._candidate(original, counter)
            if counter:
                logger.warning("UID hash collision resolved", extra={"count": counter})
            self._forward[original] = candidate
            self._reverse[candidate] = original
            return candidate

    def derive(self, seed: str) -> str:
        """Deterministic UID for a value that has no usable original (not persisted)."""
        with self._lock:
            counter = 0
            candidate = self._candidate(f"seed:{seed}", counter)
            while candidate in self._forward:
                counter += 1
                candidate = self._candidate(f"seed:{seed}", counter)
            self._reverse.setdefault(candidate, f"seed:{seed}")
            return candidate

    def merge(self, pairs: Iterator[tuple[str, str]] | list[tuple[str, str]]) -> None:
        with self._lock:
            for original, replacement in pairs:
                known = self._forward.get(original)
                if known is not None and known != replacement:
                    raise InvalidUid(f"conflicting persisted mapping for {original}")
                owner = self._reverse.get(replacement)
                if owner is not None and owner != original:
                    raise InvalidUid(f"replacement {replacement} mapped from two originals")
                self._forward[original] = replacement
                self._reverse[replacement] = original

    def load(self, path: Path) -> int:
        """Merge a ``original<TAB>replacement`` file; returns the number of rows read."""
        if not path.exists():
            return 0
        pairs: list[tuple[str, str]] = []
        for line_number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            if not line.strip():
                continue
            original, sep, replacement = line.partition("\t")
            if not sep:
                raise InvalidUid(f"{path}:{line_number}: expected original<TAB>replacement")
            pairs.append((validate_uid(original), validate_uid(replacement)))
        self.merge(pairs)
        logger.info("uid map loaded", extra={"count": len(pairs)})
        return len(pairs)

    def save(self, path: Path) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        rows = sorted(self.items())
        with tmp.open("w", encoding="utf-8") as handle:
            for original, replacement in rows:
                handle.write(f"{original}\t{replacement}\n")
        os.replace(tmp, path)
        logger.info("uid map saved", extra={"count": len(rows)})


def remap_uid(uid_map: UidMap, uid: str) -> str:
    return uid_map.remap(uid)
