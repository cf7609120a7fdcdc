"""Content-addressed blob store: one file per distinct byte sequence.

Layout: <data_root>/objects/<sha256 hex digest>. Identical uploads share one
object; rows in lecture_files reference objects by digest.
"""

from __future__ import annotations

import hashlib
import os
from pathlib import Path
from uuid import uuid4

from satep.errors import NotFound


class ObjectStore:
    def __init__(self, data_root: str | Path):
        self.root = Path(data_root) / "objects"
        self.root.mkdir(parents=True, exist_ok=True)

    def _path(self, digest: str) -> Path:
        return self.root / digest

    def put(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        target = self._path(digest)
        if not target.exists():
            # Write-then-rename keeps partially written objects invisible.
            tmp = self.root / f".tmp-{uuid4().hex}"
            tmp.write_bytes(data)
            os.replace(tmp, target)
        return digest

    def get(self, digest: str) -> bytes:
        try:
            return self._path(digest).read_bytes()
        except FileNotFoundError:
            raise NotFound(f"stored object {digest} does not exist") from None

    def exists(self, digest: str) -> bool:
        return self._path(digest).exists()

    def delete(self, digest: str) -> None:
        try:
            self._path(digest).unlink()
        except FileNotFoundError:
            pass

    def count(self) -> int:
        return sum(1 for p in self.root.iterdir() if not p.name.startswith("."))
