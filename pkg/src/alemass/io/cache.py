"""Content-addressed cache of report bundles.

Keys are SHA-256 digests of the canonical scenario together with the package and
catalog versions, so changing either invalidates old entries.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional

from .. import __version__
from ..geom.catalog import CATALOG_VERSION
from .report import ReportBundle


def cache_key(canonical: Dict[str, Any]) -> str:
    payload = {
        "scenario": canonical,
        "version": __version__,
        "catalog_version": CATALOG_VERSION,
    }
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class BundleCache:
    def __init__(self, root: str | Path):
        self.root = Path(os.path.expanduser(str(root)))

    def path_for(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, key: str) -> Optional[ReportBundle]:
        p = self.path_for(key)
        if not p.exists():
            return None
        try:
            data = json.loads(p.read_text(encoding="utf-8"))
            bundle = ReportBundle.from_dict(data["bundle"])
        except (OSError, ValueError, KeyError, TypeError):
            # Unreadable entries are treated as misses and overwritten on the next put
            return None
        if data.get("digest") != bundle.digest():
            return None
        return bundle

    def put(self, key: str, bundle: ReportBundle) -> Path:
        """Write atomically: temp file in the cache directory, then os.replace."""
        self.root.mkdir(parents=True, exist_ok=True)
        record = {"digest": bundle.digest(), "bundle": bundle.to_dict()}
        payload = json.dumps(record, sort_keys=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{key[:12]}.", suffix=".tmp", dir=self.root)
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                f.write(payload)
            os.replace(tmp, self.path_for(key))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
        return self.path_for(key)
