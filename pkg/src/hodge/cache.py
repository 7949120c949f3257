"""Content-addressed disk cache of canonical-text payloads.

Layout: <dir>/index.json maps entry names to metadata; payloads live in
<dir>/<kind>/<hash>.txt.  Writes go to a temp file and are renamed into place.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from pathlib import Path

from .jetring import DiffPoly, JetRing, canonical_text, parse

ENV_VAR = "HODGE_CACHE_DIR"
FORMAT_VERSION = 1


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "hodge"


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def entry_hash(kind: str, key: dict) -> str:
    blob = json.dumps({"kind": kind, "key": key, "v": FORMAT_VERSION}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:24]


class Store:
    def __init__(self, root: str | os.PathLike | None = None):
        self.root = Path(root) if root is not None else default_cache_dir()

    # raw text entries
    def _path(self, kind: str, h: str) -> Path:
        return self.root / kind / f"{h}.txt"

    def get_text(self, kind: str, key: dict) -> str | None:
        p = self._path(kind, entry_hash(kind, key))
        if p.exists():
            return p.read_text(encoding="utf-8")
        return None

    def put_text(self, kind: str, key: dict, payload: str) -> None:
        h = entry_hash(kind, key)
        _atomic_write(self._path(kind, h), payload)
        idx_path = self.root / "index.json"
        try:
            index = json.loads(idx_path.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            index = {}
        index[f"{kind}/{h}"] = {"kind": kind, "key": key, "created_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())}
        _atomic_write(idx_path, json.dumps(index, indent=1, sort_keys=True))

    # DiffPoly helpers
    def get_poly(self, kind: str, key: dict, ring: JetRing) -> DiffPoly | None:
        t = self.get_text(kind, key)
        return None if t is None else parse(t, ring)

    def put_poly(self, kind: str, key: dict, poly: DiffPoly) -> None:
        text = canonical_text(poly)
        if parse(text, poly.ring) != poly:  # pragma: no cover - guarded by tests
            raise RuntimeError("payload does not round-trip")
        self.put_text(kind, key, text)

    # free energies
    def load_free_energy(self, g: int, ring: JetRing):
        from .free_energy import FreeEnergy

        t = self.get_text("free-energy", {"genus": g})
        if t is None:
            return None
        meta = self.get_text("free-energy-meta", {"genus": g})
        fit = json.loads(meta) if meta else {}
        return FreeEnergy(g, parse(t, ring), "fitted", fit)

    def save_free_energy(self, fe) -> None:
        self.put_text("free-energy", {"genus": fe.genus}, canonical_text(fe.poly))
        self.put_text("free-energy-meta", {"genus": fe.genus}, json.dumps(fe.fit, sort_keys=True))

    # oracle values
    def load_oracle(self) -> dict:
        p = self.root / "intersections.json"
        try:
            return json.loads(p.read_text(encoding="utf-8"))
        except (OSError, ValueError):
            return {}

    def save_oracle(self, data: dict) -> None:
        _atomic_write(self.root / "intersections.json", json.dumps(data, sort_keys=True, indent=0))
