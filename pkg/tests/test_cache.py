from __future__ import annotations

import json

from hodge.cache import Store, default_cache_dir, entry_hash
from hodge.free_energy import FreeEnergy, free_energy
from hodge.hodge_recursion import HodgeRecursion
from hodge.jetring import parse


def test_hash_covers_kind_and_key():
    assert entry_hash("gf", {"genus": 2}) != entry_hash("flow", {"genus": 2})
    assert entry_hash("gf", {"genus": 2}) != entry_hash("gf", {"genus": 3})
    assert entry_hash("gf", {"a": 1, "b": 2}) == entry_hash("gf", {"b": 2, "a": 1})


def test_poly_round_trip_and_index(tmp_path, ring):
    st = Store(tmp_path)
    p = parse("(7/40)*s1^2*v2 - (1/1152)*v1^-2*v4 + (1)*L", ring)
    assert st.get_poly("hodge-stage", {"genus": 2}, ring) is None
    st.put_poly("hodge-stage", {"genus": 2}, p)
    assert st.get_poly("hodge-stage", {"genus": 2}, ring) == p
    index = json.loads((tmp_path / "index.json").read_text())
    (entry,) = index.values()
    assert entry["kind"] == "hodge-stage" and entry["key"] == {"genus": 2} and "created_at" in entry
    assert not list(tmp_path.rglob(".tmp-*"))


def test_corrupt_index_is_rebuilt(tmp_path):
    st = Store(tmp_path)
    (tmp_path / "index.json").write_text("{not json")
    st.put_text("flow", {"q": 1}, "payload")
    assert st.get_text("flow", {"q": 1}) == "payload"
    assert len(json.loads((tmp_path / "index.json").read_text())) == 1


def test_free_energy_persistence(tmp_path, ring):
    st = Store(tmp_path)
    fe = free_energy(3, ring, refit=True)
    st.save_free_energy(fe)
    back = st.load_free_energy(3, ring)
    assert isinstance(back, FreeEnergy) and back.poly == fe.poly and back.fit == fe.fit


def test_recursion_reads_cached_free_energies(tmp_path, ring):
    st = Store(tmp_path)
    fe = free_energy(3, ring, refit=True)
    st.save_free_energy(fe)
    rec = HodgeRecursion(ring, store=st)
    assert rec.F(3).poly == fe.poly


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv("HODGE_CACHE_DIR", str(tmp_path))
    assert default_cache_dir() == tmp_path
    assert Store().root == tmp_path
