import json

import numpy as np
import pytest

from gmi import (
    Registry,
    ScoringStrategy,
    build_requirement,
    identification,
    serialize_spec,
)
from gmi.errors import (
    DuplicateModelError,
    EmptyRegistryError,
    SchemaMismatchError,
    StorageError,
    UnknownModelError,
    ValidationError,
)
from gmi.identification import cache_key


@pytest.fixture
def reg(tmp_path):
    return Registry(tmp_path / "reg")


@pytest.fixture
def loaded(reg, make_spec):
    ids = []
    for i in range(4):
        spec = make_spec(model_id=f"model-{i}", seed=100 + i,
                         download_count=5 * i)
        reg.submit_model(spec)
        ids.append(spec.model_id)
    return reg, ids


def sample_req(rng, image_dim=4, prompt_dim=3):
    return build_requirement(rng.normal(size=image_dim),
                             rng.normal(size=prompt_dim))


class TestCrud:
    def test_submit_get_list(self, loaded, make_spec):
        reg, ids = loaded
        assert len(reg) == 4
        assert reg.model_ids() == ids
        got = reg.get_spec("model-2")
        assert got.model_id == "model-2"
        rows = reg.list_models()
        assert [r["model_id"] for r in rows] == ids
        assert rows[3]["download_count"] == 15
        assert rows[0]["n_samples"] == 8

    def test_created_at_stamped_on_submit(self, reg, make_spec):
        spec = make_spec()
        assert spec.created_at is None
        reg.submit_model(spec)
        stored = reg.get_spec(spec.model_id)
        assert stored.created_at is not None
        assert stored.created_at.startswith("20")
        # the caller's instance stays untouched
        assert spec.created_at is None

    def test_duplicate_rejected(self, reg, make_spec):
        reg.submit_model(make_spec())
        with pytest.raises(DuplicateModelError):
            reg.submit_model(make_spec())

    def test_replace_bumps_version(self, reg, make_spec):
        reg.submit_model(make_spec(download_count=1))
        reg.submit_model(make_spec(download_count=2), replace=True)
        assert reg.get_spec("model-a").download_count == 2
        manifest = json.loads((reg.root / "manifest.json").read_text())
        row = manifest["models"][0]
        assert row["version"] == 2
        assert row["file"].endswith("-v2.json")
        spec_files = list((reg.root / "specs").glob("*.json"))
        assert len(spec_files) == 1

    def test_remove(self, loaded):
        reg, ids = loaded
        reg.remove_model("model-1")
        assert len(reg) == 3
        assert "model-1" not in reg.model_ids()
        with pytest.raises(UnknownModelError):
            reg.get_spec("model-1")
        with pytest.raises(UnknownModelError):
            reg.remove_model("model-1")

    def test_unknown_model_is_key_error(self, reg):
        with pytest.raises(KeyError):
            reg.get_spec("ghost")

    def test_spec_document_bytes_match_canonical_form(self, loaded):
        reg, ids = loaded
        doc = reg.spec_document("model-0")
        assert doc == serialize_spec(reg.get_spec("model-0"))

    def test_no_temp_files_left_behind(self, loaded):
        reg, _ = loaded
        leftovers = list(reg.root.rglob("*.tmp"))
        assert leftovers == []


class TestSchema:
    def test_dims_fixed_by_first_spec(self, reg, make_spec):
        reg.submit_model(make_spec())
        assert reg.schema == (4, 3)
        with pytest.raises(SchemaMismatchError):
            reg.submit_model(make_spec(model_id="other", image_dim=5))
        with pytest.raises(SchemaMismatchError):
            reg.submit_model(make_spec(model_id="other", prompt_dim=2))

    def test_schema_resets_when_emptied(self, reg, make_spec):
        reg.submit_model(make_spec())
        reg.remove_model("model-a")
        assert reg.schema == (None, None)
        reg.submit_model(make_spec(model_id="wide", image_dim=9, prompt_dim=5))
        assert reg.schema == (9, 5)

    def test_requirement_dims_checked(self, loaded, rng):
        reg, _ = loaded
        bad = build_requirement(rng.normal(size=9), rng.normal(size=3))
        with pytest.raises(SchemaMismatchError):
            reg.identify(bad, ScoringStrategy("weighted"))
        # the requirement-blind baseline never reads the embeddings
        r = reg.identify(bad, ScoringStrategy("download"))
        assert len(r) == 4


class TestDurability:
    def test_reload_round_trips_specs(self, loaded, tmp_path):
        reg, ids = loaded
        again = Registry(reg.root)
        assert again.model_ids() == ids
        assert again.schema == reg.schema
        for mid in ids:
            assert again.get_spec(mid) == reg.get_spec(mid)

    def test_reload_preserves_distances_bit_for_bit(self, loaded, rng):
        reg, _ = loaded
        req = sample_req(rng)
        strat = ScoringStrategy("weighted")
        before = [(e.model_id, e.distance) for e in reg.identify(req, strat)]
        after_reg = Registry(reg.root)
        after = [(e.model_id, e.distance) for e in after_reg.identify(req, strat)]
        assert before == after

    def test_bad_manifest_format(self, tmp_path):
        root = tmp_path / "reg"
        Registry(root)
        manifest = json.loads((root / "manifest.json").read_text())
        manifest["format_version"] = 99
        (root / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(StorageError):
            Registry(root)

    def test_manifest_spec_mismatch_detected(self, reg, make_spec, tmp_path):
        reg.submit_model(make_spec(model_id="honest"))
        reg.submit_model(make_spec(model_id="other", seed=9))
        manifest = json.loads((reg.root / "manifest.json").read_text())
        files = {m["model_id"]: m["file"] for m in manifest["models"]}
        manifest["models"][0]["file"] = files["other"]
        manifest["models"][0]["model_id"] = "honest"
        (reg.root / "manifest.json").write_text(json.dumps(manifest))
        with pytest.raises(StorageError):
            Registry(reg.root)


class TestIdentify:
    def test_empty_registry(self, reg, rng):
        with pytest.raises(EmptyRegistryError):
            reg.identify(sample_req(rng), ScoringStrategy("weighted"))

    @pytest.mark.parametrize("strat", [
        ScoringStrategy("weighted"),
        ScoringStrategy("rkme-embed"),
        ScoringStrategy("rkme-embed", reduced_size=None),
        ScoringStrategy("download"),
    ])
    def test_matches_library_identify_bit_for_bit(self, loaded, rng, strat):
        reg, _ = loaded
        req = sample_req(rng)
        via_registry = reg.identify(req, strat)
        direct = identification.identify(reg.specs(), req, strat)
        assert [(e.model_id, e.distance, e.rank) for e in via_registry] == \
            [(e.model_id, e.distance, e.rank) for e in direct]

    def test_k_truncates_but_keeps_ranks(self, loaded, rng):
        reg, _ = loaded
        req = sample_req(rng)
        full = reg.identify(req, ScoringStrategy("weighted"))
        top2 = reg.identify(req, ScoringStrategy("weighted"), k=2)
        assert len(top2) == 2
        assert [(e.model_id, e.rank) for e in top2.entries] == \
            [(e.model_id, e.rank) for e in full.entries[:2]]

    @pytest.mark.parametrize("k", [0, 5])
    def test_k_bounds(self, loaded, rng, k):
        reg, _ = loaded
        with pytest.raises(ValidationError):
            reg.identify(sample_req(rng), ScoringStrategy("weighted"), k=k)

    def test_eager_caches_present_after_submit(self, loaded):
        reg, ids = loaded
        wkey = cache_key(ScoringStrategy("weighted"))
        ekey = cache_key(ScoringStrategy("rkme-embed"))
        for mid in ids:
            assert wkey in reg._caches[mid]
            assert ekey in reg._caches[mid]

    def test_replace_invalidates_caches(self, reg, make_spec, rng):
        reg.submit_model(make_spec(seed=1, download_count=0))
        req = sample_req(rng)
        d1 = reg.identify(req, ScoringStrategy("weighted")).entries[0].distance
        reg.submit_model(make_spec(seed=2, download_count=0), replace=True)
        d2 = reg.identify(req, ScoringStrategy("weighted")).entries[0].distance
        assert d1 != d2


class TestAudit:
    def test_audit_trail_is_jsonl(self, loaded, rng):
        reg, _ = loaded
        reg.identify(sample_req(rng), ScoringStrategy("weighted"))
        reg.remove_model("model-3")
        lines = (reg.root / "audit.log").read_text().strip().split("\n")
        events = [json.loads(line) for line in lines]
        kinds = [e["event"] for e in events]
        assert kinds.count("submit") == 4
        assert "identify" in kinds
        assert kinds[-1] == "remove"
        for e in events:
            assert "ts" in e
