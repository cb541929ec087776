"""Metadata directory: round trips, checksums, atomicity, fault injection."""

from __future__ import annotations

import numpy as np
import pytest

from milo import (
    CurriculumConfig,
    MetricConfig,
    build_plan,
    fnv1a64,
    is_preprocessed,
    load_metadata,
    store_metadata,
)
from milo.errors import (
    ChecksumMismatch,
    DirectoryNotEmptyWithoutForceFlag,
    InvalidHeader,
    MiloError,
    NotPreprocessed,
    VersionUnsupported,
)
from milo.store import MANIFEST_NAME, read_subset_file, write_subset_file

from .conftest import blob_dataset


def make_plan(seed=0, metric=MetricConfig("cosine"), n=40, c=3, k=8, T=12, R=2):
    dataset = blob_dataset(n, c, seed=seed)
    config = CurriculumConfig(k=k, T=T, R=R, seed=seed, metric=metric)
    return build_plan(dataset, config)


def dir_bytes(path):
    return {p.name: p.read_bytes() for p in sorted(path.iterdir())}


def test_fnv1a64_known_vectors():
    assert fnv1a64(b"") == 0xCBF29CE484222325
    assert fnv1a64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a64(b"foobar") == 0x85944171F73967E8


@pytest.mark.parametrize(
    "metric",
    [MetricConfig("cosine"), MetricConfig("dot"), MetricConfig("rbf", kw=0.7)],
    ids=lambda m: m.metric,
)
def test_round_trip_each_metric(tmp_path, metric):
    plan = make_plan(seed=4, metric=metric)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    assert is_preprocessed(meta)
    loaded = load_metadata(meta)
    assert loaded == plan
    assert loaded.provenance.scaling == plan.provenance.scaling


def test_store_twice_is_byte_identical(tmp_path):
    plan = make_plan(seed=6)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    before = dir_bytes(meta)
    store_metadata(meta, load_metadata(meta), force=True)
    assert dir_bytes(meta) == before


def test_force_flag_required_for_nonempty(tmp_path):
    plan = make_plan(seed=1)
    meta = tmp_path / "meta"
    meta.mkdir()
    (meta / "junk.txt").write_text("keep out")
    with pytest.raises(DirectoryNotEmptyWithoutForceFlag):
        store_metadata(meta, plan)
    store_metadata(meta, plan, force=True)
    assert is_preprocessed(meta)
    assert not (meta / "junk.txt").exists()


def test_missing_directory_not_preprocessed(tmp_path):
    assert not is_preprocessed(tmp_path / "nope")
    with pytest.raises(NotPreprocessed):
        load_metadata(tmp_path / "nope")


def test_every_payload_corruption_detected(tmp_path):
    plan = make_plan(seed=2)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    payloads = [p for p in meta.iterdir() if p.name != MANIFEST_NAME]
    assert payloads
    for victim in payloads:
        original = victim.read_bytes()
        corrupted = bytearray(original)
        corrupted[len(corrupted) // 2] ^= 0xFF
        victim.write_bytes(bytes(corrupted))
        assert not is_preprocessed(meta)
        with pytest.raises(ChecksumMismatch):
            load_metadata(meta)
        victim.write_bytes(original)
    assert is_preprocessed(meta)


def test_deleted_payload_detected(tmp_path):
    plan = make_plan(seed=3)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    victim = next(p for p in meta.iterdir() if p.name.endswith(".msub"))
    victim.unlink()
    assert not is_preprocessed(meta)
    with pytest.raises(NotPreprocessed):
        load_metadata(meta)


def test_unknown_format_version_rejected(tmp_path):
    plan = make_plan(seed=5)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    manifest = meta / MANIFEST_NAME
    text = manifest.read_text().replace("format_version = 1", "format_version = 9", 1)
    manifest.write_text(text)
    assert not is_preprocessed(meta)
    with pytest.raises(VersionUnsupported):
        load_metadata(meta)


def test_malformed_manifest_rejected(tmp_path):
    plan = make_plan(seed=5)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    manifest = meta / MANIFEST_NAME
    manifest.write_text("what even is this\n")
    assert not is_preprocessed(meta)
    with pytest.raises(NotPreprocessed):
        load_metadata(meta)


def test_interrupted_store_never_half_loads(tmp_path, monkeypatch):
    import pathlib

    old_plan = make_plan(seed=7, k=6)
    new_plan = make_plan(seed=8, k=6)
    real_replace = pathlib.Path.replace

    meta = tmp_path / "meta"
    store_metadata(meta, old_plan)

    calls = {"n": 0}

    def count_replace(self, target):
        calls["n"] += 1
        return real_replace(self, target)

    monkeypatch.setattr(pathlib.Path, "replace", count_replace)
    store_metadata(meta, new_plan, force=True)
    total_renames = calls["n"]
    monkeypatch.setattr(pathlib.Path, "replace", real_replace)

    assert total_renames > 1
    for fail_at in range(total_renames):
        scene = tmp_path / f"scene_{fail_at}"
        store_metadata(scene, old_plan)
        budget = {"left": fail_at}

        def failing_replace(self, target):
            budget["left"] -= 1
            if budget["left"] < 0:
                raise OSError("injected crash")
            return real_replace(self, target)

        monkeypatch.setattr(pathlib.Path, "replace", failing_replace)
        with pytest.raises(MiloError):
            store_metadata(scene, new_plan, force=True)
        monkeypatch.setattr(pathlib.Path, "replace", real_replace)

        # The directory either still loads the previous plan or fails cleanly.
        try:
            survivor = load_metadata(scene)
        except MiloError:
            continue
        assert survivor == old_plan


def test_subset_file_round_trip(tmp_path):
    path = tmp_path / "s.msub"
    subset = np.array([1, 5, 9, 200], dtype=np.int64)
    write_subset_file(path, subset)
    assert np.array_equal(read_subset_file(path), subset)
    with pytest.raises(InvalidHeader):
        write_subset_file(path, np.array([3, 2]))
    raw = bytearray(path.read_bytes())
    raw[0] = ord("X")
    path.write_bytes(bytes(raw))
    with pytest.raises(MiloError):
        read_subset_file(path)


def test_loaded_plan_serves_schedule(tmp_path):
    from milo import full_schedule

    plan = make_plan(seed=9)
    meta = tmp_path / "meta"
    store_metadata(meta, plan)
    loaded = load_metadata(meta)
    for (t1, a), (t2, b) in zip(full_schedule(plan), full_schedule(loaded)):
        assert t1 == t2 and np.array_equal(a, b)
