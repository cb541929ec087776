"""Command-line interface: exit codes, output formats, API agreement."""

from __future__ import annotations

import struct
import subprocess
import sys

import numpy as np
import pytest

from milo import (
    CurriculumConfig,
    MetricConfig,
    build_plan,
    load_metadata,
    subset_for_epoch,
    write_embeddings,
    write_labels,
)
from milo.cli import main
from milo.store import read_subset_file, write_subset_file

from .conftest import blob_dataset, three_point_embeddings


@pytest.fixture(scope="module")
def dataset_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli_data")
    dataset = blob_dataset(48, 3, seed=21)
    emb = root / "e.memb"
    lbl = root / "l.mlbl"
    write_embeddings(emb, dataset.embeddings)
    write_labels(lbl, dataset.labels)
    return dataset, emb, lbl


@pytest.fixture(scope="module")
def preprocessed(dataset_files, tmp_path_factory):
    dataset, emb, lbl = dataset_files
    meta = tmp_path_factory.mktemp("cli_meta") / "meta"
    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(meta),
            "--size", "9",
            "--epochs", "12",
            "--r", "2",
            "--seed", "5",
        ]
    )
    assert rc == 0
    return dataset, meta


def test_preprocess_summary_and_api_agreement(preprocessed, capsys):
    dataset, meta = preprocessed
    config = CurriculumConfig(k=9, T=12, R=2, seed=5, metric=MetricConfig("cosine"))
    plan = build_plan(dataset, config)
    loaded = load_metadata(meta)
    assert loaded == plan
    for epoch in range(12):
        rc = main(["sample", "--meta", str(meta), "--epoch", str(epoch)])
        assert rc == 0
        lines = capsys.readouterr().out.split()
        assert [int(v) for v in lines] == [int(v) for v in subset_for_epoch(plan, epoch)]


def test_sample_msub_format(preprocessed, capsysbinary):
    _, meta = preprocessed
    rc = main(["sample", "--meta", str(meta), "--epoch", "3", "--format", "msub"])
    assert rc == 0
    raw = capsysbinary.readouterr().out
    assert raw[:4] == b"MSUB"
    plan = load_metadata(meta)
    count = struct.unpack_from("<Q", raw, 8)[0]
    payload = np.frombuffer(raw, dtype="<u4", offset=16)
    assert count == len(payload) == 9
    assert np.array_equal(payload.astype(np.int64), subset_for_epoch(plan, 3))


def test_sample_epoch_out_of_range(preprocessed, capsys):
    _, meta = preprocessed
    rc = main(["sample", "--meta", str(meta), "--epoch", "12"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "error: EpochOutOfRange" in err


def test_schedule_text_and_msub(preprocessed, tmp_path, capsys):
    _, meta = preprocessed
    plan = load_metadata(meta)
    text_out = tmp_path / "sched.txt"
    rc = main(["schedule", "--meta", str(meta), "--out", str(text_out), "--format", "text"])
    assert rc == 0
    lines = text_out.read_text().splitlines()
    assert len(lines) == 12
    for epoch, line in enumerate(lines):
        tag, _, indices = line.partition("\t")
        assert int(tag) == epoch
        assert [int(v) for v in indices.split()] == [
            int(v) for v in subset_for_epoch(plan, epoch)
        ]

    bin_out = tmp_path / "sched.msub"
    rc = main(["schedule", "--meta", str(meta), "--out", str(bin_out), "--format", "msub"])
    assert rc == 0
    blob = bin_out.read_bytes()
    cursor = 0
    for epoch in range(12):
        (tag,) = struct.unpack_from("<Q", blob, cursor)
        assert tag == epoch
        cursor += 8
        (count,) = struct.unpack_from("<Q", blob, cursor + 8)
        record = blob[cursor : cursor + 16 + 4 * count]
        payload = np.frombuffer(record, dtype="<u4", offset=16).astype(np.int64)
        assert np.array_equal(payload, subset_for_epoch(plan, epoch))
        cursor += len(record)
    assert cursor == len(blob)

    rerun = tmp_path / "sched2.msub"
    main(["schedule", "--meta", str(meta), "--out", str(rerun), "--format", "msub"])
    assert rerun.read_bytes() == blob
    capsys.readouterr()


def test_fraction_size_rules(dataset_files, tmp_path, capsys):
    dataset, emb, lbl = dataset_files
    meta = tmp_path / "meta_frac"
    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(meta),
            "--fraction", "0.25",
            "--epochs", "6",
        ]
    )
    assert rc == 0
    assert load_metadata(meta).config.k == 12  # floor(0.25 * 48)

    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(tmp_path / "x"),
            "--fraction", "0.5",
            "--size", "3",
            "--epochs", "6",
        ]
    )
    assert rc == 2  # mutually exclusive

    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(tmp_path / "y"),
            "--fraction", "1.5",
            "--epochs", "6",
        ]
    )
    err = capsys.readouterr().err
    assert rc == 2
    assert "fraction" in err


def test_missing_labels_file_exit_2(dataset_files, tmp_path, capsys):
    _, emb, _ = dataset_files
    ghost = tmp_path / "ghost.mlbl"
    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(ghost),
            "--out", str(tmp_path / "meta"),
            "--size", "4",
            "--epochs", "6",
        ]
    )
    err = capsys.readouterr().err
    assert rc == 2
    assert str(ghost) in err


def test_nonempty_out_requires_force(dataset_files, tmp_path, capsys):
    _, emb, lbl = dataset_files
    out = tmp_path / "meta"
    out.mkdir()
    (out / "preexisting").write_text("x")
    argv = [
        "preprocess",
        "--embeddings", str(emb),
        "--labels", str(lbl),
        "--out", str(out),
        "--size", "4",
        "--epochs", "6",
    ]
    rc = main(argv)
    assert rc == 3
    assert "DirectoryNotEmptyWithoutForceFlag" in capsys.readouterr().err
    rc = main(argv + ["--force"])
    assert rc == 0
    capsys.readouterr()


def test_invalid_metric_rejected(dataset_files, tmp_path, capsys):
    _, emb, lbl = dataset_files
    rc = main(
        [
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(tmp_path / "meta"),
            "--size", "4",
            "--epochs", "6",
            "--metric", "hamming",
        ]
    )
    assert rc == 2
    capsys.readouterr()


@pytest.fixture()
def tiny_embedding_file(tmp_path):
    path = tmp_path / "three.memb"
    write_embeddings(path, three_point_embeddings())
    return path


def test_eval_prints_facility_location_value(tiny_embedding_file, tmp_path, capsys):
    subset_path = tmp_path / "s.msub"
    write_subset_file(subset_path, np.array([1, 2]))
    rc = main(
        [
            "eval",
            "--embeddings", str(tiny_embedding_file),
            "--subset", str(subset_path),
            "--function", "facility_location",
        ]
    )
    out = capsys.readouterr().out.strip()
    assert rc == 0
    assert abs(float(out) - 2.9) < 1e-6


def test_oracle_reports_exact_optimum(tiny_embedding_file, capsys):
    rc = main(
        [
            "oracle",
            "--embeddings", str(tiny_embedding_file),
            "--size", "2",
            "--function", "facility_location",
        ]
    )
    out = capsys.readouterr().out
    assert rc == 0
    fields = dict(
        line.split(" = ", 1) for line in out.strip().splitlines() if " = " in line
    )
    assert abs(float(fields["optimum_value"]) - 2.9) < 1e-6
    assert abs(float(fields["greedy_value"]) - 2.9) < 1e-6
    assert float(fields["greedy_ratio"]) == pytest.approx(1.0, abs=1e-6)
    assert fields["optimum_subset"].split() in (["0", "2"], ["1", "2"])


def test_oracle_cap_exit_4(tmp_path, capsys):
    dataset = blob_dataset(48, 2, seed=3)
    emb = tmp_path / "big.memb"
    write_embeddings(emb, dataset.embeddings)
    rc = main(
        [
            "oracle",
            "--embeddings", str(emb),
            "--size", "24",
            "--function", "graph_cut",
        ]
    )
    err = capsys.readouterr().err
    assert rc == 4
    assert "InstanceTooLarge" in err


def test_entry_point_subprocess(dataset_files, tmp_path):
    _, emb, lbl = dataset_files
    meta = tmp_path / "meta"
    run = subprocess.run(
        [
            sys.executable, "-m", "milo.cli",
            "preprocess",
            "--embeddings", str(emb),
            "--labels", str(lbl),
            "--out", str(meta),
            "--size", "6",
            "--epochs", "4",
        ],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    assert "preprocess summary" in run.stdout
    sample = subprocess.run(
        [sys.executable, "-m", "milo.cli", "sample", "--meta", str(meta), "--epoch", "0"],
        capture_output=True,
        text=True,
    )
    assert sample.returncode == 0
    assert len(sample.stdout.split()) == 6


def test_unreadable_subset_file_exit_2(tiny_embedding_file, tmp_path, capsys):
    rc = main(
        [
            "eval",
            "--embeddings", str(tiny_embedding_file),
            "--subset", str(tmp_path / "absent.msub"),
            "--function", "disparity_sum",
        ]
    )
    err = capsys.readouterr().err
    assert rc == 2
    assert "absent.msub" in err
