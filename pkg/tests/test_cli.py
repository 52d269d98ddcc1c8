from __future__ import annotations

import json
import subprocess
import sys

import pytest

from edkit import DescriptionMap, EDInstance, MentionSpan, write_dataset
from edkit.cli import main


DESCRIPTIONS = {
    "Ronaldo": "Brazilian association football player",
    "Cristiano Ronaldo": "Portoguese association football player",
    "Portugal": "country in southwestern Europe",
}

INSTANCES = [
    EDInstance(
        "d#0",
        "Ronaldo scored two goals for Portugal",
        MentionSpan(0, 7),
        ("Ronaldo", "Cristiano Ronaldo"),
        "Cristiano Ronaldo",
    ),
    EDInstance(
        "d#1",
        "Ronaldo scored two goals for Portugal",
        MentionSpan(29, 37),
        ("Portugal", "Portugal national football team"),
        "Portugal",
    ),
    EDInstance(
        "d#2",
        "the final whistle blew in Lisbon",
        MentionSpan(26, 32),
        ("Lisbon", "Lisbon Region"),
        "Lisbon",
    ),
]


@pytest.fixture
def workspace(tmp_path):
    descriptions = tmp_path / "descriptions.tsv"
    DescriptionMap(dict(DESCRIPTIONS), dump_date="2022-06-13").save_tsv(descriptions)
    dataset = tmp_path / "testset.jsonl"
    with open(dataset, "w", encoding="utf-8") as out:
        write_dataset(INSTANCES, out)
    return tmp_path


def dataset_path(workspace):
    return str(workspace / "testset.jsonl")


def descriptions_path(workspace):
    return str(workspace / "descriptions.tsv")


def run_decode(workspace, out_name, *extra):
    out = workspace / out_name
    code = main(
        [
            "decode",
            "--dataset", dataset_path(workspace),
            "--descriptions", descriptions_path(workspace),
            "--out", str(out),
            *extra,
        ]
    )
    return code, out


def read_jsonl(path):
    with open(path, "r", encoding="utf-8") as src:
        return [json.loads(line) for line in src]


def write_predictions(workspace, name, rows):
    path = workspace / name
    with open(path, "w", encoding="utf-8") as out:
        for row in rows:
            out.write(json.dumps(row) + "\n")
    return str(path)


def test_no_command_is_usage_error(capsys):
    assert main([]) == 1
    assert "error:" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(capsys):
    assert main(["stats", "--dataset", "x", "--descriptions", "y", "--nope"]) == 1


def test_missing_input_file_is_usage_error(workspace, capsys):
    code = main(
        ["stats", "--dataset", str(workspace / "nope.jsonl"), "--descriptions", descriptions_path(workspace)]
    )
    assert code == 1
    assert "file not found" in capsys.readouterr().err


def test_ingest_writes_tsv_and_prints_counts(tmp_path, capsys):
    entities = [
        {"id": "Q1", "sitelinks": {"enwiki": {"title": "Ronaldo"}},
         "descriptions": {"en": {"value": "Brazilian association football player"}}},
        {"id": "Q2", "sitelinks": {"enwiki": {"title": "Portugal"}},
         "descriptions": {"en": {"value": "country in southwestern Europe"}}},
        {"id": "Q3"},
    ]
    lines = ["["] + [json.dumps(e) + "," for e in entities[:-1]] + [json.dumps(entities[-1]), "]"]
    dump = tmp_path / "wikidata-20220613-all.json"
    dump.write_text("\n".join(lines), encoding="utf-8")
    out = tmp_path / "descriptions.tsv"

    assert main(["ingest-wikidata", "--dump", str(dump), "--out", str(out)]) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["entities_scanned"] == 3
    assert stats["emitted"] == 2
    header = out.read_text(encoding="utf-8").splitlines()[0]
    assert header == "# edkit-descriptions lang=en date=2022-06-13 entries=2"


def test_stats_reports_dataset_summary(workspace, capsys):
    code = main(
        ["stats", "--dataset", dataset_path(workspace), "--descriptions", descriptions_path(workspace)]
    )
    assert code == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["instances"] == 3
    assert stats["candidates_total"] == 6
    # Titles outside the description TSV fall back to title-only surfaces.
    assert stats["failures_total"] == 3


def test_stats_output_is_byte_stable(workspace, capsys):
    argv = ["stats", "--dataset", dataset_path(workspace), "--descriptions", descriptions_path(workspace)]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_decode_oracle_recovers_gold_and_evaluates_perfectly(workspace, capsys):
    code, out = run_decode(workspace, "pred.jsonl", "--mode", "generative", "--scorer", "oracle")
    assert code == 0
    rows = read_jsonl(out)
    assert [row["id"] for row in rows] == ["d#0", "d#1", "d#2"]
    for row, inst in zip(rows, INSTANCES):
        assert row["predicted"] == inst.gold
        assert all(isinstance(t, str) and isinstance(s, (int, float)) for t, s in row["scores"])

    code = main(["evaluate", "--predictions", str(out), "--gold", dataset_path(workspace)])
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert report["datasets"][0]["f1"] == 1.0


def test_decode_extractive_overlap(workspace):
    code, out = run_decode(workspace, "pred.jsonl", "--mode", "extractive", "--scorer", "overlap")
    assert code == 0
    for row, inst in zip(read_jsonl(out), INSTANCES):
        assert row["predicted"] in inst.candidates


def test_decode_extractive_oracle_with_budget(workspace):
    code, out = run_decode(
        workspace, "pred.jsonl", "--mode", "extractive", "--scorer", "oracle", "--budget", "64"
    )
    assert code == 0
    for row, inst in zip(read_jsonl(out), INSTANCES):
        assert row["predicted"] == inst.gold


def test_decode_jobs_do_not_change_output(workspace):
    _, serial = run_decode(workspace, "serial.jsonl", "--mode", "generative", "--scorer", "ngram")
    _, threaded = run_decode(
        workspace, "threaded.jsonl", "--mode", "generative", "--scorer", "ngram", "--jobs", "3"
    )
    assert serial.read_bytes() == threaded.read_bytes()


def test_decode_missing_gold_becomes_abstention(workspace, capsys):
    unlabeled = workspace / "unlabeled.jsonl"
    with open(unlabeled, "w", encoding="utf-8") as out:
        write_dataset(
            [EDInstance("u#0", "Ronaldo plays", MentionSpan(0, 7), ("Ronaldo",))], out
        )
    out = workspace / "pred.jsonl"
    code = main(
        [
            "decode", "--mode", "generative", "--scorer", "oracle",
            "--dataset", str(unlabeled),
            "--descriptions", descriptions_path(workspace),
            "--out", str(out),
        ]
    )
    assert code == 0
    (row,) = read_jsonl(out)
    assert row == {"id": "u#0", "predicted": None, "scores": []}
    assert "warning: u#0" in capsys.readouterr().err


@pytest.mark.parametrize(
    "extra",
    [
        ("--mode", "extractive", "--scorer", "ngram"),
        ("--mode", "generative", "--scorer", "overlap"),
        ("--mode", "generative", "--scorer", "ngram", "--budget", "5"),
        ("--mode", "extractive", "--scorer", "overlap", "--beam", "2"),
        ("--mode", "generative", "--scorer", "ngram", "--beam", "0"),
        ("--mode", "generative", "--scorer", "ngram", "--jobs", "0"),
        ("--mode", "generative", "--scorer", "bridge"),
    ],
)
def test_decode_rejects_bad_flag_combinations(workspace, extra, capsys):
    code, _ = run_decode(workspace, "pred.jsonl", *extra)
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_decode_malformed_dataset_is_runtime_error(workspace, capsys):
    bad = workspace / "bad.jsonl"
    bad.write_text("{not json\n", encoding="utf-8")
    out = workspace / "pred.jsonl"
    code = main(
        [
            "decode", "--mode", "generative", "--scorer", "ngram",
            "--dataset", str(bad),
            "--descriptions", descriptions_path(workspace),
            "--out", str(out),
        ]
    )
    assert code == 2


def test_evaluate_multiple_datasets_with_ood_and_train(workspace, capsys):
    second = workspace / "webset.jsonl"
    with open(second, "w", encoding="utf-8") as out:
        write_dataset(
            [EDInstance("w#0", "Portugal won", MentionSpan(0, 8), ("Portugal",), "Portugal")], out
        )
    train = workspace / "train.jsonl"
    with open(train, "w", encoding="utf-8") as out:
        write_dataset(INSTANCES, out)
    pred_a = write_predictions(
        workspace, "a.jsonl",
        [{"id": "d#0", "predicted": "Cristiano Ronaldo"},
         {"id": "d#1", "predicted": "Portugal"},
         {"id": "d#2", "predicted": None}],
    )
    pred_b = write_predictions(workspace, "b.jsonl", [{"id": "w#0", "predicted": "Portugal"}])

    code = main(
        [
            "evaluate",
            "--predictions", pred_a, "--gold", dataset_path(workspace),
            "--predictions", pred_b, "--gold", str(second),
            "--ood", "webset",
            "--train", str(train),
        ]
    )
    assert code == 0
    report = json.loads(capsys.readouterr().out)
    assert [d["name"] for d in report["datasets"]] == ["testset", "webset"]
    assert report["avg_ood"] == 1.0
    assert {c["name"] for c in report["frequency_classes"]} == {"MFC", "LFC", "UE", "UEM", "UM"}


def test_evaluate_pair_count_mismatch(workspace, capsys):
    pred = write_predictions(workspace, "a.jsonl", [{"id": "d#0", "predicted": None}])
    code = main(
        [
            "evaluate",
            "--predictions", pred,
            "--gold", dataset_path(workspace), "--gold", dataset_path(workspace),
        ]
    )
    assert code == 1


def test_evaluate_rejects_unknown_ood_name(workspace, capsys):
    pred = write_predictions(
        workspace, "a.jsonl", [{"id": inst.id, "predicted": inst.gold} for inst in INSTANCES]
    )
    code = main(
        ["evaluate", "--predictions", pred, "--gold", dataset_path(workspace), "--ood", "zzz"]
    )
    assert code == 1
    assert "zzz" in capsys.readouterr().err


def test_evaluate_duplicate_prediction_id_is_runtime_error(workspace, capsys):
    pred = write_predictions(
        workspace, "a.jsonl",
        [{"id": "d#0", "predicted": "Ronaldo"}, {"id": "d#0", "predicted": "Ronaldo"}],
    )
    code = main(["evaluate", "--predictions", pred, "--gold", dataset_path(workspace)])
    assert code == 2


def test_compare_identical_predictions(workspace, capsys):
    rows = [{"id": inst.id, "predicted": inst.gold} for inst in INSTANCES]
    pred_a = write_predictions(workspace, "a.jsonl", rows)
    pred_b = write_predictions(workspace, "b.jsonl", rows)
    code = main(["compare", "--a", pred_a, "--b", pred_b, "--gold", dataset_path(workspace)])
    assert code == 0
    result = json.loads(capsys.readouterr().out)
    assert result["b"] == 0 and result["c"] == 0
    assert result["p_value"] == 1.0
    assert result["significant"] is False


def test_compare_exact_method(workspace, capsys):
    pred_a = write_predictions(
        workspace, "a.jsonl", [{"id": inst.id, "predicted": inst.gold} for inst in INSTANCES]
    )
    pred_b = write_predictions(
        workspace, "b.jsonl", [{"id": inst.id, "predicted": None} for inst in INSTANCES]
    )
    code = main(
        ["compare", "--a", pred_a, "--b", pred_b, "--gold", dataset_path(workspace), "--method", "exact"]
    )
    assert code == 0
    result = json.loads(capsys.readouterr().out)
    assert result["method"] == "exact-binomial"
    assert result["b"] == 3 and result["c"] == 0


def test_rep_stats_modes(workspace, capsys):
    def run(mode):
        code = main(
            [
                "rep-stats",
                "--dataset", dataset_path(workspace),
                "--descriptions", descriptions_path(workspace),
                "--mode", mode,
            ]
        )
        assert code == 0
        return json.loads(capsys.readouterr().out)

    title_only = run("title-only")
    with_description = run("with-description")
    assert title_only["mode"] == "title-only"
    assert with_description["mean"] >= title_only["mean"]
    assert set(with_description) == {"mode", "mean", "p99"}


def test_console_script_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "edkit.cli"], capture_output=True, text=True
    )
    assert proc.returncode == 1
    assert "error:" in proc.stderr
