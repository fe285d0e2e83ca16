import json

import pytest

from helpers import oracle_predictions
from nlu2qa.cli import main
from nlu2qa.convert import parse_squad
from nlu2qa.score import dumps_predictions


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def summary_fields(stdout):
    line = stdout.strip().splitlines()[-1]
    fields = {}
    for part in line.split():
        key, _, value = part.partition("=")
        fields[key] = value.strip("'")
    return fields


def test_convert_bio_toy(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    out = tmp_path / "corpus.json"
    code, stdout, _ = run(
        capsys,
        "convert",
        "--input", str(toy_bio_file),
        "--input-format", "bio",
        "--catalog", str(toy_catalog_file),
        "--out", str(out),
    )
    assert code == 0
    fields = summary_fields(stdout)
    assert fields["status"] == "ok"
    assert fields["items"] == "5"
    assert fields["answerable"] == "3"
    assert fields["impossible"] == "2"
    corpus = parse_squad(out.read_text(encoding="utf-8"))
    assert corpus.item_count() == 5


def test_convert_is_byte_reproducible(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        code, _, _ = run(
            capsys,
            "convert",
            "--input", str(toy_bio_file),
            "--input-format", "bio",
            "--catalog", str(toy_catalog_file),
            "--out", str(out),
            "--title", "fixed",
        )
        assert code == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_convert_span_no_prev_turn(tmp_path, capsys, toy_span_file, tmp_path_factory):
    catalog = tmp_path / "catalog.json"
    catalog.write_text(
        json.dumps({"slot_question_templates": ["what {} was mentioned?"]}),
        encoding="utf-8",
    )
    with_frame = tmp_path / "with_frame.json"
    code, _, _ = run(
        capsys,
        "convert",
        "--input", str(toy_span_file),
        "--input-format", "span",
        "--catalog", str(catalog),
        "--out", str(with_frame),
    )
    assert code == 0
    contexts = [p.context for p in parse_squad(with_frame.read_text(encoding="utf-8")).iter_paragraphs()]
    assert contexts[0] == "the system asked about people. for four people"

    without = tmp_path / "without.json"
    code, _, _ = run(
        capsys,
        "convert",
        "--input", str(toy_span_file),
        "--input-format", "span",
        "--catalog", str(catalog),
        "--out", str(without),
        "--no-prev-turn",
    )
    assert code == 0
    contexts = [p.context for p in parse_squad(without.read_text(encoding="utf-8")).iter_paragraphs()]
    assert contexts == ["for four people", "any time after noon works"]


def test_convert_missing_catalog_errors(tmp_path, capsys, toy_bio_file):
    code, _, stderr = run(
        capsys,
        "convert",
        "--input", str(toy_bio_file),
        "--input-format", "bio",
        "--catalog", str(tmp_path / "nope.json"),
        "--out", str(tmp_path / "out.json"),
    )
    assert code == 1
    assert stderr.startswith("error=")
    assert "nope.json" in stderr
    assert not (tmp_path / "out.json").exists()


def test_convert_with_intent_inventory(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    inventory = tmp_path / "intents.txt"
    inventory.write_text("inform\nrequest\n", encoding="utf-8")
    out = tmp_path / "corpus.json"
    # providing an inventory implies --intents
    code, stdout, _ = run(
        capsys,
        "convert",
        "--input", str(toy_bio_file),
        "--input-format", "bio",
        "--catalog", str(toy_catalog_file),
        "--out", str(out),
        "--intent-inventory", str(inventory),
    )
    assert code == 0
    assert summary_fields(stdout)["items"] == "7"


def test_sample_uniform_deterministic_manifest(tmp_path, capsys, toy_span_file):
    manifests = []
    for name in ("m1.json", "m2.json"):
        out = tmp_path / ("out_" + name)
        manifest = tmp_path / name
        code, _, _ = run(
            capsys,
            "sample",
            "--strategy", "uniform",
            "--n", "1",
            "--seed", "1",
            "--input", str(toy_span_file),
            "--input-format", "span",
            "--out", str(out),
            "--manifest", str(manifest),
        )
        assert code == 0
        manifests.append(manifest.read_bytes())
    assert manifests[0] == manifests[1]


def test_sample_per_slot_manifest_coverage(tmp_path, capsys, toy_span_file):
    out = tmp_path / "sampled.json"
    code, stdout, _ = run(
        capsys,
        "sample",
        "--strategy", "per-slot",
        "--n", "1",
        "--seed", "3",
        "--input", str(toy_span_file),
        "--input-format", "span",
        "--out", str(out),
    )
    assert code == 0
    manifest = json.loads((tmp_path / "sampled.json.manifest.json").read_text(encoding="utf-8"))
    assert all(count >= 1 for count in manifest["label_counts"]["slots"].values())
    assert set(manifest["label_counts"]["slots"]) == {"people", "time"}


def test_sample_bio_round_trips_format(tmp_path, capsys, toy_bio_file):
    out = tmp_path / "sampled.bio"
    code, _, _ = run(
        capsys,
        "sample",
        "--strategy", "uniform",
        "--n", "1",
        "--seed", "5",
        "--input", str(toy_bio_file),
        "--input-format", "bio",
        "--out", str(out),
    )
    assert code == 0
    assert out.read_text(encoding="utf-8") == toy_bio_file.read_text(encoding="utf-8")


def test_sample_unsatisfiable_quota_errors(tmp_path, capsys):
    bio = tmp_path / "intents.bio"
    bio.write_text(
        "#id r1\n#intent i1\na\tO\n\n"
        "#id r2\n#intent i1\nb\tO\n\n"
        "#id r3\n#intent i1,i2\nc\tO\n",
        encoding="utf-8",
    )
    code, _, stderr = run(
        capsys,
        "sample",
        "--strategy", "per-intent",
        "--n", "2",
        "--seed", "1",
        "--input", str(bio),
        "--input-format", "bio",
        "--out", str(tmp_path / "never.json"),
    )
    assert code == 1
    assert "error=" in stderr and "i2" in stderr
    assert not (tmp_path / "never.json").exists()


def test_merge_and_inspect(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    first = tmp_path / "first.json"
    run(
        capsys,
        "convert",
        "--input", str(toy_bio_file), "--input-format", "bio",
        "--catalog", str(toy_catalog_file), "--out", str(first),
    )
    second_bio = tmp_path / "second.bio"
    second_bio.write_text("#id other\n#intent\nhello\tO\n", encoding="utf-8")
    second = tmp_path / "second.json"
    run(
        capsys,
        "convert",
        "--input", str(second_bio), "--input-format", "bio",
        "--catalog", str(toy_catalog_file), "--out", str(second),
    )

    merged = tmp_path / "merged.json"
    code, stdout, _ = run(
        capsys, "merge", "--base", str(first), "--add", str(second), "--out", str(merged)
    )
    assert code == 0
    fields = summary_fields(stdout)
    assert (fields["base_items"], fields["added_items"], fields["total_items"]) == ("5", "5", "10")

    code, stdout, _ = run(capsys, "inspect", "--corpus", str(merged), "--limit", "1")
    assert code == 0
    assert "what cuisine was mentioned?" in stdout

    code, _, stderr = run(
        capsys, "merge", "--base", str(first), "--add", str(first), "--out", str(tmp_path / "x.json")
    )
    assert code == 1
    assert "colliding" in stderr


def test_score_oracle_fixed_point_and_aggregate(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    corpus_path = tmp_path / "corpus.json"
    run(
        capsys,
        "convert",
        "--input", str(toy_bio_file), "--input-format", "bio",
        "--catalog", str(toy_catalog_file), "--out", str(corpus_path),
        "--intents",
    )
    corpus = parse_squad(corpus_path.read_text(encoding="utf-8"))
    predictions_path = tmp_path / "preds.json"
    predictions_path.write_text(dumps_predictions(oracle_predictions(corpus)), encoding="utf-8")

    reports = []
    for seed in (1, 2):
        report_path = tmp_path / f"report{seed}.json"
        code, stdout, _ = run(
            capsys,
            "score",
            "--gold", str(toy_bio_file),
            "--gold-format", "bio",
            "--corpus", str(corpus_path),
            "--predictions", str(predictions_path),
            "--task", "both",
            "--seed", str(seed),
            "--catalog", str(toy_catalog_file),
            "--out", str(report_path),
        )
        assert code == 0
        fields = summary_fields(stdout)
        assert fields["slot_f1"] == "1.000000"
        assert fields["intent_f1"] == "1.000000"
        payload = json.loads(report_path.read_text(encoding="utf-8"))
        assert payload["run_seed"] == seed
        assert payload["config"]["catalog_sha256"]
        reports.append(report_path)

    code, stdout, _ = run(
        capsys, "score", "--aggregate", str(reports[0]), str(reports[1])
    )
    assert code == 0
    assert "slot_f1: mean=1.000000 std=0.000000" in stdout
    assert summary_fields(stdout)["runs"] == "2"


def test_score_requires_inputs_without_aggregate(capsys):
    code, _, stderr = run(capsys, "score", "--task", "slot")
    assert code == 1
    assert "required" in stderr


def test_score_names_missing_task_items(tmp_path, capsys, toy_bio_file, toy_catalog_file):
    corpus_path = tmp_path / "corpus.json"
    run(
        capsys,
        "convert",
        "--input", str(toy_bio_file), "--input-format", "bio",
        "--catalog", str(toy_catalog_file), "--out", str(corpus_path),
    )
    corpus = parse_squad(corpus_path.read_text(encoding="utf-8"))
    predictions_path = tmp_path / "preds.json"
    predictions_path.write_text(dumps_predictions(oracle_predictions(corpus)), encoding="utf-8")
    code, _, stderr = run(
        capsys,
        "score",
        "--gold", str(toy_bio_file),
        "--gold-format", "bio",
        "--corpus", str(corpus_path),
        "--predictions", str(predictions_path),
        "--task", "both",
    )
    assert code == 1
    assert "no intent items" in stderr
