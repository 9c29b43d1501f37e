import json
import subprocess
import sys

import pytest

from ctxgen.cli import main as ctxgen_main
from ctxgen.data import SchemaError, read_target_records, validate_context_record
from ctxgen.rougelink import validation_rouge1
from ctxgen.train import AdapterConfig, save_checkpoint, train


def quick_cfg(ttype, train_path, **kw):
    defaults = dict(target_type=ttype, train_path=train_path, epochs=12,
                    eval_every=6, hidden=48, emb=24, seed=0)
    defaults.update(kw)
    return AdapterConfig(**defaults)


def test_read_target_records_validates(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_target_records(str(empty))
    bad = tmp_path / "bad.jsonl"
    bad.write_text('{"question_id": "q1", "context_type": "answer", "source": "s"}\n')
    with pytest.raises(SchemaError, match="reference"):
        read_target_records(str(bad))


def test_train_selects_checkpoint_by_rouge(fixture_world, tmp_path):
    payload = train(quick_cfg("answer", fixture_world["targets"]["answer"]),
                    log=lambda m: None)
    assert payload["best_epoch"] >= 1
    assert 0.0 <= payload["best_val_rouge1_f1"] <= 1.0
    assert payload["context_type"] == "answer"
    save_checkpoint(payload, str(tmp_path / "ckpt.pt"))


def test_train_rejects_mixed_type_file(fixture_world):
    with pytest.raises(ValueError, match="answer"):
        train(quick_cfg("title", fixture_world["targets"]["answer"]),
              log=lambda m: None)


def test_single_example_training_runs(tmp_path):
    path = tmp_path / "one.jsonl"
    path.write_text(json.dumps({
        "question_id": "q0", "context_type": "answer",
        "source": "tiny question", "reference": "tiny answer",
    }) + "\n")
    payload = train(quick_cfg("answer", str(path), epochs=6, eval_every=3),
                    log=lambda m: None)
    assert payload["model_state"] is not None


def test_generate_emits_schema_valid_records(fixture_world, tmp_path):
    ckpt = str(tmp_path / "ckpt.pt")
    assert ctxgen_main(["train", "--type", "answer",
                        "--train", fixture_world["targets"]["answer"],
                        "--out", ckpt, "--epochs", "12", "--eval-every", "6"]) == 0
    out = str(tmp_path / "ctx.jsonl")
    assert ctxgen_main(["generate", "--checkpoint", ckpt,
                        "--questions", fixture_world["questions"],
                        "--out", out]) == 0
    rows = [json.loads(line) for line in open(out)]
    assert len(rows) == fixture_world["n_questions"]
    for row in rows:
        validate_context_record(row)
        assert row["context_type"] == "answer"


def test_generated_contexts_accepted_by_augment(fixture_world, tmp_path):
    ckpt = str(tmp_path / "ckpt.pt")
    ctxgen_main(["train", "--type", "title",
                 "--train", fixture_world["targets"]["title"],
                 "--out", ckpt, "--epochs", "12", "--eval-every", "6"])
    ctx = str(tmp_path / "ctx.jsonl")
    ctxgen_main(["generate", "--checkpoint", ckpt,
                 "--questions", fixture_world["questions"], "--out", ctx])
    proc = subprocess.run(
        [sys.executable, "-m", "sparseqa", "augment",
         "--questions", fixture_world["questions"], "--contexts", ctx,
         "--out", str(tmp_path / "augmented.jsonl")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr


def test_three_types_train_independently(fixture_world, tmp_path):
    for ttype in ("answer", "sentence", "title"):
        payload = train(quick_cfg(ttype, fixture_world["targets"][ttype],
                                  epochs=6, eval_every=6), log=lambda m: None)
        assert payload["context_type"] == ttype


def test_validation_rouge_agrees_with_direct_computation():
    pairs = [
        ("a", "the cat sat", "the cat ran"),
        ("b", "alpha beta", "alpha beta"),
        ("c", "one two three", "nothing shared[SEP]one two four"),
    ]
    via_cli = validation_rouge1(pairs)
    from sparseqa.evaluation import rouge_f1, split_references

    direct = sum(rouge_f1(c, split_references(r)).rouge1_f1
                 for _, c, r in pairs) / len(pairs)
    assert via_cli == pytest.approx(direct, abs=1e-6)
