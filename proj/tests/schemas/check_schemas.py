"""Runs every CLI command on a tiny corpus and validates its JSON output."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

cli, schema_dir = str(pathlib.Path(sys.argv[1]).resolve()), pathlib.Path(sys.argv[2])
failures = 0


def validate(name, doc):
    global failures
    schema = json.loads((schema_dir / f"{name}.schema.json").read_text())
    try:
        jsonschema.validate(doc, schema, cls=jsonschema.Draft202012Validator)
        print(f"ok   {name}")
    except jsonschema.ValidationError as e:
        failures += 1
        print(f"FAIL {name}: {e.message}")


def run(name, *args, expect=0):
    p = subprocess.run([cli, *args], capture_output=True, text=True, cwd=work)
    if p.returncode != expect:
        sys.exit(f"{name}: exit {p.returncode}\n{p.stderr}")
    doc = json.loads(p.stdout if expect == 0 else p.stderr)
    validate(name if expect == 0 else "error", doc)
    return doc


with tempfile.TemporaryDirectory() as work:
    w = pathlib.Path(work)
    (w / "cfg.json").write_text(json.dumps({
        "model": {"encoder": {"hidden": 16, "heads": 2, "layers": 1, "ff": 32}, "lstm_hidden": 8},
        "training": {"max_epochs": 2}}))
    (w / "exp.json").write_text(json.dumps({
        "n_train": 40, "n_dev": 10, "n_test": 10, "num_seeds": 2, "fractions": [0.5, 1.0], "translate": [0.3],
        "model": {"encoder": {"hidden": 16, "heads": 2, "layers": 1, "ff": 32}, "lstm_hidden": 8},
        "training": {"max_epochs": 2}, "write_checkpoints": False}))

    run("gen-data", "gen-data", "--out", "d", "--n-train", "40", "--n-dev", "10", "--n-test", "10", "--translate", "0.3")
    run("vocab", "vocab", "--corpus", "d/train.jsonl", "--out", "v.json")
    run("train", "train", "--model", "args-role-primed", "--corpus", "d/train.jsonl", "--dev", "d/dev.jsonl",
        "--vocab", "v.json", "--out", "m", "--config", "cfg.json")
    validate("train-report", json.loads((w / "m/train_report.json").read_text()))
    run("decode", "decode", "--checkpoint", "m/model.ckpt", "--corpus", "d/test.jsonl", "--out", "p.jsonl",
        "--gold-triggers")
    run("score", "score", "--gold", "d/test.jsonl", "--pred", "p.jsonl")
    run("score", "score", "--gold", "d/test.jsonl", "--pred", "p.jsonl", "--discriminating")
    run("diff", "diff", "--gold", "d/test.jsonl", "--pred-a", "p.jsonl", "--pred-b", "d/test.jsonl")
    run("experiment", "experiment", "--config", "exp.json", "--out", "x")
    validate("experiment-summary", json.loads((w / "x/summary.json").read_text()))
    run("crf-check", "crf-check", "--per-shape", "5")
    run("grad-check", "grad-check", "--coordinates", "5")
    run("error", "score", "--gold", "missing.jsonl", "--pred", "p.jsonl", expect=1)
    (w / "bad.jsonl").write_text('{"doc_id": "d"}\nnot json\n')
    err = run("error", "score", "--gold", "bad.jsonl", "--pred", "p.jsonl", expect=1)
    print("     parse error:", err)

sys.exit(1 if failures else 0)
