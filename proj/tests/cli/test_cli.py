# Copyright 2026 The wsner Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""End-to-end checks of the wsner command line tool."""

import csv
import os
import pathlib
import subprocess

import pytest

ROOT = pathlib.Path(__file__).resolve().parents[2]
DATA = ROOT / "data" / "synthetic"
FIXTURES = ROOT / "tests" / "data"
BINARY = os.environ.get("WSNER_BIN", str(ROOT / "build" / "tools" / "wsner"))
GAZETTEER_FLAGS = [
    "--gazetteer", str(DATA / "wikidata.tsv"),
    "--gazetteer", str(DATA / "nigerian_names.tsv"),
    "--keywords", str(DATA / "date_keywords.txt"),
    "--min-length", "wikidata=2",
    "--min-length", "nigerian-names=3",
]


def run(*args, env=None):
    full_env = dict(os.environ)
    full_env.pop("WSNER_SPARQL_ENDPOINT", None)
    full_env.update(env or {})
    return subprocess.run([BINARY, *map(str, args)], capture_output=True,
                          text=True, env=full_env, timeout=600)


def report_rows(text):
    rows = {}
    for line in text.splitlines()[1:]:
        fields = line.split()
        rows[fields[0]] = [int(v) for v in fields[1:]]
    return rows


@pytest.fixture
def small_train(tmp_path):
    """First 60 sentences of the bundled training split."""
    sentences = (DATA / "train.conll").read_text(encoding="utf-8").split("\n\n")
    path = tmp_path / "small.conll"
    path.write_text("\n\n".join(sentences[:60]) + "\n", encoding="utf-8")
    return path


def test_help_and_usage_errors():
    assert run("--help").returncode == 0
    assert run().returncode == 2
    assert run("frobnicate").returncode == 2
    assert run("quality", "--gold", DATA / "test.conll").returncode == 2
    assert run("quality", "--gold", DATA / "test.conll", "--distant",
               DATA / "test.conll", "--bogus").returncode == 2
    both = run("evaluate", "--gold", DATA / "test.conll", "--pred",
               DATA / "test.conll", "--model", DATA / "test.conll")
    assert both.returncode == 2
    assert "exactly one" in both.stderr


def test_data_error_names_file_and_line(tmp_path):
    bad = tmp_path / "bad.conll"
    bad.write_text("Adé\tB-PER\nlọ\tB-XYZ\n", encoding="utf-8")
    result = run("quality", "--gold", bad, "--distant", bad)
    assert result.returncode == 1
    assert "bad.conll" in result.stderr

    broken = tmp_path / "broken.conll"
    broken.write_text("Adé\tB-PER\nlọ O extra\tO\tO\n", encoding="utf-8")
    result = run("quality", "--gold", broken, "--distant", broken)
    assert result.returncode == 1
    assert "broken.conll:2" in result.stderr


def test_quality_on_identical_files():
    result = run("quality", "--gold", DATA / "test.conll", "--distant",
                 DATA / "test.conll")
    assert result.returncode == 0
    rows = report_rows(result.stdout)
    assert set(rows) == {"Overall", "PER", "ORG", "LOC", "DATE"}
    for values in rows.values():
        assert values[:3] == [100, 100, 100]


def test_annotate_then_quality(tmp_path):
    out = tmp_path / "distant.conll"
    annotated = run("annotate", "--corpus", DATA / "test.conll", "--out", out,
                    *GAZETTEER_FLAGS)
    assert annotated.returncode == 0, annotated.stderr
    quality = run("quality", "--gold", DATA / "test.conll", "--distant", out)
    assert quality.returncode == 0
    # Same numbers as scoring the annotation through evaluate.
    evaluate = run("evaluate", "--gold", DATA / "test.conll", "--pred", out)
    assert evaluate.stdout == quality.stdout
    overall = report_rows(quality.stdout)["Overall"]
    assert 0 < overall[2] < 100

    wsner = pytest.importorskip("wsner")
    tags = ["PER", "ORG", "LOC", "DATE"]
    gold = wsner.Dataset.read_conll(str(DATA / "test.conll"), "auto", tags)
    gazetteer = wsner.Gazetteer.from_files(
        [str(DATA / "wikidata.tsv"), str(DATA / "nigerian_names.tsv")],
        min_length={"wikidata": 2, "nigerian-names": 3}, entity_types=tags)
    rules = wsner.DateRules.from_file(str(DATA / "date_keywords.txt"))
    distant = wsner.annotate_distant(gold, gazetteer, rules)
    expected = wsner.annotation_quality(gold, distant)["overall"]
    assert overall[2] == round(100 * expected["f1"])


def test_ingest_from_fixture(tmp_path):
    out = tmp_path / "people.tsv"
    result = run("ingest", "--class", "person", "--lang", "yo", "--out", out,
                 "--fixture", FIXTURES / "sparql_person_yo.json",
                 "--page-size", "60", "--max-results", "100")
    assert result.returncode == 0, result.stderr
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 100
    assert all(line.split("\t")[1:] == ["PER", "wikidata"] for line in lines)
    assert lines == sorted(lines)
    assert "truncated" in result.stderr

    again = tmp_path / "again.tsv"
    run("ingest", "--class", "person", "--out", again, "--fixture",
        FIXTURES / "sparql_person_yo.json", "--page-size", "60",
        "--max-results", "100")
    assert again.read_bytes() == out.read_bytes()

    assert run("ingest", "--class", "person", "--out", out).returncode == 2
    assert run("ingest", "--class", "planet", "--out", out, "--fixture",
               FIXTURES / "sparql_person_yo.json").returncode == 2
    insecure = run("ingest", "--class", "person", "--out", out, "--fixture",
                   FIXTURES / "sparql_person_yo.json",
                   env={"WSNER_SPARQL_ENDPOINT": "http://localhost/sparql"})
    assert insecure.returncode == 1
    assert "https" in insecure.stderr


def test_train_evaluate_inspect(tmp_path, small_train):
    distant = tmp_path / "distant.conll"
    assert run("annotate", "--corpus", DATA / "extra.conll", "--out", distant,
               *GAZETTEER_FLAGS).returncode == 0
    model = tmp_path / "model.txt"
    confusion = tmp_path / "confusion.tsv"
    trained = run("train", "--clean", small_train, "--distant", distant,
                  "--method", "confusion", "--embeddings", DATA / "vectors.txt",
                  "--model-out", model, "--confusion-out", confusion,
                  "--epochs", "1", "--hidden-size", "4", *GAZETTEER_FLAGS)
    assert trained.returncode == 0, trained.stderr

    metrics = tmp_path / "metrics.csv"
    evaluated = run("evaluate", "--gold", DATA / "test.conll", "--model", model,
                    "--embeddings", DATA / "vectors.txt", "--csv", metrics)
    assert evaluated.returncode == 0, evaluated.stderr
    assert set(report_rows(evaluated.stdout)) == {"Overall", "PER", "ORG", "LOC", "DATE"}
    with open(metrics, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["metric", "value"]
    assert len(rows) == 16

    shown = run("inspect", "--model", model)
    assert shown.returncode == 0
    assert "hidden size: 4" in shown.stdout
    assert "labels: O PER ORG LOC DATE" in shown.stdout
    matrix = run("inspect", "--confusion", confusion)
    assert matrix.returncode == 0
    assert len(matrix.stdout.splitlines()) == 7

    # Methods that need pairs refuse to run without them.
    refused = run("train", "--clean", small_train, "--distant", distant,
                  "--method", "cleaning", "--embeddings", DATA / "vectors.txt",
                  "--model-out", model)
    assert refused.returncode == 2
    assert run("inspect").returncode == 2


def test_experiment_subcommand(tmp_path):
    out = tmp_path / "sweep"
    result = run("experiment", "--config", DATA / "experiment.json", "--repeats",
                 "1", "--methods", "distant-only", "baseline-clean", "--budgets",
                 "1000", "--output-dir", out)
    assert result.returncode == 0, result.stderr
    with open(out / "runs.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [(r["budget"], r["method"], r["status"]) for r in rows] == [
        ("1000", "distant-only", "ok"), ("1000", "baseline-clean", "ok")]
    with open(out / "aggregate.csv", newline="") as f:
        assert len(list(csv.DictReader(f))) == 2
    bad = run("experiment", "--config", DATA / "experiment.json", "--methods",
              "magic", "--output-dir", out)
    assert bad.returncode == 1


def test_synth(tmp_path):
    result = run("synth", "--out", tmp_path / "corpus", "--seed", "3")
    assert result.returncode == 0, result.stderr
    names = sorted(p.name for p in (tmp_path / "corpus").iterdir())
    assert names == sorted(["train.conll", "test.conll", "extra.conll",
                            "wikidata.tsv", "nigerian_names.tsv",
                            "date_keywords.txt", "vectors.txt", "experiment.json"])
