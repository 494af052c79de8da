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

import csv
import os
from pathlib import Path

import numpy as np
import pytest

import wsner

DATA = Path(os.environ.get("WSNER_DATA_DIR",
                           Path(__file__).resolve().parents[2] / "data"))
SYNTHETIC = DATA / "synthetic"


def test_dataset_round_trip(tmp_path):
    sentences = [(["Ade", "lọ", "sí", "Èkó"], [("PER", 0, 1), ("LOC", 3, 4)]),
                 (["ọjọ́", "8"], [])]
    dataset = wsner.Dataset(sentences)
    assert len(dataset) == 2
    assert dataset.token_count() == 6
    path = tmp_path / "out.conll"
    dataset.write_conll(str(path))
    again = wsner.Dataset.read_conll(str(path))
    assert again == dataset
    assert again.sentences() == sentences


def test_bad_span_raises():
    with pytest.raises(wsner.SchemaError):
        wsner.Dataset([(["a"], [("PER", 0, 2)])])


def test_parse_error_names_line(tmp_path):
    path = tmp_path / "broken.conll"
    path.write_text("Ade\tB-PER\nlọ\n", encoding="utf-8")
    with pytest.raises(wsner.ParseError, match="broken.conll:2"):
        wsner.Dataset.read_conll(str(path))


def test_gazetteer_and_dates():
    gazetteer = wsner.Gazetteer.build(
        [("Ilé Ifẹ̀", "LOC", "test"), ("Ade", "PER", "test")])
    assert len(gazetteer) == 2
    assert gazetteer.match(["Ade", "wà", "ní", "Ilé", "Ifẹ̀"]) == [
        ("PER", 0, 1), ("LOC", 3, 5)]
    rules = wsner.DateRules.from_file(str(SYNTHETIC / "date_keywords.txt"))
    spans = rules.annotate("ọjọ́ 8 oṣù Ọpẹ̀ , ọdún 2018".split())
    assert all(span[0] == "DATE" for span in spans)
    assert spans


def test_span_prf():
    gold = wsner.Dataset([(["a", "b", "c"], [("PER", 0, 1), ("LOC", 2, 3)])])
    pred = wsner.Dataset([(["a", "b", "c"], [("PER", 0, 1), ("LOC", 1, 3)])])
    metrics = wsner.span_prf(gold, pred)
    assert metrics["overall"]["precision"] == pytest.approx(0.5)
    assert metrics["overall"]["recall"] == pytest.approx(0.5)
    assert metrics["per_class"]["PER"]["f1"] == pytest.approx(1.0)
    assert metrics["per_class"]["LOC"]["true_positives"] == 0
    mix = wsner.Dataset([(["a", "b"], [])])
    with pytest.raises(wsner.AlignmentError):
        wsner.span_prf(gold, mix)


def test_mean_standard_error():
    mean, se = wsner.mean_standard_error([1.0, 2.0, 3.0])
    assert mean == pytest.approx(2.0)
    assert se == pytest.approx(1.0 / np.sqrt(3.0))
    assert wsner.mean_standard_error([4.0]) == (4.0, 0.0)


def test_estimate_confusion():
    pairs = [(0, 0)] * 8 + [(0, 1)] * 2 + [(1, 1)] * 10
    matrix = wsner.estimate_confusion(pairs, 2, smoothing=0.0)
    np.testing.assert_allclose(matrix, [[0.8, 0.2], [0.0, 1.0]])
    np.testing.assert_allclose(matrix.sum(axis=1), 1.0)


def test_train_and_predict(tmp_path):
    train = wsner.Dataset.read_conll(str(SYNTHETIC / "train.conll"))
    test = wsner.Dataset.read_conll(str(SYNTHETIC / "test.conll"))
    vectors = wsner.Embeddings.load(str(SYNTHETIC / "vectors.txt"))
    config = wsner.TaggerConfig()
    config.hidden_size = 8
    config.feature_size = 8
    config.epochs = 1
    config.learning_rate = 0.05
    model = wsner.train("baseline-clean", train.subsample(300, 1),
                        config=config, embeddings=vectors)
    assert model.parameter_count == model.parameters().size
    predicted = model.predict(test, vectors)
    assert len(predicted) == len(test)
    path = tmp_path / "model.txt"
    model.save(str(path))
    loaded = wsner.Tagger.load(str(path))
    np.testing.assert_array_equal(loaded.parameters(), model.parameters())
    assert loaded.predict(test, vectors) == predicted


def test_synthetic_corpus(tmp_path):
    wsner.write_synthetic_corpus(str(tmp_path), seed=7)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "train.conll" in names and "vectors.txt" in names
    train = wsner.Dataset.read_conll(str(tmp_path / "train.conll"))
    assert train.token_count() > 0


def test_unknown_method_raises():
    clean = wsner.Dataset([(["a"], [])])
    vectors = wsner.Embeddings(["a"], np.ones((1, 2)))
    with pytest.raises(wsner.Error):
        wsner.train("magic", clean, embeddings=vectors)
