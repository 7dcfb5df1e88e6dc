# Copyright 2026 The LCMR Authors
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

import math
import os
import subprocess

import pytest

import lcmr


def test_attend_two_slots():
    beta = 1 / math.sqrt(2)
    out, weights = lcmr.attend([1, 0], [[1, 0], [0, 1]], [[1, 0], [0, 1]], beta)
    e = math.exp(beta)
    assert weights == pytest.approx([e / (e + 1), 1 / (e + 1)], abs=1e-14)
    assert out == pytest.approx(weights, abs=1e-14)


def test_sigmoid_and_metrics():
    assert lcmr.stable_sigmoid(0.0) == 0.5
    assert lcmr.stable_sigmoid(math.log(3)) == pytest.approx(0.75)
    assert lcmr.rank_of_positive(0.3, [0.3] * 99) == 100
    assert lcmr.hr_at_k([1, 5, 11], 10) == pytest.approx(2 / 3)
    assert lcmr.ndcg_at_k([2], 10) == pytest.approx(1 / math.log2(3))


def test_errors_carry_a_kind():
    with pytest.raises(lcmr.LcmrError) as info:
        lcmr.hr_at_k([], 10)
    assert info.value.kind == "invalid-argument"
    cfg = lcmr.LcmrConfig()
    with pytest.raises(lcmr.LcmrError) as info:
        cfg.variant = "half"
    assert info.value.kind == "config"


def test_model_forward_and_trace():
    cfg = lcmr.LcmrConfig()
    cfg.num_users = 3
    cfg.num_items = 4
    cfg.vocab_size = 5
    cfg.set_joint_dim(8)
    cfg.hops = 2
    cfg.memory_size = 3
    model = lcmr.LcmrModel(cfg, seed=1)
    assert model.parameter_names() == ["P", "Q", "Kc1", "Mc1", "Kc2", "Mc2", "A", "C", "h"]
    t = model.trace(1, 2, [0, 3])
    assert len(t["joint_embedding"]) == 8
    for a in t["central_attention"] + t["local_attention"]:
        assert sum(a) == pytest.approx(1.0, abs=1e-9)
    assert 0.0 < t["prediction"] < 1.0
    assert model.predict(1, 2, [3, 0]) == t["prediction"]
    assert model.trace(0, 0, [])["empty_text"]


def test_planted_split_and_untrained_eval():
    data = lcmr.make_planted(users=60, items=200, seed=3)
    split = lcmr.loo_split(data.interactions, seed=3)
    assert split.num_users == 60
    assert all(len(c) == 99 for c in split.candidates)
    counts = lcmr.itempop_scores(split.train)
    assert sum(counts) == split.train.num_interactions
    cfg = lcmr.LcmrConfig()
    cfg.num_users = split.num_users
    cfg.num_items = split.num_items
    cfg.vocab_size = data.corpus.vocab_size
    cfg.set_joint_dim(16)
    cfg.hops = 1
    cfg.memory_size = 4
    report = lcmr.evaluate_model(lcmr.LcmrModel(cfg, seed=0), split, data.corpus, k=100)
    assert report["hr"] == 1.0
    with pytest.raises(lcmr.LcmrError):
        lcmr.evaluate_model(lcmr.LcmrModel(cfg, seed=0), split, data.corpus, target="tset")


def test_file_pipeline(tmp_path):
    corpus = tmp_path / "corpus"
    stats = lcmr.synth(corpus, users=50, items=160, seed=2)
    assert "#Users" in stats
    split = lcmr.split(corpus, seed=2)
    settings = {
        "corpus_dir": str(corpus),
        "out_dir": str(tmp_path / "run"),
        "d": 8,
        "hops": 1,
        "memory_size": 4,
        "epochs": 2,
        "record_seconds": "false",
        "seed": 5,
    }
    history = lcmr.train(settings)
    assert len(history["epochs"]) == 2
    assert history["best_epoch"] in (1, 2)
    ckpt = tmp_path / "run" / "best.ckpt"
    val = lcmr.evaluate(ckpt, corpus / "split.txt", target="val")
    best = history["epochs"][history["best_epoch"] - 1]
    assert val["hr"] == best["val_hr10"]
    assert lcmr.read_history(tmp_path / "run" / "history.csv")["best_epoch"] == history["best_epoch"]
    top = lcmr.recommend(ckpt, corpus / "split.txt", user=0, n=5)
    seen = set(split.train.items(0))
    assert len(top) == 5
    assert not seen.intersection(item for item, _ in top)
    with pytest.raises(lcmr.LcmrError) as info:
        lcmr.train({"hopz": 1})
    assert info.value.kind == "config"


@pytest.mark.skipif(not os.environ.get("LCMR_TOOL"), reason="command-line tool not built")
def test_tool_reports_errors(tmp_path):
    tool = os.environ["LCMR_TOOL"]
    bad = subprocess.run([tool, "train", "--set", "nope=1"], capture_output=True, text=True)
    assert bad.returncode != 0
    assert bad.stderr.startswith("error[config]: ")
    keys = subprocess.run([tool, "config-keys"], capture_output=True, text=True, check=True)
    assert "memory_size" in keys.stdout
