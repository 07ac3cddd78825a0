import json

import pytest

from main import main
from qkge.checkpoint import build_checkpoint, save_checkpoint
from qkge.config import load_config
from qkge.data import load_knowledge_graph, load_vocabulary
from tests.helpers import make_store


def train_args(data_dir, out, *extra):
    return [
        "train",
        "--data-dir", str(data_dir),
        "--epochs", "1",
        "--batch-size", "5",
        "--threads", "1",
        "--filter-negatives",
        "--quiet",
        "-o", str(out),
        *extra,
    ]


@pytest.fixture
def trained(toy_dir, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    out = tmp_path / "model.json"
    assert main(train_args(toy_dir, out)) == 0
    return out


class TestTrain:
    def test_writes_checkpoint_and_loss_log(self, trained, capsys):
        assert trained.exists()
        log = trained.with_suffix(".loss.csv")
        assert log.read_text().splitlines()[0] == "epoch,loss,val_mrr"
        data = json.loads(trained.read_text())
        assert all(len(row) == 12 for row in data["entity_params"])

    def test_four_qubits(self, toy_dir, tmp_path):
        out = tmp_path / "q4.json"
        assert main(train_args(toy_dir, out, "--qubits", "4", "--no-validate")) == 0
        data = json.loads(out.read_text())
        assert all(len(row) == 24 for row in data["entity_params"] + data["relation_params"])

    def test_zero_negatives_is_usage_error(self, toy_dir, tmp_path, capsys):
        assert main(train_args(toy_dir, tmp_path / "m.json", "--negatives", "0")) == 1
        assert "Error:" in capsys.readouterr().err

    def test_missing_data_dir(self, tmp_path):
        assert main(train_args(tmp_path / "absent", tmp_path / "m.json")) == 1

    def test_malformed_data(self, toy_dir, tmp_path, capsys):
        (toy_dir / "test.txt").write_text("a\tr1\n", encoding="utf-8")
        assert main(train_args(toy_dir, tmp_path / "m.json")) == 2
        assert "test.txt:1" in capsys.readouterr().err

    def test_invalid_utf8_data(self, toy_dir, tmp_path, capsys):
        (toy_dir / "test.txt").write_bytes(b"a\tr1\t\xff\xfe\n")
        assert main(train_args(toy_dir, tmp_path / "m.json")) == 2
        assert "invalid UTF-8" in capsys.readouterr().err

    def test_writes_vocabulary(self, trained, toy_dir):
        entities, relations = load_vocabulary(trained.with_suffix(".vocab.json"))
        kg = load_knowledge_graph(toy_dir)
        assert entities.names == kg.entities.names == ("a", "b", "c")
        assert relations.names == kg.relations.names

    def test_batch_too_large(self, toy_dir, tmp_path):
        assert main(train_args(toy_dir, tmp_path / "m.json", "--batch-size", "50")) == 1

    def test_same_seed_same_checkpoint(self, toy_dir, tmp_path):
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert main(train_args(toy_dir, first, "--seed", "3")) == 0
        assert main(train_args(toy_dir, second, "--seed", "3")) == 0
        assert first.read_bytes() == second.read_bytes()


class TestEval:
    def test_prints_metrics(self, trained, toy_dir, capsys):
        assert main(["eval", "--model", str(trained), "--data-dir", str(toy_dir), "--quiet"]) == 0
        out = capsys.readouterr().out
        assert "MRR" in out and "Hits@1" in out and "random ranking" in out

    def test_json_is_stable(self, trained, toy_dir, tmp_path):
        paths = [tmp_path / "m1.json", tmp_path / "m2.json"]
        for path in paths:
            args = ["eval", "--model", str(trained), "--data-dir", str(toy_dir), "--json", str(path), "-q"]
            assert main(args) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()
        data = json.loads(paths[0].read_text())
        assert data["n_triples"] == 3 and data["split"] == "test"

    def test_both_mode_on_valid(self, trained, toy_dir, tmp_path):
        path = tmp_path / "m.json"
        args = ["eval", "--model", str(trained), "--data-dir", str(toy_dir), "--split", "valid",
                "--mode", "both", "--json", str(path), "-q"]
        assert main(args) == 0
        data = json.loads(path.read_text())
        assert data["mode"] == "both" and data["n_triples"] == 2

    def test_corrupted_checkpoint(self, trained, toy_dir, capsys):
        trained.write_text("{ not json")
        assert main(["eval", "--model", str(trained), "--data-dir", str(toy_dir), "-q"]) == 2
        assert "Error:" in capsys.readouterr().err

    def test_vocabulary_mismatch(self, trained, toy_dir):
        with open(toy_dir / "test.txt", "a", encoding="utf-8") as f:
            f.write("a\tr1\tnew_entity\n")
        assert main(["eval", "--model", str(trained), "--data-dir", str(toy_dir), "-q"]) == 2

    def test_threads_do_not_change_metrics(self, trained, toy_dir, tmp_path):
        paths = [tmp_path / "t1.json", tmp_path / "t3.json"]
        for path, threads in zip(paths, ("1", "3")):
            args = ["eval", "--model", str(trained), "--data-dir", str(toy_dir), "--mode", "both",
                    "--threads", threads, "--json", str(path), "-q"]
            assert main(args) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_zero_threads_is_usage_error(self, trained, toy_dir):
        assert main(["eval", "--model", str(trained), "--data-dir", str(toy_dir), "--threads", "0"]) == 1

    @pytest.mark.umls
    @pytest.mark.slow
    def test_umls_valid_split(self, umls_dir, tmp_path):
        kg = load_knowledge_graph(umls_dir)
        config = load_config(threads=1)
        model = save_checkpoint(
            tmp_path / "umls.json",
            build_checkpoint(make_store(kg.entity_count, kg.relation_count), kg, config, []),
        )
        path = tmp_path / "metrics.json"
        args = ["eval", "--model", str(model), "--data-dir", str(umls_dir), "--split", "valid",
                "--json", str(path), "-q"]
        assert main(args) == 0
        data = json.loads(path.read_text())
        assert data["split"] == "valid" and data["n_triples"] == 652


class TestInspect:
    def test_summary(self, trained, capsys):
        assert main(["inspect", "--model", str(trained), "-q"]) == 0
        out = capsys.readouterr().out
        assert "qubits=2" in out and "entities=3" in out and "relations=2" in out

    def test_score_triple(self, trained, capsys):
        assert main(["inspect", "--model", str(trained), "--triple", "a r1 b", "-q"]) == 0
        line = [l for l in capsys.readouterr().out.splitlines() if l.startswith("score(")][0]
        value = line.split("=")[1].strip()
        assert len(value.split(".")[1]) == 6 and 0.0 <= float(value) <= 1.0

    def test_unknown_name_suggests(self, trained, capsys):
        assert main(["inspect", "--model", str(trained), "--triple", "a r3 b", "-q"]) == 2
        assert "r1" in capsys.readouterr().err

    def test_unitary(self, trained, capsys):
        assert main(["inspect", "--model", str(trained), "--relation", "r2", "--unitary", "-q"]) == 0
        assert "U(r2)" in capsys.readouterr().out

    def test_unitary_needs_relation(self, trained):
        assert main(["inspect", "--model", str(trained), "--unitary"]) == 1

    def test_dataset_summary(self, trained, toy_dir, capsys):
        assert main(["inspect", "--model", str(trained), "--data-dir", str(toy_dir), "-q"]) == 0
        out = capsys.readouterr().out
        assert "training: 10" in out and "validation: 2" in out and "testing: 3" in out

    def test_dataset_must_match_checkpoint(self, trained, toy_dir):
        with open(toy_dir / "valid.txt", "a", encoding="utf-8") as f:
            f.write("a\tr1\td\n")
        assert main(["inspect", "--model", str(trained), "--data-dir", str(toy_dir), "-q"]) == 2
