import pytest

from qkge.data import (
    KnowledgeGraph,
    Triple,
    VocabMode,
    Vocabulary,
    build_filter_index,
    load_knowledge_graph,
    load_vocabulary,
    parse_triples,
    save_vocabulary,
)
from qkge.errors import DataError, ParseError, UsageError, VocabularyError
from tests.helpers import write_split


class TestParseTriples:
    def test_two_lines(self, tmp_path):
        path = write_split(tmp_path / "train.txt", [("a", "r", "b"), ("b", "r", "c")])
        triples, entities, relations = parse_triples(path)
        assert triples == [Triple(0, 0, 1), Triple(1, 0, 2)]
        assert entities.names == ("a", "b", "c")
        assert relations.names == ("r",)

    def test_ids_ignore_line_order(self, tmp_path):
        lines = [("zeta", "p", "alpha"), ("mid", "q", "zeta"), ("alpha", "p", "mid")]
        _, forward, _ = parse_triples(write_split(tmp_path / "f.txt", lines))
        _, backward, _ = parse_triples(write_split(tmp_path / "b.txt", lines[::-1]))
        assert forward.names == backward.names == ("alpha", "mid", "zeta")

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a\tr\tb\n\n\nb\tr\ta\n", encoding="utf-8")
        assert len(parse_triples(path)[0]) == 2

    def test_wrong_field_count_reports_line(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a\tr\tb\nb\tr\nc\tr\ta\n", encoding="utf-8")
        with pytest.raises(ParseError) as excinfo:
            parse_triples(path)
        assert excinfo.value.line_number == 2
        assert ":2:" in str(excinfo.value)

    def test_empty_field(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_text("a\t\tb\n", encoding="utf-8")
        with pytest.raises(ParseError):
            parse_triples(path)

    def test_invalid_utf8_reports_line(self, tmp_path):
        path = tmp_path / "t.txt"
        path.write_bytes(b"a\tr\tb\na\tr1\t\xff\xfe\n")
        with pytest.raises(ParseError, match="invalid UTF-8") as excinfo:
            parse_triples(path)
        assert excinfo.value.line_number == 2

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            parse_triples(tmp_path / "nope.txt")

    def test_reuse_mode_keeps_ids(self, tmp_path):
        train = write_split(tmp_path / "train.txt", [("a", "r", "b"), ("c", "s", "a")])
        test = write_split(tmp_path / "test.txt", [("c", "r", "b")])
        _, entities, relations = parse_triples(train)
        triples, e2, r2 = parse_triples(test, VocabMode.REUSE, entities, relations)
        assert triples == [Triple(2, 0, 1)]
        assert e2 is entities and r2 is relations

    def test_reuse_mode_unknown_name(self, tmp_path):
        train = write_split(tmp_path / "train.txt", [("apple", "r", "banana")])
        test = write_split(tmp_path / "test.txt", [("appel", "r", "banana")])
        _, entities, relations = parse_triples(train)
        with pytest.raises(VocabularyError) as excinfo:
            parse_triples(test, VocabMode.REUSE, entities, relations)
        assert excinfo.value.suggestions == ["apple"]
        assert "did you mean" in str(excinfo.value)

    def test_reuse_mode_needs_vocabularies(self, tmp_path):
        path = write_split(tmp_path / "t.txt", [("a", "r", "b")])
        with pytest.raises(UsageError):
            parse_triples(path, VocabMode.REUSE)


class TestFilterIndex:
    def test_groups_tails(self):
        index = build_filter_index([Triple(0, 0, 1), Triple(0, 0, 2), Triple(1, 0, 2)])
        assert index[(0, 0)] == {1, 2}
        assert index[(1, 0)] == {2}

    def test_unseen_pair_is_empty(self, toy_kg):
        assert toy_kg.known_tails(0, 5) == frozenset()

    def test_covers_every_split(self):
        kg = KnowledgeGraph.from_strings(
            [("a", "r", "b")], [("a", "r", "c")], [("a", "r", "d")]
        )
        a, r = kg.entities.lookup("a"), kg.relations.lookup("r")
        assert {kg.entities.name(t) for t in kg.known_tails(a, r)} == {"b", "c", "d"}
        assert {kg.entities.name(t) for t in kg.known_train_tails(a, r)} == {"b"}

    def test_head_index(self, toy_kg):
        b, r1 = toy_kg.entities.lookup("b"), toy_kg.relations.lookup("r1")
        assert {toy_kg.entities.name(h) for h in toy_kg.known_heads(r1, b)} == {"b", "c"}


class TestKnowledgeGraph:
    def test_load_directory(self, toy_dir):
        kg = load_knowledge_graph(toy_dir)
        assert kg.summary() == {
            "entities": 3,
            "relations": 2,
            "training": 10,
            "validation": 2,
            "testing": 3,
            "triples": 15,
        }

    def test_missing_directory(self, tmp_path):
        with pytest.raises(DataError):
            load_knowledge_graph(tmp_path / "absent")

    def test_missing_split_file(self, toy_dir):
        (toy_dir / "valid.txt").unlink()
        with pytest.raises(DataError):
            load_knowledge_graph(toy_dir)

    def test_out_of_vocabulary_ids(self):
        vocab = Vocabulary.from_names("entity", ["a"])
        with pytest.raises(DataError):
            KnowledgeGraph(vocab, Vocabulary.from_names("relation", ["r"]), [Triple(0, 0, 1)])

    def test_ids_span_all_splits(self, tmp_path):
        write_split(tmp_path / "train.txt", [("m", "r", "z")])
        write_split(tmp_path / "valid.txt", [("a", "s", "m")])
        write_split(tmp_path / "test.txt", [("z", "q", "a")])
        kg = load_knowledge_graph(tmp_path)
        assert kg.entities.names == ("a", "m", "z")
        assert kg.relations.names == ("q", "r", "s")
        assert kg.train == [Triple(1, 1, 2)]
        assert kg.valid == [Triple(0, 2, 1)]
        assert kg.test == [Triple(2, 0, 0)]

    def test_matches_in_memory_build(self, toy_dir, toy_kg):
        kg = load_knowledge_graph(toy_dir)
        assert kg.entities.names == toy_kg.entities.names
        assert (kg.train, kg.valid, kg.test) == (toy_kg.train, toy_kg.valid, toy_kg.test)

    def test_unknown_split(self, toy_kg):
        with pytest.raises(UsageError):
            toy_kg.split("dev")


class TestVocabulary:
    def test_round_trip(self, tmp_path, toy_kg):
        path = save_vocabulary(tmp_path / "vocab.json", toy_kg.entities, toy_kg.relations)
        entities, relations = load_vocabulary(path)
        assert entities.names == toy_kg.entities.names
        assert relations.names == toy_kg.relations.names

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "vocab.json"
        path.write_text('{"entities": [', encoding="utf-8")
        with pytest.raises(DataError, match="not valid JSON"):
            load_vocabulary(path)

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "vocab.json"
        path.write_text('{"entities": ["a"]}', encoding="utf-8")
        with pytest.raises(DataError):
            load_vocabulary(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_vocabulary(tmp_path / "absent.json")

    def test_duplicates_rejected(self):
        with pytest.raises(DataError):
            Vocabulary("entity", ("a", "a"))

    def test_lookup_and_name(self):
        vocab = Vocabulary.from_names("relation", ["isa", "causes", "isa"])
        assert len(vocab) == 2
        assert vocab.name(vocab.lookup("isa")) == "isa"
        assert "causes" in vocab and "treats" not in vocab


@pytest.mark.umls
class TestUmls:
    def test_split_sizes(self, umls_dir):
        kg = load_knowledge_graph(umls_dir)
        assert (len(kg.train), len(kg.valid), len(kg.test)) == (5216, 652, 661)
        assert (kg.entity_count, kg.relation_count) == (135, 46)
