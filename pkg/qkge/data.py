"""
Triple files, vocabularies and filter indices.

Files hold one `head<TAB>relation<TAB>tail` triple per line (UTF-8).
Ids follow the lexicographic order of the surface strings, so the same files
give the same ids regardless of line order.
"""
from __future__ import annotations

import difflib
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, NamedTuple

from .errors import DataError, ParseError, UsageError, VocabularyError

logger = logging.getLogger(__name__)

SPLIT_FILES = {"train": "train.txt", "valid": "valid.txt", "test": "test.txt"}


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class VocabMode(str, Enum):
    BUILD = "build"
    REUSE = "reuse"


@dataclass(frozen=True)
class Vocabulary:
    """Bidirectional string <-> id map."""

    kind: str
    names: tuple[str, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {name: i for i, name in enumerate(self.names)}
        if len(index) != len(self.names):
            raise DataError(f"Duplicate names in {self.kind} vocabulary")
        object.__setattr__(self, "_index", index)

    @classmethod
    def from_names(cls, kind: str, names: Iterable[str]) -> "Vocabulary":
        return cls(kind, tuple(sorted(set(names))))

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def lookup(self, name: str) -> int:
        """Id of `name`; unknown names raise with the closest known names."""
        try:
            return self._index[name]
        except KeyError:
            suggestions = difflib.get_close_matches(name, self.names, n=3, cutoff=0.5)
            raise VocabularyError(self.kind, name, suggestions) from None

    def name(self, id_: int) -> str:
        return self.names[id_]


def read_raw_triples(path: Path) -> list[tuple[str, str, str]]:
    """String triples in file order; blank lines are skipped."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Triple file not found: {path}")
    triples = []
    with open(path, "rb") as f:
        for line_number, raw_line in enumerate(f, start=1):
            try:
                line = raw_line.decode("utf-8").rstrip("\r\n")
            except UnicodeDecodeError:
                raise ParseError(path, line_number, "invalid UTF-8") from None
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise ParseError(path, line_number, f"expected 3 tab-separated fields, got {len(fields)}")
            if not all(fields):
                raise ParseError(path, line_number, "empty field")
            triples.append((fields[0], fields[1], fields[2]))
    return triples


def encode(
    raw: Iterable[tuple[str, str, str]], entities: Vocabulary, relations: Vocabulary
) -> list[Triple]:
    return [
        Triple(entities.lookup(h), relations.lookup(r), entities.lookup(t))
        for h, r, t in raw
    ]


def parse_triples(
    path: Path,
    mode: VocabMode = VocabMode.BUILD,
    entities: Vocabulary | None = None,
    relations: Vocabulary | None = None,
) -> tuple[list[Triple], Vocabulary, Vocabulary]:
    """Parse one file.

    In build mode the given vocabularies (if any) are extended with the
    file's strings and re-sorted; returned triples use the returned ids.
    In reuse mode unknown strings raise VocabularyError.
    """
    raw = read_raw_triples(path)
    if mode is VocabMode.REUSE:
        if entities is None or relations is None:
            raise UsageError("Reuse mode needs existing vocabularies")
    else:
        entities = Vocabulary.from_names(
            "entity",
            [*(entities.names if entities else ()), *(h for h, _, _ in raw), *(t for _, _, t in raw)],
        )
        relations = Vocabulary.from_names(
            "relation", [*(relations.names if relations else ()), *(r for _, r, _ in raw)]
        )
    return encode(raw, entities, relations), entities, relations


def build_filter_index(triples: Iterable[Triple]) -> dict[tuple[int, int], frozenset[int]]:
    """(head, relation) -> every tail seen with it."""
    index: dict[tuple[int, int], set[int]] = defaultdict(set)
    for h, r, t in triples:
        index[(h, r)].add(t)
    return {key: frozenset(tails) for key, tails in index.items()}


def build_head_index(triples: Iterable[Triple]) -> dict[tuple[int, int], frozenset[int]]:
    """(relation, tail) -> every head seen with it."""
    index: dict[tuple[int, int], set[int]] = defaultdict(set)
    for h, r, t in triples:
        index[(r, t)].add(h)
    return {key: frozenset(heads) for key, heads in index.items()}


_EMPTY: frozenset[int] = frozenset()


@dataclass
class KnowledgeGraph:
    """Vocabularies, the three splits and the filter indices over all of them."""

    entities: Vocabulary
    relations: Vocabulary
    train: list[Triple]
    valid: list[Triple] = field(default_factory=list)
    test: list[Triple] = field(default_factory=list)
    tail_index: dict[tuple[int, int], frozenset[int]] = field(init=False, repr=False)
    head_index: dict[tuple[int, int], frozenset[int]] = field(init=False, repr=False)
    train_tail_index: dict[tuple[int, int], frozenset[int]] = field(init=False, repr=False)

    def __post_init__(self):
        for split in SPLIT_FILES:
            for triple in getattr(self, split):
                if not (
                    0 <= triple.head < len(self.entities)
                    and 0 <= triple.tail < len(self.entities)
                    and 0 <= triple.relation < len(self.relations)
                ):
                    raise DataError(f"Triple {triple} in {split} split is out of vocabulary")
        everything = [*self.train, *self.valid, *self.test]
        self.tail_index = build_filter_index(everything)
        self.head_index = build_head_index(everything)
        self.train_tail_index = build_filter_index(self.train)

    @classmethod
    def from_strings(
        cls,
        train: list[tuple[str, str, str]],
        valid: list[tuple[str, str, str]] = (),
        test: list[tuple[str, str, str]] = (),
    ) -> "KnowledgeGraph":
        """Build vocabularies over all splits, then encode."""
        everything = [*train, *valid, *test]
        entities = Vocabulary.from_names(
            "entity", [h for h, _, _ in everything] + [t for _, _, t in everything]
        )
        relations = Vocabulary.from_names("relation", [r for _, r, _ in everything])
        return cls(
            entities,
            relations,
            encode(train, entities, relations),
            encode(valid, entities, relations),
            encode(test, entities, relations),
        )

    @property
    def entity_count(self) -> int:
        return len(self.entities)

    @property
    def relation_count(self) -> int:
        return len(self.relations)

    def split(self, name: str) -> list[Triple]:
        if name not in SPLIT_FILES:
            raise UsageError(f"Unknown split '{name}', expected one of {list(SPLIT_FILES)}")
        return getattr(self, name)

    def known_tails(self, head: int, relation: int) -> frozenset[int]:
        return self.tail_index.get((head, relation), _EMPTY)

    def known_heads(self, relation: int, tail: int) -> frozenset[int]:
        return self.head_index.get((relation, tail), _EMPTY)

    def known_train_tails(self, head: int, relation: int) -> frozenset[int]:
        return self.train_tail_index.get((head, relation), _EMPTY)

    def summary(self) -> dict[str, int]:
        return {
            "entities": self.entity_count,
            "relations": self.relation_count,
            "training": len(self.train),
            "validation": len(self.valid),
            "testing": len(self.test),
            "triples": len(self.train) + len(self.valid) + len(self.test),
        }


def load_knowledge_graph(data_dir: Path) -> KnowledgeGraph:
    """Read train.txt, valid.txt and test.txt from `data_dir`.

    The vocabulary is built over all three splits first, then every split is
    encoded against it, so ids never depend on which split a name appears in.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"Data directory not found: {data_dir}")
    paths = {split: data_dir / filename for split, filename in SPLIT_FILES.items()}
    entities = relations = None
    for path in paths.values():
        _, entities, relations = parse_triples(path, VocabMode.BUILD, entities, relations)
    splits = {
        split: parse_triples(path, VocabMode.REUSE, entities, relations)[0]
        for split, path in paths.items()
    }
    kg = KnowledgeGraph(entities, relations, **splits)
    logger.info(f"Loaded {data_dir}: {kg.summary()}")
    return kg


def vocabulary_dict(entities: Vocabulary, relations: Vocabulary) -> dict[str, list[str]]:
    return {"entities": list(entities.names), "relations": list(relations.names)}


def save_vocabulary(path: Path, entities: Vocabulary, relations: Vocabulary) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(vocabulary_dict(entities, relations), f, indent=2)
    return path


def load_vocabulary(path: Path) -> tuple[Vocabulary, Vocabulary]:
    try:
        with open(path, encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise DataError(f"Vocabulary file not found: {path}") from None
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DataError(f"Vocabulary file {path} is not valid JSON: {e}") from e
    try:
        return (
            Vocabulary("entity", tuple(data["entities"])),
            Vocabulary("relation", tuple(data["relations"])),
        )
    except (KeyError, TypeError) as e:
        raise DataError(f"Malformed vocabulary file {path}: {e}") from e
