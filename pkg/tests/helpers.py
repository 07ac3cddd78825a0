"""Builders shared by the test modules."""
from pathlib import Path

import numpy as np

from qkge.ansatz import AnsatzShape
from qkge.model import EmbeddingStore

# Two relations that both keep "a" apart from "b"/"c"
TOY_TRAIN = [
    (h, rel, t)
    for rel in ("r1", "r2")
    for h, t in (("a", "a"), ("b", "b"), ("b", "c"), ("c", "b"), ("c", "c"))
]
TOY_VALID = [("a", "r1", "a"), ("b", "r2", "c")]
TOY_TEST = [("c", "r1", "b"), ("a", "r2", "a"), ("b", "r1", "b")]


def random_state(rng: np.random.Generator, n_qubits: int, batch: tuple[int, ...] = ()) -> np.ndarray:
    shape = batch + (2**n_qubits,)
    amps = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return amps / np.linalg.norm(amps, axis=-1, keepdims=True)


def make_store(
    entity_count: int,
    relation_count: int,
    n_qubits: int = 2,
    entity_layers: int = 2,
    relation_layers: int = 2,
    seed: int = 0,
) -> EmbeddingStore:
    return EmbeddingStore.initialize(
        entity_count,
        relation_count,
        AnsatzShape(n_qubits, entity_layers),
        AnsatzShape(n_qubits, relation_layers),
        seed,
    )


def write_split(path: Path, triples) -> Path:
    path.write_text("".join(f"{h}\t{r}\t{t}\n" for h, r, t in triples), encoding="utf-8")
    return path


def write_dataset(data_dir: Path, train, valid, test) -> Path:
    data_dir.mkdir(parents=True, exist_ok=True)
    write_split(data_dir / "train.txt", train)
    write_split(data_dir / "valid.txt", valid)
    write_split(data_dir / "test.txt", test)
    return data_dir
