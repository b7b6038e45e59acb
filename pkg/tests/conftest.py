"""Session fixtures: miniature checkpoints, synthetic corpus, trained artifacts.

Everything here is deterministic and offline; the miniature checkpoint is
pretrained briefly at build time so fine-tuning behaves realistically.
"""

import pytest

from lyriclens.classifier import TrainConfig, train_classifier
from lyriclens.corpus import CuratedDataset, SongRecord, assign_splits
from lyriclens.encoder import LyricsEncoder
from lyriclens.fixtures import build_mini_checkpoint, overfit_dataset, write_synthetic_corpus
from lyriclens.regressor import RegressorSpec, train_regressor


@pytest.fixture(scope="session")
def mini_checkpoint(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "mini"
    return build_mini_checkpoint(path, seed=0)


@pytest.fixture(scope="session")
def mini_checkpoint_b(tmp_path_factory):
    """A different checkpoint (different seed, shorter pretraining)."""
    path = tmp_path_factory.mktemp("ckpt_b") / "mini_b"
    return build_mini_checkpoint(path, seed=1, pretrain_steps=40)


@pytest.fixture(scope="session")
def encoder(mini_checkpoint):
    return LyricsEncoder(model_dir=mini_checkpoint, max_len=64)


@pytest.fixture(scope="session")
def fixture_corpus(tmp_path_factory):
    path = tmp_path_factory.mktemp("corpus") / "synthetic.csv"
    return write_synthetic_corpus(path, n=500, seed=0)


@pytest.fixture(scope="session")
def overfit_ds():
    return overfit_dataset(seed=7)


@pytest.fixture(scope="session")
def genre_artifact(overfit_ds, mini_checkpoint):
    config = TrainConfig(
        learning_rate=1e-5,
        weight_decay=0.01,
        batch_size=8,
        epochs=8,
        seed=0,
        max_len=48,
        early_stop_patience=None,
    )
    return train_classifier(overfit_ds, config, model_dir=mini_checkpoint)


def _success_fixture_dataset() -> CuratedDataset:
    records, labels = [], []
    for i in range(24):
        successful = i % 2 == 0
        words = (["hit", "anthem", "chart"] if successful else ["dirt", "rain", "cold"]) * 8
        records.append(
            SongRecord(
                id=f"sx{i:03d}", title=f"S{i}", artist="Fixture", genre="pop",
                year=2000, views=200_000 if successful else 500,
                lyrics=" ".join(words), language="en",
            )
        )
        labels.append("success" if successful else "fail")
    ds = CuratedDataset(task="success", records=records, labels=labels, split=None, curation_config={})
    return assign_splits(ds, (0.8, 0.1, 0.1), seed=3)


@pytest.fixture(scope="session")
def success_artifact(mini_checkpoint):
    """Freshly initialized (epochs=0) success model: a stub with real shape."""
    config = TrainConfig(epochs=0, batch_size=8, max_len=32, seed=1, early_stop_patience=None)
    return train_classifier(_success_fixture_dataset(), config, model_dir=mini_checkpoint)


@pytest.fixture(scope="session")
def year_artifact(encoder, overfit_ds):
    texts = [r.lyrics for r in overfit_ds.records]
    matrix = encoder.embed_texts(texts, batch_size=16)
    years = [1960 + (i * 7) % 63 for i in range(len(texts))]
    return train_regressor(
        matrix,
        [float(y) for y in years],
        RegressorSpec(kind="svr_linear", seed=0),
        embedding_checkpoint_id=encoder.checkpoint_id,
    )
