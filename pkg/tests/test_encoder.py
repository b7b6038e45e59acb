"""Encoder tests: token scheme, mask-aware pooling, cache behavior."""

import json
import random

import numpy as np
import pytest

from lyriclens.corpus import CuratedDataset, SongRecord
from lyriclens.encoder import (
    LyricsEncoder,
    embed_corpus,
    load_embedding_matrix,
    text_digest,
)
from lyriclens.fixtures import FILLER, GENRE_KEYWORDS


def random_lyric(rng, n_words=20):
    pool = FILLER + GENRE_KEYWORDS["pop"] + GENRE_KEYWORDS["rap"]
    return " ".join(rng.choice(pool) for _ in range(n_words))


def tiny_dataset(texts):
    records = [
        SongRecord(id=f"e{i}", title="t", artist="a", genre="pop", year=2000,
                   views=1, lyrics=t, language="en")
        for i, t in enumerate(texts)
    ]
    return CuratedDataset(task="genre", records=records, labels=["pop"] * len(records),
                          split=None, curation_config={})


# --- token scheme -------------------------------------------------------------


def test_cls_first_sep_last(encoder):
    seq = encoder.encode("hello night love")
    cls_id = encoder.tokenizer.cls_token_id
    sep_id = encoder.tokenizer.sep_token_id
    assert seq.input_ids[0] == cls_id
    last_real = seq.real_length - 1
    assert seq.input_ids[last_real] == sep_id
    assert all(m in (0, 1) for m in seq.attention_mask)
    assert len(seq.input_ids) == len(seq.attention_mask) == encoder.max_len


def test_mask_marks_exactly_real_positions(encoder):
    seq = encoder.encode("love night")
    pad_id = encoder.tokenizer.pad_token_id
    for token_id, mask in zip(seq.input_ids, seq.attention_mask):
        if mask == 0:
            assert token_id == pad_id
        else:
            assert token_id != pad_id


def test_empty_text_is_cls_sep(encoder):
    seq = encoder.encode("")
    assert seq.real_length == 2
    assert seq.input_ids[0] == encoder.tokenizer.cls_token_id
    assert seq.input_ids[1] == encoder.tokenizer.sep_token_id


def test_truncation_flag_and_length(encoder):
    long_text = "love " * 500
    seq = encoder.encode(long_text, max_len=16)
    assert len(seq.input_ids) == 16
    assert seq.truncated
    short = encoder.encode("love", max_len=16)
    assert not short.truncated


def test_same_text_same_sequence(encoder):
    a = encoder.encode("dance tonight baby")
    b = encoder.encode("dance tonight baby")
    assert a == b


def test_max_len_out_of_range(encoder):
    with pytest.raises(ValueError, match="max_len"):
        encoder.encode("x", max_len=4)
    with pytest.raises(ValueError, match="max_len"):
        encoder.encode("x", max_len=4096)


def test_bad_checkpoint_is_fatal(tmp_path):
    from lyriclens.encoder import EncoderError

    with pytest.raises(EncoderError, match="nonexistent"):
        LyricsEncoder(model_dir=tmp_path / "nonexistent")


# --- pooling -------------------------------------------------------------------


def test_mean_pooling_matches_brute_force_oracle(encoder):
    rng = random.Random(0)
    texts = [random_lyric(rng, rng.randint(1, 40)) for _ in range(12)]
    seqs = encoder.encode_batch(texts)
    vectors = encoder.embed(seqs)
    hidden = encoder.token_embeddings(seqs)
    for seq, vec, states in zip(seqs, vectors, hidden):
        total = np.zeros(encoder.hidden_size, dtype=np.float64)
        n = 0
        for position, mask in enumerate(seq.attention_mask):
            if mask == 1:
                total += states[position]
                n += 1
        oracle = (total / n).astype(np.float32)
        assert np.allclose(vec.values, oracle, atol=1e-5)


def test_constant_rows_pool_to_that_constant():
    # pooling a constant matrix returns the constant vector: checked directly
    # against the same mask arithmetic embed() uses
    mask = np.array([1, 1, 1, 0, 0], dtype=np.float32)[None, :, None]
    states = np.ones((1, 5, 4), dtype=np.float32) * 3.25
    pooled = (states * mask).sum(axis=1) / mask.sum(axis=1)
    assert np.allclose(pooled, 3.25)


def test_padding_length_invariance(encoder):
    rng = random.Random(1)
    for _ in range(5):
        text = random_lyric(rng, 10)
        short = encoder.embed(encoder.encode(text, max_len=32))
        long = encoder.embed(encoder.encode(text, max_len=64))
        assert np.allclose(short.values, long.values, atol=1e-4)


def test_batch_equals_single(encoder):
    rng = random.Random(2)
    texts = [random_lyric(rng, rng.randint(3, 30)) for _ in range(9)]
    batch_vectors = encoder.embed(encoder.encode_batch(texts))
    for text, batch_vec in zip(texts, batch_vectors):
        single = encoder.embed(encoder.encode(text))
        assert np.allclose(single.values, batch_vec.values, atol=1e-5)


def test_embedding_deterministic_across_runs(encoder):
    text = "thunder highway rebel loud"
    v1 = encoder.embed(encoder.encode(text)).values
    v2 = encoder.embed(encoder.encode(text)).values
    assert np.array_equal(v1, v2)


def test_no_nan_inf(encoder):
    rng = random.Random(3)
    texts = [random_lyric(rng, rng.randint(1, 50)) for _ in range(64)]
    matrix = encoder.embed_texts(texts, batch_size=16)
    assert np.all(np.isfinite(matrix))


def test_vector_length_is_hidden_size(encoder):
    vec = encoder.embed(encoder.encode("soul"))
    assert len(vec) == encoder.hidden_size


# --- corpus cache ----------------------------------------------------------------


def test_embed_corpus_shape_and_order(encoder, tmp_path):
    texts = ["love night", "dance dance", "thunder road"]
    ds = tiny_dataset(texts)
    matrix, ids, stats = embed_corpus(encoder, ds, tmp_path / "cache", batch_size=2)
    assert matrix.shape == (3, encoder.hidden_size)
    assert ids == ["e0", "e1", "e2"]
    assert stats.misses == 3 and stats.hits == 0
    # row i corresponds to record i
    direct = encoder.embed(encoder.encode(texts[1])).values
    assert np.allclose(matrix[1], direct, atol=1e-5)


def test_embed_corpus_second_run_all_hits(encoder, tmp_path):
    ds = tiny_dataset(["groove velvet", "cash flow", "boots dirt road"])
    cache = tmp_path / "cache"
    first, _, stats1 = embed_corpus(encoder, ds, cache)
    second, _, stats2 = embed_corpus(encoder, ds, cache)
    assert stats2.hits == 3 and stats2.misses == 0
    assert stats2.forward_passes == 0
    assert np.array_equal(first, second)


def test_cache_not_reused_across_checkpoints(encoder, mini_checkpoint_b, tmp_path):
    ds = tiny_dataset(["neon glitter", "silk candle"])
    cache = tmp_path / "cache"
    embed_corpus(encoder, ds, cache)
    other = LyricsEncoder(model_dir=mini_checkpoint_b, max_len=64)
    assert other.checkpoint_id != encoder.checkpoint_id
    _, _, stats = embed_corpus(other, ds, cache)
    assert stats.hits == 0 and stats.misses == 2


def test_cache_corruption_rebuilds_with_warning(encoder, tmp_path, caplog):
    ds = tiny_dataset(["hustle grind", "tender slow"])
    cache = tmp_path / "cache"
    embed_corpus(encoder, ds, cache)
    (tmp_path / "cache.index").write_text("{not json", encoding="utf-8")
    with caplog.at_level("WARNING"):
        matrix, _, stats = embed_corpus(encoder, ds, cache)
    assert stats.rebuilt
    assert stats.misses == 2
    assert "rebuild" in caplog.text.lower()
    assert np.all(np.isfinite(matrix))


def test_cache_partial_reuse(encoder, tmp_path):
    cache = tmp_path / "cache"
    embed_corpus(encoder, tiny_dataset(["alpha beta", "gamma delta"]), cache)
    extended = tiny_dataset(["alpha beta", "gamma delta", "fresh text here"])
    _, _, stats = embed_corpus(encoder, extended, cache)
    assert stats.hits == 2 and stats.misses == 1


def test_load_embedding_matrix_roundtrip(encoder, tmp_path):
    ds = tiny_dataset(["one two", "three four"])
    cache = tmp_path / "cache"
    matrix, ids, _ = embed_corpus(encoder, ds, cache)
    loaded, loaded_ids = load_embedding_matrix(cache)
    assert np.array_equal(matrix, loaded)
    assert loaded_ids == ids
    index = json.loads((tmp_path / "cache.index").read_text())
    assert index["checkpoint_id"] == encoder.checkpoint_id
    assert index["rows"][0]["text_hash"] == text_digest("one two")
