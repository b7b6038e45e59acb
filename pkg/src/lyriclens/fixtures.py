"""Synthetic fixtures: a planted-signal lyrics corpus and a miniature
pretrained checkpoint, so the full pipeline runs offline and in CI.

The corpus plants genre keywords, decade markers, and success words, and
includes rows that each curation filter should remove (misc tag, non-English,
pre-1960 years, short lyrics, low views). The checkpoint is a small
distilled-transformer pretrained briefly with masked-language modeling on
synthetic lyrics; fine-tuning it at the production learning rate behaves
like fine-tuning a real pretrained model, just faster.
"""

from __future__ import annotations

import csv
import random
from pathlib import Path

from .corpus import GENRES, CuratedDataset, SongRecord, assign_splits

GENRE_KEYWORDS = {
    "country": ["truck", "whiskey", "road", "boots", "dirt", "hometown", "river", "porch"],
    "pop": ["baby", "dance", "shiny", "radio", "tonight", "neon", "glitter", "crush"],
    "rap": ["hustle", "flow", "rhyme", "streets", "chain", "grind", "cash", "block"],
    "rb": ["tender", "groove", "soul", "velvet", "slow", "silk", "candle", "honey"],
    "rock": ["guitar", "thunder", "riff", "leather", "loud", "highway", "rebel", "storm"],
}

RAP_EXPLICIT = ["fuck", "bitch", "shit", "thug"]
SUCCESS_WORDS = ["hit", "anthem", "chart", "famous"]
DECADE_WORDS = {
    1960: "jukebox",
    1970: "disco",
    1980: "cassette",
    1990: "pager",
    2000: "ringtone",
    2010: "selfie",
    2020: "viral",
}
FILLER = [
    "the", "a", "night", "love", "heart", "time", "eyes", "light", "dream", "fire",
    "rain", "cry", "stars", "moon", "town", "young", "free", "home", "cold", "sun",
    "wild", "mind", "hands", "lonely", "sweet", "blue", "gone", "run", "feel", "know",
]

SECTION_HEADERS = ["[Intro]", "[Verse 1]", "[Chorus]", "[Verse 2]", "[Bridge]", "[Outro]"]

_ARTIST_POOLS = {
    "country": ["Hank", "Dolly", "Reba", "Waylon", "June"],
    "pop": ["Aria", "Nova", "Skye", "Jade", "Milo"],
    "rap": ["Lil Ray", "MC Vex", "Big Tone", "Kid Cipher", "Rhyma"],
    "rb": ["Marvin", "Sade", "Teddy", "Aaliya", "Dru"],
    "rock": ["Axel", "Stone", "Vega", "Raven", "Iggy"],
}


def _decade_word(year: int) -> str:
    return DECADE_WORDS[min(max(year // 10 * 10, 1960), 2020)]


def make_lyrics(genre: str, year: int, successful: bool, n_words: int, rng: random.Random) -> str:
    """Multi-line lyric with bracketed section headers and planted signals."""
    words: list[str] = []
    keywords = GENRE_KEYWORDS[genre]
    while len(words) < n_words:
        roll = rng.random()
        if roll < 0.45:
            words.append(rng.choice(keywords))
        elif roll < 0.53:
            words.append(_decade_word(year))
        elif roll < 0.58 and successful:
            words.append(rng.choice(SUCCESS_WORDS))
        elif roll < 0.64 and genre == "rap":
            words.append(rng.choice(RAP_EXPLICIT))
        elif roll < 0.72 and genre != "rap":
            words.append("love")
        else:
            words.append(rng.choice(FILLER))
    lines = []
    i = 0
    section = 0
    while i < len(words):
        if i % 24 == 0 and section < len(SECTION_HEADERS):
            lines.append(SECTION_HEADERS[section])
            section += 1
        take = rng.randint(5, 9)
        lines.append(" ".join(words[i : i + take]))
        i += take
    return "\n".join(lines)


def synthetic_rows(n: int = 500, seed: int = 0) -> list[dict]:
    """Raw corpus rows (pre-cleaning, pre-filtering) with planted signals."""
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        genre = GENRES[i % len(GENRES)]
        tag = genre
        language = "en"
        year = rng.randint(1960, 2022)
        roll = rng.random()
        if roll < 0.05:
            tag = "misc"
        elif roll < 0.10:
            language = rng.choice(["es", "de", "fr"])
        elif roll < 0.14:
            year = rng.randint(1930, 1959)
        views = int(10 ** rng.uniform(2.0, 6.5))
        successful = views >= 100_000
        length_roll = rng.random()
        if length_roll < 0.12:
            n_words = rng.randint(60, 140)  # fails the genre word floor
        elif length_roll < 0.14:
            n_words = rng.randint(1, 20)  # near-empty
        else:
            n_words = rng.randint(160, 280)
        title_words = [rng.choice(GENRE_KEYWORDS[genre]).title(), rng.choice(FILLER).title()]
        rows.append(
            {
                "id": f"s{i:05d}",
                "title": " ".join(title_words),
                "artist": rng.choice(_ARTIST_POOLS[genre]),
                "tag": tag,
                "year": year,
                "views": views,
                "lyrics": make_lyrics(genre, year, successful, n_words, rng),
                "language": language,
            }
        )
    return rows


def write_synthetic_corpus(path: str | Path, n: int = 500, seed: int = 0, malformed_rows: int = 2) -> Path:
    """Write the synthetic corpus CSV, including a few malformed rows that
    exercise the reject path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = synthetic_rows(n, seed)
    fields = ["id", "title", "artist", "tag", "year", "views", "lyrics", "language"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        for j in range(malformed_rows):
            writer.writerow(
                {
                    "id": f"bad{j:03d}",
                    "title": "Broken Row",
                    "artist": "Nobody",
                    "tag": "pop",
                    "year": 2001,
                    "views": "n/a",
                    "lyrics": "too broken to count",
                    "language": "en",
                }
            )
    return path


def overfit_dataset(seed: int = 7, n: int = 64, words_per_lyric: int = 30) -> CuratedDataset:
    """Tiny keyword-saturated genre dataset a classifier must memorize."""
    rng = random.Random(seed)
    records, labels = [], []
    for i in range(n):
        genre = GENRES[i % len(GENRES)]
        words = [
            rng.choice(GENRE_KEYWORDS[genre]) if rng.random() < 0.7 else rng.choice(FILLER)
            for _ in range(words_per_lyric)
        ]
        records.append(
            SongRecord(
                id=f"ov{i:03d}",
                title=f"Overfit {i}",
                artist="Fixture",
                genre=genre,
                year=2000,
                views=10_000,
                lyrics=" ".join(words),
                language="en",
            )
        )
        labels.append(genre)
    dataset = CuratedDataset(
        task="genre",
        records=records,
        labels=labels,
        split=None,
        curation_config={"seed": seed, "fixture": "overfit"},
    )
    return assign_splits(dataset, (0.8, 0.1, 0.1), seed=seed)


# ---------------------------------------------------------------------------
# miniature pretrained checkpoint


def _fixture_vocab() -> list[str]:
    words = set(FILLER) | set(RAP_EXPLICIT) | set(SUCCESS_WORDS) | set(DECADE_WORDS.values())
    for pool in GENRE_KEYWORDS.values():
        words.update(pool)
    extra = {
        "intro", "verse", "chorus", "bridge", "outro", "me", "you", "i", "we", "my",
        "your", "and", "in", "on", "of", "to", "it", "is", "was", "all", "now", "never",
    }
    chars = [chr(c) for c in range(ord("a"), ord("z") + 1)]
    digits = [str(d) for d in range(10)]
    punct = [",", ".", "!", "?", "'", "-", "[", "]"]
    vocab, seen = [], set()
    for token in (
        ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
        + sorted(words | extra)
        + chars
        + digits
        + punct
        + ["##" + c for c in chars]
        + ["##" + d for d in digits]
    ):
        if token not in seen:
            seen.add(token)
            vocab.append(token)
    return vocab


def build_mini_checkpoint(
    out_dir: str | Path,
    seed: int = 0,
    dim: int = 96,
    n_layers: int = 2,
    n_heads: int = 2,
    hidden_dim: int | None = None,
    pretrain_steps: int = 600,
    pretrain_lr: float = 1e-3,
) -> Path:
    """Create a deterministic miniature distilled-transformer checkpoint.

    The model is pretrained for a few hundred masked-language-model steps on
    synthetic lyrics. That is enough to give tokens meaningful
    representations, so downstream fine-tuning at small learning rates
    converges the way it does on a full-size pretrained checkpoint.
    """
    import torch
    from transformers import DistilBertConfig, DistilBertForMaskedLM, DistilBertTokenizer

    from .corpus import clean_lyrics

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    vocab = _fixture_vocab()
    tokenizer = DistilBertTokenizer(
        vocab={t: i for i, t in enumerate(vocab)},
        do_lower_case=True,
        model_max_length=512,
    )

    torch.manual_seed(seed)
    config = DistilBertConfig(
        vocab_size=len(vocab),
        dim=dim,
        n_layers=n_layers,
        n_heads=n_heads,
        hidden_dim=hidden_dim if hidden_dim is not None else 2 * dim,
        max_position_embeddings=512,
    )
    mlm = DistilBertForMaskedLM(config)

    if pretrain_steps > 0:
        rng = random.Random(seed + 1)
        sentences = []
        for _ in range(256):
            genre = rng.choice(GENRES)
            year = rng.randint(1960, 2022)
            sentences.append(clean_lyrics(make_lyrics(genre, year, rng.random() < 0.4, 24, rng)))
        enc = tokenizer(sentences, truncation=True, max_length=32, padding="max_length", return_tensors="pt")
        ids, mask = enc["input_ids"], enc["attention_mask"]
        generator = torch.Generator().manual_seed(seed + 2)
        optimizer = torch.optim.AdamW(mlm.parameters(), lr=pretrain_lr)
        mlm.train()
        for _ in range(pretrain_steps):
            batch = torch.randint(0, len(sentences), (16,), generator=generator)
            batch_ids, batch_mask = ids[batch].clone(), mask[batch]
            labels = batch_ids.clone()
            roll = torch.rand(batch_ids.shape, generator=generator)
            maskable = (
                (batch_mask == 1)
                & (batch_ids != tokenizer.cls_token_id)
                & (batch_ids != tokenizer.sep_token_id)
            )
            selected = (roll < 0.15) & maskable
            labels[~selected] = -100
            batch_ids[selected] = tokenizer.mask_token_id
            optimizer.zero_grad()
            out = mlm(input_ids=batch_ids, attention_mask=batch_mask, labels=labels)
            out.loss.backward()
            optimizer.step()

    mlm.distilbert.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    return out_dir
