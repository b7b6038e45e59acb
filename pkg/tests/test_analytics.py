"""Analytics tests: sentiment scoring, top words, and the EDA report."""

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lyriclens.analytics import (
    build_eda_report,
    load_lexicon,
    load_stopwords,
    sentiment_score,
    tokenize,
    top_words,
    write_eda_tables,
)
from lyriclens.corpus import CuratedDataset, SongRecord

LEX = {"good": 1.0, "bad": -1.0, "fine": 0.5, "awful": -0.75}


def record(i, genre="pop", year=2000, lyrics="good words"):
    return SongRecord(
        id=f"a{i}", title=f"T{i}", artist="A", genre=genre, year=year,
        views=1000, lyrics=lyrics, language="en",
    )


def dataset(records):
    return CuratedDataset(
        task="genre", records=records, labels=[r.genre for r in records],
        split=None, curation_config={},
    )


# --- tokenize ---------------------------------------------------------------


def test_tokenize_lowercases_and_strips_boundary_punctuation():
    assert tokenize("Hello, World! (don't)") == ["hello", "world", "don't"]


def test_tokenize_drops_pure_punctuation():
    assert tokenize("!!! --- ...") == []


# --- sentiment ----------------------------------------------------------------


def test_sentiment_all_positive_is_one():
    assert sentiment_score("good good good", LEX) == 1.0


def test_sentiment_empty_text_is_zero():
    assert sentiment_score("", LEX) == 0.0


def test_sentiment_no_matches_is_zero():
    assert sentiment_score("unknown tokens only", LEX) == 0.0


def test_sentiment_matches_hand_computed_average():
    # good(1.0) + bad(-1.0) + fine(0.5) + awful(-0.75) over 4 matches
    text = "good stuff bad stuff fine stuff awful"
    expected = (1.0 - 1.0 + 0.5 - 0.75) / 4
    assert sentiment_score(text, LEX) == pytest.approx(expected)


def test_sentiment_brute_force_oracle_on_bundled_lexicon():
    lexicon = load_lexicon()
    rng = random.Random(0)
    words = list(lexicon)[:50] + ["zzz", "qqq"]
    for _ in range(20):
        text = " ".join(rng.choice(words) for _ in range(30))
        total, matched = 0.0, 0
        for token in text.split():
            if token in lexicon:
                total += lexicon[token]
                matched += 1
        expected = total / max(1, matched)
        assert sentiment_score(text, lexicon) == pytest.approx(expected)


def test_sentiment_empty_lexicon_errors():
    with pytest.raises(ValueError, match="empty"):
        sentiment_score("whatever", {})


@given(st.lists(st.sampled_from(["good", "bad", "fine", "awful", "meh"]), max_size=30))
def test_sentiment_permutation_invariant(words):
    rng = random.Random(1)
    shuffled = words[:]
    rng.shuffle(shuffled)
    assert sentiment_score(" ".join(words), LEX) == pytest.approx(
        sentiment_score(" ".join(shuffled), LEX)
    )


def test_sentiment_bounded():
    assert -1.0 <= sentiment_score("bad bad awful", LEX) <= 1.0


def test_load_lexicon_validates_polarity(tmp_path):
    bad = tmp_path / "lex.tsv"
    bad.write_text("word\t2.5\n", encoding="utf-8")
    with pytest.raises(ValueError, match="outside"):
        load_lexicon(bad)


# --- top words -------------------------------------------------------------------


def test_top_words_simple_counts():
    ds = dataset([record(0, lyrics="a a b")])
    assert top_words(ds, "pop", k=2, stopwords=set()) == [("a", 2), ("b", 1)]


def test_top_words_k_larger_than_vocab():
    ds = dataset([record(0, lyrics="x y")])
    assert top_words(ds, "pop", k=10, stopwords=set()) == [("x", 1), ("y", 1)]


def test_top_words_tie_broken_lexicographically():
    ds = dataset([record(0, lyrics="beta alpha beta alpha")])
    assert top_words(ds, "pop", k=2, stopwords=set()) == [("alpha", 2), ("beta", 2)]


def test_top_words_respects_stopwords_and_genre():
    ds = dataset([
        record(0, genre="pop", lyrics="love the love"),
        record(1, genre="rap", lyrics="flow flow flow"),
    ])
    assert top_words(ds, "pop", k=3, stopwords={"the"}) == [("love", 2)]


def test_top_words_unknown_genre_errors():
    ds = dataset([record(0, genre="pop")])
    with pytest.raises(ValueError, match="not present"):
        top_words(ds, "jazz", k=3, stopwords=set())


def test_top_words_love_dominates_planted_pop():
    rng = random.Random(2)
    records = []
    for i in range(30):
        words = ["love" if rng.random() < 0.4 else rng.choice(["night", "dance", "shine"]) for _ in range(50)]
        records.append(record(i, genre="pop", lyrics=" ".join(words)))
    ranked = top_words(dataset(records), "pop", k=5, stopwords=load_stopwords())
    assert ranked[0][0] == "love"


# --- EDA report ---------------------------------------------------------------------


def test_eda_empty_dataset_errors():
    with pytest.raises(ValueError, match="empty"):
        build_eda_report(dataset([]), LEX, set())


def test_eda_single_record_aggregates():
    ds = dataset([record(0, genre="rap", year=1999, lyrics="good bad bad")])
    report = build_eda_report(ds, LEX, set())
    assert report.genre_counts == {"rap": 1}
    expected = (1.0 - 1.0 - 1.0) / 3
    assert report.sentiment_by_genre["rap"].mean == pytest.approx(expected)
    assert report.sentiment_by_genre["rap"].median == pytest.approx(expected)
    assert report.sentiment_by_year == {1999: pytest.approx(expected)}
    assert report.length_stats["rap"]["mean_word_count"] == 3


def test_eda_means_match_brute_force():
    rng = random.Random(5)
    vocab = ["good", "bad", "fine", "awful", "zzz"]
    records = [
        record(i, genre=rng.choice(["pop", "rap"]), year=rng.choice([1990, 2000]),
               lyrics=" ".join(rng.choice(vocab) for _ in range(20)))
        for i in range(40)
    ]
    report = build_eda_report(dataset(records), LEX, set())
    for genre in ("pop", "rap"):
        scores = [sentiment_score(r.lyrics, LEX) for r in records if r.genre == genre]
        assert report.sentiment_by_genre[genre].mean == pytest.approx(sum(scores) / len(scores))
    for year in (1990, 2000):
        scores = [sentiment_score(r.lyrics, LEX) for r in records if r.year == year]
        assert report.sentiment_by_year[year] == pytest.approx(sum(scores) / len(scores))


def test_eda_counts_sum_to_dataset_size():
    rng = random.Random(8)
    records = [record(i, genre=rng.choice(["pop", "rock", "rb"])) for i in range(25)]
    report = build_eda_report(dataset(records), LEX, set())
    assert sum(report.genre_counts.values()) == 25


def test_eda_duplication_leaves_means_and_order_unchanged():
    rng = random.Random(9)
    vocab = ["good", "bad", "fine", "night", "dance"]
    records = [
        record(i, genre=rng.choice(["pop", "rap"]),
               lyrics=" ".join(rng.choice(vocab) for _ in range(15)))
        for i in range(20)
    ]
    doubled = records + [
        SongRecord(id=f"dup{r.id}", title=r.title, artist=r.artist, genre=r.genre,
                   year=r.year, views=r.views, lyrics=r.lyrics, language=r.language)
        for r in records
    ]
    base = build_eda_report(dataset(records), LEX, set())
    dup = build_eda_report(dataset(doubled), LEX, set())
    for genre in base.genre_counts:
        assert dup.genre_counts[genre] == 2 * base.genre_counts[genre]
        assert dup.sentiment_by_genre[genre].mean == pytest.approx(base.sentiment_by_genre[genre].mean)
        assert [w for w, _ in dup.top_words[genre]] == [w for w, _ in base.top_words[genre]]
        assert [c for _, c in dup.top_words[genre]] == [2 * c for _, c in base.top_words[genre]]


def test_eda_sentiment_by_year_covers_exactly_years_present():
    records = [record(0, year=1980), record(1, year=2020)]
    report = build_eda_report(dataset(records), LEX, set())
    assert set(report.sentiment_by_year) == {1980, 2020}


def test_write_eda_tables(tmp_path):
    records = [record(0, genre="pop", lyrics="good fine"), record(1, genre="rap", lyrics="bad awful")]
    report = build_eda_report(dataset(records), LEX, set())
    written = write_eda_tables(report, tmp_path)
    names = {p.name for p in written}
    assert names == {
        "genre_counts.csv", "top_words.csv", "length_stats.csv",
        "sentiment_by_genre.csv", "sentiment_by_year.csv", "eda_summary.json",
    }
    content = (tmp_path / "genre_counts.csv").read_text()
    assert "pop,1" in content and "rap,1" in content
