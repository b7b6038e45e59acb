"""Corpus ingestion, lyric cleaning, filtering, and balanced dataset curation.

Reads a Genius-style lyrics CSV, cleans the lyric text, applies the base
filters (tag, language, year floor), and samples balanced task datasets for
genre classification, success classification, and year regression. All
sampling is seeded and re-runs are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import random
import re
from collections import Counter
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

log = logging.getLogger(__name__)

GENRES = ("country", "pop", "rap", "rb", "rock")
SPLITS = ("train", "validation", "test")

# logical field -> default CSV column name
DEFAULT_SCHEMA = {
    "title": "title",
    "genre": "tag",
    "artist": "artist",
    "year": "year",
    "views": "views",
    "lyrics": "lyrics",
    "language": "language",
}

# content may include "[": the segment ends at the first "]", so a second
# cleaning pass can never find a new pair (any surviving "[" has no "]" after it)
_BRACKET_RE = re.compile(r"\[[^\]\n]*\]")
_WS_RE = re.compile(r"\s+")


class CorpusError(Exception):
    """Fatal ingestion problem: missing file or unmappable schema."""


@dataclass(frozen=True)
class SongRecord:
    id: str
    title: str
    artist: str
    genre: str
    year: int
    views: int
    lyrics: str
    language: str


@dataclass
class LoadReport:
    rows_read: int = 0
    rows_emitted: int = 0
    rejects: list = field(default_factory=list)  # (row_number, reason)

    @property
    def rows_rejected(self) -> int:
        return len(self.rejects)

    def reject_reasons(self) -> Counter:
        return Counter(reason for _, reason in self.rejects)


def clean_lyrics(raw: str) -> str:
    """Normalize lyric text to a single line of plain words.

    Newlines become spaces, square-bracketed segments such as section
    headers are dropped, whitespace runs collapse to one space. Idempotent.
    """
    text = raw.replace("\r\n", " ").replace("\r", " ").replace("\n", " ")
    text = _BRACKET_RE.sub(" ", text)
    text = _WS_RE.sub(" ", text)
    return text.strip()


def word_count(lyrics: str) -> int:
    """Count maximal whitespace-delimited tokens."""
    return len(lyrics.split())


def _parse_int(value: str, what: str) -> int:
    value = value.strip()
    try:
        return int(value)
    except ValueError:
        pass
    # tolerate integral floats such as "1999.0"
    try:
        f = float(value)
    except ValueError:
        raise ValueError(f"{what} not an integer") from None
    if not f.is_integer():
        raise ValueError(f"{what} not an integer")
    return int(f)


def load_corpus(path: str | Path, schema: dict | None = None) -> tuple[list[SongRecord], LoadReport]:
    """Read a lyrics CSV into SongRecords plus a load report.

    `schema` remaps logical fields to CSV column names (defaults match the
    Genius dump: the genre lives in a column called "tag"). Rows that fail
    to parse are rejected with a reason and counted, never fatal; a missing
    file or a missing mapped column is fatal.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"corpus file not found: {path}")
    colmap = dict(DEFAULT_SCHEMA)
    if schema:
        colmap.update(schema)

    report = LoadReport()
    records: list[SongRecord] = []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise CorpusError(f"corpus file has no header row: {path}")
        missing = [col for col in colmap.values() if col not in reader.fieldnames]
        if missing:
            raise CorpusError(f"mapped columns missing from {path.name}: {missing}")
        has_id = "id" in reader.fieldnames
        for row_number, row in enumerate(reader, start=2):  # header is line 1
            report.rows_read += 1
            try:
                record = SongRecord(
                    id=(row["id"].strip() if has_id and row.get("id", "").strip() else f"r{row_number:07d}"),
                    title=row[colmap["title"]].strip(),
                    artist=row[colmap["artist"]].strip(),
                    genre=row[colmap["genre"]].strip().lower(),
                    year=_parse_int(row[colmap["year"]], "year"),
                    views=_parse_int(row[colmap["views"]], "views"),
                    lyrics=row[colmap["lyrics"]],
                    language=row[colmap["language"]].strip().lower(),
                )
            except ValueError as exc:
                report.rejects.append((row_number, str(exc)))
                continue
            except (KeyError, AttributeError):
                report.rejects.append((row_number, "malformed row"))
                continue
            if record.views < 0:
                report.rejects.append((row_number, "views negative"))
                continue
            records.append(record)
            report.rows_emitted += 1
    return records, report


@dataclass(frozen=True)
class BaseFilterConfig:
    min_year: int = 1960
    language: str = "en"
    drop_tags: tuple = ("misc",)


def apply_base_filters(records: Iterable[SongRecord], config: BaseFilterConfig | None = None) -> list[SongRecord]:
    """Keep records with an allowed tag, the configured language, and
    year >= the floor. Nothing else is touched here."""
    cfg = config or BaseFilterConfig()
    dropped = set(cfg.drop_tags)
    return [
        r
        for r in records
        if r.genre not in dropped and r.language == cfg.language and r.year >= cfg.min_year
    ]


@dataclass(frozen=True)
class CurationConfig:
    """Thresholds and quotas for the three task datasets."""

    genre_total: int = 50_000
    genre_min_words: int = 150  # strict: word_count must exceed this
    genre_min_views: int = 1_000
    success_view_threshold: int = 100_000  # views >= threshold labels success
    success_per_class: int = 8_000
    year_min: int = 1960
    year_max: int = 2022
    year_per_year: int = 300
    year_min_views: int = 1_000

    def to_dict(self) -> dict:
        return {
            "genre_total": self.genre_total,
            "genre_min_words": self.genre_min_words,
            "genre_min_views": self.genre_min_views,
            "success_view_threshold": self.success_view_threshold,
            "success_per_class": self.success_per_class,
            "year_min": self.year_min,
            "year_max": self.year_max,
            "year_per_year": self.year_per_year,
            "year_min_views": self.year_min_views,
        }


@dataclass
class CuratedDataset:
    task: str  # genre | success | year
    records: list[SongRecord]  # lyrics already cleaned
    labels: list  # genre string | "success"/"fail" | year int
    split: list | None  # parallel to records once assigned
    curation_config: dict  # thresholds + seed actually used
    warnings: list = field(default_factory=list)
    created_at: str = ""

    def __post_init__(self):
        if not self.created_at:
            self.created_at = datetime.now(timezone.utc).isoformat()

    def __len__(self) -> int:
        return len(self.records)

    def label_counts(self) -> Counter:
        return Counter(self.labels)

    def subset(self, split_name: str) -> tuple[list[SongRecord], list]:
        """Records and labels belonging to one split."""
        if self.split is None:
            raise ValueError("dataset has no split assignment")
        recs = [r for r, s in zip(self.records, self.split) if s == split_name]
        labs = [l for l, s in zip(self.labels, self.split) if s == split_name]
        return recs, labs


def _clean_record(record: SongRecord) -> SongRecord:
    return replace(record, lyrics=clean_lyrics(record.lyrics))


def _sample_group(group: list[SongRecord], k: int, seed: int, tag: str) -> list[SongRecord]:
    """Deterministically sample k records from a group, independent of the
    caller's iteration order (records sorted by id; child RNG derived from
    the seed and the group tag)."""
    ordered = sorted(group, key=lambda r: r.id)
    if k >= len(ordered):
        return ordered
    rng = random.Random(f"{seed}:{tag}")
    return sorted(rng.sample(ordered, k), key=lambda r: r.id)


def genre_predicate(record: SongRecord, config: CurationConfig) -> bool:
    """Eligibility for the genre dataset, on cleaned lyrics."""
    return (
        record.genre in GENRES
        and record.views >= config.genre_min_views
        and word_count(clean_lyrics(record.lyrics)) > config.genre_min_words
    )


def success_predicate(record: SongRecord, config: CurationConfig) -> bool:
    """Eligibility for the success dataset: any base-filtered record with
    non-empty cleaned lyrics (no view floor for this task)."""
    return word_count(clean_lyrics(record.lyrics)) > 0


def success_label(record: SongRecord, config: CurationConfig) -> str:
    return "success" if record.views >= config.success_view_threshold else "fail"


def year_predicate(record: SongRecord, config: CurationConfig) -> bool:
    return (
        config.year_min <= record.year <= config.year_max
        and record.views >= config.year_min_views
        and word_count(clean_lyrics(record.lyrics)) > 0
    )


def curate_genre_dataset(
    records: Sequence[SongRecord], seed: int, config: CurationConfig | None = None
) -> CuratedDataset:
    """Balanced genre dataset: per-genre quota = genre_total / 5, records
    must exceed the word floor and meet the view floor."""
    cfg = config or CurationConfig()
    quota = cfg.genre_total // len(GENRES)
    warnings: list[str] = []
    picked: list[SongRecord] = []
    eligible_by_genre: dict[str, list[SongRecord]] = {g: [] for g in GENRES}
    for r in records:
        if genre_predicate(r, cfg):
            eligible_by_genre[r.genre].append(r)
    for genre in GENRES:
        pool = eligible_by_genre[genre]
        if not pool:
            warnings.append(f"genre {genre!r}: no eligible records")
            continue
        take = _sample_group(pool, quota, seed, f"genre:{genre}")
        if len(take) < quota:
            warnings.append(f"genre {genre!r}: only {len(take)} eligible records for quota {quota}")
        picked.extend(take)
    picked = _dedupe(sorted(picked, key=lambda r: r.id), warnings)
    cleaned = [_clean_record(r) for r in picked]
    for w in warnings:
        log.warning("curate_genre: %s", w)
    return CuratedDataset(
        task="genre",
        records=cleaned,
        labels=[r.genre for r in cleaned],
        split=None,
        curation_config={"seed": seed, **cfg.to_dict()},
        warnings=warnings,
    )


def curate_success_dataset(
    records: Sequence[SongRecord], seed: int, config: CurationConfig | None = None
) -> CuratedDataset:
    """Balanced success dataset: views >= threshold labels success, both
    classes downsampled to the same size."""
    cfg = config or CurationConfig()
    warnings: list[str] = []
    pools: dict[str, list[SongRecord]] = {"fail": [], "success": []}
    for r in records:
        if success_predicate(r, cfg):
            pools[success_label(r, cfg)].append(r)
    n = min(len(pools["fail"]), len(pools["success"]), cfg.success_per_class)
    if n < cfg.success_per_class:
        warnings.append(
            "insufficient supply: fail=%d success=%d, sampling %d per class"
            % (len(pools["fail"]), len(pools["success"]), n)
        )
    picked: list[SongRecord] = []
    for cls in ("fail", "success"):
        picked.extend(_sample_group(pools[cls], n, seed, f"success:{cls}"))
    picked = _dedupe(sorted(picked, key=lambda r: r.id), warnings)
    cleaned = [_clean_record(r) for r in picked]
    for w in warnings:
        log.warning("curate_success: %s", w)
    return CuratedDataset(
        task="success",
        records=cleaned,
        labels=[success_label(r, cfg) for r in cleaned],
        split=None,
        curation_config={"seed": seed, **cfg.to_dict()},
        warnings=warnings,
    )


def curate_year_dataset(
    records: Sequence[SongRecord], seed: int, config: CurationConfig | None = None
) -> CuratedDataset:
    """Year dataset: up to year_per_year records per calendar year in the
    configured range, view floor applied."""
    cfg = config or CurationConfig()
    warnings: list[str] = []
    by_year: dict[int, list[SongRecord]] = {y: [] for y in range(cfg.year_min, cfg.year_max + 1)}
    for r in records:
        if year_predicate(r, cfg):
            by_year[r.year].append(r)
    picked: list[SongRecord] = []
    for year in range(cfg.year_min, cfg.year_max + 1):
        pool = by_year[year]
        if not pool:
            warnings.append(f"year {year}: no eligible records")
            continue
        take = _sample_group(pool, cfg.year_per_year, seed, f"year:{year}")
        if len(take) < cfg.year_per_year:
            warnings.append(f"year {year}: only {len(take)} eligible records for quota {cfg.year_per_year}")
        picked.extend(take)
    picked = _dedupe(sorted(picked, key=lambda r: r.id), warnings)
    cleaned = [_clean_record(r) for r in picked]
    for w in warnings:
        log.warning("curate_year: %s", w)
    return CuratedDataset(
        task="year",
        records=cleaned,
        labels=[r.year for r in cleaned],
        split=None,
        curation_config={"seed": seed, **cfg.to_dict()},
        warnings=warnings,
    )


def _dedupe(records: list[SongRecord], warnings: list[str]) -> list[SongRecord]:
    seen: set[str] = set()
    out = []
    for r in records:
        if r.id in seen:
            warnings.append(f"duplicate record id {r.id!r} dropped")
            continue
        seen.add(r.id)
        out.append(r)
    return out


def assign_splits(
    dataset: CuratedDataset, ratios: tuple[float, float, float] = (0.8, 0.1, 0.1), seed: int = 0
) -> CuratedDataset:
    """Stratified train/validation/test assignment.

    Per stratum the split sizes follow largest-remainder rounding, so every
    count is within one record of the exact proportion. Strata smaller than
    the number of nonzero splits go entirely to train.
    """
    if len(dataset.records) == 0:
        raise ValueError("cannot split an empty dataset")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"ratios must sum to 1.0, got {ratios}")
    if any(r < 0 for r in ratios):
        raise ValueError(f"ratios must be non-negative, got {ratios}")

    warnings = list(dataset.warnings)
    split_of: dict[str, str] = {}
    strata: dict = {}
    for record, label in zip(dataset.records, dataset.labels):
        strata.setdefault(label, []).append(record)

    n_active = sum(1 for r in ratios if r > 0)
    for label in sorted(strata, key=str):
        members = sorted(strata[label], key=lambda r: r.id)
        n = len(members)
        if n < n_active:
            for r in members:
                split_of[r.id] = "train"
            warnings.append(f"stratum {label!r} has {n} records (< {n_active} splits): all assigned to train")
            continue
        counts = _largest_remainder(n, ratios)
        rng = random.Random(f"{seed}:split:{label}")
        shuffled = members[:]
        rng.shuffle(shuffled)
        start = 0
        for split_name, k in zip(SPLITS, counts):
            for r in shuffled[start : start + k]:
                split_of[r.id] = split_name
            start += k

    split = [split_of[r.id] for r in dataset.records]
    for w in warnings[len(dataset.warnings):]:
        log.warning("assign_splits: %s", w)
    return CuratedDataset(
        task=dataset.task,
        records=dataset.records,
        labels=dataset.labels,
        split=split,
        curation_config={**dataset.curation_config, "split_ratios": list(ratios), "split_seed": seed},
        warnings=warnings,
        created_at=dataset.created_at,
    )


def _largest_remainder(n: int, ratios: Sequence[float]) -> list[int]:
    exact = [r * n for r in ratios]
    counts = [int(q) for q in exact]
    leftover = n - sum(counts)
    order = sorted(range(len(ratios)), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


# ---------------------------------------------------------------------------
# dataset persistence: CSV with label/split columns + JSON manifest sidecar

_CSV_FIELDS = ["id", "title", "artist", "genre", "year", "views", "language", "lyrics", "label", "split"]


def save_dataset(dataset: CuratedDataset, path: str | Path) -> tuple[Path, Path]:
    """Write the dataset CSV and its manifest. Returns (csv_path, manifest_path).

    The CSV bytes depend only on the records, labels, and splits, so re-runs
    under the same seed are byte-identical; the timestamp lives in the
    manifest only.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(_CSV_FIELDS)
        split = dataset.split or [""] * len(dataset.records)
        for record, label, split_name in zip(dataset.records, dataset.labels, split):
            writer.writerow(
                [
                    record.id,
                    record.title,
                    record.artist,
                    record.genre,
                    record.year,
                    record.views,
                    record.language,
                    record.lyrics,
                    label,
                    split_name,
                ]
            )
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest = {
        "task": dataset.task,
        "curation_config": dataset.curation_config,
        "counts": {str(k): v for k, v in sorted(dataset.label_counts().items(), key=lambda kv: str(kv[0]))},
        "n_records": len(dataset.records),
        "warnings": dataset.warnings,
        "created_at": dataset.created_at,
        "csv_sha256": hashlib.sha256(path.read_bytes()).hexdigest(),
    }
    manifest_path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path, manifest_path


def load_dataset(path: str | Path) -> CuratedDataset:
    """Read back a dataset CSV written by save_dataset."""
    path = Path(path)
    manifest_path = path.with_suffix(path.suffix + ".manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8")) if manifest_path.exists() else {}
    task = manifest.get("task", "")
    records, labels, split = [], [], []
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        for row in reader:
            records.append(
                SongRecord(
                    id=row["id"],
                    title=row["title"],
                    artist=row["artist"],
                    genre=row["genre"],
                    year=int(row["year"]),
                    views=int(row["views"]),
                    lyrics=row["lyrics"],
                    language=row["language"],
                )
            )
            label = row["label"]
            labels.append(int(label) if task == "year" else label)
            split.append(row["split"])
    has_split = any(s for s in split)
    return CuratedDataset(
        task=task or ("year" if labels and isinstance(labels[0], int) else ""),
        records=records,
        labels=labels,
        split=split if has_split else None,
        curation_config=manifest.get("curation_config", {}),
        warnings=manifest.get("warnings", []),
        created_at=manifest.get("created_at", ""),
    )


def write_reject_file(report: LoadReport, path: str | Path) -> Path:
    """Sidecar listing every rejected row with its reason."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["row_number", "reason"])
        for row_number, reason in report.rejects:
            writer.writerow([row_number, reason])
    return path
