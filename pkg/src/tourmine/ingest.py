"""Parse raw review logs and normalize them into per-user chronological timelines.

Input is a CSV or JSONL file of geo-located reviews, one record per line:
user_id, location_id, location_name, latitude, longitude, category, rating,
date (ISO-8601, day resolution), country (ISO-3166 alpha-2). Malformed
records are collected, not fatal, unless they exceed a configurable fraction
of the input.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Union

from .errors import CorruptDatasetError, DataError

CATEGORIES = ("hotel", "restaurant", "attraction", "other")

CSV_HEADER = [
    "user_id",
    "location_id",
    "location_name",
    "latitude",
    "longitude",
    "category",
    "rating",
    "date",
    "country",
]


@dataclass(frozen=True, slots=True)
class Review:
    """One user's rating of one location on one calendar day."""

    user_id: str
    location_id: str
    location_name: str
    latitude: float
    longitude: float
    category: str
    rating: float | None
    timestamp: date
    country: str


@dataclass(frozen=True, slots=True)
class RecordError:
    """A malformed input record: physical line number plus the reason."""

    line: int
    reason: str


@dataclass(frozen=True, slots=True)
class UserTimeline:
    """All reviews by one user, sorted by date (input order breaks ties)."""

    user_id: str
    reviews: tuple[Review, ...]


def _validate_record(raw: dict) -> Review:
    user_id = str(raw.get("user_id") or "").strip()
    location_id = str(raw.get("location_id") or "").strip()
    if not user_id:
        raise ValueError("empty user_id")
    if not location_id:
        raise ValueError("empty location_id")

    try:
        latitude = float(raw["latitude"])
        longitude = float(raw["longitude"])
    except (KeyError, TypeError, ValueError):
        raise ValueError("latitude/longitude not numeric") from None
    if not -90.0 <= latitude <= 90.0:
        raise ValueError(f"latitude {latitude} outside [-90, 90]")
    if not -180.0 <= longitude <= 180.0:
        raise ValueError(f"longitude {longitude} outside [-180, 180]")

    category = str(raw.get("category") or "").strip().lower()
    if category not in CATEGORIES:
        raise ValueError(f"unknown category {category!r}")

    rating_raw = raw.get("rating")
    rating: float | None
    if rating_raw is None or (isinstance(rating_raw, str) and not rating_raw.strip()):
        rating = None
    else:
        try:
            rating = float(rating_raw)
        except (TypeError, ValueError):
            raise ValueError(f"rating {rating_raw!r} not numeric") from None
        if not 1.0 <= rating <= 5.0:
            raise ValueError(f"rating {rating} outside [1, 5]")

    date_raw = raw.get("date")
    if date_raw is None or not str(date_raw).strip():
        raise ValueError("missing date")
    try:
        # Day granularity: anything beyond YYYY-MM-DD is dropped here.
        timestamp = date.fromisoformat(str(date_raw).strip()[:10])
    except ValueError:
        raise ValueError(f"unparseable date {date_raw!r}") from None

    country = str(raw.get("country") or "").strip().upper()
    if len(country) != 2 or not country.isalpha():
        raise ValueError(f"country {raw.get('country')!r} is not ISO-3166 alpha-2")

    return Review(
        user_id=user_id,
        location_id=location_id,
        location_name=str(raw.get("location_name") or "").strip(),
        latitude=latitude,
        longitude=longitude,
        category=category,
        rating=rating,
        timestamp=timestamp,
        country=country,
    )


def _iter_csv(text: io.TextIOBase) -> Iterable[tuple[int, dict | None, str | None]]:
    reader = csv.DictReader(text)
    if reader.fieldnames is None:
        return
    missing = [c for c in CSV_HEADER if c not in reader.fieldnames]
    if missing:
        raise DataError(f"CSV header is missing columns: {', '.join(missing)}")
    for row in reader:
        if row.get(None):
            yield reader.line_num, None, "row has more fields than the header"
        else:
            yield reader.line_num, row, None


def _iter_jsonl(text: io.TextIOBase) -> Iterable[tuple[int, dict | None, str | None]]:
    for line_num, line in enumerate(text, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            yield line_num, None, f"invalid JSON: {exc.msg}"
            continue
        if not isinstance(obj, dict):
            yield line_num, None, "JSON line is not an object"
            continue
        yield line_num, obj, None


def parse_reviews(
    source: Union[str, Path, io.IOBase],
    fmt: str = "csv",
    max_bad_fraction: float = 0.5,
) -> tuple[list[Review], list[RecordError]]:
    """Parse a review file into validated records plus a malformed-record log.

    `source` is a path or an open text/binary stream; `fmt` is "csv" or
    "jsonl". Every well-formed record becomes a Review; the rest become
    RecordErrors carrying physical line numbers. Raises CorruptDatasetError
    when malformed records exceed `max_bad_fraction` of all records, and
    DataError when the source itself is unreadable.
    """
    if fmt not in ("csv", "jsonl"):
        raise DataError(f"unknown input format {fmt!r}")

    close_after = False
    if isinstance(source, (str, Path)):
        try:
            stream: io.TextIOBase = open(source, "r", encoding="utf-8", newline="")
        except OSError as exc:
            raise DataError(f"cannot read {source}: {exc}") from exc
        close_after = True
    elif isinstance(source, (io.RawIOBase, io.BufferedIOBase)):
        stream = io.TextIOWrapper(source, encoding="utf-8", newline="")
    else:
        stream = source  # already a text stream

    reviews: list[Review] = []
    errors: list[RecordError] = []
    try:
        rows = _iter_csv(stream) if fmt == "csv" else _iter_jsonl(stream)
        for line_num, raw, problem in rows:
            if problem is not None:
                errors.append(RecordError(line_num, problem))
                continue
            try:
                reviews.append(_validate_record(raw))
            except ValueError as exc:
                errors.append(RecordError(line_num, str(exc)))
    except UnicodeDecodeError as exc:
        raise DataError(f"source is not valid UTF-8: {exc}") from exc
    finally:
        if close_after:
            stream.close()

    total = len(reviews) + len(errors)
    if total and len(errors) / total > max_bad_fraction:
        raise CorruptDatasetError(
            f"{len(errors)} of {total} records malformed "
            f"(> {max_bad_fraction:.0%}); refusing to continue"
        )
    return reviews, errors


def build_timelines(reviews: list[Review]) -> list[UserTimeline]:
    """Group reviews into one timeline per user, each sorted by date.

    Sorting is stable, so same-day reviews keep their input order. Output is
    sorted by user_id; total review count is conserved.
    """
    by_user: dict[str, list[Review]] = {}
    for review in reviews:
        by_user.setdefault(review.user_id, []).append(review)
    return [
        UserTimeline(user_id, tuple(sorted(revs, key=lambda r: r.timestamp)))
        for user_id, revs in sorted(by_user.items())
    ]


def write_reviews_csv(reviews: Iterable[Review], path: Union[str, Path]) -> None:
    """Write normalized reviews back out in the canonical CSV schema."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in reviews:
            writer.writerow(
                [
                    r.user_id,
                    r.location_id,
                    r.location_name,
                    repr(r.latitude),
                    repr(r.longitude),
                    r.category,
                    "" if r.rating is None else repr(r.rating),
                    r.timestamp.isoformat(),
                    r.country,
                ]
            )
