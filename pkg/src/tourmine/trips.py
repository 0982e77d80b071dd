"""Segment user timelines into trips and build the sequence dataset.

A trip is a maximal run of review days with no full day skipped: reviews on
consecutive (or equal) dates stay together, a gap of two or more days breaks
the trip. Two adjacent trips by the same user are then merged back together
when the break between them is short relative to both trips and the user
stayed in the same country across the break.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import date

from .ingest import UserTimeline


@dataclass(frozen=True, slots=True)
class Trip:
    """An ordered run of location visits by one user.

    `visits` holds one (location_id, date) entry per review; `countries`
    is aligned with `visits`.
    """

    user_id: str
    visits: tuple[tuple[str, date], ...]
    countries: tuple[str, ...]

    @property
    def start_date(self) -> date:
        return self.visits[0][1]

    @property
    def end_date(self) -> date:
        return self.visits[-1][1]

    @property
    def duration_days(self) -> int:
        """Calendar span in days, inclusive of both endpoints (>= 1)."""
        return (self.end_date - self.start_date).days + 1

    @property
    def first_country(self) -> str:
        return self.countries[0]

    @property
    def last_country(self) -> str:
        return self.countries[-1]


@dataclass(frozen=True, slots=True)
class SequenceDataset:
    """Trips serialized as location-id sequences, with dataset-level stats."""

    sequences: tuple[tuple[str, ...], ...]
    count: int
    avg_length: float

    @classmethod
    def from_sequences(cls, sequences: list[tuple[str, ...]]) -> "SequenceDataset":
        count = len(sequences)
        total = sum(len(s) for s in sequences)
        return cls(tuple(sequences), count, total / count if count else 0.0)


def segment_trips(timeline: UserTimeline) -> list[Trip]:
    """Split a date-sorted timeline into trips at every gap of >= 2 days."""
    trips: list[Trip] = []
    visits: list[tuple[str, date]] = []
    countries: list[str] = []
    prev: date | None = None
    for review in timeline.reviews:
        if prev is not None and (review.timestamp - prev).days >= 2:
            trips.append(Trip(timeline.user_id, tuple(visits), tuple(countries)))
            visits, countries = [], []
        visits.append((review.location_id, review.timestamp))
        countries.append(review.country)
        prev = review.timestamp
    if visits:
        trips.append(Trip(timeline.user_id, tuple(visits), tuple(countries)))
    return trips


def break_days(earlier: Trip, later: Trip) -> int:
    """Full calendar days strictly between two trips (end/start days excluded)."""
    return (later.start_date - earlier.end_date).days - 1


def _can_merge(earlier: Trip, later: Trip, max_gap_days: int) -> bool:
    gap = break_days(earlier, later)
    return (
        gap <= max_gap_days
        and gap <= earlier.duration_days
        and gap <= later.duration_days
        and earlier.last_country == later.first_country
    )


def merge_trips(trips: list[Trip], max_gap_days: int = 7) -> list[Trip]:
    """Merge adjacent trips across short breaks, left to right to a fixed point.

    Adjacent trips merge when the break between them is no longer than
    `max_gap_days`, no longer than either trip's own duration, and the first
    trip ended in the country where the second one started. After a merge the
    combined trip's duration is recomputed before the next gap is tested, and
    scanning restarts until no merge applies.
    """
    merged = list(trips)
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(merged) - 1:
            left, right = merged[i], merged[i + 1]
            if _can_merge(left, right, max_gap_days):
                merged[i : i + 2] = [
                    Trip(
                        left.user_id,
                        left.visits + right.visits,
                        left.countries + right.countries,
                    )
                ]
                changed = True
            else:
                i += 1
    return merged


def trip_to_sequence(trip: Trip, dedup_consecutive: bool = False) -> tuple[str, ...]:
    """Serialize a trip as its location ids in visit order.

    With `dedup_consecutive`, immediate repeats of the same location collapse
    to a single occurrence.
    """
    locations = [loc for loc, _ in trip.visits]
    if not dedup_consecutive:
        return tuple(locations)
    collapsed = [locations[0]]
    for loc in locations[1:]:
        if loc != collapsed[-1]:
            collapsed.append(loc)
    return tuple(collapsed)


def build_sequence_dataset(
    trips: list[Trip],
    min_trip_len: int = 4,
    dedup_consecutive: bool = False,
) -> SequenceDataset:
    """Turn finalized trips into the sequence dataset, dropping short trips.

    Length is measured after the optional consecutive-duplicate collapse, so
    `min_trip_len` bounds the length of the emitted sequences themselves.
    """
    sequences = []
    for trip in trips:
        seq = trip_to_sequence(trip, dedup_consecutive)
        if len(seq) >= min_trip_len:
            sequences.append(seq)
    return SequenceDataset.from_sequences(sequences)


def write_sequences_tsv(dataset: SequenceDataset, path) -> None:
    """One sequence per line, location ids tab-separated."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for seq in dataset.sequences:
            fh.write("\t".join(seq) + "\n")


def read_sequences_tsv(path) -> SequenceDataset:
    sequences = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                sequences.append(tuple(line.split("\t")))
    return SequenceDataset.from_sequences(sequences)
