"""Synthetic review-log generator with planted location communities.

Locations are split into communities; every location gets two preferred
successors inside its own community (a community-wide tour cycle plus one
random shortcut). A simulated trip is a walk that follows a preferred
successor with odds `intra_odds` : 1 over any other location, so
within-community transitions dominate and carry genuine direct-follow
signal, which is what the downstream interest measures reward. A uniform
walk over community members would NOT work here: it elevates every
community member's presence equally, so no specific successor beats the
base rate and the adjacency-lift measures stay near zero.

Each trip produces one review per consecutive day; trips by one user are
spaced far apart so they never merge.
"""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from datetime import date, timedelta

from .ingest import CATEGORIES, CSV_HEADER

_BASE_DATE = date(2015, 1, 1)
_TRIP_SPACING_DAYS = 40


@dataclass(frozen=True, slots=True)
class SynthConfig:
    n_users: int = 100
    n_locations: int = 20
    n_communities: int = 2
    intra_odds: float = 20.0
    trips_per_user: int = 2
    trip_len_min: int = 3
    trip_len_max: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 1 or self.n_locations < 1 or self.n_communities < 1:
            raise ValueError("n_users, n_locations, n_communities must be positive")
        if self.n_communities > self.n_locations:
            raise ValueError("more communities than locations")
        if self.intra_odds <= 0:
            raise ValueError("intra_odds must be positive")
        if not 1 <= self.trip_len_min <= self.trip_len_max:
            raise ValueError("bad trip length bounds")


def planted_assignment(config: SynthConfig) -> dict[str, int]:
    """Ground-truth community index per location id (contiguous blocks)."""
    base = config.n_locations // config.n_communities
    extra = config.n_locations % config.n_communities
    assignment: dict[str, int] = {}
    loc = 0
    for community in range(config.n_communities):
        size = base + (1 if community < extra else 0)
        for _ in range(size):
            assignment[f"L{loc:03d}"] = community
            loc += 1
    return assignment


def _preferred_successors(
    config: SynthConfig, assignment: dict[str, int], rng: random.Random
) -> dict[str, list[str]]:
    """Two intra-community successors per location: cycle next + one shortcut."""
    by_community: dict[int, list[str]] = {}
    for loc, community in assignment.items():
        by_community.setdefault(community, []).append(loc)

    preferred: dict[str, list[str]] = {loc: [] for loc in assignment}
    for community in sorted(by_community):
        members = sorted(by_community[community])
        if len(members) < 2:
            continue
        cycle = members[:]
        rng.shuffle(cycle)
        for i, loc in enumerate(cycle):
            succ = [cycle[(i + 1) % len(cycle)]]
            others = [c for c in members if c != loc and c not in succ]
            if others:
                succ.append(rng.choice(others))
            preferred[loc] = succ
    return preferred


def generate_synthetic(config: SynthConfig) -> list[dict]:
    """Produce review records (dicts in the canonical CSV schema)."""
    rng = random.Random(config.seed)
    assignment = planted_assignment(config)
    locations = sorted(assignment)
    preferred = _preferred_successors(config, assignment, rng)

    meta = {}
    for i, loc in enumerate(locations):
        community = assignment[loc]
        meta[loc] = {
            "name": f"Place {loc[1:]}",
            "latitude": round(48.80 + 0.05 * community + rng.uniform(-0.01, 0.01), 6),
            "longitude": round(2.25 + 0.05 * community + rng.uniform(-0.01, 0.01), 6),
            "category": CATEGORIES[i % len(CATEGORIES)],
        }

    rows: list[dict] = []
    for u in range(config.n_users):
        user_id = f"u{u:05d}"
        for t in range(config.trips_per_user):
            length = rng.randint(config.trip_len_min, config.trip_len_max)
            start_day = _BASE_DATE + timedelta(days=t * _TRIP_SPACING_DAYS)
            current = rng.choice(locations)
            for day in range(length):
                info = meta[current]
                rows.append(
                    {
                        "user_id": user_id,
                        "location_id": current,
                        "location_name": info["name"],
                        "latitude": info["latitude"],
                        "longitude": info["longitude"],
                        "category": info["category"],
                        "rating": rng.randint(1, 5),
                        "date": (start_day + timedelta(days=day)).isoformat(),
                        "country": "FR",
                    }
                )
                current = _next_location(config, locations, preferred, current, rng)
    return rows


def _next_location(
    config: SynthConfig,
    locations: list[str],
    preferred: dict[str, list[str]],
    current: str,
    rng: random.Random,
) -> str:
    succ = preferred[current]
    others = [loc for loc in locations if loc != current and loc not in succ]
    if not succ and not others:
        return current
    total = config.intra_odds * len(succ) + len(others)
    pick = rng.uniform(0.0, total)
    if succ and pick < config.intra_odds * len(succ):
        return succ[int(pick // config.intra_odds)]
    return others[min(int(pick - config.intra_odds * len(succ)), len(others) - 1)]


def write_synthetic_csv(config: SynthConfig, path) -> None:
    rows = generate_synthetic(config)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_HEADER)
        writer.writeheader()
        writer.writerows(rows)
