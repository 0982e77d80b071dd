"""Mine direct-follow sequential rules X -> Y from the sequence dataset.

A rule X -> Y means "a visit to X is immediately followed by a visit to Y"
within one sequence. All counting is at sequence level: a sequence
contributes at most one to any count no matter how often the pattern repeats
inside it. Self-rules X -> X are excluded.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import islice

from .errors import DataError
from .trips import SequenceDataset

BRUTE_FORCE_MAX_SEQUENCES = 100_000


@dataclass(frozen=True, slots=True)
class SequentialRule:
    """An ordered pair (X directly-followed-by Y) with its raw counts."""

    antecedent: str
    consequent: str
    seq_count_rule: int  # sequences containing X immediately followed by Y
    seq_count_x: int  # sequences containing X
    seq_count_y: int  # sequences containing Y
    n_sequences: int

    def __post_init__(self):
        if self.antecedent == self.consequent:
            raise ValueError("self-rules are excluded")
        if not (
            0
            < self.seq_count_rule
            <= min(self.seq_count_x, self.seq_count_y)
            <= self.n_sequences
        ):
            raise ValueError(
                f"inconsistent counts for {self.antecedent}->{self.consequent}: "
                f"rule={self.seq_count_rule} X={self.seq_count_x} "
                f"Y={self.seq_count_y} n={self.n_sequences}"
            )


def _chunks(items, size):
    it = iter(items)
    while chunk := list(islice(it, size)):
        yield chunk


def mine_rules(
    dataset: SequenceDataset, min_support_count: int = 1
) -> list[SequentialRule]:
    """Extract every direct-follow rule occurring in >= min_support_count sequences.

    Implemented as a map-reduce over sequence chunks: each chunk accumulates
    per-sequence-deduplicated pair and location counters, then the partial
    counters are merged. Output is sorted by (antecedent, consequent).
    """
    pair_counts: dict[tuple[str, str], int] = {}
    loc_counts: dict[str, int] = {}
    for chunk in _chunks(dataset.sequences, 4096):
        part_pairs: dict[tuple[str, str], int] = {}
        part_locs: dict[str, int] = {}
        for seq in chunk:
            pairs = {
                (a, b) for a, b in zip(seq, islice(seq, 1, None)) if a != b
            }
            for pair in pairs:
                part_pairs[pair] = part_pairs.get(pair, 0) + 1
            for loc in set(seq):
                part_locs[loc] = part_locs.get(loc, 0) + 1
        for pair, c in part_pairs.items():
            pair_counts[pair] = pair_counts.get(pair, 0) + c
        for loc, c in part_locs.items():
            loc_counts[loc] = loc_counts.get(loc, 0) + c

    return [
        SequentialRule(x, y, c, loc_counts[x], loc_counts[y], dataset.count)
        for (x, y), c in sorted(pair_counts.items())
        if c >= min_support_count
    ]


def brute_force_rules(
    dataset: SequenceDataset, min_support_count: int = 1
) -> list[SequentialRule]:
    """Definitional rule extraction used as a test oracle and by --verify.

    For every adjacent-pair candidate, rescans the whole dataset with plain
    membership tests. Refuses datasets above BRUTE_FORCE_MAX_SEQUENCES.
    """
    if dataset.count > BRUTE_FORCE_MAX_SEQUENCES:
        raise DataError(
            f"brute-force scan refused: {dataset.count} sequences "
            f"(limit {BRUTE_FORCE_MAX_SEQUENCES})"
        )
    candidates = set()
    for seq in dataset.sequences:
        for i in range(len(seq) - 1):
            if seq[i] != seq[i + 1]:
                candidates.add((seq[i], seq[i + 1]))

    rules = []
    for x, y in sorted(candidates):
        rule_count = sum(
            1
            for seq in dataset.sequences
            if any(seq[i] == x and seq[i + 1] == y for i in range(len(seq) - 1))
        )
        if rule_count < min_support_count:
            continue
        x_count = sum(1 for seq in dataset.sequences if x in seq)
        y_count = sum(1 for seq in dataset.sequences if y in seq)
        rules.append(SequentialRule(x, y, rule_count, x_count, y_count, dataset.count))
    return rules


RULES_CSV_HEADER = ["X", "Y", "seq_count_rule", "seq_count_X", "seq_count_Y", "n_sequences"]


def write_rules_csv(rules: list[SequentialRule], path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RULES_CSV_HEADER)
        for r in rules:
            writer.writerow(
                [r.antecedent, r.consequent, r.seq_count_rule, r.seq_count_x, r.seq_count_y, r.n_sequences]
            )


def read_rules_csv(path) -> list[SequentialRule]:
    import csv

    rules = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            rules.append(
                SequentialRule(
                    row["X"],
                    row["Y"],
                    int(row["seq_count_rule"]),
                    int(row["seq_count_X"]),
                    int(row["seq_count_Y"]),
                    int(row["n_sequences"]),
                )
            )
    return rules
