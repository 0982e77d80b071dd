"""End-to-end orchestration: ingest -> trips -> rules -> measures -> graph
-> spheres -> similarity -> clusters.

Every stage reads its inputs from the previous stage's artifact files and
writes its own, so any suffix of the pipeline can be re-run from an output
directory (swap the weight measure and re-run from the graph stage, sweep
the threshold and re-run from spheres, and so on). The manifest's dataset
statistics are recounted from the artifact files themselves after the run.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import time
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .community import (
    SYMMETRIZE_MODES,
    best_louvain,
    filter_clusters,
    matrix_to_weighted_graph,
    profile_report,
    write_report_json,
)
from .errors import DataError, StageError
from .graph import build_graph_from_rows, node_supports, select_mainstream, threshold_subgraph
from .graph_io import read_graphml, write_dot, write_edges_csv, write_graphml
from .influence import (
    compute_spheres,
    read_similarity_csv,
    read_spheres_json,
    similarity_matrix,
    sphere_distance,
    write_similarity_csv,
    write_spheres_json,
)
from .ingest import build_timelines, parse_reviews, write_reviews_csv
from .measures import WEIGHT_MEASURES, measure_rules, read_measures_csv, write_measures_csv
from .rules import brute_force_rules, mine_rules, read_rules_csv, write_rules_csv
from .trips import (
    build_sequence_dataset,
    merge_trips,
    read_sequences_tsv,
    segment_trips,
    write_sequences_tsv,
)

STAGES = (
    "ingest",
    "trips",
    "mine",
    "measure",
    "graph",
    "spheres",
    "similarity",
    "cluster",
)

ARTIFACTS = {
    "reviews": "reviews_clean.csv",
    "record_errors": "record_errors.csv",
    "sequences": "sequences.tsv",
    "rules": "rules.csv",
    "measures": "measures.csv",
    "graph_dot": "graph.dot",
    "graph_graphml": "graph.graphml",
    "edges": "edges.csv",
    "spheres": "spheres.json",
    "similarity": "similarity.csv",
    "clusters": "clusters.json",
    "manifest": "manifest.json",
}


@dataclass
class PipelineConfig:
    """All pipeline parameters with their default values.

    `k_mainstream=None` and `sphere_distance=None` mean automatic selection
    (support-curve elbow and round(avg sequence length)-1 respectively).
    """

    input: str | None = None
    input_format: str = "csv"
    output_dir: str = "out"
    max_bad_fraction: float = 0.5
    max_gap_days: int = 7
    min_trip_len: int = 4
    dedup_consecutive: bool = False
    min_support_count: int = 1
    weight_measure: str = "klosgen"
    klosgen_threshold: float = 0.1
    k_mainstream: int | None = None
    sphere_distance: int | None = None
    resolution: float = 1.0
    seed: int = 42
    min_cluster_size: int = 3
    best_of_n: int = 1
    symmetrize: str = "mean"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.input_format not in ("csv", "jsonl"):
            raise ValueError(f"input_format must be csv or jsonl, got {self.input_format!r}")
        if not 0.0 <= self.max_bad_fraction <= 1.0:
            raise ValueError("max_bad_fraction must be in [0, 1]")
        if self.max_gap_days < 0:
            raise ValueError("max_gap_days must be >= 0")
        if self.min_trip_len < 1:
            raise ValueError("min_trip_len must be >= 1")
        if self.min_support_count < 1:
            raise ValueError("min_support_count must be >= 1")
        if self.weight_measure not in WEIGHT_MEASURES:
            raise ValueError(
                f"weight_measure must be one of {WEIGHT_MEASURES}, got {self.weight_measure!r}"
            )
        if self.k_mainstream is not None and self.k_mainstream < 1:
            raise ValueError("k_mainstream must be >= 1 or auto")
        if self.sphere_distance is not None and self.sphere_distance < 1:
            raise ValueError("sphere_distance must be >= 1 or auto")
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.min_cluster_size < 1:
            raise ValueError("min_cluster_size must be >= 1")
        if self.best_of_n < 1:
            raise ValueError("best_of_n must be >= 1")
        if self.symmetrize not in SYMMETRIZE_MODES:
            raise ValueError(f"symmetrize must be one of {SYMMETRIZE_MODES}")

    @classmethod
    def from_mapping(cls, values: dict) -> "PipelineConfig":
        return cls(**_coerce_fields(values))

    @classmethod
    def from_file(cls, path) -> "PipelineConfig":
        return cls.from_mapping(load_config_file(path))

    def with_overrides(self, overrides: dict) -> "PipelineConfig":
        merged = dataclasses.asdict(self)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return PipelineConfig.from_mapping(merged)


def _coerce_fields(values: dict) -> dict:
    """Coerce config values (e.g. strings from a key=value file) to field types."""
    out = {}
    by_name = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    for key, value in values.items():
        if key not in by_name:
            raise ValueError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = value.strip()
            if key in ("k_mainstream", "sphere_distance"):
                value = None if value == "auto" else int(value)
            elif key in ("max_gap_days", "min_trip_len", "min_support_count", "seed",
                         "min_cluster_size", "best_of_n"):
                value = int(value)
            elif key in ("max_bad_fraction", "klosgen_threshold", "resolution"):
                value = float(value)
            elif key == "dedup_consecutive":
                value = value.lower() in ("1", "true", "yes", "on")
        out[key] = value
    return out


def load_config_file(path) -> dict:
    """Parse a config file: JSON if it looks like JSON, else flat key=value lines."""
    text = Path(path).read_text(encoding="utf-8")
    if text.lstrip().startswith("{"):
        return json.loads(text)
    values = {}
    for i, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{i}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


@dataclass
class RunManifest:
    config: dict
    stats: dict
    timings: dict
    version: str = __version__
    start_stage: str = "ingest"

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "start_stage": self.start_stage,
            "config": self.config,
            "stats": self.stats,
            "timings": self.timings,
        }


def _artifact(outdir: Path, name: str, must_exist: bool = False) -> Path:
    path = outdir / ARTIFACTS[name]
    if must_exist and not path.exists():
        raise DataError(f"required stage input {path} does not exist")
    return path


def _location_names(outdir: Path) -> dict[str, str]:
    path = _artifact(outdir, "reviews")
    names: dict[str, str] = {}
    if path.exists():
        with open(path, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                names.setdefault(row["location_id"], row["location_name"])
    return names


def stage_ingest(config: PipelineConfig, outdir: Path) -> None:
    if config.input is None:
        raise DataError("no input file configured")
    reviews, errors = parse_reviews(
        config.input, config.input_format, config.max_bad_fraction
    )
    write_reviews_csv(reviews, _artifact(outdir, "reviews"))
    with open(_artifact(outdir, "record_errors"), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["line", "reason"])
        for err in errors:
            writer.writerow([err.line, err.reason])


def stage_trips(config: PipelineConfig, outdir: Path, extra_stats: dict) -> None:
    reviews, _ = parse_reviews(_artifact(outdir, "reviews", must_exist=True), "csv")
    timelines = build_timelines(reviews)
    segmented = 0
    merged_trips = []
    for timeline in timelines:
        trips = segment_trips(timeline)
        segmented += len(trips)
        merged_trips.extend(merge_trips(trips, config.max_gap_days))
    dataset = build_sequence_dataset(
        merged_trips, config.min_trip_len, config.dedup_consecutive
    )
    write_sequences_tsv(dataset, _artifact(outdir, "sequences"))
    extra_stats["n_trips_segmented"] = segmented
    extra_stats["n_trips_merged"] = len(merged_trips)


def stage_mine(config: PipelineConfig, outdir: Path) -> None:
    dataset = read_sequences_tsv(_artifact(outdir, "sequences", must_exist=True))
    rules = mine_rules(dataset, config.min_support_count)
    write_rules_csv(rules, _artifact(outdir, "rules"))


def verify_mining(outdir: Path, min_support_count: int = 1) -> bool:
    """Cross-check the mined rules against the brute-force scan."""
    dataset = read_sequences_tsv(_artifact(outdir, "sequences", must_exist=True))
    return mine_rules(dataset, min_support_count) == brute_force_rules(
        dataset, min_support_count
    )


def stage_measure(config: PipelineConfig, outdir: Path) -> None:
    rules = read_rules_csv(_artifact(outdir, "rules", must_exist=True))
    write_measures_csv(measure_rules(rules), _artifact(outdir, "measures"))


def stage_graph(config: PipelineConfig, outdir: Path) -> None:
    rows = read_measures_csv(_artifact(outdir, "measures", must_exist=True))
    dataset = read_sequences_tsv(_artifact(outdir, "sequences", must_exist=True))
    supports = node_supports(dataset)
    graph = build_graph_from_rows(
        rows, supports, config.weight_measure, names=_location_names(outdir)
    )
    mainstream: tuple[str, ...] = ()
    if graph.nodes:
        selection = select_mainstream(graph, k=config.k_mainstream)
        mainstream = selection.mainstream
    write_dot(graph, _artifact(outdir, "graph_dot"), mainstream)
    write_graphml(graph, _artifact(outdir, "graph_graphml"), mainstream)
    write_edges_csv(graph, _artifact(outdir, "edges"))


def stage_spheres(config: PipelineConfig, outdir: Path) -> None:
    graph, mainstream_flags = read_graphml(
        _artifact(outdir, "graph_graphml", must_exist=True)
    )
    # Centers keep the selection order: support descending, id as tie-break.
    centers = sorted(
        mainstream_flags, key=lambda loc: (-graph.nodes[loc].support, loc)
    )
    if not centers:
        write_spheres_json([], _artifact(outdir, "spheres"))
        return
    if config.sphere_distance is not None:
        distance = config.sphere_distance
    else:
        sequences_path = _artifact(outdir, "sequences")
        if not sequences_path.exists():
            raise DataError(
                "automatic sphere distance needs the sequences artifact; "
                "pass an explicit sphere_distance instead"
            )
        distance = sphere_distance(read_sequences_tsv(sequences_path))
    subgraph = threshold_subgraph(graph, config.klosgen_threshold)
    spheres = compute_spheres(subgraph, centers, distance)
    write_spheres_json(spheres, _artifact(outdir, "spheres"))


def stage_similarity(config: PipelineConfig, outdir: Path, extra_stats: dict) -> None:
    spheres = read_spheres_json(_artifact(outdir, "spheres", must_exist=True))
    matrix = similarity_matrix(spheres)
    write_similarity_csv(matrix, _artifact(outdir, "similarity"))
    extra_stats["empty_spheres"] = matrix.empty_centers


def stage_cluster(config: PipelineConfig, outdir: Path) -> None:
    matrix = read_similarity_csv(_artifact(outdir, "similarity", must_exist=True))
    node_info = {}
    graphml = _artifact(outdir, "graph_graphml")
    if graphml.exists():
        graph, _ = read_graphml(graphml)
        node_info = graph.nodes
    weighted = matrix_to_weighted_graph(matrix, config.symmetrize)
    assignment = best_louvain(
        weighted, resolution=config.resolution, seed=config.seed, n_runs=config.best_of_n
    )
    assignment.parameters["best_of_n"] = config.best_of_n
    assignment.parameters["symmetrize"] = config.symmetrize
    filtered = filter_clusters(assignment, config.min_cluster_size)
    write_report_json(
        profile_report(filtered, matrix, node_info), _artifact(outdir, "clusters")
    )


def recount_stats(outdir: Path) -> dict:
    """Dataset statistics recounted directly from whatever artifacts exist."""
    stats: dict = {}
    reviews = _artifact(outdir, "reviews")
    if reviews.exists():
        users = set()
        n = 0
        with open(reviews, "r", encoding="utf-8", newline="") as fh:
            for row in csv.DictReader(fh):
                users.add(row["user_id"])
                n += 1
        stats["n_reviews"] = n
        stats["n_users"] = len(users)
    errors = _artifact(outdir, "record_errors")
    if errors.exists():
        with open(errors, "r", encoding="utf-8", newline="") as fh:
            stats["n_record_errors"] = sum(1 for _ in csv.DictReader(fh))
    sequences = _artifact(outdir, "sequences")
    if sequences.exists():
        dataset = read_sequences_tsv(sequences)
        stats["n_sequences"] = dataset.count
        stats["avg_sequence_length"] = dataset.avg_length
    rules = _artifact(outdir, "rules")
    if rules.exists():
        with open(rules, "r", encoding="utf-8", newline="") as fh:
            stats["n_rules"] = sum(1 for _ in csv.DictReader(fh))
    graphml = _artifact(outdir, "graph_graphml")
    if graphml.exists():
        graph, mainstream = read_graphml(graphml)
        stats["n_nodes"] = len(graph.nodes)
        stats["n_arcs"] = len(graph.arcs)
        stats["n_mainstream"] = len(mainstream)
        total = sum(info.support for info in graph.nodes.values())
        covered = sum(graph.nodes[loc].support for loc in mainstream)
        stats["coverage_fraction"] = covered / total if total else 0.0
    spheres = _artifact(outdir, "spheres")
    if spheres.exists():
        loaded = read_spheres_json(spheres)
        stats["n_spheres"] = len(loaded)
        stats["sphere_distance"] = loaded[0].distance if loaded else None
    clusters = _artifact(outdir, "clusters")
    if clusters.exists():
        report = json.loads(clusters.read_text(encoding="utf-8"))
        stats["n_communities"] = report["n_communities"]
        stats["n_dropped"] = len(report["dropped"])
        stats["modularity"] = report["modularity"]
    return stats


def run_pipeline(config: PipelineConfig, start_stage: str = "ingest") -> RunManifest:
    """Run all stages from `start_stage` on, then write the manifest.

    Earlier stages' artifacts must already exist in the output directory.
    Raises StageError on the first failing stage; artifacts written by
    completed stages are retained.
    """
    if start_stage not in STAGES:
        raise ValueError(f"unknown stage {start_stage!r} (choose from {STAGES})")
    outdir = Path(config.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    timings: dict[str, float] = {}
    extra_stats: dict = {}
    runners = {
        "ingest": lambda: stage_ingest(config, outdir),
        "trips": lambda: stage_trips(config, outdir, extra_stats),
        "mine": lambda: stage_mine(config, outdir),
        "measure": lambda: stage_measure(config, outdir),
        "graph": lambda: stage_graph(config, outdir),
        "spheres": lambda: stage_spheres(config, outdir),
        "similarity": lambda: stage_similarity(config, outdir, extra_stats),
        "cluster": lambda: stage_cluster(config, outdir),
    }
    for stage in STAGES[STAGES.index(start_stage) :]:
        started = time.perf_counter()
        try:
            runners[stage]()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, str(exc)) from exc
        timings[stage] = time.perf_counter() - started

    stats = recount_stats(outdir)
    stats.update(extra_stats)
    manifest = RunManifest(
        config=dataclasses.asdict(config),
        stats=stats,
        timings=timings,
        start_stage=start_stage,
    )
    _artifact(outdir, "manifest").write_text(
        json.dumps(manifest.to_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return manifest
