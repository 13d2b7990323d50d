"""Raw data to planning instances: stop detection, sites, fleet scaling, synthetic fixtures."""

from .fleet import replicate_fleet
from .ingest import IngestReport, ingest, ingest_files, read_sites, read_substations, read_traces
from .sites import build_access_matrix, cluster_depots, nearest_substations, trucks_without_access
from .synthetic import SpecError, SyntheticSpec, binary_count, generate_synthetic
from .traces import LabeledTrace, RawTrace, classify_stops, downsample

__all__ = [
    "IngestReport", "LabeledTrace", "RawTrace", "SpecError", "SyntheticSpec", "binary_count",
    "build_access_matrix", "classify_stops", "cluster_depots", "downsample", "generate_synthetic",
    "ingest", "ingest_files", "nearest_substations", "read_sites", "read_substations", "read_traces",
    "replicate_fleet", "trucks_without_access",
]
