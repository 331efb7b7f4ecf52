"""Identify mutually exclusive concepts across several description spaces of a dataset.

Each concept is a hyper-ellipsoid per description space; a sample belongs to
a concept when it lies inside all of that concept's ellipsoids and inside no
other concept's. The concept quality measure (CQM) scores a set of concepts
and CMA-ES maximizes it.
"""
from .cqm import (ConceptAssignment, CqmConfig, CqmReport, assign, concept_quality, evaluate, scaling_f,
                  total_quality)
from .dataset import (Dataset, DatasetError, DescriptionSpacePartition, PreferenceSet, load_dataset, normalize,
                      partition_features)
from .kernels import BACKEND
from .optimizer import OptimizerConfig, identify_concepts, initialize_population, multi_restart
from .regions import EllipsoidRegion, RegionGrid, candidate_sets, contains, decode, encode, genome_length
from .represent import random_representatives, select_representatives

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConceptAssignment", "CqmConfig", "CqmReport", "Dataset", "DatasetError",
    "DescriptionSpacePartition", "EllipsoidRegion", "OptimizerConfig", "PreferenceSet", "RegionGrid",
    "assign", "candidate_sets", "concept_quality", "contains", "decode", "encode", "evaluate",
    "genome_length", "identify_concepts", "initialize_population", "load_dataset", "multi_restart",
    "normalize", "partition_features", "random_representatives", "scaling_f", "select_representatives",
    "total_quality",
]
