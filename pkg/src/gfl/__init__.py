"""Graph filtration learning: a differentiable persistent homology readout."""

from .filtration import Filtration, Simplex, build_sublevel_filtration, negate_filter
from .graph import Graph, GraphDataset, initial_features, load_tu_dataset, parse_tu_dataset, stratified_folds
from .model import Model, ModelConfig, make_batch
from .persistence import (
    BarcodeSet,
    RawBarcodes,
    assemble_processed_barcodes,
    compute_barcodes,
    persistence_matrix_reduction,
    persistence_union_find,
)
from .vectorization import VectorizationParams, rational_hat, rational_hat_grad, vectorize

__version__ = "0.1.0"
