"""Semi-supervised node classification by entropy minimization over
graph aggregations, with full-batch and edge-wise stochastic trainers,
plain MLP/GCN baselines, dataset tooling and a benchmark harness.
"""

from .errors import (DataFormatError, FetchError, InputError, NonFiniteError,
                     ShapeError)
from .tensor_nn import (AdamState, Mlp, adam_step, cross_entropy_soft,
                        glorot_uniform, log_softmax, one_hot,
                        softmax_cross_entropy, softmax_temperature,
                        tempered_softmax_vjp)
from .graph import (Graph, NormalizedAdjacency, aggregate,
                    aggregate_transpose, bfs_distance_groups, generate_sbm,
                    mask_inductive, normalize_adjacency)
from .sampling import (EdgeBatch, EdgeSampler, build_alias_table,
                       empirical_distribution, exact_sweep_batches,
                       measure_draw_rate, sample_edge_batch,
                       total_variation)
from .inference import (Prediction, equilibrium_residual, f1_micro,
                        infer_non_hop, infer_one_hop, verify_bound)
from .training import (GEM_TABLE_GRID, METHODS, OKDEEM_TABLE_GRID, EmaLogits,
                       GcnModel, GridResult, LabelSet, RunReport,
                       TrainConfig, combine_pseudo_labels,
                       eem_batch_loss_and_grads, expand_grid,
                       gem_loss_and_grads, grid_search,
                       label_set_from_split, load_model,
                       okdeem_batch_loss_and_grads, save_model,
                       supervised_loss_and_grads, train)
from .data_io import (CACHE_ENV_VAR, DATASETS, DatasetBundle, Split,
                      SplitSpec, content_hash, convert_npz_bundle,
                      convert_ogb_arxiv, convert_planetoid,
                      dataset_urls, default_cache_dir, fetch_dataset,
                      load_dataset, load_split, make_hop_split,
                      make_rate_split, make_semi_split, save_dataset,
                      save_split)
from .bench import (ExperimentManifest, ReportRow, build_report_row,
                    cmd_hop, cmd_rate, cmd_table2, cmd_timing,
                    cmd_train_single, default_config, is_synthetic,
                    parse_sbm_name, predict_labels, read_report_csv,
                    resolve_dataset, run_cell, verify_properties,
                    write_report_csv)
from .svg import line_chart

__version__ = "0.1.0"

__all__ = [
    "AdamState", "CACHE_ENV_VAR", "DATASETS", "DataFormatError",
    "DatasetBundle", "EdgeBatch", "EdgeSampler", "EmaLogits",
    "ExperimentManifest", "FetchError", "GEM_TABLE_GRID", "GcnModel",
    "Graph", "GridResult", "InputError", "LabelSet", "METHODS", "Mlp",
    "NonFiniteError", "NormalizedAdjacency", "OKDEEM_TABLE_GRID",
    "Prediction", "ReportRow", "RunReport", "ShapeError", "Split",
    "SplitSpec", "TrainConfig", "adam_step", "aggregate",
    "aggregate_transpose", "bfs_distance_groups", "build_alias_table",
    "build_report_row", "cmd_hop", "cmd_rate", "cmd_table2", "cmd_timing",
    "cmd_train_single", "combine_pseudo_labels", "content_hash",
    "convert_npz_bundle", "convert_ogb_arxiv", "convert_planetoid",
    "cross_entropy_soft", "dataset_urls", "default_cache_dir",
    "default_config", "eem_batch_loss_and_grads", "empirical_distribution",
    "equilibrium_residual", "exact_sweep_batches", "expand_grid",
    "f1_micro", "fetch_dataset", "gem_loss_and_grads", "generate_sbm",
    "glorot_uniform", "grid_search", "infer_non_hop", "infer_one_hop",
    "label_set_from_split", "line_chart", "load_dataset", "load_model",
    "load_split", "log_softmax", "make_hop_split", "make_rate_split",
    "make_semi_split", "mask_inductive", "measure_draw_rate",
    "normalize_adjacency", "okdeem_batch_loss_and_grads", "one_hot",
    "is_synthetic", "parse_sbm_name", "predict_labels",
    "read_report_csv", "resolve_dataset", "run_cell",
    "sample_edge_batch", "save_dataset", "save_model", "save_split",
    "softmax_cross_entropy", "softmax_temperature", "supervised_loss_and_grads",
    "tempered_softmax_vjp", "total_variation", "train", "verify_bound",
    "verify_properties", "write_report_csv",
]
