//! Graph-based anomaly detection for laser powder-bed-fusion melt-pool
//! monitoring.
//!
//! The pipeline mirrors in-situ process monitoring on synthetic data:
//!
//! 1. [`scan`] generates serpentine laser scan layers with pulse-width
//!    modulated power, melt-pool feature channels derived from the laser
//!    inputs, and optional injected defect runs.
//! 2. [`graph`] connects each layer's nodes into a k-NN graph, labels edges
//!    as same-track or cross-track, and builds the symmetric-normalized
//!    smoothing operator.
//! 3. [`models`] and [`train`] fit a predictor of nominal melt-pool features
//!    from laser features (graph transformer, GAT, GCN, GIN, FC, or
//!    autoencoder), trained with Adam on nominal layers only.
//! 4. [`anomaly`] scores new observations by signed prediction error,
//!    smooths scores over the graph, and selects a threshold from the
//!    precision-recall curve.
//! 5. [`metrics`] evaluates detection quality (AP, AUROC, F1, confusion
//!    counts) and ranks input features by permutation importance.
//!
//! Everything is deterministic for a fixed seed: layer synthesis, weight
//! initialization, training, and evaluation reproduce bit-identical results
//! across runs.

pub mod error;
pub mod graph;
pub mod models;
pub mod scan;
pub mod seeds;
pub mod sparse;
pub mod stats;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use graph::{ScanGraph, SmoothingOperator};
pub use models::{ModelKind, ModelParams, ModelSpec, TrainedModel};
pub use scan::{AnomalySpec, Dataset, DatasetConfig, LayerScan, LayerSpec};
pub use sparse::SparseMatrix;
pub use tensor::{Tape, Tensor, Var};
pub use train::{Standardizer, TrainConfig};
