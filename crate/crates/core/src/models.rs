//! Model architectures mapping laser features X (plus graph structure and
//! edge attributes, where the architecture uses them) to predicted
//! melt-pool features Ŷ.
//!
//! All kinds share the same skeleton: `n_message_layers` message-passing
//! (or per-node) layers followed by a fully connected head. The autoencoder
//! is the exception — it reconstructs the concatenated laser and melt-pool
//! features through a bottleneck.

use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EdgeClass, ScanGraph};
use crate::sparse::SparseMatrix;
use crate::tensor::{concat_cols, Tape, Tensor, Var};
use crate::train::Standardizer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    GraphTransformer,
    Gat,
    Gcn,
    Gin,
    Fc,
    Autoencoder,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [
        ModelKind::Autoencoder,
        ModelKind::Fc,
        ModelKind::Gat,
        ModelKind::Gcn,
        ModelKind::Gin,
        ModelKind::GraphTransformer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::GraphTransformer => "graph_transformer",
            ModelKind::Gat => "gat",
            ModelKind::Gcn => "gcn",
            ModelKind::Gin => "gin",
            ModelKind::Fc => "fc",
            ModelKind::Autoencoder => "autoencoder",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graph_transformer" => Ok(ModelKind::GraphTransformer),
            "gat" => Ok(ModelKind::Gat),
            "gcn" => Ok(ModelKind::Gcn),
            "gin" => Ok(ModelKind::Gin),
            "fc" => Ok(ModelKind::Fc),
            "autoencoder" => Ok(ModelKind::Autoencoder),
            other => Err(Error::InvalidArgument(format!(
                "unknown model kind {other:?} (expected one of graph_transformer, gat, gcn, gin, fc, autoencoder)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

/// Architecture description of one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub in_dim: usize,
    pub hidden_dim: usize,
    pub out_dim: usize,
    pub n_message_layers: usize,
    /// Attention head count (graph transformer, GAT); must divide hidden_dim.
    pub n_heads: usize,
    /// Width of the learned edge-class embedding (graph transformer only).
    pub edge_dim: usize,
    /// Negative slope of the GAT attention nonlinearity.
    pub leaky_slope: f64,
    /// Learn the GIN self-weight (1 + ε) instead of fixing ε = 0.
    pub eps_learnable: bool,
    pub activation: Activation,
    /// Autoencoder code width; must be smaller than in_dim + out_dim.
    pub bottleneck: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            kind: ModelKind::GraphTransformer,
            in_dim: crate::scan::N_FEATURES,
            hidden_dim: 64,
            out_dim: crate::scan::N_LABELS,
            n_message_layers: 2,
            n_heads: 4,
            edge_dim: 8,
            leaky_slope: 0.2,
            eps_learnable: false,
            activation: Activation::Relu,
            bottleneck: 4,
        }
    }
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.in_dim == 0
            || self.hidden_dim == 0
            || self.out_dim == 0
            || self.n_message_layers == 0
        {
            return Err(Error::InvalidSpec("model dims must be positive".into()));
        }
        if matches!(self.kind, ModelKind::GraphTransformer | ModelKind::Gat) {
            if self.n_heads == 0 || self.hidden_dim % self.n_heads != 0 {
                return Err(Error::InvalidSpec(format!(
                    "n_heads ({}) must divide hidden_dim ({})",
                    self.n_heads, self.hidden_dim
                )));
            }
            if self.kind == ModelKind::GraphTransformer && self.edge_dim == 0 {
                return Err(Error::InvalidSpec("edge_dim must be positive".into()));
            }
        }
        if self.kind == ModelKind::Autoencoder && self.bottleneck >= self.in_dim + self.out_dim {
            return Err(Error::InvalidSpec(format!(
                "autoencoder bottleneck ({}) must be smaller than its input width ({})",
                self.bottleneck,
                self.in_dim + self.out_dim
            )));
        }
        Ok(())
    }

    fn head_dim(&self) -> usize {
        self.hidden_dim / self.n_heads
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedTensor {
    pub name: String,
    pub tensor: Tensor,
}

/// Learned weights θ, stored in a fixed, deterministic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub tensors: Vec<NamedTensor>,
}

impl ModelParams {
    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.tensors
            .iter()
            .find(|t| t.name == name)
            .map(|t| &t.tensor)
    }

    pub fn is_all_finite(&self) -> bool {
        self.tensors.iter().all(|t| t.tensor.is_all_finite())
    }

    pub fn total_len(&self) -> usize {
        self.tensors.iter().map(|t| t.tensor.len()).sum()
    }
}

enum Init {
    Glorot,
    Zero,
}

fn layout(spec: &ModelSpec) -> Vec<(String, Vec<usize>, Init)> {
    let mut out: Vec<(String, Vec<usize>, Init)> = Vec::new();
    let h = spec.hidden_dim;
    match spec.kind {
        ModelKind::Autoencoder => {
            let w = spec.in_dim + spec.out_dim;
            let b = spec.bottleneck;
            for (name, shape, init) in [
                ("enc1.w", vec![w, h], Init::Glorot),
                ("enc1.b", vec![1, h], Init::Zero),
                ("enc2.w", vec![h, b], Init::Glorot),
                ("enc2.b", vec![1, b], Init::Zero),
                ("dec1.w", vec![b, h], Init::Glorot),
                ("dec1.b", vec![1, h], Init::Zero),
                ("dec2.w", vec![h, w], Init::Glorot),
                ("dec2.b", vec![1, w], Init::Zero),
            ] {
                out.push((name.to_string(), shape, init));
            }
            return out;
        }
        _ => {}
    }
    for l in 0..spec.n_message_layers {
        let d_in = if l == 0 { spec.in_dim } else { h };
        match spec.kind {
            ModelKind::GraphTransformer => {
                for w in ["wq", "wk", "wv", "ws"] {
                    out.push((format!("layer{l}.{w}"), vec![d_in, h], Init::Glorot));
                }
                out.push((
                    format!("layer{l}.edge_emb"),
                    vec![2, spec.edge_dim],
                    Init::Glorot,
                ));
                out.push((format!("layer{l}.we"), vec![spec.edge_dim, h], Init::Glorot));
            }
            ModelKind::Gat => {
                out.push((format!("layer{l}.w"), vec![d_in, h], Init::Glorot));
                out.push((format!("layer{l}.att_src"), vec![1, h], Init::Glorot));
                out.push((format!("layer{l}.att_dst"), vec![1, h], Init::Glorot));
            }
            ModelKind::Gcn => {
                out.push((format!("layer{l}.w"), vec![d_in, h], Init::Glorot));
            }
            ModelKind::Gin => {
                out.push((format!("layer{l}.w1"), vec![d_in, h], Init::Glorot));
                out.push((format!("layer{l}.b1"), vec![1, h], Init::Zero));
                out.push((format!("layer{l}.w2"), vec![h, h], Init::Glorot));
                out.push((format!("layer{l}.b2"), vec![1, h], Init::Zero));
                if spec.eps_learnable {
                    out.push((format!("layer{l}.eps"), vec![1], Init::Zero));
                }
            }
            ModelKind::Fc => {
                out.push((format!("layer{l}.w"), vec![d_in, h], Init::Glorot));
                out.push((format!("layer{l}.b"), vec![1, h], Init::Zero));
            }
            ModelKind::Autoencoder => unreachable!(),
        }
    }
    out.push(("head.w".to_string(), vec![h, spec.out_dim], Init::Glorot));
    out.push(("head.b".to_string(), vec![1, spec.out_dim], Init::Zero));
    out
}

/// Seeded Glorot-uniform initialization: weights in ±√(6/(fan_in+fan_out)),
/// biases (and ε) zero.
pub fn init_params(spec: &ModelSpec, seed: u64) -> Result<ModelParams> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tensors = layout(spec)
        .into_iter()
        .map(|(name, shape, init)| {
            let tensor = match init {
                Init::Zero => Tensor::zeros(&shape),
                Init::Glorot => {
                    let (fan_in, fan_out) = (shape[0], shape[shape.len() - 1]);
                    let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                    let n: usize = shape.iter().product();
                    Tensor::new(
                        &shape,
                        (0..n).map(|_| rng.random_range(-bound..bound)).collect(),
                    )
                    .expect("layout shapes are consistent")
                }
            };
            NamedTensor { name, tensor }
        })
        .collect();
    Ok(ModelParams { tensors })
}

/// Per-graph constants shared by every forward pass on that graph.
pub struct GraphInputs {
    pub n: usize,
    /// N×in_dim laser features.
    pub x: Tensor,
    /// Directed edges (both directions of every undirected edge).
    pub src: Rc<Vec<usize>>,
    pub dst: Rc<Vec<usize>>,
    /// E×2 one-hot edge class, aligned with `src`/`dst`.
    pub edge_onehot: Tensor,
    /// Directed edges plus one self-edge per node (GAT attention set).
    pub src_self: Rc<Vec<usize>>,
    pub dst_self: Rc<Vec<usize>>,
    /// D̃^{-1/2}ÃD̃^{-1/2} with self-loops (graph convolution propagation).
    pub norm_adj: Rc<SparseMatrix>,
    /// Binary adjacency without self-loops (GIN neighbour sum).
    pub adj: Rc<SparseMatrix>,
}

impl GraphInputs {
    pub fn from_graph(graph: &ScanGraph) -> Result<Self> {
        let (src, dst, class) = graph.directed_edges();
        Self::from_parts(graph.n(), graph.scan.features.clone(), src, dst, &class)
    }

    /// Assembles inputs from raw directed edges; `class` must align with
    /// `src`/`dst`. Used directly by tests on hand-built graphs.
    pub fn from_parts(
        n: usize,
        x: Tensor,
        src: Vec<usize>,
        dst: Vec<usize>,
        class: &[EdgeClass],
    ) -> Result<Self> {
        if src.len() != dst.len() || src.len() != class.len() {
            return Err(Error::InvalidArgument(
                "edge arrays must have equal length".into(),
            ));
        }
        let e = src.len();
        let mut edge_onehot = Tensor::zeros(&[e, 2]);
        for (i, c) in class.iter().enumerate() {
            edge_onehot.set2(i, c.index(), 1.0);
        }

        let mut src_self = src.clone();
        let mut dst_self = dst.clone();
        for i in 0..n {
            src_self.push(i);
            dst_self.push(i);
        }

        // undirected view for the propagation matrices
        let mut undirected: Vec<(usize, usize)> = src
            .iter()
            .zip(&dst)
            .map(|(&s, &d)| (s.min(d), s.max(d)))
            .collect();
        undirected.sort_unstable();
        undirected.dedup();

        let norm_adj = crate::graph::SmoothingOperator::from_edges(n, &undirected, true)?
            .matrix()
            .clone();
        let mut adj_triplets = Vec::with_capacity(undirected.len() * 2);
        for &(u, v) in &undirected {
            adj_triplets.push((u, v, 1.0));
            adj_triplets.push((v, u, 1.0));
        }
        let adj = SparseMatrix::from_triplets(n, &adj_triplets)?;

        Ok(Self {
            n,
            x,
            src: Rc::new(src),
            dst: Rc::new(dst),
            edge_onehot,
            src_self: Rc::new(src_self),
            dst_self: Rc::new(dst_self),
            norm_adj: Rc::new(norm_adj),
            adj: Rc::new(adj),
        })
    }
}

fn activate<'t>(v: Var<'t>, activation: Activation) -> Var<'t> {
    match activation {
        Activation::Relu => v.relu(),
        Activation::Identity => v,
    }
}

/// One multi-head graph-transformer layer.
///
/// Per head: α_ij = softmax_j((W_q h_i)·(W_k h_j + W_e e_ij)/√d_head) over
/// in-neighbours j of i, and h′_i = W_s h_i + Σ_j α_ij (W_v h_j + W_e e_ij);
/// head outputs are concatenated. A node with no in-edges keeps only the
/// skip term.
#[allow(clippy::too_many_arguments)]
pub fn graph_transformer_layer<'t>(
    tape: &'t Tape,
    h: Var<'t>,
    src: Rc<Vec<usize>>,
    dst: Rc<Vec<usize>>,
    n: usize,
    edge_onehot: Var<'t>,
    wq: Var<'t>,
    wk: Var<'t>,
    wv: Var<'t>,
    ws: Var<'t>,
    edge_emb: Var<'t>,
    we: Var<'t>,
    n_heads: usize,
    attention_probe: Option<&mut Vec<Tensor>>,
) -> Result<Var<'t>> {
    let hidden = wq.shape()[1];
    let dh = hidden / n_heads;
    let scale = 1.0 / (dh as f64).sqrt();

    let q = h.matmul(wq)?;
    let k = h.matmul(wk)?;
    let v = h.matmul(wv)?;
    let skip = h.matmul(ws)?;
    let e = edge_onehot.matmul(edge_emb)?.matmul(we)?;

    let q_dst = q.gather_rows(dst.clone())?;
    let k_src = k.gather_rows(src.clone())?.add(e)?;
    let v_src = v.gather_rows(src.clone())?.add(e)?;

    let mut heads = Vec::with_capacity(n_heads);
    let mut probe = attention_probe;
    for head in 0..n_heads {
        let qh = q_dst.slice_cols(head * dh, dh)?;
        let kh = k_src.slice_cols(head * dh, dh)?;
        let vh = v_src.slice_cols(head * dh, dh)?;
        let logits = qh.row_dot(kh)?.scale(scale);
        let alpha = logits.segment_softmax(dst.clone(), n)?;
        if let Some(out) = probe.as_deref_mut() {
            out.push(alpha.to_tensor());
        }
        heads.push(vh.scale_rows(alpha)?.segment_sum(dst.clone(), n)?);
    }
    skip.add(concat_cols(tape, &heads)?)
}

/// One multi-head GAT layer: α over N(i) ∪ {i} from
/// leaky_relu(a_dst·Wh_i + a_src·Wh_j), then h′_i = Σ_j α_ij W h_j.
#[allow(clippy::too_many_arguments)]
pub fn gat_layer<'t>(
    tape: &'t Tape,
    h: Var<'t>,
    src_self: Rc<Vec<usize>>,
    dst_self: Rc<Vec<usize>>,
    n: usize,
    w: Var<'t>,
    att_src: Var<'t>,
    att_dst: Var<'t>,
    n_heads: usize,
    leaky_slope: f64,
    attention_probe: Option<&mut Vec<Tensor>>,
) -> Result<Var<'t>> {
    let hidden = w.shape()[1];
    let dh = hidden / n_heads;

    let wh = h.matmul(w)?;
    // per-head scores: elementwise product with the attention vector, then
    // summed within each head's column block
    let mut block = Tensor::zeros(&[hidden, n_heads]);
    for c in 0..hidden {
        block.set2(c, c / dh, 1.0);
    }
    let block = tape.leaf(block);
    let s_src = wh.mul(att_src)?.matmul(block)?;
    let s_dst = wh.mul(att_dst)?.matmul(block)?;

    let mut heads = Vec::with_capacity(n_heads);
    let mut probe = attention_probe;
    for head in 0..n_heads {
        let src_scores = s_src.slice_cols(head, 1)?.gather_rows(src_self.clone())?;
        let dst_scores = s_dst.slice_cols(head, 1)?.gather_rows(dst_self.clone())?;
        let logits = dst_scores.add(src_scores)?.leaky_relu(leaky_slope);
        let alpha = logits.segment_softmax(dst_self.clone(), n)?;
        if let Some(out) = probe.as_deref_mut() {
            out.push(alpha.to_tensor());
        }
        let wh_h = wh.slice_cols(head * dh, dh)?;
        heads.push(
            wh_h.gather_rows(src_self.clone())?
                .scale_rows(alpha)?
                .segment_sum(dst_self.clone(), n)?,
        );
    }
    concat_cols(tape, &heads)
}

/// Graph-convolution propagation and projection (pre-activation):
/// D̃^{-1/2}ÃD̃^{-1/2} H W.
pub fn gcn_layer<'t>(
    h: Var<'t>,
    norm_adj: Rc<SparseMatrix>,
    w: Var<'t>,
) -> Result<Var<'t>> {
    h.matmul(w)?.propagate(norm_adj)
}

/// GIN aggregation (1+ε)h_i + Σ_{j∈N(i)} h_j; the surrounding MLP is applied
/// by the caller.
pub fn gin_aggregate<'t>(
    tape: &'t Tape,
    h: Var<'t>,
    adj: Rc<SparseMatrix>,
    eps: Option<Var<'t>>,
) -> Result<Var<'t>> {
    let neighbours = h.propagate(adj)?;
    let self_term = match eps {
        Some(e) => {
            let one = tape.leaf(Tensor::scalar(1.0));
            h.mul_scalar(one.add(e)?)?
        }
        None => h,
    };
    self_term.add(neighbours)
}

/// Runs the model forward on bound parameter variables.
///
/// `bound` must follow the layout produced by [`init_params`]; `x` is the
/// N×in_dim feature matrix (N×(in_dim+out_dim) for the autoencoder, which
/// returns the full reconstruction).
pub fn forward<'t>(
    spec: &ModelSpec,
    tape: &'t Tape,
    bound: &[Var<'t>],
    graph: &GraphInputs,
    x: Var<'t>,
) -> Result<Var<'t>> {
    let mut cursor = bound.iter().copied();
    let mut next = || {
        cursor
            .next()
            .ok_or_else(|| Error::InvalidArgument("too few bound parameters".into()))
    };

    if spec.kind == ModelKind::Autoencoder {
        let (enc1_w, enc1_b) = (next()?, next()?);
        let (enc2_w, enc2_b) = (next()?, next()?);
        let (dec1_w, dec1_b) = (next()?, next()?);
        let (dec2_w, dec2_b) = (next()?, next()?);
        let code = activate(x.matmul(enc1_w)?.add(enc1_b)?, spec.activation)
            .matmul(enc2_w)?
            .add(enc2_b)?;
        let hidden = activate(code.matmul(dec1_w)?.add(dec1_b)?, spec.activation);
        return hidden.matmul(dec2_w)?.add(dec2_b);
    }

    let mut h = x;
    for _ in 0..spec.n_message_layers {
        let pre = match spec.kind {
            ModelKind::GraphTransformer => {
                let (wq, wk, wv, ws) = (next()?, next()?, next()?, next()?);
                let (edge_emb, we) = (next()?, next()?);
                let onehot = tape.leaf(graph.edge_onehot.clone());
                graph_transformer_layer(
                    tape,
                    h,
                    graph.src.clone(),
                    graph.dst.clone(),
                    graph.n,
                    onehot,
                    wq,
                    wk,
                    wv,
                    ws,
                    edge_emb,
                    we,
                    spec.n_heads,
                    None,
                )?
            }
            ModelKind::Gat => {
                let (w, att_src, att_dst) = (next()?, next()?, next()?);
                gat_layer(
                    tape,
                    h,
                    graph.src_self.clone(),
                    graph.dst_self.clone(),
                    graph.n,
                    w,
                    att_src,
                    att_dst,
                    spec.n_heads,
                    spec.leaky_slope,
                    None,
                )?
            }
            ModelKind::Gcn => gcn_layer(h, graph.norm_adj.clone(), next()?)?,
            ModelKind::Gin => {
                let (w1, b1, w2, b2) = (next()?, next()?, next()?, next()?);
                let eps = if spec.eps_learnable {
                    Some(next()?)
                } else {
                    None
                };
                let agg = gin_aggregate(tape, h, graph.adj.clone(), eps)?;
                activate(agg.matmul(w1)?.add(b1)?, spec.activation)
                    .matmul(w2)?
                    .add(b2)?
            }
            ModelKind::Fc => {
                let (w, b) = (next()?, next()?);
                h.matmul(w)?.add(b)?
            }
            ModelKind::Autoencoder => unreachable!(),
        };
        h = activate(pre, spec.activation);
    }
    let (head_w, head_b) = (next()?, next()?);
    h.matmul(head_w)?.add(head_b)
}

/// Binds parameter tensors onto a tape, as trainable params or constants.
pub fn bind<'t>(tape: &'t Tape, params: &ModelParams, trainable: bool) -> Vec<Var<'t>> {
    params
        .tensors
        .iter()
        .map(|t| {
            if trainable {
                tape.param(t.tensor.clone())
            } else {
                tape.leaf(t.tensor.clone())
            }
        })
        .collect()
}

/// Deterministic prediction Ŷ (N×out_dim, standardized label units).
///
/// The autoencoder reconstructs \[X ‖ standardized Y\] and returns only the
/// melt-pool channels of the reconstruction.
pub fn predict(
    spec: &ModelSpec,
    params: &ModelParams,
    standardizer: &Standardizer,
    graph: &ScanGraph,
) -> Result<Tensor> {
    let inputs = GraphInputs::from_graph(graph)?;
    predict_with_inputs(spec, params, standardizer, graph, &inputs)
}

/// [`predict`] with precomputed graph inputs (so feature-permutation sweeps
/// can reuse the edge structure).
pub fn predict_with_inputs(
    spec: &ModelSpec,
    params: &ModelParams,
    standardizer: &Standardizer,
    graph: &ScanGraph,
    inputs: &GraphInputs,
) -> Result<Tensor> {
    let (_, feat_dim) = inputs.x.dims2()?;
    if feat_dim != spec.in_dim {
        return Err(Error::ShapeMismatch {
            op: "predict",
            left: vec![spec.in_dim],
            right: vec![feat_dim],
        });
    }
    let tape = Tape::new();
    let bound = bind(&tape, params, false);
    let out = if spec.kind == ModelKind::Autoencoder {
        let y_std = standardizer.apply(&graph.scan.labels)?;
        let xv = tape.leaf(inputs.x.clone());
        let yv = tape.leaf(y_std);
        let joined = concat_cols(&tape, &[xv, yv])?;
        let recon = forward(spec, &tape, &bound, inputs, joined)?;
        recon.slice_cols(spec.in_dim, spec.out_dim)?
    } else {
        let xv = tape.leaf(inputs.x.clone());
        forward(spec, &tape, &bound, inputs, xv)?
    };
    Ok(out.to_tensor())
}

/// A trained model bundled with everything evaluation needs: architecture,
/// weights, the label standardizer fitted on its training data, and the
/// final training loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub params: ModelParams,
    pub standardizer: Standardizer,
    pub final_loss: f64,
}

impl TrainedModel {
    pub fn predict(&self, graph: &ScanGraph) -> Result<Tensor> {
        predict(&self.spec, &self.params, &self.standardizer, graph)
    }

    /// JSON document with shape-tagged arrays; 64-bit values round-trip
    /// bit-exactly (shortest round-trip decimal form).
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("serialize model: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("parse model: {e}")))
    }
}
