//! Model fitting: MSE loss, the Adam optimizer, label standardization, and
//! the nominal-only full-graph training loop.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::ScanGraph;
use crate::models::{
    bind, forward, init_params, GraphInputs, ModelKind, ModelParams, ModelSpec, TrainedModel,
};
use crate::tensor::{Tape, Tensor, Var};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps_adam: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Graphs whose gradients are averaged into one optimizer step.
    pub graphs_per_step: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps_adam: 1e-8,
            epochs: 300,
            seed: 0,
            graphs_per_step: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0) {
            return Err(Error::InvalidSpec("learning rate must be > 0".into()));
        }
        if !(self.beta1 > 0.0 && self.beta1 < 1.0 && self.beta2 > 0.0 && self.beta2 < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "betas must lie in (0, 1), got {} and {}",
                self.beta1, self.beta2
            )));
        }
        if self.graphs_per_step == 0 {
            return Err(Error::InvalidSpec("graphs_per_step must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-channel mean and std of Y over all training nodes. Standardizing
/// before the loss makes the cross-channel error sum commensurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Fits on the label rows of every tensor (all must share a column
    /// count). A constant channel has no scale and is rejected.
    pub fn fit(labels: &[&Tensor]) -> Result<Self> {
        let cols = labels
            .first()
            .ok_or_else(|| Error::InvalidArgument("no labels to fit".into()))?
            .dims2()?
            .1;
        let total_rows: usize = labels.iter().map(|t| t.dims2().unwrap().0).sum();
        if total_rows < 2 {
            return Err(Error::InvalidArgument(
                "standardizer needs at least 2 rows".into(),
            ));
        }
        let mut mean = vec![0.0; cols];
        for t in labels {
            let (rows, c) = t.dims2()?;
            if c != cols {
                return Err(Error::ShapeMismatch {
                    op: "fit_standardizer",
                    left: vec![total_rows, cols],
                    right: t.shape().to_vec(),
                });
            }
            for r in 0..rows {
                for (m, v) in mean.iter_mut().zip(t.row_slice(r)) {
                    *m += v;
                }
            }
        }
        for m in &mut mean {
            *m /= total_rows as f64;
        }
        let mut var = vec![0.0; cols];
        for t in labels {
            let (rows, _) = t.dims2()?;
            for r in 0..rows {
                for (c, v) in t.row_slice(r).iter().enumerate() {
                    var[c] += (v - mean[c]) * (v - mean[c]);
                }
            }
        }
        let mut std = vec![0.0; cols];
        for (c, v) in var.iter().enumerate() {
            let s = (v / total_rows as f64).sqrt();
            if s == 0.0 {
                return Err(Error::DataContract(format!(
                    "label channel {c} is constant; cannot standardize"
                )));
            }
            std[c] = s;
        }
        Ok(Self { mean, std })
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    pub fn apply(&self, y: &Tensor) -> Result<Tensor> {
        self.transform(y, |v, m, s| (v - m) / s)
    }

    pub fn invert(&self, y_std: &Tensor) -> Result<Tensor> {
        self.transform(y_std, |v, m, s| v * s + m)
    }

    fn transform(&self, y: &Tensor, f: impl Fn(f64, f64, f64) -> f64) -> Result<Tensor> {
        let (rows, cols) = y.dims2()?;
        if cols != self.channels() {
            return Err(Error::ShapeMismatch {
                op: "standardize",
                left: vec![self.channels()],
                right: y.shape().to_vec(),
            });
        }
        let mut out = y.clone();
        for r in 0..rows {
            for (c, v) in out.row_slice_mut(r).iter_mut().enumerate() {
                *v = f(*v, self.mean[c], self.std[c]);
            }
        }
        Ok(out)
    }
}

/// Fits a [`Standardizer`] on the labels of the given layers.
pub fn fit_standardizer(layers: &[crate::scan::LayerScan]) -> Result<Standardizer> {
    let labels: Vec<&Tensor> = layers.iter().map(|l| &l.labels).collect();
    Standardizer::fit(&labels)
}

/// Mean over all N·C entries of (Ŷ − Y)².
pub fn mse_loss(yhat: &Tensor, y: &Tensor) -> Result<f64> {
    if yhat.shape() != y.shape() {
        return Err(Error::ShapeMismatch {
            op: "mse_loss",
            left: yhat.shape().to_vec(),
            right: y.shape().to_vec(),
        });
    }
    let n = yhat.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = yhat
        .data()
        .iter()
        .zip(y.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / n as f64)
}

/// MSE as a tape expression (for the backward pass).
pub fn mse_var<'t>(yhat: Var<'t>, y: Var<'t>) -> Result<Var<'t>> {
    let n = yhat.value().len();
    let d = yhat.sub(y)?;
    Ok(d.mul(d)?.sum().scale(1.0 / n as f64))
}

/// First and second moment estimates per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    m: Vec<Tensor>,
    v: Vec<Tensor>,
    t: u64,
}

impl AdamState {
    pub fn new(params: &ModelParams) -> Self {
        let zeros: Vec<Tensor> = params
            .tensors
            .iter()
            .map(|t| Tensor::zeros(t.tensor.shape()))
            .collect();
        Self {
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// One Adam update with bias correction:
/// m ← β₁m + (1−β₁)g, v ← β₂v + (1−β₂)g², θ ← θ − lr·m̂/(√v̂ + ε).
pub fn adam_step(
    params: &mut ModelParams,
    grads: &[Tensor],
    state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    if grads.len() != params.tensors.len() {
        return Err(Error::InvalidArgument(format!(
            "got {} gradients for {} parameters",
            grads.len(),
            params.tensors.len()
        )));
    }
    state.t += 1;
    let bias1 = 1.0 - config.beta1.powi(state.t as i32);
    let bias2 = 1.0 - config.beta2.powi(state.t as i32);
    for (i, named) in params.tensors.iter_mut().enumerate() {
        if !grads[i].is_all_finite() {
            return Err(Error::Numerical(format!(
                "non-finite gradient for parameter {:?} at step {}",
                named.name, state.t
            )));
        }
        let m = state.m[i].data_mut();
        let v = state.v[i].data_mut();
        let theta = named.tensor.data_mut();
        for ((g, m), (v, theta)) in grads[i]
            .data()
            .iter()
            .zip(m.iter_mut())
            .zip(v.iter_mut().zip(theta.iter_mut()))
        {
            *m = config.beta1 * *m + (1.0 - config.beta1) * g;
            *v = config.beta2 * *v + (1.0 - config.beta2) * g * g;
            let m_hat = *m / bias1;
            let v_hat = *v / bias2;
            *theta -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps_adam);
        }
        if !named.tensor.is_all_finite() {
            return Err(Error::Numerical(format!(
                "parameter {:?} became non-finite at step {}",
                named.name, state.t
            )));
        }
    }
    Ok(())
}

struct PreparedGraph {
    inputs: GraphInputs,
    /// Forward input: X, or \[X ‖ standardized Y\] for the autoencoder.
    x: Tensor,
    /// Regression target in standardized units.
    target: Tensor,
}

fn prepare(
    spec: &ModelSpec,
    graphs: &[ScanGraph],
    standardizer: &Standardizer,
) -> Result<Vec<PreparedGraph>> {
    graphs
        .iter()
        .map(|g| {
            let inputs = GraphInputs::from_graph(g)?;
            let y_std = standardizer.apply(&g.scan.labels)?;
            let (x, target) = if spec.kind == ModelKind::Autoencoder {
                let joined = Tensor::hcat(&g.scan.features, &y_std)?;
                (joined.clone(), joined)
            } else {
                (g.scan.features.clone(), y_std)
            };
            Ok(PreparedGraph { inputs, x, target })
        })
        .collect()
}

/// Training result: the fitted model and the per-epoch loss curve.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TrainedModel,
    pub loss_history: Vec<f64>,
}

/// Fits `spec` to nominal layers by full-graph Adam steps, cycling graphs
/// within each epoch. Training data must be nominal: any anomalous node is
/// a contract violation.
///
/// Deterministic for fixed (spec, data, config): initialization and the
/// update sequence depend only on `config.seed` and the graph order.
pub fn train(spec: &ModelSpec, graphs: &[ScanGraph], config: &TrainConfig) -> Result<TrainOutcome> {
    spec.validate()?;
    config.validate()?;
    if graphs.is_empty() {
        return Err(Error::InvalidArgument("no training graphs".into()));
    }
    for (i, g) in graphs.iter().enumerate() {
        let bad = g.scan.anomalous_count();
        if bad > 0 {
            return Err(Error::DataContract(format!(
                "training graph {i} contains {bad} anomalous nodes; training requires nominal data"
            )));
        }
    }

    let label_refs: Vec<&Tensor> = graphs.iter().map(|g| &g.scan.labels).collect();
    let standardizer = Standardizer::fit(&label_refs)?;
    let prepared = prepare(spec, graphs, &standardizer)?;

    let mut params = init_params(spec, config.seed)?;
    let mut state = AdamState::new(&params);
    let mut loss_history = Vec::with_capacity(config.epochs);

    for _epoch in 0..config.epochs {
        let mut epoch_loss = 0.0;
        for chunk in prepared.chunks(config.graphs_per_step) {
            let mut acc: Option<Vec<Tensor>> = None;
            for pg in chunk {
                let (loss, grads) = forward_backward(spec, &params, pg)?;
                epoch_loss += loss;
                match &mut acc {
                    None => acc = Some(grads),
                    Some(acc) => {
                        for (a, g) in acc.iter_mut().zip(&grads) {
                            for (av, gv) in a.data_mut().iter_mut().zip(g.data()) {
                                *av += gv;
                            }
                        }
                    }
                }
            }
            let mut grads = acc.expect("chunks are non-empty");
            if chunk.len() > 1 {
                let scale = 1.0 / chunk.len() as f64;
                for g in &mut grads {
                    for v in g.data_mut() {
                        *v *= scale;
                    }
                }
            }
            adam_step(&mut params, &grads, &mut state, config)?;
        }
        loss_history.push(epoch_loss / prepared.len() as f64);
    }

    // loss of the final parameters (what the loss column reports)
    let mut final_loss = 0.0;
    for pg in &prepared {
        final_loss += evaluate_loss(spec, &params, pg)?;
    }
    final_loss /= prepared.len() as f64;

    Ok(TrainOutcome {
        model: TrainedModel {
            spec: spec.clone(),
            params,
            standardizer,
            final_loss,
        },
        loss_history,
    })
}

fn forward_backward(
    spec: &ModelSpec,
    params: &ModelParams,
    pg: &PreparedGraph,
) -> Result<(f64, Vec<Tensor>)> {
    let tape = Tape::new();
    let bound = bind(&tape, params, true);
    let xv = tape.leaf(pg.x.clone());
    let yhat = forward(spec, &tape, &bound, &pg.inputs, xv)?;
    let loss = mse_var(yhat, tape.leaf(pg.target.clone()))?;
    let loss_value = loss.item();
    let grads = tape.backward(loss)?;
    let grad_tensors = bound
        .iter()
        .zip(&params.tensors)
        .map(|(v, t)| {
            grads
                .of(*v)
                .cloned()
                .unwrap_or_else(|| Tensor::zeros(t.tensor.shape()))
        })
        .collect();
    Ok((loss_value, grad_tensors))
}

fn evaluate_loss(spec: &ModelSpec, params: &ModelParams, pg: &PreparedGraph) -> Result<f64> {
    let tape = Tape::new();
    let bound = bind(&tape, params, false);
    let xv = tape.leaf(pg.x.clone());
    let yhat = forward(spec, &tape, &bound, &pg.inputs, xv)?;
    mse_loss(&yhat.to_tensor(), &pg.target)
}

/// Writes `epoch,loss` rows.
pub fn write_loss_csv<W: std::io::Write>(history: &[f64], w: &mut W) -> std::io::Result<()> {
    writeln!(w, "epoch,loss")?;
    for (epoch, loss) in history.iter().enumerate() {
        writeln!(w, "{epoch},{loss}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::{generate_layer, LayerSpec};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn seeded(shape: &[usize], seed: u64) -> Tensor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n: usize = shape.iter().product();
        Tensor::new(shape, (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    fn small_graphs(count: usize, seed: u64) -> Vec<ScanGraph> {
        (0..count)
            .map(|i| {
                let layer = generate_layer(&LayerSpec {
                    width_mm: 1.0,
                    height_mm: 1.0,
                    seed: seed + i as u64,
                    ..LayerSpec::default()
                })
                .unwrap();
                ScanGraph::build(layer, 6, true).unwrap()
            })
            .collect()
    }

    #[test]
    fn mse_reference_values() {
        let y = seeded(&[3, 2], 1);
        assert_eq!(mse_loss(&y, &y).unwrap(), 0.0);
        let shifted = y.map(|v| v + 1.0);
        assert!((mse_loss(&shifted, &y).unwrap() - 1.0).abs() < 1e-15);

        // loop oracle on a random pair
        let a = seeded(&[3, 2], 2);
        let mut want = 0.0;
        for (x, z) in a.data().iter().zip(y.data()) {
            want += (x - z) * (x - z);
        }
        want /= 6.0;
        assert_eq!(mse_loss(&a, &y).unwrap(), want);

        assert!(mse_loss(&a, &seeded(&[2, 3], 3)).is_err());
    }

    fn tiny_params(values: &[f64]) -> ModelParams {
        ModelParams {
            tensors: vec![crate::models::NamedTensor {
                name: "w".into(),
                tensor: Tensor::new(&[values.len()], values.to_vec()).unwrap(),
            }],
        }
    }

    #[test]
    fn adam_zero_gradient_leaves_params_unchanged() {
        let mut params = tiny_params(&[0.5, -1.5]);
        let want = params.clone();
        let mut state = AdamState::new(&params);
        let config = TrainConfig::default();
        for _ in 0..5 {
            adam_step(
                &mut params,
                &[Tensor::zeros(&[2])],
                &mut state,
                &config,
            )
            .unwrap();
        }
        assert_eq!(params, want);
    }

    #[test]
    fn adam_first_step_is_bias_corrected() {
        let mut params = tiny_params(&[1.0]);
        let mut state = AdamState::new(&params);
        let config = TrainConfig::default();
        adam_step(
            &mut params,
            &[Tensor::new(&[1], vec![1.0]).unwrap()],
            &mut state,
            &config,
        )
        .unwrap();
        // m̂ = v̂ = 1 exactly on the first step, so Δθ = −lr / (1 + ε)
        let want = 1.0 - 1e-3 / (1.0 + 1e-8);
        assert!((params.tensors[0].tensor.data()[0] - want).abs() < 1e-15);
    }

    #[test]
    fn adam_matches_scalar_reference_over_steps() {
        // independent scalar implementation of the update rule
        let config = TrainConfig {
            learning_rate: 0.01,
            ..TrainConfig::default()
        };
        let grads = [[0.3, -1.2], [0.05, 0.8], [-0.6, 0.0]];
        let mut theta_ref = [2.0, -0.5];
        let (mut m, mut v) = ([0.0f64; 2], [0.0f64; 2]);
        for (t, g) in grads.iter().enumerate() {
            let step = (t + 1) as i32;
            for i in 0..2 {
                m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
                v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
                let m_hat = m[i] / (1.0 - config.beta1.powi(step));
                let v_hat = v[i] / (1.0 - config.beta2.powi(step));
                theta_ref[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.eps_adam);
            }
        }

        let mut params = tiny_params(&[2.0, -0.5]);
        let mut state = AdamState::new(&params);
        for g in grads {
            adam_step(
                &mut params,
                &[Tensor::new(&[2], g.to_vec()).unwrap()],
                &mut state,
                &config,
            )
            .unwrap();
        }
        for (got, want) in params.tensors[0].tensor.data().iter().zip(theta_ref) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn adam_rejects_non_finite_gradient_naming_parameter() {
        let mut params = tiny_params(&[1.0]);
        let mut state = AdamState::new(&params);
        let err = adam_step(
            &mut params,
            &[Tensor::new(&[1], vec![f64::NAN]).unwrap()],
            &mut state,
            &TrainConfig::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("\"w\""), "{err}");
    }

    #[test]
    fn standardizer_round_trip_and_moments() {
        // seeded near-normal sample
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rows: Vec<Vec<f64>> = (0..4000)
            .map(|_| {
                (0..3)
                    .map(|c| {
                        let u: f64 = rng.random_range(-1.0..1.0);
                        u * (c + 1) as f64 + c as f64
                    })
                    .collect()
            })
            .collect();
        let y = Tensor::from_rows(&rows).unwrap();
        let s = Standardizer::fit(&[&y]).unwrap();
        let applied = s.apply(&y).unwrap();
        for c in 0..3 {
            let col = applied.col(c);
            assert!(crate::stats::mean(&col).abs() < 1e-10);
            assert!((crate::stats::std_dev(&col) - 1.0).abs() < 1e-10);
        }
        let back = s.invert(&applied).unwrap();
        for (a, b) in back.data().iter().zip(y.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn standardizer_rejects_constant_channel_by_index() {
        let y = Tensor::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let err = Standardizer::fit(&[&y]).unwrap_err();
        assert!(err.to_string().contains("channel 1"), "{err}");
    }

    #[test]
    fn zero_epochs_returns_initialization() {
        let graphs = small_graphs(1, 40);
        let spec = ModelSpec {
            kind: ModelKind::Fc,
            hidden_dim: 8,
            ..ModelSpec::default()
        };
        let config = TrainConfig {
            epochs: 0,
            seed: 3,
            ..TrainConfig::default()
        };
        let outcome = train(&spec, &graphs, &config).unwrap();
        assert_eq!(outcome.model.params, init_params(&spec, 3).unwrap());
        assert!(outcome.loss_history.is_empty());
        assert!(outcome.model.final_loss.is_finite());
    }

    #[test]
    fn training_refuses_anomalous_layers() {
        let mut graphs = small_graphs(1, 41);
        graphs[0].scan.anomaly_mask[3] = true;
        let err = train(
            &ModelSpec::new(ModelKind::Fc),
            &graphs,
            &TrainConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::DataContract(_)), "{err}");
    }

    #[test]
    fn training_is_deterministic() {
        let graphs = small_graphs(2, 42);
        let spec = ModelSpec {
            kind: ModelKind::Gcn,
            hidden_dim: 8,
            ..ModelSpec::default()
        };
        let config = TrainConfig {
            epochs: 5,
            seed: 11,
            ..TrainConfig::default()
        };
        let a = train(&spec, &graphs, &config).unwrap();
        let b = train(&spec, &graphs, &config).unwrap();
        assert_eq!(a.loss_history, b.loss_history);
        assert_eq!(a.model.params, b.model.params);
    }

    #[test]
    fn fc_fits_exact_linear_target() {
        // Y = X·W* with identity activations is exactly representable
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let n = 64;
        let x_rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let x = Tensor::from_rows(&x_rows).unwrap();
        let w_true = seeded(&[4, 4], 51);
        let y = x.matmul(&w_true).unwrap();

        // grid positions so the graph build succeeds; fc ignores edges
        let layer = crate::scan::LayerScan {
            positions: (0..n).map(|i| [(i % 8) as f64, (i / 8) as f64]).collect(),
            track_id: (0..n).map(|i| (i / 8) as u32).collect(),
            node_id: (0..n as u32).collect(),
            features: x,
            labels: y,
            anomaly_mask: vec![false; n],
        };
        let graph = ScanGraph::build(layer, 3, true).unwrap();
        let spec = ModelSpec {
            kind: ModelKind::Fc,
            hidden_dim: 8,
            activation: crate::models::Activation::Identity,
            ..ModelSpec::default()
        };
        let config = TrainConfig {
            learning_rate: 0.01,
            epochs: 500,
            seed: 52,
            ..TrainConfig::default()
        };
        let outcome = train(&spec, &[graph], &config).unwrap();
        let final_mse = *outcome.loss_history.last().unwrap();
        assert!(final_mse < 1e-4, "final mse {final_mse}");
    }

    #[test]
    fn loss_history_non_increasing_over_windows() {
        let graphs = small_graphs(2, 43);
        let spec = ModelSpec {
            kind: ModelKind::Fc,
            hidden_dim: 16,
            ..ModelSpec::default()
        };
        let config = TrainConfig {
            epochs: 150,
            seed: 13,
            ..TrainConfig::default()
        };
        let outcome = train(&spec, &graphs, &config).unwrap();
        let window_mean = |w: &[f64]| w.iter().sum::<f64>() / w.len() as f64;
        let windows: Vec<f64> = outcome.loss_history.chunks(50).map(window_mean).collect();
        for pair in windows.windows(2) {
            assert!(
                pair[1] <= pair[0],
                "window means increased: {:?}",
                windows
            );
        }
    }

    #[test]
    fn autoencoder_reaches_low_loss_on_low_rank_data() {
        // rank-2 data through a width-2 bottleneck, all-linear
        let mut rng = ChaCha8Rng::seed_from_u64(60);
        let n = 80;
        let basis = seeded(&[2, 8], 61);
        let coeff_rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let coeffs = Tensor::from_rows(&coeff_rows).unwrap();
        let data = coeffs.matmul(&basis).unwrap(); // N×8 of rank 2

        let layer = crate::scan::LayerScan {
            positions: (0..n).map(|i| [(i % 8) as f64, (i / 8) as f64]).collect(),
            track_id: (0..n).map(|i| (i / 8) as u32).collect(),
            node_id: (0..n as u32).collect(),
            features: {
                let mut t = Tensor::zeros(&[n, 4]);
                for i in 0..n {
                    t.row_slice_mut(i).copy_from_slice(&data.row_slice(i)[..4]);
                }
                t
            },
            labels: {
                let mut t = Tensor::zeros(&[n, 4]);
                for i in 0..n {
                    t.row_slice_mut(i).copy_from_slice(&data.row_slice(i)[4..]);
                }
                t
            },
            anomaly_mask: vec![false; n],
        };
        let graph = ScanGraph::build(layer, 3, true).unwrap();
        let spec = ModelSpec {
            kind: ModelKind::Autoencoder,
            hidden_dim: 16,
            bottleneck: 2,
            activation: crate::models::Activation::Identity,
            ..ModelSpec::default()
        };
        let config = TrainConfig {
            learning_rate: 0.01,
            epochs: 800,
            seed: 62,
            ..TrainConfig::default()
        };
        let outcome = train(&spec, &[graph], &config).unwrap();
        let final_mse = *outcome.loss_history.last().unwrap();
        assert!(final_mse < 1e-3, "final mse {final_mse}");
    }

    #[test]
    fn loss_csv_format() {
        let mut buf = Vec::new();
        write_loss_csv(&[0.5, 0.25], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epoch,loss\n0,0.5\n1,0.25\n");
    }
}
