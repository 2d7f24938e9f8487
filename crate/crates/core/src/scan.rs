//! Synthetic layer generation: serpentine scan paths, pulse-width modulated
//! laser power, melt-pool feature channels, and injected defect runs.
//!
//! Layers are pure functions of (spec, seed): the same inputs reproduce
//! bit-identical output regardless of run or thread count.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seeds;
use crate::tensor::Tensor;

/// Columns of the laser feature matrix X.
pub const FEAT_POWER: usize = 0;
pub const FEAT_DIRECTION: usize = 1;
pub const FEAT_NODE_NUMBER: usize = 2;
pub const FEAT_TRACK_NUMBER: usize = 3;
pub const N_FEATURES: usize = 4;

/// Columns of the melt-pool label matrix Y.
pub const LABEL_SIZE: usize = 0;
pub const LABEL_SHAPE: usize = 1;
pub const LABEL_INTENSITY: usize = 2;
pub const LABEL_SPATTER: usize = 3;
pub const N_LABELS: usize = 4;

pub const FEATURE_NAMES: [&str; N_FEATURES] =
    ["power", "scan_direction", "node_number", "track_number"];

/// Quiescent sensor reading when the laser is off (size and intensity).
const BASELINE: f64 = 0.1;

const CSV_HEADER: &str = "node_id,track_id,x_mm,y_mm,power,scan_direction,\
node_number,track_number,size,shape,intensity,spatter,anomaly";

/// Geometry and laser parameters of one synthetic layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LayerSpec {
    pub width_mm: f64,
    pub height_mm: f64,
    /// Distance between adjacent scan tracks.
    pub hatch_spacing_mm: f64,
    /// Sample pitch along a track; must not exceed the hatch spacing.
    pub node_spacing_mm: f64,
    pub pwm_period_nodes: usize,
    /// Fraction of each PWM period with the laser on, in (0, 1].
    pub pwm_duty: f64,
    pub noise_sigma: f64,
    /// Draw the spatter channel as an integer Poisson count instead of its
    /// real-valued expected value.
    pub integer_spatter: bool,
    pub seed: u64,
}

impl Default for LayerSpec {
    fn default() -> Self {
        // 50 tracks x 100 nodes = 5,000 nodes per layer
        Self {
            width_mm: 5.0,
            height_mm: 5.0,
            hatch_spacing_mm: 0.1,
            node_spacing_mm: 0.05,
            pwm_period_nodes: 8,
            pwm_duty: 0.5,
            noise_sigma: 0.1,
            integer_spatter: false,
            seed: 0,
        }
    }
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.width_mm > 0.0 && self.height_mm > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "layer dimensions must be positive, got {} x {} mm",
                self.width_mm, self.height_mm
            )));
        }
        if !(self.hatch_spacing_mm > 0.0 && self.node_spacing_mm > 0.0) {
            return Err(Error::InvalidSpec("spacings must be positive".into()));
        }
        if self.node_spacing_mm > self.hatch_spacing_mm {
            return Err(Error::InvalidSpec(format!(
                "node spacing {} mm exceeds hatch spacing {} mm",
                self.node_spacing_mm, self.hatch_spacing_mm
            )));
        }
        if self.pwm_period_nodes == 0 {
            return Err(Error::InvalidSpec("pwm period must be positive".into()));
        }
        if !(self.pwm_duty > 0.0 && self.pwm_duty <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "pwm duty must lie in (0, 1], got {}",
                self.pwm_duty
            )));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidSpec("noise sigma must be >= 0".into()));
        }
        Ok(())
    }

    pub fn tracks(&self) -> usize {
        (self.height_mm / self.hatch_spacing_mm).floor() as usize
    }

    pub fn nodes_per_track(&self) -> usize {
        (self.width_mm / self.node_spacing_mm).floor() as usize
    }

    pub fn node_count(&self) -> usize {
        self.tracks() * self.nodes_per_track()
    }

    fn pwm_on_nodes(&self) -> usize {
        ((self.pwm_period_nodes as f64 * self.pwm_duty).round() as usize)
            .clamp(1, self.pwm_period_nodes)
    }
}

/// One synthesized layer: node table in laser scan order.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerScan {
    /// (x, y) in mm per node.
    pub positions: Vec<[f64; 2]>,
    pub track_id: Vec<u32>,
    /// Global scan order, strictly increasing.
    pub node_id: Vec<u32>,
    /// N×4 laser features: power, scan_direction, node_number, track_number.
    pub features: Tensor,
    /// N×4 melt-pool labels: size, shape, intensity, spatter.
    pub labels: Tensor,
    pub anomaly_mask: Vec<bool>,
}

impl LayerScan {
    pub fn len(&self) -> usize {
        self.node_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_id.is_empty()
    }

    pub fn anomalous_count(&self) -> usize {
        self.anomaly_mask.iter().filter(|&&m| m).count()
    }

    /// Serializes the node table; one row per node, LF line endings.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for i in 0..self.len() {
            let x = self.features.row_slice(i);
            let y = self.labels.row_slice(i);
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.node_id[i],
                self.track_id[i],
                self.positions[i][0],
                self.positions[i][1],
                x[FEAT_POWER],
                x[FEAT_DIRECTION],
                x[FEAT_NODE_NUMBER],
                x[FEAT_TRACK_NUMBER],
                y[LABEL_SIZE],
                y[LABEL_SHAPE],
                y[LABEL_INTENSITY],
                y[LABEL_SPATTER],
                u8::from(self.anomaly_mask[i]),
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<LayerScan> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty layer csv".into()))?
            .map_err(Error::Io)?;
        if header.trim_end() != CSV_HEADER {
            return Err(Error::Parse(format!("unexpected csv header: {header}")));
        }
        let mut positions = Vec::new();
        let mut track_id = Vec::new();
        let mut node_id = Vec::new();
        let mut feats: Vec<f64> = Vec::new();
        let mut labels: Vec<f64> = Vec::new();
        let mut mask = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(Error::Io)?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 13 {
                return Err(Error::Parse(format!(
                    "line {}: expected 13 fields, got {}",
                    lineno + 2,
                    fields.len()
                )));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number {s:?}", lineno + 2)))
            };
            node_id.push(num(fields[0])? as u32);
            track_id.push(num(fields[1])? as u32);
            positions.push([num(fields[2])?, num(fields[3])?]);
            for f in &fields[4..8] {
                feats.push(num(f)?);
            }
            for f in &fields[8..12] {
                labels.push(num(f)?);
            }
            mask.push(num(fields[12])? != 0.0);
        }
        let n = node_id.len();
        Ok(LayerScan {
            positions,
            track_id,
            node_id,
            features: Tensor::new(&[n, N_FEATURES], feats)?,
            labels: Tensor::new(&[n, N_LABELS], labels)?,
            anomaly_mask: mask,
        })
    }
}

/// Nominal (noise-free) melt-pool response to laser power and normalized
/// track position. Monotone in power; the track term adds a small positional
/// modulation so the positional features carry secondary signal.
fn nominal_labels(power: f64, track_number: f64) -> [f64; N_LABELS] {
    let intensity = power * (1.0 + 0.1 * (2.0 * std::f64::consts::PI * track_number).sin());
    [
        0.8 * power + BASELINE,          // size
        0.5 + 0.2 * power,               // shape
        intensity + BASELINE,            // intensity
        0.5 + power,                     // spatter (expected count)
    ]
}

/// Builds the serpentine raster for a layer with PWM power and zeroed labels.
pub fn generate_scan_path(spec: &LayerSpec) -> Result<LayerScan> {
    spec.validate()?;
    let tracks = spec.tracks();
    let per_track = spec.nodes_per_track();
    let n = tracks * per_track;
    if n == 0 {
        return Err(Error::InvalidSpec(format!(
            "degenerate layer: {} tracks x {} nodes per track",
            tracks, per_track
        )));
    }

    let on_nodes = spec.pwm_on_nodes();
    let mut positions = Vec::with_capacity(n);
    let mut track_id = Vec::with_capacity(n);
    let mut node_id = Vec::with_capacity(n);
    let mut features = Tensor::zeros(&[n, N_FEATURES]);

    let mut id = 0u32;
    for t in 0..tracks {
        let y = (t as f64 + 0.5) * spec.hatch_spacing_mm;
        let direction = if t % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..per_track {
            // odd tracks are scanned right-to-left
            let col = if t % 2 == 0 { i } else { per_track - 1 - i };
            let x = (col as f64 + 0.5) * spec.node_spacing_mm;
            positions.push([x, y]);
            track_id.push(t as u32);
            node_id.push(id);

            let power = if (id as usize) % spec.pwm_period_nodes < on_nodes {
                1.0
            } else {
                0.0
            };
            let node_number = if n > 1 { id as f64 / (n - 1) as f64 } else { 0.0 };
            let track_number = if tracks > 1 {
                t as f64 / (tracks - 1) as f64
            } else {
                0.0
            };
            let row = features.row_slice_mut(id as usize);
            row[FEAT_POWER] = power;
            row[FEAT_DIRECTION] = direction;
            row[FEAT_NODE_NUMBER] = node_number;
            row[FEAT_TRACK_NUMBER] = track_number;
            id += 1;
        }
    }

    Ok(LayerScan {
        positions,
        track_id,
        node_id,
        features,
        labels: Tensor::zeros(&[n, N_LABELS]),
        anomaly_mask: vec![false; n],
    })
}

/// Fills the melt-pool label channels from the laser features plus Gaussian
/// noise of std `noise_sigma`.
pub fn generate_melt_signal(mut scan: LayerScan, spec: &LayerSpec) -> Result<LayerScan> {
    let n = scan.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(spec.seed, 1));
    let noise = if spec.noise_sigma > 0.0 {
        Some(Normal::new(0.0, spec.noise_sigma).map_err(|e| {
            Error::InvalidSpec(format!("bad noise sigma {}: {e}", spec.noise_sigma))
        })?)
    } else {
        None
    };

    for i in 0..n {
        let power = scan.features.get2(i, FEAT_POWER);
        let track_number = scan.features.get2(i, FEAT_TRACK_NUMBER);
        let mut y = nominal_labels(power, track_number);
        if spec.integer_spatter {
            let lambda = y[LABEL_SPATTER];
            y[LABEL_SPATTER] = Poisson::new(lambda)
                .map_err(|e| Error::Numerical(format!("poisson mean {lambda}: {e}")))?
                .sample(&mut rng);
        }
        if let Some(dist) = &noise {
            for (c, v) in y.iter_mut().enumerate() {
                if spec.integer_spatter && c == LABEL_SPATTER {
                    continue;
                }
                *v += dist.sample(&mut rng);
            }
        }
        scan.labels.row_slice_mut(i).copy_from_slice(&y);
    }
    debug_assert!(scan.labels.is_all_finite());
    Ok(scan)
}

/// Scan path and melt signal in one step.
pub fn generate_layer(spec: &LayerSpec) -> Result<LayerScan> {
    generate_melt_signal(generate_scan_path(spec)?, spec)
}

/// Defect injection parameters. Events are contiguous runs of nodes along a
/// track, mirrored over up to `track_span` adjacent tracks at the same
/// x-range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnomalySpec {
    /// Number of defect events; when absent it is derived from
    /// `target_imbalance` and the expected event footprint.
    pub n_events: Option<usize>,
    /// Inclusive range of run lengths along a track, in nodes.
    pub run_length_nodes: (usize, usize),
    /// Inclusive range of adjacent tracks spanned by one event.
    pub track_span: (usize, usize),
    /// Multiplier applied to the size and intensity channels, in (0, 1].
    pub intensity_scale: f64,
    /// Added to the spatter channel.
    pub spatter_boost: f64,
    /// Target nominal:anomalous node ratio used when `n_events` is absent.
    pub target_imbalance: f64,
}

impl Default for AnomalySpec {
    fn default() -> Self {
        Self {
            n_events: None,
            run_length_nodes: (8, 20),
            track_span: (1, 3),
            intensity_scale: 0.6,
            spatter_boost: 0.0,
            target_imbalance: 40.6,
        }
    }
}

impl AnomalySpec {
    pub fn validate(&self) -> Result<()> {
        let (lmin, lmax) = self.run_length_nodes;
        let (smin, smax) = self.track_span;
        if lmin == 0 || lmin > lmax {
            return Err(Error::InvalidSpec(format!(
                "bad run length range [{lmin}, {lmax}]"
            )));
        }
        if smin == 0 || smin > smax {
            return Err(Error::InvalidSpec(format!(
                "bad track span range [{smin}, {smax}]"
            )));
        }
        if !(self.intensity_scale > 0.0 && self.intensity_scale <= 1.0) {
            return Err(Error::InvalidSpec(format!(
                "intensity scale must lie in (0, 1], got {}",
                self.intensity_scale
            )));
        }
        if self.spatter_boost < 0.0 {
            return Err(Error::InvalidSpec("spatter boost must be >= 0".into()));
        }
        if !(self.target_imbalance > 0.0) {
            return Err(Error::InvalidSpec("target imbalance must be > 0".into()));
        }
        Ok(())
    }

    /// Event count targeting one anomalous node per `target_imbalance`
    /// nominal nodes.
    fn auto_events(&self, n_nodes: usize) -> usize {
        let mean_len = (self.run_length_nodes.0 + self.run_length_nodes.1) as f64 / 2.0;
        let mean_span = (self.track_span.0 + self.track_span.1) as f64 / 2.0;
        let per_event = mean_len * mean_span;
        ((n_nodes as f64 / self.target_imbalance / per_event).round() as usize).max(1)
    }
}

/// Marks defect events on a generated layer. Only the observation channels
/// Y change; the laser features X are never modified.
pub fn inject_anomalies(mut scan: LayerScan, a: &AnomalySpec, seed: u64) -> Result<LayerScan> {
    a.validate()?;
    let n = scan.len();
    if n == 0 {
        return Ok(scan);
    }

    // node indices grouped by track, in scan order
    let track_count = scan.track_id.iter().copied().max().unwrap_or(0) as usize + 1;
    let mut by_track: Vec<Vec<usize>> = vec![Vec::new(); track_count];
    for (i, &t) in scan.track_id.iter().enumerate() {
        by_track[t as usize].push(i);
    }

    let n_events = a.n_events.unwrap_or_else(|| a.auto_events(n));
    let mut rng = ChaCha8Rng::seed_from_u64(seeds::mix(seed, 2));
    let mut occupied = vec![false; n];

    const MAX_TRIES: usize = 500;
    for placed in 0..n_events {
        let mut found = None;
        for _ in 0..MAX_TRIES {
            let len = rng.random_range(a.run_length_nodes.0..=a.run_length_nodes.1);
            let span = rng
                .random_range(a.track_span.0..=a.track_span.1)
                .min(track_count);
            let t0 = rng.random_range(0..=track_count - span);
            if by_track[t0].len() < len {
                continue;
            }
            let start = rng.random_range(0..=by_track[t0].len() - len);

            // x-interval of the seed run, mirrored onto the spanned tracks
            let seed_nodes = &by_track[t0][start..start + len];
            let (mut x_lo, mut x_hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in seed_nodes {
                x_lo = x_lo.min(scan.positions[i][0]);
                x_hi = x_hi.max(scan.positions[i][0]);
            }
            let mut nodes: Vec<usize> = Vec::new();
            for tr in t0..t0 + span {
                for &i in &by_track[tr] {
                    let x = scan.positions[i][0];
                    if x >= x_lo - 1e-9 && x <= x_hi + 1e-9 {
                        nodes.push(i);
                    }
                }
            }
            if nodes.iter().all(|&i| !occupied[i]) {
                found = Some(nodes);
                break;
            }
        }
        let Some(nodes) = found else {
            return Err(Error::InvalidArgument(format!(
                "requested {n_events} anomaly events but only {placed} fit in the layer"
            )));
        };
        for i in nodes {
            occupied[i] = true;
            scan.anomaly_mask[i] = true;
            let y = scan.labels.row_slice_mut(i);
            y[LABEL_SIZE] *= a.intensity_scale;
            y[LABEL_INTENSITY] *= a.intensity_scale;
            y[LABEL_SPATTER] += a.spatter_boost;
        }
    }
    Ok(scan)
}

/// Counts and specs for a train/eval dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetConfig {
    pub train_layers: usize,
    pub eval_layers: usize,
    pub layer: LayerSpec,
    pub anomaly: AnomalySpec,
    pub seed: u64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            train_layers: 8,
            eval_layers: 4,
            layer: LayerSpec::default(),
            anomaly: AnomalySpec::default(),
            seed: 0,
        }
    }
}

/// Nominal training layers plus evaluation layers with injected defects.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub train: Vec<LayerScan>,
    pub eval: Vec<LayerScan>,
}

/// Generates `train_layers` nominal layers (all-false masks) and
/// `eval_layers` layers with injected anomalies, each from an independent
/// sub-seed of `config.seed`.
pub fn build_dataset(config: &DatasetConfig) -> Result<Dataset> {
    let mut train = Vec::with_capacity(config.train_layers);
    for i in 0..config.train_layers {
        let mut spec = config.layer.clone();
        spec.seed = seeds::mix(config.seed, 10 + i as u64);
        train.push(generate_layer(&spec)?);
    }
    let mut eval = Vec::with_capacity(config.eval_layers);
    for i in 0..config.eval_layers {
        let mut spec = config.layer.clone();
        spec.seed = seeds::mix(config.seed, 100 + i as u64);
        let layer = generate_layer(&spec)?;
        eval.push(inject_anomalies(
            layer,
            &config.anomaly,
            seeds::mix(config.seed, 200 + i as u64),
        )?);
    }
    Ok(Dataset { train, eval })
}
