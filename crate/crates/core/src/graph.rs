//! Spatio-temporal graph construction over a layer: k-nearest-neighbour
//! edges, same-track vs adjacent-track edge labels, and the
//! symmetric-normalized smoothing operator S = D̃^{-1/2} Ã D̃^{-1/2}.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::{Error, Result};
use crate::scan::LayerScan;
use crate::sparse::SparseMatrix;

/// Relation of an edge's endpoints: same scan track (temporally adjacent
/// samples) or different tracks (spatially adjacent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeClass {
    SameTrack,
    CrossTrack,
}

impl EdgeClass {
    /// Class index used in one-hot encodings and the edge CSV.
    pub fn index(self) -> usize {
        match self {
            EdgeClass::SameTrack => 0,
            EdgeClass::CrossTrack => 1,
        }
    }
}

/// Connects each node to its `k` nearest Euclidean neighbours and
/// symmetrizes by union. Distance ties break toward the lower node id; no
/// self-edges. Returns unique undirected pairs (u < v) in ascending order.
pub fn knn_edges(positions: &[[f64; 2]], k: usize) -> Result<Vec<(usize, usize)>> {
    let n = positions.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "knn graph needs at least 2 nodes, got {n}"
        )));
    }
    if k == 0 || k >= n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k < n, got k={k} with n={n}"
        )));
    }

    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n * k);
    let mut cand: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        cand.clear();
        let pi = positions[i];
        for (j, pj) in positions.iter().enumerate() {
            if j == i {
                continue;
            }
            let dx = pi[0] - pj[0];
            let dy = pi[1] - pj[1];
            cand.push((dx * dx + dy * dy, j));
        }
        let by_dist_then_id = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            a.0.partial_cmp(&b.0)
                .expect("finite distances")
                .then(a.1.cmp(&b.1))
        };
        cand.select_nth_unstable_by(k - 1, by_dist_then_id);
        for &(_, j) in &cand[..k] {
            edges.push((i.min(j), i.max(j)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(edges)
}

/// Class per edge: [`EdgeClass::SameTrack`] iff both endpoints share a
/// track id.
pub fn label_edges(edges: &[(usize, usize)], track_id: &[u32]) -> Result<Vec<EdgeClass>> {
    let n = track_id.len();
    edges
        .iter()
        .map(|&(u, v)| {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of bounds for {n} nodes"
                )));
            }
            Ok(if track_id[u] == track_id[v] {
                EdgeClass::SameTrack
            } else {
                EdgeClass::CrossTrack
            })
        })
        .collect()
}

/// The smoothing operator of the score-propagation step:
/// S = D̃^{-1/2} Ã D̃^{-1/2}, where Ã is the adjacency with optional
/// self-loops and D̃ its degree matrix.
#[derive(Debug, Clone)]
pub struct SmoothingOperator {
    matrix: SparseMatrix,
    self_loops: bool,
}

impl SmoothingOperator {
    /// Builds from unique undirected edges over `n` nodes. Without
    /// self-loops every node must have at least one edge, otherwise
    /// D^{-1/2} is undefined.
    pub fn from_edges(n: usize, edges: &[(usize, usize)], self_loops: bool) -> Result<Self> {
        let mut degree = vec![if self_loops { 1.0f64 } else { 0.0 }; n];
        for &(u, v) in edges {
            if u >= n || v >= n || u == v {
                return Err(Error::InvalidArgument(format!(
                    "bad undirected edge ({u}, {v}) for {n} nodes"
                )));
            }
            degree[u] += 1.0;
            degree[v] += 1.0;
        }
        if let Some(isolated) = degree.iter().position(|&d| d == 0.0) {
            return Err(Error::InvalidArgument(format!(
                "node {isolated} is isolated; D^(-1/2) undefined without self-loops"
            )));
        }

        let mut triplets = Vec::with_capacity(edges.len() * 2 + n);
        for &(u, v) in edges {
            let w = 1.0 / (degree[u] * degree[v]).sqrt();
            triplets.push((u, v, w));
            triplets.push((v, u, w));
        }
        if self_loops {
            for (i, &d) in degree.iter().enumerate() {
                triplets.push((i, i, 1.0 / d));
            }
        }
        Ok(Self {
            matrix: SparseMatrix::from_triplets(n, &triplets)?,
            self_loops,
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn self_loops(&self) -> bool {
        self.self_loops
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Z′ = S·Z, applied once.
    pub fn apply(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.matrix.apply_vec(z)
    }

    /// S applied `passes` times; zero passes returns Z unchanged.
    pub fn apply_passes(&self, z: &[f64], passes: usize) -> Result<Vec<f64>> {
        let mut out = z.to_vec();
        for _ in 0..passes {
            out = self.apply(&out)?;
        }
        Ok(out)
    }
}

/// Free-function form of [`SmoothingOperator::apply`].
pub fn apply_smoothing(op: &SmoothingOperator, z: &[f64]) -> Result<Vec<f64>> {
    op.apply(z)
}

/// A layer with its k-NN edges, edge labels, and cached smoothing operator.
#[derive(Debug, Clone)]
pub struct ScanGraph {
    pub scan: LayerScan,
    /// Unique undirected edges, (u, v) with u < v, ascending.
    pub edges: Vec<(usize, usize)>,
    pub edge_class: Vec<EdgeClass>,
    pub degree: Vec<usize>,
    pub smoother: SmoothingOperator,
}

impl ScanGraph {
    pub fn build(scan: LayerScan, k: usize, self_loops: bool) -> Result<Self> {
        let edges = knn_edges(&scan.positions, k)?;
        let edge_class = label_edges(&edges, &scan.track_id)?;
        let mut degree = vec![0usize; scan.len()];
        for &(u, v) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let smoother = SmoothingOperator::from_edges(scan.len(), &edges, self_loops)?;
        Ok(Self {
            scan,
            edges,
            edge_class,
            degree,
            smoother,
        })
    }

    pub fn n(&self) -> usize {
        self.scan.len()
    }

    /// Directed edge arrays for message passing: every undirected edge
    /// appears in both directions, ordered by (dst, src).
    pub fn directed_edges(&self) -> (Vec<usize>, Vec<usize>, Vec<EdgeClass>) {
        let mut dir: Vec<(usize, usize, EdgeClass)> = Vec::with_capacity(self.edges.len() * 2);
        for (&(u, v), &c) in self.edges.iter().zip(&self.edge_class) {
            dir.push((v, u, c)); // message u -> v
            dir.push((u, v, c)); // message v -> u
        }
        dir.sort_unstable_by_key(|&(dst, src, _)| (dst, src));
        let src = dir.iter().map(|&(_, s, _)| s).collect();
        let dst = dir.iter().map(|&(d, _, _)| d).collect();
        let class = dir.iter().map(|&(_, _, c)| c).collect();
        (src, dst, class)
    }

    /// Binary adjacency without self-loops.
    pub fn adjacency(&self) -> Result<SparseMatrix> {
        let mut triplets = Vec::with_capacity(self.edges.len() * 2);
        for &(u, v) in &self.edges {
            triplets.push((u, v, 1.0));
            triplets.push((v, u, 1.0));
        }
        SparseMatrix::from_triplets(self.n(), &triplets)
    }

    /// D̃^{-1/2} Ã D̃^{-1/2} with self-loops, as used by graph convolution.
    pub fn normalized_adjacency(&self) -> Result<SparseMatrix> {
        Ok(SmoothingOperator::from_edges(self.n(), &self.edges, true)?
            .matrix()
            .clone())
    }

    /// Serializes the undirected edge list as `src,dst,class` rows.
    pub fn write_edges_csv<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "src,dst,class")?;
        for (&(u, v), c) in self.edges.iter().zip(&self.edge_class) {
            writeln!(w, "{u},{v},{}", c.index())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scan::{generate_layer, LayerSpec};

    /// Dense all-pairs oracle: sort every other node by (distance, id),
    /// take k, symmetrize.
    fn knn_oracle(positions: &[[f64; 2]], k: usize) -> Vec<(usize, usize)> {
        let n = positions.len();
        let mut set = std::collections::BTreeSet::new();
        for i in 0..n {
            let mut cand: Vec<(f64, usize)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let dx = positions[i][0] - positions[j][0];
                    let dy = positions[i][1] - positions[j][1];
                    (dx * dx + dy * dy, j)
                })
                .collect();
            cand.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
            for &(_, j) in &cand[..k] {
                set.insert((i.min(j), i.max(j)));
            }
        }
        set.into_iter().collect()
    }

    /// Dense D̃^{-1/2} Ã D̃^{-1/2} construction.
    fn dense_smoother(n: usize, edges: &[(usize, usize)], self_loops: bool) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; n]; n];
        for &(u, v) in edges {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        if self_loops {
            for (i, row) in a.iter_mut().enumerate() {
                row[i] = 1.0;
            }
        }
        let deg: Vec<f64> = a.iter().map(|row| row.iter().sum()).collect();
        let mut s = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                if a[i][j] != 0.0 {
                    s[i][j] = a[i][j] / (deg[i] * deg[j]).sqrt();
                }
            }
        }
        s
    }

    #[test]
    fn two_nodes_single_edge() {
        let edges = knn_edges(&[[0.0, 0.0], [1.0, 0.0]], 1).unwrap();
        assert_eq!(edges, vec![(0, 1)]);
    }

    #[test]
    fn collinear_five_nodes_k2() {
        let positions: Vec<[f64; 2]> = (0..5).map(|i| [i as f64, 0.0]).collect();
        let edges = knn_edges(&positions, 2).unwrap();
        assert_eq!(
            edges,
            vec![(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)]
        );
        assert_eq!(edges, knn_oracle(&positions, 2));
    }

    #[test]
    fn duplicate_points_tie_by_node_id_without_self_edges() {
        // three coincident points and one far away
        let positions = [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [5.0, 0.0]];
        let edges = knn_edges(&positions, 1).unwrap();
        // 0 -> 1, 1 -> 0, 2 -> 0, 3 -> 0 (all ties resolve to lowest id)
        assert_eq!(edges, vec![(0, 1), (0, 2), (0, 3)]);
        assert!(edges.iter().all(|&(u, v)| u != v));
        assert_eq!(edges, knn_oracle(&positions, 1));
    }

    #[test]
    fn knn_rejects_bad_k() {
        let positions = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        assert!(knn_edges(&positions, 0).is_err());
        assert!(knn_edges(&positions, 3).is_err());
        assert!(knn_edges(&positions[..1], 1).is_err());
    }

    #[test]
    fn knn_matches_oracle_on_random_clouds() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for n in [5usize, 9, 17] {
            for k in [1usize, 2, 4] {
                if k >= n {
                    continue;
                }
                let positions: Vec<[f64; 2]> = (0..n)
                    .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                    .collect();
                assert_eq!(
                    knn_edges(&positions, k).unwrap(),
                    knn_oracle(&positions, k),
                    "n={n} k={k}"
                );
            }
        }
    }

    #[test]
    fn edge_labels_by_track_relation() {
        let track_id = vec![3, 3, 4, 4];
        let labels = label_edges(&[(0, 1), (1, 2), (2, 3)], &track_id).unwrap();
        assert_eq!(
            labels,
            vec![
                EdgeClass::SameTrack,
                EdgeClass::CrossTrack,
                EdgeClass::SameTrack
            ]
        );
        // degenerate one-track layer
        let one_track = label_edges(&[(0, 1), (0, 2)], &[7, 7, 7]).unwrap();
        assert!(one_track.iter().all(|&c| c == EdgeClass::SameTrack));
    }

    #[test]
    fn path_graph_smoothing_reference_values() {
        // P3: 0 - 1 - 2, spike on node 0
        let edges = [(0, 1), (1, 2)];
        let bare = SmoothingOperator::from_edges(3, &edges, false).unwrap();
        let z = bare.apply(&[1.0, 0.0, 0.0]).unwrap();
        let want = [0.0, 1.0 / 2.0_f64.sqrt(), 0.0];
        for (g, w) in z.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{z:?}");
        }
        assert!((z[1] - 0.7071).abs() < 1e-4);

        let looped = SmoothingOperator::from_edges(3, &edges, true).unwrap();
        let z = looped.apply(&[1.0, 0.0, 0.0]).unwrap();
        let want = [0.5, 1.0 / 6.0_f64.sqrt(), 0.0];
        for (g, w) in z.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{z:?}");
        }
        assert!((z[1] - 0.4082).abs() < 1e-4);
    }

    #[test]
    fn constant_vector_is_fixed_point_on_regular_graph() {
        // ring of 8 nodes: 2-regular, no self-loops
        let edges: Vec<(usize, usize)> = (0..8).map(|i| (i.min((i + 1) % 8), i.max((i + 1) % 8))).collect();
        let op = SmoothingOperator::from_edges(8, &edges, false).unwrap();
        let z = op.apply(&[3.25; 8]).unwrap();
        for v in z {
            assert!((v - 3.25).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_vector_maps_to_zero() {
        let op = SmoothingOperator::from_edges(3, &[(0, 1), (1, 2)], true).unwrap();
        assert_eq!(op.apply(&[0.0, 0.0, 0.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn isolated_node_rejected_without_self_loops() {
        let err = SmoothingOperator::from_edges(3, &[(0, 1)], false).unwrap_err();
        assert!(err.to_string().contains("node 2"), "{err}");
        // with self-loops the same graph is fine
        assert!(SmoothingOperator::from_edges(3, &[(0, 1)], true).is_ok());
    }

    #[test]
    fn smoothing_matches_dense_oracle_both_modes() {
        let layer = generate_layer(&LayerSpec {
            width_mm: 1.0,
            height_mm: 1.0,
            hatch_spacing_mm: 0.1,
            node_spacing_mm: 0.1,
            seed: 13,
            ..LayerSpec::default()
        })
        .unwrap();
        assert!(layer.len() <= 200);
        let edges = knn_edges(&layer.positions, 4).unwrap();
        for self_loops in [false, true] {
            let op = SmoothingOperator::from_edges(layer.len(), &edges, self_loops).unwrap();
            let dense = dense_smoother(layer.len(), &edges, self_loops);
            let got = op.matrix().to_dense();
            for i in 0..layer.len() {
                for j in 0..layer.len() {
                    assert!(
                        (got.get2(i, j) - dense[i][j]).abs() < 1e-12,
                        "mismatch at ({i}, {j}), self_loops={self_loops}"
                    );
                }
            }
            // entries in (0, 1]
            for i in 0..layer.len() {
                for (_, v) in op.matrix().row(i) {
                    assert!(v > 0.0 && v <= 1.0);
                }
            }
        }
    }

    #[test]
    fn smoothing_is_linear() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let positions: Vec<[f64; 2]> = (0..40)
            .map(|_| [rng.random_range(0.0..1.0), rng.random_range(0.0..1.0)])
            .collect();
        let edges = knn_edges(&positions, 3).unwrap();
        let op = SmoothingOperator::from_edges(40, &edges, true).unwrap();
        let z1: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let z2: Vec<f64> = (0..40).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (a, b) = (2.5, -0.75);
        let combined: Vec<f64> = z1.iter().zip(&z2).map(|(x, y)| a * x + b * y).collect();
        let lhs = op.apply(&combined).unwrap();
        let s1 = op.apply(&z1).unwrap();
        let s2 = op.apply(&z2).unwrap();
        for i in 0..40 {
            let rhs = a * s1[i] + b * s2[i];
            let denom = lhs[i].abs().max(rhs.abs()).max(1e-12);
            assert!(((lhs[i] - rhs) / denom).abs() < 1e-10);
        }
    }

    #[test]
    fn spike_spreads_only_to_graph_neighbours() {
        // 10x10 four-connected grid
        let n = 100;
        let mut edges = Vec::new();
        for r in 0..10usize {
            for c in 0..10usize {
                let i = r * 10 + c;
                if c + 1 < 10 {
                    edges.push((i, i + 1));
                }
                if r + 1 < 10 {
                    edges.push((i, i + 10));
                }
            }
        }
        let spike_at = 44; // interior node
        let mut z = vec![0.0; n];
        z[spike_at] = 1.0;

        let open = SmoothingOperator::from_edges(n, &edges, false).unwrap();
        let z_open = open.apply(&z).unwrap();
        for (i, &v) in z_open.iter().enumerate() {
            let neighbour = [spike_at - 1, spike_at + 1, spike_at - 10, spike_at + 10]
                .contains(&i);
            assert_eq!(v != 0.0, neighbour, "open support wrong at {i}");
        }

        let closed = SmoothingOperator::from_edges(n, &edges, true).unwrap();
        let z_closed = closed.apply(&z).unwrap();
        for (i, &v) in z_closed.iter().enumerate() {
            let in_closed = i == spike_at
                || [spike_at - 1, spike_at + 1, spike_at - 10, spike_at + 10].contains(&i);
            assert_eq!(v != 0.0, in_closed, "closed support wrong at {i}");
        }
    }

    #[test]
    fn apply_passes_zero_is_identity() {
        let op = SmoothingOperator::from_edges(3, &[(0, 1), (1, 2)], true).unwrap();
        let z = [0.5, -1.0, 2.0];
        assert_eq!(op.apply_passes(&z, 0).unwrap(), z.to_vec());
        let twice = op.apply_passes(&z, 2).unwrap();
        let manual = op.apply(&op.apply(&z).unwrap()).unwrap();
        assert_eq!(twice, manual);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let op = SmoothingOperator::from_edges(3, &[(0, 1), (1, 2)], true).unwrap();
        assert!(op.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn serpentine_graph_has_cross_track_edges_per_interior_node() {
        // square-grid geometry (node spacing == hatch spacing)
        let layer = generate_layer(&LayerSpec {
            width_mm: 1.0,
            height_mm: 1.0,
            hatch_spacing_mm: 0.1,
            node_spacing_mm: 0.1,
            seed: 2,
            ..LayerSpec::default()
        })
        .unwrap();
        let tracks = 1 + *layer.track_id.iter().max().unwrap();
        let per_track = layer.len() / tracks as usize;

        for k in [2usize, 6] {
            let graph = ScanGraph::build(layer.clone(), k, true).unwrap();
            let mut has_cross = vec![false; graph.n()];
            for (&(u, v), &c) in graph.edges.iter().zip(&graph.edge_class) {
                if c == EdgeClass::CrossTrack {
                    has_cross[u] = true;
                    has_cross[v] = true;
                }
            }
            for i in 0..graph.n() {
                let t = graph.scan.track_id[i];
                let interior_track = t > 0 && t + 1 < tracks;
                let pos_in_track = i % per_track;
                let interior_node = pos_in_track > 0 && pos_in_track + 1 < per_track;
                if interior_track && interior_node {
                    assert!(has_cross[i], "interior node {i} lacks a cross-track edge (k={k})");
                }
            }
        }
    }

    #[test]
    fn directed_edges_cover_both_directions() {
        let positions = [[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]];
        let layer = LayerScan {
            positions: positions.to_vec(),
            track_id: vec![0, 0, 0],
            node_id: vec![0, 1, 2],
            features: crate::tensor::Tensor::zeros(&[3, 4]),
            labels: crate::tensor::Tensor::zeros(&[3, 4]),
            anomaly_mask: vec![false; 3],
        };
        let graph = ScanGraph::build(layer, 1, true).unwrap();
        let (src, dst, class) = graph.directed_edges();
        assert_eq!(src.len(), graph.edges.len() * 2);
        for (&(u, v), _) in graph.edges.iter().zip(&graph.edge_class) {
            assert!(src.iter().zip(&dst).any(|(&s, &d)| s == u && d == v));
            assert!(src.iter().zip(&dst).any(|(&s, &d)| s == v && d == u));
        }
        assert_eq!(class.len(), src.len());
    }

    #[test]
    fn edges_csv_format() {
        let layer = generate_layer(&LayerSpec {
            width_mm: 0.3,
            height_mm: 0.2,
            hatch_spacing_mm: 0.1,
            node_spacing_mm: 0.1,
            seed: 4,
            ..LayerSpec::default()
        })
        .unwrap();
        let graph = ScanGraph::build(layer, 2, true).unwrap();
        let mut buf = Vec::new();
        graph.write_edges_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("src,dst,class"));
        for line in lines {
            let parts: Vec<&str> = line.split(',').collect();
            assert_eq!(parts.len(), 3);
            let class: usize = parts[2].parse().unwrap();
            assert!(class == 0 || class == 1);
        }
    }
}
