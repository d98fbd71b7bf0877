//! Undirected graph topologies and the directed-bond index.
//!
//! Graphs are simple, connected and loop-free. Every undirected edge `e`
//! splits into two directed bonds `2e` and `2e + 1`, so bond reversal is a
//! bit flip and all bond-indexed matrices share one layout.

use ndarray::Array2;
use ndarray_linalg::Eigh;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;
use num_complex::Complex64;

/// Simple connected undirected graph.
///
/// Serializes as `{"V": n, "edges": [[p, q], ...]}`. Neighbour lists are
/// kept sorted; the position of a neighbour in that list is the slot used
/// to index vertex scattering matrices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph", into = "RawGraph")]
pub struct GraphTopology {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct RawGraph {
    #[serde(rename = "V")]
    vertex_count: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<RawGraph> for GraphTopology {
    type Error = Error;

    fn try_from(raw: RawGraph) -> Result<Self> {
        GraphTopology::new(
            raw.vertex_count,
            raw.edges.into_iter().map(|[p, q]| (p, q)).collect(),
        )
    }
}

impl From<GraphTopology> for RawGraph {
    fn from(g: GraphTopology) -> Self {
        RawGraph {
            vertex_count: g.vertex_count,
            edges: g.edges.iter().map(|&(p, q)| [p, q]).collect(),
        }
    }
}

impl GraphTopology {
    /// Validates and stores a topology: labels in range, no loops, no
    /// duplicate edges in either orientation, and connected.
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if vertex_count < 2 {
            return Err(Error::GraphConstraint(format!(
                "need at least 2 vertices, got {vertex_count}"
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for &(p, q) in &edges {
            if p >= vertex_count || q >= vertex_count {
                return Err(Error::GraphConstraint(format!(
                    "edge ({p}, {q}) references a vertex >= {vertex_count}"
                )));
            }
            if p == q {
                return Err(Error::GraphConstraint(format!("loop at vertex {p}")));
            }
            let key = (p.min(q), p.max(q));
            if !seen.insert(key) {
                return Err(Error::GraphConstraint(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
        }
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(p, q) in &edges {
            neighbors[p].push(q);
            neighbors[q].push(p);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        let g = GraphTopology {
            vertex_count,
            edges,
            neighbors,
        };
        if !g.is_connected() {
            return Err(Error::GraphConstraint("graph is not connected".into()));
        }
        Ok(g)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Undirected edge count `B`.
    pub fn bond_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in storage order; edge `e` yields directed bonds `2e`, `2e+1`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Sorted neighbour list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn valency(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    /// Position of `u` in the sorted neighbour list of `v`.
    pub fn neighbor_slot(&self, v: usize, u: usize) -> Option<usize> {
        self.neighbors[v].binary_search(&u).ok()
    }

    /// Common valency if the graph is regular.
    pub fn regular_valency(&self) -> Option<usize> {
        let v0 = self.valency(0);
        (1..self.vertex_count)
            .all(|v| self.valency(v) == v0)
            .then_some(v0)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &u in &self.neighbors[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    stack.push(u);
                }
            }
        }
        count == self.vertex_count
    }

    /// Vertex connectivity (adjacency) matrix `C` as a complex matrix.
    pub fn connectivity_matrix(&self) -> ComplexMatrix {
        let mut c = ComplexMatrix::zeros(self.vertex_count, self.vertex_count);
        for &(p, q) in &self.edges {
            c.set(p, q, Complex64::new(1.0, 0.0));
            c.set(q, p, Complex64::new(1.0, 0.0));
        }
        c
    }

    /// Eigenvalues of `C`, sorted descending. Uses the symmetric
    /// eigensolver, so the values are real by construction.
    pub fn connectivity_spectrum(&self) -> Result<Vec<f64>> {
        let mut c = Array2::<f64>::zeros((self.vertex_count, self.vertex_count));
        for &(p, q) in &self.edges {
            c[(p, q)] = 1.0;
            c[(q, p)] = 1.0;
        }
        let (vals, _) = c
            .eigh(ndarray_linalg::UPLO::Lower)
            .map_err(|e| Error::Backend(format!("symmetric eigendecomposition failed: {e}")))?;
        let mut vals = vals.to_vec();
        vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(vals)
    }

    /// Whether a regular graph satisfies the Ramanujan bound: every
    /// connectivity eigenvalue other than `v` (and `-v` on bipartite
    /// graphs) has modulus at most `2 sqrt(v - 1)`.
    pub fn is_ramanujan(&self) -> Result<bool> {
        let v = self.regular_valency().ok_or_else(|| {
            Error::GraphConstraint("Ramanujan bound is defined for regular graphs".into())
        })? as f64;
        let bound = 2.0 * (v - 1.0).sqrt() + 1e-9;
        let mut spectrum = self.connectivity_spectrum()?;
        // Drop one copy of the Perron eigenvalue v, and one copy of -v if
        // the graph is bipartite.
        if let Some(pos) = spectrum.iter().position(|&mu| (mu - v).abs() < 1e-9) {
            spectrum.remove(pos);
        }
        if let Some(pos) = spectrum.iter().position(|&mu| (mu + v).abs() < 1e-9) {
            spectrum.remove(pos);
        }
        Ok(spectrum.iter().all(|&mu| mu.abs() <= bound))
    }

    /// Number of triangles, counted by brute force in integer arithmetic.
    pub fn triangle_count(&self) -> u64 {
        let mut count = 0u64;
        for p in 0..self.vertex_count {
            for &q in &self.neighbors[p] {
                if q <= p {
                    continue;
                }
                for &r in &self.neighbors[q] {
                    if r <= q {
                        continue;
                    }
                    if self.neighbor_slot(r, p).is_some() {
                        count += 1;
                    }
                }
            }
        }
        count
    }
}

/// Complete graph on `n` vertices.
pub fn complete_graph(n: usize) -> Result<GraphTopology> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "complete graph needs n >= 3, got {n}"
        )));
    }
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for p in 0..n {
        for q in (p + 1)..n {
            edges.push((p, q));
        }
    }
    GraphTopology::new(n, edges)
}

/// Uniform random `v`-regular simple connected graph on `vertex_count`
/// vertices via the pairing model, resampling until the pairing is simple
/// and connected. Deterministic in `seed`.
pub fn random_regular(v: usize, vertex_count: usize, seed: u64) -> Result<GraphTopology> {
    if v < 3 {
        return Err(Error::InvalidArgument(format!("valency must be >= 3, got {v}")));
    }
    if v >= vertex_count {
        return Err(Error::InvalidArgument(format!(
            "valency {v} requires more than {vertex_count} vertices"
        )));
    }
    if (v * vertex_count) % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "v * V = {} is odd, no {v}-regular graph on {vertex_count} vertices exists",
            v * vertex_count
        )));
    }
    const MAX_ATTEMPTS: usize = 10_000;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let mut points: Vec<usize> = (0..v * vertex_count).collect();
        points.shuffle(&mut rng);
        let mut edges = Vec::with_capacity(v * vertex_count / 2);
        let mut seen = std::collections::HashSet::new();
        let mut simple = true;
        for pair in points.chunks_exact(2) {
            let (p, q) = (pair[0] / v, pair[1] / v);
            if p == q || !seen.insert((p.min(q), p.max(q))) {
                simple = false;
                break;
            }
            edges.push((p, q));
        }
        if !simple {
            continue;
        }
        if let Ok(g) = GraphTopology::new(vertex_count, edges) {
            return Ok(g);
        }
    }
    Err(Error::RetriesExhausted {
        attempts: MAX_ATTEMPTS,
        context: format!("sampling a simple connected {v}-regular graph on {vertex_count} vertices"),
    })
}

/// Two complete graphs `K_c` joined by a bridge pair: one edge is removed
/// from each clique and the freed endpoints are cross-connected, keeping
/// the graph `(c - 1)`-regular. For `c = 6` this gives a 5-regular graph
/// on 12 vertices whose second connectivity eigenvalue exceeds
/// `2 sqrt(v - 1)`, a convenient non-Ramanujan fixture.
pub fn bridged_cliques(c: usize) -> Result<GraphTopology> {
    if c < 4 {
        return Err(Error::InvalidArgument(format!(
            "bridged cliques need c >= 4, got {c}"
        )));
    }
    let mut edges = Vec::new();
    for offset in [0, c] {
        for p in 0..c {
            for q in (p + 1)..c {
                // Skip the edge between the first two vertices of each clique.
                if p == 0 && q == 1 {
                    continue;
                }
                edges.push((offset + p, offset + q));
            }
        }
    }
    edges.push((0, c));
    edges.push((1, c + 1));
    GraphTopology::new(2 * c, edges)
}

/// Directed-bond index of a topology.
///
/// Bond `2e` runs along edge `e` as stored, bond `2e + 1` runs against it,
/// so [`DirectedBondIndex::rev`] is a bit flip.
#[derive(Debug, Clone)]
pub struct DirectedBondIndex {
    tails: Vec<usize>,
    heads: Vec<usize>,
    /// Outgoing bonds per vertex, listed in sorted-neighbour order so that
    /// position matches the scattering-matrix slot.
    outgoing: Vec<Vec<usize>>,
}

impl DirectedBondIndex {
    pub fn new(graph: &GraphTopology) -> Self {
        let two_b = 2 * graph.bond_count();
        let mut tails = Vec::with_capacity(two_b);
        let mut heads = Vec::with_capacity(two_b);
        for &(p, q) in graph.edges() {
            tails.push(p);
            heads.push(q);
            tails.push(q);
            heads.push(p);
        }
        let mut outgoing = vec![Vec::new(); graph.vertex_count()];
        for v in 0..graph.vertex_count() {
            for &u in graph.neighbors(v) {
                let bond = (0..two_b)
                    .find(|&b| tails[b] == v && heads[b] == u)
                    .expect("every neighbour pair is a bond");
                outgoing[v].push(bond);
            }
        }
        DirectedBondIndex {
            tails,
            heads,
            outgoing,
        }
    }

    /// Number of directed bonds, `2B`.
    pub fn bond_count(&self) -> usize {
        self.tails.len()
    }

    pub fn tail(&self, bond: usize) -> usize {
        self.tails[bond]
    }

    pub fn head(&self, bond: usize) -> usize {
        self.heads[bond]
    }

    /// Reversal partner of a bond.
    pub fn rev(&self, bond: usize) -> usize {
        bond ^ 1
    }

    /// Undirected edge the bond belongs to.
    pub fn edge_of(&self, bond: usize) -> usize {
        bond / 2
    }

    /// Outgoing bonds of `v` in sorted-neighbour (slot) order.
    pub fn outgoing(&self, v: usize) -> &[usize] {
        &self.outgoing[v]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_graph_counts() {
        let g = complete_graph(4).unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.bond_count(), 6);
        assert_eq!(g.regular_valency(), Some(3));
        assert_eq!(g.neighbors(2), &[0, 1, 3]);
        assert_eq!(g.triangle_count(), 4);
    }

    #[test]
    fn complete_graph_spectrum_is_two_valued() {
        // K_13: one eigenvalue 12, twelve eigenvalues -1.
        let g = complete_graph(13).unwrap();
        let spec = g.connectivity_spectrum().unwrap();
        assert!((spec[0] - 12.0).abs() < 1e-10);
        for &mu in &spec[1..] {
            assert!((mu + 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_identities_match_integer_counts() {
        let g = random_regular(4, 14, 7).unwrap();
        let spec = g.connectivity_spectrum().unwrap();
        let t1: f64 = spec.iter().sum();
        let t2: f64 = spec.iter().map(|m| m * m).sum();
        let t3: f64 = spec.iter().map(|m| m * m * m).sum();
        assert!(t1.abs() < 1e-9);
        assert!((t2 - 2.0 * g.bond_count() as f64).abs() < 1e-8);
        assert!((t3 - 6.0 * g.triangle_count() as f64).abs() < 1e-8);
    }

    #[test]
    fn rejects_malformed_graphs() {
        assert!(GraphTopology::new(3, vec![(0, 0), (1, 2)]).is_err());
        assert!(GraphTopology::new(3, vec![(0, 1), (1, 0), (1, 2)]).is_err());
        assert!(GraphTopology::new(3, vec![(0, 3)]).is_err());
        // Two disjoint edges: not connected.
        assert!(GraphTopology::new(4, vec![(0, 1), (2, 3)]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let g = complete_graph(5).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert!(text.contains("\"V\":5"));
        let back: GraphTopology = serde_json::from_str(&text).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn json_rejects_disconnected() {
        let text = r#"{"V": 4, "edges": [[0, 1], [2, 3]]}"#;
        assert!(serde_json::from_str::<GraphTopology>(text).is_err());
    }

    #[test]
    fn random_regular_is_deterministic_and_regular() {
        let a = random_regular(5, 20, 42).unwrap();
        let b = random_regular(5, 20, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.regular_valency(), Some(5));
        assert_eq!(a.bond_count(), 50);
        let c = random_regular(5, 20, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn random_regular_rejects_odd_degree_sum() {
        assert!(matches!(
            random_regular(5, 11, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            random_regular(2, 10, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn ramanujan_classification() {
        assert!(complete_graph(6).unwrap().is_ramanujan().unwrap());
        assert!(complete_graph(13).unwrap().is_ramanujan().unwrap());
        let g = bridged_cliques(6).unwrap();
        assert_eq!(g.regular_valency(), Some(5));
        assert_eq!(g.vertex_count(), 12);
        assert!(!g.is_ramanujan().unwrap());
        // The offending eigenvalue sits above the bound but below v.
        let spec = g.connectivity_spectrum().unwrap();
        assert!(spec[1] > 2.0 * 2.0 && spec[1] < 5.0);
    }

    #[test]
    fn ramanujan_requires_regularity() {
        let g = GraphTopology::new(4, vec![(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]).unwrap();
        assert!(matches!(
            g.is_ramanujan(),
            Err(Error::GraphConstraint(_))
        ));
    }

    #[test]
    fn bond_index_conventions() {
        let g = complete_graph(4).unwrap();
        let idx = DirectedBondIndex::new(&g);
        assert_eq!(idx.bond_count(), 12);
        for b in 0..idx.bond_count() {
            assert_eq!(idx.rev(idx.rev(b)), b);
            assert_eq!(idx.tail(idx.rev(b)), idx.head(b));
            assert_eq!(idx.head(idx.rev(b)), idx.tail(b));
            assert_eq!(idx.edge_of(b), b / 2);
        }
        for v in 0..4 {
            let out = idx.outgoing(v);
            assert_eq!(out.len(), 3);
            for (slot, &b) in out.iter().enumerate() {
                assert_eq!(idx.tail(b), v);
                assert_eq!(g.neighbors(v)[slot], idx.head(b));
            }
        }
    }
}
