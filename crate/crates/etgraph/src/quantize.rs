//! Assembly of the bond operators and their determinant identities.
//!
//! For directed bonds `b = (p -> j)` and `b' = (m -> q)` the evolution
//! operator is `U_{b,b'} = delta_{jm} sigma^{(j)}_{pq} e^{i x_b}`, where
//! `x_b` is the phase of the undirected bond under `b` (both directions
//! share it, as a bond has one length). `M = |U|^2` entrywise is the
//! classical doubly stochastic map, and `W` is the non-backtracking bond
//! adjacency `W_{b,b'} = delta_{jm} (1 - delta_{pq})`, coupled to `M` on
//! `v`-regular graphs by `M = ((1-r)/(v-1)) W + r P_rev`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{DirectedBondIndex, GraphTopology};
use crate::numerics::{determinant, ComplexMatrix};
use crate::scatmat::{
    build_fourier, build_neumann, et_five, et_from_character, et_from_hadamard,
    build_skew_hadamard, legendre_index, MatrixSymmetry, ScatteringFamily, ScatteringMatrix,
};

/// Per-vertex scattering matrices aligned to the sorted-neighbour slots.
#[derive(Debug, Clone)]
pub struct ScatteringAssignment {
    matrices: Vec<ScatteringMatrix>,
}

impl ScatteringAssignment {
    /// One matrix per vertex; dimensions must match the valencies.
    pub fn per_vertex(graph: &GraphTopology, matrices: Vec<ScatteringMatrix>) -> Result<Self> {
        if matrices.len() != graph.vertex_count() {
            return Err(Error::DimensionMismatch(format!(
                "{} matrices for {} vertices",
                matrices.len(),
                graph.vertex_count()
            )));
        }
        for (j, m) in matrices.iter().enumerate() {
            if m.dim() != graph.valency(j) {
                return Err(Error::DimensionMismatch(format!(
                    "vertex {j} has valency {} but a {}x{} scattering matrix",
                    graph.valency(j),
                    m.dim(),
                    m.dim()
                )));
            }
        }
        Ok(ScatteringAssignment { matrices })
    }

    /// The same matrix at every vertex of a regular graph.
    pub fn uniform(graph: &GraphTopology, matrix: &ScatteringMatrix) -> Result<Self> {
        let v = graph.regular_valency().ok_or_else(|| {
            Error::GraphConstraint("uniform assignment needs a regular graph".into())
        })?;
        if matrix.dim() != v {
            return Err(Error::DimensionMismatch(format!(
                "valency {v} vs {}x{} scattering matrix",
                matrix.dim(),
                matrix.dim()
            )));
        }
        Ok(ScatteringAssignment {
            matrices: vec![matrix.clone(); graph.vertex_count()],
        })
    }

    pub fn matrix(&self, vertex: usize) -> &ScatteringMatrix {
        &self.matrices[vertex]
    }

    pub fn vertex_count(&self) -> usize {
        self.matrices.len()
    }

    /// Reflection probability shared by all vertices, if there is one.
    pub fn common_r(&self) -> Option<f64> {
        let r = self.matrices.first()?.r_parameter();
        self.matrices
            .iter()
            .all(|m| m.r_parameter() == r)
            .then_some(r)
    }

    /// Family label for metadata: the common family, or `mixed`.
    pub fn family_label(&self) -> String {
        let first = self.matrices.first().map(|m| m.family());
        match first {
            Some(f) if self.matrices.iter().all(|m| m.family() == f) => f.to_string(),
            Some(_) => "mixed".into(),
            None => "empty".into(),
        }
    }

    /// True when every vertex matrix is symmetric (resp. antisymmetric).
    pub fn uniform_symmetry(&self) -> Option<MatrixSymmetry> {
        let s = self.matrices.first()?.symmetry();
        self.matrices
            .iter()
            .all(|m| m.symmetry() == s)
            .then_some(s)
    }
}

/// Builds a scattering matrix of the requested family for one valency.
pub fn family_matrix_for_dim(
    family: ScatteringFamily,
    v: usize,
    char_index: Option<u64>,
) -> Result<ScatteringMatrix> {
    match family {
        ScatteringFamily::Neumann => build_neumann(v),
        ScatteringFamily::Fourier => build_fourier(v),
        ScatteringFamily::EtHadamard => et_from_hadamard(&build_skew_hadamard(v)?),
        ScatteringFamily::EtCharacter => {
            if v < 4 {
                return Err(Error::InvalidArgument(format!(
                    "character ET matrices need dimension >= 4, got {v}"
                )));
            }
            let p = (v - 1) as u64;
            let m = char_index.unwrap_or_else(|| legendre_index(p));
            et_from_character(p, m)
        }
        ScatteringFamily::EtFiveExample => {
            if v != 5 {
                return Err(Error::InvalidArgument(format!(
                    "the explicit ET example has dimension 5, not {v}"
                )));
            }
            Ok(et_five())
        }
        ScatteringFamily::EtSearched => Err(Error::InvalidArgument(
            "searched matrices come from et_search, not a family constructor".into(),
        )),
    }
}

/// Assigns one family to every vertex, building a matrix per valency.
pub fn assignment_from_family(
    graph: &GraphTopology,
    family: ScatteringFamily,
    char_index: Option<u64>,
) -> Result<ScatteringAssignment> {
    let matrices = (0..graph.vertex_count())
        .map(|j| family_matrix_for_dim(family, graph.valency(j), char_index))
        .collect::<Result<Vec<_>>>()?;
    ScatteringAssignment::per_vertex(graph, matrices)
}

/// First constructible ET matrix for a valency: skew-Hadamard, then the
/// 5-dimensional example, then a Legendre-character matrix.
pub fn et_matrix_for_dim(v: usize) -> Result<ScatteringMatrix> {
    if let Ok(h) = build_skew_hadamard(v) {
        return et_from_hadamard(&h);
    }
    if v == 5 {
        return Ok(et_five());
    }
    if v >= 4 {
        let p = (v - 1) as u64;
        if let Ok(sm) = et_from_character(p, legendre_index(p)) {
            return Ok(sm);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no ET construction available for dimension {v}"
    )))
}

/// ET assignment for every vertex of a graph via [`et_matrix_for_dim`].
pub fn et_assignment(graph: &GraphTopology) -> Result<ScatteringAssignment> {
    let matrices = (0..graph.vertex_count())
        .map(|j| et_matrix_for_dim(graph.valency(j)))
        .collect::<Result<Vec<_>>>()?;
    ScatteringAssignment::per_vertex(graph, matrices)
}

/// One phase per undirected bond, in `[0, 2 pi)`; both directions of a
/// bond share the phase because they share the bond length.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseVector {
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        for (i, &x) in phases.iter().enumerate() {
            if !x.is_finite() || !(0.0..std::f64::consts::TAU).contains(&x) {
                return Err(Error::InvalidArgument(format!(
                    "phase {i} = {x} outside [0, 2 pi)"
                )));
            }
        }
        Ok(PhaseVector { phases })
    }

    pub fn zeros(bonds: usize) -> Self {
        PhaseVector {
            phases: vec![0.0; bonds],
        }
    }

    /// Independent uniform phases, one per undirected bond.
    pub fn random<R: Rng>(bonds: usize, rng: &mut R) -> Self {
        PhaseVector {
            phases: (0..bonds)
                .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn get(&self, bond: usize) -> f64 {
        self.phases[bond]
    }
}

fn check_assignment(graph: &GraphTopology, assign: &ScatteringAssignment) -> Result<()> {
    if assign.vertex_count() != graph.vertex_count() {
        return Err(Error::DimensionMismatch(format!(
            "assignment covers {} vertices, graph has {}",
            assign.vertex_count(),
            graph.vertex_count()
        )));
    }
    for j in 0..graph.vertex_count() {
        if assign.matrix(j).dim() != graph.valency(j) {
            return Err(Error::DimensionMismatch(format!(
                "vertex {j}: valency {} vs matrix dimension {}",
                graph.valency(j),
                assign.matrix(j).dim()
            )));
        }
    }
    Ok(())
}

/// Quantum evolution operator `U = D S` on directed bonds.
///
/// Row `b = (p -> j)` couples to the bonds leaving `j`; the entry at
/// column `b' = (j -> q)` is `sigma^{(j)}_{pq} e^{i x_b}` in the
/// sorted-neighbour slot convention.
pub fn build_u(
    graph: &GraphTopology,
    assign: &ScatteringAssignment,
    phases: &PhaseVector,
) -> Result<ComplexMatrix> {
    check_assignment(graph, assign)?;
    if phases.len() != graph.bond_count() {
        return Err(Error::DimensionMismatch(format!(
            "{} phases for {} bonds",
            phases.len(),
            graph.bond_count()
        )));
    }
    let idx = DirectedBondIndex::new(graph);
    let two_b = idx.bond_count();
    let mut u = ComplexMatrix::zeros(two_b, two_b);
    for b in 0..two_b {
        let j = idx.head(b);
        let p = idx.tail(b);
        let sp = graph.neighbor_slot(j, p).expect("bond endpoint adjacency");
        let phase = Complex64::from_polar(1.0, phases.get(idx.edge_of(b)));
        let sigma = assign.matrix(j).sigma();
        for (sq, &b2) in idx.outgoing(j).iter().enumerate() {
            u.set(b, b2, sigma.get(sp, sq) * phase);
        }
    }
    Ok(u)
}

/// Classical map `M`: entrywise squared moduli of the scattering part.
pub fn build_m(graph: &GraphTopology, assign: &ScatteringAssignment) -> Result<ComplexMatrix> {
    check_assignment(graph, assign)?;
    let idx = DirectedBondIndex::new(graph);
    let two_b = idx.bond_count();
    let mut m = ComplexMatrix::zeros(two_b, two_b);
    for b in 0..two_b {
        let j = idx.head(b);
        let p = idx.tail(b);
        let sp = graph.neighbor_slot(j, p).expect("bond endpoint adjacency");
        let sigma = assign.matrix(j).sigma();
        for (sq, &b2) in idx.outgoing(j).iter().enumerate() {
            m.set(b, b2, Complex64::new(sigma.get(sp, sq).norm_sqr(), 0.0));
        }
    }
    Ok(m)
}

/// Non-backtracking bond adjacency `W` (0/1 entries).
pub fn build_w(graph: &GraphTopology) -> ComplexMatrix {
    let idx = DirectedBondIndex::new(graph);
    let two_b = idx.bond_count();
    let mut w = ComplexMatrix::zeros(two_b, two_b);
    for b in 0..two_b {
        let j = idx.head(b);
        for &b2 in idx.outgoing(j) {
            if b2 != idx.rev(b) {
                w.set(b, b2, Complex64::new(1.0, 0.0));
            }
        }
    }
    w
}

/// Secular function `det(I - z A)`.
pub fn secular_value(a: &ComplexMatrix, z: Complex64) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let shifted = ComplexMatrix::identity(n).sub(&a.scale(z))?;
    determinant(&shifted)
}

/// Relative defect of the Bass identity
/// `det(I - uW) = (1 - u^2)^{B-V} det((1 + (v-1)u^2) I - u C)`
/// on a `v`-regular graph, both sides evaluated independently.
pub fn bass_identity_residual(graph: &GraphTopology, u: Complex64) -> Result<f64> {
    let v = graph
        .regular_valency()
        .ok_or_else(|| Error::GraphConstraint("Bass identity needs a regular graph".into()))?;
    let w = build_w(graph);
    let n = w.rows();
    let lhs = determinant(&ComplexMatrix::identity(n).sub(&w.scale(u))?)?;
    let c = graph.connectivity_matrix();
    let nv = graph.vertex_count();
    let one = Complex64::new(1.0, 0.0);
    let coeff = one + (v as f64 - 1.0) * u * u;
    let inner = ComplexMatrix::identity(nv)
        .scale(coeff)
        .sub(&c.scale(u))?;
    let exponent = (graph.bond_count() - nv) as i32;
    let rhs = (one - u * u).powi(exponent) * determinant(&inner)?;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    Ok((lhs - rhs).norm() / scale)
}

/// Relative defect of the general-`r` factorization
/// `det(uI - M) = (u^2 - (1-rv)^2/(v-1)^2)^{(v-2)V/2}
///                det((u^2 + (1-rv)/(v-1)) I - ((1-r)/(v-1)) u C)`
/// with `M` supplied by the caller (built from actual scattering entries,
/// so the two sides come from independent routes).
pub fn bartholdi_factorization_residual(
    graph: &GraphTopology,
    m: &ComplexMatrix,
    r: f64,
    u: Complex64,
) -> Result<f64> {
    let v = graph.regular_valency().ok_or_else(|| {
        Error::GraphConstraint("the factorization needs a regular graph".into())
    })?;
    let nv = graph.vertex_count();
    if (v - 2) * nv % 2 != 0 {
        return Err(Error::GraphConstraint(
            "(v - 2) V must be even for the fixed-point exponent".into(),
        ));
    }
    let two_b = 2 * graph.bond_count();
    if m.rows() != two_b || m.cols() != two_b {
        return Err(Error::DimensionMismatch(format!(
            "M is {}x{}, expected {two_b}x{two_b}",
            m.rows(),
            m.cols()
        )));
    }
    let lhs = determinant(&ComplexMatrix::identity(two_b).scale(u).sub(m)?)?;
    let vm1 = v as f64 - 1.0;
    let fixed = (1.0 - r * v as f64) / vm1;
    let c = graph.connectivity_matrix();
    let inner = ComplexMatrix::identity(nv)
        .scale(u * u + fixed)
        .sub(&c.scale(u * (1.0 - r) / vm1))?;
    let exponent = ((v - 2) * nv / 2) as i32;
    let rhs = (u * u - fixed * fixed).powi(exponent) * determinant(&inner)?;
    let scale = lhs.norm().max(rhs.norm()).max(1.0);
    Ok((lhs - rhs).norm() / scale)
}

/// Time-reversal conjugate `P_rev A^T P_rev` in the bond layout.
pub fn reversal_conjugate(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() || a.rows() % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "reversal conjugation needs a square even-dimensional matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    ComplexMatrix::from_fn(a.rows(), a.cols(), |b, b2| a.get(b2 ^ 1, b ^ 1))
}

/// Defects of the two time-reversal identities for `U = D S`:
/// `D (P_rev U^T P_rev) = +/- U D`, `+` when every vertex matrix is
/// symmetric and `-` when antisymmetric. Since the left side equals
/// `D S D`, either identity makes `P_rev U^T P_rev` similar to `+/- U`,
/// which is the spectral time-reversal statement in checkable matrix form.
/// Returns `(symmetric_defect, antisymmetric_defect)` in Frobenius norm.
pub fn time_reversal_defects(
    graph: &GraphTopology,
    assign: &ScatteringAssignment,
    phases: &PhaseVector,
) -> Result<(f64, f64)> {
    let u = build_u(graph, assign, phases)?;
    let t = reversal_conjugate(&u)?;
    let idx = DirectedBondIndex::new(graph);
    let two_b = idx.bond_count();
    let mut d = ComplexMatrix::zeros(two_b, two_b);
    for b in 0..two_b {
        d.set(b, b, Complex64::from_polar(1.0, phases.get(idx.edge_of(b))));
    }
    let lhs = d.matmul(&t)?;
    let rhs = u.matmul(&d)?;
    let sym = lhs.sub(&rhs)?.frobenius_norm();
    let anti = lhs.add(&rhs)?.frobenius_norm();
    Ok((sym, anti))
}
