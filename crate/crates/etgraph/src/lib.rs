//! Quantum graphs with equi-transmitting vertex scattering.
//!
//! A metric graph with a wave operator on its bonds is quantized by a
//! `2B x 2B` bond scattering matrix `U = D(k) S`, where `S` couples directed
//! bonds through per-vertex scattering matrices and `D(k)` carries the bond
//! phases. This crate builds the vertex matrices (Neumann, Fourier, and the
//! equi-transmitting family that forbids back-scattering), assembles `U`,
//! the classical map `M = |U|^2`, and the non-backtracking bond adjacency
//! `W`, and provides the spectral and statistical tooling used to study
//! them: closed-form classical spectra on regular graphs, Bass-type
//! determinant identities, spectral-gap comparisons, periodic-orbit counts,
//! and eigenphase statistics over random-phase ensembles.
//!
//! Module map:
//!
//! * [`numerics`]: certified dense eigensolver, polar factor, determinant.
//! * [`graph`]: undirected topologies and the directed-bond index.
//! * [`scatmat`]: vertex scattering constructions and the numerical search.
//! * [`quantize`]: `U`, `M`, `W` assembly and determinant identities.
//! * [`spectral`]: closed-form classical spectra, gaps, orbit counts.
//! * [`stats`]: eigenphase ensembles, spacings, number variance.

pub mod error;
pub mod graph;
pub mod numerics;
pub mod quantize;
pub mod scatmat;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{DirectedBondIndex, GraphTopology};
pub use numerics::{ComplexMatrix, Spectrum};
pub use quantize::{PhaseVector, ScatteringAssignment};
pub use scatmat::{ScatteringFamily, ScatteringMatrix, SkewHadamard};
pub use spectral::ClassicalSpectrum;
pub use stats::EigenphaseEnsemble;
