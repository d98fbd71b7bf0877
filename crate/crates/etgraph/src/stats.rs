//! Random-phase ensemble statistics of the eigenphases of `U`.
//!
//! Bond phases are drawn per undirected bond (both directions share a
//! length), the evolution operator is diagonalized, and the eigenphases
//! are unfolded on the circle to unit mean spacing. Nearest-neighbour
//! spacing densities and number variances are then compared against the
//! Wigner surmises and the asymptotic number-variance curves of the
//! Gaussian orthogonal and unitary ensembles.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::consts::EULER_MASCHERONI;
use statrs::function::erf::erf;
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::graph::GraphTopology;
use crate::numerics::eigenvalues_dense;
use crate::quantize::{build_u, PhaseVector, ScatteringAssignment};

pub const DEFAULT_SPACING_BINS: usize = 50;
pub const DEFAULT_S_MAX: f64 = 4.0;
/// Window positions per realization in the number-variance estimator.
pub const VARIANCE_WINDOWS: usize = 200;

/// Identification carried by an ensemble into output metadata.
#[derive(Debug, Clone)]
pub struct EnsembleMetadata {
    pub family: String,
    pub vertex_count: usize,
    pub master_seed: u64,
}

/// Sorted eigenphase vectors, one per disorder realization.
#[derive(Debug, Clone)]
pub struct EigenphaseEnsemble {
    realizations: Vec<Vec<f64>>,
    two_b: usize,
    metadata: EnsembleMetadata,
}

impl EigenphaseEnsemble {
    /// Wraps externally produced sorted phase vectors (surrogate
    /// ensembles for estimator checks use this too).
    pub fn from_realizations(
        realizations: Vec<Vec<f64>>,
        metadata: EnsembleMetadata,
    ) -> Result<Self> {
        let two_b = realizations
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty ensemble".into()))?
            .len();
        if two_b < 2 {
            return Err(Error::InvalidArgument(
                "realizations need at least two phases".into(),
            ));
        }
        for (i, r) in realizations.iter().enumerate() {
            if r.len() != two_b {
                return Err(Error::DimensionMismatch(format!(
                    "realization {i} has {} phases, expected {two_b}",
                    r.len()
                )));
            }
            validate_sorted_phases(r)?;
        }
        Ok(EigenphaseEnsemble {
            realizations,
            two_b,
            metadata,
        })
    }

    pub fn realizations(&self) -> &[Vec<f64>] {
        &self.realizations
    }

    pub fn realization_count(&self) -> usize {
        self.realizations.len()
    }

    /// Phases per realization (`2B` for graph ensembles).
    pub fn phase_count(&self) -> usize {
        self.two_b
    }

    pub fn metadata(&self) -> &EnsembleMetadata {
        &self.metadata
    }
}

fn validate_sorted_phases(phases: &[f64]) -> Result<()> {
    for (i, &x) in phases.iter().enumerate() {
        if !x.is_finite() || !(0.0..TAU).contains(&x) {
            return Err(Error::InvalidArgument(format!(
                "phase {i} = {x} outside [0, 2 pi)"
            )));
        }
        if i > 0 && x < phases[i - 1] {
            return Err(Error::InvalidArgument(format!(
                "phases not sorted at index {i}"
            )));
        }
    }
    Ok(())
}

/// Sorted eigenphases of `U` for realization `index` of `master_seed`.
///
/// Each realization owns an RNG stream keyed by its index, so a batch
/// computed in parallel reproduces the sequential results element-wise.
pub fn realization_phases(
    graph: &GraphTopology,
    assign: &ScatteringAssignment,
    master_seed: u64,
    index: u64,
) -> Result<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    let phases = PhaseVector::random(graph.bond_count(), &mut rng);
    let u = build_u(graph, assign, &phases)?;
    let spectrum = eigenvalues_dense(&u, 1e-6)?;
    let mut thetas = Vec::with_capacity(spectrum.len());
    for z in spectrum.values() {
        if (z.norm() - 1.0).abs() > 1e-9 {
            return Err(Error::Backend(format!(
                "eigenvalue {z} strays from the unit circle"
            )));
        }
        let arg = z.arg();
        thetas.push(if arg < 0.0 { arg + TAU } else { arg });
    }
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(thetas)
}

/// Samples `n_realizations` independent random-phase realizations.
pub fn sample_ensemble(
    graph: &GraphTopology,
    assign: &ScatteringAssignment,
    n_realizations: usize,
    master_seed: u64,
) -> Result<EigenphaseEnsemble> {
    if n_realizations == 0 {
        return Err(Error::InvalidArgument(
            "at least one realization is required".into(),
        ));
    }
    let realizations = (0..n_realizations)
        .map(|i| realization_phases(graph, assign, master_seed, i as u64))
        .collect::<Result<Vec<_>>>()?;
    Ok(EigenphaseEnsemble {
        two_b: realizations[0].len(),
        realizations,
        metadata: EnsembleMetadata {
            family: assign.family_label(),
            vertex_count: graph.vertex_count(),
            master_seed,
        },
    })
}

/// Circular unfolding: consecutive gaps including the wrap-around,
/// rescaled by `n/(2 pi)` so the `n` spacings sum to `n` (mean 1).
pub fn unfold(phases: &[f64]) -> Result<Vec<f64>> {
    if phases.len() < 2 {
        return Err(Error::InvalidArgument(
            "unfolding needs at least two phases".into(),
        ));
    }
    validate_sorted_phases(phases)?;
    let n = phases.len();
    let scale = n as f64 / TAU;
    let mut spacings = Vec::with_capacity(n);
    for w in phases.windows(2) {
        spacings.push((w[1] - w[0]) * scale);
    }
    spacings.push((phases[0] + TAU - phases[n - 1]) * scale);
    Ok(spacings)
}

/// All unfolded spacings of an ensemble, realization-major order.
pub fn unfolded_spacings(ensemble: &EigenphaseEnsemble) -> Result<Vec<f64>> {
    let mut all = Vec::with_capacity(ensemble.realization_count() * ensemble.phase_count());
    for r in ensemble.realizations() {
        all.extend(unfold(r)?);
    }
    Ok(all)
}

/// Normalized nearest-neighbour spacing histogram.
#[derive(Debug, Clone)]
pub struct SpacingHistogram {
    edges: Vec<f64>,
    densities: Vec<f64>,
    sample_count: usize,
}

impl SpacingHistogram {
    /// Bin edges, `n_bins + 1` of them.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// Total spacings fed to the histogram (in range or not).
    pub fn sample_count(&self) -> usize {
        self.sample_count
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    pub fn integral(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, w)| d * (w[1] - w[0]))
            .sum()
    }
}

/// Histogram of raw spacing samples on `[0, s_max]`, normalized by the
/// in-range count so the integral is 1 whenever anything lands in range.
pub fn spacing_histogram(spacings: &[f64], n_bins: usize, s_max: f64) -> Result<SpacingHistogram> {
    if n_bins == 0 || !(s_max > 0.0) {
        return Err(Error::InvalidArgument(
            "histogram needs positive bin count and range".into(),
        ));
    }
    if spacings.is_empty() {
        return Err(Error::InvalidArgument("no spacing samples".into()));
    }
    let width = s_max / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    let mut in_range = 0usize;
    for &s in spacings {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidArgument(format!("invalid spacing {s}")));
        }
        if s < s_max {
            counts[((s / width) as usize).min(n_bins - 1)] += 1;
            in_range += 1;
        }
    }
    if in_range == 0 {
        return Err(Error::InvalidArgument(
            "no spacing samples inside the histogram range".into(),
        ));
    }
    let norm = 1.0 / (in_range as f64 * width);
    Ok(SpacingHistogram {
        edges: (0..=n_bins).map(|i| i as f64 * width).collect(),
        densities: counts.iter().map(|&c| c as f64 * norm).collect(),
        sample_count: spacings.len(),
    })
}

/// Spacing histogram of a whole ensemble.
pub fn spacing_density(
    ensemble: &EigenphaseEnsemble,
    n_bins: usize,
    s_max: f64,
) -> Result<SpacingHistogram> {
    spacing_histogram(&unfolded_spacings(ensemble)?, n_bins, s_max)
}

/// Number variance estimates with per-realization standard errors.
#[derive(Debug, Clone)]
pub struct NumberVarianceCurve {
    l_grid: Vec<f64>,
    variance: Vec<f64>,
    stderr: Vec<f64>,
}

impl NumberVarianceCurve {
    pub fn l_grid(&self) -> &[f64] {
        &self.l_grid
    }

    pub fn variance(&self) -> &[f64] {
        &self.variance
    }

    pub fn stderr(&self) -> &[f64] {
        &self.stderr
    }
}

fn count_in_arc(phases: &[f64], start: f64, len: f64) -> usize {
    let end = start + len;
    let lower = phases.partition_point(|&x| x < start);
    if end <= TAU {
        phases.partition_point(|&x| x < end) - lower
    } else {
        (phases.len() - lower) + phases.partition_point(|&x| x < end - TAU)
    }
}

/// `V(L) = <(n(L) - L)^2>` over `VARIANCE_WINDOWS` equally spaced arc
/// positions per realization; the standard error is taken across the
/// per-realization means.
pub fn number_variance(
    ensemble: &EigenphaseEnsemble,
    l_grid: &[f64],
) -> Result<NumberVarianceCurve> {
    if l_grid.is_empty() {
        return Err(Error::InvalidArgument("empty L grid".into()));
    }
    let max_l = ensemble.phase_count() as f64 / 4.0;
    for &l in l_grid {
        if !(l > 0.0) || l > max_l {
            return Err(Error::InvalidArgument(format!(
                "window length {l} outside (0, {max_l}] (a quarter of the circle)"
            )));
        }
    }
    let windows = VARIANCE_WINDOWS;
    let n_real = ensemble.realization_count();
    let mut variance = Vec::with_capacity(l_grid.len());
    let mut stderr = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let arc = l * TAU / ensemble.phase_count() as f64;
        let mut means = Vec::with_capacity(n_real);
        for phases in ensemble.realizations() {
            let mut acc = 0.0;
            for j in 0..windows {
                let start = j as f64 * TAU / windows as f64;
                let n = count_in_arc(phases, start, arc) as f64;
                acc += (n - l) * (n - l);
            }
            means.push(acc / windows as f64);
        }
        let v: f64 = means.iter().sum::<f64>() / n_real as f64;
        let se = if n_real > 1 {
            let ss: f64 = means.iter().map(|m| (m - v) * (m - v)).sum();
            (ss / (n_real as f64 - 1.0)).sqrt() / (n_real as f64).sqrt()
        } else {
            0.0
        };
        variance.push(v);
        stderr.push(se);
    }
    Ok(NumberVarianceCurve {
        l_grid: l_grid.to_vec(),
        variance,
        stderr,
    })
}

/// Random-matrix symmetry class of the reference curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmtClass {
    Goe,
    Gue,
}

impl RmtClass {
    pub fn label(&self) -> &'static str {
        match self {
            RmtClass::Goe => "goe",
            RmtClass::Gue => "gue",
        }
    }

    /// Wigner surmise for the nearest-neighbour spacing density.
    pub fn spacing_pdf(&self, s: f64) -> f64 {
        if s < 0.0 {
            return 0.0;
        }
        match self {
            RmtClass::Goe => 0.5 * PI * s * (-0.25 * PI * s * s).exp(),
            RmtClass::Gue => 32.0 / (PI * PI) * s * s * (-4.0 * s * s / PI).exp(),
        }
    }

    /// Closed-form CDF of the surmise.
    pub fn spacing_cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        match self {
            RmtClass::Goe => 1.0 - (-0.25 * PI * s * s).exp(),
            RmtClass::Gue => {
                erf(2.0 * s / PI.sqrt()) - (4.0 * s / PI) * (-4.0 * s * s / PI).exp()
            }
        }
    }

    /// Asymptotic number variance of the class.
    pub fn number_variance(&self, l: f64) -> f64 {
        let core = (TAU * l).ln() + EULER_MASCHERONI + 1.0;
        match self {
            RmtClass::Goe => 2.0 / (PI * PI) * (core - PI * PI / 8.0),
            RmtClass::Gue => core / (PI * PI),
        }
    }
}

/// Reference curves sampled on the caller's grids.
#[derive(Debug, Clone)]
pub struct ReferenceCurves {
    pub spacing_density: Vec<f64>,
    pub number_variance: Vec<f64>,
}

pub fn reference_curves(class: RmtClass, s_grid: &[f64], l_grid: &[f64]) -> Result<ReferenceCurves> {
    for &s in s_grid {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::InvalidArgument(format!("spacing grid point {s}")));
        }
    }
    for &l in l_grid {
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "number-variance grid point {l} must be positive"
            )));
        }
    }
    Ok(ReferenceCurves {
        spacing_density: s_grid.iter().map(|&s| class.spacing_pdf(s)).collect(),
        number_variance: l_grid.iter().map(|&l| class.number_variance(l)).collect(),
    })
}

const KS_MIN_SAMPLES: usize = 1000;

/// Kolmogorov-Smirnov distance between empirical spacings and a surmise.
pub fn ks_distance(spacings: &[f64], class: RmtClass) -> Result<f64> {
    if spacings.len() < KS_MIN_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: KS_MIN_SAMPLES,
            got: spacings.len(),
        });
    }
    let mut sorted = spacings.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        let f = class.spacing_cdf(s);
        d = d.max((f - i as f64 / n).abs());
        d = d.max(((i as f64 + 1.0) / n - f).abs());
    }
    Ok(d.min(1.0))
}

/// Two-sample Kolmogorov-Smirnov distance between empirical spacing sets.
pub fn ks_distance_between(a: &[f64], b: &[f64]) -> Result<f64> {
    for set in [a, b] {
        if set.len() < KS_MIN_SAMPLES {
            return Err(Error::InsufficientSamples {
                needed: KS_MIN_SAMPLES,
                got: set.len(),
            });
        }
    }
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(|p, q| p.partial_cmp(q).unwrap());
    xb.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() && j < xb.len() {
        // Consume all samples at the current point from both sides so
        // ties never register a spurious CDF difference.
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d.min(1.0))
}
