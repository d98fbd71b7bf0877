//! Classical spectra of the bond map `M` on `v`-regular graphs.
//!
//! On a `v`-regular graph with a common reflection probability `r`, the
//! `2B` eigenvalues of `M` are determined by the `V` connectivity
//! eigenvalues `mu_j`: each `mu_j` contributes the two roots of
//! `(v-1) u^2 - (1-r) mu_j u + (1-rv) = 0`, and `+/- |1-rv|/(v-1)` fill
//! the rest with multiplicity `(v-2)V/2` each. The closed form and a
//! dense eigensolve of an assembled `M` give the two independent routes
//! to the spectrum and to the gap `Delta = 1 - |second largest|`.

use num_complex::Complex64;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{DirectedBondIndex, GraphTopology};
use crate::numerics::{eigenvalues_dense, sort_descending, ComplexMatrix};

/// Which route produced a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumSource {
    Direct,
    Theorem,
}

impl fmt::Display for SpectrumSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumSource::Direct => write!(f, "direct"),
            SpectrumSource::Theorem => write!(f, "theorem"),
        }
    }
}

/// The full `2B`-point spectrum of `M` with its gap.
#[derive(Debug, Clone)]
pub struct ClassicalSpectrum {
    values: Vec<Complex64>,
    gap: f64,
    source: SpectrumSource,
    r_parameter: f64,
}

impl ClassicalSpectrum {
    fn assemble(mut values: Vec<Complex64>, source: SpectrumSource, r: f64) -> Result<Self> {
        sort_descending(&mut values);
        let near_one = values
            .iter()
            .map(|z| (z - Complex64::new(1.0, 0.0)).norm())
            .fold(f64::INFINITY, f64::min);
        if near_one > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "spectrum misses the dominant eigenvalue 1 (closest is {near_one:.3e} away)"
            )));
        }
        let gap = gap_of(&values);
        Ok(ClassicalSpectrum {
            values,
            gap,
            source,
            r_parameter: r,
        })
    }

    /// Eigenvalues sorted by descending modulus.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `1 - |second largest eigenvalue|`, the dominant one removed once.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn source(&self) -> SpectrumSource {
        self.source
    }

    /// Reflection probability: the input `r` for the closed form, the
    /// mean backtracking entry `M_{b, rev(b)}` for the direct route.
    pub fn r_parameter(&self) -> f64 {
        self.r_parameter
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Modulus of the largest eigenvalue after removing the dominant one.
    pub fn second_modulus(&self) -> f64 {
        1.0 - self.gap
    }
}

/// Gap with the dominant eigenvalue removed by proximity to 1, not by
/// equality: the leading eigenvalue is simple but lands at 1 only up to
/// solver accuracy.
fn gap_of(values: &[Complex64]) -> f64 {
    let dominant = values
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            let da = (*a - Complex64::new(1.0, 0.0)).norm();
            let db = (*b - Complex64::new(1.0, 0.0)).norm();
            da.partial_cmp(&db).unwrap()
        })
        .map(|(i, _)| i)
        .expect("non-empty spectrum");
    let second = values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != dominant)
        .map(|(_, z)| z.norm())
        .fold(0.0, f64::max);
    (1.0 - second).clamp(0.0, 1.0)
}

/// The two roots contributed by one connectivity eigenvalue `mu`, with
/// conjugate pairing enforced by construction when the discriminant is
/// negative (principal-branch square root).
pub fn theorem_root_pair(v: usize, r: f64, mu: f64) -> (Complex64, Complex64) {
    let vm1 = v as f64 - 1.0;
    let lin = (1.0 - r) * mu;
    let disc = lin * lin - 4.0 * (1.0 - r * v as f64) * vm1;
    if disc >= 0.0 {
        let s = disc.sqrt();
        (
            Complex64::new((lin + s) / (2.0 * vm1), 0.0),
            Complex64::new((lin - s) / (2.0 * vm1), 0.0),
        )
    } else {
        let re = lin / (2.0 * vm1);
        let im = (-disc).sqrt() / (2.0 * vm1);
        (Complex64::new(re, im), Complex64::new(re, -im))
    }
}

/// Root pairs `(u_j, u~_j, mu_j)` for every connectivity eigenvalue.
pub fn theorem_root_pairs(
    graph: &GraphTopology,
    r: f64,
) -> Result<Vec<(Complex64, Complex64, f64)>> {
    let v = regular_valency_at_least(graph, 3)?;
    check_r(r)?;
    Ok(graph
        .connectivity_spectrum()?
        .into_iter()
        .map(|mu| {
            let (u, ut) = theorem_root_pair(v, r, mu);
            (u, ut, mu)
        })
        .collect())
}

fn check_r(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!(
            "reflection probability {r} outside [0, 1]"
        )));
    }
    Ok(())
}

fn regular_valency_at_least(graph: &GraphTopology, min: usize) -> Result<usize> {
    let v = graph.regular_valency().ok_or_else(|| {
        Error::GraphConstraint("the closed-form spectrum needs a regular graph".into())
    })?;
    if v < min {
        return Err(Error::GraphConstraint(format!(
            "valency {v} below the supported minimum {min}"
        )));
    }
    Ok(v)
}

/// Closed-form spectrum of `M` for a common reflection probability `r`.
///
/// Valency 3 is accepted but sits outside the gap-comparison regime;
/// interfaces that compare gaps should warn or reject it separately.
pub fn spectrum_via_theorem(graph: &GraphTopology, r: f64) -> Result<ClassicalSpectrum> {
    let v = regular_valency_at_least(graph, 3)?;
    check_r(r)?;
    let nv = graph.vertex_count();
    let mut values = Vec::with_capacity(2 * graph.bond_count());
    for mu in graph.connectivity_spectrum()? {
        let (u, ut) = theorem_root_pair(v, r, mu);
        values.push(u);
        values.push(ut);
    }
    let fixed = (1.0 - r * v as f64).abs() / (v as f64 - 1.0);
    let mult = (v - 2) * nv / 2;
    for _ in 0..mult {
        values.push(Complex64::new(fixed, 0.0));
        values.push(Complex64::new(-fixed, 0.0));
    }
    ClassicalSpectrum::assemble(values, SpectrumSource::Theorem, r)
}

/// Spectrum of an assembled `M` via the dense eigensolver.
///
/// Validates double stochasticity to about 1e-9, then records the mean
/// backtracking probability as the `r` parameter.
pub fn spectrum_direct(m: &ComplexMatrix) -> Result<ClassicalSpectrum> {
    if !m.is_square() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "bond maps have even positive dimension, got {n}"
        )));
    }
    let tol = 1e-9;
    for i in 0..n {
        let mut row = 0.0;
        let mut col = 0.0;
        for j in 0..n {
            let zr = m.get(i, j);
            let zc = m.get(j, i);
            if zr.im.abs() > tol || zr.re < -tol {
                return Err(Error::InvalidArgument(format!(
                    "entry ({i},{j}) = {zr} is not a probability"
                )));
            }
            row += zr.re;
            col += zc.re;
        }
        if (row - 1.0).abs() > tol || (col - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!(
                "row/column {i} sums ({row}, {col}) break double stochasticity"
            )));
        }
    }
    let r_mean = (0..n).map(|b| m.get(b, b ^ 1).re).sum::<f64>() / n as f64;
    let spectrum = eigenvalues_dense(m, 1e-6)?;
    ClassicalSpectrum::assemble(spectrum.values().to_vec(), SpectrumSource::Direct, r_mean)
}

/// Nature of the `(u_j, u~_j)` pair for one connectivity eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RealityClass {
    /// Discriminant nonnegative: both roots real.
    TwoReal,
    /// Discriminant negative: conjugate pair on the circle of this radius.
    ConjugatePairOnCircle { modulus: f64 },
    /// `r >= 1/v`: every eigenvalue of `M` is real regardless of `mu`.
    AllRealRegime,
}

/// Classifies the root pair of `mu` in the `r < 1/v` regime.
pub fn reality_classification(v: usize, r: f64, mu: f64) -> Result<RealityClass> {
    if v < 3 {
        return Err(Error::InvalidArgument(format!("valency {v} below 3")));
    }
    check_r(r)?;
    if mu.abs() > v as f64 + 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "|mu| = {} exceeds the valency bound {v}",
            mu.abs()
        )));
    }
    if r >= 1.0 / v as f64 {
        return Ok(RealityClass::AllRealRegime);
    }
    let lin = (1.0 - r) * mu;
    let disc = lin * lin - 4.0 * (1.0 - r * v as f64) * (v as f64 - 1.0);
    if disc >= 0.0 {
        Ok(RealityClass::TwoReal)
    } else {
        Ok(RealityClass::ConjugatePairOnCircle {
            modulus: ((1.0 - r * v as f64) / (v as f64 - 1.0)).sqrt(),
        })
    }
}

/// One row of the family gap comparison.
#[derive(Debug, Clone)]
pub struct GapRow {
    pub family: &'static str,
    pub r: f64,
    pub gap: f64,
    /// Margin from the proof: how far below `2 sqrt(v-1)` the family's
    /// non-fixed eigenvalues are pushed.
    pub epsilon: f64,
    /// `C` has an eigenvalue in `(2 sqrt(v-1) - eps, v)`.
    pub upper_condition: bool,
    /// `C` has an eigenvalue in `[-v, -2 sqrt(v-1) + eps)`.
    pub lower_condition: bool,
}

impl GapRow {
    pub fn condition_flags(&self) -> &'static str {
        match (self.upper_condition, self.lower_condition) {
            (true, true) => "upper+lower",
            (true, false) => "upper",
            (false, true) => "lower",
            (false, false) => "none",
        }
    }
}

/// Margin `eps` for one reflection probability, from the proof's two
/// displayed bounds: `(2-rv)/(1-r) sqrt(v-1) < 2 sqrt(v-1) - eps` below
/// `r = 1/v` and `v/sqrt(v-1) < 2 sqrt(v-1) - eps` above it.
pub fn gap_condition_epsilon(v: usize, r: f64) -> f64 {
    let vf = v as f64;
    if r < 1.0 / vf {
        r * (vf - 2.0) * (vf - 1.0).sqrt() / (1.0 - r)
    } else {
        (vf - 2.0) / (vf - 1.0).sqrt()
    }
}

/// Gap comparison across the ET, Fourier, and Neumann families, with the
/// eigenvalue-condition flags that drive the ET-dominance statement.
/// Requires valency above 3, the regime of that statement.
pub fn gap_comparison(graph: &GraphTopology) -> Result<Vec<GapRow>> {
    let v = regular_valency_at_least(graph, 4)?;
    let vf = v as f64;
    let mus = graph.connectivity_spectrum()?;
    let families: [(&'static str, f64); 3] = [
        ("et", 0.0),
        ("fourier", 1.0 / vf),
        ("neumann", (2.0 / vf - 1.0) * (2.0 / vf - 1.0)),
    ];
    let mut rows = Vec::with_capacity(3);
    for (family, r) in families {
        let gap = spectrum_via_theorem(graph, r)?.gap();
        let eps = gap_condition_epsilon(v, r);
        let threshold = 2.0 * (vf - 1.0).sqrt();
        let upper = mus.iter().any(|&mu| mu > threshold - eps && mu < vf);
        let lower = mus.iter().any(|&mu| mu >= -vf && mu < -threshold + eps);
        rows.push(GapRow {
            family,
            r,
            gap,
            epsilon: eps,
            upper_condition: upper,
            lower_condition: lower,
        });
    }
    Ok(rows)
}

/// `f_mu(r)`, the modulus-relevant branch of the root pair as `r` varies.
fn lemma_f(v: usize, mu: f64, r: f64) -> f64 {
    let vf = v as f64;
    let lin = (1.0 - r) * mu;
    let disc = lin * lin + 4.0 * (vf * r - 1.0) * (vf - 1.0);
    // The domain restriction keeps disc >= 0; tiny negatives at the edge
    // are roundoff.
    if disc < -1e-12 {
        return f64::NAN;
    }
    (lin + disc.max(0.0).sqrt()) / (2.0 * (vf - 1.0))
}

/// Lower endpoint of the domain on which `f_mu` is real and increasing.
pub fn lemma_domain_start(v: usize, mu: f64) -> f64 {
    let vf = v as f64;
    if mu == 0.0 {
        1.0 / vf
    } else {
        1.0 - 2.0 * (vf - 1.0) * (vf - (vf * vf - mu * mu).sqrt()) / (mu * mu)
    }
}

/// True iff `f_mu(r)` is real and strictly increasing across the grid.
/// The grid must be strictly ascending and inside `[domain_start, 1]`.
pub fn lemma_monotonicity_check(v: usize, mu: f64, r_grid: &[f64]) -> Result<bool> {
    if v < 3 {
        return Err(Error::InvalidArgument(format!("valency {v} below 3")));
    }
    if !(0.0..v as f64).contains(&mu) {
        return Err(Error::InvalidArgument(format!(
            "mu = {mu} outside [0, v)"
        )));
    }
    if r_grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "monotonicity needs at least two grid points".into(),
        ));
    }
    let lo = lemma_domain_start(v, mu);
    for pair in r_grid.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::InvalidArgument(
                "the r grid must be strictly ascending".into(),
            ));
        }
    }
    for &r in r_grid {
        if r < lo - 1e-12 || r > 1.0 + 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "r = {r} outside the domain [{lo}, 1]"
            )));
        }
    }
    let mut prev = f64::NEG_INFINITY;
    for &r in r_grid {
        let f = lemma_f(v, mu, r);
        if !f.is_finite() || f <= prev {
            return Ok(false);
        }
        prev = f;
    }
    Ok(true)
}

/// Traces of `W^1 .. W^n_max` from one incremental power chain, in
/// exact integer arithmetic.
pub fn nb_walk_counts(graph: &GraphTopology, n_max: usize) -> Result<Vec<i128>> {
    if n_max < 1 {
        return Err(Error::InvalidArgument("walk length must be positive".into()));
    }
    let idx = DirectedBondIndex::new(graph);
    let two_b = idx.bond_count();
    let mut w = vec![vec![0i128; two_b]; two_b];
    for b in 0..two_b {
        for &b2 in idx.outgoing(idx.head(b)) {
            if b2 != idx.rev(b) {
                w[b][b2] = 1;
            }
        }
    }
    let trace_of = |m: &[Vec<i128>], n: usize| -> Result<i128> {
        let mut t = 0i128;
        for (i, row) in m.iter().enumerate() {
            t = t
                .checked_add(row[i])
                .ok_or_else(|| Error::Overflow(format!("trace(W^{n}) exceeds 128-bit integers")))?;
        }
        Ok(t)
    };
    let mut traces = Vec::with_capacity(n_max);
    let mut power = w.clone();
    traces.push(trace_of(&power, 1)?);
    for n in 2..=n_max {
        let overflow = || Error::Overflow(format!("trace(W^{n}) exceeds 128-bit integers"));
        let mut next = vec![vec![0i128; two_b]; two_b];
        for i in 0..two_b {
            for k in 0..two_b {
                let a = power[i][k];
                if a == 0 {
                    continue;
                }
                for j in 0..two_b {
                    let term = a.checked_mul(w[k][j]).ok_or_else(overflow)?;
                    next[i][j] = next[i][j].checked_add(term).ok_or_else(overflow)?;
                }
            }
        }
        power = next;
        traces.push(trace_of(&power, n)?);
    }
    Ok(traces)
}

/// `trace(W^n)`: the number of closed non-backtracking walks of length
/// `n` with a marked starting directed bond.
pub fn count_nb_closed_walks(graph: &GraphTopology, n: usize) -> Result<i128> {
    Ok(*nb_walk_counts(graph, n)?.last().expect("n >= 1"))
}

/// Second connectivity eigenvalue against the Ramanujan reference
/// `2 sqrt(v-1)`; reported, not asserted, since the bound is asymptotic.
pub fn alon_boppana_report(graph: &GraphTopology) -> Result<(f64, f64)> {
    let v = regular_valency_at_least(graph, 3)?;
    let mus = graph.connectivity_spectrum()?;
    Ok((mus[1], 2.0 * ((v as f64) - 1.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bridged_cliques, complete_graph, random_regular};
    use crate::numerics::multiset_match_distance;
    use crate::quantize::{assignment_from_family, build_m};
    use crate::scatmat::ScatteringFamily;

    const INV_SQRT_11: f64 = 0.30151134457776363;

    fn count_near_modulus(spec: &ClassicalSpectrum, target: f64, tol: f64) -> usize {
        spec.values()
            .iter()
            .filter(|z| (z.norm() - target).abs() < tol)
            .count()
    }

    #[test]
    fn k13_et_spectrum_frozen_values() {
        let g = complete_graph(13).unwrap();
        let spec = spectrum_via_theorem(&g, 0.0).unwrap();
        assert_eq!(spec.len(), 156);
        assert!((spec.gap() - (1.0 - INV_SQRT_11)).abs() < 1e-9);
        assert!((spec.second_modulus() - INV_SQRT_11).abs() < 1e-9);
        assert_eq!(count_near_modulus(&spec, INV_SQRT_11, 1e-9), 24);
        assert_eq!(count_near_modulus(&spec, 1.0 / 11.0, 1e-9), 131);
        assert_eq!(count_near_modulus(&spec, 1.0, 1e-9), 1);
    }

    #[test]
    fn k13_fourier_spectrum_frozen_values() {
        let g = complete_graph(13).unwrap();
        let spec = spectrum_via_theorem(&g, 1.0 / 12.0).unwrap();
        assert!((spec.gap() - 11.0 / 12.0).abs() < 1e-12);
        let zeros = spec.values().iter().filter(|z| z.norm() < 1e-12).count();
        assert_eq!(zeros, 143);
        let minus = spec
            .values()
            .iter()
            .filter(|z| (*z - Complex64::new(-1.0 / 12.0, 0.0)).norm() < 1e-12)
            .count();
        assert_eq!(minus, 12);
    }

    #[test]
    fn k13_neumann_spectrum_frozen_values() {
        let g = complete_graph(13).unwrap();
        let spec = spectrum_via_theorem(&g, 25.0 / 36.0).unwrap();
        assert!((spec.gap() - 0.1694964).abs() < 1e-7);
        let near = |x: f64| {
            spec.values()
                .iter()
                .filter(|z| (*z - Complex64::new(x, 0.0)).norm() < 1e-7)
                .count()
        };
        assert_eq!(near(-2.0 / 3.0), 66);
        assert_eq!(near(2.0 / 3.0), 65);
        assert_eq!(near(0.8027258), 12);
        assert_eq!(near(-0.8305036), 12);
    }

    #[test]
    fn theorem_route_matches_direct_route_on_k13() {
        let g = complete_graph(13).unwrap();
        for (family, r) in [
            (ScatteringFamily::EtHadamard, 0.0),
            (ScatteringFamily::Fourier, 1.0 / 12.0),
            (ScatteringFamily::Neumann, 25.0 / 36.0),
        ] {
            let assign = assignment_from_family(&g, family, None).unwrap();
            let m = build_m(&g, &assign).unwrap();
            let direct = spectrum_direct(&m).unwrap();
            let theorem = spectrum_via_theorem(&g, r).unwrap();
            assert!((direct.r_parameter() - r).abs() < 1e-12);
            let d = multiset_match_distance(direct.values(), theorem.values()).unwrap();
            assert!(d < 1e-8, "{family}: mismatch {d}");
            assert!((direct.gap() - theorem.gap()).abs() < 1e-8);
        }
    }

    #[test]
    fn k5_fourier_direct_matches_connectivity_over_v() {
        let g = complete_graph(5).unwrap();
        let assign = assignment_from_family(&g, ScatteringFamily::Fourier, None).unwrap();
        let m = build_m(&g, &assign).unwrap();
        let spec = spectrum_direct(&m).unwrap();
        let mut expected = vec![Complex64::new(0.0, 0.0); 15];
        expected.push(Complex64::new(1.0, 0.0));
        expected.extend(std::iter::repeat(Complex64::new(-0.25, 0.0)).take(4));
        assert!(multiset_match_distance(spec.values(), &expected).unwrap() < 1e-9);
    }

    #[test]
    fn direct_route_validates_stochasticity() {
        let bad = ComplexMatrix::identity(4).scale(Complex64::new(0.5, 0.0));
        assert!(matches!(
            spectrum_direct(&bad),
            Err(Error::InvalidArgument(_))
        ));
        let odd = ComplexMatrix::identity(3);
        assert!(spectrum_direct(&odd).is_err());
        assert_eq!(spectrum_direct(&ComplexMatrix::identity(2)).unwrap().gap(), 0.0);
    }

    #[test]
    fn vieta_identities_hold_for_returned_pairs() {
        let g = random_regular(5, 12, 4).unwrap();
        for r in [0.0, 0.2, (2.0 / 5.0 - 1.0) * (2.0 / 5.0 - 1.0), 0.9] {
            for (u, ut, mu) in theorem_root_pairs(&g, r).unwrap() {
                let v = 5.0;
                let product = u * ut;
                let sum = u + ut;
                assert!((product - (1.0 - r * v) / (v - 1.0)).norm() < 1e-10);
                assert!((sum - (1.0 - r) * mu / (v - 1.0)).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn gap_invariant_under_relabeling() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let g = random_regular(4, 10, 5).unwrap();
        let reference = spectrum_via_theorem(&g, 0.1).unwrap().gap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for _ in 0..5 {
            let mut perm: Vec<usize> = (0..10).collect();
            perm.shuffle(&mut rng);
            let edges = g
                .edges()
                .iter()
                .map(|&(p, q)| (perm[p], perm[q]))
                .collect();
            let h = GraphTopology::new(10, edges).unwrap();
            let gap = spectrum_via_theorem(&h, 0.1).unwrap().gap();
            assert!((gap - reference).abs() < 1e-10);
        }
    }

    #[test]
    fn reality_classification_examples() {
        match reality_classification(12, 0.0, -1.0).unwrap() {
            RealityClass::ConjugatePairOnCircle { modulus } => {
                assert!((modulus - INV_SQRT_11).abs() < 1e-12)
            }
            other => panic!("expected a conjugate pair, got {other:?}"),
        }
        assert_eq!(
            reality_classification(12, 0.0, 12.0).unwrap(),
            RealityClass::TwoReal
        );
        assert_eq!(
            reality_classification(12, 1.0 / 12.0, -1.0).unwrap(),
            RealityClass::AllRealRegime
        );
        assert!(reality_classification(12, 0.0, 13.0).is_err());
    }

    #[test]
    fn gap_comparison_on_k13_shows_the_complete_graph_caveat() {
        let g = complete_graph(13).unwrap();
        let rows = gap_comparison(&g).unwrap();
        let gap = |name: &str| rows.iter().find(|r| r.family == name).unwrap().gap;
        assert!((gap("fourier") - 11.0 / 12.0).abs() < 1e-12);
        assert!((gap("et") - (1.0 - INV_SQRT_11)).abs() < 1e-9);
        assert!((gap("neumann") - 0.1694964).abs() < 1e-7);
        assert!(gap("fourier") > gap("et") && gap("et") > gap("neumann"));
        // K13: mu_1 = -1, far from both windows for every family.
        for row in &rows {
            assert!(!row.upper_condition && !row.lower_condition, "{}", row.family);
            assert_eq!(row.condition_flags(), "none");
        }
    }

    #[test]
    fn gap_comparison_favors_et_on_a_non_ramanujan_graph() {
        let g = bridged_cliques(6).unwrap();
        let rows = gap_comparison(&g).unwrap();
        let row = |name: &str| rows.iter().find(|r| r.family == name).unwrap();
        assert!(row("et").gap > row("neumann").gap);
        assert!(row("et").gap > row("fourier").gap);
        // mu_1 ~ 4.8 sits inside every family's upper window.
        for r in &rows {
            assert!(r.upper_condition, "{}", r.family);
            assert!(r.condition_flags().contains("upper"));
        }
    }

    #[test]
    fn ramanujan_et_spectrum_stays_in_the_disc() {
        let g = complete_graph(6).unwrap();
        assert!(g.is_ramanujan().unwrap());
        let spec = spectrum_via_theorem(&g, 0.0).unwrap();
        let radius = 1.0 / (4.0f64).sqrt();
        let inside = spec
            .values()
            .iter()
            .filter(|z| (*z - Complex64::new(1.0, 0.0)).norm() > 1e-9)
            .all(|z| z.norm() <= radius + 1e-9);
        assert!(inside);
    }

    #[test]
    fn gap_comparison_rejects_low_valency() {
        let g = complete_graph(5).unwrap();
        assert!(gap_comparison(&g).is_ok());
        let cubic = complete_graph(4).unwrap();
        assert_eq!(cubic.regular_valency(), Some(3));
        assert!(matches!(
            gap_comparison(&cubic),
            Err(Error::GraphConstraint(_))
        ));
    }

    #[test]
    fn lemma_monotonicity_examples() {
        let grid: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
        assert!(lemma_monotonicity_check(5, 4.0, &grid).unwrap());

        assert!((lemma_f(5, 4.0, 1.0) - 1.0).abs() < 1e-12);
        assert!((lemma_f(12, 3.0, 1.0) - 1.0).abs() < 1e-12);

        let lo = lemma_domain_start(12, 0.0);
        assert!((lo - 1.0 / 12.0).abs() < 1e-15);
        let grid: Vec<f64> = (0..50).map(|i| lo + (1.0 - lo) * i as f64 / 49.0).collect();
        assert!(lemma_monotonicity_check(12, 0.0, &grid).unwrap());
        for &r in &grid {
            let closed = ((12.0 * r - 1.0) / 11.0).sqrt();
            assert!((lemma_f(12, 0.0, r) - closed).abs() < 1e-12);
        }

        assert!(lemma_monotonicity_check(5, 4.0, &[-0.1, 0.5]).is_err());
        assert!(lemma_monotonicity_check(5, 4.0, &[0.5, 0.5]).is_err());
        assert!(lemma_monotonicity_check(5, 6.0, &grid).is_err());
    }

    #[test]
    fn orbit_counts_on_k5() {
        let g = complete_graph(5).unwrap();
        assert_eq!(count_nb_closed_walks(&g, 2).unwrap(), 0);
        assert_eq!(count_nb_closed_walks(&g, 3).unwrap(), 60);
        let t12 = count_nb_closed_walks(&g, 12).unwrap() as f64;
        let growth = t12.powf(1.0 / 12.0);
        assert!((growth - 3.0).abs() / 3.0 < 0.05);
        assert!(matches!(
            count_nb_closed_walks(&g, 500),
            Err(Error::Overflow(_))
        ));
        assert!(count_nb_closed_walks(&g, 0).is_err());
    }

    #[test]
    fn length_two_walks_vanish_on_any_simple_graph() {
        let g = random_regular(4, 8, 11).unwrap();
        assert_eq!(count_nb_closed_walks(&g, 2).unwrap(), 0);
        assert_eq!(count_nb_closed_walks(&g, 1).unwrap(), 0);
    }

    #[test]
    fn alon_boppana_numbers_are_reported() {
        let g = random_regular(5, 20, 8).unwrap();
        let (mu1, bound) = alon_boppana_report(&g).unwrap();
        assert!(mu1.is_finite() && (bound - 4.0).abs() < 1e-12);
        assert!(mu1 < 5.0);
    }
}
