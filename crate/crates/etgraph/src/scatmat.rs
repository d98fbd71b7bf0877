//! Vertex scattering matrices.
//!
//! A `v x v` unitary is equi-transmitting (ET) when its diagonal vanishes
//! and every off-diagonal entry has modulus `(v - 1)^{-1/2}`: an incoming
//! wave is never back-scattered and is transmitted with equal probability
//! to the other `v - 1` bonds. The one-parameter pattern generalizing this
//! puts reflection probability `r` on the diagonal and `(1 - r)/(v - 1)`
//! off it; Neumann (`r = (2/v - 1)^2`) and Fourier (`r = 1/v`) matrices are
//! the classical members of that family.
//!
//! ET constructions implemented here:
//!
//! * skew-Hadamard: `sigma = (H - I)/sqrt(v - 1)`, exactly antisymmetric;
//! * Dirichlet character mod an odd prime `P`: dimension `P + 1`,
//!   symmetric for the Legendre character with `P = 1 mod 4`;
//! * the explicit symmetric `5 x 5` example built from cube roots of unity;
//! * a seeded alternating-projection search for other dimensions.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;
use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{unitary_polar_factor, ComplexMatrix};

/// Unitarity / pattern / symmetry tolerance baked into the type invariants.
const TYPE_TOL: f64 = 1e-12;

/// Construction family of a scattering matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScatteringFamily {
    Neumann,
    Fourier,
    EtHadamard,
    EtCharacter,
    EtFiveExample,
    EtSearched,
}

impl ScatteringFamily {
    pub fn is_et(&self) -> bool {
        matches!(
            self,
            ScatteringFamily::EtHadamard
                | ScatteringFamily::EtCharacter
                | ScatteringFamily::EtFiveExample
                | ScatteringFamily::EtSearched
        )
    }
}

impl fmt::Display for ScatteringFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            ScatteringFamily::Neumann => "neumann",
            ScatteringFamily::Fourier => "fourier",
            ScatteringFamily::EtHadamard => "et-hadamard",
            ScatteringFamily::EtCharacter => "et-character",
            ScatteringFamily::EtFiveExample => "et-five",
            ScatteringFamily::EtSearched => "et-search",
        };
        f.write_str(label)
    }
}

/// Symmetry classification of a square matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixSymmetry {
    Symmetric,
    Antisymmetric,
    Neither,
}

impl fmt::Display for MatrixSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            MatrixSymmetry::Symmetric => "symmetric",
            MatrixSymmetry::Antisymmetric => "antisymmetric",
            MatrixSymmetry::Neither => "none",
        };
        f.write_str(label)
    }
}

/// Classifies symmetry with the type tolerance.
pub fn classify_symmetry(m: &ComplexMatrix) -> MatrixSymmetry {
    let t = m.transpose();
    if m.sub(&t).map(|d| d.frobenius_norm() <= TYPE_TOL).unwrap_or(false) {
        MatrixSymmetry::Symmetric
    } else if m.add(&t).map(|s| s.frobenius_norm() <= TYPE_TOL).unwrap_or(false) {
        MatrixSymmetry::Antisymmetric
    } else {
        MatrixSymmetry::Neither
    }
}

/// Validated vertex scattering matrix.
///
/// Invariants checked on construction: unitarity within `1e-12`; squared
/// moduli match the reflection pattern (`r` on the diagonal,
/// `(1 - r)/(v - 1)` off it) within `1e-12`; ET families have `r = 0`.
#[derive(Debug, Clone)]
pub struct ScatteringMatrix {
    sigma: ComplexMatrix,
    family: ScatteringFamily,
    symmetry: MatrixSymmetry,
    r_parameter: f64,
}

impl ScatteringMatrix {
    pub fn new(sigma: ComplexMatrix, family: ScatteringFamily, r_parameter: f64) -> Result<Self> {
        if !sigma.is_square() {
            return Err(Error::NonSquare {
                rows: sigma.rows(),
                cols: sigma.cols(),
            });
        }
        let v = sigma.rows();
        if v < 2 {
            return Err(Error::InvalidArgument(format!(
                "scattering matrices need dimension >= 2, got {v}"
            )));
        }
        if !(0.0..=1.0).contains(&r_parameter) {
            return Err(Error::InvalidArgument(format!(
                "reflection probability r = {r_parameter} outside [0, 1]"
            )));
        }
        if family.is_et() && r_parameter != 0.0 {
            return Err(Error::InvalidArgument(format!(
                "ET family {family} requires r = 0, got {r_parameter}"
            )));
        }
        let defect = sigma.unitary_defect()?;
        if defect > TYPE_TOL {
            return Err(Error::NotUnitary {
                defect,
                tolerance: TYPE_TOL,
            });
        }
        let transmit = (1.0 - r_parameter) / (v as f64 - 1.0);
        for i in 0..v {
            for j in 0..v {
                let p = sigma.get(i, j).norm_sqr();
                let target = if i == j { r_parameter } else { transmit };
                if (p - target).abs() > TYPE_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "entry ({i}, {j}) has |sigma|^2 = {p}, pattern expects {target}"
                    )));
                }
            }
        }
        let symmetry = classify_symmetry(&sigma);
        Ok(ScatteringMatrix {
            sigma,
            family,
            symmetry,
            r_parameter,
        })
    }

    pub fn sigma(&self) -> &ComplexMatrix {
        &self.sigma
    }

    pub fn family(&self) -> ScatteringFamily {
        self.family
    }

    pub fn symmetry(&self) -> MatrixSymmetry {
        self.symmetry
    }

    /// Reflection probability `r` of the pattern.
    pub fn r_parameter(&self) -> f64 {
        self.r_parameter
    }

    pub fn dim(&self) -> usize {
        self.sigma.rows()
    }
}

/// Neumann (Kirchhoff) scattering matrix: `sigma_pq = 2/v - delta_pq`.
pub fn build_neumann(v: usize) -> Result<ScatteringMatrix> {
    if v < 2 {
        return Err(Error::InvalidArgument(format!(
            "Neumann matrix needs v >= 2, got {v}"
        )));
    }
    let t = 2.0 / v as f64;
    let sigma = ComplexMatrix::from_fn(v, v, |p, q| {
        Complex64::new(if p == q { t - 1.0 } else { t }, 0.0)
    })?;
    let r = (t - 1.0) * (t - 1.0);
    ScatteringMatrix::new(sigma, ScatteringFamily::Neumann, r)
}

/// Fourier (DFT) scattering matrix: `sigma_pq = v^{-1/2} e^{2 pi i p q / v}`
/// with 1-based indices `p, q`.
pub fn build_fourier(v: usize) -> Result<ScatteringMatrix> {
    if v < 2 {
        return Err(Error::InvalidArgument(format!(
            "Fourier matrix needs v >= 2, got {v}"
        )));
    }
    let scale = 1.0 / (v as f64).sqrt();
    let sigma = ComplexMatrix::from_fn(v, v, |p, q| {
        // Reduce the exponent mod v before evaluating to keep angles small.
        let k = ((p + 1) * (q + 1)) % v;
        Complex64::from_polar(scale, TAU * k as f64 / v as f64)
    })?;
    ScatteringMatrix::new(sigma, ScatteringFamily::Fourier, 1.0 / v as f64)
}

/// Skew-Hadamard matrix held in exact integer form: `H H^T = n I` and
/// `H + H^T = 2 I`, both verified in integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewHadamard {
    order: usize,
    entries: Vec<i64>,
}

impl SkewHadamard {
    fn checked(order: usize, entries: Vec<i64>) -> Result<Self> {
        let h = SkewHadamard { order, entries };
        h.verify()?;
        Ok(h)
    }

    fn verify(&self) -> Result<()> {
        let n = self.order;
        for i in 0..n {
            for j in 0..n {
                let e = self.entry(i, j);
                if e != 1 && e != -1 {
                    return Err(Error::Backend(format!(
                        "skew-Hadamard entry ({i}, {j}) = {e} is not +/-1"
                    )));
                }
                if self.entry(i, j) + self.entry(j, i) != if i == j { 2 } else { 0 } {
                    return Err(Error::Backend(format!(
                        "skew condition H + H^T = 2I fails at ({i}, {j})"
                    )));
                }
                let dot: i64 = (0..n).map(|k| self.entry(i, k) * self.entry(j, k)).sum();
                if dot != if i == j { n as i64 } else { 0 } {
                    return Err(Error::Backend(format!(
                        "orthogonality H H^T = {n} I fails at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entry(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.order + j]
    }

    /// Floating-point copy of the matrix.
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.order, self.order, |i, j| {
            Complex64::new(self.entry(i, j) as f64, 0.0)
        })
        .expect("integer entries are finite")
    }
}

fn is_prime(n: usize) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, modulus: u64) -> u64 {
    let mut acc = 1u64;
    base %= modulus;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % modulus;
        }
        base = base * base % modulus;
        exp >>= 1;
    }
    acc
}

/// Legendre symbol (a/q) for prime q, as +1 / -1 / 0.
fn legendre(a: i64, q: u64) -> i64 {
    let r = a.rem_euclid(q as i64) as u64;
    if r == 0 {
        return 0;
    }
    if pow_mod(r, (q - 1) / 2, q) == 1 {
        1
    } else {
        -1
    }
}

/// Paley construction of a skew-Hadamard matrix of the given order.
///
/// Admissible orders are `2` and `q + 1` for a prime `q = 3 mod 4`: the
/// matrix is the bordered Jacobsthal matrix `[[1, 1], [-1, Q + I]]` with
/// `Q_ij = (j - i / q)` the quadratic-residue character.
pub fn build_paley_skew_hadamard(order: usize) -> Result<SkewHadamard> {
    if order == 2 {
        return SkewHadamard::checked(2, vec![1, 1, -1, 1]);
    }
    if order < 4 {
        return Err(Error::InvalidArgument(format!(
            "no skew-Hadamard matrix of order {order}"
        )));
    }
    let q = order - 1;
    if !is_prime(q) || q % 4 != 3 {
        return Err(Error::InvalidArgument(format!(
            "Paley construction needs order q + 1 with q prime, q = 3 mod 4; \
             order {order} does not qualify (try doubling a smaller order)"
        )));
    }
    let mut entries = vec![0i64; order * order];
    entries[0] = 1;
    for j in 1..order {
        entries[j] = 1;
        entries[j * order] = -1;
    }
    for i in 0..q {
        for j in 0..q {
            let val = if i == j {
                1
            } else {
                legendre(j as i64 - i as i64, q as u64)
            };
            entries[(i + 1) * order + (j + 1)] = val;
        }
    }
    SkewHadamard::checked(order, entries)
}

/// Doubling step `H -> [[H, H], [-H^T, H^T]]`, verified exactly.
pub fn double_skew_hadamard(h: &SkewHadamard) -> Result<SkewHadamard> {
    let n = h.order();
    let m = 2 * n;
    let mut entries = vec![0i64; m * m];
    for i in 0..n {
        for j in 0..n {
            entries[i * m + j] = h.entry(i, j);
            entries[i * m + (j + n)] = h.entry(i, j);
            entries[(i + n) * m + j] = -h.entry(j, i);
            entries[(i + n) * m + (j + n)] = h.entry(j, i);
        }
    }
    SkewHadamard::checked(m, entries)
}

/// Builds a skew-Hadamard matrix of the given order by Paley's
/// construction, falling back to doubling a constructible half order.
pub fn build_skew_hadamard(order: usize) -> Result<SkewHadamard> {
    if order == 2 || (order >= 4 && is_prime(order - 1) && (order - 1) % 4 == 3) {
        return build_paley_skew_hadamard(order);
    }
    if order >= 4 && order % 2 == 0 {
        if let Ok(half) = build_skew_hadamard(order / 2) {
            return double_skew_hadamard(&half);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no skew-Hadamard construction available for order {order}"
    )))
}

/// Orders `<= max` reachable by the Paley and doubling constructions.
pub fn constructible_skew_hadamard_orders(max: usize) -> Vec<usize> {
    (2..=max)
        .filter(|&n| build_skew_hadamard(n).is_ok())
        .collect()
}

/// ET matrix from a skew-Hadamard matrix: `sigma = (H - I)/sqrt(v - 1)`.
///
/// The diagonal is exactly zero and `sigma` is exactly antisymmetric,
/// since both properties descend from the integer identities of `H`.
pub fn et_from_hadamard(h: &SkewHadamard) -> Result<ScatteringMatrix> {
    let v = h.order();
    let scale = 1.0 / (v as f64 - 1.0).sqrt();
    let sigma = ComplexMatrix::from_fn(v, v, |i, j| {
        let e = h.entry(i, j) - if i == j { 1 } else { 0 };
        Complex64::new(e as f64 * scale, 0.0)
    })?;
    ScatteringMatrix::new(sigma, ScatteringFamily::EtHadamard, 0.0)
}

/// Root of unity `e^{2 pi i k / n}`, exact at the quarter points.
fn unit_root(k: u64, n: u64) -> Complex64 {
    let k = k % n;
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if 2 * k == n {
        return Complex64::new(-1.0, 0.0);
    }
    if 4 * k == n {
        return Complex64::new(0.0, 1.0);
    }
    if 4 * k == 3 * n {
        return Complex64::new(0.0, -1.0);
    }
    Complex64::from_polar(1.0, TAU * k as f64 / n as f64)
}

/// Smallest primitive root modulo the odd prime `p`.
fn primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let mut prime_factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            prime_factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        prime_factors.push(m);
    }
    (2..p)
        .find(|&g| prime_factors.iter().all(|&f| pow_mod(g, phi / f, p) != 1))
        .expect("every prime has a primitive root")
}

/// ET matrix of dimension `P + 1` from a non-trivial Dirichlet character
/// mod the odd prime `P`.
///
/// The character is `chi(g^k) = e^{2 pi i m k / (P - 1)}` for the smallest
/// primitive root `g`, with `chi(0) = 0`; `m = (P - 1)/2` is the Legendre
/// symbol. The matrix is `P^{-1/2} [[0, 1...], [1..., chi(l - j)]]`; it is
/// symmetric exactly when `chi(-1) = 1`, which for the Legendre character
/// means `P = 1 mod 4`.
pub fn et_from_character(p: u64, m: u64) -> Result<ScatteringMatrix> {
    if p < 3 || !is_prime(p as usize) || p % 2 == 0 {
        return Err(Error::InvalidArgument(format!("{p} is not an odd prime")));
    }
    if m == 0 || m > p - 2 {
        return Err(Error::InvalidArgument(format!(
            "character index m = {m} outside [1, {}]",
            p - 2
        )));
    }
    let g = primitive_root(p);
    // Discrete log table: index[g^k mod p] = k.
    let mut index = vec![0u64; p as usize];
    let mut acc = 1u64;
    for k in 0..(p - 1) {
        index[acc as usize] = k;
        acc = acc * g % p;
    }
    let chi = |n: i64| -> Complex64 {
        let r = n.rem_euclid(p as i64) as usize;
        if r == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            unit_root(m * index[r], p - 1)
        }
    };
    let dim = p as usize + 1;
    let scale = 1.0 / (p as f64).sqrt();
    let sigma = ComplexMatrix::from_fn(dim, dim, |row, col| {
        if row == 0 && col == 0 {
            Complex64::new(0.0, 0.0)
        } else if row == 0 || col == 0 {
            Complex64::new(scale, 0.0)
        } else {
            chi(col as i64 - row as i64).scale(scale)
        }
    })?;
    ScatteringMatrix::new(sigma, ScatteringFamily::EtCharacter, 0.0)
}

/// Index of the Legendre character mod `p` in the `et_from_character`
/// parameterization.
pub fn legendre_index(p: u64) -> u64 {
    (p - 1) / 2
}

/// The explicit symmetric `5 x 5` ET matrix built from `w = e^{2 pi i/3}`:
///
/// ```text
///         | 0  1   1   1   1  |
///         | 1  0   1   w   w2 |
/// (1/2) * | 1  1   0   w2  w  |
///         | 1  w   w2  0   1  |
///         | 1  w2  w   1   0  |
/// ```
pub fn et_five() -> ScatteringMatrix {
    let o = Complex64::new(0.0, 0.0);
    let u = Complex64::new(1.0, 0.0);
    let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
    let w2 = w.conj();
    let rows = vec![
        o, u, u, u, u, //
        u, o, u, w, w2, //
        u, u, o, w2, w, //
        u, w, w2, o, u, //
        u, w2, w, u, o,
    ];
    let sigma = ComplexMatrix::new(5, 5, rows)
        .expect("finite entries")
        .scale(Complex64::new(0.5, 0.0));
    ScatteringMatrix::new(sigma, ScatteringFamily::EtFiveExample, 0.0)
        .expect("the explicit matrix satisfies the ET invariants")
}

/// Diagnostic report of [`verify_scattering`].
#[derive(Debug, Clone)]
pub struct ScatteringReport {
    pub dim: usize,
    pub unitarity_defect: f64,
    /// Largest deviation of a diagonal modulus from `sqrt(r)`.
    pub diagonal_deviation: f64,
    /// Largest deviation of an off-diagonal modulus from
    /// `sqrt((1 - r)/(v - 1))`.
    pub off_diagonal_deviation: f64,
    pub symmetry: MatrixSymmetry,
    pub passed: bool,
}

/// Checks a matrix against the reflection pattern with probability
/// `expected_r`; diagnostic only, never fails on pattern violations.
pub fn verify_scattering(
    sigma: &ComplexMatrix,
    expected_r: f64,
    tol: f64,
) -> Result<ScatteringReport> {
    if !sigma.is_square() {
        return Err(Error::NonSquare {
            rows: sigma.rows(),
            cols: sigma.cols(),
        });
    }
    let v = sigma.rows();
    if v < 2 {
        return Err(Error::InvalidArgument(
            "scattering verification needs dimension >= 2".into(),
        ));
    }
    let unitarity_defect = sigma.unitary_defect()?;
    let diag_target = expected_r.max(0.0).sqrt();
    let off_target = ((1.0 - expected_r).max(0.0) / (v as f64 - 1.0)).sqrt();
    let mut diagonal_deviation: f64 = 0.0;
    let mut off_diagonal_deviation: f64 = 0.0;
    for i in 0..v {
        for j in 0..v {
            let modulus = sigma.get(i, j).norm();
            if i == j {
                diagonal_deviation = diagonal_deviation.max((modulus - diag_target).abs());
            } else {
                off_diagonal_deviation =
                    off_diagonal_deviation.max((modulus - off_target).abs());
            }
        }
    }
    let passed = unitarity_defect <= tol
        && diagonal_deviation <= tol
        && off_diagonal_deviation <= tol;
    Ok(ScatteringReport {
        dim: v,
        unitarity_defect,
        diagonal_deviation,
        off_diagonal_deviation,
        symmetry: classify_symmetry(sigma),
        passed,
    })
}

/// Outcome of the numerical ET search.
#[derive(Debug, Clone)]
pub enum SearchOutcome {
    Converged {
        matrix: ScatteringMatrix,
        /// Projection iterations consumed, including restarted attempts.
        iterations: usize,
        restarts: usize,
        residual: f64,
    },
    Failed {
        best_residual: f64,
        iterations: usize,
        restarts: usize,
    },
}

/// Success threshold of the ET residual (unitarity + pattern, Frobenius).
pub const SEARCH_RESIDUAL: f64 = 1e-10;

/// Iterations without relative progress before an attempt is restarted.
const STALL_WINDOW: usize = 120;

/// Seeds a fresh zero-diagonal matrix with uniform phases on the pattern.
fn random_pattern(v: usize, target: f64, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(v, v, |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(target, rng.gen::<f64>() * TAU)
        }
    })
    .expect("finite entries")
}

/// Projects onto the ET pattern set: zero diagonal, off-diagonal moduli
/// rescaled to `target` preserving phase (near-zero entries get phase 1).
fn pattern_project(m: &ComplexMatrix, target: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        if i == j {
            Complex64::new(0.0, 0.0)
        } else {
            let z = m.get(i, j);
            let modulus = z.norm();
            if modulus < 1e-14 {
                Complex64::new(target, 0.0)
            } else {
                z.scale(target / modulus)
            }
        }
    })
    .expect("finite entries")
}

/// Numerical search for an ET matrix of dimension `v` by alternating
/// projections between the pattern set and the unitary group.
///
/// Each iteration applies the unitary projection (polar factor) followed
/// by the pattern projection; the residual is the unitarity defect of the
/// pattern-side iterate, whose pattern defect is zero by construction.
/// When an attempt stalls (no relative progress across a window of
/// iterations, which happens from starts outside the attraction basin of
/// any ET point) the search restarts from a fresh draw of the same seeded
/// generator, keeping the total iteration budget and determinism per seed.
/// A convergent attempt is polished to the type tolerance before the
/// matrix is returned.
pub fn et_search(v: usize, seed: u64, max_iters: usize) -> Result<SearchOutcome> {
    if v < 2 {
        return Err(Error::InvalidArgument(format!(
            "ET search needs v >= 2, got {v}"
        )));
    }
    let target = 1.0 / (v as f64 - 1.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = f64::INFINITY;
    let mut iterations = 0usize;
    let mut restarts = 0usize;
    'attempt: loop {
        if iterations >= max_iters {
            break;
        }
        let mut x = random_pattern(v, target, &mut rng);
        let mut attempt_best = f64::INFINITY;
        let mut since_progress = 0usize;
        while iterations < max_iters {
            iterations += 1;
            let q = match unitary_polar_factor(&x) {
                Ok(q) => q,
                // A rank-deficient iterate has no polar factor; restart.
                Err(_) => {
                    restarts += 1;
                    continue 'attempt;
                }
            };
            let y = pattern_project(&q, target);
            let residual = y.unitary_defect()?;
            best = best.min(residual);
            if residual <= SEARCH_RESIDUAL {
                let polished = polish(y, target);
                let residual = polished.unitary_defect()?;
                let matrix =
                    ScatteringMatrix::new(polished, ScatteringFamily::EtSearched, 0.0)?;
                return Ok(SearchOutcome::Converged {
                    matrix,
                    iterations,
                    restarts,
                    residual,
                });
            }
            if residual < 0.98 * attempt_best {
                attempt_best = residual;
                since_progress = 0;
            } else {
                since_progress += 1;
                if since_progress >= STALL_WINDOW {
                    restarts += 1;
                    continue 'attempt;
                }
            }
            x = y;
        }
    }
    Ok(SearchOutcome::Failed {
        best_residual: best,
        iterations,
        restarts,
    })
}

/// Continues the projection pair until the unitarity defect of the
/// pattern-side iterate stops improving; returns the best iterate seen.
fn polish(mut y: ComplexMatrix, target: f64) -> ComplexMatrix {
    let mut best = y.clone();
    let mut best_defect = y.unitary_defect().unwrap_or(f64::INFINITY);
    for _ in 0..80 {
        let q = match unitary_polar_factor(&y) {
            Ok(q) => q,
            Err(_) => break,
        };
        y = pattern_project(&q, target);
        let defect = match y.unitary_defect() {
            Ok(d) => d,
            Err(_) => break,
        };
        if defect < best_defect {
            best_defect = defect;
            best = y.clone();
        } else {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::eigenvalues_dense;

    #[test]
    fn neumann_examples() {
        let s2 = build_neumann(2).unwrap();
        assert_eq!(s2.r_parameter(), 0.0);
        assert!((s2.sigma().get(0, 0).norm()) < 1e-15);
        assert!((s2.sigma().get(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);

        let s4 = build_neumann(4).unwrap();
        assert!((s4.r_parameter() - 0.25).abs() < 1e-15);
        assert!((s4.sigma().get(0, 0) - Complex64::new(-0.5, 0.0)).norm() < 1e-15);
        assert!((s4.sigma().get(0, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(s4.symmetry(), MatrixSymmetry::Symmetric);

        let s12 = build_neumann(12).unwrap();
        assert!((s12.r_parameter() - 25.0 / 36.0).abs() < 1e-15);
    }

    #[test]
    fn fourier_examples() {
        let s2 = build_fourier(2).unwrap();
        let inv = 1.0 / 2f64.sqrt();
        assert!((s2.sigma().get(0, 0) - Complex64::new(-inv, 0.0)).norm() < 1e-12);
        assert!((s2.sigma().get(0, 1) - Complex64::new(inv, 0.0)).norm() < 1e-12);
        assert!((s2.sigma().get(1, 1) - Complex64::new(inv, 0.0)).norm() < 1e-12);

        for v in [3usize, 4, 7] {
            let s = build_fourier(v).unwrap();
            assert!((s.r_parameter() - 1.0 / v as f64).abs() < 1e-15);
            let expect = 1.0 / (v as f64).sqrt();
            for p in 0..v {
                for q in 0..v {
                    assert!((s.sigma().get(p, q).norm() - expect).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn paley_orders_verify_exactly() {
        for order in [2usize, 4, 12, 24] {
            let h = build_paley_skew_hadamard(order).unwrap();
            assert_eq!(h.order(), order);
        }
        assert!(build_paley_skew_hadamard(6).is_err());
        assert!(build_paley_skew_hadamard(16).is_err());
    }

    #[test]
    fn doubling_chain_reaches_power_of_two_orders() {
        let h2 = build_paley_skew_hadamard(2).unwrap();
        let h4 = double_skew_hadamard(&h2).unwrap();
        let h8 = double_skew_hadamard(&h4).unwrap();
        assert_eq!(h8.order(), 8);
        assert_eq!(build_skew_hadamard(16).unwrap().order(), 16);
        assert!(build_skew_hadamard(36).is_err());
    }

    #[test]
    fn constructible_orders_up_to_100() {
        let orders = constructible_skew_hadamard_orders(100);
        let expected = vec![
            2, 4, 8, 12, 16, 20, 24, 32, 40, 44, 48, 60, 64, 68, 72, 80, 84, 88, 96,
        ];
        assert_eq!(orders, expected);
    }

    #[test]
    fn hadamard_et_is_antisymmetric_and_unitary() {
        for order in [2usize, 4, 12] {
            let sm = et_from_hadamard(&build_skew_hadamard(order).unwrap()).unwrap();
            assert_eq!(sm.family(), ScatteringFamily::EtHadamard);
            assert_eq!(sm.symmetry(), MatrixSymmetry::Antisymmetric);
            // Exact antisymmetry, not merely within tolerance.
            for i in 0..order {
                assert_eq!(sm.sigma().get(i, i), Complex64::new(0.0, 0.0));
                for j in 0..order {
                    assert_eq!(sm.sigma().get(i, j), -sm.sigma().get(j, i));
                }
            }
        }
        let s2 = et_from_hadamard(&build_skew_hadamard(2).unwrap()).unwrap();
        assert!((s2.sigma().get(0, 1) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((s2.sigma().get(1, 0) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_et_symmetry_follows_p_mod_4() {
        let s5 = et_from_character(5, legendre_index(5)).unwrap();
        assert_eq!(s5.dim(), 6);
        assert_eq!(s5.symmetry(), MatrixSymmetry::Symmetric);

        let s3 = et_from_character(3, legendre_index(3)).unwrap();
        assert_eq!(s3.dim(), 4);
        assert_eq!(s3.symmetry(), MatrixSymmetry::Neither);

        let s13 = et_from_character(13, legendre_index(13)).unwrap();
        assert_eq!(s13.symmetry(), MatrixSymmetry::Symmetric);
    }

    #[test]
    fn character_row_inner_products_follow_the_lemma() {
        // Sum_n chi(n - j) conj(chi(n)) = P - 1 for j = 0 mod P, else -1.
        for (p, m) in [(5u64, 2u64), (7, 3), (7, 1), (11, 5), (13, 4)] {
            let g = primitive_root(p);
            let mut index = vec![0u64; p as usize];
            let mut acc = 1u64;
            for k in 0..(p - 1) {
                index[acc as usize] = k;
                acc = acc * g % p;
            }
            let chi = |n: i64| -> Complex64 {
                let r = n.rem_euclid(p as i64) as usize;
                if r == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    unit_root(m * index[r], p - 1)
                }
            };
            for j in 0..p as i64 {
                let sum: Complex64 = (0..p as i64).map(|n| chi(n - j) * chi(n).conj()).sum();
                let expected = if j == 0 { p as f64 - 1.0 } else { -1.0 };
                assert!(
                    (sum - Complex64::new(expected, 0.0)).norm() < 1e-12,
                    "p={p} m={m} j={j}: {sum}"
                );
            }
        }
    }

    #[test]
    fn character_legendre_values_mod_5() {
        // Squares mod 5 are {1, 4}: chi(1) = chi(4) = 1, chi(2) = chi(3) = -1.
        let s = et_from_character(5, 2).unwrap();
        let scale = 5f64.sqrt();
        let inner = |j: usize, l: usize| s.sigma().get(j, l) * Complex64::new(scale, 0.0);
        assert!((inner(1, 2) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((inner(1, 5) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((inner(1, 3) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((inner(1, 4) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn character_rejects_bad_input() {
        assert!(et_from_character(9, 1).is_err());
        assert!(et_from_character(2, 1).is_err());
        assert!(et_from_character(7, 0).is_err());
        assert!(et_from_character(7, 6).is_err());
    }

    #[test]
    fn five_example_matches_the_display() {
        let s = et_five();
        assert_eq!(s.symmetry(), MatrixSymmetry::Symmetric);
        assert_eq!(s.family(), ScatteringFamily::EtFiveExample);
        let w = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        assert!((s.sigma().get(0, 0)).norm() < 1e-15);
        assert!((s.sigma().get(0, 1) - Complex64::new(0.5, 0.0)).norm() < 1e-15);
        assert!((s.sigma().get(1, 3) - w.scale(0.5)).norm() < 1e-15);
        assert!((s.sigma().get(4, 2) - w.scale(0.5)).norm() < 1e-15);
        assert!(s.sigma().unitary_defect().unwrap() < 1e-14);
    }

    #[test]
    fn five_example_eigenvalues_on_unit_circle() {
        let spec = eigenvalues_dense(et_five().sigma(), 1e-10).unwrap();
        assert_eq!(spec.len(), 5);
        for &z in spec.values() {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn verify_scattering_report() {
        let et = verify_scattering(et_five().sigma(), 0.0, 1e-12).unwrap();
        assert!(et.passed);
        assert_eq!(et.symmetry, MatrixSymmetry::Symmetric);

        let fourier = verify_scattering(build_fourier(4).unwrap().sigma(), 0.0, 1e-12).unwrap();
        assert!(!fourier.passed);
        assert!((fourier.diagonal_deviation - 0.5).abs() < 1e-12);

        let neumann = verify_scattering(build_neumann(4).unwrap().sigma(), 0.25, 1e-12).unwrap();
        assert!(neumann.passed);
    }

    #[test]
    fn search_v3_defect_is_analytic() {
        match et_search(3, 11, 600).unwrap() {
            SearchOutcome::Failed { best_residual, .. } => {
                assert!((best_residual - 1.5f64.sqrt()).abs() < 1e-6);
            }
            SearchOutcome::Converged { .. } => panic!("no 3x3 ET matrix exists"),
        }
    }

    #[test]
    fn search_v4_converges() {
        match et_search(4, 0, 5000).unwrap() {
            SearchOutcome::Converged { matrix, residual, .. } => {
                assert!(residual <= SEARCH_RESIDUAL);
                assert_eq!(matrix.family(), ScatteringFamily::EtSearched);
                let report = verify_scattering(matrix.sigma(), 0.0, 1e-12).unwrap();
                assert!(report.passed);
            }
            SearchOutcome::Failed { best_residual, .. } => {
                panic!("search failed with residual {best_residual}")
            }
        }
    }

    #[test]
    fn search_is_deterministic_per_seed() {
        let a = et_search(5, 3, 5000).unwrap();
        let b = et_search(5, 3, 5000).unwrap();
        match (a, b) {
            (
                SearchOutcome::Converged {
                    matrix: ma,
                    iterations: ia,
                    ..
                },
                SearchOutcome::Converged {
                    matrix: mb,
                    iterations: ib,
                    ..
                },
            ) => {
                assert_eq!(ia, ib);
                assert!(ma.sigma().sub(mb.sigma()).unwrap().frobenius_norm() == 0.0);
            }
            (
                SearchOutcome::Failed {
                    iterations: ia, ..
                },
                SearchOutcome::Failed {
                    iterations: ib, ..
                },
            ) => assert_eq!(ia, ib),
            _ => panic!("outcomes differ between identical runs"),
        }
    }
}
