//! Dirichlet eigenvalues of `-y'' + q y = λ y`, `y(0) = y(1) = 0`.
//!
//! The primary route is a Galerkin projection onto `√2 sin(kπx)`, whose
//! matrix is assembled from cosine coefficients via
//! `2 sin(jπx) sin(kπx) = cos((j-k)πx) - cos((j+k)πx)`:
//!
//! ```text
//! H_jk = (jπ)² δ_jk + c_|j-k| - c_(j+k)
//! ```
//!
//! The independent route integrates the ODE with RK4, tracks the scaled
//! Prüfer angle and bisects on it.

use std::f64::consts::PI;

use crate::error::{Result, SpectralError};
use crate::linalg::{symmetric_eigen, SymmetricEigen};
use crate::potential::{cosine_coefficients, mean_normalize, CosineCoeffs, PotentialSpec};
use crate::quadrature;

/// Eigenvector clusters closer than this are treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Galerkin,
    Shooting,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::Shooting => "shooting",
        }
    }
}

/// `max(256, 8 * n_modes)`.
pub fn default_basis(n_modes: usize) -> usize {
    (8 * n_modes).max(256)
}

/// Symmetric Galerkin matrix in the orthonormal sine basis, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinOperator {
    n_basis: usize,
    entries: Vec<f64>,
}

impl GalerkinOperator {
    pub fn n_basis(&self) -> usize {
        self.n_basis
    }

    /// `H_jk` with 1-based `j, k`.
    pub fn entry(&self, j: usize, k: usize) -> f64 {
        self.entries[(j - 1) * self.n_basis + (k - 1)]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(symmetric_eigen(&self.entries, self.n_basis, false)?.values)
    }

    pub fn decompose(&self) -> Result<GalerkinDecomposition> {
        Ok(GalerkinDecomposition {
            eigen: symmetric_eigen(&self.entries, self.n_basis, true)?,
        })
    }
}

/// `H` for the first `n_basis` sine modes.
///
/// Needs `c_0..c_(2 n_basis)` unless the coefficients are exact beyond their range.
pub fn build_galerkin_matrix(coeffs: &CosineCoeffs, n_basis: usize) -> Result<GalerkinOperator> {
    if n_basis == 0 {
        return Err(SpectralError::InvalidArgument(
            "n_basis must be positive".into(),
        ));
    }
    coeffs.require(2 * n_basis)?;
    let n = n_basis;
    let mut entries = vec![0.0; n * n];
    for j in 1..=n {
        for k in 1..=n {
            let mut h = coeffs.at(j as i64 - k as i64) - coeffs.at((j + k) as i64);
            if j == k {
                let w = j as f64 * PI;
                h += w * w;
            }
            entries[(j - 1) * n + (k - 1)] = h;
        }
    }
    Ok(GalerkinOperator { n_basis, entries })
}

/// Indexed eigenvalues `λ_1 < λ_2 < ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub method: Method,
    pub n_basis: usize,
    pub eigenvalues: Vec<f64>,
    /// `c_0` removed before solving and added back to every eigenvalue.
    pub mean_shift: f64,
    /// Per-mode error estimate; empty when not requested.
    pub est_error: Vec<f64>,
}

impl Spectrum {
    /// `λ_m`, 1-based.
    pub fn eigenvalue(&self, m: usize) -> Option<f64> {
        m.checked_sub(1)
            .and_then(|i| self.eigenvalues.get(i).copied())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GalerkinOptions {
    /// Defaults to [`default_basis`].
    pub n_basis: Option<usize>,
    /// Compare against a solve with twice the basis.
    pub estimate_error: bool,
    /// Quadrature nodes for sampled potentials; chosen automatically if `None`.
    pub n_points: Option<usize>,
}

/// Coefficients of `spec` sufficient for a Galerkin matrix of size `n_basis`.
pub fn galerkin_coefficients(
    spec: &PotentialSpec,
    n_basis: usize,
    n_points: Option<usize>,
) -> Result<CosineCoeffs> {
    let max_index = 2 * n_basis;
    let n_points = n_points
        .unwrap_or_else(|| quadrature::points_for_index(max_index, quadrature::DEFAULT_POINTS));
    cosine_coefficients(spec, max_index, n_points)
}

fn galerkin_values(
    spec: &PotentialSpec,
    n_basis: usize,
    n_points: Option<usize>,
) -> Result<Vec<f64>> {
    let coeffs = galerkin_coefficients(spec, n_basis, n_points)?;
    build_galerkin_matrix(&coeffs, n_basis)?.eigenvalues()
}

/// Lowest `n_modes` eigenvalues from the sine-basis Galerkin matrix.
pub fn solve_spectrum_galerkin(
    spec: &PotentialSpec,
    n_modes: usize,
    n_basis: usize,
) -> Result<Spectrum> {
    solve_spectrum_galerkin_with(
        spec,
        n_modes,
        &GalerkinOptions {
            n_basis: Some(n_basis),
            ..Default::default()
        },
    )
}

pub fn solve_spectrum_galerkin_with(
    spec: &PotentialSpec,
    n_modes: usize,
    opts: &GalerkinOptions,
) -> Result<Spectrum> {
    let n_basis = opts.n_basis.unwrap_or_else(|| default_basis(n_modes));
    if n_modes == 0 || n_basis < 4 * n_modes {
        return Err(SpectralError::InvalidArgument(format!(
            "need n_basis >= 4 * n_modes (got n_basis = {n_basis}, n_modes = {n_modes})"
        )));
    }
    let (normalized, shift) = mean_normalize(spec);
    let values = galerkin_values(&normalized, n_basis, opts.n_points)?;
    let eigenvalues: Vec<f64> = values[..n_modes].iter().map(|v| v + shift).collect();
    check_ascending(&eigenvalues)?;

    let est_error = if opts.estimate_error {
        let finer = galerkin_values(&normalized, 2 * n_basis, opts.n_points)?;
        values[..n_modes]
            .iter()
            .zip(&finer)
            .map(|(a, b)| (a - b).abs())
            .collect()
    } else {
        Vec::new()
    };

    Ok(Spectrum {
        method: Method::Galerkin,
        n_basis,
        eigenvalues,
        mean_shift: shift,
        est_error,
    })
}

fn check_ascending(values: &[f64]) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if gap <= DEGENERACY_GAP {
            return Err(SpectralError::Degenerate { m: i + 2, gap });
        }
    }
    Ok(())
}

/// Sine coefficients `(Ψ_m, √2 sin kπx)`, `k = 1..=n_basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenfunctionCoeffs {
    pub m: usize,
    pub eigenvalue: f64,
    pub sine_coeffs: Vec<f64>,
    pub normalized: bool,
}

impl EigenfunctionCoeffs {
    /// `√2 (Ψ_m, sin mπx)`.
    pub fn principal(&self) -> f64 {
        self.sine_coeffs[self.m - 1]
    }

    /// Coefficient `k` (1-based), zero outside the basis.
    pub fn coeff(&self, k: i64) -> f64 {
        if k >= 1 {
            self.sine_coeffs.get(k as usize - 1).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }
}

/// Full eigen-decomposition of a [`GalerkinOperator`].
#[derive(Debug, Clone)]
pub struct GalerkinDecomposition {
    eigen: SymmetricEigen,
}

impl GalerkinDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    /// Normalised eigenvector of the `m`-th eigenvalue, sign fixed so that
    /// its `m`-th component is positive.
    pub fn eigenfunction(&self, m: usize) -> Result<EigenfunctionCoeffs> {
        let n = self.eigen.dim();
        if m == 0 || m > n {
            return Err(SpectralError::InvalidArgument(format!(
                "mode {m} outside basis of size {n}"
            )));
        }
        let vals = &self.eigen.values;
        let gap = [
            (m >= 2).then(|| vals[m - 1] - vals[m - 2]),
            (m < n).then(|| vals[m] - vals[m - 1]),
        ]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
        if gap < DEGENERACY_GAP {
            return Err(SpectralError::Degenerate { m, gap });
        }
        let mut v = self
            .eigen
            .vector(m - 1)
            .expect("decomposition keeps vectors");
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let sign = if v[m - 1] < 0.0 { -1.0 } else { 1.0 };
        for x in &mut v {
            *x *= sign / norm;
        }
        Ok(EigenfunctionCoeffs {
            m,
            eigenvalue: vals[m - 1],
            sine_coeffs: v,
            normalized: true,
        })
    }
}

pub fn eigenfunction_sine_coeffs(op: &GalerkinOperator, m: usize) -> Result<EigenfunctionCoeffs> {
    if m == 0 || m > op.n_basis() {
        return Err(SpectralError::InvalidArgument(format!(
            "mode {m} outside basis of size {}",
            op.n_basis()
        )));
    }
    op.decompose()?.eigenfunction(m)
}

/// Settings for the shooting oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    /// Bisection stops once the bracket is this small relative to `|λ|`.
    pub rel_tol: f64,
    /// Number of bracket doublings before giving up.
    pub max_widenings: usize,
    /// RK4 steps per unit length per oscillation (`⌈√λ/π⌉`).
    pub steps_per_oscillation: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            max_widenings: 40,
            steps_per_oscillation: 4096,
        }
    }
}

/// Scaled Prüfer angle `θ = atan2(s y, y')` at `x = 1` for the solution with
/// `y(0) = 0, y'(0) = 1`. Zeros of `y` are exactly the crossings of `θ`
/// through multiples of `π`, so `θ(1) = mπ` at `λ_m` and `θ(1)` increases
/// with `λ`.
fn prufer_angle(spec: &PotentialSpec, lambda: f64, steps: usize) -> f64 {
    let scale = lambda.abs().sqrt().max(1.0);
    let h = 1.0 / steps as f64;
    let rhs = |x: f64, y: f64, dy: f64| (dy, (spec.value_at(x) - lambda) * y);

    let (mut y, mut dy) = (0.0f64, 1.0f64);
    let mut theta = 0.0f64;
    for i in 0..steps {
        let x = i as f64 * h;
        let (k1y, k1d) = rhs(x, y, dy);
        let (k2y, k2d) = rhs(x + 0.5 * h, y + 0.5 * h * k1y, dy + 0.5 * h * k1d);
        let (k3y, k3d) = rhs(x + 0.5 * h, y + 0.5 * h * k2y, dy + 0.5 * h * k2d);
        let (k4y, k4d) = rhs(x + h, y + h * k3y, dy + h * k3d);
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dy += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);

        let raw = (scale * y).atan2(dy);
        let mut delta = raw - theta.rem_euclid(2.0 * PI);
        if delta > PI {
            delta -= 2.0 * PI;
        } else if delta <= -PI {
            delta += 2.0 * PI;
        }
        theta += delta;

        let norm = y.abs().max(dy.abs());
        if norm > 1e100 {
            y /= norm;
            dy /= norm;
        }
    }
    theta
}

fn rk4_steps(lambda_hi: f64, per_oscillation: usize) -> usize {
    let oscillations = (lambda_hi.max(PI * PI).sqrt() / PI).ceil() as usize;
    per_oscillation * oscillations.max(1)
}

/// `λ_m` located by Prüfer-angle bisection in `(mπ)² ± bracket_pad`.
pub fn solve_eigenvalue_shooting(spec: &PotentialSpec, m: usize, bracket_pad: f64) -> Result<f64> {
    solve_eigenvalue_shooting_with(spec, m, bracket_pad, &ShootingOptions::default())
}

pub fn solve_eigenvalue_shooting_with(
    spec: &PotentialSpec,
    m: usize,
    bracket_pad: f64,
    opts: &ShootingOptions,
) -> Result<f64> {
    if m == 0 {
        return Err(SpectralError::InvalidArgument(
            "modes are numbered from 1".into(),
        ));
    }
    if !(bracket_pad > 0.0 && bracket_pad.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!(
            "bracket pad must be positive, got {bracket_pad}"
        )));
    }
    let target = m as f64 * PI;
    let centre = target * target;
    let mut pad = bracket_pad;

    for _ in 0..=opts.max_widenings {
        let (mut lo, mut hi) = (centre - pad, centre + pad);
        let steps = rk4_steps(hi, opts.steps_per_oscillation);
        let mismatch = |lam: f64| prufer_angle(spec, lam, steps) - target;
        if mismatch(lo) >= 0.0 || mismatch(hi) <= 0.0 {
            pad *= 2.0;
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= opts.rel_tol * mid.abs().max(1.0) {
                break;
            }
            if mismatch(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        return Ok(0.5 * (lo + hi));
    }
    Err(SpectralError::BracketFailure { m, pad })
}

/// Lowest `n_modes` eigenvalues by repeated shooting.
pub fn solve_spectrum_shooting(spec: &PotentialSpec, n_modes: usize) -> Result<Spectrum> {
    let pad = default_pad(spec);
    let eigenvalues = (1..=n_modes)
        .map(|m| solve_eigenvalue_shooting(spec, m, pad))
        .collect::<Result<Vec<_>>>()?;
    check_ascending(&eigenvalues)?;
    Ok(Spectrum {
        method: Method::Shooting,
        n_basis: 0,
        eigenvalues,
        mean_shift: 0.0,
        est_error: Vec::new(),
    })
}

/// Half-width covering the potential's shift of `(mπ)²`: `∫|q|` plus slack.
pub fn default_pad(spec: &PotentialSpec) -> f64 {
    2.0 * spec.l1_norm() + 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::TrigTerm;

    fn cos2() -> PotentialSpec {
        PotentialSpec::cosine_polynomial(0.0, &[(2, 1.0)]).unwrap()
    }

    fn pi2(m: usize) -> f64 {
        let w = m as f64 * PI;
        w * w
    }

    #[test]
    fn matrix_examples() {
        let zero = cosine_coefficients(&PotentialSpec::Zero, 6, 0).unwrap();
        let h = build_galerkin_matrix(&zero, 3).unwrap();
        for j in 1..=3 {
            for k in 1..=3 {
                let want = if j == k { pi2(j) } else { 0.0 };
                assert_eq!(h.entry(j, k), want);
            }
        }

        let c = cosine_coefficients(&cos2(), 6, 0).unwrap();
        let h = build_galerkin_matrix(&c, 3).unwrap();
        assert_eq!(h.entry(1, 1), PI * PI - 0.5);
        assert_eq!(h.entry(1, 3), 0.5);
        assert_eq!(h.entry(3, 1), 0.5);
        assert_eq!(h.entry(1, 2), 0.0);

        let five = cosine_coefficients(&PotentialSpec::Constant(5.0), 6, 0).unwrap();
        let h = build_galerkin_matrix(&five, 3).unwrap();
        for j in 1..=3 {
            for k in 1..=3 {
                let want = if j == k { pi2(j) + 5.0 } else { 0.0 };
                assert_eq!(h.entry(j, k), want);
            }
        }
    }

    #[test]
    fn matrix_entries_match_direct_quadrature() {
        // 2∫ q sin(jπx) sin(kπx) dx by brute midpoint rule
        let q =
            PotentialSpec::trig(0.2, vec![TrigTerm::cos(1, 0.7), TrigTerm::sin(2, -0.4)]).unwrap();
        let c = galerkin_coefficients(&q, 4, None).unwrap();
        let h = build_galerkin_matrix(&c, 4).unwrap();
        let n = 100_000;
        for j in 1..=4 {
            for k in 1..=4 {
                let integral: f64 = (0..n)
                    .map(|i| {
                        let x = (i as f64 + 0.5) / n as f64;
                        2.0 * q.value_at(x) * (j as f64 * PI * x).sin() * (k as f64 * PI * x).sin()
                    })
                    .sum::<f64>()
                    / n as f64;
                let want = integral + if j == k { pi2(j) } else { 0.0 };
                assert!((h.entry(j, k) - want).abs() < 1e-8, "H[{j},{k}]");
            }
        }
    }

    #[test]
    fn matrix_needs_coefficient_range() {
        let g = PotentialSpec::grid(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let c = cosine_coefficients(&g, 10, 65).unwrap();
        assert!(matches!(
            build_galerkin_matrix(&c, 6),
            Err(SpectralError::InsufficientRange {
                needed: 12,
                available: 10
            })
        ));
        assert!(build_galerkin_matrix(&c, 5).is_ok());
    }

    #[test]
    fn galerkin_examples() {
        let s = solve_spectrum_galerkin(&PotentialSpec::Zero, 3, 16).unwrap();
        assert_eq!(s.eigenvalues, vec![pi2(1), pi2(2), pi2(3)]);

        let s = solve_spectrum_galerkin(&PotentialSpec::Constant(5.0), 2, 16).unwrap();
        assert_eq!(s.mean_shift, 5.0);
        assert!((s.eigenvalues[0] - pi2(1) - 5.0).abs() < 1e-10);
        assert!((s.eigenvalues[1] - pi2(2) - 5.0).abs() < 1e-10);

        let s = solve_spectrum_galerkin(&cos2(), 1, 64).unwrap();
        let delta = s.eigenvalues[0] - (PI * PI - 0.5);
        assert!(delta.abs() < 0.02, "delta = {delta}");
    }

    #[test]
    fn galerkin_rejects_small_basis() {
        assert!(solve_spectrum_galerkin(&cos2(), 10, 39).is_err());
    }

    #[test]
    fn error_estimate_from_basis_doubling() {
        let s = solve_spectrum_galerkin_with(
            &cos2(),
            4,
            &GalerkinOptions {
                n_basis: Some(16),
                estimate_error: true,
                n_points: None,
            },
        )
        .unwrap();
        assert_eq!(s.est_error.len(), 4);
        assert!(s.est_error.iter().all(|e| *e < 1e-10));
    }

    #[test]
    fn shooting_examples() {
        let l = solve_eigenvalue_shooting(&PotentialSpec::Zero, 4, 5.0).unwrap();
        assert!((l - 16.0 * PI * PI).abs() < 1e-9);
        let l = solve_eigenvalue_shooting(&PotentialSpec::Constant(5.0), 1, 1.0).unwrap();
        assert!((l - PI * PI - 5.0).abs() < 1e-8);
        let g = solve_spectrum_galerkin(&cos2(), 1, 64).unwrap().eigenvalues[0];
        let s = solve_eigenvalue_shooting(&cos2(), 1, 2.0).unwrap();
        assert!((g - s).abs() < 1e-8, "galerkin {g} vs shooting {s}");
    }

    #[test]
    fn shooting_widens_bracket() {
        // a shift of 40 is far outside the initial pad
        let l = solve_eigenvalue_shooting(&PotentialSpec::Constant(40.0), 2, 0.5).unwrap();
        assert!((l - pi2(2) - 40.0).abs() < 1e-8);
        let opts = ShootingOptions {
            max_widenings: 2,
            ..Default::default()
        };
        assert!(matches!(
            solve_eigenvalue_shooting_with(&PotentialSpec::Constant(40.0), 2, 0.5, &opts),
            Err(SpectralError::BracketFailure { m: 2, .. })
        ));
    }

    #[test]
    fn shooting_rejects_mode_zero() {
        assert!(solve_eigenvalue_shooting(&PotentialSpec::Zero, 0, 1.0).is_err());
    }

    #[test]
    fn eigenfunction_examples() {
        let zero = cosine_coefficients(&PotentialSpec::Zero, 32, 0).unwrap();
        let op = build_galerkin_matrix(&zero, 16).unwrap();
        let e = eigenfunction_sine_coeffs(&op, 5).unwrap();
        for (k, v) in e.sine_coeffs.iter().enumerate() {
            assert_eq!(*v, if k == 4 { 1.0 } else { 0.0 });
        }

        let c = cosine_coefficients(&cos2(), 128, 0).unwrap();
        let op = build_galerkin_matrix(&c, 64).unwrap();
        let e = eigenfunction_sine_coeffs(&op, 10).unwrap();
        assert!(e.normalized);
        assert!(e.principal() >= 0.99);
        let norm: f64 = e.sine_coeffs.iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-10);
        assert!(eigenfunction_sine_coeffs(&op, 65).is_err());
    }

    #[test]
    fn degenerate_cluster_is_an_error() {
        // diag(1, 1, 3) has a double eigenvalue
        let op = GalerkinOperator {
            n_basis: 3,
            entries: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 3.0],
        };
        assert!(matches!(
            eigenfunction_sine_coeffs(&op, 1),
            Err(SpectralError::Degenerate { m: 1, .. })
        ));
        assert!(eigenfunction_sine_coeffs(&op, 3).is_ok());
    }
}
