//! Term-by-term evaluation of the eigenvalue expansion
//!
//! ```text
//! λ_m = (mπ)² + c_0 - c_2m + a_1 - b_1 + a_2 - b_2 + R_3
//! ```
//!
//! with, writing `D(n) = λ - (π(m+n))²` and `E = {0, -2m}`,
//!
//! ```text
//! a_1 = Σ_{m1∉E}            c_m1²                 / D(m1)
//! b_1 = Σ_{m1∉E}            c_m1 c_(2m+m1)        / D(m1)
//! a_2 = Σ_{m1, m1+m2 ∉ E}   c_m1 c_m2 c_(m1+m2)   / (D(m1) D(m1+m2))
//! b_2 = Σ_{m1, m1+m2 ∉ E}   c_m1 c_m2 c_(2m+m1+m2) / (D(m1) D(m1+m2))
//! ```
//!
//! The second denominator of the double sums sits at the running index
//! `m1 + m2`, the same index the exclusion set is stated on. Every index
//! runs over `[-cutoff, cutoff]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, SpectralError};
use crate::potential::{CosineCoeffs, EvenOddPair};
use crate::quadrature::{cumulative_simpson, simpson, simpson_fn};
use crate::solver::EigenfunctionCoeffs;

pub const DEFAULT_CUTOFF: usize = 512;
/// Smallest `|D(n)|` accepted in any summed denominator.
pub const DEFAULT_DELTA: f64 = 1.0;
/// First mode treated as asymptotic.
pub const DEFAULT_M_MIN: usize = 8;
/// Largest cutoff accepted by the `O(cutoff³)` remainder sum.
pub const MAX_R3_CUTOFF: usize = 16;
/// Mean allowed by [`auxiliary_integrals`].
pub const MEAN_TOLERANCE: f64 = 1e-9;

/// `(mπ)²`.
pub fn unperturbed(m: usize) -> f64 {
    let w = m as f64 * PI;
    w * w
}

/// `n ∈ {0, -2m}`.
#[inline]
pub fn is_excluded(m: usize, n: i64) -> bool {
    n == 0 || n == -2 * m as i64
}

/// `λ - (π(m+n))²`, evaluated as `(λ - (mπ)²) - n(2m+n)π²` so that at
/// `λ = (mπ)²` it is exactly `-n(2m+n)π²`.
#[inline]
pub fn denominator(m: usize, n: i64, lambda: f64) -> f64 {
    let m = m as i64;
    (lambda - unperturbed(m as usize)) - (n * (2 * m + n)) as f64 * (PI * PI)
}

/// `D(n)` for `|n| <= span`, checked against the near-singular guard.
struct Denominators {
    span: i64,
    values: Vec<f64>,
}

impl Denominators {
    fn new(m: usize, lambda: f64, span: usize, delta: f64) -> Result<Self> {
        let span = span as i64;
        let mut values = Vec::with_capacity(2 * span as usize + 1);
        for n in -span..=span {
            let d = denominator(m, n, lambda);
            if !is_excluded(m, n) && (d.is_nan() || d.abs() <= delta) {
                return Err(SpectralError::NearSingular {
                    index: n,
                    denominator: d,
                    lambda,
                });
            }
            values.push(d);
        }
        Ok(Self { span, values })
    }

    #[inline]
    fn at(&self, n: i64) -> f64 {
        self.values[(n + self.span) as usize]
    }
}

/// `(mπ)² + c_0 - c_2m`.
pub fn first_order_eigenvalue(m: usize, coeffs: &CosineCoeffs) -> Result<f64> {
    if m == 0 {
        return Err(SpectralError::InvalidArgument(
            "modes are numbered from 1".into(),
        ));
    }
    coeffs.require(2 * m)?;
    Ok(unperturbed(m) + coeffs.c0() - coeffs.at(2 * m as i64))
}

fn sum_a1(m: usize, coeffs: &CosineCoeffs, den: &Denominators, cutoff: i64) -> f64 {
    (-cutoff..=cutoff)
        .filter(|&n| !is_excluded(m, n))
        .map(|n| {
            let c = coeffs.at(n);
            c * c / den.at(n)
        })
        .sum()
}

fn sum_b1(m: usize, coeffs: &CosineCoeffs, den: &Denominators, cutoff: i64) -> f64 {
    let two_m = 2 * m as i64;
    (-cutoff..=cutoff)
        .filter(|&n| !is_excluded(m, n))
        .map(|n| coeffs.at(n) * coeffs.at(two_m + n) / den.at(n))
        .sum()
}

/// Shared double loop of `a_2` (`shift = 0`) and `b_2` (`shift = 2m`):
/// `Σ c_m1 c_m2 c_(shift+m1+m2) / (D(m1) D(m1+m2))`.
fn sum_second_order(
    m: usize,
    coeffs: &CosineCoeffs,
    den: &Denominators,
    cutoff: usize,
    shift: i64,
) -> f64 {
    let support = coeffs.support(cutoff);
    let mut total = 0.0;
    for &m1 in &support {
        if is_excluded(m, m1) {
            continue;
        }
        let mut inner = 0.0;
        for &m2 in &support {
            let n2 = m1 + m2;
            if is_excluded(m, n2) {
                continue;
            }
            inner += coeffs.at(m2) * coeffs.at(shift + n2) / den.at(n2);
        }
        total += coeffs.at(m1) / den.at(m1) * inner;
    }
    total
}

pub fn term_a1(m: usize, lambda: f64, coeffs: &CosineCoeffs, cutoff: usize) -> Result<f64> {
    coeffs.require(cutoff)?;
    let den = Denominators::new(m, lambda, cutoff, DEFAULT_DELTA)?;
    Ok(sum_a1(m, coeffs, &den, cutoff as i64))
}

pub fn term_b1(m: usize, lambda: f64, coeffs: &CosineCoeffs, cutoff: usize) -> Result<f64> {
    coeffs.require(2 * m + cutoff)?;
    let den = Denominators::new(m, lambda, cutoff, DEFAULT_DELTA)?;
    Ok(sum_b1(m, coeffs, &den, cutoff as i64))
}

pub fn term_a2(m: usize, lambda: f64, coeffs: &CosineCoeffs, cutoff: usize) -> Result<f64> {
    coeffs.require(2 * cutoff)?;
    let den = Denominators::new(m, lambda, 2 * cutoff, DEFAULT_DELTA)?;
    Ok(sum_second_order(m, coeffs, &den, cutoff, 0))
}

pub fn term_b2(m: usize, lambda: f64, coeffs: &CosineCoeffs, cutoff: usize) -> Result<f64> {
    coeffs.require(2 * m + 2 * cutoff)?;
    let den = Denominators::new(m, lambda, 2 * cutoff, DEFAULT_DELTA)?;
    Ok(sum_second_order(m, coeffs, &den, cutoff, 2 * m as i64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    pub cutoff: usize,
    /// Re-evaluate the sums once at the first total.
    pub refine: bool,
    pub delta: f64,
    pub m_min: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self {
            cutoff: DEFAULT_CUTOFF,
            refine: false,
            delta: DEFAULT_DELTA,
            m_min: DEFAULT_M_MIN,
        }
    }
}

impl ExpansionOptions {
    /// Largest coefficient index touched when expanding modes up to `m_max`.
    pub fn coefficient_range(&self, m_max: usize) -> usize {
        2 * m_max + 2 * self.cutoff
    }
}

/// One row of the expansion for mode `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionTerms {
    pub m: usize,
    /// `(mπ)²`
    pub base: f64,
    pub c0: f64,
    /// `-c_2m`
    pub minus_c2m: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    pub r3_estimate: Option<f64>,
    /// First-order value the sums were seeded with.
    pub lambda_seed: f64,
    /// `λ` the sums were finally evaluated at.
    pub lambda_eval: f64,
    pub cutoff: usize,
    /// Envelope estimate of what the truncated sums leave out.
    pub tail_bound: f64,
    pub total: f64,
}

impl ExpansionTerms {
    /// `base + c0 - c_2m + a1 - b1 + a2 - b2`, in that order.
    pub fn recompute_total(&self) -> f64 {
        self.base + self.c0 + self.minus_c2m + self.a1 - self.b1 + self.a2 - self.b2
    }

    pub fn first_order(&self) -> f64 {
        self.base + self.c0 + self.minus_c2m
    }
}

#[derive(Debug, Clone, Copy)]
struct SecondOrderSums {
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
}

fn sums_at(
    m: usize,
    lambda: f64,
    coeffs: &CosineCoeffs,
    opts: &ExpansionOptions,
) -> Result<SecondOrderSums> {
    let cutoff = opts.cutoff;
    let den = Denominators::new(m, lambda, 2 * cutoff, opts.delta)?;
    let c = cutoff as i64;
    Ok(SecondOrderSums {
        a1: sum_a1(m, coeffs, &den, c),
        b1: sum_b1(m, coeffs, &den, c),
        a2: sum_second_order(m, coeffs, &den, cutoff, 0),
        b2: sum_second_order(m, coeffs, &den, cutoff, 2 * m as i64),
    })
}

/// Envelope estimate of the truncation error: one factor of each product
/// lies beyond the cutoff and is bounded by the largest `|c_k|` in the top
/// half of the summed range.
fn tail_bound(m: usize, coeffs: &CosineCoeffs, cutoff: usize) -> f64 {
    if coeffs.exact_beyond() && coeffs.max_index() <= cutoff {
        return 0.0;
    }
    let envelope = coeffs.envelope(cutoff / 2 + 1, coeffs.max_index());
    let largest = coeffs.envelope(1, coeffs.max_index());
    let room = cutoff.saturating_sub(2 * m).max(1) as f64;
    4.0 * envelope * largest / (PI * PI * room)
}

/// The expansion for mode `m`, seeded at the first-order eigenvalue.
pub fn lemma1_expansion(
    m: usize,
    coeffs: &CosineCoeffs,
    opts: &ExpansionOptions,
) -> Result<ExpansionTerms> {
    if m < opts.m_min.max(1) {
        return Err(SpectralError::InvalidArgument(format!(
            "mode {m} is below the asymptotic threshold m_min = {}",
            opts.m_min
        )));
    }
    if opts.cutoff < 2 * m {
        return Err(SpectralError::InvalidArgument(format!(
            "cutoff {} must be at least 2m = {}",
            opts.cutoff,
            2 * m
        )));
    }
    coeffs.require(opts.coefficient_range(m))?;

    let base = unperturbed(m);
    let c0 = coeffs.c0();
    let minus_c2m = -coeffs.at(2 * m as i64);
    let seed = base + c0 + minus_c2m;

    let assemble = |s: SecondOrderSums, lambda_eval: f64| {
        let mut t = ExpansionTerms {
            m,
            base,
            c0,
            minus_c2m,
            a1: s.a1,
            b1: s.b1,
            a2: s.a2,
            b2: s.b2,
            r3_estimate: None,
            lambda_seed: seed,
            lambda_eval,
            cutoff: opts.cutoff,
            tail_bound: tail_bound(m, coeffs, opts.cutoff),
            total: 0.0,
        };
        t.total = t.recompute_total();
        t
    };

    let mut terms = assemble(sums_at(m, seed, coeffs, opts)?, seed);
    if opts.refine {
        let lambda = terms.total;
        terms = assemble(sums_at(m, lambda, coeffs, opts)?, lambda);
    }
    Ok(terms)
}

/// All four sums evaluated at a caller-supplied `λ` (typically the computed
/// eigenvalue), with the same guard and cutoff rules as [`lemma1_expansion`].
pub fn expansion_at(
    m: usize,
    lambda: f64,
    coeffs: &CosineCoeffs,
    opts: &ExpansionOptions,
) -> Result<ExpansionTerms> {
    coeffs.require(opts.coefficient_range(m))?;
    let base = unperturbed(m);
    let c0 = coeffs.c0();
    let minus_c2m = -coeffs.at(2 * m as i64);
    let s = sums_at(m, lambda, coeffs, opts)?;
    let mut t = ExpansionTerms {
        m,
        base,
        c0,
        minus_c2m,
        a1: s.a1,
        b1: s.b1,
        a2: s.a2,
        b2: s.b2,
        r3_estimate: None,
        lambda_seed: base + c0 + minus_c2m,
        lambda_eval: lambda,
        cutoff: opts.cutoff,
        tail_bound: tail_bound(m, coeffs, opts.cutoff),
        total: 0.0,
    };
    t.total = t.recompute_total();
    Ok(t)
}

/// `‖q‖² / (4π² m²)`, the limit of `λ_m - (mπ)²` for admissible zero-mean `q`.
pub fn leading_l2_correction(m: usize, q_l2_sq: f64) -> f64 {
    let m = m as f64;
    q_l2_sq / (4.0 * PI * PI * m * m)
}

/// `Σ_{n∉{0,-2m}, |n|<=cutoff} 1 / |n (2m+n)|`, which grows like `ln m / m`.
pub fn partial_fraction_sum(m: usize, cutoff: usize) -> f64 {
    let two_m = 2 * m as i64;
    let c = cutoff as i64;
    (-c..=c)
        .filter(|&n| !is_excluded(m, n))
        .map(|n| 1.0 / ((n * (two_m + n)) as f64).abs())
        .sum()
}

/// Remainder of the expansion, from the Galerkin eigenfunction of mode `m`:
///
/// ```text
/// R_3 = Σ c_m1 c_m2 c_m3 (qΨ, sin((m+n3)πx)) / (D(n1) D(n2) D(n3) (Ψ, sin mπx))
/// ```
///
/// with `n1 = m1`, `n2 = m1+m2`, `n3 = m1+m2+m3`, each outside `{0, -2m}`.
/// `(qΨ, sin kπx)` comes from the sine coefficients through the Galerkin
/// coupling `c_|l-k| - c_(l+k)`. With `λ` the exact eigenvalue of the same
/// Galerkin problem, `λ - total(λ) = R_3` up to truncation of the sums.
pub fn r3_numeric(
    m: usize,
    lambda: f64,
    coeffs: &CosineCoeffs,
    eig: &EigenfunctionCoeffs,
    cutoff: usize,
) -> Result<f64> {
    if cutoff > MAX_R3_CUTOFF {
        return Err(SpectralError::InvalidArgument(format!(
            "remainder cutoff {cutoff} exceeds {MAX_R3_CUTOFF}"
        )));
    }
    if eig.m != m {
        return Err(SpectralError::InvalidArgument(format!(
            "eigenfunction is for mode {}, not {m}",
            eig.m
        )));
    }
    let n_basis = eig.sine_coeffs.len();
    let reach = m + 3 * cutoff;
    if reach > n_basis {
        return Err(SpectralError::InvalidArgument(format!(
            "eigenfunction basis {n_basis} does not reach index {reach}"
        )));
    }
    coeffs.require(n_basis + reach)?;
    let den = Denominators::new(m, lambda, 3 * cutoff, DEFAULT_DELTA)?;

    // w_k = √2 (qΨ, sin kπx) for k = m + n, |n| <= 3 cutoff
    let span = 3 * cutoff as i64;
    let coupled = |k: i64| -> f64 {
        if k == 0 {
            return 0.0;
        }
        let (sign, k) = if k < 0 { (-1.0, -k) } else { (1.0, k) };
        let s: f64 = eig
            .sine_coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let l = i as i64 + 1;
                v * (coeffs.at(l - k) - coeffs.at(l + k))
            })
            .sum();
        sign * s
    };
    let w: Vec<f64> = (-span..=span).map(|n| coupled(m as i64 + n)).collect();
    let w_at = |n: i64| w[(n + span) as usize];

    let principal = eig.principal();
    let support = coeffs.support(cutoff);
    let mut total = 0.0;
    for &m1 in &support {
        if is_excluded(m, m1) {
            continue;
        }
        let f1 = coeffs.at(m1) / den.at(m1);
        for &m2 in &support {
            let n2 = m1 + m2;
            if is_excluded(m, n2) {
                continue;
            }
            let f2 = f1 * coeffs.at(m2) / den.at(n2);
            for &m3 in &support {
                let n3 = n2 + m3;
                if is_excluded(m, n3) {
                    continue;
                }
                total += f2 * coeffs.at(m3) * w_at(n3) / den.at(n3);
            }
        }
    }
    Ok(total / principal)
}

/// Running integrals of the even and odd parts for mode `m`:
///
/// ```text
/// Q̃(x)  = ∫_0^x q̃                       Q̂(x)  = ∫_0^x q̂
/// G̃±(x) = ∫_0^x q̃ e^{±2imπt} dt - c_2m x
/// Ĝ±(x) = ∫_0^x q̂ e^{±2imπt} dt - x ∫_0^1 q̂ e^{±2imπt} dt
/// ```
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryIntegrals {
    pub m: usize,
    pub q_tilde: Vec<f64>,
    pub q_hat: Vec<f64>,
    pub g_tilde_plus: Vec<Complex64>,
    pub g_tilde_minus: Vec<Complex64>,
    pub g_hat_plus: Vec<Complex64>,
    pub g_hat_minus: Vec<Complex64>,
}

impl AuxiliaryIntegrals {
    /// `max(|Q̃(1)|, |Q̂(1)|)`.
    pub fn q_endpoint_residual(&self) -> f64 {
        let last = |v: &[f64]| v[v.len() - 1].abs();
        last(&self.q_tilde).max(last(&self.q_hat))
    }

    /// Largest modulus of any `G` function at `x = 0` or `x = 1`.
    pub fn g_endpoint_residual(&self) -> f64 {
        [
            &self.g_tilde_plus,
            &self.g_tilde_minus,
            &self.g_hat_plus,
            &self.g_hat_minus,
        ]
        .iter()
        .flat_map(|g| [g[0].norm(), g[g.len() - 1].norm()])
        .fold(0.0, f64::max)
    }
}

/// Cumulative `∫_0^x f(t) e^{i σ 2mπ t} dt` on the grid of `f`.
fn cumulative_modulated(f: &[f64], m: usize, sigma: f64) -> Vec<Complex64> {
    let n = f.len();
    let w = 2.0 * m as f64 * PI;
    let x = |i: usize| i as f64 / (n - 1) as f64;
    let re: Vec<f64> = (0..n).map(|i| f[i] * (w * x(i)).cos()).collect();
    let im: Vec<f64> = (0..n).map(|i| sigma * f[i] * (w * x(i)).sin()).collect();
    cumulative_simpson(&re)
        .into_iter()
        .zip(cumulative_simpson(&im))
        .map(|(a, b)| Complex64::new(a, b))
        .collect()
}

pub fn auxiliary_integrals(pair: &EvenOddPair, m: usize) -> Result<AuxiliaryIntegrals> {
    let even = pair.even_part.values();
    let odd = pair.odd_part.values();
    let n = even.len();
    let c0 = simpson(&pair.reconstruct());
    if c0.abs() > MEAN_TOLERANCE {
        return Err(SpectralError::NonzeroMean(c0));
    }
    let x = |i: usize| i as f64 / (n - 1) as f64;
    let w = 2.0 * m as f64 * PI;
    let c2m = simpson_fn(n, |i| even[i] * (w * x(i)).cos());

    let tilde = |sigma: f64| -> Vec<Complex64> {
        cumulative_modulated(even, m, sigma)
            .into_iter()
            .enumerate()
            .map(|(i, g)| g - c2m * x(i))
            .collect()
    };
    let hat = |sigma: f64| -> Vec<Complex64> {
        let cum = cumulative_modulated(odd, m, sigma);
        let total = cum[n - 1];
        cum.iter()
            .enumerate()
            .map(|(i, g)| g - total * x(i))
            .collect()
    };

    Ok(AuxiliaryIntegrals {
        m,
        q_tilde: cumulative_simpson(even),
        q_hat: cumulative_simpson(odd),
        g_tilde_plus: tilde(1.0),
        g_tilde_minus: tilde(-1.0),
        g_hat_plus: hat(1.0),
        g_hat_minus: hat(-1.0),
    })
}

/// Fourier coefficient `(Ĝ+(·,m), e^{iνπx})`, `ν = 2 m1 + 1`, computed by
/// quadrature and by the closed form
/// `c_(ν-2m) / (iπν) + 2 ∫q̂ e^{2imπt} / (ν²π²)`. Returns both.
pub fn hat_g_coefficient(pair: &EvenOddPair, m: usize, m1: i64) -> Result<(Complex64, Complex64)> {
    let aux = auxiliary_integrals(pair, m)?;
    let odd = pair.odd_part.values();
    let n = odd.len();
    let nu = (2 * m1 + 1) as f64;
    let x = |i: usize| i as f64 / (n - 1) as f64;
    let integrate = |f: &dyn Fn(usize) -> Complex64| -> Complex64 {
        Complex64::new(simpson_fn(n, |i| f(i).re), simpson_fn(n, |i| f(i).im))
    };
    let phase = |freq: f64, i: usize| Complex64::from_polar(1.0, freq * PI * x(i));

    let numeric = integrate(&|i| aux.g_hat_plus[i] * phase(-nu, i));
    let shifted = nu - 2.0 * m as f64;
    let c_shift = integrate(&|i| odd[i] * phase(-shifted, i));
    let drift = integrate(&|i| odd[i] * phase(2.0 * m as f64, i));
    let formula = c_shift / Complex64::new(0.0, PI * nu) + drift * (2.0 / (nu * nu * PI * PI));
    Ok((numeric, formula))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{cosine_coefficients, evaluate, even_odd_split, PotentialSpec};

    fn coeffs_of(h: &[(u32, f64)]) -> CosineCoeffs {
        let q = PotentialSpec::cosine_polynomial(0.0, h).unwrap();
        cosine_coefficients(&q, 0, 0).unwrap()
    }

    #[test]
    fn first_order_examples() {
        let zero = coeffs_of(&[]);
        assert_eq!(first_order_eigenvalue(3, &zero).unwrap(), 9.0 * PI * PI);
        let c = coeffs_of(&[(2, 1.0)]);
        assert_eq!(first_order_eigenvalue(1, &c).unwrap(), PI * PI - 0.5);
        assert_eq!(first_order_eigenvalue(4, &c).unwrap(), unperturbed(4));
        let g = PotentialSpec::grid(vec![(0.0, 0.0), (0.5, 1.0), (1.0, 0.0)]).unwrap();
        let short = cosine_coefficients(&g, 4, 65).unwrap();
        assert!(matches!(
            first_order_eigenvalue(3, &short),
            Err(SpectralError::InsufficientRange { needed: 6, .. })
        ));
    }

    #[test]
    fn denominator_identity_at_unperturbed_lambda() {
        for m in [1usize, 5, 8, 33, 64] {
            let lam = unperturbed(m);
            for n in -200i64..=200 {
                let exact = -(n * (2 * m as i64 + n)) as f64 * PI * PI;
                let d = denominator(m, n, lam);
                assert!(
                    (d - exact).abs() <= 4.0 * f64::EPSILON * exact.abs(),
                    "m={m} n={n}"
                );
                // and it agrees with the textbook form to rounding of λ
                let direct = lam - (PI * (m as i64 + n) as f64).powi(2);
                assert!((d - direct).abs() <= 1e-12 * lam.max(direct.abs()));
            }
        }
    }

    #[test]
    fn a1_examples() {
        let zero = coeffs_of(&[]);
        assert_eq!(term_a1(10, unperturbed(10), &zero, 512).unwrap(), 0.0);

        // ¼ (1/((mπ)²-((m-2)π)²) + 1/((mπ)²-((m+2)π)²)) = 1/(8π²(m²-1))
        let c = coeffs_of(&[(2, 1.0)]);
        let a1 = term_a1(10, unperturbed(10), &c, 512).unwrap();
        let want = 1.0 / (792.0 * PI * PI);
        assert!((a1 - want).abs() < 1e-18, "{a1} vs {want}");
        assert!((want - 1.27931e-4).abs() < 1e-9);

        // cos πx: c_±1 = ½ → ¼ (1/((2m-1)π²) - 1/((2m+1)π²)) = 1/(2π²(4m²-1))
        let c = coeffs_of(&[(1, 1.0)]);
        let a1 = term_a1(5, unperturbed(5), &c, 512).unwrap();
        let want = 1.0 / (198.0 * PI * PI);
        assert!((a1 - want).abs() < 1e-18);
        assert!((want - 5.11723e-4).abs() < 1e-9);
    }

    #[test]
    fn b1_examples() {
        let zero = coeffs_of(&[]);
        assert_eq!(term_b1(10, unperturbed(10), &zero, 512).unwrap(), 0.0);
        let c = coeffs_of(&[(2, 1.0)]);
        for m in 3..20 {
            assert_eq!(term_b1(m, unperturbed(m), &c, 512).unwrap(), 0.0);
        }
        // m = 2: only m1 = -2 pairs c_-2 with c_2; D(-2) = 4π²
        let b1 = term_b1(2, unperturbed(2), &c, 512).unwrap();
        let want = 1.0 / (16.0 * PI * PI);
        assert!((b1 - want).abs() < 1e-17);
        assert!((want - 6.3326e-3).abs() < 1e-7);
    }

    #[test]
    fn second_order_vanish_by_index_analysis() {
        let c = coeffs_of(&[(2, 1.0)]);
        for m in 3..20 {
            assert_eq!(term_a2(m, unperturbed(m), &c, 64).unwrap(), 0.0);
        }
        for m in 4..20 {
            assert_eq!(term_b2(m, unperturbed(m), &c, 64).unwrap(), 0.0);
        }
        // m = 3 is the last mode where 2m + m1 + m2 can reach ±2
        assert_ne!(term_b2(3, unperturbed(3), &c, 64).unwrap(), 0.0);
        let zero = coeffs_of(&[]);
        assert_eq!(term_a2(8, unperturbed(8), &zero, 64).unwrap(), 0.0);
        assert_eq!(term_b2(8, unperturbed(8), &zero, 64).unwrap(), 0.0);
    }

    #[test]
    fn near_singular_denominator_is_reported() {
        let c = coeffs_of(&[(2, 1.0)]);
        // λ sits on (π(m+1))² so D(1) = D(-21) = 0; the scan meets -21 first
        let lam = unperturbed(11);
        match term_a1(10, lam, &c, 64) {
            Err(SpectralError::NearSingular { index, .. }) => assert_eq!(index, -21),
            other => panic!("expected near-singular error, got {other:?}"),
        }
    }

    #[test]
    fn exclusion_sets_are_never_summed() {
        // c ≡ 1 on a finite window makes every admitted index contribute
        // exactly 1/D(n); summing D(n) over an explicit enumeration of the
        // admitted set must reproduce a1 exactly.
        let cutoff = 40usize;
        let coeffs = CosineCoeffs::new(vec![1.0; 3 * cutoff + 200], false);
        for m in [3usize, 8, 15] {
            let lam = unperturbed(m) + 0.25;
            let admitted: Vec<i64> = (-(cutoff as i64)..=cutoff as i64)
                .filter(|&n| n != 0 && n != -2 * m as i64)
                .collect();
            assert_eq!(admitted.len(), 2 * cutoff + 1 - 2);
            let want: f64 = admitted.iter().map(|&n| 1.0 / denominator(m, n, lam)).sum();
            assert_eq!(term_a1(m, lam, &coeffs, cutoff).unwrap(), want);
            let mut pairs = 0usize;
            let mut want2 = 0.0;
            for &m1 in &admitted {
                let mut inner = 0.0;
                for m2 in -(cutoff as i64)..=cutoff as i64 {
                    let n2 = m1 + m2;
                    if n2 == 0 || n2 == -2 * m as i64 {
                        continue;
                    }
                    pairs += 1;
                    inner += 1.0 / denominator(m, n2, lam);
                }
                want2 += 1.0 / denominator(m, m1, lam) * inner;
            }
            assert!(pairs > 0);
            assert_eq!(term_a2(m, lam, &coeffs, cutoff).unwrap(), want2);
        }
    }

    #[test]
    fn expansion_examples() {
        let zero = coeffs_of(&[]);
        let t = lemma1_expansion(9, &zero, &ExpansionOptions::default()).unwrap();
        assert_eq!(t.total, unperturbed(9));
        assert_eq!((t.a1, t.b1, t.a2, t.b2), (0.0, 0.0, 0.0, 0.0));

        let c = coeffs_of(&[(2, 1.0)]);
        let t = lemma1_expansion(10, &c, &ExpansionOptions::default()).unwrap();
        let a1 = 1.0 / (792.0 * PI * PI);
        assert!((t.a1 - a1).abs() < 1e-18);
        assert_eq!((t.b1, t.a2, t.b2), (0.0, 0.0, 0.0));
        assert_eq!(t.total, t.recompute_total());
        assert_eq!(t.tail_bound, 0.0);
        assert!((t.total - (100.0 * PI * PI + a1)).abs() < 1e-12);
    }

    #[test]
    fn expansion_preconditions() {
        let c = coeffs_of(&[(2, 1.0)]);
        assert!(lemma1_expansion(4, &c, &ExpansionOptions::default()).is_err());
        let opts = ExpansionOptions {
            cutoff: 10,
            ..Default::default()
        };
        assert!(lemma1_expansion(8, &c, &opts).is_err());
    }

    #[test]
    fn refinement_moves_evaluation_point() {
        let c = coeffs_of(&[(2, 1.0), (4, 0.5)]);
        let opts = ExpansionOptions {
            refine: true,
            ..Default::default()
        };
        let t = lemma1_expansion(8, &c, &opts).unwrap();
        assert_eq!(t.lambda_seed, t.first_order());
        assert_ne!(t.lambda_eval, t.lambda_seed);
        let plain = lemma1_expansion(8, &c, &ExpansionOptions::default()).unwrap();
        assert!((t.total - plain.total).abs() < 1e-8);
    }

    #[test]
    fn leading_correction_examples() {
        assert_eq!(leading_l2_correction(7, 0.0), 0.0);
        let v = leading_l2_correction(10, 0.5);
        assert!((v - 1.0 / (800.0 * PI * PI)).abs() < 1e-18);
        assert!((v - 1.26651e-4).abs() < 1e-9);
        let m = 10_000usize;
        let scaled = leading_l2_correction(m, 0.5) * (m * m) as f64;
        assert!((scaled - 1.0 / (8.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn partial_fraction_sum_closed_form() {
        // with no truncation the sum is (H_2m + H_(2m-1)) / m
        let harmonic = |n: usize| (1..=n).map(|k| 1.0 / k as f64).sum::<f64>();
        for m in [4usize, 8, 16] {
            let big = partial_fraction_sum(m, 2_000_000);
            let exact = (harmonic(2 * m) + harmonic(2 * m - 1)) / m as f64;
            assert!((big - exact).abs() < 1e-5, "m = {m}");
        }
    }

    #[test]
    fn auxiliary_zero_potential() {
        let pair = even_odd_split(&evaluate(&PotentialSpec::Zero, 257).unwrap());
        let aux = auxiliary_integrals(&pair, 3).unwrap();
        assert!(aux.q_tilde.iter().all(|v| *v == 0.0));
        assert!(aux.g_hat_plus.iter().all(|v| v.norm() == 0.0));
        assert_eq!(aux.g_endpoint_residual(), 0.0);
    }

    #[test]
    fn auxiliary_endpoint_identities() {
        let q = PotentialSpec::cosine_polynomial(0.0, &[(2, 1.0)]).unwrap();
        let pair = even_odd_split(&evaluate(&q, 4097).unwrap());
        for m in [1usize, 5, 12] {
            let aux = auxiliary_integrals(&pair, m).unwrap();
            assert!(aux.q_endpoint_residual() < 1e-12);
            assert!(aux.g_endpoint_residual() < 1e-10, "m = {m}");
        }
    }

    #[test]
    fn auxiliary_rejects_mean() {
        let q = PotentialSpec::cosine_polynomial(1.0, &[(2, 1.0)]).unwrap();
        let pair = even_odd_split(&evaluate(&q, 257).unwrap());
        assert!(matches!(
            auxiliary_integrals(&pair, 2),
            Err(SpectralError::NonzeroMean(_))
        ));
    }

    #[test]
    fn hat_coefficient_formula_agrees_with_quadrature() {
        let q = PotentialSpec::cosine_polynomial(0.0, &[(1, 1.0), (3, -0.4)]).unwrap();
        let pair = even_odd_split(&evaluate(&q, 8193).unwrap());
        for m1 in [-3i64, 0, 2] {
            let (numeric, formula) = hat_g_coefficient(&pair, 4, m1).unwrap();
            assert!(
                (numeric - formula).norm() < 1e-8,
                "m1 = {m1}: {numeric} vs {formula}"
            );
        }
    }

    mod remainder {
        use super::*;
        use crate::solver::{build_galerkin_matrix, eigenfunction_sine_coeffs};

        fn galerkin_mode(
            q: &PotentialSpec,
            n_basis: usize,
            m: usize,
        ) -> (CosineCoeffs, EigenfunctionCoeffs) {
            let coeffs = cosine_coefficients(q, 2 * n_basis, 0).unwrap();
            let op = build_galerkin_matrix(&coeffs, n_basis).unwrap();
            (coeffs, eigenfunction_sine_coeffs(&op, m).unwrap())
        }

        /// Triple loop with `(qΨ, sin kπx)` taken by trapezoid quadrature of
        /// the synthesised eigenfunction. The integrand is a cosine
        /// polynomial of degree below twice the node count, so the rule is
        /// exact up to rounding.
        fn brute_r3(
            m: usize,
            lambda: f64,
            q: &PotentialSpec,
            coeffs: &CosineCoeffs,
            eig: &EigenfunctionCoeffs,
            cutoff: i64,
        ) -> f64 {
            let nodes = 4096usize;
            let xs: Vec<f64> = (0..=nodes).map(|i| i as f64 / nodes as f64).collect();
            let psi: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    eig.sine_coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, v)| v * ((i + 1) as f64 * PI * x).sin())
                        .sum::<f64>()
                })
                .collect();
            let inner = |k: i64| -> f64 {
                let f = |i: usize| q.value_at(xs[i]) * psi[i] * (k as f64 * PI * xs[i]).sin();
                let mut s = 0.5 * (f(0) + f(nodes));
                for i in 1..nodes {
                    s += f(i);
                }
                s / nodes as f64
            };
            let skip = |n: i64| n == 0 || n == -2 * m as i64;
            let d = |n: i64| lambda - (PI * (m as i64 + n) as f64).powi(2);
            let mut total = 0.0;
            for m1 in -cutoff..=cutoff {
                for m2 in -cutoff..=cutoff {
                    for m3 in -cutoff..=cutoff {
                        let (n1, n2, n3) = (m1, m1 + m2, m1 + m2 + m3);
                        if skip(n1) || skip(n2) || skip(n3) {
                            continue;
                        }
                        let c = coeffs.at(m1) * coeffs.at(m2) * coeffs.at(m3);
                        if c == 0.0 {
                            continue;
                        }
                        total += c * inner(m as i64 + n3) / (d(n1) * d(n2) * d(n3));
                    }
                }
            }
            // psi above is Ψ/√2, and (Ψ, sin mπx) = v_m/√2
            2.0 * total / eig.principal()
        }

        #[test]
        fn matches_brute_force_triple_loop() {
            let q = PotentialSpec::cosine_polynomial(0.0, &[(2, 1.0), (3, -0.6)]).unwrap();
            for m in [8usize, 13] {
                let (coeffs, eig) = galerkin_mode(&q, 96, m);
                let lam = eig.eigenvalue;
                let fast = r3_numeric(m, lam, &coeffs, &eig, 4).unwrap();
                let slow = brute_r3(m, lam, &q, &coeffs, &eig, 4);
                assert!(fast != 0.0);
                assert!(
                    (fast - slow).abs() <= 1e-13 && (fast - slow).abs() <= 1e-9 * slow.abs(),
                    "m={m}: {fast} vs {slow}"
                );
            }
        }

        #[test]
        fn closes_the_expansion_exactly() {
            let q =
                PotentialSpec::cosine_polynomial(0.0, &[(1, 0.8), (2, 1.0), (4, -0.5)]).unwrap();
            for m in [8usize, 12, 20] {
                let (coeffs, eig) = galerkin_mode(&q, 128, m);
                let lam = eig.eigenvalue;
                let opts = ExpansionOptions {
                    cutoff: 8,
                    ..Default::default()
                };
                let t = expansion_at(m, lam, &coeffs, &opts).unwrap();
                let r3 = r3_numeric(m, lam, &coeffs, &eig, 8).unwrap();
                let gap = lam - t.total - r3;
                assert!(
                    gap.abs() < 1e-9,
                    "m={m}: λ={lam} total={} r3={r3} gap={gap}",
                    t.total
                );
            }
        }

        #[test]
        fn zero_potential_has_no_remainder() {
            let (coeffs, eig) = galerkin_mode(&PotentialSpec::Zero, 64, 10);
            assert_eq!(
                r3_numeric(10, eig.eigenvalue, &coeffs, &eig, 8).unwrap(),
                0.0
            );
        }

        #[test]
        fn decays_faster_than_cubic_log_bound_slope() {
            let q = PotentialSpec::cosine_polynomial(0.0, &[(2, 1.0)]).unwrap();
            let coeffs = cosine_coefficients(&q, 512, 0).unwrap();
            let op = build_galerkin_matrix(&coeffs, 256)
                .unwrap()
                .decompose()
                .unwrap();
            let series: Vec<(usize, f64)> = (8..=32)
                .map(|m| {
                    let eig = op.eigenfunction(m).unwrap();
                    (m, r3_numeric(m, eig.eigenvalue, &coeffs, &eig, 8).unwrap())
                })
                .collect();
            let fit = crate::harness::fit_decay_exponent(&series).unwrap();
            assert!(fit.decays_at_least(-2.5), "{fit:?}");
            assert!(fit.exponent().is_some());
        }

        #[test]
        fn rejects_large_cutoff_and_wrong_mode() {
            let q = PotentialSpec::cosine_polynomial(0.0, &[(2, 1.0)]).unwrap();
            let (coeffs, eig) = galerkin_mode(&q, 64, 8);
            assert!(r3_numeric(8, eig.eigenvalue, &coeffs, &eig, 17).is_err());
            assert!(r3_numeric(9, eig.eigenvalue, &coeffs, &eig, 4).is_err());
        }
    }
}
