//! Verification experiments: solver against expansion, decay fits, the
//! finite-precision Ambarzumyan test and the lemma checks.
//!
//! All reports are plain data with a fixed row order, so rendering the same
//! report twice gives identical bytes.

mod table;

use std::f64::consts::PI;
use std::ops::RangeInclusive;

pub use table::{format_real, Cell, Table};

use crate::asymptotics::{
    auxiliary_integrals, expansion_at, first_order_eigenvalue, hat_g_coefficient, lemma1_expansion,
    ExpansionOptions,
};
use crate::error::{Result, SpectralError};
use crate::potential::{
    check_hypotheses, cosine_coefficients, evaluate, even_odd_split, mean_normalize, CosineCoeffs,
    HypothesisReport, PotentialSpec,
};
use crate::quadrature::{points_for_index, DEFAULT_POINTS};
use crate::solver::{default_basis, solve_spectrum_galerkin, Spectrum};

/// Fewest nonzero samples accepted by [`fit_decay_exponent`].
pub const MIN_FIT_POINTS: usize = 5;

/// Short human-readable label for a potential.
pub fn describe(spec: &PotentialSpec) -> String {
    match spec {
        PotentialSpec::Zero => "zero".into(),
        PotentialSpec::Constant(v) => format!("constant {}", format_real(*v)),
        PotentialSpec::Trig(t) => match t.cosine_bandwidth() {
            Some(b) => format!(
                "cosine polynomial, {} terms, bandwidth {b}",
                t.terms().len()
            ),
            None => format!("trigonometric polynomial, {} terms", t.terms().len()),
        },
        PotentialSpec::Grid(g) => format!("grid, {} samples", g.len()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HarnessOptions {
    /// Galerkin basis; defaults to [`default_basis`] of the largest mode.
    pub n_basis: Option<usize>,
    pub expansion: ExpansionOptions,
    /// Run even when the potential fails the hypothesis check.
    pub allow_inadmissible: bool,
    /// Hypothesis tolerance; defaults to the potential's own.
    pub hypothesis_tol: Option<f64>,
    /// Quadrature nodes for sampled potentials.
    pub n_points: Option<usize>,
}

impl HarnessOptions {
    fn basis_for(&self, m_max: usize) -> usize {
        self.n_basis.unwrap_or_else(|| default_basis(m_max))
    }
}

fn check_range(m_range: &RangeInclusive<usize>) -> Result<()> {
    if m_range.is_empty() || *m_range.start() == 0 {
        return Err(SpectralError::InvalidArgument(format!(
            "mode range {}..={} must be non-empty and start at 1 or later",
            m_range.start(),
            m_range.end()
        )));
    }
    Ok(())
}

/// Endpoint conditions of the mean-free part. The mean itself is reported
/// separately since every expansion carries `c_0` explicitly.
fn require_admissible(spec: &PotentialSpec, opts: &HarnessOptions) -> Result<HypothesisReport> {
    let tol = opts
        .hypothesis_tol
        .unwrap_or_else(|| spec.default_tolerance());
    let (normalized, _) = mean_normalize(spec);
    let report = check_hypotheses(&normalized, tol);
    if !report.admissible && !opts.allow_inadmissible {
        return Err(SpectralError::InvalidPotential(format!(
            "endpoint mismatch: |q(0)-q(1)| = {:.3e}, |q'(0)-q'(1)| = {:.3e} (tolerance {tol:.1e})",
            report.endpoint_value_gap, report.endpoint_derivative_gap
        )));
    }
    Ok(report)
}

fn expansion_coefficients(
    spec: &PotentialSpec,
    max_index: usize,
    n_points: Option<usize>,
) -> Result<CosineCoeffs> {
    let n_points = n_points.unwrap_or_else(|| points_for_index(max_index, DEFAULT_POINTS));
    cosine_coefficients(spec, max_index, n_points)
}

fn galerkin_spectrum(
    spec: &PotentialSpec,
    m_max: usize,
    opts: &HarnessOptions,
) -> Result<Spectrum> {
    solve_spectrum_galerkin(spec, m_max, opts.basis_for(m_max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub m: usize,
    pub lambda_solver: f64,
    pub lambda_first_order: f64,
    pub lambda_lemma1: f64,
    pub residual_first: f64,
    pub residual_lemma1: f64,
}

impl ComparisonRow {
    pub fn new(m: usize, lambda_solver: f64, lambda_first_order: f64, lambda_lemma1: f64) -> Self {
        Self {
            m,
            lambda_solver,
            lambda_first_order,
            lambda_lemma1,
            residual_first: lambda_solver - lambda_first_order,
            residual_lemma1: lambda_solver - lambda_lemma1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub potential: String,
    pub n_basis: usize,
    pub cutoff: usize,
    pub refine: bool,
    pub hypotheses: HypothesisReport,
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            "solver vs expansion",
            &[
                "m",
                "lambda_solver",
                "lambda_first_order",
                "lambda_lemma1",
                "residual_first",
                "residual_lemma1",
            ],
        )
        .meta("potential", self.potential.as_str())
        .meta("n_basis", self.n_basis)
        .meta("cutoff", self.cutoff)
        .meta("refine", if self.refine { "yes" } else { "no" })
        .meta(
            "admissible",
            if self.hypotheses.admissible {
                "yes"
            } else {
                "no"
            },
        );
        for r in &self.rows {
            t.push(vec![
                r.m.into(),
                r.lambda_solver.into(),
                r.lambda_first_order.into(),
                r.lambda_lemma1.into(),
                r.residual_first.into(),
                r.residual_lemma1.into(),
            ]);
        }
        t
    }
}

/// Galerkin eigenvalues next to the first-order value and the full
/// expansion total, for every `m` in `m_range`.
pub fn compare_spectrum_vs_expansion(
    spec: &PotentialSpec,
    m_range: RangeInclusive<usize>,
    opts: &HarnessOptions,
) -> Result<ComparisonReport> {
    check_range(&m_range)?;
    let hypotheses = require_admissible(spec, opts)?;
    let m_max = *m_range.end();
    let spectrum = galerkin_spectrum(spec, m_max, opts)?;
    let coeffs =
        expansion_coefficients(spec, opts.expansion.coefficient_range(m_max), opts.n_points)?;

    let rows = m_range
        .map(|m| {
            let solver = spectrum.eigenvalues[m - 1];
            let first = first_order_eigenvalue(m, &coeffs)?;
            let lemma1 = lemma1_expansion(m, &coeffs, &opts.expansion)?.total;
            Ok(ComparisonRow::new(m, solver, first, lemma1))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(ComparisonReport {
        potential: describe(spec),
        n_basis: spectrum.n_basis,
        cutoff: opts.expansion.cutoff,
        refine: opts.expansion.refine,
        hypotheses,
        rows,
    })
}

/// Least-squares fit `|value| ≈ prefactor · m^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub m_range: (usize, usize),
    pub r_squared: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayOutcome {
    Fit(DecayFit),
    /// Every value was exactly zero; there is nothing to fit.
    IdenticallyZero {
        m_range: (usize, usize),
    },
}

impl DecayOutcome {
    /// Whether the series decays at least like `m^bound`.
    pub fn decays_at_least(&self, bound: f64) -> bool {
        match self {
            DecayOutcome::Fit(f) => f.exponent <= bound,
            DecayOutcome::IdenticallyZero { .. } => true,
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            DecayOutcome::Fit(f) => Some(f.exponent),
            DecayOutcome::IdenticallyZero { .. } => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            DecayOutcome::Fit(f) => format!(
                "exponent {:.4} over m = {}..{} (r^2 = {:.4}, {} points)",
                f.exponent, f.m_range.0, f.m_range.1, f.r_squared, f.points
            ),
            DecayOutcome::IdenticallyZero { m_range } => {
                format!("identically zero over m = {}..{}", m_range.0, m_range.1)
            }
        }
    }
}

/// Slope of `log|value|` against `log m`, using only the nonzero entries.
pub fn fit_decay_exponent(series: &[(usize, f64)]) -> Result<DecayOutcome> {
    if series.is_empty() {
        return Err(SpectralError::TooFewPoints(0));
    }
    if let Some(&(m, v)) = series.iter().find(|(m, v)| *m == 0 || !v.is_finite()) {
        return Err(SpectralError::InvalidArgument(format!(
            "decay series needs m >= 1 and finite values, got ({m}, {v})"
        )));
    }
    let lo = series.iter().map(|p| p.0).min().unwrap();
    let hi = series.iter().map(|p| p.0).max().unwrap();
    let points: Vec<(f64, f64)> = series
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|&(m, v)| ((m as f64).ln(), v.abs().ln()))
        .collect();
    if points.is_empty() {
        return Ok(DecayOutcome::IdenticallyZero { m_range: (lo, hi) });
    }
    if points.len() < MIN_FIT_POINTS {
        return Err(SpectralError::TooFewPoints(points.len()));
    }

    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(SpectralError::InvalidArgument(
            "decay series needs at least two distinct m".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    };
    Ok(DecayOutcome::Fit(DecayFit {
        exponent: slope,
        prefactor: intercept.exp(),
        m_range: (lo, hi),
        r_squared,
        points: points.len(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ZeroPotential,
    NonzeroPotential,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::ZeroPotential => "zero_potential",
            Verdict::NonzeroPotential => "nonzero_potential",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationRow {
    pub m: usize,
    /// `λ_m - (mπ)²`
    pub deviation: f64,
    /// `m² · deviation`
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviationReport {
    pub potential: String,
    pub n_basis: usize,
    pub rows: Vec<DeviationRow>,
    /// Median of `m² d_m` over the top quartile of `m`.
    pub limit_estimate: f64,
    /// `‖q - c_0‖² / (4π²)`.
    pub predicted_limit: f64,
    pub max_abs_deviation: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub hypotheses: HypothesisReport,
}

impl DeviationReport {
    /// `limit_estimate / predicted_limit`, `None` when nothing is predicted.
    pub fn limit_ratio(&self) -> Option<f64> {
        (self.predicted_limit != 0.0).then(|| self.limit_estimate / self.predicted_limit)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            "deviation from the unperturbed spectrum",
            &["m", "d_m", "m2_d_m"],
        )
        .meta("potential", self.potential.as_str())
        .meta("n_basis", self.n_basis)
        .meta("verdict", self.verdict.name())
        .meta("max_abs_deviation", self.max_abs_deviation)
        .meta("tolerance", self.tol)
        .meta("limit_estimate", self.limit_estimate)
        .meta("predicted_limit", self.predicted_limit)
        .meta("mean", self.hypotheses.c0)
        .meta(
            "admissible",
            if self.hypotheses.admissible {
                "yes"
            } else {
                "no"
            },
        );
        for r in &self.rows {
            t.push(vec![r.m.into(), r.deviation.into(), r.scaled.into()]);
        }
        t
    }
}

/// Default verdict tolerance `1e-8 (m_max π)²`.
pub fn default_deviation_tol(m_max: usize) -> f64 {
    1e-8 * (m_max as f64 * PI).powi(2)
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

pub fn ambarzumyan_deviation(
    spec: &PotentialSpec,
    m_max: usize,
    tol: Option<f64>,
) -> Result<DeviationReport> {
    ambarzumyan_deviation_with(spec, m_max, tol, None)
}

/// How far `λ_1..λ_{m_max}` sit from `(mπ)²`. The potential is solved as
/// given; a nonzero mean shows up as `d_m → c_0` and in the hypothesis report.
pub fn ambarzumyan_deviation_with(
    spec: &PotentialSpec,
    m_max: usize,
    tol: Option<f64>,
    n_basis: Option<usize>,
) -> Result<DeviationReport> {
    if m_max == 0 {
        return Err(SpectralError::InvalidArgument(
            "m_max must be at least 1".into(),
        ));
    }
    let tol = tol.unwrap_or_else(|| default_deviation_tol(m_max));
    if tol.is_nan() || tol < 0.0 {
        return Err(SpectralError::InvalidArgument(format!(
            "tolerance {tol} must be non-negative"
        )));
    }
    let n_basis = n_basis.unwrap_or_else(|| default_basis(m_max));
    let spectrum = solve_spectrum_galerkin(spec, m_max, n_basis)?;
    let rows: Vec<DeviationRow> = spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, lam)| {
            let m = i + 1;
            let w = m as f64 * PI;
            let deviation = lam - w * w;
            DeviationRow {
                m,
                deviation,
                scaled: (m * m) as f64 * deviation,
            }
        })
        .collect();

    let mut top: Vec<f64> = rows
        .iter()
        .filter(|r| r.m >= 3 * m_max / 4)
        .map(|r| r.scaled)
        .collect();
    let limit_estimate = median(&mut top);
    let c0 = spec.mean();
    let predicted_limit = (spec.l2_norm_squared() - c0 * c0).max(0.0) / (4.0 * PI * PI);
    let max_abs_deviation = rows.iter().map(|r| r.deviation.abs()).fold(0.0, f64::max);
    let verdict = if max_abs_deviation <= tol {
        Verdict::ZeroPotential
    } else {
        Verdict::NonzeroPotential
    };
    Ok(DeviationReport {
        potential: describe(spec),
        n_basis,
        rows,
        limit_estimate,
        predicted_limit,
        max_abs_deviation,
        tol,
        verdict,
        hypotheses: check_hypotheses(spec, spec.default_tolerance()),
    })
}

/// Pass thresholds for [`lemma_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaThresholds {
    /// Largest accepted decay exponent for `|b_1|`, `|b_2|` and `m²|a_2|`.
    pub decay_exponent: f64,
    /// `a_1 · 4π²m² / ‖q‖²` must lie in this band for `m >= ratio_from`.
    pub ratio_band: (f64, f64),
    pub ratio_from: usize,
    pub q_endpoint_tol: f64,
    pub g_endpoint_tol: f64,
    /// Grid used for the auxiliary integrals.
    pub aux_points: usize,
}

impl Default for LemmaThresholds {
    fn default() -> Self {
        Self {
            decay_exponent: -2.0,
            ratio_band: (0.9, 1.1),
            ratio_from: 16,
            q_endpoint_tol: 1e-12,
            g_endpoint_tol: 1e-10,
            aux_points: DEFAULT_POINTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaRow {
    pub m: usize,
    pub lambda: f64,
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
    /// `a_1 · 4π²m² / ‖q‖²`, zero when `‖q‖ = 0`.
    pub a1_ratio: f64,
    /// `max(|Q̃(1)|, |Q̂(1)|)`
    pub q_endpoint: f64,
    /// Largest `|G(0)|`, `|G(1)|` over the four `G` functions.
    pub g_endpoint: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaReport {
    pub potential: String,
    /// Mean removed before the checks.
    pub c0: f64,
    pub q_l2_sq: f64,
    pub bandwidth: Option<usize>,
    pub n_basis: usize,
    pub cutoff: usize,
    pub rows: Vec<LemmaRow>,
    pub b1_fit: Option<DecayOutcome>,
    pub b2_fit: Option<DecayOutcome>,
    pub a2_fit: DecayOutcome,
    /// Largest gap between the quadrature and closed-form Fourier
    /// coefficients of `Ĝ+`; informational only.
    pub hat_coefficient_mismatch: f64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&LemmaCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(
            "expansion term checks",
            &[
                "m",
                "lambda",
                "a1",
                "b1",
                "a2",
                "b2",
                "a1_ratio",
                "q_endpoint",
                "g_endpoint",
            ],
        )
        .meta("potential", self.potential.as_str())
        .meta("removed_mean", self.c0)
        .meta("q_l2_sq", self.q_l2_sq)
        .meta("n_basis", self.n_basis)
        .meta("cutoff", self.cutoff)
        .meta("hat_coefficient_mismatch", self.hat_coefficient_mismatch);
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            t = t.meta(c.name, format!("{status}: {}", c.detail));
        }
        t = t.meta("overall", if self.passed() { "pass" } else { "FAIL" });
        for r in &self.rows {
            t.push(vec![
                r.m.into(),
                r.lambda.into(),
                r.a1.into(),
                r.b1.into(),
                r.a2.into(),
                r.b2.into(),
                r.a1_ratio.into(),
                r.q_endpoint.into(),
                r.g_endpoint.into(),
            ]);
        }
        t
    }
}

/// Exactly-zero check for a band-limited potential: `term` must vanish for
/// every `m` above `from`.
fn vanishing_check(
    name: &'static str,
    rows: &[LemmaRow],
    from: usize,
    term: impl Fn(&LemmaRow) -> f64,
) -> LemmaCheck {
    let offenders: Vec<usize> = rows
        .iter()
        .filter(|r| r.m > from && term(r) != 0.0)
        .map(|r| r.m)
        .collect();
    let checked = rows.iter().filter(|r| r.m > from).count();
    LemmaCheck {
        name,
        passed: offenders.is_empty(),
        detail: if offenders.is_empty() {
            format!("exactly zero at all {checked} modes above {from}")
        } else {
            format!("nonzero at m = {offenders:?}")
        },
    }
}

fn decay_check(name: &'static str, outcome: &DecayOutcome, bound: f64) -> LemmaCheck {
    LemmaCheck {
        name,
        passed: outcome.decays_at_least(bound),
        detail: format!("{} (bound {bound})", outcome.describe()),
    }
}

/// Runs the expansion terms at the computed eigenvalues and checks their
/// size and decay on the mean-free part of `spec`.
///
/// For a cosine polynomial of bandwidth `B`, `b_1` vanishes for `m > B` and
/// `b_2` for `m > 3B/2`; otherwise their decay exponents are fitted.
pub fn lemma_checks(
    spec: &PotentialSpec,
    m_range: RangeInclusive<usize>,
    opts: &HarnessOptions,
    thresholds: &LemmaThresholds,
) -> Result<LemmaReport> {
    check_range(&m_range)?;
    require_admissible(spec, opts)?;
    let (q, c0) = mean_normalize(spec);
    let m_lo = *m_range.start();
    let m_max = *m_range.end();
    let spectrum = galerkin_spectrum(&q, m_max, opts)?;
    let coeffs =
        expansion_coefficients(&q, opts.expansion.coefficient_range(m_max), opts.n_points)?;
    let q_l2_sq = q.l2_norm_squared();
    let pair = even_odd_split(&evaluate(&q, thresholds.aux_points)?);

    let rows = m_range
        .clone()
        .map(|m| {
            let lambda = spectrum.eigenvalues[m - 1];
            let t = expansion_at(m, lambda, &coeffs, &opts.expansion)?;
            let aux = auxiliary_integrals(&pair, m)?;
            let a1_ratio = if q_l2_sq > 0.0 {
                t.a1 * 4.0 * PI * PI * (m * m) as f64 / q_l2_sq
            } else {
                0.0
            };
            Ok(LemmaRow {
                m,
                lambda,
                a1: t.a1,
                b1: t.b1,
                a2: t.a2,
                b2: t.b2,
                a1_ratio,
                q_endpoint: aux.q_endpoint_residual(),
                g_endpoint: aux.g_endpoint_residual(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let series = |f: &dyn Fn(&LemmaRow) -> f64| -> Vec<(usize, f64)> {
        rows.iter().map(|r| (r.m, f(r))).collect()
    };
    let bound = thresholds.decay_exponent;
    let bandwidth = q.cosine_bandwidth();
    let mut checks = Vec::new();

    let (b1_fit, b2_fit) = match bandwidth {
        Some(b) => {
            checks.push(vanishing_check("b1_vanishes", &rows, b, |r| r.b1));
            checks.push(vanishing_check("b2_vanishes", &rows, 3 * b / 2, |r| r.b2));
            (None, None)
        }
        None => {
            let b1 = fit_decay_exponent(&series(&|r| r.b1))?;
            let b2 = fit_decay_exponent(&series(&|r| r.b2))?;
            checks.push(decay_check("b1_decay", &b1, bound));
            checks.push(decay_check("b2_decay", &b2, bound));
            (Some(b1), Some(b2))
        }
    };

    let a2_fit = fit_decay_exponent(&series(&|r| r.a2 * (r.m * r.m) as f64))?;
    checks.push(decay_check("a2_scaled_decay", &a2_fit, bound));

    let (lo, hi) = thresholds.ratio_band;
    let ratio_rows: Vec<&LemmaRow> = rows
        .iter()
        .filter(|r| r.m >= thresholds.ratio_from)
        .collect();
    let ratio_check = if q_l2_sq == 0.0 {
        let zero = rows.iter().all(|r| r.a1 == 0.0);
        LemmaCheck {
            name: "a1_ratio",
            passed: zero,
            detail: "zero potential, a1 must vanish".into(),
        }
    } else if ratio_rows.is_empty() {
        LemmaCheck {
            name: "a1_ratio",
            passed: false,
            detail: format!("no modes at or above {}", thresholds.ratio_from),
        }
    } else {
        let min = ratio_rows
            .iter()
            .map(|r| r.a1_ratio)
            .fold(f64::INFINITY, f64::min);
        let max = ratio_rows
            .iter()
            .map(|r| r.a1_ratio)
            .fold(f64::NEG_INFINITY, f64::max);
        LemmaCheck {
            name: "a1_ratio",
            passed: min >= lo && max <= hi,
            detail: format!(
                "range [{min:.4}, {max:.4}] for m >= {}, band [{lo}, {hi}]",
                thresholds.ratio_from
            ),
        }
    };
    checks.push(ratio_check);

    let q_worst = rows.iter().map(|r| r.q_endpoint).fold(0.0, f64::max);
    let g_worst = rows.iter().map(|r| r.g_endpoint).fold(0.0, f64::max);
    checks.push(LemmaCheck {
        name: "q_endpoints",
        passed: q_worst <= thresholds.q_endpoint_tol,
        detail: format!(
            "max {q_worst:.3e} (tolerance {:.0e})",
            thresholds.q_endpoint_tol
        ),
    });
    checks.push(LemmaCheck {
        name: "g_endpoints",
        passed: g_worst <= thresholds.g_endpoint_tol,
        detail: format!(
            "max {g_worst:.3e} (tolerance {:.0e})",
            thresholds.g_endpoint_tol
        ),
    });

    let mut hat_coefficient_mismatch = 0.0f64;
    for m1 in -2..=2 {
        let (numeric, formula) = hat_g_coefficient(&pair, m_lo, m1)?;
        hat_coefficient_mismatch = hat_coefficient_mismatch.max((numeric - formula).norm());
    }

    Ok(LemmaReport {
        potential: describe(spec),
        c0,
        q_l2_sq,
        bandwidth,
        n_basis: spectrum.n_basis,
        cutoff: opts.expansion.cutoff,
        rows,
        b1_fit,
        b2_fit,
        a2_fit,
        hat_coefficient_mismatch,
        checks,
    })
}
