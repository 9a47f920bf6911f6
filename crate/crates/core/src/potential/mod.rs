//! Potentials `q` on [0, 1]: representation, sampling, cosine coefficients,
//! even/odd splitting and the endpoint hypotheses of the inverse theorem.

mod text;

use std::f64::consts::PI;

use crate::error::{Result, SpectralError};
use crate::quadrature::{self, check_grid_size};

/// Node count used for quadratures that have no caller-chosen grid.
const FINE_POINTS: usize = 16385;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Cos,
    Sin,
}

/// `amplitude * cos(harmonic * pi * x)` or `amplitude * sin(harmonic * pi * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub basis: Basis,
    pub harmonic: u32,
    pub amplitude: f64,
}

impl TrigTerm {
    pub fn cos(harmonic: u32, amplitude: f64) -> Self {
        Self {
            basis: Basis::Cos,
            harmonic,
            amplitude,
        }
    }

    pub fn sin(harmonic: u32, amplitude: f64) -> Self {
        Self {
            basis: Basis::Sin,
            harmonic,
            amplitude,
        }
    }

    fn omega(&self) -> f64 {
        self.harmonic as f64 * PI
    }

    pub fn value(&self, x: f64) -> f64 {
        match self.basis {
            Basis::Cos => self.amplitude * (self.omega() * x).cos(),
            Basis::Sin => self.amplitude * (self.omega() * x).sin(),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let w = self.omega();
        match self.basis {
            Basis::Cos => -self.amplitude * w * (w * x).sin(),
            Basis::Sin => self.amplitude * w * (w * x).cos(),
        }
    }

    /// `∫_0^1 term(x) cos(m pi x) dx` in closed form.
    pub fn cosine_coefficient(&self, m: usize) -> f64 {
        let k = self.harmonic as i64;
        let m = m as i64;
        match self.basis {
            Basis::Cos => {
                if k == m {
                    0.5 * self.amplitude
                } else {
                    0.0
                }
            }
            Basis::Sin => {
                // ½∫[sin (k+m)πx + sin (k-m)πx]; only odd k+m survives.
                if (k + m) % 2 == 0 {
                    0.0
                } else {
                    let (k, m) = (k as f64, m as f64);
                    self.amplitude * 2.0 * k / (PI * (k * k - m * m))
                }
            }
        }
    }

    /// `q(1 - x)` expressed in the same basis.
    fn reflected(&self) -> Self {
        let parity = if self.harmonic.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        let amplitude = match self.basis {
            Basis::Cos => parity * self.amplitude,
            Basis::Sin => -parity * self.amplitude,
        };
        Self { amplitude, ..*self }
    }
}

/// Constant offset plus a finite sum of sine/cosine harmonics of `pi x`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    offset: f64,
    terms: Vec<TrigTerm>,
}

impl TrigPolynomial {
    pub fn new(offset: f64, terms: Vec<TrigTerm>) -> Result<Self> {
        if !offset.is_finite() {
            return Err(SpectralError::InvalidPotential(
                "constant offset is not finite".into(),
            ));
        }
        for (i, t) in terms.iter().enumerate() {
            if t.harmonic == 0 {
                return Err(SpectralError::InvalidPotential(
                    "trig harmonics must be positive".into(),
                ));
            }
            if !t.amplitude.is_finite() {
                return Err(SpectralError::InvalidPotential(format!(
                    "amplitude of harmonic {} is not finite",
                    t.harmonic
                )));
            }
            if terms[..i]
                .iter()
                .any(|s| s.basis == t.basis && s.harmonic == t.harmonic)
            {
                return Err(SpectralError::InvalidPotential(format!(
                    "duplicate {:?} harmonic {}",
                    t.basis, t.harmonic
                )));
            }
        }
        Ok(Self { offset, terms })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn terms(&self) -> &[TrigTerm] {
        &self.terms
    }

    /// Largest cosine harmonic when no sine terms are present.
    pub fn cosine_bandwidth(&self) -> Option<usize> {
        if self.terms.iter().any(|t| t.basis == Basis::Sin) {
            None
        } else {
            Some(
                self.terms
                    .iter()
                    .map(|t| t.harmonic as usize)
                    .max()
                    .unwrap_or(0),
            )
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.offset + self.terms.iter().map(|t| t.value(x)).sum::<f64>()
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.derivative(x)).sum()
    }

    pub fn cosine_coefficient(&self, m: usize) -> f64 {
        let base = if m == 0 { self.offset } else { 0.0 };
        base + self
            .terms
            .iter()
            .map(|t| t.cosine_coefficient(m))
            .sum::<f64>()
    }
}

/// Samples `(x_i, v_i)` with `x_0 = 0 < x_1 < ... < x_last = 1`, read as a
/// piecewise-linear function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSamples {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl GridSamples {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 3 {
            return Err(SpectralError::InvalidPotential(format!(
                "grid needs at least 3 samples, got {}",
                samples.len()
            )));
        }
        if samples
            .iter()
            .any(|(x, v)| !x.is_finite() || !v.is_finite())
        {
            return Err(SpectralError::InvalidPotential(
                "grid samples must be finite".into(),
            ));
        }
        if samples[0].0 != 0.0 || samples[samples.len() - 1].0 != 1.0 {
            return Err(SpectralError::InvalidPotential(
                "grid must start at x = 0 and end at x = 1".into(),
            ));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(SpectralError::InvalidPotential(
                "grid abscissae must be strictly increasing".into(),
            ));
        }
        let (xs, values) = samples.into_iter().unzip();
        Ok(Self { xs, values })
    }

    /// Samples on the uniform grid `x_i = i / (n - 1)`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(SpectralError::InvalidPotential(format!(
                "grid needs at least 3 samples, got {n}"
            )));
        }
        let last = (n - 1) as f64;
        Self::new(
            values
                .into_iter()
                .enumerate()
                .map(|(i, v)| (if i == n - 1 { 1.0 } else { i as f64 / last }, v))
                .collect(),
        )
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.xs.iter().copied().zip(self.values.iter().copied())
    }

    pub fn interpolate(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        // index of the first abscissa strictly greater than x
        let hi = self.xs.partition_point(|&xi| xi <= x);
        if hi == 0 {
            return self.values[0];
        }
        if hi >= self.xs.len() {
            return self.values[self.xs.len() - 1];
        }
        let lo = hi - 1;
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.values[lo] + t * (self.values[hi] - self.values[lo])
    }

    fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.xs
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (x[1] - x[0], v[0], v[1]))
    }

    /// Exact mean of the interpolant.
    pub fn mean(&self) -> f64 {
        self.segments().map(|(h, a, b)| 0.5 * h * (a + b)).sum()
    }

    /// Exact `∫|q|` of the interpolant, splitting segments at sign changes.
    pub fn l1_norm(&self) -> f64 {
        self.segments()
            .map(|(h, a, b)| {
                if a * b >= 0.0 {
                    0.5 * h * (a.abs() + b.abs())
                } else {
                    0.5 * h * (a * a + b * b) / (a.abs() + b.abs())
                }
            })
            .sum()
    }

    /// Exact `∫q²` of the interpolant.
    pub fn l2_norm_squared(&self) -> f64 {
        self.segments()
            .map(|(h, a, b)| h * (a * a + a * b + b * b) / 3.0)
            .sum()
    }

    /// Second-order one-sided derivative estimates at `x = 0` and `x = 1`.
    pub fn endpoint_derivatives(&self) -> (f64, f64) {
        let n = self.xs.len();
        let left = three_point_derivative(
            [self.xs[0], self.xs[1], self.xs[2]],
            [self.values[0], self.values[1], self.values[2]],
        );
        let right = three_point_derivative(
            [self.xs[n - 1], self.xs[n - 2], self.xs[n - 3]],
            [self.values[n - 1], self.values[n - 2], self.values[n - 3]],
        );
        (left, right)
    }
}

/// Derivative at `x[0]` of the quadratic through three points.
fn three_point_derivative(x: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = x[1] - x[0];
    let h2 = x[2] - x[0];
    -(h1 + h2) / (h1 * h2) * f[0] + h2 / (h1 * (h2 - h1)) * f[1] - h1 / (h2 * (h2 - h1)) * f[2]
}

/// A real potential `q` on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Constant(f64),
    Trig(TrigPolynomial),
    Grid(GridSamples),
}

impl PotentialSpec {
    pub fn constant(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self::Constant(value))
        } else {
            Err(SpectralError::InvalidPotential(
                "constant value is not finite".into(),
            ))
        }
    }

    pub fn trig(offset: f64, terms: Vec<TrigTerm>) -> Result<Self> {
        TrigPolynomial::new(offset, terms).map(Self::Trig)
    }

    /// `offset + Σ a_k cos(k pi x)` from `(k, a_k)` pairs.
    pub fn cosine_polynomial(offset: f64, harmonics: &[(u32, f64)]) -> Result<Self> {
        Self::trig(
            offset,
            harmonics
                .iter()
                .map(|&(k, a)| TrigTerm::cos(k, a))
                .collect(),
        )
    }

    pub fn grid(samples: Vec<(f64, f64)>) -> Result<Self> {
        GridSamples::new(samples).map(Self::Grid)
    }

    pub fn value_at(&self, x: f64) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => *v,
            Self::Trig(t) => t.value(x),
            Self::Grid(g) => g.interpolate(x),
        }
    }

    /// `q'(0)` and `q'(1)`; one-sided second-order stencils for grids.
    pub fn endpoint_derivatives(&self) -> (f64, f64) {
        match self {
            Self::Zero | Self::Constant(_) => (0.0, 0.0),
            Self::Trig(t) => (t.derivative(0.0), t.derivative(1.0)),
            Self::Grid(g) => g.endpoint_derivatives(),
        }
    }

    /// Largest harmonic of a finite cosine expansion, `None` otherwise.
    pub fn cosine_bandwidth(&self) -> Option<usize> {
        match self {
            Self::Zero | Self::Constant(_) => Some(0),
            Self::Trig(t) => t.cosine_bandwidth(),
            Self::Grid(_) => None,
        }
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self, Self::Grid(_))
    }

    /// Hypothesis tolerance matched to how the potential is represented.
    pub fn default_tolerance(&self) -> f64 {
        if self.is_analytic() {
            1e-9
        } else {
            1e-6
        }
    }

    /// Exact mean `c_0` (closed form, or exact for the interpolant).
    pub fn mean(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => *v,
            Self::Trig(t) => t.cosine_coefficient(0),
            Self::Grid(g) => g.mean(),
        }
    }

    /// `∫_0^1 q²`.
    pub fn l2_norm_squared(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => v * v,
            Self::Trig(t) if t.cosine_bandwidth().is_some() => {
                t.offset * t.offset
                    + t.terms
                        .iter()
                        .map(|k| 0.5 * k.amplitude * k.amplitude)
                        .sum::<f64>()
            }
            Self::Trig(t) => quadrature::simpson_fn(FINE_POINTS, |i| {
                let v = t.value(i as f64 / (FINE_POINTS - 1) as f64);
                v * v
            }),
            Self::Grid(g) => g.l2_norm_squared(),
        }
    }

    /// `∫_0^1 |q|`.
    pub fn l1_norm(&self) -> f64 {
        match self {
            Self::Zero => 0.0,
            Self::Constant(v) => v.abs(),
            Self::Trig(t) => quadrature::simpson_fn(FINE_POINTS, |i| {
                t.value(i as f64 / (FINE_POINTS - 1) as f64).abs()
            }),
            Self::Grid(g) => g.l1_norm(),
        }
    }

    /// `q(x) + shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        match self {
            Self::Zero | Self::Constant(_) => {
                let v = self.mean() + shift;
                if v == 0.0 {
                    Self::Zero
                } else {
                    Self::Constant(v)
                }
            }
            Self::Trig(t) => Self::Trig(TrigPolynomial {
                offset: t.offset + shift,
                terms: t.terms.clone(),
            }),
            Self::Grid(g) => Self::Grid(GridSamples {
                xs: g.xs.clone(),
                values: g.values.iter().map(|v| v + shift).collect(),
            }),
        }
    }

    /// `q(1 - x)`.
    pub fn reflected(&self) -> Self {
        match self {
            Self::Zero | Self::Constant(_) => self.clone(),
            Self::Trig(t) => Self::Trig(TrigPolynomial {
                offset: t.offset,
                terms: t.terms.iter().map(TrigTerm::reflected).collect(),
            }),
            Self::Grid(g) => {
                let n = g.xs.len();
                let xs = (0..n)
                    .map(|i| match i {
                        0 => 0.0,
                        i if i == n - 1 => 1.0,
                        i => 1.0 - g.xs[n - 1 - i],
                    })
                    .collect();
                let values = g.values.iter().rev().copied().collect();
                Self::Grid(GridSamples { xs, values })
            }
        }
    }
}

/// `q` sampled on `x_i = i / (n_points - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTable {
    values: Vec<f64>,
}

impl PotentialTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        check_grid_size(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(SpectralError::InvalidPotential(
                "table values must be finite".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 / (self.values.len() - 1) as f64
    }

    /// `∫_0^1 q cos(m pi x) dx` by composite Simpson.
    pub fn cosine_coefficient(&self, m: usize) -> f64 {
        CosTable::new(self.n_points()).coefficient(&self.values, m)
    }
}

/// `cos(pi j / N)` for `j < 2N`; `cos(m pi x_i)` is entry `(m i) mod 2N`.
struct CosTable {
    intervals: usize,
    cos: Vec<f64>,
}

impl CosTable {
    fn new(n_points: usize) -> Self {
        let intervals = n_points - 1;
        let cos = (0..2 * intervals)
            .map(|j| (PI * j as f64 / intervals as f64).cos())
            .collect();
        Self { intervals, cos }
    }

    fn coefficient(&self, values: &[f64], m: usize) -> f64 {
        let period = 2 * self.intervals;
        let step = m % period;
        quadrature::simpson_fn(values.len(), |i| values[i] * self.cos[(step * i) % period])
    }
}

/// Cosine coefficients `c_0..c_M` with `c_{-m} = c_m`.
///
/// When `exact_beyond` is set every `c_m` with `|m| > M` is exactly zero;
/// otherwise reading past `M` is an error.
#[derive(Debug, Clone, PartialEq)]
pub struct CosineCoeffs {
    values: Vec<f64>,
    exact_beyond: bool,
}

impl CosineCoeffs {
    pub fn new(values: Vec<f64>, exact_beyond: bool) -> Self {
        assert!(!values.is_empty(), "need at least c_0");
        Self {
            values,
            exact_beyond,
        }
    }

    pub fn max_index(&self) -> usize {
        self.values.len() - 1
    }

    pub fn exact_beyond(&self) -> bool {
        self.exact_beyond
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn c0(&self) -> f64 {
        self.values[0]
    }

    pub fn covers(&self, index: usize) -> bool {
        self.exact_beyond || index <= self.max_index()
    }

    pub fn require(&self, index: usize) -> Result<()> {
        if self.covers(index) {
            Ok(())
        } else {
            Err(SpectralError::InsufficientRange {
                needed: index,
                available: self.max_index(),
            })
        }
    }

    pub fn get(&self, m: i64) -> Result<f64> {
        let k = m.unsigned_abs() as usize;
        match self.values.get(k) {
            Some(&c) => Ok(c),
            None if self.exact_beyond => Ok(0.0),
            None => Err(SpectralError::InsufficientRange {
                needed: k,
                available: self.max_index(),
            }),
        }
    }

    /// `c_m` for an index already checked with [`Self::require`].
    #[inline]
    pub fn at(&self, m: i64) -> f64 {
        let k = m.unsigned_abs() as usize;
        self.values.get(k).copied().unwrap_or(0.0)
    }

    /// Indices in `[-limit, limit]` whose coefficient is nonzero, ascending.
    pub fn support(&self, limit: usize) -> Vec<i64> {
        let limit = limit as i64;
        (-limit..=limit).filter(|&m| self.at(m) != 0.0).collect()
    }

    /// `max |c_k|` over `lo <= k <= hi` (clamped to the stored range).
    pub fn envelope(&self, lo: usize, hi: usize) -> f64 {
        let hi = hi.min(self.max_index());
        if lo > hi {
            return 0.0;
        }
        self.values[lo..=hi]
            .iter()
            .fold(0.0f64, |acc, c| acc.max(c.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisReport {
    pub c0: f64,
    pub endpoint_value_gap: f64,
    pub endpoint_derivative_gap: f64,
    pub l1_norm: f64,
    pub tolerance: f64,
    pub admissible: bool,
}

/// `q̃(x) = (q(x) + q(1-x))/2` and `q̂(x) = (q(x) - q(1-x))/2` on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvenOddPair {
    pub even_part: PotentialTable,
    pub odd_part: PotentialTable,
}

impl EvenOddPair {
    pub fn n_points(&self) -> usize {
        self.even_part.n_points()
    }

    /// `q̃ + q̂` on the grid.
    pub fn reconstruct(&self) -> Vec<f64> {
        self.even_part
            .values()
            .iter()
            .zip(self.odd_part.values())
            .map(|(e, o)| e + o)
            .collect()
    }
}

pub fn evaluate(spec: &PotentialSpec, n_points: usize) -> Result<PotentialTable> {
    check_grid_size(n_points)?;
    let last = (n_points - 1) as f64;
    let values = (0..n_points)
        .map(|i| spec.value_at(i as f64 / last))
        .collect();
    PotentialTable::new(values)
}

/// `c_m = ∫_0^1 q(x) cos(m pi x) dx` for `m = 0..=max_index`.
///
/// Analytic potentials use closed forms; pure cosine expansions are flagged
/// `exact_beyond` and always cover at least their bandwidth. Grid potentials
/// are integrated with composite Simpson on `n_points` nodes, which must be
/// at least `4 * max_index`.
pub fn cosine_coefficients(
    spec: &PotentialSpec,
    max_index: usize,
    n_points: usize,
) -> Result<CosineCoeffs> {
    match spec {
        PotentialSpec::Zero => Ok(CosineCoeffs::new(vec![0.0; max_index + 1], true)),
        PotentialSpec::Constant(v) => {
            let mut c = vec![0.0; max_index + 1];
            c[0] = *v;
            Ok(CosineCoeffs::new(c, true))
        }
        PotentialSpec::Trig(t) => {
            let band = t.cosine_bandwidth();
            let top = max_index.max(band.unwrap_or(0));
            let c = (0..=top).map(|m| t.cosine_coefficient(m)).collect();
            Ok(CosineCoeffs::new(c, band.is_some()))
        }
        PotentialSpec::Grid(_) => {
            check_grid_size(n_points)?;
            if n_points < 4 * max_index {
                return Err(SpectralError::GridTooCoarse {
                    n_points,
                    max_index,
                    required: 4 * max_index,
                });
            }
            let table = evaluate(spec, n_points)?;
            let cos = CosTable::new(n_points);
            let c = (0..=max_index)
                .map(|m| cos.coefficient(table.values(), m))
                .collect();
            Ok(CosineCoeffs::new(c, false))
        }
    }
}

/// Reflection split by index: node `i` pairs with node `n - 1 - i`.
pub fn even_odd_split(table: &PotentialTable) -> EvenOddPair {
    let v = table.values();
    let n = v.len();
    let even = (0..n).map(|i| 0.5 * (v[i] + v[n - 1 - i])).collect();
    let odd = (0..n).map(|i| 0.5 * (v[i] - v[n - 1 - i])).collect();
    EvenOddPair {
        even_part: PotentialTable { values: even },
        odd_part: PotentialTable { values: odd },
    }
}

/// Shift `q` by its mean; returns the zero-mean potential and the removed `c_0`.
pub fn mean_normalize(spec: &PotentialSpec) -> (PotentialSpec, f64) {
    let c0 = spec.mean();
    let normalized = match spec {
        PotentialSpec::Zero | PotentialSpec::Constant(_) => PotentialSpec::Zero,
        PotentialSpec::Trig(t) => {
            let offset = if t.cosine_bandwidth().is_some() {
                0.0
            } else {
                t.offset - c0
            };
            PotentialSpec::Trig(TrigPolynomial {
                offset,
                terms: t.terms.clone(),
            })
        }
        PotentialSpec::Grid(_) => spec.shifted(-c0),
    };
    (normalized, c0)
}

/// Mean, endpoint matching of `q` and `q'`, and `M = ∫|q|`.
pub fn check_hypotheses(spec: &PotentialSpec, tol: f64) -> HypothesisReport {
    let c0 = spec.mean();
    let endpoint_value_gap = (spec.value_at(0.0) - spec.value_at(1.0)).abs();
    let (d0, d1) = spec.endpoint_derivatives();
    let endpoint_derivative_gap = (d0 - d1).abs();
    let admissible = c0.abs() <= tol && endpoint_value_gap <= tol && endpoint_derivative_gap <= tol;
    HypothesisReport {
        c0,
        endpoint_value_gap,
        endpoint_derivative_gap,
        l1_norm: spec.l1_norm(),
        tolerance: tol,
        admissible,
    }
}
