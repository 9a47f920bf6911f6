//! Line-oriented `key = value` potential files.
//!
//! ```text
//! # q(x) = 3 + cos 2πx - 0.5 sin 3πx
//! type = trig
//! value = 3
//! term = cos:2:1
//! term = sin:3:-0.5
//! ```
//!
//! `type` is one of `trig`, `grid`, `zero`, `constant`. Constants take
//! `value = V`; grids take repeated `sample = X,V`. `#` starts a comment.

use std::fmt;
use std::str::FromStr;

use super::{Basis, PotentialSpec, TrigTerm};
use crate::error::SpectralError;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Kind {
    Trig,
    Grid,
    Zero,
    Constant,
}

fn parse_error(line: usize, message: impl Into<String>) -> SpectralError {
    SpectralError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_real(line: usize, s: &str) -> Result<f64, SpectralError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| parse_error(line, format!("not a number: {:?}", s.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(parse_error(line, format!("not finite: {:?}", s.trim())))
    }
}

fn parse_term(line: usize, s: &str) -> Result<TrigTerm, SpectralError> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let [basis, k, amp] = parts[..] else {
        return Err(parse_error(
            line,
            "term must look like cos:K:AMP or sin:K:AMP",
        ));
    };
    let basis = match basis {
        "cos" => Basis::Cos,
        "sin" => Basis::Sin,
        other => return Err(parse_error(line, format!("unknown basis {other:?}"))),
    };
    let harmonic: u32 = k.parse().map_err(|_| {
        parse_error(
            line,
            format!("harmonic must be a positive integer, got {k:?}"),
        )
    })?;
    if harmonic == 0 {
        return Err(parse_error(line, "harmonic must be positive"));
    }
    Ok(TrigTerm {
        basis,
        harmonic,
        amplitude: parse_real(line, amp)?,
    })
}

impl FromStr for PotentialSpec {
    type Err = SpectralError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut kind: Option<Kind> = None;
        let mut value: Option<f64> = None;
        let mut terms = Vec::new();
        let mut samples = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, val) = content
                .split_once('=')
                .ok_or_else(|| parse_error(line, "expected key = value"))?;
            let (key, val) = (key.trim(), val.trim());
            match key {
                "type" => {
                    if kind.is_some() {
                        return Err(parse_error(line, "duplicate type"));
                    }
                    kind = Some(match val {
                        "trig" => Kind::Trig,
                        "grid" => Kind::Grid,
                        "zero" => Kind::Zero,
                        "constant" => Kind::Constant,
                        other => return Err(parse_error(line, format!("unknown type {other:?}"))),
                    });
                }
                "value" => {
                    if value.is_some() {
                        return Err(parse_error(line, "duplicate value"));
                    }
                    value = Some(parse_real(line, val)?);
                }
                "term" => terms.push((line, parse_term(line, val)?)),
                "sample" => {
                    let (x, v) = val
                        .split_once(',')
                        .ok_or_else(|| parse_error(line, "sample must look like X,V"))?;
                    samples.push((line, (parse_real(line, x)?, parse_real(line, v)?)));
                }
                other => return Err(parse_error(line, format!("unknown key {other:?}"))),
            }
        }

        let kind = kind.ok_or_else(|| parse_error(0, "missing type"))?;
        let stray = |allowed_terms: bool, allowed_samples: bool, allowed_value: bool| {
            if !allowed_terms {
                if let Some((line, _)) = terms.first() {
                    return Err(parse_error(*line, "term is only valid for type = trig"));
                }
            }
            if !allowed_samples {
                if let Some((line, _)) = samples.first() {
                    return Err(parse_error(*line, "sample is only valid for type = grid"));
                }
            }
            if !allowed_value && value.is_some() {
                return Err(parse_error(0, "value is not valid for this type"));
            }
            Ok(())
        };

        match kind {
            Kind::Zero => {
                stray(false, false, false)?;
                Ok(PotentialSpec::Zero)
            }
            Kind::Constant => {
                stray(false, false, true)?;
                let v = value.ok_or_else(|| parse_error(0, "constant needs value = V"))?;
                PotentialSpec::constant(v)
            }
            Kind::Trig => {
                stray(true, false, true)?;
                PotentialSpec::trig(
                    value.unwrap_or(0.0),
                    terms.into_iter().map(|(_, t)| t).collect(),
                )
            }
            Kind::Grid => {
                stray(false, true, false)?;
                PotentialSpec::grid(samples.into_iter().map(|(_, s)| s).collect())
            }
        }
    }
}

/// Canonical text form; reparses to an identical spec.
impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Zero => writeln!(f, "type = zero"),
            PotentialSpec::Constant(v) => {
                writeln!(f, "type = constant")?;
                writeln!(f, "value = {v:?}")
            }
            PotentialSpec::Trig(t) => {
                writeln!(f, "type = trig")?;
                if t.offset() != 0.0 {
                    writeln!(f, "value = {:?}", t.offset())?;
                }
                for term in t.terms() {
                    let basis = match term.basis {
                        Basis::Cos => "cos",
                        Basis::Sin => "sin",
                    };
                    writeln!(f, "term = {basis}:{}:{:?}", term.harmonic, term.amplitude)?;
                }
                Ok(())
            }
            PotentialSpec::Grid(g) => {
                writeln!(f, "type = grid")?;
                for (x, v) in g.samples() {
                    writeln!(f, "sample = {x:?},{v:?}")?;
                }
                Ok(())
            }
        }
    }
}
