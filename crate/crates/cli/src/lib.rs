//! `dirspec`: batch front end for the eigenvalue solvers, the asymptotic
//! expansion and the verification harness.
//!
//! Exit status is 0 on success, 1 when a check fails (`ambarzumyan --expect`
//! mismatch or a failed `lemmas` run), and 2 on usage or input errors.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spectral_core::asymptotics::{
    expansion_at, lemma1_expansion, ExpansionOptions, DEFAULT_CUTOFF, DEFAULT_M_MIN,
};
use spectral_core::harness::{
    ambarzumyan_deviation_with, compare_spectrum_vs_expansion, default_deviation_tol, describe,
    lemma_checks, HarnessOptions, LemmaThresholds, Table, Verdict,
};
use spectral_core::potential::cosine_coefficients;
use spectral_core::quadrature::{points_for_index, DEFAULT_POINTS};
use spectral_core::solver::{
    default_basis, default_pad, solve_eigenvalue_shooting, solve_spectrum_galerkin_with,
    GalerkinOptions,
};
use spectral_core::{PotentialSpec, SpectralError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_MODES: usize = 8;
const DEFAULT_M_MAX: usize = 32;

#[derive(Debug, Parser)]
#[command(
    name = "dirspec",
    version,
    about = "Dirichlet spectra of -y'' + q y = λ y on [0, 1]"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Summary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Galerkin,
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    Zero,
    Nonzero,
}

#[derive(Debug, Args)]
struct Common {
    /// Potential description file
    #[arg(long, value_name = "PATH")]
    potential: PathBuf,
    /// Write the report here instead of standard output
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Galerkin basis size [default: max(256, 8 * modes)]
    #[arg(long, value_name = "N", value_parser = clap::value_parser!(u32).range(1..))]
    basis: Option<u32>,
    /// Truncation of the expansion sums
    #[arg(long, value_name = "C", default_value_t = DEFAULT_CUTOFF as u32,
          value_parser = clap::value_parser!(u32).range(1..))]
    cutoff: u32,
    /// Tolerance (ambarzumyan verdict; hypothesis check elsewhere)
    #[arg(long, value_name = "T", value_parser = positive_real)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Also write the parsed potential in canonical form
    #[arg(long, value_name = "PATH")]
    dump_spec: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExpansionArgs {
    /// Highest mode
    #[arg(long, value_name = "M", default_value_t = DEFAULT_MODES as u32,
          value_parser = clap::value_parser!(u32).range(1..))]
    modes: u32,
    /// Lowest mode treated as asymptotic
    #[arg(long, value_name = "M", default_value_t = DEFAULT_M_MIN as u32,
          value_parser = clap::value_parser!(u32).range(1..))]
    m_min: u32,
    /// Re-evaluate the sums once at the first total
    #[arg(long)]
    refine: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lowest eigenvalues
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_MODES as u32,
              value_parser = clap::value_parser!(u32).range(1..))]
        modes: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Galerkin)]
        method: MethodArg,
    },
    /// Cosine coefficients c_0..c_M
    Coeffs {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_MODES as u32)]
        max_m: u32,
    },
    /// Expansion terms for each mode
    Expand {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        expansion: ExpansionArgs,
        /// Evaluate the sums at the computed eigenvalue instead of the first-order value
        #[arg(long)]
        at_eigenvalue: bool,
    },
    /// Solver against first-order and full expansion
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        expansion: ExpansionArgs,
        /// Run even if the potential fails the endpoint conditions
        #[arg(long)]
        allow_inadmissible: bool,
    },
    /// Distance of the spectrum from (mπ)²
    Ambarzumyan {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_M_MAX as u32,
              value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
        /// Exit with status 1 unless the verdict matches
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Size and decay checks of the expansion terms
    Lemmas {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_M_MIN as u32,
              value_parser = clap::value_parser!(u32).range(1..))]
        m_min: u32,
        #[arg(long, value_name = "M", default_value_t = DEFAULT_M_MAX as u32,
              value_parser = clap::value_parser!(u32).range(1..))]
        m_max: u32,
        #[arg(long)]
        allow_inadmissible: bool,
    },
}

fn positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s}"))?;
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(format!("must be positive and finite: {s}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Spectrum,
    Coeffs,
    Expand,
    Compare,
    Ambarzumyan,
    Lemmas,
}

/// Validated settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub potential_path: PathBuf,
    pub out_path: Option<PathBuf>,
    pub dump_spec: Option<PathBuf>,
    pub format: Format,
    /// Highest mode: `--modes`, `--m-max` or `--max-m` depending on the command.
    pub m_max: usize,
    pub m_min: usize,
    pub n_basis: Option<usize>,
    pub cutoff: usize,
    pub method: MethodArg,
    pub tol: Option<f64>,
    pub expect: Option<Expect>,
    pub refine: bool,
    pub at_eigenvalue: bool,
    pub allow_inadmissible: bool,
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, String> {
        let base = |command, common: Common| RunConfig {
            command,
            potential_path: common.potential,
            out_path: common.out,
            dump_spec: common.dump_spec,
            format: common.format,
            m_max: DEFAULT_MODES,
            m_min: 1,
            n_basis: common.basis.map(|b| b as usize),
            cutoff: common.cutoff as usize,
            method: MethodArg::Galerkin,
            tol: common.tol,
            expect: None,
            refine: false,
            at_eigenvalue: false,
            allow_inadmissible: false,
        };
        let config = match cli.command {
            Command::Spectrum {
                common,
                modes,
                method,
            } => RunConfig {
                m_max: modes as usize,
                method,
                ..base(CommandKind::Spectrum, common)
            },
            Command::Coeffs { common, max_m } => RunConfig {
                m_max: max_m as usize,
                m_min: 0,
                ..base(CommandKind::Coeffs, common)
            },
            Command::Expand {
                common,
                expansion,
                at_eigenvalue,
            } => RunConfig {
                m_max: expansion.modes as usize,
                m_min: expansion.m_min as usize,
                refine: expansion.refine,
                at_eigenvalue,
                ..base(CommandKind::Expand, common)
            },
            Command::Compare {
                common,
                expansion,
                allow_inadmissible,
            } => RunConfig {
                m_max: expansion.modes as usize,
                m_min: expansion.m_min as usize,
                refine: expansion.refine,
                allow_inadmissible,
                ..base(CommandKind::Compare, common)
            },
            Command::Ambarzumyan {
                common,
                m_max,
                expect,
            } => RunConfig {
                m_max: m_max as usize,
                expect,
                ..base(CommandKind::Ambarzumyan, common)
            },
            Command::Lemmas {
                common,
                m_min,
                m_max,
                allow_inadmissible,
            } => RunConfig {
                m_max: m_max as usize,
                m_min: m_min as usize,
                allow_inadmissible,
                ..base(CommandKind::Lemmas, common)
            },
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        if self.m_min > self.m_max {
            return Err(format!(
                "lowest mode {} exceeds highest mode {}",
                self.m_min, self.m_max
            ));
        }
        if let Some(n) = self.n_basis {
            if self.command != CommandKind::Coeffs && n < 4 * self.m_max {
                return Err(format!(
                    "--basis {n} is too small for {} modes (need at least {})",
                    self.m_max,
                    4 * self.m_max
                ));
            }
        }
        if matches!(
            self.command,
            CommandKind::Expand | CommandKind::Compare | CommandKind::Lemmas
        ) && self.cutoff < 2 * self.m_max
        {
            return Err(format!(
                "--cutoff {} must be at least twice the highest mode ({})",
                self.cutoff,
                2 * self.m_max
            ));
        }
        Ok(())
    }

    fn expansion(&self) -> ExpansionOptions {
        ExpansionOptions {
            cutoff: self.cutoff,
            refine: self.refine,
            m_min: self.m_min,
            ..Default::default()
        }
    }

    fn harness(&self) -> HarnessOptions {
        HarnessOptions {
            n_basis: self.n_basis,
            expansion: self.expansion(),
            allow_inadmissible: self.allow_inadmissible,
            hypothesis_tol: self.tol,
            n_points: None,
        }
    }
}

/// A finished report and whether its checks held.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub table: Table,
    pub checks_passed: bool,
}

pub fn format_report(report: &Report, style: Format) -> String {
    match style {
        Format::Csv => report.table.to_csv(),
        Format::Summary => report.table.to_summary(),
    }
}

pub fn load_potential(path: &std::path::Path) -> Result<PotentialSpec, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    text.parse()
        .map_err(|e: SpectralError| format!("{}: {e}", path.display()))
}

fn spectrum_report(spec: &PotentialSpec, cfg: &RunConfig) -> Result<Report, SpectralError> {
    let modes = cfg.m_max;
    let mut table = match cfg.method {
        MethodArg::Galerkin => {
            let s = solve_spectrum_galerkin_with(
                spec,
                modes,
                &GalerkinOptions {
                    n_basis: cfg.n_basis,
                    estimate_error: true,
                    n_points: None,
                },
            )?;
            let mut t = Table::new("eigenvalues", &["m", "lambda", "deviation", "est_error"])
                .meta("method", "galerkin")
                .meta("n_basis", s.n_basis);
            for (i, (lam, err)) in s.eigenvalues.iter().zip(&s.est_error).enumerate() {
                let w = (i + 1) as f64 * std::f64::consts::PI;
                t.push(vec![
                    (i + 1).into(),
                    (*lam).into(),
                    (lam - w * w).into(),
                    (*err).into(),
                ]);
            }
            t
        }
        MethodArg::Shooting => {
            let pad = default_pad(spec);
            let mut t = Table::new("eigenvalues", &["m", "lambda", "deviation"])
                .meta("method", "shooting")
                .meta("bracket_pad", pad);
            for m in 1..=modes {
                let lam = solve_eigenvalue_shooting(spec, m, pad)?;
                let w = m as f64 * std::f64::consts::PI;
                t.push(vec![m.into(), lam.into(), (lam - w * w).into()]);
            }
            t
        }
    };
    table
        .meta
        .insert(0, ("potential".into(), describe(spec).into()));
    Ok(Report {
        table,
        checks_passed: true,
    })
}

fn coeffs_report(spec: &PotentialSpec, cfg: &RunConfig) -> Result<Report, SpectralError> {
    let n_points = points_for_index(cfg.m_max, DEFAULT_POINTS);
    let c = cosine_coefficients(spec, cfg.m_max, n_points)?;
    let mut t = Table::new("cosine coefficients", &["m", "c_m"])
        .meta("potential", describe(spec))
        .meta("exact", if c.exact_beyond() { "yes" } else { "no" });
    if !spec.is_analytic() {
        t = t.meta("n_points", n_points);
    }
    for m in 0..=cfg.m_max {
        t.push(vec![m.into(), c.at(m as i64).into()]);
    }
    Ok(Report {
        table: t,
        checks_passed: true,
    })
}

fn expand_report(spec: &PotentialSpec, cfg: &RunConfig) -> Result<Report, SpectralError> {
    let opts = cfg.expansion();
    let range = opts.coefficient_range(cfg.m_max);
    let coeffs = cosine_coefficients(spec, range, points_for_index(range, DEFAULT_POINTS))?;
    let spectrum = if cfg.at_eigenvalue {
        let n_basis = cfg.n_basis.unwrap_or_else(|| default_basis(cfg.m_max));
        Some(solve_spectrum_galerkin_with(
            spec,
            cfg.m_max,
            &GalerkinOptions {
                n_basis: Some(n_basis),
                ..Default::default()
            },
        )?)
    } else {
        None
    };
    let mut t = Table::new(
        "expansion terms",
        &[
            "m",
            "base",
            "c0",
            "minus_c2m",
            "a1",
            "b1",
            "a2",
            "b2",
            "total",
            "lambda_seed",
            "lambda_eval",
            "tail_bound",
        ],
    )
    .meta("potential", describe(spec))
    .meta("cutoff", cfg.cutoff)
    .meta(
        "evaluated_at",
        match (&spectrum, cfg.refine) {
            (Some(_), _) => "galerkin eigenvalue",
            (None, true) => "refined first-order value",
            (None, false) => "first-order value",
        },
    );
    for m in cfg.m_min..=cfg.m_max {
        let e = match &spectrum {
            Some(s) => expansion_at(m, s.eigenvalues[m - 1], &coeffs, &opts)?,
            None => lemma1_expansion(m, &coeffs, &opts)?,
        };
        t.push(vec![
            m.into(),
            e.base.into(),
            e.c0.into(),
            e.minus_c2m.into(),
            e.a1.into(),
            e.b1.into(),
            e.a2.into(),
            e.b2.into(),
            e.total.into(),
            e.lambda_seed.into(),
            e.lambda_eval.into(),
            e.tail_bound.into(),
        ]);
    }
    Ok(Report {
        table: t,
        checks_passed: true,
    })
}

fn execute(spec: &PotentialSpec, cfg: &RunConfig) -> Result<Report, SpectralError> {
    match cfg.command {
        CommandKind::Spectrum => spectrum_report(spec, cfg),
        CommandKind::Coeffs => coeffs_report(spec, cfg),
        CommandKind::Expand => expand_report(spec, cfg),
        CommandKind::Compare => {
            let r = compare_spectrum_vs_expansion(spec, cfg.m_min..=cfg.m_max, &cfg.harness())?;
            Ok(Report {
                table: r.to_table(),
                checks_passed: true,
            })
        }
        CommandKind::Ambarzumyan => {
            let tol = cfg.tol.unwrap_or_else(|| default_deviation_tol(cfg.m_max));
            let r = ambarzumyan_deviation_with(spec, cfg.m_max, Some(tol), cfg.n_basis)?;
            let want = cfg.expect.map(|e| match e {
                Expect::Zero => Verdict::ZeroPotential,
                Expect::Nonzero => Verdict::NonzeroPotential,
            });
            let mut table = r.to_table();
            if let Some(ratio) = r.limit_ratio() {
                table = table.meta("limit_ratio", ratio);
            }
            if let Some(w) = want {
                table = table.meta("expected", w.name());
            }
            Ok(Report {
                table,
                checks_passed: want.is_none_or(|w| w == r.verdict),
            })
        }
        CommandKind::Lemmas => {
            let r = lemma_checks(
                spec,
                cfg.m_min..=cfg.m_max,
                &cfg.harness(),
                &LemmaThresholds::default(),
            )?;
            Ok(Report {
                table: r.to_table(),
                checks_passed: r.passed(),
            })
        }
    }
}

fn write_output(path: Option<&std::path::Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| format!("cannot write output: {e}"))
        }
    }
}

/// Runs a validated configuration and returns the exit status.
pub fn run(cfg: &RunConfig) -> i32 {
    let spec = match load_potential(&cfg.potential_path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Some(path) = &cfg.dump_spec {
        if let Err(e) = write_output(Some(path), &spec.to_string()) {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    }
    let report = match execute(&spec, cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_output(cfg.out_path.as_deref(), &format_report(&report, cfg.format)) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if report.checks_passed {
        EXIT_OK
    } else {
        eprintln!("check failed");
        EXIT_CHECK_FAILED
    }
}

/// Parses `argv` (program name first) and runs exactly one command.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(cfg) => run(&cfg),
        Err(msg) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> Result<RunConfig, String> {
        let cli = Cli::try_parse_from(std::iter::once("dirspec").chain(args.iter().copied()))
            .map_err(|e| e.to_string())?;
        RunConfig::from_cli(cli)
    }

    #[test]
    fn defaults() {
        let c = config(&["spectrum", "--potential", "q.pot"]).unwrap();
        assert_eq!(c.m_max, 8);
        assert_eq!(c.cutoff, 512);
        assert_eq!(c.method, MethodArg::Galerkin);
        assert_eq!(c.format, Format::Csv);
        let c = config(&["ambarzumyan", "--potential", "q.pot"]).unwrap();
        assert_eq!(c.m_max, 32);
        let c = config(&["compare", "--potential", "q.pot", "--modes", "20"]).unwrap();
        assert_eq!((c.m_min, c.m_max), (8, 20));
    }

    #[test]
    fn rejects_bad_settings() {
        for args in [
            vec!["spectrum"],
            vec!["spectrum", "--potential", "q.pot", "--modes", "0"],
            vec!["spectrum", "--potential", "q.pot", "--colour", "red"],
            vec!["spectrum", "--potential", "q.pot", "--tol", "-1"],
            vec![
                "spectrum",
                "--potential",
                "q.pot",
                "--modes",
                "100",
                "--basis",
                "64",
            ],
            vec!["expand", "--potential", "q.pot", "--modes", "4"],
            vec!["expand", "--potential", "q.pot", "--modes", "400"],
            vec!["expand", "--potential", "q.pot", "--method", "shooting"],
            vec!["ambarzumyan", "--potential", "q.pot", "--expect", "maybe"],
        ] {
            assert!(config(&args).is_err(), "accepted {args:?}");
        }
    }

    #[test]
    fn header_only_for_empty_table() {
        let r = Report {
            table: Table::new("empty", &["m", "lambda"]),
            checks_passed: true,
        };
        assert_eq!(format_report(&r, Format::Csv), "m,lambda\n");
    }
}
