//! `elltwist` — vanishing of prime-order twists from the command line.
//!
//! Subcommands: `survey` (sweep conductors, write CSV + checkpoint),
//! `predict` (random-matrix heuristic, optionally against observed data),
//! `lvalue` (one conjugacy class in full detail), `rmt-moment` and `mc-haar`
//! (moment formula and its Monte-Carlo oracle), `check` (built-in identity
//! suite).  Exit codes: 0 success, 2 precision failures or failed checks,
//! 3 configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use elltwist::catalogue::resolve_curve;
use elltwist::dirichlet::{admissible_conductors, conjugacy_classes, factor_conductor, gauss_sums};
use elltwist::lvalue::check_central_value_identity;
use elltwist::rmt::barnes_g_product_at;
use elltwist::survey::{predict_report, read_survey_csv, run_survey, summarize_rows, SurveyConfig};
use elltwist::{
    barnes_g_half, class_l_values, mc_haar_moment, moment_product, table_length_for,
    twist_record, AfeParams, EmbeddingMatrix, Error, RmtModel,
};

#[derive(Parser)]
#[command(
    name = "elltwist",
    version,
    about = "Central values of elliptic-curve L-functions twisted by odd-prime-order characters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep all admissible conductors up to a bound, deciding vanishing for
    /// every conjugacy class and appending records to a CSV.
    Survey {
        /// Curve label, e.g. 11a1.
        #[arg(long)]
        curve: String,
        /// Character order k (odd prime).
        #[arg(long)]
        order: u64,
        /// Conductor bound X.
        #[arg(long)]
        max_cond: u64,
        /// AFE tail bound.
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Checkpoint path (rewritten after every conductor; enables resume).
        #[arg(long)]
        checkpoint: PathBuf,
        /// Worker threads (0 = default pool).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Include conductors divisible by k².
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        include_k_squared: bool,
        /// Treat the bound as m < X instead of m ≤ X.
        #[arg(long)]
        exclusive_bound: bool,
        /// Survey conductors sharing a prime with the curve conductor too
        /// (their classes become error records).
        #[arg(long)]
        include_non_coprime: bool,
        /// Stop after this many conductors (resume later from checkpoint).
        #[arg(long)]
        max_conductors: Option<u64>,
        /// External curve catalogue file consulted before the builtin one.
        #[arg(long)]
        catalogue: Option<PathBuf>,
    },
    /// Print the heuristic vanishing-count prediction as CSV, optionally
    /// with per-window comparison against an observed survey CSV.
    Predict {
        /// Character order k (odd prime).
        #[arg(long)]
        order: u64,
        /// Conductor bound X.
        #[arg(long)]
        max_cond: u64,
        /// The curve constant a_E(−1/2).
        #[arg(long, default_value_t = 1.0)]
        ae_half: f64,
        /// Survey CSV with observed records to compare against.
        #[arg(long)]
        observed: Option<PathBuf>,
    },
    /// Evaluate one conjugacy class: its central values, algebraic
    /// coordinates, rounding residual and verdict.
    Lvalue {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        order: u64,
        /// Conductor of the twisting characters.
        #[arg(long)]
        cond: u64,
        /// Class id within the conductor (as reported by survey CSVs).
        #[arg(long, default_value_t = 0)]
        class: u64,
        #[arg(long, default_value_t = 1e-9)]
        eps: f64,
        #[arg(long)]
        catalogue: Option<PathBuf>,
    },
    /// Keating–Snaith moment M_U(s, N) from the Γ-product formula.
    RmtMoment {
        /// Matrix size N.
        #[arg(long)]
        size: u64,
        /// Moment exponent s (> −1).
        #[arg(long)]
        s: f64,
    },
    /// Monte-Carlo moment of |det(A − I)| over Haar-random U(N).
    McHaar {
        #[arg(long)]
        size: usize,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run the built-in identity and consistency checks.
    Check,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_)
                | Error::Catalogue(_)
                | Error::Checkpoint(_)
                | Error::NoPrimitiveCharacter { .. } => 3,
                Error::InsufficientPrecision(_)
                | Error::RotationInconsistency { .. }
                | Error::SmoothingFailed(_) => 2,
                _ => 1,
            })
        }
    }
}

fn dispatch(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Survey {
            curve,
            order,
            max_cond,
            eps,
            out,
            checkpoint,
            jobs,
            include_k_squared,
            exclusive_bound,
            include_non_coprime,
            max_conductors,
            catalogue,
        } => {
            let mut config = SurveyConfig::new(&curve, order, max_cond, out, checkpoint)?;
            config.eps = eps;
            config.jobs = jobs;
            config.include_k_squared = include_k_squared;
            config.inclusive_bound = !exclusive_bound;
            config.skip_non_coprime = !include_non_coprime;
            config.max_conductors = max_conductors;
            config.catalogue = catalogue;
            config.validate()?;
            let summary = run_survey(&config)?;
            print!("{}", summary.render());
            Ok(if summary.error_records > 0 {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Predict {
            order,
            max_cond,
            ae_half,
            observed,
        } => {
            let model = RmtModel::new(order, max_cond as f64, ae_half)?;
            let summary = match observed {
                Some(path) => Some(summarize_rows(&read_survey_csv(&path)?)?),
                None => None,
            };
            print!("{}", predict_report(order, max_cond, &model, summary.as_ref())?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Lvalue {
            curve,
            order,
            cond,
            class,
            eps,
            catalogue,
        } => {
            let curve = resolve_curve(&curve, catalogue.as_deref())?;
            let conductor = factor_conductor(order, cond)?;
            let classes = conjugacy_classes(order, &conductor)?;
            let class = classes
                .into_iter()
                .find(|c| c.class_id == class)
                .ok_or_else(|| {
                    Error::Config(format!("no class {class} modulo {cond} at order {order}"))
                })?;
            let params = AfeParams::new(eps, 1.0)?;
            let table = curve.coefficients(table_length_for(
                cond,
                curve.conductor,
                eps / 100.0,
                1.3,
            ))?;
            let embedding = EmbeddingMatrix::new(order)?;
            let record = twist_record(&curve, &class, &table, &embedding, &params)?;
            println!(
                "curve={} k={} m={} class={} spec=\"{}\"",
                curve.label, record.k, record.conductor, record.class_id, record.char_spec
            );
            for (i, value) in record.l_values.iter().enumerate() {
                println!("L(1, chi^{}) = {:.12e} + {:.12e} i", i + 1, value.re, value.im);
            }
            let coords = record
                .element
                .coords
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(";");
            println!("n_coords = {coords}");
            println!("residual = {:.6e}", record.residual);
            println!("afe_terms = {}", record.afe_terms);
            println!("vanishing = {}", record.vanishing);
            Ok(ExitCode::SUCCESS)
        }
        Command::RmtMoment { size, s } => {
            println!("M_U({s}, {size}) = {:.12e}", moment_product(s, size)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::McHaar {
            size,
            s,
            samples,
            seed,
        } => {
            let (estimate, stderr) = mc_haar_moment(size, s, samples, seed)?;
            println!(
                "mc_haar N={size} s={s} samples={samples} seed={seed}: \
                 estimate={estimate:.12e} stderr={stderr:.3e}"
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Check => run_checks(),
    }
}

/// A handful of identities that exercise every layer end to end; each is an
/// equality the implementation has no freedom about, so a failure here means
/// the binary cannot be trusted.
fn run_checks() -> Result<ExitCode, Error> {
    let mut failures = 0u32;
    let mut report = |name: &str, metric: f64, limit: f64| {
        let ok = metric.is_finite() && metric < limit;
        println!(
            "check {name}: {} (measured {metric:.3e}, limit {limit:.0e})",
            if ok { "ok" } else { "FAILED" }
        );
        if !ok {
            failures += 1;
        }
    };

    // |τ(χ)|² = m for primitive characters, every order, every conductor.
    let mut worst = 0.0f64;
    for k in [3u64, 5, 7] {
        for conductor in admissible_conductors(k, 200)? {
            for class in conjugacy_classes(k, &conductor)? {
                for tau in gauss_sums(&class.representative).iter().skip(1) {
                    worst = worst.max((tau.norm_sqr() - conductor.m as f64).abs());
                }
            }
        }
    }
    report("gauss-magnitudes", worst, 1e-6);

    let curve = resolve_curve("11a1", None)?;
    let embedding = EmbeddingMatrix::new(3)?;
    let table = curve.coefficients(table_length_for(7, curve.conductor, 1e-11, 1.3))?;

    // The untwisted value through the same machinery: L(1)/Ω = 1/5 for 11a1.
    let trivial = elltwist::CharacterSpec::trivial(3);
    let params = AfeParams::new(1e-9, 1.0)?;
    let untwisted = class_l_values(&curve, &trivial, &table, &params)?[0];
    report(
        "untwisted-anchor",
        (untwisted.re / curve.real_period - 0.2).abs(),
        1e-7,
    );

    // Split invariance: the AFE is exact before truncation.
    let conductor = factor_conductor(3, 7)?;
    let class = &conjugacy_classes(3, &conductor)?[0];
    let at_one = class_l_values(&curve, &class.representative, &table, &params)?;
    let shifted = AfeParams::new(1e-9, 1.3)?;
    let at_alt = class_l_values(&curve, &class.representative, &table, &shifted)?;
    let moved = at_one
        .iter()
        .zip(&at_alt)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    report("split-invariance", moved, 1e-8);

    // Rounding certificate for the same class.
    let record = twist_record(&curve, class, &table, &embedding, &params)?;
    report("lattice-residual", record.residual, 1e-3);

    // Σ_a χ̄(a) λ⁺(a/m) = 2 τ(χ̄) L(1,χ): modular symbols against the AFE.
    let long_table = curve.coefficients(111_000)?;
    let mismatch = check_central_value_identity(&curve, class, &long_table, &params)?;
    report("central-value-identity", mismatch, 5e-2);

    // M_U(2, N) telescopes to N + 1.
    let mut worst = 0.0f64;
    for n in 1..=200u64 {
        let relative = (moment_product(2.0, n)? - (n + 1) as f64).abs() / (n + 1) as f64;
        worst = worst.max(relative);
    }
    report("moment-telescoping", worst, 1e-9);

    // G(1/2) from ζ′(−1) against the defining product.
    report(
        "barnes-product",
        (barnes_g_half() - barnes_g_product_at(-0.5, 10_000)).abs(),
        1e-8,
    );

    if failures == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{failures} check(s) failed");
        Ok(ExitCode::from(2))
    }
}
