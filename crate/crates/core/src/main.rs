//! Batch front-end: parse model files, dispatch computations, emit CSV/JSON
//! artifacts and verification reports.
//!
//! Exit codes: 0 pass, 1 schema error, 2 numeric failure, 3 inconclusive.

use clap::{Parser, Subcommand};
use gspec::error::Error;
use gspec::modelfile;
use gspec::report;
use gspec::spectral::hausdorff_distance;
use gspec::verify::{render_reports, run_suite, shipped_models, Suite};
use num_complex::Complex64;
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gspec", version, about = "spectral workbench for twisted groupoid operators")]
struct Cli {
    /// Cap the worker thread count (also exported to the BLAS backend).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue cloud of one truncation window.
    Spectrum {
        model: PathBuf,
        #[arg(long)]
        window: usize,
        #[arg(long, default_value = "spectrum.csv")]
        out: PathBuf,
    },
    /// Essential spectrum via the boundary formula, the truncation oracle,
    /// or both (with their Hausdorff distance in the report).
    Essential {
        model: PathBuf,
        #[arg(long, default_value = "boundary")]
        method: String,
        #[arg(long, default_value = "essential")]
        out: PathBuf,
    },
    /// Essential numerical range polygon.
    Numrange {
        model: PathBuf,
        #[arg(long)]
        angles: Option<usize>,
        #[arg(long, default_value = "numrange.csv")]
        out: PathBuf,
    },
    /// Fredholm verdict for H - lambda with per-quasi-orbit certificates.
    Fredholm {
        model: PathBuf,
        /// Complex number "a+bi" or "a".
        #[arg(long)]
        lambda: String,
        #[arg(long, default_value = "fredholm.json")]
        out: PathBuf,
    },
    /// Non-propagation bounds: neighborhood search and time-uniform check.
    Propagate {
        model: PathBuf,
        #[arg(long, default_value = "propagate")]
        out: PathBuf,
    },
    /// Verification suites over the shipped models.
    Verify {
        /// cocycle | extension | morphism | gauge | decomposition | all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value = "verify.json")]
        out: PathBuf,
    },
}

fn parse_lambda(text: &str) -> Result<Complex64, Error> {
    let t = text.trim().replace(' ', "");
    if let Some(stripped) = t.strip_suffix('i') {
        // split the imaginary part at the last +/- that is not an exponent sign
        let bytes = stripped.as_bytes();
        let mut split = None;
        for k in (1..bytes.len()).rev() {
            let c = bytes[k] as char;
            if (c == '+' || c == '-') && bytes[k - 1] as char != 'e' && bytes[k - 1] as char != 'E' {
                split = Some(k);
                break;
            }
        }
        if let Some(k) = split {
            let re: f64 = stripped[..k]
                .parse()
                .map_err(|_| Error::Schema(format!("bad lambda {text}")))?;
            let im_text = &stripped[k..];
            let im: f64 = if im_text == "+" {
                1.0
            } else if im_text == "-" {
                -1.0
            } else {
                im_text.parse().map_err(|_| Error::Schema(format!("bad lambda {text}")))?
            };
            return Ok(Complex64::new(re, im));
        }
        let im: f64 = if stripped.is_empty() {
            1.0
        } else {
            stripped.parse().map_err(|_| Error::Schema(format!("bad lambda {text}")))?
        };
        return Ok(Complex64::new(0.0, im));
    }
    let re: f64 = t.parse().map_err(|_| Error::Schema(format!("bad lambda {text}")))?;
    Ok(Complex64::new(re, 0.0))
}

#[derive(Serialize)]
struct EssentialReport {
    model: String,
    method: String,
    hausdorff: Option<f64>,
    boundary_points: Option<usize>,
    truncation_points: Option<usize>,
}

fn run(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.threads {
        // the BLAS pool reads this at first use; the rayon pool is explicit
        std::env::set_var("OPENBLAS_NUM_THREADS", n.to_string());
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    match cli.command {
        Command::Spectrum { model, window, out } => {
            let loaded = modelfile::load_path(&model)?;
            let cloud = loaded.model.spectrum_at_window(window)?;
            report::write_spectral_csv(&out, &cloud, &[])?;
            println!("{} eigenvalues -> {}", cloud.len(), out.display());
        }
        Command::Essential { model, method, out } => {
            let loaded = modelfile::load_path(&model)?;
            let m = &loaded.model;
            let (mut boundary, mut truncation) = (None, None);
            match method.as_str() {
                "boundary" => boundary = Some(m.essential_spectrum_boundary()?),
                "truncation" => {
                    truncation = Some(m.essential_spectrum_truncation(&loaded.truncation)?)
                }
                "both" => {
                    boundary = Some(m.essential_spectrum_boundary()?);
                    truncation = Some(m.essential_spectrum_truncation(&loaded.truncation)?);
                }
                other => {
                    return Err(Error::Schema(format!(
                        "unknown method {other}; expected boundary|truncation|both"
                    )))
                }
            }
            let hausdorff = match (&boundary, &truncation) {
                (Some(b), Some(t)) => Some(hausdorff_distance(b, t)?),
                _ => None,
            };
            if let Some(b) = &boundary {
                let path = out.with_extension("boundary.csv");
                report::write_spectral_csv(&path, b, &[])?;
                println!("boundary cloud ({} pts) -> {}", b.len(), path.display());
            }
            if let Some(t) = &truncation {
                let path = out.with_extension("truncation.csv");
                report::write_spectral_csv(
                    &path,
                    t,
                    &[("cluster_tol", loaded.truncation.cluster_tol)],
                )?;
                println!("truncation cloud ({} pts) -> {}", t.len(), path.display());
            }
            let rep = EssentialReport {
                model: m.name.clone(),
                method,
                hausdorff,
                boundary_points: boundary.as_ref().map(|s| s.len()),
                truncation_points: truncation.as_ref().map(|s| s.len()),
            };
            let path = out.with_extension("report.json");
            report::write_json(&path, &rep)?;
            if let Some(d) = hausdorff {
                println!("hausdorff(boundary, truncation) = {d}");
            }
        }
        Command::Numrange { model, angles, out } => {
            let loaded = modelfile::load_path(&model)?;
            let n_angles = angles.unwrap_or(loaded.angles);
            let region = loaded.model.essential_numerical_range(n_angles)?;
            #[derive(Serialize)]
            struct Meta {
                model: String,
                angles: usize,
                vertices: usize,
            }
            report::write_region_csv(
                &out,
                &region,
                &Meta {
                    model: loaded.model.name.clone(),
                    angles: n_angles,
                    vertices: region.vertices().len(),
                },
            )?;
            println!("{} hull vertices -> {}", region.vertices().len(), out.display());
        }
        Command::Fredholm { model, lambda, out } => {
            let loaded = modelfile::load_path(&model)?;
            let z = parse_lambda(&lambda)?;
            let rep = loaded.model.fredholm_check(z)?;
            report::write_json(&out, &rep)?;
            println!(
                "lambda = {lambda}: {} (margin {})",
                if rep.fredholm { "Fredholm" } else { "not Fredholm" },
                rep.margin
            );
        }
        Command::Propagate { model, out } => {
            let loaded = modelfile::load_path(&model)?;
            let spec = loaded.propagation.as_ref().ok_or_else(|| {
                Error::Schema("model file has no [propagation] block".into())
            })?;
            let rep = loaded.model.propagate(&spec.options())?;
            report::write_profile_csv(
                &out.with_extension("profile.csv"),
                ("n0", "bound"),
                &rep.profile,
            )?;
            report::write_json(&out.with_extension("report.json"), &rep)?;
            match (&rep.found_param, rep.inconclusive) {
                (Some(p), _) => println!(
                    "bound {:?} at n0 = {p}; time-uniform max {:?}",
                    rep.static_bound, rep.time_uniform_max
                ),
                (None, true) => {
                    println!("inconclusive at this scale");
                    return Err(Error::Inconclusive(
                        "neighborhood search exhausted the materialized lattice".into(),
                    ));
                }
                _ => {}
            }
        }
        Command::Verify { suite, out } => {
            let suites = Suite::parse(&suite)
                .ok_or_else(|| Error::Schema(format!("unknown suite {suite}")))?;
            let models = shipped_models()?;
            let mut reports = Vec::new();
            for s in suites {
                reports.push(run_suite(s, &models)?);
            }
            let (body, ok) = render_reports(&reports);
            std::fs::write(&out, &body)?;
            for r in &reports {
                for c in &r.checks {
                    println!(
                        "{} {} (residual {:e} <= {:e})",
                        if c.pass { "PASS" } else { "FAIL" },
                        c.name,
                        c.residual,
                        c.tolerance
                    );
                }
            }
            if !ok {
                return Err(Error::InvalidInput("verification suite failed".into()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
