mod args;
mod source;

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use isp_core::bandwidth::{self, BandwidthReport};
use isp_core::experiments::{fit_linear, run_sweep, summarize, RegressionTarget, SweepConfig};
use isp_core::forward::synthesize_measurement;
use isp_core::singular::{build_spectrum, default_horizon};
use isp_core::tsvd::{modal_decompose, pick_truncation, tsvd_reconstruct};
use isp_core::{
    csv, BoundaryData, IspError, ProblemGeometry, SourceField, SourceGrid, TruncationPolicy,
};
use serde_json::json;

use args::{
    BandwidthArgs, Cli, Command, Format, GridArgs, PolicyArg, ReconstructArgs, SpectrumArgs,
    SweepArgs, SynthesizeArgs,
};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ISP_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 bad input, 3 spectrum horizon too short, 4 numerical failure, 1 anything else.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<IspError>()) {
        Some(IspError::Horizon { .. }) => 3,
        Some(err) if err.is_numeric() => 4,
        Some(IspError::Csv { .. }) => 1,
        Some(_) => 2,
        None => 1,
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Bandwidth(a) => bandwidth_cmd(a),
        Command::Sweep(a) => sweep(a),
        Command::Synthesize(a) => synthesize(a),
        Command::Reconstruct(a) => reconstruct(a),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn spectrum(a: SpectrumArgs) -> Result<()> {
    let g = a.geometry.geometry()?;
    let m_max = a.mmax.unwrap_or_else(|| default_horizon(g.kappa0()));
    let table = build_spectrum(&g, m_max)?;
    let text = match a.format {
        Format::Csv => csv::write_spectrum(&csv::spectrum_rows(&table)),
        Format::Json => {
            let rows: Vec<_> = table
                .rows()
                .iter()
                .map(|r| {
                    json!({
                        "m": r.m,
                        "a_m": r.a_m,
                        "log10_abs_h2": r.log_abs_h2 / std::f64::consts::LN_10,
                        "log10_sigma": r.log_sigma / std::f64::consts::LN_10,
                        "sigma": r.sigma,
                    })
                })
                .collect();
            let doc = json!({ "geometry": g, "rows": rows });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
    };
    emit(a.out.as_deref(), &text)?;
    if a.bandwidth {
        let b = bandwidth::bandwidth(&table)?;
        eprintln!("B={b}");
    }
    Ok(())
}

fn bandwidth_line(r: &BandwidthReport) -> String {
    let mut line = format!(
        "B={} B-={} B+={} B~-={} B~+={}",
        r.bandwidth, r.lower, r.upper, r.lower_approx, r.upper_approx
    );
    match r.max_angular_step() {
        Ok(step) => {
            let _ = write!(line, " dtheta<={step:.6}");
        }
        Err(_) => line.push_str(" (no stable band: B- = 0)"),
    }
    if !r.upper_bound_holds {
        line.push_str(" (B exceeds B+)");
    }
    line
}

fn bandwidth_cmd(a: BandwidthArgs) -> Result<()> {
    let g = a.geometry.geometry()?;
    let r = match a.mmax {
        Some(h) => bandwidth::report_with_horizon(&g, h)?,
        None => bandwidth::report(&g)?,
    };
    println!("{}", bandwidth_line(&r));
    if let Some(out) = a.out.as_deref() {
        let text = match a.format {
            Format::Json => serde_json::to_string_pretty(&r)? + "\n",
            Format::Csv => format!(
                "k,r0,r,kappa0,kappa,B,B_minus,B_plus,B_minus_approx,B_plus_approx,horizon\n{},{},{},{},{},{},{},{},{},{},{}\n",
                csv::fmt_f64(g.k()),
                csv::fmt_f64(g.r0()),
                csv::fmt_f64(g.r()),
                csv::fmt_f64(g.kappa0()),
                csv::fmt_f64(g.kappa()),
                r.bandwidth,
                r.lower,
                r.upper,
                r.lower_approx,
                r.upper_approx,
                r.horizon
            ),
        };
        emit(Some(out), &text)?;
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = SweepConfig {
        n_points: a.n,
        kappa_min: a.kappa_min,
        kappa_max: a.kappa_max,
        ratio: a.ratio,
    };
    let records = run_sweep(&config)?;
    let fits = RegressionTarget::ALL
        .iter()
        .map(|&t| fit_linear(&records, t))
        .collect::<isp_core::Result<Vec<_>>>()?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    emit(Some(&a.out.join("sweep.csv")), &csv::write_sweep(&records))?;
    emit(Some(&a.out.join("fits.csv")), &csv::write_fits(&fits))?;

    let s = summarize(&records);
    println!("points={}", records.len());
    println!(
        "mean eps-={:.4} mean eps+={:.4} max|eps-|={} max|eps+|={}",
        s.mean_eps_minus, s.mean_eps_plus, s.max_abs_eps_minus, s.max_abs_eps_plus
    );
    println!(
        "lower violations={} upper violations={}",
        s.lower_violations.len(),
        s.upper_violations.len()
    );
    let fmt_opt = |v: Option<f64>| v.map_or("none".to_string(), |k| format!("{k:.4}"));
    println!(
        "last kappa with relerr>=5%: B-={} B+={} B~+={}",
        fmt_opt(s.last_large_relerr_minus),
        fmt_opt(s.last_large_relerr_plus),
        fmt_opt(s.last_large_relerr_upper_approx)
    );
    for f in &fits {
        println!(
            "fit {}: slope={:.4} intercept={:.4} mae={:.4} std={:.2e}",
            f.target, f.slope, f.intercept, f.mean_abs_error, f.std_dev
        );
    }
    Ok(())
}

fn grid_for(g: &ProblemGeometry, grid: &GridArgs) -> Result<SourceGrid> {
    Ok(SourceGrid::new(g, grid.nr, grid.ntheta)?)
}

fn parse_source(spec: &str) -> Result<Vec<(i64, num_complex::Complex64)>> {
    source::parse_modes(spec).map_err(|e| IspError::InvalidArgument(format!("{e:#}")).into())
}

fn synthesize(a: SynthesizeArgs) -> Result<()> {
    let g = a.geometry.geometry()?;
    let modes = parse_source(&a.source)?;
    let truth = SourceField::from_modes(grid_for(&g, &a.grid)?, &modes)?;
    let data = synthesize_measurement(&truth, a.grid.modes, a.grid.ns, a.noise, a.seed)?;
    emit(a.out.as_deref(), &csv::write_boundary(&data))
}

fn policy(a: &ReconstructArgs) -> TruncationPolicy {
    match a.policy {
        PolicyArg::B => TruncationPolicy::Bandwidth,
        PolicyArg::BMinus => TruncationPolicy::Lower,
        PolicyArg::BPlus => TruncationPolicy::Upper,
        PolicyArg::N => TruncationPolicy::Manual(a.n.unwrap_or(0)),
    }
}

fn reconstruct(a: ReconstructArgs) -> Result<()> {
    let (data, truth): (BoundaryData, Option<SourceField>) = match (&a.data, &a.source) {
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            (csv::read_boundary(&text)?, None)
        }
        (None, Some(spec)) => {
            let g = a.geometry.geometry()?;
            let modes = parse_source(spec)?;
            let truth = SourceField::from_modes(grid_for(&g, &a.grid)?, &modes)?;
            let data = synthesize_measurement(&truth, a.grid.modes, a.grid.ns, a.noise, a.seed)?;
            (data, Some(truth))
        }
        _ => {
            return Err(
                IspError::InvalidArgument("give exactly one of --data and --source".into()).into(),
            )
        }
    };
    let g = *data.geometry();
    let policy = policy(&a);
    let n = pick_truncation(&g, policy)?;
    let coeffs = modal_decompose(&data, n)?;
    let grid = match &truth {
        Some(t) => t.grid().clone(),
        None => grid_for(&g, &a.grid)?,
    };
    let rec = tsvd_reconstruct(&coeffs, n, &grid)?;
    let mut line = match policy {
        TruncationPolicy::Manual(_) => format!("N={n} residual={:.6e}", rec.residual),
        _ => format!("policy={policy} N={n} residual={:.6e}", rec.residual),
    };
    if let Some(t) = &truth {
        let _ = write!(
            line,
            " relative_error={:.6e}",
            rec.source.distance(t) / t.norm()
        );
    }
    println!("{line}");
    if let Some(out) = a.out.as_deref() {
        let text = csv::write_reconstruction(
            &rec.source,
            rec.truncation,
            rec.residual,
            &policy.to_string(),
        );
        emit(Some(out), &text)?;
    }
    Ok(())
}
