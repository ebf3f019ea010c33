use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use pv_vacuum::exec::configure_threads;
use pv_vacuum::field::io::{read_scalar, read_vector, write_scalar, write_slice_csv, write_vector};
use pv_vacuum::field::{field_norms, FieldWarning, FourPotential, Grid3, ScalarField, SourceDensities, VectorField};
use pv_vacuum::kernel::{KernelTable, GAP_TOL, M_TOL, U_TOL};
use pv_vacuum::solver::{
    solve_linear_response, solve_self_consistent, solve_self_consistent_from, SaddleConfig, SolveStatus,
};
use pv_vacuum::verify::{self, Tier};
use pv_vacuum::Execution;
use serde_json::{json, Value};

use crate::config::{RunConfig, SourceSpec};
use crate::error::CliError;

pub fn configure_execution(threads: usize) -> Result<(), CliError> {
    if threads == 1 {
        Execution::set_global(Execution::Sequential);
        return Ok(());
    }
    Execution::set_global(Execution::Parallel);
    if threads > 1 && !configure_threads(threads) {
        return Err(CliError::Config(format!("could not start a pool of {threads} threads")));
    }
    Ok(())
}

fn out_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    fs::create_dir_all(&cfg.output_dir)?;
    Ok(&cfg.output_dir)
}

fn write_json(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value).map_err(pv_vacuum::VacuumError::from)?;
    writeln!(f)?;
    Ok(())
}

fn names(paths: &[PathBuf]) -> Vec<String> {
    paths
        .iter()
        .map(|p| p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default())
        .collect()
}

pub fn scheme(cfg: &RunConfig) -> Result<(), CliError> {
    let s = cfg.scheme()?;
    let (sum_c, sum_cm2) = s.identity_residuals();
    let body = json!({
        "scheme": s,
        "m_zero": s.m_zero(),
        "identity_residuals": { "sum_c": sum_c, "sum_c_m2_over_m2sq": sum_cm2 },
        "config": cfg.to_json(),
    });
    println!("{}", serde_json::to_string_pretty(&body).expect("serializes"));
    write_json(&out_dir(cfg)?.join("scheme.json"), &body)
}

fn table(cfg: &RunConfig) -> Result<KernelTable, CliError> {
    Ok(KernelTable::tabulate(&cfg.scheme()?, cfg.k_max, cfg.points)?)
}

fn tolerances() -> Value {
    json!({ "m_kernel": M_TOL, "uehling": U_TOL, "gap": GAP_TOL })
}

pub fn kernel(cfg: &RunConfig) -> Result<(), CliError> {
    let t = table(cfg)?;
    let dir = out_dir(cfg)?;
    let csv = dir.join("kernel.csv");
    t.write_csv(fs::File::create(&csv)?)?;
    write_json(
        &dir.join("kernel.json"),
        &json!({
            "artifacts": names(&[csv.clone()]),
            "metadata": t.metadata(),
            "tolerances": tolerances(),
            "config": cfg.to_json(),
        }),
    )?;
    println!("wrote {}", csv.display());
    Ok(())
}

pub fn uehling(cfg: &RunConfig) -> Result<(), CliError> {
    let t = table(cfg)?;
    let dir = out_dir(cfg)?;
    let csv = dir.join("uehling.csv");
    let mut f = fs::File::create(&csv)?;
    writeln!(f, "k,U,gap")?;
    for i in 0..t.k_values.len() {
        writeln!(f, "{:.17e},{:.17e},{:.17e}", t.k_values[i], t.u_values[i], t.gap_values[i])?;
    }
    let max_gap = t.gap_values.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    write_json(
        &dir.join("uehling.json"),
        &json!({
            "artifacts": names(&[csv.clone()]),
            "reference_mass": cfg.masses[0],
            "max_abs_gap": max_gap,
            "tolerances": tolerances(),
            "config": cfg.to_json(),
        }),
    )?;
    println!("wrote {} (max |gap| = {max_gap:.3e})", csv.display());
    Ok(())
}

fn report_warnings(w: &[FieldWarning]) {
    for x in w {
        eprintln!("warning: projected away {} (relative change {:.3e})", x.what, x.relative_change);
    }
}

fn build_source(cfg: &RunConfig) -> Result<(Grid3, SourceDensities), CliError> {
    let g = Grid3::new(cfg.n, cfg.box_length)?;
    let src = match &cfg.source {
        SourceSpec::None => SourceDensities::none(g),
        SourceSpec::Gaussian { charge, width, center } => {
            let c = center.unwrap_or([0.5 * cfg.box_length; 3]);
            SourceDensities::gaussian(g, *charge, *width, c)?
        }
        SourceSpec::ChargeMode { mode, amplitude } => SourceDensities::charge_mode(g, *mode, *amplitude)?,
        SourceSpec::CurrentMode {
            mode,
            polarization,
            amplitude,
        } => SourceDensities::current_mode(g, *mode, *polarization, *amplitude)?,
        SourceSpec::File { rho, current } => {
            let rho = match rho {
                Some(p) => read_scalar(p)?,
                None => ScalarField::zeros(g),
            };
            let j = match current {
                Some(p) => read_vector(p)?,
                None => VectorField::zeros(g),
            };
            rho.grid().ensure_same(&g)?;
            let (s, w) = SourceDensities::ingest(rho, j)?;
            report_warnings(&w);
            s
        }
    };
    Ok((g, src))
}

fn write_potential(dir: &Path, p: &FourPotential) -> Result<Vec<PathBuf>, CliError> {
    let g = *p.grid();
    let v = dir.join("potential_v.bin");
    let a = dir.join("potential_a.bin");
    write_scalar(&v, p.v())?;
    write_vector(&a, p.a())?;
    let slice = dir.join("slice.csv");
    let mid = g.n() / 2;
    write_slice_csv(
        &slice,
        0,
        [0, mid, mid],
        &[
            ("v", p.v()),
            ("a_x", p.a().component(0)),
            ("a_y", p.a().component(1)),
            ("a_z", p.a().component(2)),
        ],
    )?;
    Ok(vec![v, a, slice])
}

fn potential_summary(p: &FourPotential) -> Value {
    let (gv, ca) = p.sobolev_parts();
    let norms = field_norms(p);
    json!({
        "sobolev_norm": norms.sobolev_norm,
        "grad_v_norm": gv,
        "curl_a_norm": ca,
        "maxwell_action": norms.maxwell_action,
        "max_abs_v": p.v().max_abs(),
        "max_abs_a": p.a().max_abs(),
    })
}

pub fn solve_linear(cfg: &RunConfig) -> Result<(), CliError> {
    let (g, src) = build_source(cfg)?;
    let p = solve_linear_response(&cfg.scheme()?, &src, cfg.coupling, g)?;
    let dir = out_dir(cfg)?;
    let files = write_potential(dir, &p)?;
    let summary = potential_summary(&p);
    write_json(
        &dir.join("solve_linear.json"),
        &json!({
            "artifacts": names(&files),
            "potential": summary,
            "tolerances": tolerances(),
            "config": cfg.to_json(),
        }),
    )?;
    println!("linear response: sobolev norm {:.6e}", summary["sobolev_norm"].as_f64().unwrap_or(f64::NAN));
    Ok(())
}

pub fn solve_sc(cfg: &RunConfig, warm_start: bool) -> Result<(), CliError> {
    let (g, src) = build_source(cfg)?;
    let scheme = cfg.scheme()?;
    let saddle = SaddleConfig {
        coupling: cfg.coupling,
        damping: cfg.solver.damping,
        max_iter: cfg.solver.max_iter,
        residual_tol: cfg.solver.residual_tol,
        trust_radius_v: cfg.solver.trust_radius_v,
        trust_radius_a: cfg.solver.trust_radius_a,
    };
    saddle.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let report = if warm_start {
        let lin = solve_linear_response(&scheme, &src, cfg.coupling, g)?;
        solve_self_consistent_from(&scheme, &src, g, &saddle, &lin)?
    } else {
        solve_self_consistent(&scheme, &src, g, &saddle)?
    };
    let dir = out_dir(cfg)?;
    let mut files = write_potential(dir, &report.potential)?;
    let hist = dir.join("residuals.csv");
    let mut f = fs::File::create(&hist)?;
    writeln!(f, "iteration,residual")?;
    for (i, r) in report.residual_history.iter().enumerate() {
        writeln!(f, "{i},{r:.17e}")?;
    }
    files.push(hist);
    write_json(
        &dir.join("solve_sc.json"),
        &json!({
            "artifacts": names(&files),
            "warm_start": warm_start,
            "report": report.to_json(),
            "potential": potential_summary(&report.potential),
            "config": cfg.to_json(),
        }),
    )?;
    println!(
        "self-consistent solve: {:?} after {} iterations, residual {:.3e}",
        report.status,
        report.iterations,
        report.final_normalized_residual()
    );
    match report.status {
        SolveStatus::Converged => Ok(()),
        s => Err(CliError::Failed(format!("solver stopped with status {s:?}"))),
    }
}

pub fn verify(cfg: &RunConfig, full: bool) -> Result<(), CliError> {
    let tier = if full { Tier::Full } else { Tier::Quick };
    let mut outcomes = Vec::new();
    for &id in tier.criteria() {
        let o = verify::run_one(id, cfg.seed);
        println!("{}", o.line());
        outcomes.push(o);
    }
    let failed: Vec<u32> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
    write_json(
        &out_dir(cfg)?.join("verify.json"),
        &json!({
            "tier": tier,
            "seed": cfg.seed,
            "passed": failed.is_empty(),
            "outcomes": outcomes,
            "config": cfg.to_json(),
        }),
    )?;
    println!("{}/{} checks passed", outcomes.len() - failed.len(), outcomes.len());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("failing checks: {failed:?}")))
    }
}
