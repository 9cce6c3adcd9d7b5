use crate::Hypothesis;
use anyhow::{bail, Context, Result};
use lagflow_core::config::RunConfig;
use lagflow_core::flow::run_with;
use lagflow_core::grassmannian::{
    concavity_certificate, integrate_geodesic, metric_speed, normalize_speed,
};
use lagflow_core::monitors::{check_monotone, scaled_tolerance, Direction};
use lagflow_core::unitary::{
    convexity_as_orbit, corollary_b_condition, make_unitary, s_u_diagonal, UnitaryBlock,
};
use lagflow_core::{DiagnosticsRecord, Error, FlowState, Mat, StopReason, SymMat};
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub const EXIT_OK: u8 = 0;
pub const EXIT_BLOW_UP: u8 = 2;
pub const EXIT_VIOLATION: u8 = 3;

/// Snapshot file. Readable back as a plain field snapshot
/// (`n`, `N`, `values`); the extra keys record where the field sits.
#[derive(Serialize)]
struct SnapshotFile<'a> {
    n: usize,
    #[serde(rename = "N")]
    points: usize,
    t: f64,
    drift: f64,
    #[serde(rename = "M")]
    m_upper: Vec<f64>,
    values: &'a [f64],
}

fn write_snapshot(path: &Path, state: &FlowState) -> Result<()> {
    let n = state.m.dim();
    let m_upper = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| state.m.get(i, j))
        .collect();
    let file = SnapshotFile {
        n,
        points: state.grid().points(),
        t: state.t,
        drift: state.drift,
        m_upper,
        values: state.v.values(),
    };
    let text = serde_json::to_string(&file)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn output_path(base: &Path, stem: &str, given: &Option<PathBuf>, suffix: &str) -> PathBuf {
    match given {
        Some(p) if p.is_absolute() => p.clone(),
        Some(p) => base.join(p),
        None => base.join(format!("{stem}.{suffix}")),
    }
}

pub fn flow_run(config: &Path) -> Result<u8> {
    let text =
        fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let cfg = RunConfig::from_json(&text)?;
    let initial = cfg.initial_state()?;

    let base = config.parent().unwrap_or(Path::new("."));
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let diag_path = output_path(base, &stem, &cfg.output.diagnostics, "diag.jsonl");
    let init_path = output_path(base, &stem, &cfg.output.initial_snapshot, "initial.json");
    let final_path = output_path(base, &stem, &cfg.output.final_snapshot, "final.json");

    write_snapshot(&init_path, &initial)?;
    let file =
        File::create(&diag_path).with_context(|| format!("creating {}", diag_path.display()))?;
    let mut out = BufWriter::new(file);
    let mut io_err = None;
    let outcome = run_with(initial, &cfg.settings(), |rec| {
        if io_err.is_none() {
            let line = serde_json::to_string(rec).expect("records serialize");
            if let Err(e) = writeln!(out, "{line}") {
                io_err = Some(e);
            }
        }
    })?;
    if let Some(e) = io_err {
        return Err(e).with_context(|| format!("writing {}", diag_path.display()));
    }
    out.flush()?;
    write_snapshot(&final_path, &outcome.final_state)?;

    let last = outcome
        .records
        .last()
        .expect("a run records its first state");
    let summary = json!({
        "stop": outcome.stop.to_string(),
        "t": outcome.final_state.t,
        "steps": outcome.steps,
        "flat_res": last.flat_res,
        "H_sup": last.h_sup,
        "detail": outcome.detail,
        "diagnostics": diag_path,
        "initial_snapshot": init_path,
        "final_snapshot": final_path,
    });
    println!("{}", serde_json::to_string(&summary)?);
    Ok(match outcome.stop {
        StopReason::Converged | StopReason::TMax => EXIT_OK,
        StopReason::BlowUp => EXIT_BLOW_UP,
    })
}

pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("line {}", i + 1)))
        .collect::<Result<Vec<DiagnosticsRecord>>>()?;
    if records.is_empty() {
        bail!("{} holds no records", path.display());
    }
    Ok(records)
}

struct CheckRow {
    name: String,
    tol: f64,
    /// Worst step against a monotone claim, or the extreme value for a bound.
    worst: f64,
    /// Offending record indices.
    at: Option<(usize, usize)>,
    pass: bool,
}

fn monotone_row(series: &[DiagnosticsRecord], field: &str, dir: Direction) -> Result<CheckRow> {
    let tol = scaled_tolerance(series, field)?;
    let rep = check_monotone(series, field, dir, tol)?;
    let arrow = match dir {
        Direction::Nonincreasing => "nonincreasing",
        Direction::Nondecreasing => "nondecreasing",
    };
    Ok(CheckRow {
        name: format!("{field} {arrow}"),
        tol,
        worst: rep.worst_violation,
        at: rep.worst_pair.filter(|_| !rep.pass),
        pass: rep.pass,
    })
}

/// `field` strictly below (`upper`) or above a bound at every record.
fn bound_row(
    series: &[DiagnosticsRecord],
    field: &str,
    bound: f64,
    upper: bool,
) -> Result<CheckRow> {
    let values = series
        .iter()
        .map(|r| r.field(field))
        .collect::<Result<Vec<_>, _>>()?;
    let ok = |v: f64| if upper { v < bound } else { v > bound };
    let worst = if upper {
        values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    } else {
        values.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let first_bad = values.iter().position(|&v| !ok(v));
    Ok(CheckRow {
        name: format!("{field} {} {bound}", if upper { "<" } else { ">" }),
        tol: 0.0,
        worst,
        at: first_bad.map(|i| (i, i)),
        pass: first_bad.is_none(),
    })
}

pub fn monitor_check(path: &Path, hypothesis: Hypothesis) -> Result<u8> {
    let series = read_diagnostics(path)?;
    let mut rows = vec![monotone_row(
        &series,
        "alpha_osc",
        Direction::Nonincreasing,
    )?];
    match hypothesis {
        Hypothesis::Convex => {
            rows.push(monotone_row(&series, "s_min", Direction::Nondecreasing)?);
            rows.push(monotone_row(
                &series,
                "logdet_sup",
                Direction::Nonincreasing,
            )?);
            rows.push(monotone_row(
                &series,
                "omega_min",
                Direction::Nondecreasing,
            )?);
            rows.push(bound_row(&series, "lambda_min", 0.0, false)?);
        }
        Hypothesis::UnitBall => rows.push(bound_row(&series, "lambda_abs_max", 1.0, true)?),
        Hypothesis::None => {}
    }

    println!("{} records", series.len());
    println!(
        "{:<28} {:>24} {:>24}  {:<12} result",
        "check", "tolerance", "worst", "records"
    );
    for r in &rows {
        let at = match r.at {
            Some((i, j)) if i == j => format!("{i}"),
            Some((i, j)) => format!("{i}-{j}"),
            None => "-".into(),
        };
        let verdict = if r.pass { "pass" } else { "FAIL" };
        println!(
            "{:<28} {:>24e} {:>24e}  {:<12} {verdict}",
            r.name, r.tol, r.worst, at
        );
    }
    let failed: Vec<&CheckRow> = rows.iter().filter(|r| !r.pass).collect();
    for r in &failed {
        if let Some((i, j)) = r.at {
            let (ti, tj) = (series[i].t, series[j].t);
            if i == j {
                println!("violation: {} at record {i} (t = {ti})", r.name);
            } else {
                println!(
                    "violation: {} between records {i} and {j} (t = {ti} -> {tj})",
                    r.name
                );
            }
        }
    }
    Ok(if failed.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    })
}

pub fn geodesic(lambda: &[f64], velocity: Option<&[f64]>, s_end: f64, step: f64) -> Result<u8> {
    let n = lambda.len();
    if n == 0 || n > lagflow_core::MAX_DIM {
        return Err(Error::DimensionOutOfRange(n).into());
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        bail!("--lambda must be finite");
    }
    let z0 = SymMat::from_diag(lambda);
    let v = match velocity {
        Some(upper) => SymMat::from_upper(n, upper).context("--velocity")?,
        None => SymMat::identity(n),
    };
    if v.max_abs() == 0.0 {
        bail!("--velocity must be non-zero");
    }
    let v = normalize_speed(&z0, &v);
    match integrate_geodesic(&z0, &v, s_end, step) {
        Ok(traj) => {
            let end = traj.last().expect("trajectory holds the initial state");
            let drift = traj
                .iter()
                .map(|st| (metric_speed(&st.z, &st.zdot) - 1.0).abs())
                .fold(0.0, f64::max);
            let report = json!({
                "lambda": lambda,
                "s_end": end.s,
                "steps": traj.len() - 1,
                "z": end.z.to_rows(),
                "zdot": end.zdot.to_rows(),
                "speed_drift": drift,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(EXIT_OK)
        }
        Err(Error::BlowUp { t, reason }) => {
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({"blow_up": reason, "s": t}))?
            );
            Ok(EXIT_BLOW_UP)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn certificate(lambda: &[f64], samples: usize, seed: u64) -> Result<u8> {
    if samples == 0 {
        bail!("--samples must be at least 1");
    }
    let report = concavity_certificate(lambda, samples, seed)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(if report.pass { EXIT_OK } else { EXIT_VIOLATION })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryInput {
    #[serde(rename = "P")]
    p: Option<Vec<Vec<f64>>>,
    #[serde(rename = "Q")]
    q: Option<Vec<Vec<f64>>>,
    hessian: Option<Vec<Vec<f64>>>,
}

fn read_hessian(rows: &[Vec<f64>]) -> Result<SymMat> {
    let m = SymMat::from_rows(rows)?;
    let asym = Mat::from_rows(rows)?.sub(&m.as_mat()).max_abs();
    if asym > 1e-12 {
        bail!("hessian is not symmetric (asymmetry {asym})");
    }
    Ok(m)
}

pub fn unitary_check(path: &Path, corollary_b: bool) -> Result<u8> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let input: UnitaryInput =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let hessian = input.hessian.as_deref().map(read_hessian).transpose()?;

    let u = match (&input.p, &input.q, &hessian) {
        (Some(p), Some(q), _) => match make_unitary(Mat::from_rows(p)?, Mat::from_rows(q)?) {
            Ok(u) => u,
            Err(Error::NotUnitary {
                orthogonality,
                symmetry,
            }) => {
                let report = json!({
                    "unitary": false,
                    "orthogonality_residual": orthogonality,
                    "symmetry_residual": symmetry,
                });
                println!("{}", serde_json::to_string_pretty(&report)?);
                return Ok(EXIT_VIOLATION);
            }
            Err(e) => return Err(e.into()),
        },
        (None, None, Some(h)) => UnitaryBlock::quarter_turn(h.dim()),
        (None, None, None) => bail!("nothing to check: give P and Q, a hessian, or both"),
        _ => bail!("P and Q must be given together"),
    };
    if corollary_b && hessian.is_none() {
        bail!("--corollary-b needs a hessian");
    }

    let (orth, sym) = u.residuals();
    let mut report = json!({
        "unitary": true,
        "orthogonality_residual": orth,
        "symmetry_residual": sym,
    });
    let mut code = EXIT_OK;
    if let Some(h) = &hessian {
        let lam = lagflow_core::sym_eigen(h).lambdas().to_vec();
        let s_u = s_u_diagonal(&u, &lam)?;
        let convex = convexity_as_orbit(h)?;
        report["lambda"] = json!(lam);
        report["s_u"] = json!(s_u);
        report["s_u_min"] = json!(s_u.iter().copied().fold(f64::INFINITY, f64::min));
        report["convex"] = json!({"holds": convex.holds, "margin": convex.margin});
        if corollary_b {
            let c = corollary_b_condition(h)?;
            let rotated = s_u_diagonal(&UnitaryBlock::quarter_turn(h.dim()), &lam)?;
            report["corollary_b"] = json!({
                "holds": c.holds,
                "margin": c.margin,
                "quarter_turn_s_u_min": rotated.iter().copied().fold(f64::INFINITY, f64::min),
            });
            if !c.holds {
                code = EXIT_VIOLATION;
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(code)
}
