use std::io::Write;
use std::path::Path;

use nodesel::eav::EavModel;
use nodesel::jam::JamModel;
use nodesel::scenario::{
    apply_shadowing, gaussian_like_prior, generate_paper_scenario, load_scenario, Mode, ShadowingParams,
};
use nodesel::select::evaluate_selection;
use nodesel::{Point, SelectionMode, SelectionVector};
use serde_json::{json, Value};

use crate::args::{EvalArgs, EvalFormat, Format, GenArgs, RunArgs, SelectArgs, SweepArgs};
use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiment::{base_file, first_failure, jobs, param_name, rows_of, run_all, run_job, Job, JobOutput, Labeled};
use crate::output::{read_csv, write_csv, PlotData, Row};

fn write_out(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).map_err(|e| CliError::usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

/// JSON number, or `null` when not finite.
fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn gen(a: &GenArgs) -> CliResult<()> {
    let mut p = a.preset.params().with_seed(a.seed);
    if let Some(n) = a.anchors {
        p.anchor_count = n as usize;
    }
    if let Some(n) = a.candidates {
        p.candidate_count = n as usize;
    }
    if let Some(h) = a.grid_half_extent {
        p.grid_half_extent = h;
    }
    if let Some(v) = a.sigma2 {
        p.eav_noise = v;
    }
    if let Some(v) = a.jam_sigma2 {
        p.jam_noise = v;
    }
    if let Some(v) = a.jam_power {
        p.jam_power = v;
    }
    if a.budget.is_some() {
        p.power_budget = a.budget;
    }
    let mut s = generate_paper_scenario(&p)?;
    if a.shadowing {
        s = apply_shadowing(&s, a.seed, &ShadowingParams::default())?;
    }
    if let Some(nu) = a.nu {
        s = s.with_prior(gaussian_like_prior(&s.targets, Point::new(0.0, 0.0), nu)?)?;
    }
    let mut text = s.to_json();
    text.push('\n');
    write_out(a.out.as_deref(), text.as_bytes())
}

fn parse_mask(text: &str, n: usize, flag: &str) -> CliResult<SelectionVector> {
    let mask = text
        .split(',')
        .map(|t| match t.trim() {
            "1" => Ok(true),
            "0" => Ok(false),
            other => Err(CliError::usage(format!("{flag}: entries must be 0 or 1, got `{other}`"))),
        })
        .collect::<CliResult<Vec<bool>>>()?;
    if mask.len() != n {
        return Err(CliError::usage(format!("{flag} has {} entries for {n} candidates", mask.len())));
    }
    Ok(SelectionVector::binary_from_mask(&mask))
}

pub fn eval(a: &EvalArgs) -> CliResult<()> {
    let s = load_scenario(&a.scenario)?;
    let mode: Mode = a.mode.into();
    s.validate_for(mode)?;
    let n = s.num_candidates();
    let need = |v: &Option<String>, flag: &str| {
        v.as_deref()
            .ok_or_else(|| CliError::usage(format!("{flag} is required in {} mode", mode.as_str())))
            .and_then(|t| parse_mask(t, n, flag))
    };
    let (objective, eav_objective, feasible) = match mode {
        Mode::Eav => {
            let z = need(&a.mask, "--mask")?;
            let f = EavModel::new(&s).objective(z.weights());
            (f, None, f.is_finite())
        }
        Mode::Jam => {
            let z = need(&a.mask, "--mask")?;
            let e = evaluate_selection(&s, mode, None, Some(&z), f64::INFINITY)?;
            (JamModel::new(&s)?.objective(z.weights()), None, e.feasible)
        }
        Mode::Joint => {
            let ze = need(&a.eav_mask, "--eav-mask")?;
            let zj = need(&a.jam_mask, "--jam-mask")?;
            if ze.weights().iter().zip(zj.weights()).any(|(a, b)| a * b != 0.0) {
                return Err(CliError::usage("eavesdropper and jammer masks overlap"));
            }
            let e = evaluate_selection(&s, mode, Some(&ze), Some(&zj), a.rho.unwrap_or(f64::INFINITY))?;
            (e.objective, e.eav_objective, e.feasible)
        }
    };
    let text = match a.format {
        EvalFormat::Text => {
            let mut t = format!("objective_m2 {objective}\nobjective_m {}\n", objective.sqrt());
            if let Some(f) = eav_objective {
                t += &format!("eav_objective_m2 {f}\neav_objective_m {}\nfeasible {feasible}\n", f.sqrt());
            }
            t
        }
        EvalFormat::Csv => {
            let eav = eav_objective.map(|f| f.to_string()).unwrap_or_default();
            format!(
                "mode,objective_m2,objective_m,eav_objective_m2,feasible\n{},{objective},{},{eav},{feasible}\n",
                mode.as_str(),
                objective.sqrt()
            )
        }
        EvalFormat::Json => {
            let v = json!({
                "mode": mode.as_str(),
                "objective_m2": num(objective),
                "objective_m": num(objective.sqrt()),
                "eav_objective_m2": eav_objective.map(num),
                "feasible": feasible,
            });
            format!("{}\n", serde_json::to_string_pretty(&v).expect("json"))
        }
    };
    write_out(None, text.as_bytes())
}

fn vector_json(v: &Option<SelectionVector>) -> Value {
    match v {
        None => Value::Null,
        Some(v) if v.mode() == SelectionMode::Binary => json!(v.selected()),
        Some(v) => json!({ "weights": v.weights() }),
    }
}

fn summary(cfg: &ExperimentConfig, job: Job, list: &[Labeled]) -> Value {
    let outcomes: Vec<Value> = list
        .iter()
        .map(|l| {
            let o = &l.outcome;
            json!({
                "algorithm": l.label,
                "objective_m2": num(o.objective),
                "objective_m": num(o.objective.sqrt()),
                "eav_objective_m2": o.eav_objective.map(num),
                "feasible": o.feasible,
                "swaps": o.swaps,
                "wall_ms": o.wall_ms,
                "eav": vector_json(&o.eav),
                "jam": vector_json(&o.jam),
            })
        })
        .collect();
    json!({
        "mode": cfg.mode.as_str(),
        "scenario": cfg.scenario.as_ref().map(|p| p.display().to_string()),
        "preset": if cfg.scenario.is_none() { json!(cfg.preset) } else { Value::Null },
        "seed": job.seed,
        "outcomes": outcomes,
    })
}

fn csv_rows(cfg: &ExperimentConfig, outputs: &[JobOutput], timings: bool) -> Vec<Row> {
    outputs.iter().flat_map(|o| rows_of(cfg, o, timings)).collect()
}

/// Replays one recorded row and compares everything but the timing column.
fn verify(cfg: &ExperimentConfig, file: Option<&nodesel::Scenario>, path: &Path, n: usize) -> CliResult<()> {
    let records = read_csv(path)?;
    let rec = records
        .get(n - 1)
        .ok_or_else(|| CliError::usage(format!("{} has {} rows, asked for row {n}", path.display(), records.len())))?;
    let field = |i: usize| rec.get(i).unwrap_or("");
    if field(2) != param_name(cfg) {
        return Err(CliError::Mismatch(format!(
            "row sweeps `{}` but the flags sweep `{}`",
            field(2),
            param_name(cfg)
        )));
    }
    let bad = |what: &str| CliError::usage(format!("row {n}: unreadable {what}"));
    let value = match field(3) {
        "" => None,
        v => Some(v.parse::<f64>().map_err(|_| bad("value"))?),
    };
    let job = Job {
        value,
        replicate: field(4).parse().map_err(|_| bad("replicate"))?,
        seed: field(5).parse().map_err(|_| bad("seed"))?,
    };
    let out = JobOutput { job, result: run_job(cfg, file, job) };
    let rows = rows_of(cfg, &out, false);
    let expected: Vec<&str> = rec.iter().take(10).collect();
    match rows.iter().find(|r| r.algorithm == field(0)) {
        Some(r) if r.reproducible() == expected => {
            println!("row {n} reproduced: {}", expected.join(","));
            Ok(())
        }
        Some(r) => Err(CliError::Mismatch(format!(
            "row {n}\n  recorded: {}\n  replayed: {}",
            expected.join(","),
            r.reproducible().join(",")
        ))),
        None => Err(CliError::Mismatch(format!("row {n}: replay has no `{}` row", field(0)))),
    }
}

fn maybe_verify(run: &RunArgs, cfg: &ExperimentConfig, file: Option<&nodesel::Scenario>) -> CliResult<bool> {
    match run.verify_target()? {
        Some((path, n)) => verify(cfg, file, &path, n).map(|_| true),
        None => Ok(false),
    }
}

pub fn select(a: &SelectArgs) -> CliResult<()> {
    let cfg = a.config()?;
    let file = base_file(&cfg)?;
    if maybe_verify(&a.run, &cfg, file.as_ref())? {
        return Ok(());
    }
    let job = jobs(&cfg)[0];
    let list = run_job(&cfg, file.as_ref(), job)?;
    let sum = format!("{}\n", serde_json::to_string_pretty(&summary(&cfg, job, &list)).expect("json"));
    let outputs = [JobOutput { job, result: Ok(list) }];
    let csv = write_csv(&csv_rows(&cfg, &outputs, a.run.timings))?;
    if let Some(p) = &a.summary {
        write_out(Some(p), sum.as_bytes())?;
    }
    if let Some(p) = &a.run.out {
        write_out(Some(p), &csv)?;
    }
    match a.run.format {
        Format::Csv if a.run.out.is_none() => write_out(None, &csv),
        Format::Json if a.summary.is_none() => write_out(None, sum.as_bytes()),
        _ => Ok(()),
    }
}

pub fn sweep(a: &SweepArgs) -> CliResult<()> {
    let cfg = a.config()?;
    let file = base_file(&cfg)?;
    if maybe_verify(&a.run, &cfg, file.as_ref())? {
        return Ok(());
    }
    let outputs = run_all(&cfg, file.as_ref(), &jobs(&cfg));
    for o in &outputs {
        if let Err(e) = &o.result {
            let v = o.job.value.map(|v| v.to_string()).unwrap_or_default();
            eprintln!("{}={v} replicate {} (seed {}): {e}", param_name(&cfg), o.job.replicate, o.job.seed);
        }
    }
    let rows = csv_rows(&cfg, &outputs, a.run.timings);
    let csv = write_csv(&rows)?;
    let plot = PlotData::from_rows(&rows, &cfg.values);
    plot.validate()?;
    let plot = format!("{}\n", plot.to_json());
    if let Some(p) = &a.run.out {
        write_out(Some(p), &csv)?;
    }
    if let Some(p) = &a.plot {
        write_out(Some(p), plot.as_bytes())?;
    }
    match a.run.format {
        Format::Csv if a.run.out.is_none() => write_out(None, &csv)?,
        Format::Json if a.plot.is_none() => write_out(None, plot.as_bytes())?,
        _ => {}
    }
    match first_failure(&outputs) {
        Some(e) => Err(e.clone()),
        None => Ok(()),
    }
}
