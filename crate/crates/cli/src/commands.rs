use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use percbound::bounds::{self, BoundsError, Method};
use percbound::couplings::{
    calibrate_event, run_coupling, validate_domination, CouplingError, CouplingSpec, EventOutcome,
    RunOptions, StepRecord,
};
use percbound::mc::{self, SimError, SurvivalEvent};
use percbound::{Family, ModelSpec};
use serde::{Deserialize, Serialize};

use crate::{Command, CoupleArgs, CouplingKind, EventArg, Format, Simulation, Verification};

/// Dimensions 3..=9, columns in `Family::ALL` order.
const PUBLISHED_TABLE: [[f64; 4]; 7] = [
    [0.3473, 0.5680, 0.5000, 0.6422],
    [0.2788, 0.4227, 0.4344, 0.5000],
    [0.2284, 0.3926, 0.4156, 0.4615],
    [0.1922, 0.2734, 0.2929, 0.3701],
    [0.1682, 0.2028, 0.2866, 0.3533],
    [0.1486, 0.1627, 0.2479, 0.2929],
    [0.1326, 0.1371, 0.2063, 0.2844],
];

#[derive(Debug)]
pub enum CliError {
    Parameter(String),
    Validation(String),
    Io(io::Error),
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Parameter(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Io(_) | CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parameter(m) => write!(f, "invalid parameter: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Io(e) => write!(f, "{e}"),
            CliError::Failed(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Dimension { .. }
            | BoundsError::WrongFamily { .. }
            | BoundsError::NoRegistryEntry { .. }
            | BoundsError::InvalidRange { .. }
            | BoundsError::Model(_) => CliError::Parameter(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Parameter(e.to_string())
    }
}

impl From<CouplingError> for CliError {
    fn from(e: CouplingError) -> Self {
        match e {
            CouplingError::Parameter { .. }
            | CouplingError::Dimension(_)
            | CouplingError::ZeroStepCap
            | CouplingError::TooFewReplicas { .. }
            | CouplingError::Model(_)
            | CouplingError::Lattice(_) => CliError::Parameter(e.to_string()),
            _ => CliError::Failed(e.to_string()),
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn model(family: Family, d: usize) -> Result<ModelSpec, CliError> {
    ModelSpec::from_family(family, d).map_err(|e| CliError::Parameter(e.to_string()))
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Bounds { family, d, method, out } => {
            let result = match method {
                Some(m) => {
                    let m = Method::parse(&m)
                        .ok_or_else(|| CliError::Parameter(format!("unknown method `{m}`")))?;
                    bounds::bound_by_method(family, d, m)?
                }
                None => bounds::best_bound(family, d)?,
            };
            eprintln!("{family} d={d}: {:.4} ({})", result.rounded, result.method);
            emit(&out.output, &json(&result))
        }
        Command::Table { d_min, d_max, format, out } => {
            let table = bounds::generate_table(d_min, d_max)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => json(&table),
            };
            emit(&out.output, &text)
        }
        Command::Simulate { what } => simulate(what),
        Command::Couple(args) => couple(args),
        Command::Verify { what } => match what {
            Verification::Trace { path } => verify_trace(&path),
            Verification::Table { tolerance } => verify_table(tolerance),
        },
    }
}

fn simulate(what: Simulation) -> Result<(), CliError> {
    match what {
        Simulation::Survival { model: m, p, radius, replicas, event, seed, out } => {
            let spec = model(m.family, m.d)?;
            let event = match event {
                EventArg::BoundaryHit => SurvivalEvent::BoundaryHit,
                EventArg::OneArm => SurvivalEvent::OneArm,
            };
            let est = mc::survival_proxy_with(spec, p, radius, replicas, seed.seed, event)?;
            eprintln!(
                "{spec} p={p} L={radius}: {}/{} = {:.4} [{:.4}, {:.4}]",
                est.hits, est.replicas, est.estimate, est.ci_low, est.ci_high
            );
            emit(&out.output, &json(&est))
        }
        Simulation::Sweep { model: m, p_min, p_max, points, radius, replicas, format, seed, out } => {
            let spec = model(m.family, m.d)?;
            if points == 0 || !(p_min <= p_max) {
                return Err(CliError::Parameter(format!("empty grid {p_min}..{p_max} with {points} points")));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| {
                    if points == 1 {
                        p_min
                    } else {
                        (p_min * (points - 1 - i) as f64 + p_max * i as f64) / (points - 1) as f64
                    }
                })
                .collect();
            let curve = mc::union_find_sweep(spec, radius, &grid, replicas, seed.seed)?;
            eprintln!("{spec} L={radius}: {points} points, {replicas} replicas");
            let text = match format {
                Format::Csv => curve.to_csv(),
                Format::Json => json(&curve),
            };
            emit(&out.output, &text)
        }
    }
}

fn coupling_spec(args: &CoupleArgs) -> Result<CouplingSpec, CliError> {
    let single = || match args.p.as_slice() {
        [p] => Ok(*p),
        other => Err(CliError::Parameter(format!("expected one value of p, got {}", other.len()))),
    };
    let d = || args.d.ok_or_else(|| CliError::Parameter("--d is required".into()));
    let spec = match args.kind {
        CouplingKind::Triangular => match args.p.as_slice() {
            [p] => CouplingSpec::Triangular { p: [*p; 3] },
            [a, b, c] => CouplingSpec::Triangular { p: [*a, *b, *c] },
            other => {
                return Err(CliError::Parameter(format!(
                    "triangular takes one or three values of p, got {}",
                    other.len()
                )))
            }
        },
        CouplingKind::EdgeSplit => CouplingSpec::EdgeSplit { d: d()?, p: single()? },
        CouplingKind::VertexSplit => CouplingSpec::VertexSplit { d: d()?, p: single()? },
        CouplingKind::Fold => CouplingSpec::Fold {
            d: d()?,
            k: args.k.ok_or_else(|| CliError::Parameter("--k is required for fold".into()))?,
            p: single()?,
            orientation: args.orientation(),
        },
    };
    spec.validate()?;
    Ok(spec)
}

#[derive(Serialize, Deserialize)]
struct TraceLine {
    replica: u64,
    n: usize,
    item: serde_json::Value,
    event: EventOutcome,
    infected_size: usize,
}

impl TraceLine {
    fn new(replica: u64, r: &StepRecord) -> Self {
        TraceLine {
            replica,
            n: r.n,
            item: serde_json::to_value(&r.item).expect("elements serialize"),
            event: r.event,
            infected_size: r.infected_size,
        }
    }
}

#[derive(Serialize)]
struct CoupleReport {
    validation: percbound::couplings::ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<percbound::couplings::CalibrationReport>,
    pass: bool,
}

fn couple(args: CoupleArgs) -> Result<(), CliError> {
    let spec = coupling_spec(&args)?;
    let seed = args.seed.seed;
    if let Some(path) = &args.trace {
        let mut w = BufWriter::new(File::create(path)?);
        for r in 0..args.traces {
            let trace = run_coupling(&spec, args.step_cap, seed, r, RunOptions::default())?;
            for rec in &trace.log {
                serde_json::to_writer(&mut w, &TraceLine::new(r, rec)).map_err(io::Error::from)?;
                w.write_all(b"\n")?;
            }
        }
        w.flush()?;
    }
    let validation = validate_domination(&spec, args.replicas, &args.sizes, args.step_cap, seed)?;
    let calibration = match (args.resolutions, spec.event_name()) {
        (0, _) | (_, None) => None,
        (n, Some(_)) => Some(calibrate_event(&spec, n, args.step_cap, seed)?),
    };
    let pass = validation.pass && calibration.as_ref().is_none_or(|c| c.within_3_sigma);
    eprintln!(
        "{}: pathwise violations {}, distributional {}, calibration {}",
        spec.name(),
        validation.pathwise.violations.total(),
        if validation.distributional.iter().all(|t| t.pass) { "pass" } else { "FAIL" },
        match &calibration {
            Some(c) => format!("{} {:.4} vs {:.4} (z {:+.2})", c.event, c.observed, c.expected, c.z),
            None => "skipped".into(),
        }
    );
    let report = CoupleReport {
        validation,
        calibration,
        pass,
    };
    emit(&args.out.output, &json(&report))?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} coupling", spec.name())))
    }
}

/// Per-replica checks: steps numbered from 0, the infected set grows by one
/// exactly on occurred events, and landing data only on occurred events.
fn verify_trace(path: &Path) -> Result<(), CliError> {
    let reader = BufReader::new(File::open(path)?);
    let mut last: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
    let mut problems = Vec::new();
    let mut lines = 0usize;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        lines += 1;
        let rec: TraceLine = match serde_json::from_str(&line) {
            Ok(r) => r,
            Err(e) => {
                problems.push(format!("line {}: {e}", i + 1));
                continue;
            }
        };
        let ev = rec.event;
        if ev.occurred != ev.landing_k.is_some() || (!ev.occurred && ev.landing_label.is_some()) {
            problems.push(format!("line {}: landing data does not match the outcome", i + 1));
        }
        match last.get(&rec.replica) {
            None if rec.n != 0 => problems.push(format!("line {}: replica {} starts at step {}", i + 1, rec.replica, rec.n)),
            Some(&(n, _)) if rec.n != n + 1 => {
                problems.push(format!("line {}: step {} follows {n}", i + 1, rec.n))
            }
            Some(&(_, size)) if rec.infected_size != size + ev.occurred as usize => problems.push(format!(
                "line {}: infected size {} after {size} with occurred={}",
                i + 1,
                rec.infected_size,
                ev.occurred
            )),
            _ => {}
        }
        last.insert(rec.replica, (rec.n, rec.infected_size));
    }
    eprintln!("{lines} records, {} replicas, {} problems", last.len(), problems.len());
    for p in problems.iter().take(20) {
        eprintln!("  {p}");
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(format!("{} inconsistent records", problems.len())))
    }
}

fn verify_table(tolerance: f64) -> Result<(), CliError> {
    let table = bounds::generate_table(3, 9)?;
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for (row, published) in table.rows.iter().zip(PUBLISHED_TABLE) {
        for ((cell, family), want) in row.cells().into_iter().zip(Family::ALL).zip(published) {
            let dev = (cell.rounded - want).abs();
            worst = worst.max(dev);
            if dev > 1e-9 {
                mismatches += 1;
                println!("{family} d={}: computed {:.4}, published {want:.4}", row.d, cell.rounded);
            }
        }
    }
    println!("{} of 28 cells match exactly, largest deviation {worst:.1e}", 28 - mismatches);
    if worst <= tolerance + 1e-12 {
        Ok(())
    } else {
        Err(CliError::Validation(format!("deviation {worst:.1e} exceeds {tolerance:.1e}")))
    }
}
