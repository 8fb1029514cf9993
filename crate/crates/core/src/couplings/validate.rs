use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::process::{RunOptions, Violations};
use super::runs::{run_coupling, run_direct, CouplingSpec};
use super::CouplingError;

pub const MIN_REPLICAS: usize = 100;
/// Family-wise level of the distributional tests, split evenly over the
/// size grid.
pub const FAMILY_ALPHA: f64 = 0.001;

const QUIET: RunOptions = RunOptions {
    record_log: false,
    check_frontier: false,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathwiseSummary {
    pub replicas: usize,
    pub capped_replicas: usize,
    pub max_infected: usize,
    pub violations: Violations,
    pub pass: bool,
}

/// `P(|I| >= m)` from the coupling against the direct simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailTest {
    pub m: usize,
    pub coupled_hits: usize,
    pub direct_hits: usize,
    pub coupled: f64,
    pub direct: f64,
    pub z: f64,
    pub p_value: f64,
    pub alpha: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub spec: CouplingSpec,
    pub replicas: usize,
    pub step_cap: usize,
    pub master_seed: u64,
    pub pathwise: PathwiseSummary,
    pub family_alpha: f64,
    pub distributional: Vec<TailTest>,
    pub pass: bool,
}

/// Pooled two-sample z statistic and its two-sided p-value. Degenerate
/// samples (pooled proportion 0 or 1) give `z = 0`, `p = 1`.
pub fn two_proportion_test(h1: usize, n1: usize, h2: usize, n2: usize) -> (f64, f64) {
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let pooled = (h1 + h2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return (0.0, 1.0);
    }
    let z = (h1 as f64 / n1f - h2 as f64 / n2f) / se;
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (z, 2.0 * normal.sf(z.abs()))
}

/// Pathwise and distributional checks of a coupling over `replicas`
/// independent replicas on each side.
pub fn validate_domination(
    spec: &CouplingSpec,
    replicas: usize,
    size_grid: &[usize],
    step_cap: usize,
    master_seed: u64,
) -> Result<ValidationReport, CouplingError> {
    if replicas < MIN_REPLICAS {
        return Err(CouplingError::TooFewReplicas {
            got: replicas,
            min: MIN_REPLICAS,
        });
    }
    let coupled = (0..replicas as u64)
        .into_par_iter()
        .map(|r| {
            let t = run_coupling(spec, step_cap, master_seed, r, QUIET)?;
            Ok((t.final_infected, t.capped, t.violations))
        })
        .collect::<Result<Vec<_>, CouplingError>>()?;
    let direct = (0..replicas as u64)
        .into_par_iter()
        .map(|r| Ok(run_direct(spec, step_cap, master_seed, r, QUIET)?.final_infected))
        .collect::<Result<Vec<_>, CouplingError>>()?;

    let mut violations = Violations::default();
    for (_, _, v) in &coupled {
        violations.add(v);
    }
    let pathwise = PathwiseSummary {
        replicas,
        capped_replicas: coupled.iter().filter(|c| c.1).count(),
        max_infected: coupled.iter().map(|c| c.0).max().unwrap_or(0),
        violations,
        pass: violations.total() == 0,
    };

    let alpha = FAMILY_ALPHA / size_grid.len().max(1) as f64;
    let distributional: Vec<TailTest> = size_grid
        .iter()
        .map(|&m| {
            let coupled_hits = coupled.iter().filter(|c| c.0 >= m).count();
            let direct_hits = direct.iter().filter(|&&s| s >= m).count();
            let (z, p_value) = two_proportion_test(coupled_hits, replicas, direct_hits, replicas);
            TailTest {
                m,
                coupled_hits,
                direct_hits,
                coupled: coupled_hits as f64 / replicas as f64,
                direct: direct_hits as f64 / replicas as f64,
                z,
                p_value,
                alpha,
                pass: p_value >= alpha,
            }
        })
        .collect();
    let pass = pathwise.pass && distributional.iter().all(|t| t.pass);
    Ok(ValidationReport {
        spec: spec.clone(),
        replicas,
        step_cap,
        master_seed,
        pathwise,
        family_alpha: FAMILY_ALPHA,
        distributional,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub spec: CouplingSpec,
    pub event: String,
    pub resolutions: usize,
    pub hits: usize,
    pub observed: f64,
    pub expected: f64,
    pub sigma: f64,
    pub z: f64,
    pub within_3_sigma: bool,
}

/// Frequency of the resolving event over the first `resolutions` attempts
/// of successive coupled replicas. Every attempt reads lattice elements no
/// earlier attempt has read, so the outcomes are i.i.d.
pub fn calibrate_event(
    spec: &CouplingSpec,
    resolutions: usize,
    step_cap: usize,
    master_seed: u64,
) -> Result<CalibrationReport, CouplingError> {
    spec.validate()?;
    let (Some(event), Some(expected)) = (spec.event_name(), spec.event_probability()) else {
        return Err(CouplingError::NoEvent(spec.name()));
    };
    const BATCH: u64 = 64;
    let mut outcomes: Vec<bool> = Vec::with_capacity(resolutions);
    let mut next_replica = 0u64;
    while outcomes.len() < resolutions {
        let batch = (next_replica..next_replica + BATCH)
            .into_par_iter()
            .map(|r| {
                let t = run_coupling(spec, step_cap, master_seed, r, RunOptions::default())?;
                Ok(t.log.iter().map(|rec| rec.event.occurred).collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>, CouplingError>>()?;
        next_replica += BATCH;
        for run in batch {
            outcomes.extend(run);
        }
    }
    outcomes.truncate(resolutions);
    let hits = outcomes.iter().filter(|&&o| o).count();
    let n = resolutions as f64;
    let observed = hits as f64 / n;
    let sigma = (expected * (1.0 - expected) / n).sqrt();
    let z = (observed - expected) / sigma;
    Ok(CalibrationReport {
        spec: spec.clone(),
        event: event.to_string(),
        resolutions,
        hits,
        observed,
        expected,
        sigma,
        z,
        within_3_sigma: z.abs() <= 3.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Orientation;

    #[test]
    fn z_test_reference_values() {
        // 60/100 vs 40/100: pooled 0.5, se = sqrt(0.5 * 0.5 * 0.02).
        let (z, p) = two_proportion_test(60, 100, 40, 100);
        assert!((z - 2.828_427_124_746_19).abs() < 1e-9);
        assert!((p - 0.004_677_734_981_047_27).abs() < 1e-9);
        assert_eq!(two_proportion_test(0, 50, 0, 70), (0.0, 1.0));
        assert_eq!(two_proportion_test(50, 50, 70, 70), (0.0, 1.0));
    }

    #[test]
    fn degenerate_triangular_validation_passes() {
        let spec = CouplingSpec::Triangular { p: [0.0; 3] };
        let r = validate_domination(&spec, 100, &[2, 5], 50, 0).unwrap();
        assert!(r.pass);
        assert!(r.distributional.iter().all(|t| t.coupled_hits == 0 && t.direct_hits == 0));
    }

    #[test]
    fn too_few_replicas() {
        let spec = CouplingSpec::Triangular { p: [0.3; 3] };
        assert!(matches!(
            validate_domination(&spec, 99, &[2], 50, 0),
            Err(CouplingError::TooFewReplicas { got: 99, .. })
        ));
    }

    #[test]
    fn small_triangular_validation() {
        let spec = CouplingSpec::Triangular { p: [0.4, 0.4, 0.4] };
        let r = validate_domination(&spec, 1000, &[2, 5, 10, 25, 50], 100, 3).unwrap();
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn fold_calibration() {
        let spec = CouplingSpec::Fold { d: 6, k: 2, p: 0.2, orientation: Orientation::NonOriented };
        let r = calibrate_event(&spec, 20_000, 1000, 1).unwrap();
        assert!((r.expected - 0.488).abs() < 1e-12);
        assert_eq!(r.resolutions, 20_000);
        assert!(r.within_3_sigma, "{r:?}");
    }

    #[test]
    fn calibration_needs_an_event() {
        let spec = CouplingSpec::Triangular { p: [0.4; 3] };
        assert!(calibrate_event(&spec, 10, 10, 0).is_err());
    }
}
