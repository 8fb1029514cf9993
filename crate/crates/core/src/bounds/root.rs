//! Bracketed root finding for the implicit bound equations.

use serde::{Deserialize, Serialize};

use super::BoundsError;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;
/// Half-width of the interval used to certify a sign change at a root.
pub const CERTIFICATE_RADIUS: f64 = 1e-10;
const UNIQUENESS_SCAN_POINTS: usize = 1000;

/// A scalar residual on a bracket, to be solved to `tolerance`.
pub struct RootProblem<F> {
    pub residual: F,
    pub bracket: (f64, f64),
    pub tolerance: f64,
}

impl<F: Fn(f64) -> f64> RootProblem<F> {
    pub fn new(residual: F, bracket: (f64, f64)) -> Self {
        RootProblem {
            residual,
            bracket,
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }
}

/// Bisection until both `|residual|` and the bracket width are below the
/// tolerance. Stops early when the bracket can no longer be split in double
/// precision, provided the residual criterion already holds.
pub fn solve_bracketed_root<F: Fn(f64) -> f64>(problem: &RootProblem<F>) -> Result<f64, BoundsError> {
    let f = &problem.residual;
    let (mut lo, mut hi) = problem.bracket;
    let tol = problem.tolerance;
    if !(tol > 0.0) || !(lo < hi) {
        return Err(BoundsError::InvalidBracket { lo, hi });
    }
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if !(f_lo.signum() * f_hi.signum() < 0.0) {
        return Err(BoundsError::NoSignChange { lo, hi, f_lo, f_hi });
    }

    for _ in 0..MAX_ITERATIONS {
        let mid = lo + 0.5 * (hi - lo);
        let f_mid = f(mid);
        let width = hi - lo;
        if f_mid.abs() < tol && width < tol {
            return Ok(mid);
        }
        if mid <= lo || mid >= hi {
            // Bracket exhausted in double precision.
            return if f_mid.abs() < tol {
                Ok(mid)
            } else {
                Err(BoundsError::NoConvergence { last: mid })
            };
        }
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Err(BoundsError::NoConvergence {
        last: lo + 0.5 * (hi - lo),
    })
}

/// Evidence attached to every bound that comes out of an implicit equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootCertificate {
    pub residual: f64,
    /// The residual changes sign across `[root - 1e-10, root + 1e-10]`.
    pub sign_change: bool,
    /// Sign changes seen by a 1000-point scan of the original bracket.
    pub scan_sign_changes: usize,
}

impl RootCertificate {
    pub fn is_valid(&self, tolerance: f64) -> bool {
        self.residual.abs() < tolerance && self.sign_change && self.scan_sign_changes == 1
    }
}

pub fn certify<F: Fn(f64) -> f64>(problem: &RootProblem<F>, root: f64) -> RootCertificate {
    let f = &problem.residual;
    let (lo, hi) = problem.bracket;
    let left = f((root - CERTIFICATE_RADIUS).max(lo));
    let right = f((root + CERTIFICATE_RADIUS).min(hi));
    let sign_change = left.signum() * right.signum() < 0.0;

    let mut changes = 0;
    let mut prev = f(lo).signum();
    for i in 1..=UNIQUENESS_SCAN_POINTS {
        let x = lo + (hi - lo) * i as f64 / UNIQUENESS_SCAN_POINTS as f64;
        let s = f(x).signum();
        if s != prev && s != 0.0 {
            changes += 1;
            prev = s;
        }
    }
    RootCertificate {
        residual: f(root),
        sign_change,
        scan_sign_changes: changes,
    }
}

/// Solves and certifies; a root without a unique sign change is rejected.
pub fn solve_certified<F: Fn(f64) -> f64>(
    problem: &RootProblem<F>,
) -> Result<(f64, RootCertificate), BoundsError> {
    let root = solve_bracketed_root(problem)?;
    let cert = certify(problem, root);
    if cert.scan_sign_changes != 1 {
        return Err(BoundsError::NotUnique {
            sign_changes: cert.scan_sign_changes,
        });
    }
    if !cert.is_valid(problem.tolerance) {
        return Err(BoundsError::NoConvergence { last: root });
    }
    Ok((root, cert))
}
