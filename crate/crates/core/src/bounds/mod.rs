//! Upper bounds on the four critical points `p_c^b(d)`, oriented `p_c^b(d)`,
//! `p_c^s(d)` and oriented `p_c^s(d)`.
//!
//! Three mechanisms produce bounds:
//!
//! * the triangular-lattice criterion, giving `p*(d)` for non-oriented bond
//!   percolation as the root of an implicit equation ([`theorem1_bound`]);
//! * dimension folding, `1 - p~ = (1 - p)^{d/k}`, which turns a bound in
//!   dimension `k` into one in any multiple `d` of `k` ([`fold_general`]);
//! * the crossover equation `p = b (p + (1 - p)^alpha)`, which turns a bound
//!   `b` in dimension `d` into one in dimension `d + 1` ([`crossover_bound`]).
//!
//! Oriented bond percolation additionally has the closed form
//! `1/d + C_d/d^2` for `d >= 4` ([`oriented_bond_highdim_bound`]).

mod root;
mod table;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Family, ModelError, ModelSpec};

pub use root::{
    certify, solve_bracketed_root, solve_certified, RootCertificate, RootProblem,
    CERTIFICATE_RADIUS, DEFAULT_TOLERANCE, MAX_ITERATIONS,
};
pub use table::{generate_table, BoundTable, TableRow, MAX_TABLE_DIMENSION};

/// Bracket used for every implicit bound equation.
pub const ROOT_BRACKET: (f64, f64) = (1e-9, 1.0 - 1e-9);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("dimension {d} not supported: {reason}")]
    Dimension { d: usize, reason: &'static str },
    #[error("{method} does not apply to the {family} family")]
    WrongFamily { family: Family, method: Method },
    #[error("base bound has dimension {got}, expected {expected}")]
    WrongBaseDimension { expected: usize, got: usize },
    #[error("base value {0} outside (0, 1)")]
    BaseOutOfRange(f64),
    #[error("crossover exponent must exceed 1, got {0}")]
    InvalidExponent(f64),
    #[error("invalid bracket ({lo}, {hi})")]
    InvalidBracket { lo: f64, hi: f64 },
    #[error("residual has no sign change on ({lo}, {hi}): f(lo)={f_lo}, f(hi)={f_hi}")]
    NoSignChange { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    #[error("root finder did not converge (last iterate {last})")]
    NoConvergence { last: f64 },
    #[error("residual scan found {sign_changes} sign changes, expected exactly one")]
    NotUnique { sign_changes: usize },
    #[error("computed bound {0} is not a probability in (0, 1)")]
    OutOfUnitInterval(f64),
    #[error("no registry constant for {family} in dimension {d}")]
    NoRegistryEntry { family: Family, d: usize },
    #[error("invalid dimension range {d_min}..={d_max}")]
    InvalidRange { d_min: usize, d_max: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Which result a bound came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "thm2.1")]
    Thm2_1,
    #[serde(rename = "thm2.2")]
    Thm2_2,
    #[serde(rename = "thm2.3")]
    Thm2_3,
    #[serde(rename = "thm3.1")]
    Thm3_1,
    #[serde(rename = "thm3.2")]
    Thm3_2,
    #[serde(rename = "thm3.3")]
    Thm3_3,
    #[serde(rename = "thm4.1")]
    Thm4_1,
    #[serde(rename = "thm4.2")]
    Thm4_2,
    #[serde(rename = "registry")]
    Registry,
    /// Folding with a divisor the named items do not cover.
    #[serde(rename = "fold")]
    Fold,
}

impl Method {
    pub const ALL: [Method; 11] = [
        Method::Thm1,
        Method::Thm2_1,
        Method::Thm2_2,
        Method::Thm2_3,
        Method::Thm3_1,
        Method::Thm3_2,
        Method::Thm3_3,
        Method::Thm4_1,
        Method::Thm4_2,
        Method::Registry,
        Method::Fold,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Thm1 => "thm1",
            Method::Thm2_1 => "thm2.1",
            Method::Thm2_2 => "thm2.2",
            Method::Thm2_3 => "thm2.3",
            Method::Thm3_1 => "thm3.1",
            Method::Thm3_2 => "thm3.2",
            Method::Thm3_3 => "thm3.3",
            Method::Thm4_1 => "thm4.1",
            Method::Thm4_2 => "thm4.2",
            Method::Registry => "registry",
            Method::Fold => "fold",
        }
    }

    pub fn parse(s: &str) -> Option<Method> {
        Method::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn is_crossover(self) -> bool {
        matches!(self, Method::Thm2_3 | Method::Thm3_3 | Method::Thm4_2)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How a bound was picked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    /// Computed by an explicitly requested method.
    Direct,
    /// The per-family recipe used for the published table (`d <= 9`).
    Recipe,
    /// Minimum over all applicable methods (`d > 9`).
    MethodExtended,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProvenanceStep {
    pub method: Method,
    pub d: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub family: Family,
    pub d: usize,
    pub method: Method,
    pub value: f64,
    /// `value` rounded up at the fourth decimal.
    pub rounded: f64,
    /// Base bounds in the order they were used, ending with this one.
    pub provenance: Vec<ProvenanceStep>,
    pub selection: Selection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<RootCertificate>,
}

impl BoundResult {
    pub fn model(&self) -> ModelSpec {
        ModelSpec::from_family(self.family, self.d).expect("bound dimensions are at least 2")
    }

    fn build(
        family: Family,
        d: usize,
        method: Method,
        value: f64,
        base: Option<&BoundResult>,
        certificate: Option<RootCertificate>,
    ) -> Result<BoundResult, BoundsError> {
        if !(value > 0.0 && value < 1.0) {
            return Err(BoundsError::OutOfUnitInterval(value));
        }
        let mut provenance = base.map(|b| b.provenance.clone()).unwrap_or_default();
        provenance.push(ProvenanceStep { method, d, value });
        Ok(BoundResult {
            family,
            d,
            method,
            value,
            rounded: round_up_4(value),
            provenance,
            selection: Selection::Direct,
            certificate,
        })
    }

    fn selected(mut self, selection: Selection) -> Self {
        self.selection = selection;
        self
    }
}

/// Ceiling at the fourth decimal, so the printed number is still an upper
/// bound.
pub fn round_up_4(value: f64) -> f64 {
    let mut r = (value * 1e4).ceil() / 1e4;
    if r < value {
        r += 1e-4;
    }
    r
}

/// A critical-point bound imported from the literature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnownConstant {
    pub model: ModelSpec,
    pub value: f64,
    pub source_tag: &'static str,
}

pub fn registry() -> [KnownConstant; 4] {
    let entry = |family, d, value, source_tag| KnownConstant {
        model: ModelSpec::from_family(family, d).expect("registry dimensions are valid"),
        value,
        source_tag,
    };
    [
        entry(Family::OrientedBond, 2, 2.0 / 3.0, "Liggett 1995"),
        entry(Family::Site, 2, 0.68, "Wierman 1995"),
        entry(Family::Site, 3, 0.5, "Campanino-Russo 1985"),
        entry(Family::OrientedSite, 2, 0.75, "Liggett 1995"),
    ]
}

pub fn known_constant(family: Family, d: usize) -> Result<KnownConstant, BoundsError> {
    registry()
        .into_iter()
        .find(|c| c.model.family() == family && c.model.d == d)
        .ok_or(BoundsError::NoRegistryEntry { family, d })
}

impl From<&KnownConstant> for BoundResult {
    fn from(c: &KnownConstant) -> Self {
        BoundResult::build(c.model.family(), c.model.d, Method::Registry, c.value, None, None)
            .expect("registry values lie in (0, 1)")
    }
}

/// Exponents `floor((d+i)/3)`, `i = 0, 1, 2`; they sum to `d`.
pub fn theorem1_exponents(d: usize) -> [i32; 3] {
    [0, 1, 2].map(|i| ((d + i) / 3) as i32)
}

/// `prod(1 - (1-p)^a_i) - (2 - sum (1-p)^a_i)`; positive near 0, negative
/// near 1.
pub fn theorem1_residual(d: usize, p: f64) -> f64 {
    let q = 1.0 - p;
    let closed = theorem1_exponents(d).map(|a| q.powi(a));
    let product: f64 = closed.iter().map(|c| 1.0 - c).product();
    product - (2.0 - closed.iter().sum::<f64>())
}

/// `p*(d)` for non-oriented bond percolation, `d >= 3`.
pub fn theorem1_bound(d: usize) -> Result<BoundResult, BoundsError> {
    if d < 3 {
        return Err(BoundsError::Dimension {
            d,
            reason: "the triangular-lattice bound needs d >= 3",
        });
    }
    let problem = RootProblem::new(|p| theorem1_residual(d, p), ROOT_BRACKET);
    let (root, cert) = solve_certified(&problem)?;
    BoundResult::build(Family::Bond, d, Method::Thm1, root, None, Some(cert))
}

/// Folding from dimension `k` to a multiple `d`: the smallest `p` whose
/// folded parameter `1 - (1-p)^{d/k}` reaches the base bound.
pub fn fold_general(d: usize, k: usize, base: &BoundResult) -> Result<BoundResult, BoundsError> {
    if k == 0 || !d.is_multiple_of(k) {
        return Err(BoundsError::Dimension {
            d,
            reason: "folding needs k | d",
        });
    }
    if base.d != k {
        return Err(BoundsError::WrongBaseDimension {
            expected: k,
            got: base.d,
        });
    }
    if d == k {
        return Ok(base.clone());
    }
    let method = match (base.family, k) {
        (Family::OrientedBond, 2) => Method::Thm2_1,
        (Family::Site, 2) => Method::Thm3_1,
        (Family::Site, 3) => Method::Thm3_2,
        (Family::OrientedSite, 2) => Method::Thm4_1,
        _ => Method::Fold,
    };
    let value = 1.0 - (1.0 - base.value).powf(k as f64 / d as f64);
    BoundResult::build(base.family, d, method, value, Some(base), None)
}

/// Item-1 folding of a two-dimensional registry constant to even `d`.
pub fn folded_even_bound(d: usize, base: &KnownConstant) -> Result<BoundResult, BoundsError> {
    if d < 2 || !d.is_multiple_of(2) {
        return Err(BoundsError::Dimension {
            d,
            reason: "even-dimension folding needs even d",
        });
    }
    let family = base.model.family();
    if family == Family::Bond {
        return Err(BoundsError::WrongFamily {
            family,
            method: Method::Fold,
        });
    }
    if base.model.d != 2 {
        return Err(BoundsError::WrongBaseDimension {
            expected: 2,
            got: base.model.d,
        });
    }
    fold_general(d, 2, &BoundResult::from(base))
}

/// `1 - 0.5^{3/d}` for non-oriented site percolation, `3 | d`.
pub fn folded_div3_site_bound(d: usize) -> Result<BoundResult, BoundsError> {
    if d < 3 || !d.is_multiple_of(3) {
        return Err(BoundsError::Dimension {
            d,
            reason: "needs d divisible by 3",
        });
    }
    let base = known_constant(Family::Site, 3)?;
    fold_general(d, 3, &BoundResult::from(&base))
}

/// `C_d = 1 + 8/d + d^{5/2} / sqrt(2 pi)^{d-1} * (d-1)/(d-3) * e^{1/(12d)}`.
pub fn oriented_bond_highdim_constant(d: usize) -> f64 {
    let df = d as f64;
    let sqrt_two_pi = (2.0 * std::f64::consts::PI).sqrt();
    1.0 + 8.0 / df
        + df.powf(2.5) / sqrt_two_pi.powi(d as i32 - 1) * ((df - 1.0) / (df - 3.0))
            * (1.0 / (12.0 * df)).exp()
}

/// `1/d + C_d/d^2` for oriented bond percolation, `d >= 4`.
pub fn oriented_bond_highdim_bound(d: usize) -> Result<BoundResult, BoundsError> {
    if d < 4 {
        return Err(BoundsError::Dimension {
            d,
            reason: "the high-dimensional oriented bound needs d >= 4",
        });
    }
    let df = d as f64;
    let value = 1.0 / df + oriented_bond_highdim_constant(d) / (df * df);
    if value >= 1.0 {
        // Never happens for d >= 4 (the d = 4 value is about 0.83).
        return Err(BoundsError::OutOfUnitInterval(value));
    }
    BoundResult::build(Family::OrientedBond, d, Method::Thm2_2, value, None, None)
}

/// Crossover exponent for a base bound in dimension `base_d`: `(d+1)/d` for
/// the oriented families, `2d/(2d-1)` for non-oriented site.
pub fn crossover_exponent(family: Family, base_d: usize) -> Result<f64, BoundsError> {
    let d = base_d as f64;
    match family {
        Family::OrientedBond | Family::OrientedSite => Ok((d + 1.0) / d),
        Family::Site => Ok(2.0 * d / (2.0 * d - 1.0)),
        Family::Bond => Err(BoundsError::WrongFamily {
            family,
            method: Method::Thm2_3,
        }),
    }
}

/// `p - b (p + (1-p)^alpha)`; strictly increasing in `p`.
pub fn crossover_residual(base: f64, alpha: f64, p: f64) -> f64 {
    p - base * (p + (1.0 - p).powf(alpha))
}

/// Bound in dimension `base.d + 1` from the root of the crossover equation.
pub fn crossover_bound(base: &BoundResult, alpha: f64) -> Result<BoundResult, BoundsError> {
    let method = match base.family {
        Family::OrientedBond => Method::Thm2_3,
        Family::Site => Method::Thm3_3,
        Family::OrientedSite => Method::Thm4_2,
        Family::Bond => {
            return Err(BoundsError::WrongFamily {
                family: base.family,
                method: Method::Thm2_3,
            })
        }
    };
    if !(base.value > 0.0 && base.value < 1.0) {
        return Err(BoundsError::BaseOutOfRange(base.value));
    }
    if !(alpha > 1.0) || !alpha.is_finite() {
        return Err(BoundsError::InvalidExponent(alpha));
    }
    let b = base.value;
    let problem = RootProblem::new(|p| crossover_residual(b, alpha, p), ROOT_BRACKET);
    let (root, cert) = solve_certified(&problem)?;
    debug_assert!(root < b);
    BoundResult::build(base.family, base.d + 1, method, root, Some(base), Some(cert))
}

/// The best bound available for dimension `d - 1` to feed a crossover.
fn crossover_base(family: Family, base_d: usize) -> Result<BoundResult, BoundsError> {
    if base_d == 2 {
        let c = known_constant(family, 2)?;
        Ok(BoundResult::from(&c))
    } else {
        best_bound(family, base_d)
    }
}

fn crossover_from_predecessor(family: Family, d: usize) -> Result<BoundResult, BoundsError> {
    let base = crossover_base(family, d - 1)?;
    crossover_bound(&base, crossover_exponent(family, d - 1)?)
}

/// Computes the bound for `(family, d)` with one specific method.
pub fn bound_by_method(family: Family, d: usize, method: Method) -> Result<BoundResult, BoundsError> {
    let wrong = || BoundsError::WrongFamily { family, method };
    match method {
        Method::Registry => Ok(BoundResult::from(&known_constant(family, d)?)),
        Method::Thm1 if family == Family::Bond => theorem1_bound(d),
        Method::Thm2_1 if family == Family::OrientedBond => {
            folded_even_bound(d, &known_constant(family, 2)?)
        }
        Method::Thm2_2 if family == Family::OrientedBond => oriented_bond_highdim_bound(d),
        Method::Thm3_1 if family == Family::Site => folded_even_bound(d, &known_constant(family, 2)?),
        Method::Thm3_2 if family == Family::Site => folded_div3_site_bound(d),
        Method::Thm4_1 if family == Family::OrientedSite => {
            folded_even_bound(d, &known_constant(family, 2)?)
        }
        Method::Thm2_3 if family == Family::OrientedBond => crossover_from_predecessor(family, d),
        Method::Thm3_3 if family == Family::Site => crossover_from_predecessor(family, d),
        Method::Thm4_2 if family == Family::OrientedSite => crossover_from_predecessor(family, d),
        _ => Err(wrong()),
    }
    .map(|b| b.selected(Selection::Direct))
}

/// Methods that can produce a bound for `(family, d)`.
pub fn applicable_methods(family: Family, d: usize) -> Vec<Method> {
    let even = d.is_multiple_of(2);
    let mut out = Vec::new();
    match family {
        Family::Bond => {
            if d >= 3 {
                out.push(Method::Thm1);
            }
        }
        Family::OrientedBond => {
            if even {
                out.push(Method::Thm2_1);
            }
            if d >= 4 {
                out.push(Method::Thm2_2);
            }
            if d >= 3 {
                out.push(Method::Thm2_3);
            }
        }
        Family::Site => {
            if d == 3 {
                out.push(Method::Registry);
            }
            if even {
                out.push(Method::Thm3_1);
            }
            if d >= 3 && d.is_multiple_of(3) {
                out.push(Method::Thm3_2);
            }
            if d >= 3 {
                out.push(Method::Thm3_3);
            }
        }
        Family::OrientedSite => {
            if even {
                out.push(Method::Thm4_1);
            }
            if d >= 3 {
                out.push(Method::Thm4_2);
            }
        }
    }
    out
}

/// The method the published recipe uses for `d <= 9`.
pub fn recipe_method(family: Family, d: usize) -> Option<Method> {
    if !(3..=9).contains(&d) {
        return None;
    }
    let even = d.is_multiple_of(2);
    Some(match family {
        Family::Bond => Method::Thm1,
        Family::OrientedBond => match d {
            3 | 5 => Method::Thm2_3,
            4 => Method::Thm2_1,
            _ => Method::Thm2_2,
        },
        Family::Site => match d {
            3 => Method::Registry,
            4 | 8 => Method::Thm3_1,
            6 | 9 => Method::Thm3_2,
            _ => Method::Thm3_3,
        },
        Family::OrientedSite if even => Method::Thm4_1,
        Family::OrientedSite => Method::Thm4_2,
    })
}

/// The bound the table reports: the recipe for `d <= 9`, the minimum over
/// applicable methods beyond.
pub fn best_bound(family: Family, d: usize) -> Result<BoundResult, BoundsError> {
    if d < 3 {
        return Err(BoundsError::Dimension {
            d,
            reason: "best_bound covers d >= 3",
        });
    }
    if let Some(method) = recipe_method(family, d) {
        return Ok(bound_by_method(family, d, method)?.selected(Selection::Recipe));
    }
    let mut best: Option<BoundResult> = None;
    for method in applicable_methods(family, d) {
        let candidate = bound_by_method(family, d, method)?;
        if best.as_ref().is_none_or(|b| candidate.value < b.value) {
            best = Some(candidate);
        }
    }
    best.map(|b| b.selected(Selection::MethodExtended))
        .ok_or(BoundsError::Dimension {
            d,
            reason: "no applicable method",
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() < tol
    }

    /// Real root of `s^3 - 3s + 1` in (0, 1).
    fn cubic_root() -> f64 {
        2.0 * (4.0 * std::f64::consts::PI / 9.0).cos()
    }

    /// Residual sign changes on a uniform grid of step `h`.
    fn grid_sign_changes(f: impl Fn(f64) -> f64, h: f64) -> Vec<f64> {
        let n = (1.0 / h) as usize;
        let mut out = Vec::new();
        let mut prev = f(h);
        for i in 2..n {
            let x = i as f64 * h;
            let y = f(x);
            if y.signum() != prev.signum() {
                out.push(x);
            }
            prev = y;
        }
        out
    }

    #[test]
    fn theorem1_d3_is_the_cubic_root() {
        let b = theorem1_bound(3).unwrap();
        assert!(close(b.value, cubic_root(), 1e-10));
        assert_eq!(b.rounded, 0.3473);
        assert_eq!(b.method, Method::Thm1);
        let changes = grid_sign_changes(|p| theorem1_residual(3, p), 1e-6);
        assert_eq!(changes.len(), 1);
        assert!(close(changes[0], b.value, 2e-6));
    }

    #[test]
    fn theorem1_d6_substitutes_into_the_cubic() {
        // All exponents are 2: s = 1 - (1-p)^2 solves the d = 3 cubic.
        let exact = 1.0 - (1.0 - cubic_root()).sqrt();
        let b = theorem1_bound(6).unwrap();
        assert!(close(b.value, exact, 1e-10));
        assert!(close(b.value, 0.192099, 1e-6));
        assert_eq!(b.rounded, 0.1921);
        assert_eq!(grid_sign_changes(|p| theorem1_residual(6, p), 1e-6).len(), 1);
    }

    #[test]
    fn theorem1_rejects_low_dimensions() {
        assert!(matches!(theorem1_bound(2), Err(BoundsError::Dimension { .. })));
    }

    #[test]
    fn theorem1_exponents_partition_d() {
        for d in 3..40 {
            assert_eq!(theorem1_exponents(d).iter().sum::<i32>(), d as i32);
        }
    }

    #[test]
    fn even_folding() {
        let ob = known_constant(Family::OrientedBond, 2).unwrap();
        let d2 = folded_even_bound(2, &ob).unwrap();
        assert_eq!(d2.value, 2.0 / 3.0);
        assert_eq!(folded_even_bound(4, &ob).unwrap().rounded, 0.4227);
        let site = known_constant(Family::Site, 2).unwrap();
        let s8 = folded_even_bound(8, &site).unwrap();
        assert!(close(s8.value, 1.0 - 0.32f64.powf(0.25), 1e-15));
        assert_eq!(s8.rounded, 0.2479);
        assert_eq!(s8.method, Method::Thm3_1);
        assert!(folded_even_bound(5, &ob).is_err());
        let cr = known_constant(Family::Site, 3).unwrap();
        assert!(matches!(
            folded_even_bound(4, &cr),
            Err(BoundsError::WrongBaseDimension { .. })
        ));
    }

    #[test]
    fn div3_folding() {
        assert_eq!(folded_div3_site_bound(3).unwrap().rounded, 0.5);
        assert_eq!(folded_div3_site_bound(6).unwrap().rounded, 0.2929);
        assert_eq!(folded_div3_site_bound(9).unwrap().rounded, 0.2063);
        assert!(folded_div3_site_bound(8).is_err());
    }

    #[test]
    fn highdim_oriented_bond() {
        assert_eq!(oriented_bond_highdim_bound(6).unwrap().rounded, 0.2734);
        assert_eq!(oriented_bond_highdim_bound(9).unwrap().rounded, 0.1371);
        // C_4 = 1 + 2 + 32 / (2 pi)^{3/2} * 3 * e^{1/48}.
        let c4 = 3.0 + 32.0 / (2.0 * std::f64::consts::PI).powf(1.5) * 3.0 * (1.0f64 / 48.0).exp();
        assert!(close(oriented_bond_highdim_constant(4), c4, 1e-12));
        assert!(close(c4, 9.2237, 1e-4));
        assert!(oriented_bond_highdim_bound(4).unwrap().value > 0.5);
        assert!(oriented_bond_highdim_bound(3).is_err());
    }

    #[test]
    fn crossover_examples() {
        let ob = BoundResult::from(&known_constant(Family::OrientedBond, 2).unwrap());
        let r = crossover_bound(&ob, 1.5).unwrap();
        assert_eq!((r.d, r.rounded, r.method), (3, 0.5680, Method::Thm2_3));
        assert_eq!(r.provenance.len(), 2);
        let os = BoundResult::from(&known_constant(Family::OrientedSite, 2).unwrap());
        assert_eq!(crossover_bound(&os, 1.5).unwrap().rounded, 0.6422);
        let cert = r.certificate.unwrap();
        assert!(cert.is_valid(1e-12));
    }

    #[test]
    fn crossover_near_one_goes_to_one() {
        let mut base = BoundResult::from(&known_constant(Family::OrientedSite, 2).unwrap());
        base.value = 1.0 - 1e-7;
        let r = crossover_bound(&base, 1.5).unwrap();
        assert!(r.value > 0.99 && r.value < base.value);
        base.value = 1.0;
        assert_eq!(crossover_bound(&base, 1.5), Err(BoundsError::BaseOutOfRange(1.0)));
    }

    #[test]
    fn crossover_rejects_bad_inputs() {
        let os = BoundResult::from(&known_constant(Family::OrientedSite, 2).unwrap());
        assert!(matches!(crossover_bound(&os, 1.0), Err(BoundsError::InvalidExponent(_))));
        let bond = theorem1_bound(3).unwrap();
        assert!(matches!(crossover_bound(&bond, 1.5), Err(BoundsError::WrongFamily { .. })));
    }

    #[test]
    fn fold_general_identities() {
        let ob = BoundResult::from(&known_constant(Family::OrientedBond, 2).unwrap());
        assert_eq!(fold_general(2, 2, &ob).unwrap(), ob);
        let a = fold_general(4, 2, &ob).unwrap();
        let b = folded_even_bound(4, &known_constant(Family::OrientedBond, 2).unwrap()).unwrap();
        assert_eq!(a.value, b.value);
        let cr = BoundResult::from(&known_constant(Family::Site, 3).unwrap());
        assert_eq!(fold_general(9, 3, &cr).unwrap().rounded, 0.2063);
        assert!(fold_general(9, 2, &ob).is_err());
        assert!(matches!(
            fold_general(8, 4, &ob),
            Err(BoundsError::WrongBaseDimension { .. })
        ));
    }

    #[test]
    fn best_bound_recipe_examples() {
        let s3 = best_bound(Family::Site, 3).unwrap();
        assert_eq!((s3.rounded, s3.method), (0.5, Method::Registry));
        let ob5 = best_bound(Family::OrientedBond, 5).unwrap();
        assert_eq!((ob5.rounded, ob5.method), (0.3926, Method::Thm2_3));
        assert_eq!(ob5.provenance[ob5.provenance.len() - 2].value, best_bound(Family::OrientedBond, 4).unwrap().value);
        let s7 = best_bound(Family::Site, 7).unwrap();
        let s6 = best_bound(Family::Site, 6).unwrap();
        assert_eq!(s7.method, Method::Thm3_3);
        assert_eq!(s7.value, crossover_bound(&s6, 12.0 / 11.0).unwrap().value);
        assert_eq!(s7.rounded, 0.2866);
        assert_eq!(best_bound(Family::OrientedSite, 7).unwrap().rounded, 0.3533);
        assert!(best_bound(Family::Bond, 2).is_err());
    }

    #[test]
    fn extended_dimensions_take_the_minimum() {
        for family in Family::ALL {
            let b = best_bound(family, 12).unwrap();
            assert_eq!(b.selection, Selection::MethodExtended);
            for m in applicable_methods(family, 12) {
                assert!(b.value <= bound_by_method(family, 12, m).unwrap().value);
            }
        }
    }

    #[test]
    fn bounds_decrease_with_dimension() {
        for family in Family::ALL {
            let values: Vec<f64> = (3..=16).map(|d| best_bound(family, d).unwrap().value).collect();
            assert!(values.windows(2).all(|w| w[1] < w[0]), "{family}: {values:?}");
        }
    }

    #[test]
    fn registry_has_four_entries() {
        let r = registry();
        assert_eq!(r.len(), 4);
        assert_eq!(bound_by_method(Family::OrientedBond, 2, Method::Registry).unwrap().rounded, 0.6667);
    }

    #[test]
    fn round_up_examples() {
        assert_eq!(round_up_4(0.5), 0.5);
        assert_eq!(round_up_4(0.34729635), 0.3473);
        assert_eq!(round_up_4(0.1921), 0.1921);
        assert_eq!(round_up_4(2.0 / 3.0), 0.6667);
    }

    #[test]
    fn json_shape() {
        let b = best_bound(Family::OrientedBond, 3).unwrap();
        let v = serde_json::to_value(&b).unwrap();
        assert_eq!(v["family"], "oriented-bond");
        assert_eq!(v["d"], 3);
        assert_eq!(v["method"], "thm2.3");
        assert_eq!(v["provenance"][0]["method"], "registry");
        assert_eq!(v["provenance"][1]["d"], 3);
        let back: BoundResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, b);
    }

    proptest! {
        #[test]
        fn round_up_is_safe(v in 1e-6f64..0.9999) {
            let r = round_up_4(v);
            prop_assert!(r >= v);
            prop_assert!(r - v < 1e-4);
        }

        #[test]
        fn crossover_contracts(b in 0.05f64..0.95, alpha_idx in 0usize..4) {
            let alpha = [1.5, 1.25, 12.0 / 11.0, 8.0 / 7.0][alpha_idx];
            let mut base = BoundResult::from(&known_constant(Family::OrientedSite, 2).unwrap());
            base.value = b;
            let r = crossover_bound(&base, alpha).unwrap();
            prop_assert!(r.value < b);
            let cert = r.certificate.unwrap();
            prop_assert!(cert.is_valid(1e-12));
        }

        #[test]
        fn fold_is_monotone_in_base(a in 0.01f64..0.99, b in 0.01f64..0.99, k in 1usize..4, m in 1usize..5) {
            let mut lo = BoundResult::from(&known_constant(Family::OrientedSite, 2).unwrap());
            lo.d = k;
            lo.value = a.min(b);
            let mut hi = lo.clone();
            hi.value = a.max(b);
            let d = k * m;
            let fl = fold_general(d, k, &lo).unwrap().value;
            let fh = fold_general(d, k, &hi).unwrap().value;
            prop_assert!(fl <= fh);
        }
    }
}
