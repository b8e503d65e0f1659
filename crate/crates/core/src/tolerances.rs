//! Named tolerances of the acceptance checks and their overrides.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `measured < threshold`
    Below,
    /// `measured > threshold`
    Above,
    /// `measured >= threshold`
    AtLeast,
}

impl Bound {
    pub fn holds(self, measured: f64, threshold: f64) -> bool {
        match self {
            Bound::Below => measured < threshold,
            Bound::Above => measured > threshold,
            Bound::AtLeast => measured >= threshold,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ToleranceSpec {
    pub name: &'static str,
    pub criterion: u8,
    pub default: f64,
    pub bound: Bound,
    pub what: &'static str,
}

const fn tol(name: &'static str, criterion: u8, default: f64, bound: Bound, what: &'static str) -> ToleranceSpec {
    ToleranceSpec { name, criterion, default, bound, what }
}

pub const TOLERANCES: &[ToleranceSpec] = &[
    tol("delta_inner", 1, 1e-4, Bound::Below, "grid delta inner products vs e^{-(a-b)^2/2}"),
    tol("delta_closed_form", 1, 1e-15, Bound::Below, "closed-form delta inner products"),
    tol("dual_metric", 2, 1e-6, Bound::Below, "rho rho* vs assembled gauss_metric, up to a scalar"),
    tol("fourier_offdiag", 3, 1e-6, Bound::Below, "off-diagonal mass of sigma(-iD)sigma^-1"),
    tol("eigen_integer", 3, 1e-8, Bound::Below, "distance of -iD eigenvalues to integers"),
    tol("eigen_count_mismatch", 3, 0.5, Bound::Below, "missing or extra eigenvalues in |p| <= max"),
    tol("law_scalar", 4, 1e-8, Bound::Below, "F(Phi) under a change of coordinates"),
    tol("law_inner", 4, 1e-8, Bound::Below, "inner products under the pushed metric"),
    tol("law_spectrum", 4, 1e-8, Bound::Below, "spectra under conjugation"),
    tol("proper_metric_offdiag", 5, 1e-8, Bound::Below, "metric in the proper basis"),
    tol("proper_offdiag", 5, 1e-9, Bound::Below, "kappa A kappa^-1 in the proper basis"),
    tol("isometry", 6, 1e-9, Bound::Below, "|‖Af‖_H / ‖f‖ - 1|"),
    tol("locality_d", 7, 1e-5, Bound::Below, "gauss_rho conjugation of D"),
    tol("locality_d2", 7, 1e-5, Bound::Below, "gauss_rho conjugation of D^2"),
    tol("xd_to_d", 7, 1e-3, Bound::Below, "e^{xe^{-y}} intertwining xD and D"),
    tol("product_control", 7, 1e-2, Bound::Above, "product non-invariance (must be large)"),
    tol("metric_analytic", 8, 1e-12, Bound::Below, "analytic induced metric of gauss_metric"),
    tol("metric_fd", 8, 1e-7, Bound::Below, "finite-difference induced metric"),
    tol("minkowski_eta", 8, 1e-12, Bound::Below, "Minkowski induced metric vs eta"),
    tol("null_form", 8, 1e-10, Bound::Below, "quadratic form on a null line"),
    tol("unit_speed_form", 8, 1e-10, Bound::Below, "quadratic form on a unit-speed circle"),
    tol("mollifier", 9, 1e-3, Bound::Below, "mollified path norm vs quadratic form"),
    tol("mollifier_order", 9, 1.8, Bound::AtLeast, "observed convergence order in 1/L"),
    tol("gram_min_eig", 10, 0.0, Bound::Above, "smallest Gram eigenvalue of distinct deltas"),
    tol("gram_separation", 10, 1e-6, Bound::Below, "pairing of deltas 8 apart"),
    tol("geodesic_residual", 11, 1e-8, Bound::Below, "geodesic equation along Schrodinger flow"),
    tol("geodesic_flow", 11, 1e-6, Bound::Below, "RK4 geodesic vs exact flow at tau_end"),
    tol("norm_drift", 11, 1e-7, Bound::Below, "| ‖phi‖ - 1 | and tangency along RK4 paths"),
    tol("levi_civita", 11, 1e-6, Bound::Below, "Koszul identity by finite differences"),
    tol("csv_mismatch", 12, 0.5, Bound::Below, "CSV tables differing between two runs"),
];

pub const CRITERIA: [&str; 12] = [
    "delta inner products",
    "dual-metric identity",
    "Fourier diagonalization",
    "transformation-law invariance",
    "proper-basis orthogonality",
    "unbounded-operator metric",
    "locality preservation",
    "induced metrics",
    "mollifier cross-check",
    "Gram structure",
    "Schrodinger as geodesic",
    "determinism",
];

pub fn spec(name: &str) -> Option<&'static ToleranceSpec> {
    TOLERANCES.iter().find(|t| t.name == name)
}

/// Active thresholds: defaults plus overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Tolerances {
    overrides: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub bound: Bound,
    pub passed: bool,
}

impl Tolerances {
    pub fn new() -> Self {
        Tolerances::default()
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if spec(name).is_none() {
            let known: Vec<&str> = TOLERANCES.iter().map(|t| t.name).collect();
            return Err(Error::InvalidArgument(format!(
                "unknown tolerance `{name}` (known: {})",
                known.join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidArgument(format!("tolerance `{name}` must be finite")));
        }
        self.overrides.insert(name.to_string(), value);
        Ok(())
    }

    /// Parses `NAME=VALUE`.
    pub fn set_from_arg(&mut self, arg: &str) -> Result<()> {
        let Some((name, value)) = arg.split_once('=') else {
            return Err(Error::InvalidArgument(format!("expected NAME=VALUE, got `{arg}`")));
        };
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("tolerance value `{value}` is not a number")))?;
        self.set(name.trim(), value)
    }

    pub fn overrides(&self) -> &BTreeMap<String, f64> {
        &self.overrides
    }

    pub fn threshold(&self, name: &str) -> f64 {
        match self.overrides.get(name) {
            Some(v) => *v,
            None => spec(name).map(|t| t.default).unwrap_or(f64::NAN),
        }
    }

    pub fn check(&self, name: &str, measured: f64) -> Check {
        let spec = spec(name).unwrap_or_else(|| panic!("tolerance `{name}` is not declared"));
        let threshold = self.threshold(name);
        Check {
            name: name.to_string(),
            measured,
            threshold,
            bound: spec.bound,
            passed: !measured.is_nan() && spec.bound.holds(measured, threshold),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_is_consistent() {
        let mut names: Vec<&str> = TOLERANCES.iter().map(|t| t.name).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), TOLERANCES.len());
        for k in 1..=12u8 {
            assert!(TOLERANCES.iter().any(|t| t.criterion == k));
        }
    }

    #[test]
    fn overrides_and_bounds() {
        let mut t = Tolerances::new();
        assert!(t.check("dual_metric", 5e-7).passed);
        assert!(!t.check("dual_metric", 2e-6).passed);
        assert!(!t.check("dual_metric", f64::NAN).passed);
        t.set_from_arg("dual_metric=1e-5").unwrap();
        assert!(t.check("dual_metric", 2e-6).passed);
        assert!(t.check("mollifier_order", 1.8).passed);
        assert!(!t.check("gram_min_eig", 0.0).passed);
        assert!(t.set("nope", 1.0).is_err());
        assert!(t.set_from_arg("dual_metric").is_err());
        assert!(t.set_from_arg("dual_metric=abc").is_err());
        assert_eq!(t.overrides().len(), 1);
    }
}
