//! Closed-form references: the exact four-site dimer chain and the
//! power-law fit of the thermodynamic-limit energy near `alpha = 1`.
//!
//! Near the uniform point the thermodynamic formulas are written in
//! `eta = (1 - alpha) / (1 + alpha)` so that no `1 - alpha` is ever formed.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fidelity::rfs_energy_dimer;

/// Energy per spin and its first two `alpha`-derivatives for the four-site ring.
pub fn n4_energy(alpha: f64) -> (f64, f64, f64) {
    let q = 1.0 - alpha + alpha * alpha;
    let r = q.sqrt();
    let e0 = -0.25 * (0.5 * (1.0 + alpha) + r);
    let de0 = 0.125 * (-1.0 + (1.0 - 2.0 * alpha) / r);
    let d2e0 = -3.0 / (16.0 * q * r);
    (e0, de0, d2e0)
}

/// Common value of both nearest-neighbour susceptibilities of the four-site ring.
pub fn n4_rfs(alpha: f64) -> f64 {
    let q = 1.0 - alpha + alpha * alpha;
    3.0 / (16.0 * q * q)
}

/// Parameters of `e0(eta) = (e00 - c eta^p) / (1 + eta)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ThermoParams {
    pub c: f64,
    pub p: f64,
    /// Uniform-chain energy per spin, `1/4 - ln 2`.
    pub e00: f64,
}

impl Default for ThermoParams {
    fn default() -> Self {
        ThermoParams { c: 0.3891, p: 1.4417, e00: 0.25 - std::f64::consts::LN_2 }
    }
}

impl ThermoParams {
    /// `eta` window over which the default `c`, `p` were fitted.
    pub const FIT_RANGE: (f64, f64) = (0.001, 0.1);

    pub fn new(c: f64, p: f64) -> Result<Self> {
        ThermoParams { c, p, ..Default::default() }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.p > 1.0 && self.p < 2.0) {
            return Err(Error::DomainViolation(format!("exponent p = {} outside (1, 2)", self.p)));
        }
        if !(self.c > 0.0) {
            return Err(Error::DomainViolation(format!("constant c = {} is not positive", self.c)));
        }
        Ok(self)
    }

    /// Divergence exponent of both susceptibilities in `eta`.
    pub fn exponent(&self) -> f64 {
        2.0 * self.p - 4.0
    }
}

/// The pair `eta = (1 - alpha)/(1 + alpha)`, `alpha = (1 - eta)/(1 + eta)`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct EtaAlpha {
    pub eta: f64,
    pub alpha: f64,
}

impl EtaAlpha {
    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::DomainViolation(format!("alpha = {alpha} outside [0, 1)")));
        }
        Ok(EtaAlpha { eta: (1.0 - alpha) / (1.0 + alpha), alpha })
    }

    pub fn from_eta(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::DomainViolation(format!("eta = {eta} outside (0, 1]")));
        }
        Ok(EtaAlpha { eta, alpha: (1.0 - eta) / (1.0 + eta) })
    }
}

fn check_eta(eta: f64) -> Result<()> {
    if eta > 0.0 && eta < 1.0 {
        Ok(())
    } else {
        Err(Error::DomainViolation(format!("eta = {eta} outside (0, 1)")))
    }
}

pub fn thermo_energy(eta: f64, params: &ThermoParams) -> Result<f64> {
    check_eta(eta)?;
    Ok((params.e00 - params.c * eta.powf(params.p)) / (1.0 + eta))
}

/// `(de0/dalpha, d2e0/dalpha2)` as functions of `eta`.
///
/// `de0 = e00/2 + (c/2) (p + (p-1) eta) eta^(p-1)` and
/// `d2e0 = -(c/4) p (p-1) (1+eta)^3 eta^(p-2)`.
pub fn thermo_derivatives_eta(eta: f64, params: &ThermoParams) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let ThermoParams { c, p, e00 } = *params;
    let de0 = 0.5 * e00 + 0.5 * c * (p + (p - 1.0) * eta) * eta.powf(p - 1.0);
    let d2e0 = -0.25 * c * p * (p - 1.0) * (1.0 + eta).powi(3) * eta.powf(p - 2.0);
    Ok((de0, d2e0))
}

pub fn thermo_derivatives(alpha: f64, params: &ThermoParams) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainViolation(format!("alpha = {alpha} outside (0, 1)")));
    }
    thermo_derivatives_eta(EtaAlpha::from_alpha(alpha)?.eta, params)
}

/// `(chi12, chi23)` of the infinite chain at `eta`.
pub fn thermo_rfs_eta(eta: f64, params: &ThermoParams) -> Result<(f64, f64)> {
    let e0 = thermo_energy(eta, params)?;
    let (de0, d2e0) = thermo_derivatives_eta(eta, params)?;
    rfs_energy_dimer(e0, de0, d2e0, (1.0 - eta) / (1.0 + eta))
}

pub fn thermo_rfs(alpha: f64, params: &ThermoParams) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainViolation(format!("alpha = {alpha} outside (0, 1)")));
    }
    thermo_rfs_eta(EtaAlpha::from_alpha(alpha)?.eta, params)
}

/// The fully expanded rational forms of `(chi12, chi23)` in `eta`, sign as
/// they are usually printed. Only the magnitude is meaningful.
pub fn thermo_rfs_expanded(eta: f64, params: &ThermoParams) -> Result<(f64, f64)> {
    check_eta(eta)?;
    let ThermoParams { c, p, .. } = *params;
    let ln2 = std::f64::consts::LN_2;
    let a = p + eta - p * eta;
    let b = p - eta + p * eta;
    let num = c * c * p * p * (p - 1.0).powi(2) * eta.powf(2.0 * p - 2.0);
    let e2p = eta.powf(2.0 * p);
    let e1p = eta.powf(1.0 + p);
    let tail = ln2 * (ln2 - 1.0) * eta * eta;
    let chi12 = -num * (eta - 1.0).powi(2) * (eta + 1.0).powi(4)
        / (16.0 * (c * c * a * a * e2p + c * (2.0 * ln2 - 1.0) * a * e1p + tail));
    let chi23 =
        -num * (eta + 1.0).powi(6) / (16.0 * (c * c * b * b * e2p - c * (2.0 * ln2 - 1.0) * b * e1p + tail));
    Ok((chi12, chi23))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::DomainViolation("slope fit needs two or more paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::DomainViolation("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

/// `n` points spaced evenly in `ln x` from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// One row of the `analytic` output.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalyticRecord {
    pub alpha: f64,
    pub n4_e0: f64,
    pub n4_de0: f64,
    pub n4_d2e0: f64,
    pub n4_chi: f64,
    pub eta: Option<f64>,
    pub thermo_e0: Option<f64>,
    pub thermo_de0: Option<f64>,
    pub thermo_d2e0: Option<f64>,
    pub thermo_chi12: Option<f64>,
    pub thermo_chi23: Option<f64>,
    /// `eta^(2p-4)`, the leading divergence.
    pub power_law: Option<f64>,
}

/// Four-site and thermodynamic curves on an `alpha` grid. Thermodynamic
/// columns are empty outside `0 < alpha < 1`.
pub fn analytic_curves(grid: &[f64], params: &ThermoParams) -> Vec<AnalyticRecord> {
    grid.iter()
        .map(|&alpha| {
            let (n4_e0, n4_de0, n4_d2e0) = n4_energy(alpha);
            let thermo = (alpha > 0.0 && alpha < 1.0)
                .then(|| {
                    let eta = EtaAlpha::from_alpha(alpha).ok()?.eta;
                    let e0 = thermo_energy(eta, params).ok()?;
                    let (de0, d2e0) = thermo_derivatives_eta(eta, params).ok()?;
                    let chi = thermo_rfs_eta(eta, params).ok();
                    Some((eta, e0, de0, d2e0, chi))
                })
                .flatten();
            AnalyticRecord {
                alpha,
                n4_e0,
                n4_de0,
                n4_d2e0,
                n4_chi: n4_rfs(alpha),
                eta: thermo.map(|t| t.0),
                thermo_e0: thermo.map(|t| t.1),
                thermo_de0: thermo.map(|t| t.2),
                thermo_d2e0: thermo.map(|t| t.3),
                thermo_chi12: thermo.and_then(|t| t.4).map(|c| c.0),
                thermo_chi23: thermo.and_then(|t| t.4).map(|c| c.1),
                power_law: thermo.map(|t| t.0.powf(params.exponent())),
            }
        })
        .collect()
}
