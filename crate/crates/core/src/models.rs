//! Hamiltonian families and their parameter-derivative (driving) operators.
//!
//! Three SU(2)-symmetric periodic chains are supported:
//!
//! - [`ModelFamily::DimerizedSpinHalf`]:
//!   `H = sum_i (J1 S_{2i-1}.S_{2i} + J2 S_{2i}.S_{2i+1})` with `J2 = alpha` by default.
//! - [`ModelFamily::MixedSpinDimer`]: the same alternating bonds on a chain of
//!   alternating spin-1/2 and spin-S sites.
//! - [`ModelFamily::BilinearBiquadratic`]:
//!   `H = sum_i [cos(theta) S_i.S_{i+1} + sin(theta) (S_i.S_{i+1})^2]` on spin-1 sites.
//!
//! Operators are matrix-free sums of bond terms over a [`SectorBasis`].

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{accumulate_heisenberg, enumerate_sector, HalfInt, SectorBasis, SiteSpec, Spin, StateVector};

/// Smallest dimerization used by the susceptibility routes.
pub const ALPHA_MIN: f64 = 1e-3;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFamily {
    DimerizedSpinHalf,
    MixedSpinDimer { spin: Spin },
    BilinearBiquadratic,
}

impl ModelFamily {
    pub fn name(&self) -> &'static str {
        match self {
            ModelFamily::DimerizedSpinHalf => "dimer",
            ModelFamily::MixedSpinDimer { .. } => "mixed",
            ModelFamily::BilinearBiquadratic => "bb",
        }
    }

    /// Name of the control parameter (`alpha` or `theta`).
    pub fn param_name(&self) -> &'static str {
        match self {
            ModelFamily::BilinearBiquadratic => "theta",
            _ => "alpha",
        }
    }
}

/// One member of a model family at a fixed control parameter.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    pub n_sites: usize,
    /// Control parameter: `alpha` for the dimer families, `theta` (radians) for BB.
    pub param: f64,
    /// Strength of the intra-cell bonds `(2i-1, 2i)`.
    pub j1: f64,
    /// Strength of the inter-cell bonds `(2i, 2i+1)`. `None` ties it to `param`.
    pub j2: Option<f64>,
}

impl ModelSpec {
    pub fn dimer(n_sites: usize, alpha: f64) -> Self {
        ModelSpec { family: ModelFamily::DimerizedSpinHalf, n_sites, param: alpha, j1: 1.0, j2: None }
    }

    pub fn mixed(cells: usize, spin: Spin, alpha: f64) -> Self {
        ModelSpec {
            family: ModelFamily::MixedSpinDimer { spin },
            n_sites: 2 * cells,
            param: alpha,
            j1: 1.0,
            j2: None,
        }
    }

    pub fn bilinear_biquadratic(n_sites: usize, theta: f64) -> Self {
        ModelSpec { family: ModelFamily::BilinearBiquadratic, n_sites, param: theta, j1: 1.0, j2: None }
    }

    /// Dimerized chain with both couplings fixed; `param` no longer enters `H`.
    pub fn dimer_with_couplings(n_sites: usize, j1: f64, j2: f64) -> Self {
        ModelSpec { family: ModelFamily::DimerizedSpinHalf, n_sites, param: j2, j1, j2: Some(j2) }
    }

    pub fn with_param(&self, param: f64) -> Self {
        ModelSpec { param, ..self.clone() }
    }

    /// Effective inter-cell coupling.
    pub fn j2_effective(&self) -> f64 {
        self.j2.unwrap_or(self.param)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.param.is_finite() || !self.j1.is_finite() || !self.j2_effective().is_finite() {
            return Err(Error::InvalidSpec("non-finite parameter".into()));
        }
        match self.family {
            ModelFamily::DimerizedSpinHalf | ModelFamily::MixedSpinDimer { .. } => {
                // N = 2 is a single doubly-counted bond, kept for unit tests.
                if !self.n_sites.is_multiple_of(2) || self.n_sites < 2 {
                    return Err(Error::InvalidSpec(format!(
                        "dimer chains need an even number of sites, got {}",
                        self.n_sites
                    )));
                }
            }
            ModelFamily::BilinearBiquadratic => {
                if self.n_sites < 2 {
                    return Err(Error::InvalidSpec("need at least 2 sites".into()));
                }
            }
        }
        Ok(())
    }

    pub fn site_spec(&self) -> Result<SiteSpec> {
        self.validate()?;
        match self.family {
            ModelFamily::DimerizedSpinHalf => SiteSpec::uniform(self.n_sites, Spin::HALF),
            ModelFamily::MixedSpinDimer { spin } => {
                SiteSpec::alternating(self.n_sites / 2, Spin::HALF, spin)
            }
            ModelFamily::BilinearBiquadratic => SiteSpec::uniform(self.n_sites, Spin::ONE),
        }
    }

    /// Nearest-neighbour bonds `(i, i+1 mod N)` in order, tagged intra (even `i`) or inter-cell.
    fn bonds(&self) -> Vec<(usize, usize)> {
        let n = self.n_sites;
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    }

    fn check_basis(&self, basis: &SectorBasis) -> Result<()> {
        let expected = self.site_spec()?;
        if basis.sites() != &expected {
            return Err(Error::SpecMismatch(format!(
                "basis sites {:?} do not match a {} chain of {} sites",
                basis.sites().spins().iter().map(|s| s.to_string()).collect::<Vec<_>>(),
                self.family.name(),
                self.n_sites
            )));
        }
        Ok(())
    }
}

/// A linear map on a fixed vector space, applied without materializing a matrix.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Overwrites `y` with `A x`.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);

    fn apply(&self, x: &StateVector) -> StateVector {
        let mut y = vec![0.0; self.dim()];
        self.apply_into(x.as_slice(), &mut y);
        StateVector::new(y)
    }
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub enum BondKind {
    Heisenberg,
    Biquadratic,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct BondTerm {
    pub i: usize,
    pub j: usize,
    pub kind: BondKind,
    pub coupling: f64,
}

/// Sum of bond terms acting on one Sz sector.
#[derive(Clone, Debug)]
pub struct SectorOperator {
    basis: Arc<SectorBasis>,
    terms: Vec<BondTerm>,
}

impl SectorOperator {
    pub fn new(basis: Arc<SectorBasis>, terms: Vec<BondTerm>) -> Self {
        SectorOperator { basis, terms }
    }

    pub fn basis(&self) -> &Arc<SectorBasis> {
        &self.basis
    }

    pub fn terms(&self) -> &[BondTerm] {
        &self.terms
    }
}

impl LinearOperator for SectorOperator {
    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = Vec::new();
        for t in &self.terms {
            if t.coupling == 0.0 {
                continue;
            }
            match t.kind {
                BondKind::Heisenberg => accumulate_heisenberg(&self.basis, t.i, t.j, t.coupling, x, y),
                BondKind::Biquadratic => {
                    tmp.clear();
                    tmp.resize(x.len(), 0.0);
                    accumulate_heisenberg(&self.basis, t.i, t.j, 1.0, x, &mut tmp);
                    accumulate_heisenberg(&self.basis, t.i, t.j, t.coupling, &tmp, y);
                }
            }
        }
    }
}

fn heis(i: usize, j: usize, coupling: f64) -> BondTerm {
    BondTerm { i, j, kind: BondKind::Heisenberg, coupling }
}

fn biq(i: usize, j: usize, coupling: f64) -> BondTerm {
    BondTerm { i, j, kind: BondKind::Biquadratic, coupling }
}

/// Builds `H` for `spec` on `basis`.
pub fn hamiltonian(spec: &ModelSpec, basis: Arc<SectorBasis>) -> Result<SectorOperator> {
    spec.check_basis(&basis)?;
    let terms = match spec.family {
        ModelFamily::DimerizedSpinHalf | ModelFamily::MixedSpinDimer { .. } => spec
            .bonds()
            .into_iter()
            .map(|(i, j)| heis(i, j, if i % 2 == 0 { spec.j1 } else { spec.j2_effective() }))
            .collect(),
        ModelFamily::BilinearBiquadratic => {
            let (s, c) = spec.param.sin_cos();
            spec.bonds()
                .into_iter()
                .flat_map(|(i, j)| [heis(i, j, spec.j1 * c), biq(i, j, spec.j1 * s)])
                .collect()
        }
    };
    Ok(SectorOperator::new(basis, terms))
}

/// Builds the driving operator `dH/dparam`.
pub fn driving_operator(spec: &ModelSpec, basis: Arc<SectorBasis>) -> Result<SectorOperator> {
    spec.check_basis(&basis)?;
    let terms = match spec.family {
        ModelFamily::DimerizedSpinHalf | ModelFamily::MixedSpinDimer { .. } => {
            let weight = if spec.j2.is_some() { 0.0 } else { 1.0 };
            spec.bonds()
                .into_iter()
                .filter(|(i, _)| i % 2 == 1)
                .map(|(i, j)| heis(i, j, weight))
                .collect()
        }
        ModelFamily::BilinearBiquadratic => {
            let (s, c) = spec.param.sin_cos();
            spec.bonds()
                .into_iter()
                .flat_map(|(i, j)| [heis(i, j, -spec.j1 * s), biq(i, j, spec.j1 * c)])
                .collect()
        }
    };
    Ok(SectorOperator::new(basis, terms))
}

/// Total Sz of the sector holding the ground multiplet's top-weight member.
///
/// Singlet ground states for the uniform-spin chains; the Lieb-Mattis value
/// `(N/2)(S - 1/2)` for the mixed-spin chain.
pub fn ground_sector(spec: &ModelSpec) -> HalfInt {
    match spec.family {
        ModelFamily::MixedSpinDimer { spin } => {
            let cells = (spec.n_sites / 2) as i64;
            HalfInt::from_twice(cells * (spin.twice() as i64 - 1))
        }
        _ => HalfInt::ZERO,
    }
}

/// Enumerates the ground sector of `spec`.
pub fn ground_basis(spec: &ModelSpec) -> Result<Arc<SectorBasis>> {
    Ok(Arc::new(enumerate_sector(&spec.site_spec()?, ground_sector(spec))?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimer_n4_driving_operator_terms() {
        let spec = ModelSpec::dimer(4, 0.3);
        let op = driving_operator(&spec, ground_basis(&spec).unwrap()).unwrap();
        let pairs: Vec<_> = op.terms().iter().map(|t| (t.i, t.j)).collect();
        assert_eq!(pairs, vec![(1, 2), (3, 0)]);
    }

    #[test]
    fn hamiltonian_couplings_alternate() {
        let spec = ModelSpec::dimer(6, 0.4);
        let op = hamiltonian(&spec, ground_basis(&spec).unwrap()).unwrap();
        let c: Vec<_> = op.terms().iter().map(|t| t.coupling).collect();
        assert_eq!(c, vec![1.0, 0.4, 1.0, 0.4, 1.0, 0.4]);
    }

    #[test]
    fn ground_sectors() {
        assert_eq!(ground_sector(&ModelSpec::dimer(8, 0.5)), HalfInt::ZERO);
        assert_eq!(ground_sector(&ModelSpec::mixed(3, Spin::ONE, 0.5)), HalfInt::from_twice(3));
        assert_eq!(ground_sector(&ModelSpec::mixed(3, Spin::HALF, 0.5)), HalfInt::ZERO);
        assert_eq!(ground_sector(&ModelSpec::bilinear_biquadratic(6, 0.1)), HalfInt::ZERO);
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let bb = ModelSpec::bilinear_biquadratic(4, 0.0);
        let dimer_basis = ground_basis(&ModelSpec::dimer(4, 1.0)).unwrap();
        assert!(matches!(hamiltonian(&bb, dimer_basis), Err(Error::SpecMismatch(_))));
    }

    #[test]
    fn odd_dimer_chain_is_invalid() {
        assert!(ModelSpec::dimer(5, 1.0).validate().is_err());
    }

    #[test]
    fn bb_driving_operator_at_zero_is_pure_biquadratic() {
        let spec = ModelSpec::bilinear_biquadratic(4, 0.0);
        let op = driving_operator(&spec, ground_basis(&spec).unwrap()).unwrap();
        for t in op.terms() {
            match t.kind {
                BondKind::Heisenberg => assert_eq!(t.coupling, 0.0),
                BondKind::Biquadratic => assert_eq!(t.coupling, 1.0),
            }
        }
    }
}
