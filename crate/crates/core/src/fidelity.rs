//! Fidelities and (reduced) fidelity susceptibilities.
//!
//! Every susceptibility can be reached by several independent routes:
//!
//! | route        | input                                                        |
//! |--------------|--------------------------------------------------------------|
//! | `uhlmann`    | Uhlmann fidelity of pair matrices at `param +- delta/2`       |
//! | `spectra`    | pair-matrix eigenvalues and their parameter derivatives      |
//! | `correlator` | a bond correlator and its derivative                         |
//! | `energy`     | energy per spin and its first two derivatives                |
//! | `global`     | overlap of the full ground states at `param +- delta/2`       |

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::eig::{ground_state, GroundStateResult, SolverOptions};
use crate::error::{Error, Result};
use crate::hilbert::{Spin, StateVector};
use crate::linalg::{jacobi_eigen, spectral_map};
use crate::models::ModelSpec;
use crate::observables::{TwoSiteDensityMatrix, PAIR_EIGEN_TOL};

/// Smallest fidelity offset accepted by [`susceptibility_fd`].
pub const MIN_FD_DELTA: f64 = 1e-6;
/// Eigenvalues down to this value are clamped to zero; below it a matrix is not PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Commutator size under which the joint-diagonalization path is taken.
pub const COMMUTING_TOL: f64 = 1e-10;
/// Eigenvalues below this are dropped from the commuting-spectra sum.
pub const ZERO_EIGENVALUE: f64 = 1e-12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Uhlmann,
    Spectra,
    Correlator,
    Energy,
    Global,
}

impl Route {
    pub const ALL: [Route; 5] = [Route::Uhlmann, Route::Spectra, Route::Correlator, Route::Energy, Route::Global];

    pub fn name(self) -> &'static str {
        match self {
            Route::Uhlmann => "uhlmann",
            Route::Spectra => "spectra",
            Route::Correlator => "correlator",
            Route::Energy => "energy",
            Route::Global => "global",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Route {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Route::ALL
            .into_iter()
            .find(|r| r.name() == s.trim())
            .ok_or_else(|| Error::InvalidSweep(format!("unknown route {s:?}")))
    }
}

/// Nearest-neighbour susceptibilities obtained through one route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SusceptibilityRecord {
    pub chi12: f64,
    pub chi23: f64,
    pub chi_global: Option<f64>,
    pub route: Route,
    /// Fidelity offset for the finite-difference routes.
    pub delta: Option<f64>,
}

/// `|<u|v>|`, clamped into `[0, 1]`.
pub fn pure_fidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::BasisMismatch(u.len(), v.len()));
    }
    Ok(u.dot(v).abs().min(1.0))
}

/// `1 - |<u|v>|` of the normalized vectors, computed as `|u - v|^2 / 2` after
/// aligning signs so that nearby states keep full relative precision.
pub fn pure_infidelity(u: &StateVector, v: &StateVector) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::BasisMismatch(u.len(), v.len()));
    }
    let (nu, nv) = (u.norm(), v.norm());
    if !(nu > 0.0 && nv > 0.0) {
        return Err(Error::NonPositiveFidelity(0.0));
    }
    let sign = if u.dot(v) < 0.0 { -1.0 } else { 1.0 };
    let d: f64 = u
        .as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(a, b)| {
            let x = a / nu - sign * b / nv;
            x * x
        })
        .sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}

/// Largest entry of `[a, b]`.
pub fn commutator_norm(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a * b - b * a).amax()
}

fn check_psd(values: &[f64]) -> Result<()> {
    match values.iter().copied().fold(f64::INFINITY, f64::min) {
        min if min < -PSD_TOL => Err(Error::NotPsd(min)),
        _ => Ok(()),
    }
}

/// `1 - F` with `F = tr sqrt(sqrt(a) b sqrt(a))` for real symmetric PSD matrices.
///
/// Commuting inputs use `F = 1 - sum_i (sqrt(lambda_i) - sqrt(mu_i))^2 / 2` over
/// trace-normalized joint spectra, which keeps `1 - F` accurate when `a` and `b`
/// are close.
pub fn uhlmann_infidelity_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    let eig_a = jacobi_eigen(a, PAIR_EIGEN_TOL);
    let eig_b = jacobi_eigen(b, PAIR_EIGEN_TOL);
    check_psd(&eig_a.values)?;
    check_psd(&eig_b.values)?;

    if commutator_norm(a, b) < COMMUTING_TOL {
        if let Some(d) = commuting_infidelity(a, b) {
            return Ok(d.clamp(0.0, 1.0));
        }
    }
    let sqrt_a = spectral_map(&eig_a, |x| x.max(0.0).sqrt());
    let inner = &sqrt_a * b * &sqrt_a;
    let eig = jacobi_eigen(&inner, PAIR_EIGEN_TOL);
    check_psd(&eig.values)?;
    let f: f64 = eig.values.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((1.0 - f).clamp(0.0, 1.0))
}

pub fn uhlmann_fidelity_matrices(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    Ok(1.0 - uhlmann_infidelity_matrices(a, b)?)
}

/// Infidelity over a joint eigenbasis, or `None` when the generic combination
/// fails to diagonalize both matrices.
fn commuting_infidelity(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    const MIX: f64 = 0.618_033_988_749_894_8;
    let joint = jacobi_eigen(&(a + b * MIX), PAIR_EIGEN_TOL);
    let v = &joint.vectors;
    let da = v.transpose() * a * v;
    let db = v.transpose() * b * v;
    let n = a.nrows();
    let off = (0..n)
        .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
        .map(|(r, c)| da[(r, c)].abs().max(db[(r, c)].abs()))
        .fold(0.0, f64::max);
    if off > 1e-9 {
        return None;
    }
    let lam: Vec<f64> = (0..n).map(|k| da[(k, k)].max(0.0)).collect();
    let mu: Vec<f64> = (0..n).map(|k| db[(k, k)].max(0.0)).collect();
    let (tl, tm) = (lam.iter().sum::<f64>(), mu.iter().sum::<f64>());
    if !(tl > 0.0 && tm > 0.0) {
        return None;
    }
    let d: f64 = lam
        .iter()
        .zip(&mu)
        .map(|(l, m)| {
            let x = (l / tl).sqrt() - (m / tm).sqrt();
            x * x
        })
        .sum();
    Some(0.5 * d)
}

/// Uhlmann fidelity of two pair matrices.
pub fn uhlmann_fidelity(rho: &TwoSiteDensityMatrix, sigma: &TwoSiteDensityMatrix) -> Result<f64> {
    Ok(1.0 - uhlmann_infidelity(rho, sigma)?)
}

pub fn uhlmann_infidelity(rho: &TwoSiteDensityMatrix, sigma: &TwoSiteDensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), sigma.dim()));
    }
    uhlmann_infidelity_matrices(&rho.matrix, &sigma.matrix)
}

/// `-2 ln F / delta^2` with `F = fidelity(param - delta/2, param + delta/2)`.
pub fn susceptibility_fd<F>(param: f64, delta: f64, fidelity: F) -> Result<f64>
where
    F: FnOnce(f64, f64) -> Result<f64>,
{
    if !(delta >= MIN_FD_DELTA) {
        return Err(Error::StepTooSmall { step: delta, min: MIN_FD_DELTA });
    }
    let f = fidelity(param - 0.5 * delta, param + 0.5 * delta)?;
    susceptibility_from_fidelity(f, delta)
}

pub fn susceptibility_from_fidelity(f: f64, delta: f64) -> Result<f64> {
    if !(f > 0.0) {
        return Err(Error::NonPositiveFidelity(f));
    }
    Ok(-2.0 * f.ln() / (delta * delta))
}

/// Same as [`susceptibility_from_fidelity`] with `F = 1 - infidelity`.
pub fn susceptibility_from_infidelity(infidelity: f64, delta: f64) -> Result<f64> {
    if !(infidelity < 1.0) {
        return Err(Error::NonPositiveFidelity(1.0 - infidelity));
    }
    Ok(-2.0 * (-infidelity).ln_1p() / (delta * delta))
}

/// `sum_i (dlambda_i)^2 / (4 lambda_i)` for a family of commuting density matrices.
pub fn rfs_commuting_spectra(lambda: &[f64], dlambda: &[f64]) -> Result<f64> {
    if lambda.len() != dlambda.len() {
        return Err(Error::DimensionMismatch(lambda.len(), dlambda.len()));
    }
    let total: f64 = lambda.iter().sum();
    if (total - 1.0).abs() > 1e-10 {
        return Err(Error::DomainViolation(format!("eigenvalues sum to {total}")));
    }
    let mut chi = 0.0;
    for (&l, &dl) in lambda.iter().zip(dlambda) {
        if l < -ZERO_EIGENVALUE {
            return Err(Error::NegativeEigenvalue(l));
        }
        if l >= ZERO_EIGENVALUE {
            chi += dl * dl / (4.0 * l);
        }
    }
    Ok(chi)
}

/// Spin-1/2 pair susceptibility from `c = <sigma^z sigma^z>` and `dc`.
pub fn rfs_correlator(c: f64, dc: f64) -> Result<f64> {
    if !(c > -1.0 && c < 1.0 / 3.0) {
        return Err(Error::DomainViolation(format!("correlator {c} outside (-1, 1/3)")));
    }
    Ok(3.0 * dc * dc / (4.0 * (1.0 + c) * (1.0 - 3.0 * c)))
}

fn positive(label: &str, value: f64) -> Result<f64> {
    if value > 0.0 {
        Ok(value)
    } else {
        Err(Error::DomainViolation(format!("{label} denominator {value} is not positive")))
    }
}

/// `(chi12, chi23)` of the dimerized spin-1/2 chain from the energy per spin
/// and its `alpha`-derivatives.
pub fn rfs_energy_dimer(e0: f64, de0: f64, d2e0: f64, alpha: f64) -> Result<(f64, f64)> {
    let den12 = positive("chi12", (3.0 + 8.0 * e0 - 8.0 * alpha * de0) * (1.0 - 8.0 * e0 + 8.0 * alpha * de0))?;
    let den23 = positive("chi23", (3.0 + 8.0 * de0) * (1.0 - 8.0 * de0))?;
    let chi12 = 16.0 * alpha * alpha * d2e0 * d2e0 / den12;
    let chi23 = 16.0 * d2e0 * d2e0 / den23;
    Ok((chi12, chi23))
}

/// (1/2, S) pair susceptibility from `x = <S_1 . S_2>` and `dx`.
pub fn rfs_mixed(x: f64, dx: f64, spin: Spin) -> Result<f64> {
    let s = spin.value();
    let a = positive("S - 2x", s - 2.0 * x)?;
    let b = positive("S + 1 + 2x", s + 1.0 + 2.0 * x)?;
    Ok(dx * dx / (a * b))
}

/// `(chi12, chi23)` of the mixed-spin dimer chain from energy derivatives.
///
/// At `S = 1/2` every intermediate is an exact power-of-two rescaling of the
/// one in [`rfs_energy_dimer`], so both give identical bits.
pub fn rfs_energy_mixed(e0: f64, de0: f64, d2e0: f64, alpha: f64, spin: Spin) -> Result<(f64, f64)> {
    let s = spin.value();
    let den12 = positive("chi12", (s + 1.0 + 4.0 * e0 - 4.0 * alpha * de0) * (s - 4.0 * e0 + 4.0 * alpha * de0))?;
    let den23 = positive("chi23", (s + 1.0 + 4.0 * de0) * (s - 4.0 * de0))?;
    let chi12 = 4.0 * alpha * alpha * d2e0 * d2e0 / den12;
    let chi23 = 4.0 * d2e0 * d2e0 / den23;
    Ok((chi12, chi23))
}

/// Multiplet weights `(p0, p1, p2)` of a spin-1 pair from `x = <S.S>` and `y = <(S.S)^2>`.
pub fn spin_one_weights(x: f64, y: f64) -> [f64; 3] {
    let p0 = (y - 1.0) / 3.0;
    let p1 = (2.0 - x - y) / 2.0;
    [p0, p1, 1.0 - p0 - p1]
}

/// Spin-1 pair susceptibility from `x = <S.S>`, `y = <(S.S)^2>` and their derivatives.
pub fn rfs_spin_one(x: f64, dx: f64, y: f64, dy: f64) -> Result<f64> {
    let p = spin_one_weights(x, y);
    let dp0 = dy / 3.0;
    let dp1 = -(dx + dy) / 2.0;
    let dp = [dp0, dp1, -dp0 - dp1];
    let mut chi = 0.0;
    for (pj, dpj) in p.iter().zip(dp) {
        if *pj < -ZERO_EIGENVALUE {
            return Err(Error::DomainViolation(format!("multiplet weight {pj} is negative")));
        }
        if *pj >= ZERO_EIGENVALUE {
            chi += dpj * dpj / (4.0 * pj);
        }
    }
    Ok(chi)
}

/// Nearest-neighbour susceptibility of the bilinear-biquadratic chain from
/// energy derivatives in `theta`.
///
/// The bond expectations follow from `e0 = cos x + sin y` and
/// `de0 = -sin x + cos y`; both of their derivatives are proportional to
/// `e0 + d2e0`.
pub fn rfs_energy_bb(e0: f64, de0: f64, d2e0: f64, theta: f64) -> Result<f64> {
    let (s, c) = theta.sin_cos();
    let x = c * e0 - s * de0;
    let y = s * e0 + c * de0;
    let g = e0 + d2e0;
    rfs_spin_one(x, -s * g, y, c * g)
}

/// Global susceptibility from two already-solved ground states `delta` apart.
pub fn global_from_states(lo: &GroundStateResult, hi: &GroundStateResult, delta: f64) -> Result<f64> {
    for gs in [lo, hi] {
        if gs.is_degenerate() {
            return Err(Error::DegenerateGroundState { gap: gs.gap });
        }
    }
    if lo.sector != hi.sector {
        return Err(Error::SectorChange(lo.sector.value(), hi.sector.value()));
    }
    if !(delta >= MIN_FD_DELTA) {
        return Err(Error::StepTooSmall { step: delta, min: MIN_FD_DELTA });
    }
    susceptibility_from_infidelity(pure_infidelity(&lo.vector, &hi.vector)?, delta)
}

/// Fidelity susceptibility of the full ground state at `param`.
pub fn global_susceptibility(spec: &ModelSpec, param: f64, delta: f64, opts: &SolverOptions) -> Result<f64> {
    if !(delta >= MIN_FD_DELTA) {
        return Err(Error::StepTooSmall { step: delta, min: MIN_FD_DELTA });
    }
    let lo = ground_state(&spec.with_param(param - 0.5 * delta), opts)?;
    let hi = ground_state(&spec.with_param(param + 0.5 * delta), opts)?;
    global_from_states(&lo, &hi, delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(v))
    }

    #[test]
    fn pure_fidelity_basics() {
        let v = StateVector::new(vec![0.6, 0.8]);
        let w = StateVector::new(vec![0.8, -0.6]);
        let minus = StateVector::new(vec![-0.6, -0.8]);
        assert!((pure_fidelity(&v, &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(pure_fidelity(&v, &w).unwrap(), 0.0);
        assert!((pure_fidelity(&v, &minus).unwrap() - 1.0).abs() < 1e-15);
        assert!(pure_fidelity(&v, &StateVector::zeros(3)).is_err());
    }

    #[test]
    fn infidelity_keeps_precision_for_close_states() {
        let t: f64 = 1e-9;
        let u = StateVector::new(vec![1.0, 0.0]);
        let v = StateVector::new(vec![t.cos(), t.sin()]);
        // 1 - cos t = t^2/2 is lost entirely in 1 - <u|v>.
        assert!((pure_infidelity(&u, &v).unwrap() - 0.5 * t * t).abs() < 1e-12 * t * t);
        let a = 0.3;
        let b = a + 1e-7;
        let d = uhlmann_infidelity_matrices(&diag(&[a, 1.0 - a]), &diag(&[b, 1.0 - b])).unwrap();
        let exact = 1.0 - ((a * b).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt());
        let approx = 1e-14 / (8.0 * a * (1.0 - a));
        assert!((d - approx).abs() < 1e-6 * approx, "{d} {exact} {approx}");
    }

    #[test]
    fn uhlmann_commuting_cases() {
        assert!((uhlmann_fidelity_matrices(&diag(&[0.3, 0.7]), &diag(&[0.3, 0.7])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(uhlmann_fidelity_matrices(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0])).unwrap(), 0.0);
        let (a, b) = (0.2, 0.65);
        let f = uhlmann_fidelity_matrices(&diag(&[a, 1.0 - a]), &diag(&[b, 1.0 - b])).unwrap();
        assert!((f - ((a * b).sqrt() + ((1.0 - a) * (1.0 - b)).sqrt())).abs() < 1e-15);
    }

    #[test]
    fn uhlmann_pure_states_reduce_to_overlap() {
        // |psi><psi| vs |phi><phi| gives |<psi|phi>|.
        let psi = [0.6, 0.8];
        let phi = [1.0, 0.0];
        let a = DMatrix::from_fn(2, 2, |r, c| psi[r] * psi[c]);
        let b = DMatrix::from_fn(2, 2, |r, c| phi[r] * phi[c]);
        let f = uhlmann_fidelity_matrices(&a, &b).unwrap();
        assert!((f - 0.6).abs() < 1e-7, "{f}");
    }

    #[test]
    fn uhlmann_rejects_bad_input() {
        assert!(matches!(
            uhlmann_fidelity_matrices(&diag(&[1.2, -0.2]), &diag(&[0.5, 0.5])),
            Err(Error::NotPsd(_))
        ));
        assert!(matches!(
            uhlmann_fidelity_matrices(&diag(&[1.0, 0.0]), &diag(&[0.5, 0.25, 0.25])),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn fd_susceptibility_guards() {
        assert_eq!(susceptibility_fd(0.3, 1e-4, |_, _| Ok(1.0)).unwrap(), 0.0);
        assert!(matches!(susceptibility_fd(0.3, 1e-7, |_, _| Ok(1.0)), Err(Error::StepTooSmall { .. })));
        assert!(matches!(susceptibility_fd(0.3, 1e-4, |_, _| Ok(0.0)), Err(Error::NonPositiveFidelity(_))));
    }

    #[test]
    fn commuting_spectra_examples() {
        assert_eq!(rfs_commuting_spectra(&[0.25, 0.75], &[0.0, 0.0]).unwrap(), 0.0);
        let a = 0.3;
        let chi = rfs_commuting_spectra(&[a, 1.0 - a], &[1.0, -1.0]).unwrap();
        assert!((chi - 1.0 / (4.0 * a * (1.0 - a))).abs() < 1e-14);
        // zero eigenvalue and its derivative are dropped
        assert_eq!(rfs_commuting_spectra(&[1.0, 0.0], &[0.0, 5.0]).unwrap(), 0.0);
        assert!(matches!(rfs_commuting_spectra(&[1.1, -0.1], &[0.0, 0.0]), Err(Error::NegativeEigenvalue(_))));
        assert!(rfs_commuting_spectra(&[0.5, 0.6], &[0.0, 0.0]).is_err());
    }

    #[test]
    fn correlator_route_examples() {
        assert_eq!(rfs_correlator(-0.5, 0.0).unwrap(), 0.0);
        let chi = rfs_correlator(-2.0 / 3.0, -0.5).unwrap();
        assert!((chi - 3.0 / 16.0).abs() < 1e-15);
        assert!(rfs_correlator(1.0 / 3.0 - 1e-12, 0.1).unwrap() > 1e9);
        assert!(matches!(rfs_correlator(0.34, 0.1), Err(Error::DomainViolation(_))));
        assert!(matches!(rfs_correlator(-1.0, 0.1), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn energy_route_examples() {
        let (a, b) = rfs_energy_dimer(-0.5, -0.25, -3.0 / 16.0, 1.0).unwrap();
        assert!((a - 3.0 / 16.0).abs() < 1e-15 && (b - 3.0 / 16.0).abs() < 1e-15);
        assert_eq!(rfs_energy_dimer(-0.4, -0.1, 0.0, 0.7).unwrap(), (0.0, 0.0));
        assert_eq!(rfs_energy_mixed(-0.4, -0.1, 0.0, 0.7, Spin::ONE).unwrap(), (0.0, 0.0));
        assert!(rfs_energy_dimer(0.2, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn mixed_route_reduces_to_spin_half() {
        for (c, dc) in [(-0.6, 0.3), (-0.2, -0.1), (0.1, 0.5)] {
            let a = rfs_mixed(0.75 * c, 0.75 * dc, Spin::HALF).unwrap();
            let b = rfs_correlator(c, dc).unwrap();
            assert!((a - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        assert_eq!(rfs_mixed(-0.3, 0.0, Spin::ONE).unwrap(), 0.0);
        assert!(rfs_mixed(0.6, 0.1, Spin::ONE).is_err());
    }

    #[test]
    fn spin_one_weights_of_pure_multiplets() {
        // J = 0, 1, 2 have S.S = -2, -1, 1.
        assert_eq!(spin_one_weights(-2.0, 4.0), [1.0, 0.0, 0.0]);
        assert_eq!(spin_one_weights(-1.0, 1.0), [0.0, 1.0, 0.0]);
        assert_eq!(spin_one_weights(1.0, 1.0), [0.0, 0.0, 1.0]);
    }

    #[test]
    fn route_names_round_trip() {
        for r in Route::ALL {
            assert_eq!(r.name().parse::<Route>().unwrap(), r);
        }
        assert!("bogus".parse::<Route>().is_err());
    }
}
