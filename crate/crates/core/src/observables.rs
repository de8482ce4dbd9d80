//! Two-site reduced density matrices and spin correlators.
//!
//! Pair matrices use the product basis `|m_i m_j>` with `m` descending on each
//! site, so for two spin-1/2 sites the order is `|uu>, |ud>, |du>, |dd>`.
//! The block layout `{|00>, |11>, |01>, |10>}` (with `|0>` = down) used by the
//! SU(2) structure check is obtained through [`SPIN_HALF_BLOCK_ORDER`].

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{apply_heisenberg_bond, ladder_down, ladder_up, SectorBasis, Spin, StateVector};
use crate::linalg::{jacobi_eigen, symmetrize};

/// Jacobi tolerance for pair matrices.
pub const PAIR_EIGEN_TOL: f64 = 1e-14;

/// Product-basis index of each element of `{|00>, |11>, |01>, |10>}`.
pub const SPIN_HALF_BLOCK_ORDER: [usize; 4] = [3, 0, 2, 1];

#[derive(Clone, Debug)]
pub struct TwoSiteDensityMatrix {
    pub sites: (usize, usize),
    pub spins: (Spin, Spin),
    pub matrix: DMatrix<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Columns matching `eigenvalues`.
    pub eigenvectors: DMatrix<f64>,
}

impl TwoSiteDensityMatrix {
    /// Wraps a pair matrix and attaches its spectral decomposition.
    pub fn from_matrix(matrix: DMatrix<f64>, sites: (usize, usize), spins: (Spin, Spin)) -> Result<Self> {
        let d = spins.0.dim() * spins.1.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch(matrix.nrows(), d));
        }
        let matrix = symmetrize(&matrix);
        let eig = jacobi_eigen(&matrix, PAIR_EIGEN_TOL);
        Ok(TwoSiteDensityMatrix {
            sites,
            spins,
            matrix,
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }

    fn is_spin_half_pair(&self) -> bool {
        self.spins == (Spin::HALF, Spin::HALF)
    }

    /// The matrix permuted into the `{|00>, |11>, |01>, |10>}` block order.
    pub fn block_ordered(&self) -> Result<DMatrix<f64>> {
        if !self.is_spin_half_pair() {
            return Err(Error::UnsupportedSpin(format!("({}, {})", self.spins.0, self.spins.1)));
        }
        let p = SPIN_HALF_BLOCK_ORDER;
        Ok(DMatrix::from_fn(4, 4, |r, c| self.matrix[(p[r], p[c])]))
    }
}

/// Partial trace of `|v><v|` over every site except `i` and `j`.
pub fn two_site_rdm(v: &StateVector, basis: &SectorBasis, i: usize, j: usize) -> Result<TwoSiteDensityMatrix> {
    let n = basis.n_sites();
    for s in [i, j] {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, n_sites: n });
        }
    }
    if i == j {
        return Err(Error::IndexOutOfRange { index: j, n_sites: n });
    }
    if v.len() != basis.len() {
        return Err(Error::BasisMismatch(v.len(), basis.len()));
    }
    let (si, sj) = (basis.sites().spin(i), basis.sites().spin(j));
    let dj = sj.dim();

    let mut groups: BTreeMap<u64, Vec<(usize, f64)>> = BTreeMap::new();
    for (&code, &amp) in basis.states().iter().zip(v.as_slice()) {
        if amp == 0.0 {
            continue;
        }
        let (a, b) = (basis.digit(code, i), basis.digit(code, j));
        let env = code - a * basis.stride(i) - b * basis.stride(j);
        groups.entry(env).or_default().push((a as usize * dj + b as usize, amp));
    }

    let d = si.dim() * dj;
    let mut rho = DMatrix::zeros(d, d);
    for members in groups.values() {
        for &(p, x) in members {
            for &(q, y) in members {
                rho[(p, q)] += x * y;
            }
        }
    }
    TwoSiteDensityMatrix::from_matrix(rho, (i, j), (si, sj))
}

/// `<sigma^z_i sigma^z_j>` for two spin-1/2 sites.
pub fn correlator_zz(v: &StateVector, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    let n = basis.n_sites();
    for s in [i, j] {
        if s >= n {
            return Err(Error::IndexOutOfRange { index: s, n_sites: n });
        }
        let spin = basis.sites().spin(s);
        if spin != Spin::HALF {
            return Err(Error::UnsupportedSpin(spin.to_string()));
        }
    }
    if v.len() != basis.len() {
        return Err(Error::BasisMismatch(v.len(), basis.len()));
    }
    Ok(basis
        .states()
        .iter()
        .zip(v.as_slice())
        .map(|(&code, &a)| (basis.twice_m(code, i) * basis.twice_m(code, j)) as f64 * a * a)
        .sum())
}

/// `<S_i . S_j>`.
pub fn scalar_correlator(v: &StateVector, basis: &SectorBasis, i: usize, j: usize) -> Result<f64> {
    let hv = apply_heisenberg_bond(v, basis, i, j, 1.0)?;
    Ok(v.dot(&hv))
}

/// Nearest-neighbour `<sigma^z sigma^z>` correlators of the dimerized spin-1/2
/// chain from the energy per spin and its first `alpha`-derivative.
pub fn correlators_from_energy(e0: f64, de0: f64, alpha: f64) -> (f64, f64) {
    (8.0 / 3.0 * (e0 - alpha * de0), 8.0 / 3.0 * de0)
}

/// Largest violation of the SU(2) block pattern of a spin-1/2 pair matrix.
///
/// Covers every element outside `diag(u+, u+) (+) [[u-, w], [w, u-]]`, unequal
/// diagonal entries inside each block, and the triplet condition `u+ = u- + w`.
pub fn su2_structure_check(rdm: &TwoSiteDensityMatrix) -> Result<f64> {
    let m = rdm.block_ordered()?;
    let mut dev = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            let allowed = r == c || (r >= 2 && c >= 2);
            if !allowed {
                dev = dev.max(m[(r, c)].abs());
            }
        }
    }
    dev = dev.max((m[(0, 0)] - m[(1, 1)]).abs());
    dev = dev.max((m[(2, 2)] - m[(3, 3)]).abs());
    dev = dev.max((m[(2, 3)] - m[(3, 2)]).abs());
    let u_plus = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let u_minus = 0.5 * (m[(2, 2)] + m[(3, 3)]);
    let w = 0.5 * (m[(2, 3)] + m[(3, 2)]);
    Ok(dev.max((u_plus - (u_minus + w)).abs()))
}

/// Pair matrix built from the `<sigma^z sigma^z>` correlator of an SU(2)-invariant
/// spin-1/2 pair, in the product basis.
pub fn spin_half_rdm_from_correlator(c: f64) -> DMatrix<f64> {
    let u_plus = 0.25 * (1.0 + c);
    let u_minus = 0.25 * (1.0 - c);
    let w = 0.5 * c;
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = u_plus;
    m[(3, 3)] = u_plus;
    m[(1, 1)] = u_minus;
    m[(2, 2)] = u_minus;
    m[(1, 2)] = w;
    m[(2, 1)] = w;
    m
}

/// `S_1 . S_2` on the product space of two spins.
pub fn pair_dot_matrix(s1: Spin, s2: Spin) -> DMatrix<f64> {
    let (t1, t2) = (s1.twice() as i64, s2.twice() as i64);
    let (d1, d2) = (s1.dim(), s2.dim());
    let mut m = DMatrix::zeros(d1 * d2, d1 * d2);
    for a in 0..d1 {
        for b in 0..d2 {
            let (m1, m2) = (t1 - 2 * a as i64, t2 - 2 * b as i64);
            let col = a * d2 + b;
            m[(col, col)] += 0.25 * (m1 * m2) as f64;
            // S1+ S2-
            if a > 0 && b + 1 < d2 {
                let row = (a - 1) * d2 + (b + 1);
                m[(row, col)] += 0.5 * ladder_up(t1, m1) * ladder_down(t2, m2);
            }
            // S1- S2+
            if a + 1 < d1 && b > 0 {
                let row = (a + 1) * d2 + (b - 1);
                m[(row, col)] += 0.5 * ladder_down(t1, m1) * ladder_up(t2, m2);
            }
        }
    }
    m
}

/// Value of `S_1 . S_2` in the coupled multiplet of total spin `J` (given as `2J`).
pub fn pair_dot_eigenvalue(s1: Spin, s2: Spin, twice_j: u32) -> f64 {
    let j = twice_j as f64 / 2.0;
    0.5 * (j * (j + 1.0) - s1.casimir() - s2.casimir())
}

/// Allowed `2J` values of a pair, ascending.
pub fn pair_multiplets(s1: Spin, s2: Spin) -> Vec<u32> {
    let lo = s1.twice().abs_diff(s2.twice());
    let hi = s1.twice() + s2.twice();
    (lo..=hi).step_by(2).collect()
}

/// Projectors onto each coupled multiplet, as polynomials in `S_1 . S_2`.
pub fn multiplet_projectors(s1: Spin, s2: Spin) -> Vec<(u32, DMatrix<f64>)> {
    let dot = pair_dot_matrix(s1, s2);
    let d = dot.nrows();
    let js = pair_multiplets(s1, s2);
    js.iter()
        .map(|&j| {
            let lj = pair_dot_eigenvalue(s1, s2, j);
            let mut p = DMatrix::identity(d, d);
            for &k in js.iter().filter(|&&k| k != j) {
                let lk = pair_dot_eigenvalue(s1, s2, k);
                p = p * (&dot - DMatrix::identity(d, d) * lk) / (lj - lk);
            }
            (j, p)
        })
        .collect()
}

/// Total weight `tr(rho P_J)` of every coupled multiplet.
pub fn multiplet_weights(rdm: &TwoSiteDensityMatrix) -> Vec<(u32, f64)> {
    multiplet_projectors(rdm.spins.0, rdm.spins.1)
        .into_iter()
        .map(|(j, p)| (j, (&rdm.matrix * p).trace()))
        .collect()
}

/// SU(2) average of a pair matrix: `sum_J tr(rho P_J) P_J / (2J+1)`.
///
/// Equals the pair matrix averaged over every member of the multiplet the
/// state belongs to, since each weight is a scalar expectation value.
pub fn su2_average(rdm: &TwoSiteDensityMatrix) -> Result<TwoSiteDensityMatrix> {
    let d = rdm.dim();
    let mut avg = DMatrix::zeros(d, d);
    for (j, p) in multiplet_projectors(rdm.spins.0, rdm.spins.1) {
        let w = (&rdm.matrix * &p).trace();
        avg += p * (w / (j as f64 + 1.0));
    }
    TwoSiteDensityMatrix::from_matrix(avg, rdm.sites, rdm.spins)
}

/// Weight `F` of the lower multiplet of an SU(2)-invariant (1/2, S) pair with
/// `<S_1 . S_2> = x`.
pub fn mixed_lower_weight(x: f64, spin: Spin) -> f64 {
    let s = spin.value();
    (s - 2.0 * x) / (2.0 * s + 1.0)
}

/// SU(2)-invariant (1/2, S) pair matrix with `<S_1 . S_2> = x`:
/// weight `F/(2S)` on each state of the `S - 1/2` multiplet and
/// `(1-F)/(2S+2)` on each state of the `S + 1/2` multiplet.
pub fn mixed_rdm_from_correlator(x: f64, spin: Spin) -> DMatrix<f64> {
    let f = mixed_lower_weight(x, spin);
    let s = spin.value();
    let projectors = multiplet_projectors(Spin::HALF, spin);
    let lower = &projectors[0].1;
    let upper = &projectors[projectors.len() - 1].1;
    lower * (f / (2.0 * s)) + upper * ((1.0 - f) / (2.0 * s + 2.0))
}

#[derive(Clone, Debug, Serialize)]
pub struct Su2PairSummary {
    pub correlator_zz: Option<f64>,
    pub scalar_correlator: f64,
    pub structure_deviation: Option<f64>,
}

pub fn pair_summary(v: &StateVector, basis: &SectorBasis, i: usize, j: usize) -> Result<Su2PairSummary> {
    let scalar = scalar_correlator(v, basis, i, j)?;
    let half = basis.sites().spin(i) == Spin::HALF && basis.sites().spin(j) == Spin::HALF;
    let (zz, dev) = if half {
        let rdm = two_site_rdm(v, basis, i, j)?;
        (Some(correlator_zz(v, basis, i, j)?), Some(su2_structure_check(&rdm)?))
    } else {
        (None, None)
    };
    Ok(Su2PairSummary { correlator_zz: zz, scalar_correlator: scalar, structure_deviation: dev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{enumerate_sector, HalfInt, SiteSpec};

    fn singlet() -> (SectorBasis, StateVector) {
        let b = enumerate_sector(&SiteSpec::uniform(2, Spin::HALF).unwrap(), HalfInt::ZERO).unwrap();
        let s = 0.5f64.sqrt();
        (b, StateVector::new(vec![s, -s]))
    }

    #[test]
    fn singlet_correlators() {
        let (b, v) = singlet();
        assert!((correlator_zz(&v, &b, 0, 1).unwrap() + 1.0).abs() < 1e-15);
        assert!((scalar_correlator(&v, &b, 0, 1).unwrap() + 0.75).abs() < 1e-15);
    }

    #[test]
    fn polarized_pair() {
        let sites = SiteSpec::uniform(4, Spin::HALF).unwrap();
        let b = enumerate_sector(&sites, HalfInt::from_twice(4)).unwrap();
        let v = StateVector::new(vec![1.0]);
        assert_eq!(correlator_zz(&v, &b, 1, 3).unwrap(), 1.0);
        let rdm = two_site_rdm(&v, &b, 0, 2).unwrap();
        assert_eq!(rdm.matrix[(0, 0)], 1.0);
        assert_eq!(rdm.matrix.sum(), 1.0);
    }

    #[test]
    fn correlator_zz_rejects_spin_one() {
        let sites = SiteSpec::uniform(2, Spin::ONE).unwrap();
        let b = enumerate_sector(&sites, HalfInt::ZERO).unwrap();
        let v = StateVector::basis_state(b.len(), 0);
        assert!(matches!(correlator_zz(&v, &b, 0, 1), Err(Error::UnsupportedSpin(_))));
    }

    #[test]
    fn correlators_from_energy_examples() {
        assert_eq!(correlators_from_energy(-0.375, 0.0, 0.0), (-1.0, 0.0));
        let (c12, c23) = correlators_from_energy(-0.5, -0.25, 1.0);
        assert!((c12 + 2.0 / 3.0).abs() < 1e-15 && (c23 + 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn structure_check_on_constructed_matrices() {
        let mixed = DMatrix::identity(4, 4) * 0.25;
        let rdm = TwoSiteDensityMatrix::from_matrix(mixed.clone(), (0, 1), (Spin::HALF, Spin::HALF)).unwrap();
        assert_eq!(su2_structure_check(&rdm).unwrap(), 0.0);

        let mut bad = mixed;
        bad[(0, 3)] = 1e-3;
        bad[(3, 0)] = 1e-3;
        let rdm = TwoSiteDensityMatrix::from_matrix(bad, (0, 1), (Spin::HALF, Spin::HALF)).unwrap();
        assert!((su2_structure_check(&rdm).unwrap() - 1e-3).abs() < 1e-18);

        let good = spin_half_rdm_from_correlator(-0.4);
        let rdm = TwoSiteDensityMatrix::from_matrix(good, (0, 1), (Spin::HALF, Spin::HALF)).unwrap();
        assert!(su2_structure_check(&rdm).unwrap() < 1e-16);
    }

    #[test]
    fn projectors_are_complete_and_idempotent() {
        for (s1, s2) in [(Spin::HALF, Spin::HALF), (Spin::HALF, Spin::ONE), (Spin::ONE, Spin::ONE)] {
            let ps = multiplet_projectors(s1, s2);
            let d = s1.dim() * s2.dim();
            let total = ps.iter().fold(DMatrix::zeros(d, d), |acc, (_, p)| acc + p);
            assert!((total - DMatrix::<f64>::identity(d, d)).amax() < 1e-12);
            for (j, p) in &ps {
                assert!((p * p - p).amax() < 1e-12);
                assert!((p.trace() - (*j as f64 + 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mixed_rdm_reproduces_its_correlator() {
        let dot = pair_dot_matrix(Spin::HALF, Spin::ONE);
        for x in [-0.9, -0.5, 0.0, 0.3] {
            let rho = mixed_rdm_from_correlator(x, Spin::ONE);
            assert!((rho.trace() - 1.0).abs() < 1e-14);
            assert!(((&rho * &dot).trace() - x).abs() < 1e-14);
        }
    }
}
