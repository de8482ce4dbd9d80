//! Ground-state and low-spectrum solvers.
//!
//! [`lanczos_lowest`] is a matrix-free Lanczos iteration with full
//! reorthogonalization. Excited levels are obtained by deflation: each further
//! run works in the orthogonal complement of the eigenvectors already found,
//! so exact degeneracies show up as a zero gap instead of being skipped.
//! [`dense_spectrum`] materializes the operator and is the oracle for small
//! sectors.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{dot, HalfInt, StateVector};
use crate::models::{driving_operator, ground_basis, hamiltonian, LinearOperator, ModelSpec};

/// Gap below which a ground state is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-10;
/// Smallest finite-difference step accepted by [`energy_derivatives_fd`].
pub const MIN_FD_STEP: f64 = 1e-7;
/// Residual tolerance for the deflated runs that only feed the gap estimate.
const EXCITED_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosOptions {
    /// Residual `||H v - E v||` required of the ground pair.
    pub tol: f64,
    /// Krylov steps per run.
    pub max_iter: usize,
    /// Number of lowest eigenpairs; `k >= 2` yields a gap.
    pub k: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions { tol: 1e-12, max_iter: 500, k: 2, seed: 0x5eed }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    Lanczos,
    Dense,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub kind: SolverKind,
    pub lanczos: LanczosOptions,
    /// Largest sector dimension [`dense_spectrum`] will materialize.
    pub dense_cap: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { kind: SolverKind::Lanczos, lanczos: LanczosOptions::default(), dense_cap: 4096 }
    }
}

impl SolverOptions {
    pub fn dense() -> Self {
        SolverOptions { kind: SolverKind::Dense, ..Default::default() }
    }
}

#[derive(Clone, Debug)]
pub struct GroundStateResult {
    pub energy: f64,
    pub energy_per_spin: f64,
    pub vector: StateVector,
    pub sector: HalfInt,
    /// Distance to the next level inside the solved sector.
    pub gap: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl GroundStateResult {
    pub fn is_degenerate(&self) -> bool {
        self.gap < DEGENERACY_GAP
    }
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<StateVector>,
}

/// Lowest eigenpairs found by [`lanczos_lowest`].
#[derive(Clone, Debug)]
pub struct RitzPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// `P A P` with `P` projecting out a set of orthonormal vectors.
struct Deflated<'a, A: ?Sized> {
    op: &'a A,
    locked: &'a [Vec<f64>],
}

impl<A: LinearOperator + ?Sized> Deflated<'_, A> {
    fn project(&self, x: &mut [f64]) {
        for q in self.locked {
            let c = dot(q, x);
            x.iter_mut().zip(q).for_each(|(xi, qi)| *xi -= c * qi);
        }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let mut px = x.to_vec();
        self.project(&mut px);
        self.op.apply_into(&px, y);
        self.project(y);
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Subtracts the components of `w` along every vector in `basis`, twice.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, w);
            w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
        }
    }
}

fn random_start(dim: usize, seed: u64, locked: &[Vec<f64>]) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut v, locked);
    normalize(&mut v);
    v
}

/// Flips the sign so the largest-magnitude entry (first one on ties) is positive.
fn fix_sign(v: &mut [f64]) {
    let mut best = 0usize;
    for (k, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = k;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

struct RunResult {
    value: f64,
    vector: Vec<f64>,
    residual: f64,
    iterations: usize,
}

/// One Lanczos run for the lowest eigenpair of the deflated operator.
fn lanczos_run<A: LinearOperator + ?Sized>(
    op: &Deflated<'_, A>,
    dim: usize,
    start: Vec<f64>,
    tol: f64,
    max_iter: usize,
) -> Result<(RunResult, bool)> {
    let available = dim - op.locked.len();
    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;

    for step in 0..max_iter.max(1) {
        let q = &basis[step];
        op.apply(q, &mut w);
        let a = dot(q, &w);
        alphas.push(a);
        orthogonalize(&mut w, &basis);
        orthogonalize(&mut w, op.locked);
        let b = dot(&w, &w).sqrt();

        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |r, c| {
            if r == c {
                alphas[r]
            } else if r + 1 == c {
                betas[r]
            } else if c + 1 == r {
                betas[c]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (imin, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty tridiagonal");
        let s_last = eig.eigenvectors[(m - 1, imin)];
        last_residual = (b * s_last).abs();

        let scale = alphas.iter().chain(betas.iter()).fold(1.0f64, |acc, x| acc.max(x.abs()));
        let breakdown = b <= 1e-14 * scale || m >= available;
        if last_residual <= tol || breakdown {
            let mut vector = vec![0.0; dim];
            for (k, qk) in basis.iter().enumerate() {
                let c = eig.eigenvectors[(k, imin)];
                vector.iter_mut().zip(qk).for_each(|(v, x)| *v += c * x);
            }
            op.project(&mut vector);
            normalize(&mut vector);
            // True residual of the assembled vector.
            let mut hv = vec![0.0; dim];
            op.apply(&vector, &mut hv);
            let value = dot(&vector, &hv);
            let residual = hv
                .iter()
                .zip(&vector)
                .map(|(h, v)| (h - value * v).powi(2))
                .sum::<f64>()
                .sqrt();
            let exhausted = m >= available;
            return Ok((
                RunResult { value, vector, residual, iterations: step + 1 },
                breakdown && !exhausted,
            ));
        }
        betas.push(b);
        let next: Vec<f64> = w.iter().map(|x| x / b).collect();
        basis.push(next);
    }
    Err(Error::NoConvergence { max_iter, residual: last_residual })
}

/// Lowest `opts.k` eigenpairs of a symmetric operator by deflated Lanczos runs.
pub fn lanczos_lowest<A: LinearOperator + ?Sized>(op: &A, opts: &LanczosOptions) -> Result<RitzPairs> {
    let dim = op.dim();
    let k = opts.k.max(1);
    if dim < k {
        return Err(Error::DimensionTooSmall { dim, requested: k });
    }
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut values = Vec::new();
    let mut residuals = Vec::new();
    let mut iterations = 0;
    for level in 0..k {
        let tol = if level == 0 { opts.tol } else { opts.tol.max(EXCITED_TOL) };
        let seed = opts.seed.wrapping_add(1000 * level as u64);
        let deflated = Deflated { op, locked: &locked };
        let start = random_start(dim, seed, &locked);
        let (mut run, broke_down) = lanczos_run(&deflated, dim, start, tol, opts.max_iter)?;
        if broke_down {
            // An invariant Krylov subspace: confirm once from a fresh start.
            let start = random_start(dim, seed.wrapping_add(1), &locked);
            let (retry, _) = lanczos_run(&deflated, dim, start, tol, opts.max_iter)?;
            iterations += run.iterations;
            if retry.value < run.value {
                run = retry;
            }
        }
        if run.residual > tol {
            return Err(Error::NoConvergence { max_iter: opts.max_iter, residual: run.residual });
        }
        iterations += run.iterations;
        values.push(run.value);
        residuals.push(run.residual);
        let mut v = run.vector;
        fix_sign(&mut v);
        locked.push(v);
    }
    Ok(RitzPairs { values, vectors: locked, residuals, iterations })
}

/// Ground state of a sector operator by Lanczos.
pub fn lanczos_ground(
    op: &crate::models::SectorOperator,
    opts: &LanczosOptions,
) -> Result<GroundStateResult> {
    let pairs = lanczos_lowest(op, opts)?;
    let n = op.basis().n_sites();
    let energy = pairs.values[0];
    let gap = pairs.values.get(1).map_or(f64::INFINITY, |e1| (e1 - energy).max(0.0));
    Ok(GroundStateResult {
        energy,
        energy_per_spin: energy / n as f64,
        vector: StateVector::new(pairs.vectors[0].clone()),
        sector: op.basis().total_sz(),
        gap,
        iterations: pairs.iterations,
        residual: pairs.residuals[0],
    })
}

/// Materializes `op` column by column.
pub fn materialize<A: LinearOperator + ?Sized>(op: &A) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for c in 0..n {
        e[c] = 1.0;
        op.apply_into(&e, &mut col);
        e[c] = 0.0;
        for r in 0..n {
            m[(r, c)] = col[r];
        }
    }
    m
}

/// Full spectrum of a symmetric operator, ascending.
pub fn dense_spectrum<A: LinearOperator + ?Sized>(op: &A, cap: usize) -> Result<SpectrumResult> {
    let n = op.dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let m = materialize(op);
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut v: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            fix_sign(&mut v);
            StateVector::new(v)
        })
        .collect();
    Ok(SpectrumResult { eigenvalues, eigenvectors })
}

fn residual_of<A: LinearOperator + ?Sized>(op: &A, v: &StateVector, e: f64) -> f64 {
    let hv = op.apply(v);
    hv.as_slice()
        .iter()
        .zip(v.as_slice())
        .map(|(h, x)| (h - e * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Ground state of `spec` in its ground sector.
///
/// Sectors too small for the requested number of Ritz pairs are solved densely.
pub fn ground_state(spec: &ModelSpec, opts: &SolverOptions) -> Result<GroundStateResult> {
    let basis = ground_basis(spec)?;
    let op = hamiltonian(spec, basis.clone())?;
    let n = spec.n_sites as f64;
    if opts.kind == SolverKind::Lanczos && basis.len() > opts.lanczos.k.max(1) {
        return lanczos_ground(&op, &opts.lanczos);
    }
    let spec_result = dense_spectrum(&op, opts.dense_cap)?;
    let energy = spec_result.eigenvalues[0];
    let vector = spec_result.eigenvectors[0].clone();
    let residual = residual_of(&op, &vector, energy);
    let gap = spec_result.eigenvalues.get(1).map_or(f64::INFINITY, |e1| (e1 - energy).max(0.0));
    Ok(GroundStateResult {
        energy,
        energy_per_spin: energy / n,
        vector,
        sector: basis.total_sz(),
        gap,
        iterations: 0,
        residual,
    })
}

/// Central-difference energy derivatives per spin, with the three solves kept.
#[derive(Clone, Debug)]
pub struct EnergyDerivatives {
    pub e0: f64,
    pub de0: f64,
    pub d2e0: f64,
    pub minus: GroundStateResult,
    pub center: GroundStateResult,
    pub plus: GroundStateResult,
}

pub fn energy_derivatives_fd(
    spec: &ModelSpec,
    param: f64,
    h: f64,
    opts: &SolverOptions,
) -> Result<EnergyDerivatives> {
    if !(h >= MIN_FD_STEP) {
        return Err(Error::StepTooSmall { step: h, min: MIN_FD_STEP });
    }
    let minus = ground_state(&spec.with_param(param - h), opts)?;
    let center = ground_state(&spec.with_param(param), opts)?;
    let plus = ground_state(&spec.with_param(param + h), opts)?;
    Ok(derivatives_from(minus, center, plus, h))
}

pub(crate) fn derivatives_from(
    minus: GroundStateResult,
    center: GroundStateResult,
    plus: GroundStateResult,
    h: f64,
) -> EnergyDerivatives {
    let (em, e0, ep) = (minus.energy_per_spin, center.energy_per_spin, plus.energy_per_spin);
    EnergyDerivatives {
        e0,
        de0: (ep - em) / (2.0 * h),
        d2e0: (ep - 2.0 * e0 + em) / (h * h),
        minus,
        center,
        plus,
    }
}

/// Second derivative of the energy per spin from second-order perturbation
/// theory: `sum_{n>0} 2 |<n|H1|0>|^2 / (N (E0 - En))` with `H1 = dH/dparam`.
pub fn curvature_perturbative(spec: &ModelSpec, param: f64, cap: usize) -> Result<f64> {
    let spec = spec.with_param(param);
    let basis = ground_basis(&spec)?;
    let h = hamiltonian(&spec, basis.clone())?;
    let h1 = driving_operator(&spec, basis)?;
    let spectrum = dense_spectrum(&h, cap)?;
    let e0 = spectrum.eigenvalues[0];
    if let Some(&e1) = spectrum.eigenvalues.get(1) {
        if e1 - e0 < DEGENERACY_GAP {
            return Err(Error::DegenerateGroundState { gap: e1 - e0 });
        }
    }
    let driven = h1.apply(&spectrum.eigenvectors[0]);
    let n = spec.n_sites as f64;
    Ok(spectrum
        .eigenvalues
        .iter()
        .zip(&spectrum.eigenvectors)
        .skip(1)
        .map(|(en, psi)| {
            let m = psi.dot(&driven);
            2.0 * m * m / (n * (e0 - en))
        })
        .sum())
}
