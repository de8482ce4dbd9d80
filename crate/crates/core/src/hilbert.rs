//! Fixed-magnetization product bases and matrix-free bond kernels.
//!
//! A configuration is packed into a `u64` as a mixed-radix integer with one
//! digit per site (site 0 most significant). Digit `d` on a site of spin `S`
//! encodes `m = S - d`, so digit 0 is the fully polarized `m = +S` state and
//! ascending codes give the canonical ordering of a [`SectorBasis`].

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A half-integer stored exactly as twice its value.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt(i64);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);

    pub const fn from_twice(twice: i64) -> Self {
        HalfInt(twice)
    }

    pub const fn twice(self) -> i64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Rounds to the nearest half-integer, rejecting values further than 1e-9 away.
    pub fn from_f64(x: f64) -> Option<Self> {
        let t = (2.0 * x).round();
        ((2.0 * x - t).abs() < 1e-9 && t.is_finite()).then_some(HalfInt(t as i64))
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 % 2 == 0 {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// Spin length `S >= 1/2` of a single site.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Spin(u32);

impl Spin {
    pub const HALF: Spin = Spin(1);
    pub const ONE: Spin = Spin(2);

    pub fn from_twice(twice: u32) -> Result<Self> {
        if twice == 0 {
            return Err(Error::InvalidSites("spin length must be positive".into()));
        }
        Ok(Spin(twice))
    }

    /// Parses `1/2`, `3/2`, `1`, `1.5`, ...
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSites(format!("cannot parse spin length {s:?}"));
        let value = match s.split_once('/') {
            Some((num, den)) => {
                let num: f64 = num.trim().parse().map_err(|_| bad())?;
                let den: f64 = den.trim().parse().map_err(|_| bad())?;
                num / den
            }
            None => s.trim().parse().map_err(|_| bad())?,
        };
        let h = HalfInt::from_f64(value).ok_or_else(bad)?;
        if h.twice() <= 0 {
            return Err(bad());
        }
        Spin::from_twice(h.twice() as u32)
    }

    pub const fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }

    /// Local dimension `2S + 1`.
    pub const fn dim(self) -> usize {
        self.0 as usize + 1
    }

    /// `S(S+1)`.
    pub fn casimir(self) -> f64 {
        let s = self.value();
        s * (s + 1.0)
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        HalfInt::from_twice(self.0 as i64).fmt(f)
    }
}

/// `<m+1| S+ |m>` with spin and magnetization given as twice their values.
pub(crate) fn ladder_up(twice_s: i64, twice_m: i64) -> f64 {
    (((twice_s * (twice_s + 2)) - twice_m * (twice_m + 2)) as f64).sqrt() / 2.0
}

/// `<m-1| S- |m>` with spin and magnetization given as twice their values.
pub(crate) fn ladder_down(twice_s: i64, twice_m: i64) -> f64 {
    (((twice_s * (twice_s + 2)) - twice_m * (twice_m - 2)) as f64).sqrt() / 2.0
}

/// Spin lengths of every site of a chain.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteSpec {
    spins: Vec<Spin>,
}

impl SiteSpec {
    pub fn new(spins: Vec<Spin>) -> Result<Self> {
        if spins.len() < 2 {
            return Err(Error::InvalidSites(format!(
                "need at least 2 sites, got {}",
                spins.len()
            )));
        }
        let mut total: u128 = 1;
        for s in &spins {
            total = total.saturating_mul(s.dim() as u128);
        }
        if total > u64::MAX as u128 {
            return Err(Error::InvalidSites("product space does not fit in 64-bit codes".into()));
        }
        Ok(SiteSpec { spins })
    }

    pub fn uniform(n: usize, spin: Spin) -> Result<Self> {
        SiteSpec::new(vec![spin; n])
    }

    /// `cells` repetitions of the pair `(a, b)`.
    pub fn alternating(cells: usize, a: Spin, b: Spin) -> Result<Self> {
        SiteSpec::new((0..cells).flat_map(|_| [a, b]).collect())
    }

    pub fn n_sites(&self) -> usize {
        self.spins.len()
    }

    pub fn spins(&self) -> &[Spin] {
        &self.spins
    }

    pub fn spin(&self, site: usize) -> Spin {
        self.spins[site]
    }

    /// `sum_i S_i`, the largest attainable total Sz.
    pub fn max_sz(&self) -> HalfInt {
        HalfInt::from_twice(self.spins.iter().map(|s| s.twice() as i64).sum())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.n_sites() {
            return Err(Error::IndexOutOfRange { index: site, n_sites: self.n_sites() });
        }
        Ok(())
    }
}

/// Canonically ordered product configurations sharing one total Sz.
///
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    sites: SiteSpec,
    total_sz: HalfInt,
    states: Vec<u64>,
    index: HashMap<u64, usize>,
    strides: Vec<u64>,
}

/// Enumerates every configuration of `sites` whose magnetizations sum to `total_sz`.
pub fn enumerate_sector(sites: &SiteSpec, total_sz: HalfInt) -> Result<SectorBasis> {
    let n = sites.n_sites();
    let max = sites.max_sz().twice();
    let target = total_sz.twice();
    if target.abs() > max || (max - target) % 2 != 0 {
        return Err(Error::EmptySector(total_sz.to_string()));
    }

    let mut strides = vec![1u64; n];
    for site in (0..n.saturating_sub(1)).rev() {
        strides[site] = strides[site + 1] * sites.spin(site + 1).dim() as u64;
    }
    // suffix_max[k] = sum of 2S over sites k..n
    let mut suffix_max = vec![0i64; n + 1];
    for site in (0..n).rev() {
        suffix_max[site] = suffix_max[site + 1] + sites.spin(site).twice() as i64;
    }

    let mut states = Vec::new();
    let mut stack: Vec<(usize, i64, u64)> = vec![(0, target, 0)];
    // Depth-first over digits; pushing digits in reverse keeps output ascending.
    while let Some((site, remaining, code)) = stack.pop() {
        if site == n {
            if remaining == 0 {
                states.push(code);
            }
            continue;
        }
        let ts = sites.spin(site).twice() as i64;
        for digit in (0..=ts).rev() {
            let twice_m = ts - 2 * digit;
            let rest = remaining - twice_m;
            if rest.abs() <= suffix_max[site + 1] {
                stack.push((site + 1, rest, code + digit as u64 * strides[site]));
            }
        }
    }
    if states.is_empty() {
        return Err(Error::EmptySector(total_sz.to_string()));
    }
    let index = states.iter().enumerate().map(|(k, &c)| (c, k)).collect();
    Ok(SectorBasis { sites: sites.clone(), total_sz, states, index, strides })
}

impl SectorBasis {
    pub fn sites(&self) -> &SiteSpec {
        &self.sites
    }

    pub fn n_sites(&self) -> usize {
        self.sites.n_sites()
    }

    pub fn total_sz(&self) -> HalfInt {
        self.total_sz
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, code: u64) -> Option<usize> {
        self.index.get(&code).copied()
    }

    pub fn digit(&self, code: u64, site: usize) -> u64 {
        (code / self.strides[site]) % self.sites.spin(site).dim() as u64
    }

    /// Twice the magnetization of `site` in configuration `code`.
    pub fn twice_m(&self, code: u64, site: usize) -> i64 {
        self.sites.spin(site).twice() as i64 - 2 * self.digit(code, site) as i64
    }

    pub fn stride(&self, site: usize) -> u64 {
        self.strides[site]
    }

    /// Human-readable configuration such as `[1/2, -1/2, 1]`.
    pub fn describe(&self, code: u64) -> String {
        let ms: Vec<String> = (0..self.n_sites())
            .map(|s| HalfInt::from_twice(self.twice_m(code, s)).to_string())
            .collect();
        format!("[{}]", ms.join(", "))
    }

    fn check_vector(&self, v: &StateVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::BasisMismatch(v.len(), self.len()));
        }
        Ok(())
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        self.sites.check_site(i)?;
        self.sites.check_site(j)?;
        if i == j {
            return Err(Error::IndexOutOfRange { index: j, n_sites: self.n_sites() });
        }
        Ok(())
    }
}

/// Real amplitudes indexed by the ordinals of a [`SectorBasis`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector(Vec<f64>);

impl StateVector {
    pub fn new(coefficients: Vec<f64>) -> Self {
        StateVector(coefficients)
    }

    pub fn zeros(len: usize) -> Self {
        StateVector(vec![0.0; len])
    }

    /// Unit vector on a single basis ordinal.
    pub fn basis_state(len: usize, ordinal: usize) -> Self {
        let mut v = vec![0.0; len];
        v[ordinal] = 1.0;
        StateVector(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &StateVector) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.0.iter_mut().for_each(|x| *x /= n);
        }
        self
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= 1e-12
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += coupling * (S_i . S_j) x`, gathered row by row.
pub(crate) fn accumulate_heisenberg(
    basis: &SectorBasis,
    i: usize,
    j: usize,
    coupling: f64,
    x: &[f64],
    y: &mut [f64],
) {
    let tsi = basis.sites.spin(i).twice() as i64;
    let tsj = basis.sites.spin(j).twice() as i64;
    let (si, sj) = (basis.strides[i], basis.strides[j]);
    for (k, &code) in basis.states.iter().enumerate() {
        let mi = basis.twice_m(code, i);
        let mj = basis.twice_m(code, j);
        let mut acc = 0.25 * (mi * mj) as f64 * x[k];
        // <code| S_i^+ S_j^- |src>: src has m_i lowered and m_j raised.
        if mi > -tsi && mj < tsj {
            let src = code + si - sj;
            if let Some(&s) = basis.index.get(&src) {
                acc += 0.5 * ladder_up(tsi, mi - 2) * ladder_down(tsj, mj + 2) * x[s];
            }
        }
        if mi < tsi && mj > -tsj {
            let src = code - si + sj;
            if let Some(&s) = basis.index.get(&src) {
                acc += 0.5 * ladder_down(tsi, mi + 2) * ladder_up(tsj, mj - 2) * x[s];
            }
        }
        y[k] += coupling * acc;
    }
}

/// Returns `coupling * (S_i . S_j) v`.
pub fn apply_heisenberg_bond(
    v: &StateVector,
    basis: &SectorBasis,
    i: usize,
    j: usize,
    coupling: f64,
) -> Result<StateVector> {
    basis.check_pair(i, j)?;
    basis.check_vector(v)?;
    let mut out = vec![0.0; basis.len()];
    accumulate_heisenberg(basis, i, j, coupling, v.as_slice(), &mut out);
    Ok(StateVector(out))
}

/// Returns `coupling * (S_i . S_j)^2 v` for a pair of spin-1 sites.
pub fn apply_biquadratic_bond(
    v: &StateVector,
    basis: &SectorBasis,
    i: usize,
    j: usize,
    coupling: f64,
) -> Result<StateVector> {
    basis.check_pair(i, j)?;
    basis.check_vector(v)?;
    for site in [i, j] {
        let s = basis.sites.spin(site);
        if s != Spin::ONE {
            return Err(Error::UnsupportedSpin(s.to_string()));
        }
    }
    let once = apply_heisenberg_bond(v, basis, i, j, 1.0)?;
    apply_heisenberg_bond(&once, basis, i, j, coupling)
}

/// Applies the total lowering operator `sum_i S_i^-`, mapping a vector of
/// `from` onto the sector `to` with one unit less of total Sz.
pub fn apply_total_lowering(
    v: &StateVector,
    from: &SectorBasis,
    to: &SectorBasis,
) -> Result<StateVector> {
    from.check_vector(v)?;
    if from.sites != to.sites || to.total_sz.twice() != from.total_sz.twice() - 2 {
        return Err(Error::SpecMismatch(format!(
            "lowering from Sz={} needs target Sz={}, got {}",
            from.total_sz,
            HalfInt::from_twice(from.total_sz.twice() - 2),
            to.total_sz
        )));
    }
    let mut out = vec![0.0; to.len()];
    for (k, &code) in from.states.iter().enumerate() {
        if v.0[k] == 0.0 {
            continue;
        }
        for site in 0..from.n_sites() {
            let ts = from.sites.spin(site).twice() as i64;
            let m = from.twice_m(code, site);
            if m > -ts {
                let target = code + from.strides[site];
                let t = to.index_of(target).expect("lowered configuration lies in target sector");
                out[t] += ladder_down(ts, m) * v.0[k];
            }
        }
    }
    Ok(StateVector(out))
}
