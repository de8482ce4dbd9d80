use proptest::prelude::*;
use rfs_core::hilbert::{
    apply_heisenberg_bond, apply_total_lowering, enumerate_sector, HalfInt, SectorBasis, SiteSpec, Spin, StateVector,
};

fn sites_strategy() -> impl Strategy<Value = SiteSpec> {
    prop_oneof![
        (2usize..=10).prop_map(|n| SiteSpec::uniform(n, Spin::HALF).unwrap()),
        (2usize..=6).prop_map(|n| SiteSpec::uniform(n, Spin::ONE).unwrap()),
        (1usize..=4, 2u32..=3).prop_map(|(c, t)| SiteSpec::alternating(c.max(1), Spin::HALF, Spin::from_twice(t).unwrap()).unwrap()),
    ]
    .prop_filter("at least two sites", |s| s.n_sites() >= 2)
}

fn random_vector(len: usize, seed: u64) -> StateVector {
    // Small LCG keeps the vector reproducible from the proptest seed.
    let mut x = seed | 1;
    StateVector::new(
        (0..len)
            .map(|_| {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((x >> 11) as f64 / (1u64 << 53) as f64) - 0.5
            })
            .collect(),
    )
}

fn sector(sites: &SiteSpec, twice_sz: i64) -> Option<SectorBasis> {
    enumerate_sector(sites, HalfInt::from_twice(twice_sz)).ok()
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

#[test]
fn spin_half_sector_sizes_are_binomial() {
    for n in 2..=12usize {
        let sites = SiteSpec::uniform(n, Spin::HALF).unwrap();
        for up in 0..=n {
            let twice = 2 * up as i64 - n as i64;
            assert_eq!(sector(&sites, twice).unwrap().len() as u64, binomial(n as u64, up as u64));
        }
    }
}

proptest! {
    #[test]
    fn sectors_partition_the_product_space(sites in sites_strategy()) {
        let max = sites.max_sz().twice();
        let total: usize = (-max..=max).step_by(2).filter_map(|t| sector(&sites, t)).map(|b| b.len()).sum();
        let product: usize = sites.spins().iter().map(|s| s.dim()).product();
        prop_assert_eq!(total, product);
    }

    #[test]
    fn basis_states_carry_their_sector(sites in sites_strategy(), pick in 0usize..64) {
        let max = sites.max_sz().twice();
        let twice = max - 2 * (pick as i64 % (max + 1));
        if let Some(b) = sector(&sites, twice) {
            for (k, &code) in b.states().iter().enumerate() {
                let sz: i64 = (0..b.n_sites()).map(|s| b.twice_m(code, s)).sum();
                prop_assert_eq!(sz, twice);
                prop_assert_eq!(b.index_of(code), Some(k));
            }
            prop_assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn bond_operator_is_symmetric(sites in sites_strategy(), pick in 0usize..64, seed in any::<u64>()) {
        let n = sites.n_sites();
        let (i, j) = (pick % n, (pick / n + 1 + pick % n) % n);
        prop_assume!(i != j);
        let b = sector(&sites, sites.max_sz().twice() % 2).unwrap();
        let x = random_vector(b.len(), seed);
        let y = random_vector(b.len(), seed ^ 0x9e37);
        let hx = apply_heisenberg_bond(&x, &b, i, j, 1.0).unwrap();
        let hy = apply_heisenberg_bond(&y, &b, i, j, 1.0).unwrap();
        prop_assert!((y.dot(&hx) - x.dot(&hy)).abs() < 1e-12 * (1.0 + x.norm() * y.norm()));
    }

    #[test]
    fn bond_operator_commutes_with_total_lowering(sites in sites_strategy(), pick in 0usize..64, seed in any::<u64>()) {
        let n = sites.n_sites();
        let (i, j) = (pick % n, (pick / n + 1 + pick % n) % n);
        prop_assume!(i != j);
        let top = sites.max_sz().twice();
        let from_twice = top - 2 * (pick as i64 % (top.max(1)));
        let (Some(from), Some(to)) = (sector(&sites, from_twice), sector(&sites, from_twice - 2)) else {
            return Ok(());
        };
        let v = random_vector(from.len(), seed);
        let a = apply_total_lowering(&apply_heisenberg_bond(&v, &from, i, j, 1.0).unwrap(), &from, &to).unwrap();
        let b = apply_heisenberg_bond(&apply_total_lowering(&v, &from, &to).unwrap(), &to, i, j, 1.0).unwrap();
        let diff = a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(diff < 1e-12, "diff {diff}");
    }
}

#[test]
fn fully_polarized_state_has_maximal_casimir() {
    // S_tot^2 = sum_i s_i(s_i+1) + 2 sum_{i<j} S_i.S_j on the top state.
    for sites in [
        SiteSpec::uniform(5, Spin::HALF).unwrap(),
        SiteSpec::uniform(4, Spin::ONE).unwrap(),
        SiteSpec::alternating(2, Spin::HALF, Spin::from_twice(3).unwrap()).unwrap(),
    ] {
        let b = enumerate_sector(&sites, sites.max_sz()).unwrap();
        assert_eq!(b.len(), 1);
        let v = StateVector::new(vec![1.0]);
        let n = sites.n_sites();
        let mut total: f64 = sites.spins().iter().map(|s| s.casimir()).sum();
        for i in 0..n {
            for j in (i + 1)..n {
                total += 2.0 * v.dot(&apply_heisenberg_bond(&v, &b, i, j, 1.0).unwrap());
            }
        }
        let s = sites.max_sz().value();
        assert!((total - s * (s + 1.0)).abs() < 1e-12);
    }
}
