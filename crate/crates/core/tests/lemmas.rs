use pbdnf::formula::random_formula;
use pbdnf::fourier::{formula_spectrum, range_encode, wht};
use pbdnf::{Formula, Spectrum, Term};
use proptest::prelude::*;

fn encoded(f: &Formula, r: u32) -> Spectrum {
    wht(&range_encode(&f.to_table().unwrap(), r).unwrap()).unwrap()
}

fn l2_threshold(k: usize, r: u32, eps: f64) -> f64 {
    28.0 * k as f64 * (2.0 * r as f64 / eps).log2()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn low_degree_l1_bound(seed in any::<u64>(), n in 1usize..=10, k in 1usize..=3, r in 1u32..=4, s in 1usize..=6) {
        let k = k.min(n);
        let spectrum = encoded(&random_formula(n, k, r, s, seed).unwrap(), r);
        for tau in 0..=n {
            let bound = 4.0 * r as f64 * (28.0 * k as f64).powi(tau as i32);
            prop_assert!(spectrum.low_degree_l1(tau) <= bound + 1e-9);
        }
    }

    #[test]
    fn l2_tail_beyond_threshold(seed in any::<u64>(), n in 1usize..=10, k in 1usize..=3, r in 1u32..=4, s in 1usize..=6) {
        let k = k.min(n);
        let spectrum = encoded(&random_formula(n, k, r, s, seed).unwrap(), r);
        for eps in [0.01, 0.1, 0.5] {
            let t = l2_threshold(k, r, eps).floor() as i64;
            prop_assert!(t >= n as i64);
            prop_assert!(spectrum.l2_tail(t) <= eps / 2.0);
        }
    }
}

#[test]
fn l2_tail_below_dimension() {
    // k = r = 1 and ε = 0.95 put the threshold near 30.07, below n = 32.
    let eps = 0.95;
    let t = l2_threshold(1, 1, eps);
    assert!(t < 32.0);
    let t = t.floor() as i64;
    let or24 = Formula::new(32, (0..24).map(|i| Term::monotone(1 << (i + 8), 1)).collect()).unwrap();
    let mixed = Formula::new(
        32,
        (0..24)
            .map(|i| {
                let v = 1 << (31 - i);
                if i % 3 == 0 {
                    Term::new(0, v, 1).unwrap()
                } else {
                    Term::monotone(v, 1)
                }
            })
            .collect(),
    )
    .unwrap();
    for f in [or24, mixed] {
        let spectrum = formula_spectrum(&f).unwrap().affine(2.0, -1.0);
        assert!((spectrum.mass() - 1.0).abs() < 1e-9);
        assert!(spectrum.l2_tail(t) <= eps / 2.0);
        assert!(spectrum.l2_tail(t) >= 0.0);
    }
}
