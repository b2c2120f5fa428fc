use pbdnf::construct::{general_dnf, general_dnf_traced, verify};
use pbdnf::formula::random_formula;
use pbdnf::fourier::{formula_spectrum, range_encode, wht};
use pbdnf::learner::{learn_submodular, Backend, Hypothesis, LearnerConfig};
use pbdnf::restrictions::{
    restrict_formula, restrict_table, sample_restriction, switching_experiment, RestrictionFamily,
};
use pbdnf::submodular::zoo;
use pbdnf::{seed, CountingOracle, Formula, SetFunction, Spectrum};

#[test]
fn decomposition_survives_json() {
    let mut rng = seed::rng(1);
    for _ in 0..20 {
        let f = zoo::random_submodular(7, &mut rng);
        let d = general_dnf_traced(&f);
        let text = serde_json::to_string(&d).unwrap();
        let back: pbdnf::construct::Decomposition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
        assert!(verify(&f, &back.formula).unwrap().exact);
        let g: SetFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(g, f);
    }
}

#[test]
fn restriction_commutes_with_decomposition() {
    let mut rng = seed::rng(2);
    for i in 0..20 {
        let f = zoo::random_submodular(8, &mut rng);
        let formula = general_dnf(&f);
        let rho = sample_restriction(8, 0.4, 100 + i).unwrap();
        let lhs = restrict_formula(&formula, &rho).unwrap().to_table().unwrap();
        let rhs = restrict_table(f.table(), &rho).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn spectrum_of_formula_matches_dense_transform() {
    for i in 0..20 {
        let f = random_formula(9, 3, 4, 5, 300 + i).unwrap();
        let direct = wht(&range_encode(&f.to_table().unwrap(), 4).unwrap()).unwrap();
        let relevant = formula_spectrum(&f).unwrap().affine(0.5, -1.0);
        assert!(direct.distance_squared(&relevant) < 1e-20);
        let back: Spectrum = serde_json::from_str(&serde_json::to_string(&direct).unwrap()).unwrap();
        assert!(back.distance_squared(&direct) < 1e-24);
    }
}

#[test]
fn switching_runs_are_reproducible() {
    let f: Formula = random_formula(12, 2, 2, 6, 9).unwrap();
    let run = |seed_value| {
        switching_experiment(
            &f,
            2,
            2,
            RestrictionFamily::Iid { p: 0.05 },
            &[1, 2, 3],
            2000,
            seed_value,
        )
        .unwrap()
    };
    assert_eq!(run(4), run(4));
    let rows = run(4);
    assert!(rows.windows(2).all(|w| w[0].p_hat >= w[1].p_hat));
}

#[test]
fn learned_hypothesis_round_trips() {
    let mut rng = seed::rng(3);
    let f = zoo::random_monotone_submodular(6, &mut rng);
    let config = LearnerConfig::new(0.1, 0.1, 0, 1, Backend::Exact);
    let out = learn_submodular(&CountingOracle::new(&f), f.range_max(), &config).unwrap();
    let back: Hypothesis = serde_json::from_str(&serde_json::to_string(&out.hypothesis).unwrap()).unwrap();
    assert_eq!(back.table, out.hypothesis.table);
    assert_eq!(back.table.as_ref().unwrap().values(), f.values());
}
