use soil_core::simulation::{run_study, ScenarioConfig, StudyOptions};
use soil_core::{SoilConfig, WeightingMethod};

const BIC: WeightingMethod = WeightingMethod::BicP;

/// Noisy S1 design: the small coefficient on X5 needs a few hundred rows.
fn ladder() -> Vec<(usize, f64, f64)> {
    let opts = StudyOptions {
        soil: SoilConfig {
            methods: vec![BIC],
            ..SoilConfig::default()
        },
        thresholds: vec![0.5],
    };
    [150, 600, 2400]
        .into_iter()
        .map(|n| {
            let mut cfg = ScenarioConfig::example("s1").unwrap();
            cfg.n = n;
            cfg.sigma2 = 4.0;
            cfg.replications = 30;
            cfg.seed = 13;
            let res = run_study(&cfg, &opts).unwrap();
            let sel = res.selection(BIC, 0.5).unwrap().mean_symdiff_ratio.unwrap();
            let weighted = res.method(BIC).unwrap().mean_weighted_symdiff / 5.0;
            (n, sel, weighted)
        })
        .collect()
}

#[test]
fn selection_and_weighting_errors_shrink_with_n() {
    let rows = ladder();
    for (n, sel, weighted) in &rows {
        println!("n={n} thresholded {sel:.4} weighted {weighted:.4}");
    }
    for w in rows.windows(2) {
        assert!(w[1].1 <= w[0].1, "thresholded error rose: {rows:?}");
        assert!(w[1].2 < w[0].2 || w[1].2 == 0.0, "weighted error did not fall: {rows:?}");
    }
    assert!(rows[0].1 > 0.0, "ladder starts too easy to be informative: {rows:?}");
}
