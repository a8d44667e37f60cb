use depthguard::experiments::gaussian_sample;
use depthguard::mechanisms::PrivacyCost;
use depthguard::oracle::{brute_force_sensitivity, exact_halfspace_2d, ReplacementPool};
use depthguard::*;

#[test]
fn sampled_halfspace_tracks_exact_planar_depth() {
    let mut close = 0;
    for seed in 0..40u64 {
        let data = gaussian_sample(50, 2, 1.0, &mut RandomSource::derive(seed, "data")).unwrap();
        let dirs = sample_directions(1000, 2, seed).unwrap();
        let x = [0.3, -0.2];
        let exact = exact_halfspace_2d(&x, &data).unwrap().value;
        let sampled = halfspace_depth(&x, &data, &dirs).unwrap().value;
        assert!(sampled >= exact - 1e-12, "seed {seed}: {sampled} < {exact}");
        close += usize::from(sampled - exact <= 0.05);
    }
    assert!(close >= 38, "{close}/40");
}

#[test]
fn vector_noise_dominates_sampling_error() {
    let n = 1000;
    let dirs = sample_directions(100, 2, 1).unwrap();
    let reference =
        gaussian_sample(100_000, 2, 1.0, &mut RandomSource::derive(0, "reference")).unwrap();
    let reference_profile: Vec<Vec<f64>> = dirs
        .iter()
        .map(|u| {
            let mut p: Vec<f64> = reference.rows().map(|r| u.dot(r)).collect();
            p.sort_by(f64::total_cmp);
            p
        })
        .collect();
    let population_depth = |x: &[f64]| {
        reference_profile
            .iter()
            .zip(&dirs)
            .map(|(p, u)| p.partition_point(|&v| v <= u.dot(x)) as f64 / p.len() as f64)
            .fold(1.0, f64::min)
    };
    let params = PrivacyParams::laplace(1.0).unwrap();
    let reps = 20;
    let mut dominated = 0;
    for seed in 0..reps {
        let data = gaussian_sample(n, 2, 1.0, &mut RandomSource::derive(seed, "data")).unwrap();
        let spec = DepthSpec::new(DepthKind::Halfspace, &dirs);
        let exact = depth_vector(
            &data,
            DepthKind::Halfspace,
            &dirs,
            &SimplicialMode::default(),
        )
        .unwrap();
        let report = private_depth_vector(
            &data,
            spec,
            &params,
            &mut BudgetLedger::new(),
            &mut RandomSource::derive(seed, "noise"),
        )
        .unwrap();
        let noise: f64 = report
            .payload
            .values()
            .unwrap()
            .iter()
            .zip(&exact.values)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        let sampling: f64 = data
            .rows()
            .zip(&exact.values)
            .map(|(x, d)| (d - population_depth(x)).powi(2))
            .sum::<f64>()
            .sqrt();
        dominated += usize::from(noise > sampling);
    }
    assert!(dominated * 10 >= reps as usize * 9, "{dominated}/{reps}");
}

#[test]
fn every_estimator_appends_one_entry_with_its_cost() {
    let data = gaussian_sample(200, 2, 1.0, &mut RandomSource::new(5)).unwrap();
    let dirs = sample_directions(32, 2, 5).unwrap();
    let spec = DepthSpec::new(DepthKind::Irw, &dirs);
    let mut ledger = BudgetLedger::new();
    let mut rng = RandomSource::new(6);
    let laplace = PrivacyParams::laplace(0.5).unwrap();
    let gaussian = PrivacyParams::gaussian(0.5, 1e-5).unwrap();
    let ptr_params = PrivacyParams::new(0.5, 1e-4, NoiseVariant::Laplace).unwrap();

    let expect = |ledger: &BudgetLedger, cost: PrivacyCost, count: usize| {
        assert_eq!(ledger.len(), count);
        let last = ledger.entries().last().unwrap();
        assert_eq!((last.epsilon, last.delta), (cost.epsilon, cost.delta));
    };
    private_depth_point(&[0.0, 0.0], &data, spec, &laplace, &mut ledger, &mut rng).unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 0.5,
            delta: 0.0,
        },
        1,
    );
    private_depth_vector(&data, spec, &gaussian, &mut ledger, &mut rng).unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 0.5,
            delta: 1e-5,
        },
        2,
    );
    private_projection_depth(
        &[0.0, 0.0],
        &data,
        &dirs,
        Scale::Iqr,
        0.5,
        &ptr_params,
        &mut ledger,
        &mut rng,
    )
    .unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 1.0,
            delta: 1e-4,
        },
        3,
    );
    let grid = CandidateGrid::regular(&[-1.0, -1.0], &[1.0, 1.0], 5).unwrap();
    private_depth_median_exp(
        &data,
        spec,
        &grid,
        &Prior::Uniform,
        0.5,
        &mut ledger,
        &mut rng,
    )
    .unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 0.5,
            delta: 0.0,
        },
        4,
    );
    let trunc = TruncatedOutlyingnessSpec::new(5.0, Scale::Iqr, dirs.clone()).unwrap();
    let gaussian_ptr = PrivacyParams::gaussian(0.5, 1e-4).unwrap();
    private_projection_median_ptr(
        &data,
        &trunc,
        &grid,
        0.5,
        &gaussian_ptr,
        &mut ledger,
        &mut rng,
    )
    .unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 1.0,
            delta: 2e-4,
        },
        5,
    );
    let (a, b) = (
        gaussian_sample(10, 2, 1.0, &mut rng).unwrap(),
        gaussian_sample(10, 2, 2.0, &mut rng).unwrap(),
    );
    private_rank_sum_scale_test(
        &a,
        &b,
        spec,
        &laplace,
        50,
        &mut ledger,
        &mut rng.clone(),
        &mut RandomSource::new(0),
    )
    .unwrap();
    expect(
        &ledger,
        PrivacyCost {
            epsilon: 0.5,
            delta: 0.0,
        },
        6,
    );
    let total = ledger.basic_total();
    assert!((total.epsilon - 4.0).abs() < 1e-12);
}

#[test]
fn vector_bound_needs_distinct_rows() {
    // Five identical rows all have depth 1; replacing one pushes the other
    // four to 4/5 and the replaced one to 1/5, an L1 change of 1.6.
    let data = Dataset::from_column(&[0.0; 5]).unwrap();
    let dirs = sample_directions(2, 1, 0).unwrap();
    let pool = ReplacementPool::from_values(&[1e6]).unwrap();
    let change = brute_force_sensitivity(
        |s| Ok(depth_vector(s, DepthKind::Halfspace, &dirs, &SimplicialMode::default())?.values),
        &data,
        &pool,
        Norm::L1,
    )
    .unwrap();
    let bound = vector_global_sensitivity(DepthKind::Halfspace, 5, 1, Norm::L1)
        .unwrap()
        .value;
    assert!((change - 1.6).abs() < 1e-12);
    assert!(change > bound);
}

#[test]
fn reports_serialize_bottom_and_hide_audit() {
    let flat = Dataset::from_column(&[1.0; 9]).unwrap();
    let dirs = sample_directions(2, 1, 0).unwrap();
    let params = PrivacyParams::new(1.0, 1e-3, NoiseVariant::Laplace).unwrap();
    let report = private_projection_depth(
        &[1.0],
        &flat,
        &dirs,
        Scale::Iqr,
        1.0,
        &params,
        &mut BudgetLedger::new(),
        &mut FixedNoise::zero(),
    )
    .unwrap();
    let json = serde_json::to_value(&report).unwrap();
    assert_eq!(json["payload"], "bottom");
    assert_eq!(json["estimator"], "projection-depth-ptr");
    assert!(json.get("audit").is_none());
    assert_eq!(json["ledger_entry"]["epsilon"], 2.0);
}
