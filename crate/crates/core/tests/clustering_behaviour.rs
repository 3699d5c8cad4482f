use migration_impact::{
    adjusted_rand_index, compute_inmi, evaluate_k, kmeans_cluster, seed_stability, Benchmark,
    CountrySummary, LabeledPoint,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn blobs(per: usize, spread: f64, seed: u64) -> Vec<LabeledPoint<f64>> {
    let centres = [[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, spread).unwrap();
    let mut pts = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for i in 0..per {
            pts.push(LabeledPoint::new(
                format!("b{c}_{i:02}"),
                centre[0] + noise.sample(&mut rng),
                centre[1] + noise.sample(&mut rng),
            ));
        }
    }
    pts
}

fn random_points(n: usize, seed: u64) -> Vec<LabeledPoint<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            LabeledPoint::new(
                format!("p{i:03}"),
                rng.random_range(0.0..3.0),
                rng.random_range(0.0..3.0),
            )
        })
        .collect()
}

#[test]
fn inertia_never_increases_across_lloyd_steps() {
    for seed in 0..20 {
        let res = kmeans_cluster(&random_points(60, seed), 4, 1, seed).unwrap();
        assert!(res.inertia_trace.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_eq!(*res.inertia_trace.last().unwrap(), res.inertia);
    }
}

#[test]
fn more_restarts_never_do_worse() {
    let pts = random_points(50, 3);
    let mut prev = f64::INFINITY;
    for r in 1..=12 {
        let res = kmeans_cluster(&pts, 5, r, 77).unwrap();
        assert!(res.inertia <= prev);
        prev = res.inertia;
    }
}

#[test]
fn input_order_does_not_matter() {
    let pts = random_points(40, 8);
    let base = kmeans_cluster(&pts, 4, 5, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..5 {
        let mut shuffled = pts.clone();
        shuffled.shuffle(&mut rng);
        assert_eq!(kmeans_cluster(&shuffled, 4, 5, 1).unwrap(), base);
    }
}

#[test]
fn well_separated_blobs_are_recovered() {
    let pts = blobs(15, 0.3, 4);
    let res = kmeans_cluster(&pts, 4, 10, 20_190_601).unwrap();
    let truth: Vec<usize> = res
        .assignments
        .iter()
        .map(|(l, _)| l[1..2].parse().unwrap())
        .collect();
    assert_eq!(adjusted_rand_index(&truth, &res.labels()), 1.0);
    let stab = seed_stability(&pts, 4, 10, &[1, 2, 3, 4, 5]).unwrap();
    assert_eq!(stab.agreement, 1.0);
    assert!(!stab.degenerate);
}

#[test]
fn inertia_decreases_over_candidate_ks() {
    let diags = evaluate_k(&blobs(10, 0.8, 5), &[5, 3, 4], 10, 1).unwrap();
    assert_eq!(diags.iter().map(|d| d.k).collect::<Vec<_>>(), vec![3, 4, 5]);
    assert!(diags.windows(2).all(|w| w[1].inertia < w[0].inertia));
    assert!(diags.iter().all(|d| d.silhouette.is_some()));
}

#[test]
fn coincident_points_are_a_degenerate_stability_case() {
    let pts: Vec<_> = (0..6)
        .map(|i| LabeledPoint::new(format!("c{i}"), 1.0, 1.0))
        .collect();
    let stab = seed_stability(&pts, 2, 3, &[1, 2]).unwrap();
    assert!(stab.degenerate);
    assert_eq!(stab.agreement, 1.0);
}

#[test]
fn invalid_clustering_requests_are_rejected() {
    let pts = random_points(5, 1);
    assert!(kmeans_cluster(&pts, 0, 1, 0).is_err());
    assert!(kmeans_cluster(&pts, 6, 1, 0).is_err());
    assert!(kmeans_cluster(&pts, 2, 0, 0).is_err());
    let mut dup = pts.clone();
    dup[1].label = dup[0].label.clone();
    assert!(kmeans_cluster(&dup, 2, 1, 0).is_err());
}

#[test]
fn adjusted_rand_index_ignores_label_names() {
    assert_eq!(adjusted_rand_index(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]), 1.0);
    assert!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 1, 0, 1]) < 0.0);
}

#[test]
fn inmi_is_the_product_of_its_ratios() {
    let bench = Benchmark {
        avg_cmi_slope: 2.5,
        avg_mei: 12.0,
        sample_size: 71,
        note: String::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..100 {
        let s: CountrySummary<f64> = CountrySummary::new(
            format!("c{i}"),
            rng.random_range(0.0..10.0),
            rng.random_range(0.0..100.0),
        )
        .unwrap();
        let r = compute_inmi(&s, &bench).unwrap();
        assert!((r.inmi - r.c_ratio * r.r_ratio).abs() <= 1e-12 * r.inmi.abs().max(1.0));
        assert!((r.c_ratio - s.cmi_slope / 2.5).abs() < 1e-12);
    }
    assert!(CountrySummary::new("bad", 1.0f64, 120.0).is_err());
}

#[test]
fn inmi_is_invariant_to_common_slope_rescaling() {
    let bench = Benchmark {
        avg_cmi_slope: 2.5,
        avg_mei: 12.0,
        sample_size: 71,
        note: String::new(),
    };
    let s = CountrySummary::new("X", 3.1f64, 20.0).unwrap();
    let base = compute_inmi(&s, &bench).unwrap();
    for c in [0.5, std::f64::consts::LN_10, 7.0] {
        let scaled_bench = Benchmark {
            avg_cmi_slope: 2.5 * c,
            ..bench.clone()
        };
        let scaled = CountrySummary::new("X", 3.1 * c, 20.0).unwrap();
        let r = compute_inmi(&scaled, &scaled_bench).unwrap();
        assert!((r.inmi - base.inmi).abs() < 1e-12);
    }
    let own = Benchmark {
        avg_cmi_slope: 3.1,
        avg_mei: 20.0,
        ..bench
    };
    assert_eq!(compute_inmi(&s, &own).unwrap().inmi, 1.0);
}
