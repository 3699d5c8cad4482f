use migration_impact::{
    crude_migration_intensity, load_system, migration_effectiveness_index, net_migration_rates,
    system_indices, CsvInput, Error, FlowData, FlowMatrix, FlowSource, Marginals, MigrationSystem,
    SystemMeta, Zone, ZoneSet,
};
use proptest::prelude::*;

fn zones(pops: &[f64]) -> ZoneSet {
    ZoneSet::new(
        pops.iter()
            .enumerate()
            .map(|(i, &p)| Zone {
                id: format!("z{i}"),
                name: None,
                population: p,
                area: 1.0 + i as f64,
            })
            .collect(),
    )
    .unwrap()
}

fn system(pops: &[f64], rows: Vec<Vec<u64>>) -> MigrationSystem {
    MigrationSystem::new(
        zones(pops),
        FlowData::FullMatrix(FlowMatrix::from_rows(rows).unwrap()),
        SystemMeta::default(),
    )
    .unwrap()
}

/// (populations, flow rows with a zero diagonal)
fn arb_system() -> impl Strategy<Value = (Vec<f64>, Vec<Vec<u64>>)> {
    (2usize..9).prop_flat_map(|n| {
        (
            prop::collection::vec(1.0e3..1.0e6f64, n),
            prop::collection::vec(prop::collection::vec(0u64..500, n), n),
        )
            .prop_map(|(p, mut rows)| {
                for (i, row) in rows.iter_mut().enumerate() {
                    row[i] = 0;
                }
                (p, rows)
            })
    })
}

proptest! {
    #[test]
    fn anmr_equals_cmi_times_mei((pops, rows) in arb_system()) {
        let s = system(&pops, rows);
        prop_assume!(s.migrants() > 0);
        let idx = system_indices::<f64>(&s).unwrap();
        prop_assert!(idx.identity_gap().abs() <= 1e-12 * idx.anmr.max(1.0));
        prop_assert!((0.0..=100.0).contains(&idx.mei));
    }

    #[test]
    fn mei_and_cmi_are_invariant_to_uniform_flow_scaling((pops, rows) in arb_system(), k in 2u64..50) {
        let base = system(&pops, rows.clone());
        prop_assume!(base.migrants() > 0);
        let scaled = system(&pops, rows.iter().map(|r| r.iter().map(|v| v * k).collect()).collect());
        let a = system_indices::<f64>(&base).unwrap();
        let b = system_indices::<f64>(&scaled).unwrap();
        prop_assert!((a.mei - b.mei).abs() <= 1e-9 * a.mei.max(1.0));
        prop_assert!((b.cmi - k as f64 * a.cmi).abs() <= 1e-9 * b.cmi.max(1.0));
    }

    #[test]
    fn indices_are_invariant_to_zone_order((pops, rows) in arb_system(), rot in 0usize..8) {
        let n = pops.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        let pops2: Vec<f64> = perm.iter().map(|&i| pops[i]).collect();
        let rows2: Vec<Vec<u64>> = perm.iter().map(|&o| perm.iter().map(|&d| rows[o][d]).collect()).collect();
        let a = system(&pops, rows);
        let b = system(&pops2, rows2);
        prop_assume!(a.migrants() > 0);
        let (ia, ib) = (system_indices::<f64>(&a).unwrap(), system_indices::<f64>(&b).unwrap());
        prop_assert_eq!(ia.m, ib.m);
        prop_assert_eq!(ia.half_abs_net, ib.half_abs_net);
        prop_assert!((ia.cmi - ib.cmi).abs() <= 1e-12 * ia.cmi.max(1.0));
    }

    #[test]
    fn mei_is_100_for_pure_sources_and_sinks(
        roles in prop::collection::vec(any::<bool>(), 2..9),
        amounts in prop::collection::vec(1u64..100, 81),
    ) {
        prop_assume!(roles.iter().any(|&r| r) && roles.iter().any(|&r| !r));
        let n = roles.len();
        let rows: Vec<Vec<u64>> = (0..n)
            .map(|o| (0..n).map(|d| if roles[o] && !roles[d] { amounts[o * 9 + d] } else { 0 }).collect())
            .collect();
        let s = system(&vec![1e4; n], rows);
        prop_assert_eq!(migration_effectiveness_index::<f64>(&s).unwrap(), 100.0);
    }

    #[test]
    fn weighted_mean_nmr_is_zero((pops, rows) in arb_system()) {
        let s = system(&pops, rows);
        let rates = net_migration_rates::<f64>(&s).unwrap();
        prop_assert_eq!(rates.net.iter().sum::<i64>(), 0);
        prop_assert!(rates.weighted_mean().abs() < 1e-9);
    }

    #[test]
    fn write_then_load_round_trips((pops, rows) in arb_system()) {
        let s = system(&pops, rows);
        let (mut zb, mut fb) = (Vec::new(), Vec::new());
        s.write_zones(&mut zb).unwrap();
        s.write_flows(&mut fb).unwrap();
        let loaded = load_system(
            CsvInput::new("zones.csv", zb.as_slice()),
            FlowSource::Matrix(CsvInput::new("flows.csv", fb.as_slice())),
            s.meta(),
        )
        .unwrap();
        prop_assert_eq!(&loaded.system, &s);
        let (mut zb2, mut fb2) = (Vec::new(), Vec::new());
        loaded.system.write_zones(&mut zb2).unwrap();
        loaded.system.write_flows(&mut fb2).unwrap();
        prop_assert_eq!(zb, zb2);
        prop_assert_eq!(fb, fb2);
    }

    #[test]
    fn diagonal_entries_never_count((pops, rows) in arb_system(), stay in 1u64..10_000) {
        let s = system(&pops, rows.clone());
        let mut zb = Vec::new();
        s.write_zones(&mut zb).unwrap();
        let mut flows = String::from("origin,destination,count\n");
        for (o, row) in rows.iter().enumerate() {
            for (d, v) in row.iter().enumerate() {
                if o != d && *v > 0 {
                    flows.push_str(&format!("z{o},z{d},{v}\n"));
                }
            }
            flows.push_str(&format!("z{o},z{o},{stay}\n"));
        }
        let loaded = load_system(
            CsvInput::new("zones.csv", zb.as_slice()),
            FlowSource::Matrix(CsvInput::new("flows.csv", flows.as_bytes())),
            SystemMeta::default(),
        )
        .unwrap();
        prop_assert_eq!(loaded.diagonal_dropped, pops.len());
        prop_assert_eq!(loaded.system.migrants(), s.migrants());
        prop_assert_eq!(
            crude_migration_intensity::<f64>(&loaded.system),
            crude_migration_intensity::<f64>(&s)
        );
    }
}

#[test]
fn full_matrix_and_marginals_agree_on_every_index() {
    let rows = vec![vec![0, 30, 5], vec![10, 0, 25], vec![40, 2, 0]];
    let full = system(&[1e4, 2e4, 3e4], rows.clone());
    let m = FlowMatrix::from_rows(rows).unwrap();
    let marg = MigrationSystem::new(
        zones(&[1e4, 2e4, 3e4]),
        FlowData::MarginalsOnly(Marginals::new(m.inflows(), m.outflows()).unwrap()),
        SystemMeta::default(),
    )
    .unwrap();
    assert_eq!(
        system_indices::<f64>(&full).unwrap(),
        system_indices::<f64>(&marg).unwrap()
    );
}

#[test]
fn zero_flow_system_has_undefined_mei() {
    let s = system(&[1e4, 1e4], vec![vec![0, 0], vec![0, 0]]);
    assert_eq!(crude_migration_intensity::<f64>(&s), 0.0);
    assert!(matches!(
        migration_effectiveness_index::<f64>(&s),
        Err(Error::UndefinedIndex { .. })
    ));
}

#[test]
fn balanced_system_has_zero_effectiveness() {
    let s = system(
        &[5e3, 7e3, 9e3],
        vec![vec![0, 8, 3], vec![8, 0, 6], vec![3, 6, 0]],
    );
    let idx = system_indices::<f64>(&s).unwrap();
    assert_eq!(idx.mei, 0.0);
    assert_eq!(idx.anmr, 0.0);
    assert!(idx.cmi > 0.0);
}

#[test]
fn f32_and_f64_agree() {
    let s = system(
        &[1e4, 2e4, 3e4],
        vec![vec![0, 30, 5], vec![10, 0, 25], vec![40, 2, 0]],
    );
    let a = system_indices::<f64>(&s).unwrap();
    let b = system_indices::<f32>(&s).unwrap();
    assert!((a.mei - b.mei as f64).abs() < 1e-4);
    assert!((a.cmi - b.cmi as f64).abs() < 1e-5);
}
