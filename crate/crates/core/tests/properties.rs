use proptest::prelude::*;

use spillover_did::analysis::{analyze, AnalysisConfig};
use spillover_did::datamodel::{
    build_design_row, read_panel_csv_from, write_panel_csv_to, ExposureGroup, FeatureMap,
    PanelDataset, Term, UnitRecord,
};
use spillover_did::estimators::{att_rho, estimate, Contrast, EstimationInputs, Estimator};
use spillover_did::nuisance::ClassProbabilities;

fn term(q: usize) -> impl Strategy<Value = Term> {
    prop_oneof![
        (0..q).prop_map(Term::Linear),
        (0..q).prop_map(Term::Square),
        (0..q, 0..q).prop_map(|(a, b)| Term::Interaction(a, b)),
        (0..q).prop_map(Term::Exp),
    ]
}

fn group() -> impl Strategy<Value = ExposureGroup> {
    prop_oneof![
        Just(ExposureGroup::Treated),
        Just(ExposureGroup::NeighborControl),
        Just(ExposureGroup::IsolatedControl),
    ]
}

/// Panels with at least two units per group and `periods` post periods.
fn panel(max_units: usize, periods: usize) -> impl Strategy<Value = PanelDataset> {
    let unit = (
        group(),
        prop::collection::vec(-2.0..2.0f64, 2),
        prop::collection::vec(-5.0..5.0f64, 2 * periods),
    );
    prop::collection::vec(unit, 6..max_units).prop_map(move |rows| {
        let mut units: Vec<UnitRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (g, x, y))| UnitRecord {
                id: format!("u{i}"),
                group: g,
                covariates: x,
                outcomes: y,
            })
            .collect();
        for (u, g) in units
            .iter_mut()
            .zip(ExposureGroup::ALL.iter().chain(&ExposureGroup::ALL))
        {
            u.group = *g;
        }
        let t = periods as i32;
        PanelDataset::new(units, (-(t - 1)..=t).collect()).unwrap()
    })
}

proptest! {
    #[test]
    fn design_rows_are_pure(terms in prop::collection::vec(term(3), 0..6), x in prop::collection::vec(-3.0..3.0f64, 3)) {
        let map = FeatureMap::with_intercept(terms);
        let a = build_design_row(&map, &x).unwrap();
        let b = build_design_row(&map, &x).unwrap();
        prop_assert_eq!(a.len(), map.len());
        prop_assert_eq!(a[0], 1.0);
        prop_assert_eq!(a, b);
    }

    #[test]
    fn feature_map_text_is_canonical(terms in prop::collection::vec(term(4), 0..6), x in prop::collection::vec(-2.0..2.0f64, 4)) {
        // Parsing drops duplicate columns (x1:x1 is x1^2), after which the
        // text form is a fixed point.
        let map = FeatureMap::with_intercept(terms);
        let canonical = FeatureMap::parse(&map.to_string()).unwrap();
        prop_assert_eq!(&FeatureMap::parse(&canonical.to_string()).unwrap(), &canonical);
        let full = build_design_row(&map, &x).unwrap();
        for v in build_design_row(&canonical, &x).unwrap() {
            prop_assert!(full.contains(&v));
        }
    }

    #[test]
    fn softmax_is_a_distribution(a in -700.0..700.0f64, b in -700.0..700.0f64) {
        let p = ClassProbabilities::from_log_odds(a, b);
        prop_assert!(p.treated >= 0.0 && p.neighbor >= 0.0 && p.isolated >= 0.0);
        prop_assert!((p.treated + p.neighbor + p.isolated - 1.0).abs() < 1e-12);
        prop_assert!(p.treated.is_finite() && p.neighbor.is_finite() && p.isolated.is_finite());
    }

    #[test]
    fn csv_round_trip(d in panel(12, 2)) {
        let mut buf = Vec::new();
        write_panel_csv_to(&d, &mut buf).unwrap();
        let back = read_panel_csv_from(buf.as_slice()).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn att_rho_is_affine(d in panel(40, 1), rho in 0.0..1.0f64) {
        let n = d.n_units();
        let x = EstimationInputs::new(d.groups(), d.outcome_difference(0, 1).unwrap())
            .with_propensities(vec![ClassProbabilities::from_log_odds(0.2, -0.1); n])
            .with_outcome_predictions(vec![0.5; n], vec![-0.25; n]);
        let att = estimate(&x, Contrast::Att, Estimator::Dr).unwrap();
        let delta = estimate(&x, Contrast::Delta, Estimator::Dr).unwrap();
        let r = att_rho(&att, &delta, rho).unwrap();
        let expected = att.point() + rho * delta.point();
        prop_assert!((r.point() - expected).abs() <= 1e-12 * (1.0 + expected.abs()));
        for (i, v) in r.influence.values.iter().enumerate() {
            let e = att.influence.values[i] + rho * delta.influence.values[i];
            prop_assert!((v - e).abs() <= 1e-12 * (1.0 + e.abs()));
        }
    }

    #[test]
    fn att_rho_rejects_out_of_range(d in panel(20, 1), rho in prop_oneof![-5.0..-1e-9f64, 1.0 + 1e-9..5.0f64]) {
        let n = d.n_units();
        let x = EstimationInputs::new(d.groups(), d.outcome_difference(0, 1).unwrap())
            .with_outcome_predictions(vec![0.0; n], vec![0.0; n]);
        let att = estimate(&x, Contrast::Att, Estimator::Reg).unwrap();
        let delta = estimate(&x, Contrast::Delta, Estimator::Reg).unwrap();
        prop_assert!(att_rho(&att, &delta, rho).is_err());
    }

    #[test]
    fn unit_order_does_not_matter(d in panel(30, 1), seed in any::<u64>()) {
        let mut units = d.units().to_vec();
        // Fisher-Yates driven by a splitmix sequence.
        let mut s = seed;
        for i in (1..units.len()).rev() {
            s = s.wrapping_add(0x9e37_79b9_7f4a_7c15);
            let mut z = s;
            z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
            units.swap(i, (z ^ (z >> 31)) as usize % (i + 1));
        }
        let shuffled = PanelDataset::new(units, d.time_points().to_vec()).unwrap();

        let mut cfg = AnalysisConfig::new(2);
        cfg.ps_map = FeatureMap::intercept_only();
        cfg.om_map = FeatureMap::intercept_only();
        cfg.contrasts = Contrast::ALL.to_vec();
        cfg.estimators = Estimator::ALL.to_vec();
        let a = analyze(&d, &cfg).unwrap();
        let b = analyze(&shuffled, &cfg).unwrap();
        for (ea, eb) in a.estimates.iter().zip(&b.estimates) {
            let (pa, pb) = (ea.point(), eb.point());
            prop_assert!((pa - pb).abs() <= 1e-9 * (1.0 + pa.abs()), "{} vs {}", pa, pb);
            prop_assert!((ea.se() - eb.se()).abs() <= 1e-9 * (1.0 + ea.se()));
        }
    }

    #[test]
    fn aott_is_att_plus_delta(d in panel(40, 1)) {
        let n = d.n_units();
        let x = EstimationInputs::new(d.groups(), d.outcome_difference(0, 1).unwrap())
            .with_propensities(vec![ClassProbabilities::from_log_odds(-0.3, 0.4); n])
            .with_outcome_predictions(vec![1.0; n], vec![0.5; n]);
        for est in Estimator::ALL {
            let att = estimate(&x, Contrast::Att, est).unwrap();
            let delta = estimate(&x, Contrast::Delta, est).unwrap();
            let aott = estimate(&x, Contrast::Aott, est).unwrap();
            let offset = estimate(&x, Contrast::Offset, est).unwrap();
            prop_assert_eq!(aott.point(), att.point() + delta.point());
            prop_assert_eq!(offset.point(), -delta.point());
        }
    }
}
