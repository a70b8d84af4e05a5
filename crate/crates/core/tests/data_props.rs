use std::io::Write;

use maternact::data::{
    gen_banana_like, gen_regression_1d, kfold, load_csv, ColumnKind, ColumnSpec, Preprocessor, Schema,
};
use proptest::prelude::*;

#[test]
fn scaler_uses_fit_split_only() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "a,y").unwrap();
    for i in 0..40 {
        writeln!(f, "{},{}", i as f64 * 0.5, i % 2).unwrap();
    }
    let schema = Schema {
        columns: vec![
            ColumnSpec { name: "a".into(), kind: ColumnKind::Continuous },
            ColumnSpec { name: "y".into(), kind: ColumnKind::Label },
        ],
    };
    let t = load_csv(f.path(), &schema).unwrap();
    let train: Vec<usize> = (0..30).collect();
    let test: Vec<usize> = (30..40).collect();
    let pre = Preprocessor::fit(&t, &train).unwrap();
    let (dtr, _) = pre.transform(&t, &train).unwrap();
    let (dte, _) = pre.transform(&t, &test).unwrap();
    let col = dtr.x.column(0);
    let mean = col.sum() / 30.0;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 30.0;
    assert!(mean.abs() < 1e-12);
    assert!((var - 1.0).abs() < 1e-12);
    assert!(dte.x.column(0).sum() / 10.0 > 1.0);
}

#[test]
fn generators_finite() {
    for seed in 0..5 {
        assert!(gen_regression_1d(seed).x.iter().all(|v| v.is_finite()));
        assert!(gen_regression_1d(seed).y.real().unwrap().iter().all(|v| v.is_finite()));
        let b = gen_banana_like(seed, 183, 217).unwrap();
        assert!(b.x.iter().all(|v| v.is_finite() && v.abs() <= 4.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kfold_partitions(n in 2usize..300, k_raw in 2usize..20, seed in any::<u64>()) {
        let k = k_raw.min(n);
        let folds = kfold(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let mut seen = vec![0u32; n];
        let sizes: Vec<usize> = folds.iter().map(|(_, te)| te.len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        for (tr, te) in &folds {
            prop_assert_eq!(tr.len() + te.len(), n);
            for &i in te {
                seen[i] += 1;
                prop_assert!(!tr.contains(&i));
            }
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
        prop_assert_eq!(folds, kfold(n, k, seed).unwrap());
    }

    #[test]
    fn banana_deterministic(seed in any::<u64>(), a in 10usize..50, b in 10usize..50) {
        let d1 = gen_banana_like(seed, a, b).unwrap();
        let d2 = gen_banana_like(seed, a, b).unwrap();
        prop_assert_eq!(&d1, &d2);
        let labels = d1.y.labels().unwrap();
        prop_assert_eq!(labels.iter().filter(|&&l| l == 1).count(), b);
    }
}
