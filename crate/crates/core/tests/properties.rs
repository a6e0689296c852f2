//! Property tests over random pmfs, kernels and inequality systems.

use proptest::prelude::*;

use srdt_core::fme::LinIneqSystem;
use srdt_core::pmf::{make_gw_b_source, ChannelKernel, JointPmf};

fn arb_pmf(num_vars: usize) -> impl Strategy<Value = JointPmf> {
    prop::collection::vec(2usize..=3, num_vars).prop_flat_map(move |sizes| {
        let cells: usize = sizes.iter().product();
        prop::collection::vec(1e-4f64..1.0, cells).prop_map(move |raw| {
            let total: f64 = raw.iter().sum();
            let probs: Vec<f64> = raw.iter().map(|x| x / total).collect();
            let labels: Vec<String> = (0..sizes.len()).map(|i| format!("X{i}")).collect();
            JointPmf::new(labels, sizes.clone(), probs).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn chain_rule(pmf in arb_pmf(3)) {
        let joint = pmf.entropy(&["X0", "X1"], &["X2"]).unwrap();
        let split = pmf.entropy(&["X0"], &["X2"]).unwrap()
            + pmf.entropy(&["X1"], &["X0", "X2"]).unwrap();
        prop_assert!((joint - split).abs() < 1e-10);
    }

    #[test]
    fn entropy_bounds(pmf in arb_pmf(2)) {
        let h = pmf.entropy(&["X0"], &[]).unwrap();
        let k = pmf.alphabet_size("X0").unwrap() as f64;
        prop_assert!(h >= 0.0);
        prop_assert!(h <= k.log2() + 1e-10);
    }

    #[test]
    fn mi_nonnegative_and_symmetric(pmf in arb_pmf(3)) {
        let ab = pmf.mutual_information(&["X0"], &["X1"], &["X2"]).unwrap();
        let ba = pmf.mutual_information(&["X1"], &["X0"], &["X2"]).unwrap();
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - ba).abs() < 1e-10);
    }

    #[test]
    fn extend_marginalize_identity(pmf in arb_pmf(2), rows in prop::collection::vec(1e-3f64..1.0, 12)) {
        // a 2-output kernel on (X0, X1) built from the raw weights
        let sizes = pmf.alphabet_sizes().to_vec();
        let cells = sizes[0] * sizes[1];
        let kernel_rows: Vec<Vec<f64>> = (0..cells)
            .map(|i| {
                let a = rows[(2 * i) % rows.len()];
                let b = rows[(2 * i + 1) % rows.len()];
                vec![a / (a + b), b / (a + b)]
            })
            .collect();
        let kernel = ChannelKernel::new(
            vec!["X0".into(), "X1".into()],
            sizes.clone(),
            vec!["Y".into()],
            vec![2],
            kernel_rows,
        )
        .unwrap();
        let ext = pmf.extend(&kernel).unwrap();
        let back = ext.marginalize(&["X0", "X1"]).unwrap();
        for (a, b) in back.probs().iter().zip(pmf.probs()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn markov_triple_has_zero_conditional_mi(p in 0.0f64..=1.0) {
        let s = make_gw_b_source(p).unwrap();
        let mi = s.mutual_information(&["S1"], &["S2"], &["S0"]).unwrap();
        prop_assert!(mi.abs() < 1e-12);
    }

    #[test]
    fn projection_order_independence(perm in 0usize..6) {
        let sys = LinIneqSystem::parse(
            "vars x y z w\nconsts a b\n\
             x + y - a >= 0\n\
             z + w - b >= 0\n\
             x - z >= 0\n\
             y + w - a - b >= 0\n\
             x >= 0\ny >= 0\nz >= 0\nw >= 0\n",
        )
        .unwrap();
        let orders: [[&str; 3]; 6] = [
            ["x", "y", "z"],
            ["x", "z", "y"],
            ["y", "x", "z"],
            ["y", "z", "x"],
            ["z", "x", "y"],
            ["z", "y", "x"],
        ];
        let base = sys.fm_project(&orders[0]).unwrap();
        let other = sys.fm_project(&orders[perm]).unwrap();
        prop_assert!(srdt_core::fme::systems_equivalent(&base, &other, 25, 11, &[]).unwrap());
    }
}
