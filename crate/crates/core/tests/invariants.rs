//! Property tests for the structural invariants: norm nesting, stepping
//! contraction, Hölder, refinement monotonicity, witness validity, the cut
//! norm sandwich, and metric axioms.

use graphon_lab::cutmetric::{self, DeltaOptions};
use graphon_lab::graphon::{embed_graph, StepGraphon};
use graphon_lab::partition::Partition;
use graphon_lab::upperreg::{self, VerdictStatus};
use graphon_lab::WeightedGraph;
use proptest::prelude::*;

fn arb_graphon(max_classes: usize, scale: f64) -> impl Strategy<Value = StepGraphon> {
    (1..=max_classes)
        .prop_flat_map(move |m| {
            let lengths = proptest::collection::vec(0.05f64..1.0, m);
            let values = proptest::collection::vec(-scale..scale, m * m);
            (Just(m), lengths, values)
        })
        .prop_map(|(m, mut lengths, raw)| {
            let total: f64 = lengths.iter().sum();
            for l in &mut lengths {
                *l /= total;
            }
            let mut values = vec![vec![0.0; m]; m];
            for i in 0..m {
                for j in 0..=i {
                    let v = raw[i * m + j];
                    values[i][j] = v;
                    values[j][i] = v;
                }
            }
            StepGraphon::new(lengths, values).expect("valid generated graphon")
        })
}

fn arb_partition_of(m: usize) -> impl Strategy<Value = Vec<usize>> {
    proptest::collection::vec(0..m, m)
}

fn arb_graph(max_n: usize) -> impl Strategy<Value = WeightedGraph> {
    (2..=max_n)
        .prop_flat_map(|n| {
            let weights = proptest::collection::vec(0.1f64..3.0, n);
            let betas = proptest::collection::vec(-2.0f64..2.0, n * n);
            let mask = proptest::collection::vec(proptest::bool::ANY, n * n);
            (Just(n), weights, betas, mask)
        })
        .prop_map(|(n, weights, betas, mask)| {
            let mut edges = Vec::new();
            for i in 0..n {
                for j in i..n {
                    if mask[i * n + j] {
                        edges.push((i, j, betas[i * n + j]));
                    }
                }
            }
            WeightedGraph::new(weights, edges).expect("valid generated graph")
        })
}

proptest! {
    #[test]
    fn norm_nesting(w in arb_graphon(8, 2.0)) {
        let ps = [1.0, 1.3, 2.0, 3.0, 7.0, f64::INFINITY];
        for pair in ps.windows(2) {
            let lo = w.lp_norm(pair[0]).unwrap();
            let hi = w.lp_norm(pair[1]).unwrap();
            prop_assert!(lo <= hi + 1e-9, "‖W‖_{} = {lo} > ‖W‖_{} = {hi}", pair[0], pair[1]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn stepping_contracts_every_norm(
        w in arb_graphon(8, 2.0),
        labels in arb_partition_of(8),
    ) {
        let m = w.num_classes();
        let compact: Vec<usize> = labels[..m].iter().map(|&l| l % m).collect();
        let p = Partition::new(compact, w.lengths().to_vec()).unwrap();
        let stepped = w.step(&p).unwrap();
        for norm_p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let a = stepped.lp_norm(norm_p).unwrap();
            let b = w.lp_norm(norm_p).unwrap();
            prop_assert!(a <= b + 1e-9, "p = {norm_p}: {a} > {b}");
        }
        // And the cut norm.
        let sc = cutmetric::cut_norm_exact(&stepped).unwrap().lower;
        let wc = cutmetric::cut_norm_exact(&w).unwrap().upper;
        prop_assert!(sc <= wc + 1e-9);
    }
}

proptest! {
    #[test]
    fn embed_norms_match_graph_norms(g in arb_graph(7)) {
        let w = embed_graph(&g).unwrap();
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let a = g.lp_norm(p).unwrap();
            let b = w.lp_norm(p).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "p = {p}: {a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn holder_inequality(u in arb_graphon(6, 2.0), w_values in proptest::collection::vec(-2.0f64..2.0, 36)) {
        // Second operand on the same grid as the first.
        let m = u.num_classes();
        let mut values = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..=i {
                values[i][j] = w_values[i * m + j];
                values[j][i] = w_values[i * m + j];
            }
        }
        let w = StepGraphon::new(u.lengths().to_vec(), values).unwrap();
        let ip = u.inner_product(&w).unwrap().abs();
        for (p, q) in [(1.0, f64::INFINITY), (2.0, 2.0), (4.0, 4.0 / 3.0)] {
            let bound = u.lp_norm(p).unwrap() * w.lp_norm(q).unwrap();
            prop_assert!(ip <= bound + 1e-9, "(p,p') = ({p},{q}): {ip} > {bound}");
        }
    }
}

proptest! {
    #[test]
    fn refinement_grows_l2_energy(
        w in arb_graphon(8, 2.0),
        coarse in arb_partition_of(8),
        split in arb_partition_of(8),
    ) {
        let m = w.num_classes();
        let coarse: Vec<usize> = coarse[..m].iter().map(|&l| l % m).collect();
        let split: Vec<usize> = split[..m].iter().map(|&l| l % m).collect();
        let p = Partition::new(coarse, w.lengths().to_vec()).unwrap();
        let q = p
            .common_refinement(&Partition::new(split, w.lengths().to_vec()).unwrap())
            .unwrap();
        let ep = w.step(&p).unwrap().lp_norm(2.0).unwrap();
        let eq = w.step(&q).unwrap().lp_norm(2.0).unwrap();
        prop_assert!(eq >= ep - 1e-9, "refining lost energy: {eq} < {ep}");
    }
}

proptest! {
    #[test]
    fn witness_values_recompute(w in arb_graphon(8, 2.0), seed in 0u64..1000) {
        let exact = cutmetric::cut_norm_exact(&w).unwrap();
        prop_assert!((exact.witness.evaluate(&w).abs() - exact.lower).abs() <= 1e-12);
        let heur = cutmetric::cut_norm_heuristic(&w, 4, seed);
        prop_assert!((heur.witness.evaluate(&w).abs() - heur.lower).abs() <= 1e-12);
        prop_assert!(heur.lower <= heur.upper + 1e-12);
        let inf = cutmetric::infty_to_one_norm(&w);
        prop_assert!((inf.witness.evaluate(&w).abs() - inf.lower).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn exact_cut_norm_matches_double_enumeration(w in arb_graphon(6, 2.0)) {
        // Oracle: enumerate every (S, T) pair directly.
        let m = w.num_classes();
        let mut best = 0.0f64;
        for s_mask in 0u32..1 << m {
            for t_mask in 0u32..1 << m {
                let mut sum = 0.0;
                for i in 0..m {
                    if s_mask >> i & 1 == 0 {
                        continue;
                    }
                    for j in 0..m {
                        if t_mask >> j & 1 == 1 {
                            sum += w.class_length(i) * w.class_length(j) * w.value(i, j);
                        }
                    }
                }
                best = best.max(sum.abs());
            }
        }
        let fast = cutmetric::cut_norm_exact(&w).unwrap().lower;
        prop_assert!((fast - best).abs() <= 1e-12, "{fast} vs oracle {best}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]
    #[test]
    fn exact_infty_to_one_matches_double_enumeration(w in arb_graphon(5, 2.0)) {
        let m = w.num_classes();
        let mut best = 0.0f64;
        for f_mask in 0u32..1 << m {
            for g_mask in 0u32..1 << m {
                let mut sum = 0.0;
                for i in 0..m {
                    let fi = if f_mask >> i & 1 == 1 { 1.0 } else { -1.0 };
                    for j in 0..m {
                        let gj = if g_mask >> j & 1 == 1 { 1.0 } else { -1.0 };
                        sum += fi * gj * w.class_length(i) * w.class_length(j) * w.value(i, j);
                    }
                }
                best = best.max(sum.abs());
            }
        }
        let fast = cutmetric::infty_to_one_norm(&w).lower;
        prop_assert!((fast - best).abs() <= 1e-12, "{fast} vs oracle {best}");
    }
}

proptest! {
    #[test]
    fn sandwich_holds(w in arb_graphon(8, 2.0)) {
        let cut = cutmetric::cut_norm_exact(&w).unwrap().lower;
        let inf = cutmetric::infty_to_one_norm(&w).lower;
        prop_assert!(cut <= inf + 1e-9);
        prop_assert!(inf <= 4.0 * cut + 1e-9);
    }
}

proptest! {
    #[test]
    fn truncation_tail_identity(
        w in arb_graphon(7, 3.0),
        k in 0.1f64..3.0,
        p in 1.1f64..4.0,
    ) {
        let (low, high) = w.truncate(k).unwrap();
        // The parts sum cellwise back to W.
        let m = w.num_classes();
        for i in 0..m {
            for j in 0..m {
                prop_assert!((low.value(i, j) + high.value(i, j) - w.value(i, j)).abs() <= 1e-15);
            }
        }
        // ‖W·1_{|W|>K}‖₁ ≤ ‖W‖_p^p / K^{p−1}.
        let tail = high.lp_norm(1.0).unwrap();
        let bound = w.lp_norm(p).unwrap().powf(p) / k.powf(p - 1.0);
        prop_assert!(tail <= bound + 1e-12, "{tail} > {bound}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn d_cut_is_a_symmetric_pseudometric(
        a in arb_graphon(5, 1.5),
        b in arb_graphon(5, 1.5),
        c in arb_graphon(5, 1.5),
    ) {
        let ab = cutmetric::d_cut(&a, &b).unwrap().lower;
        let ba = cutmetric::d_cut(&b, &a).unwrap().lower;
        prop_assert!((ab - ba).abs() <= 1e-12);
        let ac = cutmetric::d_cut(&a, &c).unwrap().lower;
        let cb = cutmetric::d_cut(&c, &b).unwrap().lower;
        prop_assert!(ab <= ac + cb + 1e-9);
        prop_assert!(cutmetric::d_cut(&a, &a).unwrap().lower <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn delta_lower_stays_below_upper(
        u in arb_graphon(5, 1.5),
        w in arb_graphon(5, 1.5),
    ) {
        // Means are invariant under re-gridding and overlays, so the mean gap
        // lower-bounds even the re-gridded δ upper bound.
        let lower = cutmetric::delta_cut_lower(&u, &w);
        let opts = DeltaOptions { classes: 8, budget: 2, seed: 7 };
        let upper = cutmetric::delta_cut_upper(&u, &w, &opts).unwrap().upper;
        prop_assert!(lower <= upper + 1e-9, "{lower} > {upper}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn verified_upper_regularity_is_monotone(
        g in arb_graph(6),
        eta in 0.15f64..0.4,
    ) {
        if g.lp_norm(1.0).unwrap() == 0.0 {
            return Ok(());
        }
        // Dominant nodes aside, a verdict at (C,η) implies one at (C′,η),
        // C′ > C, and Lᵖ nesting gives q-verdicts from p-verdicts.
        let base = match upperreg::check_upper_regular_exact(&g, 1.0, eta, 2.0) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        if base.status == VerdictStatus::VerifiedExact {
            let wider = upperreg::check_upper_regular_exact(&g, 2.5, eta, 2.0).unwrap();
            prop_assert_eq!(wider.status, VerdictStatus::VerifiedExact);
        }
        let q = upperreg::check_upper_regular_exact(&g, 1.5, eta, 3.0).unwrap();
        if q.status == VerdictStatus::VerifiedExact {
            let p = upperreg::check_upper_regular_exact(&g, 1.5, eta, 2.0).unwrap();
            prop_assert_eq!(p.status, VerdictStatus::VerifiedExact);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]
    #[test]
    fn falsified_is_monotone_in_eta(g in arb_graph(6), eta in 0.15f64..0.35) {
        if g.lp_norm(1.0).unwrap() == 0.0 {
            return Ok(());
        }
        let v = match upperreg::check_upper_regular_exact(&g, 0.8, eta, 2.0) {
            Ok(v) => v,
            Err(_) => return Ok(()),
        };
        if let Some(upperreg::Falsification::Partition { labels, value }) = v.certificate {
            // The same certificate stays admissible at smaller η.
            let v2 = upperreg::check_upper_regular_exact(&g, 0.8, eta * 0.5, 2.0).unwrap();
            prop_assert_eq!(v2.status, VerdictStatus::Falsified);
            let classes = labels.iter().max().unwrap() + 1;
            let recomputed = upperreg::stepped_norm(&g, &labels, classes, 2.0).unwrap();
            prop_assert!((recomputed - value).abs() <= 1e-9);
        }
    }
}
