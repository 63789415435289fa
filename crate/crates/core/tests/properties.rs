use lobsys_core::bernstein::basis_values;
use lobsys_core::exact::{self, Rational};
use lobsys_core::generators::{self, RandomSpec};
use lobsys_core::orthosystem::{PiecewiseFunction, System};
use lobsys_core::partition::{Filtration, SplitSpec};
use lobsys_core::polyspace::{Space, SpaceSpec};
use lobsys_core::search;
use proptest::prelude::*;

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn multi_indices(d: usize, total: usize) -> Vec<Vec<usize>> {
    if d == 1 {
        return vec![vec![total]];
    }
    (0..=total)
        .flat_map(|k| multi_indices(d - 1, total - k).into_iter().map(move |mut m| {
            m.push(k);
            m
        }))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bernstein_basis_is_positive_partition_of_unity(r in 0usize..=4, t in 0.001f64..0.999) {
        let mut v = Vec::new();
        basis_values(r, t, &mut v);
        prop_assert!(v.iter().all(|b| *b > 0.0));
        prop_assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn total_degree_is_span_of_its_corners(d in 1usize..=3, r in 0usize..=4) {
        let total = Space::new(SpaceSpec::TotalDegree(r), d).unwrap().dim();
        let span = Space::new(SpaceSpec::SpanSet(multi_indices(d, r)), d).unwrap().dim();
        prop_assert_eq!(total, span);
        prop_assert_eq!(total, binomial(r + d, d));
    }

    #[test]
    fn abstract_measures_are_conserved_exactly(ts in prop::collection::vec((0usize..1000, 1i64..99), 0..40)) {
        let mut f = Filtration::new_abstract();
        for (pick, num) in ts {
            let leaves = f.leaves();
            let a = leaves[pick % leaves.len()];
            f.apply_split(SplitSpec::Fraction { atom: a, t: exact::ratio(num, 100) }).unwrap();
        }
        let sum: Rational = f.leaves().iter().map(|&a| f.atom(a).unwrap().measure.clone()).fold(exact::from_int(0), |a, b| a + b);
        prop_assert_eq!(sum, exact::from_int(1));
        for a in f.atoms() {
            if let Some((s, l)) = f.children(a.id) {
                prop_assert!(f.atom(s).unwrap().measure <= f.atom(l).unwrap().measure);
            }
        }
    }

    // For the constant space Q_k = P_k - P_{k-1} is a difference of two
    // conditional expectations, so it cannot double any L^p norm.
    #[test]
    fn constant_space_increments_are_bounded(seed in 0u64..5000, p in 1.1f64..6.0) {
        let mut rng = search::rng(seed);
        let f = generators::random_filtration(&mut rng, &RandomSpec { dim: 2, splits: 30, max_depth: 10, t_min: 0.02 });
        let sys = System::build(&f, &Space::new(SpaceSpec::Constant, 2).unwrap()).unwrap();
        let mut g = PiecewiseFunction::new();
        for leaf in f.leaves() {
            g.insert(leaf, vec![search::normal(&mut rng)]);
        }
        let norm = sys.lp_norm(&g, p);
        for k in 1..=f.num_splits() {
            let (q, _) = sys.q_norm(&g, k, p);
            prop_assert!(q <= 2.0 * norm * (1.0 + 1e-12));
        }
    }
}
