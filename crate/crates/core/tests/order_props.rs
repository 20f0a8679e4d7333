mod common;

use circuitum::order::{inversion_distance, is_coherent, transposition_path, LinearOrder, Poset};
use circuitum::random::random_poset;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn poset(seed: u64, n: usize, density: f64) -> Poset<usize> {
    random_poset(&mut ChaCha8Rng::seed_from_u64(seed), n, density)
}

/// Linear extensions by filtering all permutations.
fn extensions_by_brute_force(p: &Poset<usize>) -> Vec<Vec<usize>> {
    common::permutations(p.elements())
        .into_iter()
        .filter(|o| (0..o.len()).all(|i| (i + 1..o.len()).all(|j| !p.less(&o[j], &o[i]))))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn extensions_match_brute_force(seed: u64, n in 0usize..7, density in 0.0f64..0.7) {
        let p = poset(seed, n, density);
        let mut ours: Vec<Vec<usize>> = p.linear_extensions(10_000).unwrap().into_iter().map(|o| o.0).collect();
        let mut theirs = extensions_by_brute_force(&p);
        ours.sort();
        theirs.sort();
        prop_assert_eq!(ours, theirs);
    }

    #[test]
    fn transposition_paths(seed: u64, n in 0usize..9, density in 0.0f64..0.6) {
        let p = poset(seed, n, density);
        let mut exts = p.linear_extensions(usize::MAX).unwrap();
        exts.truncate(40);
        for from in &exts {
            for to in &exts {
                let path = transposition_path(&p, from, to).unwrap();
                prop_assert_eq!(path.len(), inversion_distance(from, to).unwrap());
                prop_assert_eq!(path.len(), common::inversions(&from.0, &to.0));
                let orders = path.orders();
                prop_assert_eq!(orders.last().unwrap(), to);
                for (k, o) in orders.iter().enumerate() {
                    prop_assert!(is_coherent(&p, o).unwrap());
                    if k > 0 {
                        let i = path.swaps[k - 1] - 1;
                        let prev = &orders[k - 1].0;
                        prop_assert!(!p.comparable(&prev[i], &prev[i + 1]));
                        prop_assert_eq!(&prev[i], &o.0[i + 1]);
                        prop_assert_eq!(&prev[i + 1], &o.0[i]);
                    }
                }
            }
        }
    }

    #[test]
    fn inversion_distance_is_a_metric(n in 0usize..5) {
        let orders: Vec<LinearOrder<usize>> =
            common::permutations(&(0..n).collect::<Vec<_>>()).into_iter().map(LinearOrder).collect();
        for a in &orders {
            prop_assert_eq!(inversion_distance(a, a).unwrap(), 0);
            for b in &orders {
                let ab = inversion_distance(a, b).unwrap();
                prop_assert_eq!(ab, inversion_distance(b, a).unwrap());
                prop_assert_eq!(ab == 0, a == b);
                for c in &orders {
                    prop_assert!(inversion_distance(a, c).unwrap() <= ab + inversion_distance(b, c).unwrap());
                }
            }
        }
    }
}

#[test]
fn incoherent_orders_are_rejected() {
    let p = Poset::new(["a", "b", "c"], [("a", "c")], true).unwrap();
    let good = LinearOrder(vec!["a", "b", "c"]);
    let bad = LinearOrder(vec!["c", "b", "a"]);
    assert!(!is_coherent(&p, &bad).unwrap());
    assert!(transposition_path(&p, &good, &bad).is_err());
    assert!(Poset::new(["a", "b"], [("a", "b"), ("b", "a")], true).is_err());
}
