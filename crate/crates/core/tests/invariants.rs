//! Cross-module properties of the solver on small random catalogs.

use boxsize::baseline::dp_1d;
use boxsize::evaluate;
use boxsize::eval::evaluate_velocity;
use boxsize::oracle::exhaustive_partition;
use boxsize::{solve, Catalog, Dims, EvalOptions, Product, SolverConfig};
use proptest::prelude::*;

// half-step dims and quarter-step velocities keep every sum exact
fn items() -> impl Strategy<Value = Vec<(f64, f64, f64, f64)>> {
    prop::collection::vec((1u32..20, 1u32..20, 1u32..20, 0u32..12), 1..9)
        .prop_map(|v| v.into_iter().map(|(l, w, h, s)| (l as f64 * 0.5, w as f64 * 0.5, h as f64 * 0.5, s as f64 * 0.25)).collect())
}

fn catalog(items: &[(f64, f64, f64, f64)]) -> Catalog {
    let products = items
        .iter()
        .enumerate()
        .map(|(i, &(l, w, h, s))| Product::new(format!("p{i:02}"), Dims::new(l, w, h).unwrap(), s).unwrap())
        .collect();
    Catalog::new(products).unwrap()
}

proptest! {
    #[test]
    fn solve_never_beats_the_exhaustive_optimum(items in items(), k in 1usize..4) {
        let cat = catalog(&items);
        prop_assume!(k <= cat.len());
        let out = solve(&cat, &SolverConfig::new(k, (2 * k).min(cat.len()), 50)).unwrap();
        let (v_star, _) = exhaustive_partition(&cat, k).unwrap();
        prop_assert!(out.solution.total_volume() >= v_star);
    }

    #[test]
    fn training_evaluation_agrees_with_objective(items in items(), k in 1usize..4) {
        let cat = catalog(&items);
        prop_assume!(k <= cat.len());
        let out = solve(&cat, &SolverConfig::new(k, 3 * k, 50)).unwrap();
        // snug assignment can only shrink each product's box
        if let Ok(r) = evaluate_velocity(&out.boxes, &cat, EvalOptions::default()) {
            prop_assert!(r.box_volume <= out.solution.total_volume());
            prop_assert!((0.0..100.0).contains(&r.xi));
        }
    }

    #[test]
    fn input_order_does_not_matter(items in items(), k in 1usize..4, rot in 0usize..8) {
        let cat = catalog(&items);
        prop_assume!(k <= cat.len());
        let mut shuffled: Vec<Product> = cat.products().to_vec();
        let r = rot % shuffled.len();
        shuffled.rotate_left(r);
        let again = Catalog::new(shuffled).unwrap();
        let cfg = SolverConfig::new(k, 3 * k, 50);
        prop_assert_eq!(solve(&cat, &cfg).unwrap().boxes, solve(&again, &cfg).unwrap().boxes);
    }

    #[test]
    fn scaling_velocities_scales_volume(items in items(), k in 1usize..4) {
        let cat = catalog(&items);
        prop_assume!(k <= cat.len());
        let doubled = catalog(&items.iter().map(|&(l, w, h, s)| (l, w, h, 2.0 * s)).collect::<Vec<_>>());
        let cfg = SolverConfig::new(k, 3 * k, 50);
        let (a, b) = (solve(&cat, &cfg).unwrap(), solve(&doubled, &cfg).unwrap());
        prop_assert_eq!(&a.boxes, &b.boxes);
        prop_assert_eq!(2.0 * a.solution.total_volume(), b.solution.total_volume());
    }

    #[test]
    fn baseline_objective_matches_its_boxes(items in items(), k in 1usize..4) {
        let cat = catalog(&items);
        prop_assume!(k <= cat.len());
        let b = dp_1d(&cat, k).unwrap();
        prop_assert_eq!(b.solution.total_volume(), b.boxes.iter().zip(b.solution.clusters()).map(|(d, c)| d.volume() * c.velocity_sum()).sum::<f64>());
        prop_assert!(b.solution.total_volume() >= exhaustive_partition(&cat, k).unwrap().0);
    }
}

#[test]
fn shipments_and_velocities_give_the_same_air() {
    let cat = catalog(&[(4.0, 3.0, 2.0, 3.0), (2.0, 2.0, 2.0, 1.0), (6.0, 5.0, 1.0, 2.0)]);
    let boxes = solve(&cat, &SolverConfig::new(2, 3, 50)).unwrap().boxes;
    let records: Vec<_> = cat.products().iter().map(|p| boxsize::ShipmentRecord::new(p.id.clone(), p.velocity as u64)).collect();
    let a = evaluate(&boxes, &records, &cat).unwrap();
    let b = evaluate_velocity(&boxes, &cat, EvalOptions::default()).unwrap();
    assert_eq!(a.box_volume, b.box_volume);
    assert_eq!(a.xi, b.xi);
}
