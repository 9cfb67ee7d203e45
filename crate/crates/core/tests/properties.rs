//! Invariants of norms, maps and defects on random instances.

use std::sync::Arc;

use gurarii_core::convex::{polar_dual, Polytope};
use gurarii_core::linalg::{add, scale};
use gurarii_core::operators::{map_distance, LinearMap};
use gurarii_core::random::{random_injective, random_space, random_vector, rng, small_rational};
use gurarii_core::rational::int;
use gurarii_core::spaces::{PolyhedralSpace, SpaceRef};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn space(seed: u64, dim: usize) -> SpaceRef {
    Arc::new(random_space(&mut rng(seed), dim, 4))
}

fn map(seed: u64, x: &SpaceRef, y: &SpaceRef) -> LinearMap {
    let m = random_injective(&mut rng(seed), y.dimension(), x.dimension());
    LinearMap::new(x.clone(), y.clone(), m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn norm_axioms(seed in any::<u64>(), dim in 1usize..=3) {
        let x = space(seed, dim);
        let mut r = rng(seed ^ 0x5eed);
        let u = random_vector(&mut r, dim);
        let v = random_vector(&mut r, dim);
        let c = small_rational(&mut r);
        let nu = x.norm(&u).unwrap();
        prop_assert!(!nu.is_negative());
        prop_assert_eq!(nu.is_zero(), u.iter().all(Zero::is_zero));
        prop_assert_eq!(x.norm(&scale(&u, &c)).unwrap(), c.abs() * &nu);
        prop_assert!(x.norm(&add(&u, &v)).unwrap() <= nu + x.norm(&v).unwrap());
    }

    #[test]
    fn gauge_lp_agrees_with_norm(seed in any::<u64>(), dim in 1usize..=3) {
        let x = space(seed, dim);
        let u = random_vector(&mut rng(seed.wrapping_add(1)), dim);
        prop_assert_eq!(x.gauge_lp(&u).unwrap(), x.norm(&u).unwrap());
    }

    #[test]
    fn ball_vertices_are_unit_vectors(seed in any::<u64>(), dim in 1usize..=3) {
        let x = space(seed, dim);
        for v in &x.ball_vertices().points {
            prop_assert!(x.norm(v).unwrap().is_one());
        }
        prop_assert!(x.validate().passed());
    }

    #[test]
    fn polar_is_an_involution(seed in any::<u64>(), dim in 1usize..=3) {
        let x = space(seed, dim);
        prop_assert_eq!(&x.polar().polar(), x.as_ref());
        let h = Polytope::H(x.ball_facets().clone());
        let back = polar_dual(&polar_dual(&h).unwrap()).unwrap();
        prop_assert_eq!(back, h);
    }

    #[test]
    fn min_gain_routes_agree(seed in any::<u64>(), dx in 1usize..=2, extra in 0usize..=1) {
        let x = space(seed, dx);
        let y = space(seed.wrapping_add(7), dx + extra);
        let f = map(seed.wrapping_add(3), &x, &y);
        prop_assert_eq!(f.min_gain().unwrap().value, f.min_gain_lp().unwrap().value);
    }

    #[test]
    fn gains_sandwich_every_vector(seed in any::<u64>(), dx in 1usize..=2, extra in 0usize..=1) {
        let x = space(seed, dx);
        let y = space(seed.wrapping_add(7), dx + extra);
        let f = map(seed.wrapping_add(3), &x, &y);
        let lo = f.min_gain().unwrap().value;
        let hi = f.op_norm().value.clone();
        let u = random_vector(&mut rng(seed.wrapping_add(5)), dx);
        let nu = x.norm(&u).unwrap();
        let nfu = y.norm(&f.apply(&u)).unwrap();
        prop_assert!(&lo * &nu <= nfu);
        prop_assert!(nfu <= &hi * &nu);
        let d = f.defect().unwrap();
        prop_assert!(d.verify(&f).is_ok());
    }

    #[test]
    fn inverse_swaps_gains(seed in any::<u64>(), dim in 1usize..=2) {
        let x = space(seed, dim);
        let y = space(seed.wrapping_add(9), dim);
        let f = map(seed.wrapping_add(4), &x, &y);
        let g = f.invert().unwrap();
        prop_assert_eq!(g.op_norm().value.clone(), int(1) / f.min_gain().unwrap().value);
        prop_assert_eq!(f.defect().unwrap().epsilon_star, g.defect().unwrap().epsilon_star);
    }

    #[test]
    fn composition_norm_is_submultiplicative(seed in any::<u64>(), dim in 1usize..=2) {
        let x = space(seed, dim);
        let y = space(seed.wrapping_add(1), dim);
        let z = space(seed.wrapping_add(2), dim + 1);
        let f = map(seed.wrapping_add(3), &x, &y);
        let g = map(seed.wrapping_add(4), &y, &z);
        let gf = g.compose(&f).unwrap();
        prop_assert!(gf.op_norm().value <= &g.op_norm().value * &f.op_norm().value);
    }

    #[test]
    fn map_distance_is_a_metric(seed in any::<u64>(), dim in 1usize..=2) {
        let x = space(seed, dim);
        let y = space(seed.wrapping_add(1), dim);
        let f = map(seed.wrapping_add(2), &x, &y);
        let g = map(seed.wrapping_add(3), &x, &y);
        let h = map(seed.wrapping_add(4), &x, &y);
        let fg = map_distance(&f, &g).unwrap();
        prop_assert_eq!(&fg, &map_distance(&g, &f).unwrap());
        prop_assert!(map_distance(&f, &f).unwrap().is_zero());
        prop_assert!(map_distance(&f, &h).unwrap() <= fg + map_distance(&g, &h).unwrap());
    }
}

#[test]
fn standard_spaces_are_dual() {
    for n in 1..=3 {
        assert_eq!(PolyhedralSpace::l1(n).polar(), PolyhedralSpace::l_inf(n));
    }
}
