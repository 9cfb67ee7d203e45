use std::sync::Arc;

use gurarii_core::engine::*;
use gurarii_core::linalg::Matrix;
use gurarii_core::operators::{map_distance, LinearMap};
use gurarii_core::rational::{int, rat};
use gurarii_core::spaces::{PolyhedralSpace, SpaceRef};
use gurarii_core::Rational;

fn first_axes(from: usize, to: usize) -> Matrix {
    Matrix::identity(from).vstack(&Matrix::zeros(to - from, from))
}

/// line ⊂ ℓ∞² ⊂ ℓ∞³ ⊂ ℓ∞³ ⊂ ...
fn cube_chain(len: usize) -> ChainSpace {
    let dims: Vec<usize> = (0..len).map(|k| (k + 1).min(3)).collect();
    let stages: Vec<SpaceRef> = dims.iter().map(|&d| Arc::new(PolyhedralSpace::l_inf(d))).collect();
    let inc = dims.windows(2).map(|w| first_axes(w[0], w[1])).collect();
    ChainSpace::from_stages("cube", stages, inc).unwrap()
}

/// line ⊂ ℓ1² ⊂ ℓ1² ⊂ ...
fn cross_chain(len: usize) -> ChainSpace {
    let dims: Vec<usize> = (0..len).map(|k| (k + 1).min(2)).collect();
    let stages: Vec<SpaceRef> = dims.iter().map(|&d| Arc::new(PolyhedralSpace::l1(d))).collect();
    let inc = dims.windows(2).map(|w| first_axes(w[0], w[1])).collect();
    ChainSpace::from_stages("cross", stages, inc).unwrap()
}

fn line() -> SpaceRef {
    Arc::new(PolyhedralSpace::line())
}

#[test]
fn three_halves_back_and_forth() {
    let mut e = cube_chain(5);
    let mut f = cross_chain(5);
    let x_embed = LinearMap::identity(line());
    let seed = LinearMap::new(line(), f.stage(0).clone(), Matrix::scalar(1, &rat(3, 2))).unwrap();
    let target = rat(3, 5);
    let eps0 = default_eps0(&target, &rat(1, 2));
    let schedule = schedule_make(&target, &eps0, &rat(1, 50), 4).unwrap();
    let trace = back_and_forth(&mut e, &mut f, &x_embed, &seed, &schedule).unwrap();
    for (n, s) in trace.steps.iter().enumerate() {
        assert!(s.drift <= s.drift_bound, "step {n}");
        assert_eq!(s.drift_bound, schedule.step_bound(n));
    }
    assert!(trace.budget_partials.iter().all(|p| *p < target));
    assert!(trace.final_distance < target);
}

#[test]
fn identity_seed_has_zero_distance() {
    let mut e = cube_chain(5);
    let mut f = e.clone();
    let x_embed = LinearMap::identity(line());
    let seed = LinearMap::identity(line());
    let schedule = schedule_make(&rat(1, 10), &rat(1, 100), &rat(1, 4), 4).unwrap();
    let trace = back_and_forth(&mut e, &mut f, &x_embed, &seed, &schedule).unwrap();
    assert_eq!(trace.final_distance, int(0));
    assert!(trace.steps.iter().all(|s| s.drift == Rational::from_integer(0.into())));
}

#[test]
fn embed_l1_plane() {
    let zero = Arc::new(PolyhedralSpace::zero());
    let plane = Arc::new(PolyhedralSpace::l1(2));
    let x = ChainSpace::from_stages("x", vec![zero, plane], vec![Matrix::zeros(2, 0)]).unwrap();
    let mut g = cube_chain(1);
    let trace = embed_universal(&x, &mut g, 4).unwrap();
    assert_eq!(trace.maps.len(), 5);
    for (n, d) in trace.defects.iter().enumerate() {
        assert!(d.epsilon_star <= power_of_half(n));
    }
    for s in &trace.steps {
        assert!(s.drift < s.drift_bound);
    }
    // Drift telescopes: f_4 on X_1 stays within the summed step bounds of f_1.
    let (mut lx, mut ls) = (trace.steps[1].x_inclusion.clone(), trace.steps[1].s_inclusion.clone());
    for s in &trace.steps[2..4] {
        lx = s.x_inclusion.compose(&lx).unwrap();
        ls = s.s_inclusion.compose(&ls).unwrap();
    }
    let gap = map_distance(&trace.maps[4].compose(&lx).unwrap(), &ls.compose(&trace.maps[1]).unwrap()).unwrap();
    let bound: Rational = trace.steps[1..4].iter().map(|s| s.drift_bound.clone()).sum();
    assert!(gap < bound, "{gap} vs {bound}");
}

