use num_traits::Zero;

use super::chain::ChainSpace;
use super::inverse::approximate_inverse;
use super::schedule::{tail_from, EpsilonSchedule};
use super::{corestrict, leading_inclusion, seeded_span};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operators::{map_distance, DefectCertificate, LinearMap};
use crate::rational::Rational;
use crate::spaces::SpaceRef;

/// `f_n: X_n -> Y_n` at level `n`, with `X_n`, `Y_n` in induced norms.
#[derive(Clone, Debug)]
pub struct Level {
    pub f: LinearMap,
    pub f_defect: DefectCertificate,
}

impl Level {
    pub fn x(&self) -> &SpaceRef {
        self.f.domain()
    }

    pub fn y(&self) -> &SpaceRef {
        self.f.codomain()
    }
}

/// Passage from level `n` to level `n + 1`.
#[derive(Clone, Debug)]
pub struct BackAndForthStep {
    /// `g_n: Y_n -> X_{n+1}`.
    pub g: LinearMap,
    pub g_defect: DefectCertificate,
    /// `X_n -> X_{n+1}` and `Y_n -> Y_{n+1}`, both `[I; 0]`.
    pub x_inclusion: LinearMap,
    pub y_inclusion: LinearMap,
    /// `||g_n∘f_n − id||` on `X_n`, at most `ε_n`.
    pub back: Rational,
    /// `||f_{n+1}∘g_n − id||` on `Y_n`, at most `ε_{n+1}`.
    pub forth: Rational,
    /// `||f_{n+1}↾X_n − f_n||`.
    pub drift: Rational,
    pub drift_bound: Rational,
}

#[derive(Clone, Debug)]
pub struct BackAndForthTrace {
    pub schedule: EpsilonSchedule,
    /// The seed `f: X -> F_0`.
    pub seed: LinearMap,
    pub levels: Vec<Level>,
    pub steps: Vec<BackAndForthStep>,
    /// `h_N↾X` and the seed, both read in `Y_N`.
    pub h_restricted: LinearMap,
    pub seed_in_final: LinearMap,
    pub final_distance: Rational,
    /// `Σ_{n<k} d_n + tail(k)` for `k = 0..=N`, each below the target.
    pub budget_partials: Vec<Rational>,
}

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Certificate(what()))
    }
}

/// Runs the back-and-forth between chains `E` and `F` from `f: X -> F_0`,
/// where `x_embed: X -> E_0`, to the schedule's depth.
///
/// Level `n + 1` spans the previous level, the image of the new map and the
/// next presentation stage of the chain (stage `n + 1`).
pub fn back_and_forth(
    e: &mut ChainSpace,
    f_chain: &mut ChainSpace,
    x_embed: &LinearMap,
    seed: &LinearMap,
    schedule: &EpsilonSchedule,
) -> Result<BackAndForthTrace> {
    schedule.verify()?;
    if **x_embed.codomain() != **e.stage(0) || **seed.codomain() != **f_chain.stage(0) {
        return Err(Error::SpaceMismatch);
    }
    if **x_embed.domain() != **seed.domain() {
        return Err(Error::SpaceMismatch);
    }
    let x_defect = x_embed.defect()?;
    if !x_defect.is_isometry() {
        return Err(Error::NotIsometric(x_defect.epsilon_star));
    }
    if !seed.is_injective() {
        return Err(Error::NotInjective);
    }
    let depth = schedule.depth();
    for (chain, name) in [(&*e, "E"), (&*f_chain, "F")] {
        if chain.presentation_len() <= depth {
            return Err(Error::ChainExhausted {
                chain: format!("{name} ({})", chain.name()),
                stage: chain.presentation_len(),
                available: chain.presentation_len(),
            });
        }
    }

    let x0 = seed.domain().clone();
    let mut x_top = e.lift_map(x_embed, 0)?;
    let (y0, y0_in_f0) = f_chain.stage(0).subspace(&seed.matrix().columns())?;
    let mut y_top = f_chain.lift_map(&y0_in_f0, 0)?;
    let f0 = LinearMap::new(x0.clone(), y0.clone(), Matrix::identity(x0.dimension()))?;
    let f0_defect = f0.defect()?;
    if !f0_defect.is_epsilon_isometry(schedule.eps(0)) {
        return Err(Error::epsilon_too_small(schedule.eps(0).clone(), f0_defect.epsilon_star));
    }
    let mut levels = vec![Level {
        f: f0,
        f_defect: f0_defect,
    }];
    let mut steps = Vec::new();

    for n in 0..depth {
        let eps_n = schedule.eps(n).clone();
        let eps_next = schedule.eps(n + 1).clone();
        let f_n = levels[n].f.clone();

        let back = approximate_inverse(e, &x_top, &f_n, &eps_n, &eps_next)?;
        let stage = e.lift_matrix(n + 1).columns();
        let mut extra = back.g.matrix().columns();
        extra.extend(stage);
        let (x_next, x_next_top) = seeded_span(e.top(), back.x_embed.matrix(), &extra)?;
        let g = corestrict(&back.g, &x_next_top)?;
        let x_inclusion = leading_inclusion(f_n.domain(), &x_next)?;

        let forth = approximate_inverse(f_chain, &y_top, &g, &eps_next, &eps_next)?;
        let stage = f_chain.lift_matrix(n + 1).columns();
        let mut extra = forth.g.matrix().columns();
        extra.extend(stage);
        let (y_next, y_next_top) = seeded_span(f_chain.top(), forth.x_embed.matrix(), &extra)?;
        let f_next = corestrict(&forth.g, &y_next_top)?;
        let y_inclusion = leading_inclusion(f_n.codomain(), &y_next)?;

        let g_defect = g.defect()?;
        let back_dist = map_distance(&g.compose(&f_n)?, &x_inclusion)?;
        let forth_dist = map_distance(&f_next.compose(&g)?, &y_inclusion)?;
        let drift = map_distance(&f_next.compose(&x_inclusion)?, &y_inclusion.compose(&f_n)?)?;
        let drift_bound = schedule.step_bound(n);
        check(g_defect.is_epsilon_isometry(&eps_next), || format!("step {n}: g_n is not an eps_(n+1)-isometry"))?;
        check(back_dist <= eps_n, || format!("step {n}: ||g_n f_n - id|| exceeds eps_n"))?;
        check(forth_dist <= eps_next, || format!("step {n}: ||f_(n+1) g_n - id|| exceeds eps_(n+1)"))?;
        check(drift <= drift_bound, || format!("step {n}: drift exceeds its allowance"))?;

        let f_next_defect = f_next.defect()?;
        check(f_next_defect.is_epsilon_isometry(&eps_next), || {
            format!("level {}: f is not an eps-isometry", n + 1)
        })?;
        steps.push(BackAndForthStep {
            g,
            g_defect,
            x_inclusion,
            y_inclusion,
            back: back_dist,
            forth: forth_dist,
            drift,
            drift_bound,
        });
        levels.push(Level {
            f: f_next,
            f_defect: f_next_defect,
        });
        x_top = x_next_top;
        y_top = y_next_top;
    }

    let last = &levels[depth].f;
    let x_to_last = leading_inclusion(&x0, last.domain())?;
    let y_to_last = leading_inclusion(&y0, last.codomain())?;
    let h_restricted = last.compose(&x_to_last)?;
    let seed_in_final = y_to_last.compose(&levels[0].f)?;
    let final_distance = map_distance(&h_restricted, &seed_in_final)?;

    let mut budget_partials = Vec::with_capacity(depth + 1);
    let mut drift_sum = Rational::zero();
    for (k, step) in steps.iter().enumerate() {
        budget_partials.push(&drift_sum + tail_from(&schedule.eps0, &schedule.ratio, k));
        drift_sum += &step.drift;
    }
    budget_partials.push(&drift_sum + tail_from(&schedule.eps0, &schedule.ratio, depth));
    check(final_distance <= drift_sum, || "final distance exceeds the summed drift".into())?;
    check(budget_partials.iter().all(|b| *b < schedule.target_eps), || {
        "drift budget exceeds the target".into()
    })?;
    check(final_distance < schedule.target_eps, || "final distance not below target".into())?;

    Ok(BackAndForthTrace {
        schedule: schedule.clone(),
        seed: seed.clone(),
        levels,
        steps,
        h_restricted,
        seed_in_final,
        final_distance,
        budget_partials,
    })
}
