use std::sync::Arc;

use num_traits::One;

use super::chain::ChainSpace;
use super::{corestrict, leading_inclusion, seeded_span};
use crate::amalgam::extend_isometry;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operators::{map_distance, DefectCertificate, LinearMap};
use crate::rational::Rational;
use crate::spaces::{PolyhedralSpace, SpaceRef};

/// Passage from `f_n: X_n -> S_n` to `f_{n+1}: X_{n+1} -> S_{n+1}`, where
/// `S_n ⊆ G` spans the images so far.
#[derive(Clone, Debug)]
pub struct EmbedStep {
    pub x_inclusion: LinearMap,
    pub s_inclusion: LinearMap,
    /// `||g↾X_n − f_n||` from the isometric extension, below `2^-n`.
    pub extension_distance: Rational,
    /// `||f_{n+1}↾X_n − f_n||`.
    pub drift: Rational,
    /// `(1 + 2^-(n+1))·2^-n`.
    pub drift_bound: Rational,
}

#[derive(Clone, Debug)]
pub struct EmbedTrace {
    /// `f_n` for `n = 0..=depth`, with `f_0 = 0` on the zero space.
    pub maps: Vec<LinearMap>,
    pub defects: Vec<DefectCertificate>,
    pub steps: Vec<EmbedStep>,
}

pub fn power_of_half(n: usize) -> Rational {
    Rational::new(1.into(), num_bigint::BigInt::from(2).pow(n as u32))
}

/// Stages of `X` used at each level: a zero space first (prepended when the
/// chain does not start with one), and the last stage repeated once the
/// chain runs out.
fn x_levels(chain: &ChainSpace, depth: usize) -> Vec<(SpaceRef, Option<Matrix>)> {
    let mut out: Vec<(SpaceRef, Option<Matrix>)> = Vec::new();
    let presented = &chain.stages()[..chain.presentation_len()];
    if presented[0].dimension() != 0 {
        out.push((Arc::new(PolyhedralSpace::zero()), None));
        out.push((presented[0].clone(), Some(Matrix::zeros(presented[0].dimension(), 0))));
    } else {
        out.push((presented[0].clone(), None));
    }
    for (k, space) in presented.iter().enumerate().skip(1) {
        out.push((space.clone(), Some(chain.inclusion(k - 1).matrix().clone())));
    }
    while out.len() <= depth {
        let last = out.last().expect("non-empty").0.clone();
        let n = last.dimension();
        out.push((last, Some(Matrix::identity(n))));
    }
    out.truncate(depth + 1);
    out
}

/// Embeds the union of `x_chain` into `G` through maps `f_n` whose defects
/// fall below `2^-n` and whose successive restrictions drift by less than
/// `2·2^-n`.
pub fn embed_universal(x_chain: &ChainSpace, g: &mut ChainSpace, depth: usize) -> Result<EmbedTrace> {
    let levels = x_levels(x_chain, depth);
    let zero = levels[0].0.clone();
    let s0 = Arc::new(PolyhedralSpace::zero());
    let mut s_top = LinearMap::zero(s0.clone(), g.top().clone());
    let f0 = LinearMap::zero(zero, s0);
    let mut defects = vec![f0.defect()?];
    let mut maps = vec![f0];
    let mut steps = Vec::new();

    for n in 0..depth {
        let eps = power_of_half(n);
        let eps_next = power_of_half(n + 1);
        let f_n = maps[n].clone();
        let x_next = levels[n + 1].0.clone();
        let x_inclusion = LinearMap::new(
            f_n.domain().clone(),
            x_next.clone(),
            levels[n + 1].1.clone().expect("later levels carry inclusions"),
        )?;
        let ext = extend_isometry(&x_inclusion, &f_n, &eps)?;
        let oracle = g.gurarii_extend(&s_top, &ext.y_embed, &eps_next)?;
        let f_next_top = oracle.h.compose(&ext.g)?;
        let (s_next, s_next_top) = seeded_span(g.top(), oracle.x_embed.matrix(), &f_next_top.matrix().columns())?;
        let f_next = corestrict(&f_next_top, &s_next_top)?;
        let s_inclusion = leading_inclusion(f_n.codomain(), &s_next)?;

        let drift = map_distance(&f_next.compose(&x_inclusion)?, &s_inclusion.compose(&f_n)?)?;
        let drift_bound = (Rational::one() + &eps_next) * &eps;
        let defect = f_next.defect()?;
        if !defect.is_epsilon_isometry(&eps_next) {
            return Err(Error::Certificate(format!("level {}: defect above 2^-{}", n + 1, n + 1)));
        }
        if drift >= drift_bound {
            return Err(Error::Certificate(format!("step {n}: drift not below (1 + 2^-(n+1))·2^-n")));
        }
        steps.push(EmbedStep {
            x_inclusion,
            s_inclusion,
            extension_distance: ext.distance,
            drift,
            drift_bound,
        });
        defects.push(defect);
        maps.push(f_next);
        s_top = s_next_top;
    }
    Ok(EmbedTrace { maps, defects, steps })
}
