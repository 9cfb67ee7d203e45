use num_traits::{One, Signed};

use super::chain::ChainSpace;
use crate::amalgam::{amalgamate_auto, AmalgamCertificate};
use crate::error::{Error, Result};
use crate::operators::{map_distance, DefectCertificate, LinearMap};
use crate::rational::Rational;

/// A near-inverse `g: Y -> E` of an ε-isometry `f: X -> Y` with `X ⊆ E`.
#[derive(Clone, Debug)]
pub struct ApproximateInverse {
    /// `g: Y -> top of E`.
    pub g: LinearMap,
    /// Inclusion of `X` into the (extended) top of `E`.
    pub x_embed: LinearMap,
    pub eps: Rational,
    pub delta: Rational,
    pub eps_prime: Rational,
    pub delta_prime: Rational,
    pub amalgam: AmalgamCertificate,
    pub f_defect: DefectCertificate,
    pub g_defect: DefectCertificate,
    /// `||g∘f − id_X||`, strictly below `eps`.
    pub distance: Rational,
}

/// `ε′ = (ε* + ε)/2` and `δ′ = min(δ/2, (ε/ε′ − 1)/2)`, halving `δ′` until
/// `(1 + δ′)ε′ < ε`.
pub fn inverse_parameters(defect: &Rational, eps: &Rational, delta: &Rational) -> (Rational, Rational) {
    let two = Rational::from_integer(2.into());
    let eps_prime = (defect + eps) / &two;
    let mut delta_prime = (delta / &two).min((eps / &eps_prime - Rational::one()) / &two);
    while (Rational::one() + &delta_prime) * &eps_prime >= *eps {
        delta_prime /= &two;
    }
    (eps_prime, delta_prime)
}

/// Amalgamates `f` at `ε′`, then asks the oracle of `E` to extend the copy of
/// `X`; returns `g = h∘j`.
pub fn approximate_inverse(
    e: &mut ChainSpace,
    x_embed: &LinearMap,
    f: &LinearMap,
    eps: &Rational,
    delta: &Rational,
) -> Result<ApproximateInverse> {
    if **x_embed.domain() != **f.domain() {
        return Err(Error::SpaceMismatch);
    }
    if !delta.is_positive() {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let f_defect = f.defect()?;
    if !f_defect.is_epsilon_isometry(eps) {
        return Err(Error::epsilon_too_small(eps.clone(), f_defect.epsilon_star));
    }
    let (eps_prime, delta_prime) = inverse_parameters(&f_defect.epsilon_star, eps, delta);
    let amalgam = amalgamate_auto(f, &eps_prime)?;
    let ext = e.gurarii_extend(x_embed, &amalgam.i, &delta_prime)?;
    let g = ext.h.compose(&amalgam.j)?;
    let g_defect = g.defect()?;
    let distance = map_distance(&g.compose(f)?, &ext.x_embed)?;

    if g_defect.epsilon_star > delta_prime {
        return Err(Error::Certificate("near-inverse defect exceeds delta'".into()));
    }
    if distance > (Rational::one() + &delta_prime) * &amalgam.bound_achieved || distance >= *eps {
        return Err(Error::Certificate(format!(
            "near-inverse distance {distance} not below epsilon {eps}"
        )));
    }
    Ok(ApproximateInverse {
        g,
        x_embed: ext.x_embed,
        eps: eps.clone(),
        delta: delta.clone(),
        eps_prime,
        delta_prime,
        amalgam,
        f_defect,
        g_defect,
        distance,
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::engine::constant_chain;
    use crate::linalg::Matrix;
    use crate::random::{random_injective, random_slack, random_space, rng};
    use crate::rational::{int, rat};
    use crate::spaces::PolyhedralSpace;

    #[test]
    fn parameters_for_three_halves() {
        // ε′ = (1/2 + 3/5)/2 = 11/20; δ′ = min(1/20, (12/11 − 1)/2) = 1/22,
        // and (1 + 1/22)·11/20 = 23/40 < 3/5.
        let (eps_prime, delta_prime) = inverse_parameters(&rat(1, 2), &rat(3, 5), &rat(1, 10));
        assert_eq!(eps_prime, rat(11, 20));
        assert_eq!(delta_prime, rat(1, 22));
    }

    #[test]
    fn parameters_halve_until_strict() {
        let (eps_prime, delta_prime) = inverse_parameters(&int(0), &rat(1, 2), &int(4));
        assert_eq!(eps_prime, rat(1, 4));
        // min(2, 1/2) = 1/2 gives (3/2)(1/4) = 3/8 < 1/2 already.
        assert_eq!(delta_prime, rat(1, 2));
        assert!((Rational::one() + &delta_prime) * &eps_prime < rat(1, 2));
    }

    #[test]
    fn identity_has_exact_inverse() {
        let mut e = constant_chain("E", PolyhedralSpace::line(), 1);
        let x = e.top().clone();
        let f = LinearMap::identity(x.clone());
        let inv = approximate_inverse(&mut e, &LinearMap::identity(x), &f, &rat(1, 10), &rat(1, 10)).unwrap();
        assert_eq!(inv.distance, int(0));
        assert!(inv.g_defect.is_isometry());
    }

    #[test]
    fn three_halves_inverse() {
        let mut e = constant_chain("E", PolyhedralSpace::line(), 1);
        let x = e.top().clone();
        let f = LinearMap::new(x.clone(), x.clone(), Matrix::scalar(1, &rat(3, 2))).unwrap();
        let inv = approximate_inverse(&mut e, &LinearMap::identity(x), &f, &rat(3, 5), &rat(1, 10)).unwrap();
        assert_eq!(inv.delta_prime, rat(1, 22));
        assert!(inv.g_defect.epsilon_star <= rat(1, 22));
        assert!(inv.distance < rat(3, 5));
        assert_eq!(e.oracle_log().len(), 1);
    }

    #[test]
    fn rejects_epsilon_at_defect() {
        let mut e = constant_chain("E", PolyhedralSpace::line(), 1);
        let x = e.top().clone();
        let f = LinearMap::new(x.clone(), x.clone(), Matrix::scalar(1, &rat(3, 2))).unwrap();
        let err = approximate_inverse(&mut e, &LinearMap::identity(x), &f, &rat(1, 2), &rat(1, 10)).unwrap_err();
        assert!(matches!(err, Error::EpsilonTooSmall { .. }));
    }

    #[test]
    fn random_inverses_meet_their_bounds() {
        let mut r = rng(11);
        for _ in 0..6 {
            let x = Arc::new(random_space(&mut r, 2, 4));
            let y = Arc::new(random_space(&mut r, 2, 4));
            let f = LinearMap::new(x.clone(), y, random_injective(&mut r, 2, 2)).unwrap();
            let eps = f.defect().unwrap().epsilon_star + random_slack(&mut r);
            let mut e = ChainSpace::new("E", x.clone());
            let inv = approximate_inverse(&mut e, &LinearMap::identity(x), &f, &eps, &rat(1, 8)).unwrap();
            assert!(inv.distance < eps);
            assert!((Rational::one() + &inv.delta_prime) * &inv.eps_prime < eps);
        }
    }
}
