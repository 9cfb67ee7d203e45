//! Amalgamation of an ε-isometry with the identity, and the ℓ1-pushout.
//!
//! Given an ε-isometry `f: X -> Y`, [`amalgamate`] builds a space `Z` with
//! isometric copies `i: X -> Z` and `j: Y -> Z` such that
//! `||j∘f - i|| <= ε`. [`pushout_l1`] glues `X1 ⊇ X0` and `Y0` along
//! `f: X0 -> Y0`, and [`extend_isometry`] combines the two to extend `f` to
//! an isometry on `X1` up to an error below ε.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::convex::{lp_solve, Halfspace, HalfspaceSystem, Sense, VertexSystem};
use crate::error::{Error, Result};
use crate::linalg::{extend_basis, neg, Matrix};
use crate::operators::{defect_uncached, map_distance, DefectCertificate, LinearMap};
use crate::rational::Rational;
use crate::spaces::{unit_vector, PolyhedralSpace, SpaceRef};

#[derive(Clone, Debug)]
pub struct AmalgamCertificate {
    pub z: SpaceRef,
    pub i: LinearMap,
    pub j: LinearMap,
    pub epsilon_used: Rational,
    /// `ε/(1+ε)`; zero for the trivial amalgam of an exact isometry.
    pub cutoff: Rational,
    /// `op_norm(j∘f - i)`.
    pub bound_achieved: Rational,
    pub f_defect: DefectCertificate,
    pub i_defect: DefectCertificate,
    pub j_defect: DefectCertificate,
    /// For the general construction: the amalgam of `X` with `f[X]` whose
    /// ball is glued to the ball of `Y`, and the basis of `f[X]` used for it.
    pub onto_image: Option<Box<AmalgamCertificate>>,
}

impl AmalgamCertificate {
    /// Re-derives the isometry and distance claims from scratch for `f`.
    pub fn verify(&self, f: &LinearMap) -> Result<()> {
        let fail = |what: &str| Err(Error::Certificate(format!("amalgam: {what}")));
        if *self.i.domain().as_ref() != *f.domain().as_ref()
            || *self.j.domain().as_ref() != *f.codomain().as_ref()
        {
            return fail("embeddings do not match the map's spaces");
        }
        for (name, map, claimed) in [("i", &self.i, &self.i_defect), ("j", &self.j, &self.j_defect)] {
            let fresh = defect_uncached(map)?;
            if !fresh.is_isometry() {
                return fail(&format!("{name} is not an isometry"));
            }
            if fresh != *claimed {
                claimed.verify(map)?;
            }
        }
        let diff = LinearMap::new(
            f.domain().clone(),
            self.z.clone(),
            self.j.matrix().mul(f.matrix()).sub(self.i.matrix()),
        )?;
        if diff.op_norm().value != self.bound_achieved {
            return fail("bound differs from recomputation");
        }
        if self.bound_achieved > self.epsilon_used {
            return fail("bound exceeds epsilon");
        }
        Ok(())
    }
}

fn check_epsilon(f: &LinearMap, eps: &Rational) -> Result<DefectCertificate> {
    let d = f.defect()?;
    if !d.is_epsilon_isometry(eps) {
        return Err(Error::epsilon_too_small(eps.clone(), d.epsilon_star));
    }
    Ok(d)
}

fn block_embeddings(x: &SpaceRef, y: &SpaceRef, z: &SpaceRef) -> Result<(LinearMap, LinearMap)> {
    let n = x.dimension();
    let m = y.dimension();
    let i = Matrix::identity(n).vstack(&Matrix::zeros(m, n));
    let j = Matrix::zeros(n, m).vstack(&Matrix::identity(m));
    Ok((
        LinearMap::new(x.clone(), z.clone(), i)?,
        LinearMap::new(y.clone(), z.clone(), j)?,
    ))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    f: &LinearMap,
    z: SpaceRef,
    i: LinearMap,
    j: LinearMap,
    eps: &Rational,
    cutoff: Rational,
    f_defect: DefectCertificate,
    onto_image: Option<Box<AmalgamCertificate>>,
) -> Result<AmalgamCertificate> {
    let i_defect = i.defect()?;
    let j_defect = j.defect()?;
    if !i_defect.is_isometry() || !j_defect.is_isometry() {
        return Err(Error::Certificate("amalgam embeddings are not isometric".into()));
    }
    let jf = j.compose(f)?;
    let bound_achieved = map_distance(&jf, &i)?;
    if bound_achieved > *eps {
        return Err(Error::Certificate(format!(
            "amalgam bound {bound_achieved} exceeds epsilon {eps}"
        )));
    }
    Ok(AmalgamCertificate {
        z,
        i,
        j,
        epsilon_used: eps.clone(),
        cutoff,
        bound_achieved,
        f_defect,
        i_defect,
        j_defect,
        onto_image,
    })
}

/// Amalgam for a bijective ε-isometry `f: X -> Y` on `X ⊕ Y`.
///
/// The norm is `max{φ_X, φ_Y, ε₁||x||_X, ε₁||y||_Y}` with `ε₁ = ε/(1+ε)`,
/// where `φ_X(x, y) = max |x*(x) + x̄*(y)/||x̄*||_Y*|` over the dual vertices
/// `x*` of `X` and `x̄* = x*∘f⁻¹` (symmetrically for `φ_Y` with `ȳ* = y*∘f`).
/// Restricting to dual vertices keeps `i` and `j` isometric, only lowers the
/// `φ` terms, and leaves positivity to the `ε₁` terms.
pub fn amalgamate_bijective(f: &LinearMap, eps: &Rational) -> Result<AmalgamCertificate> {
    let x = f.domain().clone();
    let y = f.codomain().clone();
    if x.dimension() != y.dimension() {
        return Err(Error::NotBijective);
    }
    let f_inv = f.matrix().inverse().ok_or(Error::NotBijective)?;
    let f_defect = check_epsilon(f, eps)?;
    let cutoff = eps / (Rational::one() + eps);

    let mut normals = Vec::new();
    for xs in &x.dual_vertices().points {
        let bar = f_inv.vec_mul(xs);
        let scale = y.dual_norm_unchecked(&bar).recip();
        let mut row = xs.clone();
        row.extend(bar.iter().map(|v| v * &scale));
        normals.push(row);
    }
    for ys in &y.dual_vertices().points {
        let bar = f.matrix().vec_mul(ys);
        let scale = x.dual_norm_unchecked(&bar).recip();
        let mut row: Vec<Rational> = bar.iter().map(|v| v * &scale).collect();
        row.extend(ys.iter().cloned());
        normals.push(row);
    }
    let n = x.dimension();
    for xs in &x.dual_vertices().points {
        let mut row: Vec<Rational> = xs.iter().map(|v| v * &cutoff).collect();
        row.extend(std::iter::repeat_n(Rational::zero(), n));
        normals.push(row);
    }
    for ys in &y.dual_vertices().points {
        let mut row = vec![Rational::zero(); n];
        row.extend(ys.iter().map(|v| v * &cutoff));
        normals.push(row);
    }
    let z = Arc::new(PolyhedralSpace::from_facets(&HalfspaceSystem::symmetric_from_normals(
        2 * n,
        &normals,
    ))?);
    let (i, j) = block_embeddings(&x, &y, &z)?;
    finish(f, z, i, j, eps, cutoff, f_defect, None)
}

/// Amalgam for an injective ε-isometry `f: X -> Y` on `X ⊕ Y`.
///
/// Square maps go straight to [`amalgamate_bijective`]. Otherwise this
/// first amalgamates `X` with the image `f[X]` (induced norm), then takes the
/// quotient of `(X ⊕ f[X]) ⊕₁ Y` identifying the two copies of `f[X]`. Its
/// ball is the hull of the first amalgam's ball, placed via
/// `(x, t) ↦ (x, F t)`, and `{0} × B_Y`.
pub fn amalgamate(f: &LinearMap, eps: &Rational) -> Result<AmalgamCertificate> {
    let x = f.domain().clone();
    let y = f.codomain().clone();
    if !f.is_injective() {
        return Err(Error::NotInjective);
    }
    let n = x.dimension();
    let m = y.dimension();
    if n == m {
        return amalgamate_bijective(f, eps);
    }
    let f_defect = check_epsilon(f, eps)?;
    let image_basis = f.matrix().columns();
    let (image, _) = y.subspace(&image_basis)?;
    let onto = LinearMap::new(x.clone(), image, Matrix::identity(n))?;
    let first = amalgamate_bijective(&onto, eps)?;

    let mut points = Vec::new();
    for v in &first.z.ball_vertices().points {
        let (xs, ts) = v.split_at(n);
        let mut p = xs.to_vec();
        p.extend(f.matrix().mul_vec(ts));
        points.push(p);
    }
    for v in &y.ball_vertices().points {
        let mut p = vec![Rational::zero(); n];
        p.extend(v.iter().cloned());
        points.push(p);
    }
    let z = Arc::new(PolyhedralSpace::from_vertices(&VertexSystem::new(n + m, points))?);
    let (i, j) = block_embeddings(&x, &y, &z)?;
    let cutoff = first.cutoff.clone();
    finish(f, z, i, j, eps, cutoff, f_defect, Some(Box::new(first)))
}

/// Trivial amalgam of an exact isometry: `Z = Y`, `i = f`, `j = id`.
pub fn amalgamate_isometric(f: &LinearMap, eps: &Rational) -> Result<AmalgamCertificate> {
    let f_defect = f.defect()?;
    if !f_defect.is_isometry() {
        return Err(Error::NotIsometric(f_defect.epsilon_star));
    }
    let y = f.codomain().clone();
    let j = LinearMap::identity(y.clone());
    finish(f, y, f.clone(), j, eps, Rational::zero(), f_defect, None)
}

/// The trivial amalgam for exact isometries, [`amalgamate`] otherwise.
pub fn amalgamate_auto(f: &LinearMap, eps: &Rational) -> Result<AmalgamCertificate> {
    if f.defect()?.is_isometry() {
        amalgamate_isometric(f, eps)
    } else {
        amalgamate(f, eps)
    }
}

/// Norm of `(x, y)` in the general amalgam computed directly as
/// `inf_v ( ||(x, v)||' + ||y - F v||_Y )` by linear programming, where `'`
/// is the norm of `prime` on `X ⊕ f[X]` in image-basis coordinates.
pub fn infimal_convolution_norm(
    prime: &PolyhedralSpace,
    f_matrix: &Matrix,
    y_space: &PolyhedralSpace,
    x: &[Rational],
    y: &[Rational],
) -> Result<Rational> {
    let n = f_matrix.cols();
    let dim = n + 2;
    let mut rows = Vec::new();
    for h in &prime.ball_facets().rows {
        let (ax, at) = h.normal.split_at(n);
        let mut row = at.to_vec();
        row.push(-Rational::one());
        row.push(Rational::zero());
        rows.push(Halfspace::new(row, -crate::linalg::dot(ax, x)));
    }
    for h in &y_space.ball_facets().rows {
        let mut row = neg(&f_matrix.vec_mul(&h.normal));
        row.push(Rational::zero());
        row.push(-Rational::one());
        rows.push(Halfspace::new(row, -crate::linalg::dot(&h.normal, y)));
    }
    let mut objective = vec![Rational::zero(); dim];
    objective[n] = Rational::one();
    objective[n + 1] = Rational::one();
    Ok(lp_solve(&objective, &HalfspaceSystem::new(dim, rows), Sense::Minimize)?.value)
}

#[derive(Clone, Debug)]
pub struct PushoutCertificate {
    pub w: SpaceRef,
    pub f_prime: LinearMap,
    pub y_embed: LinearMap,
    /// Weight `c = max(||f||, 1)` on the `X1` summand of the ℓ1-sum.
    pub weight: Rational,
    /// Standard basis vectors of `Y0` completing `f[X0]` to a basis.
    pub complement: Vec<usize>,
    pub f_defect: DefectCertificate,
    pub f_prime_defect: DefectCertificate,
    pub y_embed_defect: DefectCertificate,
}

impl PushoutCertificate {
    pub fn verify(&self, inclusion: &LinearMap, f: &LinearMap) -> Result<()> {
        let fail = |what: &str| Err(Error::Certificate(format!("pushout: {what}")));
        if self.f_prime.matrix().mul(inclusion.matrix()) != self.y_embed.matrix().mul(f.matrix()) {
            return fail("extension equation f'∘incl = y_embed∘f does not hold");
        }
        let y = defect_uncached(&self.y_embed)?;
        if !y.is_isometry() {
            return fail("Y0 does not embed isometrically");
        }
        let fp = defect_uncached(&self.f_prime)?;
        let fd = defect_uncached(f)?;
        if fp.epsilon_star > fd.epsilon_star {
            return fail("extension increased the defect");
        }
        if self.w.dimension() + inclusion.domain().dimension()
            != inclusion.codomain().dimension() + f.codomain().dimension()
        {
            return fail("dimension of W");
        }
        Ok(())
    }
}

/// ℓ1-pushout of an isometric inclusion `X0 -> X1` and injective `f: X0 -> Y0`.
///
/// `W = (X1 ⊕ Y0)/{(z, -f(z))}` where the sum carries `c||x|| + ||y||` with
/// `c = max(||f||, 1)`. Coordinates on `W` are those of `X1` followed by a
/// complement of `f[X0]` in `Y0` picked greedily from the standard basis.
/// With `c >= ||f||` the copy of `Y0` stays isometric; with `c = 1` this is
/// the plain ℓ1-pushout.
pub fn pushout_l1(inclusion: &LinearMap, f: &LinearMap) -> Result<PushoutCertificate> {
    if *inclusion.domain().as_ref() != *f.domain().as_ref() {
        return Err(Error::SpaceMismatch);
    }
    let inc_defect = inclusion.defect()?;
    if !inc_defect.is_isometry() {
        return Err(Error::NotIsometric(inc_defect.epsilon_star));
    }
    let f_defect = f.defect()?;
    let x1 = inclusion.codomain().clone();
    let y0 = f.codomain().clone();
    let k0 = f.domain().dimension();
    let n1 = x1.dimension();
    let m = y0.dimension();
    let weight = f.op_norm().value.clone().max(Rational::one());

    let image = f.matrix().columns();
    let standard: Vec<Vec<Rational>> = (0..m).map(|i| unit_vector(m, i)).collect();
    let complement = extend_basis(&image, &standard, m);
    let mut columns = image;
    columns.extend(complement.iter().map(|&i| standard[i].clone()));
    let coords = Matrix::from_columns(&columns, m)
        .inverse()
        .expect("image plus complement is a basis");
    let mc = complement.len();
    let mut p_a = Matrix::zeros(k0, m);
    let mut p_c = Matrix::zeros(mc, m);
    for r in 0..m {
        for c in 0..m {
            if r < k0 {
                p_a[(r, c)] = coords[(r, c)].clone();
            } else {
                p_c[(r - k0, c)] = coords[(r, c)].clone();
            }
        }
    }
    let y_embed_m = inclusion.matrix().mul(&p_a).vstack(&p_c);
    let f_prime_m = Matrix::identity(n1).vstack(&Matrix::zeros(mc, n1));

    let dim_w = n1 + mc;
    let inv_weight = weight.recip();
    let mut points = Vec::new();
    for v in &x1.ball_vertices().points {
        let scaled: Vec<Rational> = v.iter().map(|t| t * &inv_weight).collect();
        points.push(f_prime_m.mul_vec(&scaled));
    }
    for v in &y0.ball_vertices().points {
        points.push(y_embed_m.mul_vec(v));
    }
    let w = Arc::new(PolyhedralSpace::from_vertices(&VertexSystem::new(dim_w, points))?);
    let f_prime = LinearMap::new(x1, w.clone(), f_prime_m)?;
    let y_embed = LinearMap::new(y0, w.clone(), y_embed_m)?;
    let f_prime_defect = f_prime.defect()?;
    let y_embed_defect = y_embed.defect()?;
    let cert = PushoutCertificate {
        w,
        f_prime,
        y_embed,
        weight,
        complement,
        f_defect,
        f_prime_defect,
        y_embed_defect,
    };
    if !cert.y_embed_defect.is_isometry()
        || cert.f_prime_defect.epsilon_star > cert.f_defect.epsilon_star
        || cert.f_prime.matrix().mul(inclusion.matrix()) != cert.y_embed.matrix().mul(f.matrix())
    {
        return Err(Error::Certificate("pushout invariants failed".into()));
    }
    Ok(cert)
}

#[derive(Clone, Debug)]
pub struct ExtensionCertificate {
    pub pushout: PushoutCertificate,
    pub amalgam: AmalgamCertificate,
    pub y1: SpaceRef,
    /// Isometry `X1 -> Y1`.
    pub g: LinearMap,
    /// Isometric copy of `Y0` in `Y1`.
    pub y_embed: LinearMap,
    /// `||g↾X0 - y_embed∘f||`, strictly below ε.
    pub distance: Rational,
    pub epsilon: Rational,
}

/// Extends an ε-isometry `f: X0 -> Y0` across `X0 ⊆ X1` to an exact isometry
/// `g: X1 -> Y1 ⊇ Y0` with `||g↾X0 - f|| < ε`.
pub fn extend_isometry(inclusion: &LinearMap, f: &LinearMap, eps: &Rational) -> Result<ExtensionCertificate> {
    check_epsilon(f, eps)?;
    let pushout = pushout_l1(inclusion, f)?;
    let amalgam = amalgamate_auto(&pushout.f_prime, eps)?;
    let g = amalgam.i.clone();
    let y_embed = amalgam.j.compose(&pushout.y_embed)?;
    let distance = map_distance(&g.compose(inclusion)?, &y_embed.compose(f)?)?;
    if distance >= *eps {
        return Err(Error::Certificate(format!(
            "extension distance {distance} is not below epsilon {eps}"
        )));
    }
    Ok(ExtensionCertificate {
        y1: amalgam.z.clone(),
        pushout,
        amalgam,
        g,
        y_embed,
        distance,
        epsilon: eps.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn line() -> SpaceRef {
        Arc::new(PolyhedralSpace::line())
    }

    fn scaled_line(s: Rational) -> LinearMap {
        LinearMap::new(line(), line(), Matrix::scalar(1, &s)).unwrap()
    }

    /// Direct evaluation of the dimension-one amalgam norm for f = s·id:
    /// φ_X = φ_Y = |x + y| because x̄* = x*/s has dual norm 1/s.
    fn one_dim_norm(eps: &Rational, x: &Rational, y: &Rational) -> Rational {
        let cutoff = eps / (int(1) + eps);
        let phi = (x + y).abs();
        phi.max(&cutoff * x.abs()).max(&cutoff * y.abs())
    }

    use num_traits::Signed;

    #[test]
    fn identity_on_line() {
        let eps = rat(1, 3);
        let c = amalgamate_bijective(&LinearMap::identity(line()), &eps).unwrap();
        // u = (-x, x) has φ = 0 but the cutoff terms still see it
        assert_eq!(c.bound_achieved, rat(1, 4));
        assert_eq!(c.bound_achieved, c.cutoff);
        for (x, y) in [(int(1), int(2)), (int(-3), int(1)), (rat(1, 2), rat(-1, 2))] {
            assert_eq!(c.z.norm(&[x.clone(), y.clone()]).unwrap(), one_dim_norm(&eps, &x, &y));
        }
    }

    #[test]
    fn three_halves_example() {
        let eps = rat(3, 5);
        let f = scaled_line(rat(3, 2));
        let c = amalgamate_bijective(&f, &eps).unwrap();
        assert_eq!(c.cutoff, rat(3, 8));
        // u = j f(1) - i(1) = (-1, 3/2)
        let by_hand = one_dim_norm(&eps, &int(-1), &rat(3, 2));
        assert_eq!(by_hand, rat(9, 16));
        assert_eq!(c.bound_achieved, by_hand);
        c.verify(&f).unwrap();
        let general = amalgamate(&f, &eps).unwrap();
        assert_eq!(general.z.as_ref(), c.z.as_ref());
        assert_eq!(general.bound_achieved, rat(9, 16));
    }

    #[test]
    fn epsilon_at_defect_rejected() {
        let f = scaled_line(rat(3, 2));
        let err = amalgamate_bijective(&f, &rat(1, 2)).unwrap_err();
        assert_eq!(err, Error::epsilon_too_small(rat(1, 2), rat(1, 2)));
        assert!(matches!(amalgamate(&f, &rat(1, 4)), Err(Error::EpsilonTooSmall { .. })));
    }

    #[test]
    fn isometric_axis_into_square() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let f = LinearMap::new(line(), sq, Matrix::from_rows(vec![vec![int(1)], vec![int(0)]], 1))
            .unwrap();
        let c = amalgamate(&f, &rat(1, 10)).unwrap();
        assert_eq!(c.z.dimension(), 3);
        assert_eq!(c.bound_achieved, rat(1, 11));
        c.verify(&f).unwrap();
        let t = amalgamate_auto(&f, &rat(1, 10)).unwrap();
        assert_eq!(t.bound_achieved, int(0));
        assert_eq!(t.i, t.j.compose(&f).unwrap());
        t.verify(&f).unwrap();
    }

    #[test]
    fn pushout_over_zero_space_is_l1_sum() {
        let z = Arc::new(PolyhedralSpace::zero());
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let inc = LinearMap::zero(z.clone(), sq.clone());
        let f = LinearMap::zero(z, line());
        let p = pushout_l1(&inc, &f).unwrap();
        assert_eq!(p.w.dimension(), 3);
        // ℓ1-sum of the square and the line: ||(a, b, t)|| = max(|a|, |b|) + |t|
        assert_eq!(p.w.norm(&[int(1), int(-1), int(2)]).unwrap(), int(3));
        assert_eq!(p.f_prime.matrix(), &Matrix::identity(2).vstack(&Matrix::zeros(1, 2)));
        p.verify(&inc, &f).unwrap();
    }

    #[test]
    fn pushout_collapses_when_x0_is_x1() {
        let f = scaled_line(rat(3, 2));
        let inc = LinearMap::identity(line());
        let p = pushout_l1(&inc, &f).unwrap();
        assert_eq!(p.w.dimension(), 1);
        assert_eq!(p.weight, rat(3, 2));
        assert_eq!(p.f_prime_defect.epsilon_star, rat(1, 2));
        assert!(p.y_embed_defect.is_isometry());
        // W is a copy of Y0, with f' = f under that identification
        let back = p.y_embed.invert().unwrap().compose(&p.f_prime).unwrap();
        assert_eq!(back.matrix(), f.matrix());
    }

    #[test]
    fn pushout_axis_in_square() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let (x0, inc) = sq.subspace(&[vec![int(1), int(0)]]).unwrap();
        let f = LinearMap::new(x0, line(), Matrix::identity(1)).unwrap();
        let p = pushout_l1(&inc, &f).unwrap();
        assert_eq!(p.w.dimension(), 2);
        assert!(p.y_embed_defect.is_isometry());
        p.verify(&inc, &f).unwrap();
    }

    #[test]
    fn extension_of_three_halves() {
        let f = scaled_line(rat(3, 2));
        let inc = LinearMap::identity(line());
        let e = extend_isometry(&inc, &f, &rat(3, 5)).unwrap();
        assert_eq!(e.distance, rat(9, 16));
        assert!(e.g.defect().unwrap().is_isometry());
        assert!(e.y_embed.defect().unwrap().is_isometry());
    }

    #[test]
    fn extension_of_isometry_is_exact() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let (x0, inc) = sq.subspace(&[vec![int(0), int(1)]]).unwrap();
        let f = LinearMap::new(x0, line(), Matrix::scalar(1, &int(-1))).unwrap();
        let e = extend_isometry(&inc, &f, &rat(1, 100)).unwrap();
        assert_eq!(e.distance, int(0));
        assert_eq!(e.y1.dimension(), 2);
    }
}
