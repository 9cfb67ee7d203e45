//! Linear maps between polyhedral spaces and their isometry defects.

use std::sync::{Arc, OnceLock};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::convex::{hull, lp_solve, vertex_enumeration, Halfspace, HalfspaceSystem, Sense, VertexSystem};
use crate::error::{Error, Result};
use crate::linalg::{neg, Matrix};
use crate::rational::{serde_q, Rational};
use crate::spaces::{PolyhedralSpace, SpaceRef};

/// An extremal value together with a unit vector attaining it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attained {
    #[serde(with = "serde_q")]
    pub value: Rational,
    #[serde(with = "serde_q::vec")]
    pub witness: Vec<Rational>,
}

/// Exact isometry defect of an injective map.
///
/// `sup` is the operator norm, `inf` the minimal gain on the unit sphere, and
/// `epsilon_star = max(sup, 1/inf) - 1`. The map is an ε-isometry exactly
/// when `ε > epsilon_star`. A map out of the zero space reports `inf = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefectCertificate {
    pub sup: Attained,
    pub inf: Attained,
    #[serde(with = "serde_q")]
    pub epsilon_star: Rational,
}

impl DefectCertificate {
    pub fn is_isometry(&self) -> bool {
        self.epsilon_star.is_zero()
    }

    pub fn is_epsilon_isometry(&self, eps: &Rational) -> bool {
        *eps > self.epsilon_star
    }

    /// Recomputes the certificate for `f` and checks the witnesses.
    pub fn verify(&self, f: &LinearMap) -> Result<()> {
        let fail = |what: &str| Err(Error::Certificate(format!("defect certificate: {what}")));
        let dom = f.domain();
        let cod = f.codomain();
        for (name, a) in [("sup", &self.sup), ("inf", &self.inf)] {
            if dom.dimension() == 0 {
                if !a.witness.is_empty() {
                    return fail("witness on the zero space");
                }
                continue;
            }
            if a.witness.len() != dom.dimension() || dom.norm_unchecked(&a.witness) != Rational::one()
            {
                return fail(&format!("{name} witness is not a unit vector"));
            }
            if cod.norm_unchecked(&f.matrix.mul_vec(&a.witness)) != a.value {
                return fail(&format!("{name} witness does not attain the claimed value"));
            }
        }
        if dom.dimension() > 0 {
            if !dom.ball_vertices().points.contains(&self.sup.witness) {
                return fail("sup witness is not a vertex of the domain ball");
            }
            if !self.inf.value.is_positive() || !is_pulled_back_vertex(f, &self.inf) {
                return fail("inf witness is not extremal for the pulled-back ball");
            }
        }
        let fresh = defect_uncached(f)?;
        if fresh.sup.value != self.sup.value {
            return fail("operator norm differs from recomputation");
        }
        if fresh.inf.value != self.inf.value {
            return fail("minimal gain differs from recomputation");
        }
        if fresh.epsilon_star != self.epsilon_star {
            return fail("epsilon* differs from recomputation");
        }
        Ok(())
    }
}

/// A linear map given by its matrix in the coordinates of two spaces.
///
/// Certificates are computed on first use and cached.
#[derive(Clone, Debug)]
pub struct LinearMap {
    domain: SpaceRef,
    codomain: SpaceRef,
    matrix: Matrix,
    op_norm: OnceLock<Attained>,
    min_gain: OnceLock<Result<Attained>>,
}

impl PartialEq for LinearMap {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix && self.domain == other.domain && self.codomain == other.codomain
    }
}

impl LinearMap {
    pub fn new(domain: SpaceRef, codomain: SpaceRef, matrix: Matrix) -> Result<Self> {
        if matrix.cols() != domain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: domain.dimension(),
                got: matrix.cols(),
            });
        }
        if matrix.rows() != codomain.dimension() {
            return Err(Error::DimensionMismatch {
                expected: codomain.dimension(),
                got: matrix.rows(),
            });
        }
        Ok(Self {
            domain,
            codomain,
            matrix,
            op_norm: OnceLock::new(),
            min_gain: OnceLock::new(),
        })
    }

    pub fn identity(space: SpaceRef) -> Self {
        let n = space.dimension();
        Self::new(space.clone(), space, Matrix::identity(n)).expect("square identity")
    }

    pub fn zero(domain: SpaceRef, codomain: SpaceRef) -> Self {
        let m = Matrix::zeros(codomain.dimension(), domain.dimension());
        Self::new(domain, codomain, m).expect("shape matches")
    }

    pub fn domain(&self) -> &SpaceRef {
        &self.domain
    }

    pub fn codomain(&self) -> &SpaceRef {
        &self.codomain
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[Rational]) -> Vec<Rational> {
        self.matrix.mul_vec(x)
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.rank() == self.domain.dimension()
    }

    /// Same matrix, different (dimension-compatible) codomain.
    pub fn with_codomain(&self, codomain: SpaceRef) -> Result<Self> {
        Self::new(self.domain.clone(), codomain, self.matrix.clone())
    }

    /// Largest codomain norm over the domain ball vertices. Convexity of the
    /// norm makes this the operator norm.
    pub fn op_norm(&self) -> &Attained {
        self.op_norm.get_or_init(|| op_norm_uncached(self))
    }

    /// Smallest codomain norm over the domain unit sphere.
    pub fn min_gain(&self) -> Result<Attained> {
        self.min_gain.get_or_init(|| min_gain_uncached(self)).clone()
    }

    /// [`LinearMap::min_gain`] by one linear program per facet pair of the
    /// domain ball; an independent route to the same value.
    pub fn min_gain_lp(&self) -> Result<Attained> {
        min_gain_lp(self)
    }

    pub fn defect(&self) -> Result<DefectCertificate> {
        let inf = self.min_gain()?;
        let sup = self.op_norm().clone();
        Ok(assemble_defect(sup, inf))
    }

    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        if inner.codomain != self.domain && *inner.codomain != *self.domain {
            return Err(Error::SpaceMismatch);
        }
        LinearMap::new(
            inner.domain.clone(),
            self.codomain.clone(),
            self.matrix.mul(&inner.matrix),
        )
    }

    /// Restriction to a subspace given by its inclusion map.
    pub fn restrict(&self, inclusion: &LinearMap) -> Result<LinearMap> {
        self.compose(inclusion)
    }

    pub fn invert(&self) -> Result<LinearMap> {
        if self.matrix.rows() != self.matrix.cols() {
            return Err(Error::NotBijective);
        }
        let inv = self.matrix.inverse().ok_or(Error::Singular)?;
        LinearMap::new(self.codomain.clone(), self.domain.clone(), inv)
    }

    fn check_same_spaces(&self, other: &LinearMap) -> Result<()> {
        let same = |a: &SpaceRef, b: &SpaceRef| Arc::ptr_eq(a, b) || **a == **b;
        if !same(&self.domain, &other.domain) || !same(&self.codomain, &other.codomain) {
            return Err(Error::SpaceMismatch);
        }
        Ok(())
    }

    pub fn sub(&self, other: &LinearMap) -> Result<LinearMap> {
        self.check_same_spaces(other)?;
        LinearMap::new(
            self.domain.clone(),
            self.codomain.clone(),
            self.matrix.sub(&other.matrix),
        )
    }

    pub fn scale(&self, s: &Rational) -> LinearMap {
        LinearMap::new(self.domain.clone(), self.codomain.clone(), self.matrix.scale(s))
            .expect("shape preserved")
    }
}

/// Operator norm of `f - g` for maps with common domain and codomain.
pub fn map_distance(f: &LinearMap, g: &LinearMap) -> Result<Rational> {
    Ok(f.sub(g)?.op_norm().value.clone())
}

fn assemble_defect(sup: Attained, inf: Attained) -> DefectCertificate {
    let inv = inf.value.recip();
    let epsilon_star = sup.value.clone().max(inv) - Rational::one();
    DefectCertificate {
        sup,
        inf,
        epsilon_star,
    }
}

/// Recomputes the defect with the linear-programming minimal gain.
pub(crate) fn defect_uncached(f: &LinearMap) -> Result<DefectCertificate> {
    Ok(assemble_defect(op_norm_uncached(f), min_gain_lp(f)?))
}

fn op_norm_uncached(f: &LinearMap) -> Attained {
    let mut best: Option<Attained> = None;
    for v in &f.domain.ball_vertices().points {
        let value = f.codomain.norm_unchecked(&f.matrix.mul_vec(v));
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(Attained {
                value,
                witness: v.clone(),
            });
        }
    }
    best.unwrap_or(Attained {
        value: Rational::zero(),
        witness: Vec::new(),
    })
}

/// Whether `witness / value` is a vertex of `{x : ||F x|| <= 1}`, i.e. tight
/// on pulled-back dual vertices of full rank.
fn is_pulled_back_vertex(f: &LinearMap, inf: &Attained) -> bool {
    let v: Vec<Rational> = inf.witness.iter().map(|t| t / &inf.value).collect();
    let tight: Vec<Vec<Rational>> = f
        .codomain
        .dual_vertices()
        .points
        .iter()
        .map(|w| f.matrix.vec_mul(w))
        .filter(|r| crate::linalg::dot(r, &v).is_one())
        .collect();
    Matrix::from_rows(tight, v.len()).rank() == v.len()
}

/// The pulled-back ball `P = {x : ||F x|| <= 1}` is the induced unit ball of
/// the image; the minimal gain is `1 / max_{v vertex of P} ||v||`.
fn min_gain_uncached(f: &LinearMap) -> Result<Attained> {
    let d = f.domain.dimension();
    if d == 0 {
        return Ok(Attained {
            value: Rational::one(),
            witness: Vec::new(),
        });
    }
    if !f.is_injective() {
        return Err(Error::NotInjective);
    }
    let rows = f
        .codomain
        .dual_vertices()
        .points
        .iter()
        .map(|w| Halfspace::unit(f.matrix.vec_mul(w)))
        .filter(|h| !h.is_trivial())
        .collect();
    let pulled = vertex_enumeration(&HalfspaceSystem::new(d, rows))?;
    let (far, radius) = pulled
        .points
        .into_iter()
        .map(|v| {
            let r = f.domain.norm_unchecked(&v);
            (v, r)
        })
        .max_by(|a, b| a.1.cmp(&b.1))
        .expect("a bounded ball has vertices");
    Ok(Attained {
        value: radius.recip(),
        witness: far.iter().map(|t| t / &radius).collect(),
    })
}

/// Minimizes `t` over each facet `a_k . x = 1` of the domain ball subject to
/// `w . (F x) <= t` for every codomain dual vertex `w`. By symmetry only one
/// facet of each antipodal pair is needed.
fn min_gain_lp(f: &LinearMap) -> Result<Attained> {
    let d = f.domain.dimension();
    if d == 0 {
        return Ok(Attained {
            value: Rational::one(),
            witness: Vec::new(),
        });
    }
    if !f.is_injective() {
        return Err(Error::NotInjective);
    }
    let facets = &f.domain.ball_facets().rows;
    let mut base: Vec<Halfspace> = facets
        .iter()
        .map(|h| {
            let mut n = h.normal.clone();
            n.push(Rational::zero());
            Halfspace::new(n, h.offset.clone())
        })
        .collect();
    // Only the extreme pulled-back functionals matter on the image.
    let pulled = VertexSystem::new(
        d,
        f.codomain
            .dual_vertices()
            .points
            .iter()
            .map(|w| f.matrix.vec_mul(w))
            .collect(),
    );
    let (_, active) = hull(&pulled)?;
    for mut n in active.points {
        n.push(-Rational::one());
        base.push(Halfspace::new(n, Rational::zero()));
    }
    let mut objective = vec![Rational::zero(); d + 1];
    objective[d] = Rational::one();

    let mut best: Option<Attained> = None;
    for h in facets.iter().filter(|h| h.normal >= neg(&h.normal)) {
        let mut rows = base.clone();
        let mut n = neg(&h.normal);
        n.push(Rational::zero());
        rows.push(Halfspace::new(n, -&h.offset));
        let sol = lp_solve(&objective, &HalfspaceSystem::new(d + 1, rows), Sense::Minimize)?;
        if best.as_ref().is_none_or(|b| sol.value < b.value) {
            let mut witness = sol.point;
            witness.truncate(d);
            best = Some(Attained {
                value: sol.value,
                witness,
            });
        }
    }
    Ok(best.expect("a bounded ball has facets"))
}

/// Convenience for building maps onto fresh `Arc`s.
pub fn map_between(domain: PolyhedralSpace, codomain: PolyhedralSpace, matrix: Matrix) -> Result<LinearMap> {
    LinearMap::new(Arc::new(domain), Arc::new(codomain), matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn line() -> SpaceRef {
        Arc::new(PolyhedralSpace::line())
    }

    #[test]
    fn op_norm_examples() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        assert_eq!(LinearMap::identity(sq.clone()).op_norm().value, int(1));
        let id = LinearMap::new(sq, Arc::new(PolyhedralSpace::l1(2)), Matrix::identity(2)).unwrap();
        let n = id.op_norm();
        assert_eq!(n.value, int(2));
        assert_eq!(n.witness.iter().map(|v| v.clone() * v).sum::<Rational>(), int(2));
        let two = LinearMap::new(line(), line(), Matrix::scalar(1, &int(2))).unwrap();
        assert_eq!(two.op_norm().value, int(2));
    }

    #[test]
    fn min_gain_examples() {
        let octa = Arc::new(PolyhedralSpace::l1(3));
        assert_eq!(LinearMap::identity(octa).min_gain().unwrap().value, int(1));
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let id = LinearMap::new(sq, Arc::new(PolyhedralSpace::l1(2)), Matrix::identity(2)).unwrap();
        let g = id.min_gain().unwrap();
        assert_eq!(g.value, int(1));
        // minimum of |x|+|y| on the square boundary sits at an axis point
        assert_eq!(crate::spaces::PolyhedralSpace::l1(2).norm(&g.witness).unwrap(), int(1));
        let f = LinearMap::new(line(), line(), Matrix::scalar(1, &rat(3, 2))).unwrap();
        assert_eq!(f.min_gain().unwrap().value, rat(3, 2));
    }

    #[test]
    fn defect_examples() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        assert_eq!(LinearMap::identity(sq.clone()).defect().unwrap().epsilon_star, int(0));
        let f = LinearMap::new(line(), line(), Matrix::scalar(1, &rat(3, 2))).unwrap();
        let d = f.defect().unwrap();
        assert_eq!(d.epsilon_star, rat(1, 2));
        assert!(d.is_epsilon_isometry(&rat(3, 5)));
        assert!(!d.is_epsilon_isometry(&rat(1, 2)));
        d.verify(&f).unwrap();
        let id = LinearMap::new(sq, Arc::new(PolyhedralSpace::l1(2)), Matrix::identity(2)).unwrap();
        assert_eq!(id.defect().unwrap().epsilon_star, int(1));
    }

    #[test]
    fn non_injective_rejected() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let p = LinearMap::new(sq, line(), Matrix::from_rows(vec![vec![int(1), int(1)]], 2)).unwrap();
        assert_eq!(p.min_gain(), Err(Error::NotInjective));
        assert_eq!(p.defect(), Err(Error::NotInjective));
    }

    #[test]
    fn algebra() {
        let hex_like = Arc::new(PolyhedralSpace::l1(2));
        let m = Matrix::from_rows(vec![vec![int(2), int(1)], vec![int(1), int(1)]], 2);
        let f = LinearMap::new(hex_like.clone(), hex_like.clone(), m).unwrap();
        let inv = f.invert().unwrap();
        assert_eq!(f.compose(&inv).unwrap(), LinearMap::identity(hex_like.clone()));
        assert_eq!(map_distance(&f, &f).unwrap(), int(0));
        let singular = LinearMap::new(hex_like.clone(), hex_like, Matrix::zeros(2, 2)).unwrap();
        assert_eq!(singular.invert(), Err(Error::Singular));
        let id = LinearMap::identity(line());
        assert_eq!(map_distance(&id, &id.scale(&int(2))).unwrap(), int(1));
        let other = LinearMap::identity(Arc::new(PolyhedralSpace::l1(2)));
        assert_eq!(map_distance(&id, &other), Err(Error::SpaceMismatch));
    }

    #[test]
    fn restriction_of_identity_is_inclusion() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let (_, inc) = sq.subspace(&[vec![int(1), int(1)]]).unwrap();
        let r = LinearMap::identity(sq).restrict(&inc).unwrap();
        assert_eq!(r, inc);
        assert_eq!(inc.defect().unwrap().epsilon_star, int(0));
    }

    #[test]
    fn zero_domain() {
        let z = Arc::new(PolyhedralSpace::zero());
        let f = LinearMap::zero(z, line());
        let d = f.defect().unwrap();
        assert_eq!(d.epsilon_star, int(0));
        assert_eq!(d.sup.value, int(0));
        d.verify(&f).unwrap();
    }
}
