//! Finite-dimensional spaces whose unit ball is a rational symmetric polytope.

use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use crate::convex::{
    facet_enumeration, hull, is_symmetric_set, vertex_hull, lp_solve, vertex_enumeration, Halfspace,
    HalfspaceSystem, Polytope, Sense, VertexSystem,
};
use crate::error::{Error, Result};
use crate::linalg::{dot, neg, Matrix};
use crate::operators::LinearMap;
use crate::rational::Rational;

pub type SpaceRef = Arc<PolyhedralSpace>;

/// A normed space `(R^n, ||.||)` with polyhedral unit ball.
///
/// All three descriptions are kept: the irredundant facets `w . x <= 1`,
/// the vertices of the ball, and the vertices of the dual ball (which are
/// exactly the facet normals).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyhedralSpace {
    dimension: usize,
    ball_facets: HalfspaceSystem,
    ball_vertices: VertexSystem,
    dual_vertices: VertexSystem,
}

/// A linear functional on a [`PolyhedralSpace`], in coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Functional {
    pub coefficients: Vec<Rational>,
}

impl Functional {
    pub fn new(coefficients: Vec<Rational>) -> Self {
        Self { coefficients }
    }

    pub fn apply(&self, x: &[Rational]) -> Rational {
        dot(&self.coefficients, x)
    }
}

impl PolyhedralSpace {
    pub fn zero() -> Self {
        Self {
            dimension: 0,
            ball_facets: HalfspaceSystem::new(0, Vec::new()),
            ball_vertices: VertexSystem::new(0, Vec::new()),
            dual_vertices: VertexSystem::new(0, Vec::new()),
        }
    }

    pub fn from_polytope(description: &Polytope) -> Result<Self> {
        match description {
            Polytope::H(h) => Self::from_facets(h),
            Polytope::V(v) => Self::from_vertices(v),
        }
    }

    pub fn from_facets(system: &HalfspaceSystem) -> Result<Self> {
        if system.dimension == 0 {
            return Ok(Self::zero());
        }
        let (facets, vertices) = vertex_hull(system)?;
        if !vertices.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(Self::assemble(facets, vertices))
    }

    pub fn from_vertices(points: &VertexSystem) -> Result<Self> {
        if points.dimension == 0 {
            return Ok(Self::zero());
        }
        let (facets, vertices) = hull(points)?;
        if !vertices.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        Ok(Self::assemble(facets, vertices))
    }

    fn assemble(facets: HalfspaceSystem, vertices: VertexSystem) -> Self {
        let dimension = facets.dimension;
        let dual = VertexSystem::new(
            dimension,
            facets.rows.iter().map(|h| h.normal.clone()).collect(),
        )
        .canonical();
        Self {
            dimension,
            ball_facets: facets,
            ball_vertices: vertices.canonical(),
            dual_vertices: dual,
        }
    }

    /// Rebuilds a space from stored descriptions, checking that they agree.
    pub fn from_parts(facets: HalfspaceSystem, vertices: VertexSystem) -> Result<Self> {
        let space = Self::assemble(facets.canonical(), vertices);
        let report = space.validate();
        match report.first_failure() {
            None => Ok(space),
            Some(name) => Err(Error::Certificate(format!("space description: {name}"))),
        }
    }

    /// `ball = [-radius, radius]` on the real line.
    pub fn line_with_radius(radius: &Rational) -> Self {
        assert!(radius.is_positive());
        let v = VertexSystem::new(1, vec![vec![radius.clone()], vec![-radius]]);
        Self::from_vertices(&v).expect("interval is a valid ball")
    }

    pub fn line() -> Self {
        Self::line_with_radius(&Rational::one())
    }

    /// `l_inf^n`: the cube.
    pub fn l_inf(n: usize) -> Self {
        let normals: Vec<Vec<Rational>> = (0..n).map(|i| unit_vector(n, i)).collect();
        Self::from_facets(&HalfspaceSystem::symmetric_from_normals(n, &normals))
            .expect("cube is a valid ball")
    }

    /// `l_1^n`: the cross-polytope.
    pub fn l1(n: usize) -> Self {
        let mut points = Vec::with_capacity(2 * n);
        for i in 0..n {
            let e = unit_vector(n, i);
            points.push(neg(&e));
            points.push(e);
        }
        Self::from_vertices(&VertexSystem::new(n, points)).expect("cross-polytope is a valid ball")
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn ball_facets(&self) -> &HalfspaceSystem {
        &self.ball_facets
    }

    pub fn ball_vertices(&self) -> &VertexSystem {
        &self.ball_vertices
    }

    pub fn dual_vertices(&self) -> &VertexSystem {
        &self.dual_vertices
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got,
            });
        }
        Ok(())
    }

    /// Gauge of the unit ball, as the largest pairing with a dual vertex.
    pub fn norm(&self, x: &[Rational]) -> Result<Rational> {
        self.check_len(x.len())?;
        Ok(self.norm_unchecked(x))
    }

    pub(crate) fn norm_unchecked(&self, x: &[Rational]) -> Rational {
        self.dual_vertices
            .points
            .iter()
            .map(|w| dot(w, x))
            .max()
            .map_or_else(Rational::zero, |m| m.max(Rational::zero()))
    }

    /// Gauge as `min { sum mu : sum mu_k v_k = x, mu >= 0 }` over the ball
    /// vertices, solved as a linear program. Independent of the facet data.
    pub fn gauge_lp(&self, x: &[Rational]) -> Result<Rational> {
        self.check_len(x.len())?;
        if self.dimension == 0 {
            return Ok(Rational::zero());
        }
        let verts = &self.ball_vertices.points;
        let k = verts.len();
        let mut rows = Vec::with_capacity(2 * self.dimension + k);
        for (i, xi) in x.iter().enumerate() {
            let coeffs: Vec<Rational> = verts.iter().map(|v| v[i].clone()).collect();
            rows.push(Halfspace::new(neg(&coeffs), -xi));
            rows.push(Halfspace::new(coeffs, xi.clone()));
        }
        for j in 0..k {
            let mut n = vec![Rational::zero(); k];
            n[j] = -Rational::one();
            rows.push(Halfspace::new(n, Rational::zero()));
        }
        let objective = vec![Rational::one(); k];
        let sol = lp_solve(&objective, &HalfspaceSystem::new(k, rows), Sense::Minimize)?;
        Ok(sol.value)
    }

    /// Dual norm, as the largest pairing with a ball vertex.
    pub fn dual_norm(&self, phi: &Functional) -> Result<Rational> {
        self.check_len(phi.coefficients.len())?;
        Ok(self.dual_norm_unchecked(&phi.coefficients))
    }

    pub(crate) fn dual_norm_unchecked(&self, phi: &[Rational]) -> Rational {
        self.ball_vertices
            .points
            .iter()
            .map(|v| dot(phi, v))
            .max()
            .map_or_else(Rational::zero, |m| m.max(Rational::zero()))
    }

    /// The space whose unit ball is the dual ball of this one.
    pub fn polar(&self) -> Self {
        Self {
            dimension: self.dimension,
            ball_facets: HalfspaceSystem::new(
                self.dimension,
                self.ball_vertices.points.iter().cloned().map(Halfspace::unit).collect(),
            )
            .canonical(),
            ball_vertices: self.dual_vertices.clone(),
            dual_vertices: self.ball_vertices.clone(),
        }
    }

    /// Re-derives every invariant of the stored descriptions.
    pub fn validate(&self) -> SpaceValidation {
        let d = self.dimension;
        let mut checks = Vec::new();
        let dims_ok = self.ball_facets.dimension == d
            && self.ball_vertices.dimension == d
            && self.dual_vertices.dimension == d
            && self.ball_facets.rows.iter().all(|h| h.normal.len() == d)
            && self.ball_vertices.points.iter().all(|p| p.len() == d)
            && self.dual_vertices.points.iter().all(|p| p.len() == d);
        checks.push(("dimensions agree", dims_ok));
        if !dims_ok {
            return SpaceValidation { checks };
        }
        if d == 0 {
            let empty = self.ball_facets.rows.is_empty()
                && self.ball_vertices.points.is_empty()
                && self.dual_vertices.points.is_empty();
            checks.push(("zero-dimensional systems are empty", empty));
            return SpaceValidation { checks };
        }
        checks.push((
            "origin interior",
            self.ball_facets.rows.iter().all(|h| h.offset.is_positive()),
        ));
        checks.push(("ball symmetric", is_symmetric_set(&self.ball_vertices.points)));
        let recomputed = vertex_enumeration(&self.ball_facets).map(|v| v.canonical());
        checks.push((
            "bounded",
            !matches!(recomputed, Err(Error::UnboundedPolytope)),
        ));
        checks.push((
            "facets and vertices describe the same ball",
            recomputed.as_ref().ok() == Some(&self.ball_vertices),
        ));
        let irredundant = facet_enumeration(&self.ball_vertices)
            .map(|f| f == self.ball_facets)
            .unwrap_or(false);
        checks.push(("facets irredundant", irredundant));
        let dual = VertexSystem::new(
            d,
            self.ball_facets.rows.iter().map(|h| h.normal.clone()).collect(),
        )
        .canonical();
        checks.push(("dual vertices are the facet normals", dual == self.dual_vertices));
        SpaceValidation { checks }
    }

    /// Ball of the subspace spanned by `basis`, in basis coordinates.
    pub fn subspace_ball(&self, basis: &[Vec<Rational>]) -> Result<PolyhedralSpace> {
        for b in basis {
            self.check_len(b.len())?;
        }
        let k = basis.len();
        let b = Matrix::from_columns(basis, self.dimension);
        if b.rank() < k {
            return Err(Error::DependentBasis);
        }
        if k == 0 {
            return Ok(Self::zero());
        }
        let rows = self
            .ball_facets
            .rows
            .iter()
            .map(|h| Halfspace::new(b.vec_mul(&h.normal), h.offset.clone()))
            .collect();
        Self::from_facets(&HalfspaceSystem::new(k, rows))
    }

    /// Subspace with induced norm together with its inclusion map.
    pub fn subspace(self: &Arc<Self>, basis: &[Vec<Rational>]) -> Result<(SpaceRef, LinearMap)> {
        let sub = Arc::new(self.subspace_ball(basis)?);
        let inclusion =
            LinearMap::new(sub.clone(), self.clone(), Matrix::from_columns(basis, self.dimension))?;
        Ok((sub, inclusion))
    }
}

/// Named pass/fail checks of a space description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceValidation {
    pub checks: Vec<(&'static str, bool)>,
}

impl SpaceValidation {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(_, ok)| *ok)
    }

    pub fn first_failure(&self) -> Option<&'static str> {
        self.checks.iter().find(|(_, ok)| !ok).map(|(n, _)| *n)
    }
}

pub fn unit_vector(n: usize, i: usize) -> Vec<Rational> {
    let mut e = vec![Rational::zero(); n];
    e[i] = Rational::one();
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn v(xs: &[i64]) -> Vec<Rational> {
        xs.iter().map(|&x| int(x)).collect()
    }

    fn hexagon() -> PolyhedralSpace {
        let pts = vec![
            v(&[1, 0]),
            v(&[-1, 0]),
            vec![rat(1, 2), int(1)],
            vec![rat(-1, 2), int(-1)],
            vec![rat(-1, 2), int(1)],
            vec![rat(1, 2), int(-1)],
        ];
        PolyhedralSpace::from_vertices(&VertexSystem::new(2, pts)).unwrap()
    }

    #[test]
    fn standard_balls() {
        let sq = PolyhedralSpace::l_inf(2);
        assert_eq!(sq.ball_facets().rows.len(), 4);
        assert_eq!(sq.ball_vertices().points.len(), 4);
        assert_eq!(sq.dual_vertices(), PolyhedralSpace::l1(2).ball_vertices());
        let octa = PolyhedralSpace::l1(3);
        assert_eq!(octa.ball_facets().rows.len(), 8);
        assert_eq!(octa.ball_vertices().points.len(), 6);
        assert!(sq.validate().passed());
        assert!(octa.validate().passed());
    }

    #[test]
    fn hexagon_counts() {
        let h = hexagon();
        assert_eq!(h.ball_facets().rows.len(), 6);
        assert_eq!(h.dual_vertices().points.len(), 6);
        assert!(h.validate().passed());
    }

    #[test]
    fn norms() {
        assert_eq!(PolyhedralSpace::l1(2).norm(&v(&[3, 4])).unwrap(), int(7));
        assert_eq!(PolyhedralSpace::l_inf(2).norm(&v(&[3, 4])).unwrap(), int(4));
        let h = hexagon();
        let x = v(&[1, 1]);
        assert_eq!(h.norm(&x).unwrap(), h.gauge_lp(&x).unwrap());
        assert!(matches!(
            h.norm(&v(&[1])),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn dual_norms() {
        let phi = Functional::new(v(&[1, 1]));
        assert_eq!(PolyhedralSpace::l_inf(2).dual_norm(&phi).unwrap(), int(2));
        assert_eq!(PolyhedralSpace::l1(2).dual_norm(&phi).unwrap(), int(1));
        let h = hexagon();
        let psi = Functional::new(vec![rat(2, 3), int(-5)]);
        assert_eq!(h.dual_norm(&psi).unwrap(), h.polar().norm(&psi.coefficients).unwrap());
    }

    #[test]
    fn subspaces() {
        let sq = Arc::new(PolyhedralSpace::l_inf(2));
        let (s, _) = sq.subspace(&[v(&[1, 0])]).unwrap();
        assert_eq!(s.ball_vertices().points, vec![v(&[-1]), v(&[1])]);
        let l1 = Arc::new(PolyhedralSpace::l1(2));
        let (s, inc) = l1.subspace(&[v(&[1, 1])]).unwrap();
        assert_eq!(s.ball_vertices().points, vec![vec![rat(-1, 2)], vec![rat(1, 2)]]);
        assert_eq!(inc.matrix().column(0), v(&[1, 1]));
        assert_eq!(
            l1.subspace(&[v(&[1, 1]), v(&[2, 2])]).unwrap_err(),
            Error::DependentBasis
        );
        let (z, _) = l1.subspace(&[]).unwrap();
        assert_eq!(z.dimension(), 0);
    }

    #[test]
    fn asymmetric_rejected() {
        let tri = VertexSystem::new(2, vec![v(&[1, 0]), v(&[0, 1]), v(&[-1, -1])]);
        assert_eq!(PolyhedralSpace::from_vertices(&tri), Err(Error::NotSymmetric));
        let tri_h = crate::convex::facet_enumeration(&tri).unwrap();
        assert_eq!(PolyhedralSpace::from_facets(&tri_h), Err(Error::NotSymmetric));
    }

    #[test]
    fn zero_space() {
        let z = PolyhedralSpace::zero();
        assert_eq!(z.norm(&[]).unwrap(), int(0));
        assert_eq!(z.gauge_lp(&[]).unwrap(), int(0));
        assert!(z.validate().passed());
        assert_eq!(PolyhedralSpace::from_facets(&HalfspaceSystem::new(0, vec![])).unwrap(), z);
    }

    #[test]
    fn tampered_parts_rejected() {
        let sq = PolyhedralSpace::l_inf(2);
        let mut verts = sq.ball_vertices().clone();
        verts.points[0][0] = rat(3, 2);
        assert!(PolyhedralSpace::from_parts(sq.ball_facets().clone(), verts).is_err());
        assert!(
            PolyhedralSpace::from_parts(sq.ball_facets().clone(), sq.ball_vertices().clone()).is_ok()
        );
    }
}
