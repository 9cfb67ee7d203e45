//! Exact convex geometry of origin-centred polytopes.
//!
//! Polytopes come in two descriptions: [`HalfspaceSystem`] (H-form) and
//! [`VertexSystem`] (V-form). Conversions go through the double description
//! method in [`dd`]; facet enumeration is vertex enumeration of the polar.

mod dd;
pub mod lp;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub use lp::{lp_solve, LpSolution, Sense};

use crate::error::{Error, Result};
use crate::linalg::{dot, neg, Matrix};
use crate::rational::{serde_q, Rational};

/// `{x : normal . x <= offset}`
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Halfspace {
    #[serde(with = "serde_q::vec")]
    pub normal: Vec<Rational>,
    #[serde(with = "serde_q")]
    pub offset: Rational,
}

impl Halfspace {
    pub fn new(normal: Vec<Rational>, offset: Rational) -> Self {
        Self { normal, offset }
    }

    /// Unit-offset row `normal . x <= 1`.
    pub fn unit(normal: Vec<Rational>) -> Self {
        Self::new(normal, Rational::from_integer(1.into()))
    }

    /// Positive rescaling to offset one, or, for rows through the origin,
    /// to a leading coefficient of absolute value one.
    pub fn canonical(&self) -> Self {
        let scale = if !self.offset.is_zero() {
            self.offset.abs()
        } else {
            match self.normal.iter().find(|v| !v.is_zero()) {
                Some(v) => v.abs(),
                None => return self.clone(),
            }
        };
        Self {
            normal: self.normal.iter().map(|v| v / &scale).collect(),
            offset: &self.offset / &scale,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.normal.iter().all(Zero::is_zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfspaceSystem {
    pub dimension: usize,
    pub rows: Vec<Halfspace>,
}

impl HalfspaceSystem {
    pub fn new(dimension: usize, rows: Vec<Halfspace>) -> Self {
        debug_assert!(rows.iter().all(|r| r.normal.len() == dimension));
        Self { dimension, rows }
    }

    /// Symmetric system `|normal . x| <= 1` for every given normal.
    pub fn symmetric_from_normals(dimension: usize, normals: &[Vec<Rational>]) -> Self {
        let mut rows = Vec::with_capacity(2 * normals.len());
        for n in normals {
            rows.push(Halfspace::unit(n.clone()));
            rows.push(Halfspace::unit(neg(n)));
        }
        Self::new(dimension, rows).canonical()
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.rows.iter().all(|h| dot(&h.normal, x) <= h.offset)
    }

    /// Canonically scaled rows, sorted, without duplicates or trivially
    /// satisfied `0 <= b` rows.
    pub fn canonical(&self) -> Self {
        let mut rows: Vec<Halfspace> = self
            .rows
            .iter()
            .filter(|h| !(h.is_trivial() && !h.offset.is_negative()))
            .map(Halfspace::canonical)
            .collect();
        rows.sort();
        rows.dedup();
        Self {
            dimension: self.dimension,
            rows,
        }
    }

    fn interior_rows(&self) -> Result<Vec<(Vec<Rational>, Rational)>> {
        let canon = self.canonical();
        if canon.rows.iter().any(|h| !h.offset.is_positive()) {
            return Err(Error::OriginNotInterior);
        }
        Ok(canon.rows.into_iter().map(|h| (h.normal, h.offset)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexSystem {
    pub dimension: usize,
    #[serde(with = "serde_q::vecvec")]
    pub points: Vec<Vec<Rational>>,
}

impl VertexSystem {
    pub fn new(dimension: usize, points: Vec<Vec<Rational>>) -> Self {
        debug_assert!(points.iter().all(|p| p.len() == dimension));
        Self { dimension, points }
    }

    /// Sorted, deduplicated points.
    pub fn canonical(&self) -> Self {
        let mut points = self.points.clone();
        points.sort();
        points.dedup();
        Self {
            dimension: self.dimension,
            points,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        is_symmetric_set(&self.points)
    }
}

pub(crate) fn is_symmetric_set(points: &[Vec<Rational>]) -> bool {
    let mut a = points.to_vec();
    a.sort();
    a.dedup();
    let mut b: Vec<Vec<Rational>> = a.iter().map(|p| neg(p)).collect();
    b.sort();
    a == b
}

/// Vertices of a bounded polytope whose interior contains the origin.
pub fn vertex_enumeration(system: &HalfspaceSystem) -> Result<VertexSystem> {
    let d = system.dimension;
    if d == 0 {
        return Ok(VertexSystem::new(0, Vec::new()));
    }
    let rows = system.interior_rows()?;
    if rows.is_empty() {
        return Err(Error::UnboundedPolytope);
    }
    let points = dd::enumerate_vertices(d, &rows)?;
    Ok(VertexSystem::new(d, points.into_iter().map(|(p, _)| p).collect()))
}

/// Vertices and irredundant facets of a bounded polytope whose interior
/// contains the origin.
pub fn vertex_hull(system: &HalfspaceSystem) -> Result<(HalfspaceSystem, VertexSystem)> {
    let d = system.dimension;
    if d == 0 {
        return Ok((HalfspaceSystem::new(0, Vec::new()), VertexSystem::new(0, Vec::new())));
    }
    let rows = system.interior_rows()?;
    if rows.is_empty() {
        return Err(Error::UnboundedPolytope);
    }
    let vertices = dd::enumerate_vertices(d, &rows)?;
    // A row is a facet iff no other row is tight at every vertex it touches.
    let mut touches = vec![Vec::new(); rows.len()];
    for (k, (_, tight)) in vertices.iter().enumerate() {
        for &i in tight {
            touches[i].push(k);
        }
    }
    let facets = dd::Incidence::new(&touches, vertices.len())
        .maximal()
        .into_iter()
        .map(|i| Halfspace::new(rows[i].0.clone(), rows[i].1.clone()))
        .collect();
    Ok((
        HalfspaceSystem::new(d, facets).canonical(),
        VertexSystem::new(d, vertices.into_iter().map(|(p, _)| p).collect()).canonical(),
    ))
}

/// Irredundant facets `w . x <= 1` of the hull of the given points.
pub fn facet_enumeration(points: &VertexSystem) -> Result<HalfspaceSystem> {
    Ok(hull(points)?.0)
}

/// Facets and vertices of the hull of a point cloud containing the origin in
/// the interior of its hull.
pub fn hull(points: &VertexSystem) -> Result<(HalfspaceSystem, VertexSystem)> {
    let d = points.dimension;
    if d == 0 {
        return Ok((HalfspaceSystem::new(0, Vec::new()), VertexSystem::new(0, Vec::new())));
    }
    let cloud: Vec<Vec<Rational>> = points
        .canonical()
        .points
        .into_iter()
        .filter(|p| !crate::linalg::is_zero(p))
        .collect();
    if Matrix::from_rows(cloud.clone(), d).rank() < d {
        return Err(Error::Degenerate);
    }
    let polar_rows: Vec<(Vec<Rational>, Rational)> = cloud
        .iter()
        .map(|p| (p.clone(), Rational::from_integer(1.into())))
        .collect();
    let facets = dd::enumerate_vertices(d, &polar_rows).map_err(|e| match e {
        Error::UnboundedPolytope => Error::OriginNotInterior,
        other => other,
    })?;
    // A point is a vertex iff no other point lies on every facet through it.
    let mut on_facets = vec![Vec::new(); cloud.len()];
    for (k, (_, tight)) in facets.iter().enumerate() {
        for &i in tight {
            on_facets[i].push(k);
        }
    }
    let vertices = dd::Incidence::new(&on_facets, facets.len())
        .maximal()
        .into_iter()
        .map(|i| cloud[i].clone())
        .collect();
    let rows = facets.into_iter().map(|(w, _)| Halfspace::unit(w)).collect();
    Ok((
        HalfspaceSystem::new(d, rows).canonical(),
        VertexSystem::new(d, vertices).canonical(),
    ))
}

/// The points among `points` that are vertices of their hull, given the
/// hull's facets.
pub fn extreme_points(points: &VertexSystem, facets: &HalfspaceSystem) -> VertexSystem {
    let cloud = points.canonical().points;
    let on_facets: Vec<Vec<usize>> = cloud
        .iter()
        .map(|p| {
            (0..facets.rows.len())
                .filter(|&k| dot(&facets.rows[k].normal, p) == facets.rows[k].offset)
                .collect()
        })
        .collect();
    let kept = dd::Incidence::new(&on_facets, facets.rows.len())
        .maximal()
        .into_iter()
        .map(|i| cloud[i].clone())
        .collect();
    VertexSystem::new(points.dimension, kept)
}

/// A polytope in either description.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Polytope {
    H(HalfspaceSystem),
    V(VertexSystem),
}

/// Polar body `{y : y . x <= 1 for all x in P}` of a symmetric polytope,
/// returned in the same description as the input.
pub fn polar_dual(p: &Polytope) -> Result<Polytope> {
    match p {
        Polytope::H(h) => {
            let verts = vertex_enumeration(h)?;
            if !verts.is_symmetric() {
                return Err(Error::NotSymmetric);
            }
            let rows = verts.points.into_iter().map(Halfspace::unit).collect();
            Ok(Polytope::H(HalfspaceSystem::new(h.dimension, rows).canonical()))
        }
        Polytope::V(v) => {
            let facets = facet_enumeration(v)?;
            if !extreme_points(v, &facets).is_symmetric() {
                return Err(Error::NotSymmetric);
            }
            let points = facets.rows.into_iter().map(|h| h.normal).collect();
            Ok(Polytope::V(VertexSystem::new(v.dimension, points).canonical()))
        }
    }
}
