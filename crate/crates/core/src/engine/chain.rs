use std::sync::Arc;

use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::amalgam::{pushout_l1, PushoutCertificate};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operators::LinearMap;
use crate::rational::{serde_q, Rational};
use crate::spaces::{PolyhedralSpace, SpaceRef};

/// One request served by [`ChainSpace::gurarii_extend`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleEntry {
    /// Index of the stage the request appended.
    pub stage: usize,
    pub subspace_dim: usize,
    pub extension_dim: usize,
    #[serde(with = "serde_q")]
    pub delta: Rational,
}

/// An increasing chain of polyhedral spaces joined by exact isometries.
///
/// The first `presentation_len` stages are the given presentation; the oracle
/// appends further stages on top.
#[derive(Clone, Debug)]
pub struct ChainSpace {
    name: String,
    stages: Vec<SpaceRef>,
    inclusions: Vec<LinearMap>,
    presentation_len: usize,
    oracle_log: Vec<OracleEntry>,
}

/// Result of one oracle request.
#[derive(Clone, Debug)]
pub struct Extension {
    /// Exact isometry `Z -> new top` with `h∘k` equal to the inclusion of `X`.
    pub h: LinearMap,
    /// Inclusion of `X` into the new top.
    pub x_embed: LinearMap,
    pub pushout: PushoutCertificate,
}

impl ChainSpace {
    pub fn new(name: impl Into<String>, stage0: SpaceRef) -> Self {
        Self {
            name: name.into(),
            stages: vec![stage0],
            inclusions: Vec::new(),
            presentation_len: 1,
            oracle_log: Vec::new(),
        }
    }

    /// Builds a presented chain, re-verifying that every inclusion is an exact
    /// isometry between consecutive stages.
    pub fn from_stages(name: impl Into<String>, stages: Vec<SpaceRef>, inclusions: Vec<Matrix>) -> Result<Self> {
        let mut stages = stages.into_iter();
        let first = stages.next().ok_or_else(|| Error::InvalidArgument("chain has no stages".into()))?;
        let mut chain = Self::new(name, first);
        let rest: Vec<SpaceRef> = stages.collect();
        if rest.len() != inclusions.len() {
            return Err(Error::InvalidArgument(format!(
                "{} inclusions given for {} stages",
                inclusions.len(),
                rest.len() + 1
            )));
        }
        for (space, matrix) in rest.into_iter().zip(inclusions) {
            chain.push_stage(space, matrix)?;
        }
        chain.presentation_len = chain.stages.len();
        Ok(chain)
    }

    /// Appends a presentation stage.
    pub fn push_stage(&mut self, space: SpaceRef, matrix: Matrix) -> Result<()> {
        let inclusion = LinearMap::new(self.top().clone(), space.clone(), matrix)?;
        let defect = inclusion.defect()?;
        if !defect.is_isometry() {
            return Err(Error::NotIsometric(defect.epsilon_star));
        }
        self.stages.push(space);
        self.inclusions.push(inclusion);
        if self.oracle_log.is_empty() {
            self.presentation_len = self.stages.len();
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn presentation_len(&self) -> usize {
        self.presentation_len
    }

    pub fn stage(&self, n: usize) -> &SpaceRef {
        &self.stages[n]
    }

    pub fn stages(&self) -> &[SpaceRef] {
        &self.stages
    }

    pub fn inclusion(&self, n: usize) -> &LinearMap {
        &self.inclusions[n]
    }

    pub fn inclusions(&self) -> &[LinearMap] {
        &self.inclusions
    }

    pub fn top(&self) -> &SpaceRef {
        self.stages.last().expect("chains are non-empty")
    }

    pub fn oracle_log(&self) -> &[OracleEntry] {
        &self.oracle_log
    }

    /// Matrix of the composite inclusion of stage `from` into the top.
    pub fn lift_matrix(&self, from: usize) -> Matrix {
        let n = self.stages[from].dimension();
        self.inclusions[from..]
            .iter()
            .fold(Matrix::identity(n), |acc, inc| inc.matrix().mul(&acc))
    }

    /// Inclusion of stage `from` into the top.
    pub fn lift(&self, from: usize) -> LinearMap {
        LinearMap::new(self.stages[from].clone(), self.top().clone(), self.lift_matrix(from))
            .expect("inclusion shapes compose")
    }

    /// Re-targets a map into the stage-`from` space at the current top.
    pub fn lift_map(&self, map: &LinearMap, from: usize) -> Result<LinearMap> {
        self.lift(from).compose(map)
    }

    /// The Gurariĭ oracle: given `X ⊆ top` (via `x_embed`) and an isometric
    /// embedding `k: X -> Z`, appends a stage `W ⊇ top` and returns an exact
    /// isometry `h: Z -> W` with `h∘k = x_embed` (read in `W`).
    ///
    /// `W` is the ℓ1-pushout of `k` and `x_embed`; requests are served
    /// exactly, which meets any `δ > 0`.
    pub fn gurarii_extend(&mut self, x_embed: &LinearMap, k: &LinearMap, delta: &Rational) -> Result<Extension> {
        if !delta.is_positive() {
            return Err(Error::InvalidArgument("delta must be positive".into()));
        }
        if **x_embed.codomain() != **self.top() {
            return Err(Error::SpaceMismatch);
        }
        let x_defect = x_embed.defect()?;
        if !x_defect.is_isometry() {
            return Err(Error::NotIsometric(x_defect.epsilon_star));
        }
        let pushout = pushout_l1(k, x_embed)?;
        let h = pushout.f_prime.clone();
        let old_top = self.top().clone();
        let x_new = pushout.y_embed.compose(x_embed)?;
        self.stages.push(pushout.w.clone());
        self.inclusions.push(LinearMap::new(old_top, pushout.w.clone(), pushout.y_embed.matrix().clone())?);
        self.oracle_log.push(OracleEntry {
            stage: self.stages.len() - 1,
            subspace_dim: x_embed.domain().dimension(),
            extension_dim: k.codomain().dimension(),
            delta: delta.clone(),
        });
        if h.matrix().mul(k.matrix()) != *x_new.matrix() {
            return Err(Error::Certificate("oracle map does not fix the subspace".into()));
        }
        Ok(Extension {
            h,
            x_embed: x_new,
            pushout,
        })
    }
}

/// A chain with a single repeated stage, handy for tests and defaults.
pub fn constant_chain(name: &str, space: PolyhedralSpace, stages: usize) -> ChainSpace {
    let space = Arc::new(space);
    let n = space.dimension();
    let mut chain = ChainSpace::new(name, space.clone());
    for _ in 1..stages {
        chain
            .push_stage(space.clone(), Matrix::identity(n))
            .expect("identity is an isometry");
    }
    chain
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn line() -> SpaceRef {
        Arc::new(PolyhedralSpace::line())
    }

    #[test]
    fn extension_into_a_square_reproduces_the_square() {
        let mut chain = constant_chain("E", PolyhedralSpace::line(), 1);
        let x_embed = LinearMap::identity(chain.top().clone());
        let square = Arc::new(PolyhedralSpace::l_inf(2));
        let k = LinearMap::new(line(), square.clone(), Matrix::from_rows(vec![vec![int(1)], vec![int(0)]], 1)).unwrap();
        let ext = chain.gurarii_extend(&x_embed, &k, &rat(1, 10)).unwrap();

        assert_eq!(chain.len(), 2);
        assert_eq!(chain.presentation_len(), 1);
        assert_eq!(chain.oracle_log().len(), 1);
        assert_eq!(chain.oracle_log()[0].stage, 1);
        assert_eq!(chain.top().dimension(), 2);
        // The pushout along the whole top is the square itself.
        assert_eq!(chain.top().ball_vertices().points.len(), 4);
        assert!(ext.h.defect().unwrap().is_isometry());
        assert!(chain.inclusion(0).defect().unwrap().is_isometry());
        assert_eq!(ext.h.matrix().mul(k.matrix()), *ext.x_embed.matrix());
    }

    #[test]
    fn trivial_extension_adds_no_dimension() {
        let plane = PolyhedralSpace::l1(2);
        let mut chain = constant_chain("E", plane, 2);
        let top = chain.top().clone();
        let (x, x_embed) = top.subspace(&[vec![int(1), int(0)]]).unwrap();
        let k = LinearMap::identity(x);
        let ext = chain.gurarii_extend(&x_embed, &k, &rat(1, 2)).unwrap();
        assert_eq!(chain.top().dimension(), 2);
        let step = chain.inclusion(1);
        assert_eq!(step.matrix().rank(), 2);
        assert!(step.defect().unwrap().is_isometry());
        assert!(ext.h.defect().unwrap().is_isometry());
        assert_eq!(chain.oracle_log().len(), 1);
    }

    #[test]
    fn extension_rejects_bad_requests() {
        let mut chain = constant_chain("E", PolyhedralSpace::line(), 1);
        let id = LinearMap::identity(chain.top().clone());
        assert!(matches!(chain.gurarii_extend(&id, &id, &int(0)), Err(Error::InvalidArgument(_))));
        let shrink = LinearMap::new(line(), chain.top().clone(), Matrix::scalar(1, &rat(1, 2))).unwrap();
        assert!(matches!(
            chain.gurarii_extend(&shrink, &id, &rat(1, 2)),
            Err(Error::NotIsometric(_))
        ));
        assert!(chain.oracle_log().is_empty());
    }

    #[test]
    fn lifting_composes_inclusions() {
        let stages: Vec<SpaceRef> = (1..=3).map(|d| Arc::new(PolyhedralSpace::l_inf(d))).collect();
        let inc = vec![
            Matrix::from_rows(vec![vec![int(1)], vec![int(0)]], 1),
            Matrix::from_rows(vec![vec![int(1), int(0)], vec![int(0), int(1)], vec![int(0), int(0)]], 2),
        ];
        let chain = ChainSpace::from_stages("cube", stages, inc).unwrap();
        assert_eq!(chain.lift(0).apply(&[int(5)]), vec![int(5), int(0), int(0)]);
        let bad = ChainSpace::from_stages(
            "bad",
            vec![line(), Arc::new(PolyhedralSpace::l1(2))],
            vec![Matrix::from_rows(vec![vec![int(1)], vec![int(1)]], 1)],
        );
        assert!(bad.is_err());
    }
}
