//! Serialized certificates and their independent verification.
//!
//! A trace stores every space with both descriptions, every map by matrix,
//! and every claimed value as an exact rational. [`verify_trace`] rebuilds
//! the spaces through the kernel, recomputes each claimed quantity and
//! compares exactly; it never re-runs a construction.

use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::amalgam::AmalgamCertificate;
use crate::convex::{Halfspace, HalfspaceSystem, VertexSystem};
use crate::engine::{power_of_half, tail_from, BackAndForthTrace, EmbedTrace, EpsilonSchedule};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::operators::{map_distance, DefectCertificate, LinearMap};
use crate::rational::{format_rational, serde_q, Rational};
use crate::spaces::{PolyhedralSpace, SpaceRef};

/// A space with both descriptions; facets are `normal . x <= 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceRecord {
    pub dimension: usize,
    #[serde(with = "serde_q::vecvec")]
    pub facets: Vec<Vec<Rational>>,
    #[serde(with = "serde_q::vecvec")]
    pub vertices: Vec<Vec<Rational>>,
}

impl SpaceRecord {
    pub fn of(space: &PolyhedralSpace) -> Self {
        Self {
            dimension: space.dimension(),
            facets: space.ball_facets().rows.iter().map(|h| h.normal.clone()).collect(),
            vertices: space.ball_vertices().points.clone(),
        }
    }

    /// Rebuilds the space, checking that both descriptions agree.
    pub fn rebuild(&self) -> Result<PolyhedralSpace> {
        let d = self.dimension;
        if self.facets.iter().chain(&self.vertices).any(|v| v.len() != d) {
            return Err(Error::Certificate("space record rows have the wrong length".into()));
        }
        let facets = HalfspaceSystem::new(d, self.facets.iter().cloned().map(Halfspace::unit).collect());
        let vertices = VertexSystem::new(d, self.vertices.clone());
        if facets.canonical().rows.len() != self.facets.len() || vertices.canonical().points.len() != self.vertices.len() {
            return Err(Error::Certificate("space record has repeated rows".into()));
        }
        PolyhedralSpace::from_parts(facets, vertices)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapRecord {
    pub domain: usize,
    pub codomain: usize,
    pub matrix: Matrix,
}

/// Interns spaces so that each distinct space is stored once.
#[derive(Default)]
struct SpaceTable {
    spaces: Vec<SpaceRef>,
}

impl SpaceTable {
    fn index(&mut self, s: &SpaceRef) -> usize {
        if let Some(i) = self.spaces.iter().position(|t| Arc::ptr_eq(t, s) || **t == **s) {
            return i;
        }
        self.spaces.push(s.clone());
        self.spaces.len() - 1
    }

    fn map(&mut self, f: &LinearMap) -> MapRecord {
        MapRecord {
            domain: self.index(f.domain()),
            codomain: self.index(f.codomain()),
            matrix: f.matrix().clone(),
        }
    }

    fn records(&self) -> Vec<SpaceRecord> {
        self.spaces.iter().map(|s| SpaceRecord::of(s)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgamRecord {
    pub f: MapRecord,
    pub i: MapRecord,
    pub j: MapRecord,
    #[serde(with = "serde_q")]
    pub eps: Rational,
    #[serde(with = "serde_q")]
    pub cutoff: Rational,
    #[serde(with = "serde_q")]
    pub bound_achieved: Rational,
    pub f_defect: DefectCertificate,
    pub i_defect: DefectCertificate,
    pub j_defect: DefectCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub f: MapRecord,
    pub f_defect: DefectCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub g: MapRecord,
    pub g_defect: DefectCertificate,
    pub x_inclusion: MapRecord,
    pub y_inclusion: MapRecord,
    #[serde(with = "serde_q")]
    pub back: Rational,
    #[serde(with = "serde_q")]
    pub forth: Rational,
    #[serde(with = "serde_q")]
    pub drift: Rational,
    #[serde(with = "serde_q")]
    pub drift_bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackAndForthRecord {
    pub schedule: EpsilonSchedule,
    pub seed: MapRecord,
    pub levels: Vec<LevelRecord>,
    pub steps: Vec<StepRecord>,
    pub h_restricted: MapRecord,
    pub seed_in_final: MapRecord,
    #[serde(with = "serde_q")]
    pub final_distance: Rational,
    #[serde(with = "serde_q::vec")]
    pub budget_partials: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedStepRecord {
    pub x_inclusion: MapRecord,
    pub s_inclusion: MapRecord,
    #[serde(with = "serde_q")]
    pub drift: Rational,
    #[serde(with = "serde_q")]
    pub drift_bound: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedRecord {
    pub maps: Vec<MapRecord>,
    pub defects: Vec<DefectCertificate>,
    pub steps: Vec<EmbedStepRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    Amalgam(Box<AmalgamRecord>),
    BackAndForth(Box<BackAndForthRecord>),
    Embed(EmbedRecord),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub spaces: Vec<SpaceRecord>,
    pub certificate: Certificate,
}

impl Trace {
    pub fn amalgam(f: &LinearMap, cert: &AmalgamCertificate) -> Self {
        let mut t = SpaceTable::default();
        let record = AmalgamRecord {
            f: t.map(f),
            i: t.map(&cert.i),
            j: t.map(&cert.j),
            eps: cert.epsilon_used.clone(),
            cutoff: cert.cutoff.clone(),
            bound_achieved: cert.bound_achieved.clone(),
            f_defect: cert.f_defect.clone(),
            i_defect: cert.i_defect.clone(),
            j_defect: cert.j_defect.clone(),
        };
        Self {
            spaces: t.records(),
            certificate: Certificate::Amalgam(Box::new(record)),
        }
    }

    pub fn back_and_forth(trace: &BackAndForthTrace) -> Self {
        let mut t = SpaceTable::default();
        let record = BackAndForthRecord {
            schedule: trace.schedule.clone(),
            seed: t.map(&trace.seed),
            levels: trace
                .levels
                .iter()
                .map(|l| LevelRecord {
                    f: t.map(&l.f),
                    f_defect: l.f_defect.clone(),
                })
                .collect(),
            steps: trace
                .steps
                .iter()
                .map(|s| StepRecord {
                    g: t.map(&s.g),
                    g_defect: s.g_defect.clone(),
                    x_inclusion: t.map(&s.x_inclusion),
                    y_inclusion: t.map(&s.y_inclusion),
                    back: s.back.clone(),
                    forth: s.forth.clone(),
                    drift: s.drift.clone(),
                    drift_bound: s.drift_bound.clone(),
                })
                .collect(),
            h_restricted: t.map(&trace.h_restricted),
            seed_in_final: t.map(&trace.seed_in_final),
            final_distance: trace.final_distance.clone(),
            budget_partials: trace.budget_partials.clone(),
        };
        Self {
            spaces: t.records(),
            certificate: Certificate::BackAndForth(Box::new(record)),
        }
    }

    pub fn embed(trace: &EmbedTrace) -> Self {
        let mut t = SpaceTable::default();
        let record = EmbedRecord {
            maps: trace.maps.iter().map(|m| t.map(m)).collect(),
            defects: trace.defects.clone(),
            steps: trace
                .steps
                .iter()
                .map(|s| EmbedStepRecord {
                    x_inclusion: t.map(&s.x_inclusion),
                    s_inclusion: t.map(&s.s_inclusion),
                    drift: s.drift.clone(),
                    drift_bound: s.drift_bound.clone(),
                })
                .collect(),
        };
        Self {
            spaces: t.records(),
            certificate: Certificate::Embed(record),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.certificate {
            Certificate::Amalgam(_) => "amalgam",
            Certificate::BackAndForth(_) => "back_and_forth",
            Certificate::Embed(_) => "embed",
        }
    }
}

/// One named pass/fail line of a verification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            detail: detail.into(),
        }
    }
}

fn q(v: &Rational) -> String {
    format_rational(v)
}

struct Verifier {
    spaces: Vec<SpaceRef>,
    checks: Vec<Check>,
}

impl Verifier {
    fn new(trace: &Trace) -> Result<Self> {
        let mut spaces = Vec::with_capacity(trace.spaces.len());
        let mut checks = Vec::new();
        for (k, rec) in trace.spaces.iter().enumerate() {
            match rec.rebuild() {
                Ok(s) => spaces.push(Arc::new(s)),
                Err(e) => {
                    checks.push(Check::new(format!("space {k}"), false, e.to_string()));
                    return Ok(Self { spaces, checks });
                }
            }
        }
        checks.push(Check::new("spaces", true, format!("{} spaces rebuilt", spaces.len())));
        Ok(Self { spaces, checks })
    }

    fn failed(&self) -> bool {
        self.checks.iter().any(|c| !c.pass)
    }

    fn map(&self, r: &MapRecord) -> Result<LinearMap> {
        let get = |i: usize| {
            self.spaces
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Certificate(format!("space index {i} out of range")))
        };
        LinearMap::new(get(r.domain)?, get(r.codomain)?, r.matrix.clone())
    }

    fn push(&mut self, name: impl Into<String>, pass: bool, detail: impl Into<String>) -> bool {
        self.checks.push(Check::new(name, pass, detail));
        pass
    }

    /// Claimed defect certificate against the map, recomputed by the kernel.
    fn defect(&mut self, name: &str, f: &LinearMap, claimed: &DefectCertificate) -> bool {
        match claimed.verify(f) {
            Ok(()) => self.push(name, true, format!("epsilon* = {}", q(&claimed.epsilon_star))),
            Err(e) => self.push(name, false, e.to_string()),
        }
    }

    /// Claimed distance against recomputation.
    fn distance(&mut self, name: &str, a: &LinearMap, b: &LinearMap, claimed: &Rational) -> Result<bool> {
        let fresh = map_distance(a, b)?;
        Ok(self.push(
            name,
            fresh == *claimed,
            format!("claimed {}, recomputed {}", q(claimed), q(&fresh)),
        ))
    }

    fn inclusion(&mut self, name: &str, f: &LinearMap) -> Result<bool> {
        let d = f.defect()?;
        Ok(self.push(name, d.is_isometry(), format!("epsilon* = {}", q(&d.epsilon_star))))
    }
}

/// Re-checks every certificate in a trace. Structural problems (dangling
/// indices, shape mismatches) are errors; failed inequalities are reported
/// as failing checks.
pub fn verify_trace(trace: &Trace) -> Result<Vec<Check>> {
    let mut v = Verifier::new(trace)?;
    if v.failed() {
        return Ok(v.checks);
    }
    match &trace.certificate {
        Certificate::Amalgam(r) => verify_amalgam(&mut v, r)?,
        Certificate::BackAndForth(r) => verify_back_and_forth(&mut v, r)?,
        Certificate::Embed(r) => verify_embed(&mut v, r)?,
    }
    Ok(v.checks)
}

fn verify_amalgam(v: &mut Verifier, r: &AmalgamRecord) -> Result<()> {
    let f = v.map(&r.f)?;
    let i = v.map(&r.i)?;
    let j = v.map(&r.j)?;
    if i.domain() != f.domain() || j.domain() != f.codomain() || i.codomain() != j.codomain() {
        return Err(Error::Certificate("amalgam maps do not fit together".into()));
    }
    v.defect("defect(f)", &f, &r.f_defect);
    v.push(
        "eps above defect(f)",
        r.eps > r.f_defect.epsilon_star,
        format!("{} > {}", q(&r.eps), q(&r.f_defect.epsilon_star)),
    );
    // A zero cutoff marks the trivial amalgam of an exact isometry.
    let trivial = r.cutoff.is_zero()
        && r.f_defect.is_isometry()
        && *i.matrix() == *f.matrix()
        && *j.matrix() == Matrix::identity(f.codomain().dimension());
    v.push(
        "cutoff",
        trivial || r.cutoff == &r.eps / (Rational::one() + &r.eps),
        q(&r.cutoff),
    );
    if v.defect("defect(i)", &i, &r.i_defect) {
        v.push("i isometric", r.i_defect.is_isometry(), q(&r.i_defect.epsilon_star));
    }
    if v.defect("defect(j)", &j, &r.j_defect) {
        v.push("j isometric", r.j_defect.is_isometry(), q(&r.j_defect.epsilon_star));
    }
    v.distance("bound_achieved = ||j∘f - i||", &j.compose(&f)?, &i, &r.bound_achieved)?;
    v.push(
        "bound_achieved <= eps",
        r.bound_achieved <= r.eps,
        format!("{} <= {}", q(&r.bound_achieved), q(&r.eps)),
    );
    Ok(())
}

fn verify_back_and_forth(v: &mut Verifier, r: &BackAndForthRecord) -> Result<()> {
    let s = &r.schedule;
    match s.verify() {
        Ok(()) => v.push("schedule", true, format!("slack {}", q(&s.slack))),
        Err(e) => v.push("schedule", false, e.to_string()),
    };
    let depth = s.depth();
    if r.levels.len() != depth + 1 || r.steps.len() != depth || r.budget_partials.len() != depth + 1 {
        return Err(Error::Certificate("trace length does not match the schedule depth".into()));
    }
    let seed = v.map(&r.seed)?;
    let levels: Vec<LinearMap> = r.levels.iter().map(|l| v.map(&l.f)).collect::<Result<_>>()?;
    // f_0 is the seed corestricted to its image: the seed read in Y_0.
    let y0 = levels[0].codomain();
    let f0_ok = levels[0].domain() == seed.domain()
        && levels[0].matrix() == &Matrix::identity(seed.domain().dimension())
        && y0.dimension() == seed.domain().dimension();
    v.push("f_0 is the seed onto its image", f0_ok, "");
    let seed_image = seed.codomain().subspace_ball(&seed.matrix().columns())?;
    v.push("Y_0 = f[X] with induced norm", seed_image == **y0, "");

    for (n, l) in r.levels.iter().enumerate() {
        if v.defect(&format!("level {n}: defect(f_n)"), &levels[n], &l.f_defect) {
            v.push(
                format!("level {n}: (1) f_n is an eps_n-isometry"),
                l.f_defect.is_epsilon_isometry(s.eps(n)),
                format!("{} < {}", q(&l.f_defect.epsilon_star), q(s.eps(n))),
            );
        }
    }
    for (n, st) in r.steps.iter().enumerate() {
        let f_n = &levels[n];
        let f_next = &levels[n + 1];
        let g = v.map(&st.g)?;
        let xi = v.map(&st.x_inclusion)?;
        let yi = v.map(&st.y_inclusion)?;
        let fits = xi.domain() == f_n.domain()
            && xi.codomain() == f_next.domain()
            && yi.domain() == f_n.codomain()
            && yi.codomain() == f_next.codomain()
            && g.domain() == f_n.codomain()
            && g.codomain() == f_next.domain();
        if !fits {
            return Err(Error::Certificate(format!("step {n}: maps do not fit together")));
        }
        v.inclusion(&format!("step {n}: X_n -> X_(n+1) isometric"), &xi)?;
        v.inclusion(&format!("step {n}: Y_n -> Y_(n+1) isometric"), &yi)?;
        let eps_n = s.eps(n);
        let eps_next = s.eps(n + 1);
        if v.defect(&format!("step {n}: defect(g_n)"), &g, &st.g_defect) {
            v.push(
                format!("step {n}: (2) g_n is an eps_(n+1)-isometry"),
                st.g_defect.is_epsilon_isometry(eps_next),
                format!("{} < {}", q(&st.g_defect.epsilon_star), q(eps_next)),
            );
        }
        if v.distance(&format!("step {n}: ||g_n f_n - id||"), &g.compose(f_n)?, &xi, &st.back)? {
            v.push(
                format!("step {n}: (3)"),
                st.back <= *eps_n,
                format!("{} <= {}", q(&st.back), q(eps_n)),
            );
        }
        if v.distance(&format!("step {n}: ||f_(n+1) g_n - id||"), &f_next.compose(&g)?, &yi, &st.forth)? {
            v.push(
                format!("step {n}: (4)"),
                st.forth <= *eps_next,
                format!("{} <= {}", q(&st.forth), q(eps_next)),
            );
        }
        let bound = s.step_bound(n);
        v.push(
            format!("step {n}: drift allowance"),
            st.drift_bound == bound,
            q(&st.drift_bound),
        );
        if v.distance(&format!("step {n}: drift"), &f_next.compose(&xi)?, &yi.compose(f_n)?, &st.drift)? {
            v.push(
                format!("step {n}: drift bound"),
                st.drift <= bound,
                format!("{} <= {}", q(&st.drift), q(&bound)),
            );
        }
    }

    let h = v.map(&r.h_restricted)?;
    let seed_final = v.map(&r.seed_in_final)?;
    let last = &levels[depth];
    let x_to_last = Matrix::identity(seed.domain().dimension())
        .vstack(&Matrix::zeros(last.domain().dimension() - seed.domain().dimension(), seed.domain().dimension()));
    let y_to_last = Matrix::identity(y0.dimension())
        .vstack(&Matrix::zeros(last.codomain().dimension() - y0.dimension(), y0.dimension()));
    v.push(
        "h_N restricted to X",
        h.domain() == seed.domain() && h.codomain() == last.codomain() && *h.matrix() == last.matrix().mul(&x_to_last),
        "",
    );
    v.push(
        "seed read in Y_N",
        seed_final.domain() == seed.domain()
            && seed_final.codomain() == last.codomain()
            && *seed_final.matrix() == y_to_last.mul(levels[0].matrix()),
        "",
    );
    if v.distance("final distance", &h, &seed_final, &r.final_distance)? {
        v.push(
            "final distance < target",
            r.final_distance < s.target_eps,
            format!("{} < {}", q(&r.final_distance), q(&s.target_eps)),
        );
    }
    let mut sum = Rational::zero();
    for k in 0..=depth {
        let expected = &sum + tail_from(&s.eps0, &s.ratio, k);
        v.push(
            format!("budget after {k} steps"),
            r.budget_partials[k] == expected && expected < s.target_eps,
            format!("{} < {}", q(&r.budget_partials[k]), q(&s.target_eps)),
        );
        if k < depth {
            sum += &r.steps[k].drift;
        }
    }
    v.push(
        "final distance within summed drift",
        r.final_distance <= sum,
        format!("{} <= {}", q(&r.final_distance), q(&sum)),
    );
    Ok(())
}

fn verify_embed(v: &mut Verifier, r: &EmbedRecord) -> Result<()> {
    let depth = r.steps.len();
    if r.maps.len() != depth + 1 || r.defects.len() != depth + 1 {
        return Err(Error::Certificate("trace length does not match its depth".into()));
    }
    let maps: Vec<LinearMap> = r.maps.iter().map(|m| v.map(m)).collect::<Result<_>>()?;
    v.push(
        "f_0 = 0 on the zero space",
        maps[0].domain().dimension() == 0 && maps[0].codomain().dimension() == 0,
        "",
    );
    for (n, (f, d)) in maps.iter().zip(&r.defects).enumerate() {
        if v.defect(&format!("level {n}: defect(f_n)"), f, d) {
            let t = power_of_half(n);
            v.push(
                format!("level {n}: (i) defect below 2^-{n}"),
                d.is_epsilon_isometry(&t),
                format!("{} < {}", q(&d.epsilon_star), q(&t)),
            );
        }
    }
    for (n, st) in r.steps.iter().enumerate() {
        let xi = v.map(&st.x_inclusion)?;
        let si = v.map(&st.s_inclusion)?;
        let (f_n, f_next) = (&maps[n], &maps[n + 1]);
        if xi.domain() != f_n.domain() || xi.codomain() != f_next.domain() || si.domain() != f_n.codomain() || si.codomain() != f_next.codomain() {
            return Err(Error::Certificate(format!("step {n}: maps do not fit together")));
        }
        v.inclusion(&format!("step {n}: X_n -> X_(n+1) isometric"), &xi)?;
        v.inclusion(&format!("step {n}: S_n -> S_(n+1) isometric"), &si)?;
        let bound = (Rational::one() + power_of_half(n + 1)) * power_of_half(n);
        v.push(format!("step {n}: drift allowance"), st.drift_bound == bound, q(&st.drift_bound));
        if v.distance(&format!("step {n}: drift"), &f_next.compose(&xi)?, &si.compose(f_n)?, &st.drift)? {
            let two = power_of_half(n) * Rational::from_integer(2.into());
            v.push(
                format!("step {n}: (ii) drift below 2·2^-{n}"),
                st.drift < bound && bound <= two,
                format!("{} < {}", q(&st.drift), q(&bound)),
            );
        }
    }
    Ok(())
}
