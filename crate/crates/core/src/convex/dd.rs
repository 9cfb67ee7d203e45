//! Double description method over integer rays.
//!
//! Enumerates the vertices of `{x : a_i . x <= b_i}` with every `b_i > 0` by
//! computing the extreme rays of the homogenized cone
//! `{(x, t) : b_i t - a_i . x >= 0, t >= 0}`. Rays are kept as primitive
//! integer vectors and adjacency uses the combinatorial zero-set test.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::Rational;

#[derive(Clone, Debug)]
struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    fn new(bits: usize) -> Self {
        Self {
            words: vec![0; bits.div_ceil(64)],
        }
    }

    fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn is_superset(&self, other: &BitSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == *b)
    }

    fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }
}

/// Subset-closed family of index sets, for incidence comparisons.
pub(crate) struct Incidence {
    sets: Vec<BitSet>,
}

impl Incidence {
    /// `members[k]` lists the indices (below `universe`) in set `k`.
    pub(crate) fn new(members: &[Vec<usize>], universe: usize) -> Self {
        let sets = members
            .iter()
            .map(|m| {
                let mut b = BitSet::new(universe);
                for &i in m {
                    b.insert(i);
                }
                b
            })
            .collect();
        Self { sets }
    }

    /// Indices `k` whose set is non-empty and not contained in any other set.
    pub(crate) fn maximal(&self) -> Vec<usize> {
        (0..self.sets.len())
            .filter(|&k| {
                self.sets[k].len() > 0
                    && !self
                        .sets
                        .iter()
                        .enumerate()
                        .any(|(o, s)| o != k && s.is_superset(&self.sets[k]))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
struct Ray {
    v: Vec<BigInt>,
    zero: BitSet,
}

/// Scales a rational vector to the primitive integer vector on the same ray.
pub(crate) fn primitive(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    let ints: Vec<BigInt> = v.iter().map(|q| q.numer() * (&lcm / q.denom())).collect();
    normalize(ints)
}

fn normalize(v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|x| x / &g).collect()
}

fn idot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).fold(BigInt::zero(), |acc, (x, y)| acc + x * y)
}

/// Vertices of a bounded polytope given by rows `(normal, offset)` with
/// strictly positive offsets, each with the indices of the rows tight at it.
pub(crate) fn enumerate_vertices(
    dim: usize,
    rows: &[(Vec<Rational>, Rational)],
) -> Result<Vec<(Vec<Rational>, Vec<usize>)>> {
    debug_assert!(rows.iter().all(|(_, b)| b.is_positive()));
    let d = dim + 1;
    let mut cone: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|(a, b)| {
            let mut c: Vec<Rational> = a.iter().map(|x| -x).collect();
            c.push(b.clone());
            primitive(&c)
        })
        .collect();
    let mut t_row = vec![BigInt::zero(); d];
    t_row[dim] = BigInt::one();
    cone.push(t_row);

    let as_rational = |r: &[BigInt]| -> Vec<Rational> {
        r.iter().map(|x| Rational::from_integer(x.clone())).collect()
    };

    // Greedy choice of d independent rows for the initial simplicial cone.
    let mut chosen: Vec<usize> = Vec::with_capacity(d);
    let mut current = Matrix::zeros(0, d);
    for (i, r) in cone.iter().enumerate() {
        let trial = current.vstack(&Matrix::from_rows(vec![as_rational(r)], d));
        if trial.rank() > chosen.len() {
            current = trial;
            chosen.push(i);
            if chosen.len() == d {
                break;
            }
        }
    }
    if chosen.len() < d {
        return Err(Error::UnboundedPolytope);
    }
    let inv = current.inverse().expect("chosen rows are independent");

    let total = cone.len();
    let mut processed = vec![false; total];
    let mut rays: Vec<Ray> = Vec::with_capacity(d);
    for j in 0..d {
        let v = primitive(&inv.column(j));
        let mut zero = BitSet::new(total);
        for &i in &chosen {
            if idot(&cone[i], &v).is_zero() {
                zero.insert(i);
            }
        }
        rays.push(Ray { v, zero });
    }
    for &i in &chosen {
        processed[i] = true;
    }

    for (i, row) in cone.iter().enumerate() {
        if processed[i] {
            continue;
        }
        processed[i] = true;
        let values: Vec<BigInt> = rays.iter().map(|r| idot(row, &r.v)).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_negative()).collect();
        if neg.is_empty() {
            for (r, v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    r.zero.insert(i);
                }
            }
            continue;
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k].is_positive()).collect();

        let mut fresh = Vec::new();
        for &p in &pos {
            for &n in &neg {
                let common = rays[p].zero.intersection(&rays[n].zero);
                if common.len() + 2 < d {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != n && r.zero.is_superset(&common));
                if blocked {
                    continue;
                }
                let vp = &values[p];
                let vn = -&values[n];
                let v: Vec<BigInt> = rays[n]
                    .v
                    .iter()
                    .zip(&rays[p].v)
                    .map(|(a, b)| vp * a + &vn * b)
                    .collect();
                let mut zero = common;
                zero.insert(i);
                fresh.push(Ray {
                    v: normalize(v),
                    zero,
                });
            }
        }

        let mut next = Vec::with_capacity(rays.len() + fresh.len());
        for (mut r, v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            if v.is_zero() {
                r.zero.insert(i);
            }
            next.push(r);
        }
        next.extend(fresh);
        rays = next;
    }

    let mut vertices = Vec::with_capacity(rays.len());
    for r in rays {
        let t = &r.v[dim];
        if t.is_zero() {
            return Err(Error::UnboundedPolytope);
        }
        let t = Rational::from_integer(t.clone());
        let point = r.v[..dim]
            .iter()
            .map(|x| Rational::from_integer(x.clone()) / &t)
            .collect();
        let tight = (0..rows.len()).filter(|&i| r.zero.contains(i)).collect();
        vertices.push((point, tight));
    }
    vertices.sort();
    vertices.dedup_by(|a, b| a.0 == b.0);
    Ok(vertices)
}
