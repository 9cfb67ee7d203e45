use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{serde_q, Rational};

/// Geometric tolerances `ε_n = eps0 · ratio^n` for `n <= depth`, accepted only
/// when the summability budget holds:
///
/// `2ε₀ε₁ + ε₁ + Σ_{n≥1} (ε_n + 2ε_nε_{n+1} + ε_{n+1}) < target_eps − ε₀`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    #[serde(with = "serde_q")]
    pub target_eps: Rational,
    #[serde(with = "serde_q")]
    pub eps0: Rational,
    #[serde(with = "serde_q")]
    pub ratio: Rational,
    #[serde(with = "serde_q::vec")]
    pub terms: Vec<Rational>,
    /// Left side of the budget inequality, summed in closed form.
    #[serde(with = "serde_q")]
    pub budget_lhs: Rational,
    /// `target_eps − ε₀ − budget_lhs`, strictly positive.
    #[serde(with = "serde_q")]
    pub slack: Rational,
    /// `Σ_{n ≥ depth} (ε_n + 2ε_nε_{n+1} + ε_{n+1})`, in closed form.
    #[serde(with = "serde_q")]
    pub tail_bound: Rational,
}

pub const DEFAULT_RATIO: (i64, i64) = (1, 4);
pub const DEFAULT_DEPTH: usize = 6;

fn pow(r: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * r)
}

/// Closed form of the budget's left side for `ε_n = e·r^n`.
pub fn budget_lhs(e: &Rational, r: &Rational) -> Rational {
    let one = Rational::one();
    let two = &one + &one;
    let geo = &one - r;
    let geo2 = &one - r * r;
    &two * e * e * r + e * r + e * r / &geo + e * r * r / &geo + &two * e * e * pow(r, 3) / geo2
}

/// Closed form of `Σ_{n ≥ from} (ε_n + 2ε_nε_{n+1} + ε_{n+1})` for `ε_n = e·r^n`.
pub fn tail_from(e: &Rational, r: &Rational, from: usize) -> Rational {
    let one = Rational::one();
    let two = &one + &one;
    e * (&one + r) * pow(r, from) / (&one - r) + two * e * e * pow(r, 2 * from + 1) / (&one - r * r)
}

/// Default `ε₀`: a tenth of the target, or the midpoint between the seed's
/// defect and the target when a tenth does not clear the defect.
pub fn default_eps0(target: &Rational, seed_defect: &Rational) -> Rational {
    let tenth = target / Rational::from_integer(10.into());
    if tenth > *seed_defect {
        tenth
    } else {
        (seed_defect + target) / Rational::from_integer(2.into())
    }
}

pub fn schedule_make(target_eps: &Rational, eps0: &Rational, ratio: &Rational, depth: usize) -> Result<EpsilonSchedule> {
    if !eps0.is_positive() || eps0 >= target_eps {
        return Err(Error::InvalidSchedule(format!(
            "need 0 < eps0 < target_eps, got eps0 = {eps0}, target = {target_eps}"
        )));
    }
    if !ratio.is_positive() || *ratio >= Rational::one() {
        return Err(Error::InvalidSchedule(format!("need 0 < ratio < 1, got {ratio}")));
    }
    let lhs = budget_lhs(eps0, ratio);
    let room = target_eps - eps0;
    if lhs >= room {
        return Err(Error::ScheduleDeficit { deficit: lhs - room });
    }
    let terms = (0..=depth).map(|n| eps0 * pow(ratio, n)).collect();
    Ok(EpsilonSchedule {
        target_eps: target_eps.clone(),
        eps0: eps0.clone(),
        ratio: ratio.clone(),
        terms,
        slack: &room - &lhs,
        budget_lhs: lhs,
        tail_bound: tail_from(eps0, ratio, depth),
    })
}

impl EpsilonSchedule {
    pub fn depth(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn eps(&self, n: usize) -> &Rational {
        &self.terms[n]
    }

    /// Per-step drift allowance `ε_n + 2ε_nε_{n+1} + ε_{n+1}`.
    pub fn step_bound(&self, n: usize) -> Rational {
        let (a, b) = (&self.terms[n], &self.terms[n + 1]);
        a + Rational::from_integer(2.into()) * a * b + b
    }

    /// Re-derives every stored quantity from `(target_eps, eps0, ratio, depth)`.
    pub fn verify(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidSchedule("no terms".into()));
        }
        let fresh = schedule_make(&self.target_eps, &self.eps0, &self.ratio, self.depth())?;
        if fresh != *self {
            return Err(Error::Certificate("schedule differs from its closed form".into()));
        }
        if self.terms.windows(2).any(|w| w[1] >= w[0]) || self.terms.iter().any(|t| !t.is_positive()) {
            return Err(Error::Certificate("schedule terms are not positive and decreasing".into()));
        }
        if self.slack.is_zero() || self.slack.is_negative() {
            return Err(Error::Certificate("schedule has no slack".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    /// Exact partial sums of the budget series, independent of the closed form.
    fn partial_lhs(e: &Rational, r: &Rational, upto: usize) -> Rational {
        let eps = |n: usize| e * pow(r, n);
        let two = Rational::from_integer(2.into());
        let mut s = &two * eps(0) * eps(1) + eps(1);
        for n in 1..=upto {
            s += eps(n) + &two * eps(n) * eps(n + 1) + eps(n + 1);
        }
        s
    }

    #[test]
    fn default_example() {
        let s = schedule_make(&rat(1, 10), &rat(1, 100), &rat(1, 4), 6).unwrap();
        assert_eq!(s.budget_lhs, rat(21, 3125));
        assert_eq!(s.slack, rat(1041, 12500));
        // closed form = partial sum + tail beyond the partial sum
        for k in 1..12 {
            let partial = partial_lhs(&s.eps0, &s.ratio, k);
            assert!(partial < s.budget_lhs);
            assert_eq!(partial + tail_from(&s.eps0, &s.ratio, k + 1), s.budget_lhs);
        }
        s.verify().unwrap();
    }

    #[test]
    fn terms_decrease() {
        let s = schedule_make(&rat(1, 2), &rat(1, 20), &rat(1, 3), 5).unwrap();
        assert_eq!(s.terms.len(), 6);
        assert!(s.terms.windows(2).all(|w| w[1] < w[0]));
        assert_eq!(s.terms[5], rat(1, 20) * rat(1, 243));
    }

    #[test]
    fn rejects_no_room() {
        assert!(matches!(
            schedule_make(&rat(1, 10), &rat(1, 10), &rat(1, 4), 3),
            Err(Error::InvalidSchedule(_))
        ));
        // seed defect 1/2 with target 3/5 needs a small ratio
        let e = default_eps0(&rat(3, 5), &rat(1, 2));
        assert_eq!(e, rat(11, 20));
        match schedule_make(&rat(3, 5), &e, &rat(1, 4), 4) {
            Err(Error::ScheduleDeficit { deficit }) => {
                assert_eq!(deficit, budget_lhs(&e, &rat(1, 4)) - rat(1, 20));
            }
            other => panic!("{other:?}"),
        }
        schedule_make(&rat(3, 5), &e, &rat(1, 50), 4).unwrap();
    }

    #[test]
    fn tail_is_series_remainder() {
        let (e, r) = (rat(1, 7), rat(2, 5));
        let two = Rational::from_integer(2.into());
        let eps = |n: usize| &e * pow(&r, n);
        let whole = tail_from(&e, &r, 0);
        let mut partial = Rational::zero();
        for n in 0..10 {
            assert_eq!(&partial + tail_from(&e, &r, n), whole);
            partial += eps(n) + &two * eps(n) * eps(n + 1) + eps(n + 1);
        }
    }

    #[test]
    fn tampered_schedule_rejected() {
        let mut s = schedule_make(&rat(1, 10), &rat(1, 100), &rat(1, 4), 3).unwrap();
        s.terms[2] = rat(1, 1000);
        assert!(s.verify().is_err());
    }
}
