//! Gambler's ruin closed forms on `{0, .., b}` with absorbing ends.
//!
//! For up-probability `p != 1/2` and `r = (1-p)/p`:
//!
//! ```text
//! P(hit b first) = (r^s - 1)/(r^b - 1)
//! P(hit 0 first) = (r^b - r^s)/(r^b - 1)
//! E[T]           = s/(1-2p) - b/(1-2p) * (1 - r^s)/(1 - r^b)
//! ```
//!
//! Evaluation goes through `expm1(x ln r)` so the forms stay accurate for
//! `p` near 1/2; `|p - 1/2| >= 1e-6` is still required because the forms
//! are singular at 1/2 itself.

use crate::protocol::SimRng;
use crate::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// A biased walk with absorbing barriers at 0 and `b`, started at `s`.
#[derive(Clone, Copy, Debug)]
pub struct GamblersRuinSpec {
    /// Probability of stepping up.
    pub p: f64,
    /// Upper barrier `b >= 1`.
    pub barrier: u64,
    /// Start position, `0 <= s <= b`.
    pub start: u64,
}

#[derive(Clone, Copy, Debug)]
pub struct RuinOutcome {
    pub p_hit_barrier: f64,
    pub p_hit_zero: f64,
    pub expected_steps: f64,
}

impl GamblersRuinSpec {
    fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(Error::RuinInvalid(format!("p must lie in (0,1), got {}", self.p)));
        }
        if (self.p - 0.5).abs() < 1e-6 {
            return Err(Error::RuinSingularP);
        }
        if self.barrier == 0 {
            return Err(Error::RuinInvalid("barrier must be at least 1".into()));
        }
        if self.start > self.barrier {
            return Err(Error::RuinInvalid(format!(
                "start {} beyond barrier {}",
                self.start, self.barrier
            )));
        }
        Ok(())
    }
}

/// Closed-form absorption probabilities and expected absorption time.
pub fn gamblers_ruin(spec: &GamblersRuinSpec) -> Result<RuinOutcome> {
    spec.validate()?;
    let p = spec.p;
    let b = spec.barrier as f64;
    let s = spec.start as f64;
    let log_r = ((1.0 - p) / p).ln();

    // (r^s - 1)/(r^b - 1), factored to avoid overflow when r > 1
    let ratio = if log_r <= 0.0 {
        f64::exp_m1(s * log_r) / f64::exp_m1(b * log_r)
    } else {
        ((s - b) * log_r).exp() * f64::exp_m1(-s * log_r) / f64::exp_m1(-b * log_r)
    };
    let p_hit_barrier = ratio;
    let p_hit_zero = 1.0 - p_hit_barrier;
    // E[T] = (s - b * P(hit b)) / (1 - 2p), since (1-r^s)/(1-r^b) equals ratio
    let expected_steps = (s - b * ratio) / (1.0 - 2.0 * p);
    Ok(RuinOutcome { p_hit_barrier, p_hit_zero, expected_steps })
}

/// Independent oracle: solves the absorbing chain exactly in rationals.
///
/// Hitting probabilities satisfy `h(i) = p h(i+1) + (1-p) h(i-1)` with
/// `h(0) = 0`, `h(b) = 1`; expected times satisfy the same recurrence with
/// an inhomogeneous `+1` and zero boundary values. Both tridiagonal systems
/// are eliminated exactly.
pub fn ruin_by_linear_solve(
    p: &BigRational,
    barrier: u64,
    start: u64,
) -> Result<(BigRational, BigRational, BigRational)> {
    if p <= &BigRational::zero() || p >= &BigRational::one() {
        return Err(Error::RuinInvalid("p must lie in (0,1)".into()));
    }
    if barrier == 0 || start > barrier {
        return Err(Error::RuinInvalid("need 0 <= start <= barrier, barrier >= 1".into()));
    }
    if start == 0 {
        return Ok((BigRational::zero(), BigRational::one(), BigRational::zero()));
    }
    if start == barrier {
        return Ok((BigRational::one(), BigRational::zero(), BigRational::zero()));
    }
    let q = BigRational::one() - p.clone();
    let m = (barrier - 1) as usize;

    // interior equations: -q x_{i-1} + x_i - p x_{i+1} = rhs_i
    let solve = |rhs: Vec<BigRational>, upper_boundary: BigRational| -> Vec<BigRational> {
        let mut diag = vec![BigRational::one(); m];
        let mut rhs = rhs;
        // fold the x_{b} = upper_boundary term into the last equation
        rhs[m - 1] += p.clone() * upper_boundary;
        // forward elimination of the -q subdiagonal
        for i in 1..m {
            let factor = q.clone() / diag[i - 1].clone();
            diag[i] = diag[i].clone() - factor.clone() * p.clone();
            let carried = rhs[i - 1].clone();
            rhs[i] += factor * carried;
        }
        // back substitution against the -p superdiagonal
        let mut x = vec![BigRational::zero(); m];
        x[m - 1] = rhs[m - 1].clone() / diag[m - 1].clone();
        for i in (0..m - 1).rev() {
            x[i] = (rhs[i].clone() + p.clone() * x[i + 1].clone()) / diag[i].clone();
        }
        x
    };

    let hit = solve(vec![BigRational::zero(); m], BigRational::one());
    let time = solve(vec![BigRational::one(); m], BigRational::zero());
    let idx = (start - 1) as usize;
    let p_hit_barrier = hit[idx].clone();
    let p_hit_zero = BigRational::one() - p_hit_barrier.clone();
    debug_assert!(!p_hit_zero.is_negative());
    Ok((p_hit_barrier, p_hit_zero, time[idx].clone()))
}

/// Monte Carlo estimate: absorption-at-`b` frequency, mean steps, and the
/// sample variance of the step count.
pub fn simulate_ruin(spec: &GamblersRuinSpec, trials: u64, rng: &mut SimRng) -> Result<(f64, f64, f64)> {
    spec.validate()?;
    let mut hit = 0u64;
    let mut sum_t = 0.0f64;
    let mut sum_t2 = 0.0f64;
    for _ in 0..trials {
        let mut pos = spec.start;
        let mut t = 0u64;
        while pos != 0 && pos != spec.barrier {
            if rng.unit() < spec.p {
                pos += 1;
            } else {
                pos -= 1;
            }
            t += 1;
        }
        if pos == spec.barrier {
            hit += 1;
        }
        sum_t += t as f64;
        sum_t2 += (t as f64) * (t as f64);
    }
    let mean = sum_t / trials as f64;
    let var = (sum_t2 / trials as f64 - mean * mean).max(0.0);
    Ok((hit as f64 / trials as f64, mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_traits::ToPrimitive;

    fn rational(num: i64, den: i64) -> BigRational {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    #[test]
    fn one_step_to_either_barrier() {
        // p=2/3, s=1, b=2: both neighbours absorb, so T=1 and
        // P(hit b) = p = 2/3
        let out = gamblers_ruin(&GamblersRuinSpec { p: 2.0 / 3.0, barrier: 2, start: 1 }).unwrap();
        assert!((out.p_hit_barrier - 2.0 / 3.0).abs() < 1e-14);
        assert!((out.expected_steps - 1.0).abs() < 1e-12);
        let (hb, h0, et) = ruin_by_linear_solve(&rational(2, 3), 2, 1).unwrap();
        assert_eq!(hb, rational(2, 3));
        assert_eq!(h0, rational(1, 3));
        assert_eq!(et, rational(1, 1));
    }

    #[test]
    fn absorbed_starts() {
        let at_zero = gamblers_ruin(&GamblersRuinSpec { p: 0.6, barrier: 10, start: 0 }).unwrap();
        assert_eq!(at_zero.p_hit_zero, 1.0);
        assert_eq!(at_zero.expected_steps, 0.0);
        let at_b = gamblers_ruin(&GamblersRuinSpec { p: 0.6, barrier: 10, start: 10 }).unwrap();
        assert!((at_b.p_hit_barrier - 1.0).abs() < 1e-14);
        assert!(at_b.expected_steps.abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_exact_solve() {
        let p = 0.6;
        let spec = GamblersRuinSpec { p, barrier: 10, start: 5 };
        let closed = gamblers_ruin(&spec).unwrap();
        let (hb, h0, et) = ruin_by_linear_solve(&rational(6, 10), 10, 5).unwrap();
        assert!((closed.p_hit_barrier - hb.to_f64().unwrap()).abs() < 1e-12);
        assert!((closed.p_hit_zero - h0.to_f64().unwrap()).abs() < 1e-12);
        assert!((closed.expected_steps - et.to_f64().unwrap()).abs() < 1e-10);
    }

    #[test]
    fn p_half_is_rejected() {
        assert!(matches!(
            gamblers_ruin(&GamblersRuinSpec { p: 0.5, barrier: 4, start: 2 }),
            Err(Error::RuinSingularP)
        ));
        assert!(matches!(
            gamblers_ruin(&GamblersRuinSpec { p: 0.5 + 1e-9, barrier: 4, start: 2 }),
            Err(Error::RuinSingularP)
        ));
    }

    #[test]
    fn probabilities_are_complementary() {
        for p in [0.55, 0.7, 0.95, 0.3] {
            for (b, s) in [(5u64, 3u64), (50, 12), (10, 1)] {
                let out = gamblers_ruin(&GamblersRuinSpec { p, barrier: b, start: s }).unwrap();
                assert!((out.p_hit_barrier + out.p_hit_zero - 1.0).abs() < 1e-12);
                assert!(out.expected_steps >= 0.0);
            }
        }
    }
}
