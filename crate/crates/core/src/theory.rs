//! Limit constants, weight-distribution recurrences, their Gamma-function
//! closed forms and power-law asymptotics, and the one-step conditional
//! expectations of the weight counts.
//!
//! Vertex and edge results are for the three-interactions model; the
//! N-clique results hold for every N.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::evolution::{ModelParams, Snapshot};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("domain error: {0}")]
    Domain(String),
}

/// A limit law whose hypotheses the parameters violate. Values are still
/// computed; consumers report these alongside.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisWarning {
    /// Which law: `vertex-weights`, `edge-weights` or `clique-weights`.
    pub law: String,
    /// The violated condition.
    pub condition: String,
}

impl std::fmt::Display for HypothesisWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} law requires {}", self.law, self.condition)
    }
}

fn warn(law: &str, condition: &str) -> HypothesisWarning {
    HypothesisWarning {
        law: law.into(),
        condition: condition.into(),
    }
}

/// Hypothesis checks for every limit law applied to `params`.
pub fn hypothesis_warnings(params: &ModelParams) -> Vec<HypothesisWarning> {
    let ModelParams { p, q, r, .. } = *params;
    let mut out = Vec::new();
    if params.n_model != 3 {
        out.push(warn(
            "vertex-weights",
            "N = 3 (vertex and edge laws are derived for the three-interactions model only)",
        ));
        out.push(warn("edge-weights", "N = 3"));
    } else {
        if !(p > 0.0 && p < 1.0 && q > 0.0 && r > 0.0) {
            out.push(warn("vertex-weights", "0 < p < 1, q > 0 and r > 0"));
        }
        if !(r < 1.0 || q < 1.0) {
            out.push(warn("vertex-weights", "r < 1 or q < 1"));
        }
        if !(r > 0.0 || (1.0 - p) * q > 0.0) {
            out.push(warn("edge-weights", "r > 0 or (1 - p) q > 0"));
        }
    }
    if !(p > 0.0 && p < 1.0 && q > 0.0) {
        out.push(warn("clique-weights", "0 < p < 1 and q > 0"));
    }
    out
}

/// Every constant of the limit theory for `(p, q, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub p: f64,
    pub q: f64,
    pub r: f64,
    /// Vertex-weight recurrence slope: 2pr/3 + (1-p)q.
    pub alpha: f64,
    /// Vertex-weight recurrence offset: 2(1-r) + 3(1-p)(1-q)/p.
    pub beta: f64,
    /// Edge-weight rate: pr/3 + (1-p)q.
    pub a: f64,
    /// Uniform-choice edge term: 2[p(1-r) + 3(1-p)(1-q)]/p².
    pub b: f64,
    /// Top-clique rate: (1-p)q.
    pub h: f64,
    /// Limit of E_n / n: p(3-r) + 3(1-p)(1-q).
    pub edge_growth: f64,
    /// Limit of K_n / n: 1 - h.
    pub clique_growth: f64,
    pub vertex_exponent: f64,
    pub edge_exponent: f64,
    pub clique_exponent: f64,
    pub vertex_prefactor: f64,
    pub edge_prefactor: f64,
    pub clique_prefactor: f64,
}

impl DerivedConstants {
    pub fn new(p: f64, q: f64, r: f64) -> Result<Self, TheoryError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(TheoryError::Domain(format!("need 0 < p <= 1, got p = {p}")));
        }
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&r) {
            return Err(TheoryError::Domain(format!(
                "q and r must lie in [0, 1], got q = {q}, r = {r}"
            )));
        }
        let alpha = 2.0 / 3.0 * p * r + (1.0 - p) * q;
        let beta = 2.0 * (1.0 - r) + 3.0 * (1.0 - p) * (1.0 - q) / p;
        let a = p * r / 3.0 + (1.0 - p) * q;
        let b = 2.0 / (p * p) * (p * (1.0 - r) + 3.0 * (1.0 - p) * (1.0 - q));
        let h = (1.0 - p) * q;
        let vertex_prefactor = if alpha > 0.0 {
            (ln_gamma(1.0 + (beta + 1.0) / alpha) - ln_gamma(1.0 + beta / alpha)).exp() / alpha
        } else {
            f64::NAN
        };
        let edge_prefactor = if a > 0.0 {
            ln_gamma(1.0 + 1.0 / a).exp() / a
        } else {
            f64::NAN
        };
        let clique_prefactor = if h > 0.0 {
            ln_gamma(1.0 + 1.0 / h).exp() / h
        } else {
            f64::NAN
        };
        Ok(Self {
            p,
            q,
            r,
            alpha,
            beta,
            a,
            b,
            h,
            edge_growth: p * (3.0 - r) + 3.0 * (1.0 - p) * (1.0 - q),
            clique_growth: 1.0 - h,
            vertex_exponent: 1.0 + 1.0 / alpha,
            edge_exponent: 1.0 + 1.0 / a,
            clique_exponent: 1.0 + 1.0 / h,
            vertex_prefactor,
            edge_prefactor,
            clique_prefactor,
        })
    }

    pub fn from_params(params: &ModelParams) -> Result<Self, TheoryError> {
        Self::new(params.p, params.q, params.r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionKind {
    /// Limit of X(n,w)/V_n.
    VertexWeight,
    /// Limit of E(n,v)/E_n.
    EdgeWeight,
    /// Limit of E(n,v)/(np).
    EdgeRate,
    /// Limit of K(n,w)/K_n.
    CliqueWeight,
    /// Limit of K(n,w)/n.
    CliqueRate,
}

/// Values of one limit sequence for indices `1..=values.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoreticalDistribution {
    pub kind: DistributionKind,
    pub values: Vec<f64>,
    /// Set when the law degenerates (all mass on index 1).
    pub degenerate: bool,
}

impl TheoreticalDistribution {
    /// Value at index `i` (1-based); 0 outside the computed range.
    pub fn at(&self, i: u64) -> f64 {
        if i == 0 {
            return 0.0;
        }
        self.values.get(i as usize - 1).copied().unwrap_or(0.0)
    }

    pub fn partial_sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn max_index(&self) -> u64 {
        self.values.len() as u64
    }
}

/// `first`, then `x_i = ratio(i) * x_{i-1}` for `i = 2..=max`.
fn recurrence(first: f64, max: usize, ratio: impl Fn(f64) -> f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(max);
    if max == 0 {
        return out;
    }
    out.push(first);
    for i in 2..=max {
        let prev = out[i - 2];
        out.push(ratio(i as f64) * prev);
    }
    out
}

/// Vertex weights: x₁ = 1/(α+β+1), x_w = (α(w-1)+β)/(αw+β+1) x_{w-1}.
pub fn vertex_weight_dist(c: &DerivedConstants, wmax: usize) -> TheoreticalDistribution {
    let (al, be) = (c.alpha, c.beta);
    TheoreticalDistribution {
        kind: DistributionKind::VertexWeight,
        values: recurrence(1.0 / (al + be + 1.0), wmax, |w| {
            (al * (w - 1.0) + be) / (al * w + be + 1.0)
        }),
        degenerate: al == 0.0 && be == 0.0,
    }
}

fn edge_ratio(a: f64) -> impl Fn(f64) -> f64 {
    move |v| (v - 1.0) * a / (v * a + 1.0)
}

/// Edge weights: u₁ = 1/(a+1), u_v = (v-1)a/(va+1) u_{v-1}.
pub fn edge_weight_dist(c: &DerivedConstants, vmax: usize) -> TheoreticalDistribution {
    TheoreticalDistribution {
        kind: DistributionKind::EdgeWeight,
        values: recurrence(1.0 / (c.a + 1.0), vmax, edge_ratio(c.a)),
        degenerate: c.a == 0.0,
    }
}

/// Edge counts per step: e₁ = A/((a+1)p), same ratio as `u`.
pub fn edge_rate_dist(c: &DerivedConstants, vmax: usize) -> TheoreticalDistribution {
    TheoreticalDistribution {
        kind: DistributionKind::EdgeRate,
        values: recurrence(c.edge_growth / ((c.a + 1.0) * c.p), vmax, edge_ratio(c.a)),
        degenerate: c.a == 0.0,
    }
}

fn clique_ratio(h: f64) -> impl Fn(f64) -> f64 {
    move |w| h * (w - 1.0) / (h * w + 1.0)
}

/// N-clique weights: t₁ = 1/(h+1), t_w = h(w-1)/(hw+1) t_{w-1}.
pub fn clique_weight_dist(c: &DerivedConstants, wmax: usize) -> TheoreticalDistribution {
    TheoreticalDistribution {
        kind: DistributionKind::CliqueWeight,
        values: recurrence(1.0 / (c.h + 1.0), wmax, clique_ratio(c.h)),
        degenerate: c.h == 0.0,
    }
}

/// N-clique counts per step: k₁ = (1-h)/(h+1), same ratio as `t`.
pub fn clique_rate_dist(c: &DerivedConstants, wmax: usize) -> TheoreticalDistribution {
    TheoreticalDistribution {
        kind: DistributionKind::CliqueRate,
        values: recurrence((1.0 - c.h) / (c.h + 1.0), wmax, clique_ratio(c.h)),
        degenerate: c.h == 0.0,
    }
}

fn require_positive(name: &str, x: f64) -> Result<(), TheoryError> {
    if x > 0.0 {
        Ok(())
    } else {
        Err(TheoryError::Domain(format!("closed form needs {name} > 0")))
    }
}

/// u_v = u₁ Γ(v) Γ(2+1/a) / Γ(1+v+1/a), evaluated in log space.
pub fn closed_form_u(c: &DerivedConstants, v: u64) -> Result<f64, TheoryError> {
    require_positive("a", c.a)?;
    if v == 0 {
        return Err(TheoryError::Domain("index must be at least 1".into()));
    }
    let s = 1.0 / c.a;
    let v = v as f64;
    let u1 = 1.0 / (c.a + 1.0);
    Ok(u1 * (ln_gamma(v) + ln_gamma(2.0 + s) - ln_gamma(1.0 + v + s)).exp())
}

/// t_w = (1/h) Γ(w) Γ(1+1/h) / Γ(1+w+1/h), evaluated in log space.
pub fn closed_form_t(c: &DerivedConstants, w: u64) -> Result<f64, TheoryError> {
    require_positive("h", c.h)?;
    if w == 0 {
        return Err(TheoryError::Domain("index must be at least 1".into()));
    }
    let s = 1.0 / c.h;
    let w = w as f64;
    Ok((ln_gamma(w) + ln_gamma(1.0 + s) - ln_gamma(1.0 + w + s)).exp() / c.h)
}

/// Σ_{k=0}^{n} Γ(k+s)/Γ(k+t) by the telescoping identity
/// `[Γ(n+s+1)/Γ(n+t) - Γ(s)/Γ(t-1)] / (s-t+1)`.
///
/// Needs `s > 0`, `t > 1` and `s - t + 1 != 0`.
pub fn gamma_ratio_sum(s: f64, t: f64, n: u64) -> Result<f64, TheoryError> {
    if !(s > 0.0 && t > 1.0) || (s - t + 1.0) == 0.0 {
        return Err(TheoryError::Domain(format!(
            "gamma ratio sum needs s > 0, t > 1, s - t + 1 != 0 (s = {s}, t = {t})"
        )));
    }
    let n = n as f64;
    let head = (ln_gamma(n + s + 1.0) - ln_gamma(n + t)).exp();
    let base = (ln_gamma(s) - ln_gamma(t - 1.0)).exp();
    Ok((head - base) / (s - t + 1.0))
}

/// Σ_{v=1}^{n} u_v via [`gamma_ratio_sum`].
pub fn edge_partial_sum_closed(c: &DerivedConstants, n: u64) -> Result<f64, TheoryError> {
    require_positive("a", c.a)?;
    if n == 0 {
        return Ok(0.0);
    }
    let s = 1.0 / c.a;
    let u1 = 1.0 / (c.a + 1.0);
    Ok(u1 * ln_gamma(2.0 + s).exp() * gamma_ratio_sum(1.0, 2.0 + s, n - 1)?)
}

/// Σ_{w=1}^{n} t_w via [`gamma_ratio_sum`].
pub fn clique_partial_sum_closed(c: &DerivedConstants, n: u64) -> Result<f64, TheoryError> {
    require_positive("h", c.h)?;
    if n == 0 {
        return Ok(0.0);
    }
    let s = 1.0 / c.h;
    Ok(ln_gamma(1.0 + s).exp() / c.h * gamma_ratio_sum(1.0, 2.0 + s, n - 1)?)
}

/// Exact rational evaluation of the constants and recurrences, for
/// equality-grade checks on small indices.
pub mod exact {
    use super::*;

    #[derive(Debug, Clone, PartialEq)]
    pub struct RationalConstants {
        pub p: BigRational,
        pub q: BigRational,
        pub r: BigRational,
        pub alpha: BigRational,
        pub beta: BigRational,
        pub a: BigRational,
        pub h: BigRational,
        pub edge_growth: BigRational,
        pub clique_growth: BigRational,
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    fn exact_f64(name: &str, x: f64) -> Result<BigRational, TheoryError> {
        BigRational::from_float(x)
            .ok_or_else(|| TheoryError::Domain(format!("{name} = {x} is not finite")))
    }

    impl RationalConstants {
        /// Uses the exact binary value of each float parameter.
        pub fn from_f64(p: f64, q: f64, r: f64) -> Result<Self, TheoryError> {
            Self::new(exact_f64("p", p)?, exact_f64("q", q)?, exact_f64("r", r)?)
        }

        pub fn new(p: BigRational, q: BigRational, r: BigRational) -> Result<Self, TheoryError> {
            if p <= BigRational::zero() || p > BigRational::one() {
                return Err(TheoryError::Domain("need 0 < p <= 1".into()));
            }
            let one = BigRational::one();
            let np = &one - &p;
            let nq = &one - &q;
            let nr = &one - &r;
            let alpha = int(2) * &p * &r / int(3) + &np * &q;
            let beta = int(2) * &nr + int(3) * &np * &nq / &p;
            let a = &p * &r / int(3) + &np * &q;
            let h = &np * &q;
            let edge_growth = &p * (int(3) - &r) + int(3) * &np * &nq;
            let clique_growth = &one - &h;
            Ok(Self {
                p,
                q,
                r,
                alpha,
                beta,
                a,
                h,
                edge_growth,
                clique_growth,
            })
        }

        fn rec(
            first: BigRational,
            max: usize,
            ratio: impl Fn(&BigRational) -> BigRational,
        ) -> Vec<BigRational> {
            let mut out: Vec<BigRational> = Vec::with_capacity(max);
            if max == 0 {
                return out;
            }
            out.push(first);
            for i in 2..=max {
                let next = ratio(&int(i as i64)) * &out[i - 2];
                out.push(next);
            }
            out
        }

        pub fn vertex_weights(&self, max: usize) -> Vec<BigRational> {
            let one = BigRational::one();
            let (al, be) = (&self.alpha, &self.beta);
            Self::rec(&one / (al + be + &one), max, |w| {
                (al * (w - &one) + be) / (al * w + be + &one)
            })
        }

        fn edge_ratio(&self) -> impl Fn(&BigRational) -> BigRational + '_ {
            move |v| (v - BigRational::one()) * &self.a / (v * &self.a + BigRational::one())
        }

        pub fn edge_weights(&self, max: usize) -> Vec<BigRational> {
            let one = BigRational::one();
            Self::rec(&one / (&self.a + &one), max, self.edge_ratio())
        }

        pub fn edge_rates(&self, max: usize) -> Vec<BigRational> {
            let one = BigRational::one();
            let first = &self.edge_growth / ((&self.a + &one) * &self.p);
            Self::rec(first, max, self.edge_ratio())
        }

        fn clique_ratio(&self) -> impl Fn(&BigRational) -> BigRational + '_ {
            move |w| &self.h * (w - BigRational::one()) / (&self.h * w + BigRational::one())
        }

        pub fn clique_weights(&self, max: usize) -> Vec<BigRational> {
            let one = BigRational::one();
            Self::rec(&one / (&self.h + &one), max, self.clique_ratio())
        }

        pub fn clique_rates(&self, max: usize) -> Vec<BigRational> {
            let one = BigRational::one();
            let first = (&one - &self.h) / (&self.h + &one);
            Self::rec(first, max, self.clique_ratio())
        }
    }
}

/// C(n, k) in floating point.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn require_three(snap: &Snapshot) -> Result<(), TheoryError> {
    if snap.n_model == 3 {
        Ok(())
    } else {
        Err(TheoryError::Domain(format!(
            "edge formulas are for the three-interactions model, got N = {}",
            snap.n_model
        )))
    }
}

/// Probability that a given edge of weight `v` takes part in the next step
/// (step index `n`, `V` vertices): (v/n)a + 2[p(1-r)+3(1-p)(1-q)]/(V(V-1)).
pub fn edge_participation_probability(params: &ModelParams, n: u64, vertices: u64, v: u64) -> f64 {
    let ModelParams { p, q, r, .. } = *params;
    let a = p * r / 3.0 + (1.0 - p) * q;
    // p²b without dividing by p².
    let p2b = 2.0 * (p * (1.0 - r) + 3.0 * (1.0 - p) * (1.0 - q));
    let vv = vertices as f64;
    v as f64 / n as f64 * a + p2b / (vv * (vv - 1.0))
}

/// E[E(n, v) | state after n-1 steps] for the three-interactions model.
pub fn one_step_edge_expectation(
    snap: &Snapshot,
    params: &ModelParams,
    v: u64,
) -> Result<f64, TheoryError> {
    require_three(snap)?;
    if v == 0 {
        return Err(TheoryError::Domain(
            "edge weight index must be at least 1".into(),
        ));
    }
    let ModelParams { p, q, r, .. } = *params;
    let n = snap.n + 1;
    let hist = snap.edge_weights();
    let below = if v > 1 {
        edge_participation_probability(params, n, snap.vertices, v - 1) * hist.count(v - 1) as f64
    } else {
        0.0
    };
    let stay =
        (1.0 - edge_participation_probability(params, n, snap.vertices, v)) * hist.count(v) as f64;
    let birth = if v == 1 {
        let missing = 1.0 - snap.edges as f64 / binomial(snap.vertices, 2);
        2.0 * p + (p * (1.0 - r) + 3.0 * (1.0 - p) * (1.0 - q)) * missing
    } else {
        0.0
    };
    Ok(below + stay + birth)
}

/// E[E_n | state after n-1 steps] = ρ E_{n-1} + A.
pub fn one_step_edge_count_expectation(
    snap: &Snapshot,
    params: &ModelParams,
) -> Result<f64, TheoryError> {
    require_three(snap)?;
    let c = DerivedConstants::from_params(params)?;
    let ModelParams { p, q, r, .. } = *params;
    let vv = snap.vertices as f64;
    let rho = 1.0 - (2.0 * p * (1.0 - r) + 6.0 * (1.0 - p) * (1.0 - q)) / (vv * (vv - 1.0));
    Ok(rho * snap.edges as f64 + c.edge_growth)
}

/// Probability that a given N-clique of weight `w` takes part in the next
/// step: (1-p)[q w/n + (1-q)/C(V, N)].
pub fn clique_participation_probability(
    params: &ModelParams,
    n: u64,
    vertices: u64,
    w: u64,
) -> f64 {
    let ModelParams { p, q, .. } = *params;
    (1.0 - p) * (q * w as f64 / n as f64 + (1.0 - q) / binomial(vertices, params.n_model as u64))
}

/// E[K(n, w) | state after n-1 steps].
pub fn one_step_clique_expectation(
    snap: &Snapshot,
    params: &ModelParams,
    w: u64,
) -> Result<f64, TheoryError> {
    if w == 0 {
        return Err(TheoryError::Domain(
            "clique weight index must be at least 1".into(),
        ));
    }
    let ModelParams { p, q, .. } = *params;
    let n = snap.n + 1;
    let hist = snap.top_weights();
    let below = if w > 1 {
        clique_participation_probability(params, n, snap.vertices, w - 1) * hist.count(w - 1) as f64
    } else {
        0.0
    };
    let stay = (1.0 - clique_participation_probability(params, n, snap.vertices, w))
        * hist.count(w) as f64;
    let birth = if w == 1 {
        p + (1.0 - p)
            * (1.0 - q)
            * (1.0 - snap.top as f64 / binomial(snap.vertices, snap.n_model as u64))
    } else {
        0.0
    };
    Ok(below + stay + birth)
}

/// E[K_n | state after n-1 steps] = K_{n-1}[1 - (1-p)(1-q)/C(V,N)] + (1-h),
/// the form implied by summing [`one_step_clique_expectation`] over weights.
pub fn one_step_clique_count_expectation(
    snap: &Snapshot,
    params: &ModelParams,
) -> Result<f64, TheoryError> {
    let c = DerivedConstants::from_params(params)?;
    let ModelParams { p, q, .. } = *params;
    let rho = 1.0 - (1.0 - p) * (1.0 - q) / binomial(snap.vertices, snap.n_model as u64);
    Ok(rho * snap.top as f64 + c.clique_growth)
}

/// The clique-count recursion with ρ = 1 - (1-p)(1-q)(1 - 1/C(V,N)) as
/// published alongside the limit K_n/n → 1-h. It agrees with
/// [`one_step_clique_count_expectation`] only asymptotically; kept to report
/// the difference.
pub fn published_clique_count_expectation(
    snap: &Snapshot,
    params: &ModelParams,
) -> Result<f64, TheoryError> {
    let c = DerivedConstants::from_params(params)?;
    let ModelParams { p, q, .. } = *params;
    let rho =
        1.0 - (1.0 - p) * (1.0 - q) * (1.0 - 1.0 / binomial(snap.vertices, snap.n_model as u64));
    Ok(rho * snap.top as f64 + c.clique_growth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{GraphState, StepKind};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    #[test]
    fn constants_at_one_half() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        assert!(close(c.alpha, 5.0 / 12.0, 1e-15));
        assert!(close(c.beta, 2.5, 1e-15));
        assert!(close(c.a, 1.0 / 3.0, 1e-15));
        assert!(close(c.b, 8.0, 1e-15));
        assert!(close(c.h, 0.25, 1e-15));
        assert!(close(c.edge_growth, 2.0, 1e-15));
        assert!(close(c.clique_growth, 0.75, 1e-15));
        assert!(close(c.vertex_exponent, 3.4, 1e-14));
        assert!(close(c.edge_exponent, 4.0, 1e-14));
        assert!(close(c.clique_exponent, 5.0, 1e-14));
        // Γ(4)/(1/3) = 18 and Γ(5)/(1/4) = 96.
        assert!(close(c.edge_prefactor, 18.0, 1e-12));
        assert!(close(c.clique_prefactor, 96.0, 1e-12));
    }

    #[test]
    fn constants_p_one() {
        let r = 0.3;
        let c = DerivedConstants::new(1.0, 0.7, r).unwrap();
        assert_eq!(c.h, 0.0);
        assert!(close(c.beta, 2.0 * (1.0 - r), 1e-15));
        assert!(close(c.b, 2.0 * (1.0 - r), 1e-15));
        assert!(close(c.edge_growth, 3.0 - r, 1e-15));
    }

    #[test]
    fn constants_r_q_one() {
        let c = DerivedConstants::new(0.5, 1.0, 1.0).unwrap();
        assert!(close(c.alpha, 5.0 / 6.0, 1e-15));
        assert_eq!(c.beta, 0.0);
        assert!(close(c.a, 2.0 / 3.0, 1e-15));
        assert_eq!(c.b, 0.0);
    }

    #[test]
    fn p_zero_is_a_domain_error() {
        assert!(DerivedConstants::new(0.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn vertex_values() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let x = vertex_weight_dist(&c, 3);
        assert!(close(x.values[0], 12.0 / 47.0, 1e-15));
        assert!(close(x.values[1], 35.0 / 52.0 * 12.0 / 47.0, 1e-15));
    }

    #[test]
    fn edge_values() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let u = edge_weight_dist(&c, 3);
        let e = edge_rate_dist(&c, 3);
        for (got, want) in u.values.iter().zip([0.75, 0.15, 0.05]) {
            assert!(close(*got, want, 1e-14));
        }
        for (got, want) in e.values.iter().zip([3.0, 0.6, 0.2]) {
            assert!(close(*got, want, 1e-14));
        }
    }

    #[test]
    fn clique_values() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let t = clique_weight_dist(&c, 3);
        for (got, want) in t.values.iter().zip([0.8, 2.0 / 15.0, 4.0 / 105.0]) {
            assert!(close(*got, want, 1e-14));
        }
        assert!(close(clique_rate_dist(&c, 1).values[0], 0.6, 1e-15));
    }

    #[test]
    fn degenerate_laws() {
        let c = DerivedConstants::new(1.0, 0.5, 0.0).unwrap();
        assert_eq!(c.a, 0.0);
        let u = edge_weight_dist(&c, 4);
        assert!(u.degenerate);
        assert_eq!(u.values, vec![1.0, 0.0, 0.0, 0.0]);
        let t = clique_weight_dist(&c, 3);
        assert!(t.degenerate);
        assert_eq!(t.values, vec![1.0, 0.0, 0.0]);
        assert!(closed_form_u(&c, 2).is_err());
    }

    #[test]
    fn closed_form_identity_index() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        assert!(close(closed_form_u(&c, 1).unwrap(), 0.75, 1e-13));
        assert!(close(closed_form_u(&c, 2).unwrap(), 0.15, 1e-12));
        assert!(close(closed_form_t(&c, 1).unwrap(), 0.8, 1e-13));
    }

    #[test]
    fn closed_forms_match_recurrences() {
        for (p, q, r) in [(0.5, 0.5, 0.5), (0.3, 0.7, 0.6), (0.9, 0.2, 0.1)] {
            let c = DerivedConstants::new(p, q, r).unwrap();
            let u = edge_weight_dist(&c, 50);
            let t = clique_weight_dist(&c, 50);
            for i in 1..=50u64 {
                let (ur, uc) = (u.at(i), closed_form_u(&c, i).unwrap());
                let (tr, tc) = (t.at(i), closed_form_t(&c, i).unwrap());
                assert!(
                    (ur - uc).abs() <= 1e-10 * ur.max(1e-300) + 1e-300,
                    "u[{i}] {ur} vs {uc}"
                );
                assert!(
                    (tr - tc).abs() <= 1e-10 * tr.max(1e-300) + 1e-300,
                    "t[{i}] {tr} vs {tc}"
                );
            }
        }
    }

    #[test]
    fn partial_sum_identity_matches_direct_sum() {
        for (s, t) in [(1.0, 5.0), (1.0, 6.0), (0.5, 2.25), (2.5, 4.0)] {
            let mut direct = 0.0;
            for n in 0..=100u64 {
                let k = n as f64;
                direct += (ln_gamma(k + s) - ln_gamma(k + t)).exp();
                let closed = gamma_ratio_sum(s, t, n).unwrap();
                assert!(
                    close(closed, direct, 1e-10),
                    "s={s} t={t} n={n}: {closed} vs {direct}"
                );
            }
        }
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let u = edge_weight_dist(&c, 100);
        let t = clique_weight_dist(&c, 100);
        for n in [1u64, 2, 10, 100] {
            let du: f64 = u.values[..n as usize].iter().sum();
            let dt: f64 = t.values[..n as usize].iter().sum();
            assert!(close(edge_partial_sum_closed(&c, n).unwrap(), du, 1e-10));
            assert!(close(clique_partial_sum_closed(&c, n).unwrap(), dt, 1e-10));
        }
    }

    #[test]
    fn partial_sums_approach_one() {
        let c = DerivedConstants::new(0.5, 0.5, 0.5).unwrap();
        let su = edge_partial_sum_closed(&c, 1_000_000).unwrap();
        let st = clique_partial_sum_closed(&c, 1_000_000).unwrap();
        assert!(su > 0.999 && su <= 1.0 + 1e-12, "{su}");
        assert!(st > 0.999 && st <= 1.0 + 1e-12, "{st}");
        let direct: f64 = edge_weight_dist(&c, 1_000_000).partial_sum();
        assert!(direct > 0.999);
        let x: f64 = vertex_weight_dist(&c, 1_000_000).partial_sum();
        assert!(x > 0.999 && x <= 1.0 + 1e-9, "{x}");
    }

    #[test]
    fn gamma_ratio_sum_small_case() {
        // s = 1, t = 3: Σ_{k=0}^{2} k!/(k+2)! = 1/2 + 1/6 + 1/12.
        let got = gamma_ratio_sum(1.0, 3.0, 2).unwrap();
        assert!(close(got, 0.5 + 1.0 / 6.0 + 1.0 / 12.0, 1e-13));
        assert!(gamma_ratio_sum(1.0, 2.0, 3).is_err());
    }

    #[test]
    fn warnings_flag_violations() {
        let ok = ModelParams::three(0.5, 0.5, 0.5);
        assert!(hypothesis_warnings(&ok).is_empty());
        let p1 = ModelParams::three(1.0, 0.5, 0.5);
        assert!(hypothesis_warnings(&p1)
            .iter()
            .any(|w| w.law == "clique-weights"));
        let degenerate = ModelParams::three(1.0, 0.5, 0.0);
        assert!(hypothesis_warnings(&degenerate)
            .iter()
            .any(|w| w.law == "edge-weights"));
        let four = ModelParams { n_model: 4, ..ok };
        assert_eq!(hypothesis_warnings(&four).len(), 2);
    }

    #[test]
    fn rational_links_exact() {
        let rc = exact::RationalConstants::from_f64(0.5, 0.5, 0.5).unwrap();
        let u = rc.edge_weights(100);
        let e = rc.edge_rates(100);
        for (uv, ev) in u.iter().zip(&e) {
            assert_eq!(uv * &rc.edge_growth, &rc.p * ev);
        }
        let t = rc.clique_weights(100);
        let k = rc.clique_rates(100);
        for (tw, kw) in t.iter().zip(&k) {
            assert_eq!(tw * &rc.clique_growth, kw.clone());
        }
        assert_eq!(
            rc.vertex_weights(1)[0],
            BigRational::new(BigInt::from(12), BigInt::from(47))
        );
    }

    #[test]
    fn initial_state_formulas() {
        let params = ModelParams::three(0.5, 0.5, 0.5);
        let snap = GraphState::new(&params).unwrap().snapshot(100);
        assert!(close(
            one_step_edge_expectation(&snap, &params, 1).unwrap(),
            2.0,
            1e-14
        ));
        assert!(close(
            one_step_edge_expectation(&snap, &params, 2).unwrap(),
            2.0,
            1e-14
        ));
        assert_eq!(one_step_edge_expectation(&snap, &params, 3).unwrap(), 0.0);
        assert!(close(
            one_step_edge_count_expectation(&snap, &params).unwrap(),
            4.0,
            1e-14
        ));
        assert!(close(
            one_step_clique_count_expectation(&snap, &params).unwrap(),
            1.5,
            1e-14
        ));
        assert!(close(
            published_clique_count_expectation(&snap, &params).unwrap(),
            1.75,
            1e-14
        ));
        // Old triangle keeps weight 1 w.p. 1/2, a new one is born w.p. 1/2.
        assert!(close(
            one_step_clique_expectation(&snap, &params, 1).unwrap(),
            1.0,
            1e-14
        ));
        assert!(close(
            one_step_clique_expectation(&snap, &params, 2).unwrap(),
            0.5,
            1e-14
        ));
        assert!(one_step_edge_expectation(&snap, &params, 0).is_err());
    }

    #[test]
    fn complete_graph_edge_attachment() {
        let params = ModelParams::three(1.0, 0.5, 1.0);
        let mut s = GraphState::new(&params).unwrap();
        s.apply_forced(StepKind::OldViaUniform, &[0, 1, 2]).unwrap();
        let snap = s.snapshot(100);
        let got = one_step_edge_count_expectation(&snap, &params).unwrap();
        assert!(close(got, snap.edges as f64 + 2.0, 1e-14));
    }
}
