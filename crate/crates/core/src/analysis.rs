//! Closed-form amplification quantities: loss bounds, aggregation bounds,
//! the switching-cost horizon `kappa` and the Lambert W function it needs.
//!
//! Notation: `gamma` discount, `l` smoothness constant, `k` repetition
//! horizon, `t` switching cost, `a` event-level advantage.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("Lambert W is undefined at x = {0} (principal branch needs x >= -1/e)")]
    LambertDomain(f64),

    #[error("lower Lambert W branch is undefined at x = {0} (needs -1/e <= x < 0)")]
    LambertLowerDomain(f64),

    #[error("{name} = {value} is invalid: {reason}")]
    Input {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("advantage {a} is below 2kL = {threshold}; the amplification bound does not apply")]
    BelowAmplificationThreshold { a: f64, threshold: f64 },

    #[error("kappa is undefined: W argument {argument} is outside [-1/e, 0) (switching cost {t} >= 2*gamma*L/(1-gamma)^2 = {limit} is never recovered)")]
    KappaDomain { argument: f64, t: f64, limit: f64 },
}

pub type Result<T> = std::result::Result<T, AnalysisError>;

fn input(ok: bool, name: &'static str, value: f64, reason: &'static str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(AnalysisError::Input { name, value, reason })
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    input(gamma > 0.0 && gamma < 1.0, "gamma", gamma, "must lie in (0, 1)")
}

/// All inputs of the bound calculators in one place.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub gamma: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub k: u32,
    #[serde(rename = "T")]
    pub t: f64,
    pub r_max: f64,
    pub epsilon: f64,
    #[serde(rename = "A")]
    pub a: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_gamma(self.gamma)?;
        input(self.l >= 0.0 && self.l.is_finite(), "L", self.l, "must be nonnegative")?;
        input(self.k >= 1, "k", self.k as f64, "must be at least 1")?;
        input(self.t >= 0.0 && self.t.is_finite(), "T", self.t, "must be nonnegative")?;
        input(
            self.r_max > 0.0 && self.r_max.is_finite(),
            "r_max",
            self.r_max,
            "must be positive",
        )?;
        input(
            self.epsilon >= 0.0 && self.epsilon.is_finite(),
            "epsilon",
            self.epsilon,
            "must be nonnegative",
        )?;
        input(self.a >= 0.0 && self.a.is_finite(), "A", self.a, "must be nonnegative")
    }
}

/// Value loss of acting on an epsilon-sufficient statistic: `2 eps r_max / (1-gamma)^3`.
pub fn statistic_value_loss(epsilon: f64, r_max: f64, gamma: f64) -> f64 {
    2.0 * epsilon * r_max / (1.0 - gamma).powi(3)
}

/// Q-value error scale `eps r_max / (1-gamma)^2`.
pub fn statistic_q_error(epsilon: f64, r_max: f64, gamma: f64) -> f64 {
    epsilon * r_max / (1.0 - gamma).powi(2)
}

/// Value lost by committing to k-step repetitions: `2kL / (1-gamma)`.
pub fn aggregation_value_loss(k: u32, l: f64, gamma: f64) -> f64 {
    2.0 * k as f64 * l / (1.0 - gamma)
}

/// `gamma - (1 + k - gamma k) gamma^(k+1)`, the numerator shared by the
/// aggregation bounds (equal to `(1-gamma)^2 sum_{i<=k} i gamma^i`).
fn drift_numerator(k: u32, gamma: f64) -> f64 {
    let k = k as f64;
    gamma - (1.0 + k - gamma * k) * gamma.powf(k + 1.0)
}

fn compounded(a: f64, k: u32, gamma: f64) -> f64 {
    a * (1.0 - gamma.powi(k as i32)) / (1.0 - gamma)
}

fn check_amplification(a: f64, k: u32, l: f64) -> Result<()> {
    let threshold = 2.0 * k as f64 * l;
    if a < threshold {
        return Err(AnalysisError::BelowAmplificationThreshold { a, threshold });
    }
    Ok(())
}

/// Lower bound on the k-repetition advantage when the aggregation is lossless.
pub fn lossless_amplified_advantage(a: f64, k: u32, l: f64, gamma: f64) -> Result<f64> {
    check_amplification(a, k, l)?;
    let kf = k as f64;
    Ok(compounded(a, k, gamma)
        - 2.0 * gamma * l * (1.0 - (1.0 + kf - gamma * kf) * gamma.powi(k as i32)) / (1.0 - gamma).powi(2))
}

/// Lower bound on the advantage in the k-aggregated MDP.
pub fn amplified_advantage_lower(a: f64, k: u32, l: f64, gamma: f64) -> Result<f64> {
    check_amplification(a, k, l)?;
    Ok(compounded(a, k, gamma)
        - 2.0 * l * drift_numerator(k, gamma) / (1.0 - gamma).powi(2)
        - aggregation_value_loss(k, l, gamma))
}

/// Largest statistic error a k-repetition can absorb:
/// `L (k(gamma - gamma^k) - gamma(1 - (1 + k - gamma k) gamma^k)) / r_max`.
///
/// This is negative at `k = 1` (no headroom without aggregation).
pub fn eps_max(k: u32, l: f64, gamma: f64, r_max: f64) -> f64 {
    let kf = k as f64;
    let gk = gamma.powi(k as i32);
    l * (kf * (gamma - gk) - gamma * (1.0 - (1.0 + kf - gamma * kf) * gk)) / r_max
}

const INV_E: f64 = 1.0 / E;
const HALLEY_MAX_ITERS: usize = 64;

fn halley(x: f64, mut w: f64) -> f64 {
    for _ in 0..HALLEY_MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        if f == 0.0 {
            break;
        }
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let next = w - f / denom;
        if !next.is_finite() {
            break;
        }
        let done = (next - w).abs() <= 4.0 * f64::EPSILON * next.abs().max(1.0);
        w = next;
        if done {
            break;
        }
    }
    w
}

/// Series of W about the branch point, in `p = ±sqrt(2(e x + 1))`.
fn branch_series(p: f64) -> f64 {
    -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
}

/// Principal branch `W_0(x)` for `x >= -1/e`.
pub fn lambert_w(x: f64) -> Result<f64> {
    if x.is_nan() || x < -INV_E - 4.0 * f64::EPSILON {
        return Err(AnalysisError::LambertDomain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let q = E * x + 1.0;
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let guess = if x < -0.25 {
        branch_series((2.0 * q).sqrt())
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(x, guess))
}

/// Lower branch `W_{-1}(x)` for `-1/e <= x < 0`, with values in `(-inf, -1]`.
pub fn lambert_w_m1(x: f64) -> Result<f64> {
    if !(-INV_E - 4.0 * f64::EPSILON..0.0).contains(&x) {
        return Err(AnalysisError::LambertLowerDomain(x));
    }
    let q = E * x + 1.0;
    if q <= 0.0 {
        return Ok(-1.0);
    }
    let guess = if x < -0.25 {
        branch_series(-(2.0 * q).sqrt())
    } else {
        let l1 = (-x).ln();
        let l2 = (-l1).ln();
        l1 - l2 + l2 / l1
    };
    Ok(halley(x, guess).min(-1.0))
}

fn check_switch_inputs(gamma: f64, l: f64, t: f64) -> Result<()> {
    check_gamma(gamma)?;
    input(l > 0.0 && l.is_finite(), "L", l, "must be positive")?;
    input(t >= 0.0 && t.is_finite(), "T", t, "must be nonnegative")
}

/// Argument of W in the closed form for `kappa`.
pub fn kappa_argument(gamma: f64, l: f64, t: f64) -> f64 {
    let ratio = (1.0 - gamma).powi(2) * t / (2.0 * gamma * l);
    gamma.powf(1.0 / (1.0 - gamma)) / (gamma - 1.0) * (ratio - 1.0) * gamma.ln()
}

/// Worst-case cumulative regret of holding an action for `k` events when Q-values
/// drift apart at rate `l`: `2 gamma L (1 + k gamma^(k+1) - (1+k) gamma^k) / (1-gamma)^2`.
pub fn holding_regret(k: f64, gamma: f64, l: f64) -> f64 {
    2.0 * gamma * l * (1.0 + k * gamma.powf(k + 1.0) - (1.0 + k) * gamma.powf(k)) / (1.0 - gamma).powi(2)
}

/// The horizon at which holding an action costs as much as switching:
/// the nonnegative root of `holding_regret(kappa) = t`.
///
/// The closed form evaluates W on its lower branch `W_{-1}`; the principal
/// branch gives the other (negative) root. Call sites needing an integer
/// horizon take the ceiling.
pub fn kappa(gamma: f64, l: f64, t: f64) -> Result<f64> {
    check_switch_inputs(gamma, l, t)?;
    if t == 0.0 {
        return Ok(0.0);
    }
    let z = kappa_argument(gamma, l, t);
    let w = lambert_w_m1(z).map_err(|_| AnalysisError::KappaDomain {
        argument: z,
        t,
        limit: 2.0 * gamma * l / (1.0 - gamma).powi(2),
    })?;
    let lg = gamma.ln();
    Ok((lg + (gamma - 1.0) * w) / ((gamma - 1.0) * lg))
}

/// Regret bound of the optimal switching-cost policy (two actions): `2 kappa L / (1-gamma)`.
/// Without drift (`L = 0`) holding is free and the bound is 0.
pub fn switching_regret(gamma: f64, l: f64, t: f64) -> Result<f64> {
    if l == 0.0 {
        check_gamma(gamma)?;
        return Ok(0.0);
    }
    Ok(2.0 * kappa(gamma, l, t)? * l / (1.0 - gamma))
}

/// Event-level advantage above which the switching-cost optimum has
/// advantage at least `2T`: `(1 + 1/(1-gamma)) 2 kappa L`.
pub fn switching_advantage_threshold(gamma: f64, l: f64, t: f64) -> Result<f64> {
    if l == 0.0 {
        check_gamma(gamma)?;
        return Ok(0.0);
    }
    Ok((1.0 + 1.0 / (1.0 - gamma)) * 2.0 * kappa(gamma, l, t)? * l)
}

/// Every calculator evaluated at one set of inputs. Fields that are out of
/// their formula's domain are `None` and the reason is listed in `errors`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub inputs: BoundInputs,
    pub statistic_value_loss: f64,
    pub statistic_q_error: f64,
    pub aggregation_value_loss: f64,
    pub lossless_amplified_advantage: Option<f64>,
    pub amplified_advantage_lower: Option<f64>,
    pub eps_max: f64,
    pub kappa: Option<f64>,
    pub kappa_ceil: Option<f64>,
    pub switching_regret: Option<f64>,
    pub switching_advantage_threshold: Option<f64>,
    pub errors: Vec<(String, String)>,
}

pub fn bounds_report(inputs: BoundInputs) -> Result<BoundsReport> {
    inputs.validate()?;
    let BoundInputs {
        gamma,
        l,
        k,
        t,
        r_max,
        epsilon,
        a,
    } = inputs;
    let mut errors = Vec::new();
    let mut keep = |name: &str, r: Result<f64>| match r {
        Ok(v) => Some(v),
        Err(e) => {
            errors.push((name.to_string(), e.to_string()));
            None
        }
    };
    let lossless = keep(
        "lossless_amplified_advantage",
        lossless_amplified_advantage(a, k, l, gamma),
    );
    let lossy = keep("amplified_advantage_lower", amplified_advantage_lower(a, k, l, gamma));
    let kap = keep("kappa", kappa(gamma, l, t));
    let regret = keep("switching_regret", switching_regret(gamma, l, t));
    let threshold = keep(
        "switching_advantage_threshold",
        switching_advantage_threshold(gamma, l, t),
    );
    Ok(BoundsReport {
        inputs,
        statistic_value_loss: statistic_value_loss(epsilon, r_max, gamma),
        statistic_q_error: statistic_q_error(epsilon, r_max, gamma),
        aggregation_value_loss: aggregation_value_loss(k, l, gamma),
        lossless_amplified_advantage: lossless,
        amplified_advantage_lower: lossy,
        eps_max: eps_max(k, l, gamma, r_max),
        kappa: kap,
        kappa_ceil: kap.map(f64::ceil),
        switching_regret: regret,
        switching_advantage_threshold: threshold,
        errors,
    })
}
