//! Deterministic trajectories, error envelopes and model constants.
//!
//! Every quantity carrying a power of `n` is assembled in log space and only
//! exponentiated at the end, so `n^{(r-1)L}`-sized terms never overflow.

// `!(x > y)` style guards below are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rset::{binomial, factorial};

/// `|Aut(C_len^r)| = 2 len ((r-2)!)^len`.
pub fn aut_count(r: usize, len: usize) -> Result<u128> {
    if r < 3 || len < 3 {
        return Err(Error::InvalidParams(format!("need r, L >= 3, got r={r}, L={len}")));
    }
    let base = factorial(r as u64 - 2).ok_or(Error::Overflow("aut_count"))?;
    let mut acc = 2 * len as u128;
    for _ in 0..len {
        acc = acc.checked_mul(base).ok_or(Error::Overflow("aut_count"))?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AutEntry {
    pub len: usize,
    pub count: u128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub alpha0: f64,
    /// Failure-probability exponent; carried for reports, unused by any formula.
    pub mu: f64,
    pub aut: Vec<AutEntry>,
    /// `beta[k]` for `k = 0..=ell-2`.
    pub beta: Vec<f64>,
    pub t_m: f64,
}

impl ModelParams {
    pub fn aut(&self, len: usize) -> u128 {
        self.aut[len - 3].count
    }

    /// `floor(n^2 t_M)`, the step horizon.
    pub fn step_horizon(&self) -> u64 {
        ((self.n * self.n) as f64 * self.t_m).floor() as u64
    }

    /// `(L, k)` pairs with `3 <= L <= ell`, `0 <= k <= L-2`.
    pub fn w_indices(&self) -> Vec<(usize, usize)> {
        (3..=self.ell).flat_map(|l| (0..=l - 2).map(move |k| (l, k))).collect()
    }
}

pub fn default_lambda(ell: usize) -> f64 {
    1.1 * ell as f64 / (ell as f64 - 1.0)
}

pub fn alpha0(ell: usize) -> f64 {
    (ell as f64 - 2.0) / (ell as f64 - 1.0)
}

pub fn default_alpha(ell: usize) -> f64 {
    (alpha0(ell) + 1.0) / 2.0
}

/// `t_M = n^{-1 + 1/(ell-1) - lambda loglog n / log n}`.
pub fn horizon(n: usize, ell: usize, lambda: f64) -> f64 {
    let ln_n = (n as f64).ln();
    (ln_n * (-1.0 + 1.0 / (ell as f64 - 1.0)) - lambda * ln_n.ln()).exp()
}

pub fn derive_params(n: usize, r: usize, ell: usize, lambda: Option<f64>, alpha: Option<f64>) -> Result<ModelParams> {
    if n < 16 {
        return Err(Error::InvalidParams(format!("n must be >= 16, got {n}")));
    }
    if r < 3 || ell < 3 {
        return Err(Error::InvalidParams(format!("need r, ell >= 3, got r={r}, ell={ell}")));
    }
    if r > 20 {
        return Err(Error::InvalidParams(format!("r must be <= 20, got {r}")));
    }
    let lambda = lambda.unwrap_or_else(|| default_lambda(ell));
    let a0 = alpha0(ell);
    let alpha = alpha.unwrap_or_else(|| default_alpha(ell));
    let ratio = ell as f64 / (ell as f64 - 1.0);
    if !(lambda > ratio) || !lambda.is_finite() {
        return Err(Error::InvalidParams(format!("lambda must exceed {ratio}, got {lambda}")));
    }
    if !(alpha > a0 && alpha < 1.0) {
        return Err(Error::InvalidParams(format!("alpha must lie in ({a0}, 1), got {alpha}")));
    }
    let aut = (3..=ell).map(|len| Ok(AutEntry { len, count: aut_count(r, len)? })).collect::<Result<Vec<_>>>()?;
    let t_m = horizon(n, ell, lambda);
    let mut params = ModelParams { n, r, ell, lambda, alpha, alpha0: a0, mu: 1.0, aut, beta: vec![], t_m };
    let p_m = 1.0 - (r * (r - 1)) as f64 * t_m;
    if p_m <= 0.0 {
        return Err(Error::OutOfDomain { t: t_m, p: p_m });
    }
    let ln_base = (3.0 * ell as f64).ln() + ln_factorial(r) - (binom2(r) * p_m.ln() + ln_xi(&params, t_m));
    params.beta = (0..=ell - 2).map(|k| (k as f64 * ln_base).exp()).collect();
    Ok(params)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|x| (x as f64).ln()).sum()
}

fn binom2(m: usize) -> f64 {
    (m * m.saturating_sub(1) / 2) as f64
}

/// `k ln x` with the convention `0^0 = 1`.
fn ln_pow(x: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * x.ln()
    }
}

fn ln_xi(params: &ModelParams, t: f64) -> f64 {
    let ln_n = (params.n as f64).ln();
    let ln_rf = ln_factorial(params.r);
    let mut sum = 0.0;
    for len in 3..=params.ell {
        let c = ln_rf + (len as f64).ln() - (params.aut(len) as f64).ln();
        sum += (c + ln_pow(t, len - 1) + (len - 1) as f64 * ln_rf + (len - 2) as f64 * ln_n).exp();
    }
    -sum
}

fn xi_tilde(params: &ModelParams, t: f64) -> f64 {
    let ln_rf = ln_factorial(params.r);
    let nt = params.n as f64 * t;
    (3..=params.ell)
        .map(|len| {
            let c = ((len * (len - 1)) as f64).ln() - (params.aut(len) as f64).ln();
            (c + len as f64 * ln_rf + ln_pow(nt, len - 2)).exp()
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WPoint {
    pub len: usize,
    pub k: usize,
    pub ln_value: f64,
    pub ln_eps: f64,
}

impl WPoint {
    pub fn value(&self) -> f64 {
        self.ln_value.exp()
    }

    pub fn eps(&self) -> f64 {
        self.ln_eps.exp()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub pi: f64,
    pub p: f64,
    pub xi: f64,
    pub xi_tilde: f64,
    pub sigma: f64,
    pub ln_q: f64,
    pub ln_eps_q: f64,
    /// `ln y_m` for `m = 2..r-1` at index `m-2`.
    pub ln_y: Vec<f64>,
    pub ln_eps_y: Vec<f64>,
    pub w: Vec<WPoint>,
}

impl TrajectoryPoint {
    pub fn q(&self) -> f64 {
        self.ln_q.exp()
    }

    pub fn eps_q(&self) -> f64 {
        self.ln_eps_q.exp()
    }

    pub fn y(&self, m: usize) -> f64 {
        self.ln_y[m - 2].exp()
    }

    pub fn eps_y(&self, m: usize) -> f64 {
        self.ln_eps_y[m - 2].exp()
    }

    pub fn w(&self, len: usize, k: usize) -> Option<&WPoint> {
        self.w.iter().find(|w| w.len == len && w.k == k)
    }
}

pub fn evaluate(params: &ModelParams, t: f64) -> Result<TrajectoryPoint> {
    let (n, r) = (params.n as f64, params.r);
    let p = 1.0 - (r * (r - 1)) as f64 * t;
    if !(t >= 0.0) || !(p > 0.0) {
        return Err(Error::OutOfDomain { t, p });
    }
    let ln_n = n.ln();
    let ln_rf = ln_factorial(r);
    let cr = binom2(r);
    let lxi = ln_xi(params, t);
    let sigma = (n.powf(params.alpha) + n * n * t).ln();
    let ln_sigma = sigma.ln();
    let ln_q = r as f64 * ln_n - ln_rf + cr * p.ln() + lxi;
    let ln_eps_q = ln_sigma + (params.alpha + r as f64 - 1.0) * ln_n;
    let (mut ln_y, mut ln_eps_y) = (vec![], vec![]);
    for m in 2..r {
        ln_y.push((r - m) as f64 * ln_n - ln_factorial(r - m) + (cr - binom2(m)) * p.ln() + lxi);
        ln_eps_y.push(ln_sigma + (params.alpha + (r - m) as f64 - 1.0) * ln_n);
    }
    let ln_avail = cr * p.ln() + lxi;
    let ln_tm = params.t_m.ln();
    let w = params
        .w_indices()
        .into_iter()
        .map(|(len, k)| {
            let c = ln_rf + (len as f64).ln() - (params.aut(len) as f64).ln()
                + (binomial(len as u64 - 1, k as u64).unwrap() as f64).ln();
            let e = ((r - 1) * (len - k) + k) as f64 - r as f64;
            let ln_value = c + ln_pow(t, k) + k as f64 * ln_rf + (len - 1 - k) as f64 * ln_avail + e * ln_n;
            let ln_eps =
                params.beta[k].ln() + (k + 2) as f64 * ln_sigma + (params.alpha + e - 1.0) * ln_n + k as f64 * ln_tm;
            WPoint { len, k, ln_value, ln_eps }
        })
        .collect();
    Ok(TrajectoryPoint {
        t,
        pi: (ln_rf + t.ln() - (r as f64 - 2.0) * ln_n).exp(),
        p,
        xi: lxi.exp(),
        xi_tilde: xi_tilde(params, t),
        sigma,
        ln_q,
        ln_eps_q,
        ln_y,
        ln_eps_y,
        w,
    })
}

/// Default finite-difference step, `t_M * 1e-4`.
pub fn default_step(params: &ModelParams) -> f64 {
    params.t_m * 1e-4
}

fn rel_err(fd: f64, rhs: f64) -> f64 {
    (fd - rhs).abs() / rhs.abs()
}

fn check_t(t: f64, h: f64) -> Result<()> {
    if !(h > 0.0) || !(t - h > 0.0) {
        return Err(Error::InvalidParams(format!("need 0 < t - h, h > 0; got t={t}, h={h}")));
    }
    Ok(())
}

/// Relative error of the codegree identity
/// `y_m'/n^2 = -[(C(r,2) - C(m,2)) y_m y_2 / q + y_m xi_tilde / n^2]`,
/// using a central difference for the left side.
pub fn check_derivative_identity_y(params: &ModelParams, t: f64, m: usize, h: f64) -> Result<f64> {
    if m < 2 || m >= params.r {
        return Err(Error::InvalidParams(format!("need 2 <= m < r, got m={m}")));
    }
    check_t(t, h)?;
    let n2 = (params.n * params.n) as f64;
    let (lo, mid, hi) = (evaluate(params, t - h)?, evaluate(params, t)?, evaluate(params, t + h)?);
    let fd = (hi.y(m) - lo.y(m)) / (2.0 * h) / n2;
    let coef = binom2(params.r) - binom2(m);
    let rhs = -(coef * mid.y(m) * mid.y(2) / mid.q() + mid.y(m) * mid.xi_tilde / n2);
    Ok(rel_err(fd, rhs))
}

/// Relative error of the cycle-count identity
/// `w_{L,k}'/n^2 = -w_{L,k} (L-k-1)(r^2(r-1)^2/(2 n^2 p) + xi_tilde/n^2) + (L-k) w_{L,k-1}/q`,
/// the last term absent at `k = 0`.
pub fn check_derivative_identity_w(params: &ModelParams, t: f64, len: usize, k: usize, h: f64) -> Result<f64> {
    if len < 3 || len > params.ell || k + 2 > len {
        return Err(Error::InvalidParams(format!("need 3 <= L <= ell, k <= L-2; got L={len}, k={k}")));
    }
    check_t(t, h)?;
    let (n2, r) = ((params.n * params.n) as f64, params.r as f64);
    let (lo, mid, hi) = (evaluate(params, t - h)?, evaluate(params, t)?, evaluate(params, t + h)?);
    let w = |p: &TrajectoryPoint, k: usize| p.w(len, k).unwrap().value();
    let fd = (w(&hi, k) - w(&lo, k)) / (2.0 * h) / n2;
    let decay = (len - k - 1) as f64 * (r * r * (r - 1.0) * (r - 1.0) / (2.0 * n2 * mid.p) + mid.xi_tilde / n2);
    let mut rhs = -w(&mid, k) * decay;
    if k > 0 {
        rhs += (len - k) as f64 * w(&mid, k - 1) / mid.q();
    }
    Ok(rel_err(fd, rhs))
}

/// Relative error of `xi' = -xi * xi_tilde`.
pub fn check_xi_identity(params: &ModelParams, t: f64, h: f64) -> Result<f64> {
    check_t(t, h)?;
    let (lo, mid, hi) = (evaluate(params, t - h)?, evaluate(params, t)?, evaluate(params, t + h)?);
    let fd = (hi.xi - lo.xi) / (2.0 * h);
    Ok(rel_err(fd, -mid.xi * mid.xi_tilde))
}

/// Freedman tail bound `exp(-z^2 / (2 V (C + z)))`.
pub fn freedman_bound(z: f64, c: f64, v: f64) -> Result<f64> {
    if !(z > 0.0 && c > 0.0 && v > 0.0) {
        return Err(Error::InvalidParams(format!("z, C, V must be positive, got {z}, {c}, {v}")));
    }
    Ok((-(z * z) / (2.0 * v * (c + z))).exp())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformedSeries {
    pub raw: Vec<f64>,
    pub predicted: Vec<f64>,
    pub eps: Vec<f64>,
    pub sign: Sign,
    pub values: Vec<f64>,
}

impl TransformedSeries {
    /// `X(i) <= 0`, i.e. the envelope holds on this side.
    pub fn contained(&self) -> Vec<bool> {
        self.values.iter().map(|&x| x <= 0.0).collect()
    }
}

/// `X^±(i) = ±(raw - predicted) - eps`.
pub fn transform(raw: &[f64], predicted: &[f64], eps: &[f64], sign: Sign) -> Result<TransformedSeries> {
    if raw.len() != predicted.len() {
        return Err(Error::LengthMismatch(raw.len(), predicted.len()));
    }
    if raw.len() != eps.len() {
        return Err(Error::LengthMismatch(raw.len(), eps.len()));
    }
    let s = sign.factor();
    let values = raw.iter().zip(predicted).zip(eps).map(|((&x, &y), &e)| s * (x - y) - e).collect();
    Ok(TransformedSeries { raw: raw.to_vec(), predicted: predicted.to_vec(), eps: eps.to_vec(), sign, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, r: usize, ell: usize) -> ModelParams {
        derive_params(n, r, ell, None, None).unwrap()
    }

    #[test]
    fn defaults_and_validation() {
        let p = params(100, 3, 4);
        assert_eq!(p.beta[0], 1.0);
        assert!((p.alpha0 - 2.0 / 3.0).abs() < 1e-15);
        assert!((p.alpha - 5.0 / 6.0).abs() < 1e-15);
        assert!(derive_params(100, 3, 4, Some(4.0 / 3.0), None).is_err());
        assert!(derive_params(100, 3, 4, None, Some(0.6)).is_err());
        assert!(derive_params(100, 3, 4, None, Some(1.0)).is_err());
        assert!(derive_params(15, 3, 4, None, None).is_err());
        assert!(derive_params(100, 2, 4, None, None).is_err());
    }

    #[test]
    #[allow(clippy::excessive_precision)]
    fn horizon_matches_high_precision_value() {
        // 40-digit reference value
        let t = horizon(10_000, 4, 1.47);
        assert!((t / 8.238_498_817_308_678_392_5e-5 - 1.0).abs() < 1e-13);
        let p = derive_params(10_000, 3, 4, Some(1.47), None).unwrap();
        assert_eq!(p.t_m, t);
        assert!((horizon(100, 4, default_lambda(4)) / 4.942_040_835_447_210_370_9e-3 - 1.0).abs() < 1e-13);
    }

    #[test]
    fn aut_closed_form() {
        assert_eq!(aut_count(3, 3).unwrap(), 6);
        assert_eq!(aut_count(3, 4).unwrap(), 8);
        assert_eq!(aut_count(4, 3).unwrap(), 48);
        assert!(aut_count(2, 3).is_err());
    }

    #[test]
    fn values_at_zero() {
        let p = params(100, 3, 4);
        let pt = evaluate(&p, 0.0).unwrap();
        assert_eq!(pt.p, 1.0);
        assert_eq!(pt.xi, 1.0);
        assert_eq!(pt.pi, 0.0);
        assert_eq!(pt.xi_tilde, 0.0);
        assert!((pt.q() - 1e6 / 6.0).abs() < 1e-6);
        assert!((pt.sigma - p.alpha * 100f64.ln()).abs() < 1e-12);
        for len in 3..=4 {
            let w0 = pt.w(len, 0).unwrap().value();
            let lead = 6.0 * len as f64 / p.aut(len) as f64 * 100f64.powi(2 * len as i32 - 3);
            assert!((w0 / lead - 1.0).abs() < 1e-12);
            assert_eq!(pt.w(len, 1).unwrap().value(), 0.0);
        }
    }

    #[test]
    fn p_example_and_domain() {
        let p = params(100, 3, 4);
        assert!((evaluate(&p, 0.05).unwrap().p - 0.7).abs() < 1e-15);
        assert!(matches!(evaluate(&p, 1.0 / 6.0), Err(Error::OutOfDomain { .. })));
        assert!(evaluate(&p, -1e-9).is_err());
    }

    #[test]
    fn aggregation_and_envelope_ratio() {
        for (r, ell) in [(3, 4), (4, 5), (5, 3)] {
            let p = params(200, r, ell);
            let t = p.t_m * 0.37;
            let pt = evaluate(&p, t).unwrap();
            let n2 = 200.0f64 * 200.0;
            let agg = n2 * pt.p / (r * (r - 1)) as f64 * pt.y(2);
            assert!((agg / pt.q() - 1.0).abs() < 1e-12);
            for m in 2..r {
                let ratio = pt.eps_q() / pt.q() * pt.y(m) / pt.eps_y(m);
                let exact =
                    (factorial(r as u64).unwrap() / factorial((r - m) as u64).unwrap()) as f64 / pt.p.powf(binom2(m));
                assert!((ratio / exact - 1.0).abs() < 1e-12, "r={r} m={m}");
            }
        }
    }

    #[test]
    fn closing_cycles_sum_to_xi_tilde() {
        let p = params(150, 3, 5);
        let pt = evaluate(&p, p.t_m * 0.6).unwrap();
        let sum: f64 = (3..=5).map(|l| pt.w(l, l - 2).unwrap().value() / pt.q()).sum();
        assert!((sum / (pt.xi_tilde / 150.0f64.powi(2)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn derivative_identities_converge() {
        let p = params(100, 3, 4);
        let h = default_step(&p);
        let t = p.t_m / 2.0;
        assert!(check_derivative_identity_y(&p, t, 2, h).unwrap() < 1e-6);
        assert!(check_derivative_identity_w(&p, t, 4, 1, h).unwrap() < 1e-6);
        assert!(check_derivative_identity_w(&p, t, 3, 0, h).unwrap() < 1e-6);
        assert!(check_xi_identity(&p, t, h).unwrap() < 1e-6);
        let coarse = check_derivative_identity_y(&p, t, 2, h * 100.0).unwrap();
        let fine = check_derivative_identity_y(&p, t, 2, h * 10.0).unwrap();
        assert!(fine < coarse);
        assert!(check_derivative_identity_y(&p, t, 3, h).is_err());
    }

    #[test]
    fn freedman_examples() {
        assert!((freedman_bound(1.0, 1.0, 1.0).unwrap() - (-0.25f64).exp()).abs() < 1e-15);
        assert!(freedman_bound(1.0, 1.0, 2.0).unwrap() > freedman_bound(1.0, 1.0, 1.0).unwrap());
        assert!(freedman_bound(1.0, 2.0, 1.0).unwrap() > freedman_bound(1.0, 1.0, 1.0).unwrap());
        assert!(freedman_bound(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn transform_boundaries() {
        let pred = [10.0, 20.0];
        let eps = [1.0, 2.0];
        let s = transform(&pred, &pred, &eps, Sign::Plus).unwrap();
        assert_eq!(s.values, vec![-1.0, -2.0]);
        let s = transform(&[11.0, 22.0], &pred, &eps, Sign::Plus).unwrap();
        assert_eq!(s.values, vec![0.0, 0.0]);
        let s = transform(&[8.0, 16.0], &pred, &eps, Sign::Minus).unwrap();
        assert_eq!(s.values, vec![1.0, 2.0]);
        assert_eq!(s.contained(), vec![false, false]);
        assert!(matches!(transform(&[1.0], &pred, &eps, Sign::Plus), Err(Error::LengthMismatch(1, 2))));
    }
}
