//! Closed-form pricing: bonds, backward-looking rates, caplets, futures and
//! curve calibration of the deterministic drift.

use crate::drift::{Drift, PiecewiseConstant};
use crate::error::{Error, Result};
use crate::kernels::b_kernel;
use crate::model::{GaussHwModel, HullWhiteParams, MultiFactorModel};
use crate::num::{norm_cdf, Real};
use crate::schedule::{self, Schedule};

/// `Xi(t, T)`: the state-independent part of the log bond price,
/// `A'(t, T) + sum_i m_i W_i(T) - Var(R_T | .)/2`, so that
/// `P(t, T) = exp(-rho_t B'(t, T) - Xi(t, T))`.
pub fn xi<R: Real>(model: &GaussHwModel<R>, t: R, big_t: R) -> Result<R> {
    Ok(model.r_mean(t, big_t, R::zero(), R::zero())? - R::half() * model.r_var(t, big_t))
}

/// Zero-coupon bond price `P(t, T)` for `t <= T`.
pub fn bond_price<R: Real>(model: &GaussHwModel<R>, t: R, big_t: R, rho_t: R) -> Result<R> {
    if t > big_t {
        return Err(Error::Domain(format!("bond price needs t <= T, got ({t}, {big_t})")));
    }
    let bp = schedule::kernel_b_prime(t, big_t, model.beta(), model.schedule())?;
    Ok((-rho_t * bp - xi(model, t, big_t)?).exp())
}

/// Bond price in a multi-factor model; `rho` holds the factor states.
pub fn bond_price_multi<R: Real>(
    model: &MultiFactorModel<R>,
    t: R,
    big_t: R,
    rho: &[R],
) -> Result<R> {
    if rho.len() != model.factors().len() {
        return Err(Error::Data("one rate state per factor is required".into()));
    }
    let mut p = R::one();
    for (f, &x) in model.factors().iter().zip(rho) {
        p = p * bond_price(f, t, big_t, x)?;
    }
    Ok(p)
}

/// Forward term rate `R(t, S, T) = (P(t, S)/P(t, T) - 1)/(T - S)` for
/// `t <= S < T`.
pub fn forward_term_rate<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    s: R,
    big_t: R,
    rho_t: R,
) -> Result<R> {
    if !(t <= s && s < big_t) {
        return Err(Error::Domain(format!(
            "forward term rate needs t <= S < T, got ({t}, {s}, {big_t})"
        )));
    }
    let ps = bond_price(model, t, s, rho_t)?;
    let pt = bond_price(model, t, big_t, rho_t)?;
    Ok((ps / pt - R::one()) / (big_t - s))
}

/// Realized rate states at roll-over dates, used by path-dependent
/// quantities (extended bond prices, backward-looking rates).
#[derive(Clone, Debug)]
pub struct Fixings<R> {
    data: Vec<(R, R)>,
}

impl<R: Real> Fixings<R> {
    pub fn new(mut data: Vec<(R, R)>) -> Result<Self> {
        data.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if data.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::Data("duplicate fixing date".into()));
        }
        Ok(Self { data })
    }

    pub fn get(&self, date: R) -> Result<R> {
        self.data
            .iter()
            .find(|(d, _)| *d == date)
            .map(|(_, x)| *x)
            .ok_or_else(|| Error::Data(format!("no fixing recorded at date {date}")))
    }
}

/// Roll-over dates with the origin prepended, so consecutive entries bound
/// the accrual periods of the roll-over investment.
fn rolls_with_origin<R: Real>(schedule: &Schedule<R>) -> Vec<R> {
    let mut rolls = schedule.roll_over_dates().to_vec();
    if rolls.first() != Some(&R::zero()) {
        rolls.insert(0, R::zero());
    }
    rolls
}

/// Bond price extended past maturity: for `t >= s`,
/// `P(t, s) = P(t, t_next)/P(t_prev, t_next) * prod 1/P(t_n, t_n+1)` over
/// the roll periods fully inside `[s, t]`, where `t_prev`/`t_next` bound
/// the period containing `t`. Needs realized states at the involved dates.
pub fn bond_price_extended<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    s: R,
    rho_t: R,
    fixings: &Fixings<R>,
) -> Result<R> {
    if t < s {
        return bond_price(model, t, s, rho_t);
    }
    let rolls = rolls_with_origin(model.schedule());
    let next = rolls
        .iter()
        .copied()
        .find(|&x| x > t)
        .ok_or_else(|| Error::Data(format!("no roll-over date after t = {t}")))?;
    let prev = rolls
        .iter()
        .copied()
        .filter(|&x| x <= t)
        .last()
        .ok_or_else(|| Error::Data(format!("no roll-over date at or before t = {t}")))?;
    let mut p = bond_price(model, t, next, rho_t)?
        / bond_price(model, prev, next, fixings.get(prev)?)?;
    for w in rolls.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= s && hi <= t {
            p = p / bond_price(model, lo, hi, fixings.get(lo)?)?;
        }
    }
    Ok(p)
}

/// Backward-looking rate over `[s, T]` as the compounded product of
/// realized period bonds: `(prod 1/P(t_n, t_n+1) - 1)/(T - s)` over roll
/// periods fully inside `[s, T]`.
pub fn backward_rate_compounded<R: Real>(
    model: &GaussHwModel<R>,
    s: R,
    big_t: R,
    fixings: &Fixings<R>,
) -> Result<R> {
    let rolls = rolls_with_origin(model.schedule());
    let mut prod = R::one();
    for w in rolls.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if lo >= s && hi <= big_t {
            prod = prod / bond_price(model, lo, hi, fixings.get(lo)?)?;
        }
    }
    Ok((prod - R::one()) / (big_t - s))
}

/// Backward-looking rate over `[s, T]` through the roll-over numeraire:
/// the numeraire accrues `log(1 + r_prev dt)` at each roll-over date, so
/// its ratio over `(s, T]` compounds the same realized period bonds.
pub fn backward_rate_via_numeraire<R: Real>(
    model: &GaussHwModel<R>,
    s: R,
    big_t: R,
    fixings: &Fixings<R>,
) -> Result<R> {
    let rolls = rolls_with_origin(model.schedule());
    let mut log_ratio = R::zero();
    for w in rolls.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // the numeraire jump at hi records the rate fixed at lo
        if hi > s && hi <= big_t {
            log_ratio -= bond_price(model, lo, hi, fixings.get(lo)?)?.ln();
        }
    }
    Ok((log_ratio.exp() - R::one()) / (big_t - s))
}

/// Conditional law parameters of `rho_S` under the `S`-forward measure:
/// `rho_S ~ N(rho_t e^{beta (S - t)} + gamma1, gamma2)` given time-`t`
/// information.
#[derive(Clone, Copy, Debug)]
pub struct ForwardMeasureParams<R> {
    pub gamma1: R,
    pub gamma2: R,
}

/// The mean shift `gamma1` is the drift convolution minus the covariance
/// of `rho_S` with the accrued numeraire exponent (exponential tilting of
/// a joint Gaussian); `gamma2 = Var(rho_S)` is measure-invariant.
pub fn forward_measure_params<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    s: R,
) -> Result<ForwardMeasureParams<R>> {
    Ok(ForwardMeasureParams {
        gamma1: model.rho_mean(t, s, R::zero())? - model.rho_r_cov(t, s),
        gamma2: model.rho_var(t, s),
    })
}

/// A caplet on the forward-looking rate over `[start, end]`, paying
/// `(end - start)(F(start, end) - strike)^+` at `end`.
#[derive(Clone, Copy, Debug)]
pub struct CapletSpec<R> {
    pub start: R,
    pub end: R,
    pub strike: R,
}

/// Caplet valuation with the intermediates needed by hedging.
#[derive(Clone, Copy, Debug)]
pub struct CapletEval<R> {
    pub price: R,
    /// `P(t, start)` at the valuation state.
    pub bond_start: R,
    /// Upper Gaussian argument; meaningful only when `gamma2 > 0`.
    pub d1: R,
    pub d2: R,
}

pub fn caplet_eval<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    rho_t: R,
    spec: &CapletSpec<R>,
) -> Result<CapletEval<R>> {
    let (s, big_t, k) = (spec.start, spec.end, spec.strike);
    if !(t <= s && s < big_t) {
        return Err(Error::Domain(format!(
            "caplet valuation needs t <= start < end, got t = {t}, [{s}, {big_t}]"
        )));
    }
    let k_acc = R::one() + (big_t - s) * k;
    if k_acc <= R::zero() {
        return Err(Error::Domain("caplet strike accrual must be positive".into()));
    }
    let p_ts = bond_price(model, t, s, rho_t)?;
    let bp_st = schedule::kernel_b_prime(s, big_t, model.beta(), model.schedule())?;
    let xi_st = xi(model, s, big_t)?;
    let fm = forward_measure_params(model, t, s)?;
    let mu = rho_t * (model.beta() * (s - t)).exp() + fm.gamma1;

    if fm.gamma2 <= R::zero() {
        // degenerate case: rho_start is deterministic under the forward
        // measure, the caplet collapses to its discounted intrinsic value
        let p_st = (-mu * bp_st - xi_st).exp();
        let payoff = (R::one() / k_acc - p_st).max(R::zero());
        return Ok(CapletEval {
            price: k_acc * p_ts * payoff,
            bond_start: p_ts,
            d1: R::zero(),
            d2: R::zero(),
        });
    }

    let vol = fm.gamma2.sqrt();
    let d1 = (-k_acc.ln() + xi_st) / (bp_st * vol) + mu / vol;
    let d2 = d1 - bp_st * vol;
    let adj = (-xi_st - bp_st * (mu - bp_st * fm.gamma2 * R::half())).exp();
    let price = p_ts * (norm_cdf(d1) - k_acc * adj * norm_cdf(d2));
    Ok(CapletEval { price, bond_start: p_ts, d1, d2 })
}

pub fn caplet_price<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    rho_t: R,
    spec: &CapletSpec<R>,
) -> Result<R> {
    Ok(caplet_eval(model, t, rho_t, spec)?.price)
}

/// Floorlet paying `(end - start)(strike - F(start, end))^+` at `end`,
/// from put-call parity with the single-period swap value.
pub fn floorlet_price<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    rho_t: R,
    spec: &CapletSpec<R>,
) -> Result<R> {
    let cap = caplet_price(model, t, rho_t, spec)?;
    let k_acc = R::one() + (spec.end - spec.start) * spec.strike;
    let p_s = bond_price(model, t, spec.start, rho_t)?;
    let p_t = bond_price(model, t, spec.end, rho_t)?;
    Ok(cap - p_s + k_acc * p_t)
}

/// Averaging kernel of a futures contract with reference period `[s, T]`:
/// `(B(T - t) - B(s - t))/(T - s) = e^{beta (s - t)} B(T - s)/(T - s)`.
pub fn futures_kernel<R: Real>(beta: R, t: R, s: R, big_t: R) -> R {
    (beta * (s - t)).exp() * b_kernel(beta, big_t - s) / (big_t - s)
}

/// Futures rate for a contract settling at `T` on `(R_T - R_s)/(T - s)`,
/// valued under the pricing measure of `model` (pass the minimal-measure
/// drift when hedging with a non-martingale futures curve). Requires a
/// purely Lebesgue accrual: roll-over atoms in `(t, T]` are not supported.
pub fn futures_rate<R: Real>(
    model: &GaussHwModel<R>,
    t: R,
    rho_t: R,
    s: R,
    big_t: R,
) -> Result<R> {
    if !(t <= s && s < big_t) {
        return Err(Error::Domain(format!(
            "futures rate needs t <= s < T, got ({t}, {s}, {big_t})"
        )));
    }
    if model.schedule().has_atoms_in(t, big_t) {
        return Err(Error::Unsupported(
            "futures rate requires no roll-over dates in the reference window".into(),
        ));
    }
    let p = model.params();
    let mut f = rho_t * futures_kernel(p.beta, t, s, big_t)
        + (p.alpha.convolved_integral(t, big_t, p.beta)?
            - p.alpha.convolved_integral(t, s, p.beta)?)
            / (big_t - s);
    for j in p.jumps.iter().filter(|j| j.date > t && j.date <= big_t) {
        if j.date <= s {
            f += j.mean * futures_kernel(p.beta, j.date, s, big_t);
        } else {
            f += j.mean * b_kernel(p.beta, big_t - j.date) / (big_t - s);
        }
    }
    Ok(f)
}

/// Discount factors observed at time zero.
#[derive(Clone, Debug)]
pub struct DiscountCurve<R> {
    pillars: Vec<(R, R)>,
}

impl<R: Real> DiscountCurve<R> {
    pub fn new(pillars: Vec<(R, R)>) -> Result<Self> {
        if pillars.is_empty() {
            return Err(Error::Config("discount curve needs at least one pillar".into()));
        }
        if pillars.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Config("curve pillars must have increasing maturities".into()));
        }
        if pillars.iter().any(|&(t, d)| !(t > R::zero() && d > R::zero() && d.is_finite())) {
            return Err(Error::Config(
                "curve pillars need positive maturities and discount factors".into(),
            ));
        }
        Ok(Self { pillars })
    }

    pub fn pillars(&self) -> &[(R, R)] {
        &self.pillars
    }
}

const FIT_TOL: f64 = 1e-12;

/// Bootstraps a piecewise-constant drift so the model reproduces the curve
/// at every pillar, working left to right with one drift segment per
/// pillar interval. The drift enters the log bond price monotonically, so
/// each segment is solved by bisection after bracket expansion.
pub fn fit_drift_to_curve<R: Real>(
    params: &HullWhiteParams<R>,
    schedule: &Schedule<R>,
    curve: &DiscountCurve<R>,
) -> Result<HullWhiteParams<R>> {
    let n = curve.pillars.len();
    let breakpoints: Vec<R> = curve.pillars.iter().take(n - 1).map(|&(t, _)| t).collect();
    let mut values = vec![R::zero(); n];

    for (k, &(t_k, df_k)) in curve.pillars.iter().enumerate() {
        let target = df_k.ln();
        let objective = |v: R, values: &mut Vec<R>| -> Result<R> {
            values[k] = v;
            let fitted = HullWhiteParams {
                alpha: Drift::PiecewiseConstant(PiecewiseConstant::new(
                    breakpoints.clone(),
                    values.clone(),
                )?),
                ..params.clone()
            };
            let m = GaussHwModel::new(fitted, schedule.clone())?;
            Ok(bond_price(&m, R::zero(), t_k, params.rho0)?.ln() - target)
        };

        // log P(0, t_k) decreases in the segment value
        let mut lo = -R::one();
        let mut hi = R::one();
        let mut f_lo = objective(lo, &mut values)?;
        let mut f_hi = objective(hi, &mut values)?;
        let mut tries = 0;
        while f_lo.signum() == f_hi.signum() {
            tries += 1;
            if tries > 60 {
                return Err(Error::Calibration {
                    pillar: t_k.to_f64().unwrap_or(f64::NAN),
                    reason: "could not bracket the drift segment".into(),
                });
            }
            lo = lo * R::two();
            hi = hi * R::two();
            f_lo = objective(lo, &mut values)?;
            f_hi = objective(hi, &mut values)?;
        }
        for _ in 0..200 {
            let mid = (lo + hi) * R::half();
            let f_mid = objective(mid, &mut values)?;
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
            if hi - lo < R::c(FIT_TOL) {
                break;
            }
        }
        values[k] = (lo + hi) * R::half();
        // evaluation has the side effect of storing the segment
        let residual = objective(values[k], &mut values)?;
        if residual.abs() > R::c(1e-9) {
            return Err(Error::Calibration {
                pillar: t_k.to_f64().unwrap_or(f64::NAN),
                reason: format!(
                    "residual {:e} after bisection",
                    residual.to_f64().unwrap_or(f64::NAN)
                ),
            });
        }
    }

    Ok(HullWhiteParams {
        alpha: Drift::PiecewiseConstant(PiecewiseConstant::new(breakpoints, values)?),
        ..params.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::JumpSpec;
    use crate::quad;
    use num_complex::Complex;

    fn test_model() -> GaussHwModel<f64> {
        let schedule = Schedule::new(vec![0.25, 0.5, 0.75, 1.0, 1.25], vec![0.3, 0.8], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![
                JumpSpec { date: 0.3, mean: 0.1, std: 0.4 },
                JumpSpec { date: 0.8, mean: -0.05, std: 0.2 },
            ],
        };
        GaussHwModel::new(params, schedule).unwrap()
    }

    fn smooth_model() -> GaussHwModel<f64> {
        // no roll-over atoms, for futures tests
        let schedule = Schedule::new(vec![], vec![0.3], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![JumpSpec { date: 0.3, mean: 0.1, std: 0.4 }],
        };
        GaussHwModel::new(params, schedule).unwrap()
    }

    #[test]
    fn bond_matches_laplace_transform_of_integrated_rate() {
        let m = test_model();
        let (t, big_t, rho_t) = (0.1, 1.7, 0.015);
        let p = bond_price(&m, t, big_t, rho_t).unwrap();
        let law = m.joint_law(t, big_t, rho_t, 0.0).unwrap();
        let e = law.mgf([Complex::from(0.0), Complex::from(-1.0)]);
        assert!((p - e.re).abs() < 1e-15 && e.im == 0.0);
    }

    #[test]
    fn bond_at_own_maturity_is_one() {
        let m = test_model();
        assert!((bond_price(&m, 0.4, 0.4, 0.02).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_measure_mean_shift_matches_quadrature() {
        // gamma1 = a(t, S) + jump shifts - sigma^2 int_t^S B'(u, S) e^{beta (S - u)} du
        let m = test_model();
        let (t, s) = (0.1, 1.2);
        let p = m.params();
        let fm = forward_measure_params(&m, t, s).unwrap();
        let diffusion = p.sigma
            * p.sigma
            * quad::integrate(
                &|u: f64| {
                    schedule::kernel_b_prime(u, s, p.beta, m.schedule()).unwrap()
                        * (p.beta * (s - u)).exp()
                },
                t,
                s,
                1e-12,
            )
            .unwrap();
        let mut expect = p.alpha.convolved(t, s, p.beta).unwrap() - diffusion;
        for j in &p.jumps {
            if j.date > t && j.date <= s {
                expect += (j.mean - j.std * j.std * m.jump_weight(j.date, s))
                    * (p.beta * (s - j.date)).exp();
            }
        }
        assert!((fm.gamma1 - expect).abs() < 1e-10, "{} vs {expect}", fm.gamma1);
        assert!((fm.gamma2 - m.rho_var(t, s)).abs() < 1e-18);
    }

    #[test]
    fn forward_measure_prices_terminal_bond() {
        // E^S[P(S, T)] must equal P(t, T)/P(t, S); under the forward
        // measure rho_S is Gaussian so the expectation is explicit
        let m = test_model();
        let (t, s, big_t, rho_t) = (0.1, 1.2, 1.7, 0.015);
        let fm = forward_measure_params(&m, t, s).unwrap();
        let mu = rho_t * (m.beta() * (s - t)).exp() + fm.gamma1;
        let bp = schedule::kernel_b_prime(s, big_t, m.beta(), m.schedule()).unwrap();
        let expect = (-mu * bp + 0.5 * bp * bp * fm.gamma2 - xi(&m, s, big_t).unwrap()).exp();
        let ratio = bond_price(&m, t, big_t, rho_t).unwrap()
            / bond_price(&m, t, s, rho_t).unwrap();
        assert!(
            ((expect - ratio) / ratio).abs() < 1e-13,
            "{expect} vs {ratio}"
        );
    }

    #[test]
    fn caplet_matches_gaussian_quadrature() {
        let m = test_model();
        let spec = CapletSpec { start: 1.2, end: 1.7, strike: 0.03 };
        let (t, rho_t) = (0.1, 0.015);
        let price = caplet_price(&m, t, rho_t, &spec).unwrap();

        // direct integration of K' P(t,S) (1/K' - P(S,T))^+ over the
        // forward-measure law of rho_S
        let k_acc = 1.0 + (spec.end - spec.start) * spec.strike;
        let fm = forward_measure_params(&m, t, spec.start).unwrap();
        let mu = rho_t * (m.beta() * (spec.start - t)).exp() + fm.gamma1;
        let sd = fm.gamma2.sqrt();
        let bp = schedule::kernel_b_prime(spec.start, spec.end, m.beta(), m.schedule()).unwrap();
        let xi_st = xi(&m, spec.start, spec.end).unwrap();
        // payoff positive for y above the break-even state
        let y0 = (k_acc.ln() - xi_st) / bp;
        let integral = quad::integrate(
            &|y: f64| {
                (1.0 / k_acc - (-y * bp - xi_st).exp())
                    * crate::num::norm_pdf((y - mu) / sd)
                    / sd
            },
            y0,
            mu + 12.0 * sd,
            1e-14,
        )
        .unwrap();
        let oracle =
            k_acc * bond_price(&m, t, spec.start, rho_t).unwrap() * integral;
        assert!(
            ((price - oracle) / oracle).abs() < 1e-10,
            "{price} vs {oracle}"
        );
    }

    #[test]
    fn caplet_floorlet_parity() {
        let m = test_model();
        let spec = CapletSpec { start: 1.2, end: 1.7, strike: 0.03 };
        let floor = floorlet_price(&m, 0.1, 0.015, &spec).unwrap();
        // direct floorlet: swap Phi signs in the Gaussian formula
        let k_acc: f64 = 1.0 + 0.5 * 0.03;
        let fm = forward_measure_params(&m, 0.1, 1.2).unwrap();
        let mu = 0.015 * (m.beta() * 1.1f64).exp() + fm.gamma1;
        let bp = schedule::kernel_b_prime(1.2, 1.7, m.beta(), m.schedule()).unwrap();
        let xi_st = xi(&m, 1.2, 1.7).unwrap();
        let vol = fm.gamma2.sqrt();
        let d1 = (-k_acc.ln() + xi_st) / (bp * vol) + mu / vol;
        let d2 = d1 - bp * vol;
        let adj = (-xi_st - bp * (mu - 0.5 * bp * fm.gamma2)).exp();
        let p_ts = bond_price(&m, 0.1, 1.2, 0.015).unwrap();
        let direct = p_ts * (k_acc * adj * norm_cdf(-d2) - norm_cdf(-d1));
        assert!((floor - direct).abs() < 1e-14, "{floor} vs {direct}");
        assert!(floor > 0.0);
    }

    #[test]
    fn caplet_degenerate_volatility() {
        // sigma = 0 and no jumps before start: deterministic rho_start
        let schedule = Schedule::new(vec![0.5], vec![], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.0,
            alpha: Drift::constant(0.01),
            jumps: vec![],
        };
        let m = GaussHwModel::new(params, schedule).unwrap();
        let spec = CapletSpec { start: 1.0, end: 1.5, strike: 0.0001 };
        let price = caplet_price(&m, 0.0, 0.02, &spec).unwrap();
        let k_acc: f64 = 1.0 + 0.5 * 0.0001;
        let rho_s = m.rho_mean(0.0, 1.0, 0.02).unwrap();
        let p_st = bond_price(&m, 1.0, 1.5, rho_s).unwrap();
        let expect = k_acc
            * bond_price(&m, 0.0, 1.0, 0.02).unwrap()
            * (1.0 / k_acc - p_st).max(0.0);
        assert!((price - expect).abs() < 1e-15);
        assert!(price > 0.0);
    }

    #[test]
    fn futures_rate_is_expected_settlement() {
        // with a martingale futures curve the rate equals the expected
        // average of the rate increment over the reference period
        let m = smooth_model();
        let (t, rho_t, s, big_t) = (0.0, 0.02, 0.5, 0.75);
        let f = futures_rate(&m, t, rho_t, s, big_t).unwrap();
        let expect = (m.r_mean(t, big_t, rho_t, 0.0).unwrap()
            - m.r_mean(t, s, rho_t, 0.0).unwrap())
            / (big_t - s);
        assert!((f - expect).abs() < 1e-14, "{f} vs {expect}");
    }

    #[test]
    fn futures_rejects_roll_over_atoms() {
        let m = test_model();
        assert!(matches!(
            futures_rate(&m, 0.0, 0.02, 0.5, 0.75),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn backward_rate_routes_agree() {
        // for accrual windows aligned with roll-over dates, the compounded
        // product and the numeraire-ratio computation coincide
        let m = test_model();
        let fixings = Fixings::new(vec![
            (0.0, 0.02),
            (0.25, 0.023),
            (0.5, 0.019),
            (0.75, 0.021),
            (1.0, 0.02),
        ])
        .unwrap();
        let a = backward_rate_compounded(&m, 0.25, 1.0, &fixings).unwrap();
        let b = backward_rate_via_numeraire(&m, 0.25, 1.0, &fixings).unwrap();
        assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        assert!(a > 0.0);
    }

    #[test]
    fn extended_bond_reduces_to_plain_bond_before_maturity() {
        let m = test_model();
        let fixings = Fixings::new(vec![]).unwrap();
        let p1 = bond_price_extended(&m, 0.1, 0.6, 0.02, &fixings).unwrap();
        let p2 = bond_price(&m, 0.1, 0.6, 0.02).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn extended_bond_compounds_realized_periods() {
        let m = test_model();
        let fixings =
            Fixings::new(vec![(0.25, 0.023), (0.5, 0.019), (0.75, 0.021)]).unwrap();
        // t = 0.8 sits in the period (0.75, 1.0]; maturity s = 0.25
        let p = bond_price_extended(&m, 0.8, 0.25, 0.02, &fixings).unwrap();
        let expect = bond_price(&m, 0.8, 1.0, 0.02).unwrap()
            / bond_price(&m, 0.75, 1.0, 0.021).unwrap()
            / bond_price(&m, 0.25, 0.5, 0.023).unwrap()
            / bond_price(&m, 0.5, 0.75, 0.019).unwrap();
        assert!((p - expect).abs() < 1e-15);
        // forward term rate via extended bonds matches the backward rate
        // route once the accrual window has fully elapsed
        let r = backward_rate_compounded(&m, 0.25, 0.75, &fixings).unwrap();
        let p_num = bond_price_extended(&m, 0.8, 0.25, 0.02, &fixings).unwrap();
        let p_den = bond_price_extended(&m, 0.8, 0.75, 0.02, &fixings).unwrap();
        let r2 = (p_num / p_den - 1.0) / 0.5;
        assert!((r - r2).abs() < 1e-14, "{r} vs {r2}");
    }

    #[test]
    fn multi_factor_bond_is_product() {
        let schedule = Schedule::new(vec![0.5], vec![0.3, 0.6], 2.0).unwrap();
        let f1: HullWhiteParams<f64> = HullWhiteParams {
            rho0: 0.01,
            beta: -0.2,
            sigma: 0.01,
            alpha: Drift::constant(0.01),
            jumps: vec![JumpSpec { date: 0.3, mean: 0.1, std: 0.4 }],
        };
        let f2 = HullWhiteParams {
            rho0: 0.0,
            beta: -2.0,
            sigma: 0.0,
            alpha: Drift::zero(),
            jumps: vec![JumpSpec { date: 0.6, mean: 0.1, std: 0.4 }],
        };
        let mf = MultiFactorModel::new(vec![f1, f2], schedule).unwrap();
        let p = bond_price_multi(&mf, 0.0, 1.0, &[0.01, 0.0]).unwrap();
        let p1 = bond_price(&mf.factors()[0], 0.0, 1.0, 0.01).unwrap();
        let p2 = bond_price(&mf.factors()[1], 0.0, 1.0, 0.0).unwrap();
        assert!((p - p1 * p2).abs() < 1e-16);
        assert!(bond_price_multi(&mf, 0.0, 1.0, &[0.01]).is_err());
    }

    #[test]
    fn drift_fit_reproduces_curve() {
        let schedule = Schedule::new(vec![0.25, 0.5, 0.75, 1.0], vec![0.3], 5.0).unwrap();
        let base = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::zero(),
            jumps: vec![JumpSpec { date: 0.3, mean: 0.1, std: 0.4 }],
        };
        // target curve produced by a known drift, sampled at pillars
        let truth = HullWhiteParams {
            alpha: Drift::PiecewiseConstant(
                PiecewiseConstant::new(vec![0.6, 1.4], vec![0.01, 0.03, -0.02]).unwrap(),
            ),
            ..base.clone()
        };
        let truth_model = GaussHwModel::new(truth, schedule.clone()).unwrap();
        let pillars: Vec<(f64, f64)> = [0.4, 0.6, 1.0, 1.4, 2.0, 3.0]
            .iter()
            .map(|&t| (t, bond_price(&truth_model, 0.0, t, 0.02).unwrap()))
            .collect();
        let curve = DiscountCurve::new(pillars.clone()).unwrap();
        let fitted = fit_drift_to_curve(&base, &schedule, &curve).unwrap();
        let fitted_model = GaussHwModel::new(fitted, schedule).unwrap();
        for &(t, df) in &pillars {
            let p = bond_price(&fitted_model, 0.0, t, 0.02).unwrap();
            assert!(((p - df) / df).abs() < 1e-10, "pillar {t}: {p} vs {df}");
        }
    }
}
