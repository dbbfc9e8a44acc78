//! Gaussian short-rate model with mean reversion, deterministic drift and
//! independent Gaussian jumps at scheduled dates.
//!
//! The rate solves `d rho = (alpha(t) + beta rho) dt + sigma dW + dJ` where
//! `J` places a `N(mean_i, std_i^2)` jump at each scheduled date `s_i`.
//! The running benchmark integral is `R_T = R_t + int_(t,T] rho_u eta(du)`,
//! eta being Lebesgue measure plus unit atoms at the roll-over dates.
//!
//! Conditionally on time-`t` information, `(rho_T, R_T)` is jointly
//! Gaussian; this module provides its exact moments in closed form, kept
//! finite as `beta -> 0`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::drift::Drift;
use crate::error::{Error, Result};
use crate::kernels::{b_integral, b_kernel, b_squared_integral, cosh_kernel};
use crate::num::Real;
use crate::schedule::{self, Schedule};

/// One scheduled Gaussian jump of the rate.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JumpSpec<R> {
    pub date: R,
    pub mean: R,
    pub std: R,
}

/// Parameters of one factor.
#[derive(Clone, Debug)]
pub struct HullWhiteParams<R: Real> {
    pub rho0: R,
    pub beta: R,
    pub sigma: R,
    pub alpha: Drift<R>,
    pub jumps: Vec<JumpSpec<R>>,
}

impl<R: Real> HullWhiteParams<R> {
    fn validate(&self) -> Result<()> {
        if !(self.rho0.is_finite() && self.beta.is_finite() && self.sigma.is_finite()) {
            return Err(Error::NonFinite("model parameters".into()));
        }
        if self.sigma < R::zero() {
            return Err(Error::Config("sigma must be nonnegative".into()));
        }
        for j in &self.jumps {
            if !(j.date.is_finite() && j.mean.is_finite() && j.std.is_finite()) {
                return Err(Error::NonFinite("jump parameters".into()));
            }
            if j.std < R::zero() {
                return Err(Error::Config("jump std must be nonnegative".into()));
            }
        }
        if self.jumps.windows(2).any(|w| w[0].date >= w[1].date) {
            return Err(Error::Config("jump dates must be strictly increasing".into()));
        }
        Ok(())
    }
}

/// Bivariate Gaussian law with mean vector and covariance matrix, used for
/// the conditional law of `(rho_T, R_T)`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianLaw2<R> {
    pub mean: [R; 2],
    pub cov: [[R; 2]; 2],
}

impl<R: Real> GaussianLaw2<R> {
    /// Lower-triangular Cholesky factor; the covariance may be singular
    /// (zero-variance components give zero rows).
    pub fn cholesky(&self) -> [[R; 2]; 2] {
        let l11 = self.cov[0][0].max(R::zero()).sqrt();
        let l21 = if l11 > R::zero() { self.cov[1][0] / l11 } else { R::zero() };
        let l22 = (self.cov[1][1] - l21 * l21).max(R::zero()).sqrt();
        [[l11, R::zero()], [l21, l22]]
    }

    /// `E[exp(w . (rho_T, R_T))]` for complex `w`.
    pub fn mgf(&self, w: [Complex<f64>; 2]) -> Complex<f64> {
        let m0 = Complex::from(self.mean[0].to_f64().unwrap());
        let m1 = Complex::from(self.mean[1].to_f64().unwrap());
        let c = |i: usize, j: usize| Complex::from(self.cov[i][j].to_f64().unwrap());
        let quad = w[0] * w[0] * c(0, 0)
            + Complex::from(2.0) * w[0] * w[1] * c(0, 1)
            + w[1] * w[1] * c(1, 1);
        (w[0] * m0 + w[1] * m1 + quad * 0.5).exp()
    }
}

/// A validated pairing of factor parameters and an event schedule. Jump
/// dates must appear among the schedule's expected jump dates.
#[derive(Clone, Debug)]
pub struct GaussHwModel<R: Real> {
    params: HullWhiteParams<R>,
    schedule: Schedule<R>,
}

impl<R: Real> GaussHwModel<R> {
    pub fn new(params: HullWhiteParams<R>, schedule: Schedule<R>) -> Result<Self> {
        params.validate()?;
        for j in &params.jumps {
            if !schedule.expected_jump_dates().contains(&j.date) {
                return Err(Error::Config(format!(
                    "jump date {} is not an expected jump date of the schedule",
                    j.date
                )));
            }
        }
        Ok(Self { params, schedule })
    }

    pub fn params(&self) -> &HullWhiteParams<R> {
        &self.params
    }

    pub fn schedule(&self) -> &Schedule<R> {
        &self.schedule
    }

    pub fn beta(&self) -> R {
        self.params.beta
    }

    pub fn sigma(&self) -> R {
        self.params.sigma
    }

    fn jumps_in(&self, a: R, b: R) -> impl Iterator<Item = &JumpSpec<R>> + '_ {
        self.params.jumps.iter().filter(move |j| j.date > a && j.date <= b)
    }

    /// `E[rho_T | rho_t]`.
    pub fn rho_mean(&self, t: R, big_t: R, rho_t: R) -> Result<R> {
        let p = &self.params;
        let mut m = rho_t * (p.beta * (big_t - t)).exp() + p.alpha.convolved(t, big_t, p.beta)?;
        for j in self.jumps_in(t, big_t) {
            m += j.mean * (p.beta * (big_t - j.date)).exp();
        }
        Ok(m)
    }

    /// `Var(rho_T | rho_t)`.
    pub fn rho_var(&self, t: R, big_t: R) -> R {
        let p = &self.params;
        let mut v = p.sigma * p.sigma * b_kernel(R::two() * p.beta, big_t - t);
        for j in self.jumps_in(t, big_t) {
            let e = (p.beta * (big_t - j.date)).exp();
            v += j.std * j.std * e * e;
        }
        v
    }

    /// `Cov(rho_T1, rho_T2 | rho_t)` for `t <= T1, T2`.
    pub fn rho_cov(&self, t: R, t1: R, t2: R) -> R {
        let lo = t1.min(t2);
        let hi = t1.max(t2);
        (self.params.beta * (hi - lo)).exp() * self.rho_var(t, lo)
    }

    /// Weight of the jump at `s` in `R_T` (closed atom bracket `[s, T]`,
    /// i.e. a jump landing exactly on a roll-over date still feeds that
    /// date's atom).
    pub fn jump_weight(&self, s: R, big_t: R) -> R {
        schedule::jump_weight(s, big_t, self.params.beta, &self.schedule)
    }

    /// `E[R_T | rho_t, R_t]`.
    pub fn r_mean(&self, t: R, big_t: R, rho_t: R, r_t: R) -> Result<R> {
        let p = &self.params;
        let bp = schedule::kernel_b_prime(t, big_t, p.beta, &self.schedule)?;
        let ap = schedule::kernel_a_prime(t, big_t, p.beta, &p.alpha, &self.schedule)?;
        let mut m = r_t + rho_t * bp + ap;
        for j in self.jumps_in(t, big_t) {
            m += j.mean * self.jump_weight(j.date, big_t);
        }
        Ok(m)
    }

    /// `Var(R_T | rho_t)`. The diffusion part is
    /// `sigma^2 int_t^T B'(s, T)^2 ds` expanded into a Lebesgue block, a
    /// Lebesgue-atom cross block and an atom-atom block; the jump part is
    /// `sum_i std_i^2 W_i(T)^2`.
    pub fn r_var(&self, t: R, big_t: R) -> R {
        let p = &self.params;
        let beta = p.beta;
        let theta = big_t - t;
        let atoms: Vec<R> = self.schedule.atoms_in(t, big_t).collect();

        let mut leb = b_squared_integral(beta, theta);
        for &tj in &atoms {
            let theta_j = tj - t;
            leb += R::two()
                * ((beta * theta_j).exp() * cosh_kernel(beta, theta_j)
                    + b_kernel(beta, big_t - tj) * b_kernel(R::two() * beta, theta_j));
        }
        for &tj in &atoms {
            for &tk in &atoms {
                let lo = tj.min(tk);
                let hi = tj.max(tk);
                leb += (beta * (hi - lo)).exp() * b_kernel(R::two() * beta, lo - t);
            }
        }

        let mut v = p.sigma * p.sigma * leb;
        for j in self.jumps_in(t, big_t) {
            let w = self.jump_weight(j.date, big_t);
            v += j.std * j.std * w * w;
        }
        v
    }

    /// `Cov(rho_T, R_T | rho_t)`.
    pub fn rho_r_cov(&self, t: R, big_t: R) -> R {
        let p = &self.params;
        let beta = p.beta;
        let theta = big_t - t;

        let mut leb = (beta * theta).exp() * cosh_kernel(beta, theta);
        for tj in self.schedule.atoms_in(t, big_t) {
            leb += (beta * (big_t - tj)).exp() * b_kernel(R::two() * beta, tj - t);
        }

        let mut c = p.sigma * p.sigma * leb;
        for j in self.jumps_in(t, big_t) {
            c += j.std * j.std
                * (beta * (big_t - j.date)).exp()
                * self.jump_weight(j.date, big_t);
        }
        c
    }

    /// Conditional law of `(rho_T, R_T)` given `(rho_t, R_t)`.
    pub fn joint_law(&self, t: R, big_t: R, rho_t: R, r_t: R) -> Result<GaussianLaw2<R>> {
        let c = self.rho_r_cov(t, big_t);
        Ok(GaussianLaw2 {
            mean: [self.rho_mean(t, big_t, rho_t)?, self.r_mean(t, big_t, rho_t, r_t)?],
            cov: [[self.rho_var(t, big_t), c], [c, self.r_var(t, big_t)]],
        })
    }

    /// `E[exp(i u rho_T) | rho_t]`.
    pub fn char_fn_rho(&self, t: R, big_t: R, rho_t: R, u: f64) -> Result<Complex<f64>> {
        let m = self.rho_mean(t, big_t, rho_t)?.to_f64().unwrap();
        let v = self.rho_var(t, big_t).to_f64().unwrap();
        Ok((Complex::new(0.0, u * m) - Complex::from(0.5 * u * u * v)).exp())
    }
}

/// Exact diffusion-only law of one simulation step over an interval free of
/// jumps and atoms: increments of `rho`, of the Lebesgue part of `R` and of
/// the driving Brownian motion.
#[derive(Clone, Copy, Debug)]
pub struct StepLaw<R> {
    /// Mean of `rho_T` given `rho_t` (deterministic drift included).
    pub rho_mean_coeff: R,
    pub rho_mean_const: R,
    /// Mean of `R_T - R_t` given `rho_t`.
    pub r_mean_coeff: R,
    pub r_mean_const: R,
    /// Covariance of `(rho_T, R_T - R_t, W_T - W_t)`.
    pub cov: [[R; 3]; 3],
}

impl<R: Real> StepLaw<R> {
    /// Lower-triangular Cholesky factor (tolerant of singular covariances).
    pub fn cholesky(&self) -> [[R; 3]; 3] {
        let c = &self.cov;
        let mut l = [[R::zero(); 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let mut s = c[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    l[i][j] = s.max(R::zero()).sqrt();
                } else {
                    l[i][j] = if l[j][j] > R::zero() { s / l[j][j] } else { R::zero() };
                }
            }
        }
        l
    }
}

impl<R: Real> GaussHwModel<R> {
    /// Step law for `(t, T]` containing no scheduled events strictly inside
    /// nor at the right endpoint; events are applied separately.
    pub fn diffusion_step_law(&self, t: R, big_t: R) -> Result<StepLaw<R>> {
        let p = &self.params;
        let beta = p.beta;
        let dt = big_t - t;
        if dt < R::zero() {
            return Err(Error::Domain(format!("step law needs t <= T, got ({t}, {big_t})")));
        }
        let s2 = p.sigma * p.sigma;
        let vr = s2 * b_kernel(R::two() * beta, dt);
        let vr_rint = s2 * (beta * dt).exp() * cosh_kernel(beta, dt);
        let v_rint = s2 * b_squared_integral(beta, dt);
        let cw_r = p.sigma * b_kernel(beta, dt);
        let cw_rint = p.sigma * b_integral(beta, dt);
        Ok(StepLaw {
            rho_mean_coeff: (beta * dt).exp(),
            rho_mean_const: p.alpha.convolved(t, big_t, beta)?,
            r_mean_coeff: b_kernel(beta, dt),
            r_mean_const: p.alpha.convolved_integral(t, big_t, beta)?,
            cov: [[vr, vr_rint, cw_r], [vr_rint, v_rint, cw_rint], [cw_r, cw_rint, dt]],
        })
    }
}

/// Sum of independent factors sharing one event schedule. The total rate is
/// the sum of the factor rates; every expected jump date of the schedule
/// must be claimed by at least one factor.
#[derive(Clone, Debug)]
pub struct MultiFactorModel<R: Real> {
    factors: Vec<GaussHwModel<R>>,
}

impl<R: Real> MultiFactorModel<R> {
    pub fn new(factors: Vec<HullWhiteParams<R>>, schedule: Schedule<R>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("at least one factor is required".into()));
        }
        for &s in schedule.expected_jump_dates() {
            if !factors.iter().any(|f| f.jumps.iter().any(|j| j.date == s)) {
                return Err(Error::Config(format!(
                    "expected jump date {s} is not claimed by any factor"
                )));
            }
        }
        let factors = factors
            .into_iter()
            .map(|p| GaussHwModel::new(p, schedule.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[GaussHwModel<R>] {
        &self.factors
    }

    pub fn schedule(&self) -> &Schedule<R> {
        self.factors[0].schedule()
    }

    pub fn rho0_total(&self) -> R {
        self.factors.iter().map(|f| f.params().rho0).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schedule::eta_integrate;

    fn test_model() -> GaussHwModel<f64> {
        let schedule = Schedule::new(vec![0.25, 0.5, 0.75], vec![0.3, 0.5], 2.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![
                JumpSpec { date: 0.3, mean: 0.1, std: 0.4 },
                JumpSpec { date: 0.5, mean: -0.05, std: 0.2 },
            ],
        };
        GaussHwModel::new(params, schedule).unwrap()
    }

    #[test]
    fn rejects_unscheduled_jump() {
        let schedule = Schedule::new(vec![], vec![0.5], 1.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.0,
            beta: -0.1,
            sigma: 0.01,
            alpha: Drift::zero(),
            jumps: vec![JumpSpec { date: 0.4, mean: 0.0, std: 0.1 }],
        };
        assert!(GaussHwModel::new(params, schedule).is_err());
    }

    #[test]
    fn rho_moments_basic() {
        let m = test_model();
        // before any event: plain mean reversion
        let mu = m.rho_mean(0.0, 0.2, 0.02).unwrap();
        let expect = 0.02 * (-0.3f64 * 0.2).exp() + 0.01 * b_kernel(-0.3, 0.2);
        assert!((mu - expect).abs() < 1e-15);
        let v = m.rho_var(0.0, 0.2);
        assert!((v - 0.012f64.powi(2) * b_kernel(-0.6, 0.2)).abs() < 1e-18);
        // across the first jump the mean shifts by m1 e^{beta (T - s1)}
        let mu2 = m.rho_mean(0.0, 0.4, 0.02).unwrap();
        let base = 0.02 * (-0.3f64 * 0.4).exp() + 0.01 * b_kernel(-0.3, 0.4);
        assert!((mu2 - base - 0.1 * (-0.3f64 * 0.1).exp()).abs() < 1e-15);
    }

    #[test]
    fn r_mean_matches_eta_integral_of_rho_mean() {
        let m = test_model();
        let (t, big_t, rho_t, r_t) = (0.1, 1.3, 0.015, 0.4);
        let direct = m.r_mean(t, big_t, rho_t, r_t).unwrap();
        let via_eta = r_t
            + eta_integrate(|u| m.rho_mean(t, u, rho_t).unwrap(), t, big_t, m.schedule())
                .unwrap();
        assert!((direct - via_eta).abs() < 1e-9, "{direct} vs {via_eta}");
    }

    #[test]
    fn r_var_matches_double_eta_integral_of_rho_cov() {
        let m = test_model();
        let (t, big_t) = (0.1, 1.3);
        let direct = m.r_var(t, big_t);
        // Var(int rho d eta) = int int Cov(rho_u, rho_v) eta(du) eta(dv)
        let via_eta = eta_integrate(
            |u| {
                eta_integrate(|v| m.rho_cov(t, u, v), t, big_t, m.schedule()).unwrap()
            },
            t,
            big_t,
            m.schedule(),
        )
        .unwrap();
        assert!(
            ((direct - via_eta) / direct).abs() < 1e-7,
            "{direct} vs {via_eta}"
        );
    }

    #[test]
    fn rho_r_cov_matches_eta_integral() {
        let m = test_model();
        let (t, big_t) = (0.1, 1.3);
        let direct = m.rho_r_cov(t, big_t);
        let via_eta =
            eta_integrate(|u| m.rho_cov(t, big_t, u), t, big_t, m.schedule()).unwrap();
        assert!(
            ((direct - via_eta) / direct).abs() < 1e-8,
            "{direct} vs {via_eta}"
        );
    }

    #[test]
    fn moments_stay_finite_at_beta_zero() {
        let schedule = Schedule::new(vec![0.5], vec![0.3], 2.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.01,
            beta: 0.0,
            sigma: 0.01,
            alpha: Drift::constant(0.005),
            jumps: vec![JumpSpec { date: 0.3, mean: 0.05, std: 0.1 }],
        };
        let m = GaussHwModel::new(params, schedule).unwrap();
        let law: GaussianLaw2<f64> = m.joint_law(0.0, 1.0, 0.01, 0.0).unwrap();
        assert!(law.mean.iter().all(|x| x.is_finite()));
        assert!(law.cov.iter().flatten().all(|x| x.is_finite()));
        // beta = 0 closes the forms by hand: Var(rho_1) = sigma^2 + std^2
        assert!((law.cov[0][0] - (0.0001 + 0.01)).abs() < 1e-15);
    }

    #[test]
    fn step_law_consistent_with_interval_moments() {
        let m = test_model();
        // an event-free window
        let (t, big_t) = (0.76, 1.1);
        let s = m.diffusion_step_law(t, big_t).unwrap();
        let rho_t = 0.017;
        assert!(
            (s.rho_mean_coeff * rho_t + s.rho_mean_const - m.rho_mean(t, big_t, rho_t).unwrap())
                .abs()
                < 1e-16
        );
        assert!((s.cov[0][0] - m.rho_var(t, big_t)).abs() < 1e-18);
        assert!((s.cov[1][1] - m.r_var(t, big_t)).abs() < 1e-18);
        assert!((s.cov[0][1] - m.rho_r_cov(t, big_t)).abs() < 1e-18);
        let l = s.cholesky();
        // L L^T reproduces the covariance
        for i in 0..3 {
            for j in 0..3 {
                let mut v = 0.0;
                for k in 0..3 {
                    v += l[i][k] * l[j][k];
                }
                assert!((v - s.cov[i][j]).abs() < 1e-18);
            }
        }
    }

    #[test]
    fn brownian_cross_covariances_match_quadrature() {
        let m = test_model();
        let (t, big_t) = (0.76, 1.2);
        let s = m.diffusion_step_law(t, big_t).unwrap();
        let beta = m.beta();
        let sigma = m.sigma();
        // Cov(W-inc, rho-inc) = sigma int_t^T e^{beta (T - u)} du
        let c1 = sigma
            * crate::quad::integrate(&|u: f64| (beta * (big_t - u)).exp(), t, big_t, 1e-12)
                .unwrap();
        assert!((s.cov[2][0] - c1).abs() < 1e-12);
        // Cov(W-inc, R-inc) = sigma int_t^T B(T - u) du
        let c2 = sigma
            * crate::quad::integrate(&|u: f64| b_kernel(beta, big_t - u), t, big_t, 1e-12)
                .unwrap();
        assert!((s.cov[2][1] - c2).abs() < 1e-12);
    }

    #[test]
    fn char_fn_is_gaussian() {
        let m = test_model();
        let cf = m.char_fn_rho(0.0, 1.0, 0.02, 1.7).unwrap();
        let mu = m.rho_mean(0.0, 1.0, 0.02).unwrap();
        let v = m.rho_var(0.0, 1.0);
        let expect =
            (Complex::new(0.0, 1.7 * mu) - Complex::from(0.5 * 1.7 * 1.7 * v)).exp();
        assert!((cf - expect).norm() < 1e-15);
    }

    #[test]
    fn mgf_real_direction() {
        let law = GaussianLaw2 { mean: [0.1, -0.2], cov: [[0.04, 0.01], [0.01, 0.09]] };
        let v = law.mgf([Complex::from(0.5), Complex::from(-1.0)]);
        let quad = 0.25 * 0.04 + 2.0 * 0.5 * -1.0 * 0.01 + 1.0 * 0.09;
        let expect = (0.5 * 0.1 + -1.0 * -0.2 + 0.5f64 * quad).exp();
        assert!((v.re - expect).abs() < 1e-15 && v.im == 0.0);
    }

    #[test]
    fn multi_factor_validation() {
        let schedule = Schedule::new(vec![0.5], vec![0.3, 0.6], 1.0).unwrap();
        let f1: HullWhiteParams<f64> = HullWhiteParams {
            rho0: 0.01,
            beta: -0.2,
            sigma: 0.01,
            alpha: Drift::zero(),
            jumps: vec![JumpSpec { date: 0.3, mean: 0.1, std: 0.4 }],
        };
        let f2 = HullWhiteParams {
            rho0: 0.0,
            beta: -2.0,
            sigma: 0.0,
            alpha: Drift::zero(),
            jumps: vec![JumpSpec { date: 0.6, mean: 0.1, std: 0.4 }],
        };
        // together the factors claim both expected dates
        let m = MultiFactorModel::new(vec![f1.clone(), f2], schedule.clone()).unwrap();
        assert_eq!(m.factors().len(), 2);
        assert!((m.rho0_total() - 0.01).abs() < 1e-18);
        // a lone factor leaves 0.6 unclaimed
        assert!(MultiFactorModel::new(vec![f1], schedule).is_err());
    }
}
