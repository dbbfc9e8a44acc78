//! Locally risk-minimizing hedge of a caplet with a rate futures contract.
//!
//! The futures rate may carry a deterministic drift `h(t) dt`; option values
//! are then taken under the minimal measure, which only shifts the rate
//! drift to `alpha(t) - h(t)/B(t, S, T)` and leaves volatility and jump laws
//! unchanged. Between scheduled jumps the hedge ratio is the option's rate
//! delta divided by the futures' rate exposure; across a jump it is the
//! conditional regression of the option increment on the futures increment,
//! evaluated by Gauss-Hermite quadrature.

use std::sync::Arc;

use crate::drift::Drift;
use crate::error::{Error, Result};
use crate::kernels::b_kernel;
use crate::mc::{PathSet, Side};
use crate::model::GaussHwModel;
use crate::pricing::{self, CapletSpec};
use crate::quad::gauss_hermite_expectation;
use crate::stats::{covariance, covariance_se, mean_se, Estimate};

pub const DEFAULT_HERMITE_NODES: usize = 64;

/// Futures contract settling on the average rate over `[ref_start, ref_end]`,
/// whose quoted rate drifts by `h(t) dt` under the real-world pricing
/// measure (`h = 0` gives a martingale futures curve).
#[derive(Clone)]
pub struct FuturesSpec {
    pub ref_start: f64,
    pub ref_end: f64,
    pub h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for FuturesSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FuturesSpec")
            .field("ref_start", &self.ref_start)
            .field("ref_end", &self.ref_end)
            .finish_non_exhaustive()
    }
}

impl FuturesSpec {
    pub fn new(
        ref_start: f64,
        ref_end: f64,
        h: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if !(ref_start < ref_end) || !ref_start.is_finite() || !ref_end.is_finite() {
            return Err(Error::Config(format!(
                "futures reference period needs start < end, got [{ref_start}, {ref_end}]"
            )));
        }
        Ok(Self { ref_start, ref_end, h })
    }

    /// Martingale futures curve (`h = 0`).
    pub fn driftless(ref_start: f64, ref_end: f64) -> Result<Self> {
        Self::new(ref_start, ref_end, Arc::new(|_| 0.0))
    }
}

/// Drift of the rate under the minimal martingale measure:
/// `alpha(t) - h(t)/B(t, S, T)`.
pub fn minimal_measure_drift(model: &GaussHwModel<f64>, futures: &FuturesSpec) -> Drift<f64> {
    let alpha = model.params().alpha.clone();
    let beta = model.beta();
    let h = futures.h.clone();
    let (s, t_end) = (futures.ref_start, futures.ref_end);
    Drift::General(Arc::new(move |t: f64| {
        alpha.value_at(t) - h(t) / pricing::futures_kernel(beta, t, s, t_end)
    }))
}

/// Hedge of one caplet with one futures contract under a single-factor
/// model whose accrual has no roll-over atoms.
pub struct Hedger {
    hatted: GaussHwModel<f64>,
    caplet: CapletSpec<f64>,
    futures: FuturesSpec,
}

impl Hedger {
    pub fn new(
        model: &GaussHwModel<f64>,
        caplet: CapletSpec<f64>,
        futures: FuturesSpec,
    ) -> Result<Self> {
        if model.schedule().has_atoms_in(0.0, model.schedule().horizon()) {
            return Err(Error::Unsupported(
                "futures hedging requires a schedule without roll-over atoms".into(),
            ));
        }
        if model.sigma() <= 0.0 {
            return Err(Error::Config("hedging needs a diffusive rate".into()));
        }
        let mut params = model.params().clone();
        params.alpha = minimal_measure_drift(model, &futures);
        let hatted = GaussHwModel::new(params, model.schedule().clone())?;
        Ok(Self { hatted, caplet, futures })
    }

    /// Model with the minimal-measure drift, under which option values and
    /// the futures rate are computed.
    pub fn hatted_model(&self) -> &GaussHwModel<f64> {
        &self.hatted
    }

    /// Undiscounted caplet value `G(t, rho)` under the minimal measure.
    pub fn value(&self, t: f64, rho: f64) -> Result<f64> {
        pricing::caplet_price(&self.hatted, t, rho, &self.caplet)
    }

    /// Futures rate along a path state.
    pub fn futures_rate(&self, t: f64, rho: f64) -> Result<f64> {
        pricing::futures_rate(&self.hatted, t, rho, self.futures.ref_start, self.futures.ref_end)
    }

    fn jump_at(&self, t: f64) -> Option<&crate::model::JumpSpec<f64>> {
        self.hatted.params().jumps.iter().find(|j| j.date == t)
    }

    /// Left limit of the caplet value at `t`: valuation is half-open in the
    /// jump dates, so just before a scheduled jump the value is the jump-law
    /// expectation of the post-jump value.
    pub fn value_left(&self, t: f64, rho: f64) -> Result<f64> {
        match self.jump_at(t) {
            None => self.value(t, rho),
            Some(j) => {
                if j.std == 0.0 {
                    return self.value(t, rho + j.mean);
                }
                let v = gauss_hermite_expectation(
                    |xi| self.value(t, rho + xi).unwrap_or(f64::NAN),
                    j.mean,
                    j.std,
                    DEFAULT_HERMITE_NODES,
                );
                if !v.is_finite() {
                    return Err(Error::NonFinite("pre-jump caplet value".into()));
                }
                Ok(v)
            }
        }
    }

    /// Left limit of the futures rate at `t`: adds back the compensator
    /// `m B(t, S, T)` of a jump scheduled exactly at `t`.
    pub fn futures_rate_left(&self, t: f64, rho: f64) -> Result<f64> {
        let f = self.futures_rate(t, rho)?;
        Ok(match self.jump_at(t) {
            None => f,
            Some(j) => {
                f + j.mean
                    * pricing::futures_kernel(
                        self.hatted.beta(),
                        t,
                        self.futures.ref_start,
                        self.futures.ref_end,
                    )
            }
        })
    }

    /// Hedge ratio between jumps: the option's rate delta over the futures'
    /// rate exposure `B(t, S, T)`. The delta has the closed form
    /// `-G B(T_c - t) + B(T_c - S_c) e^{beta (S_c - t)} P(t, S_c) Phi(d1)`.
    pub fn zeta_continuous(&self, t: f64, rho: f64) -> Result<f64> {
        let beta = self.hatted.beta();
        let fut_b = pricing::futures_kernel(beta, t, self.futures.ref_start, self.futures.ref_end);
        let (s, big_t) = (self.caplet.start, self.caplet.end);
        let fm = pricing::forward_measure_params(&self.hatted, t, s)?;
        if fm.gamma2 <= 0.0 {
            // deterministic limit (t at expiry): fall back to a symmetric
            // difference of the kinked intrinsic value
            let dr = 1e-6;
            let up = self.value(t, rho + dr)?;
            let dn = self.value(t, rho - dr)?;
            return Ok((up - dn) / (2.0 * dr) / fut_b);
        }
        let eval = pricing::caplet_eval(&self.hatted, t, rho, &self.caplet)?;
        let delta = -eval.price * b_kernel(beta, big_t - t)
            + b_kernel(beta, big_t - s)
                * (beta * (s - t)).exp()
                * eval.bond_start
                * crate::num::norm_cdf(eval.d1);
        Ok(delta / fut_b)
    }

    /// Hedge ratio across the scheduled jump at `date` from the pre-jump
    /// state `rho_pre`: `E[G(rho_pre + xi)(xi - m)] / (B(date, S, T) gamma^2)`
    /// with `xi ~ N(m, gamma^2)`. The numeraire is known just before the
    /// jump and cancels from the regression. A zero jump variance falls back
    /// to the continuous ratio at the shifted state.
    pub fn zeta_jump(&self, date: f64, rho_pre: f64, nodes: usize) -> Result<f64> {
        let jump = self
            .hatted
            .params()
            .jumps
            .iter()
            .find(|j| j.date == date)
            .ok_or_else(|| Error::Domain(format!("no scheduled jump at {date}")))?;
        let (m, gamma) = (jump.mean, jump.std);
        if gamma == 0.0 {
            return self.zeta_continuous(date, rho_pre + m);
        }
        let fut_b =
            pricing::futures_kernel(self.hatted.beta(), date, self.futures.ref_start, self.futures.ref_end);
        let num = gauss_hermite_expectation(
            |xi| self.value(date, rho_pre + xi).unwrap_or(f64::NAN) * (xi - m),
            m,
            gamma,
            nodes,
        );
        let zeta = num / (fut_b * gamma * gamma);
        if !zeta.is_finite() {
            return Err(Error::NonFinite("jump hedge ratio".into()));
        }
        Ok(zeta)
    }
}

/// Regression diagnostics of the hedge across one scheduled jump.
#[derive(Clone, Debug)]
pub struct JumpDiagnostic {
    pub date: f64,
    /// Sample mean of the local cost increment `dL = dH - zeta dX`.
    pub e_dl: Estimate,
    /// Sample covariance of `dL` with the futures martingale increment.
    pub cov_dl_dm: f64,
    pub cov_dl_dm_se: f64,
    /// Sample regression `Cov(dH, dX)/Var(dX)` and its bootstrap-free SE.
    pub regression: f64,
    pub regression_se: f64,
    /// Variance-weighted mean of the per-path hedge ratios, the population
    /// value of the sample regression.
    pub zeta_predicted: f64,
    pub n: usize,
}

/// Discrete hedge simulation along stored paths.
#[derive(Clone, Debug)]
pub struct HedgeReport {
    /// Rebalance times (event dates appear once, at their post state).
    pub times: Vec<f64>,
    /// Mean hedge ratio in force on the step starting at each time.
    pub zeta: Vec<f64>,
    /// Mean discounted option value at each time.
    pub v: Vec<f64>,
    /// Variance across paths of the cumulative hedging cost up to each time.
    pub cost_increments: Vec<f64>,
    pub jump_diagnostics: Vec<JumpDiagnostic>,
}

impl HedgeReport {
    /// CSV rows `time,zeta,V_mean,cost_var`.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "time,zeta,V_mean,cost_var")?;
        for i in 0..self.times.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                self.times[i], self.zeta[i], self.v[i], self.cost_increments[i]
            )?;
        }
        Ok(())
    }

    /// JSON diagnostics, one object per scheduled jump.
    pub fn diagnostics_json(&self) -> String {
        let items: Vec<String> = self
            .jump_diagnostics
            .iter()
            .map(|d| {
                format!(
                    "{{\"s_i\":{:.16e},\"E_dL\":{:.16e},\"E_dL_se\":{:.16e},\
                     \"cov_dL_dM\":{:.16e},\"cov_dL_dM_se\":{:.16e},\
                     \"regression\":{:.16e},\"regression_se\":{:.16e},\
                     \"zeta_predicted\":{:.16e},\"n\":{}}}",
                    d.date,
                    d.e_dl.value,
                    d.e_dl.std_error,
                    d.cov_dl_dm,
                    d.cov_dl_dm_se,
                    d.regression,
                    d.regression_se,
                    d.zeta_predicted,
                    d.n
                )
            })
            .collect();
        format!("[{}]", items.join(","))
    }
}

/// Runs the self-financing-with-cost hedge along simulated paths up to the
/// caplet fixing date: at each step the position `zeta` is set from the
/// left state, the cost increment is `dV - zeta dX` with `V` the discounted
/// option value and `X` the discounted futures gains.
///
/// The paths must be simulated under the same measure the hedger prices in
/// (for a driftless futures curve the two coincide); jump diagnostics are
/// valid under any equivalent measure because the jump law is unchanged.
pub fn run_hedge(hedger: &Hedger, paths: &PathSet) -> Result<HedgeReport> {
    let s_fix = hedger.caplet.start;
    let rows: Vec<usize> =
        (0..paths.n_points()).filter(|&i| paths.grid[i].time <= s_fix).collect();
    if rows.is_empty() || paths.grid[*rows.last().unwrap()].time != s_fix {
        return Err(Error::Config(format!(
            "hedge grid must contain the caplet fixing date {s_fix}"
        )));
    }
    let n_paths = paths.n_paths;
    let n_rows = rows.len();

    // per-path discounted values, futures rates and hedge ratios
    let mut v = vec![0.0; n_paths * n_rows];
    let mut x = vec![0.0; n_paths * n_rows];
    let mut zeta = vec![0.0; n_paths * n_rows];
    for (k, &i) in rows.iter().enumerate() {
        let g = paths.grid[i];
        let jump_pre = g.side == Side::Pre && hedger.jump_at(g.time).is_some();
        for p in 0..n_paths {
            let rho = paths.rho_at(p, i);
            let s0 = paths.s0_at(p, i);
            if jump_pre {
                v[p * n_rows + k] = hedger.value_left(g.time, rho)? / s0;
                x[p * n_rows + k] = hedger.futures_rate_left(g.time, rho)? / s0;
                zeta[p * n_rows + k] = hedger.zeta_jump(g.time, rho, DEFAULT_HERMITE_NODES)?;
            } else {
                v[p * n_rows + k] = hedger.value(g.time, rho)? / s0;
                x[p * n_rows + k] = hedger.futures_rate(g.time, rho)? / s0;
                zeta[p * n_rows + k] = hedger.zeta_continuous(g.time, rho)?;
            }
        }
    }

    // cumulative cost per path, aggregated per time
    let mut times = Vec::with_capacity(n_rows);
    let mut zeta_mean = Vec::with_capacity(n_rows);
    let mut v_mean = Vec::with_capacity(n_rows);
    let mut cost_var = Vec::with_capacity(n_rows);
    let mut cost = vec![0.0; n_paths];
    for k in 0..n_rows {
        if k > 0 {
            for p in 0..n_paths {
                let dv = v[p * n_rows + k] - v[p * n_rows + k - 1];
                let dx = x[p * n_rows + k] - x[p * n_rows + k - 1];
                cost[p] += dv - zeta[p * n_rows + k - 1] * dx;
            }
        }
        times.push(paths.grid[rows[k]].time);
        zeta_mean.push((0..n_paths).map(|p| zeta[p * n_rows + k]).sum::<f64>() / n_paths as f64);
        v_mean.push((0..n_paths).map(|p| v[p * n_rows + k]).sum::<f64>() / n_paths as f64);
        let c = mean_se(&cost)?;
        let var = cost.iter().map(|ci| (ci - c.value).powi(2)).sum::<f64>()
            / (n_paths as f64 - 1.0).max(1.0);
        cost_var.push(var);
    }

    // jump regressions on the duplicated event rows
    let mut diagnostics = Vec::new();
    for (k, &i) in rows.iter().enumerate() {
        let g = paths.grid[i];
        if g.side != Side::Pre {
            continue;
        }
        let jump = match hedger.jump_at(g.time) {
            Some(j) => j,
            None => continue,
        };
        let post = k + 1;
        let fut_b = pricing::futures_kernel(
            hedger.hatted.beta(),
            g.time,
            hedger.futures.ref_start,
            hedger.futures.ref_end,
        );
        let mut dh = Vec::with_capacity(n_paths);
        let mut dx = Vec::with_capacity(n_paths);
        let mut dm = Vec::with_capacity(n_paths);
        let mut dl = Vec::with_capacity(n_paths);
        let mut zeta_w = 0.0;
        let mut w_sum = 0.0;
        for p in 0..n_paths {
            let dh_p = v[p * n_rows + post] - v[p * n_rows + k];
            let dx_p = x[p * n_rows + post] - x[p * n_rows + k];
            let xi = paths.rho_at(p, rows[post]) - paths.rho_at(p, i);
            let s0 = paths.s0_at(p, i);
            dh.push(dh_p);
            dx.push(dx_p);
            dm.push(fut_b * (xi - jump.mean) / s0);
            dl.push(dh_p - zeta[p * n_rows + k] * dx_p);
            // conditional Var(dX) weight: (B gamma / S0)^2
            let w = (fut_b * jump.std / s0).powi(2);
            zeta_w += w * zeta[p * n_rows + k];
            w_sum += w;
        }
        let var_dx = covariance(&dx, &dx)?;
        let regression = covariance(&dh, &dx)? / var_dx;
        // delta-method SE of the regression slope from the residual spread
        let resid: Vec<f64> = dh
            .iter()
            .zip(&dx)
            .map(|(a, b)| a - regression * b)
            .collect();
        let regression_se =
            (covariance(&resid, &resid)? / (var_dx * n_paths as f64)).sqrt();
        diagnostics.push(JumpDiagnostic {
            date: g.time,
            e_dl: mean_se(&dl)?,
            cov_dl_dm: covariance(&dl, &dm)?,
            cov_dl_dm_se: covariance_se(&dl, &dm)?,
            regression,
            regression_se,
            zeta_predicted: zeta_w / w_sum,
            n: n_paths,
        });
    }

    Ok(HedgeReport {
        times,
        zeta: zeta_mean,
        v: v_mean,
        cost_increments: cost_var,
        jump_diagnostics: diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{simulate, GridSpec, Scheme};
    use crate::model::{HullWhiteParams, JumpSpec};
    use crate::schedule::Schedule;

    fn test_setup(gamma: f64) -> (GaussHwModel<f64>, CapletSpec<f64>, FuturesSpec) {
        let schedule = Schedule::new(vec![], vec![0.4], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![JumpSpec { date: 0.4, mean: 0.05, std: gamma }],
        };
        let model = GaussHwModel::new(params, schedule).unwrap();
        let caplet = CapletSpec { start: 1.0, end: 1.25, strike: 0.025 };
        let futures = FuturesSpec::driftless(1.0, 1.25).unwrap();
        (model, caplet, futures)
    }

    #[test]
    fn continuous_ratio_matches_finite_differences() {
        let (model, caplet, futures) = test_setup(0.3);
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let fut_b = pricing::futures_kernel(model.beta(), 0.0, 1.0, 1.25);
        for &(t, rho) in &[(0.0, 0.02), (0.2, -0.01), (0.7, 0.05), (0.99, 0.025)] {
            let zeta = hedger.zeta_continuous(t, rho).unwrap();
            let dr = 1e-5;
            let fd = (hedger.value(t, rho + dr).unwrap() - hedger.value(t, rho - dr).unwrap())
                / (2.0 * dr)
                / pricing::futures_kernel(model.beta(), t, 1.0, 1.25);
            assert!(
                (zeta - fd).abs() <= 1e-5 * fd.abs().max(1e-12),
                "t {t} rho {rho}: {zeta} vs {fd}"
            );
        }
        let _ = fut_b;
    }

    #[test]
    fn jump_ratio_node_count_converged() {
        // jump scale below the option's smoothing width keeps the
        // integrand smooth, so the quadrature is fully converged at the
        // default node count
        let (model, caplet, futures) = test_setup(0.004);
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let z64 = hedger.zeta_jump(0.4, 0.02, 64).unwrap();
        let z128 = hedger.zeta_jump(0.4, 0.02, 128).unwrap();
        assert!((z64 - z128).abs() < 1e-10 * z64.abs(), "{z64} vs {z128}");
    }

    #[test]
    fn jump_ratio_zero_variance_uses_continuous_ratio() {
        let (model, caplet, futures) = test_setup(0.0);
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let z = hedger.zeta_jump(0.4, 0.02, 64).unwrap();
        let c = hedger.zeta_continuous(0.4, 0.07).unwrap();
        assert_eq!(z, c);
    }

    #[test]
    fn jump_ratio_small_variance_approaches_continuous_ratio() {
        let (model, caplet, futures) = test_setup(1e-4);
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let z = hedger.zeta_jump(0.4, 0.02, 64).unwrap();
        let c = hedger.zeta_continuous(0.4, 0.07).unwrap();
        assert!((z - c).abs() < 1e-4 * c.abs(), "{z} vs {c}");
    }

    #[test]
    fn jump_ratio_is_numeraire_free() {
        // the regression built from discounted increments with an arbitrary
        // positive numeraire equals the expectation form exactly
        let (model, caplet, futures) = test_setup(0.3);
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let (date, rho_pre, m, gamma) = (0.4, 0.02, 0.05, 0.3);
        let fut_b = pricing::futures_kernel(model.beta(), date, 1.0, 1.25);
        let s0 = 1.2345;
        let cov = gauss_hermite_expectation(
            |xi| {
                let dh = (hedger.value(date, rho_pre + xi).unwrap()
                    - hedger.value(date, rho_pre).unwrap())
                    / s0;
                let dx = fut_b * (xi - m) / s0;
                dh * dx
            },
            m,
            gamma,
            96,
        );
        let var = (fut_b * gamma / s0).powi(2);
        let z = hedger.zeta_jump(date, rho_pre, 96).unwrap();
        assert!(
            ((cov / var) - z).abs() < 1e-12 * z.abs().max(1.0),
            "{} vs {z}",
            cov / var
        );
    }

    #[test]
    fn minimal_measure_drift_shifts_by_h_over_kernel() {
        let (model, _, _) = test_setup(0.3);
        let h = |t: f64| 0.001 + 0.0005 * t;
        let futures = FuturesSpec::new(1.0, 1.25, Arc::new(h)).unwrap();
        let drift = minimal_measure_drift(&model, &futures);
        for &t in &[0.0, 0.3, 0.9] {
            let expect =
                0.01 - h(t) / pricing::futures_kernel(model.beta(), t, 1.0, 1.25);
            assert!((drift.value_at(t) - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn hedger_rejects_roll_over_atoms() {
        let schedule = Schedule::new(vec![0.5], vec![], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![],
        };
        let model = GaussHwModel::new(params, schedule).unwrap();
        let caplet = CapletSpec { start: 1.0, end: 1.25, strike: 0.025 };
        let futures = FuturesSpec::driftless(1.0, 1.25).unwrap();
        assert!(Hedger::new(&model, caplet, futures).is_err());
    }

    #[test]
    fn hedge_run_jump_diagnostics_are_centered() {
        let (model, caplet, futures) = test_setup(0.3);
        let hedger = Hedger::new(&model, caplet.clone(), futures).unwrap();
        let spec = GridSpec { t_end: 1.0, n_steps: 25 };
        let paths = simulate(&model, &spec, 20_000, 31, Scheme::Exact, false).unwrap();
        let report = run_hedge(&hedger, &paths).unwrap();
        assert_eq!(report.jump_diagnostics.len(), 1);
        let d = &report.jump_diagnostics[0];
        assert_eq!(d.date, 0.4);
        assert!(d.e_dl.sigmas_from(0.0) < 3.0, "{:?}", d.e_dl);
        assert!(d.cov_dl_dm.abs() < 3.0 * d.cov_dl_dm_se, "{d:?}");
        assert!(
            (d.regression - d.zeta_predicted).abs() < 3.0 * d.regression_se,
            "{d:?}"
        );
        // the report covers [0, fixing] with the event date listed once
        assert_eq!(*report.times.first().unwrap(), 0.0);
        assert_eq!(*report.times.last().unwrap(), 1.0);
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        assert!(csv.starts_with(b"time,zeta,V_mean,cost_var"));
        assert!(report.diagnostics_json().starts_with("[{\"s_i\":"));
    }

    #[test]
    fn hedge_cost_vanishes_with_refinement_in_complete_limit() {
        // no jump risk: the residual cost is pure discretization error and
        // its variance shrinks linearly with the step
        let schedule = Schedule::new(vec![], vec![], 3.0).unwrap();
        let params = HullWhiteParams {
            rho0: 0.02,
            beta: -0.3,
            sigma: 0.012,
            alpha: Drift::constant(0.01),
            jumps: vec![],
        };
        let model = GaussHwModel::new(params, schedule).unwrap();
        let caplet = CapletSpec { start: 1.0, end: 1.25, strike: 0.025 };
        let futures = FuturesSpec::driftless(1.0, 1.25).unwrap();
        let hedger = Hedger::new(&model, caplet, futures).unwrap();
        let mut final_var = Vec::new();
        for &steps in &[10usize, 20, 40] {
            let spec = GridSpec { t_end: 1.0, n_steps: steps };
            let paths = simulate(&model, &spec, 4_000, 37, Scheme::Exact, false).unwrap();
            let report = run_hedge(&hedger, &paths).unwrap();
            final_var.push(*report.cost_increments.last().unwrap());
        }
        assert!(final_var[0] > 1.5 * final_var[1], "{final_var:?}");
        assert!(final_var[1] > 1.5 * final_var[2], "{final_var:?}");
    }
}
