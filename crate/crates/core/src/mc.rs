//! Path simulation of `(rho, R, S0)` and Monte Carlo estimators.
//!
//! The exact scheme draws each step's joint Gaussian increment of
//! `(rho, R, W)` from the closed-form conditional law, so there is no
//! discretization bias; scheduled events (jumps of `rho`, atoms of the
//! accrual measure) are applied discretely at duplicated grid points. The
//! Euler scheme exists only as a validation cross-check.

use std::io::Write;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{GaussHwModel, HullWhiteParams, JumpSpec, MultiFactorModel, StepLaw};
use crate::pricing;
use crate::schedule::Schedule;
use crate::stats::{mean_se, Estimate};
use crate::drift::Drift;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    Exact,
    Euler,
}

/// Tag of a grid row. Event dates appear twice: `Pre` holds the state just
/// before the scheduled jump/atom, `Post` just after.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Regular,
    Pre,
    Post,
}

impl Side {
    pub fn label(&self) -> &'static str {
        match self {
            Side::Regular => "-",
            Side::Pre => "pre",
            Side::Post => "post",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GridPoint {
    pub time: f64,
    pub side: Side,
}

/// Uniform base grid on `[0, t_end]`; event dates are merged in
/// automatically.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub t_end: f64,
    pub n_steps: usize,
}

/// Simulated paths on a fixed grid. Matrices are row-major with one row of
/// `grid.len()` values per path; `S0 = exp(R)`.
#[derive(Clone, Debug)]
pub struct PathSet {
    pub grid: Vec<GridPoint>,
    pub n_paths: usize,
    pub rho: Vec<f64>,
    pub r: Vec<f64>,
    /// Brownian increment accumulated since the previous grid row, when
    /// retained at simulation time (single-factor only).
    pub dw: Option<Vec<f64>>,
    pub seed: u64,
    pub scheme: Scheme,
}

impl PathSet {
    pub fn n_points(&self) -> usize {
        self.grid.len()
    }

    /// Grid index of `(time, side)`; `Side::Regular` also matches the
    /// `Post` row of an event date. No interpolation is performed.
    pub fn index_of(&self, time: f64, side: Side) -> Result<usize> {
        self.grid
            .iter()
            .position(|g| {
                g.time == time
                    && (g.side == side || (side == Side::Regular && g.side == Side::Post))
            })
            .ok_or_else(|| Error::Data(format!("time {time} ({side:?}) is not on the grid")))
    }

    pub fn rho_at(&self, path: usize, idx: usize) -> f64 {
        self.rho[path * self.grid.len() + idx]
    }

    pub fn r_at(&self, path: usize, idx: usize) -> f64 {
        self.r[path * self.grid.len() + idx]
    }

    pub fn s0_at(&self, path: usize, idx: usize) -> f64 {
        self.r_at(path, idx).exp()
    }

    /// CSV rows `path,time,side,rho,R,S0` with full float precision.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "path,time,side,rho,R,S0")?;
        for p in 0..self.n_paths {
            for (i, g) in self.grid.iter().enumerate() {
                writeln!(
                    out,
                    "{},{:.16e},{},{:.16e},{:.16e},{:.16e}",
                    p,
                    g.time,
                    g.side.label(),
                    self.rho_at(p, i),
                    self.r_at(p, i),
                    self.s0_at(p, i)
                )?;
            }
        }
        Ok(())
    }
}

fn build_grid(
    schedule: &Schedule<f64>,
    spec: &GridSpec,
    extra_times: &[f64],
) -> Result<Vec<GridPoint>> {
    if spec.n_steps == 0 || !(spec.t_end > 0.0) {
        return Err(Error::Config("grid needs a positive horizon and step count".into()));
    }
    if spec.t_end > schedule.horizon() {
        return Err(Error::Config(format!(
            "grid end {} exceeds the schedule horizon {}",
            spec.t_end,
            schedule.horizon()
        )));
    }
    for &t in extra_times {
        if !t.is_finite() || t < 0.0 || t > spec.t_end {
            return Err(Error::Config(format!(
                "required grid time {t} falls outside [0, {}]",
                spec.t_end
            )));
        }
    }
    let mut times: Vec<f64> =
        (0..=spec.n_steps).map(|i| spec.t_end * i as f64 / spec.n_steps as f64).collect();
    times.extend(schedule.event_dates_in(0.0, spec.t_end));
    times.extend_from_slice(extra_times);
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let events = schedule.event_dates_in(0.0, spec.t_end);
    let mut grid = Vec::with_capacity(times.len() + events.len());
    for t in times {
        if events.contains(&t) {
            grid.push(GridPoint { time: t, side: Side::Pre });
            grid.push(GridPoint { time: t, side: Side::Post });
        } else {
            grid.push(GridPoint { time: t, side: Side::Regular });
        }
    }
    Ok(grid)
}

/// Per-grid-row simulation plan shared by all paths.
enum RowPlan {
    Start,
    /// Diffusion step from the previous row.
    Step { law: StepLaw<f64>, chol: [[f64; 3]; 3], dt: f64, t0: f64 },
    /// Event at this date: optional Gaussian jump, optional accrual atom.
    Event { jump: Option<(f64, f64)>, atom: bool },
}

fn build_plan(model: &GaussHwModel<f64>, grid: &[GridPoint]) -> Result<Vec<RowPlan>> {
    let mut plan = Vec::with_capacity(grid.len());
    plan.push(RowPlan::Start);
    for w in grid.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b.side == Side::Post {
            let jump = model
                .params()
                .jumps
                .iter()
                .find(|j| j.date == b.time)
                .map(|j| (j.mean, j.std));
            let atom = model.schedule().is_roll_over_date(b.time);
            plan.push(RowPlan::Event { jump, atom });
        } else {
            let law = model.diffusion_step_law(a.time, b.time)?;
            plan.push(RowPlan::Step { law, chol: law.cholesky(), dt: b.time - a.time, t0: a.time });
        }
    }
    Ok(plan)
}

/// Simulates `n_paths` trajectories of one factor. Identical
/// `(seed, n_paths, grid)` produce identical output regardless of thread
/// count: each path draws from its own counter-based substream.
pub fn simulate(
    model: &GaussHwModel<f64>,
    grid_spec: &GridSpec,
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
    store_increments: bool,
) -> Result<PathSet> {
    simulate_on(model, grid_spec, &[], n_paths, seed, scheme, store_increments)
}

/// Like [`simulate`] with additional required grid times, for payoffs that
/// observe the path at dates off the uniform grid.
pub fn simulate_on(
    model: &GaussHwModel<f64>,
    grid_spec: &GridSpec,
    extra_times: &[f64],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
    store_increments: bool,
) -> Result<PathSet> {
    if n_paths == 0 {
        return Err(Error::Config("n_paths must be at least 1".into()));
    }
    let grid = build_grid(model.schedule(), grid_spec, extra_times)?;
    let plan = build_plan(model, &grid)?;
    let n = grid.len();
    let mut rho = vec![0.0; n_paths * n];
    let mut r = vec![0.0; n_paths * n];
    let mut dw = if store_increments { Some(vec![0.0; n_paths * n]) } else { None };

    let p = model.params().clone();
    let sim_one = |path: usize, rho_row: &mut [f64], r_row: &mut [f64], dw_row: Option<&mut [f64]>| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(path as u64);
        let mut x = p.rho0;
        let mut acc = 0.0;
        let mut dw_local = vec![0.0; if dw_row.is_some() { n } else { 0 }];
        for (i, row) in plan.iter().enumerate() {
            match row {
                RowPlan::Start => {}
                RowPlan::Step { law, chol, dt, t0 } => match scheme {
                    Scheme::Exact => {
                        let z: [f64; 3] = [
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                            rng.sample(StandardNormal),
                        ];
                        let new_x = law.rho_mean_coeff * x + law.rho_mean_const + chol[0][0] * z[0];
                        let r_inc = law.r_mean_coeff * x
                            + law.r_mean_const
                            + chol[1][0] * z[0]
                            + chol[1][1] * z[1];
                        let w_inc = chol[2][0] * z[0] + chol[2][1] * z[1] + chol[2][2] * z[2];
                        x = new_x;
                        acc += r_inc;
                        if !dw_local.is_empty() {
                            dw_local[i] = w_inc;
                        }
                    }
                    Scheme::Euler => {
                        let z: f64 = rng.sample(StandardNormal);
                        let w_inc = dt.sqrt() * z;
                        let drift = p.alpha.value_at(*t0) + p.beta * x;
                        acc += x * dt;
                        x += drift * dt + p.sigma * w_inc;
                        if !dw_local.is_empty() {
                            dw_local[i] = w_inc;
                        }
                    }
                },
                RowPlan::Event { jump, atom } => {
                    if let Some((mean, std)) = jump {
                        let z: f64 = rng.sample(StandardNormal);
                        x += mean + std * z;
                    }
                    if *atom {
                        acc += x;
                    }
                }
            }
            rho_row[i] = x;
            r_row[i] = acc;
        }
        if let Some(buf) = dw_row {
            buf.copy_from_slice(&dw_local);
        }
    };

    match &mut dw {
        Some(dw_buf) => {
            rho.par_chunks_mut(n)
                .zip(r.par_chunks_mut(n))
                .zip(dw_buf.par_chunks_mut(n))
                .enumerate()
                .for_each(|(path, ((rho_row, r_row), dw_row))| {
                    sim_one(path, rho_row, r_row, Some(dw_row))
                });
        }
        None => {
            rho.par_chunks_mut(n).zip(r.par_chunks_mut(n)).enumerate().for_each(
                |(path, (rho_row, r_row))| sim_one(path, rho_row, r_row, None),
            );
        }
    }

    Ok(PathSet { grid, n_paths, rho, r, dw, seed, scheme })
}

/// Simulates a sum of independent factors on a shared grid; `rho` and `R`
/// hold the factor totals. Brownian increments are not retained.
pub fn simulate_multi(
    model: &MultiFactorModel<f64>,
    grid_spec: &GridSpec,
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<PathSet> {
    simulate_multi_on(model, grid_spec, &[], n_paths, seed, scheme)
}

/// Like [`simulate_multi`] with additional required grid times.
pub fn simulate_multi_on(
    model: &MultiFactorModel<f64>,
    grid_spec: &GridSpec,
    extra_times: &[f64],
    n_paths: usize,
    seed: u64,
    scheme: Scheme,
) -> Result<PathSet> {
    let mut total: Option<PathSet> = None;
    for (k, factor) in model.factors().iter().enumerate() {
        // distinct, fixed stream of seeds per factor
        let factor_seed = seed.wrapping_add((k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let ps = simulate_on(factor, grid_spec, extra_times, n_paths, factor_seed, scheme, false)?;
        total = Some(match total {
            None => ps,
            Some(mut acc) => {
                for (a, b) in acc.rho.iter_mut().zip(&ps.rho) {
                    *a += b;
                }
                for (a, b) in acc.r.iter_mut().zip(&ps.r) {
                    *a += b;
                }
                acc
            }
        });
    }
    let mut out = total.expect("at least one factor");
    out.seed = seed;
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub enum Discount {
    None,
    /// Divide the payoff by `S0` at the payoff date.
    Numeraire,
}

/// Sample mean and standard error of `payoff(paths, path)` paid at `at`,
/// optionally discounted by the numeraire at that date.
pub fn mc_price<F: Fn(&PathSet, usize) -> f64 + Sync>(
    paths: &PathSet,
    at: f64,
    payoff: F,
    discount: Discount,
) -> Result<Estimate> {
    let idx = paths.index_of(at, Side::Regular)?;
    let values: Vec<f64> = (0..paths.n_paths)
        .into_par_iter()
        .map(|p| {
            let v = payoff(paths, p);
            match discount {
                Discount::None => v,
                Discount::Numeraire => v / paths.s0_at(p, idx),
            }
        })
        .collect();
    mean_se(&values)
}

/// Change-of-measure weight applied to path functionals.
#[derive(Clone)]
pub enum Weight {
    /// Density of the forward measure with numeraire `P(., maturity)`:
    /// `1/(S0_maturity P(0, maturity))`.
    ForwardMeasure { maturity: f64 },
    /// Minimal-measure density for a futures contract on `[s, t]` whose
    /// rate drifts by `h(t) dt`: the stochastic exponential of
    /// `-int h(u)/(sigma B(u, s, t)) dW_u`, accumulated on the stored
    /// Brownian increments with midpoint compensation up to `maturity`.
    MinimalMeasure { h: Arc<dyn Fn(f64) -> f64 + Send + Sync>, s: f64, t: f64, maturity: f64 },
}

/// Weighted sample mean of a payoff with the measure-change diagnostic
/// (the weights' own mean, which must be 1 within noise).
pub fn weighted_expectation<F: Fn(&PathSet, usize) -> f64 + Sync>(
    paths: &PathSet,
    model: &GaussHwModel<f64>,
    payoff: F,
    weight: &Weight,
) -> Result<(Estimate, Estimate)> {
    let weights: Vec<f64> = match weight {
        Weight::ForwardMeasure { maturity } => {
            let idx = paths.index_of(*maturity, Side::Regular)?;
            let bond0 = pricing::bond_price(model, 0.0, *maturity, model.params().rho0)?;
            (0..paths.n_paths).map(|p| 1.0 / (paths.s0_at(p, idx) * bond0)).collect()
        }
        Weight::MinimalMeasure { h, s, t, maturity } => {
            let dw = paths.dw.as_ref().ok_or_else(|| {
                Error::Config(
                    "minimal-measure weighting needs paths with stored Brownian increments"
                        .into(),
                )
            })?;
            let sigma = model.sigma();
            if sigma <= 0.0 {
                return Err(Error::Config(
                    "minimal-measure weighting needs a diffusive factor".into(),
                ));
            }
            let n = paths.n_points();
            let last = paths.index_of(*maturity, Side::Regular)?;
            (0..paths.n_paths)
                .map(|p| {
                    let mut log_z = 0.0;
                    for i in 1..=last {
                        let (a, b) = (paths.grid[i - 1], paths.grid[i]);
                        if b.time > a.time {
                            let mid = 0.5 * (a.time + b.time);
                            let g = h(mid) / (sigma * pricing::futures_kernel(
                                model.beta(),
                                mid,
                                *s,
                                *t,
                            ));
                            let dt = b.time - a.time;
                            log_z += -g * dw[p * n + i] - 0.5 * g * g * dt;
                        }
                    }
                    log_z.exp()
                })
                .collect()
        }
    };
    let values: Vec<f64> =
        (0..paths.n_paths).map(|p| payoff(paths, p) * weights[p]).collect();
    Ok((mean_se(&values)?, mean_se(&weights)?))
}

/// The published two-factor scenario: a slowly reverting diffusive factor
/// with one jump at t = 150 and a spike factor (no diffusion, very fast
/// reversion) jumping at t = 50 and t = 100. Mean-reversion speeds carry a
/// negative sign so deviations decay.
pub fn example_4_4_model() -> MultiFactorModel<f64> {
    let schedule = Schedule::new(vec![], vec![50.0, 100.0, 150.0], 250.0).unwrap();
    let f1 = HullWhiteParams {
        rho0: 0.01875,
        beta: -0.20,
        sigma: 0.012,
        alpha: Drift::constant(0.01),
        jumps: vec![JumpSpec { date: 150.0, mean: 0.1, std: 0.4 }],
    };
    let f2 = HullWhiteParams {
        rho0: 0.0,
        beta: -80.0,
        sigma: 0.0,
        alpha: Drift::zero(),
        jumps: vec![
            JumpSpec { date: 50.0, mean: 0.1, std: 0.4 },
            JumpSpec { date: 100.0, mean: 0.1, std: 0.4 },
        ],
    };
    MultiFactorModel::new(vec![f1, f2], schedule).unwrap()
}

pub fn example_4_4_scenario(seed: u64, n_paths: usize) -> Result<PathSet> {
    let model = example_4_4_model();
    let spec = GridSpec { t_end: 250.0, n_steps: 2500 };
    simulate_multi(&model, &spec, n_paths, seed, Scheme::Exact)
}
