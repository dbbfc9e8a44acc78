//! Discontinuity schedules and integration against the measure
//! `eta(du) = du + sum_j delta_{t_j}(du)`.
//!
//! All interval conventions are half-open on the left: an atom at exactly
//! `a` is excluded from `(a, b]`, an atom at exactly `b` is included.
//! Times are dimensionless reals (year fractions by default).

use serde::{Deserialize, Serialize};

use crate::drift::{Drift, QUAD_TOL};
use crate::error::{Error, Result};
use crate::kernels::b_kernel;
use crate::num::Real;
use crate::quad;

/// Roll-over dates (atoms of eta) and expected jump dates of the rate.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ScheduleRaw<R>", into = "ScheduleRaw<R>")]
#[serde(bound(serialize = "R: Real + Serialize", deserialize = "R: Real + Deserialize<'de>"))]
pub struct Schedule<R: Real> {
    roll_over: Vec<R>,
    expected_jumps: Vec<R>,
    horizon: R,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleRaw<R> {
    roll_over: Vec<R>,
    expected_jumps: Vec<R>,
    horizon: R,
}

impl<R: Real> TryFrom<ScheduleRaw<R>> for Schedule<R> {
    type Error = Error;
    fn try_from(raw: ScheduleRaw<R>) -> Result<Self> {
        Schedule::new(raw.roll_over, raw.expected_jumps, raw.horizon)
    }
}

impl<R: Real> From<Schedule<R>> for ScheduleRaw<R> {
    fn from(s: Schedule<R>) -> Self {
        ScheduleRaw {
            roll_over: s.roll_over,
            expected_jumps: s.expected_jumps,
            horizon: s.horizon,
        }
    }
}

fn check_dates<R: Real>(name: &str, dates: &[R], horizon: R) -> Result<()> {
    if dates.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite(format!("{name} dates")));
    }
    if dates.iter().any(|&d| d < R::zero()) {
        return Err(Error::Config(format!("{name} dates must be nonnegative")));
    }
    if dates.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("{name} dates must be strictly increasing")));
    }
    if dates.iter().any(|&d| d > horizon) {
        return Err(Error::Config(format!("{name} dates must not exceed the horizon")));
    }
    Ok(())
}

impl<R: Real> Schedule<R> {
    pub fn new(roll_over: Vec<R>, expected_jumps: Vec<R>, horizon: R) -> Result<Self> {
        if !horizon.is_finite() || horizon < R::zero() {
            return Err(Error::Config("horizon must be a nonnegative real".into()));
        }
        check_dates("roll-over", &roll_over, horizon)?;
        check_dates("expected-jump", &expected_jumps, horizon)?;
        Ok(Self { roll_over, expected_jumps, horizon })
    }

    /// Schedule with no atoms and no expected jumps (`eta(dt) = dt`).
    pub fn continuous(horizon: R) -> Self {
        Self { roll_over: vec![], expected_jumps: vec![], horizon }
    }

    pub fn roll_over_dates(&self) -> &[R] {
        &self.roll_over
    }

    pub fn expected_jump_dates(&self) -> &[R] {
        &self.expected_jumps
    }

    pub fn horizon(&self) -> R {
        self.horizon
    }

    /// Atoms of eta in `(a, b]`.
    pub fn atoms_in(&self, a: R, b: R) -> impl Iterator<Item = R> + '_ {
        self.roll_over.iter().copied().filter(move |&t| t > a && t <= b)
    }

    /// Atoms of eta in the closed interval `[a, b]`.
    pub fn atoms_in_closed(&self, a: R, b: R) -> impl Iterator<Item = R> + '_ {
        self.roll_over.iter().copied().filter(move |&t| t >= a && t <= b)
    }

    pub fn jumps_in(&self, a: R, b: R) -> impl Iterator<Item = R> + '_ {
        self.expected_jumps.iter().copied().filter(move |&s| s > a && s <= b)
    }

    pub fn is_roll_over_date(&self, t: R) -> bool {
        self.roll_over.iter().any(|&x| x == t)
    }

    /// True when `t` belongs to both the roll-over set and the expected
    /// jump set (the overlapping case carries an extra indicator term in
    /// the integrated-rate decomposition).
    pub fn is_shared_date(&self, t: R) -> bool {
        self.is_roll_over_date(t) && self.expected_jumps.iter().any(|&x| x == t)
    }

    pub fn has_atoms_in(&self, a: R, b: R) -> bool {
        self.atoms_in(a, b).next().is_some()
    }

    /// All event dates (roll-over and jumps) in `(a, b]`, sorted, deduplicated.
    pub fn event_dates_in(&self, a: R, b: R) -> Vec<R> {
        let mut out: Vec<R> = self.atoms_in(a, b).chain(self.jumps_in(a, b)).collect();
        out.sort_by(|x, y| x.partial_cmp(y).unwrap());
        out.dedup();
        out
    }
}

/// `int_{(a, b]} f d(eta)` with the Lebesgue part computed by adaptive
/// quadrature (absolute tolerance 1e-10).
pub fn eta_integrate<R: Real, F: Fn(R) -> R>(
    f: F,
    a: R,
    b: R,
    schedule: &Schedule<R>,
) -> Result<R> {
    if a > b {
        return Err(Error::Domain(format!("eta_integrate needs a <= b, got ({a}, {b}]")));
    }
    let lebesgue = quad::integrate(&f, a, b, R::c(QUAD_TOL))?;
    let atoms: R = schedule.atoms_in(a, b).map(&f).sum();
    Ok(lebesgue + atoms)
}

/// `int_{(a, b]} f d(eta)` with a caller-supplied antiderivative for the
/// Lebesgue part.
pub fn eta_integrate_exact<R: Real, F, G>(
    f: F,
    antiderivative: G,
    a: R,
    b: R,
    schedule: &Schedule<R>,
) -> Result<R>
where
    F: Fn(R) -> R,
    G: Fn(R) -> R,
{
    if a > b {
        return Err(Error::Domain(format!("eta_integrate needs a <= b, got ({a}, {b}]")));
    }
    let lebesgue = antiderivative(b) - antiderivative(a);
    let atoms: R = schedule.atoms_in(a, b).map(&f).sum();
    Ok(lebesgue + atoms)
}

/// `B(tau) = (exp(beta*tau) - 1)/beta` (series branch near `beta*tau = 0`).
pub fn kernel_b<R: Real>(beta: R, tau: R) -> R {
    debug_assert!(tau >= R::zero());
    b_kernel(beta, tau)
}

/// `B'(t, T) = B(T - t) + sum_{t_j in (t, T]} exp(beta (t_j - t))`.
pub fn kernel_b_prime<R: Real>(t: R, big_t: R, beta: R, schedule: &Schedule<R>) -> Result<R> {
    if t > big_t {
        return Err(Error::Domain(format!("kernel_b_prime needs t <= T, got ({t}, {big_t})")));
    }
    let atoms: R = schedule.atoms_in(t, big_t).map(|tj| (beta * (tj - t)).exp()).sum();
    Ok(b_kernel(beta, big_t - t) + atoms)
}

/// `Bbar(t, T) = (exp(2 beta (T-t)) - 1)/(2 beta) + sum_{t_j in (t, T]} exp(2 beta (t_j - t))`.
pub fn kernel_b_bar<R: Real>(t: R, big_t: R, beta: R, schedule: &Schedule<R>) -> Result<R> {
    if t > big_t {
        return Err(Error::Domain(format!("kernel_b_bar needs t <= T, got ({t}, {big_t})")));
    }
    let two_beta = R::two() * beta;
    let atoms: R = schedule.atoms_in(t, big_t).map(|tj| (two_beta * (tj - t)).exp()).sum();
    Ok(b_kernel(two_beta, big_t - t) + atoms)
}

/// `A'(t, T) = A(t, T) + sum_{t_j in (t, T]} a(t, t_j)` where
/// `a(t, u) = int_t^u exp(beta (u - s)) alpha(s) ds`.
pub fn kernel_a_prime<R: Real>(
    t: R,
    big_t: R,
    beta: R,
    alpha: &Drift<R>,
    schedule: &Schedule<R>,
) -> Result<R> {
    if t > big_t {
        return Err(Error::Domain(format!("kernel_a_prime needs t <= T, got ({t}, {big_t})")));
    }
    let mut total = alpha.convolved_integral(t, big_t, beta)?;
    for tj in schedule.atoms_in(t, big_t) {
        total += alpha.convolved(t, tj, beta)?;
    }
    Ok(total)
}

/// Weight of the jump at `s` in the integrated rate up to `T`:
/// `B(T - s) + sum_{t_j in [s, T]} exp(beta (t_j - s))`, i.e. `B'(s, T)`
/// plus one if `s` is itself a roll-over date.
pub fn jump_weight<R: Real>(s: R, big_t: R, beta: R, schedule: &Schedule<R>) -> R {
    let atoms: R = schedule.atoms_in_closed(s, big_t).map(|tj| (beta * (tj - s)).exp()).sum();
    b_kernel(beta, big_t - s) + atoms
}
