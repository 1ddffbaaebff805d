//! Semi-infinite particle chains with nearest-neighbour forces, driven at the
//! left end by a prescribed boundary particle `x_0(t)`.
//!
//! The chain is truncated to `K` particles. The right neighbour of particle
//! `K` is a ghost pinned at its rest position, which is exact for as long as
//! the disturbance has not reached the far end; [`far_boundary_displacement`]
//! measures that. Time stepping is velocity Verlet.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::sync::Arc;

use crate::error::{param, Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Positions beyond this magnitude abort the integration.
const BLOW_UP: f64 = 1e6;

/// Bond force `F` applied as `F(x_{k-1} - x_k) - F(x_k - x_{k+1})`.
#[derive(Clone)]
pub enum Force {
    /// The Toda force `e^r`, with bond potential `e^r`.
    Exponential,
    Custom {
        force: ScalarFn,
        /// Antiderivative of `force`, needed only for energy diagnostics.
        potential: Option<ScalarFn>,
    },
}

impl Force {
    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        match self {
            Force::Exponential => r.exp(),
            Force::Custom { force, .. } => force(r),
        }
    }

    pub fn potential(&self, r: f64) -> Option<f64> {
        match self {
            Force::Exponential => Some(r.exp()),
            Force::Custom { potential, .. } => potential.as_ref().map(|p| p(r)),
        }
    }
}

impl fmt::Debug for Force {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Force::Exponential => f.write_str("Exponential"),
            Force::Custom { .. } => f.write_str("Custom"),
        }
    }
}

/// Prescribed motion of the boundary particle `x_0`.
#[derive(Clone)]
pub enum Driver {
    /// `x_0(t) = 2at`.
    Shock { a: f64 },
    /// `x_0(t) = 2at + h(gamma t)` with `h` `2pi`-periodic.
    Driven { a: f64, gamma: f64, h: ScalarFn },
}

impl Driver {
    pub fn position(&self, t: f64) -> f64 {
        match self {
            Driver::Shock { a } => 2.0 * a * t,
            Driver::Driven { a, gamma, h } => 2.0 * a * t + h(gamma * t),
        }
    }

    /// Average drive velocity `2a`; the moving frame travels at this speed.
    pub fn mean_velocity(&self) -> f64 {
        match self {
            Driver::Shock { a } | Driver::Driven { a, .. } => 2.0 * a,
        }
    }
}

impl fmt::Debug for Driver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Driver::Shock { a } => write!(f, "Shock {{ a: {a} }}"),
            Driver::Driven { a, gamma, .. } => write!(f, "Driven {{ a: {a}, gamma: {gamma} }}"),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Boundary {
    /// Driver on the left, ghost particle pinned at `right_anchor`.
    Driven { driver: Driver, right_anchor: f64 },
    /// Ring closure `x_{k+K} = x_k + length`; for conservation tests.
    Periodic { length: f64 },
}

#[derive(Debug, Clone)]
pub struct LatticeState {
    x: Vec<f64>,
    v: Vec<f64>,
    t: f64,
    boundary: Boundary,
    force: Force,
    acc: Vec<f64>,
}

impl LatticeState {
    pub fn new(x: Vec<f64>, v: Vec<f64>, boundary: Boundary, force: Force) -> Result<Self> {
        if x.len() != v.len() || x.is_empty() {
            return param("positions and velocities must be nonempty and equally long");
        }
        let mut s = Self {
            acc: vec![0.0; x.len()],
            x,
            v,
            t: 0.0,
            boundary,
            force,
        };
        s.refresh_acceleration();
        Ok(s)
    }

    pub fn with_force(mut self, force: Force) -> Self {
        self.force = force;
        self.refresh_acceleration();
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    pub fn driver(&self) -> Option<&Driver> {
        match &self.boundary {
            Boundary::Driven { driver, .. } => Some(driver),
            Boundary::Periodic { .. } => None,
        }
    }

    pub fn frame_velocity(&self) -> f64 {
        self.driver().map_or(0.0, Driver::mean_velocity)
    }

    fn neighbours(&self, x: &[f64], t: f64) -> (f64, f64) {
        let k = x.len();
        match &self.boundary {
            Boundary::Driven { driver, right_anchor } => (driver.position(t), *right_anchor),
            Boundary::Periodic { length } => (x[k - 1] - length, x[0] + length),
        }
    }

    /// Accelerations for positions `x` at time `t`.
    pub fn accelerations(&self, x: &[f64], t: f64) -> Vec<f64> {
        let k = x.len();
        let (left, right) = self.neighbours(x, t);
        (0..k)
            .map(|i| {
                let l = if i == 0 { left } else { x[i - 1] };
                let r = if i + 1 == k { right } else { x[i + 1] };
                self.force.eval(l - x[i]) - self.force.eval(x[i] - r)
            })
            .collect()
    }

    fn refresh_acceleration(&mut self) {
        self.acc = self.accelerations(&self.x, self.t);
    }

    /// Total energy: kinetic plus all bond potentials, including the bonds
    /// to the driver and to the ghost. `None` without a known potential.
    pub fn energy(&self) -> Option<f64> {
        let k = self.x.len();
        let (left, right) = self.neighbours(&self.x, self.t);
        let kinetic: f64 = self.v.iter().map(|v| 0.5 * v * v).sum();
        let mut pot = self.force.potential(left - self.x[0])?;
        for i in 1..k {
            pot += self.force.potential(self.x[i - 1] - self.x[i])?;
        }
        if matches!(self.boundary, Boundary::Driven { .. }) {
            pot += self.force.potential(self.x[k - 1] - right)?;
        }
        Some(kinetic + pot)
    }

    /// One velocity-Verlet step.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return param("time step must be positive");
        }
        let half = 0.5 * dt;
        for ((x, v), a) in self.x.iter_mut().zip(&mut self.v).zip(&self.acc) {
            *v += half * a;
            *x += dt * *v;
        }
        self.t += dt;
        self.refresh_acceleration();
        for (v, a) in self.v.iter_mut().zip(&self.acc) {
            *v += half * a;
        }
        if let Some(i) = self.x.iter().position(|x| !(x.abs() <= BLOW_UP)) {
            return Err(Error::BlowUp {
                t: self.t,
                reason: format!("particle {} left |x| <= {BLOW_UP:e}", i + 1),
            });
        }
        Ok(())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            t: self.t,
            x: self.x.clone(),
            v: self.v.clone(),
        }
    }
}

/// Shock data: `x_k = k`, at rest, `x_0(t) = 2at`.
pub fn init_shock(k: usize, a: f64) -> Result<LatticeState> {
    if k < 10 {
        return param("lattice needs at least 10 particles");
    }
    if !(a >= 0.0) {
        return param("drive speed a must be nonnegative");
    }
    let x: Vec<f64> = (1..=k).map(|i| i as f64).collect();
    LatticeState::new(
        x,
        vec![0.0; k],
        Boundary::Driven {
            driver: Driver::Shock { a },
            right_anchor: (k + 1) as f64,
        },
        Force::Exponential,
    )
}

/// Periodically driven data: all particles at rest at the origin,
/// `x_0(t) = 2at + h(gamma t)`.
pub fn init_driven(k: usize, a: f64, gamma: f64, h: ScalarFn) -> Result<LatticeState> {
    if k < 10 {
        return param("lattice needs at least 10 particles");
    }
    if !(gamma > 0.0) {
        return param("gamma must be positive");
    }
    LatticeState::new(
        vec![0.0; k],
        vec![0.0; k],
        Boundary::Driven {
            driver: Driver::Driven { a, gamma, h },
            right_anchor: 0.0,
        },
        Force::Exponential,
    )
}

/// Undriven ring of `k` particles at unit spacing with the given initial
/// velocities; a closed system used for conservation checks.
pub fn init_ring(velocities: Vec<f64>) -> Result<LatticeState> {
    let k = velocities.len();
    if k < 2 {
        return param("ring needs at least 2 particles");
    }
    let x = (1..=k).map(|i| i as f64).collect();
    LatticeState::new(x, velocities, Boundary::Periodic { length: k as f64 }, Force::Exponential)
}

/// Binary-state particle window for the shock problem at time `t`: away
/// from the driver boundary layer and well behind the front.
pub fn binary_window(t: f64) -> RangeInclusive<usize> {
    10..=((t / 3.0).floor() as usize).max(11)
}

#[derive(Debug, Clone)]
pub struct RichardsonReport {
    /// `max_k |x(dt) - x(dt/2)|` at the final time.
    pub coarse_difference: f64,
    /// `max_k |x(dt/2) - x(dt/4)|` at the final time.
    pub fine_difference: f64,
    /// Ratio of the two; about 4 for a second-order integrator.
    pub ratio: f64,
}

/// Observed convergence order from three runs at `dt`, `dt/2`, `dt/4`.
pub fn richardson_ratio(state: &LatticeState, dt: f64, t_end: f64) -> Result<RichardsonReport> {
    let run = |h: f64| -> Result<Vec<f64>> {
        let mut s = state.clone();
        let steps = ((t_end - s.time()) / h).round() as usize;
        for _ in 0..steps {
            s.step(h)?;
        }
        Ok(s.x)
    };
    let (a, b, c) = (run(dt)?, run(dt / 2.0)?, run(dt / 4.0)?);
    let diff = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
    let coarse_difference = diff(&a, &b);
    let fine_difference = diff(&b, &c);
    Ok(RichardsonReport {
        coarse_difference,
        fine_difference,
        ratio: coarse_difference / fine_difference,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Equally spaced snapshots of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub snapshots: Vec<Snapshot>,
    /// Velocity of the moving frame, `2a` for driven chains.
    pub frame_velocity: f64,
    /// Initial positions, the rest state of the truncated chain.
    pub rest: Vec<f64>,
}

impl Trajectory {
    pub fn spacing(&self) -> f64 {
        match self.snapshots.as_slice() {
            [a, b, ..] => b.t - a.t,
            _ => f64::NAN,
        }
    }

    pub fn t_start(&self) -> f64 {
        self.snapshots.first().map_or(0.0, |s| s.t)
    }

    pub fn t_end(&self) -> f64 {
        self.snapshots.last().map_or(0.0, |s| s.t)
    }

    /// Position of particle `k` (1-based) in the moving frame at time `t`,
    /// by cubic Hermite interpolation between snapshots.
    pub fn frame_position(&self, k: usize, t: f64) -> Result<f64> {
        let i = k - 1;
        let h = self.spacing();
        let u = (t - self.t_start()) / h;
        let snapped = u.round();
        let u = if (u - snapped).abs() < 1e-9 { snapped } else { u };
        let j = u.floor();
        if j < 0.0 || j as usize >= self.snapshots.len() {
            return param(format!("time {t} outside the trajectory"));
        }
        let j = j as usize;
        let c = self.frame_velocity;
        let s0 = &self.snapshots[j];
        let y0 = s0.x[i] - c * s0.t;
        let theta = u - j as f64;
        if theta == 0.0 {
            return Ok(y0);
        }
        let s1 = self
            .snapshots
            .get(j + 1)
            .ok_or_else(|| Error::Parameter(format!("time {t} outside the trajectory")))?;
        let y1 = s1.x[i] - c * s1.t;
        let (m0, m1) = ((s0.v[i] - c) * h, (s1.v[i] - c) * h);
        let t2 = theta * theta;
        let t3 = t2 * theta;
        Ok((2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + theta) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1)
    }

    /// CSV rows `t,k,x_k,v_k`, keeping every `stride`-th snapshot.
    pub fn write_csv<W: Write>(&self, mut w: W, stride: usize) -> Result<()> {
        writeln!(w, "t,k,x,v")?;
        for s in self.snapshots.iter().step_by(stride.max(1)) {
            for (i, (x, v)) in s.x.iter().zip(&s.v).enumerate() {
                writeln!(w, "{:e},{},{:e},{:e}", s.t, i + 1, x, v)?;
            }
        }
        Ok(())
    }
}

/// Integrates to `t_end`, recording a snapshot every `stride` steps.
pub fn simulate(mut state: LatticeState, dt: f64, t_end: f64, stride: usize) -> Result<Trajectory> {
    if !(dt > 0.0) || stride == 0 {
        return param("need dt > 0 and stride >= 1");
    }
    let rest = state.positions().to_vec();
    let frame_velocity = state.frame_velocity();
    let steps = ((t_end - state.time()) / dt).round().max(0.0) as usize;
    let mut snapshots = vec![state.snapshot()];
    for k in 1..=steps {
        state.step(dt)?;
        if k % stride == 0 {
            snapshots.push(state.snapshot());
        }
    }
    Ok(Trajectory {
        snapshots,
        frame_velocity,
        rest,
    })
}

/// Largest displacement of the last particle from rest over the run.
pub fn far_boundary_displacement(traj: &Trajectory) -> f64 {
    let last = traj.rest.len() - 1;
    traj.snapshots
        .iter()
        .map(|s| (s.x[last] - traj.rest[last]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicityReport {
    pub k: usize,
    pub period: f64,
    /// `max |y_k(t + P) - y_k(t)|` over the window, `y` in the moving frame.
    pub residual: f64,
    pub window_start: f64,
    pub window: f64,
}

/// Time-periodicity residual of particle `k` over `[t_w, t_w + window]`.
pub fn periodicity_residual(
    traj: &Trajectory,
    k: usize,
    period: f64,
    window_start: f64,
    window: f64,
) -> Result<PeriodicityReport> {
    if k == 0 || k > traj.rest.len() {
        return param(format!("particle index {k} out of range"));
    }
    if !(period > 0.0 && window >= 0.0) {
        return param("period must be positive and window nonnegative");
    }
    if window_start < traj.t_start() || window_start + window + period > traj.t_end() + 1e-9 {
        return param("trajectory does not cover the window plus one period");
    }
    let h = traj.spacing();
    let samples = (window / h).floor() as usize;
    let mut residual: f64 = 0.0;
    for i in 0..=samples {
        let t = window_start + i as f64 * h;
        let d = traj.frame_position(k, t + period)? - traj.frame_position(k, t)?;
        residual = residual.max(d.abs());
    }
    Ok(PeriodicityReport {
        k,
        period,
        residual,
        window_start,
        window,
    })
}

/// Fundamental period in `[p_min, p_max]` for particle `k`: a grid scan of
/// the periodicity residual brackets local minima, golden-section search
/// refines each, and the shortest near-optimal one wins (multiples of the
/// period fit equally well).
pub fn estimate_period(
    traj: &Trajectory,
    k: usize,
    window_start: f64,
    window: f64,
    p_min: f64,
    p_max: f64,
) -> Result<PeriodicityReport> {
    if !(p_min > 0.0 && p_max > p_min) {
        return param("need 0 < p_min < p_max");
    }
    let grid = 200;
    let eval = |p: f64| periodicity_residual(traj, k, p, window_start, window);
    let step = (p_max - p_min) / grid as f64;
    let scan = (0..=grid)
        .map(|i| eval(p_min + i as f64 * step))
        .collect::<Result<Vec<_>>>()?;
    let is_local_min = |i: usize| {
        let r = scan[i].residual;
        (i == 0 || r <= scan[i - 1].residual) && (i == grid || r <= scan[i + 1].residual)
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut refined = Vec::new();
    for i in (0..=grid).filter(|&i| is_local_min(i)) {
        let centre = scan[i];
        let (mut lo, mut hi) = ((centre.period - step).max(p_min), (centre.period + step).min(p_max));
        for _ in 0..40 {
            let a = hi - g * (hi - lo);
            let b = lo + g * (hi - lo);
            if eval(a)?.residual < eval(b)?.residual {
                hi = b;
            } else {
                lo = a;
            }
        }
        let r = eval(0.5 * (lo + hi))?;
        refined.push(if r.residual < centre.residual { r } else { centre });
    }
    let best = refined.iter().map(|r| r.residual).fold(f64::INFINITY, f64::min);
    Ok(*refined
        .iter()
        .find(|r| r.residual <= 2.0 * best + 1e-12)
        .expect("the best minimum qualifies"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryReport {
    /// `max |(x_{k+2} - x_k) - D|` over the window and particle range.
    pub residual: f64,
    /// `D`, the mean of `x_{k+2} - x_k` over the same set.
    pub mean_double_spacing: f64,
}

/// Period-two structure in the particle index: in a binary state
/// `x_{k+2}(t) - x_k(t)` is one constant for all `k` and `t`.
pub fn binary_residual(
    traj: &Trajectory,
    particles: RangeInclusive<usize>,
    window_start: f64,
    window: f64,
) -> Result<BinaryReport> {
    let (k_lo, k_hi) = (*particles.start(), *particles.end());
    if k_lo == 0 || k_hi < k_lo || k_hi + 2 > traj.rest.len() {
        return param("particle range must satisfy 1 <= lo <= hi <= K - 2");
    }
    let snaps: Vec<&Snapshot> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= window_start - 1e-9 && s.t <= window_start + window + 1e-9)
        .collect();
    if snaps.is_empty() {
        return param("no snapshots inside the window");
    }
    let diffs: Vec<f64> = snaps
        .iter()
        .flat_map(|s| (k_lo..=k_hi).map(move |k| s.x[k + 1] - s.x[k - 1]))
        .collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let residual = diffs.iter().map(|d| (d - mean).abs()).fold(0.0, f64::max);
    Ok(BinaryReport {
        residual,
        mean_double_spacing: mean,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayProfile {
    pub c: f64,
    pub d: f64,
    /// `|x_k - c k - d|` for `k = 1..=K`.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `log residual` against `k` over the decay
    /// window; negative means exponential decay into the lattice.
    pub log_slope: f64,
}

/// Residuals below this are treated as zero when fitting the decay rate.
const DECAY_FLOOR: f64 = 1e-13;

fn least_squares_line(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fits `x_k ~ c k + d` over `fit_window` and measures how fast the
/// deviation decays over `decay_window` (both 1-based, inclusive).
pub fn decay_profile(
    x: &[f64],
    fit_window: RangeInclusive<usize>,
    decay_window: RangeInclusive<usize>,
) -> Result<DecayProfile> {
    let kmax = x.len();
    let ok = |r: &RangeInclusive<usize>| *r.start() >= 1 && *r.end() <= kmax && r.end() > r.start();
    if !ok(&fit_window) || !ok(&decay_window) {
        return param("fit and decay windows need at least two particles inside 1..=K");
    }
    let pts: Vec<(f64, f64)> = fit_window.map(|k| (k as f64, x[k - 1])).collect();
    let (c, d) = least_squares_line(&pts);
    let residuals: Vec<f64> = (1..=kmax).map(|k| (x[k - 1] - c * k as f64 - d).abs()).collect();
    let logs: Vec<(f64, f64)> = decay_window
        .filter(|&k| residuals[k - 1] > DECAY_FLOOR)
        .map(|k| (k as f64, residuals[k - 1].ln()))
        .collect();
    if logs.len() < 2 {
        return param("decay window has fewer than two resolvable residuals");
    }
    let (log_slope, _) = least_squares_line(&logs);
    Ok(DecayProfile {
        c,
        d,
        residuals,
        log_slope,
    })
}

/// Bisection for the point where a monotone classifier flips, e.g. the
/// smallest drive frequency whose oscillation still decays into the lattice.
/// `above(hi)` must be true and `above(lo)` false.
pub fn locate_threshold<F>(mut lo: f64, mut hi: f64, tol: f64, mut above: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<bool>,
{
    if !(lo < hi) || !(tol > 0.0) {
        return param("need lo < hi and tol > 0");
    }
    if above(lo)? || !above(hi)? {
        return param("classifier does not change sign on the bracket");
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
