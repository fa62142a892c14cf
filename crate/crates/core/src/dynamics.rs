//! Orbits of the model flow, time averages along them, and Lyapunov exponents
//! of the diagonal cocycle.

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::DefiningPair;
use crate::error::{AlvError, Result};
use crate::frame::{FrameManifold, FLOW};
use crate::grid::{Interpolator, ScalarField};

/// A sampled trajectory of `X` on the parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitSample {
    pub x0: Vec<f64>,
    pub dt: f64,
    pub horizon: f64,
    /// `horizon / dt + 1` positions, including both endpoints.
    pub positions: Vec<Vec<f64>>,
}

impl OrbitSample {
    pub fn steps(&self) -> usize {
        self.positions.len() - 1
    }

    /// Values of `field` along the orbit.
    pub fn sample(&self, field: &ScalarField) -> Vec<f64> {
        let interp = field.interpolator();
        self.positions.iter().map(|p| interp.eval(p)).collect()
    }
}

struct Velocity {
    terms: Vec<(usize, Interpolator)>,
    ndim: usize,
}

impl Velocity {
    fn new(model: &FrameManifold) -> Self {
        Self {
            terms: model
                .derivation(FLOW)
                .terms()
                .iter()
                .map(|(axis, c)| (*axis, c.interpolator()))
                .collect(),
            ndim: model.grid().ndim(),
        }
    }

    fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut v = vec![0.0; self.ndim];
        for (axis, c) in &self.terms {
            v[*axis] += c.eval(x);
        }
        v
    }
}

fn step_count(horizon: f64, dt: f64) -> Result<usize> {
    if !(horizon > 0.0 && dt > 0.0 && dt <= 1e-2 * horizon) {
        return Err(AlvError::InvalidParameter(format!(
            "need 0 < dt <= T / 100, got dt = {dt}, T = {horizon}"
        )));
    }
    Ok((horizon / dt).round() as usize)
}

fn axpy(x: &[f64], a: f64, v: &[f64]) -> Vec<f64> {
    x.iter().zip(v).map(|(x, v)| x + a * v).collect()
}

/// One classical Runge-Kutta step of `x' = v(x)`, `y' = r(x)`.
fn rk4_step(
    vel: &Velocity,
    rates: &[Interpolator],
    x: &[f64],
    y: &mut [f64],
    h: f64,
) -> Vec<f64> {
    let rate = |p: &[f64]| rates.iter().map(|r| r.eval(p)).collect::<Vec<_>>();
    let (k1, l1) = (vel.eval(x), rate(x));
    let x2 = axpy(x, 0.5 * h, &k1);
    let (k2, l2) = (vel.eval(&x2), rate(&x2));
    let x3 = axpy(x, 0.5 * h, &k2);
    let (k3, l3) = (vel.eval(&x3), rate(&x3));
    let x4 = axpy(x, h, &k3);
    let (k4, l4) = (vel.eval(&x4), rate(&x4));
    for (i, y) in y.iter_mut().enumerate() {
        *y += h / 6.0 * (l1[i] + 2.0 * l2[i] + 2.0 * l3[i] + l4[i]);
    }
    (0..x.len())
        .map(|a| x[a] + h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]))
        .collect()
}

pub fn integrate_orbit(model: &FrameManifold, x0: &[f64], horizon: f64, dt: f64) -> Result<OrbitSample> {
    if x0.len() != model.grid().ndim() {
        return Err(AlvError::ShapeMismatch(format!(
            "initial point has {} coordinates, grid has {}",
            x0.len(),
            model.grid().ndim()
        )));
    }
    let n = step_count(horizon, dt)?;
    let h = horizon / n as f64;
    let vel = Velocity::new(model);
    let mut x = x0.to_vec();
    model.grid().wrap(&mut x);
    let mut positions = Vec::with_capacity(n + 1);
    positions.push(x.clone());
    for _ in 0..n {
        x = rk4_step(&vel, &[], &x, &mut [], h);
        model.grid().wrap(&mut x);
        positions.push(x.clone());
    }
    Ok(OrbitSample {
        x0: x0.to_vec(),
        dt: h,
        horizon,
        positions,
    })
}

/// Trapezoidal time average of `field` along the orbit.
pub fn birkhoff_average(field: &ScalarField, orbit: &OrbitSample) -> f64 {
    let v = orbit.sample(field);
    let n = v.len() - 1;
    let inner: f64 = v[1..n].iter().sum();
    orbit.dt * (0.5 * (v[0] + v[n]) + inner) / orbit.horizon
}

/// Growth exponents of the stable and unstable directions along one orbit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LyapunovEstimate {
    pub lambda_u: f64,
    pub lambda_s: f64,
    pub birkhoff_u: f64,
    pub birkhoff_s: f64,
}

/// Integrates `d/dt log |w_{s,u}| = r_{s,u}(phi^t x)` alongside the orbit.
pub fn lyapunov_cocycle(
    model: &FrameManifold,
    dp: &DefiningPair,
    x0: &[f64],
    horizon: f64,
    dt: f64,
) -> Result<LyapunovEstimate> {
    let orbit = integrate_orbit(model, x0, horizon, dt)?;
    let n = orbit.steps();
    let vel = Velocity::new(model);
    let rates = [dp.r_u.interpolator(), dp.r_s.interpolator()];
    let mut x = orbit.positions[0].clone();
    let mut logs = [0.0, 0.0];
    for _ in 0..n {
        x = rk4_step(&vel, &rates, &x, &mut logs, orbit.dt);
        model.grid().wrap(&mut x);
    }
    Ok(LyapunovEstimate {
        lambda_u: logs[0] / horizon,
        lambda_s: logs[1] / horizon,
        birkhoff_u: birkhoff_average(&dp.r_u, &orbit),
        birkhoff_s: birkhoff_average(&dp.r_s, &orbit),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeReport {
    pub horizon: f64,
    pub initial_points: Vec<Vec<f64>>,
    /// `birkhoff_average(r_u + r_s)` per orbit.
    pub averages: Vec<f64>,
    pub max_abs_average: f64,
}

/// Deterministic quasi-random initial points on the grid.
pub fn spread_points(model: &FrameManifold, count: usize) -> Vec<Vec<f64>> {
    const SHIFTS: [f64; 3] = [0.618_033_988_749_895, 0.754_877_666_246_693, 0.569_840_290_998_053];
    (0..count)
        .map(|k| {
            model
                .grid()
                .axes()
                .iter()
                .enumerate()
                .map(|(a, ax)| ((k as f64 * SHIFTS[a]).fract()) * ax.period)
                .collect()
        })
        .collect()
}

pub fn volume_preservation_test(
    model: &FrameManifold,
    dp: &DefiningPair,
    n_orbits: usize,
    horizon: f64,
    dt: f64,
) -> Result<VolumeReport> {
    if n_orbits == 0 {
        return Err(AlvError::InvalidParameter("need at least one orbit".into()));
    }
    let divergence = dp.divergence();
    let initial_points = spread_points(model, n_orbits);
    let averages = initial_points
        .par_iter()
        .map(|x0| integrate_orbit(model, x0, horizon, dt).map(|o| birkhoff_average(&divergence, &o)))
        .collect::<Result<Vec<f64>>>()?;
    let max_abs_average = averages.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    Ok(VolumeReport {
        horizon,
        initial_points,
        averages,
        max_abs_average,
    })
}
