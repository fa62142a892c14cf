//! Periodic parameter grids and the scalar fields sampled on them.
//!
//! Every scalar quantity of a model lives on the model's grid: a product of up
//! to three periodic axes. A grid with no axes carries exactly one sample and
//! represents constant fields (used by the constant-structure models).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{AlvError, Result};

/// One periodic coordinate of a parameter grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub name: String,
    pub samples: usize,
    pub period: f64,
}

impl Axis {
    pub fn new(name: impl Into<String>, samples: usize, period: f64) -> Self {
        Self {
            name: name.into(),
            samples,
            period,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.samples as f64
    }
}

/// How derivatives along grid axes are computed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeScheme {
    /// Fourier differentiation; exact for band-limited periodic data.
    #[default]
    Spectral,
    /// Fourth-order centered finite differences.
    CentralDifference,
}

/// Descriptor of the periodic sampling domain shared by all fields of a model.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
    scheme: DerivativeScheme,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    /// Builds a row-major grid (last axis varies fastest).
    pub fn new(axes: Vec<Axis>, scheme: DerivativeScheme) -> Result<Self> {
        if axes.len() > 3 {
            return Err(AlvError::DegenerateGrid(format!(
                "at most 3 axes are supported, got {}",
                axes.len()
            )));
        }
        for axis in &axes {
            if axis.samples < 4 {
                return Err(AlvError::DegenerateGrid(format!(
                    "axis '{}' needs at least 4 samples, got {}",
                    axis.name, axis.samples
                )));
            }
            if !(axis.period.is_finite() && axis.period > 0.0) {
                return Err(AlvError::DegenerateGrid(format!(
                    "axis '{}' has non-positive period {}",
                    axis.name, axis.period
                )));
            }
        }
        let mut strides = vec![1; axes.len()];
        for i in (0..axes.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * axes[i + 1].samples;
        }
        let len = axes.iter().map(|a| a.samples).product();
        Ok(Self {
            axes,
            scheme,
            strides,
            len,
        })
    }

    /// The single-point grid carrying constant fields.
    pub fn point() -> Self {
        Self {
            axes: Vec::new(),
            scheme: DerivativeScheme::Spectral,
            strides: Vec::new(),
            len: 1,
        }
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.samples).collect()
    }

    pub fn axis_index(&self, name: &str) -> Option<usize> {
        self.axes.iter().position(|a| a.name == name)
    }

    pub fn unravel(&self, flat: usize) -> Vec<usize> {
        self.axes
            .iter()
            .zip(&self.strides)
            .map(|(a, s)| (flat / s) % a.samples)
            .collect()
    }

    /// Coordinates of a grid point, one per axis.
    pub fn coords(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .into_iter()
            .zip(&self.axes)
            .map(|(i, a)| i as f64 * a.spacing())
            .collect()
    }

    /// Wraps a point into the fundamental domain of every axis.
    pub fn wrap(&self, point: &mut [f64]) {
        for (x, a) in point.iter_mut().zip(&self.axes) {
            *x = x.rem_euclid(a.period);
        }
    }

    fn lines(&self, axis: usize) -> impl Iterator<Item = usize> + '_ {
        let stride = self.strides[axis];
        let n = self.axes[axis].samples;
        (0..self.len).filter(move |&i| (i / stride).is_multiple_of(n))
    }
}

/// Grid location reported with margins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridLocation {
    pub index: usize,
    pub coords: Vec<f64>,
}

impl GridLocation {
    pub fn new(grid: &Grid, index: usize) -> Self {
        Self {
            index,
            coords: grid.coords(index),
        }
    }
}

/// A real function on the grid, stored as its samples.
#[derive(Clone, PartialEq)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("shape", &self.grid.shape())
            .field("min", &self.min())
            .field("max", &self.max())
            .finish()
    }
}

impl ScalarField {
    pub fn constant(grid: &Arc<Grid>, value: f64) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.len()],
        }
    }

    pub fn zeros(grid: &Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Samples `f` at every grid point; `f` receives the point's coordinates.
    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_values(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(AlvError::ShapeMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(AlvError::NonFinite(format!("sample {i} is {}", values[i])));
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.values.len(), other.values.len());
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn exp(&self) -> Self {
        self.map(f64::exp)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn div(&self, other: &Self) -> Self {
        self.zip_with(other, |a, b| a / b)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Index of the first minimal sample (NaN never wins).
    pub fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v < self.values[best] {
                best = i;
            }
        }
        best
    }

    /// Minimum together with its grid location.
    pub fn min_with_location(&self) -> (f64, GridLocation) {
        let i = self.argmin();
        (self.values[i], GridLocation::new(&self.grid, i))
    }

    /// Derivative along one grid axis using the grid's derivative scheme.
    pub fn axis_derivative(&self, axis: usize) -> Self {
        let a = &self.grid.axes()[axis];
        let n = a.samples;
        let stride = self.grid.strides[axis];
        let mut out = vec![0.0; self.values.len()];
        match self.grid.scheme() {
            DerivativeScheme::Spectral => {
                let mut planner = FftPlanner::<f64>::new();
                let fwd = planner.plan_fft_forward(n);
                let inv = planner.plan_fft_inverse(n);
                let mut buf = vec![Complex64::new(0.0, 0.0); n];
                let w = 2.0 * std::f64::consts::PI / a.period;
                for base in self.grid.lines(axis) {
                    for (j, b) in buf.iter_mut().enumerate() {
                        *b = Complex64::new(self.values[base + j * stride], 0.0);
                    }
                    fwd.process(&mut buf);
                    for (k, b) in buf.iter_mut().enumerate() {
                        if n.is_multiple_of(2) && k == n / 2 {
                            *b = Complex64::new(0.0, 0.0);
                        } else {
                            *b *= Complex64::new(0.0, w * signed_mode(k, n) as f64);
                        }
                    }
                    inv.process(&mut buf);
                    for (j, b) in buf.iter().enumerate() {
                        out[base + j * stride] = b.re / n as f64;
                    }
                }
            }
            DerivativeScheme::CentralDifference => {
                let h = a.spacing();
                for base in self.grid.lines(axis) {
                    let v = |j: isize| self.values[base + (j.rem_euclid(n as isize) as usize) * stride];
                    for j in 0..n as isize {
                        out[base + j as usize * stride] =
                            (-v(j + 2) + 8.0 * v(j + 1) - 8.0 * v(j - 1) + v(j - 2)) / (12.0 * h);
                    }
                }
            }
        }
        Self {
            grid: self.grid.clone(),
            values: out,
        }
    }

    /// The field `x -> self(x + delta e_axis)`, by exact Fourier phase shift.
    pub fn shifted(&self, axis: usize, delta: f64) -> Self {
        let a = &self.grid.axes()[axis];
        let n = a.samples;
        let stride = self.grid.strides[axis];
        let mut out = vec![0.0; self.values.len()];
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let w = 2.0 * std::f64::consts::PI / a.period;
        for base in self.grid.lines(axis) {
            for (j, b) in buf.iter_mut().enumerate() {
                *b = Complex64::new(self.values[base + j * stride], 0.0);
            }
            fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                if n.is_multiple_of(2) && k == n / 2 {
                    *b *= (w * k as f64 * delta).cos();
                } else {
                    *b *= Complex64::from_polar(1.0, w * signed_mode(k, n) as f64 * delta);
                }
            }
            inv.process(&mut buf);
            for (j, b) in buf.iter().enumerate() {
                out[base + j * stride] = b.re / n as f64;
            }
        }
        Self {
            grid: self.grid.clone(),
            values: out,
        }
    }

    /// Trigonometric interpolant for evaluation at arbitrary points.
    pub fn interpolator(&self) -> Interpolator {
        Interpolator::new(self)
    }
}

fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Band-limited interpolant of a field, evaluated off-grid by direct Fourier sums.
#[derive(Clone, Debug)]
pub struct Interpolator {
    axes: Vec<Axis>,
    strides: Vec<usize>,
    coeffs: Vec<Complex64>,
    constant: Option<f64>,
}

impl Interpolator {
    fn new(field: &ScalarField) -> Self {
        let grid = field.grid();
        let first = field.values[0];
        if field.values.iter().all(|&v| v == first) {
            return Self {
                axes: grid.axes().to_vec(),
                strides: grid.strides.clone(),
                coeffs: Vec::new(),
                constant: Some(first),
            };
        }
        let mut coeffs: Vec<Complex64> = field
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let mut planner = FftPlanner::<f64>::new();
        for (axis, a) in grid.axes().iter().enumerate() {
            let n = a.samples;
            let stride = grid.strides[axis];
            let fwd = planner.plan_fft_forward(n);
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            for base in grid.lines(axis) {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = coeffs[base + j * stride];
                }
                fwd.process(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    coeffs[base + j * stride] = *b / n as f64;
                }
            }
        }
        Self {
            axes: grid.axes().to_vec(),
            strides: grid.strides.clone(),
            coeffs,
            constant: None,
        }
    }

    pub fn eval(&self, point: &[f64]) -> f64 {
        if let Some(c) = self.constant {
            return c;
        }
        // per-axis basis values e^{i k w x}; the Nyquist mode is a cosine
        let factors: Vec<Vec<Complex64>> = self
            .axes
            .iter()
            .zip(point)
            .map(|(a, &x)| {
                let n = a.samples;
                let w = 2.0 * std::f64::consts::PI / a.period;
                (0..n)
                    .map(|k| {
                        if n.is_multiple_of(2) && k == n / 2 {
                            Complex64::new((w * k as f64 * x).cos(), 0.0)
                        } else {
                            Complex64::from_polar(1.0, w * signed_mode(k, n) as f64 * x)
                        }
                    })
                    .collect()
            })
            .collect();
        let mut total = Complex64::new(0.0, 0.0);
        for (flat, c) in self.coeffs.iter().enumerate() {
            let mut term = *c;
            for (axis, f) in factors.iter().enumerate() {
                let k = (flat / self.strides[axis]) % self.axes[axis].samples;
                term *= f[k];
            }
            total += term;
        }
        total.re
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn line(n: usize, scheme: DerivativeScheme) -> Arc<Grid> {
        Arc::new(Grid::new(vec![Axis::new("t", n, 1.0)], scheme).unwrap())
    }

    #[test]
    fn spectral_derivative_of_trig_polynomial() {
        let g = line(64, DerivativeScheme::Spectral);
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin() + 0.3 * (6.0 * PI * x[0]).cos());
        let df = f.axis_derivative(0);
        let exact = ScalarField::from_fn(&g, |x| {
            2.0 * PI * (2.0 * PI * x[0]).cos() - 0.3 * 6.0 * PI * (6.0 * PI * x[0]).sin()
        });
        assert!((&df - &exact).sup_norm() < 1e-11);
    }

    #[test]
    fn finite_difference_fallback_is_fourth_order() {
        let err = |n| {
            let g = line(n, DerivativeScheme::CentralDifference);
            let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
            let exact = ScalarField::from_fn(&g, |x| 2.0 * PI * (2.0 * PI * x[0]).cos());
            (&f.axis_derivative(0) - &exact).sup_norm()
        };
        let ratio = err(32) / err(64);
        assert!(ratio > 14.0 && ratio < 18.0, "ratio {ratio}");
    }

    #[test]
    fn constant_field_has_zero_derivative() {
        let g = line(16, DerivativeScheme::Spectral);
        let c = ScalarField::constant(&g, 2.5);
        assert_eq!(c.axis_derivative(0).sup_norm(), 0.0);
    }

    #[test]
    fn shift_and_interpolation_agree_with_closed_form() {
        let g = line(32, DerivativeScheme::Spectral);
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).cos() + 0.5 * (4.0 * PI * x[0]).sin());
        let s = f.shifted(0, 0.123);
        let exact = ScalarField::from_fn(&g, |x| {
            let y = x[0] + 0.123;
            (2.0 * PI * y).cos() + 0.5 * (4.0 * PI * y).sin()
        });
        assert!((&s - &exact).sup_norm() < 1e-12);
        let it = f.interpolator();
        let y: f64 = 0.6473;
        let v = (2.0 * PI * y).cos() + 0.5 * (4.0 * PI * y).sin();
        assert!((it.eval(&[y]) - v).abs() < 1e-12);
    }

    #[test]
    fn shifting_by_a_full_period_is_identity() {
        let g = line(32, DerivativeScheme::Spectral);
        let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin().exp());
        let s = f.shifted(0, 1.0);
        assert!((&s - &f).sup_norm() < 1e-13);
    }

    #[test]
    fn three_axis_layout_and_mixed_derivative() {
        let axes = vec![Axis::new("x", 8, 1.0), Axis::new("y", 10, 1.0), Axis::new("z", 12, 2.0)];
        let g = Arc::new(Grid::new(axes, DerivativeScheme::Spectral).unwrap());
        assert_eq!(g.len(), 960);
        assert_eq!(g.unravel(g.len() - 1), vec![7, 9, 11]);
        let f = ScalarField::from_fn(&g, |p| (2.0 * PI * p[0]).sin() * (PI * p[2]).cos());
        let dz = f.axis_derivative(2);
        let exact = ScalarField::from_fn(&g, |p| -PI * (2.0 * PI * p[0]).sin() * (PI * p[2]).sin());
        assert!((&dz - &exact).sup_norm() < 1e-12);
        let it = f.interpolator();
        let p = [0.31, 0.2, 1.37];
        let v = (2.0 * PI * p[0]).sin() * (PI * p[2]).cos();
        assert!((it.eval(&p) - v).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids_and_values() {
        assert!(Grid::new(vec![Axis::new("t", 3, 1.0)], DerivativeScheme::Spectral).is_err());
        assert!(Grid::new(vec![Axis::new("t", 8, 0.0)], DerivativeScheme::Spectral).is_err());
        let g = line(8, DerivativeScheme::Spectral);
        assert!(ScalarField::from_values(&g, vec![0.0; 7]).is_err());
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert!(ScalarField::from_values(&g, v).is_err());
    }
}
