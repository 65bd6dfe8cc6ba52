//! Uniform periodic spatial grid, complex field storage, spectral
//! differentiation and quadrature — the substrate every other module
//! computes on.
//!
//! The domain is `[-L, L)` with `N` (a power of two) equispaced points.
//! Derivatives are computed in Fourier space with the wavenumber layout
//! `k = [0, 1, ..., N/2-1, -N/2, ..., -1] * (pi / L)`, and integrals by the
//! rectangle rule, which is spectrally accurate for smooth integrands that
//! decay before the boundary. Dimension is fixed to one.

use std::sync::Mutex;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[-half_width, half_width)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    points: usize,
}

impl Grid {
    /// `points` must be a power of two >= 16; `half_width` positive.
    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "grid.half_width must be positive, got {half_width}"
            )));
        }
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::ParameterOutOfRange(format!(
                "grid.points must be a power of two >= 16, got {points}"
            )));
        }
        Ok(Self { half_width, points })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid spacing 2L/N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.points as f64
    }

    /// Coordinate of the j-th node, x_j = -L + j*dx.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    /// All node coordinates.
    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|j| self.coord(j)).collect()
    }

    /// Angular wavenumber of spectral bin `k` in FFT ordering.
    pub fn wavenumber(&self, k: usize) -> f64 {
        let n = self.points as isize;
        let k = k as isize;
        let signed = if k < n / 2 { k } else { k - n };
        signed as f64 * std::f64::consts::PI / self.half_width
    }
}

/// Complex-valued function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl ComplexField {
    /// Wraps samples, rejecting NaN/Inf and length mismatches.
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.points() {
            return Err(Error::GridMismatch(format!(
                "field has {} samples, grid has {} points",
                values.len(),
                grid.points()
            )));
        }
        if !values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::InvalidField(
                "non-finite sample in field values".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f(x)` on every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = (0..grid.points()).map(|j| f(grid.coord(j))).collect();
        Self::new(grid, values)
    }

    pub fn zero(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Largest sample modulus.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch(
                "fields sampled on different grids".into(),
            ));
        }
        Ok(())
    }
}

// FFT plans are cached inside a single process-wide planner; rustfft plans
// are Arc'd and safe to run concurrently once retrieved.
static PLANNER: Mutex<Option<FftPlanner<f64>>> = Mutex::new(None);

fn run_fft(values: &mut [Complex64], forward: bool) {
    let plan = {
        let mut guard = PLANNER.lock().expect("fft planner poisoned");
        let planner = guard.get_or_insert_with(FftPlanner::new);
        if forward {
            planner.plan_fft_forward(values.len())
        } else {
            planner.plan_fft_inverse(values.len())
        }
    };
    plan.process(values);
}

/// Unnormalized forward FFT of the samples.
pub fn fft_forward(field: &ComplexField) -> Vec<Complex64> {
    let mut v = field.values.clone();
    run_fft(&mut v, true);
    v
}

/// Inverse FFT including the 1/N normalization.
pub fn fft_inverse(grid: Grid, mut spectrum: Vec<Complex64>) -> Result<ComplexField> {
    run_fft(&mut spectrum, false);
    let scale = 1.0 / grid.points() as f64;
    for v in spectrum.iter_mut() {
        *v *= scale;
    }
    ComplexField::new(grid, spectrum)
}

/// Applies a spectral multiplier `m(xi)` to the field.
pub fn apply_multiplier(field: &ComplexField, m: impl Fn(f64) -> Complex64) -> Result<ComplexField> {
    let grid = field.grid();
    let mut spectrum = fft_forward(field);
    for (k, v) in spectrum.iter_mut().enumerate() {
        *v *= m(grid.wavenumber(k));
    }
    fft_inverse(grid, spectrum)
}

/// Second derivative via the Fourier symbol `-xi^2`. Exact for band-limited
/// inputs.
pub fn spectral_laplacian(field: &ComplexField) -> Result<ComplexField> {
    apply_multiplier(field, |xi| Complex64::new(-xi * xi, 0.0))
}

/// First derivative via the Fourier symbol `i xi`.
pub fn spectral_derivative(field: &ComplexField) -> Result<ComplexField> {
    apply_multiplier(field, |xi| Complex64::new(0.0, xi))
}

/// Rectangle-rule approximation of `(∫ |f|^2 dx)^{1/2}`.
pub fn l2_norm(field: &ComplexField) -> f64 {
    let dx = field.grid().spacing();
    (field.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dx).sqrt()
}

/// Discrete `∫ f conj(g) dx`; conjugate-symmetric in its arguments.
pub fn inner_product(f: &ComplexField, g: &ComplexField) -> Result<Complex64> {
    f.check_same_grid(g)?;
    let dx = f.grid().spacing();
    let s: Complex64 = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(s * dx)
}

/// Time-indexed stack of field slices on a shared grid.
#[derive(Debug, Clone)]
pub struct SpaceTimeField {
    grid: Grid,
    times: Vec<f64>,
    slices: Vec<ComplexField>,
}

impl SpaceTimeField {
    pub fn new(grid: Grid, times: Vec<f64>, slices: Vec<ComplexField>) -> Result<Self> {
        if times.len() != slices.len() {
            return Err(Error::GridMismatch(format!(
                "{} times but {} slices",
                times.len(),
                slices.len()
            )));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::NonUniformTimeGrid(
                "times must be strictly increasing".into(),
            ));
        }
        for s in &slices {
            if s.grid() != grid {
                return Err(Error::GridMismatch("slice grid differs".into()));
            }
        }
        Ok(Self { grid, times, slices })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn slices(&self) -> &[ComplexField] {
        &self.slices
    }

    pub fn slice(&self, i: usize) -> &ComplexField {
        &self.slices[i]
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Uniform spacing of the time grid, or an error if the spacing varies
    /// by more than a relative 1e-9.
    pub fn uniform_dt(&self) -> Result<f64> {
        if self.times.len() < 2 {
            return Err(Error::NonUniformTimeGrid(
                "need at least two time samples".into(),
            ));
        }
        let dt = self.times[1] - self.times[0];
        let span = self.times[self.times.len() - 1] - self.times[0];
        for w in self.times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * span.max(1.0) {
                return Err(Error::NonUniformTimeGrid(format!(
                    "spacing varies: {} vs {}",
                    w[1] - w[0],
                    dt
                )));
            }
        }
        Ok(dt)
    }
}

/// `count` equispaced times from `start` to `end` inclusive.
pub fn uniform_times(start: f64, end: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && end > start);
    let dt = (end - start) / (count as f64 - 1.0);
    (0..count)
        .map(|i| {
            if i + 1 == count {
                end
            } else {
                start + i as f64 * dt
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn test_grid() -> Grid {
        Grid::new(20.0, 1024).unwrap()
    }

    fn gaussian(grid: Grid) -> ComplexField {
        ComplexField::from_fn(grid, |x| Complex64::new((-x * x).exp(), 0.0)).unwrap()
    }

    #[test]
    fn grid_constructor_rejects_bad_inputs() {
        assert!(Grid::new(-1.0, 1024).is_err());
        assert!(Grid::new(10.0, 1000).is_err());
        assert!(Grid::new(10.0, 8).is_err());
        let g = Grid::new(20.0, 1024).unwrap();
        assert_relative_eq!(g.spacing() * g.points() as f64, 2.0 * g.half_width());
    }

    #[test]
    fn field_rejects_non_finite() {
        let g = test_grid();
        let mut vals = vec![Complex64::new(0.0, 0.0); g.points()];
        vals[3] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(
            ComplexField::new(g, vals),
            Err(Error::InvalidField(_))
        ));
    }

    #[test]
    fn laplacian_of_grid_exponential_is_eigenvalue() {
        let g = test_grid();
        // k must be a grid frequency: k = m * pi / L.
        let k = 8.0 * PI / g.half_width();
        let f = ComplexField::from_fn(g, |x| Complex64::new(0.0, k * x).exp()).unwrap();
        let lap = spectral_laplacian(&f).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in lap.values().iter().zip(f.values()) {
            worst = worst.max((a + k * k * b).norm());
        }
        assert!(worst < 1e-9, "worst deviation {worst}");
    }

    #[test]
    fn laplacian_of_constant_is_zero() {
        let g = test_grid();
        let f = ComplexField::from_fn(g, |_| Complex64::new(1.0, 0.0)).unwrap();
        let lap = spectral_laplacian(&f).unwrap();
        assert!(lap.max_abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_gaussian_matches_analytic() {
        let g = test_grid();
        let f = gaussian(g);
        let lap = spectral_laplacian(&f).unwrap();
        let exact =
            ComplexField::from_fn(g, |x| Complex64::new((4.0 * x * x - 2.0) * (-x * x).exp(), 0.0))
                .unwrap();
        let diff: Vec<Complex64> = lap
            .values()
            .iter()
            .zip(exact.values())
            .map(|(a, b)| a - b)
            .collect();
        let err = (diff.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.spacing()).sqrt();
        assert!(err / l2_norm(&exact) < 1e-10, "rel err {}", err);
    }

    #[test]
    fn l2_norm_of_gaussian() {
        let g = test_grid();
        let f = gaussian(g);
        // ∫ e^{-2x^2} dx = sqrt(pi/2)
        assert_relative_eq!(
            l2_norm(&f),
            (PI / 2.0).sqrt().sqrt(),
            max_relative = 1e-12
        );
        assert_eq!(l2_norm(&ComplexField::zero(g)), 0.0);
    }

    #[test]
    fn l2_norm_matches_adaptive_quadrature_on_bump() {
        // Smooth unit-mass bump, compared against an adaptive quadrature oracle.
        let g = test_grid();
        let bump = |x: f64| {
            let s: f64 = x / 3.0;
            if s.abs() < 1.0 {
                (1.0 - 1.0 / (1.0 - s * s)).exp()
            } else {
                0.0
            }
        };
        let f = ComplexField::from_fn(g, |x| Complex64::new(bump(x), 0.0)).unwrap();
        let oracle = crate::quad::adaptive_simpson(&|x| bump(x) * bump(x), -3.0, 3.0, 1e-14);
        assert!((l2_norm(&f) - oracle.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn inner_product_conjugate_symmetry_and_norm() {
        let g = test_grid();
        let f = ComplexField::from_fn(g, |x| Complex64::new((-x * x).exp(), 0.3 * x * (-x * x).exp()))
            .unwrap();
        let h = ComplexField::from_fn(g, |x| Complex64::new((-0.5 * x * x).exp(), 0.1)).unwrap();
        let fg = inner_product(&f, &h).unwrap();
        let gf = inner_product(&h, &f).unwrap();
        assert!((fg - gf.conj()).norm() < 1e-12);
        let ff = inner_product(&f, &f).unwrap();
        assert!(ff.im.abs() < 1e-14);
        assert_relative_eq!(ff.re, l2_norm(&f).powi(2), max_relative = 1e-12);
    }

    #[test]
    fn grid_exponentials_are_orthogonal() {
        let g = test_grid();
        let k1 = 4.0 * PI / g.half_width();
        let k2 = 7.0 * PI / g.half_width();
        let e1 = ComplexField::from_fn(g, |x| Complex64::new(0.0, k1 * x).exp()).unwrap();
        let e2 = ComplexField::from_fn(g, |x| Complex64::new(0.0, k2 * x).exp()).unwrap();
        let ip = inner_product(&e1, &e2).unwrap();
        assert!(ip.norm() < 1e-12 * l2_norm(&e1) * l2_norm(&e2));
    }

    #[test]
    fn odd_integrand_vanishes() {
        let g = test_grid();
        let f = gaussian(g);
        let xf = ComplexField::from_fn(g, |x| Complex64::new(x * (-x * x).exp(), 0.0)).unwrap();
        assert!(inner_product(&f, &xf).unwrap().norm() < 1e-12);
    }

    #[test]
    fn parseval_identity() {
        let g = test_grid();
        let f = ComplexField::from_fn(g, |x| {
            Complex64::new((-0.7 * x * x).exp(), (x * 0.5).sin() * (-x * x / 9.0).exp())
        })
        .unwrap();
        let spectrum = fft_forward(&f);
        let spec_norm = (spectrum.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.spacing()
            / g.points() as f64)
            .sqrt();
        assert_relative_eq!(l2_norm(&f), spec_norm, max_relative = 1e-12);
    }

    #[test]
    fn laplacian_symmetric_on_periodic_grid() {
        let g = test_grid();
        let f = gaussian(g);
        let h = ComplexField::from_fn(g, |x| Complex64::new((-0.5 * (x - 1.0).powi(2)).exp(), 0.0))
            .unwrap();
        let lhs = inner_product(&spectral_laplacian(&f).unwrap(), &h).unwrap();
        let rhs = inner_product(&f, &spectral_laplacian(&h).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn laplacian_is_linear(a1 in -2.0f64..2.0, a2 in -2.0f64..2.0, w in 0.3f64..1.5) {
            let g = Grid::new(16.0, 256).unwrap();
            let f = ComplexField::from_fn(g, |x| Complex64::new((-w * x * x).exp(), 0.0)).unwrap();
            let h = ComplexField::from_fn(g, |x| Complex64::new(0.0, (-0.4 * x * x).exp() * x)).unwrap();
            let combo = ComplexField::new(
                g,
                f.values().iter().zip(h.values()).map(|(u, v)| a1 * u + a2 * v).collect(),
            )
            .unwrap();
            let direct = spectral_laplacian(&combo).unwrap();
            let lf = spectral_laplacian(&f).unwrap();
            let lh = spectral_laplacian(&h).unwrap();
            let mut worst: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for ((d, u), v) in direct.values().iter().zip(lf.values()).zip(lh.values()) {
                worst = worst.max((d - (a1 * u + a2 * v)).norm());
                scale = scale.max(d.norm());
            }
            prop_assert!(worst <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn spacetime_rejects_decreasing_times(t in 0.1f64..0.9) {
            let g = Grid::new(16.0, 64).unwrap();
            let s = ComplexField::zero(g);
            let r = SpaceTimeField::new(g, vec![t, t], vec![s.clone(), s]);
            prop_assert!(r.is_err());
        }
    }
}
