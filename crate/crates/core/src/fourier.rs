//! Continuous Fourier transforms approximated by weighted sums on uniform
//! grids, in the convention f̂(ξ) = ∫ f(x) e^{−i x·ξ} dx.
//!
//! Sums are evaluated directly (node coordinates enter the phase), so grid
//! offsets never need a separate phase correction. Uniform output axes let the
//! phase advance by a fixed rotation per node; it is re-seeded every
//! `RESEED` steps to keep drift at roundoff.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::FftPlanner;

use crate::error::{domain, Error, Result};
use crate::grid::{GridValues, ParamDistribution, SampledFunction, C64, Grid, ZERO};
use crate::profiles::Profile1D;

const RESEED: usize = 64;

/// Orders (t, s) of the weighted Sobolev class wH^{t,s}.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevOrders {
    pub t: f64,
    pub s: f64,
}

impl SobolevOrders {
    pub const L2: SobolevOrders = SobolevOrders { t: 0.0, s: 0.0 };

    pub fn new(t: f64, s: f64) -> Result<Self> {
        if !(t.is_finite() && s.is_finite()) {
            return Err(domain("Sobolev orders must be finite"));
        }
        Ok(Self { t, s })
    }
}

/// Error provenance carried by every spectral result.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SpectralAccuracy {
    /// Largest boundary magnitude of the transformed input relative to its peak.
    pub boundary_level: f64,
    /// Share of sheared lookups that fell outside the source grid.
    pub truncated_fraction: f64,
}

/// Spectrum sampled on a frequency grid (ξ, ω or (a, ω) axes).
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralFunction {
    grid: Grid,
    values: Vec<C64>,
    pub accuracy: SpectralAccuracy,
}

impl SpectralFunction {
    pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
        SampledFunction::new(grid.clone(), values.clone())?;
        Ok(Self { grid, values, accuracy: SpectralAccuracy::default() })
    }

    pub(crate) fn with_accuracy(grid: Grid, values: Vec<C64>, accuracy: SpectralAccuracy) -> Self {
        Self { grid, values, accuracy }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }
}

impl GridValues for SpectralFunction {
    fn grid(&self) -> &Grid {
        &self.grid
    }
    fn values(&self) -> &[C64] {
        &self.values
    }
}

/// Transform one axis of a row-major array:
/// `out[.., k, ..] = Σ_j w_j in[.., j, ..] e^{i·sign·x_j·y_k}`.
pub(crate) fn dft_axis(
    data: &[C64],
    shape: &[usize],
    axis: usize,
    x: &[f64],
    w: &[f64],
    y: &Grid,
    sign: f64,
) -> (Vec<C64>, Vec<usize>) {
    let n_in = shape[axis];
    let n_out = y.counts()[0];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let y0 = y.lower()[0];
    let dy = y.spacing(0);
    let mut out = vec![ZERO; outer * n_out * inner];
    let mut phases = vec![ZERO; n_out];
    for j in 0..n_in {
        fill_phases(&mut phases, sign * x[j], y0, dy);
        for o in 0..outer {
            for i in 0..inner {
                let v = data[(o * n_in + j) * inner + i] * w[j];
                if v == ZERO {
                    continue;
                }
                let base = o * n_out * inner + i;
                for (k, ph) in phases.iter().enumerate() {
                    out[base + k * inner] += v * ph;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = n_out;
    (out, new_shape)
}

/// `phases[k] = exp(i·c·(y0 + k·dy))` via re-seeded rotation.
pub(crate) fn fill_phases(phases: &mut [C64], c: f64, y0: f64, dy: f64) {
    let step = C64::from_polar(1.0, c * dy);
    let mut cur = ZERO;
    for (k, p) in phases.iter_mut().enumerate() {
        if k % RESEED == 0 {
            cur = C64::from_polar(1.0, c * (y0 + k as f64 * dy));
        } else {
            cur *= step;
        }
        *p = cur;
    }
}

fn transform_all_axes(input: &Grid, values: &[C64], output: &Grid, sign: f64) -> Vec<C64> {
    let mut data = values.to_vec();
    let mut shape = input.counts().to_vec();
    for k in 0..input.dim() {
        let (d, s) = dft_axis(
            &data,
            &shape,
            k,
            &input.nodes(k),
            &input.axis_weights(k),
            &output.axis_grid(k),
            sign,
        );
        data = d;
        shape = s;
    }
    data
}

/// Largest magnitude on the outer faces of the box, relative to the peak.
pub(crate) fn boundary_level(grid: &Grid, values: &[C64]) -> f64 {
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for (flat, v) in values.iter().enumerate() {
        let idx = grid.unravel(flat);
        if idx.iter().zip(grid.counts()).any(|(&i, &n)| i == 0 || i + 1 == n) {
            edge = edge.max(v.norm());
        }
    }
    edge / peak
}

pub fn fourier_forward(u: &SampledFunction, output_grid: &Grid) -> Result<SpectralFunction> {
    if u.grid().dim() != output_grid.dim() {
        return Err(domain(format!(
            "input has {} axes, frequency grid has {}",
            u.grid().dim(),
            output_grid.dim()
        )));
    }
    let values = transform_all_axes(u.grid(), u.values(), output_grid, -1.0);
    let accuracy = SpectralAccuracy {
        boundary_level: boundary_level(u.grid(), u.values()),
        truncated_fraction: 0.0,
    };
    Ok(SpectralFunction::with_accuracy(output_grid.clone(), values, accuracy))
}

/// (2π)^{−m} ∫ û(ξ) e^{i x·ξ} dξ.
pub fn fourier_inverse(s: &SpectralFunction, output_grid: &Grid) -> Result<SampledFunction> {
    if s.grid().dim() != output_grid.dim() {
        return Err(domain("frequency and output grids differ in dimension"));
    }
    let scale = (2.0 * PI).powi(-(output_grid.dim() as i32));
    let values = transform_all_axes(s.grid(), s.values(), output_grid, 1.0)
        .into_iter()
        .map(|v| v * scale)
        .collect();
    SampledFunction::new(output_grid.clone(), values)
}

/// 1-D transform of b-samples: σ♯(ω) = ∫ σ(b) e^{−i b ω} db.
pub fn sharp(b_grid: &Grid, values: &[C64], omega_grid: &Grid) -> Result<Vec<C64>> {
    check_1d(b_grid, values)?;
    check_1d(omega_grid, &vec![ZERO; omega_grid.len()])?;
    Ok(transform_all_axes(b_grid, values, omega_grid, -1.0))
}

/// Inverse of [`sharp`]: (1/2π) ∫ φ♯(ω) e^{i b ω} dω.
pub fn flat(omega_grid: &Grid, values: &[C64], b_grid: &Grid) -> Result<Vec<C64>> {
    check_1d(omega_grid, values)?;
    check_1d(b_grid, &vec![ZERO; b_grid.len()])?;
    Ok(transform_all_axes(omega_grid, values, b_grid, 1.0)
        .into_iter()
        .map(|v| v / (2.0 * PI))
        .collect())
}

fn check_1d(grid: &Grid, values: &[C64]) -> Result<()> {
    if grid.dim() != 1 {
        return Err(domain("expected a one-dimensional grid"));
    }
    if grid.len() != values.len() {
        return Err(Error::GridMismatch("samples do not match grid".into()));
    }
    Ok(())
}

/// γ♯(a, ω): the b axis transformed row by row.
pub fn partial_sharp_b(gamma: &ParamDistribution, omega_grid: &Grid) -> Result<SpectralFunction> {
    if omega_grid.dim() != 1 {
        return Err(domain("ω grid must be one-dimensional"));
    }
    let g = gamma.grid();
    let k = g.dim() - 1;
    let (values, _) = dft_axis(
        gamma.values(),
        g.counts(),
        k,
        &g.nodes(k),
        &g.axis_weights(k),
        omega_grid,
        -1.0,
    );
    let out = g.sub_grid(0..k).product(omega_grid);
    let accuracy = SpectralAccuracy {
        boundary_level: boundary_level(g, gamma.values()),
        truncated_fraction: 0.0,
    };
    Ok(SpectralFunction::with_accuracy(out, values, accuracy))
}

/// Inverse of [`partial_sharp_b`] onto the b axis `b_grid`.
pub fn partial_flat_b(spec: &SpectralFunction, b_grid: &Grid) -> Result<ParamDistribution> {
    let g = spec.grid();
    let k = g.dim() - 1;
    let (values, _) = dft_axis(
        spec.values(),
        g.counts(),
        k,
        &g.nodes(k),
        &g.axis_weights(k),
        b_grid,
        1.0,
    );
    let values = values.into_iter().map(|v| v / (2.0 * PI)).collect();
    ParamDistribution::new(g.sub_grid(0..k).product(b_grid), values)
}

/// b grid matched to an ω grid: half the alias period wide, Nyquist-spaced.
pub(crate) fn dual_grid(omega_grid: &Grid) -> Result<Grid> {
    let dw = omega_grid.spacing(0);
    let omax = omega_grid.upper()[0].max(-omega_grid.lower()[0]);
    let half = PI / dw;
    let db = PI / omax;
    let n = (2.0 * half / db).ceil() as usize + 1;
    Grid::line(-half, half, n.max(3))
}

/// (⟨·⟩ᵗ φ)♯ given φ♯: to the b domain, multiply by (1 + b²)^{t/2}, and back.
pub fn fractional_bracket(phi_sharp: &SpectralFunction, order: f64) -> Result<SpectralFunction> {
    let og = phi_sharp.grid();
    if og.dim() != 1 {
        return Err(domain("bracket acts on one-dimensional spectra"));
    }
    if order == 0.0 {
        return Ok(phi_sharp.clone());
    }
    let bg = dual_grid(og)?;
    let b = bg.nodes(0);
    let mut phi = flat(og, phi_sharp.values(), &bg)?;
    let level = boundary_level(&bg, &phi);
    for (v, x) in phi.iter_mut().zip(&b) {
        *v *= (1.0 + x * x).powf(order / 2.0);
    }
    let values = sharp(&bg, &phi, og)?;
    let accuracy = SpectralAccuracy {
        boundary_level: level.max(phi_sharp.accuracy.boundary_level),
        truncated_fraction: 0.0,
    };
    Ok(SpectralFunction::with_accuracy(og.clone(), values, accuracy))
}

/// ‖σ‖_{wH^{t,s}} = (∫ |φ♯|² ⟨ω⟩^{2s} dω / 2π)^{1/2} with φ = σ/⟨·⟩ᵗ.
pub fn wh_norm(sigma: &Profile1D, orders: SobolevOrders) -> Result<f64> {
    let bg = Grid::line(-64.0, 64.0, 2561)?;
    wh_norm_on(sigma, orders, &bg)
}

pub fn wh_norm_on(sigma: &Profile1D, orders: SobolevOrders, b_grid: &Grid) -> Result<f64> {
    let b = b_grid.nodes(0);
    let phi: Vec<C64> = b
        .iter()
        .map(|&x| Ok(sigma.real(x)? * (1.0 + x * x).powf(-orders.t / 2.0)))
        .collect::<Result<_>>()?;
    check_l2_tail(&b, &phi, sigma, orders)?;
    let half = b_grid.upper()[0];
    let dw = PI / half;
    let omax = PI / b_grid.spacing(0);
    let n = 2 * (omax / dw).ceil() as usize;
    let og = Grid::straddling(omax, n)?;
    let spec = sharp(b_grid, &phi, &og)?;
    let w = og.axis_weights(0);
    let total: f64 = og
        .nodes(0)
        .iter()
        .zip(&w)
        .zip(&spec)
        .map(|((o, w), v)| w * v.norm_sqr() * (1.0 + o * o).powf(orders.s))
        .sum();
    Ok((total / (2.0 * PI)).sqrt())
}

/// Rejects φ whose tail decays too slowly to be square integrable.
fn check_l2_tail(b: &[f64], phi: &[C64], sigma: &Profile1D, orders: SobolevOrders) -> Result<()> {
    let n = b.len();
    let peak = phi.iter().fold(0.0f64, |m, v| m.max(v.norm()));
    if peak == 0.0 {
        return Ok(());
    }
    let edge = phi[0].norm().max(phi[n - 1].norm());
    if edge <= 1e-12 * peak {
        return Ok(());
    }
    let mid = phi[n / 4].norm().max(phi[3 * n / 4].norm());
    let exponent = (mid / edge).ln() / ((b[n - 1] - b[0]) / (b[3 * n / 4] - b[n / 4])).ln();
    if exponent < 0.6 {
        return Err(domain(format!(
            "{}/⟨b⟩^{} decays like |b|^-{exponent:.2} and is not square integrable; raise t",
            sigma.name, orders.t
        )));
    }
    Ok(())
}

/// Linear convolution on the grid, `out(v) = Σ_u Π Δ_k · kernel(v − u) · values(u)`,
/// evaluated with zero-padded FFTs.
pub fn convolve(grid: &Grid, values: &[C64], kernel: &dyn Fn(&[f64]) -> f64) -> Result<Vec<C64>> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch("values do not match grid".into()));
    }
    let dim = grid.dim();
    let shape: Vec<usize> = grid.counts().to_vec();
    let padded: Vec<usize> = shape.iter().map(|&n| (2 * n - 1).next_power_of_two()).collect();
    let total: usize = padded.iter().product();
    let cell: f64 = (0..dim).map(|k| grid.spacing(k)).product();
    let pstrides = strides_of(&padded);

    let mut a = vec![ZERO; total];
    for (flat, v) in values.iter().enumerate() {
        let idx = grid.unravel(flat);
        let pos: usize = idx.iter().zip(&pstrides).map(|(i, s)| i * s).sum();
        a[pos] = *v;
    }
    let mut kern = vec![ZERO; total];
    let mut offset = vec![0.0; dim];
    for (pos, slot) in kern.iter_mut().enumerate() {
        let mut rem = pos;
        let mut inside = true;
        for k in 0..dim {
            let i = rem / pstrides[k];
            rem %= pstrides[k];
            let signed = if i < shape[k] {
                i as isize
            } else if i + shape[k] > padded[k] {
                i as isize - padded[k] as isize
            } else {
                inside = false;
                0
            };
            offset[k] = signed as f64 * grid.spacing(k);
        }
        if inside {
            *slot = C64::new(kernel(&offset) * cell, 0.0);
        }
    }
    let mut planner = FftPlanner::new();
    fft_nd(&mut a, &padded, &mut planner, false);
    fft_nd(&mut kern, &padded, &mut planner, false);
    for (x, k) in a.iter_mut().zip(&kern) {
        *x *= k;
    }
    fft_nd(&mut a, &padded, &mut planner, true);
    let norm = 1.0 / total as f64;
    Ok((0..grid.len())
        .map(|flat| {
            let idx = grid.unravel(flat);
            let pos: usize = idx.iter().zip(&pstrides).map(|(i, s)| i * s).sum();
            a[pos] * norm
        })
        .collect())
}

fn strides_of(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

fn fft_nd(buf: &mut [C64], shape: &[usize], planner: &mut FftPlanner<f64>, inverse: bool) {
    let strides = strides_of(shape);
    for (axis, &n) in shape.iter().enumerate() {
        let fft: Arc<dyn rustfft::Fft<f64>> = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let stride = strides[axis];
        let mut line = vec![ZERO; n];
        let lines = buf.len() / n;
        for l in 0..lines {
            let outer = l / stride;
            let inner = l % stride;
            let base = outer * n * stride + inner;
            for (j, x) in line.iter_mut().enumerate() {
                *x = buf[base + j * stride];
            }
            fft.process(&mut line);
            for (j, x) in line.iter().enumerate() {
                buf[base + j * stride] = *x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles;

    fn gauss(x: &[f64]) -> C64 {
        C64::new((-x.iter().map(|v| v * v).sum::<f64>() / 2.0).exp(), 0.0)
    }

    #[test]
    fn gaussian_self_transform() {
        let u = SampledFunction::from_fn(Grid::line(-12.0, 12.0, 241).unwrap(), gauss).unwrap();
        let og = Grid::line(-6.0, 6.0, 121).unwrap();
        let s = fourier_forward(&u, &og).unwrap();
        for (xi, v) in og.nodes(0).iter().zip(s.values()) {
            let want = (2.0 * PI).sqrt() * (-xi * xi / 2.0).exp();
            assert!((v - want).norm() < 1e-10, "{xi}: {v} vs {want}");
        }
        assert!(s.accuracy.boundary_level < 1e-30);
    }

    #[test]
    fn zero_in_zero_out() {
        let u = SampledFunction::zeros(Grid::line(-1.0, 1.0, 11).unwrap());
        let s = fourier_forward(&u, &Grid::line(-3.0, 3.0, 7).unwrap()).unwrap();
        assert!(s.values().iter().all(|v| *v == ZERO));
    }

    #[test]
    fn dimension_mismatch() {
        let u = SampledFunction::zeros(Grid::line(-1.0, 1.0, 11).unwrap());
        let og = Grid::new(vec![-1.0, -1.0], vec![1.0, 1.0], vec![3, 3]).unwrap();
        assert!(fourier_forward(&u, &og).is_err());
    }

    #[test]
    fn round_trip_1d() {
        let xg = Grid::line(-10.0, 10.0, 201).unwrap();
        let f = |x: &[f64]| C64::new((-(x[0] - 0.7).powi(2)).exp(), 0.3 * (-(x[0] + 1.0).powi(2)).exp());
        let u = SampledFunction::from_fn(xg.clone(), f).unwrap();
        let og = Grid::line(-16.0, 16.0, 321).unwrap();
        let back = fourier_inverse(&fourier_forward(&u, &og).unwrap(), &xg).unwrap();
        let err = back.sub(&u).unwrap().norm() / u.norm();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn separable_partial_transform() {
        let g = Grid::new(vec![-3.0, -10.0], vec![3.0, 10.0], vec![13, 201]).unwrap();
        let gamma = ParamDistribution::from_fn(g, gauss).unwrap();
        let og = Grid::straddling(6.0, 60).unwrap();
        let s = partial_sharp_b(&gamma, &og).unwrap();
        for (flat, v) in s.values().iter().enumerate() {
            let p = s.grid().point(flat);
            let want = (-p[0] * p[0] / 2.0).exp() * (2.0 * PI).sqrt() * (-p[1] * p[1] / 2.0).exp();
            assert!((v - want).norm() < 1e-8);
        }
        let back = partial_flat_b(&s, &gamma.grid().axis_grid(1)).unwrap();
        assert_eq!(back.grid().counts(), gamma.grid().counts());
    }

    #[test]
    fn bracket_of_gaussian() {
        let og = Grid::straddling(10.0, 400).unwrap();
        let gs: Vec<C64> = og.nodes(0).iter().map(|w| C64::new((2.0 * PI).sqrt() * (-w * w / 2.0).exp(), 0.0)).collect();
        let s = SpectralFunction::new(og.clone(), gs.clone()).unwrap();
        let id = fractional_bracket(&s, 0.0).unwrap();
        assert_eq!(id.values(), s.values());
        let two = fractional_bracket(&s, 2.0).unwrap();
        // (1 + b²) e^{−b²/2} ↦ √(2π)(2 − ω²) e^{−ω²/2}
        for (w, v) in og.nodes(0).iter().zip(two.values()) {
            let want = (2.0 * PI).sqrt() * (2.0 - w * w) * (-w * w / 2.0).exp();
            assert!((v - want).norm() < 1e-6, "{w}: {v} {want}");
        }
        let back = fractional_bracket(&fractional_bracket(&s, 1.3).unwrap(), -1.3).unwrap();
        for (a, b) in back.values().iter().zip(&gs) {
            assert!((a - b).norm() < 1e-6);
        }
    }

    #[test]
    fn wh_norms() {
        let g = profiles::gaussian();
        let n = wh_norm(&g, SobolevOrders::L2).unwrap();
        assert!((n - PI.powf(0.25)).abs() < 1e-8, "{n}");
        let z = Profile1D::zero();
        assert_eq!(wh_norm(&z, SobolevOrders::L2).unwrap(), 0.0);
        let relu = profiles::relu();
        let v = wh_norm(&relu, SobolevOrders::new(2.0, 0.0).unwrap()).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert!(wh_norm(&relu, SobolevOrders::new(1.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn convolution_of_gaussians() {
        let g = Grid::new(vec![-8.0, -8.0], vec![8.0, 8.0], vec![81, 81]).unwrap();
        let vals: Vec<C64> = (0..g.len()).map(|i| gauss(&g.point(i))).collect();
        let k = |v: &[f64]| (-(v[0] * v[0] + v[1] * v[1]) / 2.0).exp() / (2.0 * PI);
        let out = convolve(&g, &vals, &k).unwrap();
        // N(0, I) * N(0, I) = N(0, 2I) scaled by 2π
        for flat in [0, 1000, 3280, 4000] {
            let p = g.point(flat);
            let r2 = p[0] * p[0] + p[1] * p[1];
            let want = 2.0 * PI * (-r2 / 4.0).exp() / (4.0 * PI);
            assert!((out[flat].re - want).abs() < 1e-8, "{flat}");
        }
    }
}
