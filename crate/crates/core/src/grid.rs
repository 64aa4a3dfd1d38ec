//! Uniform tensor grids, complex fields sampled on them, and the quadrature
//! rules behind every integral in the crate.
//!
//! Values are stored row-major: the last axis varies fastest.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

/// Closed uniform box grid. Every axis has at least two nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    counts: Vec<usize>,
}

impl Grid {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Result<Self> {
        let dim = counts.len();
        if dim == 0 {
            return Err(domain("grid needs at least one axis"));
        }
        if lower.len() != dim || upper.len() != dim {
            return Err(domain("lower, upper and counts must have equal length"));
        }
        for k in 0..dim {
            if !(lower[k].is_finite() && upper[k].is_finite()) {
                return Err(domain(format!("axis {k}: non-finite bounds")));
            }
            if lower[k] >= upper[k] {
                return Err(domain(format!(
                    "axis {k}: lower {} must be below upper {}",
                    lower[k], upper[k]
                )));
            }
            if counts[k] < 2 {
                return Err(domain(format!("axis {k}: need at least 2 points")));
            }
        }
        Ok(Self { lower, upper, counts })
    }

    pub fn line(lower: f64, upper: f64, count: usize) -> Result<Self> {
        Self::new(vec![lower], vec![upper], vec![count])
    }

    /// Symmetric 1-D grid with an even point count, so no node sits at 0.
    pub fn straddling(half_width: f64, count: usize) -> Result<Self> {
        if !count.is_multiple_of(2) {
            return Err(domain(format!(
                "straddling grid needs an even point count, got {count}"
            )));
        }
        Self::line(-half_width, half_width, count)
    }

    /// Cartesian product, axes of `self` first.
    pub fn product(&self, other: &Grid) -> Grid {
        let mut g = self.clone();
        g.lower.extend_from_slice(&other.lower);
        g.upper.extend_from_slice(&other.upper);
        g.counts.extend_from_slice(&other.counts);
        g
    }

    /// Grid made of the axes `range` of `self`.
    pub fn sub_grid(&self, range: std::ops::Range<usize>) -> Grid {
        Grid {
            lower: self.lower[range.clone()].to_vec(),
            upper: self.upper[range.clone()].to_vec(),
            counts: self.counts[range].to_vec(),
        }
    }

    pub fn axis_grid(&self, k: usize) -> Grid {
        self.sub_grid(k..k + 1)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn spacing(&self, k: usize) -> f64 {
        (self.upper[k] - self.lower[k]) / (self.counts[k] - 1) as f64
    }

    pub fn coord(&self, k: usize, i: usize) -> f64 {
        if i + 1 == self.counts[k] {
            self.upper[k]
        } else {
            self.lower[k] + i as f64 * self.spacing(k)
        }
    }

    pub fn nodes(&self, k: usize) -> Vec<f64> {
        (0..self.counts[k]).map(|i| self.coord(k, i)).collect()
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.upper[k] - self.lower[k]).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.counts[k + 1];
        }
        s
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.counts[k];
            flat /= self.counts[k];
        }
        idx
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.coord(k, i))
            .collect()
    }

    /// All node coordinates, flattened row-major (`len() * dim()` values).
    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * self.dim());
        for flat in 0..self.len() {
            out.extend(self.point(flat));
        }
        out
    }

    /// Trapezoid weights along one axis.
    pub fn axis_weights(&self, k: usize) -> Vec<f64> {
        let h = self.spacing(k);
        let n = self.counts[k];
        let mut w = vec![h; n];
        w[0] = 0.5 * h;
        w[n - 1] = 0.5 * h;
        w
    }

    /// Tensor trapezoid weights for every node.
    pub fn weights(&self) -> Vec<f64> {
        let mut w = vec![1.0];
        for k in 0..self.dim() {
            let ak = self.axis_weights(k);
            w = w
                .iter()
                .flat_map(|&x| ak.iter().map(move |&y| x * y))
                .collect();
        }
        w
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && (0..self.dim()).all(|k| p[k] >= self.lower[k] && p[k] <= self.upper[k])
    }

    /// True when axis `k` is symmetric about the origin.
    pub fn is_symmetric_axis(&self, k: usize) -> bool {
        let tol = 1e-12 * (self.upper[k].abs() + self.lower[k].abs());
        (self.upper[k] + self.lower[k]).abs() <= tol
    }

    /// True when some node of axis `k` sits on the origin.
    pub fn has_zero_node(&self, k: usize) -> bool {
        let h = self.spacing(k);
        self.nodes(k).iter().any(|w| w.abs() < 1e-9 * h)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self.counts != other.counts {
            return Err(Error::GridMismatch(format!(
                "counts {:?} vs {:?}",
                self.counts, other.counts
            )));
        }
        let close = |x: &[f64], y: &[f64]| {
            x.iter()
                .zip(y)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())))
        };
        if !close(&self.lower, &other.lower) || !close(&self.upper, &other.upper) {
            return Err(Error::GridMismatch("box bounds differ".into()));
        }
        Ok(())
    }

    /// Multilinear interpolation; zero outside the box.
    pub fn interpolate_linear(&self, values: &[C64], p: &[f64]) -> C64 {
        let dim = self.dim();
        let strides = self.strides();
        let mut base = 0usize;
        let mut frac = vec![0.0; dim];
        for k in 0..dim {
            let h = self.spacing(k);
            let t = (p[k] - self.lower[k]) / h;
            let n = self.counts[k];
            if !(t >= 0.0 && t <= (n - 1) as f64) {
                return ZERO;
            }
            let i = (t.floor() as usize).min(n - 2);
            frac[k] = t - i as f64;
            base += i * strides[k];
        }
        let mut acc = ZERO;
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut off = 0;
            for k in 0..dim {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    off += strides[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += values[base + off] * w;
            }
        }
        acc
    }

    /// Separable four-point Lagrange interpolation; zero outside the box.
    /// Near an edge the stencil is shifted inward, so nodes are reproduced exactly.
    pub fn interpolate_cubic(&self, values: &[C64], p: &[f64]) -> C64 {
        let dim = self.dim();
        let strides = self.strides();
        let mut starts = Vec::with_capacity(dim);
        let mut weights = Vec::with_capacity(dim);
        for (k, &pk) in p.iter().enumerate().take(dim) {
            match cubic_stencil(self.lower[k], self.spacing(k), self.counts[k], pk) {
                Some((s, w)) => {
                    starts.push(s);
                    weights.push(w);
                }
                None => return ZERO,
            }
        }
        let mut acc = ZERO;
        let taps = 4usize.pow(dim as u32);
        for t in 0..taps {
            let mut rem = t;
            let mut w = 1.0;
            let mut off = 0;
            for k in (0..dim).rev() {
                let j = rem % 4;
                rem /= 4;
                w *= weights[k][j];
                off += (starts[k] + j) * strides[k];
            }
            acc += values[off] * w;
        }
        acc
    }
}

/// Start index and weights of a four-point stencil covering `x` on a uniform axis.
pub(crate) fn cubic_stencil(lower: f64, h: f64, n: usize, x: f64) -> Option<(usize, [f64; 4])> {
    let t = (x - lower) / h;
    if !(t >= 0.0 && t <= (n - 1) as f64) {
        return None;
    }
    if n < 4 {
        // Degenerates to linear on tiny axes.
        let i = (t.floor() as usize).min(n - 2);
        let f = t - i as f64;
        return Some((i, [1.0 - f, f, 0.0, 0.0]));
    }
    let i = (t.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let u = t - i as f64;
    let mut w = [0.0; 4];
    for (j, wj) in w.iter_mut().enumerate() {
        let mut num = 1.0;
        let mut den = 1.0;
        for l in 0..4 {
            if l != j {
                num *= u - l as f64;
                den *= j as f64 - l as f64;
            }
        }
        *wj = num / den;
    }
    Some((i, w))
}

/// Read access shared by every field type.
pub trait GridValues {
    fn grid(&self) -> &Grid;
    fn values(&self) -> &[C64];
}

fn check_values(grid: &Grid, values: &[C64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for {} grid points",
            values.len(),
            grid.len()
        )));
    }
    if let Some(index) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite { index });
    }
    Ok(())
}

macro_rules! grid_field {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq)]
        pub struct $name {
            grid: Grid,
            values: Vec<C64>,
        }

        impl $name {
            pub fn new(grid: Grid, values: Vec<C64>) -> Result<Self> {
                check_values(&grid, &values)?;
                Ok(Self { grid, values })
            }

            pub fn zeros(grid: Grid) -> Self {
                let values = vec![ZERO; grid.len()];
                Self { grid, values }
            }

            pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
                let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
                Self::new(grid, values)
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

            pub fn scaled(&self, c: C64) -> Self {
                Self {
                    grid: self.grid.clone(),
                    values: self.values.iter().map(|v| v * c).collect(),
                }
            }

            /// `self + c * other`.
            pub fn axpy(&self, c: C64, other: &Self) -> Result<Self> {
                self.grid.check_same(&other.grid)?;
                Ok(Self {
                    grid: self.grid.clone(),
                    values: self
                        .values
                        .iter()
                        .zip(&other.values)
                        .map(|(u, v)| u + c * v)
                        .collect(),
                })
            }

            pub fn add(&self, other: &Self) -> Result<Self> {
                self.axpy(C64::new(1.0, 0.0), other)
            }

            pub fn sub(&self, other: &Self) -> Result<Self> {
                self.axpy(C64::new(-1.0, 0.0), other)
            }

            pub fn map(&self, f: impl Fn(C64) -> C64) -> Result<Self> {
                Self::new(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
            }

            pub fn norm(&self) -> f64 {
                l2_norm(self)
            }

            pub fn max_abs(&self) -> f64 {
                self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
            }
        }

        impl GridValues for $name {
            fn grid(&self) -> &Grid {
                &self.grid
            }
            fn values(&self) -> &[C64] {
                &self.values
            }
        }
    };
}

grid_field!(
    /// Samples of a function on an input grid in ℝᵐ.
    SampledFunction
);
grid_field!(
    /// Samples of a parameter distribution on an (a₁..a_m, b) grid.
    ParamDistribution
);

impl SampledFunction {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }
}

impl ParamDistribution {
    /// Input dimension m (the grid has m + 1 axes).
    pub fn input_dim(&self) -> usize {
        self.grid.dim() - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadratureScheme {
    Trapezoid,
    /// Uniform draws in the grid box, values multilinearly interpolated.
    MonteCarlo { samples: usize, seed: u64 },
}

/// Deterministic generator for one `(seed, stream)` pair.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) fn uniform_point(rng: &mut ChaCha8Rng, grid: &Grid, out: &mut [f64]) {
    for (k, o) in out.iter_mut().enumerate() {
        *o = rng.gen_range(grid.lower()[k]..=grid.upper()[k]);
    }
}

pub fn integrate<T: GridValues + ?Sized>(u: &T, scheme: QuadratureScheme) -> Result<C64> {
    let grid = u.grid();
    check_values(grid, u.values())?;
    match scheme {
        QuadratureScheme::Trapezoid => Ok(grid
            .weights()
            .iter()
            .zip(u.values())
            .fold(ZERO, |acc, (w, v)| acc + v * w)),
        QuadratureScheme::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(domain("Monte Carlo needs a positive sample count"));
            }
            let mut rng = seeded_rng(seed, 0);
            let mut p = vec![0.0; grid.dim()];
            let mut acc = ZERO;
            for _ in 0..samples {
                uniform_point(&mut rng, grid, &mut p);
                acc += grid.interpolate_linear(u.values(), &p);
            }
            Ok(acc * (grid.volume() / samples as f64))
        }
    }
}

/// ∫ u · conj(v) with the trapezoid rule.
pub fn l2_inner<T: GridValues + ?Sized>(u: &T, v: &T) -> Result<C64> {
    u.grid().check_same(v.grid())?;
    Ok(u
        .grid()
        .weights()
        .iter()
        .zip(u.values().iter().zip(v.values()))
        .fold(ZERO, |acc, (w, (a, b))| acc + a * b.conj() * w))
}

pub fn l2_norm<T: GridValues + ?Sized>(u: &T) -> f64 {
    u.grid()
        .weights()
        .iter()
        .zip(u.values())
        .map(|(w, v)| w * v.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// (2π)^{m−1} ∫ u · conj(v) · |ω|^{−m} dω on a 1-D grid without a node at 0.
pub fn weighted_omega_inner<T: GridValues + ?Sized>(u: &T, v: &T, m: usize) -> Result<C64> {
    u.grid().check_same(v.grid())?;
    weighted_omega_inner_samples(u.grid(), u.values(), v.values(), m)
}

pub fn weighted_omega_inner_samples(grid: &Grid, u: &[C64], v: &[C64], m: usize) -> Result<C64> {
    if grid.dim() != 1 {
        return Err(domain("ω grid must be one-dimensional"));
    }
    if grid.has_zero_node(0) {
        return Err(Error::Singular("ω grid has a node at 0".into()));
    }
    if u.len() != grid.len() || v.len() != grid.len() {
        return Err(Error::GridMismatch("ω samples do not match grid".into()));
    }
    let pre = (2.0 * std::f64::consts::PI).powi(m as i32 - 1);
    let w = grid.axis_weights(0);
    let mut acc = ZERO;
    for (i, omega) in grid.nodes(0).into_iter().enumerate() {
        acc += u[i] * v[i].conj() * (w[i] / omega.abs().powi(m as i32));
    }
    Ok(acc * pre)
}

/// Grid-box weights `(2π)^{m−1} w_i |ω_i|^{−m}` used by every L²ₘ computation.
pub(crate) fn omega_weights(grid: &Grid, m: usize) -> Vec<f64> {
    let pre = (2.0 * std::f64::consts::PI).powi(m as i32 - 1);
    grid.axis_weights(0)
        .iter()
        .zip(grid.nodes(0))
        .map(|(w, o)| pre * w / o.abs().powi(m as i32))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn constant_integrates_to_box_volume() {
        let g = Grid::line(0.0, 1.0, 11).unwrap();
        let u = SampledFunction::from_fn(g, |_| c(1.0)).unwrap();
        let v = integrate(&u, QuadratureScheme::Trapezoid).unwrap();
        assert!((v - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn parabola_integral() {
        let g = Grid::line(0.0, 1.0, 101).unwrap();
        let u = SampledFunction::from_fn(g, |x| c(x[0] * x[0])).unwrap();
        let v = integrate(&u, QuadratureScheme::Trapezoid).unwrap();
        assert!((v.re - 1.0 / 3.0).abs() < 1e-4);
    }

    #[test]
    fn zero_integrand() {
        let g = Grid::line(-1.0, 2.0, 7).unwrap();
        let u = SampledFunction::zeros(g);
        assert_eq!(integrate(&u, QuadratureScheme::Trapezoid).unwrap(), ZERO);
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 2.0], vec![21, 21]).unwrap();
        let u = ParamDistribution::from_fn(g, |p| c(p[0] + p[1])).unwrap();
        let s = QuadratureScheme::MonteCarlo { samples: 20_000, seed: 7 };
        let a = integrate(&u, s).unwrap();
        let b = integrate(&u, s).unwrap();
        assert_eq!(a, b);
        assert!((a.re - 3.0).abs() < 0.05);
        assert!(integrate(&u, QuadratureScheme::MonteCarlo { samples: 0, seed: 1 }).is_err());
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(Grid::line(1.0, 1.0, 5).is_err());
        assert!(Grid::line(0.0, 1.0, 1).is_err());
        assert!(Grid::straddling(1.0, 5).is_err());
        assert!(Grid::new(vec![], vec![], vec![]).is_err());
    }

    #[test]
    fn nan_rejected() {
        let g = Grid::line(0.0, 1.0, 3).unwrap();
        let err = SampledFunction::new(g, vec![c(0.0), c(f64::NAN), c(1.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { index: 1 });
    }

    #[test]
    fn mismatched_grids_rejected() {
        let u = SampledFunction::zeros(Grid::line(0.0, 1.0, 3).unwrap());
        let v = SampledFunction::zeros(Grid::line(0.0, 1.0, 4).unwrap());
        assert!(matches!(l2_inner(&u, &v), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn weighted_inner_of_omega_gaussian_is_one() {
        let g = Grid::straddling(12.0, 4000).unwrap();
        let u = SampledFunction::from_fn(g, |w| c(w[0] * (-w[0] * w[0] / 2.0).exp())).unwrap();
        let v = weighted_omega_inner(&u, &u, 1).unwrap();
        assert!((v.re - 1.0).abs() < 1e-5, "{v}");
        let z = SampledFunction::zeros(u.grid().clone());
        assert_eq!(weighted_omega_inner(&u, &z, 1).unwrap(), ZERO);
    }

    #[test]
    fn weighted_inner_rejects_zero_node() {
        let g = Grid::line(-1.0, 1.0, 5).unwrap();
        let u = SampledFunction::zeros(g);
        assert!(matches!(weighted_omega_inner(&u, &u, 1), Err(Error::Singular(_))));
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics() {
        let g = Grid::new(vec![-1.0, 0.0], vec![1.0, 2.0], vec![9, 7]).unwrap();
        let f = |p: &[f64]| c(p[0].powi(3) - 2.0 * p[0] * p[1] + p[1].powi(2));
        let u = ParamDistribution::from_fn(g.clone(), f).unwrap();
        for p in [[0.13, 1.71], [-0.99, 0.02], [0.5, 1.0]] {
            let v = g.interpolate_cubic(u.values(), &p);
            assert!((v - f(&p)).norm() < 1e-12);
        }
        assert_eq!(g.interpolate_cubic(u.values(), &[1.5, 1.0]), ZERO);
    }

    #[test]
    fn row_major_layout() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![2, 3]).unwrap();
        assert_eq!(g.unravel(4), vec![1, 1]);
        assert_eq!(g.point(5), vec![1.0, 1.0]);
        assert_eq!(g.strides(), vec![3, 1]);
    }
}
