//! ε-mollified finite models, parameter sampling, finite ridgelet
//! coefficients and the layered generalization bound.

use std::f64::consts::PI;

use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use crate::error::{domain, Error, Result};
use crate::fourier::convolve;
use crate::grid::{l2_inner, seeded_rng, uniform_point, Grid, ParamDistribution, SampledFunction, C64, ZERO};
use crate::nullspace::{project, ExpansionCoefficients};
use crate::profiles::{gamma_integer, BasisFamily, Profile1D};
use crate::transforms::{pairing, ridgelet_fourier, AdjointMode, NetworkOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeltaShape {
    /// Standard normal density.
    Gaussian,
    /// C·exp(−1/(1 − |z|²)) on the unit ball.
    Bump,
}

/// δ^ε(z) = φ(z/ε)/ε^d on parameter space of dimension d = m + 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NascentDelta {
    pub shape: DeltaShape,
    pub epsilon: f64,
    pub dim: usize,
    norm: f64,
}

impl NascentDelta {
    pub fn new(shape: DeltaShape, epsilon: f64, dim: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) || dim == 0 {
            return Err(domain("nascent delta needs ε > 0 and a positive dimension"));
        }
        let norm = match shape {
            DeltaShape::Gaussian => (2.0 * PI).powf(-(dim as f64) / 2.0),
            DeltaShape::Bump => 1.0 / bump_mass(dim),
        };
        Ok(Self { shape, epsilon, dim, norm })
    }

    /// ε = `spacings` × the largest spacing of `grid`.
    pub fn for_grid(shape: DeltaShape, grid: &Grid, spacings: f64) -> Result<Self> {
        let h = (0..grid.dim()).map(|k| grid.spacing(k)).fold(0.0, f64::max);
        Self::new(shape, spacings * h, grid.dim())
    }

    /// φ at a point of the unscaled variable.
    pub fn base(&self, z: &[f64]) -> f64 {
        let r2: f64 = z.iter().map(|v| v * v).sum();
        match self.shape {
            DeltaShape::Gaussian => self.norm * (-r2 / 2.0).exp(),
            DeltaShape::Bump => {
                if r2 < 1.0 {
                    self.norm * (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    pub fn eval(&self, z: &[f64]) -> f64 {
        let scaled: Vec<f64> = z.iter().map(|v| v / self.epsilon).collect();
        self.base(&scaled) / self.epsilon.powi(self.dim as i32)
    }

    /// Radius in units of ε beyond which φ is negligible (below 1e-8 of its peak for the Gaussian).
    pub fn support_radius(&self) -> f64 {
        match self.shape {
            DeltaShape::Gaussian => 6.0,
            DeltaShape::Bump => 1.0,
        }
    }

    /// |∫φ − 1| by trapezoid on a box of half-width 1.2 × support radius.
    pub fn normalization_defect(&self) -> f64 {
        let r = 1.2 * self.support_radius();
        let n = match self.dim {
            1 => 4001,
            2 => 601,
            _ => 61,
        };
        let g = match Grid::new(vec![-r; self.dim], vec![r; self.dim], vec![n; self.dim]) {
            Ok(g) => g,
            Err(_) => return f64::INFINITY,
        };
        let w = g.weights();
        let total: f64 = (0..g.len()).map(|i| w[i] * self.base(&g.point(i))).sum();
        (total - 1.0).abs()
    }
}

/// ∫ exp(−1/(1 − |z|²)) over the unit ball in d dimensions.
fn bump_mass(d: usize) -> f64 {
    let n = 200_000;
    let h = 1.0 / n as f64;
    let f = |r: f64| if r < 1.0 { r.powi(d as i32 - 1) * (-1.0 / (1.0 - r * r)).exp() } else { 0.0 };
    let mut s = f(0.0) + f(1.0);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let radial = s * h / 3.0;
    let half = d as f64 / 2.0;
    let sphere = 2.0 * PI.powf(half) / gamma_half(half);
    sphere * radial
}

/// Γ(x) for x a positive multiple of 1/2.
fn gamma_half(x: f64) -> f64 {
    if (x - x.round()).abs() < 1e-12 {
        gamma_integer(x.round() as usize)
    } else {
        let mut g = PI.sqrt();
        let mut k = 0.5;
        while k < x - 1e-12 {
            g *= k;
            k += 1.0;
        }
        g
    }
}

/// p parameter points with weights; S[γ_p](x) = (1/p) Σ w_k σ(a_k·x − b_k).
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteModel {
    /// Each point is (a, b) flattened to length m + 1.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<C64>,
}

impl FiniteModel {
    pub fn new(points: Vec<Vec<f64>>, weights: Vec<C64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(domain("finite model needs one weight per point"));
        }
        if let Some(d) = points.first().map(Vec::len) {
            if d < 2 || points.iter().any(|p| p.len() != d) {
                return Err(domain("finite model points must share a dimension of at least 2"));
            }
        }
        if let Some(i) = weights.iter().position(|w| !w.re.is_finite() || !w.im.is_finite()) {
            return Err(Error::NonFinite { index: i });
        }
        Ok(Self { points, weights })
    }

    pub fn p(&self) -> usize {
        self.points.len()
    }

    /// The un-mollified network on `input_grid`.
    pub fn evaluate(&self, sigma: &Profile1D, input_grid: &Grid) -> Result<SampledFunction> {
        let act = sigma.real_fn()?;
        let m = input_grid.dim();
        if self.points.first().is_some_and(|p| p.len() != m + 1) {
            return Err(domain("finite model dimension does not match the input grid"));
        }
        let inv_p = 1.0 / self.p().max(1) as f64;
        SampledFunction::from_fn(input_grid.clone(), |x| {
            let mut acc = ZERO;
            for (pt, w) in self.points.iter().zip(&self.weights) {
                let t: f64 = pt[..m].iter().zip(x).map(|(a, x)| a * x).sum::<f64>() - pt[m];
                acc += w * act(t);
            }
            acc * inv_p
        })
    }
}

#[derive(Clone, Debug)]
pub struct Mollified {
    pub gamma: ParamDistribution,
    /// Points closer than 3ε to the grid boundary; their mass is truncated.
    pub points_within_margin: usize,
}

/// γ^ε_p(y) = (1/p) Σ w_k δ^ε(y − y_k) on `grid`.
pub fn mollify(model: &FiniteModel, delta: &NascentDelta, grid: &Grid) -> Result<Mollified> {
    let d = grid.dim();
    if delta.dim != d || model.points.first().is_some_and(|p| p.len() != d) {
        return Err(domain("delta, model and grid dimensions disagree"));
    }
    let mut vals = vec![ZERO; grid.len()];
    let reach = delta.support_radius() * delta.epsilon;
    let margin = 3.0 * delta.epsilon;
    let strides = grid.strides();
    let inv_p = 1.0 / model.p().max(1) as f64;
    let mut near_edge = 0;
    let mut z = vec![0.0; d];
    for (pt, w) in model.points.iter().zip(&model.weights) {
        if (0..d).any(|k| pt[k] - grid.lower()[k] < margin || grid.upper()[k] - pt[k] < margin) {
            near_edge += 1;
        }
        if *w == ZERO {
            continue;
        }
        let ranges: Option<Vec<(usize, usize)>> = (0..d)
            .map(|k| {
                let h = grid.spacing(k);
                let lo = ((pt[k] - reach - grid.lower()[k]) / h).ceil().max(0.0);
                let hi = ((pt[k] + reach - grid.lower()[k]) / h).floor().min((grid.counts()[k] - 1) as f64);
                (lo <= hi).then_some((lo as usize, hi as usize))
            })
            .collect();
        let Some(ranges) = ranges else { continue };
        let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
        'walk: loop {
            let mut flat = 0;
            for k in 0..d {
                z[k] = grid.coord(k, idx[k]) - pt[k];
                flat += idx[k] * strides[k];
            }
            vals[flat] += w * (delta.eval(&z) * inv_p);
            for k in (0..d).rev() {
                if idx[k] < ranges[k].1 {
                    idx[k] += 1;
                    continue 'walk;
                }
                idx[k] = ranges[k].0;
            }
            break;
        }
    }
    Ok(Mollified { gamma: ParamDistribution::new(grid.clone(), vals)?, points_within_margin: near_edge })
}

/// γ * δ^ε on the grid of γ.
pub fn smooth(gamma: &ParamDistribution, delta: &NascentDelta) -> Result<ParamDistribution> {
    let vals = convolve(gamma.grid(), gamma.values(), &|z| delta.eval(z))?;
    ParamDistribution::new(gamma.grid().clone(), vals)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingScheme {
    UniformBox,
    DensityProportional,
}

/// Draws p points so that (1/p) Σ w_k δ_{y_k} is an unbiased estimate of γ.
/// DensityProportional weights are Z·phase(γ), Z = ∫|γ|.
pub fn sample_parameters(
    gamma: &ParamDistribution,
    p: usize,
    seed: u64,
    scheme: SamplingScheme,
) -> Result<FiniteModel> {
    if p == 0 {
        return Err(domain("p must be positive"));
    }
    if gamma.max_abs() == 0.0 {
        return Err(domain("cannot sample from a zero distribution"));
    }
    let g = gamma.grid();
    let d = g.dim();
    let mut rng = seeded_rng(seed, 0);
    let mut points = Vec::with_capacity(p);
    let mut weights = Vec::with_capacity(p);
    match scheme {
        SamplingScheme::UniformBox => {
            let vol = g.volume();
            let mut y = vec![0.0; d];
            for _ in 0..p {
                uniform_point(&mut rng, g, &mut y);
                weights.push(g.interpolate_linear(gamma.values(), &y) * vol);
                points.push(y.clone());
            }
        }
        SamplingScheme::DensityProportional => {
            let w = g.weights();
            let mass: Vec<f64> = gamma.values().iter().zip(&w).map(|(v, w)| v.norm() * w).collect();
            let z: f64 = mass.iter().sum();
            let pick = WeightedIndex::new(&mass).map_err(|e| domain(format!("sampling weights: {e}")))?;
            for _ in 0..p {
                let cell = pick.sample(&mut rng);
                let node = g.point(cell);
                let y: Vec<f64> = (0..d)
                    .map(|k| {
                        let h = g.spacing(k);
                        let v = node[k] + (rng.gen::<f64>() - 0.5) * h;
                        v.clamp(g.lower()[k], g.upper()[k])
                    })
                    .collect();
                let v = gamma.values()[cell];
                weights.push(v / v.norm() * z);
                points.push(y);
            }
        }
    }
    FiniteModel::new(points, weights)
}

/// Total-variation distance between the cell histogram of `model` and |γ|·w/Z.
pub fn histogram_distance(model: &FiniteModel, gamma: &ParamDistribution) -> Result<f64> {
    let g = gamma.grid();
    let w = g.weights();
    let mass: Vec<f64> = gamma.values().iter().zip(&w).map(|(v, w)| v.norm() * w).collect();
    let z: f64 = mass.iter().sum();
    if z == 0.0 || model.p() == 0 {
        return Err(domain("histogram needs a nonzero distribution and at least one point"));
    }
    let strides = g.strides();
    let mut counts = vec![0usize; g.len()];
    for pt in &model.points {
        let mut flat = 0;
        for k in 0..g.dim() {
            let i = ((pt[k] - g.lower()[k]) / g.spacing(k)).round().clamp(0.0, (g.counts()[k] - 1) as f64) as usize;
            flat += i * strides[k];
        }
        counts[flat] += 1;
    }
    let p = model.p() as f64;
    Ok(0.5 * counts.iter().zip(&mass).map(|(c, m)| (*c as f64 / p - m / z).abs()).sum::<f64>())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoefficientMethod {
    /// δ^ε * R by FFT, then cubic interpolation at the points.
    FftInterpolation,
    /// δ^ε * R summed directly at each point.
    DirectPoint,
}

#[derive(Clone, Debug)]
pub struct FiniteCoefficients {
    /// Point-evaluation formula.
    pub coefficients: ExpansionCoefficients,
    /// Inner product against the mollified field.
    pub inner_product: ExpansionCoefficients,
    pub method: CoefficientMethod,
    /// max |point − inner| / max |inner|.
    pub agreement: f64,
}

/// c^ε_ij = 2π⟨γ^ε_p, R[ẽᵢ; ρⱼ]⟩ = (2π/p) Σ w_k conj((δ^ε * R[ẽᵢ; ρⱼ])(y_k)),
/// with ẽ = e/(2π)^{m/2}; both sides are returned.
pub fn finite_ridgelet_coeffs(
    model: &FiniteModel,
    delta: &NascentDelta,
    basis_e: &BasisFamily,
    basis_rho: &BasisFamily,
    truncation: (usize, usize),
    grid: &Grid,
) -> Result<FiniteCoefficients> {
    let funcs = basis_e.functions()?;
    let rhos = basis_rho.profiles()?;
    let (ni, nj) = truncation;
    if ni > funcs.len() || nj > rhos.len() {
        return Err(domain("truncation exceeds the basis sizes"));
    }
    let m = grid.dim() - 1;
    let mol = mollify(model, delta, grid)?;
    let scale = C64::new((2.0 * PI).powf(-(m as f64) / 2.0), 0.0);
    let inv_p = 1.0 / model.p().max(1) as f64;
    let mut lhs = vec![vec![ZERO; nj]; ni];
    let mut fft_rhs = vec![vec![ZERO; nj]; ni];
    let mut fields = Vec::with_capacity(ni * nj);
    for (i, e) in funcs.iter().take(ni).enumerate() {
        let et = e.scaled(scale);
        for (j, rho) in rhos.iter().take(nj).enumerate() {
            let r = ridgelet_fourier(&et, rho, grid)?;
            lhs[i][j] = l2_inner(&mol.gamma, &r)? * (2.0 * PI);
            let conv = convolve(grid, r.values(), &|z| delta.eval(z))?;
            let mut acc = ZERO;
            for (pt, w) in model.points.iter().zip(&model.weights) {
                acc += w * grid.interpolate_cubic(&conv, pt).conj();
            }
            fft_rhs[i][j] = acc * (2.0 * PI * inv_p);
            fields.push(r);
        }
    }
    let agreement_of = |rhs: &[Vec<C64>]| {
        let peak = lhs.iter().flatten().fold(0.0f64, |a, v| a.max(v.norm()));
        let dev = lhs.iter().flatten().zip(rhs.iter().flatten()).fold(0.0f64, |a, (l, r)| a.max((l - r).norm()));
        if peak == 0.0 { dev } else { dev / peak }
    };
    let mut method = CoefficientMethod::FftInterpolation;
    let mut rhs = fft_rhs;
    let mut agreement = agreement_of(&rhs);
    if agreement > 1e-3 {
        method = CoefficientMethod::DirectPoint;
        rhs = direct_point_coeffs(model, delta, grid, &fields, ni, nj)?;
        agreement = agreement_of(&rhs);
    }
    Ok(FiniteCoefficients {
        coefficients: ExpansionCoefficients { c: rhs, truncation },
        inner_product: ExpansionCoefficients { c: lhs, truncation },
        method,
        agreement,
    })
}

/// (2π/p) Σ_k w_k conj(Σ_y W_y δ^ε(y_k − y) R(y)) with the grid quadrature weights.
fn direct_point_coeffs(
    model: &FiniteModel,
    delta: &NascentDelta,
    grid: &Grid,
    fields: &[ParamDistribution],
    ni: usize,
    nj: usize,
) -> Result<Vec<Vec<C64>>> {
    let w = grid.weights();
    let inv_p = 1.0 / model.p().max(1) as f64;
    let mut out = vec![vec![ZERO; nj]; ni];
    for (pt, wk) in model.points.iter().zip(&model.weights) {
        let single = FiniteModel { points: vec![pt.clone()], weights: vec![C64::new(1.0, 0.0)] };
        let kernel = mollify(&single, delta, grid)?.gamma;
        for (idx, r) in fields.iter().enumerate() {
            let s: C64 = kernel
                .values()
                .iter()
                .zip(r.values())
                .zip(&w)
                .filter(|((k, _), _)| **k != ZERO)
                .map(|((k, v), w)| k * v.conj() * *w)
                .sum();
            out[idx / nj][idx % nj] += wk * s * (2.0 * PI * inv_p);
        }
    }
    Ok(out)
}

/// Σ c_ij ⟨⟨σ, ρⱼ⟩⟩ ẽᵢ, the network output the expansion predicts.
pub fn predicted_output(
    coeffs: &ExpansionCoefficients,
    basis_e: &BasisFamily,
    basis_rho: &BasisFamily,
    sigma: &Profile1D,
) -> Result<SampledFunction> {
    let funcs = basis_e.functions()?;
    let rhos = basis_rho.profiles()?;
    let m = funcs.first().map(|f| f.grid().dim()).ok_or_else(|| domain("empty basis"))?;
    let pairs: Vec<C64> = rhos.iter().map(|r| pairing(sigma, r, m)).collect::<Result<_>>()?;
    let scale = (2.0 * PI).powf(-(m as f64) / 2.0);
    let mut out = SampledFunction::zeros(funcs[0].grid().clone());
    for (row, e) in coeffs.c.iter().zip(funcs) {
        let c: C64 = row.iter().zip(&pairs).map(|(c, p)| c * p).sum();
        out = out.axpy(c * scale, e)?;
    }
    Ok(out)
}

/// Per-layer constants of the Rademacher bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayerSpec {
    /// sup |v| over the layer's parameter domain.
    pub m_bound: f64,
    /// Volume of the layer's parameter domain.
    pub volume: f64,
    /// ‖γ_j‖.
    pub g_inclusive: f64,
    /// ‖P_j[γ_j]‖.
    pub g_exclusive: f64,
}

impl LayerSpec {
    pub fn new(m_bound: f64, volume: f64, g_inclusive: f64, g_exclusive: f64) -> Result<Self> {
        if !(m_bound > 0.0 && volume > 0.0 && g_inclusive >= 0.0 && g_exclusive >= 0.0) {
            return Err(domain("layer constants must be positive (norms nonnegative)"));
        }
        if g_exclusive > g_inclusive + 1e-6 {
            return Err(domain("exclusive norm exceeds inclusive norm; a projection cannot grow the norm"));
        }
        Ok(Self { m_bound, volume, g_inclusive, g_exclusive })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormChoice {
    Inclusive,
    Exclusive,
}

/// B(√(2d log 2) + 1) Π_j M_j √V_j G_j / √n.
pub fn generalization_bound(layers: &[LayerSpec], b: f64, n: usize, d: usize, choice: NormChoice) -> Result<f64> {
    if n == 0 {
        return Err(domain("sample count n must be positive"));
    }
    if d == 0 || d != layers.len() {
        return Err(domain(format!("depth d = {d} must equal the number of layers ({})", layers.len())));
    }
    if b.is_nan() || b <= 0.0 {
        return Err(domain("B must be positive"));
    }
    let prod: f64 = layers
        .iter()
        .map(|l| {
            let g = match choice {
                NormChoice::Inclusive => l.g_inclusive,
                NormChoice::Exclusive => l.g_exclusive,
            };
            l.m_bound * l.volume.sqrt() * g
        })
        .product();
    Ok(b * ((2.0 * d as f64 * 2f64.ln()).sqrt() + 1.0) * prod / (n as f64).sqrt())
}

/// (‖γ‖, ‖P[γ]‖).
pub fn layer_norms(op: &NetworkOperator, gamma: &ParamDistribution, mode: AdjointMode) -> Result<(f64, f64)> {
    let (principal, _) = project(op, gamma, mode)?;
    Ok((gamma.norm(), principal.norm()))
}
