//! The integral representation S, the ridgelet transform R, their
//! Fourier-slice paths, and the adjoint S*.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fourier::{
    dft_axis, fill_phases, fractional_bracket, partial_sharp_b, wh_norm, SobolevOrders, SpectralAccuracy,
    SpectralFunction,
};
use crate::grid::{
    omega_weights, seeded_rng, uniform_point, weighted_omega_inner_samples, Grid, ParamDistribution,
    QuadratureScheme, SampledFunction, C64, ZERO,
};
use crate::profiles::{check_l2m_integrable, default_omega_grid, Eval, Parity, Profile1D};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AdjointMode {
    PlainL2,
    WeightedSobolev(SobolevOrders),
}

/// S with activation σ on fixed parameter and input grids.
#[derive(Clone, Debug)]
pub struct NetworkOperator {
    sigma: Profile1D,
    param_grid: Grid,
    input_grid: Grid,
    /// Quadrature for S.
    pub scheme: QuadratureScheme,
    /// Quadrature for R and S* (the x integral).
    pub ridgelet_scheme: QuadratureScheme,
    norm_constant: Option<f64>,
    /// Factor divided out of the supplied σ (1 when not normalised).
    original_scale: f64,
    normalized: bool,
}

impl NetworkOperator {
    pub fn new(sigma: Profile1D, param_grid: Grid, input_grid: Grid, scheme: QuadratureScheme) -> Result<Self> {
        if param_grid.dim() != input_grid.dim() + 1 {
            return Err(domain(format!(
                "parameter grid has {} axes; expected input dimension + 1 = {}",
                param_grid.dim(),
                input_grid.dim() + 1
            )));
        }
        let norm_constant = l2m_norm(&sigma, input_grid.dim()).ok();
        Ok(Self {
            sigma,
            param_grid,
            input_grid,
            scheme,
            ridgelet_scheme: QuadratureScheme::Trapezoid,
            norm_constant,
            original_scale: 1.0,
            normalized: false,
        })
    }

    /// Operator with σ rescaled to unit L²ₘ norm, so S*∘S is a projection.
    pub fn plain_l2(sigma: Profile1D, param_grid: Grid, input_grid: Grid) -> Result<Self> {
        Self::new(sigma, param_grid, input_grid, QuadratureScheme::Trapezoid)?.normalized()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_constant.ok_or_else(|| {
            domain(format!("{} has no finite L²ₘ norm and cannot be normalised", self.sigma.name))
        })?;
        if n == 0.0 {
            return Err(domain("σ is zero"));
        }
        self.sigma = self.sigma.scaled(C64::new(1.0 / n, 0.0));
        self.original_scale *= n;
        self.norm_constant = Some(1.0);
        self.normalized = true;
        Ok(self)
    }

    pub fn with_ridgelet_scheme(mut self, scheme: QuadratureScheme) -> Self {
        self.ridgelet_scheme = scheme;
        self
    }

    pub fn sigma(&self) -> &Profile1D {
        &self.sigma
    }

    pub fn param_grid(&self) -> &Grid {
        &self.param_grid
    }

    pub fn input_grid(&self) -> &Grid {
        &self.input_grid
    }

    pub fn m(&self) -> usize {
        self.input_grid.dim()
    }

    pub fn norm_constant(&self) -> Option<f64> {
        self.norm_constant
    }

    pub fn original_scale(&self) -> f64 {
        self.original_scale
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    fn check_gamma(&self, gamma: &ParamDistribution) -> Result<()> {
        self.param_grid.check_same(gamma.grid())
    }

    /// S[γ](x) = ∫ γ(a,b) σ(a·x − b) da db on the input grid.
    pub fn forward_s(&self, gamma: &ParamDistribution) -> Result<SampledFunction> {
        self.forward_s_with(gamma, &self.sigma)
    }

    /// S with `activation` in place of σ.
    pub fn forward_s_with(&self, gamma: &ParamDistribution, activation: &Profile1D) -> Result<SampledFunction> {
        self.check_gamma(gamma)?;
        let act = activation.real_fn()?;
        let m = self.m();
        let (params, coef) = match self.scheme {
            QuadratureScheme::Trapezoid => {
                let w = self.param_grid.weights();
                let mut params = Vec::new();
                let mut coef = Vec::new();
                for (flat, (g, w)) in gamma.values().iter().zip(&w).enumerate() {
                    if *g != ZERO {
                        params.extend(self.param_grid.point(flat));
                        coef.push(g * *w);
                    }
                }
                (params, coef)
            }
            QuadratureScheme::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(domain("Monte Carlo needs a positive sample count"));
                }
                let mut rng = seeded_rng(seed, u64::MAX);
                let scale = self.param_grid.volume() / samples as f64;
                let mut p = vec![0.0; m + 1];
                let mut params = Vec::with_capacity(samples * (m + 1));
                let mut coef = Vec::with_capacity(samples);
                for _ in 0..samples {
                    uniform_point(&mut rng, &self.param_grid, &mut p);
                    params.extend_from_slice(&p);
                    coef.push(self.param_grid.interpolate_linear(gamma.values(), &p) * scale);
                }
                (params, coef)
            }
        };
        let n = self.input_grid.len();
        let mut out = Vec::with_capacity(n);
        for flat in 0..n {
            let x = self.input_grid.point(flat);
            let mut acc = ZERO;
            for (k, c) in coef.iter().enumerate() {
                let v = &params[k * (m + 1)..(k + 1) * (m + 1)];
                let t = dot(&v[..m], &x) - v[m];
                acc += c * act(t);
            }
            out.push(acc);
        }
        SampledFunction::new(self.input_grid.clone(), out)
    }

    /// Spectrum of S[γ] through the sheared form
    /// Ŝ(ξ) = (2π)^{m−1} ∫ γ♯(ξ/ω, ω) σ♯(ω) |ω|^{−m} dω, on default grids.
    pub fn forward_s_fourier(&self, gamma: &ParamDistribution) -> Result<SpectralFunction> {
        self.forward_s_fourier_with(gamma, &self.sigma)
    }

    /// Sheared spectral path with `activation` in place of σ.
    pub fn forward_s_fourier_with(&self, gamma: &ParamDistribution, activation: &Profile1D) -> Result<SpectralFunction> {
        let og = slice_omega_grid(&self.param_grid, activation)?;
        let xg = self.default_xi_grid(&og)?;
        self.sheared_forward(gamma, activation, &og, &xg)
    }

    /// S[γ] on the input grid through the sheared spectral path.
    pub fn forward_s_spectral_with(&self, gamma: &ParamDistribution, activation: &Profile1D) -> Result<SampledFunction> {
        let spec = self.forward_s_fourier_with(gamma, activation)?;
        crate::fourier::fourier_inverse(&spec, &self.input_grid)
    }

    fn default_xi_grid(&self, og: &Grid) -> Result<Grid> {
        let m = self.m();
        let amax = (0..m)
            .map(|k| self.param_grid.lower()[k].abs().max(self.param_grid.upper()[k].abs()))
            .fold(0.0, f64::max);
        let xi_max = amax * og.upper()[0];
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        let mut counts = Vec::with_capacity(m);
        for k in 0..m {
            let xh = self.input_grid.lower()[k].abs().max(self.input_grid.upper()[k].abs());
            let dxi = PI / (2.0 * xh);
            lower.push(-xi_max);
            upper.push(xi_max);
            counts.push(2 * (xi_max / dxi).ceil() as usize);
        }
        Grid::new(lower, upper, counts)
    }

    pub fn forward_s_fourier_on(
        &self,
        gamma: &ParamDistribution,
        omega_grid: &Grid,
        xi_grid: &Grid,
    ) -> Result<SpectralFunction> {
        self.sheared_forward(gamma, &self.sigma, omega_grid, xi_grid)
    }

    fn sheared_forward(
        &self,
        gamma: &ParamDistribution,
        activation: &Profile1D,
        omega_grid: &Grid,
        xi_grid: &Grid,
    ) -> Result<SpectralFunction> {
        self.check_gamma(gamma)?;
        let m = self.m();
        if xi_grid.dim() != m {
            return Err(domain("ξ grid dimension must equal the input dimension"));
        }
        let gs = partial_sharp_b(gamma, omega_grid)?;
        let sig = activation.sample_spectrum(omega_grid)?;
        let ow = omega_weights(omega_grid, m);
        let a_grid = self.param_grid.sub_grid(0..m);
        let na = a_grid.len();
        let nw = omega_grid.len();
        let omegas = omega_grid.nodes(0);
        let mut slice = vec![ZERO; na];
        let mut out = vec![ZERO; xi_grid.len()];
        let mut outside = 0usize;
        let mut lookups = 0usize;
        let xis: Vec<Vec<f64>> = (0..xi_grid.len()).map(|i| xi_grid.point(i)).collect();
        let mut a = vec![0.0; m];
        for k in 0..nw {
            let factor = sig[k] * ow[k];
            if factor == ZERO {
                continue;
            }
            for (i, s) in slice.iter_mut().enumerate() {
                *s = gs.values()[i * nw + k];
            }
            for (o, xi) in out.iter_mut().zip(&xis) {
                for d in 0..m {
                    a[d] = xi[d] / omegas[k];
                }
                lookups += 1;
                if !a_grid.contains(&a) {
                    outside += 1;
                    continue;
                }
                *o += a_grid.interpolate_cubic(&slice, &a) * factor;
            }
        }
        let accuracy = SpectralAccuracy {
            boundary_level: gs.accuracy.boundary_level,
            truncated_fraction: if lookups == 0 { 0.0 } else { outside as f64 / lookups as f64 },
        };
        Ok(SpectralFunction::with_accuracy(xi_grid.clone(), out, accuracy))
    }

    /// S[R[f;ρ]] and ⟨⟨σ, ρ⟩⟩.
    pub fn reconstruct(&self, f: &SampledFunction, rho: &Profile1D) -> Result<(SampledFunction, C64)> {
        if !self.sigma.has_spectral() {
            return Err(self.sigma.unsupported("the admissibility pairing"));
        }
        let p = pairing(&self.sigma, rho, self.m())?;
        let r = if rho.has_real() {
            ridgelet(f, rho, &self.param_grid, self.ridgelet_scheme)?
        } else {
            ridgelet_fourier(f, rho, &self.param_grid)?
        };
        Ok((self.forward_s(&r)?, p))
    }

    /// S*[f]: R[f;σ] in plain L², R[f;σ*] in the weighted Sobolev geometry.
    pub fn adjoint(&self, f: &SampledFunction, mode: AdjointMode) -> Result<ParamDistribution> {
        match mode {
            AdjointMode::PlainL2 => {
                if self.norm_constant.is_none() {
                    return Err(domain(format!(
                        "plain L² adjoint needs σ in L²ₘ; {} is not",
                        self.sigma.name
                    )));
                }
                ridgelet(f, &self.sigma, &self.param_grid, self.ridgelet_scheme)
            }
            AdjointMode::WeightedSobolev(orders) => {
                wh_norm(&self.sigma, orders)?;
                let star = build_sigma_star(&self.sigma, orders, self.m())?;
                ridgelet_fourier(f, &star, &self.param_grid)
            }
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// ‖ρ‖_{L²ₘ} on the profile's native grid or the default ω grid.
pub fn l2m_norm(rho: &Profile1D, m: usize) -> Result<f64> {
    if rho.singular_at_zero() {
        return Err(domain(format!("{} is singular at ω = 0", rho.name)));
    }
    let og = rho.native_omega().cloned().unwrap_or_else(default_omega_grid);
    let s = rho.sample_spectrum(&og)?;
    check_l2m_integrable(rho, &s, &omega_weights(&og, m))?;
    Ok(weighted_omega_inner_samples(&og, &s, &s, m)?.re.sqrt())
}

/// ⟨⟨σ, ρ⟩⟩ = (2π)^{m−1} ∫ σ♯ conj(ρ♯) |ω|^{−m} dω. Uses a tabulated
/// profile's own grid when there is one, else the default straddling grid.
pub fn pairing(sigma: &Profile1D, rho: &Profile1D, m: usize) -> Result<C64> {
    let og = rho
        .native_omega()
        .or(sigma.native_omega())
        .cloned()
        .unwrap_or_else(default_omega_grid);
    pairing_on(sigma, rho, m, &og)
}

pub fn pairing_on(sigma: &Profile1D, rho: &Profile1D, m: usize, omega_grid: &Grid) -> Result<C64> {
    let s = sigma.sample_spectrum(omega_grid)?;
    let r = rho.sample_spectrum(omega_grid)?;
    weighted_omega_inner_samples(omega_grid, &s, &r, m)
}

/// R[f;ρ](a,b) = ∫ f(x) conj(ρ(a·x − b)) dx on `param_grid`.
pub fn ridgelet(
    f: &SampledFunction,
    rho: &Profile1D,
    param_grid: &Grid,
    scheme: QuadratureScheme,
) -> Result<ParamDistribution> {
    let m = f.grid().dim();
    if param_grid.dim() != m + 1 {
        return Err(domain("parameter grid must have one more axis than the input grid"));
    }
    let r = rho.real_fn()?;
    let xg = f.grid();
    let n = param_grid.len();
    let mut out = Vec::with_capacity(n);
    match scheme {
        QuadratureScheme::Trapezoid => {
            let w = xg.weights();
            let mut xs = Vec::new();
            let mut fw = Vec::new();
            for (flat, (v, w)) in f.values().iter().zip(&w).enumerate() {
                if *v != ZERO {
                    xs.extend(xg.point(flat));
                    fw.push(v * *w);
                }
            }
            for flat in 0..n {
                let p = param_grid.point(flat);
                let mut acc = ZERO;
                for (j, c) in fw.iter().enumerate() {
                    let t = dot(&p[..m], &xs[j * m..(j + 1) * m]) - p[m];
                    acc += c * r(t).conj();
                }
                out.push(acc);
            }
        }
        QuadratureScheme::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(domain("Monte Carlo needs a positive sample count"));
            }
            let scale = xg.volume() / samples as f64;
            let mut x = vec![0.0; m];
            for flat in 0..n {
                let p = param_grid.point(flat);
                let mut rng = seeded_rng(seed, flat as u64);
                let mut acc = ZERO;
                for _ in 0..samples {
                    uniform_point(&mut rng, xg, &mut x);
                    let t = dot(&p[..m], &x) - p[m];
                    acc += xg.interpolate_linear(f.values(), &x) * r(t).conj();
                }
                out.push(acc * scale);
            }
        }
    }
    ParamDistribution::new(param_grid.clone(), out)
}

/// ω grid for slice transforms onto `param_grid`: period four times the b
/// half-width, extent where ρ♯ has decayed.
pub fn slice_omega_grid(param_grid: &Grid, rho: &Profile1D) -> Result<Grid> {
    let k = param_grid.dim() - 1;
    let bh = param_grid.lower()[k].abs().max(param_grid.upper()[k].abs());
    let dw = PI / (2.0 * bh);
    let spec = rho.spectral_fn()?;
    let extent = decay_extent(spec);
    Grid::straddling(extent, 2 * (extent / dw).ceil() as usize)
}

/// Half-width beyond which |ρ♯| stays below 1e-14 of its peak.
fn decay_extent(spec: &Eval) -> f64 {
    let probe: Vec<(f64, f64)> = (1..=1200)
        .map(|i| {
            let w = i as f64 * 0.05 - 0.025;
            (w, spec(w).norm().max(spec(-w).norm()))
        })
        .collect();
    let peak = probe.iter().fold(0.0f64, |m, p| m.max(p.1));
    let last = probe.iter().rposition(|p| p.1 > 1e-14 * peak).unwrap_or(0);
    (probe[last].0 + 0.5).clamp(2.0, 60.0)
}

/// R through its spectrum R♯(a, ω) = f̂(ωa) conj(ρ♯(ω)), inverted along ω.
pub fn ridgelet_fourier(f: &SampledFunction, rho: &Profile1D, param_grid: &Grid) -> Result<ParamDistribution> {
    let og = slice_omega_grid(param_grid, rho)?;
    ridgelet_fourier_on(f, rho, param_grid, &og)
}

pub fn ridgelet_fourier_on(
    f: &SampledFunction,
    rho: &Profile1D,
    param_grid: &Grid,
    omega_grid: &Grid,
) -> Result<ParamDistribution> {
    let m = f.grid().dim();
    if param_grid.dim() != m + 1 {
        return Err(domain("parameter grid must have one more axis than the input grid"));
    }
    let rs: Vec<C64> = rho.sample_spectrum(omega_grid)?.iter().map(|v| v.conj()).collect();
    let mut spec = sheared_input_spectrum(f, &param_grid.sub_grid(0..m), omega_grid)?;
    let nw = omega_grid.len();
    for row in spec.chunks_mut(nw) {
        for (v, r) in row.iter_mut().zip(&rs) {
            *v *= r;
        }
    }
    let a_len = spec.len() / nw;
    let b_grid = param_grid.axis_grid(m);
    let (vals, _) = dft_axis(
        &spec,
        &[a_len, nw],
        1,
        &omega_grid.nodes(0),
        &omega_grid.axis_weights(0),
        &b_grid,
        1.0,
    );
    let vals = vals.into_iter().map(|v| v / (2.0 * PI)).collect();
    ParamDistribution::new(param_grid.clone(), vals)
}

/// f̂(ω a) for every a node of `a_grid` and ω node, row-major (a, ω).
pub(crate) fn sheared_input_spectrum(f: &SampledFunction, a_grid: &Grid, omega_grid: &Grid) -> Result<Vec<C64>> {
    let m = f.grid().dim();
    if a_grid.dim() != m {
        return Err(domain("a grid dimension must equal the input dimension"));
    }
    let xg = f.grid();
    let w = xg.weights();
    let mut xs = Vec::new();
    let mut fw = Vec::new();
    for (flat, (v, w)) in f.values().iter().zip(&w).enumerate() {
        if *v != ZERO {
            xs.extend(xg.point(flat));
            fw.push(v * *w);
        }
    }
    let nw = omega_grid.len();
    let w0 = omega_grid.lower()[0];
    let dw = omega_grid.spacing(0);
    let mut out = vec![ZERO; a_grid.len() * nw];
    let mut phases = vec![ZERO; nw];
    for ai in 0..a_grid.len() {
        let a = a_grid.point(ai);
        let row = &mut out[ai * nw..(ai + 1) * nw];
        for (j, c) in fw.iter().enumerate() {
            let ax = dot(&a, &xs[j * m..(j + 1) * m]);
            fill_phases(&mut phases, -ax, w0, dw);
            for (r, ph) in row.iter_mut().zip(&phases) {
                *r += c * ph;
            }
        }
    }
    Ok(out)
}

/// σ* with σ*♯ = (2π)^{m−1} |ω|ᵐ ⟨∂_ω⟩^{−t} ⟨ω⟩^{2s} ⟨∂_ω⟩^{−t} σ♯.
pub fn build_sigma_star(sigma: &Profile1D, orders: SobolevOrders, m: usize) -> Result<Profile1D> {
    let spec = sigma.spectral_fn()?.clone();
    let pre = (2.0 * PI).powi(m as i32 - 1);
    let name = format!("{}_star", sigma.name);
    if orders.t == 0.0 {
        let s = orders.s;
        let eval: Eval = Arc::new(move |w: f64| spec(w) * (pre * w.abs().powi(m as i32) * (1.0 + w * w).powf(s)));
        return Ok(Profile1D::new(name, None, Some(eval), sigma.parity)?.with_orders(orders));
    }
    let width = decay_extent(&spec).max(8.0);
    let og = Grid::straddling(width, 2 * (width / 0.02).ceil() as usize)?;
    let phi = SpectralFunction::new(og.clone(), sigma.sample_spectrum(&og)?)?;
    let once = fractional_bracket(&phi, -orders.t)?;
    let weighted: Vec<C64> = once
        .values()
        .iter()
        .zip(og.nodes(0))
        .map(|(v, w)| v * (1.0 + w * w).powf(orders.s))
        .collect();
    let twice = fractional_bracket(&SpectralFunction::new(og.clone(), weighted)?, -orders.t)?;
    if twice.accuracy.boundary_level > 1e-6 {
        return Err(Error::Accuracy(format!(
            "{} decays too slowly for the bracket pipeline (boundary level {:.1e})",
            sigma.name, twice.accuracy.boundary_level
        )));
    }
    let values: Vec<C64> = twice
        .values()
        .iter()
        .zip(og.nodes(0))
        .map(|(v, w)| v * (pre * w.abs().powi(m as i32)))
        .collect();
    Ok(Profile1D::tabulated_spectrum(name, og, values, sigma.parity)?.with_orders(orders))
}

/// Inner product of the weighted Sobolev parameter space at t = 0:
/// (2π)^{−m} ∫∫ u♯ conj(v♯) |ω|^{−m} ⟨ω⟩^{−2s} da dω.
pub fn sobolev_inner(u: &ParamDistribution, v: &ParamDistribution, orders: SobolevOrders) -> Result<C64> {
    u.grid().check_same(v.grid())?;
    if orders.t != 0.0 {
        return Err(domain("the parameter-space Sobolev inner product is implemented for t = 0 only"));
    }
    let g = u.grid();
    let m = g.dim() - 1;
    let bh = g.lower()[m].abs().max(g.upper()[m].abs());
    let dw = PI / (2.0 * bh);
    let omax = PI / g.spacing(m);
    let og = Grid::straddling(omax, 2 * (omax / dw).ceil() as usize)?;
    let us = partial_sharp_b(u, &og)?;
    let vs = partial_sharp_b(v, &og)?;
    let aw = g.sub_grid(0..m).weights();
    let ow: Vec<f64> = omega_weights(&og, m)
        .iter()
        .zip(og.nodes(0))
        .map(|(w, o)| w * (1.0 + o * o).powf(-orders.s))
        .collect();
    let nw = og.len();
    let mut acc = ZERO;
    for (ai, wa) in aw.iter().enumerate() {
        for (k, wo) in ow.iter().enumerate() {
            let i = ai * nw + k;
            acc += us.values()[i] * vs.values()[i].conj() * (wa * wo);
        }
    }
    // omega_weights carries (2π)^{m−1}; the form needs (2π)^{−m}.
    Ok(acc / (2.0 * PI).powi(2 * m as i32 - 1))
}

/// Integrand parity of the pairing between two profiles.
pub fn pairing_parity(sigma: &Profile1D, rho: &Profile1D) -> Parity {
    sigma.parity.times(rho.parity)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::l2_inner;
    use crate::profiles::{gaussian_derivative, make_rho_family};

    fn bumps(g: &Grid) -> SampledFunction {
        SampledFunction::from_fn(g.clone(), |x| {
            C64::new((-(x[0] - 1.0).powi(2)).exp() - 0.5 * (-(x[0] + 1.5).powi(2) / 0.5).exp(), 0.0)
        })
        .unwrap()
    }

    fn setup() -> (Grid, Grid) {
        let x = Grid::line(-10.0, 10.0, 201).unwrap();
        let p = Grid::new(vec![-6.0, -50.0], vec![6.0, 50.0], vec![121, 251]).unwrap();
        (x, p)
    }

    #[test]
    fn plain_duality_is_exact_under_trapezoid() {
        let (x, p) = setup();
        let op = NetworkOperator::plain_l2(gaussian_derivative(4), p.clone(), x.clone()).unwrap();
        let f = bumps(&x);
        let gamma = ParamDistribution::from_fn(p.clone(), |q| {
            C64::new((-(q[0] - 1.0).powi(2) - (q[1] / 2.0).powi(2)).exp(), 0.3)
        })
        .unwrap();
        let lhs = l2_inner(&op.forward_s(&gamma).unwrap(), &f).unwrap();
        let rhs = l2_inner(&gamma, &op.adjoint(&f, AdjointMode::PlainL2).unwrap()).unwrap();
        assert!((lhs - rhs).norm() < 1e-10 * lhs.norm().max(1.0));
    }

    #[test]
    fn slice_ridgelet_matches_direct() {
        let (x, p) = setup();
        let f = bumps(&x);
        let rho = gaussian_derivative(4);
        let d = ridgelet(&f, &rho, &p, QuadratureScheme::Trapezoid).unwrap();
        let s = ridgelet_fourier(&f, &rho, &p).unwrap();
        let err = d.sub(&s).unwrap().max_abs() / d.max_abs();
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn sheared_forward_matches_direct() {
        let (x, p) = setup();
        let op = NetworkOperator::plain_l2(gaussian_derivative(4), p.clone(), x.clone()).unwrap();
        let gamma = ParamDistribution::from_fn(p.clone(), |q| {
            C64::new((-(q[0] - 1.0).powi(2) / 0.5 - (q[1] - 1.0).powi(2)).exp(), 0.0)
        })
        .unwrap();
        let direct = op.forward_s(&gamma).unwrap();
        let spec = op.forward_s_fourier(&gamma).unwrap();
        let back = crate::fourier::fourier_inverse(&spec, &x).unwrap();
        let err = direct.sub(&back).unwrap().max_abs() / direct.max_abs();
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn reconstruction_scales_by_pairing() {
        let (x, p) = setup();
        let op = NetworkOperator::new(gaussian_derivative(4), p, x.clone(), QuadratureScheme::Trapezoid).unwrap();
        let f = bumps(&x);
        let rho = &make_rho_family(1).unwrap()[1];
        let (rec, pair) = op.reconstruct(&f, rho).unwrap();
        let target = f.scaled(pair);
        let err = rec.sub(&target).unwrap().max_abs() / target.max_abs();
        assert!(err < 5e-2, "{err} pairing {pair}");
    }

    #[test]
    fn relu_has_no_plain_adjoint() {
        let (x, p) = setup();
        let op = NetworkOperator::new(crate::profiles::relu(), p, x.clone(), QuadratureScheme::Trapezoid).unwrap();
        assert!(op.adjoint(&bumps(&x), AdjointMode::PlainL2).is_err());
    }
}
