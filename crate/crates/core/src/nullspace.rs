//! Admissibility, ghost construction, the projection onto (ker S)⊥, the
//! structure decomposition, the ridgelet series and the lazy solution.

use std::f64::consts::PI;

use crate::error::{domain, Error, Result};
use crate::fourier::{partial_sharp_b, SobolevOrders};
use crate::grid::{omega_weights, Grid, ParamDistribution, SampledFunction, C64, ZERO};
use crate::profiles::{default_omega_grid, BasisFamily, BasisKind, Parity, Profile1D};
use crate::transforms::{
    build_sigma_star, pairing, pairing_on, ridgelet, ridgelet_fourier, sheared_input_spectrum, AdjointMode,
    NetworkOperator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairingMethod {
    AnalyticSpectra,
    GridSpectra,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub pairing: C64,
    pub method: PairingMethod,
    /// The integrand is odd, so the pairing vanishes on a symmetric grid.
    pub parity_forced_zero: bool,
    /// Half-grid difference plus a roundoff bound.
    pub error_estimate: f64,
    /// Σ |quadrature terms|, the magnitude the cancellation happened at.
    pub quadrature_scale: f64,
}

impl AdmissibilityReport {
    /// Zero threshold: max(1e-8, 10 × error estimate).
    pub fn zero_threshold(&self) -> f64 {
        (10.0 * self.error_estimate).max(1e-8)
    }

    pub fn is_zero(&self) -> bool {
        self.pairing.norm() <= self.zero_threshold()
    }

    pub fn is_admissible(&self) -> bool {
        !self.is_zero()
    }
}

/// ⟨⟨σ, ρ⟩⟩ with an error estimate from a half-resolution repeat.
pub fn admissibility(sigma: &Profile1D, rho: &Profile1D, m: usize) -> Result<AdmissibilityReport> {
    for p in [sigma, rho] {
        if !p.has_spectral() {
            return Err(p.unsupported("the admissibility pairing"));
        }
    }
    let native = rho.native_omega().or(sigma.native_omega()).cloned();
    let method = if native.is_some() { PairingMethod::GridSpectra } else { PairingMethod::AnalyticSpectra };
    let grid = native.unwrap_or_else(default_omega_grid);
    let half_width = grid.upper()[0];
    let half = Grid::straddling(half_width, 2 * (grid.len() / 4).max(1))?;
    let s = sigma.sample_spectrum(&grid)?;
    let r = rho.sample_spectrum(&grid)?;
    let w = omega_weights(&grid, m);
    let mut value = ZERO;
    let mut scale = 0.0;
    for ((a, b), w) in s.iter().zip(&r).zip(&w) {
        let t = a * b.conj() * *w;
        value += t;
        scale += t.norm();
    }
    let coarse = pairing_on(sigma, rho, m, &half)?;
    let roundoff = grid.len() as f64 * f64::EPSILON * scale;
    Ok(AdmissibilityReport {
        pairing: value,
        method,
        parity_forced_zero: sigma.parity.times(rho.parity) == Parity::Odd,
        error_estimate: (value - coarse).norm() + roundoff,
        quadrature_scale: scale,
    })
}

#[derive(Clone, Debug)]
pub enum GhostRecipe {
    /// Keep `base`♯ only where σ♯ vanishes numerically.
    DisjointSupport(Profile1D),
    /// ρ/conj⟨⟨σ,ρ⟩⟩ − ρ'/conj⟨⟨σ,ρ'⟩⟩.
    NormalizedDifference(Profile1D, Profile1D),
    /// αρ₀ + βρ₀' for non-admissible ρ₀, ρ₀'.
    LinearCombination(Profile1D, Profile1D, C64, C64),
}

/// A profile ρ with ⟨⟨σ, ρ⟩⟩ = 0, verified after construction.
pub fn make_nonadmissible(sigma: &Profile1D, recipe: &GhostRecipe, m: usize) -> Result<Profile1D> {
    let out = match recipe {
        GhostRecipe::DisjointSupport(base) => {
            let og = default_omega_grid();
            let s = sigma.sample_spectrum(&og)?;
            let peak = s.iter().fold(0.0f64, |a, v| a.max(v.norm()));
            let vals: Vec<C64> = base
                .sample_spectrum(&og)?
                .into_iter()
                .zip(&s)
                .map(|(v, sv)| if sv.norm() <= 1e-14 * peak { v } else { ZERO })
                .collect();
            Profile1D::tabulated_spectrum(format!("{}_off_supp", base.name), og, vals, base.parity)?
        }
        GhostRecipe::NormalizedDifference(a, b) => {
            let pa = admissibility(sigma, a, m)?;
            let pb = admissibility(sigma, b, m)?;
            if pa.is_zero() || pb.is_zero() {
                return Err(domain("normalized difference needs two admissible profiles"));
            }
            Profile1D::linear_combination(
                format!("{}_minus_{}", a.name, b.name),
                &[(1.0 / pa.pairing.conj(), a), (-1.0 / pb.pairing.conj(), b)],
            )?
        }
        GhostRecipe::LinearCombination(a, b, alpha, beta) => {
            for p in [a, b] {
                if admissibility(sigma, p, m)?.is_admissible() {
                    return Err(domain(format!("{} is admissible; the combination would not be a ghost", p.name)));
                }
            }
            if *alpha == ZERO && *beta == ZERO {
                Profile1D::zero()
            } else {
                Profile1D::linear_combination(format!("{}_{}_comb", a.name, b.name), &[(*alpha, a), (*beta, b)])?
            }
        }
    };
    let check = admissibility(sigma, &out, m)?;
    if check.pairing.norm() > 1e-8_f64.max(10.0 * check.error_estimate) {
        return Err(Error::Accuracy(format!(
            "constructed profile still pairs with σ at {:.2e}",
            check.pairing.norm()
        )));
    }
    Ok(out)
}

/// (P[γ], γ − P[γ]).
pub fn project(
    op: &NetworkOperator,
    gamma: &ParamDistribution,
    mode: AdjointMode,
) -> Result<(ParamDistribution, ParamDistribution)> {
    let s = op.forward_s(gamma)?;
    let principal = match mode {
        AdjointMode::PlainL2 => {
            if !op.is_normalized() {
                return Err(domain("plain L² projection needs the normalised operator"));
            }
            op.adjoint(&s, mode)?
        }
        AdjointMode::WeightedSobolev(orders) => {
            let star = build_sigma_star(op.sigma(), orders, op.m())?;
            let norm = pairing(op.sigma(), &star, op.m())?;
            if norm.norm() == 0.0 {
                return Err(Error::Singular("⟨⟨σ, σ*⟩⟩ vanishes".into()));
            }
            ridgelet_fourier(&s, &star, op.param_grid())?.scaled(1.0 / norm)
        }
    };
    let ghost = gamma.sub(&principal)?;
    Ok((principal, ghost))
}

#[derive(Clone, Debug)]
pub struct StructureDecomposition {
    pub principal: ParamDistribution,
    pub ghost: ParamDistribution,
    pub coefficients: Vec<C64>,
    pub ghost_ridgelets: Vec<Profile1D>,
    /// ‖γ − principal − ghost‖.
    pub residual_norm: f64,
    /// ‖ghost − Σ c'ᵢ R[ẽᵢ; ρ'ᵢ]‖ / ‖ghost‖ (0 when the ghost is zero).
    pub synthesis_residual: f64,
}

impl StructureDecomposition {
    pub fn coefficient_energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// ω grid for spectral analysis on a parameter grid: spacing π/B, extent
/// the b-axis Nyquist frequency.
pub fn analysis_omega_grid(param_grid: &Grid) -> Result<Grid> {
    let k = param_grid.dim() - 1;
    let bh = param_grid.lower()[k].abs().max(param_grid.upper()[k].abs());
    let dw = PI / bh;
    let top = PI / param_grid.spacing(k);
    Grid::straddling(top, 2 * (top / dw).ceil() as usize)
}

/// ∫ γ♯(a, ω) conj(ẽ̂(ωa)) da per ω node, with ẽ = e / (2π)^{m/2}.
fn basis_slice(
    gamma_sharp: &[C64],
    e: &SampledFunction,
    a_grid: &Grid,
    omega_grid: &Grid,
) -> Result<Vec<C64>> {
    let m = a_grid.dim();
    let es = sheared_input_spectrum(e, a_grid, omega_grid)?;
    let nw = omega_grid.len();
    let aw = a_grid.weights();
    let norm = (2.0 * PI).powf(-(m as f64) / 2.0);
    let mut out = vec![ZERO; nw];
    for (ai, wa) in aw.iter().enumerate() {
        let row = ai * nw;
        for k in 0..nw {
            out[k] += gamma_sharp[row + k] * es[row + k].conj() * *wa;
        }
    }
    out.iter_mut().for_each(|v| *v *= norm);
    Ok(out)
}

fn check_basis_dim(basis: &SampledFunction, param_grid: &Grid) -> Result<()> {
    if basis.grid().dim() + 1 != param_grid.dim() {
        return Err(domain("basis functions must live on the input space of the parameter grid"));
    }
    Ok(())
}

/// γ = P[γ] + Σ c'ᵢ R[ẽᵢ; ρ'ᵢ], with ρ'ᵢ read off the ghost spectrum and
/// projected to σ⊥.
pub fn structure_decompose(
    op: &NetworkOperator,
    gamma: &ParamDistribution,
    basis_e: &BasisFamily,
    max_terms: usize,
) -> Result<StructureDecomposition> {
    let funcs = basis_e.functions()?;
    if max_terms > funcs.len() {
        return Err(domain(format!(
            "max_terms {max_terms} exceeds the basis size {}",
            funcs.len()
        )));
    }
    let (principal, ghost) = project(op, gamma, AdjointMode::PlainL2)?;
    let residual_norm = gamma.sub(&principal)?.sub(&ghost)?.norm();
    let mut out = StructureDecomposition {
        principal,
        ghost,
        coefficients: Vec::new(),
        ghost_ridgelets: Vec::new(),
        residual_norm,
        synthesis_residual: 0.0,
    };
    if gamma.max_abs() == 0.0 || out.ghost.max_abs() == 0.0 {
        return Ok(out);
    }
    let m = op.m();
    let pg = op.param_grid();
    let og = analysis_omega_grid(pg)?;
    let a_grid = pg.sub_grid(0..m);
    let gs = partial_sharp_b(&out.ghost, &og)?;
    let w = omega_weights(&og, m);
    let sig = op.sigma().sample_spectrum(&og)?;
    let sig_norm2: f64 = sig.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum();
    let nodes = og.nodes(0);
    let mut synth = ParamDistribution::zeros(pg.clone());
    for (i, e) in funcs.iter().take(max_terms).enumerate() {
        check_basis_dim(e, pg)?;
        let h = basis_slice(gs.values(), e, &a_grid, &og)?;
        let mut g: Vec<C64> = h
            .iter()
            .zip(&nodes)
            .map(|(v, o)| v.conj() * o.abs().powi(m as i32))
            .collect();
        if sig_norm2 > 0.0 {
            let proj: C64 = g.iter().zip(&sig).zip(&w).map(|((a, b), w)| a * b.conj() * *w).sum::<C64>() / sig_norm2;
            for (gv, sv) in g.iter_mut().zip(&sig) {
                *gv -= proj * sv;
            }
        }
        let c: f64 = g.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt();
        let rho = if c > 0.0 {
            let vals = g.iter().map(|v| v / c).collect();
            Profile1D::tabulated_spectrum(format!("ghost_rho{i}"), og.clone(), vals, Parity::None)?
        } else {
            Profile1D::zero()
        };
        if c > 0.0 {
            let et = e.scaled(C64::new((2.0 * PI).powf(-(m as f64) / 2.0), 0.0));
            synth = synth.axpy(C64::new(c, 0.0), &ridgelet_fourier(&et, &rho, pg)?)?;
        }
        out.coefficients.push(C64::new(c, 0.0));
        out.ghost_ridgelets.push(rho);
    }
    out.synthesis_residual = out.ghost.sub(&synth)?.norm() / out.ghost.norm();
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct ExpansionCoefficients {
    /// c[i][j] for basis_e index i and basis_ρ index j.
    pub c: Vec<Vec<C64>>,
    pub truncation: (usize, usize),
}

impl ExpansionCoefficients {
    /// Σ_{i<I, j<J} |c_ij|².
    pub fn partial_energy(&self, i_max: usize, j_max: usize) -> f64 {
        self.c
            .iter()
            .take(i_max)
            .flat_map(|row| row.iter().take(j_max))
            .map(|v| v.norm_sqr())
            .sum()
    }
}

/// c_ij = 2π ⟨γ, R[ẽᵢ; ρⱼ]⟩, evaluated spectrally as
/// (2π)^{−m/2} ∫∫ γ♯(a,ω) conj(êᵢ(ωa)) ρⱼ♯(ω) da dω.
pub fn density_expand(
    gamma: &ParamDistribution,
    basis_e: &BasisFamily,
    basis_rho: &BasisFamily,
    truncation: (usize, usize),
) -> Result<ExpansionCoefficients> {
    let funcs = basis_e.functions()?;
    let rhos = basis_rho.profiles()?;
    let (ni, nj) = truncation;
    if ni > funcs.len() || nj > rhos.len() {
        return Err(domain(format!(
            "truncation ({ni}, {nj}) exceeds basis sizes ({}, {})",
            funcs.len(),
            rhos.len()
        )));
    }
    let pg = gamma.grid();
    let m = pg.dim() - 1;
    if basis_rho.kind == BasisKind::HermiteL2 || basis_rho.m != m {
        return Err(domain("ρ basis must be an L²ₘ family for this input dimension"));
    }
    if gamma.max_abs() == 0.0 {
        return Ok(ExpansionCoefficients { c: vec![vec![ZERO; nj]; ni], truncation });
    }
    let og = analysis_omega_grid(pg)?;
    let a_grid = pg.sub_grid(0..m);
    let gs = partial_sharp_b(gamma, &og)?;
    let ow = og.axis_weights(0);
    let rs: Vec<Vec<C64>> = rhos.iter().take(nj).map(|p| p.sample_spectrum(&og)).collect::<Result<_>>()?;
    let mut c = Vec::with_capacity(ni);
    for e in funcs.iter().take(ni) {
        check_basis_dim(e, pg)?;
        let slice = basis_slice(gs.values(), e, &a_grid, &og)?;
        let row = rs
            .iter()
            .map(|r| slice.iter().zip(r).zip(&ow).map(|((s, r), w)| s * r * *w).sum())
            .collect();
        c.push(row);
    }
    Ok(ExpansionCoefficients { c, truncation })
}

/// Σ c_ij R[ẽᵢ; ρⱼ] on `param_grid`.
pub fn synthesize(
    coeffs: &ExpansionCoefficients,
    basis_e: &BasisFamily,
    basis_rho: &BasisFamily,
    param_grid: &Grid,
) -> Result<ParamDistribution> {
    let funcs = basis_e.functions()?;
    let rhos = basis_rho.profiles()?;
    let m = param_grid.dim() - 1;
    let scale = C64::new((2.0 * PI).powf(-(m as f64) / 2.0), 0.0);
    let mut out = ParamDistribution::zeros(param_grid.clone());
    for (row, e) in coeffs.c.iter().zip(funcs) {
        if row.iter().all(|v| *v == ZERO) {
            continue;
        }
        // R is conjugate-linear in ρ, so Σⱼ cᵢⱼ R[ẽ; ρⱼ] = R[ẽ; Σⱼ conj(cᵢⱼ) ρⱼ].
        let terms: Vec<(C64, &Profile1D)> = row.iter().map(|v| v.conj()).zip(rhos.iter()).collect();
        let combo = Profile1D::linear_combination("expansion_row", &terms)?;
        out = out.add(&ridgelet_fourier(&e.scaled(scale), &combo, param_grid)?)?;
    }
    Ok(out)
}

/// S*[f] + (γ_init − P[γ_init]).
pub fn lazy_solution(
    op: &NetworkOperator,
    f: &SampledFunction,
    gamma_init: &ParamDistribution,
) -> Result<ParamDistribution> {
    if !op.is_normalized() {
        return Err(domain("the lazy solution needs the normalised operator"));
    }
    let (_, ghost) = project(op, gamma_init, AdjointMode::PlainL2)?;
    let principal = ridgelet(f, op.sigma(), op.param_grid(), op.ridgelet_scheme)?;
    principal.add(&ghost)
}

/// Weighted-Sobolev projection normaliser ⟨⟨σ, σ*⟩⟩.
pub fn sigma_star_pairing(sigma: &Profile1D, orders: SobolevOrders, m: usize) -> Result<C64> {
    pairing(sigma, &build_sigma_star(sigma, orders, m)?, m)
}
