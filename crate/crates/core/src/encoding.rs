//! Storing a function series in the ghosts of one parameter distribution,
//! reading it back with mutated activations, and modulation maps.

use crate::error::{domain, Error, Result};
use crate::grid::{l2_inner, Grid, ParamDistribution, SampledFunction, C64, ZERO};
use crate::profiles::{gram_schmidt_l2m, rho0_derivative, BasisFamily, BasisKind, Profile1D};
use crate::transforms::{pairing, ridgelet_fourier, NetworkOperator};

/// Orthonormal L²ₘ family with ⟨⟨σ, ρ₀⟩⟩ = 1 and ⟨⟨σ, ρᵢ⟩⟩ = 0 for i ≥ 1.
#[derive(Clone, Debug)]
pub struct GhostCodebook {
    pub rho_family: BasisFamily,
    pub sigma: Profile1D,
}

impl GhostCodebook {
    /// Dawson derivatives of `orders` plus σ itself, orthonormalised in L²ₘ,
    /// then rotated by a Householder reflection that sends the pairing
    /// vector to the first axis. σ must have unit L²ₘ norm.
    pub fn build(sigma: &Profile1D, orders: &[usize], m: usize) -> Result<Self> {
        let mut cands: Vec<Profile1D> = orders.iter().map(|&k| rho0_derivative(k)).collect();
        cands.push(sigma.clone());
        let gs = gram_schmidt_l2m(&cands, m)?;
        let q = gs.profiles()?;
        let p: Vec<C64> = q.iter().map(|r| pairing(sigma, r, m)).collect::<Result<_>>()?;
        let norm = p.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(domain(format!(
                "codebook needs σ with unit L²ₘ norm; the pairing vector has norm {norm:.6}"
            )));
        }
        let w = householder_to_first_axis(&p);
        // ρᵢ = Σₖ conj(Wᵢₖ) qₖ, so ⟨⟨σ, ρᵢ⟩⟩ = (W p)ᵢ = δᵢ₀.
        let members = w
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let terms: Vec<(C64, &Profile1D)> = row.iter().map(|c| c.conj()).zip(q.iter()).collect();
                Profile1D::linear_combination(format!("ghost_code{i}"), &terms)
            })
            .collect::<Result<Vec<_>>>()?;
        let grid = gs.omega_grid().cloned().expect("L²ₘ family carries its grid");
        let rho_family = BasisFamily::from_profiles(BasisKind::GramSchmidtL2m, members, m, grid, 1e-6);
        let book = Self { rho_family, sigma: sigma.clone() };
        book.verify()?;
        Ok(book)
    }

    fn verify(&self) -> Result<()> {
        for (i, p) in self.pairings()?.iter().enumerate() {
            let want = if i == 0 { 1.0 } else { 0.0 };
            if (p - want).norm() > 1e-6 {
                return Err(Error::Accuracy(format!("codebook member {i} pairs with σ at {p}")));
            }
        }
        let r = self.rho_family.gram_residual()?;
        if r > 1e-6 {
            return Err(Error::Accuracy(format!("codebook Gram residual {r:.2e}")));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rho_family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho_family.is_empty()
    }

    pub fn members(&self) -> &[Profile1D] {
        self.rho_family.profiles().expect("codebook holds profiles")
    }

    pub fn member(&self, i: usize) -> Result<&Profile1D> {
        self.members()
            .get(i)
            .ok_or_else(|| domain(format!("codebook index {i} out of range 0..{}", self.len())))
    }

    /// ⟨⟨σ, ρᵢ⟩⟩ for every member.
    pub fn pairings(&self) -> Result<Vec<C64>> {
        let m = self.rho_family.m;
        self.members().iter().map(|r| pairing(&self.sigma, r, m)).collect()
    }
}

/// Unitary W with W p = e₀ for a unit vector p.
fn householder_to_first_axis(p: &[C64]) -> Vec<Vec<C64>> {
    let n = p.len();
    let phase = if p[0].norm() > 0.0 { p[0] / p[0].norm() } else { C64::new(1.0, 0.0) };
    // H p = α e₀ with α = −phase; W = conj(α) H.
    let alpha = -phase;
    let mut v = p.to_vec();
    v[0] -= alpha;
    let vv: f64 = v.iter().map(|x| x.norm_sqr()).sum();
    let mut w = vec![vec![ZERO; n]; n];
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { C64::new(1.0, 0.0) } else { ZERO };
            let h = if vv > 0.0 { id - v[i] * v[j].conj() * (2.0 / vv) } else { id };
            w[i][j] = alpha.conj() * h;
        }
    }
    w
}

/// γ_F = Σᵢ R[fᵢ; ρᵢ].
pub fn encode_series(
    codebook: &GhostCodebook,
    functions: &[SampledFunction],
    param_grid: &Grid,
) -> Result<ParamDistribution> {
    if functions.len() > codebook.len() {
        return Err(Error::Capacity { requested: functions.len(), available: codebook.len() });
    }
    let mut out = ParamDistribution::zeros(param_grid.clone());
    for (f, rho) in functions.iter().zip(codebook.members()) {
        if f.max_abs() == 0.0 {
            continue;
        }
        out = out.add(&ridgelet_fourier(f, rho, param_grid)?)?;
    }
    Ok(out)
}

/// How `readout_mutate` evaluates S with a mutated activation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReadoutPath {
    Direct,
    Spectral,
    /// Direct while parameter nodes × input nodes stays at or below the bound.
    Auto { crossover: usize },
}

impl Default for ReadoutPath {
    fn default() -> Self {
        ReadoutPath::Auto { crossover: 200_000 }
    }
}

/// S with activation ρᵢ in place of σ, on the default path.
pub fn readout_mutate(
    codebook: &GhostCodebook,
    gamma: &ParamDistribution,
    i: usize,
    input_grid: &Grid,
) -> Result<SampledFunction> {
    readout_mutate_with(codebook, gamma, i, input_grid, ReadoutPath::default())
}

pub fn readout_mutate_with(
    codebook: &GhostCodebook,
    gamma: &ParamDistribution,
    i: usize,
    input_grid: &Grid,
    path: ReadoutPath,
) -> Result<SampledFunction> {
    let rho = codebook.member(i)?;
    let op = NetworkOperator::new(
        codebook.sigma.clone(),
        gamma.grid().clone(),
        input_grid.clone(),
        crate::grid::QuadratureScheme::Trapezoid,
    )?;
    let direct = match path {
        ReadoutPath::Direct => true,
        ReadoutPath::Spectral => false,
        ReadoutPath::Auto { crossover } => gamma.grid().len() * input_grid.len() <= crossover,
    };
    if direct {
        op.forward_s_with(gamma, rho)
    } else {
        op.forward_s_spectral_with(gamma, rho)
    }
}

/// A = R[·; ρ₀] ∘ U ∘ Sᵢ: read ghost slot i, remap its e-coefficients by U,
/// write the result back as a principal component.
#[derive(Clone, Debug)]
pub struct ModulationMap {
    pub read_index: usize,
    pub write_profile: Profile1D,
    pub basis_e: BasisFamily,
    /// U[q][p]; `None` is the identity on the span of `basis_e`.
    pub coefficients: Option<Vec<Vec<C64>>>,
}

impl ModulationMap {
    pub fn new(codebook: &GhostCodebook, read_index: usize, basis_e: BasisFamily) -> Result<Self> {
        codebook.member(read_index)?;
        basis_e.functions()?;
        Ok(Self {
            read_index,
            write_profile: codebook.member(0)?.clone(),
            basis_e,
            coefficients: None,
        })
    }

    /// Single transition e_p → c·e_q.
    pub fn with_transition(mut self, p: usize, q: usize, c: C64) -> Result<Self> {
        let n = self.basis_e.len();
        if p >= n || q >= n {
            return Err(domain(format!("transition ({p} → {q}) outside basis of {n}")));
        }
        let mut u = vec![vec![ZERO; n]; n];
        u[q][p] = c;
        self.coefficients = Some(u);
        Ok(self)
    }
}

pub fn modulate(
    codebook: &GhostCodebook,
    map: &ModulationMap,
    gamma: &ParamDistribution,
    input_grid: &Grid,
) -> Result<ParamDistribution> {
    let funcs = map.basis_e.functions()?;
    let n = funcs.len();
    if let Some(u) = &map.coefficients {
        if u.len() != n || u.iter().any(|r| r.len() != n) {
            return Err(domain("modulation matrix does not match the basis size"));
        }
    }
    let read = readout_mutate(codebook, gamma, map.read_index, input_grid)?;
    let h: Vec<C64> = funcs
        .iter()
        .map(|e| l2_inner(&read.resample_like(e)?, e))
        .collect::<Result<_>>()?;
    let g_coef: Vec<C64> = match &map.coefficients {
        None => h,
        Some(u) => u.iter().map(|row| row.iter().zip(&h).map(|(a, b)| a * b).sum()).collect(),
    };
    let mut g = SampledFunction::zeros(funcs[0].grid().clone());
    for (c, e) in g_coef.iter().zip(funcs) {
        if *c != ZERO {
            g = g.axpy(*c, e)?;
        }
    }
    if g.max_abs() == 0.0 {
        return Ok(ParamDistribution::zeros(gamma.grid().clone()));
    }
    ridgelet_fourier(&g, &map.write_profile, gamma.grid())
}

impl SampledFunction {
    /// Same samples when the grids coincide, otherwise linear interpolation
    /// onto `other`'s grid.
    pub fn resample_like(&self, other: &SampledFunction) -> Result<SampledFunction> {
        if self.grid() == other.grid() {
            return Ok(self.clone());
        }
        SampledFunction::from_fn(other.grid().clone(), |x| self.grid().interpolate_linear(self.values(), x))
    }
}
