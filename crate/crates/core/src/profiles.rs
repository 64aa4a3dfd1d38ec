//! Activation and ridgelet profiles, the Dawson function, Hermite functions,
//! and Gram–Schmidt orthonormalisation in L²ₘ.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::fourier::{flat, SobolevOrders};
use crate::grid::{omega_weights, weighted_omega_inner_samples, Grid, SampledFunction, C64, ZERO};

pub type Eval = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
    None,
}

impl Parity {
    pub fn times(self, other: Parity) -> Parity {
        match (self, other) {
            (Parity::None, _) | (_, Parity::None) => Parity::None,
            (a, b) if a == b => Parity::Even,
            _ => Parity::Odd,
        }
    }

    fn sign(self) -> Option<f64> {
        match self {
            Parity::Even => Some(1.0),
            Parity::Odd => Some(-1.0),
            Parity::None => None,
        }
    }
}

/// A 1-D function usable as activation σ or ridgelet ρ.
#[derive(Clone)]
pub struct Profile1D {
    pub name: String,
    real_eval: Option<Eval>,
    spectral_eval: Option<Eval>,
    pub parity: Parity,
    pub orders: Option<SobolevOrders>,
    pub notes: String,
    /// The spectrum is only a principal value at ω = 0.
    singular_at_zero: bool,
    /// Grid the spectrum was tabulated on; pairings should use it.
    native_omega: Option<Grid>,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Profile1D")
            .field("name", &self.name)
            .field("real", &self.real_eval.is_some())
            .field("spectral", &self.spectral_eval.is_some())
            .field("parity", &self.parity)
            .field("orders", &self.orders)
            .finish()
    }
}

impl Profile1D {
    pub fn new(name: impl Into<String>, real: Option<Eval>, spectral: Option<Eval>, parity: Parity) -> Result<Self> {
        if real.is_none() && spectral.is_none() {
            return Err(domain("a profile needs a real or a spectral evaluator"));
        }
        Ok(Self {
            name: name.into(),
            real_eval: real,
            spectral_eval: spectral,
            parity,
            orders: None,
            notes: String::new(),
            singular_at_zero: false,
            native_omega: None,
        })
    }

    /// Identically zero, with both evaluators.
    pub fn zero() -> Self {
        Self::new("zero", Some(Arc::new(|_| ZERO)), Some(Arc::new(|_| ZERO)), Parity::Even)
            .expect("zero profile has evaluators")
    }

    pub fn with_orders(mut self, orders: SobolevOrders) -> Self {
        self.orders = Some(orders);
        self
    }

    pub fn with_notes(mut self, notes: impl Into<String>) -> Self {
        self.notes = notes.into();
        self
    }

    pub fn has_real(&self) -> bool {
        self.real_eval.is_some()
    }

    pub fn has_spectral(&self) -> bool {
        self.spectral_eval.is_some()
    }

    pub fn singular_at_zero(&self) -> bool {
        self.singular_at_zero
    }

    pub fn native_omega(&self) -> Option<&Grid> {
        self.native_omega.as_ref()
    }

    pub fn real(&self, b: f64) -> Result<C64> {
        match &self.real_eval {
            Some(f) => Ok(f(b)),
            None => Err(self.unsupported("real-domain evaluation")),
        }
    }

    pub fn spectrum(&self, omega: f64) -> Result<C64> {
        match &self.spectral_eval {
            Some(_) if self.singular_at_zero && omega == 0.0 => Err(Error::Singular(format!(
                "{} spectrum is a principal value at ω = 0; use a straddling grid",
                self.name
            ))),
            Some(f) => Ok(f(omega)),
            None => Err(self.unsupported("spectral evaluation")),
        }
    }

    pub(crate) fn real_fn(&self) -> Result<&Eval> {
        self.real_eval.as_ref().ok_or_else(|| self.unsupported("real-domain evaluation"))
    }

    pub(crate) fn spectral_fn(&self) -> Result<&Eval> {
        self.spectral_eval.as_ref().ok_or_else(|| self.unsupported("spectral evaluation"))
    }

    pub(crate) fn unsupported(&self, what: &str) -> Error {
        Error::UnsupportedProfile { profile: self.name.clone(), what: what.into() }
    }

    pub fn sample_spectrum(&self, grid: &Grid) -> Result<Vec<C64>> {
        grid.nodes(0).into_iter().map(|w| self.spectrum(w)).collect()
    }

    pub fn sample_real(&self, grid: &Grid) -> Result<Vec<C64>> {
        grid.nodes(0).into_iter().map(|b| self.real(b)).collect()
    }

    /// c · self.
    pub fn scaled(&self, c: C64) -> Profile1D {
        let mut out = self.clone();
        out.real_eval = self.real_eval.clone().map(|f| Arc::new(move |b| c * f(b)) as Eval);
        out.spectral_eval = self.spectral_eval.clone().map(|f| Arc::new(move |w| c * f(w)) as Eval);
        if c == ZERO {
            out.singular_at_zero = false;
        }
        out
    }

    /// Σ cₖ pₖ. Each evaluator exists only if every term provides it.
    pub fn linear_combination(name: impl Into<String>, terms: &[(C64, &Profile1D)]) -> Result<Profile1D> {
        if terms.is_empty() {
            return Ok(Profile1D::zero());
        }
        let reals: Option<Vec<(C64, Eval)>> =
            terms.iter().map(|(c, p)| p.real_eval.clone().map(|f| (*c, f))).collect();
        let specs: Option<Vec<(C64, Eval)>> =
            terms.iter().map(|(c, p)| p.spectral_eval.clone().map(|f| (*c, f))).collect();
        let combine = |parts: Vec<(C64, Eval)>| -> Eval {
            Arc::new(move |x| parts.iter().fold(ZERO, |acc, (c, f)| acc + c * f(x)))
        };
        let live: Vec<&(C64, &Profile1D)> = terms.iter().filter(|(c, _)| *c != ZERO).collect();
        let parity = live
            .iter()
            .map(|(_, p)| p.parity)
            .reduce(|a, b| if a == b { a } else { Parity::None })
            .unwrap_or(Parity::Even);
        let mut out = Profile1D::new(name, reals.map(combine), specs.map(combine), parity)?;
        out.singular_at_zero = live.iter().any(|(_, p)| p.singular_at_zero);
        let grids: Vec<&Grid> = live.iter().filter_map(|(_, p)| p.native_omega.as_ref()).collect();
        if let Some(first) = grids.first() {
            if grids.iter().all(|g| g == first) {
                out.native_omega = Some((*first).clone());
            }
        }
        Ok(out)
    }

    /// Spectrum given by samples on `grid`, cubic-interpolated, zero outside.
    pub fn tabulated_spectrum(name: impl Into<String>, grid: Grid, values: Vec<C64>, parity: Parity) -> Result<Profile1D> {
        SampledFunction::new(grid.clone(), values.clone())?;
        let g = grid.clone();
        let eval: Eval = Arc::new(move |w| g.interpolate_cubic(&values, &[w]));
        let mut out = Profile1D::new(name, None, Some(eval), parity)?;
        out.native_omega = Some(grid);
        Ok(out)
    }

    /// Largest deviation from the declared parity, relative to the peak.
    pub fn parity_defect(&self) -> Result<f64> {
        let sign = match self.parity.sign() {
            Some(s) => s,
            None => return Ok(0.0),
        };
        let probe = |f: &Eval, xs: &[f64]| {
            let peak = xs.iter().fold(0.0f64, |m, &x| m.max(f(x).norm()));
            let dev = xs.iter().fold(0.0f64, |m, &x| m.max((f(-x) - sign * f(x)).norm()));
            if peak == 0.0 { 0.0 } else { dev / peak }
        };
        let xs: Vec<f64> = (1..=400).map(|i| 0.0137 + i as f64 * 0.025).collect();
        let mut worst = 0.0f64;
        if let Some(f) = &self.real_eval {
            worst = worst.max(probe(f, &xs));
        }
        if let Some(f) = &self.spectral_eval {
            worst = worst.max(probe(f, &xs));
        }
        Ok(worst)
    }

    /// Inverse-transforms the spectrum and compares with the real evaluator on
    /// [−10, 10]. Returns the largest deviation relative to the real peak.
    pub fn round_trip_error(&self) -> Result<f64> {
        let real = self.real_fn()?;
        let spec = self.spectral_fn()?;
        let width = spectral_extent(spec.as_ref());
        let og = Grid::straddling(width, 2 * (width / 0.0006).ceil() as usize)?;
        let samples = self.sample_spectrum(&og)?;
        let bg = Grid::line(-10.0, 10.0, 201)?;
        let back = flat(&og, &samples, &bg)?;
        let mut peak = 0.0f64;
        let mut dev = 0.0f64;
        for (b, v) in bg.nodes(0).iter().zip(&back) {
            let r = real(*b);
            peak = peak.max(r.norm());
            dev = dev.max((v - r).norm());
        }
        Ok(if peak == 0.0 { dev } else { dev / peak })
    }
}

/// Smallest half-width beyond which the spectrum stays below 1e-15 of its peak.
fn spectral_extent(spec: &(dyn Fn(f64) -> C64 + Send + Sync)) -> f64 {
    let probe: Vec<(f64, f64)> = (1..=800).map(|i| {
        let w = i as f64 * 0.05 - 0.025;
        (w, spec(w).norm().max(spec(-w).norm()))
    }).collect();
    let peak = probe.iter().fold(0.0f64, |m, p| m.max(p.1));
    let last = probe.iter().rposition(|p| p.1 > 1e-15 * peak).unwrap_or(0);
    (probe[last].0 + 1.0).clamp(4.0, 40.0)
}

// ---------------------------------------------------------------- Dawson

/// F(x) = e^{−x²} ∫₀ˣ e^{t²} dt.
pub fn dawson(x: f64) -> f64 {
    let a = x.abs();
    let v = if a < 4.0 { dawson_series(a) } else { dawson_cf(a) };
    v.copysign(x)
}

/// Positive-term series e^{−x²} Σ x^{2n+1} / (n! (2n+1)).
fn dawson_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut t = x;
    let mut s = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        t *= x2 / n;
        let term = t / (2.0 * n + 1.0);
        s += term;
        if term <= 1e-17 * s {
            break;
        }
    }
    (-x2).exp() * s
}

/// Continued fraction x / (1 + 2x² − 4x²/(3 + 2x² − 8x²/(5 + 2x² − …))), x ≥ 4.
fn dawson_cf(x: f64) -> f64 {
    let x2 = x * x;
    let depth = if x < 6.0 { 64 } else if x < 10.0 { 40 } else { 16 };
    let mut t = 0.0;
    for k in (1..=depth).rev() {
        let k = k as f64;
        t = 4.0 * k * x2 / ((2.0 * k + 1.0) + 2.0 * x2 - t);
    }
    x / (1.0 + 2.0 * x2 - t)
}

/// [F, F′, …, F⁽ⁿ⁾] at x.
pub fn dawson_derivatives(x: f64, n: usize) -> Vec<f64> {
    let a = x.abs();
    let mut d = if a < 6.0 {
        let mut d = Vec::with_capacity(n + 1);
        d.push(dawson(a));
        if n >= 1 {
            d.push(1.0 - 2.0 * a * d[0]);
        }
        for k in 1..n {
            let next = -2.0 * a * d[k] - 2.0 * k as f64 * d[k - 1];
            d.push(next);
        }
        d
    } else {
        dawson_asymptotic_derivatives(a, n)
    };
    // F is odd, so F⁽ᵏ⁾(−x) = (−1)^{k+1} F⁽ᵏ⁾(x).
    if x < 0.0 {
        for (k, v) in d.iter_mut().enumerate() {
            if k % 2 == 0 {
                *v = -*v;
            }
        }
    }
    d
}

/// Termwise derivatives of F(x) ~ Σ (2j−1)!! / (2^{j+1} x^{2j+1}), optimally truncated.
fn dawson_asymptotic_derivatives(x: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(dawson_cf(x));
    for k in 1..=n {
        let mut sum = 0.0;
        let mut a = 0.5; // (2j−1)!!/2^{j+1}
        let mut prev = f64::INFINITY;
        for j in 0..60 {
            let p = (2 * j + 1) as f64;
            let mut fall = 1.0;
            for r in 0..k {
                fall *= p + r as f64;
            }
            let term = a * fall / x.powf(p + k as f64);
            if term > prev {
                break;
            }
            sum += term;
            prev = term;
            if term < 1e-18 * sum.abs() {
                break;
            }
            a *= (2 * j + 1) as f64 / 2.0;
        }
        out.push(if k % 2 == 1 { -sum } else { sum });
    }
    out
}

// ---------------------------------------------------------------- catalogue

/// tanh with spectrum −iπ / sinh(πω/2), a principal value at 0.
pub fn tanh_profile() -> Profile1D {
    let mut p = Profile1D::new(
        "tanh",
        Some(Arc::new(|b: f64| C64::new(b.tanh(), 0.0))),
        Some(Arc::new(|w: f64| C64::new(0.0, -PI / (PI * w / 2.0).sinh()))),
        Parity::Odd,
    )
    .expect("tanh has evaluators")
    .with_notes("spectrum defined for ω ≠ 0 only");
    p.singular_at_zero = true;
    p
}

/// e^{−b²/2}, spectrum √(2π) e^{−ω²/2}.
pub fn gaussian() -> Profile1D {
    gaussian_derivative(0)
}

/// n-th derivative of e^{−b²/2}: (−1)ⁿ Heₙ(b) e^{−b²/2}, spectrum (iω)ⁿ √(2π) e^{−ω²/2}.
pub fn gaussian_derivative(n: usize) -> Profile1D {
    let real: Eval = Arc::new(move |b: f64| {
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        C64::new(sign * hermite_he(n, b) * (-b * b / 2.0).exp(), 0.0)
    });
    let spectral: Eval = Arc::new(move |w: f64| (I * w).powu(n as u32) * ((2.0 * PI).sqrt() * (-w * w / 2.0).exp()));
    let parity = if n.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
    let name = if n == 0 { "gaussian".to_string() } else { format!("gaussian_d{n}") };
    Profile1D::new(name, Some(real), Some(spectral), parity)
        .expect("gaussian has evaluators")
        .with_orders(SobolevOrders::L2)
}

/// Probabilists' Hermite polynomial Heₙ.
fn hermite_he(n: usize, x: f64) -> f64 {
    let (mut a, mut b) = (1.0, x);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = x * b - k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// b ↦ max(b, 0); real domain only.
pub fn relu() -> Profile1D {
    Profile1D::new("relu", Some(Arc::new(|b: f64| C64::new(b.max(0.0), 0.0))), None, Parity::None)
        .expect("relu has a real evaluator")
        .with_orders(SobolevOrders { t: 2.0, s: 0.0 })
        .with_notes("spectrum is distributional; pairings are rejected")
}

/// Default straddling ω grid for pairings: [−12, 12], 6000 nodes.
pub fn default_omega_grid() -> Grid {
    Grid::straddling(12.0, 6000).expect("valid default grid")
}

/// Real-domain factor of ρ₀: ρ₀(b) = (i√2/π) F(b/√2).
pub const RHO0_REAL_FACTOR: f64 = SQRT_2 / PI;

/// Unnormalised k-th derivative of ρ₀; spectrum (iω)^k sign(ω) e^{−ω²/2}.
pub fn rho0_derivative(k: usize) -> Profile1D {
    let real: Eval = Arc::new(move |b: f64| {
        let d = dawson_derivatives(b / SQRT_2, k);
        I * (RHO0_REAL_FACTOR * 2f64.powf(-(k as f64) / 2.0) * d[k])
    });
    let spectral: Eval = Arc::new(move |w: f64| {
        if w == 0.0 {
            return ZERO;
        }
        (I * w).powu(k as u32) * (w.signum() * (-w * w / 2.0).exp())
    });
    let parity = if k.is_multiple_of(2) { Parity::Odd } else { Parity::Even };
    Profile1D::new(format!("rho0_d{k}"), Some(real), Some(spectral), parity)
        .expect("dawson profile has evaluators")
        .with_notes("rho0(b) = (i*sqrt(2)/pi) F(b/sqrt(2)), F the Dawson function")
}

pub(crate) fn gamma_integer(k: usize) -> f64 {
    (1..k).map(|j| j as f64).product()
}

/// ρ₀ … ρ_{max_k}. ρ_k = c_k ρ₀⁽ᵏ⁾ with ⟨⟨tanh, ρ_k⟩⟩ = 1 where that pairing is
/// nonzero (even k ≥ 2) and ‖ρ_k‖_{L²₁} = 1 otherwise (odd k). c_k is chosen so ρ_k
/// is real; ρ₀ keeps c₀ = 1 (it is in neither class).
pub fn make_rho_family(max_k: usize) -> Result<Vec<Profile1D>> {
    if max_k > 8 {
        return Err(domain(format!("max_k = {max_k} exceeds the series accuracy budget of 8")));
    }
    let sigma = tanh_profile();
    let og = default_omega_grid();
    let sig = sigma.sample_spectrum(&og)?;
    let mut out = Vec::with_capacity(max_k + 1);
    for k in 0..=max_k {
        let raw = rho0_derivative(k);
        let (c, note) = if k == 0 {
            (C64::new(1.0, 0.0), "c_0 = 1".to_string())
        } else if k % 2 == 0 {
            let p = weighted_omega_inner_samples(&og, &sig, &raw.sample_spectrum(&og)?, 1)?;
            let c = C64::new(1.0, 0.0) / p.conj();
            (c, format!("c_{k} = {c:.12} sets <<tanh, rho_{k}>> = 1"))
        } else {
            let c = -I / gamma_integer(k).sqrt();
            (c, format!("c_{k} = {c:.12} sets the L2_1 norm to 1"))
        };
        let mut p = raw.scaled(c);
        p.name = format!("rho{k}");
        p.notes = format!("{}; {note}", raw.notes);
        out.push(p);
    }
    Ok(out)
}

// ---------------------------------------------------------------- bases

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BasisKind {
    HermiteL2,
    DawsonDerivativeL2m,
    GramSchmidtL2m,
}

/// Ordered orthonormal system: sampled functions in L², or profiles in L²ₘ.
#[derive(Clone, Debug)]
pub struct BasisFamily {
    pub kind: BasisKind,
    functions: Vec<SampledFunction>,
    profiles: Vec<Profile1D>,
    pub gram_tolerance: f64,
    /// Input dimension m the L²ₘ weight refers to.
    pub m: usize,
    omega_grid: Option<Grid>,
}

impl BasisFamily {
    pub fn len(&self) -> usize {
        self.functions.len().max(self.profiles.len())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn functions(&self) -> Result<&[SampledFunction]> {
        if self.kind != BasisKind::HermiteL2 {
            return Err(domain("this basis holds L²ₘ profiles, not sampled functions"));
        }
        Ok(&self.functions)
    }

    pub fn profiles(&self) -> Result<&[Profile1D]> {
        if self.kind == BasisKind::HermiteL2 {
            return Err(domain("this basis holds sampled functions, not profiles"));
        }
        Ok(&self.profiles)
    }

    /// ω grid the L²ₘ orthonormality was established on.
    pub fn omega_grid(&self) -> Option<&Grid> {
        self.omega_grid.as_ref()
    }

    pub(crate) fn from_profiles(kind: BasisKind, profiles: Vec<Profile1D>, m: usize, grid: Grid, tol: f64) -> Self {
        Self { kind, functions: Vec::new(), profiles, gram_tolerance: tol, m, omega_grid: Some(grid) }
    }

    /// Largest deviation of the Gram matrix from the identity.
    pub fn gram_residual(&self) -> Result<f64> {
        let mut worst = 0.0f64;
        if self.kind == BasisKind::HermiteL2 {
            for (i, u) in self.functions.iter().enumerate() {
                for (j, v) in self.functions.iter().enumerate() {
                    let g = crate::grid::l2_inner(u, v)?;
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - want).norm());
                }
            }
        } else {
            let og = self.omega_grid.clone().unwrap_or_else(default_omega_grid);
            let samples: Vec<Vec<C64>> = self.profiles.iter().map(|p| p.sample_spectrum(&og)).collect::<Result<_>>()?;
            for (i, u) in samples.iter().enumerate() {
                for (j, v) in samples.iter().enumerate() {
                    let g = weighted_omega_inner_samples(&og, u, v, self.m)?;
                    let want = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((g - want).norm());
                }
            }
        }
        Ok(worst)
    }
}

/// Normalised Hermite functions h_k on `x`, k < count.
pub fn hermite_functions(count: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(count);
    if count == 0 {
        return h;
    }
    h.push(PI.powf(-0.25) * (-x * x / 2.0).exp());
    if count > 1 {
        h.push(SQRT_2 * x * h[0]);
    }
    for k in 2..count {
        let kf = k as f64;
        let next = (2.0 / kf).sqrt() * x * h[k - 1] - ((kf - 1.0) / kf).sqrt() * h[k - 2];
        h.push(next);
    }
    h
}

/// Multi-indices of total degree ascending, lexicographic within a degree.
fn multi_indices(dim: usize, count: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut degree = 0;
    while out.len() < count {
        let mut level = Vec::new();
        fill_level(dim, degree, &mut vec![], &mut level);
        level.sort_by(|a, b| b.cmp(a));
        for idx in level {
            if out.len() < count {
                out.push(idx);
            }
        }
        degree += 1;
    }
    out
}

fn fill_level(dim: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if prefix.len() + 1 == dim {
        let mut v = prefix.clone();
        v.push(remaining);
        out.push(v);
        return;
    }
    for d in 0..=remaining {
        prefix.push(d);
        fill_level(dim, remaining - d, prefix, out);
        prefix.pop();
    }
}

/// First `count` (tensor) Hermite functions sampled on `grid`.
pub fn hermite_basis(count: usize, grid: &Grid) -> Result<BasisFamily> {
    let dim = grid.dim();
    let indices = multi_indices(dim, count);
    let max_deg = indices.iter().map(|i| i.iter().max().copied().unwrap_or(0)).max().unwrap_or(0);
    let mut functions = Vec::with_capacity(count);
    for idx in &indices {
        let f = SampledFunction::from_fn(grid.clone(), |p| {
            let mut v = 1.0;
            for (k, &d) in idx.iter().enumerate() {
                v *= hermite_functions(max_deg + 1, p[k])[d];
            }
            C64::new(v, 0.0)
        })?;
        functions.push(f);
    }
    let basis = BasisFamily {
        kind: BasisKind::HermiteL2,
        functions,
        profiles: Vec::new(),
        gram_tolerance: 1e-6,
        m: dim,
        omega_grid: None,
    };
    let r = basis.gram_residual()?;
    if r > basis.gram_tolerance {
        return Err(Error::Accuracy(format!(
            "Hermite basis of {count} members is not orthonormal on this grid (residual {r:.2e}); widen or refine it"
        )));
    }
    Ok(basis)
}

/// Modified Gram–Schmidt in L²ₘ on the default ω grid.
pub fn gram_schmidt_l2m(candidates: &[Profile1D], m: usize) -> Result<BasisFamily> {
    gram_schmidt_l2m_on(candidates, m, &default_omega_grid())
}

/// Modified Gram–Schmidt in L²ₘ on `omega_grid`. Members are exact linear
/// combinations of the candidates, so both evaluators carry over.
pub fn gram_schmidt_l2m_on(candidates: &[Profile1D], m: usize, omega_grid: &Grid) -> Result<BasisFamily> {
    let n = candidates.len();
    let weights = omega_weights(omega_grid, m);
    let inner = |u: &[C64], v: &[C64]| -> C64 {
        u.iter().zip(v).zip(&weights).fold(ZERO, |acc, ((a, b), w)| acc + a * b.conj() * *w)
    };
    let mut vecs: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut coeffs: Vec<Vec<C64>> = Vec::with_capacity(n);
    for (j, cand) in candidates.iter().enumerate() {
        let mut v = cand.sample_spectrum(omega_grid)?;
        check_l2m_integrable(cand, &v, &weights)?;
        let cand_norm = inner(&v, &v).re.sqrt();
        let mut c = vec![ZERO; n];
        c[j] = C64::new(1.0, 0.0);
        for _pass in 0..2 {
            for (q, cq) in vecs.iter().zip(&coeffs) {
                let r = inner(&v, q);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= r * qi;
                }
                for (ci, cqi) in c.iter_mut().zip(cq) {
                    *ci -= r * cqi;
                }
            }
        }
        let norm = inner(&v, &v).re.sqrt();
        if norm < 1e-10 * cand_norm.max(1.0) {
            return Err(Error::Rank { index: j, residual: norm });
        }
        v.iter_mut().for_each(|x| *x /= norm);
        c.iter_mut().for_each(|x| *x /= norm);
        vecs.push(v);
        coeffs.push(c);
    }
    let profiles = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| {
            let terms: Vec<(C64, &Profile1D)> = c.iter().copied().zip(candidates.iter()).collect();
            let mut p = Profile1D::linear_combination(format!("gs{j}"), &terms)?;
            p.native_omega = None;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisFamily::from_profiles(BasisKind::GramSchmidtL2m, profiles, m, omega_grid.clone(), 1e-6))
}

/// Rejects spectra whose |ω|⁻ᵐ-weighted mass piles up at the innermost nodes.
pub(crate) fn check_l2m_integrable(p: &Profile1D, samples: &[C64], weights: &[f64]) -> Result<()> {
    let total: f64 = samples.iter().zip(weights).map(|(v, w)| v.norm_sqr() * w).sum();
    if total == 0.0 {
        return Ok(());
    }
    let mid = samples.len() / 2;
    let inner: f64 = (mid - 1..=mid).map(|i| samples[i].norm_sqr() * weights[i]).sum();
    if inner > 1e-3 * total {
        return Err(domain(format!(
            "{} is not in L²ₘ: its weighted spectrum concentrates at ω = 0",
            p.name
        )));
    }
    Ok(())
}

/// Dawson-derivative candidates ρ₀⁽ᵏ⁾ for the given orders, orthonormalised in L²ₘ.
pub fn dawson_basis(orders: &[usize], m: usize) -> Result<BasisFamily> {
    let cands: Vec<Profile1D> = orders.iter().map(|&k| rho0_derivative(k)).collect();
    let mut b = gram_schmidt_l2m(&cands, m)?;
    b.kind = BasisKind::DawsonDerivativeL2m;
    Ok(b)
}

/// Samples the spectra of a profile family on `grid`.
pub fn sample_family(profiles: &[Profile1D], grid: &Grid) -> Result<Vec<Vec<C64>>> {
    profiles.iter().map(|p| p.sample_spectrum(grid)).collect()
}
