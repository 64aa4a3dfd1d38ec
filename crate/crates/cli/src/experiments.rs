//! One runner per subcommand. Each fills a `Run` with metrics, checks and
//! artifacts; the caller writes the report.

use rand::Rng;
use serde::Serialize;

use ghostlet_core::encoding::{encode_series, modulate, readout_mutate_with, GhostCodebook, ModulationMap, ReadoutPath};
use ghostlet_core::finite::{
    finite_ridgelet_coeffs, generalization_bound, histogram_distance, layer_norms, mollify, sample_parameters, smooth,
    DeltaShape, LayerSpec, NascentDelta, NormChoice, SamplingScheme,
};
use ghostlet_core::grid::{seeded_rng, weighted_omega_inner_samples};
use ghostlet_core::nullspace::{admissibility, lazy_solution, project, structure_decompose, AdmissibilityReport, PairingMethod};
use ghostlet_core::profiles::{dawson_basis, hermite_basis, Profile1D};
use ghostlet_core::transforms::{l2m_norm, ridgelet, ridgelet_fourier, AdjointMode, NetworkOperator};
use ghostlet_core::{Grid, ParamDistribution, QuadratureScheme, SampledFunction, C64};

use crate::config::{
    BumpSpec, DeltaShapeConfig, DistributionSpec, ExperimentConfig, ReadoutConfig, SamplingConfig, TransformPath,
};
use crate::error::CliError;
use crate::inputs::{build_distribution, build_function};
use crate::report::Run;

pub(crate) fn grids(cfg: &ExperimentConfig) -> Result<(Grid, Grid), CliError> {
    let ig = cfg.grids.input.build()?;
    let pg = cfg.grids.param.build()?;
    check_dims(&ig, &pg)?;
    Ok((ig, pg))
}

fn check_dims(ig: &Grid, pg: &Grid) -> Result<(), CliError> {
    if pg.dim() != ig.dim() + 1 {
        return Err(CliError::Usage(format!(
            "parameter grid has {} axes; an input grid of dimension {} needs {}",
            pg.dim(),
            ig.dim(),
            ig.dim() + 1
        )));
    }
    Ok(())
}

/// ‖u − v‖ / ‖v‖.
pub(crate) fn relative_error(u: &SampledFunction, v: &SampledFunction) -> Result<f64, CliError> {
    Ok(u.sub(v)?.norm() / v.norm())
}

fn header<'a>(prefix: &'a [&'a str], dim: usize, names: &[&'a str]) -> Vec<String> {
    let mut h: Vec<String> = (0..dim).map(|k| format!("{}{k}", prefix[0])).collect();
    h.extend(names.iter().map(|s| s.to_string()));
    h
}

/// Rows `coords..., re, im` per grid node, row-major.
pub(crate) fn field_rows(grid: &Grid, values: &[C64]) -> Vec<Vec<f64>> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let mut row = grid.point(i);
            row.push(v.re);
            row.push(v.im);
            row
        })
        .collect()
}

/// Parameter field as CSV plus, on a 2-D grid, real and imaginary heatmaps.
pub(crate) fn write_field(run: &mut Run, stem: &str, field: &ParamDistribution) -> Result<(), CliError> {
    let g = field.grid();
    let m = g.dim() - 1;
    let mut h: Vec<String> = (0..m).map(|k| format!("a{k}")).collect();
    h.extend(["b", "re", "im"].map(String::from));
    let h: Vec<&str> = h.iter().map(String::as_str).collect();
    run.csv(&format!("{stem}.csv"), &h, &field_rows(g, field.values()))?;
    if g.dim() == 2 {
        let (rows, cols) = (g.counts()[0], g.counts()[1]);
        let re: Vec<f64> = field.values().iter().map(|v| v.re).collect();
        let im: Vec<f64> = field.values().iter().map(|v| v.im).collect();
        run.pgm(&format!("{stem}_re.pgm"), rows, cols, &re)?;
        run.pgm(&format!("{stem}_im.pgm"), rows, cols, &im)?;
    }
    Ok(())
}

fn write_curves(run: &mut Run, name: &str, grid: &Grid, cols: &[(&str, &SampledFunction)]) -> Result<(), CliError> {
    let mut h = header(&["x"], grid.dim(), &[]);
    for (c, _) in cols {
        h.push(format!("{c}_re"));
        h.push(format!("{c}_im"));
    }
    let h: Vec<&str> = h.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = (0..grid.len())
        .map(|i| {
            let mut row = grid.point(i);
            for (_, f) in cols {
                row.push(f.values()[i].re);
                row.push(f.values()[i].im);
            }
            row
        })
        .collect();
    run.csv(name, &h, &rows)?;
    Ok(())
}

#[derive(Serialize)]
pub(crate) struct AdmissibilityRow {
    pub profile: String,
    pub pairing_re: f64,
    pub pairing_im: f64,
    pub magnitude: f64,
    pub error_estimate: f64,
    pub quadrature_scale: f64,
    pub zero_threshold: f64,
    pub parity_forced_zero: bool,
    pub method: &'static str,
    pub admissible: bool,
}

impl AdmissibilityRow {
    pub(crate) fn new(profile: &str, r: &AdmissibilityReport) -> Self {
        Self {
            profile: profile.to_string(),
            pairing_re: r.pairing.re,
            pairing_im: r.pairing.im,
            magnitude: r.pairing.norm(),
            error_estimate: r.error_estimate,
            quadrature_scale: r.quadrature_scale,
            zero_threshold: r.zero_threshold(),
            parity_forced_zero: r.parity_forced_zero,
            method: match r.method {
                PairingMethod::AnalyticSpectra => "analytic_spectra",
                PairingMethod::GridSpectra => "grid_spectra",
            },
            admissible: r.is_admissible(),
        }
    }
}

/// Profile name, suffixed with its list position when already taken.
fn unique_label(used: &mut Vec<String>, name: &str, idx: usize) -> String {
    let label = if used.iter().any(|u| u == name) { format!("{name}_{idx}") } else { name.to_string() };
    used.push(label.clone());
    label
}

pub fn spectrum(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let sc = &cfg.spectrum;
    let (ig, pg) = grids(cfg)?;
    let m = ig.dim();
    let f = build_function(&sc.function, &ig)?;
    let scheme = cfg.ridgelet_quadrature.scheme(cfg.seed);
    let mut used = Vec::new();
    for (idx, spec) in sc.rhos.iter().enumerate() {
        let rho = spec.build()?;
        let name = unique_label(&mut used, &rho.name, idx);
        let fourier = ridgelet_fourier(&f, &rho, &pg)?;
        let field = if rho.has_real() {
            let direct = ridgelet(&f, &rho, &pg, scheme)?;
            let gap = direct.sub(&fourier)?.norm() / direct.norm();
            if scheme == QuadratureScheme::Trapezoid {
                run.check_le(&format!("{name}.slice_gap"), gap, sc.slice_tolerance)?;
            } else {
                run.metric(format!("{name}.slice_gap"), gap)?;
            }
            match sc.path {
                TransformPath::Direct => direct,
                TransformPath::Fourier => fourier,
            }
        } else {
            fourier
        };
        // ‖R[f;ρ]‖² = ‖f‖² ‖ρ‖²_{L²ₘ} up to parameter-box truncation.
        let n = l2m_norm(&rho, m)?;
        run.metric(format!("{name}.norm_ratio"), field.norm().powi(2) / (f.norm().powi(2) * n * n))?;
        run.metric(format!("{name}.max_abs"), field.max_abs())?;
        write_field(run, &format!("spectrum_{name}"), &field)?;
    }
    Ok(())
}

pub fn reconstruct(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let rc = &cfg.reconstruct;
    let (ig, pg) = grids(cfg)?;
    let m = ig.dim();
    let op = NetworkOperator::new(cfg.profiles.sigma.build()?, pg, ig.clone(), cfg.quadrature.scheme(cfg.seed))?
        .with_ridgelet_scheme(cfg.ridgelet_quadrature.scheme(cfg.seed));
    let f = build_function(&rc.function, &ig)?;
    let mut rho = cfg.profiles.rho.build()?;
    let adm = admissibility(op.sigma(), &rho, m)?;
    if rc.normalize_rho && adm.is_admissible() {
        // The pairing is conjugate-linear in ρ.
        rho = rho.scaled(C64::new(1.0, 0.0) / adm.pairing.conj());
    }
    let (out, pair) = op.reconstruct(&f, &rho)?;
    run.metric("pairing.re", pair.re)?;
    run.metric("pairing.im", pair.im)?;
    run.metric("admissible", f64::from(u8::from(adm.is_admissible())))?;
    if adm.is_admissible() {
        run.check_le("relative_error", relative_error(&out, &f.scaled(pair))?, rc.admissible_tolerance)?;
    } else {
        run.check_le("residual_ratio", out.norm() / f.norm(), rc.ghost_tolerance)?;
    }
    write_curves(run, "reconstruction.csv", &ig, &[("f", &f), ("s", &out)])?;
    run.json("admissibility.json", &AdmissibilityRow::new(&rho.name, &admissibility(op.sigma(), &rho, m)?))?;
    Ok(())
}

pub fn admissibility_table(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let ac = &cfg.admissibility;
    if ac.m == 0 {
        return Err(CliError::Usage("admissibility.m must be at least 1".into()));
    }
    let sigma = ac.sigma.build()?;
    let mut rows = Vec::new();
    let mut used = Vec::new();
    for (idx, spec) in ac.rhos.iter().enumerate() {
        let rho = spec.build()?;
        let r = admissibility(&sigma, &rho, ac.m)?;
        let name = unique_label(&mut used, &rho.name, idx);
        let mag = r.pairing.norm();
        run.metric(format!("{name}.pairing_re"), r.pairing.re)?;
        run.metric(format!("{name}.pairing_im"), r.pairing.im)?;
        if r.is_zero() {
            run.check_le(&format!("{name}.zero_magnitude"), mag, ac.zero_tolerance)?;
        } else {
            run.check_ge(&format!("{name}.relative_magnitude"), mag / r.quadrature_scale, ac.nonzero_fraction)?;
        }
        rows.push(AdmissibilityRow::new(&rho.name, &r));
    }
    run.json("admissibility.json", &rows)?;
    let csv: Vec<Vec<f64>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i as f64, r.pairing_re, r.pairing_im, r.error_estimate, f64::from(u8::from(r.admissible))])
        .collect();
    run.csv("admissibility.csv", &["index", "pairing_re", "pairing_im", "error_estimate", "admissible"], &csv)?;
    Ok(())
}

pub fn decompose(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let dc = &cfg.decompose;
    let (ig, pg) = grids(cfg)?;
    let op = NetworkOperator::plain_l2(cfg.profiles.sigma.build()?, pg, ig.clone())?;
    let gamma = build_distribution(&dc.gamma, &op)?;
    let basis = hermite_basis(dc.basis_size, &ig)?;
    let d = structure_decompose(&op, &gamma, &basis, dc.max_terms)?;
    let m = op.m();

    let g2 = gamma.norm().powi(2);
    let (p2, h2) = (d.principal.norm().powi(2), d.ghost.norm().powi(2));
    run.metric("gamma_norm", gamma.norm())?;
    run.metric("principal_norm", p2.sqrt())?;
    run.metric("ghost_norm", h2.sqrt())?;
    run.check_le("pythagoras_defect", (g2 - p2 - h2).abs() / g2, dc.pythagoras_tolerance)?;

    let (pp, _) = project(&op, &d.principal, AdjointMode::PlainL2)?;
    run.check_le("idempotence", pp.sub(&d.principal)?.norm() / d.principal.norm().max(f64::MIN_POSITIVE), dc.idempotence_tolerance)?;
    let s_gamma = op.forward_s(&gamma)?;
    let s_ghost = op.forward_s(&d.ghost)?;
    run.check_le("ghost_annihilation", s_ghost.norm() / s_gamma.norm().max(f64::MIN_POSITIVE), dc.annihilation_tolerance)?;

    if h2 > 0.0 {
        let parseval = d.coefficient_energy() / (2.0 * std::f64::consts::PI * h2);
        run.check_le("parseval_defect", (parseval - 1.0).abs(), dc.parseval_tolerance)?;
        run.metric("synthesis_residual", d.synthesis_residual)?;
    }
    let mut worst_pairing: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut rows = Vec::new();
    for (i, (c, rho)) in d.coefficients.iter().zip(&d.ghost_ridgelets).enumerate() {
        if c.norm() > 0.0 {
            worst_pairing = worst_pairing.max(admissibility(op.sigma(), rho, m)?.pairing.norm());
            worst_norm = worst_norm.max((tabulated_l2m_norm(rho, m)? - 1.0).abs());
        }
        rows.push(vec![i as f64, c.re, c.im]);
    }
    run.check_le("ghost_profile_pairing", worst_pairing, dc.pairing_tolerance)?;
    run.check_le("ghost_profile_norm_defect", worst_norm, dc.pairing_tolerance)?;
    run.csv("coefficients.csv", &["index", "re", "im"], &rows)?;
    write_field(run, "principal", &d.principal)?;
    write_field(run, "ghost", &d.ghost)?;
    Ok(())
}

/// L²ₘ norm on the profile's own tabulation grid. Low-energy ghost profiles can
/// sit near ω = 0, which the generic integrability guard in `l2m_norm` rejects.
fn tabulated_l2m_norm(rho: &Profile1D, m: usize) -> Result<f64, CliError> {
    match rho.native_omega() {
        Some(og) => {
            let v = rho.sample_spectrum(og)?;
            Ok(weighted_omega_inner_samples(og, &v, &v, m)?.re.sqrt())
        }
        None => Ok(l2m_norm(rho, m)?),
    }
}

fn readout_path(c: ReadoutConfig) -> ReadoutPath {
    match c {
        ReadoutConfig::Direct => ReadoutPath::Direct,
        ReadoutConfig::Spectral => ReadoutPath::Spectral,
        ReadoutConfig::Auto { crossover } => ReadoutPath::Auto { crossover },
    }
}

pub fn encode_series_run(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let ec = &cfg.encode_series;
    let (ig, pg) = grids(cfg)?;
    let op = NetworkOperator::plain_l2(cfg.profiles.sigma.build()?, pg.clone(), ig.clone())?;
    let book = GhostCodebook::build(op.sigma(), &ec.codebook_orders, op.m())?;
    let fs: Vec<SampledFunction> = ec.functions.iter().map(|s| build_function(s, &ig)).collect::<Result<_, _>>()?;
    let gamma = encode_series(&book, &fs, &pg)?;
    let path = readout_path(ec.readout);
    run.metric("codebook_size", book.len() as f64)?;
    for (i, p) in book.pairings()?.iter().enumerate() {
        run.metric(format!("slot{i}.pairing_abs"), p.norm())?;
    }
    let mut curves = Vec::new();
    for (i, f) in fs.iter().enumerate() {
        let read = if i == 0 { op.forward_s(&gamma)? } else { readout_mutate_with(&book, &gamma, i, &ig, path)? };
        let err = relative_error(&read, f)?;
        if i == 0 {
            run.check_le("slot0.readout_error", err, ec.principal_tolerance)?;
        } else {
            run.check_le(&format!("slot{i}.readout_error"), err, ec.ghost_tolerance)?;
        }
        curves.push(read);
    }
    let reference = fs.iter().map(SampledFunction::norm).fold(0.0, f64::max);
    for i in fs.len()..book.len() {
        let read = readout_mutate_with(&book, &gamma, i, &ig, path)?;
        run.metric(format!("slot{i}.empty_readout_ratio"), read.norm() / reference)?;
    }
    let cols: Vec<(String, &SampledFunction)> = fs
        .iter()
        .enumerate()
        .flat_map(|(i, f)| [(format!("f{i}"), f), (format!("read{i}"), &curves[i])])
        .collect();
    let cols: Vec<(&str, &SampledFunction)> = cols.iter().map(|(n, f)| (n.as_str(), *f)).collect();
    write_curves(run, "readout.csv", &ig, &cols)?;

    if ec.modulation_basis_size > 0 {
        let basis = hermite_basis(ec.modulation_basis_size, &ig)?;
        let funcs = basis.functions()?;
        let (p, q) = (ec.modulation_p, ec.modulation_q);
        if p >= funcs.len() || q >= funcs.len() {
            return Err(CliError::Usage(format!("modulation indices ({p}, {q}) exceed the basis size {}", funcs.len())));
        }
        let (ep, eq) = (funcs[p].clone(), funcs[q].clone());
        let slot = book.member(ec.modulation_slot)?.clone();
        let g_in = ridgelet_fourier(&ep, &slot, &pg)?;
        let map = ModulationMap::new(&book, ec.modulation_slot, basis)?.with_transition(p, q, C64::new(1.0, 0.0))?;
        let out = op.forward_s(&modulate(&book, &map, &g_in, &ig)?)?;
        run.check_le("modulation_error", relative_error(&out, &eq)?, ec.ghost_tolerance)?;
        write_curves(run, "modulation.csv", &ig, &[("target", &eq), ("output", &out)])?;
    }
    Ok(())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn finite_model(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let fc = &cfg.finite_model;
    let ig = fc.input_grid.build()?;
    let pg = fc.param_grid.build()?;
    check_dims(&ig, &pg)?;
    if fc.p_values.is_empty() || fc.seeds == 0 {
        return Err(CliError::Usage("finite_model needs at least one p value and one seed".into()));
    }
    let op = NetworkOperator::new(fc.sigma.build()?, pg.clone(), ig.clone(), QuadratureScheme::Trapezoid)?;
    let gamma = build_distribution(&fc.gamma, &op)?;
    let shape = match fc.delta_shape {
        DeltaShapeConfig::Gaussian => DeltaShape::Gaussian,
        DeltaShapeConfig::Bump => DeltaShape::Bump,
    };
    let scheme = match fc.sampling {
        SamplingConfig::UniformBox => SamplingScheme::UniformBox,
        SamplingConfig::DensityProportional => SamplingScheme::DensityProportional,
    };
    let delta = NascentDelta::for_grid(shape, &pg, fc.epsilon_spacings)?;
    run.metric("epsilon", delta.epsilon)?;
    run.metric("delta_normalization_defect", delta.normalization_defect())?;
    let target = op.forward_s(&smooth(&gamma, &delta)?)?;

    let mut rows = Vec::new();
    let mut medians = Vec::new();
    for &p in &fc.p_values {
        let mut errs = Vec::with_capacity(fc.seeds);
        for s in 0..fc.seeds as u64 {
            let seed = cfg.seed.wrapping_add(s);
            let model = sample_parameters(&gamma, p, seed, scheme)?;
            let mol = mollify(&model, &delta, &pg)?;
            let e = relative_error(&op.forward_s(&mol.gamma)?, &target)?;
            rows.push(vec![p as f64, seed as f64, e]);
            errs.push(e);
        }
        let med = median(&mut errs);
        run.metric(format!("p{p}.median_error"), med)?;
        medians.push(med);
    }
    run.csv("convergence.csv", &["p", "seed", "relative_error"], &rows)?;
    let (first, last) = (medians[0], medians[medians.len() - 1]);
    if medians.len() > 1 {
        run.check_le("convergence_ratio", last / first, fc.convergence_ratio)?;
    }
    let biggest = *fc.p_values.iter().max().unwrap_or(&1);
    let model = sample_parameters(&gamma, biggest, cfg.seed, scheme)?;
    run.metric("histogram_distance", histogram_distance(&model, &gamma)?)?;

    let [ni, nj] = fc.coefficient_truncation;
    let be = hermite_basis(ni, &ig)?;
    let orders: Vec<usize> = (1..=nj).collect();
    let br = dawson_basis(&orders, ig.dim())?;
    let model = sample_parameters(&gamma, fc.coefficient_p, cfg.seed, scheme)?;
    let coeffs = finite_ridgelet_coeffs(&model, &delta, &be, &br, (ni, nj), &pg)?;
    run.check_le("coefficient_agreement", coeffs.agreement, fc.coefficient_tolerance)?;
    let rows: Vec<Vec<f64>> = coeffs
        .coefficients
        .c
        .iter()
        .zip(&coeffs.inner_product.c)
        .enumerate()
        .flat_map(|(i, (a, b))| {
            a.iter().zip(b).enumerate().map(move |(j, (x, y))| vec![i as f64, j as f64, x.re, x.im, y.re, y.im])
        })
        .collect();
    run.csv("coefficients.csv", &["i", "j", "point_re", "point_im", "inner_re", "inner_im"], &rows)?;
    Ok(())
}

fn random_bumps(rng: &mut impl Rng, grid: &Grid, count: usize) -> DistributionSpec {
    let bumps = (0..count)
        .map(|_| {
            let center = (0..grid.dim())
                .map(|k| {
                    let (lo, hi) = (grid.lower()[k], grid.upper()[k]);
                    lo + (hi - lo) * rng.gen_range(0.2..0.8)
                })
                .collect();
            let width = rng.gen_range(0.5..4.0);
            let amp = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            BumpSpec::new(center, width, amp)
        })
        .collect();
    DistributionSpec::GaussianBumps { bumps }
}

pub fn lazy(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let lc = &cfg.lazy;
    let (ig, pg) = grids(cfg)?;
    let op = NetworkOperator::plain_l2(cfg.profiles.sigma.build()?, pg.clone(), ig.clone())?;
    let f = build_function(&lc.function, &ig)?;
    let init = build_distribution(&lc.gamma_init, &op)?;
    let lazy = lazy_solution(&op, &f, &init)?;
    let fit = relative_error(&op.forward_s(&lazy)?, &f)?;
    run.check_le("lazy_fit_error", fit, lc.tolerance)?;
    let d0 = lazy.sub(&init)?.norm();
    run.metric("lazy_distance", d0)?;

    let mut rng = seeded_rng(cfg.seed, 1);
    let mut min_excess = f64::INFINITY;
    let mut worst_fit: f64 = 0.0;
    let mut rows = Vec::new();
    for k in 0..lc.perturbations {
        let raw = build_distribution(&random_bumps(&mut rng, &pg, 3), &op)?;
        let (_, ghost) = project(&op, &raw, AdjointMode::PlainL2)?;
        let scale = lc.perturbation_scale * d0.max(f64::EPSILON) / ghost.norm();
        let other = lazy.axpy(C64::new(scale, 0.0), &ghost)?;
        let d = other.sub(&init)?.norm();
        let other_fit = relative_error(&op.forward_s(&other)?, &f)?;
        min_excess = min_excess.min((d - d0) / d0.max(f64::EPSILON));
        worst_fit = worst_fit.max(other_fit);
        rows.push(vec![k as f64, d, other_fit]);
    }
    if lc.perturbations > 0 {
        run.check_ge("min_relative_excess_distance", min_excess, 0.0)?;
        run.metric("perturbed_fit_error_max", worst_fit)?;
    }
    run.csv("perturbations.csv", &["index", "distance", "fit_error"], &rows)?;
    write_field(run, "lazy_solution", &lazy)?;
    Ok(())
}

pub fn bound(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let bc = &cfg.bound;
    let layer = if let Some(first) = bc.layers.first() {
        LayerSpec::new(first.m_bound, first.volume, first.g_inclusive, first.g_exclusive)?
    } else {
        if !(bc.ghost_fraction >= 0.0 && bc.ghost_fraction < 1.0) {
            return Err(CliError::Usage("bound.ghost_fraction must lie in [0, 1)".into()));
        }
        let (ig, pg) = grids(cfg)?;
        let op = NetworkOperator::plain_l2(cfg.profiles.sigma.build()?, pg.clone(), ig.clone())?;
        let f = build_function(&bc.function, &ig)?;
        let principal = op.adjoint(&f, AdjointMode::PlainL2)?;
        let ghost = build_distribution(&bc.ghost, &op)?;
        let want = (bc.ghost_fraction / (1.0 - bc.ghost_fraction)).sqrt() * principal.norm();
        let gamma = principal.axpy(C64::new(want / ghost.norm(), 0.0), &ghost)?;
        let (g, gp) = layer_norms(&op, &gamma, AdjointMode::PlainL2)?;
        let m_bound = pg.lower().iter().zip(pg.upper()).map(|(l, u)| l.abs().max(u.abs()).powi(2)).sum::<f64>().sqrt();
        LayerSpec::new(m_bound, pg.volume(), g, gp)?
    };
    run.metric("layer.m_bound", layer.m_bound)?;
    run.metric("layer.volume", layer.volume)?;
    run.metric("layer.g_inclusive", layer.g_inclusive)?;
    run.metric("layer.g_exclusive", layer.g_exclusive)?;
    let per_layer = layer.g_exclusive / layer.g_inclusive;
    run.check_le("layer.norm_ratio", per_layer, bc.ratio_tolerance)?;

    let mut rows = Vec::new();
    for &d in &bc.depths {
        let layers: Vec<LayerSpec> = if bc.layers.is_empty() {
            vec![layer; d]
        } else if bc.layers.len() == d {
            bc.layers
                .iter()
                .map(|l| LayerSpec::new(l.m_bound, l.volume, l.g_inclusive, l.g_exclusive))
                .collect::<Result<_, _>>()?
        } else {
            vec![layer; d]
        };
        let inc = generalization_bound(&layers, bc.b, bc.n, d, NormChoice::Inclusive)?;
        let exc = generalization_bound(&layers, bc.b, bc.n, d, NormChoice::Exclusive)?;
        let expected = layers.iter().map(|l| l.g_exclusive / l.g_inclusive).product::<f64>();
        run.metric(format!("depth{d}.inclusive"), inc)?;
        run.metric(format!("depth{d}.exclusive"), exc)?;
        run.check_le(&format!("depth{d}.ratio"), exc / inc, 1.0)?;
        run.check_le(&format!("depth{d}.compounding_defect"), (exc / inc - expected).abs() / expected, 1e-12)?;
        rows.push(vec![d as f64, inc, exc, exc / inc]);
    }
    run.csv("bounds.csv", &["depth", "inclusive", "exclusive", "ratio"], &rows)?;
    Ok(())
}
