//! Builds functions, profiles and parameter distributions from config specs.

use ghostlet_core::nullspace::{make_nonadmissible, GhostRecipe};
use ghostlet_core::profiles::{hermite_basis, Profile1D};
use ghostlet_core::transforms::{l2m_norm, ridgelet_fourier, AdjointMode, NetworkOperator};
use ghostlet_core::{Grid, ParamDistribution, SampledFunction, C64};

use crate::config::{complex, BumpSpec, DistributionSpec, FunctionSpec, RecipeSpec};
use crate::error::CliError;

fn check_centres(bumps: &[BumpSpec], dim: usize) -> Result<(), CliError> {
    if let Some(b) = bumps.iter().find(|b| b.center.len() != dim) {
        return Err(CliError::Usage(format!(
            "bump centre {:?} has {} coordinates; the grid has {dim}",
            b.center,
            b.center.len()
        )));
    }
    if bumps.iter().any(|b| b.width.is_nan() || b.width <= 0.0) {
        return Err(CliError::Usage("bump widths must be positive".into()));
    }
    Ok(())
}

pub fn build_function(spec: &FunctionSpec, grid: &Grid) -> Result<SampledFunction, CliError> {
    match spec {
        FunctionSpec::Sin { frequency, support } => {
            let w = 2.0 * std::f64::consts::PI * frequency;
            Ok(SampledFunction::from_fn(grid.clone(), |x| {
                let inside = support.is_none_or(|[lo, hi]| x[0] >= lo && x[0] <= hi);
                C64::new(if inside { (w * x[0]).sin() } else { 0.0 }, 0.0)
            })?)
        }
        FunctionSpec::GaussianBumps { bumps } => {
            check_centres(bumps, grid.dim())?;
            Ok(SampledFunction::from_fn(grid.clone(), |x| C64::new(bumps.iter().map(|b| b.eval(x)).sum(), 0.0))?)
        }
        FunctionSpec::Hermite { index } => {
            let basis = hermite_basis(index + 1, grid)?;
            Ok(basis.functions()?[*index].clone())
        }
    }
}

/// Non-admissible profile for σ, rescaled to unit L²ₘ norm.
pub fn build_ghost_profile(recipe: &RecipeSpec, sigma: &Profile1D, m: usize) -> Result<Profile1D, CliError> {
    let recipe = match recipe {
        RecipeSpec::DisjointSupport { base } => GhostRecipe::DisjointSupport(base.build()?),
        RecipeSpec::NormalizedDifference { first, second } => GhostRecipe::NormalizedDifference(first.build()?, second.build()?),
        RecipeSpec::LinearCombination { first, second, alpha, beta } => {
            GhostRecipe::LinearCombination(first.build()?, second.build()?, complex(*alpha), complex(*beta))
        }
    };
    let rho = make_nonadmissible(sigma, &recipe, m)?;
    let n = l2m_norm(&rho, m)?;
    if n == 0.0 {
        return Err(CliError::Usage("the ghost recipe produced the zero profile".into()));
    }
    Ok(rho.scaled(C64::new(1.0 / n, 0.0)))
}

pub fn build_distribution(spec: &DistributionSpec, op: &NetworkOperator) -> Result<ParamDistribution, CliError> {
    let pg = op.param_grid();
    match spec {
        DistributionSpec::GaussianBumps { bumps } => {
            check_centres(bumps, pg.dim())?;
            Ok(ParamDistribution::from_fn(pg.clone(), |q| C64::new(bumps.iter().map(|b| b.eval(q)).sum(), 0.0))?)
        }
        DistributionSpec::Principal { function, scale } => {
            let f = build_function(function, op.input_grid())?;
            Ok(op.adjoint(&f, AdjointMode::PlainL2)?.scaled(C64::new(*scale, 0.0)))
        }
        DistributionSpec::Ghost { function, recipe, scale } => {
            let f = build_function(function, op.input_grid())?;
            let rho = build_ghost_profile(recipe, op.sigma(), op.m())?;
            Ok(ridgelet_fourier(&f, &rho, pg)?.scaled(C64::new(*scale, 0.0)))
        }
        DistributionSpec::Sum { terms } => {
            let mut out = ParamDistribution::zeros(pg.clone());
            for t in terms {
                out = out.add(&build_distribution(t, op)?)?;
            }
            Ok(out)
        }
    }
}
