//! Monte-Carlo reproduction of the sin(2πx) experiment with σ = tanh and the
//! Dawson ridgelet family.

use serde::Serialize;

use ghostlet_core::nullspace::admissibility;
use ghostlet_core::profiles::{make_rho_family, tanh_profile};
use ghostlet_core::transforms::{ridgelet, NetworkOperator};
use ghostlet_core::{Grid, ParamDistribution, QuadratureScheme, SampledFunction, C64};

use crate::config::{ExperimentConfig, McEstimator};
use crate::error::CliError;
use crate::experiments::{relative_error, write_field, AdmissibilityRow};
use crate::report::Run;

#[derive(Serialize)]
struct EstimatorNote {
    estimator: McEstimator,
    ridgelet_scale: f64,
    network_scale: f64,
}

pub fn appendix_c(cfg: &ExperimentConfig, run: &mut Run) -> Result<(), CliError> {
    let ac = &cfg.appendix_c;
    if ac.ks.is_empty() || ac.ks.contains(&0) {
        return Err(CliError::Usage("appendix_c.ks must list indices k ≥ 1".into()));
    }
    let [x0, x1] = ac.x_range;
    let w = 2.0 * std::f64::consts::PI * ac.frequency;
    let sine = |x: &[f64]| C64::new((w * x[0]).sin(), 0.0);
    let table = SampledFunction::from_fn(Grid::line(x0, x1, ac.f_table_count)?, sine)?;
    let eval_grid = Grid::line(x0, x1, ac.eval_count)?;
    let f = SampledFunction::from_fn(eval_grid.clone(), sine)?;
    let pg = Grid::new(
        vec![ac.a_range[0], ac.b_range[0]],
        vec![ac.a_range[1], ac.b_range[1]],
        ac.param_counts.to_vec(),
    )?;

    // Both estimators average n draws; they differ only in the measure the mean is scaled by.
    let (r_scale, s_scale) = match ac.estimator {
        McEstimator::BoxMeasure => (1.0, 1.0),
        McEstimator::Literal => (
            ac.literal_delta_x / table.grid().volume(),
            ac.literal_delta_ab.powi(2) / pg.volume(),
        ),
    };
    run.json(
        "estimator.json",
        &EstimatorNote { estimator: ac.estimator, ridgelet_scale: r_scale, network_scale: s_scale },
    )?;

    let sigma = tanh_profile();
    let family = make_rho_family(*ac.ks.iter().max().unwrap_or(&1))?;
    let op = NetworkOperator::new(
        sigma.clone(),
        pg.clone(),
        eval_grid.clone(),
        QuadratureScheme::MonteCarlo { samples: ac.network_samples, seed: cfg.seed },
    )?;
    let r_scheme = QuadratureScheme::MonteCarlo { samples: ac.ridgelet_samples, seed: cfg.seed };

    let mut spectra: Vec<(usize, ParamDistribution)> = Vec::new();
    for &k in &ac.ks {
        let rho = &family[k];
        let adm = admissibility(&sigma, rho, 1)?;
        run.json(&format!("admissibility_k{k}.json"), &AdmissibilityRow::new(&rho.name, &adm))?;
        run.metric(format!("k{k}.pairing_re"), adm.pairing.re)?;
        run.metric(format!("k{k}.pairing_im"), adm.pairing.im)?;

        let r = ridgelet(&table, rho, &pg, r_scheme)?.scaled(C64::new(r_scale, 0.0));
        let out = op.forward_s(&r)?.scaled(C64::new(s_scale, 0.0));
        write_field(run, &format!("spectrum_k{k}"), &r)?;
        let rows: Vec<Vec<f64>> = (0..eval_grid.len())
            .map(|i| vec![eval_grid.coord(0, i), f.values()[i].re, out.values()[i].re, out.values()[i].im])
            .collect();
        run.csv(&format!("reconstruction_k{k}.csv"), &["x", "f", "s_re", "s_im"], &rows)?;

        if adm.is_admissible() {
            run.check_le(&format!("k{k}.relative_error"), relative_error(&out, &f)?, ac.reconstruction_tolerance)?;
        } else {
            run.check_le(&format!("k{k}.residual_ratio"), out.norm() / f.norm(), ac.residual_tolerance)?;
        }
        spectra.push((k, r));
    }

    let mut closest = f64::INFINITY;
    for (i, (j, rj)) in spectra.iter().enumerate() {
        for (k, rk) in &spectra[i + 1..] {
            let scale = rj.max_abs().max(rk.max_abs());
            let gap = rj.sub(rk)?.max_abs() / scale;
            run.metric(format!("distinct_k{j}_k{k}"), gap)?;
            closest = closest.min(gap);
        }
    }
    if spectra.len() > 1 {
        run.check_ge("spectra_min_distinctness", closest, ac.distinct_fraction)?;
    }
    Ok(())
}
