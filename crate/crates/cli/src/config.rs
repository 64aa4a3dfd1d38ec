//! JSON experiment configuration. Every field has a default; the resolved
//! struct is echoed verbatim into the run report.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use ghostlet_core::profiles::{gaussian, gaussian_derivative, relu, rho0_derivative, make_rho_family, tanh_profile, Profile1D};
use ghostlet_core::{Grid, QuadratureScheme, C64};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    AppendixC,
    Spectrum,
    Reconstruct,
    Admissibility,
    Decompose,
    EncodeSeries,
    FiniteModel,
    Lazy,
    Bound,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::AppendixC => "appendix-c",
            ExperimentKind::Spectrum => "spectrum",
            ExperimentKind::Reconstruct => "reconstruct",
            ExperimentKind::Admissibility => "admissibility",
            ExperimentKind::Decompose => "decompose",
            ExperimentKind::EncodeSeries => "encode-series",
            ExperimentKind::FiniteModel => "finite-model",
            ExperimentKind::Lazy => "lazy",
            ExperimentKind::Bound => "bound",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grids: GridsConfig,
    pub profiles: ProfilesConfig,
    /// Quadrature for S.
    pub quadrature: QuadratureConfig,
    /// Quadrature for R and S*.
    pub ridgelet_quadrature: QuadratureConfig,
    pub appendix_c: AppendixCConfig,
    pub spectrum: SpectrumConfig,
    pub reconstruct: ReconstructConfig,
    pub admissibility: AdmissibilityConfig,
    pub decompose: DecomposeConfig,
    pub encode_series: EncodeSeriesConfig,
    pub finite_model: FiniteModelConfig,
    pub lazy: LazyConfig,
    pub bound: BoundConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            output_dir: PathBuf::from("ghostlet-out"),
            grids: GridsConfig::default(),
            profiles: ProfilesConfig::default(),
            quadrature: QuadratureConfig::Trapezoid,
            ridgelet_quadrature: QuadratureConfig::Trapezoid,
            appendix_c: AppendixCConfig::default(),
            spectrum: SpectrumConfig::default(),
            reconstruct: ReconstructConfig::default(),
            admissibility: AdmissibilityConfig::default(),
            decompose: DecomposeConfig::default(),
            encode_series: EncodeSeriesConfig::default(),
            finite_model: FiniteModelConfig::default(),
            lazy: LazyConfig::default(),
            bound: BoundConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file. An empty document (no keys) is a usage error.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config is not valid JSON: {e}")))?;
        match value.as_object() {
            Some(map) if map.is_empty() => {
                return Err(CliError::Usage("config is empty; set at least \"experiment\"".into()))
            }
            None => return Err(CliError::Usage("config must be a JSON object".into())),
            _ => {}
        }
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("config: {e}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, counts: Vec<usize>) -> Self {
        Self { lower, upper, counts }
    }

    pub fn build(&self) -> Result<Grid, CliError> {
        Ok(Grid::new(self.lower.clone(), self.upper.clone(), self.counts.clone())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridsConfig {
    pub input: GridSpec,
    pub param: GridSpec,
}

impl Default for GridsConfig {
    fn default() -> Self {
        Self {
            input: GridSpec::new(vec![-10.0], vec![10.0], vec![201]),
            param: GridSpec::new(vec![-6.0, -50.0], vec![6.0, 50.0], vec![121, 251]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Tanh,
    Gaussian,
    GaussianDerivative { order: usize },
    Relu,
    /// Member k of the tanh-normalised Dawson family.
    Rho { k: usize },
    /// k-th derivative of the Dawson seed, unnormalised.
    Rho0Derivative { k: usize },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<Profile1D, CliError> {
        Ok(match self {
            ProfileSpec::Tanh => tanh_profile(),
            ProfileSpec::Gaussian => gaussian(),
            ProfileSpec::GaussianDerivative { order } => gaussian_derivative(*order),
            ProfileSpec::Relu => relu(),
            ProfileSpec::Rho { k } => make_rho_family(*k)?.swap_remove(*k),
            ProfileSpec::Rho0Derivative { k } => rho0_derivative(*k),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfilesConfig {
    pub sigma: ProfileSpec,
    pub rho: ProfileSpec,
}

impl Default for ProfilesConfig {
    fn default() -> Self {
        Self { sigma: ProfileSpec::GaussianDerivative { order: 4 }, rho: ProfileSpec::Rho { k: 1 } }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum QuadratureConfig {
    Trapezoid,
    /// Draws are seeded from the run seed.
    MonteCarlo { samples: usize },
}

impl QuadratureConfig {
    pub fn scheme(&self, seed: u64) -> QuadratureScheme {
        match *self {
            QuadratureConfig::Trapezoid => QuadratureScheme::Trapezoid,
            QuadratureConfig::MonteCarlo { samples } => QuadratureScheme::MonteCarlo { samples, seed },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BumpSpec {
    pub center: Vec<f64>,
    /// exp(−|x − c|² / width).
    pub width: f64,
    pub amplitude: f64,
}

impl BumpSpec {
    pub fn new(center: Vec<f64>, width: f64, amplitude: f64) -> Self {
        Self { center, width, amplitude }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2: f64 = x.iter().zip(&self.center).map(|(a, c)| (a - c).powi(2)).sum();
        self.amplitude * (-r2 / self.width).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// sin(2π·frequency·x₀), optionally cut to `support`.
    Sin { frequency: f64, support: Option<[f64; 2]> },
    GaussianBumps { bumps: Vec<BumpSpec> },
    /// Member `index` of the orthonormal Hermite basis of the input grid.
    Hermite { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RecipeSpec {
    DisjointSupport { base: ProfileSpec },
    NormalizedDifference { first: ProfileSpec, second: ProfileSpec },
    LinearCombination { first: ProfileSpec, second: ProfileSpec, alpha: [f64; 2], beta: [f64; 2] },
}

pub fn complex(v: [f64; 2]) -> C64 {
    C64::new(v[0], v[1])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Bumps on parameter space; centres have length m + 1.
    GaussianBumps { bumps: Vec<BumpSpec> },
    /// scale · S*[function].
    Principal { function: FunctionSpec, scale: f64 },
    /// scale · R[function; ρ] for a constructed non-admissible ρ of unit L²ₘ norm.
    Ghost { function: FunctionSpec, recipe: RecipeSpec, scale: f64 },
    Sum { terms: Vec<DistributionSpec> },
}

fn rho_table() -> Vec<ProfileSpec> {
    (1..=4).map(|k| ProfileSpec::Rho { k }).collect()
}

fn default_bumps_1d() -> FunctionSpec {
    FunctionSpec::GaussianBumps {
        bumps: vec![BumpSpec::new(vec![0.5], 1.0, 1.0), BumpSpec::new(vec![-1.5], 0.5, -0.5)],
    }
}

fn lc(first: usize, second: usize, beta: f64) -> RecipeSpec {
    RecipeSpec::LinearCombination {
        first: ProfileSpec::Rho0Derivative { k: first },
        second: ProfileSpec::Rho0Derivative { k: second },
        alpha: [1.0, 0.0],
        beta: [beta, 0.0],
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McEstimator {
    /// (box measure / n) Σ integrand.
    BoxMeasure,
    /// (cell measure / n) Σ integrand with the stored literal cell measures.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppendixCConfig {
    pub ks: Vec<usize>,
    pub frequency: f64,
    pub x_range: [f64; 2],
    pub a_range: [f64; 2],
    pub b_range: [f64; 2],
    pub param_counts: [usize; 2],
    pub eval_count: usize,
    /// Grid the integrand f is tabulated on for the R draws.
    pub f_table_count: usize,
    pub ridgelet_samples: usize,
    pub network_samples: usize,
    pub literal_delta_x: f64,
    pub literal_delta_ab: f64,
    pub estimator: McEstimator,
    pub reconstruction_tolerance: f64,
    pub residual_tolerance: f64,
    pub distinct_fraction: f64,
}

impl Default for AppendixCConfig {
    fn default() -> Self {
        Self {
            ks: vec![1, 2, 3, 4],
            frequency: 1.0,
            x_range: [-1.0, 1.0],
            a_range: [-6.0, 6.0],
            b_range: [-6.0, 6.0],
            param_counts: [145, 145],
            eval_count: 201,
            f_table_count: 4001,
            ridgelet_samples: 4096,
            network_samples: 1 << 20,
            literal_delta_x: 0.5,
            literal_delta_ab: 1.0 / 12.0,
            estimator: McEstimator::BoxMeasure,
            reconstruction_tolerance: 0.1,
            residual_tolerance: 0.05,
            distinct_fraction: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformPath {
    Direct,
    Fourier,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumConfig {
    pub function: FunctionSpec,
    pub rhos: Vec<ProfileSpec>,
    pub path: TransformPath,
    /// Bound on the relative gap between the two transform paths.
    pub slice_tolerance: f64,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            function: default_bumps_1d(),
            rhos: vec![ProfileSpec::GaussianDerivative { order: 4 }, ProfileSpec::Rho { k: 1 }, ProfileSpec::Rho { k: 2 }],
            path: TransformPath::Direct,
            slice_tolerance: 5e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructConfig {
    pub function: FunctionSpec,
    /// Rescale ρ to unit pairing when admissible.
    pub normalize_rho: bool,
    pub admissible_tolerance: f64,
    pub ghost_tolerance: f64,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        Self { function: default_bumps_1d(), normalize_rho: true, admissible_tolerance: 2e-2, ghost_tolerance: 0.05 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AdmissibilityConfig {
    pub sigma: ProfileSpec,
    pub rhos: Vec<ProfileSpec>,
    pub m: usize,
    pub zero_tolerance: f64,
    /// Nonzero pairings must reach this fraction of the quadrature scale.
    pub nonzero_fraction: f64,
}

impl Default for AdmissibilityConfig {
    fn default() -> Self {
        Self { sigma: ProfileSpec::Tanh, rhos: rho_table(), m: 1, zero_tolerance: 1e-8, nonzero_fraction: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DecomposeConfig {
    pub gamma: DistributionSpec,
    pub basis_size: usize,
    pub max_terms: usize,
    pub parseval_tolerance: f64,
    pub pairing_tolerance: f64,
    pub idempotence_tolerance: f64,
    pub annihilation_tolerance: f64,
    pub pythagoras_tolerance: f64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        Self {
            gamma: DistributionSpec::Sum {
                terms: vec![
                    DistributionSpec::Principal { function: default_bumps_1d(), scale: 1.0 },
                    DistributionSpec::Ghost { function: FunctionSpec::Hermite { index: 1 }, recipe: lc(2, 4, 0.5), scale: 3.0 },
                    DistributionSpec::Ghost { function: FunctionSpec::Hermite { index: 4 }, recipe: lc(2, 6, -1.0), scale: 1.0 },
                ],
            },
            basis_size: 12,
            max_terms: 12,
            parseval_tolerance: 2e-2,
            pairing_tolerance: 1e-6,
            idempotence_tolerance: 1e-3,
            annihilation_tolerance: 1e-2,
            pythagoras_tolerance: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReadoutConfig {
    Direct,
    Spectral,
    Auto { crossover: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EncodeSeriesConfig {
    pub codebook_orders: Vec<usize>,
    pub functions: Vec<FunctionSpec>,
    pub readout: ReadoutConfig,
    pub modulation_basis_size: usize,
    /// Transition e_p → e_q applied to ghost slot `modulation_slot`.
    pub modulation_p: usize,
    pub modulation_q: usize,
    pub modulation_slot: usize,
    pub principal_tolerance: f64,
    pub ghost_tolerance: f64,
}

impl Default for EncodeSeriesConfig {
    fn default() -> Self {
        let bump = |c: f64, w: f64| FunctionSpec::GaussianBumps { bumps: vec![BumpSpec::new(vec![c], w, 1.0)] };
        Self {
            codebook_orders: vec![2, 3, 4],
            functions: vec![bump(0.5, 1.0), bump(-1.0, 0.7), bump(1.5, 2.0)],
            readout: ReadoutConfig::Auto { crossover: 200_000 },
            modulation_basis_size: 8,
            modulation_p: 2,
            modulation_q: 2,
            modulation_slot: 1,
            principal_tolerance: 5e-2,
            ghost_tolerance: 0.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaShapeConfig {
    Gaussian,
    Bump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingConfig {
    UniformBox,
    DensityProportional,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FiniteModelConfig {
    pub input_grid: GridSpec,
    pub param_grid: GridSpec,
    pub sigma: ProfileSpec,
    pub gamma: DistributionSpec,
    pub delta_shape: DeltaShapeConfig,
    /// ε in units of the largest parameter-grid spacing.
    pub epsilon_spacings: f64,
    pub sampling: SamplingConfig,
    pub p_values: Vec<usize>,
    pub seeds: usize,
    /// Largest allowed ratio of the last to the first median error.
    pub convergence_ratio: f64,
    pub coefficient_p: usize,
    pub coefficient_truncation: [usize; 2],
    pub coefficient_tolerance: f64,
}

impl Default for FiniteModelConfig {
    fn default() -> Self {
        Self {
            input_grid: GridSpec::new(vec![-6.0], vec![6.0], vec![121]),
            param_grid: GridSpec::new(vec![-4.0, -8.0], vec![4.0, 8.0], vec![81, 161]),
            sigma: ProfileSpec::GaussianDerivative { order: 2 },
            gamma: DistributionSpec::GaussianBumps {
                bumps: vec![BumpSpec::new(vec![0.5, -1.0], 1.0, 1.0), BumpSpec::new(vec![-1.0, 1.0], 0.5, -0.6)],
            },
            delta_shape: DeltaShapeConfig::Gaussian,
            epsilon_spacings: 4.0,
            sampling: SamplingConfig::DensityProportional,
            p_values: vec![100, 1000, 10000],
            seeds: 10,
            convergence_ratio: 1.0 / 3.0,
            coefficient_p: 200,
            coefficient_truncation: [4, 3],
            coefficient_tolerance: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LazyConfig {
    pub function: FunctionSpec,
    pub gamma_init: DistributionSpec,
    pub perturbations: usize,
    pub perturbation_scale: f64,
    pub tolerance: f64,
}

impl Default for LazyConfig {
    fn default() -> Self {
        Self {
            function: default_bumps_1d(),
            gamma_init: DistributionSpec::GaussianBumps {
                bumps: vec![BumpSpec::new(vec![1.0, 0.0], 1.0, 1.0), BumpSpec::new(vec![-2.0, 3.0], 2.0, -0.5)],
            },
            perturbations: 20,
            perturbation_scale: 1.0,
            tolerance: 2e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub m_bound: f64,
    pub volume: f64,
    pub g_inclusive: f64,
    pub g_exclusive: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundConfig {
    /// Explicit layers; when empty, a planted ghost-heavy layer is measured instead.
    pub layers: Vec<LayerConfig>,
    /// Planted layer: principal part S*[function] plus a rescaled `ghost`.
    pub function: FunctionSpec,
    pub ghost: DistributionSpec,
    /// Share of ‖γ‖² carried by the ghost in the planted layer.
    pub ghost_fraction: f64,
    pub depths: Vec<usize>,
    pub b: f64,
    pub n: usize,
    pub ratio_tolerance: f64,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            layers: Vec::new(),
            function: default_bumps_1d(),
            ghost: DistributionSpec::Ghost { function: FunctionSpec::Hermite { index: 1 }, recipe: lc(2, 4, 0.5), scale: 1.0 },
            ghost_fraction: 0.9, depths: vec![1, 2, 3], b: 1.0, n: 1000, ratio_tolerance: 0.45 }
    }
}
