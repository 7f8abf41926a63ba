//! The TOML run configuration and its translation into library objects.

use std::path::PathBuf;

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use qpsc_core::arithmetic::{ContinuedFraction, LiouvilleRecipe, Pole, TorusPoint};
use qpsc_core::cocycle::{CocycleKind, LyapunovMethod, LyapunovOptions};
use qpsc_core::gordon::{CertificateOptions, DEFAULT_DIRECTIONS, DEFAULT_RATE};
use qpsc_core::num::{parse_rational, Phase, Real};
use qpsc_core::potential::{make_amo, make_maryland, MeromorphicPotential, Numerator};
use qpsc_core::spectral::{truncated_spectrum, Boundary, PolePolicy, DEFAULT_V_CAP};

use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for sampled energy grids.
    #[serde(default)]
    pub seed: u64,
    pub model: ModelSpec,
    pub alpha: AlphaSpec,
    #[serde(default = "Literal::zero")]
    pub theta: Literal,
    /// Bits to which `theta` is known; exact when absent.
    pub theta_precision: Option<u32>,
    pub epsilon: Option<f64>,
    pub energies: Option<EnergySpec>,
    #[serde(default)]
    pub indices: IndicesSpec,
    #[serde(default)]
    pub lyapunov: LyapunovSpec,
    #[serde(default)]
    pub gordon: GordonSpec,
    #[serde(default)]
    pub spectrum: SpectrumSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

/// A number written either as a TOML number or as a string such as `"3/7"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Literal {
    fn zero() -> Self {
        Literal::Int(0)
    }

    pub fn to_rational(&self, key: &str) -> Result<BigRational, CliError> {
        let text = match self {
            Literal::Int(i) => i.to_string(),
            // The shortest round-trip form, so `0.1` means 1/10.
            Literal::Float(x) if x.is_finite() => format!("{x}"),
            Literal::Float(x) => return Err(CliError::key(key, format!("{x} is not finite"))),
            Literal::Text(s) => s.clone(),
        };
        parse_rational(&text).map_err(|e| CliError::key(key, e))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Amo {
        coupling: f64,
        epsilon_floor: Option<f64>,
    },
    Maryland {
        coupling: f64,
        epsilon_floor: Option<f64>,
    },
    Custom {
        coupling: f64,
        numerator: String,
        poles: Vec<PoleSpec>,
        epsilon_floor: Option<f64>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoleSpec {
    pub at: Literal,
    #[serde(default = "one")]
    pub multiplicity: u32,
    pub precision: Option<u32>,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BigLiteral {
    Int(u64),
    Text(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum AlphaSpec {
    Golden {
        terms: usize,
    },
    Silver {
        terms: usize,
    },
    Coefficients {
        coefficients: Vec<BigLiteral>,
    },
    /// A decimal known to `precision` bits, expanded up to `terms` quotients.
    Decimal {
        value: String,
        precision: u32,
        terms: usize,
    },
    Liouville {
        beta: f64,
        prefix: usize,
        jumps: usize,
        #[serde(default)]
        suffix: usize,
        max_bits: Option<u64>,
    },
    /// Jumps steered so the `δ` levels of the configured model and phase
    /// reach `targets`, between `prefix` and `suffix` unit quotients.
    Targeted {
        targets: Vec<f64>,
        #[serde(default)]
        prefix: usize,
        #[serde(default)]
        suffix: usize,
        max_bits: Option<u64>,
    },
}

const DEFAULT_MAX_BITS: u64 = 1 << 18;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum EnergySpec {
    List {
        values: Vec<f64>,
    },
    Linspace {
        min: f64,
        max: f64,
        count: usize,
    },
    /// `count` uniform samples drawn with the run seed, sorted.
    Random {
        min: f64,
        max: f64,
        count: usize,
    },
    /// Every `stride`-th eigenvalue of the `[spectrum]` truncation.
    Spectrum {
        #[serde(default = "one_usize")]
        stride: usize,
    },
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IndicesSpec {
    pub horizon: u64,
    pub gamma_horizon: u64,
    pub tail_start: Option<usize>,
}

impl Default for IndicesSpec {
    fn default() -> Self {
        IndicesSpec {
            horizon: qpsc_core::arithmetic::DEFAULT_HORIZON,
            gamma_horizon: 1000,
            tail_start: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum MethodSpec {
    PhaseAverage,
    SingleOrbit,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
pub enum KindSpec {
    A,
    D,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LyapunovSpec {
    pub n: u64,
    pub phases: usize,
    pub method: MethodSpec,
    pub cocycle: KindSpec,
    pub x0: Option<Literal>,
}

impl Default for LyapunovSpec {
    fn default() -> Self {
        LyapunovSpec {
            n: 10_000,
            phases: 64,
            method: MethodSpec::PhaseAverage,
            cocycle: KindSpec::D,
            x0: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LevelSpec {
    List(Vec<usize>),
    Keyword(String),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GordonSpec {
    pub levels: LevelSpec,
    pub rate: f64,
    pub directions: usize,
    pub contracted: bool,
    pub contracted_max_sites: usize,
}

impl Default for GordonSpec {
    fn default() -> Self {
        let opts = CertificateOptions::default();
        GordonSpec {
            levels: LevelSpec::Keyword("qualifying".into()),
            rate: DEFAULT_RATE,
            directions: DEFAULT_DIRECTIONS,
            contracted: opts.contracted,
            contracted_max_sites: opts.contracted_max_sites,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BoundarySpec {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum PolePolicySpec {
    Cap,
    Strict,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumSpec {
    pub sites: usize,
    pub boundary: BoundarySpec,
    pub pole_policy: PolePolicySpec,
    pub cap: f64,
}

impl Default for SpectrumSpec {
    fn default() -> Self {
        SpectrumSpec {
            sites: 256,
            boundary: BoundarySpec::Dirichlet,
            pole_policy: PolePolicySpec::Cap,
            cap: DEFAULT_V_CAP,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Both,
}

impl Format {
    pub fn csv(self) -> bool {
        self != Format::Json
    }

    pub fn json(self) -> bool {
        self != Format::Csv
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub format: Format,
    /// Replace existing files instead of refusing to run.
    pub overwrite: bool,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            format: Format::Both,
            overwrite: false,
        }
    }
}

fn positive(key: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(CliError::key(key, format!("must be positive and finite, got {x}")))
    }
}

fn nonzero(key: &str, n: u64) -> Result<u64, CliError> {
    if n > 0 {
        Ok(n)
    } else {
        Err(CliError::key(key, "must be at least 1"))
    }
}

fn finite(key: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::key(key, format!("must be finite, got {x}")))
    }
}

fn torus_point(value: BigRational, precision: Option<u32>) -> TorusPoint {
    match precision {
        Some(bits) => TorusPoint::new(&Real::with_bits(value, bits)),
        None => TorusPoint::exact(value),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Range checks that the types alone do not express.
    pub fn validate(&self) -> Result<(), CliError> {
        match &self.model {
            ModelSpec::Amo { coupling, epsilon_floor } | ModelSpec::Maryland { coupling, epsilon_floor } => {
                finite("model.coupling", *coupling)?;
                if let Some(f) = epsilon_floor {
                    positive("model.epsilon_floor", *f)?;
                }
            }
            ModelSpec::Custom {
                coupling,
                poles,
                epsilon_floor,
                ..
            } => {
                finite("model.coupling", *coupling)?;
                if let Some(f) = epsilon_floor {
                    positive("model.epsilon_floor", *f)?;
                }
                for (i, p) in poles.iter().enumerate() {
                    if p.multiplicity == 0 {
                        return Err(CliError::key(&format!("model.poles[{i}].multiplicity"), "must be at least 1"));
                    }
                    p.at.to_rational(&format!("model.poles[{i}].at"))?;
                    if p.precision == Some(0) {
                        return Err(CliError::key(&format!("model.poles[{i}].precision"), "must be at least 1"));
                    }
                }
            }
        }
        match &self.alpha {
            AlphaSpec::Golden { terms } | AlphaSpec::Silver { terms } => {
                nonzero("alpha.terms", *terms as u64)?;
            }
            AlphaSpec::Coefficients { coefficients } => {
                if coefficients.is_empty() {
                    return Err(CliError::key("alpha.coefficients", "must not be empty"));
                }
            }
            AlphaSpec::Decimal { value, precision, terms } => {
                parse_rational(value).map_err(|e| CliError::key("alpha.value", e))?;
                nonzero("alpha.precision", *precision as u64)?;
                nonzero("alpha.terms", *terms as u64)?;
            }
            AlphaSpec::Liouville { beta, jumps, .. } => {
                positive("alpha.beta", *beta)?;
                nonzero("alpha.jumps", *jumps as u64)?;
            }
            AlphaSpec::Targeted { targets, .. } => {
                if targets.is_empty() {
                    return Err(CliError::key("alpha.targets", "must not be empty"));
                }
                for t in targets {
                    positive("alpha.targets", *t)?;
                }
            }
        }
        self.theta.to_rational("theta")?;
        if self.theta_precision == Some(0) {
            return Err(CliError::key("theta_precision", "must be at least 1"));
        }
        if let Some(e) = self.epsilon {
            positive("epsilon", e)?;
        }
        match &self.energies {
            Some(EnergySpec::List { values }) => {
                for v in values {
                    finite("energies.values", *v)?;
                }
            }
            Some(EnergySpec::Linspace { min, max, count }) | Some(EnergySpec::Random { min, max, count }) => {
                finite("energies.min", *min)?;
                finite("energies.max", *max)?;
                if min > max {
                    return Err(CliError::key("energies.min", "must not exceed energies.max"));
                }
                nonzero("energies.count", *count as u64)?;
            }
            Some(EnergySpec::Spectrum { stride }) => {
                nonzero("energies.stride", *stride as u64)?;
            }
            None => {}
        }
        nonzero("indices.horizon", self.indices.horizon)?;
        nonzero("indices.gamma_horizon", self.indices.gamma_horizon)?;
        nonzero("lyapunov.n", self.lyapunov.n)?;
        nonzero("lyapunov.phases", self.lyapunov.phases as u64)?;
        if let Some(x0) = &self.lyapunov.x0 {
            x0.to_rational("lyapunov.x0")?;
        }
        if let LevelSpec::Keyword(k) = &self.gordon.levels {
            if k != "qualifying" {
                return Err(CliError::key("gordon.levels", format!("expected a list or \"qualifying\", got \"{k}\"")));
            }
        }
        positive("gordon.rate", self.gordon.rate)?;
        nonzero("gordon.directions", self.gordon.directions as u64)?;
        if self.spectrum.sites < 2 {
            return Err(CliError::key("spectrum.sites", "must be at least 2"));
        }
        positive("spectrum.cap", self.spectrum.cap)?;
        Ok(())
    }

    pub fn potential(&self) -> Result<MeromorphicPotential, CliError> {
        let (pot, floor) = match &self.model {
            ModelSpec::Amo { coupling, epsilon_floor } => (make_amo(*coupling), epsilon_floor),
            ModelSpec::Maryland { coupling, epsilon_floor } => (make_maryland(*coupling)?, epsilon_floor),
            ModelSpec::Custom {
                coupling,
                numerator,
                poles,
                epsilon_floor,
            } => {
                let kind = numerator.parse().map_err(|e| CliError::key("model.numerator", e))?;
                let poles = poles
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        let at = p.at.to_rational(&format!("model.poles[{i}].at"))?;
                        Ok(Pole::new(torus_point(at, p.precision), p.multiplicity))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                let g = Numerator::Named {
                    kind,
                    coupling: *coupling,
                };
                (MeromorphicPotential::custom("custom", poles, g)?, epsilon_floor)
            }
        };
        Ok(match floor {
            Some(f) => pot.with_epsilon_floor(*f),
            None => pot,
        })
    }

    pub fn theta(&self) -> Result<TorusPoint, CliError> {
        Ok(torus_point(self.theta.to_rational("theta")?, self.theta_precision))
    }

    /// The continued fraction and, for decimals, the certified prefix length.
    pub fn continued_fraction(&self, pot: &MeromorphicPotential) -> Result<(ContinuedFraction, Option<usize>), CliError> {
        let cf = match &self.alpha {
            AlphaSpec::Golden { terms } => ContinuedFraction::golden(*terms),
            AlphaSpec::Silver { terms } => ContinuedFraction::silver(*terms),
            AlphaSpec::Coefficients { coefficients } => {
                let coeffs = coefficients
                    .iter()
                    .enumerate()
                    .map(|(i, c)| match c {
                        BigLiteral::Int(v) => Ok(BigUint::from(*v)),
                        BigLiteral::Text(s) => s
                            .trim()
                            .parse::<BigUint>()
                            .map_err(|_| CliError::key(&format!("alpha.coefficients[{i}]"), format!("`{s}` is not a positive integer"))),
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                ContinuedFraction::from_coefficients(coeffs)?
            }
            AlphaSpec::Decimal { value, precision, terms } => {
                let v = parse_rational(value).map_err(|e| CliError::key("alpha.value", e))?;
                let expansion = ContinuedFraction::from_real(&Real::with_bits(v, *precision), *terms)?;
                if expansion.precision_exhausted {
                    log::warn!(
                        "alpha.precision certifies only {} of {terms} coefficients",
                        expansion.valid_prefix
                    );
                }
                return Ok((expansion.cf, Some(expansion.valid_prefix)));
            }
            AlphaSpec::Liouville {
                beta,
                prefix,
                jumps,
                suffix,
                max_bits,
            } => ContinuedFraction::liouville(LiouvilleRecipe {
                suffix: *suffix,
                max_bits: max_bits.unwrap_or(DEFAULT_MAX_BITS),
                ..LiouvilleRecipe::new(*beta, *prefix, *jumps)
            })?,
            AlphaSpec::Targeted {
                targets,
                prefix,
                suffix,
                max_bits,
            } => {
                let levels: Vec<Option<f64>> = std::iter::repeat(None)
                    .take(*prefix)
                    .chain(targets.iter().copied().map(Some))
                    .chain(std::iter::repeat(None).take(*suffix))
                    .collect();
                ContinuedFraction::delta_targeted(&levels, &self.theta()?, pot.poles(), max_bits.unwrap_or(DEFAULT_MAX_BITS))?
            }
        };
        Ok((cf, None))
    }

    pub fn lyapunov_options(&self) -> Result<LyapunovOptions, CliError> {
        let mut opts = LyapunovOptions {
            n: self.lyapunov.n,
            phases: self.lyapunov.phases,
            method: match self.lyapunov.method {
                MethodSpec::PhaseAverage => LyapunovMethod::PhaseAverage,
                MethodSpec::SingleOrbit => LyapunovMethod::SingleOrbit,
            },
            kind: match self.lyapunov.cocycle {
                KindSpec::A => CocycleKind::A,
                KindSpec::D => CocycleKind::D,
            },
            ..Default::default()
        };
        if let Some(x0) = &self.lyapunov.x0 {
            opts.x0 = Phase::from_ratio(&x0.to_rational("lyapunov.x0")?);
        }
        Ok(opts)
    }

    pub fn certificate_options(&self) -> CertificateOptions {
        CertificateOptions {
            directions: self.gordon.directions,
            contracted: self.gordon.contracted,
            contracted_max_sites: self.gordon.contracted_max_sites,
            ..Default::default()
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self.spectrum.boundary {
            BoundarySpec::Dirichlet => Boundary::Dirichlet,
            BoundarySpec::Neumann => Boundary::Neumann,
        }
    }

    pub fn pole_policy(&self) -> PolePolicy {
        match self.spectrum.pole_policy {
            PolePolicySpec::Cap => PolePolicy::Cap(self.spectrum.cap),
            PolePolicySpec::Strict => PolePolicy::Strict(self.spectrum.cap),
        }
    }

    pub fn epsilon(&self) -> Result<f64, CliError> {
        self.epsilon.ok_or_else(|| CliError::key("epsilon", "required by this command"))
    }

    /// The energy grid, in ascending order for sampled and spectral grids.
    pub fn energies(&self, pot: &MeromorphicPotential, cf: &ContinuedFraction) -> Result<Vec<f64>, CliError> {
        let spec = self
            .energies
            .as_ref()
            .ok_or_else(|| CliError::key("energies", "required by this command"))?;
        Ok(match spec {
            EnergySpec::List { values } => values.clone(),
            EnergySpec::Linspace { min, max, count } => {
                if *count == 1 {
                    vec![*min]
                } else {
                    (0..*count).map(|i| min + (max - min) * i as f64 / (*count - 1) as f64).collect()
                }
            }
            EnergySpec::Random { min, max, count } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                let mut v: Vec<f64> = (0..*count).map(|_| rng.gen_range(*min..=*max)).collect();
                v.sort_by(f64::total_cmp);
                v
            }
            EnergySpec::Spectrum { stride } => {
                let theta = self.theta()?;
                let s = truncated_spectrum(pot, theta.phase(), &cf.frequency(), self.spectrum.sites, self.boundary(), self.pole_policy())?;
                if s.pole_influenced() {
                    log::warn!("spectrum truncation capped {} sites near poles", s.capped_sites.len());
                }
                s.eigenvalues.into_iter().step_by(*stride).collect()
            }
        })
    }
}
