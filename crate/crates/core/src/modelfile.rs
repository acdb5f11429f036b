//! Structured-text model files: scenario factory + parameter block, optional
//! kernel/window/spectral/propagation blocks. Schema-validated before any
//! computation; unknown keys are rejected.

use crate::error::{Error, Result};
use crate::group::GroupElem;
use crate::models::{self, PropagationOptions, ScenarioModel};
use crate::spectral::TruncationConfig;
use num_complex::Complex64;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema_version: u32,
    pub scenario: ScenarioSpec,
    #[serde(default)]
    pub kernel: Option<KernelSpec>,
    #[serde(default)]
    pub windows: Option<WindowsSpec>,
    #[serde(default)]
    pub spectral: Option<SpectralSpec>,
    #[serde(default)]
    pub propagation: Option<PropagationSpec>,
}

/// A sparse kernel coefficient: lattice offsets plus a complex value.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub offset: Vec<i64>,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl Coefficient {
    fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    fn offset1(&self) -> Result<i64> {
        if self.offset.len() != 1 {
            return Err(Error::Schema(format!(
                "expected a 1-D offset, got {:?}",
                self.offset
            )));
        }
        Ok(self.offset[0])
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "factory", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioSpec {
    TwoLimitLine {
        v_minus: f64,
        v_plus: f64,
        hopping: Vec<Coefficient>,
    },
    PartialActionComplement {
        v_minus: f64,
        v_plus: f64,
        hopping: Vec<Coefficient>,
        excluded: Vec<i64>,
    },
    Hofstadter {
        p: u32,
        q: u32,
        #[serde(default = "one")]
        t1: f64,
        #[serde(default = "one")]
        t2: f64,
    },
    WienerHopfLine {
        symbol: Vec<Coefficient>,
    },
    HeisenbergWienerHopf {
        symbol: Vec<Coefficient>,
        cone_side: usize,
    },
    GroupBundle {
        order: u32,
        coeffs: Vec<Coefficient>,
    },
    CompactPair {
        points: usize,
        #[serde(default)]
        s_re: f64,
        #[serde(default)]
        s_im: f64,
    },
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    /// Adjoined-unit scalar of F = G + s*1.
    #[serde(default)]
    pub s_re: f64,
    #[serde(default)]
    pub s_im: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowsSpec {
    pub sizes: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralSpec {
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_stability")]
    pub stability_fraction: f64,
    #[serde(default = "default_cluster")]
    pub cluster_tol: f64,
    #[serde(default = "default_edge_mass")]
    pub edge_mass_threshold: f64,
    #[serde(default = "default_population")]
    pub min_cluster_population: usize,
}

fn default_angles() -> usize {
    720
}
fn default_stability() -> f64 {
    0.5
}
fn default_cluster() -> f64 {
    0.02
}
fn default_edge_mass() -> f64 {
    0.5
}
fn default_population() -> usize {
    3
}

impl Default for SpectralSpec {
    fn default() -> Self {
        SpectralSpec {
            angles: default_angles(),
            stability_fraction: default_stability(),
            cluster_tol: default_cluster(),
            edge_mass_threshold: default_edge_mass(),
            min_cluster_population: default_population(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropagationSpec {
    pub target: String,
    pub kappa_min: f64,
    pub kappa_max: f64,
    #[serde(default = "default_plateau")]
    pub plateau_fraction: f64,
    pub epsilon: f64,
    pub window: usize,
    pub family: Vec<i64>,
    #[serde(default = "default_tmax")]
    pub t_max: f64,
    #[serde(default = "default_tsteps")]
    pub t_steps: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_plateau() -> f64 {
    0.6
}
fn default_tmax() -> f64 {
    200.0
}
fn default_tsteps() -> usize {
    50
}
fn default_trials() -> usize {
    50
}

impl PropagationSpec {
    pub fn options(&self) -> PropagationOptions {
        PropagationOptions {
            target_component: self.target.clone(),
            kappa_min: self.kappa_min,
            kappa_max: self.kappa_max,
            plateau_fraction: self.plateau_fraction,
            epsilon: self.epsilon,
            window: self.window,
            family: self.family.clone(),
            time_check: Some((self.t_max, self.t_steps, self.trials)),
            seed: self.seed,
            check_half_window: true,
        }
    }
}

/// A parsed model file resolved into a scenario and its computation options.
pub struct LoadedModel {
    pub model: ScenarioModel,
    pub truncation: TruncationConfig,
    pub angles: usize,
    pub propagation: Option<PropagationSpec>,
}

pub fn parse(text: &str) -> Result<ModelFile> {
    let file: ModelFile = toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(Error::Schema(format!(
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            file.schema_version
        )));
    }
    Ok(file)
}

pub fn load(text: &str) -> Result<LoadedModel> {
    let file = parse(text)?;
    let mut model = build_scenario(&file.scenario)?;
    if let Some(k) = &file.kernel {
        let s = Complex64::new(k.s_re, k.s_im);
        model = model.with_unit_scalar(s)?;
    }
    let base_cfg = model.default_truncation_config();
    let sizes = file.windows.map(|w| w.sizes).unwrap_or_else(|| base_cfg.sizes.clone());
    let truncation = match &file.spectral {
        Some(sp) => TruncationConfig {
            sizes,
            stability_fraction: sp.stability_fraction,
            cluster_tol: sp.cluster_tol,
            edge_mass_threshold: sp.edge_mass_threshold,
            min_cluster_population: sp.min_cluster_population,
        },
        None => TruncationConfig { sizes, ..base_cfg },
    };
    let spectral = file.spectral.unwrap_or_default();
    Ok(LoadedModel { model, truncation, angles: spectral.angles, propagation: file.propagation })
}

pub fn load_path(path: &std::path::Path) -> Result<LoadedModel> {
    let text = std::fs::read_to_string(path)?;
    load(&text)
}

fn coeffs_1d(cs: &[Coefficient]) -> Result<Vec<(i64, Complex64)>> {
    cs.iter().map(|c| Ok((c.offset1()?, c.value()))).collect()
}

fn build_scenario(spec: &ScenarioSpec) -> Result<ScenarioModel> {
    match spec {
        ScenarioSpec::TwoLimitLine { v_minus, v_plus, hopping } => {
            models::two_limit_line(*v_minus, *v_plus, &coeffs_1d(hopping)?)
        }
        ScenarioSpec::PartialActionComplement { v_minus, v_plus, hopping, excluded } => {
            let base = models::two_limit_line(*v_minus, *v_plus, &coeffs_1d(hopping)?)?;
            models::partial_action_complement(&base, excluded)
        }
        ScenarioSpec::Hofstadter { p, q, t1, t2 } => models::hofstadter(*p, *q, *t1, *t2),
        ScenarioSpec::WienerHopfLine { symbol } => models::wiener_hopf_line(&coeffs_1d(symbol)?),
        ScenarioSpec::HeisenbergWienerHopf { symbol, cone_side } => {
            let sym: Vec<(GroupElem, Complex64)> = symbol
                .iter()
                .map(|c| {
                    if c.offset.len() != 3 {
                        return Err(Error::Schema(format!(
                            "Heisenberg offsets have 3 components, got {:?}",
                            c.offset
                        )));
                    }
                    Ok((GroupElem::Heis(c.offset[0], c.offset[1], c.offset[2]), c.value()))
                })
                .collect::<Result<_>>()?;
            models::heisenberg_wiener_hopf(&sym, *cone_side)
        }
        ScenarioSpec::GroupBundle { order, coeffs } => {
            let cs: Vec<(i64, f64)> = coeffs
                .iter()
                .map(|c| {
                    if c.im != 0.0 {
                        return Err(Error::Schema(
                            "group-bundle coefficients are real (the second fiber carries i*g)"
                                .into(),
                        ));
                    }
                    Ok((c.offset1()?, c.re))
                })
                .collect::<Result<_>>()?;
            models::group_bundle_model(*order, &cs)
        }
        ScenarioSpec::CompactPair { points, s_re, s_im } => {
            models::compact_pair(*points, Complex64::new(*s_re, *s_im))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_limit() {
        let text = r#"
schema_version = 1

[scenario]
factory = "two_limit_line"
v_minus = 0.0
v_plus = 4.0
hopping = [{ offset = [1], re = 1.0 }, { offset = [-1], re = 1.0 }]

[windows]
sizes = [100, 200]
"#;
        let loaded = load(text).unwrap();
        assert_eq!(loaded.truncation.sizes, vec![100, 200]);
        assert!(loaded.model.name.starts_with("two-limit"));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_version() {
        let bad_key = r#"
schema_version = 1
flux = 3

[scenario]
factory = "hofstadter"
p = 1
q = 3
"#;
        assert!(matches!(parse(bad_key), Err(Error::Schema(_))));
        let bad_version = r#"
schema_version = 99

[scenario]
factory = "hofstadter"
p = 1
q = 3
"#;
        assert!(matches!(parse(bad_version), Err(Error::Schema(_))));
    }

    #[test]
    fn schema_error_carries_location() {
        let text = "schema_version = \n";
        let err = parse(text).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("line"), "{msg}");
    }
}
