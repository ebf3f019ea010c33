use std::path::{Path, PathBuf};

use pv_vacuum::solver::{trust_radius, DEFAULT_DAMPING, DEFAULT_MAX_ITER, DEFAULT_RESIDUAL_TOL, DEFAULT_TRUST_FACTOR};
use pv_vacuum::{derive_scheme, MassSpectrum, PVScheme};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const OUTPUT_DIR_ENV: &str = "PVVAC_OUTPUT_DIR";
const DEFAULT_OUTPUT_DIR: &str = "pvvac-out";

/// Contents of the TOML file; every key is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub masses: Option<[f64; 3]>,
    pub coupling: Option<f64>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub grid: FileGrid,
    pub source: Option<SourceSpec>,
    #[serde(default)]
    pub solver: FileSolver,
    #[serde(default)]
    pub kernel: FileKernel,
    #[serde(default)]
    pub output: FileOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileGrid {
    pub n: Option<usize>,
    pub box_length: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSolver {
    pub damping: Option<f64>,
    pub max_iter: Option<usize>,
    pub residual_tol: Option<f64>,
    pub trust_factor: Option<f64>,
    pub trust_radius_v: Option<f64>,
    pub trust_radius_a: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileKernel {
    pub k_max: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileOutput {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourceSpec {
    None,
    Gaussian {
        charge: f64,
        width: f64,
        /// Defaults to the box centre.
        center: Option<[f64; 3]>,
    },
    ChargeMode {
        mode: [i64; 3],
        amplitude: f64,
    },
    CurrentMode {
        mode: [i64; 3],
        polarization: [f64; 3],
        amplitude: f64,
    },
    /// Binary fields as written by the `solve-*` commands.
    File {
        rho: Option<PathBuf>,
        current: Option<PathBuf>,
    },
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec::Gaussian {
            charge: 0.1,
            width: 0.8,
            center: None,
        }
    }
}

/// Flag values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub masses: Option<[f64; 3]>,
    pub coupling: Option<f64>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub box_length: Option<f64>,
    pub k_max: Option<f64>,
    pub points: Option<usize>,
    pub damping: Option<f64>,
    pub max_iter: Option<usize>,
    pub residual_tol: Option<f64>,
    pub charge: Option<f64>,
    pub width: Option<f64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    pub damping: f64,
    pub max_iter: usize,
    pub residual_tol: f64,
    pub trust_factor: f64,
    pub trust_radius_v: f64,
    pub trust_radius_a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub masses: [f64; 3],
    pub coupling: f64,
    pub seed: u64,
    pub n: usize,
    pub box_length: f64,
    pub source: SourceSpec,
    pub solver: SolverSettings,
    pub k_max: f64,
    pub points: usize,
    pub output_dir: PathBuf,
    /// 0 lets the thread pool pick; 1 runs sequentially.
    pub threads: usize,
}

impl RunConfig {
    pub fn scheme(&self) -> Result<PVScheme, CliError> {
        let [m0, m1, m2] = self.masses;
        Ok(derive_scheme(MassSpectrum::new(m0, m1, m2)?)?)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Flags over environment over file over defaults. The environment only
/// supplies the output directory.
pub fn resolve(file: FileConfig, flags: &Overrides, env_output: Option<PathBuf>) -> Result<RunConfig, CliError> {
    let masses = flags.masses.or(file.masses).unwrap_or([1.0, 2.0, 3.0]);
    let coupling = flags.coupling.or(file.coupling).unwrap_or(0.3);
    let mut source = file.source.unwrap_or_default();
    if flags.charge.is_some() || flags.width.is_some() {
        match &mut source {
            SourceSpec::Gaussian { charge, width, .. } => {
                if let Some(c) = flags.charge {
                    *charge = c;
                }
                if let Some(w) = flags.width {
                    *width = w;
                }
            }
            _ => return Err(CliError::Config("--charge/--width apply only to a gaussian source".into())),
        }
    }
    let trust_factor = file.solver.trust_factor.unwrap_or(DEFAULT_TRUST_FACTOR);
    let cfg = RunConfig {
        masses,
        coupling,
        seed: flags.seed.or(file.seed).unwrap_or(1),
        n: flags.n.or(file.grid.n).unwrap_or(8),
        box_length: flags.box_length.or(file.grid.box_length).unwrap_or(6.0),
        source,
        solver: SolverSettings {
            damping: flags.damping.or(file.solver.damping).unwrap_or(DEFAULT_DAMPING),
            max_iter: flags.max_iter.or(file.solver.max_iter).unwrap_or(DEFAULT_MAX_ITER),
            residual_tol: flags.residual_tol.or(file.solver.residual_tol).unwrap_or(DEFAULT_RESIDUAL_TOL),
            trust_factor,
            trust_radius_v: f64::NAN,
            trust_radius_a: f64::NAN,
        },
        k_max: flags.k_max.or(file.kernel.k_max).unwrap_or(10.0),
        points: flags.points.or(file.kernel.points).unwrap_or(64),
        output_dir: flags
            .output_dir
            .clone()
            .or(env_output)
            .or(file.output.dir)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
        threads: flags.threads.unwrap_or(0),
    };
    let scheme = cfg.scheme()?;
    let r = trust_radius(&scheme, coupling, trust_factor);
    let mut cfg = cfg;
    cfg.solver.trust_radius_v = file.solver.trust_radius_v.unwrap_or(r);
    cfg.solver.trust_radius_a = file.solver.trust_radius_a.unwrap_or(r);
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Config(m));
    if !(c.coupling >= 0.0 && c.coupling.is_finite()) {
        return bad(format!("coupling must be finite and non-negative, got {}", c.coupling));
    }
    if c.n < 2 {
        return bad(format!("grid n must be at least 2, got {}", c.n));
    }
    if !(c.box_length > 0.0 && c.box_length.is_finite()) {
        return bad(format!("box_length must be positive, got {}", c.box_length));
    }
    if !(c.k_max > 0.0 && c.k_max.is_finite()) {
        return bad(format!("k_max must be positive, got {}", c.k_max));
    }
    if c.points < 2 {
        return bad(format!("points must be at least 2, got {}", c.points));
    }
    if !(c.solver.trust_factor > 0.0) {
        return bad(format!("trust_factor must be positive, got {}", c.solver.trust_factor));
    }
    match &c.source {
        SourceSpec::Gaussian { width, .. } if !(*width > 0.0) => bad(format!("gaussian width must be positive, got {width}")),
        SourceSpec::File { rho: None, current: None } => bad("a file source needs rho, current or both".into()),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_is_flag_env_file_default() {
        let file: FileConfig = toml::from_str("coupling = 0.2\n[output]\ndir = \"from-file\"\n").unwrap();
        let flags = Overrides {
            coupling: Some(0.25),
            ..Default::default()
        };
        let c = resolve(file, &flags, Some("from-env".into())).unwrap();
        assert_eq!(c.coupling, 0.25);
        assert_eq!(c.output_dir, PathBuf::from("from-env"));
        assert_eq!(c.masses, [1.0, 2.0, 3.0]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<FileConfig>("colour = 1").is_err());
        assert!(toml::from_str::<FileConfig>("[grid]\nm = 3").is_err());
    }

    #[test]
    fn source_kinds_parse() {
        let f: FileConfig = toml::from_str("[source]\nkind = \"charge-mode\"\nmode = [1, 0, 0]\namplitude = 0.1\n").unwrap();
        assert_eq!(f.source, Some(SourceSpec::ChargeMode { mode: [1, 0, 0], amplitude: 0.1 }));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let file: FileConfig = toml::from_str("[grid]\nn = 1\n").unwrap();
        assert!(matches!(resolve(file, &Overrides::default(), None), Err(CliError::Config(_))));
        let flags = Overrides {
            masses: Some([2.0, 1.0, 3.0]),
            ..Default::default()
        };
        assert!(resolve(FileConfig::default(), &flags, None).is_err());
    }
}
