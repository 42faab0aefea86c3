//! Scan configuration: TOML with one section per family, parsed strictly
//! and then range-checked into a list of diagnostics.

use std::fmt;
use std::path::PathBuf;

use equibif_core::berger::TauConvention;
use equibif_core::rotsym::RotsymSweep;
use equibif_core::sandbox::SandboxConfig;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Clifford,
    Berger,
    Rotsym,
    Sandbox,
    Counterexample,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}`, expected csv, json or svg")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Svg]
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "one")]
    pub threads: usize,
    /// Seeds the randomized spot checks; none are run without it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn one() -> usize {
    1
}

impl Default for RunSection {
    fn default() -> Self {
        Self { threads: 1, seed: None }
    }
}

fn default_cutoff() -> u32 {
    20
}

fn default_samples() -> usize {
    20
}

fn default_threshold() -> f64 {
    1e-6
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CliffordSection {
    #[serde(default = "one_u32")]
    pub n: u32,
    #[serde(default = "one_u32")]
    pub m: u32,
    pub interval: [f64; 2],
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_threshold")]
    pub derivative_threshold: f64,
}

fn one_u32() -> u32 {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vary {
    #[default]
    R,
    Tau,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BergerSection {
    #[serde(default)]
    pub vary: Vary,
    /// Fixed fiber scale when sweeping `r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Fixed radius when sweeping `tau`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    pub interval: [f64; 2],
    #[serde(default)]
    pub tau_convention: TauConvention,
    #[serde(default = "default_cutoff")]
    pub cutoff: u32,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_threshold")]
    pub derivative_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotsymSection {
    #[serde(default = "RotsymSection::rho_low")]
    pub rho_low: f64,
    #[serde(default = "RotsymSection::rho_high")]
    pub rho_high: f64,
    #[serde(default = "RotsymSection::height")]
    pub height: f64,
    pub interval: [f64; 2],
    #[serde(default = "RotsymSection::samples")]
    pub samples: usize,
    #[serde(default = "RotsymSection::n_max")]
    pub n_max: u32,
    #[serde(default = "RotsymSection::h_window")]
    pub h_window: [f64; 2],
    #[serde(default = "RotsymSection::h_guess")]
    pub h_guess: f64,
    #[serde(default = "RotsymSection::h_probe")]
    pub h_probe: f64,
    #[serde(default = "RotsymSection::step")]
    pub step: f64,
    #[serde(default = "RotsymSection::max_length")]
    pub max_length: f64,
    #[serde(default = "RotsymSection::interior")]
    pub interior: usize,
    #[serde(default = "RotsymSection::crossing")]
    pub crossing: u32,
    #[serde(default = "RotsymSection::bisection_tolerance")]
    pub bisection_tolerance: f64,
    #[serde(default = "RotsymSection::derivative_step")]
    pub derivative_step: f64,
    #[serde(default = "default_threshold")]
    pub derivative_threshold: f64,
}

impl RotsymSection {
    fn rho_low() -> f64 {
        RotsymSweep::default().boundary.rho_low
    }
    fn rho_high() -> f64 {
        RotsymSweep::default().boundary.rho_high
    }
    fn height() -> f64 {
        RotsymSweep::default().boundary.h
    }
    fn samples() -> usize {
        RotsymSweep::default().samples
    }
    fn n_max() -> u32 {
        RotsymSweep::default().n_max
    }
    fn h_window() -> [f64; 2] {
        let (a, b) = RotsymSweep::default().shooting.h_window;
        [a, b]
    }
    fn h_guess() -> f64 {
        RotsymSweep::default().shooting.h_guess.unwrap_or(0.0)
    }
    fn h_probe() -> f64 {
        RotsymSweep::default().shooting.h_probe
    }
    fn step() -> f64 {
        RotsymSweep::default().shooting.step
    }
    fn max_length() -> f64 {
        RotsymSweep::default().shooting.max_length
    }
    fn interior() -> usize {
        RotsymSweep::default().shooting.interior
    }
    fn crossing() -> u32 {
        RotsymSweep::default().shooting.crossing
    }
    fn bisection_tolerance() -> f64 {
        RotsymSweep::default().bisection_tolerance
    }
    fn derivative_step() -> f64 {
        RotsymSweep::default().derivative_step
    }

    pub fn sweep(&self) -> RotsymSweep {
        RotsymSweep {
            boundary: equibif_core::rotsym::BoundaryConfig {
                rho_low: self.rho_low,
                rho_high: self.rho_high,
                h: self.height,
            },
            interval: self.interval,
            samples: self.samples,
            n_max: self.n_max,
            shooting: equibif_core::rotsym::ShootingOptions {
                h_window: (self.h_window[0], self.h_window[1]),
                h_guess: Some(self.h_guess),
                h_probe: self.h_probe,
                step: self.step,
                max_length: self.max_length,
                interior: self.interior,
                crossing: self.crossing,
            },
            bisection_tolerance: self.bisection_tolerance,
            derivative_step: self.derivative_step,
            derivative_threshold: self.derivative_threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandboxSection {
    #[serde(default = "SandboxSection::lambda_interval")]
    pub lambda_interval: [f64; 2],
    #[serde(default = "SandboxSection::branch_lambda")]
    pub branch_lambda: f64,
    #[serde(default = "SandboxSection::seeds")]
    pub seeds: usize,
    #[serde(default = "SandboxSection::seed_radius")]
    pub seed_radius: f64,
    #[serde(default = "SandboxSection::tolerance")]
    pub tolerance: f64,
    #[serde(default = "SandboxSection::samples")]
    pub samples: usize,
}

impl SandboxSection {
    fn lambda_interval() -> [f64; 2] {
        SandboxConfig::default().lambda_interval
    }
    fn branch_lambda() -> f64 {
        SandboxConfig::default().branch_lambda
    }
    fn seeds() -> usize {
        SandboxConfig::default().seeds
    }
    fn seed_radius() -> f64 {
        SandboxConfig::default().seed_radius
    }
    fn tolerance() -> f64 {
        SandboxConfig::default().tolerance
    }
    fn samples() -> usize {
        SandboxConfig::default().samples
    }

    pub fn config(&self) -> SandboxConfig {
        SandboxConfig {
            lambda_interval: self.lambda_interval,
            branch_lambda: self.branch_lambda,
            seeds: self.seeds,
            seed_radius: self.seed_radius,
            tolerance: self.tolerance,
            samples: self.samples,
        }
    }
}

impl Default for SandboxSection {
    fn default() -> Self {
        let c = SandboxConfig::default();
        Self {
            lambda_interval: c.lambda_interval,
            branch_lambda: c.branch_lambda,
            seeds: c.seeds,
            seed_radius: c.seed_radius,
            tolerance: c.tolerance,
            samples: c.samples,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleName {
    Planar,
    Spheres,
}

impl std::str::FromStr for CounterexampleName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "planar" => Ok(Self::Planar),
            "spheres" => Ok(Self::Spheres),
            other => Err(format!("unknown counterexample `{other}`, expected planar or spheres")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleSection {
    pub name: CounterexampleName,
    /// Cap parameter range; unused by the planar family.
    #[serde(default = "CounterexampleSection::interval")]
    pub interval: [f64; 2],
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl CounterexampleSection {
    fn interval() -> [f64; 2] {
        [-0.5, 0.5]
    }

    pub fn named(name: CounterexampleName) -> Self {
        Self {
            name,
            interval: Self::interval(),
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub family: Family,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub clifford: Option<CliffordSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub berger: Option<BergerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotsym: Option<RotsymSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sandbox: Option<SandboxSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleSection>,
}

impl ScanConfig {
    pub fn for_family(family: Family) -> Self {
        Self {
            family,
            output: OutputSection::default(),
            run: RunSection::default(),
            clifford: None,
            berger: None,
            rotsym: None,
            sandbox: None,
            counterexample: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    /// Dotted key path, empty for the document as a whole.
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.path, self.message)
        }
    }
}

/// Parses TOML into a [`ScanConfig`]. Syntax and type errors come back as a
/// single diagnostic at the offending key.
pub fn parse_config(text: &str) -> Result<ScanConfig, Vec<Diagnostic>> {
    let de = toml::de::Deserializer::parse(text).map_err(|e| vec![Diagnostic::new("", e.message().trim())])?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let mut path = e.path().to_string();
        if path == "." {
            path.clear();
        }
        let message = e.inner().message().trim().to_string();
        // Missing fields are reported against their parent; name the field.
        if let Some(field) = message
            .strip_prefix("missing field `")
            .and_then(|rest| rest.strip_suffix('`'))
        {
            path = if path.is_empty() {
                field.to_string()
            } else {
                format!("{path}.{field}")
            };
        }
        vec![Diagnostic::new(path, message)]
    })
}

/// Range checks on a parsed configuration; empty iff a scan would pass
/// validation.
pub fn validate(cfg: &ScanConfig) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut check = |ok: bool, path: &str, message: String| {
        if !ok {
            out.push(Diagnostic::new(path, message));
        }
    };
    check(
        !cfg.output.formats.is_empty(),
        "output.formats",
        "at least one format is required".into(),
    );
    check(
        cfg.run.threads >= 1,
        "run.threads",
        format!("{} must be at least 1", cfg.run.threads),
    );

    let increasing = |iv: [f64; 2]| iv[0].is_finite() && iv[1].is_finite() && iv[0] < iv[1];
    let positive = |v: f64| v.is_finite() && v > 0.0;
    let section_missing = |name: &str| format!("section [{name}] is required for family {name}");

    match cfg.family {
        Family::Clifford => match &cfg.clifford {
            None => check(false, "clifford", section_missing("clifford")),
            Some(c) => {
                check(c.n >= 1, "clifford.n", format!("{} must be at least 1", c.n));
                check(c.m >= 1, "clifford.m", format!("{} must be at least 1", c.m));
                let iv = c.interval;
                check(
                    increasing(iv) && iv[0] > 0.0 && iv[1] < 1.0,
                    "clifford.interval",
                    format!("[{}, {}] must be increasing inside (0, 1)", iv[0], iv[1]),
                );
                check(
                    c.cutoff >= 2,
                    "clifford.cutoff",
                    format!("{} must be at least 2", c.cutoff),
                );
                check(c.samples >= 1, "clifford.samples", "must be at least 1".into());
                check(
                    c.derivative_threshold >= 0.0,
                    "clifford.derivative_threshold",
                    "must be nonnegative".into(),
                );
            }
        },
        Family::Berger => match &cfg.berger {
            None => check(false, "berger", section_missing("berger")),
            Some(b) => {
                let iv = b.interval;
                match b.vary {
                    Vary::R => {
                        match b.tau {
                            None => check(false, "berger.tau", "required when vary = \"r\"".into()),
                            Some(t) => check(positive(t), "berger.tau", format!("{t} must be positive")),
                        }
                        check(
                            increasing(iv) && iv[0] > 0.0 && iv[1] < 1.0,
                            "berger.interval",
                            format!("[{}, {}] must be increasing inside (0, 1)", iv[0], iv[1]),
                        );
                    }
                    Vary::Tau => {
                        match b.r {
                            None => check(false, "berger.r", "required when vary = \"tau\"".into()),
                            Some(r) => check(r > 0.0 && r < 1.0, "berger.r", format!("{r} must lie in (0, 1)")),
                        }
                        check(
                            increasing(iv) && iv[0] > 0.0,
                            "berger.interval",
                            format!("[{}, {}] must be increasing and positive", iv[0], iv[1]),
                        );
                    }
                }
                check(
                    b.cutoff >= 2,
                    "berger.cutoff",
                    format!("{} must be at least 2", b.cutoff),
                );
                check(b.samples >= 1, "berger.samples", "must be at least 1".into());
                check(
                    b.derivative_threshold >= 0.0,
                    "berger.derivative_threshold",
                    "must be nonnegative".into(),
                );
            }
        },
        Family::Rotsym => match &cfg.rotsym {
            None => check(false, "rotsym", section_missing("rotsym")),
            Some(r) => {
                for (key, v) in [("rho_low", r.rho_low), ("rho_high", r.rho_high), ("height", r.height)] {
                    check(positive(v), &format!("rotsym.{key}"), format!("{v} must be positive"));
                }
                check(
                    increasing(r.interval),
                    "rotsym.interval",
                    format!("[{}, {}] must be finite and increasing", r.interval[0], r.interval[1]),
                );
                check(
                    increasing(r.h_window),
                    "rotsym.h_window",
                    format!("[{}, {}] must be finite and increasing", r.h_window[0], r.h_window[1]),
                );
                check(
                    r.h_guess > r.h_window[0] && r.h_guess < r.h_window[1],
                    "rotsym.h_guess",
                    format!("{} must lie inside h_window", r.h_guess),
                );
                check(r.samples >= 1, "rotsym.samples", "must be at least 1".into());
                check(r.n_max >= 1, "rotsym.n_max", "must be at least 1".into());
                check(
                    r.interior >= 16,
                    "rotsym.interior",
                    format!("{} must be at least 16", r.interior),
                );
                check(r.crossing >= 1, "rotsym.crossing", "must be at least 1".into());
                for (key, v) in [
                    ("h_probe", r.h_probe),
                    ("step", r.step),
                    ("max_length", r.max_length),
                    ("bisection_tolerance", r.bisection_tolerance),
                    ("derivative_step", r.derivative_step),
                ] {
                    check(positive(v), &format!("rotsym.{key}"), format!("{v} must be positive"));
                }
                check(
                    r.derivative_threshold >= 0.0,
                    "rotsym.derivative_threshold",
                    "must be nonnegative".into(),
                );
            }
        },
        Family::Sandbox => {
            let s = cfg.sandbox.clone().unwrap_or_default();
            check(
                increasing(s.lambda_interval),
                "sandbox.lambda_interval",
                format!(
                    "[{}, {}] must be finite and increasing",
                    s.lambda_interval[0], s.lambda_interval[1]
                ),
            );
            check(
                positive(s.branch_lambda),
                "sandbox.branch_lambda",
                "must be positive".into(),
            );
            check(s.seeds >= 1, "sandbox.seeds", "must be at least 1".into());
            check(
                positive(s.seed_radius),
                "sandbox.seed_radius",
                "must be positive".into(),
            );
            check(positive(s.tolerance), "sandbox.tolerance", "must be positive".into());
            check(s.samples >= 1, "sandbox.samples", "must be at least 1".into());
        }
        Family::Counterexample => match &cfg.counterexample {
            None => check(false, "counterexample", section_missing("counterexample")),
            Some(c) => {
                if c.name == CounterexampleName::Spheres {
                    let iv = c.interval;
                    check(
                        increasing(iv) && iv[0] >= -1.0 && iv[1] <= 1.0,
                        "counterexample.interval",
                        format!("[{}, {}] must be increasing inside [-1, 1]", iv[0], iv[1]),
                    );
                    check(c.samples >= 1, "counterexample.samples", "must be at least 1".into());
                }
            }
        },
    }
    out
}

/// Parse and validate in one step, as the `validate` subcommand does.
pub fn diagnose(text: &str) -> Vec<Diagnostic> {
    match parse_config(text) {
        Ok(cfg) => validate(&cfg),
        Err(d) => d,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLIFFORD: &str = "family = \"clifford\"\n[clifford]\ninterval = [0.4, 0.6]\n";

    #[test]
    fn valid_config_has_no_diagnostics() {
        assert!(diagnose(CLIFFORD).is_empty());
    }

    #[test]
    fn zero_tau_is_reported_at_its_key() {
        let d = diagnose("family = \"berger\"\n[berger]\ntau = 0.0\ninterval = [0.2, 0.4]\n");
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].path, "berger.tau");
    }

    #[test]
    fn missing_interval_is_one_diagnostic() {
        let d = diagnose("family = \"clifford\"\n[clifford]\nn = 1\n");
        assert_eq!(d.len(), 1, "{d:?}");
        assert_eq!(d[0].path, "clifford.interval");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let d = diagnose("family = \"clifford\"\n[clifford]\ninterval = [0.4, 0.6]\nradius = 2\n");
        assert_eq!(d.len(), 1);
        assert!(d[0].path.starts_with("clifford"), "{d:?}");
        assert!(d[0].message.contains("unknown field"));
    }

    #[test]
    fn config_round_trips_through_toml() {
        let cfg = parse_config(CLIFFORD).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
