//! Dispatch from a validated configuration to the family detectors.

use equibif_core::berger::{berger_detect, berger_morse_index, BergerParams, BergerScan, BergerSweep};
use equibif_core::clifford::{clifford_detect, morse_index, CliffordParams, CliffordScan};
use equibif_core::counterexamples::{cap_gate_test, planar_gate_test};
use equibif_core::report::BifurcationReport;
use equibif_core::rotsym::rotsym_detect;
use equibif_core::sandbox::sandbox_detect;
use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{validate, BergerSection, CounterexampleName, Family, Format, ScanConfig, Vary};
use crate::error::CliError;

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<std::path::PathBuf>,
    pub formats: Option<Vec<Format>>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScanConfig) {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(formats) = &self.formats {
            cfg.output.formats = formats.clone();
        }
        if let Some(threads) = self.threads {
            cfg.run.threads = threads;
        }
        if let Some(seed) = self.seed {
            cfg.run.seed = Some(seed);
        }
    }
}

/// Number of seeded spot checks per scan.
const SPOT_CHECKS: usize = 3;

/// Runs the detector selected by `cfg.family`.
pub fn run_scan(cfg: &ScanConfig) -> Result<BifurcationReport, CliError> {
    let diagnostics = validate(cfg);
    if !diagnostics.is_empty() {
        return Err(CliError::Config(diagnostics));
    }
    if cfg.run.threads > 1 {
        info!("threads = {}: sweeps are evaluated serially", cfg.run.threads);
    }
    let mut report = match cfg.family {
        Family::Clifford => {
            let c = cfg.clifford.as_ref().expect("validated");
            let scan = CliffordScan {
                n: c.n,
                m: c.m,
                interval: c.interval,
                cutoff: c.cutoff,
                samples: c.samples,
                derivative_threshold: c.derivative_threshold,
            };
            let mut report = clifford_detect(&scan)?;
            if let Some(seed) = cfg.run.seed {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..SPOT_CHECKS {
                    let r = rng.random_range(c.interval[0]..c.interval[1]);
                    let p = CliffordParams::new(c.n, c.m, r)?;
                    let (a, b) = (morse_index(&p, c.cutoff)?.0, morse_index(&p, 2 * c.cutoff)?.0);
                    report.notes.push(spot_note(r, c.cutoff, a, b));
                }
            }
            report
        }
        Family::Berger => run_berger(cfg.berger.as_ref().expect("validated"), cfg.run.seed)?,
        Family::Rotsym => {
            let sweep = cfg.rotsym.as_ref().expect("validated").sweep();
            rotsym_detect(&sweep)?
        }
        Family::Sandbox => {
            let config = cfg.sandbox.clone().unwrap_or_default().config();
            let outcome = sandbox_detect(&config)?;
            let mut report = outcome.report;
            let radii: Vec<String> = outcome.branch_radii.iter().map(|r| format!("{r:.12}")).collect();
            report.notes.push(format!(
                "branch radii at lambda = {}: [{}]",
                config.branch_lambda,
                radii.join(", ")
            ));
            report
        }
        Family::Counterexample => {
            let c = cfg.counterexample.as_ref().expect("validated");
            match c.name {
                CounterexampleName::Planar => planar_gate_test()?,
                CounterexampleName::Spheres => cap_gate_test(c.interval, c.samples)?,
            }
        }
    };
    if cfg.run.seed.is_some() && !matches!(cfg.family, Family::Clifford | Family::Berger) {
        report.notes.push("seed has no spot checks for this family".into());
    }
    report.sort_instants();
    debug!("{} samples, {} instants", report.samples.len(), report.instants.len());
    Ok(report)
}

fn spot_note(p: f64, cutoff: u32, a: usize, b: usize) -> String {
    let status = if a == b { "agrees" } else { "DISAGREES" };
    format!(
        "spot check at {p:.12}: index {a} at cutoff {cutoff} {status} with {b} at cutoff {}",
        2 * cutoff
    )
}

fn run_berger(b: &BergerSection, seed: Option<u64>) -> Result<BifurcationReport, CliError> {
    let conv = b.tau_convention;
    let (sweep, interval) = match b.vary {
        Vary::R => (
            BergerSweep::Radius {
                tau: conv.fiber_scale(b.tau.expect("validated")),
            },
            b.interval,
        ),
        Vary::Tau => {
            let (x, y) = (conv.fiber_scale(b.interval[0]), conv.fiber_scale(b.interval[1]));
            (
                BergerSweep::Tau {
                    r: b.r.expect("validated"),
                },
                [x.min(y), x.max(y)],
            )
        }
    };
    let scan = BergerScan {
        sweep,
        interval,
        cutoff: b.cutoff,
        samples: b.samples,
        derivative_threshold: b.derivative_threshold,
    };
    let mut report = berger_detect(&scan)?;
    if conv != Default::default() {
        report
            .notes
            .push("tau_convention = inverse_fiber_scale: parameters are reported as fiber scale 1/tau".into());
    }
    if let Some(seed) = seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..SPOT_CHECKS {
            let t = rng.random_range(interval[0]..interval[1]);
            let p = match sweep {
                BergerSweep::Radius { tau } => BergerParams::new(t, tau)?,
                BergerSweep::Tau { r } => BergerParams::new(r, t)?,
            };
            let (x, y) = (
                berger_morse_index(&p, b.cutoff)?.0,
                berger_morse_index(&p, 2 * b.cutoff)?.0,
            );
            report.notes.push(spot_note(t, b.cutoff, x, y));
        }
    }
    Ok(report)
}
