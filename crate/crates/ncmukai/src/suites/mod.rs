//! Verification suites, one per module family.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Config;
use crate::error::AppError;
use crate::report::Outcome;

mod algebra;
mod curvature;
mod dg;
mod gen;
mod kernel;
mod oscillator;
mod pairing;

pub use dg::default_instances;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Oscillator,
    Algebra,
    Curvature,
    Kernel,
    Pairing,
    Dg,
}

impl Suite {
    pub const ALL: [Suite; 6] = [Suite::Oscillator, Suite::Algebra, Suite::Curvature, Suite::Kernel, Suite::Pairing, Suite::Dg];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oscillator => "oscillator",
            Suite::Algebra => "algebra",
            Suite::Curvature => "curvature",
            Suite::Kernel => "kernel",
            Suite::Pairing => "pairing",
            Suite::Dg => "dg",
        }
    }

    /// Stream index of the suite's random generator.
    fn stream(self) -> u64 {
        self as u64 + 1
    }

    pub fn run(self, cfg: &Config, seed: u64) -> Result<Outcome, AppError> {
        let ctx = Ctx { cfg, seed, suite: self };
        match self {
            Suite::Oscillator => oscillator::run(&ctx),
            Suite::Algebra => algebra::run(&ctx),
            Suite::Curvature => curvature::run(&ctx),
            Suite::Kernel => kernel::run(&ctx),
            Suite::Pairing => pairing::run(&ctx),
            Suite::Dg => dg::run(&ctx),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

/// Per-suite view of the run.
pub struct Ctx<'a> {
    pub cfg: &'a Config,
    pub seed: u64,
    pub suite: Suite,
}

impl Ctx<'_> {
    /// Independent generator for one trial. The ChaCha stream id packs the
    /// suite and the trial, so any trial can be replayed on its own.
    pub fn rng(&self, trial: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(self.suite.stream() << 32 | trial);
        r
    }
}
