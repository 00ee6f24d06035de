//! Run configuration: TOML file values overridden by command-line flags.

use std::path::{Path, PathBuf};

use bbspectra::domain::DomainSpec;
use bbspectra::radial::unit_ball_radius;
use clap::Args;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Raised for malformed or out-of-range configuration; exits with code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T, UsageError> {
    Err(UsageError(msg.into()))
}

/// Every tunable, as given on the command line or in the TOML file. All
/// fields are optional here; [`RunConfig::resolve`] fills in defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// TOML configuration file. Flags override its values.
    #[arg(long, value_name = "FILE")]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Subcommand the file is meant for; must match when present.
    #[arg(skip)]
    pub command: Option<String>,

    /// Space dimension N.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Density on the favorable set.
    #[arg(long)]
    pub mbar: Option<f64>,
    /// Magnitude of the weight on the hostile set.
    #[arg(long)]
    pub munder: Option<f64>,
    /// Favorable measures as fractions of |Ω|, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Perturbation amplitudes as fractions of r₀, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub amps: Option<Vec<f64>>,
    /// Harmonic degrees of the perturbation, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub mode: Option<Vec<usize>>,
    /// Highest harmonic degree in the mode table.
    #[arg(long)]
    pub lmax: Option<usize>,
    /// Grid cells across the longer side of the box.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Outer radius R of the truncated problem.
    #[arg(long = "radius", alias = "R")]
    pub radius: Option<f64>,
    /// Plane truncation in decay lengths beyond r₀ (when R is not given).
    #[arg(long)]
    pub decay_lengths: Option<f64>,
    /// Solver tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Iteration cap of the rearrangement.
    #[arg(long)]
    pub maxit: Option<usize>,
    /// Step of the finite-difference path derivatives.
    #[arg(long = "h-t")]
    pub h_t: Option<f64>,
    /// Domain tag, e.g. `disk:1`, `ellipse:1,0.6`, `rectangle:2,1`,
    /// `stadium:0.5,0.4`, `lshape:1`.
    #[arg(long)]
    pub domain: Option<String>,
    /// Seed for random initial sets.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Initial set: `incenter` or `random`.
    #[arg(long)]
    pub init: Option<String>,
    /// Sweep resolution in cells per blow-up radius (used when no grid is given).
    #[arg(long)]
    pub cells_per_radius: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: BBSPECTRA_THREADS, else all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Reduced acceptance battery.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub quick: Option<bool>,
    /// Treat inconclusive acceptance items as failures.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub strict: Option<bool>,
    /// Acceptance criteria to run, comma separated (default: all).
    #[arg(long, value_delimiter = ',')]
    pub only: Option<Vec<u32>>,
}

macro_rules! merge {
    ($flags:ident, $file:ident, $($f:ident),*) => {
        Params {
            config: $flags.config.clone(),
            command: $file.command.clone(),
            $($f: $flags.$f.clone().or_else(|| $file.$f.clone()),)*
            ..Params::default()
        }
    };
}

impl Params {
    pub fn from_toml(text: &str) -> Result<Self, UsageError> {
        toml::from_str(text).map_err(|e| UsageError(format!("config: {e}")))
    }

    /// Reads `--config` when given; flag values win over file values.
    pub fn merged(&self) -> Result<Self, UsageError> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
                Self::from_toml(&text)?
            }
            None => Self::default(),
        };
        let flags = self;
        Ok(merge!(
            flags, file, dim, mbar, munder, eps, amps, mode, lmax, grid, radius, decay_lengths, tol,
            maxit, h_t, domain, seed, init, cells_per_radius, out, threads, quick, strict, only
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Limit,
    Modes,
    Asymmetry,
    Optimize,
    Sweep,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Limit => "limit",
            Command::Modes => "modes",
            Command::Asymmetry => "asymmetry",
            Command::Optimize => "optimize",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitKind {
    Incenter,
    Random,
}

/// Fully resolved and validated configuration. Its JSON form is what the
/// config hash covers; the output directory and thread count are excluded
/// because they do not change any number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dim: usize,
    pub mbar: f64,
    pub munder: f64,
    pub eps: Vec<f64>,
    pub amps: Vec<f64>,
    pub modes: Vec<usize>,
    pub lmax: usize,
    pub grid: Option<usize>,
    pub radius: Option<f64>,
    pub decay_lengths: f64,
    pub tol: Option<f64>,
    pub maxit: usize,
    pub h_t: f64,
    pub domain: Option<DomainSpec>,
    pub seed: u64,
    pub init: InitKind,
    pub cells_per_radius: f64,
    pub quick: bool,
    pub strict: bool,
    pub only: Vec<u32>,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn positive(name: &str, v: f64) -> Result<f64, UsageError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        usage(format!("--{name} must be positive and finite, got {v}"))
    }
}

impl RunConfig {
    pub fn resolve(command: Command, p: &Params) -> Result<Self, UsageError> {
        if let Some(c) = &p.command {
            if c != command.name() {
                return usage(format!("config file is for `{c}`, not `{}`", command.name()));
            }
        }
        let dim = p.dim.unwrap_or(2);
        if !(1..=3).contains(&dim) {
            return usage(format!("--dim must be 1, 2 or 3, got {dim}"));
        }
        let planar = matches!(command, Command::Asymmetry | Command::Optimize | Command::Sweep);
        if planar && dim != 2 {
            return usage(format!("`{}` supports --dim 2 only", command.name()));
        }
        let mbar = positive("mbar", p.mbar.unwrap_or(1.0))?;
        let munder = positive("munder", p.munder.unwrap_or(1.0))?;

        let needs_domain = matches!(command, Command::Optimize | Command::Sweep);
        let domain = match &p.domain {
            Some(tag) => Some(
                tag.parse::<DomainSpec>()
                    .map_err(|e| UsageError(format!("--domain {tag}: {e}")))?,
            ),
            None if needs_domain => return usage("--domain is required"),
            None => None,
        };
        let eps = match &p.eps {
            Some(v) => v.clone(),
            None if needs_domain => return usage("--eps is required"),
            None => Vec::new(),
        };
        if needs_domain && eps.is_empty() {
            return usage("--eps needs at least one value");
        }
        for &e in &eps {
            if !(e > 0.0 && e <= 1.0) {
                return usage(format!("--eps values are fractions of |Ω| in (0, 1], got {e}"));
            }
        }
        if command == Command::Optimize && eps.len() != 1 {
            return usage("`optimize` takes a single --eps; use `sweep` for several");
        }

        let amps = p.amps.clone().unwrap_or_else(|| vec![0.02, 0.04, 0.08]);
        for &a in &amps {
            if !(a.is_finite() && a >= 0.0) {
                return usage(format!("--amps must be non-negative, got {a}"));
            }
        }
        let modes = p.mode.clone().unwrap_or_else(|| vec![2]);
        if modes.is_empty() || modes.iter().any(|&k| k < 2) {
            return usage("--mode values must be at least 2");
        }
        let lmax = p.lmax.unwrap_or(6);
        if lmax < 2 {
            return usage(format!("--lmax must be at least 2, got {lmax}"));
        }
        let grid = p.grid;
        if let Some(g) = grid {
            if g < 8 {
                return usage(format!("--grid must be at least 8, got {g}"));
            }
        }
        let r0 = unit_ball_radius(dim);
        let radius = match p.radius {
            Some(r) if !(r.is_finite() && r > r0) => {
                return usage(format!("--R = {r} must exceed r0 = {r0}"));
            }
            r => r,
        };
        let decay_lengths = positive("decay-lengths", p.decay_lengths.unwrap_or(8.0))?;
        let tol = p.tol.map(|t| positive("tol", t)).transpose()?;
        let maxit = p.maxit.unwrap_or(500);
        if maxit == 0 {
            return usage("--maxit must be positive");
        }
        let h_t = p.h_t.unwrap_or(0.25);
        if !(0.05..=0.25).contains(&h_t) {
            return usage(format!("--h-t must lie in [0.05, 0.25], got {h_t}"));
        }
        let init = match p.init.as_deref().unwrap_or("incenter") {
            "incenter" => InitKind::Incenter,
            "random" => InitKind::Random,
            other => return usage(format!("--init must be `incenter` or `random`, got `{other}`")),
        };
        let cells_per_radius = positive("cells-per-radius", p.cells_per_radius.unwrap_or(24.0))?;
        if let Some(0) = p.threads {
            return usage("--threads must be positive");
        }
        let only = p.only.clone().unwrap_or_default();
        if let Some(&bad) = only.iter().find(|&&c| !(1..=10).contains(&c)) {
            return usage(format!("--only: no criterion {bad}"));
        }
        Ok(Self {
            command,
            dim,
            mbar,
            munder,
            eps,
            amps,
            modes,
            lmax,
            grid,
            radius,
            decay_lengths,
            tol,
            maxit,
            h_t,
            domain,
            seed: p.seed.unwrap_or(0),
            init,
            cells_per_radius,
            quick: p.quick.unwrap_or(false),
            strict: p.strict.unwrap_or(false),
            only,
            out: p
                .out
                .clone()
                .unwrap_or_else(|| Path::new("bbspectra-out").join(command.name())),
            threads: p.threads,
        })
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(Params::from_toml("dim = 2\nmbar = 1.5\n").is_ok());
        let err = Params::from_toml("dim = 2\ncolour = \"red\"\n").unwrap_err();
        assert!(err.0.contains("colour"), "{err}");
    }

    #[test]
    fn flags_override_file() {
        let file = Params::from_toml("mbar = 3.0\nmunder = 2.0\neps = [0.1, 0.2]\n").unwrap();
        let flags = Params {
            mbar: Some(1.5),
            ..Params::default()
        };
        let m = merge!(flags, file, dim, mbar, munder, eps);
        assert_eq!(m.mbar, Some(1.5));
        assert_eq!(m.munder, Some(2.0));
        assert_eq!(m.eps, Some(vec![0.1, 0.2]));
    }

    #[test]
    fn validation() {
        let ok = |p: Params| RunConfig::resolve(Command::Limit, &p);
        assert!(ok(Params::default()).is_ok());
        assert!(ok(Params { radius: Some(0.3), ..Params::default() }).is_err());
        assert!(ok(Params { mbar: Some(-1.0), ..Params::default() }).is_err());
        assert!(RunConfig::resolve(Command::Modes, &Params { lmax: Some(0), ..Params::default() }).is_err());
        assert!(RunConfig::resolve(Command::Optimize, &Params::default()).is_err());
        let bad_tag = Params {
            domain: Some("hexagon:1".into()),
            eps: Some(vec![0.1]),
            ..Params::default()
        };
        assert!(RunConfig::resolve(Command::Optimize, &bad_tag).is_err());
        let mismatch = Params {
            command: Some("sweep".into()),
            ..Params::default()
        };
        assert!(ok(mismatch).is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::resolve(Command::Modes, &Params::default()).unwrap();
        let mut b = a.clone();
        b.out = PathBuf::from("/elsewhere");
        b.threads = Some(3);
        assert_eq!(a.hash(), b.hash());
        b.lmax = 7;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
