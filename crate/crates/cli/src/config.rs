use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use padic_expo::PrecisionContext;

#[derive(Debug, Parser)]
#[command(name = "pexp", version, about = "Runs p-adic verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites and emit one JSON record per check.
    Verify(VerifyArgs),
    /// Write the valuation profile of one series as CSV.
    Series(SeriesArgs),
    /// Compare σ̃(α_u) with α_{σ(u)} under each root alignment (informational).
    ExploreSigmaAlpha(CommonArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(short = 'p')]
    pub p: Option<u64>,
    #[arg(short = 'd')]
    pub d: Option<usize>,
    /// Target precision N in p-digits.
    #[arg(short = 'N')]
    pub n: Option<u32>,
    /// Series truncation degree D.
    #[arg(short = 'D')]
    pub degree_cap: Option<usize>,
    #[arg(long)]
    pub guard: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// key = value file; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write records here instead of stdout.
    #[arg(long = "json-lines")]
    pub json_lines: Option<PathBuf>,
    /// Valuation-profile output (a directory for `verify`, a file for `series`).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub which: Which,
    /// Index into P(k) for e-u2, or a − 1 for u = [a] ∈ μ_{p−1} for e-un.
    #[arg(long = "u-index", default_value_t = 0)]
    pub u_index: usize,
    /// Depth for e-un.
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Dwork,
    #[value(name = "e-u2")]
    EU2,
    #[value(name = "e-un")]
    EUn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Suite {
    Dwork,
    #[value(name = "e-u2")]
    EU2,
    #[value(name = "e-un")]
    EUn,
    Witt,
    #[value(name = "self-dual")]
    SelfDual,
    #[value(name = "norm-group")]
    NormGroup,
    Classfield,
    Frobenius,
    All,
}

impl Suite {
    pub const EACH: [Suite; 8] = [
        Suite::Dwork,
        Suite::EU2,
        Suite::EUn,
        Suite::Witt,
        Suite::SelfDual,
        Suite::NormGroup,
        Suite::Classfield,
        Suite::Frobenius,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Dwork => "dwork",
            Suite::EU2 => "e-u2",
            Suite::EUn => "e-un",
            Suite::Witt => "witt",
            Suite::SelfDual => "self-dual",
            Suite::NormGroup => "norm-group",
            Suite::Classfield => "classfield",
            Suite::Frobenius => "frobenius",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Suite::EACH.to_vec(),
            s => vec![s],
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

    fn from_str(s: &str) -> Result<Self, String> {
        <Suite as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub p: u64,
    pub d: usize,
    pub n: u32,
    pub degree_cap: usize,
    pub guard: Option<u32>,
    pub suite: Suite,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub json_lines: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            p: 3,
            d: 1,
            n: 12,
            degree_cap: 256,
            guard: None,
            suite: Suite::All,
            seed: 0,
            csv: None,
            json_lines: None,
        }
    }
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("bad value {value:?} for {key}")))
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(args: &CommonArgs, suite: Option<Suite>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            for (k, v) in read_config_file(path)? {
                cfg.set(&k, &v)?;
            }
        }
        if let Some(p) = args.p {
            cfg.p = p;
        }
        if let Some(d) = args.d {
            cfg.d = d;
        }
        if let Some(n) = args.n {
            cfg.n = n;
        }
        if let Some(cap) = args.degree_cap {
            cfg.degree_cap = cap;
        }
        if args.guard.is_some() {
            cfg.guard = args.guard;
        }
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        if let Some(s) = suite {
            cfg.suite = s;
        }
        if args.csv.is_some() {
            cfg.csv = args.csv.clone();
        }
        if args.json_lines.is_some() {
            cfg.json_lines = args.json_lines.clone();
        }
        cfg.context()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "p" => self.p = parse(key, value)?,
            "d" => self.d = parse(key, value)?,
            "N" | "n" => self.n = parse(key, value)?,
            "D" | "degree_cap" => self.degree_cap = parse(key, value)?,
            "guard" => self.guard = Some(parse(key, value)?),
            "seed" => self.seed = parse(key, value)?,
            "suite" => self.suite = value.parse().map_err(ConfigError)?,
            "csv" => self.csv = Some(PathBuf::from(value)),
            "json-lines" | "json_lines" => self.json_lines = Some(PathBuf::from(value)),
            _ => return Err(ConfigError(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn context(&self) -> Result<PrecisionContext, ConfigError> {
        self.context_with_cap(self.degree_cap)
    }

    /// The configured context with another truncation degree; an explicit
    /// guard is kept only if it still covers that degree.
    pub fn context_with_cap(&self, cap: usize) -> Result<PrecisionContext, ConfigError> {
        let r = match self.guard {
            Some(g) if cap == self.degree_cap => {
                PrecisionContext::with_guard(self.p, self.d, self.n, cap, g)
            }
            _ => PrecisionContext::new(self.p, self.d, self.n, cap),
        };
        r.map_err(|e| ConfigError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_text_parses_and_flags_win() {
        let map = parse_config_text("# run\np = 5\nD=64  # short\nsuite = witt\n").unwrap();
        let mut cfg = RunConfig::default();
        for (k, v) in &map {
            cfg.set(k, v).unwrap();
        }
        assert_eq!((cfg.p, cfg.degree_cap, cfg.suite), (5, 64, Suite::Witt));
        assert!(parse_config_text("p 5").is_err());
        assert!(cfg.set("colour", "red").is_err());
        assert!(cfg.set("p", "five").is_err());
    }

    #[test]
    fn invalid_contexts_are_config_errors() {
        let args = CommonArgs {
            p: Some(4),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&args, None).is_err());
        let ok = RunConfig::resolve(&CommonArgs::default(), Some(Suite::Dwork)).unwrap();
        assert_eq!(ok.suite.expand(), vec![Suite::Dwork]);
        assert_eq!(Suite::All.expand().len(), 8);
    }
}
