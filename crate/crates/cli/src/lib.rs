//! Batch driver for the padic-expo verification suites.

pub mod config;
pub mod report;
pub mod suites;

use std::fs::File;
use std::io::{self, BufWriter, Write};

use padic_expo::classfield::ProjectivePoint;
use padic_expo::exponentials::{e_u2_series, e_un_series, Exponentials};
use padic_expo::extensions::CoherentRoots;
use padic_expo::LocalRing;

use config::{Cli, Command, ConfigError, RunConfig, SeriesArgs, Which};
use report::{exit_code, run_cases, write_records, Case};
use suites::Env;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Verify(args) => RunConfig::resolve(&args.common, args.suite).map(|cfg| {
            let env = env(cfg);
            let cases: Vec<Case> = env
                .cfg
                .suite
                .expand()
                .into_iter()
                .flat_map(|s| suites::cases(&env, s))
                .collect();
            emit(&env.cfg, &cases)
        }),
        Command::ExploreSigmaAlpha(common) => RunConfig::resolve(&common, None).map(|cfg| {
            let env = env(cfg);
            let cases = suites::explore_sigma_alpha(&env);
            emit(&env.cfg, &cases);
            EXIT_PASS
        }),
        Command::Series(args) => series(&args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
    }
}

fn env(cfg: RunConfig) -> std::sync::Arc<Env> {
    let ctx = cfg.context().expect("validated by resolve");
    Env::new(cfg, ctx)
}

fn emit(cfg: &RunConfig, cases: &[Case]) -> i32 {
    let records = run_cases(cases);
    let written = match &cfg.json_lines {
        Some(path) => File::create(path).and_then(|f| write_records(BufWriter::new(f), &records)),
        None => write_records(io::stdout().lock(), &records),
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return EXIT_FAIL;
    }
    exit_code(&records)
}

fn series(args: &SeriesArgs) -> Result<i32, ConfigError> {
    let cfg = RunConfig::resolve(&args.common, None)?;
    let ctx = cfg.context()?;
    let fail = |e: padic_expo::Error| ConfigError(e.to_string());
    let s = match args.which {
        Which::Dwork => Exponentials::new(&ctx).map_err(fail)?.dwork,
        Which::EU2 => {
            let ex = Exponentials::new(&ctx).map_err(fail)?;
            let pts = ProjectivePoint::all(ex.k.residue_field());
            let pt = pts.get(args.u_index).ok_or_else(|| {
                ConfigError(format!("u-index {} out of range ({} points)", args.u_index, pts.len()))
            })?;
            let (_, u) = ex.unit_pair(pt.rep()).map_err(fail)?;
            let tower = ex.tower(&u).map_err(fail)?;
            e_u2_series(&tower, ctx.degree_cap).map_err(fail)?
        }
        Which::EUn => {
            let k = LocalRing::unramified(&ctx);
            let a = args.u_index as u64 + 1;
            if a >= ctx.p {
                return Err(ConfigError(format!("u-index {} out of range", args.u_index)));
            }
            let u = k.teichmuller(k.residue_field().from_prime_field(a));
            let roots = CoherentRoots::build(&k, &u, args.depth).map_err(fail)?;
            e_un_series(&roots, ctx.degree_cap).map_err(fail)?
        }
    };
    match &cfg.csv {
        Some(path) => suites::write_csv(path, &s).map_err(fail)?,
        None => {
            let mut out = io::stdout().lock();
            s.write_csv(&mut out)
                .and_then(|_| out.flush())
                .map_err(|e| ConfigError(e.to_string()))?;
        }
    }
    Ok(EXIT_PASS)
}
