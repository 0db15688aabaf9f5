//! `bogflow` — experiment drivers for the Bogoliubov ground-state
//! construction.
//!
//! Usage: `bogflow <subcommand> --config <path> [--out <dir>] [--format json,csv]`
//!
//! Subcommands: `three-mode`, `cascade`, `xseq`, `truncation-study`,
//! `oracle`, `convergence`. Exit codes: 0 all checks passed, 1 error,
//! 2 invariant failure. `BOGFLOW_THREADS` caps scan parallelism.

mod commands;
mod config;
mod report;

use config::RunConfig;
use report::{Cell, Report};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

struct Args {
    subcommand: String,
    config_path: PathBuf,
    out_dir: PathBuf,
    formats: Vec<String>,
}

fn usage() -> String {
    "usage: bogflow <three-mode|cascade|xseq|truncation-study|oracle|convergence> \
     --config <path> [--out <dir>] [--format json,csv]"
        .into()
}

fn parse_args(mut argv: impl Iterator<Item = String>) -> Result<Args, String> {
    let subcommand = argv.next().ok_or_else(usage)?;
    if subcommand == "--help" || subcommand == "-h" {
        return Err(usage());
    }
    let mut config_path = None;
    let mut out_dir = PathBuf::from("out");
    let mut formats = vec!["json".to_string(), "csv".to_string()];
    while let Some(arg) = argv.next() {
        match arg.as_str() {
            "--config" => {
                config_path = Some(PathBuf::from(
                    argv.next().ok_or("--config needs a path")?,
                ));
            }
            "--out" => {
                out_dir = PathBuf::from(argv.next().ok_or("--out needs a directory")?);
            }
            "--format" => {
                let spec = argv.next().ok_or("--format needs a list")?;
                formats = spec.split(',').map(|s| s.trim().to_string()).collect();
                for f in &formats {
                    if f != "json" && f != "csv" {
                        return Err(format!("unknown format `{f}`; expected json or csv"));
                    }
                }
            }
            other => return Err(format!("unknown argument `{other}`\n{}", usage())),
        }
    }
    Ok(Args {
        subcommand,
        config_path: config_path.ok_or("--config is required")?,
        out_dir,
        formats,
    })
}

/// Canonical echo of the parsed config with defaults filled in.
fn config_echo(cfg: &RunConfig) -> String {
    let mut pairs = String::new();
    for (k, p) in cfg.pairs.iter().enumerate() {
        if k > 0 {
            pairs.push_str(", ");
        }
        let j: Vec<String> = p.j.iter().map(|c| c.to_string()).collect();
        pairs.push_str(&format!("{{\"j\": [{}]", j.join(", ")));
        if let Some(phi) = p.phi {
            pairs.push_str(&format!(", \"phi\": {}", report::fmt_f64(phi)));
        }
        if let Some(eps) = p.eps {
            pairs.push_str(&format!(", \"eps\": {}", report::fmt_f64(eps)));
        }
        pairs.push('}');
    }
    let scans = {
        let fmt_u32s = |v: &Option<Vec<u32>>| {
            v.as_ref()
                .map(|xs| {
                    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                    format!("[{}]", items.join(", "))
                })
                .unwrap_or_else(|| "null".into())
        };
        let eps = cfg
            .scans
            .eps_values
            .as_ref()
            .map(|xs| {
                let items: Vec<String> = xs.iter().map(|x| report::fmt_f64(*x)).collect();
                format!("[{}]", items.join(", "))
            })
            .unwrap_or_else(|| "null".into());
        format!(
            "{{\"n_values\": {}, \"eps_values\": {}, \"h_values\": {}}}",
            fmt_u32s(&cfg.scans.n_values),
            eps,
            fmt_u32s(&cfg.scans.h_values)
        )
    };
    format!(
        "{{\"N\": {}, \"d\": {}, \"L\": {}, \"phi0\": {}, \"pairs\": [{}], \
         \"tolerances\": {{\"fixed_point\": {}}}, \
         \"truncation\": {{\"h\": {}, \"jbar\": {}, \"zeta\": {}, \"dn0\": {}}}, \
         \"scans\": {}, \
         \"oracle\": {{\"include_v\": {}, \"basis_cap\": {}}}}}",
        cfg.n,
        cfg.d,
        report::fmt_f64(cfg.l),
        report::fmt_f64(cfg.phi0),
        pairs,
        cfg.tolerances
            .fixed_point
            .map(report::fmt_f64)
            .unwrap_or_else(|| "null".into()),
        cfg.truncation
            .h
            .map(|h| h.to_string())
            .unwrap_or_else(|| "null".into()),
        cfg.truncation
            .jbar
            .map(|j| j.to_string())
            .unwrap_or_else(|| "null".into()),
        report::fmt_f64(cfg.truncation.zeta),
        report::fmt_f64(cfg.truncation.dn0),
        scans,
        cfg.oracle.include_v,
        cfg.oracle.basis_cap,
    )
}

fn run() -> Result<bool, String> {
    let args = parse_args(std::env::args().skip(1))?;
    let raw = std::fs::read(&args.config_path)
        .map_err(|e| format!("cannot read {}: {e}", args.config_path.display()))?;
    let cfg = RunConfig::parse(std::str::from_utf8(&raw).map_err(|e| e.to_string())?)?;

    let start = Instant::now();
    let mut rep = Report::new(
        &args.subcommand,
        report::config_hash(&raw),
        config_echo(&cfg),
    );
    commands::run(&args.subcommand, &cfg, &mut rep)?;
    rep.scalar(
        "checks_passed",
        Cell::Int(rep.checks.iter().filter(|c| c.passed).count() as i64),
    );
    rep.scalar("checks_total", Cell::Int(rep.checks.len() as i64));

    let written = rep
        .emit(&args.out_dir, &args.formats)
        .map_err(|e| format!("emit: {e}"))?;
    rep.emit_sidecar(&args.out_dir, start.elapsed().as_millis())
        .map_err(|e| format!("sidecar: {e}"))?;

    for path in &written {
        eprintln!("wrote {path}");
    }
    for w in &rep.warnings {
        eprintln!("warning: {w}");
    }
    for c in &rep.checks {
        eprintln!(
            "{} {} {}",
            if c.passed { "pass" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(rep.all_passed())
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::from(0),
        Ok(false) => ExitCode::from(2),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
