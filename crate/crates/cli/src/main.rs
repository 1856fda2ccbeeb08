use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qseries::qexpr::{parse, Evaluator};
use qseries::qlaurent::{fit_denom, Exp, QSeries};
use qseries::strings::{string_coeff_oracle, string_normalized, LevelData, StringId};
use qseries::verify::{
    builtin_registry, check_texts, parse_order, parse_registry, ring_from_name, run_identity, run_suite,
    IdentityRecord, SuiteReport,
};
use qseries::{Conductor, Error};

#[derive(Parser, Debug)]
#[command(name = "qseries", version, about = "Exact truncated q-series: expand, string functions, identity checks")]
struct Cli {
    /// key=value defaults (order, ring, denom, jobs, format); flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Truncation order: an integer or a/b.
    #[arg(long)]
    order: Option<String>,
    /// Coefficient ring: rat, gauss or eisenstein.
    #[arg(long)]
    ring: Option<String>,
    /// Emit JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate an expression to a truncated series.
    Expand {
        /// Expression text, e.g. "j(-q, 1)" or "f3".
        expr: String,
        #[command(flatten)]
        common: Common,
        /// Exponent denominator of the JSON series.
        #[arg(long)]
        denom: Option<i64>,
    },
    /// String function C or its normalized form.
    String {
        /// p in the level N = p'/p - 2, coprime to p'.
        #[arg(long)]
        p: i64,
        /// p' in the level N = p'/p - 2.
        #[arg(long)]
        pprime: i64,
        /// Weight index m, same parity as ell.
        #[arg(long)]
        m: i64,
        /// Spin ell >= 0.
        #[arg(long)]
        ell: i64,
        /// Multiply by q^(-s) so that the exponents are integers.
        #[arg(long)]
        normalized: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check one registry identity or an ad hoc pair of expressions.
    Verify {
        /// Registry identity to check over all its parameter values.
        #[arg(long, conflicts_with_all = ["lhs", "rhs"])]
        name: Option<String>,
        /// Left side of an ad hoc identity.
        #[arg(long, requires = "rhs")]
        lhs: Option<String>,
        /// Right side of an ad hoc identity.
        #[arg(long, requires = "lhs")]
        rhs: Option<String>,
        /// Registry file to use instead of the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run every registry identity whose name matches a glob.
    Suite {
        /// Glob over identity names.
        #[arg(long, default_value = "*")]
        filter: String,
        /// Worker threads (default 1).
        #[arg(long)]
        jobs: Option<usize>,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Registry file to use instead of the built-in one.
        #[arg(long)]
        registry: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Default)]
struct Config {
    order: Option<String>,
    ring: Option<String>,
    denom: Option<i64>,
    jobs: Option<usize>,
    json: Option<bool>,
}

impl Config {
    fn load(path: &Path) -> Result<Config, Error> {
        let text = fs::read_to_string(path).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))?;
        let mut cfg = Config::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: &str| Error::Usage(format!("{}:{}: {msg}", path.display(), k + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            let (key, value) = (key.trim(), value.trim().to_string());
            match key {
                "order" => {
                    parse_order(&value)?;
                    cfg.order = Some(value);
                }
                "ring" => {
                    ring_from_name(&value)?;
                    cfg.ring = Some(value);
                }
                "denom" => cfg.denom = Some(value.parse().map_err(|_| bad("denom must be an integer"))?),
                "jobs" => cfg.jobs = Some(value.parse().map_err(|_| bad("jobs must be a positive integer"))?),
                "format" => {
                    cfg.json = Some(match value.as_str() {
                        "json" => true,
                        "text" => false,
                        _ => return Err(bad("format must be text or json")),
                    })
                }
                other => return Err(bad(&format!("unknown key `{other}`"))),
            }
        }
        if cfg.jobs == Some(0) {
            return Err(Error::Usage("jobs must be at least 1".into()));
        }
        Ok(cfg)
    }
}

struct Settings {
    order: Option<Exp>,
    ring: Conductor,
    json: bool,
}

fn settings(common: &Common, cfg: &Config) -> Result<Settings, Error> {
    let order = common.order.as_ref().or(cfg.order.as_ref()).map(|t| parse_order(t)).transpose()?;
    let ring = ring_from_name(common.ring.as_deref().or(cfg.ring.as_deref()).unwrap_or("rat"))?;
    Ok(Settings {
        order,
        ring,
        json: common.json || cfg.json.unwrap_or(false),
    })
}

fn default_order(s: &Settings) -> Exp {
    s.order.unwrap_or_else(|| Exp::from_integer(20))
}

/// Source position of a parse or evaluation error, if it carries one.
fn error_span(e: &Error) -> Option<(usize, usize)> {
    match e {
        Error::Syntax { offset, .. } | Error::UnknownName { offset, .. } => Some((*offset, offset + 1)),
        Error::AtSpan { start, end, .. } => Some((*start, (*end).max(start + 1))),
        _ => None,
    }
}

fn caret(text: &str, e: &Error) -> String {
    let mut out = format!("error: {e}");
    if let Some((a, b)) = error_span(e) {
        let a = a.min(text.len());
        let width = b.saturating_sub(a).max(1);
        out.push_str(&format!("\n  {text}\n  {}{}", " ".repeat(a), "^".repeat(width)));
    }
    out
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn series_in_denom(s: &QSeries, denom: i64) -> Result<QSeries, Error> {
    if denom <= 0 {
        return Err(Error::Usage(format!("denom must be positive, got {denom}")));
    }
    let wide = fit_denom(s.denom(), &[Exp::new(1, denom)]);
    s.with_denom(wide).reduce_denom(denom)
}

fn print_series(s: &QSeries, json: bool) {
    if json {
        println!("{}", s.to_json());
    } else {
        println!("{}", s.render());
    }
}

fn cmd_expand(expr: &str, common: &Common, denom: Option<i64>, cfg: &Config) -> ExitCode {
    let s = match settings(common, cfg) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let node = match parse(expr) {
        Ok(n) => n,
        Err(e) => {
            eprintln!("{}", caret(expr, &e));
            return ExitCode::from(2);
        }
    };
    let value = match Evaluator::new(s.ring).eval(&node, default_order(&s)) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("{}", caret(expr, &e));
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let value = match denom.or(cfg.denom) {
        Some(d) => match series_in_denom(&value, d) {
            Ok(v) => v,
            Err(e) => return fail(&e),
        },
        None => value,
    };
    print_series(&value, s.json);
    ExitCode::SUCCESS
}

fn cmd_string(p: i64, pprime: i64, m: i64, ell: i64, normalized: bool, common: &Common, cfg: &Config) -> ExitCode {
    let run = || -> Result<QSeries, Error> {
        let s = settings(common, cfg)?;
        let id = StringId::new(LevelData::new(p, pprime)?, m, ell)?;
        let order = default_order(&s);
        if normalized {
            string_normalized(&id, order)
        } else {
            string_coeff_oracle(&id, order)
        }
    };
    match run() {
        Ok(v) => {
            print_series(&v, common.json || cfg.json.unwrap_or(false));
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn load_registry(path: Option<&Path>) -> Result<Vec<IdentityRecord>, Error> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?;
            parse_registry(&text)
        }
        None => Ok(builtin_registry()),
    }
}

fn emit(reports: SuiteReport, json: bool, report: Option<&Path>) -> ExitCode {
    if json {
        println!("{}", reports.to_json());
    } else {
        for r in &reports.reports {
            println!("{r}");
        }
        println!("{} checked, {} failed", reports.reports.len(), reports.failures());
    }
    if let Some(path) = report {
        if let Err(e) = fs::write(path, reports.to_json() + "\n") {
            eprintln!("error: {}: {e}", path.display());
            return ExitCode::from(2);
        }
    }
    ExitCode::from(reports.exit_code() as u8)
}

fn cmd_verify(
    name: Option<&str>,
    lhs: Option<&str>,
    rhs: Option<&str>,
    registry: Option<&Path>,
    common: &Common,
    cfg: &Config,
) -> ExitCode {
    let s = match settings(common, cfg) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if let (Some(l), Some(r)) = (lhs, rhs) {
        for text in [l, r] {
            if let Err(e) = parse(text) {
                eprintln!("{}", caret(text, &e));
                return ExitCode::from(2);
            }
        }
        let rep = check_texts("adhoc", BTreeMap::new(), l, r, s.ring, default_order(&s));
        return emit(SuiteReport { reports: vec![rep] }, s.json, None);
    }
    let Some(name) = name else {
        return fail(&Error::Usage("verify needs --name or both --lhs and --rhs".into()));
    };
    let records = match load_registry(registry) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let Some(rec) = records.iter().find(|r| r.name == name) else {
        return fail(&Error::Usage(format!("no identity named `{name}` in the registry")));
    };
    emit(SuiteReport { reports: run_identity(rec, s.order) }, s.json, None)
}

fn cmd_suite(
    filter: &str,
    jobs: Option<usize>,
    report: Option<&Path>,
    registry: Option<&Path>,
    common: &Common,
    cfg: &Config,
) -> ExitCode {
    let run = || -> Result<(SuiteReport, bool), Error> {
        let s = settings(common, cfg)?;
        let records = load_registry(registry)?;
        let jobs = jobs.or(cfg.jobs).unwrap_or(1);
        Ok((run_suite(&records, filter, s.order, jobs)?, s.json))
    };
    match run() {
        Ok((rep, json)) => emit(rep, json, report),
        Err(e) => fail(&e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match cli.config.as_deref().map(Config::load).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => return fail(&e),
    };
    match &cli.command {
        Command::Expand { expr, common, denom } => cmd_expand(expr, common, *denom, &cfg),
        Command::String {
            p,
            pprime,
            m,
            ell,
            normalized,
            common,
        } => cmd_string(*p, *pprime, *m, *ell, *normalized, common, &cfg),
        Command::Verify {
            name,
            lhs,
            rhs,
            registry,
            common,
        } => cmd_verify(name.as_deref(), lhs.as_deref(), rhs.as_deref(), registry.as_deref(), common, &cfg),
        Command::Suite {
            filter,
            jobs,
            report,
            registry,
            common,
        } => cmd_suite(filter, *jobs, report.as_deref(), registry.as_deref(), common, &cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caret_points_at_offset() {
        let e = parse("j(q;").unwrap_err();
        let text = caret("j(q;", &e);
        assert!(text.ends_with("\n  j(q;\n      ^"), "{text}");
    }

    #[test]
    fn denominators_convert_when_representable() {
        let s = Evaluator::new(Conductor::One).eval(&parse("1 + q^(1/2)").unwrap(), Exp::from_integer(2)).unwrap();
        assert_eq!(series_in_denom(&s, 4).unwrap().denom(), 4);
        assert!(series_in_denom(&s, 3).is_err());
    }
}
