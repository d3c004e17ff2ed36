//! Batch front end: parses flags into a [`RunConfig`], runs one command and
//! writes its table as CSV or JSON.

mod config;

use std::ffi::OsString;
use std::fs;
use std::io::Write;

use clap::Parser;
use num_bigint::BigUint;
use polylab::acceptance::{run_criterion, CRITERIA};
use polylab::amplitudes::{self, general_f, AmplitudeSequence, QDiffAnalysis};
use polylab::enumerate::{enumerate_counts, enumeration_limit};
use polylab::extrapolate::{estimate_growth, GrowthEstimate};
use polylab::hp::Precision;
use polylab::limitlaws::{compare_moments, compare_moments_from_series, gaussian_fixed_area_check, GaussianCheck};
use polylab::qfunc::{area_ensemble_series, builtin_equation, iterate_series, moment_pump, moment_pump_all};
use polylab::scaling::scaling_error_scan;
use polylab::specialfn::{self, EvalResult};
use polylab::{CountTable, PolygonClass};
use serde_json::{json, Map, Value};
use thiserror::Error;

pub use config::{AmplitudeKind, Command, Format, Function, MomentSource, RunConfig, SpecialfnAction};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    fn domain(e: impl std::fmt::Display) -> CliError {
        CliError::Domain(e.to_string())
    }
}

/// A command's result in both encodings; `json` is derived from the CSV when
/// the object has no JSON form of its own.
#[derive(Debug, Clone, PartialEq)]
pub struct Rendered {
    pub csv: String,
    pub json: Option<String>,
    /// Exit status of a command that ran but reports failure.
    pub failed: bool,
}

impl Rendered {
    fn csv(csv: String) -> Rendered {
        Rendered { csv, json: None, failed: false }
    }

    pub fn text(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Csv => Ok(self.csv.clone()),
            Format::Json => match &self.json {
                Some(j) => Ok(ensure_newline(j.clone())),
                None => csv_to_json(&self.csv).map(ensure_newline),
            },
        }
    }
}

fn ensure_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

fn cell(s: &str) -> Value {
    if let Ok(i) = s.parse::<i64>() {
        return json!(i);
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && !s.contains('/') => json!(v),
        _ => json!(s),
    }
}

/// CSV with a header row to a JSON array of objects; integers and finite
/// decimals become numbers, everything else (rationals, labels) strings.
pub fn csv_to_json(text: &str) -> Result<String, CliError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(CliError::domain)?.clone();
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(CliError::domain)?;
        let obj: Map<String, Value> = header.iter().zip(rec.iter()).map(|(k, v)| (k.to_string(), cell(v))).collect();
        out.push(Value::Object(obj));
    }
    Ok(serde_json::to_string_pretty(&out).expect("serializable"))
}

fn write_csv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(vec![]);
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

fn qseries_table(model: PolygonClass, max_m: u32) -> Result<Rendered, CliError> {
    let series = iterate_series(&builtin_equation(model), max_m as usize).map_err(CliError::domain)?;
    let mut table = CountTable::new(model, max_m);
    for (m, p) in series.coeffs.iter().enumerate() {
        for (n, c) in p.0.iter().enumerate() {
            if let Some(c) = c.to_biguint().filter(|c| *c != BigUint::default()) {
                table.add(m as u32, n as u64, &c);
            }
        }
    }
    Ok(Rendered { csv: table.to_csv(), json: Some(series.to_json()), failed: false })
}

fn gk_table(model: PolygonClass, k: u32, order: u32) -> Result<Rendered, CliError> {
    let g = moment_pump(&builtin_equation(model), k as usize, order as usize).map_err(CliError::domain)?;
    let rows = g
        .coeffs()
        .iter()
        .enumerate()
        .map(|(m, c)| vec![model.tag().to_string(), k.to_string(), m.to_string(), c.to_string()]);
    Ok(Rendered::csv(write_csv(&["model", "k", "m", "coefficient"], rows)))
}

fn amplitude_table(kind: AmplitudeKind, k_max: u32, prec: Precision) -> Result<Rendered, CliError> {
    let seq: AmplitudeSequence = match kind {
        AmplitudeKind::Phi => amplitudes::airy_phi(k_max),
        AmplitudeKind::StairF => amplitudes::stair_f(k_max),
        AmplitudeKind::Omega => amplitudes::meander_omega(k_max),
        AmplitudeKind::DirconvexH => amplitudes::dirconvex_h(k_max),
        AmplitudeKind::RectangleF => amplitudes::rectangle_sequence(k_max),
        AmplitudeKind::GeneralF => {
            let g = builtin_equation(PolygonClass::Staircase).equations[0].expr.clone();
            let a = QDiffAnalysis::from_equation(&g, prec).map_err(CliError::domain)?;
            general_f(&a, k_max).map_err(CliError::domain)?
        }
    };
    Ok(Rendered::csv(seq.to_csv()))
}

fn limitlaw_table(config: &RunConfig) -> Result<Rendered, CliError> {
    let Command::Limitlaw { model, law: Some(law), m, k_max, source } = &config.command else {
        unreachable!("normalized limitlaw config");
    };
    let top = m.iter().copied().max().unwrap_or(0);
    let report = match source {
        MomentSource::Series => {
            let gks =
                moment_pump_all(&builtin_equation(*model), *k_max as usize, top as usize).map_err(CliError::domain)?;
            compare_moments_from_series(*model, &gks, law, m, *k_max)
        }
        _ => {
            if top > enumeration_limit(*model) {
                return Err(CliError::Domain(format!(
                    "m = {top} exceeds the enumeration limit {} for {model}; use --source series",
                    enumeration_limit(*model)
                )));
            }
            let table = enumerate_counts(*model, top).map_err(CliError::domain)?;
            compare_moments(&table, law, m, *k_max)
        }
    }
    .map_err(CliError::domain)?;
    Ok(Rendered::csv(report.to_csv()))
}

fn gaussian_rendered(g: &GaussianCheck) -> Rendered {
    let mut rows: Vec<Vec<String>> = g
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), format!("{:.15e}", r.mu_hat), format!("{:.15e}", r.sigma2_hat)])
        .collect();
    rows.push(vec!["limit".into(), format!("{:.15e}", g.mu_limit), format!("{:.15e}", g.sigma2_limit)]);
    Rendered::csv(write_csv(&["n", "mu_hat", "sigma2_hat"], rows))
}

fn areaensemble_table(model: PolygonClass, n_max: u32) -> Result<Rendered, CliError> {
    let spec = builtin_equation(model);
    let s = (0..=2)
        .map(|j| area_ensemble_series(&spec, j, n_max as usize))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::domain)?;
    let g = gaussian_fixed_area_check(&s[0], &s[1], &s[2], n_max as usize).map_err(CliError::domain)?;
    Ok(gaussian_rendered(&g))
}

fn growth_rendered(e: &GrowthEstimate) -> Rendered {
    let mut csv = e.trail_csv();
    csv.push_str(&format!("final,{:.15e},{:.15e},{:.15e}\n", e.x_c_hat, e.gamma_hat, e.a_hat));
    let trail: Vec<Value> = e
        .trail
        .iter()
        .map(|t| json!({"m": t.m, "x_c_hat": t.x_c, "gamma_hat": t.gamma, "A_hat": t.amplitude}))
        .collect();
    let json = json!({"x_c_hat": e.x_c_hat, "gamma_hat": e.gamma_hat, "A_hat": e.a_hat, "trail": trail});
    Rendered { csv, json: Some(serde_json::to_string_pretty(&json).expect("serializable")), failed: false }
}

fn extrapolate_table(model: PolygonClass, max_m: u32, k: u32) -> Result<Rendered, CliError> {
    let g = moment_pump(&builtin_equation(model), k as usize, max_m as usize).map_err(CliError::domain)?;
    let e = estimate_growth(g.coeffs()).map_err(CliError::domain)?;
    Ok(growth_rendered(&e))
}

fn need(v: Option<f64>, flag: &str, f: Function) -> Result<f64, CliError> {
    v.ok_or_else(|| CliError::Domain(format!("{f:?} needs --{flag}")))
}

fn index_arg(x: f64) -> Result<usize, CliError> {
    if x >= 1.0 && x.fract() == 0.0 && x <= 1e6 {
        Ok(x as usize)
    } else {
        Err(CliError::Domain(format!("index must be a positive integer, got {x}")))
    }
}

fn specialfn_table(action: &SpecialfnAction, prec: Precision) -> Result<Rendered, CliError> {
    let SpecialfnAction::Eval { function: f, x, a, b, v } = action;
    let (f, x) = (*f, *x);
    let hp = |r: Result<EvalResult, specialfn::SpecialFnError>| r.map(|r| (r, true));
    let dp = |r: Result<EvalResult, specialfn::SpecialFnError>| r.map(|r| (r, false));
    let (r, high) = match f {
        Function::AiryAi => hp(specialfn::airy_ai_with(x, prec)),
        Function::AiryAiPrime => hp(specialfn::airy_ai_prime_with(x, prec)),
        Function::AiryBi => hp(specialfn::airy_bi_with(x, prec)),
        Function::AiryBiPrime => hp(specialfn::airy_bi_prime_with(x, prec)),
        Function::AiryZero => hp(specialfn::airy_zero_with(index_arg(x)?, prec)),
        Function::Erfc => dp(specialfn::erfc(x)),
        Function::Erfcx => dp(specialfn::erfcx(x)),
        Function::Ei => dp(specialfn::ei(x)),
        Function::Gamma => dp(specialfn::gamma_fn(x)),
        Function::Dilog => dp(specialfn::dilog(x)),
        Function::LerchPhi => dp(specialfn::lerch_phi(x, need(*v, "v", f)?)),
        Function::KummerU => dp(specialfn::kummer_u(need(*a, "a", f)?, need(*b, "b", f)?, x)),
        Function::PhiIntegral => dp(specialfn::phi_via_integral(index_arg(x)? as u32)),
    }
    .map_err(CliError::domain)?;
    let value = if high { r.value.to_decimal(prec.0 as usize) } else { format!("{:.16e}", r.to_f64()) };
    let name = clap::ValueEnum::to_possible_value(&f).map(|p| p.get_name().to_string()).unwrap_or_default();
    let row = vec![name, x.to_string(), value, format!("{:.3e}", r.error_bound)];
    Ok(Rendered::csv(write_csv(&["function", "x", "value", "error_bound"], [row])))
}

fn acceptance_table(criterion: Option<u32>) -> Result<Rendered, CliError> {
    let numbers: Vec<u32> = match criterion {
        Some(n) => vec![n],
        None => CRITERIA.iter().map(|c| c.number).collect(),
    };
    let mut rows = Vec::new();
    let mut failed = false;
    for n in numbers {
        let r = run_criterion(n)
            .ok_or_else(|| CliError::Domain(format!("no criterion {n}; they run 1 to {}", CRITERIA.len())))?;
        failed |= !r.passed();
        let (status, detail) = match r.outcome {
            Ok(d) => ("pass", d),
            Err(d) => ("fail", d),
        };
        rows.push(vec![n.to_string(), r.name.to_string(), status.to_string(), detail]);
    }
    let mut out = Rendered::csv(write_csv(&["criterion", "name", "status", "detail"], rows));
    out.failed = failed;
    Ok(out)
}

/// Runs a parsed configuration and returns its output without writing it.
pub fn execute(config: &RunConfig) -> Result<Rendered, CliError> {
    let config = config.normalized();
    let prec = config.precision();
    match &config.command {
        Command::Enumerate { model, max_m } => {
            let t = enumerate_counts(*model, *max_m).map_err(CliError::domain)?;
            Ok(Rendered { csv: t.to_csv(), json: Some(t.to_json()), failed: false })
        }
        Command::Qseries { model, max_m } => qseries_table(*model, *max_m),
        Command::Gk { model, k, order } => gk_table(*model, *k, *order),
        Command::Amplitudes { label, k_max } => amplitude_table(*label, *k_max, prec),
        Command::Limitlaw { .. } => limitlaw_table(&config),
        Command::Areaensemble { model, n_max } => areaensemble_table(*model, *n_max),
        Command::Scaling { model, s, eps } => {
            scaling_error_scan(*model, s, eps).map(|t| Rendered::csv(t.to_csv())).map_err(CliError::domain)
        }
        Command::Extrapolate { model, max_m, moment } => extrapolate_table(*model, *max_m, *moment),
        Command::Specialfn { action } => specialfn_table(action, prec),
        Command::Acceptance { criterion } => acceptance_table(*criterion),
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), CliError> {
    match &config.out {
        Some(path) => fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|source| CliError::Io { path: "standard output".into(), source })
        }
    }
}

/// Exit code 0 on success, 1 on a domain or I/O error, 2 on a usage error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = execute(&config).and_then(|r| {
        let text = r.text(config.format)?;
        emit(&config, &text)?;
        Ok(r.failed)
    });
    match result {
        Ok(false) => 0,
        Ok(true) => 1,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("polylab: {line}");
            1
        }
    }
}
