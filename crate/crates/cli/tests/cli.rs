use std::path::PathBuf;
use std::process::{Command, Output};

use clap::Parser;
use proptest::prelude::*;

use polylab::PolygonClass;
use polylab_cli::{AmplitudeKind, Command as Cmd, Format, MomentSource, RunConfig};

fn polylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polylab")).args(args).env_remove("POLYLAB_DIGITS").output().expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = polylab(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn records(csv: &str) -> Vec<Vec<String>> {
    csv.lines().skip(1).map(|l| l.split(',').map(String::from).collect()).collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("polylab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn enumerate_writes_the_count_table() {
    let csv = stdout(&["enumerate", "--model", "staircase", "--max-m", "10", "--format", "csv"]);
    assert!(csv.starts_with("model,m,n,count\n"));
    let row10: u64 = records(&csv).iter().filter(|r| r[1] == "10").map(|r| r[3].parse::<u64>().unwrap()).sum();
    assert_eq!(row10, 4862);
}

#[test]
fn limitlaw_errors_decrease_in_m() {
    let csv = stdout(&["limitlaw", "--model", "staircase", "--law", "airy", "--m", "6,8,10,12,14", "--k-max", "3"]);
    let rows = records(&csv);
    for k in ["2", "3"] {
        let e: Vec<f64> = rows.iter().filter(|r| r[3] == k).map(|r| r[6].parse().unwrap()).collect();
        assert_eq!(e.len(), 5);
        assert!(e.windows(2).all(|w| w[1] < w[0]), "k={k}: {e:?}");
    }
}

#[test]
fn squares_scan_rows_respect_the_bound() {
    let csv = stdout(&["scaling", "--model", "squares", "--s", "0.5,1,2", "--eps", "1e-2,1e-3"]);
    let head: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    let (ie, ib) =
        (head.iter().position(|&h| h == "rel_error").unwrap(), head.iter().position(|&h| h == "bound").unwrap());
    let rows = records(&csv);
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r[ie].parse::<f64>().unwrap() <= r[ib].parse::<f64>().unwrap(), "{r:?}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(polylab(&["enumerate", "--model", "staircase", "--max-m", "4", "--bogus"]).status.code(), Some(2));
    assert_eq!(polylab(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(polylab(&["enumerate", "--model", "hexagons", "--max-m", "4"]).status.code(), Some(2));
    assert_eq!(polylab(&["--help"]).status.code(), Some(0));
    let out = polylab(&["enumerate", "--model", "staircase", "--max-m", "100000"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(out.stdout.is_empty());
    let out = polylab(&["limitlaw", "--model", "ferrers", "--m", "200", "--k-max", "2", "--source", "table"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_files_are_byte_identical() {
    let args = |p: &str| -> Vec<String> {
        ["extrapolate", "--model", "staircase", "--max-m", "40", "--out", p].iter().map(|s| s.to_string()).collect()
    };
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for p in [&a, &b] {
        let v = args(p.to_str().unwrap());
        let out = polylab(&v.iter().map(String::as_str).collect::<Vec<_>>());
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
    }
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    assert!(!ta.contains(&b'\r'));
    let text = String::from_utf8(ta).unwrap();
    assert!(text.starts_with("m,x_c_hat,gamma_hat,A_hat\n"));
    let last = text.lines().last().unwrap();
    let x_c: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(last.starts_with("final,") && (x_c - 0.25).abs() < 1e-6, "{last}");
}

#[test]
fn json_forms() {
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&["qseries", "--model", "ferrers", "--max-m", "5", "--format", "json"])).unwrap();
    let arr = j.as_array().unwrap();
    assert_eq!(arr.len(), 6);
    assert_eq!(arr[2]["coeffs"], serde_json::json!(["0", "1"]));
    let j: serde_json::Value =
        serde_json::from_str(&stdout(&["gk", "--model", "rectangles", "--k", "2", "--order", "6", "--format", "json"]))
            .unwrap();
    // g₂ = 2x³/(1−x)⁶ = 2x³ + 12x⁴ + 42x⁵ + …
    let c: Vec<String> = j.as_array().unwrap().iter().map(|r| r["coefficient"].to_string()).collect();
    assert_eq!(&c[3..6], ["2", "12", "42"]);
}

#[test]
fn qseries_matches_enumerate() {
    let a = stdout(&["qseries", "--model", "directed_convex", "--max-m", "9"]);
    let b = stdout(&["enumerate", "--model", "directed_convex", "--max-m", "9"]);
    assert_eq!(a, b);
}

#[test]
fn specialfn_eval_prints_digits() {
    let csv = stdout(&["specialfn", "eval", "--function", "airy-ai", "--x", "0", "--digits", "30"]);
    assert!(csv.contains("0.355028053887817239260063186004"), "{csv}");
    let csv = stdout(&["specialfn", "eval", "--function", "kummer-u", "--x", "2", "--a", "1", "--b", "1"]);
    assert!(csv.starts_with("function,x,value,error_bound\nkummer-u,2,"));
    assert_eq!(polylab(&["specialfn", "eval", "--function", "kummer-u", "--x", "2"]).status.code(), Some(1));
}

#[test]
fn digits_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_polylab"))
        .args(["specialfn", "eval", "--function", "airy-bi", "--x", "1"])
        .env("POLYLAB_DIGITS", "25")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let value = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string();
    assert_eq!(value.split('.').nth(1).unwrap().len(), 25);
    assert!(value.starts_with("1.2074235949528712594363788"));
}

#[test]
fn areaensemble_ends_with_the_limit() {
    let csv = stdout(&["areaensemble", "--model", "staircase", "--n-max", "32"]);
    assert!(csv.starts_with("n,mu_hat,sigma2_hat\n1,"));
    let last = csv.lines().last().unwrap();
    let mu: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
    assert!(last.starts_with("limit,") && (mu - 0.8417620156).abs() < 2e-2, "{last}");
}

#[test]
fn acceptance_subcommand() {
    let csv = stdout(&["acceptance", "--criterion", "7"]);
    assert!(csv.starts_with("criterion,name,status,detail\n7,first moments,pass,"), "{csv}");
    assert_eq!(polylab(&["acceptance", "--criterion", "99"]).status.code(), Some(1));
}

#[test]
fn auto_source_is_resolved() {
    let c = RunConfig::try_parse_from(["polylab", "limitlaw", "--model", "ferrers", "--m", "50,200", "--k-max", "2"])
        .unwrap();
    assert_eq!(
        c.flag_string(),
        "limitlaw --model ferrers --law dirac:1/8 --m 50,200 --k-max 2 --source series --format csv"
    );
}

fn model() -> impl Strategy<Value = PolygonClass> {
    prop::sample::select(PolygonClass::ALL.to_vec())
}

fn command() -> impl Strategy<Value = Cmd> {
    prop_oneof![
        (model(), 0u32..40).prop_map(|(model, max_m)| Cmd::Enumerate { model, max_m }),
        (model(), 0u32..40).prop_map(|(model, max_m)| Cmd::Qseries { model, max_m }),
        (model(), 0u32..5, 0u32..40).prop_map(|(model, k, order)| Cmd::Gk { model, k, order }),
        (prop::sample::select(vec![AmplitudeKind::Phi, AmplitudeKind::Omega, AmplitudeKind::GeneralF]), 0u32..20)
            .prop_map(|(label, k_max)| Cmd::Amplitudes { label, k_max }),
        (
            model(),
            prop::collection::vec(2u32..300, 1..5),
            1u32..6,
            prop::sample::select(vec![MomentSource::Auto, MomentSource::Series])
        )
            .prop_map(|(model, m, k_max, source)| Cmd::Limitlaw { model, law: None, m, k_max, source }),
        (model(), prop::collection::vec(-5.0f64..5.0, 1..4), prop::collection::vec(1e-6f64..0.5, 1..4))
            .prop_map(|(model, s, eps)| Cmd::Scaling { model, s, eps }),
        (model(), 1u32..90, 0u32..4).prop_map(|(model, max_m, moment)| Cmd::Extrapolate { model, max_m, moment }),
        prop::option::of(1u32..17).prop_map(|criterion| Cmd::Acceptance { criterion }),
    ]
}

proptest! {
    #[test]
    fn flags_round_trip(cmd in command(), json in any::<bool>(), digits in prop::option::of(1u32..200), out in any::<bool>()) {
        let c = RunConfig {
            format: if json { Format::Json } else { Format::Csv },
            out: out.then(|| PathBuf::from("table.csv")),
            digits,
            command: cmd,
        };
        let flags = c.normalized().to_flags();
        let parsed = RunConfig::try_parse_from(std::iter::once("polylab".to_string()).chain(flags.iter().cloned())).unwrap();
        prop_assert_eq!(parsed.normalized(), c.normalized());
        prop_assert_eq!(parsed.flag_string(), c.flag_string());
    }
}
