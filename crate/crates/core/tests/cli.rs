use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command as Process, Output};

use clap::Parser;
use cyclopair::cli::{run, Cli, Command, OutputFormat, RunConfig, CACHE_ENV};

fn bin() -> Process {
    let mut c = Process::new(env!("CARGO_BIN_EXE_cyclopair"));
    c.env_remove(CACHE_ENV);
    c
}

fn exec(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn run_config(cfg: &RunConfig) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(cfg, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

#[test]
fn pair_json_golden() {
    let o = exec(&["pair", "-p", "37", "-r", "32", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let expected = concat!(
        r#"{"p":37,"r":32,"kernel_dim":1,"normalization":"first_nonzero_one","entries":{"#,
        r#""1":1,"3":26,"5":0,"7":36,"9":1,"11":35,"13":31,"15":34,"17":3,"19":6,"#,
        r#""21":2,"23":36,"25":1,"27":0,"29":11,"31":36,"33":11,"35":26}}"#,
        "\n"
    );
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expected);
}

#[test]
fn usage_and_input_errors_exit_2() {
    let o = exec(&["pair", "-p", "10", "-r", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("10 is not an odd prime"));

    assert_eq!(
        exec(&["pair", "-p", "37", "-r", "30"]).status.code(),
        Some(2)
    );
    assert_eq!(exec(&["pair", "-p", "37"]).status.code(), Some(2));
    assert_eq!(exec(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(exec(&["scan", "--limit", "10001"]).status.code(), Some(2));
    assert_eq!(
        exec(&["pair", "-p", "37", "-r", "32", "--threads", "0"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(exec(&["degenerate", "-p", "43"]).status.code(), Some(2));
    assert_eq!(
        exec(&["bernoulli", "-p", "37", "-k", "36"]).status.code(),
        Some(2)
    );
}

#[test]
fn ihara_check_report() {
    let o = exec(&["ihara-check", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        String::from_utf8(o.stdout).unwrap().trim(),
        r#"{"p":691,"r":12,"galois_coeffs":{"3,9":501,"5,7":517},"ratio":50,"pairing_consistent":true}"#
    );
}

#[test]
fn galois_outputs() {
    let mut cfg = RunConfig::new(Command::Galois);
    (cfg.p, cfg.r, cfg.format) = (Some(37), Some(32), OutputFormat::Json);
    let (code, out, _) = run_config(&cfg);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["a_x"], 30);
    assert_eq!(v["a_gamma"], 21);
    assert_eq!(v["greenberg"], "holds");
    assert_eq!(v["scalar_class"], "projective");
    assert!(v["attestation"].is_string());
    assert!(v["terms"]
        .as_array()
        .unwrap()
        .contains(&serde_json::json!([3, 29, 26])));

    cfg.format = OutputFormat::Text;
    let (_, text, _) = run_config(&cfg);
    assert!(text.starts_with("37·y - 3[γ,y] - 11[x_3,x_29]"));
    assert!(text.contains("Greenberg criterion: holds"));

    (cfg.p, cfg.r) = (Some(59), Some(44));
    cfg.format = OutputFormat::Json;
    let (code, out, _) = run_config(&cfg);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["greenberg"], "conditional");
    assert!(v["attestation"].is_null());
}

#[test]
fn degenerate_and_bernoulli() {
    let o = exec(&["degenerate", "-p", "89209", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["r"], 44606);
    assert_eq!(v["degeneracy_present"], true);

    let o = exec(&["degenerate", "-p", "37", "-r", "20"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("degeneracy present: false"));

    let o = exec(&["bernoulli", "-p", "7", "--format", "csv"]);
    assert_eq!(
        String::from_utf8(o.stdout).unwrap(),
        "p,prec,k,value\n7,1,2,6\n7,1,4,3\n"
    );
    let o = exec(&[
        "bernoulli",
        "-p",
        "37",
        "-k",
        "32",
        "--precision",
        "2",
        "--format",
        "json",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"].as_u64().unwrap() % 37, 0);
    assert_ne!(v["value"], 0);
}

#[test]
fn pair_mod_p2() {
    let o = exec(&[
        "pair",
        "-p",
        "59",
        "-r",
        "44",
        "--precision",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["order_exponent"], 1);
    let gens = v["generators"].as_array().unwrap();
    assert_eq!(gens.len(), 1);
    // a single generator of order p is p times a mod-p solution
    for (_, e) in gens[0]["entries"].as_object().unwrap() {
        assert_eq!(e.as_u64().unwrap() % 59, 0);
    }
}

type Rows = BTreeSet<(u64, u64, u64, u64)>;

fn csv_rows(s: &str) -> Rows {
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("p,r,i,e"));
    lines
        .map(|l| {
            let f: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1], f[2], f[3])
        })
        .collect()
}

fn json_rows(s: &str) -> Rows {
    let mut rows = BTreeSet::new();
    for line in s.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let (p, r) = (v["p"].as_u64().unwrap(), v["r"].as_u64().unwrap());
        assert_eq!(v["kernel_dim"], 1);
        assert_eq!(v["vanishing"], true);
        for (i, e) in v["entries"].as_object().unwrap() {
            rows.insert((p, r, i.parse().unwrap(), e.as_u64().unwrap()));
        }
    }
    rows
}

fn scan(limit: u64, format: OutputFormat, cache: Option<&Path>) -> (i32, String, String) {
    let mut cfg = RunConfig::new(Command::Scan);
    cfg.limit = limit;
    cfg.format = format;
    cfg.cache_path = cache.map(Path::to_path_buf);
    cfg.threads = Some(2);
    run_config(&cfg)
}

#[test]
fn scan_csv_and_json_agree() {
    let (c1, csv, err) = scan(200, OutputFormat::Csv, None);
    let (c2, json, _) = scan(200, OutputFormat::Json, None);
    assert_eq!((c1, c2), (0, 0));
    let rows = csv_rows(&csv);
    assert_eq!(rows, json_rows(&json));
    let pairs: BTreeSet<(u64, u64)> = rows.iter().map(|&(p, r, _, _)| (p, r)).collect();
    assert_eq!(pairs.len(), 9);
    assert!(err.contains("(37, 32) kernel_dim=1 x_(p-r)=0:true ok"));
    // rows are emitted in (p, r, i) order
    let keys: Vec<(u64, u64, u64)> = csv
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<u64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            (f[0], f[1], f[2])
        })
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn scan_output_independent_of_threads() {
    let mut cfg = RunConfig::new(Command::Scan);
    (cfg.limit, cfg.format) = (160, OutputFormat::Csv);
    cfg.threads = Some(1);
    let (_, one, _) = run_config(&cfg);
    cfg.threads = Some(3);
    let (_, three, _) = run_config(&cfg);
    assert_eq!(one, three);
}

#[test]
fn warm_cache_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bernoulli.jsonl");
    let (c1, cold, _) = scan(300, OutputFormat::Csv, Some(&path));
    let size = fs::metadata(&path).unwrap().len();
    let (c2, warm, _) = scan(300, OutputFormat::Csv, Some(&path));
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(cold, warm);
    assert_eq!(fs::metadata(&path).unwrap().len(), size);
    let (_, uncached, _) = scan(300, OutputFormat::Csv, None);
    assert_eq!(cold, uncached);

    let first = fs::read_to_string(&path).unwrap();
    assert_eq!(
        first.lines().next(),
        Some(r#"{"format": "bernoulli-cache", "version": 1}"#)
    );
}

#[test]
fn cache_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("env.jsonl");
    let o = bin()
        .env(CACHE_ENV, &path)
        .args(["scan", "--limit", "60", "--format", "csv"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(path.exists());
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains(r#""p":59"#));
}

#[test]
fn corrupted_cache_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.jsonl");
    let (code, _, _) = scan(80, OutputFormat::Csv, Some(&path));
    assert_eq!(code, 0);
    let good = fs::read_to_string(&path).unwrap();

    let corruptions = [
        good.replacen(r#""value":"#, r#""valu":"#, 1),
        format!("{good}{{\"p\": 7, \"prec\"\n"),
        good.replacen("bernoulli-cache", "other-cache", 1),
        good.replacen(r#""version": 1"#, r#""version": 9"#, 1),
        format!("{good}{{\"p\":7,\"prec\":1,\"k\":2,\"value\":5}}\n"),
        format!("{good}{{\"p\":7,\"prec\":3,\"k\":2,\"value\":6}}\n"),
    ];
    for (n, text) in corruptions.iter().enumerate() {
        fs::write(&path, text).unwrap();
        let o = bin()
            .args(["scan", "--limit", "80", "--format", "csv", "--cache"])
            .arg(&path)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(2), "corruption {n}");
        assert!(o.stdout.is_empty(), "corruption {n} produced output");
        assert!(
            String::from_utf8_lossy(&o.stderr).contains("error"),
            "corruption {n} gave no diagnostic"
        );
    }
}

#[test]
fn verify_all_passes() {
    let mut cfg = RunConfig::new(Command::VerifyAll);
    cfg.limit = 300;
    cfg.format = OutputFormat::Json;
    let (code, out, _) = run_config(&cfg);
    assert_eq!(code, 0, "{out}");
    let criteria: Vec<u64> = out
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .inspect(|v| assert_eq!(v["passed"], true, "{v}"))
        .map(|v| v["criterion"].as_u64().unwrap())
        .collect();
    assert_eq!(criteria, (1..=8).collect::<Vec<_>>());
}

#[test]
fn argument_parsing() {
    let cli = Cli::try_parse_from([
        "cyclopair",
        "scan",
        "--limit",
        "500",
        "--format",
        "json",
        "--threads",
        "4",
        "--include-odd-a",
        "--cache",
        "/tmp/x.jsonl",
    ])
    .unwrap();
    let cfg = cli.into_config();
    assert_eq!(cfg.command, Command::Scan);
    assert_eq!(cfg.limit, 500);
    assert_eq!(cfg.format, OutputFormat::Json);
    assert_eq!(cfg.threads, Some(4));
    assert!(cfg.include_odd_a);
    assert_eq!(cfg.cache_path.as_deref(), Some(Path::new("/tmp/x.jsonl")));

    let cfg = Cli::try_parse_from(["cyclopair", "scan"])
        .unwrap()
        .into_config();
    assert_eq!(cfg.limit, 1000);
    assert_eq!(cfg.format, OutputFormat::Text);

    let cfg = Cli::try_parse_from(["cyclopair", "degenerate", "-p", "89209"])
        .unwrap()
        .into_config();
    assert_eq!((cfg.p, cfg.r), (Some(89209), None));

    assert!(Cli::try_parse_from([
        "cyclopair",
        "pair",
        "-p",
        "37",
        "-r",
        "32",
        "--precision",
        "3"
    ])
    .is_err());
}

#[test]
fn missing_fields_via_config() {
    let cfg = RunConfig::new(Command::Pair);
    let (code, _, err) = run_config(&cfg);
    assert_eq!(code, 2);
    assert!(err.contains("missing required argument"));
}
