use std::process::{Command, Output};

const GOLDEN: &str = "quad:(1+1*sqrt(5))/2";
const ROOT2: &str = "quad:(0+1*sqrt(2))/1";
const ROOT23: &str = "quad:(0+1*sqrt(2))/1,quad:(0+1*sqrt(3))/1";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracparts")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json_field<'a>(body: &'a str, key: &str) -> &'a str {
    let at = body.find(&format!("\"{key}\": ")).unwrap_or_else(|| panic!("{key} missing in {body}"));
    let rest = &body[at + key.len() + 4..];
    rest[..rest.find([',', '\n']).unwrap()].trim()
}

#[test]
fn count_golden_ratio() {
    let o = run(&["count", "--alpha", GOLDEN, "--eps", "0.25", "--q", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json_field(&stdout(&o), "count"), "6");
    let summary = stderr(&o);
    assert_eq!(summary.lines().count(), 1);
    assert!(summary.starts_with("count:"));
}

#[test]
fn rational_alpha_is_resonant() {
    let o = run(&["sum", "--alpha", "rat:1/2", "--q", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).is_empty());
}

#[test]
fn phi_table_csv() {
    let o = run(&["phi", "--alpha", ROOT2, "--qmax", "10", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| {
            let mut parts: Vec<String> = l.splitn(4, ',').map(String::from).collect();
            parts[1] = format!("{:.6}", parts[1].parse::<f64>().unwrap());
            parts.remove(2);
            parts
        })
        .collect();
    assert_eq!(rows, [["1", "0.414214", "[1]"], ["2", "0.343146", "[2]"]]);
}

#[test]
fn parse_errors_exit_4() {
    let o = run(&["count", "--alpha", "quad:(1+1*sqrt(4))/2", "--eps", "0.25", "--q", "5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("perfect square"));
    assert_eq!(run(&["count", "--alpha", GOLDEN]).status.code(), Some(4));
    assert_eq!(run(&["count", "--alpha", GOLDEN, "--eps", "0.75", "--q", "5"]).status.code(), Some(4));
    assert_eq!(run(&["verify", "theorem", "--alpha", GOLDEN, "--q-grid", "1:4:2"]).status.code(), Some(4));
    assert_eq!(run(&["bounds", "--n", "1", "--q", "0.5", "--phi", "0.3"]).status.code(), Some(4));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn oracle_agrees_with_count() {
    for (alpha, eps, q) in [(GOLDEN, "1/4", "5"), (ROOT2, "0.5", "12"), (ROOT23, "1/16", "7"), (ROOT23, "3/10", "4.5")] {
        let c = run(&["count", "--alpha", alpha, "--eps", eps, "--q", q]);
        let o = run(&["oracle", "--alpha", alpha, "--eps", eps, "--q", q]);
        assert_eq!(c.status.code(), Some(0));
        assert_eq!(json_field(&stdout(&c), "count"), json_field(&stdout(&o), "count"), "{alpha} {eps} {q}");
    }
}

#[test]
fn max_bits_from_environment() {
    let ok = Command::new(env!("CARGO_BIN_EXE_fracparts"))
        .args(["sum", "--alpha", GOLDEN, "--q", "10"])
        .env("FRACPARTS_MAX_BITS", "256")
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = Command::new(env!("CARGO_BIN_EXE_fracparts"))
        .args(["sum", "--alpha", GOLDEN, "--q", "10"])
        .env("FRACPARTS_MAX_BITS", "64")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(4), "{}", stderr(&bad));
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("fracparts-cli-{}.csv", std::process::id()));
    let args = ["profile", "--alpha", GOLDEN, "--q", "5", "--format", "csv"];
    let direct = run(&args);
    let mut with_out: Vec<&str> = args.to_vec();
    let p = path.to_str().unwrap();
    with_out.extend(["--out", p]);
    let o = run(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    assert_eq!(stdout(&direct), "q,k,count\n5,1,4\n5,2,4\n5,3,2\n");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn profile_reports_sandwich() {
    let o = run(&["profile", "--alpha", GOLDEN, "--q", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let body = stdout(&o);
    assert_eq!(json_field(&body, "holds"), "true");
    assert_eq!(json_field(&body, "lower_sum"), "40.0");
    assert_eq!(json_field(&body, "upper_sum"), "80.0");
}

#[test]
fn bounds_catalog() {
    let o = run(&["bounds", "--n", "1", "--q", "10", "--phi", "0.381966", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let body = stdout(&o);
    assert!(body.starts_with("name,value,n,q,phi_q,nontrivial\n"));
    let upper = body.lines().find(|l| l.starts_with("thm_upper,")).unwrap();
    let v: f64 = upper.split(',').nth(1).unwrap().parse().unwrap();
    assert!((v - 49.20619).abs() < 1e-4);
    assert!(!body.contains("gap_upper"));
}

#[test]
fn widmer_single_b() {
    let o = run(&["verify", "widmer", "--alpha", GOLDEN, "--eps", "1/4", "--q", "5", "--b-grid", "5"]);
    assert_eq!(o.status.code(), Some(0));
    let body = stdout(&o);
    let q_bar: f64 = json_field(&body, "q_bar").parse().unwrap();
    assert!((q_bar - 1.118034).abs() < 1e-6);
    assert_eq!(json_field(&body, "actual_error"), "1.0");
}
