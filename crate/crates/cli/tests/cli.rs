use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn ptwall(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptwall"))
        .args(args)
        .output()
        .unwrap()
}

fn run_text(cmd: &str, text: &str, extra: &[&str]) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scenario.toml");
    std::fs::write(&path, text).unwrap();
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(extra);
    ptwall(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn verify_fixtures_succeed() {
    for name in ["fano_rank1.toml", "fano_split.toml", "geometric.toml"] {
        let o = ptwall(&["verify", fixture(name).to_str().unwrap(), "--oracle"]);
        assert_eq!(o.status.code(), Some(0), "{name}: {}", stderr(&o));
        let out = stdout(&o);
        assert!(out.contains("identity and uncached recursion"), "{out}");
        assert!(!out.contains("fail"), "{out}");
    }
}

#[test]
fn geometric_expansion_is_all_ones() {
    let o = ptwall(&[
        "expand",
        fixture("geometric.toml").to_str().unwrap(),
        "--n-max",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<String> = stdout(&o)
        .lines()
        .skip_while(|l| !l.starts_with("== "))
        .skip(1)
        .map(str::to_string)
        .collect();
    let expected: Vec<String> = (0..=10).map(|n| format!("{n} 1")).collect();
    assert_eq!(rows, expected);
}

#[test]
fn geometric_report_matches_golden_file() {
    let o = ptwall(&["ptgen", fixture("geometric.toml").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let golden = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/geometric_ptgen.txt");
    assert_eq!(stdout(&o), std::fs::read_to_string(golden).unwrap());
}

#[test]
fn zero_denominator_is_rejected_with_field_path() {
    let text = read_fixture("fano_rank1.toml").replace("threshold = -3", "threshold = \"1/0\"");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("dt[0].threshold"), "{err}");
    assert!(err.contains("1/0"), "{err}");
}

#[test]
fn floats_and_unknown_fields_are_rejected() {
    let text = read_fixture("geometric.toml").replace("omega = [1]", "omega = [1.5]");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("geometry.omega[0]"), "{}", stderr(&o));

    let text = read_fixture("geometric.toml").replace("ample = [1]", "ample = [1]\nkappa = 2");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("kappa"), "{}", stderr(&o));
}

#[test]
fn inconsistent_configuration_is_a_validation_error() {
    let text = read_fixture("geometric.toml").replace("vanish_below = -1", "vanish_below = 4");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("vanishing bound"), "{}", stderr(&o));

    let text = read_fixture("geometric.toml").replace("name = \"pt\"", "name = \"p\"");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_file_is_a_validation_error() {
    let o = ptwall(&["verify", "/nonexistent/scenario.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn uncertifiable_series_exits_with_code_two() {
    let rank1 = read_fixture("fano_rank1.toml");
    let split = read_fixture("fano_split.toml");
    let head = rank1.split("[[query]]").next().unwrap();
    let two = split
        .split("beta = [2]")
        .nth(1)
        .unwrap()
        .split("[[query]]")
        .next()
        .unwrap();
    let text = format!("{head}[[dt]]\nbeta = [2]{two}");
    let o = run_text("ptgen", &text, &[]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let err = stderr(&o);
    assert!(err.contains("class [2]"), "{err}");
    assert!(err.contains("fails at n ="), "{err}");
}

#[test]
fn reports_are_byte_identical_across_runs_and_memo_modes() {
    let path = fixture("fano_split.toml");
    let p = path.to_str().unwrap();
    let first = ptwall(&["ptgen", p]);
    let second = ptwall(&["ptgen", p]);
    let uncached = ptwall(&["ptgen", p, "--no-memo"]);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(first.stdout, uncached.stdout);
}

#[test]
fn report_header_carries_scenario_hash() {
    use sha2::Digest;
    let path = fixture("geometric.toml");
    let digest = sha2::Sha256::digest(std::fs::read(&path).unwrap());
    let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    let o = ptwall(&["ptgen", path.to_str().unwrap()]);
    assert!(stdout(&o).contains(&format!("scenario sha256 {hex}")));
}

#[test]
fn timing_goes_to_stderr_only() {
    let p = fixture("geometric.toml");
    let plain = ptwall(&["ptgen", p.to_str().unwrap()]);
    let timed = ptwall(&["ptgen", p.to_str().unwrap(), "--timing"]);
    assert_eq!(plain.stdout, timed.stdout);
    assert!(stderr(&timed).contains("timing query[0] ptgen"));
}

#[test]
fn out_flag_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.txt");
    let p = fixture("geometric.toml");
    let o = ptwall(&["ptgen", p.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let direct = ptwall(&["ptgen", p.to_str().unwrap()]);
    assert_eq!(std::fs::read(out).unwrap(), direct.stdout);
}

#[test]
fn coefficient_tables_and_wallcross_queries() {
    let p = fixture("fano_rank1.toml");
    let o = ptwall(&["coeffs", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(
        out.contains("(0,[1],1) (0,[1],2) (1,[0],0) | 1 | 1 | 1/3"),
        "{out}"
    );
    assert!(
        out.contains("(0,[1],1) (1,[0],0) (0,[1],2) | -1 | -1 | -1/3"),
        "{out}"
    );

    let o = ptwall(&["wallcross", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("n = 0: 1*[a]"), "{}", stdout(&o));
}

#[test]
fn truncation_override_is_checked_against_insertion_degree() {
    let text = read_fixture("geometric.toml").replace(
        "weights = { \"a*pt\" = 1 }",
        "weights = { \"a*pt\" = 1 }, degree = 2",
    );
    let o = run_text("ptgen", &text, &["--truncation", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(
        stderr(&o).contains("query[0].insertion.degree"),
        "{}",
        stderr(&o)
    );
    let o = run_text("ptgen", &text, &["--truncation", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("ptwall"));
    assert!(stdout(&o).contains("truncation 2"));
}
