use assert_cmd::Command;
use std::path::Path;

fn threebody() -> Command {
    Command::cargo_bin("threebody").unwrap()
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    let out = threebody().args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn ok(args: &[&str]) -> Run {
    let r = run(args);
    assert_eq!(r.code, 0, "{args:?}\n{}", r.stderr);
    r
}

/// Rows of a CSV as maps from column name to cell.
fn table(csv: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect()).collect()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn summary(stderr: &str, key: &str) -> String {
    stderr
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {stderr}"))
        .to_string()
}

#[test]
fn s0_value() {
    let r = ok(&["s0"]);
    let s0 = num(&table(&r.stdout)[0]["s0"]);
    assert!((s0 - 1.00624).abs() < 1e-4);
}

const PRINTED_REFF: [f64; 15] = [
    -71300.0, -17100.0, -947.0, -373000.0, -1010.0, -168000.0, -73400.0, -734000.0, -19700.0, -287.0, -84600.0,
    -10200.0, -276.0, -2880.0, -185.0,
];

#[test]
fn reff_table_matches_printed_values() {
    let r = ok(&["reff-table"]);
    let rows = table(&r.stdout);
    assert_eq!(rows.len(), 15);
    for (row, printed) in rows.iter().zip(PRINTED_REFF) {
        assert!((num(&row["r_eff_au"]) / printed - 1.0).abs() < 0.03, "{row:?}");
    }
}

#[test]
fn reff_table_json_carries_same_data() {
    let csv = table(&ok(&["reff-table"]).stdout);
    let json: serde_json::Value = serde_json::from_str(&ok(&["reff-table", "--format", "json"]).stdout).unwrap();
    let arr = json.as_array().unwrap();
    assert_eq!(arr.len(), csv.len());
    for (j, c) in arr.iter().zip(&csv) {
        assert_eq!(j["species"], c["species"].as_str());
        assert_eq!(j["r_eff_au"].as_f64().unwrap(), num(&c["r_eff_au"]));
        assert_eq!(j["class"], c["class"].as_str());
    }
}

#[test]
fn reff_table_file_errors() {
    assert_eq!(run(&["reff-table", "/nonexistent/catalog.csv"]).code, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let header = "species,position_G,a_bg_au,delta_mu_muB,delta_B_G,mass_amu,r0_au";
    std::fs::write(&path, format!("{header}\n7Li,737.7,-25,2,1,7.016,40\nX,oops,1,1,1,1,1\n")).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(run(&["reff-table", p]).code, 2);
    let lenient = ok(&["reff-table", p, "--lenient"]);
    assert_eq!(table(&lenient.stdout).len(), 1);
    assert!(lenient.stderr.contains("skipped line 3"));

    let zero = dir.path().join("zero.csv");
    std::fs::write(&zero, format!("{header}\n7Li,737.7,-25,2,0,7.016,40\n")).unwrap();
    let r = run(&["reff-table", zero.to_str().unwrap()]);
    assert_eq!(r.code, 2);
    assert_eq!(table(&r.stdout)[0]["r_eff_au"], "");
}

#[test]
fn twobody_fit_reports() {
    let r = ok(&["twobody-fit", "--depth", "0", "--barrier", "0", "--r0", "10", "--mu2", "100"]);
    assert_eq!(num(&table(&r.stdout)[0]["a"]), 0.0);
    assert_eq!(run(&["twobody-fit", "--depth", "1e-3", "--r0", "0", "--mu2", "100"]).code, 2);
    assert_eq!(run(&["twobody-fit", "--depth", "1e-3", "--r0", "-5", "--mu2", "100"]).code, 2);
    assert_eq!(run(&["twobody-fit", "--kind", "square", "--depth", "1", "--r0", "5", "--mu2", "1"]).code, 2);
}

#[test]
fn tune_round_trips_through_twobody_fit() {
    let (a, reff) = (-3000.0, -2000.0);
    let tuned = table(&ok(&["tune", "--r0", "10", "--a", "-3000", "--r-eff", "-2000", "--mu2", "40000"]).stdout);
    let (d, b) = (&tuned[0]["depth"], &tuned[0]["barrier"]);
    let fit = table(&ok(&["twobody-fit", "--depth", d, "--barrier", b, "--r0", "10", "--mu2", "40000"]).stdout);
    assert!((num(&fit[0]["a"]) / a - 1.0).abs() < 1e-4, "{fit:?}");
    assert!((num(&fit[0]["r_eff"]) / reff - 1.0).abs() < 1e-4, "{fit:?}");
    assert_eq!(fit[0]["n_bound"], "1");
    // |r_eff| below r0 cannot be produced by a narrow resonance.
    assert_eq!(run(&["tune", "--r0", "10", "--a", "-3000", "--r-eff", "-5", "--mu2", "40000"]).code, 2);
}

#[test]
fn zrp_curve_c0_and_scale_invariance() {
    let r = ok(&["zrp-curve", "--r-eff", "-1e4", "--points", "31"]);
    let c0 = num(&summary(&r.stderr, "c0"));
    assert!((c0 - 1.68).abs() <= 0.05, "{c0}");

    let base = ok(&["zrp-curve", "--r-eff", "-3000", "--a", "-5e4", "--r-min", "1", "--r-max", "1e6", "--points", "25"]);
    let scaled = ok(&["zrp-curve", "--r-eff", "-6000", "--a", "-1e5", "--r-min", "2", "--r-max", "2e6", "--points", "25"]);
    let (b, s) = (table(&base.stdout), table(&scaled.stdout));
    for (x, y) in b.iter().zip(&s) {
        let (u, v) = (num(&x["reduced_W00"]), num(&y["reduced_W00"]));
        assert!((u - v).abs() <= 1e-10 * u.abs().max(1.0), "{u} vs {v}");
    }
}

/// Scan arguments on the default 50-point grid.
fn scan_args<'a>(system: &'a str, a_min: &'a str, a_max: &'a str, r_eff: &'a str, a_im: &'a str) -> Vec<&'a str> {
    vec![
        "rates-scan", "--system", system, "--a-min", a_min, "--a-max", a_max, "--r-eff", r_eff, "--a-re", "10", "--a-im", a_im, "--r0", "10",
    ]
}

#[test]
fn rates_scan_engines_agree_in_deep_regime() {
    let r = ok(&scan_args("boson_relax_pos_a", "1.25e5", "8e6", "-1e4", "10"));
    let rows = table(&r.stdout);
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|row| row["in_regime"] == "true"));
    let worst = rows.iter().map(|row| num(&row["discrepancy"])).fold(0.0, f64::max);
    assert!(worst < 0.01, "{worst}");
}

#[test]
fn rates_scan_without_absorption_is_zero() {
    // Re A = r0 would put a node on the boundary when nothing is absorbed.
    let mut args = scan_args("boson_recomb_neg_a", "1.25e5", "8e6", "-1e4", "0");
    args[10] = "3";
    let r = ok(&args);
    for row in table(&r.stdout) {
        assert_eq!(num(&row["rate_analytic"]), 0.0);
        assert_eq!(num(&row["rate_numeric"]), 0.0);
    }
}

#[test]
fn rates_scan_scaled_recombination_column() {
    let r = ok(&[&scan_args("boson_recomb_neg_a", "1.25e5", "8e6", "-1e4", "10")[..], &["--engine", "analytic"]].concat());
    for row in table(&r.stdout) {
        let (a, rate) = (num(&row["a"]), num(&row["rate_analytic"]));
        let expect = rate * 1e4 / a.powi(4);
        assert!((num(&row["scaled_analytic"]) / expect - 1.0).abs() < 1e-10);
        assert_eq!(row["rate_numeric"], "");
    }
}

#[test]
fn rates_scan_flags_out_of_regime_rows() {
    let r = ok(&scan_args("boson_relax_pos_a", "2e4", "2e5", "-1e4", "10"));
    let rows = table(&r.stdout);
    assert_eq!(rows[0]["in_regime"], "false");
    assert_eq!(rows.last().unwrap()["in_regime"], "true");
    assert!(num(&summary(&r.stderr, "out_of_regime_rows")) > 0.0);
}

#[test]
fn fit_alpha_beta_from_scans() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (r_eff, lo, hi) in [("-5e3", "1.5e5", "1.5e8"), ("-1e4", "3e5", "3e8"), ("-2e4", "6e5", "6e8")] {
        let path = dir.path().join(format!("scan{r_eff}.csv"));
        let out = path.to_str().unwrap().to_string();
        let mut args = scan_args("boson_relax_pos_a", lo, hi, r_eff, "10");
        args.extend(["--points", "40", "--engine", "numeric", "--out", &out]);
        ok(&args);
        files.push(out);
    }
    let mut args = vec!["fit-alpha-beta", "--system", "boson_relax", "--a-re", "10", "--a-im", "10"];
    args.extend(files.iter().map(String::as_str));
    let r = ok(&args);
    let rows = table(&r.stdout);
    assert_eq!(rows[0]["estimate"], "global");
    for row in &rows {
        for key in ["alpha", "beta"] {
            let v = num(&row[key]);
            assert!(v > 0.1 && v < 10.0, "{row:?}");
        }
    }
    assert!(num(&summary(&r.stderr, "spacing_error")) < 0.01);

    assert_eq!(run(&["fit-alpha-beta", "--system", "boson_relax", "--a-re", "10", &files[0]]).code, 2);
    assert_eq!(run(&["fit-alpha-beta", "--system", "boson_relax", "--a-re", "0", &files[0], &files[1]]).code, 4);
}

#[test]
fn threshold_check_exit_codes() {
    let base = ["threshold-check", "--system", "boson_recomb", "--a", "-1e6", "--r-eff", "-1e4", "--a-re", "10", "--a-im", "10", "--r0", "10"];
    let r = ok(&base);
    assert_eq!(summary(&r.stderr, "pass"), "true");
    assert!((num(&summary(&r.stderr, "exponent")) - 4.0).abs() < 0.08);
    assert_eq!(run(&[&base[..], &["--tol", "1e-12"]].concat()).code, 4);
    let near = ["threshold-check", "--system", "boson_relax", "--a", "2e4", "--r-eff", "-1e4", "--a-re", "10", "--a-im", "10", "--r0", "10"];
    assert_eq!(run(&near).code, 3);
}

#[test]
fn output_is_deterministic_and_annotated() {
    let args = scan_args("boson_relax_pos_a", "1.25e5", "8e6", "-1e4", "10");
    let first = ok(&args).stdout;
    assert_eq!(first, ok(&args).stdout);
    assert!(!first.contains('#'));
    let annotated = ok(&[&args[..], &["--annotate"]].concat()).stdout;
    assert!(annotated.starts_with("# invocation: threebody rates-scan"));
    assert!(annotated.ends_with(&first));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s0.json");
    let r = ok(&["s0", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(r.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v[0]["s0"].as_f64().unwrap() - 1.00624).abs() < 1e-4);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    // Halving the field unit doubles |r_eff| on every row.
    let cfg = write(dir.path(), "half.cfg", &format!("gauss_in_au_field = {}\n", 0.5e-4 / 2.35051756758e5));
    let plain = table(&ok(&["reff-table"]).stdout);
    let halved = table(&ok(&["reff-table", "--config", &cfg]).stdout);
    for (p, h) in plain.iter().zip(&halved) {
        assert!((num(&h["r_eff_au"]) / num(&p["r_eff_au"]) - 2.0).abs() < 1e-9);
    }

    let base = ["threshold-check", "--system", "boson_recomb", "--a", "-1e6", "--r-eff", "-1e4", "--a-re", "10", "--a-im", "10", "--r0", "10"];
    let strict = write(dir.path(), "strict.cfg", "tol = 1e-12\n");
    assert_eq!(run(&[&base[..], &["--config", &strict]].concat()).code, 4);
    assert_eq!(run(&[&base[..], &["--config", &strict, "--tol", "0.02"]].concat()).code, 0);

    let bad = write(dir.path(), "bad.cfg", "speed_of_light = 137\n");
    assert_eq!(run(&["s0", "--config", &bad]).code, 2);
    assert_eq!(run(&["s0", "--config", "/nonexistent.cfg"]).code, 2);
}
