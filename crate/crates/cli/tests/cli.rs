//! End-to-end tests of the `ougrowth` binary: schema stability, reference
//! values through the full pipeline, determinism, and exit-code semantics.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ougrowth"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Parses CSV into (header, rows); all cells kept as strings.
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("nonempty output")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|line| line.split(',').map(str::to_string).collect::<Vec<_>>())
        .collect();
    (header, rows)
}

fn field<'a>(header: &[String], row: &'a [String], name: &str) -> &'a str {
    let at = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("column {name} in {header:?}"));
    &row[at]
}

fn float_field(header: &[String], row: &[String], name: &str) -> f64 {
    field(header, row, name).parse().expect("float cell")
}

#[test]
fn couplings_single_row_matches_the_reference_constants() {
    let out = run(&["couplings", "--a", "1.0"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(
        header,
        ["a", "y0", "lambda0", "k", "y0_2", "lambda0_2", "k2", "status"]
    );
    assert_eq!(rows.len(), 1);
    // Printed reference values; tolerance 1.5 units in the last printed digit
    // (the source table truncates some entries rather than rounding).
    let expected = [
        ("y0", 1.30654, 1.5e-5),
        ("lambda0", 0.369405, 1.5e-6),
        ("k", 0.36787, 1.5e-5),
        ("y0_2", 2.0288, 1.5e-4),
        ("lambda0_2", 0.195471, 1.5e-6),
        ("k2", 0.168091, 1.5e-6),
    ];
    for (name, value, tol) in expected {
        let got = float_field(&header, &rows[0], name);
        assert!((got - value).abs() <= tol, "{name}: {got} vs {value}");
    }
    assert_eq!(field(&header, &rows[0], "status"), "ok");
}

#[test]
fn empty_list_yields_header_only_output() {
    let out = run(&["couplings", "--a", ""]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(stdout(&out), "a,y0,lambda0,k,y0_2,lambda0_2,k2,status\n");
}

#[test]
fn identical_seeds_give_byte_identical_output() {
    let args = [
        "mc", "--paths", "3000", "--sigmas", "0.05,0.15", "--seed", "7", "--n", "20",
    ];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let jf = run(&json_args);
    let js = run(&json_args);
    assert_eq!(jf.stdout, js.stdout);
    assert_ne!(first.stdout, jf.stdout);
}

#[test]
fn csv_float_cells_reparse_to_the_emitted_text() {
    // String -> f64 -> string is the identity at 9 significant digits, so
    // consumers can round-trip the file without drift.
    let out = run(&["exact", "--n", "2,4,8"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    for row in &rows {
        for name in ["m_n", "log_m_n", "lambda_n", "density", "entropy"] {
            let text = field(&header, row, name);
            let value: f64 = text.parse().expect("float");
            assert_eq!(format!("{value:.8e}"), text);
        }
    }
}

#[test]
fn json_output_carries_metadata_and_typed_rows() {
    let out = run(&["exact", "--n", "2,4", "--format", "json"]);
    assert_eq!(exit_code(&out), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid json");
    assert_eq!(doc["metadata"]["command"], "exact");
    assert_eq!(doc["metadata"]["parameters"]["rho"], 0.025);
    let rows = doc["rows"].as_array().expect("rows array");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["n"], 2);
    assert!(rows[0]["m_n"].is_f64());
    assert_eq!(rows[1]["status"], "ok");
}

#[test]
fn exact_two_site_worked_value_survives_the_pipeline() {
    let out = run(&[
        "exact", "--n", "2", "--rho", "0.025", "--sigma", "0.2", "--gamma", "0.5", "--tau", "1.0",
    ]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    let m2 = float_field(&header, &rows[0], "m_n");
    assert!((m2 - 1.0506402).abs() < 2e-7, "M_2 = {m2}");
}

#[test]
fn overflowing_rows_are_marked_and_exit_code_is_2() {
    let out = run(&[
        "mc", "--rho", "1e300", "--n", "3", "--sigmas", "0.1", "--paths", "8", "--tau", "1.0",
    ]);
    assert_eq!(exit_code(&out), 2);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(field(&header, &rows[0], "mean"), "inf");
    assert_eq!(field(&header, &rows[0], "lambda_n"), "inf");
    assert_eq!(field(&header, &rows[0], "status"), "overflow");
}

#[test]
fn phase_curves_stack_by_range_parameter() {
    let out = run(&["phase-curve", "--a", "0.5,1.0,2.0", "--rhos", "0.01,0.025"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    // For each coupling and fugacity, the transition temperature decreases
    // with the range parameter: the curves never cross.
    for coupling in ["k", "lambda0"] {
        for rho in ["1.00000000e-2", "2.50000000e-2"] {
            let t: Vec<f64> = rows
                .iter()
                .filter(|r| {
                    field(&header, r, "coupling") == coupling && field(&header, r, "rho") == rho
                })
                .map(|r| float_field(&header, r, "t_cr"))
                .collect();
            assert_eq!(t.len(), 3);
            assert!(t[0] > t[1] && t[1] > t[2], "{coupling} {rho}: {t:?}");
        }
    }
}

#[test]
fn transition_row_is_inserted_and_marked() {
    let out = run(&["meanfield"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 8, "7 requested betas plus the transition row");
    let marked: Vec<&Vec<String>> = rows
        .iter()
        .filter(|r| field(&header, r, "phase") == "coexistence")
        .collect();
    assert_eq!(marked.len(), 1);
    let beta = float_field(&header, marked[0], "beta");
    assert!((beta - 10.0274).abs() < 1e-3, "beta_cr = {beta}");
    let x1 = float_field(&header, marked[0], "x1");
    let x2 = float_field(&header, marked[0], "x2");
    assert!(x1 < 0.5 && x2 > 0.5);
    // Rows stay sorted by beta after the insertion.
    let betas: Vec<f64> = rows
        .iter()
        .map(|r| float_field(&header, r, "beta"))
        .collect();
    assert!(betas.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn invalid_parameters_exit_1_with_a_message() {
    let out = run(&["exact", "--n", "30"]);
    assert_eq!(exit_code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("24"));

    let out = run(&["thresholds", "--rho", "0.2"]);
    assert_eq!(exit_code(&out), 1);
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());

    let out = run(&["couplings", "--a=-1.0"]);
    assert_eq!(exit_code(&out), 1);

    let out = run(&["mc", "--sigmas", "0.1,oops"]);
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn unconverged_variational_run_reports_status_and_exit_2() {
    let out = run(&[
        "variational", "--beta", "5.0", "--grid-m", "64", "--max-iter", "3",
    ]);
    assert_eq!(exit_code(&out), 2);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 64);
    assert_eq!(field(&header, &rows[0], "converged"), "false");
    assert_eq!(field(&header, &rows[0], "status"), "unconverged");
}

#[test]
fn out_flag_writes_the_same_bytes_as_stdout() {
    let path = std::env::temp_dir().join("ougrowth-cli-out-test.csv");
    let _ = std::fs::remove_file(&path);
    let piped = run(&["couplings", "--a", "0.5,1.0"]);
    let to_file = run(&[
        "couplings", "--a", "0.5,1.0", "--out",
        path.to_str().expect("utf-8 temp path"),
    ]);
    assert_eq!(exit_code(&to_file), 0);
    assert!(stdout(&to_file).is_empty());
    let written = std::fs::read(&path).expect("file written");
    assert_eq!(written, piped.stdout);
    let _ = std::fs::remove_file(&path);
}

#[test]
fn variational_row_sits_inside_its_own_bounds_columns() {
    let out = run(&["variational", "--beta", "5.0", "--grid-m", "128"]);
    assert_eq!(exit_code(&out), 0);
    let (header, rows) = parse_csv(&stdout(&out));
    assert_eq!(rows.len(), 128);
    let lambda = float_field(&header, &rows[0], "lambda");
    let lower = float_field(&header, &rows[0], "lower");
    let upper = float_field(&header, &rows[0], "upper");
    // Quadrature error at m = 128 is far below the bound gap here.
    assert!(lower - 1e-6 <= lambda && lambda <= upper + 1e-6);
    let xs: Vec<f64> = rows
        .iter()
        .map(|r| float_field(&header, r, "x"))
        .collect();
    assert!((xs[0] - 0.5 / 128.0).abs() < 1e-15);
    assert!(xs.windows(2).all(|w| w[1] > w[0]));
}
