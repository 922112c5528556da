use engel_cli::{run, EXIT_CAP, EXIT_OK, EXIT_USAGE};

fn engel(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("engel").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn column<'a>(text: &'a str, name: &str) -> Vec<&'a str> {
    let lines = data_lines(text);
    let idx = lines[0].split(',').position(|c| c == name).unwrap();
    lines[1..].iter().map(|l| l.split(',').nth(idx).unwrap()).collect()
}

#[test]
fn commutator_polynomial() {
    let (code, out, _) = engel(&["trace-poly", "--word", "[x,y]"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "-s*u*t + s^2 + u^2 + t^2 - 2\n");
    let (_, by_index, _) = engel(&["trace-poly", "--engel", "1"]);
    assert_eq!(by_index, out);
}

#[test]
fn image_of_e3_over_f11_misses_nine() {
    let (code, out, _) = engel(&["image", "--q", "11", "--engel", "3"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(column(&out, "missing"), vec!["9"]);
}

#[test]
fn e3_survey_below_137() {
    let (code, out, err) = engel(&["survey", "--q", "5..137", "--engel", "3", "--format", "csv"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let lines = data_lines(&out);
    assert_eq!(lines[0], "q,p,e,m,psl_surjective,sl_almost,minus_id_attained,missing_traces");
    let flags = column(&out, "psl_surjective");
    assert_eq!(flags.len(), 43);
    assert!(flags.iter().all(|&v| v == "true"));
    assert!(err.contains("skipping non-prime-powers"));
}

#[test]
fn output_is_reproducible_across_thread_counts() {
    let base = ["survey", "--q", "4..40", "--engel", "1..4"];
    let (_, a, _) = engel(&base);
    let (_, b, _) = engel(&[&base[..], &["--threads", "1"]].concat());
    let (_, c, _) = engel(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(a, b);
    assert_eq!(a, c);
}

#[test]
fn json_mirrors_csv() {
    let (_, csv, _) = engel(&["survey", "--q", "9,11", "--engel", "3"]);
    let (code, json, _) = engel(&["survey", "--q", "9,11", "--engel", "3", "--format", "json"]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(column(&csv, "sl_almost"), vec!["yes", "no"]);
    assert_eq!(rows[1]["sl_almost"], "no");
    assert_eq!(rows[1]["missing_traces"], serde_json::json!([9]));
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, data_lines(&csv)[0].split(',').collect::<Vec<_>>());
    assert_eq!(doc["provenance"]["command"], "survey");
}

#[test]
fn witnesses_in_json() {
    let (code, json, _) = engel(&["survey", "--q", "7", "--engel", "2", "--format", "json", "--witnesses"]);
    assert_eq!(code, EXIT_OK);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let w = doc["rows"][0]["witnesses"].as_object().unwrap();
    assert_eq!(w.len(), 7);
    assert_eq!(w["0"]["x"].as_array().unwrap().len(), 4);
}

#[test]
fn usage_errors() {
    assert_eq!(engel(&["survey", "--q", "6", "--engel", "2"]).0, EXIT_USAGE);
    assert_eq!(engel(&["survey", "--q", "3", "--engel", "2"]).0, EXIT_USAGE);
    assert_eq!(engel(&["survey", "--q", "5"]).0, EXIT_USAGE);
    assert_eq!(engel(&["survey", "--q", "5", "--engel", "0"]).0, EXIT_USAGE);
    assert_eq!(engel(&["survey", "--q", "5", "--engel", "2", "--format", "xml"]).0, EXIT_USAGE);
    assert_eq!(engel(&["minus-id", "--q", "8", "--engel", "2"]).0, EXIT_USAGE);
    assert_eq!(engel(&["trace-poly", "--word", "x^"]).0, EXIT_USAGE);
    assert_eq!(engel(&["frobnicate"]).0, EXIT_USAGE);
    let (code, out, _) = engel(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("survey"));
}

#[test]
fn cap_refusal() {
    let (code, out, err) = engel(&["oracle", "--q", "13", "--engel", "4", "--oracle-cap", "1000"]);
    assert_eq!(code, EXIT_CAP);
    assert!(out.is_empty());
    assert!(err.contains("cap"));
}

#[test]
fn oracle_agrees_on_small_fields() {
    let (code, out, err) = engel(&["oracle", "--q", "4..11", "--engel", "1..3"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(column(&out, "agree").iter().all(|&v| v == "true"));
}

#[test]
fn config_file_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    let dest = dir.path().join("report.csv");
    std::fs::write(&cfg, "q = [7, 9]\nengel = \"2..3\"\n").unwrap();
    let (code, out, _) =
        engel(&["minus-id", "--config", cfg.to_str().unwrap(), "--output", dest.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.is_empty());
    let written = std::fs::read_to_string(&dest).unwrap();
    assert_eq!(column(&written, "solvable"), vec!["true", "true", "true", "true"]);
    let (_, flagged, _) = engel(&["minus-id", "--config", cfg.to_str().unwrap(), "--q", "11"]);
    assert_eq!(column(&flagged, "solvable"), vec!["true", "false"]);
}

#[test]
fn orbits_and_scan() {
    let (code, out, _) = engel(&["orbits", "--q", "7", "--prime-orbit", "2"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(column(&out, "cycles"), vec!["1:14 2:4"]);
    assert_eq!(column(&out, "prime_orbit")[0].split(' ').count(), 2);
    assert_eq!(engel(&["orbits", "--q", "7", "--prime-orbit", "4"]).0, EXIT_USAGE);
    let (_, scan, _) = engel(&["scan-conjecture", "--q", "17"]);
    assert_eq!(column(&scan, "missing"), vec!["10@2 4@4 5@5"]);
    assert_eq!(column(&scan, "pm_failures"), vec![""]);
}

#[test]
fn equidistribution_table() {
    let (code, out, _) = engel(&["equidist", "--q", "13", "--engel", "2"]);
    assert_eq!(code, EXIT_OK);
    let s: u64 = column(&out, "s_size")[0].parse().unwrap();
    assert_eq!(s, 13 * 13 * 13 - 13 - 2 * 13 * 13);
}
