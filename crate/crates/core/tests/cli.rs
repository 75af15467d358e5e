use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use hill_riesz::cli::main_with_args;

struct Out {
    code: i32,
    stdout: Vec<u8>,
    stderr: String,
}

fn hill(args: &[&str]) -> Out {
    let mut argv = vec!["hill"];
    argv.extend_from_slice(args);
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = main_with_args(argv, &mut o, &mut e);
    Out { code, stdout: o, stderr: String::from_utf8_lossy(&e).into_owned() }
}

fn ok(args: &[&str]) -> Vec<u8> {
    let r = hill(args);
    assert_eq!(r.code, 0, "hill {args:?} failed: {}", r.stderr);
    r.stdout
}

fn schema(name: &str) -> Value {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas").join(name);
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, doc: &Value) {
    let s = schema(schema_name);
    let v = jsonschema::validator_for(&s).expect("schema compiles");
    let errors: Vec<String> = v.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{schema_name}: {errors:#?}");
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid JSON")
}

fn manifest_of(out: &Path) -> Value {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest.json");
    json(&std::fs::read(PathBuf::from(p)).unwrap())
}

fn csv_rows(bytes: &[u8]) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(bytes);
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn walks_json_matches_schema_and_class_zero() {
    let doc = json(&ok(&["walks", "--potential", "-2:1,2:2", "--n", "4", "--direction", "fwd", "--z", "0"]));
    assert_valid("walk_sum.schema.json", &doc);
    assert_eq!(doc["classes"][0]["sum"]["exact"], "1/144");
    assert_eq!(doc["classes"][0]["count"], 1);
    assert_eq!(doc["certified"], true);
    assert!(doc["partial_sum"]["re"].as_f64().unwrap() > 0.0);
}

#[test]
fn walks_single_class_and_formats() {
    let doc = json(&ok(&["walks", "--potential", "-2:1,4:1", "--n", "3", "--class", "1"]));
    assert_eq!(doc["index"], 1);
    assert_eq!(doc["sum"]["exact"], "0");
    assert_eq!(doc["count"], 3);

    let (header, rows) = csv_rows(&ok(&["walks", "--potential", "-2:1,2:2", "--n", "4", "--format", "csv", "--max-class", "2"]));
    assert_eq!(header, ["n", "direction", "class", "sum_re", "sum_im", "sum_exact", "mass", "count"]);
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[1][5], "1/6912");

    let text = String::from_utf8(ok(&["walks", "--potential", "-2:1,2:2", "--n", "2", "--format", "text"])).unwrap();
    assert!(text.contains("class 0: sum 1 mass"), "{text}");
    assert!(text.contains("tail_bound"));
}

#[test]
fn walk_dump_lines() {
    let text = String::from_utf8(ok(&["walks", "--potential", "-2:1,4:1", "--n", "3", "--list", "3"])).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "3 fwd [-2,4,4] 1 -128 -> -1/128",
            "3 fwd [4,-2,4] 1 64 -> 1/64",
            "3 fwd [4,4,-2] 1 -128 -> -1/128",
        ]
    );
}

#[test]
fn exit_codes() {
    // malformed coefficient index
    assert_eq!(hill(&["walks", "--potential", "3:1", "--n", "4"]).code, 2);
    // unknown flag value
    assert_eq!(hill(&["spectrum", "--potential", "-2:1,2:1", "--bc", "per0", "--n", "4"]).code, 2);
    // n² - j² + z vanishes at j = 0
    let r = hill(&["walks", "--potential", "-2:1,2:1", "--n", "2", "--z", "-4"]);
    assert_eq!(r.code, 3, "{}", r.stderr);
    // no tail certificate for a general potential; the sums are still printed
    let r = hill(&["walks", "--potential", "-2:1,2:2,6:1", "--n", "4"]);
    assert_eq!(r.code, 4, "{}", r.stderr);
    assert_valid("walk_sum.schema.json", &json(&r.stdout));
    // the n = 1 antiperiodic disc holds a single eigenvalue
    let r = hill(&["spectrum", "--potential", "-2:1,2:1", "--bc", "per-", "--n", "1"]);
    assert_eq!(r.code, 5, "{}", r.stderr);
}

#[test]
fn asymptotics_csv_errors_decrease() {
    let (header, rows) =
        csv_rows(&ok(&["asymptotics-compare", "--potential", "-2:1,4:1", "--direction", "bwd", "--n", "4..14"]));
    assert_eq!(&header[..7], ["n", "exact_re", "exact_im", "leading_re", "leading_im", "rel_err", "error_model"]);
    assert_eq!(rows.len(), 11);
    let errs: Vec<f64> = rows.iter().map(|r| r[5].parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");

    let doc = json(&ok(&[
        "asymptotics-compare", "--potential", "-2:1,2:2", "--n", "3..9", "--bc", "per+", "--format", "json",
    ]));
    assert_valid("asymptotics.schema.json", &doc);
    let ns: Vec<u64> = doc.as_array().unwrap().iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, [4, 6, 8]);
}

#[test]
fn spectrum_json_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pairs.json");
    let o = out.to_str().unwrap();
    ok(&["spectrum", "--potential", "-2:1,2:1", "--bc", "per+", "--n", "2..12", "--out", o]);
    let bytes = std::fs::read(&out).unwrap();
    let doc = json(&bytes);
    assert_valid("spectrum.schema.json", &doc);
    let ns: Vec<u64> = doc.as_array().unwrap().iter().map(|r| r["n"].as_u64().unwrap()).collect();
    assert_eq!(ns, [2, 4, 6, 8, 10, 12]);

    let m = manifest_of(&out);
    assert_valid("run_manifest.schema.json", &m);
    assert_eq!(m["command"], "spectrum");
    assert_eq!(m["bc"], "per+");
    assert_eq!(m["outputs"][0]["sha256"], hex::encode(Sha256::digest(&bytes)));

    // fixed truncation
    let doc = json(&ok(&["spectrum", "--potential", "-2:1,2:1", "--bc", "per-", "--n", "3,5", "--k", "24"]));
    assert_valid("spectrum.schema.json", &doc);
    assert!(doc.as_array().unwrap().iter().all(|r| r["k"] == 24));
}

#[test]
fn basis_profile_formats() {
    let args = ["basis-profile", "--potential", "-2:1,2:2", "--bc", "per+", "--n", "4..10"];
    let (header, rows) = csv_rows(&ok(&args));
    assert_eq!(header, ["n", "gram_abs", "proj_norm", "gap", "predicted_gram", "predicted_gap"]);
    assert_eq!(rows.len(), 4);

    let mut long = args.to_vec();
    long.extend(["--format", "long"]);
    let (header, rows) = csv_rows(&ok(&long));
    assert_eq!(header, ["n", "quantity", "value"]);
    assert!(rows.iter().any(|r| r[1] == "gram_abs"));

    let mut js = args.to_vec();
    js.extend(["--format", "json"]);
    assert_valid("basis_profile.schema.json", &json(&ok(&js)));
}

#[test]
fn verdict_report_matches_schema() {
    let doc = json(&ok(&["basis-verdict", "--potential", "-2:1,2:2", "--bc", "per+", "--n", "4..10"]));
    assert_valid("basis_verdict.schema.json", &doc);
    assert_eq!(doc["prediction"], "NotBasis");
    assert_eq!(doc["consistent"], true);

    let doc = json(&ok(&["basis-verdict", "--potential", "-4:1,-2:1,2:4,4:-1", "--bc", "per+", "--n", "4..8"]));
    assert_valid("basis_verdict.schema.json", &doc);
    assert_eq!(doc["prediction"], "NotCovered");
    assert!(doc["grounds"].as_array().unwrap().iter().any(|g| g.as_str().unwrap().contains("integer square")));
}

#[test]
fn report_writes_tables_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("run");
    ok(&["report", "--potential", "-2:1,4:1", "--bc", "per+", "--n", "4..10", "--out", d.to_str().unwrap()]);
    let report = json(&std::fs::read(d.join("report.json")).unwrap());
    assert_valid("basis_verdict.schema.json", &report);
    let (header, rows) = csv_rows(&std::fs::read(d.join("profile.csv")).unwrap());
    assert_eq!(header.len(), 6);
    assert_eq!(rows.len(), 4);
    assert!(d.join("profile_long.csv").exists());
    let m = manifest_of(&d.join("report"));
    assert_valid("run_manifest.schema.json", &m);
    assert_eq!(m["outputs"].as_array().unwrap().len(), 3);
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["walks", "--potential", "-4:1/4,-2:1/4,2:1/4,4:1/4", "--n", "5", "--z", "1/2-1/2i"],
        vec!["spectrum", "--potential", "-2:1,2:2", "--bc", "per+", "--n", "4..8"],
        vec!["basis-verdict", "--potential", "-2:1,2:1", "--bc", "per-", "--n", "3..9"],
    ] {
        assert_eq!(ok(&args), ok(&args), "{args:?}");
    }
}
