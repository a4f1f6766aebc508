use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hetspec::{SchemeFile, Setup};
use proptest::prelude::*;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hetspec"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write(name: &str, body: &str) -> PathBuf {
    let p = scratch(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str], config: &Path) -> Output {
    bin().args(args).arg("--config").arg(config).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

const TWO: &str = r#"{
  "reference_hz": 2.8e14,
  "bandwidth_hz": 500.0,
  "components": [
    { "offset_hz": 4000.0, "amplitude": { "power_w": 2.0, "phase_rad": 0.3 } },
    { "offset_hz": 0.0, "amplitude": { "re": 1.0, "im": 0.0 } }
  ],
  "demodulations": [ { "freq_hz": 2000.0, "phase_rad": 0.4 } ],
  "options": { "narrowband": true, "normalized_units": true, "grid_points": 11 }
}"#;

#[test]
fn toml_and_json_parse_to_the_same_setup() {
    let toml = r#"
reference_hz = 2.8e14
bandwidth_hz = 500.0
components = [
  { offset_hz = 4000.0, amplitude = { power_w = 2.0, phase_rad = 0.3 } },
  { offset_hz = 0.0, amplitude = { re = 1.0, im = 0.0 } },
]
demodulations = [ { freq_hz = 2000.0, phase_rad = 0.4 } ]
[options]
narrowband = true
normalized_units = true
grid_points = 11
"#;
    let a = SchemeFile::parse(TWO, false).unwrap().setup().unwrap();
    let b = SchemeFile::parse(toml, true).unwrap().setup().unwrap();
    assert_eq!(a, b);
}

#[test]
fn unknown_keys_are_rejected() {
    for bad in [
        TWO.replace("\"options\"", "\"extra\": 1, \"options\""),
        TWO.replace("\"grid_points\"", "\"gridpoints\""),
        TWO.replace("\"phase_rad\": 0.4", "\"phase_rad\": 0.4, \"q\": 1"),
        TWO.replace("\"re\": 1.0,", "\"re\": 1.0, \"power_w\": 1.0,"),
    ] {
        assert!(SchemeFile::parse(&bad, false).is_err(), "{bad}");
        let p = write("bad.json", &bad);
        assert_eq!(code(&run(&["matrix"], &p)), 2);
    }
}

#[test]
fn degrees_flag_converts_every_phase() {
    let deg = TWO
        .replace("\"phase_rad\": 0.3", "\"phase_rad\": 30.0")
        .replace("\"phase_rad\": 0.4", "\"phase_rad\": 45.0");
    let rad = TWO
        .replace("\"phase_rad\": 0.3", &format!("\"phase_rad\": {}", 30f64.to_radians()))
        .replace("\"phase_rad\": 0.4", &format!("\"phase_rad\": {}", 45f64.to_radians()));
    let a = SchemeFile::parse(&deg, false).unwrap().degrees_to_radians().setup().unwrap();
    let b = SchemeFile::parse(&rad, false).unwrap().setup().unwrap();
    assert_eq!(a, b);
    let (pd, pr) = (write("deg.json", &deg), write("rad.json", &rad));
    assert_eq!(
        run(&["compute", "--degrees"], &pd).stdout,
        run(&["compute"], &pr).stdout
    );
}

fn arb_setup() -> impl Strategy<Value = Setup> {
    (
        proptest::collection::btree_set(0i32..50, 1..=4),
        proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 4),
        proptest::collection::vec((1i32..20, -3.2f64..3.2), 0..=2),
        any::<bool>(),
        1usize..30,
    )
        .prop_map(|(offs, amps, demods, narrow, points)| {
            let comps: Vec<String> = offs
                .iter()
                .rev()
                .zip(&amps)
                .map(|(f, (re, im))| {
                    format!(r#"{{"offset_hz": {}, "amplitude": {{"re": {re:?}, "im": {im:?}}}}}"#, *f as f64 * 1e3)
                })
                .collect();
            let demods: Vec<String> = demods
                .iter()
                .map(|(d, p)| format!(r#"{{"freq_hz": {}, "phase_rad": {p:?}}}"#, *d as f64 * 1e3 + 0.5))
                .collect();
            let text = format!(
                r#"{{"reference_hz": 1e14, "bandwidth_hz": 100.0, "components": [{}], "demodulations": [{}],
                    "options": {{"narrowband": {narrow}, "grid_points": {points}}}}}"#,
                comps.join(","),
                demods.join(",")
            );
            SchemeFile::parse(&text, false).unwrap().setup().unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_setup_reparses_identically(setup in arb_setup()) {
        let file = SchemeFile::from_setup(&setup);
        let again = SchemeFile::parse(&file.to_json(), false).unwrap();
        prop_assert_eq!(&again, &file);
        prop_assert_eq!(again.setup().unwrap(), setup);
    }
}

#[test]
fn csv_and_json_agree() {
    let p = write("two.json", TWO);
    let csv = String::from_utf8(run(&["compute", "--breakdown"], &p).stdout).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&run(&["compute", "--breakdown", "--format", "json"], &p).stdout).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let terms = json["breakdown"].as_array().unwrap();
    assert_eq!(header.len(), 2 + terms.len());
    for (i, line) in lines.enumerate() {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols[0], json["freqs_hz"][i].as_f64().unwrap());
        assert_eq!(cols[1], json["values"][i].as_f64().unwrap());
        for (j, t) in terms.iter().enumerate() {
            assert_eq!(header[2 + j], t["label"].as_str().unwrap());
            assert_eq!(cols[2 + j], t["values"][i].as_f64().unwrap());
        }
    }
    assert!(!csv.contains('\r'));
}

#[test]
fn compute_output_is_deterministic_and_written_to_file() {
    let p = write("two.json", TWO);
    let out = scratch("two.csv");
    let o = bin()
        .args(["compute", "--config"])
        .arg(&p)
        .arg("--output")
        .arg(&out)
        .env("HETSPEC_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read(&out).unwrap(), run(&["compute"], &p).stdout);
}

#[test]
fn matrix_without_demodulation_has_one_column() {
    let p = write(
        "m0.json",
        r#"{"reference_hz": 1e14, "bandwidth_hz": 10.0,
            "components": [{"offset_hz": 0.0, "amplitude": {"re": 1.0, "im": 0.0}},
                           {"offset_hz": 300.0, "amplitude": {"re": 0.0, "im": 1.0}}]}"#,
    );
    let o = run(&["matrix", "--format", "json"], &p);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["rows"], serde_json::json!([[0.0], [300.0]]));
    assert_eq!(v["groups"], serde_json::json!([]));
}

#[test]
fn validation_errors_exit_2() {
    let overlapping = TWO.replace("\"offset_hz\": 4000.0", "\"offset_hz\": 700.0");
    assert_eq!(code(&run(&["matrix"], &write("ov.json", &overlapping))), 2);
    assert_eq!(code(&run(&["matrix"], Path::new("/nonexistent/scheme.json"))), 2);
    let p = write("two.json", TWO);
    let o = bin().args(["compute", "--config"]).arg(&p).env("HETSPEC_THREADS", "zero").output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn optimize_shapes() {
    let equal = r#"{"reference_hz": 1e14, "bandwidth_hz": 100.0,
        "components": [{"offset_hz": 0.0, "amplitude": {"re": 1.0, "im": 0.0}},
                       {"offset_hz": 4000.0, "amplitude": {"re": 1.0, "im": 0.0}}],
        "demodulations": [{"freq_hz": 2000.0, "phase_rad": 0.0}],
        "squeezers": [{"ref_offset_hz": 2000.0, "r": 0.5, "phi_rad": 0.0}]}"#;
    let o = run(&["optimize", "--format", "json"], &write("eq.json", equal));
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["demod_phase_rad"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);

    let no_squeezer = equal.replace(r#"{"ref_offset_hz": 2000.0, "r": 0.5, "phi_rad": 0.0}"#, "");
    assert_eq!(code(&run(&["optimize"], &write("nosq.json", &no_squeezer))), 5);
    let on_unique = equal.replace("\"ref_offset_hz\": 2000.0", "\"ref_offset_hz\": 6000.0");
    assert_eq!(code(&run(&["optimize"], &write("uniq.json", &on_unique))), 5);
    assert_eq!(code(&run(&["optimize"], &write("two.json", TWO))), 5);
}

#[test]
fn oracle_report_is_reproducible_and_tolerance_gates_exit() {
    let p = write("two.json", TWO);
    let args = ["oracle", "--seed", "11", "--trials", "4"];
    let a = run(&args, &p);
    let b = bin().args(args).arg("--config").arg(&p).env("HETSPEC_THREADS", "1").output().unwrap();
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let fail = run(&["oracle", "--seed", "11", "--trials", "4", "--tol", "0"], &p);
    assert_eq!(code(&fail), 6);
    let v: serde_json::Value = serde_json::from_slice(&fail.stdout).unwrap();
    assert_eq!(v["comparison"]["pass"], false);
    assert_eq!(code(&run(&["oracle", "--sample-rate", "1000"], &p)), 2);
}
