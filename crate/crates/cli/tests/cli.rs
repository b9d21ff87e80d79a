use std::process::Command;

use matsp_cli::{render, run_experiment, Config, Format};

fn lab(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_lab")).args(args).output().expect("lab runs")
}

fn cfg(q: &str) -> Config {
    Config { q: Some(q.into()), ..Config::default() }
}

fn without_runtime(bytes: Vec<u8>) -> String {
    String::from_utf8(bytes).unwrap().lines().filter(|l| !l.contains("\"runtime_ms\"")).collect::<Vec<_>>().join("\n")
}

#[test]
fn same_config_same_bytes() {
    let mut c = cfg("3");
    c.trials = Some(3);
    c.seed = Some(11);
    let a = render(&run_experiment("j_count_thm25", &c).unwrap(), Format::Json).unwrap();
    let b = render(&run_experiment("j_count_thm25", &c).unwrap(), Format::Json).unwrap();
    assert_eq!(without_runtime(a), without_runtime(b));
}

#[test]
fn different_seed_different_sets() {
    let mut c = cfg("3");
    let a = run_experiment("srb_cor23", &c).unwrap();
    c.seed = Some(1);
    let b = run_experiment("srb_cor23", &c).unwrap();
    assert_ne!(a.measured, b.measured);
}

#[test]
fn csv_has_one_row_per_trial() {
    let mut c = cfg("2");
    c.trials = Some(4);
    let r = run_experiment("srb_cor23", &c).unwrap();
    let out = render(&r, Format::Csv).unwrap();
    let mut rd = csv::Reader::from_reader(out.as_slice());
    let headers = rd.headers().unwrap().clone();
    assert_eq!(&headers[0], "trial");
    assert!(headers.iter().any(|h| h == "ratio.max_sum_product"));
    assert_eq!(rd.records().count(), 4);
}

#[test]
fn json_round_trip_keeps_integers() {
    let mut c = cfg("2");
    for s in [&mut c.set_a, &mut c.set_b, &mut c.set_c, &mut c.set_d] {
        *s = Some("construction:full".into());
    }
    let r = run_experiment("j_count_thm25", &c).unwrap();
    let text = render(&r, Format::Json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(v["measured"]["j"].as_u64(), Some(4096));
    assert_eq!(v["measured"]["deviation"].as_f64(), Some(0.0));
    assert_eq!(v["experiment"], "j_count_thm25");

    // u128-sized counts survive as exact integers
    let r = run_experiment("prop31", &{
        let mut c = cfg("2");
        for s in [&mut c.set_a, &mut c.set_b, &mut c.set_c, &mut c.set_d, &mut c.set_e, &mut c.set_f] {
            *s = Some("construction:full".into());
        }
        c
    })
    .unwrap();
    let text = String::from_utf8(render(&r, Format::Json).unwrap()).unwrap();
    assert!(text.contains("\"i\": 1048576"));
}

#[test]
fn every_experiment_runs_at_q2_and_q3() {
    for name in matsp_cli::experiment_names() {
        for q in ["2", "3"] {
            let mut c = cfg(q);
            c.trials = Some(match name {
                "normality" | "pair_classes" => 50,
                _ => 1,
            });
            if name == "sharpness_a_plus_b_c" {
                // needs k >= 2
                c.q = Some(if q == "2" { "4" } else { "9" }.into());
            }
            if name == "mixing" {
                c.size = Some(50);
            }
            if name == "sharpness_ab_plus_c" {
                c.x = Some(vec![1]);
            }
            let r = run_experiment(name, &c).unwrap_or_else(|e| panic!("{name} q={q}: {e}"));
            if name != "normality" {
                assert!(r.all_pass(), "{name} q={q}: {:?}", r.pass_flags);
            }
        }
    }
}

#[test]
fn exit_codes() {
    let ok = lab(&["sharpness_det_subgroup", "--q", "5", "--g", "2"]);
    assert_eq!(ok.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["measured"]["size_a"].as_u64(), Some(240));

    let failing = lab(&["normality", "--q", "2", "--trials", "200"]);
    assert_eq!(failing.status.code(), Some(1));

    assert_eq!(lab(&["no_such_experiment", "--q", "2"]).status.code(), Some(2));
    assert_eq!(lab(&["spectrum", "--q", "6"]).status.code(), Some(2));
    assert_eq!(lab(&["spectrum"]).status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let dir = std::env::temp_dir().join(format!("lab-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let conf = dir.join("conf.json");
    let out = dir.join("out.csv");
    std::fs::write(&conf, r#"{"q": "3", "trials": 2, "format": "csv"}"#).unwrap();
    let o = lab(&["srb_cor23", "--config", conf.to_str().unwrap(), "--q", "2", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);

    std::fs::write(&conf, r#"{"q": "3", "bogus": 1}"#).unwrap();
    assert_eq!(lab(&["srb_cor23", "--config", conf.to_str().unwrap()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn set_from_file() {
    let dir = std::env::temp_dir().join(format!("lab-set-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let ring = matsp_core::MatRing::new(&matsp_core::make_field(3, 1, None).unwrap());
    let a = matsp_core::constructions::random_subset(&ring, matsp_core::Universe::M2, 10, 3).unwrap();
    let path = dir.join("a.txt");
    a.write_to(std::fs::File::create(&path).unwrap()).unwrap();
    let mut c = cfg("3");
    c.set_a = Some(path.to_str().unwrap().into());
    let r = run_experiment("srb_cor23", &c).unwrap();
    assert_eq!(r.measured["size_a"], matsp_cli::Value::Int(10));
    c.q = Some("5".into());
    assert!(run_experiment("srb_cor23", &c).is_err());
    std::fs::remove_dir_all(&dir).ok();
}
