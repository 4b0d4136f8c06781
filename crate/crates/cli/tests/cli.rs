use std::process::Command;

use proptest::prelude::*;
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["zkseq"];
    full.extend_from_slice(args);
    let code = zkseq_cli::run(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn sequence_examples() {
    let (code, out, _) = run(&["sequence", "--modulus", "5", "--elements", "1,2,3,4", "--mode", "classical"]);
    assert_eq!(code, 0);
    let v = json(&out);
    let items: Vec<String> = v["ordering"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
    let (code, _, _) = run(&["verify", "--modulus", "5", "--elements", &items.join(",")]);
    assert_eq!(code, 0);

    assert_eq!(run(&["sequence", "--modulus", "5", "--elements", "0,1"]).0, 1);
    assert_eq!(run(&["sequence", "--modulus", "5", "--elements", "1,2", "--mode", "tweak"]).0, 1);
    assert_eq!(run(&["sequence", "--modulus", "5", "--elements", "1,7"]).0, 1);
    assert_eq!(run(&["sequence", "--elements", "1,2"]).0, 1);
    assert_eq!(run(&["sequence", "--modulus", "5", "--elements", "1,2", "--mode", "sideways"]).0, 1);
}

#[test]
fn construction_failure_exits_two() {
    // the elements sum to 0, so no t-weak sequencing exists
    let (code, _, err) = run(&["sequence", "--modulus", "5", "--elements", "1,2,3,4", "--mode", "tweak", "--t", "2"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn verify_examples() {
    let (code, out, _) = run(&["verify", "--modulus", "5", "--elements", "1,4"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["verdict"]["passed"], true);

    let (code, out, _) = run(&["verify", "--modulus", "5", "--elements", "2,3,1"]);
    assert_eq!(code, 3);
    let w = &json(&out)["verdict"]["witness"];
    assert_eq!(w["kind"], "zero_partial_sum");
    assert_eq!(w["i"], 2);

    let (code, out, _) = run(&["verify", "--modulus", "11", "--elements", "1,2,4,3", "--t", "2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["verdict"]["goal"], "t_weak");

    assert_eq!(run(&["verify", "--modulus", "5", "--elements", "1,4", "--goal", "tweak"]).0, 1);
}

#[test]
fn tool_examples() {
    let (code, out, _) = run(&["dissociate", "--elements", "1,3,4", "--modulus", "1000"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out), serde_json::json!({ "dissociated": false }));

    let (code, out, _) = run(&["oracle", "--modulus", "5", "--max-size", "4", "--goal", "valid"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,subset_bitmask,size,goal,achievable,witness"));
    assert_eq!(lines.filter(|l| l.contains(",true,")).count(), 15);

    let (code, out, _) = run(&["oracle", "--modulus", "5", "--elements", "1,2,3,4", "--t", "2"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["found"], false);

    let (code, out, _) = run(&["rectify", "--modulus", "101", "--elements", "10,20,30", "--method", "exhaustive"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["method"], "exhaustive");
    assert_eq!(v["max_abs"], 3);

    let (code, out, _) = run(&["decompose", "--modulus", "1000003", "--elements", "1,2,3,999999", "--r", "2", "--flat-fallback"]);
    assert_eq!(code, 0, "{out}");
    assert!(json(&out)["report"]["partition"].as_bool().unwrap());

    let (code, out, _) = run(&["census", "--modulus", "7", "--goal", "sequencing"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 64);

    let (code, out, _) = run(&["mc", "lll-budget", "--p-hat", "0.1", "--degree", "10"]);
    assert_eq!(code, 0);
    assert!(out.contains("lll_budget:ePD,0,0,2.718"));
    assert!(out.contains(",fail"));

    let (code, out, _) = run(&["mc", "anticoncentration", "--trials", "20000", "--x", "13,2"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("experiment,seed,trials,estimate,stderr,bound,verdict\n"));
    assert!(out.contains("anticoncentration:x=2,0,20000,0.0,0.0,"));

    assert_eq!(run(&["mc", "anticoncentration", "--quarters", "1,2,3,4", "--trials", "10"]).0, 1);
}

#[test]
fn out_files_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("o.json");
    let p = path.to_str().unwrap();
    let args = ["sequence", "--modulus", "1000003", "--elements", "5,17,99,1234,5555,77777,31337,424242,900001,12,13,14,15,16,17000"];
    let mut first = args.to_vec();
    first.extend(["--seed", "9", "--out", p]);
    let (code, summary, _) = run(&first);
    assert_eq!(code, 0);
    assert!(summary.starts_with("sequence: 15 elements"));
    let a = std::fs::read_to_string(&path).unwrap();
    run(&first);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);

    let (code, _, _) = run(&["verify", "--ordering", p]);
    assert_eq!(code, 0);
    let txt = dir.path().join("o.txt");
    std::fs::write(&txt, "3 4 1\n").unwrap();
    let (code, _, _) = run(&["verify", "--ordering", txt.to_str().unwrap(), "--modulus", "7"]);
    assert_eq!(code, 3);
}

#[test]
fn binary_exit_codes_and_seed_env() {
    let bin = env!("CARGO_BIN_EXE_zkseq");
    let status = |args: &[&str]| Command::new(bin).args(args).env_remove("SEQ_SEED").output().unwrap().status.code();
    assert_eq!(status(&["verify", "--modulus", "5", "--elements", "2,3,1"]), Some(3));
    assert_eq!(status(&["nonsense"]), Some(1));
    assert_eq!(status(&["--help"]), Some(0));

    let mc = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(bin);
        c.args(["mc", "permissible", "--modulus", "11", "--left", "1,2,3,4", "--right", "5,6,7,8", "--k", "2"]);
        c.args(["--trials", "2000"]).args(extra);
        match env {
            Some(v) => c.env("SEQ_SEED", v),
            None => c.env_remove("SEQ_SEED"),
        };
        String::from_utf8(c.output().unwrap().stdout).unwrap()
    };
    let env5 = mc(Some("5"), &[]);
    assert!(env5.contains(",5,2000,"));
    assert_eq!(env5, mc(None, &["--seed", "5"]));
    // the flag wins over the environment
    assert_eq!(mc(Some("5"), &["--seed", "6"]), mc(None, &["--seed", "6"]));
    assert_ne!(env5, mc(None, &[]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sequence_output_passes_verify(
        k in prop::sample::select(vec![7u64, 13, 101, 1009, 1_000_003]),
        raw in prop::collection::btree_set(1u64..1_000_003, 1..16),
        tweak in prop::option::of(1usize..6),
        seed in 0u64..50,
    ) {
        let elems: std::collections::BTreeSet<u64> = raw.into_iter().map(|x| x % k).filter(|&x| x != 0).collect();
        prop_assume!(!elems.is_empty());
        let list = elems.iter().map(u64::to_string).collect::<Vec<_>>().join(",");
        let ks = k.to_string();
        let ss = seed.to_string();
        let mut args = vec!["sequence", "--modulus", &ks, "--elements", &list, "--seed", &ss];
        let ts = tweak.map(|t| t.to_string());
        match &ts {
            Some(t) => args.extend(["--mode", "tweak", "--t", t]),
            None => args.extend(["--mode", "classical"]),
        }
        let (code, out, err) = run(&args);
        prop_assert!(code == 0 || code == 2, "{err}");
        if code == 0 {
            let v = json(&out);
            let items: Vec<String> = v["ordering"].as_array().unwrap().iter().map(|x| x.to_string()).collect();
            let joined = items.join(",");
            let mut vargs = vec!["verify", "--modulus", &ks, "--elements", &joined];
            if let Some(t) = &ts {
                vargs.extend(["--t", t]);
            }
            prop_assert_eq!(run(&vargs).0, 0);
        }
    }
}
