//! End-to-end tests driving the compiled binary the way a user would.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use halfswitch::{hk_sequence, BipartiteRealization, SwitchMove};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_halfswitch"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).expect("stdout should be UTF-8")
}

#[test]
fn count_prints_the_transfer_matrix_total() {
    let out = stdout(&run(&["count", "--n", "5", "--k", "1"]));
    assert_eq!(out.trim(), "34", "defect-1 order-5 family has 34 members");

    let js: Value =
        serde_json::from_str(&stdout(&run(&["count", "--n", "5", "--k", "1", "--json"])))
            .expect("count --json should emit JSON");
    assert_eq!(js["count"], "34", "JSON carries the count as a string");
    assert_eq!(js["n"], 5);
    assert_eq!(js["k"], 1);
}

#[test]
fn enumerate_agrees_with_count() {
    let js: Value = serde_json::from_str(&stdout(&run(&[
        "enumerate",
        "--n",
        "5",
        "--k",
        "1",
        "--json",
    ])))
    .expect("enumerate --json should emit JSON");
    assert_eq!(
        js["count"], 34,
        "oracle and matrix agree on the family size"
    );
    let states = js["realizations"].as_array().expect("realization list");
    assert_eq!(states.len(), 34, "one entry per realization");
}

#[test]
fn sample_is_deterministic_and_respects_degrees() {
    let args = [
        "sample", "--n", "6", "--k", "2", "--steps", "400", "--seed", "11", "--json",
    ];
    let first = stdout(&run(&args));
    let second = stdout(&run(&args));
    assert_eq!(first, second, "same seed must reproduce the same output");

    let js: Value = serde_json::from_str(&first).expect("sample --json should emit JSON");
    let d = hk_sequence(6, 2);
    let want_a: Vec<u64> = d.deg_a.iter().map(|&x| x as u64).collect();
    let got_a: Vec<u64> = js["degA"]
        .as_array()
        .expect("degA")
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect();
    assert_eq!(got_a, want_a, "sampled state keeps the requested degrees");
}

#[test]
fn decompose_splits_the_staircase_into_single_vertices() {
    let js: Value = serde_json::from_str(&stdout(&run(&["decompose", "--n", "5", "--json"])))
        .expect("decompose --json should emit JSON");
    let comps = js["components"].as_array().expect("components");
    assert_eq!(comps.len(), 10, "order-5 staircase has 10 trivial factors");
}

#[test]
fn flow_json_lists_arcs_and_nonzero_excess() {
    let js: Value =
        serde_json::from_str(&stdout(&run(&["flow", "--n", "4", "--k", "1", "--json"])))
            .expect("flow --json should emit JSON");
    assert_eq!(js["n"], 4);
    let arcs = js["arcs"].as_array().expect("arc list");
    assert!(
        !arcs.is_empty(),
        "defect-1 realization is not the staircase"
    );
    for arc in arcs {
        let quad = arc.as_array().expect("arc quadruple");
        assert_eq!(
            quad.len(),
            4,
            "arcs serialize as [side, index, side, index]"
        );
        let idx = quad[1].as_u64().expect("tail index");
        assert!(idx >= 1, "wire format is 1-based");
    }
    let excess = js["excess"].as_object().expect("excess map");
    let total: i64 = excess.values().map(|v| v.as_i64().unwrap()).sum();
    assert_eq!(total, 0, "positive and negative excess balance");
    assert!(excess.values().all(|v| v.as_i64().unwrap() != 0));
}

#[test]
fn path_moves_replay_into_a_valid_walk() {
    let js: Value = serde_json::from_str(&stdout(&run(&[
        "path", "--n", "5", "--k", "1", "--x", "0", "--y", "20", "--json",
    ])))
    .expect("path --json should emit JSON");
    let moves = js["moves"].as_array().expect("move list");
    assert_eq!(
        js["states"].as_u64().unwrap() as usize,
        moves.len() + 1,
        "a path with m moves visits m + 1 states"
    );

    // Replay against the library's enumeration order.
    let d = hk_sequence(5, 1);
    let all = halfswitch::enumerate_realizations_with_limit(&d, 49).unwrap();
    let mut g: BipartiteRealization = all[0].clone();
    for mv in moves {
        let q: Vec<usize> = mv
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap() as usize)
            .collect();
        let mv = SwitchMove::from_one_indexed([q[0], q[1], q[2], q[3]])
            .expect("printed moves are canonical");
        g.apply_switch(mv).expect("every printed move must apply");
    }
    assert_eq!(g, all[20], "replayed walk ends at the requested state");
}

#[test]
fn mix_csv_emits_the_distance_curve() {
    let out = stdout(&run(&["mix", "--n", "4", "--k", "1", "--csv"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("t,tv"), "curve starts with its header");
    let first = lines.next().expect("at least one data row");
    assert!(
        first.starts_with("0,"),
        "curve starts at t = 0, got {first:?}"
    );
}

#[test]
fn stability_csv_has_growth_columns() {
    let out = stdout(&run(&["stability", "--k", "0", "--from", "3", "--to", "6"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("n,k,count,ratio,growth,r_ratio"));
    assert_eq!(out.lines().count(), 5, "header plus one row per order");
}

#[test]
fn degrees_can_come_from_stdin() {
    let mut child = bin()
        .args(["enumerate", "--degrees", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .expect("binary should spawn");
    child
        .stdin
        .take()
        .expect("stdin handle")
        .write_all(br#"{"degA":[2,2,1],"degB":[1,2,2]}"#)
        .expect("write degrees");
    let out = child.wait_with_output().expect("binary should finish");
    let text = stdout(&out);
    assert!(
        text.starts_with("5 realizations"),
        "piped degree sequence enumerates like --n 3 --k 1, got {text:?}"
    );
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let dir = std::env::temp_dir().join("halfswitch-cli-test");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let path = dir.join("count.txt");
    let out = run(&[
        "count",
        "--n",
        "6",
        "--k",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty(), "--out suppresses stdout");
    let written = std::fs::read_to_string(&path).expect("output file");
    assert_eq!(written.trim(), "89");
    std::fs::remove_file(&path).ok();
}

#[test]
fn missing_required_flag_is_a_usage_error() {
    let out = run(&["count"]);
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit with 2");
}

#[test]
fn oversized_oracle_request_is_a_domain_error() {
    let out = run(&["enumerate", "--n", "9"]);
    assert_eq!(out.status.code(), Some(1), "domain errors exit with 1");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.starts_with("error:"),
        "domain errors are prefixed, got {err:?}"
    );
}
