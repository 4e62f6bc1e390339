use std::process::Command;

fn run<S: AsRef<str>>(args: &[S]) -> (i32, String) {
    let mut out = Vec::new();
    let args = std::iter::once("apdb").chain(args.iter().map(|a| a.as_ref()));
    let code = apdb_cli::run_args(args, &mut out).unwrap();
    (code, String::from_utf8(out).unwrap())
}

fn data_lines(out: &str) -> Vec<&str> {
    out.lines().filter(|l| !l.starts_with('#')).collect()
}

fn fixture(name: &str) -> String {
    format!(
        "{}/../core/tests/fixtures/{name}",
        env!("CARGO_MANIFEST_DIR")
    )
}

const PANCAKE6: &[&str] = &[
    "--domain",
    "pancake",
    "--n",
    "6",
    "--partition",
    "3-3",
    "--scheme",
    "cost-split",
];

fn with(base: &[&str], extra: &[&str]) -> Vec<String> {
    base.iter().chain(extra).map(|s| s.to_string()).collect()
}

#[test]
fn build_then_reload_from_cache() {
    let dir = tempfile::tempdir().unwrap();
    let mut args = with(&["build-pdb"], PANCAKE6);
    args.extend(["--pdb-dir".to_string(), dir.path().display().to_string()]);
    let (code, first) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(first.matches("built=").count(), 2);
    assert!(first.contains("entries=120 scale=60"));
    let (_, second) = run(&args);
    assert_eq!(second.matches("loaded=").count(), 2);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 2);
}

#[test]
fn rebuilding_gives_identical_files() {
    let read = |d: &std::path::Path| {
        let mut files: Vec<_> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        files.sort();
        files
            .iter()
            .map(|f| std::fs::read(f).unwrap())
            .collect::<Vec<_>>()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let mut args = with(&["build-pdb"], PANCAKE6);
        args.extend(["--pdb-dir".to_string(), d.path().display().to_string()]);
        assert_eq!(run(&args).0, 0);
    }
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn shared_table_builds_once() {
    let args = with(
        &["build-pdb", "--shared"],
        &[
            "--domain",
            "topspin",
            "--n",
            "8",
            "--k",
            "4",
            "--partition",
            "4-4",
        ],
    );
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(data_lines(&out).len(), 1);
    assert!(out.contains("# shared=true"));
}

#[test]
fn explain_prints_exact_rationals_along_the_path() {
    let args = with(&["solve", "--state", "3,1,5,0,4,2", "--explain"], PANCAKE6);
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    let mut lines = data_lines(&out).into_iter();
    let summary = lines.next().unwrap();
    assert!(summary.contains("cost=6"), "{summary}");
    let rows: Vec<serde_json::Value> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 7);
    assert_eq!(rows[0]["h_add_exact"], "301/60");
    assert_eq!(rows[0]["per_abstraction"][0]["c_star"], "73/30");
    assert_eq!(rows[6]["h_add"], 0);
    for (g, r) in rows.iter().enumerate() {
        assert_eq!(r["g"], g);
    }
}

#[test]
fn goal_state_costs_nothing() {
    let (code, out) = run(&with(&["solve", "--state", "0,1,2,3,4,5"], PANCAKE6));
    assert_eq!(code, 0);
    assert!(data_lines(&out)[0].contains(" cost=0 "), "{out}");
}

#[test]
fn explain_on_twelve_pancakes() {
    let args = [
        "solve",
        "--domain",
        "pancake",
        "--n",
        "12",
        "--partition",
        "6-6",
        "--scheme",
        "cost-split",
        "--state",
        "7,4,5,6,3,8,0,10,9,2,1,11",
        "--explain",
    ];
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    let first: serde_json::Value = serde_json::from_str(data_lines(&out)[1]).unwrap();
    assert_eq!(
        (first["h_max"].as_u64(), first["h_add"].as_u64()),
        (Some(8), Some(7))
    );
}

#[test]
fn bench_csv_has_header_and_one_row_per_heuristic() {
    let args = with(
        &[
            "bench",
            "--heuristics",
            "h_max,h_add,h_add+infeasible",
            "--instances",
            "10",
            "--start",
            "permutation",
            "--seed",
            "5",
        ],
        PANCAKE6,
    );
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    assert!(out.starts_with("# apdb "));
    assert!(out.contains("# seed=5"));
    let data = data_lines(&out);
    assert!(data[0].starts_with("domain,abs,heuristic,n_instances,solved,failed,status,"));
    assert!(data[0].ends_with("nodes_ratio_vs_baseline"));
    assert_eq!(data.len(), 4);
    assert!(data[1].starts_with("pancake6,3-3 costsplit,h_max,10,10,0,ok,"));
    assert!(data[1].ends_with(",1.000000"));
    // Every heuristic is admissible, so solution lengths agree.
    let len = |row: &str| row.split(',').nth(7).unwrap().to_string();
    assert!(data[1..].iter().all(|r| len(r) == len(data[1])));
}

#[test]
fn bench_is_reproducible_under_a_seed() {
    let args = with(
        &[
            "bench",
            "--instances",
            "8",
            "--seed",
            "11",
            "--format",
            "json",
        ],
        PANCAKE6,
    );
    let strip = |s: String| {
        let mut v: serde_json::Value = serde_json::from_str(&s).unwrap();
        for r in v["rows"].as_array_mut().unwrap() {
            r.as_object_mut().unwrap().remove("mean_time_s");
        }
        v
    };
    assert_eq!(strip(run(&args).1), strip(run(&args).1));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "domain=pancake\nn=6\npartition=3-3\nscheme=full-cost\nheuristics=h_max\ninstances=3\n",
    )
    .unwrap();
    let (_, out) = run(&[
        "bench",
        "--config",
        cfg.to_str().unwrap(),
        "--instances",
        "4",
    ]);
    assert!(out.contains("# instances=4"));
    assert!(out.contains(",h_max,4,4,"));
}

#[test]
fn verify_lemmas_pass_on_pancake() {
    let args = with(&["verify", "--lemma", "4,5,P3"], PANCAKE6);
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    assert_eq!(
        data_lines(&out)[0],
        "LEMMA-4 pancake6 3-3 costsplit exhaustive 720 OK"
    );
    assert!(out.contains("P3 pancake6 3-3 costsplit exhaustive"));
}

#[test]
fn verify_graph_files() {
    let ok = fixture("tile2x2_additive.graph");
    assert_eq!(run(&["verify", "--graph", &ok]).0, 0);
    let bad = fixture("p2_violation.graph");
    let (code, out) = run(&["verify", "--graph", &bad]);
    assert_eq!(code, 2);
    assert!(
        out.contains("P2 graph k=1 explicit exhaustive 2 FAIL 1"),
        "{out}"
    );
}

#[test]
fn measure_addbetter_reports_interval() {
    let args = with(
        &["measure-addbetter", "--samples", "200", "--seed", "2"],
        PANCAKE6,
    );
    let (code, out) = run(&args);
    assert_eq!(code, 0);
    assert!(
        out.contains("addbetter=") && out.contains("/200 ") && out.contains("ci95=["),
        "{out}"
    );
    assert!(out.starts_with("# apdb ") && out.contains("# samples=200\n"));
}

#[test]
fn budget_failures_are_marked_in_the_rows() {
    let args = with(
        &[
            "bench",
            "--heuristics",
            "h_max",
            "--instances",
            "3",
            "--start",
            "permutation",
            "--node-budget",
            "2",
        ],
        PANCAKE6,
    );
    let (code, out) = run(&args);
    assert_eq!(code, 3);
    assert!(data_lines(&out)[1].contains(",budget_exceeded,"), "{out}");
}

#[test]
fn additive_rule_needs_additive_scheme() {
    let args = &[
        "solve",
        "--domain",
        "pancake",
        "--n",
        "6",
        "--partition",
        "3-3",
        "--scheme",
        "full-cost",
        "--state",
        "1,0,2,3,4,5",
    ];
    let mut out = Vec::new();
    assert!(apdb_cli::run_args(
        std::iter::once("apdb").chain(args.iter().copied()),
        &mut out
    )
    .is_err());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_apdb");
    let status = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    let base = [
        "--domain",
        "pancake",
        "--n",
        "8",
        "--partition",
        "4-4",
        "--scheme",
        "cost-split",
    ];
    let budget: Vec<&str> = ["solve", "--state", "7,6,5,4,3,2,1,0", "--node-budget", "5"]
        .iter()
        .chain(&base)
        .copied()
        .collect();
    assert_eq!(status(&budget), Some(3));
    let bench: Vec<&str> = ["bench", "--instances", "3", "--node-budget", "5"]
        .iter()
        .chain(&base)
        .copied()
        .collect();
    assert_eq!(status(&bench), Some(3));
    assert_eq!(
        status(&["verify", "--graph", &fixture("p3_violation.graph")]),
        Some(2)
    );
    assert_eq!(
        status(&["verify", "--graph", &fixture("tile2x2_additive.graph")]),
        Some(0)
    );
    assert_eq!(
        status(&["bench", "--domain", "cube", "--partition", "2-2"]),
        Some(1)
    );
}
