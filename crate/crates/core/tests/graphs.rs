use apdb::search::{ida_star, oracle_opt, SearchOptions, Zero};
use apdb::verify::verify_conditions;
use apdb::{check_conditions, ExplicitGraph};

fn fixture(name: &str) -> ExplicitGraph {
    let path = format!("{}/tests/fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    ExplicitGraph::parse(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn failing(g: &ExplicitGraph) -> Vec<String> {
    verify_conditions(g)
        .unwrap()
        .into_iter()
        .filter(|r| !r.passed())
        .map(|r| r.check)
        .collect()
}

#[test]
fn tile_puzzle_split_by_moved_tile_is_additive() {
    let g = fixture("tile2x2_additive.graph");
    assert_eq!(g.num_states(), 12);
    assert!(check_conditions(&g).unwrap().all_hold());
    assert!(failing(&g).is_empty());
}

#[test]
fn each_violation_fixture_fails_only_its_condition() {
    for (file, want) in [
        ("p1_violation.graph", "P1"),
        ("p2_violation.graph", "P2"),
        ("p3_violation.graph", "P3"),
    ] {
        assert_eq!(failing(&fixture(file)), vec![want.to_string()], "{file}");
    }
}

#[test]
fn violation_reports_carry_witnesses() {
    let reports = verify_conditions(&fixture("p3_violation.graph")).unwrap();
    let p3 = reports.iter().find(|r| r.check == "P3").unwrap();
    assert_eq!(p3.violation_count, 1);
    assert!(p3.violations[0].contains('a') && p3.violations[0].contains('b'));
    assert!(p3.line().ends_with("FAIL 1"));
}

#[test]
fn text_round_trip_preserves_the_graph() {
    let g = fixture("tile2x2_additive.graph");
    let back = ExplicitGraph::parse(&g.to_text()).unwrap();
    assert_eq!(back.num_states(), g.num_states());
    assert_eq!(back.edges(), g.edges());
}

#[test]
fn search_on_explicit_graph_matches_oracle() {
    let g = fixture("tile2x2_additive.graph");
    for s in 0..g.num_states() {
        let opt = oracle_opt(&g, &s, None, 100).unwrap();
        let found = ida_star(&g, &Zero, &s, SearchOptions::default()).unwrap();
        assert_eq!(found.cost, opt, "from {}", g.name(s));
    }
}
