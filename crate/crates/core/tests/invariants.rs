use apdb::heuristics::{Combine, PdbHeuristic};
use apdb::search::{ida_star, oracle_opt, SearchOptions};
use apdb::{
    path_cost, AbstractionSpec, BuildOptions, CostScheme, Puzzle, Ranker, StartMode, TilePartition,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn puzzles() -> impl Strategy<Value = Puzzle> {
    prop_oneof![
        (4usize..=9).prop_map(|n| Puzzle::pancake(n).unwrap()),
        (5usize..=9, 2usize..=4).prop_map(|(n, k)| Puzzle::topspin(n, k).unwrap()),
        Just(Puzzle::sliding_tile(3, 2).unwrap()),
        Just(Puzzle::sliding_tile(3, 3).unwrap()),
    ]
}

/// Splits the tiles into `parts` contiguous groups.
fn split(p: Puzzle, parts: usize) -> TilePartition {
    let n = p.tiles().count();
    let parts = parts.clamp(1, n);
    let sizes: Vec<String> = (0..parts)
        .map(|i| (n * (i + 1) / parts - n * i / parts).to_string())
        .collect();
    TilePartition::parse(&sizes.join("-")).unwrap()
}

fn schemes(p: Puzzle) -> Vec<CostScheme> {
    let mut v = vec![CostScheme::CostSplit, CostScheme::location_based_for(p)];
    if p.blank().is_some() {
        v.push(CostScheme::ZeroOne);
    }
    v
}

fn random_state(p: Puzzle, seed: u64) -> apdb::State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    p.random_start(StartMode::Walk(60), &mut rng).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_unrank_round_trip(p in puzzles(), parts in 1usize..4, seed: u64) {
        let partition = split(p, parts);
        for spec in AbstractionSpec::for_partition(p, &partition, &CostScheme::FullCost).unwrap() {
            let ranker = Ranker::new(&spec).unwrap();
            let a = spec.abstract_state(&random_state(p, seed));
            let r = ranker.rank(&a).unwrap();
            prop_assert!(r < ranker.size());
            prop_assert_eq!(ranker.unrank(r).unwrap(), a);
        }
    }

    #[test]
    fn edge_costs_split_additively(p in puzzles(), parts in 1usize..4, seed: u64) {
        let partition = split(p, parts);
        let s = random_state(p, seed);
        for scheme in schemes(p) {
            let specs = AbstractionSpec::for_partition(p, &partition, &scheme).unwrap();
            let scale = specs[0].scale();
            for op in 0..p.num_ops() as u32 {
                if p.apply(&s, op).is_err() {
                    continue;
                }
                let mut sum = 0;
                for spec in &specs {
                    let (c, r) = spec.edge_image_costs(&s, op).unwrap();
                    prop_assert_eq!(c + r, scale, "{} op {}", scheme, op);
                    sum += c;
                }
                prop_assert!(sum <= scale, "{} op {}: {} > {}", scheme, op, sum, scale);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ida_star_is_optimal(idx in 0usize..3, seed: u64) {
        let p = [
            Puzzle::pancake(7).unwrap(),
            Puzzle::topspin(7, 3).unwrap(),
            Puzzle::sliding_tile(3, 2).unwrap(),
        ][idx];
        let partition = split(p, 2);
        let s = random_state(p, seed);
        let opt = oracle_opt(&p, &s, None, 1_000_000).unwrap();
        let h = PdbHeuristic::<u32>::build(p, &partition, &CostScheme::CostSplit, BuildOptions::default(), false).unwrap();
        for how in [Combine::Add, Combine::AddInfeasible] {
            let c = h.combine(how).unwrap();
            prop_assert!(h.h_add(&s) <= opt);
            let r = ida_star(&p, &c, &s, SearchOptions::default()).unwrap();
            prop_assert_eq!(r.cost, opt);
            let path = r.path.unwrap();
            prop_assert_eq!(path_cost(&path).unwrap(), opt);
            prop_assert_eq!(path.end(), &p.goal());
        }
    }

    #[test]
    fn move_pruning_keeps_optimality(n in 6usize..=9, k in 2usize..=4, seed: u64) {
        let p = Puzzle::topspin(n, k).unwrap();
        let s = random_state(p, seed);
        let opt = oracle_opt(&p, &s, None, 1_000_000).unwrap();
        let h = PdbHeuristic::<u32>::build(p, &split(p, 2), &CostScheme::FullCost, BuildOptions::default(), false).unwrap();
        let opts = SearchOptions { move_pruning: true, ..SearchOptions::default() };
        let pruned = ida_star(&p, &h.combine(Combine::Max).unwrap(), &s, opts).unwrap();
        let plain = ida_star(&p, &h.combine(Combine::Max).unwrap(), &s, SearchOptions::default()).unwrap();
        prop_assert_eq!(pruned.cost, opt);
        prop_assert!(pruned.nodes_generated <= plain.nodes_generated);
        prop_assert_eq!(path_cost(&pruned.path.unwrap()).unwrap(), opt);
    }
}

#[test]
fn move_pruning_is_exact_on_every_small_topspin_state() {
    for (n, k) in [(8, 3), (8, 4)] {
        let p = Puzzle::topspin(n, k).unwrap();
        let h = PdbHeuristic::<u32>::build(
            p,
            &split(p, 2),
            &CostScheme::FullCost,
            BuildOptions::default(),
            false,
        )
        .unwrap();
        let c = h.combine(Combine::Max).unwrap();
        let opts = SearchOptions {
            move_pruning: true,
            keep_path: false,
            ..SearchOptions::default()
        };
        let all = apdb::search::distances_to_goal(&p, 100_000).unwrap();
        assert!(all.len() >= 144);
        for (s, d) in all {
            assert_eq!(ida_star(&p, &c, &s, opts).unwrap().cost, d, "{s}");
        }
    }
}
