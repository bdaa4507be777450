use kitchen_core::cost::dominates;
use kitchen_core::optimizer::initial_layout;
use kitchen_core::planner::first_conflict;
use kitchen_core::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn tasks() -> Vec<SubTask> {
    use Component::*;
    let recipes = vec![
        Recipe { dish_id: "burger-1".into(), components: vec![Bun, Meat, Tomato, Lettuce, Cheese], submission: Submission::Plate },
        Recipe { dish_id: "burger-2".into(), components: vec![Bun, Meat], submission: Submission::Plain },
    ];
    expand_recipes(&recipes, &DwellTimes::default()).unwrap()
}

fn problem(seed: u64) -> Problem {
    let inventory: Vec<Counter> = CounterKind::ALL
        .iter()
        .map(|&kind| Counter {
            id: kind.name().into(),
            kind,
            position: Point2::new(0.0, 0.0),
            orientation: QuarterTurn::Deg0,
            width: 1.0,
            depth: 0.6,
            target_wall_distance: 0.0,
        })
        .collect();
    let room = Room::rectangle(8.0, 8.0).unwrap();
    let sim = SimConfig::with_south_spawns(8.0);
    let initial = initial_layout(&room, &inventory, &sim, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    Problem { initial, tasks: tasks(), sim, costs: CostModel::default() }
}

#[test]
fn simulated_kitchen_is_collision_free_and_complete() {
    let p = problem(4);
    assert!(p.admissible(&p.initial));
    let params = &p.sim.params;
    let out = (0..20)
        .map(|s| simulate(&p.initial, &p.tasks, &p.sim, &mut ChaCha8Rng::seed_from_u64(s)))
        .find(|o| o.success)
        .expect("one of 20 simulations succeeds");

    for path in [&out.human, &out.robot] {
        assert!(path.nodes.windows(2).all(|w| w[0].t <= w[1].t));
        assert!(path.nodes.windows(2).all(|w| p.initial.segment_clear(w[0].q, w[1].q, params.agent_radius)));
    }
    assert_eq!(first_conflict(&out.robot, &out.human, params.min_separation(), params.time_tolerance()), None);

    let mut done: Vec<&str> = out.segments.iter().map(|s| s.sub_task.as_str()).collect();
    done.sort_unstable();
    let mut expected: Vec<&str> = p.tasks.iter().map(|t| t.id.as_str()).collect();
    expected.sort_unstable();
    assert_eq!(done, expected);
}

#[test]
fn short_anneal_is_reproducible_and_non_dominated() {
    let p = problem(1);
    let config = AnnealConfig { seed: 9, iterations: 40, ..AnnealConfig::default() };
    let a = anneal(&config, &p).unwrap();
    let b = anneal(&config, &p).unwrap();
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.pareto.members(), b.pareto.members());

    let members = a.pareto.members();
    assert!(!members.is_empty());
    for (i, x) in members.iter().enumerate() {
        assert!(x.outcome.success);
        assert!(p.admissible(&x.layout));
        assert!(x.layout.validate().is_empty());
        for (j, y) in members.iter().enumerate() {
            assert!(i == j || !dominates(&y.costs, &x.costs));
        }
    }
    let best = a.best().unwrap();
    assert!(members.iter().all(|m| m.total_cost >= best.total_cost));
}
