//! Shared test scenes.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::{Counter, CounterKind, Layout, Point2, QuarterTurn, Room};
use crate::recipe::{expand_recipes, Component, DwellTimes, Recipe, SubTask, Submission};

pub fn burger_recipes() -> Vec<Recipe> {
    vec![
        Recipe {
            dish_id: "burger-1".into(),
            components: vec![Component::Bun, Component::Meat, Component::Tomato, Component::Lettuce, Component::Cheese],
            submission: Submission::Plate,
        },
        Recipe {
            dish_id: "burger-2".into(),
            components: vec![Component::Bun, Component::Meat],
            submission: Submission::Plain,
        },
    ]
}

pub fn burger_tasks() -> Vec<SubTask> {
    expand_recipes(&burger_recipes(), &DwellTimes::default()).unwrap()
}

pub fn counter(kind: CounterKind, x: f64, y: f64, o: QuarterTurn) -> Counter {
    Counter {
        id: kind.name().into(),
        kind,
        position: Point2::new(x, y),
        orientation: o,
        width: 1.0,
        depth: 0.6,
        target_wall_distance: 0.0,
    }
}

/// Counters flush against the west, north and east walls of an 8 m room.
pub fn wall_kitchen() -> Layout {
    use CounterKind::*;
    use QuarterTurn::*;
    Layout::new(
        Room::rectangle(8.0, 8.0).unwrap(),
        vec![
            counter(Bun, 0.3, 2.0, Deg0),
            counter(Meat, 0.3, 4.0, Deg0),
            counter(Tomato, 0.3, 6.0, Deg0),
            counter(Lettuce, 2.0, 7.7, Deg270),
            counter(Stove, 4.0, 7.7, Deg270),
            counter(CuttingBoard, 6.0, 7.7, Deg270),
            counter(Cheese, 7.7, 6.0, Deg180),
            counter(Plate, 7.7, 4.0, Deg180),
            counter(Plain, 7.7, 2.0, Deg180),
        ],
    )
}
