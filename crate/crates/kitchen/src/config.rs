//! Problem configuration: JSON schema, defaults, loading with diagnostics,
//! and the room variants used by the experiments.

use std::path::{Path, PathBuf};

use kitchen_core::geometry::{GeometryError, Segment};
use kitchen_core::optimizer::initial_layout;
use kitchen_core::planner::Policy;
use kitchen_core::recipe::RecipeError;
use kitchen_core::{
    expand_recipes, AnnealConfig, CostModel, Counter, CounterKind, DwellTimes, Layout, PlannerParams, Point2, Problem,
    QuarterTurn, Recipe, Room, SimConfig, SubTask,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The two-burger scenario in an 8 m × 8 m room.
pub const BUNDLED_TWO_BURGER: &str = include_str!("../configs/two_burger_regular.json");

/// Boundary scale of the small room variant.
pub const SMALL_ROOM_SCALE: f64 = 0.8;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{0}")]
    Semantic(String),
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep the message alone.
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        ConfigError::Parse { line: e.line(), column: e.column(), message }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum RoomSpec {
    Rectangle { width: f64, height: f64 },
    /// Rectangle minus its upper-right `cut_width × cut_height` corner.
    LShape { width: f64, height: f64, cut_width: f64, cut_height: f64 },
    Polygon { points: Vec<Point2> },
}

impl RoomSpec {
    fn scaled(&self, k: f64) -> Self {
        match *self {
            Self::Rectangle { width, height } => Self::Rectangle { width: width * k, height: height * k },
            Self::LShape { width, height, cut_width, cut_height } => Self::LShape {
                width: width * k,
                height: height * k,
                cut_width: cut_width * k,
                cut_height: cut_height * k,
            },
            Self::Polygon { ref points } => Self::Polygon { points: points.iter().map(|&p| p * k).collect() },
        }
    }

    fn build(&self) -> Result<Room, GeometryError> {
        match *self {
            Self::Rectangle { width, height } => Room::rectangle(width, height),
            Self::LShape { width, height, cut_width, cut_height } => Room::l_shape(width, height, cut_width, cut_height),
            Self::Polygon { ref points } => Room::new(points.clone(), Vec::new()),
        }
    }
}

/// Which room the experiment runs in, relative to the configured one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum RoomVariant {
    /// The configured room as is.
    #[default]
    Regular,
    /// Every boundary coordinate scaled by 0.8.
    Small,
    /// The configured rectangle minus a quarter-size upper-right corner.
    Lshape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterSpec {
    #[serde(default)]
    pub id: Option<String>,
    pub kind: CounterKind,
    #[serde(default = "default_width")]
    pub width: f64,
    #[serde(default = "default_depth")]
    pub depth: f64,
    #[serde(default)]
    pub target_wall_distance: f64,
    /// Fixed starting pose. When every counter has one the configured
    /// layout is the starting state; otherwise counters are placed at random
    /// along the walls.
    #[serde(default)]
    pub position: Option<Point2>,
    #[serde(default)]
    pub orientation: Option<QuarterTurn>,
}

fn default_width() -> f64 {
    1.0
}

fn default_depth() -> f64 {
    0.6
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spawns {
    pub human: Point2,
    pub robot: Point2,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub room: RoomSpec,
    /// Extra walls inside the room.
    #[serde(default)]
    pub interior_walls: Vec<Segment>,
    /// Adds a horizontal wall through the room center, half the room wide.
    /// Not applied to the L-shape variant, whose cut edge runs along it.
    #[serde(default)]
    pub center_wall: bool,
    /// Whether interior walls stop agents. When false they only anchor
    /// counters for the layout costs.
    #[serde(default)]
    pub interior_walls_block_motion: bool,
    pub counters: Vec<CounterSpec>,
    pub recipes: Vec<Recipe>,
    #[serde(default)]
    pub dwell: DwellTimes,
    #[serde(default)]
    pub planner: PlannerParams,
    /// Defaults to two points 1.5 m in from the bottom of the room, 1 m apart.
    #[serde(default)]
    pub spawns: Option<Spawns>,
    #[serde(default)]
    pub policy: Policy,
    #[serde(default)]
    pub costs: CostModel,
    #[serde(default)]
    pub anneal: AnnealConfig,
}

/// Reads and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ProblemConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ProblemConfig, ConfigError> {
    let config: ProblemConfig = serde_json::from_str(text)?;
    config.validate()?;
    Ok(config)
}

impl ProblemConfig {
    pub fn bundled() -> Self {
        parse_config(BUNDLED_TWO_BURGER).expect("bundled config is valid")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let semantic = |m: String| Err(ConfigError::Semantic(m));
        let have: std::collections::BTreeSet<CounterKind> = self.counters.iter().map(|c| c.kind).collect();
        for r in &self.recipes {
            if let Some(k) = r.counters_used().into_iter().find(|k| !have.contains(k)) {
                return semantic(format!("recipe {} needs a {} counter, which the inventory lacks", r.dish_id, k.name()));
            }
        }
        for c in &self.counters {
            if !(c.width > 0.0 && c.depth > 0.0) {
                return semantic(format!("counter {} has a non-positive footprint", c.kind.name()));
            }
        }
        self.tasks().map_err(|e| ConfigError::Semantic(e.to_string()))?;
        self.anneal.validate().map_err(|e| ConfigError::Semantic(e.to_string()))?;
        for v in [RoomVariant::Regular, RoomVariant::Small] {
            self.room(v).map_err(|e| ConfigError::Semantic(e.to_string()))?;
        }
        Ok(())
    }

    pub fn tasks(&self) -> Result<Vec<SubTask>, RecipeError> {
        expand_recipes(&self.recipes, &self.dwell)
    }

    pub fn room_spec(&self, variant: RoomVariant) -> Result<RoomSpec, ConfigError> {
        Ok(match variant {
            RoomVariant::Regular => self.room.clone(),
            RoomVariant::Small => self.room.scaled(SMALL_ROOM_SCALE),
            RoomVariant::Lshape => match self.room {
                RoomSpec::Rectangle { width, height } => {
                    RoomSpec::LShape { width, height, cut_width: 0.5 * width, cut_height: 0.5 * height }
                }
                _ => return Err(ConfigError::Semantic("the L-shape variant needs a rectangular room".into())),
            },
        })
    }

    pub fn room(&self, variant: RoomVariant) -> Result<Room, ConfigError> {
        let scale = if variant == RoomVariant::Small { SMALL_ROOM_SCALE } else { 1.0 };
        let walls: Vec<Segment> =
            self.interior_walls.iter().map(|w| Segment::new(w.a * scale, w.b * scale)).collect();
        let semantic = |e: GeometryError| ConfigError::Semantic(e.to_string());
        let base = self.room_spec(variant)?.build().map_err(semantic)?;
        let mut room = Room::new(base.boundary().to_vec(), walls).map_err(semantic)?;
        if self.center_wall && variant != RoomVariant::Lshape {
            room = room.with_center_wall().map_err(semantic)?;
        }
        Ok(room.with_blocking_walls(self.interior_walls_block_motion))
    }

    pub fn sim_config(&self, room: &Room) -> SimConfig {
        let (lo, hi) = room.bounding_box();
        let cx = 0.5 * (lo.x + hi.x);
        let spawns = self.spawns.unwrap_or(Spawns {
            human: Point2::new(cx - 0.5, lo.y + 1.5),
            robot: Point2::new(cx + 0.5, lo.y + 1.5),
        });
        SimConfig { params: self.planner, spawn_human: spawns.human, spawn_robot: spawns.robot, policy: self.policy }
    }

    pub fn inventory(&self) -> Vec<Counter> {
        self.counters
            .iter()
            .map(|c| Counter {
                id: c.id.clone().unwrap_or_else(|| c.kind.name().into()),
                kind: c.kind,
                position: c.position.unwrap_or_default(),
                orientation: c.orientation.unwrap_or(QuarterTurn::Deg0),
                width: c.width,
                depth: c.depth,
                target_wall_distance: c.target_wall_distance,
            })
            .collect()
    }

    fn fixed_layout(&self) -> bool {
        !self.counters.is_empty() && self.counters.iter().all(|c| c.position.is_some() && c.orientation.is_some())
    }

    /// The annealing problem for one seed. The configured layout is used in
    /// the regular room when fully specified; otherwise the seed places the
    /// counters along the walls.
    pub fn problem(&self, variant: RoomVariant, seed: u64) -> Result<Problem, ConfigError> {
        let room = self.room(variant)?;
        let sim = self.sim_config(&room);
        let tasks = self.tasks().map_err(|e| ConfigError::Semantic(e.to_string()))?;
        let initial = if variant == RoomVariant::Regular && self.fixed_layout() {
            Layout::new(room, self.inventory())
        } else {
            initial_layout(&room, &self.inventory(), &sim, &mut ChaCha8Rng::seed_from_u64(seed))
                .ok_or_else(|| ConfigError::Semantic("could not place the counters along the walls".into()))?
        };
        Ok(Problem { initial, tasks, sim, costs: self.costs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_config_loads() {
        let c = ProblemConfig::bundled();
        assert_eq!(c.counters.len(), 9);
        assert_eq!(c.recipes.len(), 2);
        assert_eq!(c.tasks().unwrap().len(), 7);
    }

    #[test]
    fn missing_stove_is_a_semantic_error() {
        let mut v: serde_json::Value = serde_json::from_str(BUNDLED_TWO_BURGER).unwrap();
        let counters = v["counters"].as_array_mut().unwrap();
        counters.retain(|c| c["kind"] != "Stove");
        let err = parse_config(&v.to_string()).unwrap_err();
        assert!(matches!(&err, ConfigError::Semantic(m) if m.contains("Stove")), "{err}");
    }

    #[test]
    fn empty_text_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(ConfigError::Parse { line: 1, .. })));
    }

    #[test]
    fn parse_errors_point_at_the_line() {
        let text = "{\n  \"room\": { \"rectangle\": { \"width\": 8 } },\n  \"counters\": [],\n  \"recipes\": []\n}";
        match parse_config(text) {
            Err(ConfigError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("height"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let text = "{\"room\": {\"rectangle\": {\"width\": 8, \"height\": 8}}, \"counters\": [], \"recipes\": [], \"colour\": 1}";
        assert!(matches!(parse_config(text), Err(ConfigError::Parse { message, .. }) if message.contains("colour")));
    }

    #[test]
    fn omitted_keys_take_defaults() {
        let text = r#"{"room": {"rectangle": {"width": 8, "height": 8}}, "counters": [], "recipes": []}"#;
        let c = parse_config(text).unwrap();
        assert_eq!(c.planner, PlannerParams::default());
        assert_eq!(c.anneal, AnnealConfig::default());
        assert_eq!(c.dwell, DwellTimes::default());
        assert_eq!(c.costs, CostModel::default());
    }

    #[test]
    fn room_variants() {
        let c = ProblemConfig::bundled();
        let perimeter = |r: &Room| r.boundary_edges().map(|e| e.length()).sum::<f64>();
        let regular = c.room(RoomVariant::Regular).unwrap();
        let small = c.room(RoomVariant::Small).unwrap();
        assert!((perimeter(&small) - 0.8 * perimeter(&regular)).abs() < 1e-9);
        assert!((small.area() - 0.64 * regular.area()).abs() < 1e-9);
        assert_eq!(regular.interior_walls(), &[Segment::new(Point2::new(2.0, 4.0), Point2::new(6.0, 4.0))]);
        assert!((small.interior_walls()[0].length() - 3.2).abs() < 1e-12);
        assert!(!regular.interior_walls_block_motion());
        let l = c.room(RoomVariant::Lshape).unwrap();
        assert_eq!(l.boundary().len(), 6);
        assert!(l.interior_walls().is_empty());
        assert!((l.area() - 48.0).abs() < 1e-9);
        for v in [RoomVariant::Regular, RoomVariant::Small, RoomVariant::Lshape] {
            let room = c.room(v).unwrap();
            let sim = c.sim_config(&room);
            assert!(room.contains(sim.spawn_human) && room.contains(sim.spawn_robot));
        }
    }

    #[test]
    fn problems_are_admissible() {
        let c = ProblemConfig::bundled();
        for v in [RoomVariant::Regular, RoomVariant::Small, RoomVariant::Lshape] {
            let p = c.problem(v, 3).unwrap();
            assert!(p.admissible(&p.initial), "{v:?}");
            assert_eq!(p.initial.counters.len(), 9);
        }
    }
}
