//! Recipes, sub-task expansion, the shared task pool and the four-state agent
//! machine that requests work from it.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{CounterKind, Point2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Bun,
    Meat,
    Tomato,
    Lettuce,
    Cheese,
}

impl Component {
    pub fn counter(self) -> CounterKind {
        match self {
            Self::Bun => CounterKind::Bun,
            Self::Meat => CounterKind::Meat,
            Self::Tomato => CounterKind::Tomato,
            Self::Lettuce => CounterKind::Lettuce,
            Self::Cheese => CounterKind::Cheese,
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Self::Bun => "bun",
            Self::Meat => "meat",
            Self::Tomato => "tomato",
            Self::Lettuce => "lettuce",
            Self::Cheese => "cheese",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Submission {
    Plate,
    Plain,
}

impl Submission {
    pub fn counter(self) -> CounterKind {
        match self {
            Self::Plate => CounterKind::Plate,
            Self::Plain => CounterKind::Plain,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Recipe {
    pub dish_id: String,
    pub components: Vec<Component>,
    pub submission: Submission,
}

impl Recipe {
    /// Counter kinds any sub-task of this recipe will visit.
    pub fn counters_used(&self) -> BTreeSet<CounterKind> {
        let mut out = BTreeSet::new();
        out.insert(self.submission.counter());
        for c in &self.components {
            out.insert(c.counter());
            match c {
                Component::Bun => {}
                Component::Meat => {
                    out.insert(CounterKind::Stove);
                }
                _ => {
                    out.insert(CounterKind::CuttingBoard);
                }
            }
        }
        out
    }
}

/// Seconds spent at a counter for each kind of visit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DwellTimes {
    pub pickup: f64,
    pub place: f64,
    pub cook: f64,
    pub chop: f64,
}

impl Default for DwellTimes {
    fn default() -> Self {
        Self { pickup: 1.0, place: 1.0, cook: 12.0, chop: 6.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub counter: CounterKind,
    pub dwell: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubTask {
    pub id: String,
    pub dish: String,
    pub visits: Vec<Visit>,
    pub prerequisites: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RecipeError {
    #[error("recipe {0} has no bun")]
    MissingBun(String),
    #[error("recipe {0} lists component {1:?} twice")]
    DuplicateComponent(String, Component),
    #[error("negative dwell time")]
    NegativeDwell,
    #[error("sub-task {0} is unknown")]
    UnknownSubTask(String),
    #[error("sub-task {0} is not claimed")]
    NotClaimed(String),
    #[error("agent is {mode:?} and cannot accept {event}")]
    Protocol { mode: Mode, event: &'static str },
}

/// Expands dishes into sub-tasks.
///
/// Dish `k` (1-based) yields `bun-k` first, then `meat-k`, then one sub-task
/// per topping in listed order. Everything but the bun depends on the bun.
pub fn expand_recipes(recipes: &[Recipe], dwell: &DwellTimes) -> Result<Vec<SubTask>, RecipeError> {
    if [dwell.pickup, dwell.place, dwell.cook, dwell.chop].iter().any(|d| !(*d >= 0.0)) {
        return Err(RecipeError::NegativeDwell);
    }
    let mut out = Vec::new();
    for (k, recipe) in recipes.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for c in &recipe.components {
            if !seen.insert(*c) {
                return Err(RecipeError::DuplicateComponent(recipe.dish_id.clone(), *c));
            }
        }
        if !seen.contains(&Component::Bun) {
            return Err(RecipeError::MissingBun(recipe.dish_id.clone()));
        }
        let n = k + 1;
        let submit = Visit { counter: recipe.submission.counter(), dwell: dwell.place };
        let bun_id = format!("bun-{n}");
        out.push(SubTask {
            id: bun_id.clone(),
            dish: recipe.dish_id.clone(),
            visits: alloc::vec![Visit { counter: CounterKind::Bun, dwell: dwell.pickup }, submit],
            prerequisites: BTreeSet::new(),
        });
        let ordered = recipe
            .components
            .iter()
            .filter(|c| **c == Component::Meat)
            .chain(recipe.components.iter().filter(|c| !matches!(c, Component::Bun | Component::Meat)));
        for c in ordered {
            let (tool, t) = match c {
                Component::Meat => (CounterKind::Stove, dwell.cook),
                _ => (CounterKind::CuttingBoard, dwell.chop),
            };
            out.push(SubTask {
                id: format!("{}-{n}", c.slug()),
                dish: recipe.dish_id.clone(),
                visits: alloc::vec![
                    Visit { counter: c.counter(), dwell: dwell.pickup },
                    Visit { counter: tool, dwell: t },
                    submit,
                ],
                prerequisites: [bun_id.clone()].into_iter().collect(),
            });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Agent {
    Human,
    Robot,
}

impl Agent {
    pub fn other(self) -> Self {
        match self {
            Self::Human => Self::Robot,
            Self::Robot => Self::Human,
        }
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Human => "human",
            Self::Robot => "robot",
        })
    }
}

/// Shared sub-task pool. Claims and completions are tracked per id.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TaskPool {
    all: Vec<SubTask>,
    completed: BTreeSet<String>,
    claimed: BTreeMap<String, Agent>,
}

impl TaskPool {
    pub fn new(all: Vec<SubTask>) -> Self {
        Self { all, completed: BTreeSet::new(), claimed: BTreeMap::new() }
    }

    pub fn all(&self) -> &[SubTask] {
        &self.all
    }

    pub fn get(&self, id: &str) -> Option<&SubTask> {
        self.all.iter().find(|s| s.id == id)
    }

    pub fn completed(&self) -> &BTreeSet<String> {
        &self.completed
    }

    pub fn claimed_by(&self, id: &str) -> Option<Agent> {
        self.claimed.get(id).copied()
    }

    pub fn is_done(&self) -> bool {
        self.completed.len() == self.all.len()
    }

    /// Unclaimed, uncompleted sub-tasks whose prerequisites are all complete, in pool order.
    pub fn claimable(&self) -> impl Iterator<Item = &SubTask> + '_ {
        self.all.iter().filter(|s| {
            !self.completed.contains(&s.id)
                && !self.claimed.contains_key(&s.id)
                && s.prerequisites.iter().all(|p| self.completed.contains(p))
        })
    }

    /// Sub-tasks that are neither claimed nor completed (claimable or blocked).
    pub fn unclaimed_remaining(&self) -> usize {
        self.all
            .iter()
            .filter(|s| !self.completed.contains(&s.id) && !self.claimed.contains_key(&s.id))
            .count()
    }

    /// Uniform random pick among claimable sub-tasks; the pick is claimed for `agent`.
    pub fn next_sub_task<R: Rng + ?Sized>(&mut self, agent: Agent, rng: &mut R) -> Option<SubTask> {
        let candidates: Vec<&SubTask> = self.claimable().collect();
        if candidates.is_empty() {
            return None;
        }
        let pick = candidates[rng.random_range(0..candidates.len())].clone();
        self.claimed.insert(pick.id.clone(), agent);
        Some(pick)
    }

    pub fn complete(&mut self, id: &str) -> Result<(), RecipeError> {
        if self.claimed.remove(id).is_none() {
            return Err(if self.get(id).is_some() {
                RecipeError::NotClaimed(id.into())
            } else {
                RecipeError::UnknownSubTask(id.into())
            });
        }
        self.completed.insert(id.into());
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Moving,
    DoingAtCounter,
    NeedNewTask,
    Idle,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub agent: Agent,
    pub mode: Mode,
    pub current_sub_task: Option<String>,
    /// Counter visits left in the current sub-task, including the one in progress.
    pub remaining_visits: usize,
    pub pose: Point2,
    pub clock: f64,
}

impl AgentState {
    pub fn new(agent: Agent, pose: Point2) -> Self {
        Self {
            agent,
            mode: Mode::NeedNewTask,
            current_sub_task: None,
            remaining_visits: 0,
            pose,
            clock: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FsmEvent {
    ArrivedAtCounter,
    DwellDone,
    PathDone,
    TaskAssigned { sub_task: String, visits: usize },
    NoTaskAvailable,
}

impl FsmEvent {
    fn name(&self) -> &'static str {
        match self {
            Self::ArrivedAtCounter => "ArrivedAtCounter",
            Self::DwellDone => "DwellDone",
            Self::PathDone => "PathDone",
            Self::TaskAssigned { .. } => "TaskAssigned",
            Self::NoTaskAvailable => "NoTaskAvailable",
        }
    }
}

/// One transition of the agent machine. Pairs not listed below are protocol
/// errors:
///
/// | mode           | event            | next                               |
/// |----------------|------------------|------------------------------------|
/// | NeedNewTask    | TaskAssigned     | Moving                             |
/// | NeedNewTask    | NoTaskAvailable  | Idle                               |
/// | Moving         | ArrivedAtCounter | DoingAtCounter                     |
/// | DoingAtCounter | DwellDone        | Moving, or NeedNewTask when done   |
pub fn fsm_step(state: &AgentState, event: FsmEvent) -> Result<AgentState, RecipeError> {
    let mut next = state.clone();
    match (state.mode, event) {
        (Mode::NeedNewTask, FsmEvent::TaskAssigned { sub_task, visits }) if visits > 0 => {
            next.mode = Mode::Moving;
            next.current_sub_task = Some(sub_task);
            next.remaining_visits = visits;
        }
        (Mode::NeedNewTask, FsmEvent::NoTaskAvailable) => next.mode = Mode::Idle,
        (Mode::Moving, FsmEvent::ArrivedAtCounter) => next.mode = Mode::DoingAtCounter,
        (Mode::DoingAtCounter, FsmEvent::DwellDone) => {
            next.remaining_visits = state.remaining_visits.saturating_sub(1);
            if next.remaining_visits == 0 {
                next.mode = Mode::NeedNewTask;
                next.current_sub_task = None;
            } else {
                next.mode = Mode::Moving;
            }
        }
        (mode, event) => return Err(RecipeError::Protocol { mode, event: event.name() }),
    }
    Ok(next)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verb {
    GoTo,
    PickUp,
    Operate,
    Place,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Action {
    pub verb: Verb,
    pub counter: CounterKind,
    pub dwell: f64,
}

/// Flat behavior description of one sub-task (data only, never executed).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSequence {
    pub sub_task: String,
    pub actions: Vec<Action>,
}

pub fn to_action_sequence(task: &SubTask) -> ActionSequence {
    let last = task.visits.len().saturating_sub(1);
    let mut actions = Vec::with_capacity(2 * task.visits.len());
    for (i, v) in task.visits.iter().enumerate() {
        actions.push(Action { verb: Verb::GoTo, counter: v.counter, dwell: 0.0 });
        let verb = if i == last {
            Verb::Place
        } else if i == 0 {
            Verb::PickUp
        } else {
            Verb::Operate
        };
        actions.push(Action { verb, counter: v.counter, dwell: v.dwell });
    }
    ActionSequence { sub_task: task.id.clone(), actions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn two_burgers() -> Vec<Recipe> {
        vec![
            Recipe {
                dish_id: "burger-1".into(),
                components: vec![
                    Component::Bun,
                    Component::Meat,
                    Component::Tomato,
                    Component::Lettuce,
                    Component::Cheese,
                ],
                submission: Submission::Plate,
            },
            Recipe {
                dish_id: "burger-2".into(),
                components: vec![Component::Bun, Component::Meat],
                submission: Submission::Plain,
            },
        ]
    }

    fn ids(tasks: &[SubTask]) -> Vec<&str> {
        tasks.iter().map(|t| t.id.as_str()).collect()
    }

    #[test]
    fn two_burgers_expand_to_seven() {
        let tasks = expand_recipes(&two_burgers(), &DwellTimes::default()).unwrap();
        assert_eq!(
            ids(&tasks),
            ["bun-1", "meat-1", "tomato-1", "lettuce-1", "cheese-1", "bun-2", "meat-2"]
        );
        let plain = tasks.iter().find(|t| t.id == "meat-2").unwrap();
        assert_eq!(plain.visits.last().unwrap().counter, CounterKind::Plain);
        assert!(plain.prerequisites.contains("bun-2"));
    }

    #[test]
    fn plain_burger_and_vacuous() {
        let r = vec![two_burgers().remove(1)];
        let tasks = expand_recipes(&r, &DwellTimes::default()).unwrap();
        assert_eq!(ids(&tasks), ["bun-1", "meat-1"]);
        assert_eq!(tasks[1].prerequisites.iter().collect::<Vec<_>>(), ["bun-1"]);
        assert!(tasks[0].prerequisites.is_empty());
        assert!(expand_recipes(&[], &DwellTimes::default()).unwrap().is_empty());
    }

    #[test]
    fn missing_bun_rejected() {
        let r = Recipe {
            dish_id: "salad".into(),
            components: vec![Component::Lettuce],
            submission: Submission::Plate,
        };
        assert_eq!(
            expand_recipes(&[r], &DwellTimes::default()),
            Err(RecipeError::MissingBun("salad".into()))
        );
    }

    #[test]
    fn singleton_claim_and_exhaustion() {
        let tasks = expand_recipes(&[two_burgers().remove(1)], &DwellTimes::default()).unwrap();
        let mut pool = TaskPool::new(tasks);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let first = pool.next_sub_task(Agent::Human, &mut rng).unwrap();
        assert_eq!(first.id, "bun-1");
        assert_eq!(pool.next_sub_task(Agent::Robot, &mut rng), None);
        pool.complete("bun-1").unwrap();
        assert_eq!(pool.next_sub_task(Agent::Robot, &mut rng).unwrap().id, "meat-1");
        pool.complete("meat-1").unwrap();
        assert!(pool.is_done());
        assert_eq!(pool.next_sub_task(Agent::Human, &mut rng), None);
        assert_eq!(pool.complete("meat-1"), Err(RecipeError::NotClaimed("meat-1".into())));
        assert_eq!(pool.complete("x"), Err(RecipeError::UnknownSubTask("x".into())));
    }

    #[test]
    fn fresh_pool_draws_buns_evenly() {
        // Claimable set of the fresh pool, enumerated: {bun-1, bun-2}.
        let tasks = expand_recipes(&two_burgers(), &DwellTimes::default()).unwrap();
        let fresh = TaskPool::new(tasks);
        assert_eq!(fresh.claimable().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["bun-1", "bun-2"]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut bun1 = 0;
        for _ in 0..10_000 {
            let mut pool = fresh.clone();
            match pool.next_sub_task(Agent::Human, &mut rng).unwrap().id.as_str() {
                "bun-1" => bun1 += 1,
                "bun-2" => {}
                other => panic!("drew blocked sub-task {other}"),
            }
        }
        let freq = f64::from(bun1) / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.03, "bun-1 frequency {freq}");
    }

    #[test]
    fn fsm_transitions() {
        let s = AgentState::new(Agent::Human, Point2::new(0.0, 0.0));
        let idle = fsm_step(&s, FsmEvent::NoTaskAvailable).unwrap();
        assert_eq!(idle.mode, Mode::Idle);
        assert!(matches!(
            fsm_step(&idle, FsmEvent::DwellDone),
            Err(RecipeError::Protocol { mode: Mode::Idle, .. })
        ));
        let moving =
            fsm_step(&s, FsmEvent::TaskAssigned { sub_task: "bun-1".into(), visits: 2 }).unwrap();
        assert_eq!(moving.mode, Mode::Moving);
        let doing = fsm_step(&moving, FsmEvent::ArrivedAtCounter).unwrap();
        assert_eq!(doing.mode, Mode::DoingAtCounter);
        let moving2 = fsm_step(&doing, FsmEvent::DwellDone).unwrap();
        assert_eq!(moving2.mode, Mode::Moving);
        assert_eq!(moving2.current_sub_task.as_deref(), Some("bun-1"));
        let doing2 = fsm_step(&moving2, FsmEvent::ArrivedAtCounter).unwrap();
        let done = fsm_step(&doing2, FsmEvent::DwellDone).unwrap();
        assert_eq!(done.mode, Mode::NeedNewTask);
        assert_eq!(done.current_sub_task, None);
        assert!(fsm_step(&moving, FsmEvent::PathDone).is_err());
    }

    #[test]
    fn action_sequences() {
        let d = DwellTimes::default();
        let tasks = expand_recipes(&two_burgers(), &d).unwrap();
        let tomato = to_action_sequence(tasks.iter().find(|t| t.id == "tomato-1").unwrap());
        let got: Vec<_> = tomato.actions.iter().map(|a| (a.verb, a.counter)).collect();
        assert_eq!(
            got,
            [
                (Verb::GoTo, CounterKind::Tomato),
                (Verb::PickUp, CounterKind::Tomato),
                (Verb::GoTo, CounterKind::CuttingBoard),
                (Verb::Operate, CounterKind::CuttingBoard),
                (Verb::GoTo, CounterKind::Plate),
                (Verb::Place, CounterKind::Plate),
            ]
        );
        assert_eq!(tomato.actions[3].dwell, d.chop);
        let bun = to_action_sequence(&tasks[0]);
        let got: Vec<_> = bun.actions.iter().map(|a| a.verb).collect();
        assert_eq!(got, [Verb::GoTo, Verb::PickUp, Verb::GoTo, Verb::Place]);
        let minimal = SubTask {
            id: "x".into(),
            dish: "d".into(),
            visits: vec![Visit { counter: CounterKind::Plain, dwell: 0.0 }],
            prerequisites: BTreeSet::new(),
        };
        let got: Vec<_> = to_action_sequence(&minimal).actions.iter().map(|a| a.verb).collect();
        assert_eq!(got, [Verb::GoTo, Verb::Place]);
    }
}
