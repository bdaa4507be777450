//! Planar room model: boundary polygon, interior walls, axis-aligned counters,
//! and the static queries the planner and the cost model are built on.
//!
//! Every value here is immutable once built and every query is a pure
//! function, so a [`Layout`] can be shared freely between threads.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance used for on-boundary and touching tests.
pub const GEOM_EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Self, u: f64) -> Self {
        self + (other - self) * u
    }

    /// Counter-clockwise perpendicular.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

impl Neg for Point2 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// One of the four axis directions a counter (or a wall normal) may face.
///
/// Serialized as integer degrees (0, 90, 180, 270).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum QuarterTurn {
    /// Facing +x.
    Deg0,
    /// Facing +y.
    Deg90,
    /// Facing -x.
    Deg180,
    /// Facing -y.
    Deg270,
}

impl QuarterTurn {
    pub const ALL: [QuarterTurn; 4] = [Self::Deg0, Self::Deg90, Self::Deg180, Self::Deg270];

    pub fn steps(self) -> u8 {
        match self {
            Self::Deg0 => 0,
            Self::Deg90 => 1,
            Self::Deg180 => 2,
            Self::Deg270 => 3,
        }
    }

    pub fn from_steps(steps: u8) -> Self {
        Self::ALL[usize::from(steps % 4)]
    }

    pub fn degrees(self) -> u16 {
        u16::from(self.steps()) * 90
    }

    pub fn radians(self) -> f64 {
        f64::from(self.steps()) * core::f64::consts::FRAC_PI_2
    }

    pub fn direction(self) -> Point2 {
        match self {
            Self::Deg0 => Point2::new(1.0, 0.0),
            Self::Deg90 => Point2::new(0.0, 1.0),
            Self::Deg180 => Point2::new(-1.0, 0.0),
            Self::Deg270 => Point2::new(0.0, -1.0),
        }
    }

    pub fn opposite(self) -> Self {
        Self::from_steps(self.steps() + 2)
    }

    /// Snaps a direction vector to the closest axis; ties go to the x axis.
    pub fn snap(v: Point2) -> Self {
        if v.x.abs() >= v.y.abs() {
            if v.x >= 0.0 {
                Self::Deg0
            } else {
                Self::Deg180
            }
        } else if v.y >= 0.0 {
            Self::Deg90
        } else {
            Self::Deg270
        }
    }

    /// Smallest angle between the two directions, in radians (0, π/2 or π).
    pub fn angle_to(self, other: Self) -> f64 {
        let k = (4 + self.steps() - other.steps()) % 4;
        f64::from(k.min(4 - k)) * core::f64::consts::FRAC_PI_2
    }
}

impl From<QuarterTurn> for u16 {
    fn from(q: QuarterTurn) -> u16 {
        q.degrees()
    }
}

impl TryFrom<u16> for QuarterTurn {
    type Error = GeometryError;
    fn try_from(deg: u16) -> Result<Self, Self::Error> {
        match deg {
            0 => Ok(Self::Deg0),
            90 => Ok(Self::Deg90),
            180 => Ok(Self::Deg180),
            270 => Ok(Self::Deg270),
            other => Err(GeometryError::BadOrientation(other)),
        }
    }
}

impl fmt::Display for QuarterTurn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.degrees())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub a: Point2,
    pub b: Point2,
}

impl Segment {
    pub const fn new(a: Point2, b: Point2) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        self.a.distance(self.b)
    }

    pub fn closest_point(&self, p: Point2) -> Point2 {
        let d = self.b - self.a;
        let len_sq = d.norm_sq();
        if len_sq == 0.0 {
            return self.a;
        }
        let u = ((p - self.a).dot(d) / len_sq).clamp(0.0, 1.0);
        self.a + d * u
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        self.closest_point(p).distance(p)
    }

    /// Proper or touching intersection of two closed segments.
    pub fn intersects(&self, other: &Segment) -> bool {
        let d1 = orient(other.a, other.b, self.a);
        let d2 = orient(other.a, other.b, self.b);
        let d3 = orient(self.a, self.b, other.a);
        let d4 = orient(self.a, self.b, other.b);
        if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
            && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
        {
            return true;
        }
        (d1 == 0.0 && on_segment(other, self.a))
            || (d2 == 0.0 && on_segment(other, self.b))
            || (d3 == 0.0 && on_segment(self, other.a))
            || (d4 == 0.0 && on_segment(self, other.b))
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(s: &Segment, p: Point2) -> bool {
    p.x >= s.a.x.min(s.b.x)
        && p.x <= s.a.x.max(s.b.x)
        && p.y >= s.a.y.min(s.b.y)
        && p.y <= s.a.y.max(s.b.y)
}

/// Axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub fn from_center(center: Point2, half_w: f64, half_h: f64) -> Self {
        Self {
            min: Point2::new(center.x - half_w, center.y - half_h),
            max: Point2::new(center.x + half_w, center.y + half_h),
        }
    }

    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }

    pub fn edges(&self) -> [Segment; 4] {
        let c = self.corners();
        [
            Segment::new(c[0], c[1]),
            Segment::new(c[1], c[2]),
            Segment::new(c[2], c[3]),
            Segment::new(c[3], c[0]),
        ]
    }

    /// Zero inside, Euclidean distance outside.
    pub fn distance_to(&self, p: Point2) -> f64 {
        let dx = (self.min.x - p.x).max(0.0).max(p.x - self.max.x);
        let dy = (self.min.y - p.y).max(0.0).max(p.y - self.max.y);
        (dx * dx + dy * dy).sqrt()
    }

    /// Interiors overlap with positive area; shared edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.min.x < other.max.x - GEOM_EPS
            && other.min.x < self.max.x - GEOM_EPS
            && self.min.y < other.max.y - GEOM_EPS
            && other.min.y < self.max.y - GEOM_EPS
    }

    /// Whether the segment passes through the open interior of the rectangle.
    pub fn segment_enters_interior(&self, seg: &Segment) -> bool {
        let lo = Point2::new(self.min.x + GEOM_EPS, self.min.y + GEOM_EPS);
        let hi = Point2::new(self.max.x - GEOM_EPS, self.max.y - GEOM_EPS);
        if lo.x >= hi.x || lo.y >= hi.y {
            return false;
        }
        // Liang-Barsky clip against the shrunk box.
        let d = seg.b - seg.a;
        let mut t0 = 0.0_f64;
        let mut t1 = 1.0_f64;
        for (p, q) in [
            (-d.x, seg.a.x - lo.x),
            (d.x, hi.x - seg.a.x),
            (-d.y, seg.a.y - lo.y),
            (d.y, hi.y - seg.a.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return false;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
                if t0 > t1 {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("room boundary needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("room boundary has a non-finite vertex")]
    NonFinite,
    #[error("room boundary is self-intersecting (edges {0} and {1})")]
    SelfIntersecting(usize, usize),
    #[error("room boundary must be counter-clockwise")]
    Clockwise,
    #[error("interior wall {0} leaves the room boundary")]
    WallOutsideRoom(usize),
    #[error("query point ({x}, {y}) lies outside the room boundary")]
    OutsideBoundary { x: f64, y: f64 },
    #[error("counter {0} has no clear service configuration")]
    Unreachable(String),
    #[error("counter index {0} is not in the layout")]
    NoSuchCounter(usize),
    #[error("orientation must be 0, 90, 180 or 270 degrees, got {0}")]
    BadOrientation(u16),
}

/// Room outline plus interior ("invisible") walls.
///
/// Walls are indexed in construction order: boundary edge `i` runs from
/// vertex `i` to vertex `i + 1`, and interior walls follow after the last
/// boundary edge.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Room {
    boundary: Vec<Point2>,
    interior_walls: Vec<Segment>,
    /// When false (the default) interior walls anchor layout costs only and
    /// agents may pass through them.
    #[serde(default)]
    interior_walls_block_motion: bool,
}

impl Room {
    pub fn new(boundary: Vec<Point2>, interior_walls: Vec<Segment>) -> Result<Self, GeometryError> {
        let n = boundary.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if boundary.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        let edge = |i: usize| Segment::new(boundary[i], boundary[(i + 1) % n]);
        for i in 0..n {
            for j in (i + 1)..n {
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if !adjacent && edge(i).intersects(&edge(j)) {
                    return Err(GeometryError::SelfIntersecting(i, j));
                }
            }
        }
        if signed_area(&boundary) <= 0.0 {
            return Err(GeometryError::Clockwise);
        }
        let room = Self {
            boundary,
            interior_walls: Vec::new(),
            interior_walls_block_motion: false,
        };
        for (k, w) in interior_walls.iter().enumerate() {
            let crosses = room.boundary_edges().any(|e| {
                e.intersects(w) && e.distance_to(w.a) > GEOM_EPS && e.distance_to(w.b) > GEOM_EPS
            });
            if !room.contains(w.a) || !room.contains(w.b) || crosses {
                return Err(GeometryError::WallOutsideRoom(k));
            }
        }
        Ok(Self { interior_walls, ..room })
    }

    /// Axis-aligned `width × height` rectangle with its lower-left corner at the origin.
    pub fn rectangle(width: f64, height: f64) -> Result<Self, GeometryError> {
        Self::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(width, 0.0),
                Point2::new(width, height),
                Point2::new(0.0, height),
            ],
            Vec::new(),
        )
    }

    /// `width × height` rectangle with a `cut_w × cut_h` block removed from
    /// the upper-right corner.
    pub fn l_shape(width: f64, height: f64, cut_w: f64, cut_h: f64) -> Result<Self, GeometryError> {
        Self::new(
            alloc::vec![
                Point2::new(0.0, 0.0),
                Point2::new(width, 0.0),
                Point2::new(width, height - cut_h),
                Point2::new(width - cut_w, height - cut_h),
                Point2::new(width - cut_w, height),
                Point2::new(0.0, height),
            ],
            Vec::new(),
        )
    }

    /// Adds a horizontal interior wall through the bounding-box center, half
    /// as long as the box is wide.
    pub fn with_center_wall(mut self) -> Result<Self, GeometryError> {
        let (lo, hi) = self.bounding_box();
        let w = hi.x - lo.x;
        let yc = 0.5 * (lo.y + hi.y);
        let wall = Segment::new(Point2::new(lo.x + 0.25 * w, yc), Point2::new(hi.x - 0.25 * w, yc));
        let mut walls = core::mem::take(&mut self.interior_walls);
        walls.push(wall);
        let block = self.interior_walls_block_motion;
        Ok(Self::new(self.boundary, walls)?.with_blocking_walls(block))
    }

    pub fn with_blocking_walls(mut self, block: bool) -> Self {
        self.interior_walls_block_motion = block;
        self
    }

    pub fn boundary(&self) -> &[Point2] {
        &self.boundary
    }

    pub fn interior_walls(&self) -> &[Segment] {
        &self.interior_walls
    }

    pub fn interior_walls_block_motion(&self) -> bool {
        self.interior_walls_block_motion
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = Segment> + '_ {
        let n = self.boundary.len();
        (0..n).map(move |i| Segment::new(self.boundary[i], self.boundary[(i + 1) % n]))
    }

    pub fn wall_count(&self) -> usize {
        self.boundary.len() + self.interior_walls.len()
    }

    /// All walls in index order.
    pub fn walls(&self) -> impl Iterator<Item = Segment> + '_ {
        self.boundary_edges().chain(self.interior_walls.iter().copied())
    }

    /// Walls that agents cannot cross.
    pub fn blocking_walls(&self) -> impl Iterator<Item = Segment> + '_ {
        let interior: &[Segment] = if self.interior_walls_block_motion {
            &self.interior_walls
        } else {
            &[]
        };
        self.boundary_edges().chain(interior.iter().copied())
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_edges().map(|e| e.length()).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.boundary)
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &self.boundary {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    /// Diagonal of the bounding box; an upper bound on any in-room distance.
    pub fn diameter(&self) -> f64 {
        let (lo, hi) = self.bounding_box();
        lo.distance(hi)
    }

    /// Closed containment: points on the boundary count as inside.
    pub fn contains(&self, p: Point2) -> bool {
        self.boundary_edges().any(|e| e.distance_to(p) <= GEOM_EPS) || self.crossing_parity(p)
    }

    /// Even-odd test; points on an edge may land either way.
    fn crossing_parity(&self, p: Point2) -> bool {
        let mut inside = false;
        let n = self.boundary.len();
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.boundary[i], self.boundary[j]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if p.x < x {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }

    /// Same room scaled about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self, GeometryError> {
        let s = |p: &Point2| *p * factor;
        Ok(Self::new(
            self.boundary.iter().map(s).collect(),
            self.interior_walls.iter().map(|w| Segment::new(s(&w.a), s(&w.b))).collect(),
        )?
        .with_blocking_walls(self.interior_walls_block_motion))
    }
}

fn signed_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    0.5 * (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CounterKind {
    Bun,
    Meat,
    Tomato,
    Lettuce,
    Cheese,
    Stove,
    CuttingBoard,
    Plate,
    Plain,
}

impl CounterKind {
    pub const ALL: [CounterKind; 9] = [
        Self::Bun,
        Self::Meat,
        Self::Tomato,
        Self::Lettuce,
        Self::Cheese,
        Self::Stove,
        Self::CuttingBoard,
        Self::Plate,
        Self::Plain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Bun => "Bun",
            Self::Meat => "Meat",
            Self::Tomato => "Tomato",
            Self::Lettuce => "Lettuce",
            Self::Cheese => "Cheese",
            Self::Stove => "Stove",
            Self::CuttingBoard => "CuttingBoard",
            Self::Plate => "Plate",
            Self::Plain => "Plain",
        }
    }
}

impl fmt::Display for CounterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An axis-aligned counter. `width` runs along the front face, `depth`
/// along the facing direction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Counter {
    pub id: String,
    pub kind: CounterKind,
    pub position: Point2,
    pub orientation: QuarterTurn,
    pub width: f64,
    pub depth: f64,
    #[serde(default)]
    pub target_wall_distance: f64,
}

impl Counter {
    pub fn half_extents(&self) -> (f64, f64) {
        match self.orientation {
            QuarterTurn::Deg0 | QuarterTurn::Deg180 => (0.5 * self.depth, 0.5 * self.width),
            QuarterTurn::Deg90 | QuarterTurn::Deg270 => (0.5 * self.width, 0.5 * self.depth),
        }
    }

    pub fn footprint(&self) -> Rect {
        let (hw, hh) = self.half_extents();
        Rect::from_center(self.position, hw, hh)
    }

    pub fn front_midpoint(&self) -> Point2 {
        self.position + self.orientation.direction() * (0.5 * self.depth)
    }

    /// Where wall distance is measured from; zero distance means flush.
    pub fn back_midpoint(&self) -> Point2 {
        self.position - self.orientation.direction() * (0.5 * self.depth)
    }
}

/// An agent pose: position plus the direction it faces.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Point2,
    pub facing: QuarterTurn,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub room: Room,
    pub counters: Vec<Counter>,
}

/// A broken layout rule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    BadFootprint { counter: String },
    OutsideBoundary { counter: String },
    Overlap { first: String, second: String },
    CrossesInteriorWall { counter: String, wall: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadFootprint { counter } => write!(f, "{counter}: footprint must be positive"),
            Self::OutsideBoundary { counter } => write!(f, "{counter}: footprint leaves the room"),
            Self::Overlap { first, second } => write!(f, "{first} overlaps {second}"),
            Self::CrossesInteriorWall { counter, wall } => {
                write!(f, "{counter}: footprint crosses interior wall {wall}")
            }
        }
    }
}

/// Nearest-wall query result.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WallHit {
    pub point: Point2,
    pub distance: f64,
    /// Quarter-turn pointing from the wall into the room (towards the query
    /// point for interior walls).
    pub orientation: QuarterTurn,
    pub wall_index: usize,
}

/// Left/right clearance around a heading, with the realizing obstacle points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Clearance {
    pub left: f64,
    pub right: f64,
    pub left_point: Option<Point2>,
    pub right_point: Option<Point2>,
}

impl Clearance {
    /// Twice the smaller side clearance.
    pub fn width(&self) -> f64 {
        2.0 * self.left.min(self.right)
    }
}

impl Layout {
    pub fn new(room: Room, counters: Vec<Counter>) -> Self {
        Self { room, counters }
    }

    pub fn counter_of_kind(&self, kind: CounterKind) -> Option<usize> {
        self.counters.iter().position(|c| c.kind == kind)
    }

    /// Every broken invariant, in a deterministic order.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for c in &self.counters {
            if !(c.width > 0.0 && c.depth > 0.0) || !c.position.is_finite() {
                out.push(Violation::BadFootprint { counter: c.id.clone() });
                continue;
            }
            let fp = c.footprint();
            let inside = fp.corners().iter().all(|&p| self.room.contains(p))
                && !self.room.boundary_edges().any(|e| fp.segment_enters_interior(&e));
            if !inside {
                out.push(Violation::OutsideBoundary { counter: c.id.clone() });
            }
            for (k, w) in self.room.interior_walls.iter().enumerate() {
                if fp.segment_enters_interior(w) {
                    out.push(Violation::CrossesInteriorWall { counter: c.id.clone(), wall: k });
                }
            }
        }
        for i in 0..self.counters.len() {
            for j in (i + 1)..self.counters.len() {
                let (a, b) = (&self.counters[i], &self.counters[j]);
                if a.width > 0.0 && a.depth > 0.0 && b.width > 0.0 && b.depth > 0.0
                    && a.footprint().overlaps(&b.footprint())
                {
                    out.push(Violation::Overlap { first: a.id.clone(), second: b.id.clone() });
                }
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    /// Whether a disc of `radius` at `p` lies in the room and touches no
    /// counter (and no interior wall, when those block motion).
    pub fn point_clear(&self, p: Point2, radius: f64) -> bool {
        if !self.counters.iter().all(|c| c.footprint().distance_to(p) >= radius)
            || !self.room.blocking_walls().all(|w| w.distance_to(p) >= radius)
        {
            return false;
        }
        // Clear of every boundary edge by more than the on-edge tolerance.
        if radius > GEOM_EPS {
            self.room.crossing_parity(p)
        } else {
            self.room.contains(p)
        }
    }

    /// Conservative swept-disc test: samples spaced at most `radius / 2`,
    /// endpoints included.
    pub fn segment_clear(&self, a: Point2, b: Point2, radius: f64) -> bool {
        segment_samples(a, b, 0.5 * radius).all(|p| self.point_clear(p, radius))
    }

    /// Closest point on any wall (boundary edge or interior wall).
    pub fn nearest_wall(&self, p: Point2) -> Result<WallHit, GeometryError> {
        if !self.room.contains(p) {
            return Err(GeometryError::OutsideBoundary { x: p.x, y: p.y });
        }
        Ok(self.nearest_wall_unchecked(p))
    }

    /// [`Layout::nearest_wall`] without the containment precondition.
    pub fn nearest_wall_unchecked(&self, p: Point2) -> WallHit {
        let n_boundary = self.room.boundary.len();
        let mut best: Option<WallHit> = None;
        for (i, w) in self.room.walls().enumerate() {
            let q = w.closest_point(p);
            let d = q.distance(p);
            if best.is_some_and(|b| d >= b.distance) {
                continue;
            }
            let mut normal = (w.b - w.a).perp();
            if i >= n_boundary && (w.b - w.a).cross(p - w.a) < 0.0 {
                normal = -normal;
            }
            best = Some(WallHit {
                point: q,
                distance: d,
                orientation: QuarterTurn::snap(normal),
                wall_index: i,
            });
        }
        best.expect("a room has at least three walls")
    }

    /// The single pose from which an agent of `radius` services the counter:
    /// `radius + standoff` in front of the front face, facing the counter.
    pub fn service_configuration(
        &self,
        counter: usize,
        radius: f64,
        standoff: f64,
    ) -> Result<Pose, GeometryError> {
        let c = self.counters.get(counter).ok_or(GeometryError::NoSuchCounter(counter))?;
        let position = c.front_midpoint() + c.orientation.direction() * (radius + standoff);
        if !self.point_clear(position, radius) {
            return Err(GeometryError::Unreachable(c.id.clone()));
        }
        Ok(Pose { position, facing: c.orientation.opposite() })
    }

    /// Obstacle edges seen by side-clearance queries.
    pub fn clearance_obstacles(&self) -> impl Iterator<Item = Segment> + '_ {
        self.room
            .blocking_walls()
            .chain(self.counters.iter().flat_map(|c| c.footprint().edges()))
    }

    /// Distance to the nearest obstacle point on each side of `heading`,
    /// capped at the room diameter.
    pub fn clearance_left_right(&self, p: Point2, heading: Point2) -> Clearance {
        clearance_among(self.clearance_obstacles(), p, heading, self.room.diameter())
    }
}

/// Evenly spaced samples from `a` to `b` (both included) with spacing at most `max_gap`.
pub fn segment_samples(a: Point2, b: Point2, max_gap: f64) -> impl Iterator<Item = Point2> {
    let len = a.distance(b);
    let n = if len > 0.0 { (len / max_gap).ceil().max(1.0) as usize } else { 0 };
    (0..=n).map(move |k| if n == 0 { a } else { a.lerp(b, k as f64 / n as f64) })
}

/// Side clearances against an explicit obstacle set.
///
/// The left side is the closed half-plane `cross(heading, x - p) >= 0`, the
/// right side its mirror. Sides with no obstacle report `cap`.
pub fn clearance_among(
    obstacles: impl IntoIterator<Item = Segment>,
    p: Point2,
    heading: Point2,
    cap: f64,
) -> Clearance {
    let h = heading.normalized().unwrap_or(Point2::new(1.0, 0.0));
    let mut out = Clearance { left: cap, right: cap, left_point: None, right_point: None };
    for seg in obstacles {
        for (sign, dist, point) in [
            (1.0, &mut out.left, &mut out.left_point),
            (-1.0, &mut out.right, &mut out.right_point),
        ] {
            if let Some(part) = clip_to_side(&seg, p, h, sign) {
                let q = part.closest_point(p);
                let d = q.distance(p);
                if d < *dist {
                    *dist = d;
                    *point = Some(q);
                }
            }
        }
    }
    out
}

fn clip_to_side(seg: &Segment, p: Point2, h: Point2, sign: f64) -> Option<Segment> {
    let sa = sign * h.cross(seg.a - p);
    let sb = sign * h.cross(seg.b - p);
    match (sa >= 0.0, sb >= 0.0) {
        (true, true) => Some(*seg),
        (false, false) => None,
        (a_in, _) => {
            let cut = seg.a.lerp(seg.b, sa / (sa - sb));
            Some(if a_in { Segment::new(seg.a, cut) } else { Segment::new(cut, seg.b) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn counter(id: &str, x: f64, y: f64, o: QuarterTurn) -> Counter {
        Counter {
            id: id.into(),
            kind: CounterKind::Plain,
            position: Point2::new(x, y),
            orientation: o,
            width: 1.0,
            depth: 0.6,
            target_wall_distance: 0.0,
        }
    }

    fn room8() -> Room {
        Room::rectangle(8.0, 8.0).unwrap()
    }

    #[test]
    fn validate_vacuous_and_coincident() {
        let l = Layout::new(room8(), vec![counter("a", 4.0, 4.0, QuarterTurn::Deg90)]);
        assert!(l.validate().is_empty());
        let l = Layout::new(
            room8(),
            vec![counter("a", 4.0, 4.0, QuarterTurn::Deg90), counter("b", 4.0, 4.0, QuarterTurn::Deg90)],
        );
        assert_eq!(
            l.validate(),
            vec![Violation::Overlap { first: "a".into(), second: "b".into() }]
        );
    }

    #[test]
    fn validate_counter_on_boundary_edge() {
        let l = Layout::new(room8(), vec![counter("a", 4.0, 0.0, QuarterTurn::Deg90)]);
        assert_eq!(l.validate(), vec![Violation::OutsideBoundary { counter: "a".into() }]);
    }

    #[test]
    fn validate_detects_boundary_spike() {
        // A thin notch hangs down from the north wall to (4, 5).
        let room = Room::new(
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(8.0, 0.0),
                Point2::new(8.0, 8.0),
                Point2::new(4.1, 8.0),
                Point2::new(4.0, 5.0),
                Point2::new(3.9, 8.0),
                Point2::new(0.0, 8.0),
            ],
            vec![],
        )
        .unwrap();
        let mut c = counter("a", 4.0, 5.0, QuarterTurn::Deg90);
        c.width = 2.0;
        c.depth = 2.0;
        assert!(c.footprint().corners().iter().all(|&p| room.contains(p)));
        let l = Layout::new(room, vec![c]);
        assert_eq!(l.validate(), vec![Violation::OutsideBoundary { counter: "a".into() }]);
    }

    #[test]
    fn validate_flags_interior_wall() {
        let room = room8().with_center_wall().unwrap();
        let l = Layout::new(room, vec![counter("a", 4.0, 4.0, QuarterTurn::Deg90)]);
        assert_eq!(
            l.validate(),
            vec![Violation::CrossesInteriorWall { counter: "a".into(), wall: 0 }]
        );
    }

    #[test]
    fn point_clear_cases() {
        let empty = Layout::new(room8(), vec![]);
        assert!(empty.point_clear(Point2::new(4.0, 4.0), 0.3));
        let l = Layout::new(room8(), vec![counter("a", 4.0, 4.0, QuarterTurn::Deg90)]);
        assert!(!l.point_clear(Point2::new(4.0, 4.0), 0.3));
        // Footprint top edge at y = 4.3; disc centre 0.3 - 1e-6 above it.
        assert!(!l.point_clear(Point2::new(4.0, 4.6 - 1e-6), 0.3));
        assert!(l.point_clear(Point2::new(4.0, 4.6 + 1e-6), 0.3));
        // Disc poking through the boundary.
        assert!(!empty.point_clear(Point2::new(0.2, 4.0), 0.3));
        assert!(!empty.point_clear(Point2::new(-1.0, 4.0), 0.3));
    }

    #[test]
    fn center_wall_blocks_only_when_switched_on() {
        let room = room8().with_center_wall().unwrap();
        let p = Point2::new(4.0, 4.0);
        assert!(Layout::new(room.clone(), vec![]).point_clear(p, 0.3));
        assert!(!Layout::new(room.with_blocking_walls(true), vec![]).point_clear(p, 0.3));
    }

    #[test]
    fn segment_clear_cases() {
        let l = Layout::new(room8(), vec![counter("a", 4.0, 4.0, QuarterTurn::Deg90)]);
        let a = Point2::new(1.0, 1.0);
        assert!(l.segment_clear(a, a, 0.3));
        assert!(!l.segment_clear(Point2::new(1.0, 4.0), Point2::new(7.0, 4.0), 0.3));
        // Graze the top face (y = 4.3) at clearance radius + eps.
        let y = 4.3 + 0.3 + 1e-6;
        assert!(l.segment_clear(Point2::new(1.0, y), Point2::new(7.0, y), 0.3));
    }

    #[test]
    fn nearest_wall_left_wall_and_tie() {
        let l = Layout::new(room8(), vec![]);
        let hit = l.nearest_wall(Point2::new(0.5, 4.0)).unwrap();
        assert_eq!(hit.point, Point2::new(0.0, 4.0));
        assert_eq!(hit.orientation, QuarterTurn::Deg0);
        assert_eq!(hit.wall_index, 3);
        // Equidistant from south (edge 0) and west (edge 3).
        let hit = l.nearest_wall(Point2::new(2.0, 2.0)).unwrap();
        assert_eq!(hit.wall_index, 0);
        assert_eq!(hit.orientation, QuarterTurn::Deg90);
        assert!(matches!(
            l.nearest_wall(Point2::new(9.0, 1.0)),
            Err(GeometryError::OutsideBoundary { .. })
        ));
    }

    #[test]
    fn nearest_wall_interior_faces_query_side() {
        let l = Layout::new(room8().with_center_wall().unwrap(), vec![]);
        let above = l.nearest_wall(Point2::new(4.0, 4.5)).unwrap();
        assert_eq!((above.wall_index, above.orientation), (4, QuarterTurn::Deg90));
        let below = l.nearest_wall(Point2::new(4.0, 3.5)).unwrap();
        assert_eq!((below.wall_index, below.orientation), (4, QuarterTurn::Deg270));
    }

    #[test]
    fn service_configuration_offsets_front_face() {
        let mut c = counter("a", 4.0, 0.3, QuarterTurn::Deg90);
        c.kind = CounterKind::Bun;
        let l = Layout::new(room8(), vec![c]);
        let pose = l.service_configuration(0, 0.3, 0.2).unwrap();
        assert!((pose.position.x - 4.0).abs() < 1e-12);
        assert!((pose.position.y - (0.6 + 0.5)).abs() < 1e-12);
        assert_eq!(pose.facing, QuarterTurn::Deg270);
    }

    #[test]
    fn service_configuration_blocked() {
        let l = Layout::new(
            room8(),
            vec![counter("a", 4.0, 0.3, QuarterTurn::Deg90), counter("b", 4.0, 1.2, QuarterTurn::Deg270)],
        );
        assert_eq!(
            l.service_configuration(0, 0.3, 0.2),
            Err(GeometryError::Unreachable("a".into()))
        );
        let far = Layout::new(
            room8(),
            vec![counter("a", 2.0, 0.3, QuarterTurn::Deg90), counter("b", 6.0, 7.7, QuarterTurn::Deg270)],
        );
        let p = far.service_configuration(0, 0.3, 0.2).unwrap();
        let q = far.service_configuration(1, 0.3, 0.2).unwrap();
        assert!(p.position.distance(q.position) > 1.0);
    }

    #[test]
    fn clearance_examples() {
        let cap = 10.0;
        let none = clearance_among([], Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), cap);
        assert_eq!((none.left, none.right), (cap, cap));
        // A single wall 0.3 m to the right, parallel to the heading.
        let wall = Segment::new(Point2::new(-5.0, -0.3), Point2::new(5.0, -0.3));
        let c = clearance_among([wall], Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), cap);
        assert!((c.right - 0.3).abs() < 1e-12);
        assert_eq!(c.left, cap);
        assert_eq!(c.right_point, Some(Point2::new(0.0, -0.3)));
    }

    #[test]
    fn clearance_in_counter_corridor() {
        // Two 3 m counters along x with a 1.0 m gap between y = 3.5 and 4.5.
        let mk = |id: &str, y: f64, o| Counter { width: 3.0, ..counter(id, 4.0, y, o) };
        let l = Layout::new(
            room8(),
            vec![mk("s", 3.2, QuarterTurn::Deg90), mk("n", 4.8, QuarterTurn::Deg270)],
        );
        let c = l.clearance_left_right(Point2::new(4.0, 4.0), Point2::new(1.0, 0.0));
        assert!((c.left - 0.5).abs() < 1e-12 && (c.right - 0.5).abs() < 1e-12);
        assert!((c.width() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_angles() {
        use core::f64::consts::{FRAC_PI_2, PI};
        assert_eq!(QuarterTurn::Deg0.angle_to(QuarterTurn::Deg270), FRAC_PI_2);
        assert_eq!(QuarterTurn::Deg90.angle_to(QuarterTurn::Deg270), PI);
        assert_eq!(QuarterTurn::Deg180.angle_to(QuarterTurn::Deg180), 0.0);
        assert_eq!(QuarterTurn::try_from(45), Err(GeometryError::BadOrientation(45)));
    }

    #[test]
    fn room_rejects_bad_polygons() {
        let bow = vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 0.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(matches!(Room::new(bow, vec![]), Err(GeometryError::SelfIntersecting(..))));
        let cw = vec![Point2::new(0.0, 0.0), Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)];
        assert_eq!(Room::new(cw, vec![]), Err(GeometryError::Clockwise));
        let outside = Segment::new(Point2::new(1.0, 1.0), Point2::new(9.0, 1.0));
        assert_eq!(
            Room::new(room8().boundary().to_vec(), vec![outside]),
            Err(GeometryError::WallOutsideRoom(0))
        );
    }
}
