//! Time-windowed separation checks between timed paths.
//!
//! Two agents conflict when agent A at time `s` and agent B at time `s'`
//! with `|s - s'| <= tol` are closer than the minimum separation. Paths are
//! piecewise linear in time, so the check is exact over each pair of pieces:
//! the admissible `(s, s')` set is a convex polygon and the distance is a
//! convex function of `(s, s')`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use super::{TimedNode, TimedPath};
use crate::geometry::Point2;

/// Slack below the separation threshold that still counts as touching.
const SEP_EPS: f64 = 1e-9;

/// A linear motion from `p0` at `t0` to `p1` at `t1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub p0: Point2,
    pub t0: f64,
    pub p1: Point2,
    pub t1: f64,
}

impl Piece {
    pub fn new(a: TimedNode, b: TimedNode) -> Self {
        Self { p0: a.q, t0: a.t, p1: b.q, t1: b.t }
    }

    pub fn stationary(p: Point2, t0: f64, t1: f64) -> Self {
        Self { p0: p, t0, p1: p, t1 }
    }

    fn velocity(&self) -> Point2 {
        if self.t1 > self.t0 {
            (self.p1 - self.p0) * (1.0 / (self.t1 - self.t0))
        } else {
            Point2::default()
        }
    }

    pub fn at(&self, s: f64) -> Point2 {
        self.p0 + self.velocity() * (s - self.t0)
    }
}

/// Minimum of `|A(s) - B(s')|` over `s` in A's span, `s'` in B's span and
/// `|s - s'| <= tol`, with the A-time where it is attained. `None` when the
/// spans are further apart than `tol`.
pub fn min_windowed_distance(a: &Piece, b: &Piece, tol: f64) -> Option<(f64, f64)> {
    let poly = window_polygon(a, b, tol);
    if poly.is_empty() {
        return None;
    }
    let va = a.velocity();
    let vb = b.velocity();
    let eval = |s: f64, s2: f64| (a.at(s) - b.at(s2)).norm();

    let mut best = (f64::INFINITY, poly[0].0);
    // Interior critical point: the two motion lines meet.
    let det = -va.cross(vb);
    if det.abs() > 1e-12 {
        // a.p0 + va (s - a.t0) = b.p0 + vb (s' - b.t0)
        let rhs = b.p0 - a.p0 + va * a.t0 - vb * b.t0;
        let s = (rhs.x * -vb.y + vb.x * rhs.y) / det;
        let s2 = (va.x * rhs.y - va.y * rhs.x) / det;
        if inside_convex(&poly, (s, s2)) {
            best = (eval(s, s2), s);
        }
    }
    let n = poly.len();
    for i in 0..n {
        let (s0, r0) = poly[i];
        let (s1, r1) = poly[(i + 1) % n];
        let c = a.at(s0) - b.at(r0);
        let d = (a.at(s1) - a.at(s0)) - (b.at(r1) - b.at(r0));
        let dd = d.norm_sq();
        let u = if dd > 0.0 { (-(c.dot(d)) / dd).clamp(0.0, 1.0) } else { 0.0 };
        let dist = (c + d * u).norm();
        if dist < best.0 {
            best = (dist, s0 + (s1 - s0) * u);
        }
    }
    Some(best)
}

/// Convex polygon small enough to live on the stack. Clipping a rectangle
/// by two half-planes leaves at most six vertices.
#[derive(Clone, Copy)]
struct Window {
    pts: [(f64, f64); 8],
    len: usize,
}

impl Window {
    fn new() -> Self {
        Self { pts: [(0.0, 0.0); 8], len: 0 }
    }

    fn push(&mut self, p: (f64, f64)) {
        self.pts[self.len] = p;
        self.len += 1;
    }
}

impl core::ops::Deref for Window {
    type Target = [(f64, f64)];

    fn deref(&self) -> &[(f64, f64)] {
        &self.pts[..self.len]
    }
}

/// Rectangle `[a.t0, a.t1] x [b.t0, b.t1]` clipped to the band `|s - s'| <= tol`.
fn window_polygon(a: &Piece, b: &Piece, tol: f64) -> Window {
    let mut poly = Window::new();
    for p in [(a.t0, b.t0), (a.t1, b.t0), (a.t1, b.t1), (a.t0, b.t1)] {
        poly.push(p);
    }
    // s' - s <= tol, then s - s' <= tol.
    for sign in [1.0, -1.0] {
        let f = |p: (f64, f64)| tol - sign * (p.1 - p.0);
        let mut out = Window::new();
        for i in 0..poly.len() {
            let cur = poly[i];
            let nxt = poly[(i + 1) % poly.len()];
            let (fc, fnx) = (f(cur), f(nxt));
            if fc >= 0.0 {
                out.push(cur);
            }
            if (fc >= 0.0) != (fnx >= 0.0) {
                let u = fc / (fc - fnx);
                out.push((cur.0 + (nxt.0 - cur.0) * u, cur.1 + (nxt.1 - cur.1) * u));
            }
        }
        poly = out;
        if poly.is_empty() {
            break;
        }
    }
    poly
}

fn inside_convex(poly: &[(f64, f64)], p: (f64, f64)) -> bool {
    // A window squeezed to a point or a line has no interior; its edges
    // already cover it.
    if poly.len() < 3 || twice_area(poly).abs() < 1e-12 {
        return false;
    }
    let mut sign = 0.0_f64;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let c = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if c.abs() < 1e-15 {
            continue;
        }
        if sign == 0.0 {
            sign = c.signum();
        } else if c.signum() != sign {
            return false;
        }
    }
    sign != 0.0
}

fn twice_area(poly: &[(f64, f64)]) -> f64 {
    (0..poly.len())
        .map(|i| {
            let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
            a.0 * b.1 - b.0 * a.1
        })
        .sum()
}

fn pieces(nodes: &[TimedNode]) -> impl Iterator<Item = Piece> + '_ {
    let single = (nodes.len() == 1).then(|| Piece::new(nodes[0], nodes[0]));
    nodes.windows(2).map(|w| Piece::new(w[0], w[1])).chain(single)
}

/// Pieces of `path` that overlap the time interval `[lo, hi]`.
fn pieces_in_window(path: &TimedPath, lo: f64, hi: f64) -> impl Iterator<Item = Piece> + '_ {
    let nodes = &path.nodes;
    let first = nodes.partition_point(|n| n.t < lo).saturating_sub(1);
    let last = nodes.partition_point(|n| n.t <= hi).min(nodes.len().saturating_sub(1));
    let slice = if nodes.is_empty() { &nodes[..0] } else { &nodes[first..=last.max(first)] };
    pieces(slice).filter(move |p| p.t1 >= lo && p.t0 <= hi)
}

/// Whether a moving disc on `piece` keeps `min_sep` from `obstacle` within the
/// time window. The obstacle is present only over its own time span.
pub(crate) fn piece_clear_of(piece: &Piece, obstacle: &TimedPath, min_sep: f64, tol: f64) -> bool {
    pieces_in_window(obstacle, piece.t0 - tol, piece.t1 + tol).all(|other| {
        box_gap(piece, &other) >= min_sep
            || min_windowed_distance(piece, &other, tol).is_none_or(|(d, _)| d >= min_sep - SEP_EPS)
    })
}

/// Distance between the bounding boxes of two pieces' swept segments, a
/// lower bound on any distance between them.
fn box_gap(a: &Piece, b: &Piece) -> f64 {
    let gap = |a0: f64, a1: f64, b0: f64, b1: f64| {
        let (alo, ahi) = (a0.min(a1), a0.max(a1));
        let (blo, bhi) = (b0.min(b1), b0.max(b1));
        (blo - ahi).max(alo - bhi).max(0.0)
    };
    let dx = gap(a.p0.x, a.p1.x, b.p0.x, b.p1.x);
    let dy = gap(a.p0.y, a.p1.y, b.p0.y, b.p1.y);
    (dx * dx + dy * dy).sqrt()
}

/// Earliest A-time of a conflict between two paths, each present only over
/// its own time span.
pub fn first_conflict(a: &TimedPath, b: &TimedPath, min_sep: f64, tol: f64) -> Option<f64> {
    let mut found: Option<f64> = None;
    for pa in pieces(&a.nodes) {
        if found.is_some_and(|t| t < pa.t0) {
            break;
        }
        for pb in pieces_in_window(b, pa.t0 - tol, pa.t1 + tol) {
            if box_gap(&pa, &pb) >= min_sep {
                continue;
            }
            if let Some((d, s)) = min_windowed_distance(&pa, &pb, tol) {
                if d < min_sep - SEP_EPS {
                    found = Some(found.map_or(s, |t| t.min(s)));
                }
            }
        }
    }
    found
}

/// Earliest time at which the two agents come closer than `2 * radius` with
/// timestamps matched within `tol`. Each agent is treated as parked at its
/// first node before its path starts and at its last node after it ends.
pub fn check_dynamic_collision(a: &TimedPath, b: &TimedPath, radius: f64, tol: f64) -> Option<f64> {
    let (Some(a0), Some(a1), Some(b0), Some(b1)) =
        (a.start_time(), a.end_time(), b.start_time(), b.end_time())
    else {
        return None;
    };
    let lo = a0.min(b0) - tol;
    let hi = a1.max(b1) + tol;
    first_conflict(&parked(a, lo, hi), &parked(b, lo, hi), 2.0 * radius, tol).map(|t| t.max(a0.min(b0)))
}

fn parked(path: &TimedPath, lo: f64, hi: f64) -> TimedPath {
    let mut nodes = Vec::with_capacity(path.nodes.len() + 2);
    let first = path.nodes[0];
    let last = *path.nodes.last().unwrap_or(&first);
    if first.t > lo {
        nodes.push(TimedNode::new(first.q, lo));
    }
    nodes.extend_from_slice(&path.nodes);
    if last.t < hi {
        nodes.push(TimedNode::new(last.q, hi));
    }
    TimedPath::new(path.agent, nodes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recipe::Agent;
    use alloc::vec;

    fn node(x: f64, y: f64, t: f64) -> TimedNode {
        TimedNode::new(Point2::new(x, y), t)
    }

    /// Straight path at unit speed in 0.3 m steps.
    fn line(agent: Agent, from: Point2, to: Point2, t0: f64) -> TimedPath {
        let len = from.distance(to);
        let n = (len / 0.3).ceil() as usize;
        let nodes = (0..=n)
            .map(|k| {
                let u = k as f64 / n as f64;
                TimedNode::new(from.lerp(to, u), t0 + u * len)
            })
            .collect();
        TimedPath::new(agent, nodes)
    }

    /// Dense oracle: 10 ms sampling of both paths (parked outside their
    /// spans) over all time-offset pairs within `tol`.
    fn dense_min_distance(a: &TimedPath, b: &TimedPath, tol: f64) -> f64 {
        let lo = a.start_time().unwrap().min(b.start_time().unwrap()) - tol;
        let hi = a.end_time().unwrap().max(b.end_time().unwrap()) + tol;
        let dt = 0.01;
        let k = (tol / dt).round() as i64;
        let n = ((hi - lo) / dt).ceil() as i64;
        let mut best = f64::INFINITY;
        for i in 0..=n {
            let s = lo + i as f64 * dt;
            let pa = a.position_at(s).unwrap();
            for j in -k..=k {
                let pb = b.position_at(s + j as f64 * dt).unwrap();
                best = best.min(pa.distance(pb));
            }
        }
        best
    }

    #[test]
    fn coincident_stationary_paths_collide_at_zero() {
        let a = TimedPath::new(Agent::Human, vec![node(1.0, 1.0, 0.0)]);
        let b = TimedPath::new(Agent::Robot, vec![node(1.0, 1.0, 0.0)]);
        assert_eq!(check_dynamic_collision(&a, &b, 0.3, 0.3), Some(0.0));
    }

    #[test]
    fn parallel_paths_far_apart() {
        let a = line(Agent::Human, Point2::new(0.0, 0.0), Point2::new(6.0, 0.0), 0.0);
        let b = line(Agent::Robot, Point2::new(0.0, 10.0), Point2::new(6.0, 10.0), 0.0);
        assert_eq!(check_dynamic_collision(&a, &b, 0.3, 0.3), None);
    }

    #[test]
    fn crossing_paths_disjoint_in_time() {
        // Both cross (3, 3); A passes at t = 3, B at t = 7.
        let a = line(Agent::Human, Point2::new(0.0, 3.0), Point2::new(6.0, 3.0), 0.0);
        let b = line(Agent::Robot, Point2::new(3.0, 0.0), Point2::new(3.0, 6.0), 4.0);
        let tol = 0.3;
        // The agents are parked at the ends of their lines outside their spans;
        // those parking spots are > 3 m from the other line.
        assert_eq!(check_dynamic_collision(&a, &b, 0.3, tol), None);
        assert!(dense_min_distance(&a, &b, tol) >= 0.6);
        // Shift B to pass at t = 3.5: collides, and the oracle agrees.
        let b = line(Agent::Robot, Point2::new(3.0, 0.0), Point2::new(3.0, 6.0), 0.5);
        assert!(check_dynamic_collision(&a, &b, 0.3, tol).is_some());
        assert!(dense_min_distance(&a, &b, tol) < 0.6);
    }

    #[test]
    fn exact_check_matches_dense_oracle() {
        // Sliding B's start time across the crossing moment.
        let a = line(Agent::Human, Point2::new(0.0, 3.0), Point2::new(6.0, 3.0), 0.0);
        for k in 0..40 {
            let t0 = -1.0 + 0.1 * k as f64;
            let b = line(Agent::Robot, Point2::new(3.0, 0.0), Point2::new(3.0, 6.0), t0);
            let exact = check_dynamic_collision(&a, &b, 0.3, 0.3).is_some();
            let dense = dense_min_distance(&a, &b, 0.3);
            if !exact {
                assert!(dense >= 0.6 - 1e-9, "t0 {t0}: oracle found {dense}");
            }
            if dense < 0.6 - 0.02 {
                assert!(exact, "t0 {t0}: exact check missed oracle distance {dense}");
            }
        }
    }

    #[test]
    fn window_distance_simple_cases() {
        let a = Piece::stationary(Point2::new(0.0, 0.0), 0.0, 1.0);
        let b = Piece::stationary(Point2::new(3.0, 4.0), 1.2, 2.0);
        assert_eq!(min_windowed_distance(&a, &b, 0.1), None);
        let (d, _) = min_windowed_distance(&a, &b, 0.3).unwrap();
        assert!((d - 5.0).abs() < 1e-12);
        // Head-on movers meet at x = 1 at t = 1.
        let a = Piece { p0: Point2::new(0.0, 0.0), t0: 0.0, p1: Point2::new(2.0, 0.0), t1: 2.0 };
        let b = Piece { p0: Point2::new(2.0, 0.0), t0: 0.0, p1: Point2::new(0.0, 0.0), t1: 2.0 };
        let (d, s) = min_windowed_distance(&a, &b, 0.0).unwrap();
        assert!(d.abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obstacles_are_absent_outside_their_span() {
        let obstacle = TimedPath::new(Agent::Human, vec![node(1.0, 1.0, 5.0), node(1.0, 1.0, 6.0)]);
        let early = Piece::stationary(Point2::new(1.0, 1.0), 0.0, 4.0);
        assert!(piece_clear_of(&early, &obstacle, 0.6, 0.3));
        let during = Piece::stationary(Point2::new(1.0, 1.0), 4.0, 5.5);
        assert!(!piece_clear_of(&during, &obstacle, 0.6, 0.3));
    }

    #[test]
    fn window_touching_at_a_corner_is_not_a_conflict() {
        // Timestamps from a recorded run where the window collapses to a
        // single time pair; the motion lines meet far outside it.
        let n = |x: f64, y: f64, t: f64| TimedNode::new(Point2::new(x, y), t);
        let a = [n(3.533452377915607, 6.333452377915608, 38.981078659266394), n(3.64312846715593, 6.443128467155931, 39.1361840721381)];
        let b = [n(6.517477426521549, 4.1009009190994465, 39.4361840721381), n(6.234954853043098, 4.201801838198893, 39.736184072138094)];
        let (d, _) = min_windowed_distance(&Piece::new(a[0], a[1]), &Piece::new(b[0], b[1]), 0.3).unwrap();
        assert!(d > 3.0, "{d}");
        let pa = TimedPath::new(Agent::Robot, a.to_vec());
        let pb = TimedPath::new(Agent::Human, b.to_vec());
        assert_eq!(first_conflict(&pa, &pb, 0.6, 0.3), None);
    }
}
