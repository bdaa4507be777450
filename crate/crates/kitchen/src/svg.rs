//! SVG drawings of layouts and the two agents' paths.

use std::fmt::Write;

use kitchen_core::{Layout, Point2, Room, Solution, TimedPath};

pub const ROBOT_COLOR: &str = "red";
pub const HUMAN_COLOR: &str = "purple";

/// Maps room coordinates (metres, y up) to drawing coordinates (pixels,
/// y down).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frame {
    pub scale: f64,
    pub margin: f64,
    lo: Point2,
    hi: Point2,
}

impl Frame {
    pub const DEFAULT_SCALE: f64 = 50.0;
    pub const DEFAULT_MARGIN: f64 = 20.0;

    pub fn for_room(room: &Room) -> Self {
        let (lo, hi) = room.bounding_box();
        Self { scale: Self::DEFAULT_SCALE, margin: Self::DEFAULT_MARGIN, lo, hi }
    }

    pub fn width(&self) -> f64 {
        (self.hi.x - self.lo.x) * self.scale + 2.0 * self.margin
    }

    pub fn height(&self) -> f64 {
        (self.hi.y - self.lo.y) * self.scale + 2.0 * self.margin
    }

    pub fn to_px(&self, p: Point2) -> (f64, f64) {
        (self.margin + (p.x - self.lo.x) * self.scale, self.margin + (self.hi.y - p.y) * self.scale)
    }
}

fn points(frame: &Frame, pts: impl IntoIterator<Item = Point2>) -> String {
    let mut s = String::new();
    for p in pts {
        let (x, y) = frame.to_px(p);
        if !s.is_empty() {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

fn path_element(frame: &Frame, path: &TimedPath, color: &str, class: &str) -> String {
    format!(
        "  <polyline class=\"{class}\" points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" stroke-linejoin=\"round\"/>\n",
        points(frame, path.nodes.iter().map(|n| n.q))
    )
}

/// Room outline, interior walls and labeled counters, plus the human and
/// robot trajectories when given.
pub fn render(layout: &Layout, paths: Option<(&TimedPath, &TimedPath)>) -> String {
    let frame = Frame::for_room(&layout.room);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">",
        w = frame.width(),
        h = frame.height()
    );
    let _ = writeln!(
        s,
        "  <polygon class=\"room\" points=\"{}\" fill=\"white\" stroke=\"black\" stroke-width=\"3\"/>",
        points(&frame, layout.room.boundary().iter().copied())
    );
    let dash = if layout.room.interior_walls_block_motion() { "" } else { " stroke-dasharray=\"6 4\"" };
    for w in layout.room.interior_walls() {
        let (x1, y1) = frame.to_px(w.a);
        let (x2, y2) = frame.to_px(w.b);
        let _ = writeln!(
            s,
            "  <line class=\"wall\" x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" stroke=\"gray\" stroke-width=\"3\"{dash}/>"
        );
    }
    for c in &layout.counters {
        let r = c.footprint();
        let (x, y) = frame.to_px(Point2::new(r.min.x, r.max.y));
        let (cx, cy) = frame.to_px(c.position);
        let (fx, fy) = frame.to_px(c.front_midpoint());
        let _ = writeln!(
            s,
            "  <g class=\"counter\" data-kind=\"{kind}\">\n    <rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"#ddd\" stroke=\"black\"/>\n    <line x1=\"{cx:.2}\" y1=\"{cy:.2}\" x2=\"{fx:.2}\" y2=\"{fy:.2}\" stroke=\"black\"/>\n    <text x=\"{cx:.2}\" y=\"{cy:.2}\" font-size=\"10\" text-anchor=\"middle\" dominant-baseline=\"middle\">{kind}</text>\n  </g>",
            kind = c.kind.name(),
            w = (r.max.x - r.min.x) * frame.scale,
            h = (r.max.y - r.min.y) * frame.scale,
        );
    }
    if let Some((human, robot)) = paths {
        s.push_str(&path_element(&frame, human, HUMAN_COLOR, "human"));
        s.push_str(&path_element(&frame, robot, ROBOT_COLOR, "robot"));
    }
    s.push_str("</svg>\n");
    s
}

pub fn render_solution(s: &Solution) -> String {
    render(&s.layout, Some((&s.outcome.human, &s.outcome.robot)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use kitchen_core::{Counter, CounterKind, QuarterTurn};

    #[test]
    fn frame_flips_y() {
        let room = Room::rectangle(8.0, 6.0).unwrap();
        let f = Frame::for_room(&room);
        assert_eq!(f.to_px(Point2::new(0.0, 0.0)), (20.0, 320.0));
        assert_eq!(f.to_px(Point2::new(8.0, 6.0)), (420.0, 20.0));
        assert_eq!(f.width(), 440.0);
        assert_eq!(f.height(), 340.0);
    }

    #[test]
    fn empty_room_is_outline_only() {
        let layout = Layout::new(Room::rectangle(4.0, 4.0).unwrap(), Vec::new());
        let svg = render(&layout, None);
        assert!(svg.contains("class=\"room\""));
        assert!(!svg.contains("counter") && !svg.contains("polyline"));
    }

    #[test]
    fn counter_label_sits_at_its_position() {
        let c = Counter {
            id: "s".into(),
            kind: CounterKind::Stove,
            position: Point2::new(2.0, 0.3),
            orientation: QuarterTurn::Deg90,
            width: 1.0,
            depth: 0.6,
            target_wall_distance: 0.0,
        };
        let layout = Layout::new(Room::rectangle(4.0, 4.0).unwrap(), vec![c]);
        let svg = render(&layout, None);
        // x = 20 + 2·50, y = 20 + (4 − 0.3)·50
        assert!(svg.contains("<text x=\"120.00\" y=\"205.00\""), "{svg}");
        // Footprint 1.0 × 0.6 facing +y: top-left corner (1.5, 0.6).
        assert!(svg.contains("<rect x=\"95.00\" y=\"190.00\" width=\"50.00\" height=\"30.00\""), "{svg}");
    }
}
