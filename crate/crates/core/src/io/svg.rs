use std::fmt::Write as _;

use crate::coverage::{Placement, ShapeGrid};
use crate::geom::{rotate, vec2, Vec2};
use crate::precise::GoalSet;
use crate::swarm::RobotState;

pub enum Backdrop<'a> {
    Goals(&'a GoalSet),
    Grid(&'a ShapeGrid, Placement),
}

/// Static snapshot: the shape in gray, robots as circles of diameter `r_avoid`.
pub fn render_svg(backdrop: &Backdrop<'_>, robots: &[RobotState], r_avoid: f64) -> String {
    let mut pts: Vec<Vec2> = robots.iter().map(|r| r.p).collect();
    match backdrop {
        Backdrop::Goals(g) => pts.extend_from_slice(g.goals()),
        Backdrop::Grid(g, at) => pts.extend(g.black_cells().map(|c| g.position_in(c, at))),
    }
    let (mut lo, mut hi) = (vec2(f64::MAX, f64::MAX), vec2(f64::MIN, f64::MIN));
    for p in &pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let pad = 1.0;
    lo -= vec2(pad, pad);
    hi += vec2(pad, pad);
    let size = hi - lo;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}" width="600" height="{}">"#,
        lo.x,
        -hi.y,
        size.x,
        size.y,
        (600.0 * size.y / size.x).round()
    );
    // world y points up, SVG y points down
    let _ = writeln!(s, r#"<g transform="scale(1,-1)">"#);
    match backdrop {
        Backdrop::Goals(g) => {
            for q in g.goals() {
                let _ = writeln!(s, r##"<circle cx="{}" cy="{}" r="{}" fill="#bbb"/>"##, q.x, q.y, r_avoid / 6.0);
            }
        }
        Backdrop::Grid(g, at) => {
            let l = g.cell_len();
            let deg = at.angle.to_degrees();
            for c in g.black_cells() {
                let q = g.position_in(c, at);
                let corner = q + rotate(vec2(-l / 2.0, -l / 2.0), at.angle);
                let _ = writeln!(
                    s,
                    r##"<rect x="{}" y="{}" width="{l}" height="{l}" transform="rotate({deg} {} {})" fill="#ddd" stroke="#aaa" stroke-width="{}"/>"##,
                    corner.x,
                    corner.y,
                    corner.x,
                    corner.y,
                    l / 20.0
                );
            }
        }
    }
    for r in robots {
        let fill = if r.informed { "#c33" } else { "#36c" };
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}" fill-opacity="0.8"/>"#,
            r.p.x,
            r.p.y,
            r_avoid / 2.0
        );
    }
    s.push_str("</g>\n</svg>\n");
    s
}
