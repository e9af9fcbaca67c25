//! Distributed negotiation of the shape frame (position and orientation)
//! among uninformed and informed robots.
//!
//! Uninformed robots run a finite-time consensus on their neighbors' frame
//! estimates; informed robots replace the velocity-averaging term with a
//! tracking term on the reference trajectory.

use crate::coverage::{Cell, Placement, ShapeGrid};
use crate::error::{Result, SwarmError};
use crate::geom::{angle_diff, vec2, wrap_angle, Vec2};
use crate::swarm::{NeighborView, SwarmParams};

/// A robot's estimate of where the shape is and how it moves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeFrame {
    pub q_o: Vec2,
    pub nu_o: Vec2,
    /// Orientation in `(-pi, pi]`.
    pub phi_o: f64,
    pub omega_o: f64,
}

impl ShapeFrame {
    pub fn at(q_o: Vec2) -> Self {
        ShapeFrame {
            q_o,
            nu_o: Vec2::zeros(),
            phi_o: 0.0,
            omega_o: 0.0,
        }
    }

    pub fn placement(&self) -> Placement {
        Placement {
            origin: self.q_o,
            angle: self.phi_o,
        }
    }
}

impl Default for ShapeFrame {
    fn default() -> Self {
        ShapeFrame::at(Vec2::zeros())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceSample {
    pub t: f64,
    pub q: Vec2,
    pub nu: Vec2,
    pub phi: f64,
    pub omega: f64,
}

/// Time-indexed reference, linearly interpolated and clamped at both ends.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTrajectory {
    samples: Vec<ReferenceSample>,
}

impl ReferenceTrajectory {
    pub fn new(samples: Vec<ReferenceSample>) -> Result<Self> {
        if samples.is_empty() {
            return Err(SwarmError::Config("trajectory needs at least one sample".into()));
        }
        for (row, w) in samples.windows(2).enumerate() {
            if w[1].t.partial_cmp(&w[0].t) != Some(std::cmp::Ordering::Greater) {
                return Err(SwarmError::NonMonotoneTime { row: row + 1 });
            }
        }
        Ok(ReferenceTrajectory { samples })
    }

    /// Circle of `radius` around `center` traversed counter-clockwise once per
    /// `period`, sampled every `step` seconds over `[0, duration]`. The
    /// orientation turns with the circle, so the shape keeps facing outward.
    pub fn circle(center: Vec2, radius: f64, period: f64, duration: f64, step: f64) -> Result<Self> {
        let w = 2.0 * std::f64::consts::PI / period;
        let n = (duration / step).ceil() as usize;
        let samples = (0..=n)
            .map(|k| {
                let t = k as f64 * step;
                let (s, c) = (w * t).sin_cos();
                ReferenceSample {
                    t,
                    q: center + radius * vec2(c, s),
                    nu: radius * w * vec2(-s, c),
                    phi: wrap_angle(w * t),
                    omega: w,
                }
            })
            .collect();
        Self::new(samples)
    }

    pub fn samples(&self) -> &[ReferenceSample] {
        &self.samples
    }

    pub fn at(&self, t: f64) -> ReferenceSample {
        let s = &self.samples;
        if t <= s[0].t {
            return ReferenceSample { t, ..s[0] };
        }
        let last = s[s.len() - 1];
        if t >= last.t {
            return ReferenceSample { t, ..last };
        }
        let k = s.partition_point(|x| x.t <= t) - 1;
        let (a, b) = (s[k], s[k + 1]);
        let u = (t - a.t) / (b.t - a.t);
        ReferenceSample {
            t,
            q: a.q + (b.q - a.q) * u,
            nu: a.nu + (b.nu - a.nu) * u,
            // interpolate along the short arc
            phi: wrap_angle(a.phi + angle_diff(b.phi, a.phi) * u),
            omega: a.omega + (b.omega - a.omega) * u,
        }
    }
}

pub fn signed_power(x: f64, alpha: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(alpha)
    }
}

pub fn signed_power_vec(v: Vec2, alpha: f64) -> Vec2 {
    vec2(signed_power(v.x, alpha), signed_power(v.y, alpha))
}

/// New shape-velocity estimate `nu_o` for robot `id`.
///
/// `reference` carries `(q_ref, nu_ref)` and must be present for informed robots.
pub fn negotiate_position(
    id: usize,
    frame: &ShapeFrame,
    view: &NeighborView,
    informed: bool,
    reference: Option<(Vec2, Vec2)>,
    params: &SwarmParams,
) -> Result<Vec2> {
    let mut consensus = Vec2::zeros();
    let mut avg_nu = Vec2::zeros();
    if !view.is_empty() {
        let inv = 1.0 / view.len() as f64;
        for n in view.iter() {
            consensus -= params.c1n * inv * signed_power_vec(frame.q_o - n.frame.q_o, params.alpha);
            avg_nu += inv * n.frame.nu_o;
        }
    }
    if informed {
        let (q_ref, nu_ref) = reference.ok_or(SwarmError::MissingReference(id))?;
        Ok(consensus + params.c3n * (q_ref - frame.q_o) + nu_ref)
    } else if view.is_empty() {
        Ok(frame.nu_o)
    } else {
        Ok(consensus + avg_nu)
    }
}

/// New angular-rate estimate `omega_o`; `reference` carries `(phi_ref, omega_ref)`.
pub fn negotiate_orientation(
    id: usize,
    frame: &ShapeFrame,
    view: &NeighborView,
    informed: bool,
    reference: Option<(f64, f64)>,
    params: &SwarmParams,
) -> Result<f64> {
    let mut consensus = 0.0;
    let mut avg_omega = 0.0;
    if !view.is_empty() {
        let inv = 1.0 / view.len() as f64;
        for n in view.iter() {
            consensus -= params.c2n
                * inv
                * signed_power(angle_diff(frame.phi_o, n.frame.phi_o), params.alpha);
            avg_omega += inv * n.frame.omega_o;
        }
    }
    if informed {
        let (phi_ref, omega_ref) = reference.ok_or(SwarmError::MissingReference(id))?;
        Ok(consensus + params.c4n * angle_diff(phi_ref, frame.phi_o) + omega_ref)
    } else if view.is_empty() {
        Ok(frame.omega_o)
    } else {
        Ok(consensus + avg_omega)
    }
}

pub fn integrate_frame(frame: &ShapeFrame, nu_o: Vec2, omega_o: f64, dt: f64) -> ShapeFrame {
    ShapeFrame {
        q_o: frame.q_o + nu_o * dt,
        nu_o,
        phi_o: wrap_angle(frame.phi_o + omega_o * dt),
        omega_o,
    }
}

/// World position of `cell` as seen through a robot's own frame estimate.
pub fn world_transform(cell: Cell, grid: &ShapeGrid, frame: &ShapeFrame) -> Result<Vec2> {
    grid.check_cell(cell)?;
    Ok(grid.position_in(cell, &frame.placement()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maneuver::ShapeFrame;
    use crate::swarm::{neighbors, RobotState};
    use std::f64::consts::PI;

    #[test]
    fn signed_power_examples() {
        assert_eq!(signed_power(-4.0, 0.5), -2.0);
        assert_eq!(signed_power(0.0, 0.5), 0.0);
        assert!((signed_power(2.0, 0.8) - 1.74110).abs() < 1e-5);
        assert_eq!(signed_power_vec(vec2(-4.0, 9.0), 0.5), vec2(-2.0, 3.0));
    }

    fn robots_with_frames(frames: &[ShapeFrame]) -> Vec<RobotState> {
        frames
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let mut r = RobotState::at(i, vec2(i as f64 * 0.1, 0.0));
                r.frame = *f;
                r
            })
            .collect()
    }

    #[test]
    fn position_negotiation_examples() {
        let p = SwarmParams::default();
        let shared = ShapeFrame {
            q_o: vec2(1.0, 2.0),
            nu_o: vec2(0.3, -0.1),
            phi_o: 0.0,
            omega_o: 0.0,
        };
        let s = robots_with_frames(&[shared, shared, shared]);
        let view = neighbors(&s, 0, p.r_sense).unwrap();
        let nu = negotiate_position(0, &shared, &view, false, None, &p).unwrap();
        assert!((nu - shared.nu_o).norm() < 1e-15);

        let lone = NeighborView::default();
        let nu = negotiate_position(0, &shared, &lone, true, Some((shared.q_o, vec2(0.5, 0.5))), &p)
            .unwrap();
        assert_eq!(nu, vec2(0.5, 0.5));
        assert_eq!(negotiate_position(0, &shared, &lone, false, None, &p).unwrap(), shared.nu_o);

        let a = ShapeFrame::at(vec2(0.0, 0.0));
        let b = ShapeFrame::at(vec2(2.0, 0.0));
        let s = robots_with_frames(&[a, b]);
        let view = neighbors(&s, 1, p.r_sense).unwrap();
        let nu = negotiate_position(1, &b, &view, false, None, &p).unwrap();
        // moves toward robot 0's estimate
        assert!((nu.x + 1.6 * 2f64.powf(0.8)).abs() < 1e-12);
        assert!((nu.x.abs() - 2.78576).abs() < 1e-5);

        assert!(matches!(
            negotiate_position(1, &b, &view, true, None, &p),
            Err(SwarmError::MissingReference(1))
        ));
    }

    #[test]
    fn orientation_negotiation_examples() {
        let p = SwarmParams::default();
        let f = ShapeFrame {
            q_o: Vec2::zeros(),
            nu_o: Vec2::zeros(),
            phi_o: 0.4,
            omega_o: 0.25,
        };
        let s = robots_with_frames(&[f, f]);
        let view = neighbors(&s, 0, p.r_sense).unwrap();
        assert!((negotiate_orientation(0, &f, &view, false, None, &p).unwrap() - 0.25).abs() < 1e-15);

        // wrapped difference: 3.0 - (-3.0) is -0.28319, not 6
        let a = ShapeFrame { phi_o: 3.0, ..f };
        let b = ShapeFrame { phi_o: -3.0, omega_o: 0.0, ..f };
        let s = robots_with_frames(&[a, b]);
        let view = neighbors(&s, 0, p.r_sense).unwrap();
        let w = negotiate_orientation(0, &a, &view, false, None, &p).unwrap();
        let expected = -1.6 * signed_power(3.0 - (-3.0) - 2.0 * PI, 0.8);
        assert!((w - expected).abs() < 1e-12);
        assert!(w > 0.0);

        let lone = NeighborView::default();
        let w = negotiate_orientation(0, &f, &lone, true, Some((0.4, -0.7)), &p).unwrap();
        assert_eq!(w, -0.7);
    }

    #[test]
    fn frame_integration() {
        let f = ShapeFrame {
            q_o: vec2(1.0, 0.0),
            nu_o: Vec2::zeros(),
            phi_o: PI - 0.01,
            omega_o: 0.0,
        };
        assert_eq!(integrate_frame(&f, Vec2::zeros(), 0.0, 0.05).q_o, f.q_o);
        assert_eq!(integrate_frame(&f, Vec2::zeros(), 0.0, 0.05).phi_o, f.phi_o);
        let g = integrate_frame(&f, vec2(0.0, 2.0), 0.02 / 0.05, 0.05);
        assert!((g.q_o - vec2(1.0, 0.1)).norm() < 1e-15);
        assert!((g.phi_o - (-PI + 0.01)).abs() < 1e-12);
        assert_eq!(g.nu_o, vec2(0.0, 2.0));
    }

    #[test]
    fn equilibrium_reproduces_reference_rates() {
        let p = SwarmParams::default();
        let f = ShapeFrame {
            q_o: vec2(3.0, 1.0),
            nu_o: vec2(0.2, 0.1),
            phi_o: 1.0,
            omega_o: 0.3,
        };
        let s = robots_with_frames(&[f, f, f]);
        for id in 0..3 {
            let view = neighbors(&s, id, p.r_sense).unwrap();
            let informed = id == 0;
            let nu = negotiate_position(id, &f, &view, informed, Some((f.q_o, f.nu_o)), &p).unwrap();
            let w = negotiate_orientation(id, &f, &view, informed, Some((f.phi_o, f.omega_o)), &p)
                .unwrap();
            assert_eq!(nu, f.nu_o);
            assert_eq!(w, f.omega_o);
        }
    }

    #[test]
    fn reference_interpolation() {
        let mk = |t: f64, x: f64| ReferenceSample {
            t,
            q: vec2(x, 0.0),
            nu: vec2(1.0, 0.0),
            phi: 0.0,
            omega: 0.0,
        };
        let r = ReferenceTrajectory::new(vec![mk(0.0, 0.0), mk(10.0, 10.0)]).unwrap();
        assert!((r.at(5.0).q - vec2(5.0, 0.0)).norm() < 1e-12);
        assert_eq!(r.at(-1.0).q, vec2(0.0, 0.0));
        assert_eq!(r.at(11.0).q, vec2(10.0, 0.0));
        assert!(matches!(
            ReferenceTrajectory::new(vec![mk(1.0, 0.0), mk(1.0, 1.0)]),
            Err(SwarmError::NonMonotoneTime { row: 1 })
        ));

        let wrap = ReferenceTrajectory::new(vec![
            ReferenceSample { phi: 3.0, ..mk(0.0, 0.0) },
            ReferenceSample { phi: -3.0, ..mk(1.0, 0.0) },
        ])
        .unwrap();
        let mid = wrap.at(0.5).phi;
        assert!(mid.abs() > 3.0, "short-arc interpolation crosses pi, got {mid}");
    }

    #[test]
    fn circle_reference() {
        let r = ReferenceTrajectory::circle(Vec2::zeros(), 5.0, 60.0, 120.0, 0.5).unwrap();
        let s = r.at(15.0);
        assert!((s.q - vec2(0.0, 5.0)).norm() < 1e-9);
        assert!((s.nu.norm() - 5.0 * 2.0 * PI / 60.0).abs() < 1e-9);
        assert!((s.phi - PI / 2.0).abs() < 1e-9);
    }
}
