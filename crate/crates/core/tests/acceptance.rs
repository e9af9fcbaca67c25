//! Desk-scale acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::time::Instant;

use meanshift_swarm::coverage::cell_size;
use meanshift_swarm::geom::vec2;
use meanshift_swarm::io::{load_goals, load_grid, load_trajectory, TraceWriter};
use meanshift_swarm::kernel::{mean_shift, seek_mode, shadow_density, Profile, WeightedSamples};
use meanshift_swarm::precise::GoalSet;
use meanshift_swarm::presets::Preset;
use meanshift_swarm::sim::hungarian::{hungarian_baseline, solve};
use meanshift_swarm::sim::*;
use meanshift_swarm::swarm::RobotState;
use meanshift_swarm::Vec2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 10;

fn fixture(name: &str) -> String {
    format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = 1.0 - rng.gen::<f64>();
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// 30 samples in two gaussian clusters.
fn two_clusters(seed: u64) -> WeightedSamples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = [vec2(0.0, 0.0), vec2(2.5 + rng.gen::<f64>(), rng.gen_range(-1.0..1.0))];
    let pts = (0..30)
        .map(|k| {
            let c = centers[k % 2];
            c + 0.4 * vec2(gauss(&mut rng), gauss(&mut rng))
        })
        .collect();
    WeightedSamples::uniform(pts).unwrap()
}

fn bounds(s: &WeightedSamples, pad: f64) -> (Vec2, Vec2) {
    let mut lo = vec2(f64::MAX, f64::MAX);
    let mut hi = vec2(f64::MIN, f64::MIN);
    for q in s.samples() {
        lo = lo.inf(q);
        hi = hi.sup(q);
    }
    (lo - vec2(pad, pad), hi + vec2(pad, pad))
}

/// Local maxima of the shadow density on a grid of the given pitch over `[lo, hi]`.
fn grid_maxima(s: &WeightedSamples, sigma: f64, lo: Vec2, hi: Vec2, pitch: f64) -> Vec<Vec2> {
    let nx = ((hi.x - lo.x) / pitch).ceil() as usize + 1;
    let ny = ((hi.y - lo.y) / pitch).ceil() as usize + 1;
    let at = |i: usize, j: usize| vec2(lo.x + i as f64 * pitch, lo.y + j as f64 * pitch);
    let f: Vec<f64> = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| shadow_density(at(i, j), s, sigma))
        .collect();
    let mut out = Vec::new();
    for j in 1..ny - 1 {
        for i in 1..nx - 1 {
            let c = f[j * nx + i];
            let is_max = (-1i64..=1).all(|dj| {
                (-1i64..=1).all(|di| {
                    (di == 0 && dj == 0) || c > f[(j as i64 + dj) as usize * nx + (i as i64 + di) as usize]
                })
            });
            if is_max {
                out.push(at(i, j));
            }
        }
    }
    out
}

/// Brute-force maxima at pitch 1e-3: a 1e-2 sweep of the whole sample box,
/// then a 1e-3 sweep around every coarse maximum.
fn brute_force_modes(s: &WeightedSamples, sigma: f64) -> Vec<Vec2> {
    let (lo, hi) = bounds(s, 3.0 * sigma);
    let mut fine = Vec::new();
    for m in grid_maxima(s, sigma, lo, hi, 1e-2) {
        let w = vec2(0.03, 0.03);
        fine.extend(grid_maxima(s, sigma, m - w, m + w, 1e-3));
    }
    fine
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let sigma = 0.6;
    let k = Profile::Gaussian { sigma };
    let mut worst: f64 = 0.0;
    let mut unmatched = 0;
    for seed in 0..5 {
        let s = two_clusters(seed);
        let modes = brute_force_modes(&s, sigma);
        for &x0 in s.samples() {
            let found = seek_mode(x0, &s, &k, 1e-9, 100_000).unwrap();
            let best = modes
                .iter()
                .map(|m| (m - found.mode).abs().max())
                .fold(f64::INFINITY, f64::min);
            if !found.converged || best > 2e-3 {
                unmatched += 1;
            }
            worst = worst.max(best);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        unmatched == 0 && secs < 5.0,
        format!("worst coordinate gap {worst:.2e} (limit 2e-3), {unmatched} unmatched, {secs:.2} s (limit 5 s)"),
    )
}

fn criterion_2() -> Verdict {
    let sigma = 0.6;
    let k = Profile::Gaussian { sigma };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_cos: f64 = 1.0;
    for probe in 0..100 {
        let s = two_clusters(100 + probe % 5);
        let (lo, hi) = bounds(&s, 0.0);
        let x = vec2(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y));
        let h = 1e-5;
        let f = |p: Vec2| shadow_density(p, &s, sigma);
        let grad = vec2(
            (f(x + vec2(h, 0.0)) - f(x - vec2(h, 0.0))) / (2.0 * h),
            (f(x + vec2(0.0, h)) - f(x - vec2(0.0, h))) / (2.0 * h),
        );
        let m = mean_shift(x, &s, &k).unwrap();
        worst_cos = worst_cos.min(m.dot(&grad) / (m.norm() * grad.norm()));
    }
    let mut worst_dot = f64::INFINITY;
    let mut trajectories = 0;
    for seed in 0..5 {
        let s = two_clusters(200 + seed);
        for &x0 in s.samples().iter().step_by(3) {
            let path = seek_mode(x0, &s, &k, 1e-9, 100_000).unwrap().path;
            for w in path.windows(3) {
                let (a, b) = (w[1] - w[0], w[2] - w[1]);
                worst_dot = worst_dot.min(a.dot(&b));
            }
            trajectories += 1;
        }
    }
    verdict(
        worst_cos >= 0.999 && worst_dot >= 0.0,
        format!("min cosine {worst_cos:.6} over 100 probes, min consecutive dot {worst_dot:.2e} over {trajectories} paths"),
    )
}

fn precise_config(seed: u64) -> ScenarioConfig {
    let goals = load_goals(fixture("letter_g.goals")).unwrap();
    let params = Preset::Fig4.params();
    let mut c = ScenarioConfig::new(ScenarioKind::Precise, 50, Shape::Goals(goals), params);
    c.init_region = default_init_region(c.kind, &c.shape, 50, params.r_avoid, None);
    c.seed = seed;
    c
}

fn criterion_3() -> Verdict {
    let mut converged = 0;
    let mut deadlocks = 0;
    let mut unsafe_seeds = Vec::new();
    let mut min_d = f64::INFINITY;
    let mut slowest: f64 = 0.0;
    for seed in 0..SEEDS {
        let c = precise_config(seed);
        let start = Instant::now();
        let out = run_scenario_with(&c, |_, _, _| {}).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        let m = out.metrics;
        converged += m.convergence_time.is_some() as usize;
        deadlocks += m.deadlock as usize;
        min_d = min_d.min(m.min_pairwise_distance);
        if m.min_pairwise_distance < 0.5 * c.params.r_avoid {
            unsafe_seeds.push(seed);
        }
    }
    verdict(
        converged >= 9 && deadlocks == 0 && unsafe_seeds.is_empty() && slowest < 60.0,
        format!(
            "{converged}/{SEEDS} converged, {deadlocks} deadlocks, min distance after 5 s {min_d:.3} m \
             (limit 0.150, below in seeds {unsafe_seeds:?}), slowest seed {slowest:.2} s"
        ),
    )
}

fn coverage_config(seed: u64) -> ScenarioConfig {
    let grid = load_grid(fixture("m_26.grid")).unwrap().with_anchor(Preset::Fig5.anchor());
    let params = Preset::Fig5.params();
    let mut c = ScenarioConfig::new(ScenarioKind::Coverage, 100, Shape::Grid(grid), params);
    c.init_region = default_init_region(c.kind, &c.shape, 100, params.r_avoid, None);
    c.seed = seed;
    c
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn criterion_4() -> Verdict {
    let mut reached = 0;
    for seed in 0..SEEDS {
        let out = run_scenario_with(&coverage_config(seed), |_, _, _| {}).unwrap();
        reached += out.metrics.convergence_time.is_some() as usize;
    }

    let c = coverage_config(0);
    let Shape::Grid(g) = &c.shape else { unreachable!() };
    let l = cell_size(c.n_robot, g.n_black(), c.params.r_avoid).unwrap();
    let lhs = c.n_robot as f64 * std::f64::consts::PI * (c.params.r_avoid / 2.0).powi(2);
    let rhs = g.n_black() as f64 * l * l;
    let identity_gap = (lhs - rhs).abs() / lhs;

    let mut f = coverage_config(0);
    let (removal, end) = (6000, 12000);
    f.max_steps = end;
    f.stop_on_convergence = false;
    f.fault_schedule = (0..20).map(|id| (removal, id)).collect();
    let out = run_scenario_with(&f, |_, _, _| {}).unwrap();
    let s = &out.metrics.coverage_rate_series;
    let plateau = mean(&s[removal - 1000..removal]);
    let after = mean(&s[end - 1000..=end]);

    verdict(
        reached >= 9 && identity_gap <= 1e-12 && after >= plateau - 0.05,
        format!(
            "{reached}/{SEEDS} held coverage >= 0.95, calibration gap {identity_gap:.1e}, \
             fault: plateau {plateau:.3} -> {after:.3} after removing 20 robots"
        ),
    )
}

fn criterion_5() -> Verdict {
    let tr = load_trajectory(fixture("circle_r5_p60.csv")).unwrap();
    let mut worst_dis: f64 = 0.0;
    let mut worst_track: f64 = 0.0;
    let mut worst_cov: f64 = 1.0;
    for seed in 0..3 {
        let grid = load_grid(fixture("block_26.grid")).unwrap();
        let params = Preset::Fig6.params();
        let mut c = ScenarioConfig::new(ScenarioKind::Maneuver, 20, Shape::Grid(grid), params);
        c.trajectory = Some(tr.clone());
        c.n_informed = 2;
        c.init_region = default_init_region(c.kind, &c.shape, 20, params.r_avoid, c.trajectory.as_ref());
        c.seed = seed;
        let per_s = (1.0 / params.dt).round() as usize;
        c.max_steps = 120 * per_s;
        let m = run_scenario_with(&c, |_, _, _| {}).unwrap().metrics;
        let max = |x: &[f64]| x.iter().cloned().fold(0.0, f64::max);
        worst_dis = worst_dis.max(max(&m.frame_disagreement_series[20 * per_s..]));
        worst_track = worst_track.max(max(&m.tracking_error_series[60 * per_s..]));
        let lap2 = &m.coverage_rate_series[60 * per_s..=120 * per_s];
        worst_cov = worst_cov.min(lap2.iter().cloned().fold(1.0, f64::min));
    }
    verdict(
        worst_dis < 1e-2 && worst_track < 0.1 && worst_cov >= 0.9,
        format!(
            "frame disagreement after 20 s {worst_dis:.2e} m, tracking error over lap 2 {worst_track:.3} m, \
             min lap-2 coverage {worst_cov:.3} (3 seeds)"
        ),
    )
}

fn brute_force_3(cost: &[Vec<f64>]) -> f64 {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms
        .iter()
        .map(|p| (0..3).map(|i| cost[i][p[i]]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn criterion_6() -> Verdict {
    let mut worst_ratio: f64 = 0.0;
    for seed in 0..SEEDS {
        let c = precise_config(seed);
        let starts: Vec<Vec2> = initial_state(&c).iter().map(|r| r.p).collect();
        let Shape::Goals(goals) = &c.shape else { unreachable!() };
        let opt = hungarian_baseline(&starts, goals).unwrap();
        let m = run_scenario_with(&c, |_, _, _| {}).unwrap().metrics;
        worst_ratio = worst_ratio.max(m.avg_distance / opt.mean_distance());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut mismatches = 0;
    for _ in 0..200 {
        let starts: Vec<Vec2> = (0..3).map(|_| vec2(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
        let goals: Vec<Vec2> = (0..3).map(|_| vec2(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))).collect();
        let cost: Vec<Vec<f64>> = starts.iter().map(|s| goals.iter().map(|g| (s - g).norm()).collect()).collect();
        let assign = solve(&cost);
        let total: f64 = (0..3).map(|i| cost[i][assign[i]]).sum();
        let via_goals = hungarian_baseline(&starts, &GoalSet::new(goals).unwrap()).unwrap();
        let best = brute_force_3(&cost);
        if (total - best).abs() > 1e-12 || (via_goals.total_distance - best).abs() > 1e-12 {
            mismatches += 1;
        }
    }
    verdict(
        worst_ratio <= 3.0 && mismatches == 0,
        format!("worst avg-distance ratio to optimum {worst_ratio:.2} (limit 3), {mismatches}/200 3x3 mismatches"),
    )
}

fn trace_bytes(c: &ScenarioConfig) -> Vec<u8> {
    let mut w = TraceWriter::new(Vec::new()).unwrap();
    run_scenario_with(c, |step, t, snap| {
        for r in trace_records(c.kind, step, t, snap) {
            w.write(&r).unwrap();
        }
    })
    .unwrap();
    w.finish().unwrap()
}

fn criterion_7() -> Verdict {
    let mut precise = precise_config(7);
    precise.max_steps = 400;
    let mut coverage = coverage_config(7);
    coverage.max_steps = 200;
    let deterministic = trace_bytes(&precise) == trace_bytes(&precise) && trace_bytes(&coverage) == trace_bytes(&coverage);

    // moving an out-of-range robot leaves every other command untouched
    let mut local = true;
    for c in [precise_config(1), coverage_config(1)] {
        let ctl = Controller::new(&c).unwrap();
        let mut snap = initial_state(&c);
        for k in 0..40 {
            snap = ctl.step(&snap, k as f64 * c.params.dt);
        }
        let far = snap.last().unwrap().id;
        let away = |d: f64| -> Vec<RobotState> {
            snap.iter()
                .map(|r| {
                    let mut r = r.clone();
                    if r.id == far {
                        r.p = vec2(1e3 * d, -1e3 * d);
                    }
                    r
                })
                .collect()
        };
        let (a, b) = (ctl.step(&away(1.0), 2.0), ctl.step(&away(2.0), 2.0));
        local &= a.iter().zip(&b).filter(|(x, _)| x.id != far).all(|(x, y)| x == y);
    }

    // 10-robot fixture with labels reversed
    let goals: Vec<Vec2> = (0..10).map(|k| vec2(0.6 * (k % 5) as f64, 0.6 * (k / 5) as f64)).collect();
    let c = ScenarioConfig::new(ScenarioKind::Precise, 10, Shape::Goals(GoalSet::new(goals).unwrap()), Preset::Fig4.params());
    let ctl = Controller::new(&c).unwrap();
    let starts: Vec<Vec2> = (0..10).map(|k| vec2(-2.0 - 0.45 * (k % 3) as f64, 0.5 * k as f64 - 1.0)).collect();
    let mut a: Vec<RobotState> = starts.iter().enumerate().map(|(i, &p)| RobotState::at(i, p)).collect();
    let mut b: Vec<RobotState> = starts.iter().enumerate().map(|(i, &p)| RobotState::at(9 - i, p)).collect();
    let mut gap: f64 = 0.0;
    let mut hops_match = true;
    for k in 0..300 {
        let t = k as f64 * c.params.dt;
        a = ctl.step(&a, t);
        b = ctl.step(&b, t);
        for ra in &a {
            let rb = b.iter().find(|r| r.id == 9 - ra.id).unwrap();
            gap = gap.max((ra.p - rb.p).norm());
            hops_match &= ra.h == rb.h;
        }
    }
    // relabeling reorders the id-ordered neighbor sums, so allow rounding noise
    let equivariant = gap < 1e-9 && hops_match;
    verdict(
        deterministic && local && equivariant,
        format!("bit-identical reruns {deterministic}, locality {local}, relabel gap {gap:.1e} m"),
    )
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("1 mean-shift mode oracle", criterion_1),
        ("2 gradient and smoothness", criterion_2),
        ("3 precise formation desk run", criterion_3),
        ("4 coverage desk run", criterion_4),
        ("5 maneuver desk run", criterion_5),
        ("6 baseline sanity", criterion_6),
        ("7 determinism and locality", criterion_7),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let v = check();
        failed += !v.pass as usize;
        println!("{} criterion {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
