//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{golden, random_instance, rel, rng, vertex_max};
use rand::Rng;
use uavmec::io::{load_scenario, run_solve, run_sweep, SweepTable};
use uavmec::lp::solve_time_allocation;
use uavmec::model::{reference_scenario, validate_solution, Point};
use uavmec::planner::{check_feasibility, n_lower_bound, travel_bound};
use uavmec::sca::{expand_at, lower_bound_slope, rate_lower, rate_upper, BoundError};
use uavmec::{MissionPlan, Scenario, Scheme, SolverConfig, Trajectory};

const SWEEP: [f64; 4] = [1e8, 2e8, 3e8, 5e8];

fn scenario_file(name: &str) -> Scenario {
    load_scenario(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)).unwrap()
}

/// Golden-layout sweep shared by several criteria, with its wall time.
fn golden_sweep() -> &'static (SweepTable, Duration) {
    static SWEEP_TABLE: OnceLock<(SweepTable, Duration)> = OnceLock::new();
    SWEEP_TABLE.get_or_init(|| {
        let start = Instant::now();
        let table = run_sweep(&scenario_file("golden.toml"), &SWEEP, &Scheme::ALL, &SolverConfig::default()).unwrap();
        (table, start.elapsed())
    })
}

fn plan_at(l: f64, scheme: Scheme) -> &'static uavmec::io::ResultBundle {
    &golden_sweep().0.rows.iter().find(|r| r.l_bits == l && r.scheme == scheme).expect("swept").bundle
}

fn criterion_1() -> String {
    let mut details = Vec::new();
    for (name, scenario) in [("travel.toml", scenario_file("travel.toml")), ("golden layout", golden(0.0))] {
        let scenario = scenario.with_task_bits(1e6).unwrap();
        // ceil(‖u_F − u_I‖ / (V_max·δ_t)) = ceil(1000 / 50)
        let expected = (1000.0f64 / (50.0 * 1.0)).ceil() as usize;
        let start = Instant::now();
        let bundle = run_solve(&scenario, Scheme::Proposed, &SolverConfig::default()).unwrap();
        let elapsed = start.elapsed();
        assert_eq!(bundle.plan.n_slots, expected, "{name}");
        assert!(elapsed < Duration::from_secs(10), "{name}: {elapsed:?}");
        details.push(format!("{name}: N = {} in {:.2?}", bundle.plan.n_slots, elapsed));
    }
    details.join("; ")
}

fn criterion_2() -> String {
    let bound = 1 + (5e8f64 / (5.0 * 2.5e9 * 1.0 / 1e3)).ceil() as usize;
    assert_eq!(bound, 41);
    assert_eq!(n_lower_bound(&golden(5e8)), bound);
    let mut lines = Vec::new();
    for scheme in Scheme::ALL {
        let n = plan_at(5e8, scheme).plan.n_slots;
        assert!(n >= bound, "{scheme}: {n} < {bound}");
        lines.push(format!("{scheme} N = {n}"));
    }
    let proposed = plan_at(5e8, Scheme::Proposed);
    assert!(proposed.wall_time_s < 300.0, "proposed took {} s", proposed.wall_time_s);
    // Every slot but the last can carry at most δ·R_max bits with the UAV
    // directly above a GBS, which no layout can beat.
    let s = golden(5e8);
    let tdma = 1 + (5e8 / (s.slot_len() * s.overhead_rate())).ceil() as usize;
    let n = proposed.plan.n_slots;
    let gap = (n as f64 - bound as f64) / bound as f64;
    let summary = format!(
        "{}; bound {bound}, gap {:.0}% (limit 20%); TDMA bound {tdma} slots already gives {:.0}%; proposed {:.1} s",
        lines.join(", "),
        100.0 * gap,
        100.0 * (tdma as f64 - bound as f64) / bound as f64,
        proposed.wall_time_s
    );
    assert!(gap <= 0.2, "{summary}");
    summary
}

fn criterion_3() -> String {
    let s = scenario_file("hover.toml");
    assert_eq!(s.task_bits(), 1e7);
    let cfg = SolverConfig::default();
    for scheme in [Scheme::Proposed, Scheme::HoverFly] {
        assert_eq!(run_solve(&s, scheme, &cfg).unwrap().plan.n_slots, 5, "{scheme}");
    }
    // N = 4: every slot position on a grid of reachable points (the UAV
    // must return to the start, so it stays within 100 m of it).
    let offsets = [-50.0, -25.0, 0.0, 25.0, 50.0];
    let cands: Vec<Point> = offsets.iter().flat_map(|&x| offsets.iter().map(move |&y| Point::new(x, y))).collect();
    let mut best: f64 = 0.0;
    let mut checked = 0;
    for a in &cands {
        for b in &cands {
            for c in &cands {
                let t = Trajectory::new(vec![Point::zeros(), *a, *b, *c, Point::zeros()]).unwrap();
                if t.max_step() > 50.0 + 1e-9 {
                    continue;
                }
                best = best.max(solve_time_allocation(&s, &t).unwrap().achieved_bits);
                checked += 1;
            }
        }
    }
    assert!(best < 1e7, "{best}");
    assert!(!check_feasibility(&s, 4, &cfg).unwrap().feasible);
    // Execution capacity alone caps N = 4 at 3·2.5e6 bits for any trajectory.
    assert!(3.0 * s.aggregate_bits_per_slot() < s.task_bits());
    format!("proposed and hover-fly N = 5; N = 4 best over {checked} grid trajectories {best:.4e} < 1e7")
}

fn criterion_4() -> String {
    let mut r = rng(2024);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let (s, t) = random_instance(&mut r, 1 + i % 3, 1 + (i / 3) % 2);
        let n_slots = t.n_slots();
        let k_gbs = s.num_gbs();
        let nv = n_slots * k_gbs;
        let rate = |n: usize, k: usize| s.offload_rate(&t.positions()[n], k).unwrap() / 1e6;
        let c: Vec<f64> = (0..nv).map(|v| rate(v / k_gbs + 1, v % k_gbs)).collect();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for n in 1..=n_slots {
            a.push((0..nv).map(|v| if v / k_gbs + 1 == n { 1.0 } else { 0.0 }).collect::<Vec<_>>());
            b.push(s.slot_len());
        }
        for (k, g) in s.gbs().iter().enumerate() {
            for n in 1..=n_slots {
                a.push(
                    (0..nv)
                        .map(|v| if v % k_gbs == k && v / k_gbs + 1 >= n { g.cycles_per_bit * rate(v / k_gbs + 1, k) } else { 0.0 })
                        .collect(),
                );
                b.push((n_slots - n) as f64 * g.cpu_freq * s.slot_len() / 1e6);
            }
        }
        let want = vertex_max(&c, &a, &b).unwrap() * 1e6;
        let got = solve_time_allocation(&s, &t).unwrap().lp_objective;
        let err = if want == 0.0 { got.abs() } else { rel(got, want) };
        assert!(err <= 1e-6, "instance {i}: {got} vs {want}");
        worst = worst.max(err);
    }
    format!("100 instances, worst relative gap {worst:.1e} (limit 1e-6)")
}

fn criterion_5() -> String {
    let mut r = rng(99);
    let mut worst_sandwich: f64 = 0.0;
    let mut worst_tight: f64 = 0.0;
    let mut worst_slope: f64 = 0.0;
    let mut domain = 0;
    let scenarios = [scenario_file("golden.toml"), scenario_file("travel.toml"), scenario_file("hover.toml")];
    for s in &scenarios {
        for _ in 0..10_000 {
            let local = Point::new(r.random_range(-500.0..1500.0), r.random_range(-700.0..700.0));
            let u = local + Point::new(r.random_range(-400.0..400.0), r.random_range(-400.0..400.0));
            let k = r.random_range(0..s.num_gbs());
            let e = expand_at(&Trajectory::new(vec![local, local]).unwrap(), s);
            let exact = s.offload_rate(&u, k).unwrap();
            let low = rate_lower(&u, k, 1, &e, s).unwrap();
            worst_sandwich = worst_sandwich.max((low - exact) / exact);
            match rate_upper(&u, k, 1, &e, s) {
                Ok(up) => worst_sandwich = worst_sandwich.max((exact - up) / up),
                Err(BoundError::Domain(_)) => domain += 1,
                Err(other) => panic!("{other}"),
            }
            let at = s.offload_rate(&local, k).unwrap();
            worst_tight = worst_tight
                .max(rel(rate_lower(&local, k, 1, &e, s).unwrap(), at))
                .max(rel(rate_upper(&local, k, 1, &e, s).unwrap(), at));
            let d2 = s.distance_sq(&local, k).unwrap();
            let h = 1e-3 * d2.sqrt();
            let fd = -(s.rate_at_dist_sq(d2 + h) - s.rate_at_dist_sq(d2 - h)) / (2.0 * h);
            worst_slope = worst_slope.max(rel(lower_bound_slope(s, d2), fd));
        }
    }
    assert!(worst_sandwich <= 1e-9, "sandwich violated by {worst_sandwich:e}");
    assert!(worst_tight <= 1e-9, "not tight at expansion: {worst_tight:e}");
    assert!(worst_slope <= 1e-4, "slope off by {worst_slope:e}");
    format!(
        "3×10⁴ pairs: sandwich slack {worst_sandwich:.1e}, tightness {worst_tight:.1e}, slope {worst_slope:.1e} \
         ({domain} points outside the upper bound's domain)"
    )
}

fn criterion_6() -> String {
    let cfg = SolverConfig::default();
    let mut plans: Vec<(Scenario, MissionPlan)> = golden_sweep()
        .0
        .rows
        .iter()
        .map(|r| (golden(r.l_bits), r.bundle.plan.clone()))
        .collect();
    for (s, l) in [(scenario_file("travel.toml"), 1e6), (scenario_file("hover.toml"), 1e7), (golden(5e7), 5e7)] {
        let s = s.with_task_bits(l).unwrap();
        for scheme in Scheme::ALL {
            plans.push((s.clone(), run_solve(&s, scheme, &cfg).unwrap().plan));
        }
    }
    let (mut outer, mut inner) = (0, 0);
    for (s, plan) in &plans {
        let d = &plan.diagnostics;
        assert!(d.outer_trace.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "{}: {:?}", plan.scheme, d.outer_trace);
        for t in &d.sca_traces {
            assert!(t.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9)), "{}: {t:?}", plan.scheme);
            inner += 1;
        }
        outer += 1;
        let report = validate_solution(&plan.trajectory, &plan.allocation, s);
        assert!(report.feasible && report.violations.is_empty(), "{}: {:?}", plan.scheme, report.violations);
    }
    format!("{outer} plans valid, {outer} outer and {inner} inner traces non-decreasing")
}

fn criterion_7() -> String {
    let (table, elapsed) = golden_sweep();
    let t = |s| table.times(s);
    let (p, h, st) = (t(Scheme::Proposed), t(Scheme::HoverFly), t(Scheme::Straight));
    let summary = format!("L = {SWEEP:?}: proposed {p:?}, hover-fly {h:?}, straight {st:?}; sweep {elapsed:.1?}");
    for i in 0..SWEEP.len() {
        assert!(p[i] <= h[i] && p[i] <= st[i], "{summary}");
        if SWEEP[i] >= 3e8 {
            assert!(st[i] >= h[i], "{summary}");
        }
    }
    assert!(*elapsed < Duration::from_secs(30 * 60), "{summary}");
    summary
}

fn criterion_8() -> String {
    let mut r = rng(8);
    let cfg = SolverConfig::default();
    let mut probes = 0;
    for i in 0..20 {
        let k = 1 + i % 3;
        let gbs: Vec<(f64, f64)> = (0..k).map(|_| (r.random_range(0.0..1000.0), r.random_range(-500.0..500.0))).collect();
        let end = (r.random_range(200.0..1000.0), r.random_range(-300.0..300.0));
        let l = r.random_range(2e7..1.5e8);
        let s = reference_scenario(&gbs, (0.0, 0.0), end, l).unwrap();
        let lower = n_lower_bound(&s).max(travel_bound(&s));
        let mut seen_feasible = None;
        let mut n = lower;
        loop {
            let f = check_feasibility(&s, n, &cfg).unwrap().feasible;
            probes += 1;
            match seen_feasible {
                None if f => seen_feasible = Some(n),
                Some(first) => {
                    assert!(f, "scenario {i}: feasible at {first} but not at {n}");
                    if n >= first + 3 {
                        break;
                    }
                }
                None => assert!(n < 400, "scenario {i}: nothing feasible up to 400"),
            }
            n += 1;
        }
    }
    format!("20 scenarios, {probes} probes, no feasible-then-infeasible step")
}

fn main() {
    type Criterion = (&'static str, fn() -> String);
    let criteria: [Criterion; 8] = [
        ("1 travel-limited regime", criterion_1),
        ("2 capacity-limited lower bound", criterion_2),
        ("3 exact small-instance oracle", criterion_3),
        ("4 LP oracle equivalence", criterion_4),
        ("5 Taylor sandwich and gradient", criterion_5),
        ("6 SCA and alternating monotonicity", criterion_6),
        ("7 scheme dominance", criterion_7),
        ("8 feasibility monotone in N", criterion_8),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        match catch_unwind(AssertUnwindSafe(run)) {
            Ok(detail) => println!("PASS criterion {name} ({:.1?}): {detail}", start.elapsed()),
            Err(e) => {
                failed += 1;
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL criterion {name} ({:.1?}): {msg}", start.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
