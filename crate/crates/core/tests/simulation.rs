use swarm_manifold::mapping::{track, Metric};
use swarm_manifold::observables::polarization;
use swarm_manifold::sim::scenario::{Scenario, SplitRejoin};
use swarm_manifold::sim::{simulate, SimParams, StepSchedule};

fn scenario(name: &str, seed: u64) -> SimParams {
    let mut s = Scenario::from_name(name).unwrap();
    s.set_seed(seed);
    s.build().unwrap()
}

#[test]
fn displacement_matches_scheduled_speed() {
    // noise-free speed so the expected norm is known exactly
    let mut p = scenario("speed-switch", 3);
    p.speed_jitter = 0.0;
    let run = simulate(&p).unwrap();
    let frames = run.unwrapped.frames();
    for t in 1..p.step_count {
        let expected = p.at(t).base_speed * p.time_step;
        for (a, b) in frames[t - 1].positions().iter().zip(frames[t].positions()) {
            assert!(((*b - *a).norm() - expected).abs() < 1e-12, "step {t}");
        }
    }
}

#[test]
fn jittered_displacement_stays_in_band() {
    let p = scenario("speed-switch", 11);
    let run = simulate(&p).unwrap();
    let frames = run.unwrapped.frames();
    for t in 1..p.step_count {
        let s = p.at(t).base_speed;
        for (a, b) in frames[t - 1].positions().iter().zip(frames[t].positions()) {
            let v = (*b - *a).norm() / p.time_step;
            assert!(v >= s - p.speed_jitter - 1e-12 && v <= s + p.speed_jitter + 1e-12);
        }
    }
}

#[test]
fn noiseless_run_is_perfectly_polarized() {
    let mut p = scenario("noise-switch", 5);
    for s in &mut p.schedule {
        *s = StepSchedule {
            noise_low: 0.0,
            noise_high: 0.0,
            ..*s
        };
    }
    p.speed_jitter = 0.0;
    let run = simulate(&p).unwrap();
    let tracking = track(&run.unwrapped, Metric::Euclidean).unwrap();
    for m in &tracking.maps {
        assert_eq!(polarization(&m.velocities), 1.0, "step {}", m.step);
    }
    assert!(run.headings.iter().flatten().all(|&h| h == 0.0));
}

#[test]
fn wrapped_track_is_inside_box_and_consistent() {
    for name in Scenario::NAMES {
        let p = scenario(name, 2);
        let b = p.boundary();
        let run = simulate(&p).unwrap();
        for (w, u) in run.wrapped.frames().iter().zip(run.unwrapped.frames()) {
            for (pw, pu) in w.positions().iter().zip(u.positions()) {
                assert!(b.contains(*pw), "{name}: {pw:?}");
                assert_eq!(b.wrap(*pu), *pw);
                let kx = (pu.x - pw.x) / (2.0 * p.half_width);
                let ky = (pu.y - pw.y) / (2.0 * p.half_height);
                assert!((kx - kx.round()).abs() < 1e-9 && (ky - ky.round()).abs() < 1e-9);
            }
        }
    }
}

#[test]
fn scheduled_rotations_are_proper() {
    let p = SplitRejoin::default().build().unwrap();
    for t in 1..p.step_count {
        for agent in [0, p.split_at - 1, p.split_at, p.agent_count - 1] {
            let r = p.rotation(agent, t);
            assert!(r.orthogonality_error() < 1e-12);
            assert!((r.determinant() - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn odd_split_puts_extra_agent_in_first_group() {
    let mut s = Scenario::from_name("split-rejoin").unwrap();
    s.set("agents", "7").unwrap();
    assert_eq!(s.build().unwrap().split_at, 4);
}

#[test]
fn fixed_seed_is_reproducible() {
    for name in Scenario::NAMES {
        let a = simulate(&scenario(name, 42)).unwrap();
        let b = simulate(&scenario(name, 42)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&scenario(name, 43)).unwrap();
        assert_ne!(a.unwrapped, c.unwrapped);
    }
}

#[test]
fn initial_disk() {
    for name in Scenario::NAMES {
        let p = scenario(name, 8);
        let run = simulate(&p).unwrap();
        let center = swarm_manifold::Vec2::new(-p.half_width + 2.0, 0.0);
        assert!(run.unwrapped.frames()[0].positions().iter().all(|q| q.dist(center) <= 2.0));
    }
}

#[test]
fn short_switch_runs_rejected() {
    for name in ["speed-switch", "noise-switch"] {
        let mut s = Scenario::from_name(name).unwrap();
        s.set("steps", "80").unwrap();
        assert!(s.build().is_err());
    }
}
