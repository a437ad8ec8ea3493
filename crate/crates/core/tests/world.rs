use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::sync::Arc;

use navsim_core::sensors::cast_ray;
use navsim_core::world::{generate_map, spawn_episode, Action, Cell, Generator, MapSpec, Point2, Status, WorldConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(generator: Generator) -> WorldConfig {
    WorldConfig { generator, ..WorldConfig::default() }
}

/// Border, connectivity and start–goal distance, checked from scratch.
fn check_sound(map: &MapSpec, cfg: &WorldConfig) -> Result<(), String> {
    let (w, h) = (map.width, map.height);
    let wall = |i: usize, j: usize| map.cells[j * w + i] == Cell::Wall;
    for i in 0..w {
        if !wall(i, 0) || !wall(i, h - 1) {
            return Err(format!("open border at column {i}"));
        }
    }
    for j in 0..h {
        if !wall(0, j) || !wall(w - 1, j) {
            return Err(format!("open border at row {j}"));
        }
    }
    let start = (map.start.x.floor() as usize, map.start.y.floor() as usize);
    let goal = (map.goal.x.floor() as usize, map.goal.y.floor() as usize);
    if wall(start.0, start.1) || wall(goal.0, goal.1) {
        return Err("start or goal in a wall".into());
    }
    let mut dist = vec![usize::MAX; w * h];
    let mut queue = VecDeque::from([start]);
    dist[start.1 * w + start.0] = 0;
    while let Some((i, j)) = queue.pop_front() {
        let d = dist[j * w + i];
        for (ni, nj) in [(i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)] {
            if !wall(ni, nj) && dist[nj * w + ni] == usize::MAX {
                dist[nj * w + ni] = d + 1;
                queue.push_back((ni, nj));
            }
        }
    }
    let free = map.cells.iter().filter(|c| **c == Cell::Free).count();
    let reached = dist.iter().filter(|d| **d != usize::MAX).count();
    if reached != free {
        return Err(format!("{reached} of {free} free cells reachable"));
    }
    let d = dist[goal.1 * w + goal.0];
    if d < cfg.min_goal_distance as usize {
        return Err(format!("goal only {d} steps away"));
    }
    Ok(())
}

#[test]
fn generated_maps_are_sound() {
    for generator in [Generator::Maze, Generator::Cave] {
        let cfg = config(generator);
        for seed in 0..100 {
            let map = generate_map(seed, &cfg).unwrap();
            if let Err(e) = check_sound(&map, &cfg) {
                panic!("{generator:?} seed {seed}: {e}");
            }
        }
    }
}

#[test]
fn dead_end_count_is_frozen() {
    // Counted independently from the JSON export of this map.
    let cfg = WorldConfig { braid_probability: 0.0, ..WorldConfig::default() };
    let map = generate_map(3, &cfg).unwrap();
    assert_eq!(map.dead_end_count(), DEAD_ENDS_SEED_3);
}

const DEAD_ENDS_SEED_3: usize = 26;

/// Walks the ray in steps of `step` until the sample point is inside a wall
/// cell or the goal disc.
fn march(map: &MapSpec, o: Point2, angle: f64, goal_radius: f64, step: f64) -> f64 {
    let (dx, dy) = (angle.cos(), angle.sin());
    let mut t = 0.0;
    loop {
        let p = Point2::new(o.x + t * dx, o.y + t * dy);
        if map.is_wall_at(p) || p.distance(map.goal) <= goal_radius {
            return t;
        }
        t += step;
    }
}

fn random_free_point(map: &MapSpec, rng: &mut ChaCha8Rng) -> Point2 {
    loop {
        let p = Point2::new(rng.gen_range(1.0..map.width as f64 - 1.0), rng.gen_range(1.0..map.height as f64 - 1.0));
        if !map.is_wall_at(p) {
            return p;
        }
    }
}

#[test]
fn dda_agrees_with_marcher() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let maps: Vec<MapSpec> = (0..10)
        .map(|s| {
            let generator = if s % 2 == 0 { Generator::Maze } else { Generator::Cave };
            generate_map(s, &WorldConfig { width: 21, height: 21, min_goal_distance: 6, ..config(generator) }).unwrap()
        })
        .collect();
    for k in 0..300 {
        let map = &maps[k % maps.len()];
        let o = random_free_point(map, &mut rng);
        let angle = rng.gen_range(0.0..TAU);
        let dda = cast_ray(map, o, angle, 0.35).unwrap().distance;
        let marched = march(map, o, angle, 0.35, 1e-3);
        assert!((dda - marched).abs() <= 2e-3, "triple {k}: dda {dda} marcher {marched}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), cave in any::<bool>()) {
        let cfg = WorldConfig { width: 15, height: 15, min_goal_distance: 5, ..config(if cave { Generator::Cave } else { Generator::Maze }) };
        prop_assert_eq!(generate_map(seed, &cfg).unwrap(), generate_map(seed, &cfg).unwrap());
    }

    #[test]
    fn episodes_stay_safe(seed in 0u64..1000, actions in prop::collection::vec(0u8..3, 1..400)) {
        let cfg = WorldConfig { width: 15, height: 15, min_goal_distance: 5, max_steps: 300, ..WorldConfig::default() };
        let mut ep = spawn_episode(Arc::new(generate_map(seed, &cfg).unwrap()), &cfg);
        for code in actions {
            if !ep.is_running() {
                break;
            }
            let tick = ep.tick;
            let status = ep.advance(Action::from_code(code).unwrap(), &cfg).unwrap();
            prop_assert_eq!(ep.tick, tick + 1);
            prop_assert!((0.0..TAU).contains(&ep.agent.theta));
            prop_assert!(!ep.map.disc_hits_wall(ep.agent.position(), cfg.agent_radius));
            match status {
                Status::Running => prop_assert!(ep.tick < cfg.max_steps),
                Status::Timeout => prop_assert_eq!(ep.tick, cfg.max_steps),
                Status::Success => prop_assert!(ep.goal_distance() <= cfg.goal_radius),
                Status::Collision => {}
            }
        }
    }
}
