//! Procedural map generators: braided recursive-backtracker mazes and
//! cellular-automata caves.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Cell, CellIndex, GoalPlacement, Generator, MapSpec, Point2, Pose, WorldConfig, WorldError};
use crate::seed::{rng, split_seed};

const MAX_ATTEMPTS: u32 = 32;
const CAVE_FILL: f64 = 0.45;
const CAVE_ITERATIONS: usize = 5;

/// Generates a map deterministically from `(seed, config)`.
pub fn generate_map(seed: u64, config: &WorldConfig) -> Result<MapSpec, WorldError> {
    config.validate()?;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = rng(split_seed(seed, u64::from(attempt)));
        let cells = match config.generator {
            Generator::Maze => maze(config.width, config.height, config.braid_probability, &mut rng),
            Generator::Cave => match cave(config.width, config.height, &mut rng) {
                Some(cells) => cells,
                None => continue,
            },
        };
        let mut map = MapSpec {
            width: config.width,
            height: config.height,
            cells,
            start: Pose::default(),
            goal: Point2::default(),
            seed,
        };
        if place_start_and_goal(&mut map, config, &mut rng) {
            return Ok(map);
        }
    }
    Err(WorldError::GenerationFailed { attempts: MAX_ATTEMPTS })
}

fn place_start_and_goal(map: &mut MapSpec, config: &WorldConfig, rng: &mut ChaCha8Rng) -> bool {
    let free: Vec<CellIndex> = map.free_cells().collect();
    let Some(&start) = free.choose(rng) else {
        return false;
    };
    let dist = map.bfs_distances(start);
    let eligible: Vec<CellIndex> = free
        .iter()
        .copied()
        .filter(|&(i, j)| {
            let d = dist[j * map.width + i];
            d != u32::MAX
                && d >= config.min_goal_distance
                && match config.goal_placement {
                    GoalPlacement::Open => map.free_neighbor_count((i, j)) >= 3,
                    GoalPlacement::Anywhere => true,
                }
        })
        .collect();
    let Some(&goal) = eligible.choose(rng) else {
        return false;
    };
    // face one of the open neighbours
    let headings: Vec<f64> = [(1isize, 0isize, 0.0), (0, 1, FRAC_PI_2), (-1, 0, 2.0 * FRAC_PI_2), (0, -1, 3.0 * FRAC_PI_2)]
        .iter()
        .filter(|&&(di, dj, _)| !map.is_wall(start.0 as isize + di, start.1 as isize + dj))
        .map(|&(_, _, h)| h)
        .collect();
    let theta = headings.choose(rng).copied().unwrap_or(0.0);
    let c = MapSpec::cell_center(start);
    map.start = Pose::new(c.x, c.y, theta);
    map.goal = MapSpec::cell_center(goal);
    true
}

/// Recursive backtracker over the odd-coordinate lattice, followed by
/// dead-end removal with probability `braid`.
fn maze(width: usize, height: usize, braid: f64, rng: &mut ChaCha8Rng) -> Vec<Cell> {
    let mut cells = vec![Cell::Wall; width * height];
    let nodes_x = (width - 1) / 2;
    let nodes_y = (height - 1) / 2;
    let node = |n: usize, m: usize| (2 * n + 1, 2 * m + 1);
    let mut visited = vec![false; nodes_x * nodes_y];
    let dirs: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

    let first = (rng.gen_range(0..nodes_x), rng.gen_range(0..nodes_y));
    let mut stack = vec![first];
    visited[first.1 * nodes_x + first.0] = true;
    let (fi, fj) = node(first.0, first.1);
    cells[fj * width + fi] = Cell::Free;

    while let Some(&(n, m)) = stack.last() {
        let options: Vec<(usize, usize)> = dirs
            .iter()
            .filter_map(|&(dn, dm)| {
                let (nn, nm) = (n as isize + dn, m as isize + dm);
                (nn >= 0 && nm >= 0 && (nn as usize) < nodes_x && (nm as usize) < nodes_y)
                    .then_some((nn as usize, nm as usize))
                    .filter(|&(a, b)| !visited[b * nodes_x + a])
            })
            .collect();
        match options.choose(rng) {
            Some(&(a, b)) => {
                visited[b * nodes_x + a] = true;
                let (ci, cj) = node(n, m);
                let (ti, tj) = node(a, b);
                cells[((cj + tj) / 2) * width + (ci + ti) / 2] = Cell::Free;
                cells[tj * width + ti] = Cell::Free;
                stack.push((a, b));
            }
            None => {
                stack.pop();
            }
        }
    }

    if braid > 0.0 {
        let free_deg = |cells: &[Cell], i: usize, j: usize| {
            dirs.iter()
                .filter(|&&(di, dj)| cells[(j as isize + dj) as usize * width + (i as isize + di) as usize] == Cell::Free)
                .count()
        };
        for m in 0..nodes_y {
            for n in 0..nodes_x {
                let (i, j) = node(n, m);
                if free_deg(&cells, i, j) != 1 || rng.gen::<f64>() >= braid {
                    continue;
                }
                let walls: Vec<(usize, usize)> = dirs
                    .iter()
                    .filter_map(|&(dn, dm)| {
                        let (nn, nm) = (n as isize + dn, m as isize + dm);
                        if nn < 0 || nm < 0 || nn as usize >= nodes_x || nm as usize >= nodes_y {
                            return None;
                        }
                        let wi = (i as isize + dn) as usize;
                        let wj = (j as isize + dm) as usize;
                        (cells[wj * width + wi] == Cell::Wall).then_some((wi, wj))
                    })
                    .collect();
                if let Some(&(wi, wj)) = walls.choose(rng) {
                    cells[wj * width + wi] = Cell::Free;
                }
            }
        }
    }
    cells
}

/// Cellular-automata cave: random fill, five smoothing passes with the
/// 4–5 rule (a wall survives with ≥ 4 wall neighbours, a floor cell turns
/// to wall with ≥ 5), then only the largest 4-connected region is kept.
/// Returns `None` when that region covers less than a quarter of the map.
fn cave(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Cell>> {
    let border = |i: usize, j: usize| i == 0 || j == 0 || i == width - 1 || j == height - 1;
    let mut cells: Vec<Cell> = (0..width * height)
        .map(|k| {
            let (i, j) = (k % width, k / width);
            if border(i, j) || rng.gen::<f64>() < CAVE_FILL {
                Cell::Wall
            } else {
                Cell::Free
            }
        })
        .collect();

    for _ in 0..CAVE_ITERATIONS {
        let mut next = cells.clone();
        for j in 1..height - 1 {
            for i in 1..width - 1 {
                let mut walls = 0;
                for dj in -1isize..=1 {
                    for di in -1isize..=1 {
                        if (di, dj) != (0, 0)
                            && cells[(j as isize + dj) as usize * width + (i as isize + di) as usize] == Cell::Wall
                        {
                            walls += 1;
                        }
                    }
                }
                let k = j * width + i;
                next[k] = match cells[k] {
                    Cell::Wall if walls >= 4 => Cell::Wall,
                    Cell::Free if walls >= 5 => Cell::Wall,
                    _ => Cell::Free,
                };
            }
        }
        cells = next;
    }

    // largest 4-connected free component
    let mut label = vec![usize::MAX; width * height];
    let mut best = (0usize, usize::MAX);
    let mut stack = Vec::new();
    let mut component = 0;
    for start in 0..cells.len() {
        if cells[start] != Cell::Free || label[start] != usize::MAX {
            continue;
        }
        let mut size = 0;
        label[start] = component;
        stack.push(start);
        while let Some(k) = stack.pop() {
            size += 1;
            for n in [k + 1, k - 1, k + width, k - width] {
                if cells[n] == Cell::Free && label[n] == usize::MAX {
                    label[n] = component;
                    stack.push(n);
                }
            }
        }
        if size > best.0 {
            best = (size, component);
        }
        component += 1;
    }
    if best.0 * 4 < width * height {
        return None;
    }
    for (cell, l) in cells.iter_mut().zip(&label) {
        if *l != best.1 {
            *cell = Cell::Wall;
        }
    }
    Some(cells)
}
