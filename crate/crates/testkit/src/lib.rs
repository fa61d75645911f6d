//! Reference implementations for the test suites.
//!
//! Everything here is written against plain arrays and tuples, without the
//! library's types, so a shared bug cannot hide on both sides of a check.

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Root of the cargo workspace.
pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("..").join("..")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    (x * x + y * y + z * z).sqrt()
}

/// A survey point as `(row, col, [east, north, up])`.
pub type PlainPoint = (u32, u32, [f64; 3]);

/// Greedy coverage routes, one literal loop iteration per assignment.
///
/// Returns, per agent, the `(row, col)` of each visited point in order.
pub fn greedy_routes(points: &[PlainPoint], starts: &[[f64; 3]]) -> Vec<Vec<(u32, u32)>> {
    let mut routes: Vec<Vec<usize>> = vec![Vec::new(); starts.len()];
    let mut taken = vec![false; points.len()];
    let length = |route: &Vec<usize>, start: [f64; 3]| {
        let mut total = 0.0;
        let mut at = start;
        for &i in route {
            total += dist(at, points[i].2);
            at = points[i].2;
        }
        total
    };
    for _ in 0..points.len() {
        let mut agent = 0;
        for a in 1..starts.len() {
            if length(&routes[a], starts[a]) < length(&routes[agent], starts[agent]) {
                agent = a;
            }
        }
        let at = routes[agent].last().map(|&i| points[i].2).unwrap_or(starts[agent]);
        let mut pick: Option<usize> = None;
        for j in 0..points.len() {
            if taken[j] {
                continue;
            }
            pick = match pick {
                None => Some(j),
                Some(k) => {
                    let (dj, dk) = (dist(at, points[j].2), dist(at, points[k].2));
                    let closer = dj < dk || (dj == dk && (points[j].0, points[j].1) < (points[k].0, points[k].1));
                    Some(if closer { j } else { k })
                }
            };
        }
        let j = pick.expect("a point is left");
        taken[j] = true;
        routes[agent].push(j);
    }
    routes.into_iter().map(|r| r.into_iter().map(|i| (points[i].0, points[i].1)).collect()).collect()
}

/// Random points on distinct lattice indices, scattered over a square.
pub fn random_points(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<PlainPoint> {
    let side = (n as f64).sqrt().ceil() as u32 + 1;
    let mut indices: Vec<(u32, u32)> = (0..side).flat_map(|r| (0..side).map(move |c| (r, c))).collect();
    for i in (1..indices.len()).rev() {
        let j = rng.random_range(0..=i);
        indices.swap(i, j);
    }
    indices
        .into_iter()
        .take(n)
        .map(|(r, c)| (r, c, [rng.random_range(0.0..extent), rng.random_range(0.0..extent), 30.0]))
        .collect()
}

pub fn random_starts(rng: &mut ChaCha8Rng, n: usize, extent: f64) -> Vec<[f64; 3]> {
    (0..n).map(|_| [rng.random_range(0.0..extent), rng.random_range(0.0..extent), 0.0]).collect()
}

/// Least entered-cell cost from `start` to `goal` over 4-connected moves,
/// by repeated relaxation of every edge until nothing changes.
///
/// `costs[row][col]` is `None` for impassable cells.
pub fn relaxed_path_cost(costs: &[Vec<Option<f64>>], start: (usize, usize), goal: (usize, usize)) -> Option<f64> {
    let rows = costs.len();
    let cols = costs[0].len();
    let mut best = vec![vec![f64::INFINITY; cols]; rows];
    best[start.0][start.1] = 0.0;
    loop {
        let mut changed = false;
        for r in 0..rows {
            for c in 0..cols {
                if costs[r][c].is_none() || best[r][c].is_infinite() {
                    continue;
                }
                let steps = [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)];
                for (nr, nc) in steps {
                    if nr >= rows || nc >= cols {
                        continue;
                    }
                    if let Some(step) = costs[nr][nc] {
                        if best[r][c] + step < best[nr][nc] {
                            best[nr][nc] = best[r][c] + step;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let v = best[goal.0][goal.1];
    v.is_finite().then_some(v)
}

/// Random terrain costs; `water` is the chance a cell is impassable.
pub fn random_costs(rng: &mut ChaCha8Rng, rows: usize, cols: usize, water: f64) -> Vec<Vec<Option<f64>>> {
    const CLASS_COSTS: [f64; 4] = [1.0, 2.0, 3.0, 5.0];
    (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| {
                    if rng.random_bool(water) {
                        None
                    } else {
                        Some(CLASS_COSTS[rng.random_range(0..CLASS_COSTS.len())])
                    }
                })
                .collect()
        })
        .collect()
}

/// A naive-Bayes threat model in raw form: category priors, substances as
/// `(category, P(substance | category))`, and per-variable
/// P(true | category).
#[derive(Debug, Clone)]
pub struct PlainModel {
    pub priors: Vec<f64>,
    pub substances: Vec<(usize, f64)>,
    pub likelihoods: Vec<Vec<f64>>,
}

/// Posterior by summing the full joint table over
/// category × substance × every value of every observation node, keeping
/// the rows consistent with what was observed.
///
/// `observations` are `(variable, value)`; returns the category and
/// substance posteriors.
pub fn joint_table_posterior(model: &PlainModel, observations: &[(usize, bool)]) -> (Vec<f64>, Vec<f64>) {
    let n_cat = model.priors.len();
    let m = observations.len();
    assert!(m <= 16, "joint table too large");
    let mut cat = vec![0.0; n_cat];
    let mut sub = vec![0.0; model.substances.len()];
    let mut total = 0.0;
    for c in 0..n_cat {
        for (s, &(sc, sp)) in model.substances.iter().enumerate() {
            let p_sub = if sc == c { sp } else { 0.0 };
            for assignment in 0..(1u32 << m) {
                let mut p = model.priors[c] * p_sub;
                let mut consistent = true;
                for (i, &(var, observed)) in observations.iter().enumerate() {
                    let value = assignment & (1 << i) != 0;
                    let p_true = model.likelihoods[var][c];
                    p *= if value { p_true } else { 1.0 - p_true };
                    consistent &= value == observed;
                }
                if consistent {
                    cat[c] += p;
                    sub[s] += p;
                    total += p;
                }
            }
        }
    }
    (cat.into_iter().map(|p| p / total).collect(), sub.into_iter().map(|p| p / total).collect())
}

/// Random normalized distribution of length `n`, bounded away from zero.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / sum).collect()
}
