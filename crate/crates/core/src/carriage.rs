//! The internal carriage that carries the electromagnet along the beam.
//!
//! The carriage rides the inner material, so it can only reach the everted
//! span. Valve visits are sequential; [`plan_route`] orders a batch of
//! visits to minimize travel subject to precedence constraints.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest task solved exactly by the subset DP.
pub const EXACT_LIMIT: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CarriageError {
    #[error("target {target_m} m is outside the everted span [0, {everted_m}] m")]
    OutOfReach { target_m: f64, everted_m: f64 },
    #[error("precedence constraints contain a cycle")]
    CyclicPrecedence,
    #[error("precedence refers to op {0}, task has {1} ops")]
    BadPrecedence(usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CarriageParams {
    pub speed_m_per_s: f64,
    /// Time spent at a valve per switch.
    pub dwell_s: f64,
}

impl Default for CarriageParams {
    fn default() -> Self {
        Self {
            speed_m_per_s: 0.1,
            dwell_s: 2.0,
        }
    }
}

pub fn travel_time(from_m: f64, to_m: f64, speed_m_per_s: f64) -> f64 {
    (to_m - from_m).abs() / speed_m_per_s
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CarriagePose {
    pub x_m: f64,
}

/// Drive to `target_m`; returns the advanced clock.
pub fn advance(
    pose: &mut CarriagePose,
    target_m: f64,
    everted_m: f64,
    params: &CarriageParams,
    clock_s: f64,
) -> Result<f64, CarriageError> {
    if !(0.0..=everted_m + 1e-9).contains(&target_m) {
        return Err(CarriageError::OutOfReach { target_m, everted_m });
    }
    let t = travel_time(pose.x_m, target_m, params.speed_m_per_s);
    pose.x_m = target_m;
    Ok(clock_s + t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpAction {
    Hold,
    Release,
    Dwell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteOp {
    pub position_m: f64,
    pub action: OpAction,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RouteTask {
    pub ops: Vec<RouteOp>,
    /// `(i, j)`: op `i` must be visited before op `j`.
    pub precedence: Vec<(usize, usize)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteLeg {
    pub op: usize,
    pub from_m: f64,
    pub to_m: f64,
    pub travel_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub order: Vec<usize>,
    pub legs: Vec<RouteLeg>,
    pub travel_m: f64,
    pub total_time_s: f64,
    /// False when the heuristic was used.
    pub optimal: bool,
}

/// Travel of visiting `order` from `start_m`.
pub fn route_travel(task: &RouteTask, start_m: f64, order: &[usize]) -> f64 {
    let mut x = start_m;
    let mut d = 0.0;
    for &i in order {
        d += (task.ops[i].position_m - x).abs();
        x = task.ops[i].position_m;
    }
    d
}

/// Whether `order` is a permutation respecting the precedence pairs.
pub fn respects_precedence(task: &RouteTask, order: &[usize]) -> bool {
    let mut rank = vec![usize::MAX; task.ops.len()];
    for (k, &i) in order.iter().enumerate() {
        rank[i] = k;
    }
    task.precedence.iter().all(|&(a, b)| rank[a] < rank[b])
}

/// Lower bound on travel: the carriage must at least sweep from the lower of
/// the start and the lowest op up to the highest op.
pub fn line_lower_bound(task: &RouteTask, start_m: f64) -> f64 {
    if task.ops.is_empty() {
        return 0.0;
    }
    let lo = task.ops.iter().map(|o| o.position_m).fold(start_m, f64::min);
    let hi = task.ops.iter().map(|o| o.position_m).fold(f64::NEG_INFINITY, f64::max);
    (hi - lo).max(0.0)
}

fn predecessor_masks(task: &RouteTask) -> Result<Vec<u64>, CarriageError> {
    let n = task.ops.len();
    let mut preds = vec![Vec::new(); n];
    for &(a, b) in &task.precedence {
        if a >= n || b >= n {
            return Err(CarriageError::BadPrecedence(a.max(b), n));
        }
        preds[b].push(a);
    }
    // Kahn's algorithm for the cycle check
    let mut indeg: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &(a, b) in &task.precedence {
            if a == i {
                indeg[b] -= 1;
                if indeg[b] == 0 {
                    ready.push(b);
                }
            }
        }
    }
    if seen != n {
        return Err(CarriageError::CyclicPrecedence);
    }
    Ok(preds
        .iter()
        .map(|p| p.iter().fold(0u64, |m, &a| if a < 64 { m | (1 << a) } else { m }))
        .collect())
}

fn exact_order(task: &RouteTask, start_m: f64, preds: &[u64]) -> Vec<usize> {
    let n = task.ops.len();
    let full = (1usize << n) - 1;
    let pos: Vec<f64> = task.ops.iter().map(|o| o.position_m).collect();
    let mut cost = vec![f64::INFINITY; (1 << n) * n];
    let mut parent = vec![usize::MAX; (1 << n) * n];
    for j in 0..n {
        if preds[j] == 0 {
            cost[(1 << j) * n + j] = (pos[j] - start_m).abs();
        }
    }
    for mask in 1..=full {
        for last in 0..n {
            let c = cost[mask * n + last];
            if !c.is_finite() {
                continue;
            }
            for j in 0..n {
                if mask & (1 << j) != 0 || (preds[j] as usize) & !mask != 0 {
                    continue;
                }
                let next = mask | (1 << j);
                let nc = c + (pos[j] - pos[last]).abs();
                if nc < cost[next * n + j] {
                    cost[next * n + j] = nc;
                    parent[next * n + j] = last;
                }
            }
        }
    }
    let mut last = (0..n)
        .min_by(|&a, &b| cost[full * n + a].total_cmp(&cost[full * n + b]))
        .unwrap();
    let mut mask = full;
    let mut order = Vec::with_capacity(n);
    loop {
        order.push(last);
        let p = parent[mask * n + last];
        mask &= !(1 << last);
        if mask == 0 {
            break;
        }
        last = p;
    }
    order.reverse();
    order
}

fn heuristic_order(task: &RouteTask, start_m: f64) -> Vec<usize> {
    let n = task.ops.len();
    let mut preds = vec![Vec::new(); n];
    for &(a, b) in &task.precedence {
        preds[b].push(a);
    }
    let mut done = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut x = start_m;
    while order.len() < n {
        let next = (0..n)
            .filter(|&j| !done[j] && preds[j].iter().all(|&p| done[p]))
            .min_by(|&a, &b| {
                let da = (task.ops[a].position_m - x).abs();
                let db = (task.ops[b].position_m - x).abs();
                da.total_cmp(&db).then(a.cmp(&b))
            })
            .expect("acyclic precedence always leaves a feasible op");
        done[next] = true;
        x = task.ops[next].position_m;
        order.push(next);
    }
    // 2-opt: reverse any sub-run that shortens the route and stays feasible
    let mut best = route_travel(task, start_m, &order);
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..n {
            for k in i + 1..n {
                let mut cand = order.clone();
                cand[i..=k].reverse();
                if !respects_precedence(task, &cand) {
                    continue;
                }
                let d = route_travel(task, start_m, &cand);
                if d < best - 1e-12 {
                    best = d;
                    order = cand;
                    improved = true;
                }
            }
        }
    }
    order
}

/// Order the ops of `task` starting from `start_m`.
///
/// Exact (subset DP over visited set and current op) up to
/// [`EXACT_LIMIT`] ops; nearest-feasible greedy plus 2-opt beyond that.
pub fn plan_route(task: &RouteTask, start_m: f64, params: &CarriageParams) -> Result<RoutePlan, CarriageError> {
    let preds = predecessor_masks(task)?;
    let n = task.ops.len();
    let (order, optimal) = if n == 0 {
        (Vec::new(), true)
    } else if n <= EXACT_LIMIT {
        (exact_order(task, start_m, &preds), true)
    } else {
        (heuristic_order(task, start_m), false)
    };
    let mut legs = Vec::with_capacity(n);
    let mut x = start_m;
    for &op in &order {
        let to = task.ops[op].position_m;
        legs.push(RouteLeg {
            op,
            from_m: x,
            to_m: to,
            travel_s: travel_time(x, to, params.speed_m_per_s),
        });
        x = to;
    }
    let travel_m = route_travel(task, start_m, &order);
    Ok(RoutePlan {
        total_time_s: travel_m / params.speed_m_per_s + n as f64 * params.dwell_s,
        order,
        legs,
        travel_m,
        optimal,
    })
}
