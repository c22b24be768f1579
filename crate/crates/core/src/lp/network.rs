//! Exact L1 tension problems solved through their min-cost circulation dual.
//!
//! Given arcs `e = (tail, head)` with integer target `t_e` and integer weight
//! `c_e ≥ 0`, find integer potentials `π` (with `π_ground = 0`) minimizing
//! `Σ c_e |π_tail − π_head − t_e|`. The dual is a circulation `f` with
//! `|f_e| ≤ c_e` maximizing `Σ t_e f_e`; equality of the two objectives is
//! checked on every solution.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("arc endpoint {0} out of range")]
    NodeOutOfRange(usize),
    #[error("negative arc weight on arc {0}")]
    NegativeWeight(usize),
    #[error("integer overflow while evaluating the objective")]
    Overflow,
    #[error("primal objective {primal} differs from dual objective {dual}")]
    CertificateMismatch { primal: i128, dual: i128 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensionArc {
    pub tail: usize,
    pub head: usize,
    pub target: i64,
    pub weight: i128,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TensionProblem {
    pub nodes: usize,
    pub arcs: Vec<TensionArc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensionSolution {
    pub potentials: Vec<i64>,
    pub flows: Vec<i128>,
    pub objective: i128,
    pub phases: usize,
}

impl TensionProblem {
    pub fn objective_of(&self, potentials: &[i64]) -> Option<i128> {
        self.arcs.iter().try_fold(0i128, |acc, a| {
            let gap = (potentials[a.tail] as i128 - potentials[a.head] as i128 - a.target as i128).abs();
            acc.checked_add(a.weight.checked_mul(gap)?)
        })
    }
}

struct Residual {
    to: Vec<usize>,
    cap: Vec<i128>,
    cost: Vec<i64>,
    start: Vec<usize>,
    order: Vec<usize>,
}

impl Residual {
    fn edges(&self, u: usize) -> &[usize] {
        &self.order[self.start[u]..self.start[u + 1]]
    }

    fn from(&self, e: usize) -> usize {
        self.to[e ^ 1]
    }
}

pub fn solve_tension(problem: &TensionProblem, ground: usize) -> Result<TensionSolution, NetworkError> {
    let n = problem.nodes;
    if ground >= n {
        return Err(NetworkError::NodeOutOfRange(ground));
    }
    let mut to = Vec::with_capacity(2 * problem.arcs.len());
    let mut cap = Vec::with_capacity(2 * problem.arcs.len());
    let mut cost = Vec::with_capacity(2 * problem.arcs.len());
    let mut excess = vec![0i128; n];
    for (k, a) in problem.arcs.iter().enumerate() {
        if a.tail >= n || a.head >= n {
            return Err(NetworkError::NodeOutOfRange(a.tail.max(a.head)));
        }
        if a.weight < 0 {
            return Err(NetworkError::NegativeWeight(k));
        }
        // start every arc at the flow its own cost prefers
        let f = a.weight * a.target.signum() as i128;
        excess[a.head] += f;
        excess[a.tail] -= f;
        to.push(a.head);
        cap.push(a.weight - f);
        cost.push(-a.target);
        to.push(a.tail);
        cap.push(a.weight + f);
        cost.push(a.target);
    }
    let mut degree = vec![0usize; n + 1];
    for &v in &to {
        degree[v] += 1;
    }
    let mut start = vec![0usize; n + 1];
    for v in 0..n {
        start[v + 1] = start[v] + degree[v];
    }
    let mut fill = start.clone();
    let mut order = vec![0usize; to.len()];
    for e in 0..to.len() {
        let u = to[e ^ 1];
        order[fill[u]] = e;
        fill[u] += 1;
    }
    let mut g = Residual { to, cap, cost, start, order };

    let mut p = vec![0i64; n];
    let mut phases = 0;
    while excess.iter().any(|&x| x != 0) {
        phases += 1;
        let dist = dijkstra(&g, &p, &excess);
        let reach = (0..n).filter(|&v| excess[v] < 0).map(|v| dist[v]).min().unwrap_or(i64::MAX);
        assert!(reach < i64::MAX, "deficit unreachable in a feasible circulation");
        for v in 0..n {
            p[v] += dist[v].min(reach);
        }
        augment(&mut g, &p, &mut excess);
    }

    let flows: Vec<i128> = problem.arcs.iter().enumerate().map(|(k, a)| a.weight - g.cap[2 * k]).collect();
    let base = p[ground];
    let potentials: Vec<i64> = p.iter().map(|v| v - base).collect();
    let primal = problem.objective_of(&potentials).ok_or(NetworkError::Overflow)?;
    let dual = problem
        .arcs
        .iter()
        .zip(&flows)
        .try_fold(0i128, |acc, (a, f)| acc.checked_add((a.target as i128).checked_mul(*f)?))
        .ok_or(NetworkError::Overflow)?;
    if primal != dual {
        return Err(NetworkError::CertificateMismatch { primal, dual });
    }
    Ok(TensionSolution { potentials, flows, objective: primal, phases })
}

fn reduced(g: &Residual, p: &[i64], e: usize) -> i64 {
    g.cost[e] + p[g.from(e)] - p[g.to[e]]
}

fn dijkstra(g: &Residual, p: &[i64], excess: &[i128]) -> Vec<i64> {
    let n = p.len();
    let mut dist = vec![i64::MAX; n];
    let mut heap = BinaryHeap::new();
    for v in 0..n {
        if excess[v] > 0 {
            dist[v] = 0;
            heap.push(Reverse((0i64, v)));
        }
    }
    let mut reach = i64::MAX;
    while let Some(Reverse((d, u))) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if d > reach {
            break;
        }
        if excess[u] < 0 {
            reach = reach.min(d);
        }
        for &e in g.edges(u) {
            if g.cap[e] <= 0 {
                continue;
            }
            let rc = reduced(g, p, e);
            debug_assert!(rc >= 0);
            let v = g.to[e];
            let nd = d + rc;
            if nd < dist[v] {
                dist[v] = nd;
                heap.push(Reverse((nd, v)));
            }
        }
    }
    dist
}

/// Maximum flow from surplus to deficit nodes over zero reduced-cost arcs
/// (Dinic with an implicit super source and sink).
fn augment(g: &mut Residual, p: &[i64], excess: &mut [i128]) {
    let n = p.len();
    let admissible = |g: &Residual, e: usize| g.cap[e] > 0 && reduced(g, p, e) == 0;
    loop {
        let mut level = vec![usize::MAX; n];
        let mut queue = std::collections::VecDeque::new();
        for v in 0..n {
            if excess[v] > 0 {
                level[v] = 0;
                queue.push_back(v);
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            if excess[u] < 0 {
                found = true;
            }
            for &e in g.edges(u) {
                let v = g.to[e];
                if level[v] == usize::MAX && admissible(g, e) {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        if !found {
            return;
        }
        let mut next: Vec<usize> = (0..n).map(|u| g.start[u]).collect();
        for s in 0..n {
            while excess[s] > 0 {
                let mut path: Vec<usize> = Vec::new();
                let mut u = s;
                let sink = loop {
                    if excess[u] < 0 {
                        break Some(u);
                    }
                    let mut advanced = false;
                    while next[u] < g.start[u + 1] {
                        let e = g.order[next[u]];
                        let v = g.to[e];
                        if level[v] != usize::MAX && level[v] == level[u] + 1 && admissible(g, e) {
                            path.push(e);
                            u = v;
                            advanced = true;
                            break;
                        }
                        next[u] += 1;
                    }
                    if advanced {
                        continue;
                    }
                    level[u] = usize::MAX;
                    match path.pop() {
                        Some(e) => {
                            u = g.from(e);
                            next[u] += 1;
                        }
                        None => break None,
                    }
                };
                let Some(t) = sink else { break };
                let mut amount = excess[s].min(-excess[t]);
                for &e in &path {
                    amount = amount.min(g.cap[e]);
                }
                for &e in &path {
                    g.cap[e] -= amount;
                    g.cap[e ^ 1] += amount;
                }
                excess[s] -= amount;
                excess[t] += amount;
            }
        }
    }
}
