//! Rectangular linear assignment and K-best ranked assignment.
//!
//! Cost matrices are `n × m` with `n ≤ m`; every row is assigned a distinct
//! column. An infinite entry forbids that pairing.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A complete row-to-column assignment and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `cols[i]` is the column assigned to row `i`.
    pub cols: Vec<usize>,
    pub cost: f64,
}

fn total(cost: &[Vec<f64>], cols: &[usize]) -> f64 {
    cols.iter().enumerate().map(|(i, &j)| cost[i][j]).sum()
}

fn width(cost: &[Vec<f64>]) -> usize {
    cost.first().map_or(0, Vec::len)
}

/// Minimum-cost assignment by shortest augmenting paths with potentials.
///
/// Returns `None` when no assignment of finite cost exists.
pub fn solve(cost: &[Vec<f64>]) -> Option<Assignment> {
    let n = cost.len();
    let m = width(cost);
    if n == 0 {
        return Some(Assignment {
            cols: Vec::new(),
            cost: 0.0,
        });
    }
    assert!(n <= m, "assignment needs at least as many columns as rows");
    assert!(cost.iter().all(|r| r.len() == m), "ragged cost matrix");
    if cost.iter().flatten().any(|c| c.is_nan() || *c == f64::NEG_INFINITY) {
        return None;
    }

    // 1-based potentials; column 0 is the virtual source of each search
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if !delta.is_finite() {
                return None;
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut cols = vec![0; n];
    for j in 1..=m {
        if row_of[j] > 0 {
            cols[row_of[j] - 1] = j - 1;
        }
    }
    let c = total(cost, &cols);
    c.is_finite().then_some(Assignment { cols, cost: c })
}

/// Subproblem of Murty's partitioning: some rows fixed, some pairs banned.
#[derive(Debug, Clone, Default)]
struct Node {
    forced: Vec<(usize, usize)>,
    banned: Vec<(usize, usize)>,
}

impl Node {
    fn solve(&self, cost: &[Vec<f64>]) -> Option<Assignment> {
        let mut c = cost.to_vec();
        for &(i, j) in &self.banned {
            c[i][j] = f64::INFINITY;
        }
        for &(i, j) in &self.forced {
            let keep = c[i][j];
            for (r, row) in c.iter_mut().enumerate() {
                if r != i {
                    row[j] = f64::INFINITY;
                }
            }
            c[i].iter_mut().for_each(|v| *v = f64::INFINITY);
            c[i][j] = keep;
        }
        solve(&c).map(|a| Assignment {
            cost: total(cost, &a.cols),
            cols: a.cols,
        })
    }
}

struct Queued {
    assignment: Assignment,
    node: Node,
    seq: usize,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // reversed so the max-heap pops the cheapest, oldest entry first
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .assignment
            .cost
            .total_cmp(&self.assignment.cost)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// The `k` lowest-cost assignments in nondecreasing cost order (Murty).
pub fn murty(cost: &[Vec<f64>], k: usize) -> Vec<Assignment> {
    let mut out = Vec::new();
    if k == 0 {
        return out;
    }
    let root = Node::default();
    let Some(best) = root.solve(cost) else {
        return out;
    };
    let mut seq = 0;
    let mut heap = BinaryHeap::new();
    heap.push(Queued {
        assignment: best,
        node: root,
        seq,
    });
    while let Some(Queued {
        assignment, node, ..
    }) = heap.pop()
    {
        let free: Vec<usize> = (0..cost.len())
            .filter(|i| !node.forced.iter().any(|&(r, _)| r == *i))
            .collect();
        let mut forced = node.forced.clone();
        for &row in &free {
            let mut child = Node {
                forced: forced.clone(),
                banned: node.banned.clone(),
            };
            child.banned.push((row, assignment.cols[row]));
            if let Some(a) = child.solve(cost) {
                seq += 1;
                heap.push(Queued {
                    assignment: a,
                    node: child,
                    seq,
                });
            }
            forced.push((row, assignment.cols[row]));
        }
        out.push(assignment);
        if out.len() == k {
            break;
        }
    }
    out
}

/// Every finite-cost assignment, sorted by cost, truncated to `k`.
pub fn enumerate_all(cost: &[Vec<f64>], k: usize) -> Vec<Assignment> {
    fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>, cols: &mut Vec<usize>, out: &mut Vec<Assignment>) {
        if row == cost.len() {
            let c = total(cost, cols);
            if c.is_finite() {
                out.push(Assignment {
                    cols: cols.clone(),
                    cost: c,
                });
            }
            return;
        }
        for j in 0..used.len() {
            if used[j] || !cost[row][j].is_finite() {
                continue;
            }
            used[j] = true;
            cols.push(j);
            rec(cost, row + 1, used, cols, out);
            cols.pop();
            used[j] = false;
        }
    }
    let mut out = Vec::new();
    let mut used = vec![false; width(cost)];
    rec(cost, 0, &mut used, &mut Vec::new(), &mut out);
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost).then_with(|| a.cols.cmp(&b.cols)));
    out.truncate(k);
    out
}

/// K-best assignments: exhaustive for tiny problems, Murty otherwise.
pub fn k_best(cost: &[Vec<f64>], k: usize) -> Vec<Assignment> {
    if cost.len() <= 3 && width(cost) <= 3 {
        enumerate_all(cost, k)
    } else {
        murty(cost, k)
    }
}
