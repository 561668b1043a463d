//! Exact membership of rationals in the attractor via finite preimage graphs.
//!
//! For a fixed denominator q, the fiber graph has one node per fraction t/q
//! inside the hull and an edge t/q -> q_i*(t/q) - p_i (the branch preimage)
//! whenever the target stays in the hull. Preimages never increase the
//! reduced denominator, so a rational is in the attractor exactly when its
//! node can reach a directed cycle; reading the edge labels along a
//! path-to-cycle yields an eventually periodic coding of the point.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use crate::coding::Coding;
use crate::error::{Error, Result};
use crate::ifs::{Interval, RationalIfs};
use crate::rational::ExactRational;

/// Preimage graph of one denominator fiber.
#[derive(Debug)]
pub struct FiberGraph {
    /// Common denominator of all nodes.
    pub q: u64,
    /// Node k represents the fraction (t_lo + k)/q.
    pub t_lo: i64,
    /// Forward edges (branch label, target node index).
    edges: Vec<Vec<(u32, u32)>>,
    /// Reverse edges (branch label of the forward edge, source node index).
    redges: Vec<Vec<(u32, u32)>>,
    /// Nodes lying on a directed cycle.
    on_cycle: Vec<bool>,
    /// Nodes from which some infinite path exists (equivalently, nodes
    /// reaching a cycle). These are exactly the attractor members.
    alive: Vec<bool>,
}

impl FiberGraph {
    pub fn node_count(&self) -> usize {
        self.edges.len()
    }

    pub fn index_of(&self, t: i64) -> Option<usize> {
        let k = t.checked_sub(self.t_lo)?;
        (0..self.edges.len() as i64).contains(&k).then_some(k as usize)
    }

    pub fn value_of(&self, idx: usize) -> i64 {
        self.t_lo + idx as i64
    }

    pub fn is_alive(&self, t: i64) -> bool {
        self.index_of(t).map(|i| self.alive[i]).unwrap_or(false)
    }

    pub fn edges_from(&self, idx: usize) -> &[(u32, u32)] {
        &self.edges[idx]
    }

    fn build(ifs: &RationalIfs, hull: &Interval, q: u64, node_budget: u64) -> Result<FiberGraph> {
        let t_lo = ceil_times(&hull.lo, q);
        let t_hi = floor_times(&hull.hi, q);
        let n = if t_hi < t_lo { 0 } else { (t_hi - t_lo + 1) as u64 };
        if n > node_budget {
            return Err(Error::Budget(format!(
                "fiber graph for q={q} needs {n} nodes > budget {node_budget}"
            )));
        }
        let n = n as usize;
        let mut edges = vec![Vec::new(); n];
        let mut redges = vec![Vec::new(); n];
        for k in 0..n {
            let t = t_lo + k as i64;
            for (i, b) in ifs.branches().iter().enumerate() {
                // f_i^{-1}(t/q) = (q_i*t - p_i*q)/q
                let target = b.q as i128 * t as i128 - b.p as i128 * q as i128;
                if target < t_lo as i128 || target > t_hi as i128 {
                    continue;
                }
                let tk = (target as i64 - t_lo) as usize;
                edges[k].push((i as u32, tk as u32));
                redges[tk].push((i as u32, k as u32));
            }
        }
        let on_cycle = cyclic_nodes(&edges);
        // alive = reverse reachability from cyclic nodes
        let mut alive = on_cycle.clone();
        let mut stack: Vec<usize> = (0..n).filter(|&k| on_cycle[k]).collect();
        while let Some(k) = stack.pop() {
            for &(_, src) in &redges[k] {
                if !alive[src as usize] {
                    alive[src as usize] = true;
                    stack.push(src as usize);
                }
            }
        }
        Ok(FiberGraph {
            q,
            t_lo,
            edges,
            redges,
            on_cycle,
            alive,
        })
    }
}

fn ceil_times(r: &ExactRational, q: u64) -> i64 {
    let prod = r * ExactRational::from_integer(BigInt::from(q));
    prod.ceil().to_integer().to_i64().expect("fiber bound fits i64")
}

fn floor_times(r: &ExactRational, q: u64) -> i64 {
    let prod = r * ExactRational::from_integer(BigInt::from(q));
    prod.floor().to_integer().to_i64().expect("fiber bound fits i64")
}

/// Iterative Tarjan SCC; a node is cyclic when its SCC has size >= 2 or it
/// carries a self-loop.
fn cyclic_nodes(edges: &[Vec<(u32, u32)>]) -> Vec<bool> {
    let n = edges.len();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut cyclic = vec![false; n];
    let mut counter = 0usize;

    // explicit DFS frames: (node, next edge position)
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        frames.push((start, 0));
        index[start] = counter;
        low[start] = counter;
        counter += 1;
        stack.push(start);
        on_stack[start] = true;

        while let Some(&mut (v, ref mut ei)) = frames.last_mut() {
            if *ei < edges[v].len() {
                let (_, wt) = edges[v][*ei];
                let w = wt as usize;
                *ei += 1;
                if index[w] == usize::MAX {
                    index[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    frames.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                frames.pop();
                if let Some(&mut (parent, _)) = frames.last_mut() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    // v is an SCC root
                    let mut comp = Vec::new();
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp.push(w);
                        if w == v {
                            break;
                        }
                    }
                    let big = comp.len() >= 2;
                    for &w in &comp {
                        cyclic[w] =
                            big || edges[w].iter().any(|&(_, t)| t as usize == w);
                    }
                }
            }
        }
    }
    cyclic
}

/// A path-to-cycle representation of a member rational.
#[derive(Debug, Clone)]
pub struct Representation {
    pub preperiod_len: usize,
    pub period_len: usize,
    /// The intrinsic height candidate: path product * (cycle product - 1).
    pub value: BigInt,
    pub coding: Coding,
}

/// Memoizing membership oracle for one IFS. Fiber graphs are cached per
/// denominator; the cache is safe to share across threads.
pub struct MembershipContext {
    ifs: RationalIfs,
    hull: Interval,
    node_budget: u64,
    cache: Mutex<HashMap<u64, Arc<FiberGraph>>>,
}

pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

impl MembershipContext {
    pub fn new(ifs: RationalIfs) -> Self {
        Self::with_budget(ifs, DEFAULT_NODE_BUDGET)
    }

    pub fn with_budget(ifs: RationalIfs, node_budget: u64) -> Self {
        let hull = ifs.hull();
        MembershipContext {
            ifs,
            hull,
            node_budget,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn ifs(&self) -> &RationalIfs {
        &self.ifs
    }

    pub fn hull(&self) -> &Interval {
        &self.hull
    }

    /// The fiber graph for denominator q, built on first use.
    pub fn fiber(&self, q: u64) -> Result<Arc<FiberGraph>> {
        if q == 0 {
            return Err(Error::InvalidArgument("denominator must be >= 1".into()));
        }
        if let Some(g) = self.cache.lock().unwrap().get(&q) {
            return Ok(Arc::clone(g));
        }
        let g = Arc::new(FiberGraph::build(&self.ifs, &self.hull, q, self.node_budget)?);
        let mut cache = self.cache.lock().unwrap();
        Ok(Arc::clone(cache.entry(q).or_insert(g)))
    }

    /// Decides `r` in the attractor; on success returns a witness coding
    /// that projects back to `r` exactly.
    pub fn is_member(&self, r: &ExactRational) -> Result<Option<Coding>> {
        if !self.hull.contains(r) {
            return Ok(None);
        }
        let q = r
            .denom()
            .to_u64()
            .ok_or_else(|| Error::Budget("denominator exceeds u64 fiber budget".into()))?;
        let graph = self.fiber(q)?;
        let t = r
            .numer()
            .to_i64()
            .ok_or_else(|| Error::Budget("numerator exceeds i64 fiber range".into()))?;
        let Some(start) = graph.index_of(t) else {
            return Ok(None);
        };
        if !graph.alive[start] {
            return Ok(None);
        }
        Ok(Some(witness_coding(&graph, start)))
    }

    /// All integer numerators p with p/q in the attractor and gcd(p, q) = 1.
    /// In torus mode, all residues 0 <= p < q with gcd(p, q) = 1 such that
    /// some integer translate p/q + t lies in the attractor.
    pub fn members_for_denominator(&self, q: u64, torus: bool) -> Result<Vec<i64>> {
        if q == 0 {
            return Err(Error::InvalidArgument("denominator must be >= 1".into()));
        }
        let graph = self.fiber(q)?;
        let mut out = Vec::new();
        if torus {
            for p in 0..q {
                if gcd_u64(p, q) != 1 {
                    continue;
                }
                // translates p + t*q inside the node range
                let mut t = graph.t_lo + ((p as i64 - graph.t_lo).rem_euclid(q as i64));
                let t_hi = graph.t_lo + graph.node_count() as i64 - 1;
                let mut hit = false;
                while t <= t_hi {
                    if graph.is_alive(t) {
                        hit = true;
                        break;
                    }
                    t += q as i64;
                }
                if hit {
                    out.push(p as i64);
                }
            }
        } else {
            for idx in 0..graph.node_count() {
                if !graph.alive[idx] {
                    continue;
                }
                let p = graph.value_of(idx);
                if gcd_u64(p.unsigned_abs(), q) == 1 {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }

    /// Exact minimizer of path-product * (cycle-product - 1) over all
    /// path-to-cycle pairs through the fiber of den(r); `None` when r is not
    /// a member. The joint minimum decomposes as min over nodes x of
    /// minpath(r -> x) * (mincycle(x) - 1) because the factors are
    /// independent given x.
    pub fn minimal_representation(&self, r: &ExactRational) -> Result<Option<Representation>> {
        if !self.hull.contains(r) {
            return Ok(None);
        }
        let q = r
            .denom()
            .to_u64()
            .ok_or_else(|| Error::Budget("denominator exceeds u64 fiber budget".into()))?;
        let graph = self.fiber(q)?;
        let t = r
            .numer()
            .to_i64()
            .ok_or_else(|| Error::Budget("numerator exceeds i64 fiber range".into()))?;
        let Some(start) = graph.index_of(t) else {
            return Ok(None);
        };
        if !graph.alive[start] {
            return Ok(None);
        }

        let branch_q: Vec<BigInt> = self
            .ifs
            .branches()
            .iter()
            .map(|b| BigInt::from(b.q))
            .collect();
        let (dist, parent) = dijkstra_products(&graph, start, &branch_q);

        let mut best: Option<(BigInt, usize, Vec<usize>)> = None;
        for x in 0..graph.node_count() {
            if !graph.on_cycle[x] {
                continue;
            }
            let Some(ref dx) = dist[x] else { continue };
            if let Some((best_val, _, _)) = &best {
                // cheapest possible cycle factor is (2 - 1) = 1
                if dx > best_val {
                    continue;
                }
            }
            let Some((cycle_prod, cycle_labels)) = min_cycle_through(&graph, x, &branch_q) else {
                continue;
            };
            let value = dx * (&cycle_prod - BigInt::one());
            if best.as_ref().map_or(true, |(v, _, _)| value < *v) {
                best = Some((value, x, cycle_labels));
            }
        }

        let (value, x, cycle_labels) = best.expect("alive node reaches a cycle");
        let mut path_labels = Vec::new();
        let mut cur = x;
        while cur != start {
            let (label, prev) = parent[cur].expect("path exists");
            path_labels.push(label as usize);
            cur = prev;
        }
        path_labels.reverse();

        let coding = Coding::new(path_labels.clone(), cycle_labels.clone())?.canonicalize();
        Ok(Some(Representation {
            preperiod_len: path_labels.len(),
            period_len: cycle_labels.len(),
            value,
            coding,
        }))
    }
}

fn gcd_u64(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

/// Reads a witness coding off any path from `start` to a cycle, then around
/// that cycle. Labels are collected in walk order: a path r -> x with labels
/// i_1..i_k means r = f_{i_1} o ... o f_{i_k} (x).
fn witness_coding(graph: &FiberGraph, start: usize) -> Coding {
    // BFS to the nearest on-cycle node
    let n = graph.node_count();
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[start] = true;
    queue.push_back(start);
    let mut cycle_entry = None;
    if graph.on_cycle[start] {
        cycle_entry = Some(start);
    }
    while cycle_entry.is_none() {
        let v = queue.pop_front().expect("alive node reaches a cycle");
        for &(label, w) in &graph.edges[v] {
            let w = w as usize;
            if seen[w] {
                continue;
            }
            seen[w] = true;
            parent[w] = Some((label, v));
            if graph.on_cycle[w] {
                cycle_entry = Some(w);
                break;
            }
            queue.push_back(w);
        }
        if queue.is_empty() && cycle_entry.is_none() {
            // start was alive, so this cannot happen
            unreachable!("alive node must reach a cycle");
        }
    }
    let x = cycle_entry.unwrap();
    let mut pre = Vec::new();
    let mut cur = x;
    while cur != start {
        let (label, prev) = parent[cur].expect("BFS parent chain");
        pre.push(label as usize);
        cur = prev;
    }
    pre.reverse();

    let period = some_cycle_through(graph, x);
    Coding::new(pre, period).expect("cycle is non-empty")
}

/// Any directed cycle through `x` (labels in walk order).
fn some_cycle_through(graph: &FiberGraph, x: usize) -> Vec<usize> {
    let n = graph.node_count();
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[x] = true;
    queue.push_back(x);
    while let Some(v) = queue.pop_front() {
        for &(label, w) in &graph.edges[v] {
            let w = w as usize;
            if w == x {
                // close the cycle: path x -> v, then edge v -> x
                let mut labels = vec![label as usize];
                let mut cur = v;
                while cur != x {
                    let (l, prev) = parent[cur].expect("BFS parent chain");
                    labels.push(l as usize);
                    cur = prev;
                }
                labels.reverse();
                return labels;
            }
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some((label, v));
                queue.push_back(w);
            }
        }
    }
    unreachable!("x lies on a cycle");
}

/// Dijkstra with exact multiplicative weights (branch denominators).
/// Returns per-node minimal products and parent links.
#[allow(clippy::type_complexity)]
fn dijkstra_products(
    graph: &FiberGraph,
    start: usize,
    branch_q: &[BigInt],
) -> (Vec<Option<BigInt>>, Vec<Option<(u32, usize)>>) {
    let n = graph.node_count();
    let mut dist: Vec<Option<BigInt>> = vec![None; n];
    let mut parent: Vec<Option<(u32, usize)>> = vec![None; n];
    let mut heap: BinaryHeap<Reverse<(BigInt, usize)>> = BinaryHeap::new();
    dist[start] = Some(BigInt::one());
    heap.push(Reverse((BigInt::one(), start)));
    while let Some(Reverse((d, v))) = heap.pop() {
        if dist[v].as_ref() != Some(&d) {
            continue;
        }
        for &(label, w) in &graph.edges[v] {
            let w = w as usize;
            let nd = &d * &branch_q[label as usize];
            if dist[w].as_ref().map_or(true, |cur| nd < *cur) {
                dist[w] = Some(nd.clone());
                parent[w] = Some((label, v));
                heap.push(Reverse((nd, w)));
            }
        }
    }
    (dist, parent)
}

/// Minimal-product cycle through `x`: Dijkstra from `x`, then close with the
/// cheapest incoming edge of `x`.
fn min_cycle_through(graph: &FiberGraph, x: usize, branch_q: &[BigInt]) -> Option<(BigInt, Vec<usize>)> {
    let (dist, parent) = dijkstra_products(graph, x, branch_q);
    let mut best: Option<(BigInt, u32, usize)> = None;
    for &(label, u) in &graph.redges[x] {
        let u = u as usize;
        let Some(ref du) = dist[u] else { continue };
        let total = du * &branch_q[label as usize];
        if best.as_ref().map_or(true, |(b, _, _)| total < *b) {
            best = Some((total, label, u));
        }
    }
    let (total, closing_label, u) = best?;
    let mut labels = vec![closing_label as usize];
    let mut cur = u;
    while cur != x {
        let (l, prev) = parent[cur].expect("Dijkstra parent chain");
        labels.push(l as usize);
        cur = prev;
    }
    labels.reverse();
    Some((total, labels))
}
