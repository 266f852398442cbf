//! Generic best-first search shared by all planners.
//!
//! A planner plugs in by implementing [`NodeInterface`]: successor
//! generation with traversal costs, a heuristic, a goal test and an optional
//! analytic (closed-form) expansion toward the goal.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::hash::Hash;
use std::time::{Duration, Instant};

use rustc_hash::FxHashMap;
use thiserror::Error;

/// A successor produced by [`NodeInterface::neighbors`].
#[derive(Debug, Clone)]
pub struct Successor<S> {
    pub state: S,
    /// Traversal cost of the edge (already penalized).
    pub cost: f64,
    /// Primitive or move id, recorded for the path.
    pub motion: u32,
}

/// Result of a successful analytic expansion.
#[derive(Debug, Clone)]
pub struct AnalyticExpansion<A> {
    pub suffix: A,
    pub cost: f64,
}

pub trait NodeInterface {
    type State: Clone;
    type Suffix;

    /// Discrete key, unique within the quantization.
    fn key(&self, state: &Self::State) -> u64;

    /// Number of distinct keys when keys are dense indices; `None` makes the
    /// engine use a hash map instead.
    fn dense_key_space(&self) -> Option<usize> {
        None
    }

    /// Successors of `state`. `motion` is the move that produced `state`
    /// (`None` at the root), needed for sequence-dependent penalties.
    fn neighbors(&mut self, state: &Self::State, motion: Option<u32>, out: &mut Vec<Successor<Self::State>>);

    /// Cost-to-goal estimate; `f64::INFINITY` prunes the state.
    fn heuristic(&mut self, state: &Self::State) -> f64;

    fn is_goal(&self, state: &Self::State) -> bool;

    fn try_analytic_expansion(&mut self, _state: &Self::State) -> Option<AnalyticExpansion<Self::Suffix>> {
        None
    }

    /// Whether a closed node found again at lower cost is expanded again.
    /// Interfaces whose states carry continuous data their successors were
    /// built from should decline, keeping parent and child consistent.
    fn reopen_closed(&self) -> bool {
        true
    }

    /// Typical primitive length, used to schedule analytic expansions.
    fn primitive_length(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchLimits {
    pub max_iterations: usize,
    pub max_planning_time: Duration,
    pub goal_xy_tolerance: f64,
    pub goal_heading_tolerance: f64,
}

impl Default for SearchLimits {
    fn default() -> Self {
        Self {
            max_iterations: 5_000_000,
            max_planning_time: Duration::from_secs(30),
            goal_xy_tolerance: 0.25,
            goal_heading_tolerance: std::f64::consts::PI / 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub limits: SearchLimits,
    /// Analytic expansion is attempted every `ceil(h / (ratio · primitive
    /// length))` expansions; `None` disables it.
    pub analytic_ratio: Option<f64>,
    /// A successful analytic expansion is held as the incumbent solution and
    /// returned once the lowest open `f` times this factor reaches its total
    /// cost. 1 returns it only when no open node can do better under an
    /// admissible heuristic; `f64::INFINITY` returns it at once.
    pub analytic_acceptance: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            limits: SearchLimits::default(),
            analytic_ratio: Some(3.5),
            analytic_acceptance: 1.0,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SearchError {
    #[error("no path exists ({expansions} expansions)")]
    NoPathExists { expansions: usize },
    #[error("iteration limit reached after {expansions} expansions")]
    IterationLimit { expansions: usize },
    #[error("planning time limit reached after {expansions} expansions")]
    TimeLimit { expansions: usize },
    #[error("parent chain is broken")]
    BrokenParentChain,
}

#[derive(Debug, Clone)]
pub struct SearchResult<S, A> {
    /// States from start to the last searched node, root first.
    pub states: Vec<S>,
    pub keys: Vec<u64>,
    /// Motion id that produced each state (`None` for the root).
    pub motions: Vec<Option<u32>>,
    /// Accumulated cost of the last searched node.
    pub g: f64,
    /// Total cost including the analytic suffix, when present.
    pub total_cost: f64,
    pub analytic_suffix: Option<A>,
    pub expansions: usize,
    /// Nodes expanded again after being closed with a worse cost.
    pub reexpansions: usize,
}

const NO_PARENT: u32 = u32::MAX;

struct NodeRecord<S> {
    key: u64,
    state: S,
    g: f64,
    parent: u32,
    motion: Option<u32>,
    closed: bool,
}

enum SlotMap {
    Dense(Vec<u32>),
    Hashed(FxHashMap<u64, u32>),
}

impl SlotMap {
    fn get(&self, key: u64) -> Option<u32> {
        match self {
            SlotMap::Dense(v) => match v[key as usize] {
                NO_PARENT => None,
                s => Some(s),
            },
            SlotMap::Hashed(m) => m.get(&key).copied(),
        }
    }

    fn insert(&mut self, key: u64, slot: u32) {
        match self {
            SlotMap::Dense(v) => v[key as usize] = slot,
            SlotMap::Hashed(m) => {
                m.insert(key, slot);
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    key: u64,
    slot: u32,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    // BinaryHeap is a max-heap: "greater" pops first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| self.g.total_cmp(&other.g))
            .then_with(|| other.key.cmp(&self.key))
    }
}

/// Best-first search from `start` until `iface.is_goal` holds for a popped
/// node or an analytic solution is accepted (see
/// [`SearchOptions::analytic_acceptance`]).
pub fn a_star<I: NodeInterface>(
    iface: &mut I,
    start: I::State,
    options: &SearchOptions,
) -> Result<SearchResult<I::State, I::Suffix>, SearchError> {
    let clock = Instant::now();
    let limits = &options.limits;
    let mut slots = match iface.dense_key_space() {
        Some(n) => SlotMap::Dense(vec![NO_PARENT; n]),
        None => SlotMap::Hashed(FxHashMap::default()),
    };
    let mut nodes: Vec<NodeRecord<I::State>> = Vec::new();
    let mut open = BinaryHeap::new();
    let mut successors = Vec::new();
    let reopen = iface.reopen_closed();

    let h0 = iface.heuristic(&start);
    if !h0.is_finite() {
        return Err(SearchError::NoPathExists { expansions: 0 });
    }
    let k0 = iface.key(&start);
    slots.insert(k0, 0);
    nodes.push(NodeRecord {
        key: k0,
        state: start,
        g: 0.0,
        parent: NO_PARENT,
        motion: None,
        closed: false,
    });
    open.push(OpenEntry {
        f: h0,
        g: 0.0,
        key: k0,
        slot: 0,
    });

    let prim_len = iface.primitive_length().max(1e-9);
    let analytic_interval = |h: f64, ratio: f64| ((h / (ratio * prim_len)).ceil() as usize).max(1);
    let mut next_analytic = options.analytic_ratio.map(|r| analytic_interval(h0, r));
    let mut since_analytic = 0usize;
    let mut expansions = 0usize;
    let mut reexpansions = 0usize;
    // best analytic solution so far: (slot, suffix, suffix cost)
    let mut incumbent: Option<(usize, I::Suffix, f64)> = None;
    let total = |nodes: &[NodeRecord<I::State>], inc: &Option<(usize, I::Suffix, f64)>| {
        inc.as_ref().map_or(f64::INFINITY, |(s, _, c)| nodes[*s].g + c)
    };
    let accept = |nodes: &[NodeRecord<I::State>], inc: Option<(usize, I::Suffix, f64)>, expansions, reexpansions| {
        let (slot, suffix, cost) = inc.expect("incumbent present");
        let g = nodes[slot].g;
        let mut res = finish(nodes, slot, g, Some(suffix), expansions, reexpansions)?;
        res.total_cost = g + cost;
        Ok(res)
    };

    while let Some(entry) = open.pop() {
        let slot = entry.slot as usize;
        if nodes[slot].closed || entry.g > nodes[slot].g {
            continue;
        }
        if incumbent.is_some() && total(&nodes, &incumbent) <= entry.f * options.analytic_acceptance {
            return accept(&nodes, incumbent, expansions, reexpansions);
        }
        if iface.is_goal(&nodes[slot].state) {
            let g = nodes[slot].g;
            if total(&nodes, &incumbent) < g {
                return accept(&nodes, incumbent, expansions, reexpansions);
            }
            return finish(&nodes, slot, g, None, expansions, reexpansions);
        }
        let out_of_budget = if expansions >= limits.max_iterations {
            Some(SearchError::IterationLimit { expansions })
        } else if expansions.is_multiple_of(256) && clock.elapsed() > limits.max_planning_time {
            Some(SearchError::TimeLimit { expansions })
        } else {
            None
        };
        if let Some(e) = out_of_budget {
            return match incumbent {
                Some(_) => accept(&nodes, incumbent, expansions, reexpansions),
                None => Err(e),
            };
        }
        nodes[slot].closed = true;
        expansions += 1;

        if let (Some(ratio), Some(interval)) = (options.analytic_ratio, next_analytic) {
            since_analytic += 1;
            if since_analytic >= interval {
                since_analytic = 0;
                let state = nodes[slot].state.clone();
                if let Some(exp) = iface.try_analytic_expansion(&state) {
                    if nodes[slot].g + exp.cost < total(&nodes, &incumbent) {
                        incumbent = Some((slot, exp.suffix, exp.cost));
                    }
                    if incumbent.is_some() && total(&nodes, &incumbent) <= entry.f * options.analytic_acceptance {
                        return accept(&nodes, incumbent, expansions, reexpansions);
                    }
                }
                let h = entry.f - entry.g;
                next_analytic = Some(analytic_interval(h, ratio));
            }
        }

        let g = nodes[slot].g;
        let motion = nodes[slot].motion;
        successors.clear();
        iface.neighbors(&nodes[slot].state, motion, &mut successors);
        for succ in successors.drain(..) {
            debug_assert!(succ.cost >= 0.0);
            let ng = g + succ.cost;
            let key = iface.key(&succ.state);
            let target = match slots.get(key) {
                Some(s) => {
                    let rec = &mut nodes[s as usize];
                    if ng >= rec.g || (rec.closed && !reopen) {
                        continue;
                    }
                    if rec.closed {
                        rec.closed = false;
                        reexpansions += 1;
                    }
                    rec.g = ng;
                    rec.state = succ.state;
                    rec.parent = slot as u32;
                    rec.motion = Some(succ.motion);
                    s
                }
                None => {
                    let s = nodes.len() as u32;
                    slots.insert(key, s);
                    nodes.push(NodeRecord {
                        key,
                        state: succ.state,
                        g: ng,
                        parent: slot as u32,
                        motion: Some(succ.motion),
                        closed: false,
                    });
                    s
                }
            };
            let h = iface.heuristic(&nodes[target as usize].state);
            if !h.is_finite() {
                continue;
            }
            open.push(OpenEntry {
                f: ng + h,
                g: ng,
                key,
                slot: target,
            });
        }
    }
    if incumbent.is_some() {
        return accept(&nodes, incumbent, expansions, reexpansions);
    }
    Err(SearchError::NoPathExists { expansions })
}

fn finish<S: Clone, A>(
    nodes: &[NodeRecord<S>],
    last: usize,
    g: f64,
    suffix: Option<A>,
    expansions: usize,
    reexpansions: usize,
) -> Result<SearchResult<S, A>, SearchError> {
    let mut chain = Vec::new();
    let mut cur = last as u32;
    while cur != NO_PARENT {
        if chain.len() > nodes.len() {
            return Err(SearchError::BrokenParentChain);
        }
        chain.push(cur as usize);
        cur = nodes[cur as usize].parent;
    }
    chain.reverse();
    Ok(SearchResult {
        states: chain.iter().map(|&s| nodes[s].state.clone()).collect(),
        keys: chain.iter().map(|&s| nodes[s].key).collect(),
        motions: chain.iter().map(|&s| nodes[s].motion).collect(),
        g,
        total_cost: g,
        analytic_suffix: suffix,
        expansions,
        reexpansions,
    })
}

/// Follows parent links from `goal` back to the root; the result is root
/// first. Fails on a missing link or a cycle.
pub fn trace_back<K: Copy + Eq + Hash>(parents: &FxHashMap<K, Option<K>>, goal: K) -> Result<Vec<K>, SearchError> {
    let mut out = vec![goal];
    let mut cur = goal;
    loop {
        match parents.get(&cur) {
            None => return Err(SearchError::BrokenParentChain),
            Some(None) => break,
            Some(Some(p)) => {
                if out.len() > parents.len() {
                    return Err(SearchError::BrokenParentChain);
                }
                out.push(*p);
                cur = *p;
            }
        }
    }
    out.reverse();
    Ok(out)
}
