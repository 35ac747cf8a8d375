//! Orbits of a point under a finitely generated semigroup of rational maps:
//! exact enumeration by height, preperiodicity, and the height-sum
//! constant that fixes the leading term of the function count.
//!
//! Everything is built on one primitive: the deduplicated graph of orbit
//! points reachable from the base point, where a node is expanded unless
//! its height is surely above a threshold. Once a point's height exceeds
//! `2 C_S` every image is strictly higher, so cutting there loses nothing
//! below the threshold.

use crate::error::{invalid, Error, Result};
use crate::p1::{ln_big, ProjPointQ, RationalMapQ};
use crate::weights::{acyclic_constant, classify, GrowthExponent, WeightVector};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{HashMap, VecDeque};
use std::fmt;

/// Default cap on graph nodes, enumerated words and tracked words.
pub const DEFAULT_BUDGET: usize = 2_000_000;

/// Relative slack below which a height is not considered surely above a
/// pruning threshold. Ambiguous nodes are expanded, never pruned.
const PRUNE_SLACK: f64 = 1e-9;
/// Relative width of the tie band for real cutoffs.
const TIE_SLACK: f64 = 1e-12;

/// Generators with their derived height constants.
#[derive(Clone, Debug)]
pub struct SemigroupSystem {
    maps: Vec<RationalMapQ>,
    degrees: WeightVector,
    offsets: Vec<f64>,
    c_s: f64,
}

impl SemigroupSystem {
    pub fn new(maps: Vec<RationalMapQ>) -> Result<Self> {
        if maps.is_empty() {
            return Err(invalid("a semigroup needs at least one generator"));
        }
        let degrees = WeightVector::new(maps.iter().map(|m| m.degree() as u64).collect())?;
        let offsets = maps
            .iter()
            .map(|m| m.height_offset_bound())
            .collect::<Result<Vec<f64>>>()?;
        let c_s = offsets.iter().copied().fold(0.0, f64::max);
        if !c_s.is_finite() {
            return Err(Error::InvariantBroken("height offset is not finite".into()));
        }
        Ok(SemigroupSystem {
            maps,
            degrees,
            offsets,
            c_s,
        })
    }

    pub fn maps(&self) -> &[RationalMapQ] {
        &self.maps
    }

    pub fn rank(&self) -> usize {
        self.maps.len()
    }

    pub fn degrees(&self) -> &WeightVector {
        &self.degrees
    }

    /// Per-generator height offsets `C_phi`.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    /// `C_S = max C_phi`.
    pub fn c_s(&self) -> f64 {
        self.c_s
    }

    /// Smallest generator degree.
    pub fn d_s(&self) -> u64 {
        self.degrees.min()
    }

    pub fn max_degree(&self) -> u64 {
        self.degrees.max()
    }

    /// `C_S / (d_S - 1)`, the bound on `|h(f(P))/deg f - h(P)|`.
    pub fn b_s(&self) -> f64 {
        self.c_s / (self.d_s() - 1) as f64
    }

    /// `2 C_S`: above this height every image is strictly higher.
    pub fn escape_threshold(&self) -> f64 {
        2.0 * self.c_s
    }
}

/// An element of the semigroup as a sequence of generator indices
/// (0-based), in application order: `[i, j]` means apply `phi_i`, then
/// `phi_j`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(indices: Vec<usize>) -> Self {
        Word(indices)
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// This word followed by one more generator.
    pub fn push(&self, i: usize) -> Word {
        let mut v = self.0.clone();
        v.push(i);
        Word(v)
    }

    /// Product of the generator degrees.
    pub fn degree(&self, degrees: &WeightVector) -> BigUint {
        self.0
            .iter()
            .fold(BigUint::one(), |acc, &i| acc * degrees.as_slice()[i])
    }

    pub fn apply(&self, system: &SemigroupSystem, p: &ProjPointQ) -> ProjPointQ {
        self.0
            .iter()
            .fold(p.clone(), |q, &i| system.maps[i].evaluate(&q))
    }
}

impl fmt::Display for Word {
    /// Composition notation, outermost first: `[0, 1]` prints `phi2∘phi1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "id");
        }
        let parts: Vec<String> = self.0.iter().rev().map(|i| format!("phi{}", i + 1)).collect();
        write!(f, "{}", parts.join("∘"))
    }
}

/// Height cutoff for a census.
#[derive(Clone, Debug, PartialEq)]
pub enum Cutoff {
    /// Height at most this many nats.
    Nats(f64),
    /// Height at most `ln n`, decided exactly by `max(|x|, |y|) <= n`.
    LnOf(BigUint),
}

impl Cutoff {
    pub fn nats(&self) -> f64 {
        match self {
            Cutoff::Nats(x) => *x,
            Cutoff::LnOf(n) => ln_big(n),
        }
    }

    fn admission(&self) -> Admission {
        match self {
            Cutoff::LnOf(n) => Admission::Exact(n.clone()),
            Cutoff::Nats(x) => {
                // a cutoff within rounding of ln n for a float-exact
                // integer n is treated as exactly ln n
                if *x >= 0.0 && *x < 36.0 {
                    let n = x.exp().round();
                    if n >= 1.0 && (n.ln() - x).abs() <= TIE_SLACK * x.max(1.0) {
                        return Admission::Exact(BigUint::from_f64(n).unwrap());
                    }
                }
                Admission::Float(*x)
            }
        }
    }
}

enum Admission {
    Exact(BigUint),
    Float(f64),
}

impl Admission {
    fn admits(&self, size: &BigUint, height: f64) -> bool {
        match self {
            Admission::Exact(n) => size <= n,
            Admission::Float(x) => height <= x + TIE_SLACK * x.abs().max(1.0),
        }
    }
}

fn surely_above(height: f64, threshold: f64) -> bool {
    height > threshold + PRUNE_SLACK * threshold.abs().max(1.0)
}

/// Exact count that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Count {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Count::Finite(n) => write!(f, "{n}"),
            Count::Infinite => write!(f, "inf"),
        }
    }
}

// ---------------------------------------------------------------------------
// Point graph

struct Node {
    point: ProjPointQ,
    size: BigUint,
    height: f64,
    /// Length of the shortest word reaching this node (0 for the base).
    depth: usize,
    /// Images under each generator, when expanded.
    children: Option<Vec<usize>>,
}

struct OrbitGraph {
    nodes: Vec<Node>,
}

const ROOT: usize = 0;

impl OrbitGraph {
    /// Breadth-first closure from `root`. A node is expanded unless its
    /// height is surely above `threshold` or it sits at `max_depth`.
    fn explore(
        system: &SemigroupSystem,
        root: &ProjPointQ,
        threshold: f64,
        max_depth: Option<usize>,
        budget: usize,
    ) -> Result<Self> {
        let expandable =
            |h: f64, depth: usize| !surely_above(h, threshold) && max_depth.is_none_or(|d| depth < d);
        let size = root.size();
        let height = ln_big(&size);
        let mut nodes = vec![Node {
            point: root.clone(),
            size,
            height,
            depth: 0,
            children: None,
        }];
        let mut index: HashMap<ProjPointQ, usize> = HashMap::from([(root.clone(), ROOT)]);
        let mut frontier = if expandable(height, 0) { vec![ROOT] } else { Vec::new() };
        while !frontier.is_empty() {
            let images: Vec<Vec<(ProjPointQ, BigUint, f64)>> = frontier
                .par_iter()
                .map(|&id| {
                    system
                        .maps
                        .iter()
                        .map(|m| {
                            let q = m.evaluate(&nodes[id].point);
                            let s = q.size();
                            let h = ln_big(&s);
                            (q, s, h)
                        })
                        .collect()
                })
                .collect();
            let mut next = Vec::new();
            for (&id, kids) in frontier.iter().zip(images) {
                let depth = nodes[id].depth + 1;
                let mut ids = Vec::with_capacity(kids.len());
                for (q, s, h) in kids {
                    let cid = match index.get(&q) {
                        Some(&c) => c,
                        None => {
                            if nodes.len() >= budget {
                                return Err(Error::ResourceLimit(format!(
                                    "orbit graph exceeded {budget} points"
                                )));
                            }
                            let c = nodes.len();
                            index.insert(q.clone(), c);
                            nodes.push(Node {
                                point: q,
                                size: s,
                                height: h,
                                depth,
                                children: None,
                            });
                            if expandable(h, depth) {
                                next.push(c);
                            }
                            c
                        }
                    };
                    ids.push(cid);
                }
                nodes[id].children = Some(ids);
            }
            frontier = next;
        }
        Ok(OrbitGraph { nodes })
    }

    fn children(&self, v: usize) -> &[usize] {
        self.nodes[v].children.as_deref().unwrap_or(&[])
    }

    /// Nodes lying on a directed cycle (strong component of size > 1 or a
    /// self-loop), by Kosaraju's algorithm.
    fn on_cycle(&self) -> Vec<bool> {
        let n = self.nodes.len();
        let mut order = Vec::with_capacity(n);
        let mut seen = vec![false; n];
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut stack = vec![(s, 0usize)];
            while let Some(&mut (v, ref mut k)) = stack.last_mut() {
                let kids = self.children(v);
                if *k < kids.len() {
                    let c = kids[*k];
                    *k += 1;
                    if !seen[c] {
                        seen[c] = true;
                        stack.push((c, 0));
                    }
                } else {
                    order.push(v);
                    stack.pop();
                }
            }
        }
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            for &c in self.children(v) {
                rev[c].push(v);
            }
        }
        let mut comp = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for &s in order.iter().rev() {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut count = 0;
            let mut stack = vec![s];
            comp[s] = id;
            while let Some(v) = stack.pop() {
                count += 1;
                for &p in &rev[v] {
                    if comp[p] == usize::MAX {
                        comp[p] = id;
                        stack.push(p);
                    }
                }
            }
            sizes.push(count);
        }
        (0..n)
            .map(|v| sizes[comp[v]] > 1 || self.children(v).contains(&v))
            .collect()
    }

    /// For each node, whether some admitted node is reachable from it in
    /// at least one step.
    fn leads_to(&self, admitted: &[bool]) -> Vec<bool> {
        let n = self.nodes.len();
        let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut useful = vec![false; n];
        let mut work = Vec::new();
        for v in 0..n {
            for &c in self.children(v) {
                rev[c].push(v);
                if admitted[c] && !useful[v] {
                    useful[v] = true;
                    work.push(v);
                }
            }
        }
        while let Some(v) = work.pop() {
            for &p in &rev[v] {
                if !useful[p] {
                    useful[p] = true;
                    work.push(p);
                }
            }
        }
        useful
    }

    /// Shortest words of length at least 1 from `start` to every node, in
    /// breadth-first discovery order (generators in input order).
    fn words_from(&self, start: usize) -> (Vec<usize>, Vec<Option<Word>>) {
        let n = self.nodes.len();
        let mut word: Vec<Option<Word>> = vec![None; n];
        let mut order = Vec::new();
        let mut queue = VecDeque::new();
        for (i, &c) in self.children(start).iter().enumerate() {
            if word[c].is_none() {
                word[c] = Some(Word(vec![i]));
                order.push(c);
                queue.push_back(c);
            }
        }
        while let Some(v) = queue.pop_front() {
            let base = word[v].clone().unwrap();
            for (i, &c) in self.children(v).iter().enumerate() {
                if word[c].is_none() {
                    word[c] = Some(base.push(i));
                    order.push(c);
                    queue.push_back(c);
                }
            }
        }
        (order, word)
    }

    /// First node in breadth-first order from the base (at least one step
    /// away) that lies on a cycle and satisfies `accept`, with the word
    /// reaching it and the shortest word cycling back to it.
    fn cycle_witness(&self, accept: impl Fn(usize) -> bool) -> Option<(usize, Word, Word)> {
        let cyc = self.on_cycle();
        let (order, words) = self.words_from(ROOT);
        let v = order.into_iter().find(|&v| cyc[v] && accept(v))?;
        let (_, back) = self.words_from(v);
        let g = back[v].clone()?;
        Some((v, words[v].clone().unwrap(), g))
    }

    /// Nodes reachable from the base in at least one step.
    fn reached(&self) -> Vec<bool> {
        let mut r = vec![false; self.nodes.len()];
        for v in 0..self.nodes.len() {
            for &c in self.children(v) {
                r[c] = true;
            }
        }
        r
    }
}

// ---------------------------------------------------------------------------
// Census

/// A semigroup element with `g(f(P)) = f(P)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CycleWitness {
    pub f: Word,
    pub g: Word,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CensusEntry {
    pub word: Word,
    pub point: ProjPointQ,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistinctPoint {
    pub point: ProjPointQ,
    pub height: f64,
    /// First word (shortest, then generator order) reaching the point.
    pub witness: Word,
    /// Number of enumerated words reaching the point.
    pub fiber: usize,
}

/// A pair of distinct words with the same image of the base point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Collision {
    pub first: Word,
    pub second: Word,
    pub point: ProjPointQ,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// Just below a jump.
    Below,
    /// At a jump, inclusive.
    At,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaSample {
    pub x: f64,
    pub side: Side,
    pub count: usize,
    pub theta: f64,
}

/// Options bounding a census.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CensusOptions {
    /// Only words of at most this length.
    pub max_depth: Option<usize>,
    pub budget: usize,
}

impl Default for CensusOptions {
    fn default() -> Self {
        CensusOptions {
            max_depth: None,
            budget: DEFAULT_BUDGET,
        }
    }
}

/// Every semigroup element (optionally of bounded length) whose image of
/// the base point has height at most the cutoff.
#[derive(Clone, Debug)]
pub struct OrbitCensus {
    base: ProjPointQ,
    cutoff: Cutoff,
    max_depth: Option<usize>,
    entries: Vec<CensusEntry>,
    distinct: Vec<DistinctPoint>,
    func_heights: Vec<f64>,
    point_heights: Vec<f64>,
    infinite: Option<CycleWitness>,
}

impl OrbitCensus {
    pub fn base(&self) -> &ProjPointQ {
        &self.base
    }

    pub fn cutoff(&self) -> &Cutoff {
        &self.cutoff
    }

    pub fn max_depth(&self) -> Option<usize> {
        self.max_depth
    }

    /// Words in breadth-first order (by length, then generator order).
    /// Empty when the count is infinite.
    pub fn entries(&self) -> &[CensusEntry] {
        &self.entries
    }

    /// Orbit points within the cutoff, in order of first discovery.
    pub fn distinct_points(&self) -> &[DistinctPoint] {
        &self.distinct
    }

    /// Set when infinitely many words land within the cutoff: a periodic
    /// cycle below the cutoff is reachable.
    pub fn cycle(&self) -> Option<&CycleWitness> {
        self.infinite.as_ref()
    }

    pub fn is_infinite(&self) -> bool {
        self.infinite.is_some()
    }

    /// Number of words with height at most `x` (`x` at most the cutoff).
    pub fn n_funcs(&self, x: f64) -> Count {
        if self.infinite.is_some() {
            return Count::Infinite;
        }
        Count::Finite(self.func_heights.partition_point(|&h| h <= x))
    }

    /// Number of distinct orbit points with height at most `x`.
    pub fn n_points(&self, x: f64) -> usize {
        self.point_heights.partition_point(|&h| h <= x)
    }

    /// Total words within the cutoff.
    pub fn total_funcs(&self) -> Count {
        if self.infinite.is_some() {
            Count::Infinite
        } else {
            Count::Finite(self.entries.len())
        }
    }

    /// Sorted heights of all enumerated words.
    pub fn function_heights(&self) -> &[f64] {
        &self.func_heights
    }

    /// Sorted heights of the distinct points.
    pub fn point_heights(&self) -> &[f64] {
        &self.point_heights
    }

    /// For each point reached by several words, the first witness paired
    /// with each later one.
    pub fn collisions(&self) -> Vec<Collision> {
        let mut by_point: HashMap<&ProjPointQ, &Word> = HashMap::new();
        let mut out = Vec::new();
        for e in &self.entries {
            match by_point.get(&e.point) {
                Some(&w) => out.push(Collision {
                    first: w.clone(),
                    second: e.word.clone(),
                    point: e.point.clone(),
                }),
                None => {
                    by_point.insert(&e.point, &e.word);
                }
            }
        }
        out
    }

    /// Largest number of words sharing one image.
    pub fn fiber_max(&self) -> usize {
        self.distinct.iter().map(|d| d.fiber).max().unwrap_or(0)
    }

    /// `max |h(f(P)) / deg f - h(P)|` over the enumerated words.
    pub fn max_height_drift(&self, degrees: &WeightVector) -> f64 {
        let h0 = self.base.height();
        self.entries
            .iter()
            .map(|e| {
                let ln_deg: f64 = e
                    .word
                    .indices()
                    .iter()
                    .map(|&i| (degrees.as_slice()[i] as f64).ln())
                    .sum();
                let scaled = if e.height == 0.0 { 0.0 } else { (e.height.ln() - ln_deg).exp() };
                (scaled - h0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `N_funcs(X) / X^rho` just below and at every jump of the count.
    pub fn theta_samples(&self, rho: f64) -> Vec<ThetaSample> {
        let mut jumps: Vec<f64> = self.func_heights.iter().copied().filter(|&h| h > 0.0).collect();
        jumps.dedup();
        let mut out = Vec::with_capacity(2 * jumps.len());
        for &x in &jumps {
            let below = self.func_heights.partition_point(|&h| h < x);
            let at = self.func_heights.partition_point(|&h| h <= x);
            let scale = x.powf(rho);
            out.push(ThetaSample {
                x,
                side: Side::Below,
                count: below,
                theta: below as f64 / scale,
            });
            out.push(ThetaSample {
                x,
                side: Side::At,
                count: at,
                theta: at as f64 / scale,
            });
        }
        out
    }

    /// Least-squares slope of `ln N_points(X)` against `ln X`, sampled at
    /// every positive point height. `None` with fewer than two samples.
    pub fn point_growth_slope(&self) -> Option<f64> {
        let mut samples = Vec::new();
        let mut k = 0;
        while k < self.point_heights.len() {
            let x = self.point_heights[k];
            let mut j = k;
            while j < self.point_heights.len() && self.point_heights[j] == x {
                j += 1;
            }
            if x > 0.0 {
                samples.push((x.ln(), (j as f64).ln()));
            }
            k = j;
        }
        least_squares_slope(&samples)
    }
}

/// Slope of the ordinary least-squares line through `(x, y)` samples.
pub fn least_squares_slope(samples: &[(f64, f64)]) -> Option<f64> {
    if samples.len() < 2 {
        return None;
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|s| s.0).sum::<f64>() / n;
    let my = samples.iter().map(|s| s.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|s| (s.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = samples.iter().map(|s| (s.0 - mx) * (s.1 - my)).sum();
    Some(sxy / sxx)
}

/// Enumerates every word whose image of `p` lies within `cutoff`.
///
/// Without a depth limit the count can be infinite; that happens exactly
/// when a cycle of orbit points is reachable from which the cutoff region
/// is reachable again, and the census then carries the cycle instead of
/// entries.
pub fn orbit_census(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    cutoff: &Cutoff,
    options: CensusOptions,
) -> Result<OrbitCensus> {
    match cutoff {
        Cutoff::Nats(x) if !(*x > 0.0) || !x.is_finite() => {
            return Err(invalid("census cutoff must be a positive finite height"))
        }
        Cutoff::LnOf(n) if *n < BigUint::from(2u32) => {
            return Err(invalid("census cutoff ln n needs n >= 2"))
        }
        _ => {}
    }
    let admission = cutoff.admission();
    let threshold = cutoff.nats().max(system.escape_threshold());
    let graph = OrbitGraph::explore(system, p, threshold, options.max_depth, options.budget)?;
    let admitted: Vec<bool> = graph
        .nodes
        .iter()
        .map(|n| admission.admits(&n.size, n.height))
        .collect();
    let useful = graph.leads_to(&admitted);

    let mut census = OrbitCensus {
        base: p.clone(),
        cutoff: cutoff.clone(),
        max_depth: options.max_depth,
        entries: Vec::new(),
        distinct: Vec::new(),
        func_heights: Vec::new(),
        point_heights: Vec::new(),
        infinite: None,
    };

    if options.max_depth.is_none() {
        if let Some((_, f, g)) = graph.cycle_witness(|v| useful[v]) {
            // finitely many points, infinitely many words
            let (order, words) = graph.words_from(ROOT);
            for v in order {
                if admitted[v] {
                    let n = &graph.nodes[v];
                    census.distinct.push(DistinctPoint {
                        point: n.point.clone(),
                        height: n.height,
                        witness: words[v].clone().unwrap(),
                        fiber: usize::MAX,
                    });
                }
            }
            census.point_heights = sorted(census.distinct.iter().map(|d| d.height).collect());
            census.infinite = Some(CycleWitness { f, g });
            return Ok(census);
        }
    }

    let mut fiber: HashMap<usize, usize> = HashMap::new();
    let mut first_seen: Vec<usize> = Vec::new();
    let mut level: Vec<(usize, Word)> = vec![(ROOT, Word::default())];
    let mut states = 0usize;
    let mut len = 0usize;
    while !level.is_empty() {
        len += 1;
        if options.max_depth.is_some_and(|d| len > d) {
            break;
        }
        let mut next = Vec::new();
        for (v, w) in &level {
            for (i, &c) in graph.children(*v).iter().enumerate() {
                let word = w.push(i);
                if admitted[c] {
                    let n = &graph.nodes[c];
                    let count = fiber.entry(c).or_insert(0);
                    if *count == 0 {
                        first_seen.push(c);
                        census.distinct.push(DistinctPoint {
                            point: n.point.clone(),
                            height: n.height,
                            witness: word.clone(),
                            fiber: 0,
                        });
                    }
                    *count += 1;
                    census.entries.push(CensusEntry {
                        word: word.clone(),
                        point: n.point.clone(),
                        height: n.height,
                    });
                }
                if useful[c] && graph.nodes[c].children.is_some() {
                    next.push((c, word));
                }
                states += 1;
                if states > options.budget {
                    return Err(Error::ResourceLimit(format!(
                        "census exceeded {} enumerated words",
                        options.budget
                    )));
                }
            }
        }
        level = next;
    }
    for (d, v) in census.distinct.iter_mut().zip(&first_seen) {
        d.fiber = fiber[v];
    }
    census.func_heights = sorted(census.entries.iter().map(|e| e.height).collect());
    census.point_heights = sorted(census.distinct.iter().map(|d| d.height).collect());
    Ok(census)
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Number of semigroup elements `f` with `h(f(P)) <= x`.
pub fn count_functions_by_height(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    x: f64,
    budget: usize,
) -> Result<Count> {
    let census = orbit_census(system, p, &Cutoff::Nats(x), CensusOptions { max_depth: None, budget })?;
    Ok(census.total_funcs())
}

/// `(X, N_funcs(X), N_funcs(X) / X^rho)` on a grid of positive heights.
pub fn theta_ratio(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    grid: &[f64],
    rho: &GrowthExponent,
    budget: usize,
) -> Result<Vec<(f64, usize, f64)>> {
    if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0)) {
        return Err(invalid("theta grid must be nonempty and positive"));
    }
    if is_preperiodic(system, p, budget)?.verdict {
        return Err(invalid(format!("{p} is preperiodic; the function count is infinite")));
    }
    let top = grid.iter().copied().fold(0.0, f64::max);
    let census = orbit_census(system, p, &Cutoff::Nats(top), CensusOptions { max_depth: None, budget })?;
    grid.iter()
        .map(|&x| match census.n_funcs(x) {
            Count::Finite(n) => Ok((x, n, n as f64 / x.powf(rho.rho))),
            Count::Infinite => Err(Error::InvariantBroken(
                "infinite count for a non-preperiodic point".into(),
            )),
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Preperiodicity

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreperiodicVerdict {
    pub verdict: bool,
    /// `f` (nonempty) and `g` (nonempty) with `g(f(P)) = f(P)`.
    pub witness: Option<CycleWitness>,
}

/// Decides whether some orbit point is fixed by a nonempty semigroup
/// element, searching only points of height at most `2 C_S`.
pub fn is_preperiodic(system: &SemigroupSystem, p: &ProjPointQ, budget: usize) -> Result<PreperiodicVerdict> {
    let graph = OrbitGraph::explore(system, p, system.escape_threshold(), None, budget)?;
    let Some((_, f, g)) = graph.cycle_witness(|_| true) else {
        return Ok(PreperiodicVerdict {
            verdict: false,
            witness: None,
        });
    };
    let q = f.apply(system, p);
    if g.apply(system, &q) != q {
        return Err(Error::InvariantBroken(format!(
            "cycle witness ({f}, {g}) failed re-evaluation"
        )));
    }
    Ok(PreperiodicVerdict {
        verdict: true,
        witness: Some(CycleWitness { f, g }),
    })
}

/// True when the orbit of `p` is finite: no orbit point climbs above
/// `2 C_S`.
pub fn orbit_is_finite(system: &SemigroupSystem, p: &ProjPointQ, budget: usize) -> Result<bool> {
    let threshold = system.escape_threshold();
    let graph = OrbitGraph::explore(system, p, threshold, None, budget)?;
    Ok(graph.nodes.iter().all(|n| !surely_above(n.height, threshold)))
}

// ---------------------------------------------------------------------------
// Height sums

/// The caller's assertion that distinct words give distinct maps. Not
/// checked; a generic set in the sense of
/// [`crate::p1::check_generic_set`] is one sufficient condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AssumeFree;

#[derive(Clone, Debug, PartialEq)]
pub struct BetaEstimate {
    pub rho: GrowthExponent,
    /// `beta_sequence[n - 1] = sum over words g of length n of
    /// h(g(P))^(-rho)`.
    pub beta_sequence: Vec<f64>,
    /// Least `n` at which every word of length `n` maps `P` above `2 C_S`.
    pub shift_n: Option<usize>,
    /// `C_S^(-rho) 2^(rho+1) rho` (zero when `C_S = 0`).
    pub k: f64,
    /// `sum_i d_i^(-(rho+1))`.
    pub c_prime: f64,
    rank: usize,
}

impl BetaEstimate {
    /// Bound on `|beta_{n+1} - beta_n|`, valid for `n >= shift_n`.
    pub fn step_bound(&self, n: usize) -> Option<f64> {
        let shift = self.shift_n?;
        if n < shift {
            return None;
        }
        let exp = (n - shift + 1) as i32;
        Some((self.rank as f64).powi(shift as i32) * self.k * self.c_prime.powi(exp))
    }

    /// Bound on `|beta - beta_n|`, the geometric tail of the step bounds.
    pub fn tail_bound_at(&self, n: usize) -> Option<f64> {
        Some(self.step_bound(n)? / (1.0 - self.c_prime))
    }

    /// Tail bound after the last computed term.
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound_at(self.beta_sequence.len())
    }

    /// Last computed term, used as the estimate of the limit.
    pub fn beta(&self) -> f64 {
        *self.beta_sequence.last().unwrap()
    }
}

/// Height of an orbit point tracked without its full coordinates.
///
/// Holds `(x : y) = e^scale * (u : v)` with `max(|u|, |v|) = 1`, plus the
/// coordinates modulo `modulus`, which is enough to recover the exact
/// gcd cancelled at each step because that gcd divides the generator's
/// resultant.
#[derive(Clone)]
struct TrackedPoint {
    scale: f64,
    u: f64,
    v: f64,
    xr: BigInt,
    yr: BigInt,
    modulus: BigInt,
}

impl TrackedPoint {
    fn new(p: &ProjPointQ, modulus: BigInt) -> Self {
        let size = p.size();
        let scale = ln_big(&size);
        let (u, v) = unit_direction(p.x(), p.y(), &size);
        TrackedPoint {
            scale,
            u,
            v,
            xr: p.x().mod_floor(&modulus),
            yr: p.y().mod_floor(&modulus),
            modulus,
        }
    }

    fn step(&self, map: &RationalMapQ) -> Result<TrackedPoint> {
        let d = map.degree() as f64;
        let fu = map.numerator().eval_f64(self.u, self.v);
        let gu = map.denominator().eval_f64(self.u, self.v);
        let m = fu.abs().max(gu.abs());
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvariantBroken("tracked image direction degenerate".into()));
        }
        let res = map.resultant();
        let (g, xr, yr, modulus) = if self.modulus.is_one() {
            (BigInt::one(), BigInt::zero(), BigInt::zero(), BigInt::one())
        } else {
            let fr = map.numerator().eval(&self.xr, &self.yr).mod_floor(&self.modulus);
            let gr = map.denominator().eval(&self.xr, &self.yr).mod_floor(&self.modulus);
            let g = fr.gcd(&gr).gcd(res);
            let modulus = &self.modulus / &g;
            let xr = (fr / &g).mod_floor(&modulus);
            let yr = (gr / &g).mod_floor(&modulus);
            (g, xr, yr, modulus)
        };
        Ok(TrackedPoint {
            scale: d * self.scale + m.ln() - ln_big(g.magnitude()),
            u: fu / m,
            v: gu / m,
            xr,
            yr,
            modulus,
        })
    }
}

/// `(x, y) / max(|x|, |y|)` as floats, exact in the leading bits.
fn unit_direction(x: &BigInt, y: &BigInt, size: &BigUint) -> (f64, f64) {
    let bits = size.bits();
    let shift = bits.saturating_sub(60);
    let scale = |z: &BigInt| -> f64 {
        let m = (z.magnitude() >> shift).to_f64().unwrap();
        if z.is_negative() {
            -m
        } else {
            m
        }
    };
    let s = (size >> shift).to_f64().unwrap();
    (scale(x) / s, scale(y) / s)
}

/// The sequence `beta_n(P) = sum_{|g| = n} h(g(P))^(-rho)` for
/// `n = 1..=n_max`, with the geometric bound on its increments.
pub fn estimate_beta(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    rho: &GrowthExponent,
    n_max: usize,
    _free: AssumeFree,
    budget: usize,
) -> Result<BetaEstimate> {
    if n_max == 0 {
        return Err(invalid("n_max must be at least 1"));
    }
    let r = system.rank();
    let words = (r as f64).powi(n_max as i32);
    if words > budget as f64 {
        return Err(Error::ResourceLimit(format!(
            "{r}^{n_max} words exceed the budget of {budget}"
        )));
    }
    if is_preperiodic(system, p, budget)?.verdict {
        return Err(invalid(format!("{p} is preperiodic")));
    }
    let lcm_res = system
        .maps
        .iter()
        .fold(BigInt::one(), |l, m| l.lcm(m.resultant()));
    let modulus = num_traits::pow(lcm_res, n_max + 1);
    let threshold = system.escape_threshold();
    let mut level = vec![TrackedPoint::new(p, modulus)];
    let mut shift_n = surely_above(level[0].scale, threshold).then_some(0);
    let mut betas = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let next: Vec<TrackedPoint> = level
            .par_iter()
            .map(|t| system.maps.iter().map(|m| t.step(m)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<Vec<_>>>>()?
            .into_iter()
            .flatten()
            .collect();
        let beta: f64 = next.iter().map(|t| (-rho.rho * t.scale.ln()).exp()).sum();
        betas.push(beta);
        if shift_n.is_none() && next.iter().all(|t| surely_above(t.scale, threshold)) {
            shift_n = Some(n);
        }
        level = next;
    }
    let c_s = system.c_s();
    let k = if c_s == 0.0 {
        0.0
    } else {
        c_s.powf(-rho.rho) * 2f64.powf(rho.rho + 1.0) * rho.rho
    };
    let c_prime = system.degrees().g(rho.rho + 1.0);
    Ok(BetaEstimate {
        rho: *rho,
        beta_sequence: betas,
        shift_n,
        k,
        c_prime,
        rank: r,
    })
}

/// `c * beta * X^rho`, the leading term of the function count for
/// acyclic degrees.
pub fn predict_function_count(system: &SemigroupSystem, x: f64, beta: &BetaEstimate) -> Result<f64> {
    let d = system.degrees();
    if classify(d).is_cyclic() {
        return Err(invalid(
            "cyclic degrees: the function count oscillates and has no single leading constant",
        ));
    }
    let c = acyclic_constant(d, &beta.rho)?;
    Ok(c * beta.beta() * x.powf(beta.rho.rho))
}

// ---------------------------------------------------------------------------
// Orbit decomposition and collisions

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Orbit points of height at most `B`.
    pub low: Vec<ProjPointQ>,
    /// Orbit points with `B < h <= 2 d B`, `d` the largest degree.
    pub seeds: Vec<ProjPointQ>,
}

/// Splits an infinite orbit into the finitely many points of height at
/// most `B` and the orbits of the points just above `B`.
///
/// For `B >= C_S` every orbit point above `B` is a seed or lies in a
/// seed's orbit.
pub fn decompose_orbit(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    b: f64,
    budget: usize,
) -> Result<Decomposition> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(invalid("B must be a positive finite height"));
    }
    if orbit_is_finite(system, p, budget)? {
        return Err(invalid(format!("the orbit of {p} is finite")));
    }
    let upper = 2.0 * system.max_degree() as f64 * b;
    let low_cut = Cutoff::Nats(b).admission();
    let high_cut = Cutoff::Nats(upper).admission();
    let graph = OrbitGraph::explore(system, p, upper.max(system.escape_threshold()), None, budget)?;
    let reached = graph.reached();
    let mut low = Vec::new();
    let mut seeds = Vec::new();
    for (v, n) in graph.nodes.iter().enumerate() {
        if !reached[v] {
            continue;
        }
        if low_cut.admits(&n.size, n.height) {
            low.push((n.height, n.point.clone()));
        } else if high_cut.admits(&n.size, n.height) {
            seeds.push((n.height, n.point.clone()));
        }
    }
    let order = |a: &(f64, ProjPointQ), b: &(f64, ProjPointQ)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    low.sort_by(order);
    seeds.sort_by(order);
    Ok(Decomposition {
        low: low.into_iter().map(|x| x.1).collect(),
        seeds: seeds.into_iter().map(|x| x.1).collect(),
    })
}

/// All pairs of distinct words of length at most `max_depth` with the
/// same image of `p`.
pub fn find_collisions(
    system: &SemigroupSystem,
    p: &ProjPointQ,
    max_depth: usize,
    budget: usize,
) -> Result<Vec<Collision>> {
    let r = system.rank() as f64;
    let total: f64 = (1..=max_depth).map(|k| r.powi(k as i32)).sum();
    if total > budget as f64 {
        return Err(Error::ResourceLimit(format!(
            "{total} words up to length {max_depth} exceed the budget of {budget}"
        )));
    }
    let graph = OrbitGraph::explore(system, p, f64::INFINITY, Some(max_depth), budget)?;
    let mut groups: Vec<Vec<Word>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    let mut level: Vec<(usize, Word)> = vec![(ROOT, Word::default())];
    for _ in 0..max_depth {
        let mut next = Vec::new();
        for (v, w) in &level {
            for (i, &c) in graph.children(*v).iter().enumerate() {
                let word = w.push(i);
                let k = *slot.entry(c).or_insert_with(|| {
                    groups.push(Vec::new());
                    groups.len() - 1
                });
                groups[k].push(word.clone());
                next.push((c, word));
            }
        }
        level = next;
    }
    let mut point_of = vec![None; groups.len()];
    for (&v, &k) in &slot {
        point_of[k] = Some(graph.nodes[v].point.clone());
    }
    let mut out = Vec::new();
    for (k, words) in groups.iter().enumerate() {
        for a in 0..words.len() {
            for b in a + 1..words.len() {
                out.push(Collision {
                    first: words[a].clone(),
                    second: words[b].clone(),
                    point: point_of[k].clone().unwrap(),
                });
            }
        }
    }
    Ok(out)
}
