//! Labeled intergenic breakpoint graph: construction, cycle decomposition,
//! classification, counting measures and DOT rendering.

use std::fmt::Write as _;

use thiserror::Error;

use crate::genome::{Gene, Genome, NormalizedPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Plus,
    Minus,
}

/// A graph vertex `±gene`; genes `0` and `m + 1` are the caps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Vertex {
    pub gene: u32,
    pub polarity: Polarity,
}

impl std::fmt::Display for Vertex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = match self.polarity {
            Polarity::Plus => '+',
            Polarity::Minus => '-',
        };
        write!(f, "{sign}{}", self.gene)
    }
}

/// Origin edge `o_index`, joining drawing positions `2(index-1)` and `2(index-1)+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OriginEdge {
    pub index: usize,
    /// Source regions covered by the edge, 1-based and inclusive. More than
    /// one region means alpha genes sit on the edge.
    pub first_region: usize,
    pub last_region: usize,
    pub weight: u64,
    pub alpha: bool,
}

impl OriginEdge {
    pub fn left_position(&self) -> usize {
        2 * (self.index - 1)
    }

    pub fn right_position(&self) -> usize {
        2 * (self.index - 1) + 1
    }

    pub fn regions(&self) -> std::ops::RangeInclusive<usize> {
        self.first_region..=self.last_region
    }
}

/// Target edge `t_x = (+x, -next(x))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TargetEdge {
    pub x: u32,
    pub next: u32,
    pub weight: u64,
    /// Target genes between `x` and `next`, absent from the source.
    pub missing: Vec<u32>,
}

impl TargetEdge {
    pub fn is_labeled(&self) -> bool {
        !self.missing.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Balance {
    Balanced,
    /// Origin weight below target weight.
    Positive,
    /// Origin weight above target weight.
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Oriented,
    NonOriented,
    NotApplicable,
}

/// One alternating cycle with its classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    /// Origin-edge indices in traversal order (starting from the rightmost vertex).
    pub origin: Vec<usize>,
    /// Whether each origin edge was traversed right to left.
    pub right_to_left: Vec<bool>,
    /// Target edges in traversal order, as indices into [`BreakpointGraph::target_edges`].
    pub target: Vec<usize>,
    /// Leftmost drawing position; the canonical cycle key.
    pub leftmost: usize,
    pub origin_weight: u64,
    pub target_weight: u64,
    pub trivial: bool,
    pub labeled: bool,
    pub balance: Balance,
    pub direction: Direction,
    pub orientation: Orientation,
}

impl Cycle {
    pub fn is_good(&self) -> bool {
        self.balance == Balance::Balanced && !self.labeled
    }

    pub fn is_bad(&self) -> bool {
        !self.is_good()
    }

    pub fn is_clean(&self) -> bool {
        !self.labeled
    }

    pub fn is_settled(&self) -> bool {
        self.trivial && self.is_good()
    }

    pub fn is_divergent(&self) -> bool {
        self.direction == Direction::Divergent
    }

    pub fn is_oriented(&self) -> bool {
        self.orientation == Orientation::Oriented
    }
}

/// Counting measures of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphMeasures {
    /// Interior genes of `π^S`, caps excluded.
    pub pi_len: usize,
    pub c: usize,
    pub c_g: usize,
    pub b: i64,
    pub b_g: i64,
}

impl GraphMeasures {
    /// `(Δc, Δc_g)` of moving from `before` to `after`.
    pub fn delta(before: &GraphMeasures, after: &GraphMeasures) -> (i64, i64) {
        (before.b - after.b, before.b_g - after.b_g)
    }
}

/// `(Δc, Δc_g)` between two measure snapshots.
pub fn delta_measures(before: &GraphMeasures, after: &GraphMeasures) -> (i64, i64) {
    GraphMeasures::delta(before, after)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("target must be the identity (+1 ... +m)")]
    TargetNotIdentity,
    #[error("source gene {0} does not belong to the target")]
    UnknownGene(u32),
    #[error("source gene {0} occurs twice")]
    Repeated(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakpointGraph {
    vertices: Vec<Vertex>,
    origin: Vec<OriginEdge>,
    target_edges: Vec<TargetEdge>,
    /// Target edge incident to each drawing position.
    target_at: Vec<usize>,
    /// Other endpoint of that target edge.
    target_mate: Vec<usize>,
    cycles: Vec<Cycle>,
    pi_len: usize,
    m: u32,
}

/// Builds the graph of a normalized pair.
pub fn build_graph(pair: &NormalizedPair) -> BreakpointGraph {
    BreakpointGraph::new(&pair.source, &pair.target).expect("normalized pair")
}

impl BreakpointGraph {
    pub fn new(source: &Genome, target: &Genome) -> Result<BreakpointGraph, GraphError> {
        let m = target.len() as u32;
        if target.genes().iter().enumerate().any(|(k, g)| *g != Gene::forward(k as u32 + 1)) {
            return Err(GraphError::TargetNotIdentity);
        }

        // π^S with caps, and the genome position of each element.
        let n = source.len();
        let mut pi: Vec<i64> = vec![0];
        let mut gpos: Vec<usize> = vec![0];
        let mut present = vec![false; m as usize + 2];
        present[0] = true;
        present[m as usize + 1] = true;
        for (k, gene) in source.genes().iter().enumerate() {
            if let Gene::Id(v) = *gene {
                let id = v.unsigned_abs();
                if id == 0 || id > m {
                    return Err(GraphError::UnknownGene(id));
                }
                if present[id as usize] {
                    return Err(GraphError::Repeated(id));
                }
                present[id as usize] = true;
                pi.push(v as i64);
                gpos.push(k + 1);
            }
        }
        pi.push(m as i64 + 1);
        gpos.push(n + 1);
        let pi_len = pi.len() - 2;

        let positions = 2 * (pi_len + 1);
        let mut vertices = Vec::with_capacity(positions);
        let mut plus_pos = vec![usize::MAX; m as usize + 2];
        let mut minus_pos = vec![usize::MAX; m as usize + 2];
        vertices.push(Vertex { gene: 0, polarity: Polarity::Plus });
        plus_pos[0] = 0;
        for &v in &pi[1..=pi_len] {
            let g = v.unsigned_abs() as u32;
            let (first, second) = if v > 0 {
                (Polarity::Minus, Polarity::Plus)
            } else {
                (Polarity::Plus, Polarity::Minus)
            };
            for pol in [first, second] {
                let p = vertices.len();
                match pol {
                    Polarity::Plus => plus_pos[g as usize] = p,
                    Polarity::Minus => minus_pos[g as usize] = p,
                }
                vertices.push(Vertex { gene: g, polarity: pol });
            }
        }
        minus_pos[m as usize + 1] = vertices.len();
        vertices.push(Vertex { gene: m + 1, polarity: Polarity::Minus });

        let origin: Vec<OriginEdge> = (1..=pi_len + 1)
            .map(|idx| {
                let first_region = gpos[idx - 1] + 1;
                let last_region = gpos[idx];
                let weight = (first_region..=last_region).map(|r| source.region(r)).sum();
                OriginEdge {
                    index: idx,
                    first_region,
                    last_region,
                    weight,
                    alpha: last_region > first_region,
                }
            })
            .collect();

        let mut target_edges = Vec::with_capacity(pi_len + 1);
        let mut target_at = vec![usize::MAX; positions];
        let mut target_mate = vec![usize::MAX; positions];
        let mut x = 0u32;
        while x <= m {
            let mut next = x + 1;
            while !present[next as usize] {
                next += 1;
            }
            let weight = (x + 1..=next).map(|r| target.region(r as usize)).sum();
            let k = target_edges.len();
            target_at[plus_pos[x as usize]] = k;
            target_at[minus_pos[next as usize]] = k;
            target_mate[plus_pos[x as usize]] = minus_pos[next as usize];
            target_mate[minus_pos[next as usize]] = plus_pos[x as usize];
            target_edges.push(TargetEdge {
                x,
                next,
                weight,
                missing: (x + 1..next).collect(),
            });
            x = next;
        }

        let mut graph = BreakpointGraph {
            vertices,
            origin,
            target_edges,
            target_at,
            target_mate,
            cycles: Vec::new(),
            pi_len,
            m,
        };
        graph.cycles = graph.decompose();
        Ok(graph)
    }

    fn decompose(&self) -> Vec<Cycle> {
        let positions = self.vertices.len();
        let mut visited = vec![false; positions];
        let mut cycles = Vec::new();
        for start in (0..positions).rev() {
            if visited[start] {
                continue;
            }
            let mut origin = Vec::new();
            let mut rtl = Vec::new();
            let mut target = Vec::new();
            let mut leftmost = start;
            let mut v = start;
            loop {
                let u = v ^ 1;
                visited[v] = true;
                visited[u] = true;
                leftmost = leftmost.min(u).min(v);
                origin.push(v / 2 + 1);
                rtl.push(u < v);
                target.push(self.target_at[u]);
                let w = self.target_mate[u];
                if w == start {
                    break;
                }
                v = w;
            }
            cycles.push(self.classify(origin, rtl, target, leftmost));
        }
        cycles.sort_by_key(|c| c.leftmost);
        cycles
    }

    fn classify(&self, origin: Vec<usize>, rtl: Vec<bool>, target: Vec<usize>, leftmost: usize) -> Cycle {
        let origin_weight = origin.iter().map(|&i| self.origin[i - 1].weight).sum::<u64>();
        let target_weight = target.iter().map(|&t| self.target_edges[t].weight).sum::<u64>();
        let labeled = origin.iter().any(|&i| self.origin[i - 1].alpha)
            || target.iter().any(|&t| self.target_edges[t].is_labeled());
        let trivial = origin.len() == 1;
        let balance = match origin_weight.cmp(&target_weight) {
            std::cmp::Ordering::Equal => Balance::Balanced,
            std::cmp::Ordering::Less => Balance::Positive,
            std::cmp::Ordering::Greater => Balance::Negative,
        };
        let direction = if rtl.iter().all(|&r| r) {
            Direction::Convergent
        } else {
            Direction::Divergent
        };
        let orientation = if trivial || direction == Direction::Divergent {
            Orientation::NotApplicable
        } else if origin.windows(2).all(|w| w[0] > w[1]) {
            Orientation::NonOriented
        } else {
            Orientation::Oriented
        };
        Cycle {
            origin,
            right_to_left: rtl,
            target,
            leftmost,
            origin_weight,
            target_weight,
            trivial,
            labeled,
            balance,
            direction,
            orientation,
        }
    }

    /// Vertices in drawing order.
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn position_of(&self, v: Vertex) -> usize {
        // Positions are few; a scan keeps the struct small.
        self.vertices
            .iter()
            .position(|&w| w == v)
            .expect("vertex belongs to the graph")
    }

    /// Origin edges `o_1 .. o_{|π|+1}`.
    pub fn origin_edges(&self) -> &[OriginEdge] {
        &self.origin
    }

    pub fn origin_edge(&self, index: usize) -> &OriginEdge {
        &self.origin[index - 1]
    }

    /// Target edges sorted by `x`.
    pub fn target_edges(&self) -> &[TargetEdge] {
        &self.target_edges
    }

    pub fn target_edge_of(&self, x: u32) -> Option<&TargetEdge> {
        self.target_edges.iter().find(|e| e.x == x)
    }

    /// Cycles ordered by leftmost drawing position.
    pub fn cycles(&self) -> &[Cycle] {
        &self.cycles
    }

    pub fn pi_len(&self) -> usize {
        self.pi_len
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Origin edge covering source region `r`.
    pub fn edge_of_region(&self, r: usize) -> &OriginEdge {
        let k = self.origin.partition_point(|e| e.last_region < r);
        &self.origin[k]
    }

    /// Index into [`cycles`](Self::cycles) of the cycle holding origin edge `index`.
    pub fn cycle_of_origin(&self, index: usize) -> usize {
        self.cycles
            .iter()
            .position(|c| c.origin.contains(&index))
            .expect("every origin edge lies on a cycle")
    }

    /// Index of the cycle holding target edge `t_x`.
    pub fn cycle_of_target(&self, x: u32) -> Option<usize> {
        let t = self.target_edges.iter().position(|e| e.x == x)?;
        self.cycles.iter().position(|c| c.target.contains(&t))
    }

    pub fn measures(&self) -> GraphMeasures {
        let c = self.cycles.len();
        let c_g = self.cycles.iter().filter(|c| c.is_good()).count();
        let base = self.pi_len as i64 + 1;
        GraphMeasures {
            pi_len: self.pi_len,
            c,
            c_g,
            b: base - c as i64,
            b_g: base - c_g as i64,
        }
    }

    /// True when every cycle is trivial and good, i.e. the genomes are equal.
    pub fn is_sorted(&self) -> bool {
        self.cycles.iter().all(Cycle::is_settled)
    }

    /// Graphviz rendering of the standard drawing.
    pub fn to_dot(&self) -> String {
        const PALETTE: [&str; 12] = [
            "black", "red", "blue", "cyan3", "darkgreen", "orange", "magenta", "brown", "purple",
            "gold3", "gray40", "deeppink",
        ];
        let mut out = String::new();
        out.push_str("graph breakpoint {\n");
        out.push_str("  rankdir=LR;\n  node [shape=circle, fontsize=10];\n");
        out.push_str("  { rank=same;");
        for p in 0..self.vertices.len() {
            let _ = write!(out, " v{p};");
        }
        out.push_str(" }\n");
        for (p, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "  v{p} [label=\"{v}\"];");
        }
        let mut color_of_origin = vec![0usize; self.origin.len() + 1];
        let mut color_of_target = vec![0usize; self.target_edges.len()];
        for (k, c) in self.cycles.iter().enumerate() {
            for &o in &c.origin {
                color_of_origin[o] = k;
            }
            for &t in &c.target {
                color_of_target[t] = k;
            }
        }
        for e in &self.origin {
            let color = PALETTE[color_of_origin[e.index] % PALETTE.len()];
            let label = if e.alpha {
                format!("{} α", e.weight)
            } else {
                e.weight.to_string()
            };
            let _ = writeln!(
                out,
                "  v{} -- v{} [style=solid, color={color}, label=\"{label}\"];",
                e.left_position(),
                e.right_position()
            );
        }
        for (k, e) in self.target_edges.iter().enumerate() {
            let color = PALETTE[color_of_target[k] % PALETTE.len()];
            let a = self.position_of(Vertex { gene: e.x, polarity: Polarity::Plus });
            let b = self.position_of(Vertex { gene: e.next, polarity: Polarity::Minus });
            let (a, b) = (a.min(b), a.max(b));
            let label = if e.is_labeled() {
                let run: Vec<String> = e.missing.iter().map(u32::to_string).collect();
                format!("{} [{}]", e.weight, run.join(" "))
            } else {
                e.weight.to_string()
            };
            let _ = writeln!(
                out,
                "  v{a} -- v{b} [style=dashed, constraint=false, color={color}, label=\"{label}\"];"
            );
        }
        out.push_str("}\n");
        out
    }
}
