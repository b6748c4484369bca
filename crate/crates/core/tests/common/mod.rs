//! Independent reference computations shared by integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use intergenic::{Deletion, Gene, Genome, Insertion, RearrangementOp, Reversal, Transposition};
use rand::Rng;

/// `(c, c_g, |π|)` computed from scratch with a union-find over signed
/// vertex labels, without the library's drawing or traversal.
pub fn cycle_counts(source: &Genome, target: &Genome) -> (usize, usize, usize) {
    let m = target.len() as i64;
    let mut elems: Vec<i64> = vec![0];
    let mut origin: Vec<(u64, bool)> = Vec::new();
    let mut acc = source.regions()[0];
    let mut labeled = false;
    for (idx, g) in source.genes().iter().enumerate() {
        let next_region = source.regions()[idx + 1];
        match g {
            Gene::Alpha => {
                labeled = true;
                acc += next_region;
            }
            Gene::Id(v) => {
                origin.push((acc, labeled));
                elems.push(*v as i64);
                acc = next_region;
                labeled = false;
            }
        }
    }
    origin.push((acc, labeled));
    elems.push(m + 1);

    // Vertex (id, plus).
    let left = |e: i64| (e.abs(), e < 0);
    let right = |e: i64| (e.abs(), e >= 0);

    let mut index: HashMap<(i64, bool), usize> = HashMap::new();
    let mut id_of = |v: (i64, bool)| {
        let n = index.len();
        *index.entry(v).or_insert(n)
    };
    let mut edges: Vec<(usize, usize, i64, bool)> = Vec::new();
    for k in 0..origin.len() {
        let (w, lab) = origin[k];
        edges.push((id_of(right(elems[k])), id_of(left(elems[k + 1])), w as i64, lab));
    }
    let mut present: Vec<i64> = elems.iter().map(|e| e.abs()).collect();
    present.sort_unstable();
    for pair in present.windows(2) {
        let (x, next) = (pair[0], pair[1]);
        let w: u64 = (x + 1..=next).map(|i| target.regions()[i as usize - 1]).sum();
        edges.push((id_of((x, true)), id_of((next, false)), -(w as i64), next > x + 1));
    }

    let n = index.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b, _, _) in &edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut comps: HashMap<usize, (i64, bool)> = HashMap::new();
    for &(a, _, w, lab) in &edges {
        let r = find(&mut parent, a);
        let e = comps.entry(r).or_insert((0, false));
        e.0 += w;
        e.1 |= lab;
    }
    let c = comps.len();
    let c_g = comps.values().filter(|(balance, lab)| *balance == 0 && !lab).count();
    (c, c_g, elems.len() - 2)
}

/// `(b, b_g)` from [`cycle_counts`].
pub fn breakpoints(source: &Genome, target: &Genome) -> (i64, i64) {
    let (c, c_g, pi) = cycle_counts(source, target);
    ((pi + 1 - c) as i64, (pi + 1 - c_g) as i64)
}

/// A reversal over random genes and split points.
pub fn random_reversal(rng: &mut impl Rng, g: &Genome) -> Option<RearrangementOp> {
    let n = g.len();
    if n == 0 {
        return None;
    }
    let i = rng.gen_range(1..=n);
    let j = rng.gen_range(i..=n);
    let x = rng.gen_range(0..=g.region(i));
    let y = rng.gen_range(0..=g.region(j + 1));
    Some(Reversal { i, j, x, y }.into())
}

pub fn random_transposition(rng: &mut impl Rng, g: &Genome) -> Option<RearrangementOp> {
    let n = g.len();
    if n < 2 {
        return None;
    }
    let mut idx = rand::seq::index::sample(rng, n + 1, 3).into_vec();
    idx.sort_unstable();
    let (i, j, k) = (idx[0] + 1, idx[1] + 1, idx[2] + 1);
    let x = rng.gen_range(0..=g.region(i));
    let y = rng.gen_range(0..=g.region(j));
    let z = rng.gen_range(0..=g.region(k));
    Some(Transposition { i, j, k, x, y, z }.into())
}

/// A valid indel against `target`: nucleotide deletion, alpha-run deletion,
/// nucleotide insertion or insertion of a run of missing target genes.
pub fn random_indel(rng: &mut impl Rng, g: &Genome, target: &Genome) -> RearrangementOp {
    let n = g.len();
    loop {
        match rng.gen_range(0..4) {
            0 => {
                let i = rng.gen_range(1..=n + 1);
                if g.region(i) > 0 {
                    let y = rng.gen_range(1..=g.region(i));
                    return Deletion { i, j: i, x: 0, y }.into();
                }
            }
            1 => {
                let alphas: Vec<usize> =
                    (1..=n).filter(|&p| g.genes()[p - 1].is_alpha()).collect();
                if alphas.is_empty() {
                    continue;
                }
                let i = alphas[rng.gen_range(0..alphas.len())];
                let mut j = i + 1;
                while j <= n && g.genes()[j - 1].is_alpha() && rng.gen_bool(0.5) {
                    j += 1;
                }
                let x = rng.gen_range(0..=g.region(i));
                let y = rng.gen_range(0..=g.region(j));
                return Deletion { i, j, x, y }.into();
            }
            2 => {
                let i = rng.gen_range(1..=n + 1);
                let amount = rng.gen_range(1..=4);
                return Insertion { i, genes: vec![], regions: vec![amount], x: 0 }.into();
            }
            _ => {
                let m = target.len() as u32;
                let missing: Vec<u32> = (1..=m).filter(|&id| !g.contains_id(id)).collect();
                if missing.is_empty() {
                    continue;
                }
                let start = rng.gen_range(0..missing.len());
                let mut run = vec![missing[start]];
                for &id in &missing[start + 1..] {
                    if id != run[run.len() - 1] + 1 || rng.gen_bool(0.5) {
                        break;
                    }
                    run.push(id);
                }
                let mut genes: Vec<Gene> = run.iter().map(|&id| Gene::forward(id)).collect();
                if rng.gen_bool(0.5) {
                    genes = genes.into_iter().rev().map(Gene::flipped).collect();
                }
                let i = rng.gen_range(1..=n + 1);
                let regions = (0..=genes.len()).map(|_| rng.gen_range(0..=2)).collect();
                let x = rng.gen_range(0..=g.region(i));
                return Insertion { i, genes, regions, x }.into();
            }
        }
    }
}
