//! Genomes with intergenic regions and the four rearrangement operations.
//!
//! Indexing is 1-based and caps-free: a genome with `n` genes has regions
//! `1..=n+1`, where region `i` precedes gene `i` and region `n+1` trails the
//! last gene. Caps only exist inside the breakpoint graph.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::ops::{Add, Sub};

use thiserror::Error;

/// A signed gene of a normalized genome.
///
/// `Alpha` stands for any source-exclusive gene; it carries no orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gene {
    Alpha,
    /// Nonzero identifier; the sign is the orientation.
    Id(i32),
}

impl Gene {
    pub fn forward(id: u32) -> Gene {
        Gene::Id(id as i32)
    }

    pub fn reverse(id: u32) -> Gene {
        Gene::Id(-(id as i32))
    }

    pub fn flipped(self) -> Gene {
        match self {
            Gene::Alpha => Gene::Alpha,
            Gene::Id(v) => Gene::Id(-v),
        }
    }

    pub fn is_alpha(self) -> bool {
        matches!(self, Gene::Alpha)
    }

    /// Unsigned identifier, `None` for `Alpha`.
    pub fn id(self) -> Option<u32> {
        match self {
            Gene::Alpha => None,
            Gene::Id(v) => Some(v.unsigned_abs()),
        }
    }

    pub fn is_reversed(self) -> bool {
        matches!(self, Gene::Id(v) if v < 0)
    }
}

impl fmt::Display for Gene {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gene::Alpha => write!(f, "alpha"),
            Gene::Id(v) if *v < 0 => write!(f, "{v}"),
            Gene::Id(v) => write!(f, "+{v}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenomeError {
    #[error("{genome}: expected {expected} intergenic regions for {genes} genes, found {found}")]
    RegionCount {
        genome: String,
        genes: usize,
        expected: usize,
        found: usize,
    },
    #[error("{genome}: gene `{name}` occurs more than once")]
    DuplicateGene { genome: String, name: String },
    #[error("{genome}: gene identifier 0 is reserved")]
    ZeroGene { genome: String },
}

/// Errors raised when an operation does not fit the genome it is applied to.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OpError {
    #[error("index {index} out of range 1..={max}")]
    Index { index: usize, max: usize },
    #[error("indices must satisfy {0}")]
    Order(&'static str),
    #[error("split {value} exceeds region {region} of size {size}")]
    Split { value: u64, region: usize, size: u64 },
    #[error("nucleotide-only deletion needs x <= y (got x = {x}, y = {y})")]
    EmptyDeletionOrder { x: u64, y: u64 },
    #[error("deletion would remove gene {0}, only alpha genes may be deleted")]
    DeleteSharedGene(Gene),
    #[error("insertion of {0} is not allowed")]
    InsertGene(Gene),
    #[error("inserted regions must number |A| + 1 = {expected}, found {found}")]
    InsertRegions { expected: usize, found: usize },
    #[error("virtual insertions only exist on the breakpoint graph")]
    Virtual,
}

/// A genome: signed genes plus the nucleotide count of every intergenic region.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Genome {
    genes: Vec<Gene>,
    regions: Vec<u64>,
}

impl Genome {
    pub fn new(genes: Vec<Gene>, regions: Vec<u64>) -> Result<Genome, GenomeError> {
        if regions.len() != genes.len() + 1 {
            return Err(GenomeError::RegionCount {
                genome: "genome".into(),
                genes: genes.len(),
                expected: genes.len() + 1,
                found: regions.len(),
            });
        }
        let mut seen = HashSet::new();
        for g in &genes {
            match g {
                Gene::Id(0) => return Err(GenomeError::ZeroGene { genome: "genome".into() }),
                Gene::Id(v) if !seen.insert(v.unsigned_abs()) => {
                    return Err(GenomeError::DuplicateGene {
                        genome: "genome".into(),
                        name: v.unsigned_abs().to_string(),
                    })
                }
                _ => {}
            }
        }
        Ok(Genome { genes, regions })
    }

    /// Identity genome `(+1 ... +m)` with the given regions.
    pub fn identity(regions: Vec<u64>) -> Genome {
        let m = regions.len().saturating_sub(1);
        let genes = (1..=m as u32).map(Gene::forward).collect();
        Genome { genes, regions }
    }

    pub(crate) fn from_parts(genes: Vec<Gene>, regions: Vec<u64>) -> Genome {
        debug_assert_eq!(regions.len(), genes.len() + 1);
        Genome { genes, regions }
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    pub fn regions(&self) -> &[u64] {
        &self.regions
    }

    /// Number of genes `n`.
    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Region `S̆_i`, 1-based.
    pub fn region(&self, i: usize) -> u64 {
        self.regions[i - 1]
    }

    pub(crate) fn region_mut(&mut self, i: usize) -> &mut u64 {
        &mut self.regions[i - 1]
    }

    pub fn total_nucleotides(&self) -> u64 {
        self.regions.iter().sum()
    }

    pub fn contains_id(&self, id: u32) -> bool {
        self.genes.iter().any(|g| g.id() == Some(id))
    }

    pub fn alpha_count(&self) -> usize {
        self.genes.iter().filter(|g| g.is_alpha()).count()
    }

    pub fn apply(&self, op: &RearrangementOp) -> Result<Genome, OpError> {
        match op {
            RearrangementOp::Reversal(r) => apply_reversal(self, r),
            RearrangementOp::Transposition(t) => apply_transposition(self, t),
            RearrangementOp::Insertion(ins) => apply_insertion(self, ins),
            RearrangementOp::Deletion(d) => apply_deletion(self, d),
            RearrangementOp::VirtualInsertion { .. } => Err(OpError::Virtual),
        }
    }
}

impl fmt::Display for Genome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "((")?;
        for (k, g) in self.genes.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{g}")?;
        }
        write!(f, "), (")?;
        for (k, r) in self.regions.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, "))")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reversal {
    pub i: usize,
    pub j: usize,
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transposition {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub x: u64,
    pub y: u64,
    pub z: u64,
}

/// Inserts `genes` with `regions` (`|regions| = |genes| + 1`) after the
/// `x`-th nucleotide of region `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Insertion {
    pub i: usize,
    pub genes: Vec<Gene>,
    pub regions: Vec<u64>,
    pub x: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Deletion {
    pub i: usize,
    pub j: usize,
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    Reversal,
    Transposition,
    Indel,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RearrangementOp {
    Reversal(Reversal),
    Transposition(Transposition),
    Insertion(Insertion),
    Deletion(Deletion),
    /// Adds `amount` nucleotides to the clean target edge `t_gene`.
    VirtualInsertion { gene: u32, amount: u64 },
}

impl RearrangementOp {
    pub fn kind(&self) -> OpKind {
        match self {
            RearrangementOp::Reversal(_) => OpKind::Reversal,
            RearrangementOp::Transposition(_) => OpKind::Transposition,
            _ => OpKind::Indel,
        }
    }

    pub fn is_virtual(&self) -> bool {
        matches!(self, RearrangementOp::VirtualInsertion { .. })
    }
}

impl From<Reversal> for RearrangementOp {
    fn from(r: Reversal) -> Self {
        RearrangementOp::Reversal(r)
    }
}

impl From<Transposition> for RearrangementOp {
    fn from(t: Transposition) -> Self {
        RearrangementOp::Transposition(t)
    }
}

impl From<Insertion> for RearrangementOp {
    fn from(i: Insertion) -> Self {
        RearrangementOp::Insertion(i)
    }
}

impl From<Deletion> for RearrangementOp {
    fn from(d: Deletion) -> Self {
        RearrangementOp::Deletion(d)
    }
}

impl fmt::Display for RearrangementOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RearrangementOp::Reversal(r) => {
                write!(f, "reversal(i={}, j={}, x={}, y={})", r.i, r.j, r.x, r.y)
            }
            RearrangementOp::Transposition(t) => write!(
                f,
                "transposition(i={}, j={}, k={}, x={}, y={}, z={})",
                t.i, t.j, t.k, t.x, t.y, t.z
            ),
            RearrangementOp::Insertion(ins) => {
                write!(f, "insertion(i={}, genes=[", ins.i)?;
                for (k, g) in ins.genes.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, "], regions=[")?;
                for (k, r) in ins.regions.iter().enumerate() {
                    if k > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{r}")?;
                }
                write!(f, "], x={})", ins.x)
            }
            RearrangementOp::Deletion(d) => {
                write!(f, "deletion(i={}, j={}, x={}, y={})", d.i, d.j, d.x, d.y)
            }
            RearrangementOp::VirtualInsertion { gene, amount } => {
                write!(f, "virtual-insertion(t_{gene}, +{amount})")
            }
        }
    }
}

/// An ordered sequence of operations, applied left to right.
pub type OperationSequence = Vec<RearrangementOp>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("operation {index} ({op}) is invalid: {source}")]
pub struct SequenceError {
    pub index: usize,
    pub op: String,
    pub source: OpError,
}

fn check_index(index: usize, max: usize) -> Result<(), OpError> {
    if index == 0 || index > max {
        Err(OpError::Index { index, max })
    } else {
        Ok(())
    }
}

fn check_split(g: &Genome, region: usize, value: u64) -> Result<(), OpError> {
    let size = g.region(region);
    if value > size {
        Err(OpError::Split { value, region, size })
    } else {
        Ok(())
    }
}

// The rearrangement formulas are shared between concrete genomes and the
// symbolic region vectors used by the step searches, hence the generic core.

pub(crate) fn reversal_parts<R>(genes: &[Gene], regions: &[R], i: usize, j: usize, x: R, y: R) -> (Vec<Gene>, Vec<R>)
where
    R: Copy + Add<Output = R> + Sub<Output = R>,
{
    let mut out_genes = Vec::with_capacity(genes.len());
    out_genes.extend_from_slice(&genes[..i - 1]);
    out_genes.extend(genes[i - 1..j].iter().rev().map(|g| g.flipped()));
    out_genes.extend_from_slice(&genes[j..]);

    let a = regions[i - 1];
    let b = regions[j];
    let mut out = Vec::with_capacity(regions.len());
    out.extend_from_slice(&regions[..i - 1]);
    out.push(x + y);
    out.extend(regions[i..j].iter().rev().copied());
    out.push((a - x) + (b - y));
    out.extend_from_slice(&regions[j + 1..]);
    (out_genes, out)
}

pub(crate) fn transposition_parts<R>(
    genes: &[Gene],
    regions: &[R],
    (i, j, k): (usize, usize, usize),
    (x, y, z): (R, R, R),
) -> (Vec<Gene>, Vec<R>)
where
    R: Copy + Add<Output = R> + Sub<Output = R>,
{
    let mut out_genes = Vec::with_capacity(genes.len());
    out_genes.extend_from_slice(&genes[..i - 1]);
    out_genes.extend_from_slice(&genes[j - 1..k - 1]);
    out_genes.extend_from_slice(&genes[i - 1..j - 1]);
    out_genes.extend_from_slice(&genes[k - 1..]);

    let (a, b, c) = (regions[i - 1], regions[j - 1], regions[k - 1]);
    let mut out = Vec::with_capacity(regions.len());
    out.extend_from_slice(&regions[..i - 1]);
    out.push(x + (b - y));
    out.extend_from_slice(&regions[j..k - 1]);
    out.push(z + (a - x));
    out.extend_from_slice(&regions[i..j - 1]);
    out.push(y + (c - z));
    out.extend_from_slice(&regions[k..]);
    (out_genes, out)
}

pub fn apply_reversal(g: &Genome, op: &Reversal) -> Result<Genome, OpError> {
    let n = g.len();
    check_index(op.i, n)?;
    check_index(op.j, n)?;
    if op.i > op.j {
        return Err(OpError::Order("1 <= i <= j <= n"));
    }
    check_split(g, op.i, op.x)?;
    check_split(g, op.j + 1, op.y)?;
    let (genes, regions) = reversal_parts(&g.genes, &g.regions, op.i, op.j, op.x, op.y);
    Ok(Genome::from_parts(genes, regions))
}

pub fn apply_transposition(g: &Genome, op: &Transposition) -> Result<Genome, OpError> {
    let n = g.len();
    for idx in [op.i, op.j, op.k] {
        check_index(idx, n + 1)?;
    }
    if !(op.i < op.j && op.j < op.k) {
        return Err(OpError::Order("1 <= i < j < k <= n + 1"));
    }
    check_split(g, op.i, op.x)?;
    check_split(g, op.j, op.y)?;
    check_split(g, op.k, op.z)?;
    let (genes, regions) =
        transposition_parts(&g.genes, &g.regions, (op.i, op.j, op.k), (op.x, op.y, op.z));
    Ok(Genome::from_parts(genes, regions))
}

pub fn apply_insertion(g: &Genome, op: &Insertion) -> Result<Genome, OpError> {
    check_index(op.i, g.len() + 1)?;
    check_split(g, op.i, op.x)?;
    if op.regions.len() != op.genes.len() + 1 {
        return Err(OpError::InsertRegions {
            expected: op.genes.len() + 1,
            found: op.regions.len(),
        });
    }
    let mut fresh = HashSet::new();
    for &gene in &op.genes {
        match gene.id() {
            None => return Err(OpError::InsertGene(gene)),
            Some(id) if g.contains_id(id) || !fresh.insert(id) => {
                return Err(OpError::InsertGene(gene))
            }
            Some(_) => {}
        }
    }

    let i = op.i;
    let rest = g.region(i) - op.x;
    let mut genes = Vec::with_capacity(g.len() + op.genes.len());
    genes.extend_from_slice(&g.genes[..i - 1]);
    genes.extend_from_slice(&op.genes);
    genes.extend_from_slice(&g.genes[i - 1..]);

    let last = op.regions.len() - 1;
    let mut regions = Vec::with_capacity(genes.len() + 1);
    regions.extend_from_slice(&g.regions[..i - 1]);
    if last == 0 {
        regions.push(op.x + op.regions[0] + rest);
    } else {
        regions.push(op.x + op.regions[0]);
        regions.extend_from_slice(&op.regions[1..last]);
        regions.push(op.regions[last] + rest);
    }
    regions.extend_from_slice(&g.regions[i..]);
    Ok(Genome::from_parts(genes, regions))
}

pub fn apply_deletion(g: &Genome, op: &Deletion) -> Result<Genome, OpError> {
    let n = g.len();
    check_index(op.i, n + 1)?;
    check_index(op.j, n + 1)?;
    if op.i > op.j {
        return Err(OpError::Order("1 <= i <= j <= n + 1"));
    }
    check_split(g, op.i, op.x)?;
    check_split(g, op.j, op.y)?;
    if op.i == op.j && op.x > op.y {
        return Err(OpError::EmptyDeletionOrder { x: op.x, y: op.y });
    }
    if let Some(&gene) = g.genes[op.i - 1..op.j - 1].iter().find(|g| !g.is_alpha()) {
        return Err(OpError::DeleteSharedGene(gene));
    }
    let merged = op.x + (g.region(op.j) - op.y);
    let mut genes = Vec::with_capacity(n);
    genes.extend_from_slice(&g.genes[..op.i - 1]);
    genes.extend_from_slice(&g.genes[op.j - 1..]);
    let mut regions = Vec::with_capacity(genes.len() + 1);
    regions.extend_from_slice(&g.regions[..op.i - 1]);
    regions.push(merged);
    regions.extend_from_slice(&g.regions[op.j..]);
    Ok(Genome::from_parts(genes, regions))
}

/// Applies `ops` in order; virtual insertions are rejected.
pub fn apply_sequence(g: &Genome, ops: &[RearrangementOp]) -> Result<Genome, SequenceError> {
    let mut current = g.clone();
    for (index, op) in ops.iter().enumerate() {
        current = current.apply(op).map_err(|source| SequenceError {
            index,
            op: op.to_string(),
            source,
        })?;
    }
    Ok(current)
}

/// A gene named in an input file, before relabeling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGene {
    pub name: String,
    pub reversed: bool,
}

impl RawGene {
    pub fn new(name: impl Into<String>, reversed: bool) -> RawGene {
        RawGene { name: name.into(), reversed }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawGenome {
    pub genes: Vec<RawGene>,
    pub regions: Vec<u64>,
}

impl RawGenome {
    pub fn new(genes: Vec<RawGene>, regions: Vec<u64>) -> RawGenome {
        RawGenome { genes, regions }
    }

    fn validate(&self, label: &str) -> Result<(), GenomeError> {
        if self.regions.len() != self.genes.len() + 1 {
            return Err(GenomeError::RegionCount {
                genome: label.into(),
                genes: self.genes.len(),
                expected: self.genes.len() + 1,
                found: self.regions.len(),
            });
        }
        let mut seen = HashSet::new();
        for g in &self.genes {
            if !seen.insert(g.name.as_str()) {
                return Err(GenomeError::DuplicateGene {
                    genome: label.into(),
                    name: g.name.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A source genome over `{1..m} ∪ {alpha}` and the identity target `(+1 ... +m)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalizedPair {
    pub source: Genome,
    pub target: Genome,
    /// Original names behind every target identifier; index `id - 1`.
    /// Merged target-exclusive runs list several names.
    pub target_names: Vec<Vec<String>>,
    /// Original names behind every alpha of the source, left to right.
    pub alpha_names: Vec<Vec<String>>,
}

impl NormalizedPair {
    /// Builds a pair from already-normalized genomes.
    pub fn from_genomes(source: Genome, target: Genome) -> NormalizedPair {
        let target_names = (1..=target.len()).map(|id| vec![id.to_string()]).collect();
        let alpha_names = (1..=source.alpha_count())
            .map(|k| vec![format!("alpha.{k}")])
            .collect();
        NormalizedPair { source, target, target_names, alpha_names }
    }

    pub fn m(&self) -> usize {
        self.target.len()
    }

    /// Target identifiers absent from the source.
    pub fn target_exclusive(&self) -> Vec<u32> {
        (1..=self.m() as u32).filter(|&id| !self.source.contains_id(id)).collect()
    }

    pub fn name_of(&self, id: u32) -> Option<&[String]> {
        self.target_names.get(id as usize - 1).map(Vec::as_slice)
    }
}

/// Relabels a raw pair into normalized form.
///
/// Target genes become `1..m` in order; shared source genes take the same
/// number; source-exclusive genes become alpha. Maximal runs of exclusive
/// genes collapse into one unit whose interior regions are added to the region
/// preceding the unit.
pub fn normalize_pair(source: &RawGenome, target: &RawGenome) -> Result<NormalizedPair, GenomeError> {
    source.validate("source")?;
    target.validate("target")?;

    let source_names: HashSet<&str> = source.genes.iter().map(|g| g.name.as_str()).collect();
    let target_names: HashSet<&str> = target.genes.iter().map(|g| g.name.as_str()).collect();

    // Target: collapse runs of target-exclusive genes.
    let mut t_units: Vec<Vec<&RawGene>> = Vec::new();
    let mut t_regions: Vec<u64> = vec![target.regions[0]];
    let mut in_run = false;
    for (k, g) in target.genes.iter().enumerate() {
        let exclusive = !source_names.contains(g.name.as_str());
        if exclusive && in_run {
            // regions[k] sits between two exclusive genes of the same run.
            let prev = t_units.len() - 1;
            t_units[prev].push(g);
            let before = t_regions.len() - 2;
            t_regions[before] += target.regions[k];
        } else {
            t_units.push(vec![g]);
            t_regions.push(0);
        }
        let last = t_regions.len() - 1;
        t_regions[last] = target.regions[k + 1];
        in_run = exclusive;
    }

    let mut id_of: HashMap<&str, (u32, bool)> = HashMap::new();
    let mut names = Vec::with_capacity(t_units.len());
    for (k, unit) in t_units.iter().enumerate() {
        let id = k as u32 + 1;
        for g in unit {
            id_of.insert(g.name.as_str(), (id, g.reversed));
        }
        names.push(unit.iter().map(|g| g.name.clone()).collect());
    }

    // Source: relabel, collapse alpha runs.
    let mut genes: Vec<Gene> = Vec::with_capacity(source.genes.len());
    let mut regions: Vec<u64> = vec![source.regions[0]];
    let mut alpha_names: Vec<Vec<String>> = Vec::new();
    let mut prev_alpha = false;
    for (k, g) in source.genes.iter().enumerate() {
        let shared = target_names.contains(g.name.as_str());
        if shared {
            let (id, t_rev) = id_of[g.name.as_str()];
            // Orientation is relative to the target's orientation.
            let gene = if g.reversed != t_rev { Gene::reverse(id) } else { Gene::forward(id) };
            genes.push(gene);
            regions.push(source.regions[k + 1]);
            prev_alpha = false;
        } else if prev_alpha {
            let before = regions.len() - 2;
            let last = regions.len() - 1;
            regions[before] += regions[last];
            regions[last] = source.regions[k + 1];
            alpha_names.last_mut().expect("run in progress").push(g.name.clone());
        } else {
            genes.push(Gene::Alpha);
            regions.push(source.regions[k + 1]);
            alpha_names.push(vec![g.name.clone()]);
            prev_alpha = true;
        }
    }

    Ok(NormalizedPair {
        source: Genome::from_parts(genes, regions),
        target: Genome::identity(t_regions),
        target_names: names,
        alpha_names,
    })
}

/// Sorted multiset of unsigned identifiers plus the alpha count.
pub fn gene_content(g: &Genome) -> (BTreeMap<u32, usize>, usize) {
    let mut ids = BTreeMap::new();
    for gene in g.genes() {
        if let Some(id) = gene.id() {
            *ids.entry(id).or_insert(0) += 1;
        }
    }
    (ids, g.alpha_count())
}
