//! Text format for genome pairs.
//!
//! ```text
//! # comment
//! >source
//! genes: A -B ~C
//! intergenic: 1 2 0 4
//! >target
//! genes: A B C D
//! intergenic: 3 0 1 1 2
//! ```
//!
//! A leading `-` or `~` marks reverse orientation, a leading `+` or nothing
//! forward. `intergenic` lists `|genes| + 1` non-negative counts.

use std::fmt::Write as _;

use thiserror::Error;

use crate::genome::{normalize_pair, Gene, GenomeError, NormalizedPair, RawGene, RawGenome};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairFileError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `>{0}` block")]
    MissingBlock(&'static str),
    #[error("block `>{block}` lacks a `{field}:` line")]
    MissingField { block: &'static str, field: &'static str },
    #[error(transparent)]
    Genome(#[from] GenomeError),
}

#[derive(Default)]
struct Block {
    genes: Option<Vec<RawGene>>,
    regions: Option<Vec<u64>>,
}

impl Block {
    fn finish(self, block: &'static str) -> Result<RawGenome, PairFileError> {
        let genes = self.genes.ok_or(PairFileError::MissingField { block, field: "genes" })?;
        let regions = self.regions.ok_or(PairFileError::MissingField { block, field: "intergenic" })?;
        Ok(RawGenome::new(genes, regions))
    }
}

fn syntax(line: usize, message: impl Into<String>) -> PairFileError {
    PairFileError::Syntax { line, message: message.into() }
}

/// Parses the two raw genomes without normalizing them.
pub fn parse_raw_pair(text: &str) -> Result<(RawGenome, RawGenome), PairFileError> {
    let mut source: Option<Block> = None;
    let mut target: Option<Block> = None;
    let mut current: Option<&'static str> = None;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(header) = content.strip_prefix('>') {
            let name = match header.trim().to_ascii_lowercase().as_str() {
                "source" => "source",
                "target" => "target",
                other => return Err(syntax(line, format!("unknown block `>{other}`"))),
            };
            let slot = if name == "source" { &mut source } else { &mut target };
            if slot.is_some() {
                return Err(syntax(line, format!("duplicate block `>{name}`")));
            }
            *slot = Some(Block::default());
            current = Some(name);
            continue;
        }
        let Some(block_name) = current else {
            return Err(syntax(line, "content before the first `>source` or `>target` header"));
        };
        let block = if block_name == "source" { source.as_mut() } else { target.as_mut() }
            .expect("current block exists");
        let (key, value) = content
            .split_once(':')
            .ok_or_else(|| syntax(line, "expected `genes:` or `intergenic:`"))?;
        match key.trim() {
            "genes" => {
                if block.genes.is_some() {
                    return Err(syntax(line, "duplicate `genes:` line"));
                }
                let genes = value
                    .split_whitespace()
                    .map(|tok| parse_gene(tok).ok_or_else(|| syntax(line, format!("bad gene `{tok}`"))))
                    .collect::<Result<Vec<_>, _>>()?;
                block.genes = Some(genes);
            }
            "intergenic" => {
                if block.regions.is_some() {
                    return Err(syntax(line, "duplicate `intergenic:` line"));
                }
                let regions = value
                    .split_whitespace()
                    .map(|tok| match tok.parse::<i64>() {
                        Ok(v) if v < 0 => Err(syntax(line, format!("negative region `{tok}`"))),
                        Ok(v) => Ok(v as u64),
                        Err(_) => Err(syntax(line, format!("bad region `{tok}`"))),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                block.regions = Some(regions);
            }
            other => return Err(syntax(line, format!("unknown field `{other}`"))),
        }
    }

    let source = source.ok_or(PairFileError::MissingBlock("source"))?.finish("source")?;
    let target = target.ok_or(PairFileError::MissingBlock("target"))?.finish("target")?;
    Ok((source, target))
}

fn parse_gene(tok: &str) -> Option<RawGene> {
    let (reversed, name) = match tok.as_bytes()[0] {
        b'-' | b'~' => (true, &tok[1..]),
        b'+' => (false, &tok[1..]),
        _ => (false, tok),
    };
    if name.is_empty() || name.starts_with(['-', '~', '+']) {
        return None;
    }
    Some(RawGene::new(name, reversed))
}

/// Parses and normalizes a pair file.
pub fn parse_pair_file(text: &str) -> Result<NormalizedPair, PairFileError> {
    let (source, target) = parse_raw_pair(text)?;
    Ok(normalize_pair(&source, &target)?)
}

/// Writes the normalized form: target genes as `1..m`, alphas as `alpha.k`.
pub fn write_pair_file(pair: &NormalizedPair) -> String {
    let mut out = String::new();
    let mut alpha = 0;
    let genes: Vec<String> = pair
        .source
        .genes()
        .iter()
        .map(|g| match g {
            Gene::Alpha => {
                alpha += 1;
                format!("alpha.{alpha}")
            }
            Gene::Id(v) if *v < 0 => format!("-{}", v.unsigned_abs()),
            Gene::Id(v) => v.to_string(),
        })
        .collect();
    let join = |v: &[u64]| v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ");
    let _ = writeln!(out, ">source");
    let _ = writeln!(out, "genes: {}", genes.join(" "));
    let _ = writeln!(out, "intergenic: {}", join(pair.source.regions()));
    let _ = writeln!(out, ">target");
    let target: Vec<String> = (1..=pair.target.len()).map(|id| id.to_string()).collect();
    let _ = writeln!(out, "genes: {}", target.join(" "));
    let _ = writeln!(out, "intergenic: {}", join(pair.target.regions()));
    out
}
