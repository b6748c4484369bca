//! Parsing of rationals, weight schemes and instance specifications.

use thiserror::Error;

use crate::algorithm::{Rational, WeightError, WeightScheme};
use crate::harness::generator::InstanceSpec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParamError {
    #[error("`{0}` is not a rational number (use 3, 3/2 or 1.5)")]
    Rational(String),
    #[error("expected {expected} comma-separated values, got `{found}`")]
    Arity { expected: usize, found: String },
    #[error(transparent)]
    Weights(#[from] WeightError),
    #[error("bad instance spec `{0}`")]
    Spec(String),
}

/// Parses `3`, `-2`, `3/2` or a finite decimal such as `1.25`, exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParamError> {
    let bad = || ParamError::Rational(text.to_string());
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: i64 = n.trim().parse().map_err(|_| bad())?;
        let d: i64 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((int, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 12 {
            return Err(bad());
        }
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        let whole: i64 = if int_digits.is_empty() { 0 } else { int_digits.parse().map_err(|_| bad())? };
        let scale = 10i64.pow(frac.len() as u32);
        let f: i64 = frac.parse().map_err(|_| bad())?;
        let magnitude = whole
            .checked_mul(scale)
            .and_then(|v| v.checked_add(f))
            .ok_or_else(bad)?;
        let value = Rational::new(magnitude, scale);
        return Ok(if negative { -value } else { value });
    }
    t.parse::<i64>().map(Rational::from_integer).map_err(|_| bad())
}

fn parse_list(text: &str, expected: usize) -> Result<Vec<Rational>, ParamError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != expected {
        return Err(ParamError::Arity { expected, found: text.to_string() });
    }
    parts.into_iter().map(parse_rational).collect()
}

/// `weights` is `W(ρ),W(τ),W(δ)`, `p` is `p1,p2`.
pub fn parse_scheme(weights: &str, p: &str) -> Result<WeightScheme, ParamError> {
    let w = parse_list(weights, 3)?;
    let p = parse_list(p, 2)?;
    Ok(WeightScheme::new(w[0], w[1], w[2], p[0], p[1])?)
}

/// Parses `;`-separated groups of `key=value` pairs, for example
/// `m=4,k=3,r=2,xs=1,xt=1,seeds=0..99`. Keys: `m` genes, `k` scrambling
/// operations, `r` largest region, `xs`/`xt` source/target exclusive genes,
/// `seed` or an inclusive `seeds` range. One spec is produced per seed.
pub fn parse_instance_specs(text: &str) -> Result<Vec<InstanceSpec>, ParamError> {
    let mut out = Vec::new();
    for group in text.split(';').map(str::trim).filter(|g| !g.is_empty()) {
        let bad = || ParamError::Spec(group.to_string());
        let mut base = InstanceSpec { m: 4, k: 3, max_region: 3, exclusive_counts: (0, 0), seed: 0 };
        let mut seeds = 0..=0u64;
        for item in group.split(',') {
            let (key, value) = item.split_once('=').ok_or_else(bad)?;
            let value = value.trim();
            let num = || value.parse::<u64>().map_err(|_| bad());
            match key.trim() {
                "m" => base.m = num()? as usize,
                "k" => base.k = num()? as usize,
                "r" => base.max_region = num()?,
                "xs" => base.exclusive_counts.0 = num()? as usize,
                "xt" => base.exclusive_counts.1 = num()? as usize,
                "seed" => seeds = num()?..=num()?,
                "seeds" => {
                    let (a, b) = value.split_once("..").ok_or_else(bad)?;
                    let a: u64 = a.parse().map_err(|_| bad())?;
                    let b: u64 = b.parse().map_err(|_| bad())?;
                    if a > b {
                        return Err(bad());
                    }
                    seeds = a..=b;
                }
                _ => return Err(bad()),
            }
        }
        if base.m == 0 {
            return Err(bad());
        }
        out.extend(seeds.map(|seed| InstanceSpec { seed, ..base }));
    }
    Ok(out)
}
