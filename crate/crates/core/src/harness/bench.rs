//! Approximation-ratio benchmark over generated instances.

use std::fmt::Write as _;

use num_traits::{ToPrimitive, Zero};

use crate::algorithm::{approximation_factor, lower_bound, run, Rational, RunError, WeightScheme};
use crate::genome::NormalizedPair;
use crate::harness::generator::{generate_instance_weighted, InstanceSpec};
use crate::oracle::{exact_distance, OracleLimits};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub instance: usize,
    pub spec: InstanceSpec,
    pub scheme: WeightScheme,
    pub pair: NormalizedPair,
    pub alg_weight: Rational,
    pub lower_bound: Rational,
    pub oracle_weight: Option<Rational>,
    /// Algorithm weight over the oracle weight, or over the lower bound when
    /// the oracle did not run; `1` when both are zero.
    pub ratio: Rational,
    pub factor: Rational,
}

impl BenchRow {
    /// Ratio above the factor, or the sandwich `lower_bound <= oracle <= alg` broken.
    pub fn is_violation(&self) -> bool {
        let sandwich = match self.oracle_weight {
            Some(o) => self.lower_bound <= o && o <= self.alg_weight,
            None => self.lower_bound <= self.alg_weight,
        };
        !sandwich || self.ratio > self.factor
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSummary {
    pub scheme: WeightScheme,
    pub factor: Rational,
    pub instances: usize,
    pub with_oracle: usize,
    pub max_ratio: Rational,
    pub mean_ratio: Rational,
    pub violations: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn decimal(r: Rational) -> String {
    format!("{:.6}", r.to_f64().unwrap_or(f64::NAN))
}

impl BenchReport {
    pub const HEADER: &'static str = "instance,scheme,alg_weight,lower_bound,oracle_weight,ratio";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::HEADER);
        out.push('\n');
        for r in &self.rows {
            let oracle = r.oracle_weight.map(|o| o.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.instance,
                r.scheme,
                r.alg_weight,
                r.lower_bound,
                oracle,
                decimal(r.ratio)
            );
        }
        out
    }

    pub fn violations(&self) -> impl Iterator<Item = &BenchRow> {
        self.rows.iter().filter(|r| r.is_violation())
    }

    /// Aggregates per scheme, in order of first appearance.
    pub fn summaries(&self) -> Vec<SchemeSummary> {
        let mut out: Vec<SchemeSummary> = Vec::new();
        for r in &self.rows {
            let idx = match out.iter().position(|s| s.scheme == r.scheme) {
                Some(i) => i,
                None => {
                    out.push(SchemeSummary {
                        scheme: r.scheme,
                        factor: r.factor,
                        instances: 0,
                        with_oracle: 0,
                        max_ratio: Rational::zero(),
                        mean_ratio: Rational::zero(),
                        violations: 0,
                    });
                    out.len() - 1
                }
            };
            let s = &mut out[idx];
            s.instances += 1;
            s.with_oracle += usize::from(r.oracle_weight.is_some());
            s.max_ratio = s.max_ratio.max(r.ratio);
            s.mean_ratio += r.ratio;
            s.violations += usize::from(r.is_violation());
        }
        for s in &mut out {
            s.mean_ratio /= s.instances as i64;
        }
        out
    }
}

/// Runs every spec under every scheme. Instances are scrambled with
/// operation types drawn by that scheme's weights. The oracle runs when
/// `oracle` is given and the instance fits its limits.
pub fn bench(
    specs: &[InstanceSpec],
    schemes: &[WeightScheme],
    oracle: Option<&OracleLimits>,
) -> Result<BenchReport, RunError> {
    let mut rows = Vec::with_capacity(specs.len() * schemes.len());
    for scheme in schemes {
        let factor = approximation_factor(scheme);
        for (instance, spec) in specs.iter().enumerate() {
            let pair = generate_instance_weighted(spec, scheme);
            let report = run(&pair, scheme)?;
            let lb = lower_bound(&pair, scheme);
            let oracle_weight = oracle.and_then(|l| exact_distance(&pair, scheme, l).ok()).map(|o| o.weight);
            let denominator = oracle_weight.unwrap_or(lb);
            let ratio = if denominator.is_zero() {
                if report.total_weight.is_zero() {
                    Rational::from_integer(1)
                } else {
                    Rational::from_integer(i64::MAX)
                }
            } else {
                report.total_weight / denominator
            };
            rows.push(BenchRow {
                instance,
                spec: *spec,
                scheme: *scheme,
                pair,
                alg_weight: report.total_weight,
                lower_bound: lb,
                oracle_weight,
                ratio,
                factor,
            });
        }
    }
    Ok(BenchReport { rows })
}
