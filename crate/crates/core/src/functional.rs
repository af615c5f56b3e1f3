//! Registry of test functionals on configurations.
//!
//! Everything except [`Functional::RawCount`] is 1-Lipschitz for the
//! configuration distance `|a ⊖ b| + |b ⊖ a|`: adding or removing one point
//! changes each count by at most one, so truncated counts move by at most one
//! and `{0,1}`-valued maps move by at most one.

use serde::{Deserialize, Serialize};

use crate::pointprocess::{Configuration, Labeled, Region, SpacePoint};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Functional<R> {
    Constant(f64),
    /// `min(|ω ∩ A|, cap)`.
    TruncatedCount {
        region: Labeled<R>,
        cap: usize,
    },
    /// `|ω ∩ A|`; Lipschitz but unbounded.
    RawCount {
        region: Labeled<R>,
    },
    /// `1{|ω ∩ A| ∈ set}`.
    CountIn {
        region: Labeled<R>,
        set: Vec<usize>,
    },
    /// `1{|ω ∩ A| ∈ S} · 1{|ω ∩ B| ∈ T}`.
    Product {
        a: Labeled<R>,
        set_a: Vec<usize>,
        b: Labeled<R>,
        set_b: Vec<usize>,
    },
    /// `1{some pair of distinct points is within distance delta}`.
    ClosePair {
        delta: f64,
    },
}

fn fmt_set(s: &[usize]) -> String {
    s.iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join("|")
}

impl<R> Functional<R> {
    pub fn name(&self) -> String {
        match self {
            Functional::Constant(v) => format!("const({v})"),
            Functional::TruncatedCount { region, cap } => format!("min(N[{}],{cap})", region.name),
            Functional::RawCount { region } => format!("N[{}]", region.name),
            Functional::CountIn { region, set } => {
                format!("1{{N[{}] in {}}}", region.name, fmt_set(set))
            }
            Functional::Product { a, set_a, b, set_b } => format!(
                "1{{N[{}] in {}}}*1{{N[{}] in {}}}",
                a.name,
                fmt_set(set_a),
                b.name,
                fmt_set(set_b)
            ),
            Functional::ClosePair { delta } => format!("closepair({delta})"),
        }
    }

    pub fn is_lipschitz(&self) -> bool {
        !matches!(self, Functional::RawCount { .. })
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Functional::RawCount { .. })
    }

    pub fn eval<P>(&self, cfg: &Configuration<P>) -> f64
    where
        P: SpacePoint,
        R: Region<P>,
    {
        match self {
            Functional::Constant(v) => *v,
            Functional::TruncatedCount { region, cap } => {
                cfg.count_in(&region.region).min(*cap) as f64
            }
            Functional::RawCount { region } => cfg.count_in(&region.region) as f64,
            Functional::CountIn { region, set } => {
                indicator(set.contains(&cfg.count_in(&region.region)))
            }
            Functional::Product { a, set_a, b, set_b } => indicator(
                set_a.contains(&cfg.count_in(&a.region))
                    && set_b.contains(&cfg.count_in(&b.region)),
            ),
            Functional::ClosePair { delta } => indicator(has_close_pair(cfg, *delta)),
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn has_close_pair<P: SpacePoint>(cfg: &Configuration<P>, delta: f64) -> bool {
    let pts = cfg.points();
    (0..pts.len()).any(|i| pts[i + 1..].iter().any(|q| pts[i].distance(q) <= delta))
}

/// Lipschitz family used for distance lower bounds: per region the count
/// indicators `1{N = k}` and `1{N <= k}` for `k < kmax`, truncated counts
/// `min(N, m)` for `m = 1..=3`, joint emptiness of region pairs, and close-pair
/// indicators at the given scales.
pub fn lipschitz_family<R: Clone>(
    regions: &[Labeled<R>],
    kmax: usize,
    close_pair_scales: &[f64],
) -> Vec<Functional<R>> {
    let mut out = Vec::new();
    for region in regions {
        for k in 0..kmax {
            out.push(Functional::CountIn {
                region: region.clone(),
                set: vec![k],
            });
            if k > 0 {
                out.push(Functional::CountIn {
                    region: region.clone(),
                    set: (0..=k).collect(),
                });
            }
        }
        for cap in 1..=3 {
            out.push(Functional::TruncatedCount {
                region: region.clone(),
                cap,
            });
        }
    }
    for (i, a) in regions.iter().enumerate() {
        for b in &regions[i + 1..] {
            out.push(Functional::Product {
                a: a.clone(),
                set_a: vec![0],
                b: b.clone(),
                set_b: vec![0],
            });
        }
    }
    out.extend(
        close_pair_scales
            .iter()
            .map(|&delta| Functional::ClosePair { delta }),
    );
    out
}

/// Smaller family for the identity checks: one instance of each registry
/// variant per region, plus a constant.
pub fn check_family<R: Clone>(regions: &[Labeled<R>]) -> Vec<Functional<R>> {
    let mut out = vec![Functional::Constant(1.0)];
    for region in regions {
        out.push(Functional::TruncatedCount {
            region: region.clone(),
            cap: 2,
        });
        out.push(Functional::RawCount {
            region: region.clone(),
        });
        out.push(Functional::CountIn {
            region: region.clone(),
            set: vec![0, 2],
        });
    }
    if regions.len() >= 2 {
        out.push(Functional::Product {
            a: regions[0].clone(),
            set_a: vec![0],
            b: regions[1].clone(),
            set_b: vec![1, 2],
        });
    }
    out
}
