use serde::Deserialize;

use super::{
    fmt_f64, make_ispline_basis, uniform_knots, BasisFunction, BasisKind,
};
use crate::error::{Error, Result};
use crate::par::Exec;

/// A parameter lattice: a list, a single value, or an arithmetic range.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Lattice {
    Single(f64),
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Lattice {
    pub fn values(&self) -> Result<Vec<f64>> {
        match self {
            Lattice::Single(v) => Ok(vec![*v]),
            Lattice::Values(v) => Ok(v.clone()),
            Lattice::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Err(Error::Parameter(format!("range {start}..{stop} step {step}")));
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize;
                Ok((0..=n).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilySpec {
    Uniform,
    Normal,
    Exponential,
    StudentT {
        nu: Lattice,
    },
    SkewedT {
        gamma: Lattice,
        nu: Lattice,
    },
    Gb2 {
        theta1: Lattice,
        theta2: Lattice,
        theta3: Lattice,
        theta4: Lattice,
    },
    Ispline {
        #[serde(default = "default_degree")]
        degree: usize,
        #[serde(default)]
        knots: Option<Vec<f64>>,
        #[serde(default)]
        interior: Option<usize>,
    },
}

fn default_degree() -> usize {
    3
}

/// Quantile-range filter: a member is dropped when its standardized
/// `p_lo`-quantile is below `q_min` or its `p_hi`-quantile is above `q_max`.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    /// Sample size used for the default levels `1/(n+1)` and `n/(n+1)`.
    #[serde(default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub p_lo: Option<f64>,
    #[serde(default)]
    pub p_hi: Option<f64>,
    #[serde(default = "default_q_min")]
    pub q_min: f64,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
}

fn default_q_min() -> f64 {
    1e-4
}

fn default_q_max() -> f64 {
    1e3
}

impl FilterSpec {
    pub fn for_sample_size(n: usize) -> Self {
        FilterSpec { n: Some(n), p_lo: None, p_hi: None, q_min: default_q_min(), q_max: default_q_max() }
    }

    pub fn levels(&self) -> Result<(f64, f64)> {
        let from_n = self.n.map(|n| (1.0 / (n as f64 + 1.0), n as f64 / (n as f64 + 1.0)));
        let p_lo = self.p_lo.or(from_n.map(|l| l.0));
        let p_hi = self.p_hi.or(from_n.map(|l| l.1));
        match (p_lo, p_hi) {
            (Some(lo), Some(hi)) if 0.0 < lo && lo < hi && hi < 1.0 => Ok((lo, hi)),
            _ => Err(Error::Parameter("filter needs 0 < p_lo < p_hi < 1 (or n)".into())),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CatalogSpec {
    #[serde(default, rename = "family")]
    pub families: Vec<FamilySpec>,
    #[serde(default)]
    pub filter: Option<FilterSpec>,
    /// Drop members that coincide (to 1e-12 on a probe grid) with an earlier
    /// member. Standardization removes scale parameters, so lattices over a
    /// scale parameter produce exact duplicates.
    #[serde(default)]
    pub dedup: bool,
}

fn expand(family: &FamilySpec) -> Result<Vec<BasisKind>> {
    let mut kinds = Vec::new();
    match family {
        FamilySpec::Uniform => kinds.push(BasisKind::Uniform),
        FamilySpec::Normal => kinds.push(BasisKind::Normal),
        FamilySpec::Exponential => kinds.push(BasisKind::Exponential),
        FamilySpec::StudentT { nu } => {
            kinds.extend(nu.values()?.into_iter().map(|nu| BasisKind::StudentT { nu }))
        }
        FamilySpec::SkewedT { gamma, nu } => {
            for g in gamma.values()? {
                for v in nu.values()? {
                    kinds.push(BasisKind::SkewedT { gamma: g, nu: v });
                }
            }
        }
        FamilySpec::Gb2 { theta1, theta2, theta3, theta4 } => {
            for a in theta1.values()? {
                for b in theta2.values()? {
                    for p in theta3.values()? {
                        for q in theta4.values()? {
                            kinds.push(BasisKind::Gb2 { a, b, p, q });
                        }
                    }
                }
            }
        }
        FamilySpec::Ispline { .. } => unreachable!("expanded separately"),
    }
    Ok(kinds)
}

/// Build the standardized, filtered catalog. The constant basis is always
/// first and is never filtered.
pub fn make_catalog(spec: &CatalogSpec, exec: Exec) -> Result<Vec<BasisFunction>> {
    let mut members: Vec<BasisFunction> = Vec::new();
    for family in &spec.families {
        if let FamilySpec::Ispline { degree, knots, interior } = family {
            let knots = match (knots, interior) {
                (Some(k), _) => k.clone(),
                (None, Some(n)) => uniform_knots(*n),
                (None, None) => uniform_knots(3),
            };
            members.extend(make_ispline_basis(*degree, &knots)?);
            continue;
        }
        let kinds = expand(family)?;
        let built = exec.map(&kinds, |k| BasisFunction::standardized(k.clone()));
        for b in built {
            members.push(b?);
        }
    }

    if let Some(filter) = &spec.filter {
        let (p_lo, p_hi) = filter.levels()?;
        let keep = exec.map(&members, |b| -> Result<bool> {
            Ok(b.eval(p_lo)? >= filter.q_min && b.eval(p_hi)? <= filter.q_max)
        });
        let mut kept = Vec::with_capacity(members.len());
        for (b, k) in members.into_iter().zip(keep) {
            if k? {
                kept.push(b);
            }
        }
        members = kept;
    }

    if spec.dedup {
        let probe: Vec<f64> = (1..=15).map(|k| k as f64 / 16.0).collect();
        let sigs = exec.map(&members, |b| probe.iter().map(|&p| b.eval(p)).collect::<Result<Vec<_>>>());
        let mut kept: Vec<(BasisFunction, Vec<f64>)> = Vec::new();
        for (b, sig) in members.into_iter().zip(sigs) {
            let sig = sig?;
            let dup = kept.iter().any(|(_, s)| {
                s.iter().zip(&sig).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
            });
            if !dup {
                kept.push((b, sig));
            }
        }
        members = kept.into_iter().map(|(b, _)| b).collect();
    }

    if members.is_empty() {
        return Err(Error::EmptyCatalog);
    }
    let mut out = Vec::with_capacity(members.len() + 1);
    out.push(BasisFunction::constant());
    out.extend(members);
    Ok(out)
}

/// Comma-separated dump: one row per member with kind, parameters, shift and
/// scale.
pub fn dump_catalog(catalog: &[BasisFunction]) -> String {
    let mut out = String::from("index,kind,params,shift,scale\n");
    for (i, b) in catalog.iter().enumerate() {
        let params: Vec<String> = b.kind().params().iter().map(|(k, v)| format!("{k}={v}")).collect();
        out.push_str(&format!(
            "{i},{},{},{},{}\n",
            b.kind().name(),
            params.join(";"),
            fmt_f64(b.shift()),
            fmt_f64(b.scale())
        ));
    }
    out
}
