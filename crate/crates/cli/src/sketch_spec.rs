//! Sketch syntax: `coord:i,j,...`, `topcoef:k`, `pca:k`, `rand:k[:seed]`.

use std::fmt;
use std::str::FromStr;

use sketchreg_core::glm::DataSet;
use sketchreg_core::sketch::{coordinate_sketch, pca_sketch, random_orthonormal_sketch, top_coefficient_sketch, SketchMatrix};
use sketchreg_core::solver::{fit_full, require_converged, SolveConfig};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SketchSpec {
    Coord(Vec<usize>),
    TopCoef(usize),
    Pca(usize),
    /// Seed `None` defers to the caller (the experiment seed, or 0).
    Rand { k: usize, seed: Option<u64> },
}

impl SketchSpec {
    pub fn k(&self) -> usize {
        match self {
            SketchSpec::Coord(idx) => idx.len(),
            SketchSpec::TopCoef(k) | SketchSpec::Pca(k) | SketchSpec::Rand { k, .. } => *k,
        }
    }

    /// `topcoef` needs the full optimum at `lambda`, so it fits one.
    pub fn build(&self, data: &DataSet, lambda: f64, cfg: &SolveConfig, default_seed: u64) -> sketchreg_core::Result<SketchMatrix> {
        match self {
            SketchSpec::Coord(idx) => coordinate_sketch(data.d(), idx),
            SketchSpec::TopCoef(k) => {
                let full = require_converged(fit_full(data, lambda, cfg)?, "full fit")?;
                top_coefficient_sketch(&full.beta, *k)
            }
            SketchSpec::Pca(k) => pca_sketch(&data.x, *k),
            SketchSpec::Rand { k, seed } => random_orthonormal_sketch(data.d(), *k, seed.unwrap_or(default_seed)),
        }
    }
}

impl FromStr for SketchSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let bad = |why: &str| format!("bad sketch {s:?}: {why} (expected coord:i,j,... | topcoef:k | pca:k | rand:k[:seed])");
        let (kind, rest) = s.split_once(':').ok_or_else(|| bad("missing ':'"))?;
        let count = |t: &str| -> Result<usize, String> {
            match t.trim().parse::<usize>() {
                Ok(k) if k > 0 => Ok(k),
                _ => Err(bad("k must be a positive integer")),
            }
        };
        match kind.trim() {
            "coord" => {
                let idx = rest
                    .split(',')
                    .map(|t| t.trim().parse::<usize>().map_err(|_| bad("indices must be nonnegative integers")))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(SketchSpec::Coord(idx))
            }
            "topcoef" => Ok(SketchSpec::TopCoef(count(rest)?)),
            "pca" => Ok(SketchSpec::Pca(count(rest)?)),
            "rand" => match rest.split_once(':') {
                Some((k, seed)) => Ok(SketchSpec::Rand {
                    k: count(k)?,
                    seed: Some(seed.trim().parse().map_err(|_| bad("seed must be an unsigned integer"))?),
                }),
                None => Ok(SketchSpec::Rand { k: count(rest)?, seed: None }),
            },
            _ => Err(bad("unknown kind")),
        }
    }
}

impl fmt::Display for SketchSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SketchSpec::Coord(idx) => {
                let list: Vec<String> = idx.iter().map(usize::to_string).collect();
                write!(f, "coord:{}", list.join(","))
            }
            SketchSpec::TopCoef(k) => write!(f, "topcoef:{k}"),
            SketchSpec::Pca(k) => write!(f, "pca:{k}"),
            SketchSpec::Rand { k, seed: Some(s) } => write!(f, "rand:{k}:{s}"),
            SketchSpec::Rand { k, seed: None } => write!(f, "rand:{k}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        for s in ["coord:0,2,5", "topcoef:3", "pca:1", "rand:4:99", "rand:2"] {
            let spec: SketchSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert_eq!("coord: 1, 3".parse::<SketchSpec>().unwrap(), SketchSpec::Coord(vec![1, 3]));
        assert_eq!("rand:4:99".parse::<SketchSpec>().unwrap().k(), 4);
        for s in ["pca", "pca:0", "pca:x", "coord:", "coord:1,-2", "rand:3:x", "svd:2"] {
            assert!(s.parse::<SketchSpec>().is_err(), "{s}");
        }
    }
}
