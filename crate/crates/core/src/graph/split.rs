use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Graph, NodeId, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SplitPolicy {
    /// Fractions of all nodes; must sum to 1.
    Ratio { train: f64, val: f64, test: f64 },
    /// `train` labeled nodes per class, then `val` and `test` nodes drawn
    /// from the remaining labeled nodes. Everything else stays unassigned.
    PerClass { train: usize, val: usize, test: usize },
}

impl SplitPolicy {
    pub fn ratio(train: f64, val: f64, test: f64) -> Result<Self> {
        let fractions = [train, val, test];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::InvalidSplit(format!(
                "fractions must lie in [0, 1], got {fractions:?}"
            )));
        }
        let sum: f64 = fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplit(format!(
                "fractions sum to {sum}, expected 1"
            )));
        }
        Ok(SplitPolicy::Ratio { train, val, test })
    }

    /// Parses `ratio:0.54,0.18,0.28` or `per-class:20[,500,1000]`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSplit(format!("cannot parse policy {s:?}"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        match kind.trim() {
            "ratio" => {
                let v: Vec<f64> = args
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                match v.as_slice() {
                    [a, b, c] => SplitPolicy::ratio(*a, *b, *c),
                    _ => Err(bad()),
                }
            }
            "per-class" => {
                let v: Vec<usize> = args
                    .split(',')
                    .map(|x| x.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                match v.as_slice() {
                    [n] => Ok(SplitPolicy::PerClass {
                        train: *n,
                        val: 500,
                        test: 1000,
                    }),
                    [n, val, test] => Ok(SplitPolicy::PerClass {
                        train: *n,
                        val: *val,
                        test: *test,
                    }),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            SplitPolicy::Ratio { train, val, test } => format!("ratio:{train},{val},{test}"),
            SplitPolicy::PerClass { train, val, test } => {
                format!("per-class:{train},{val},{test}")
            }
        }
    }
}

/// Assigns split tags. Deterministic for a fixed seed.
pub fn make_split(g: &Graph, policy: &SplitPolicy, seed: u64) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.num_nodes();
    let mut splits = vec![Split::Unassigned; n];
    match *policy {
        SplitPolicy::Ratio { train, val, test } => {
            SplitPolicy::ratio(train, val, test)?;
            let mut order: Vec<NodeId> = (0..n).collect();
            order.shuffle(&mut rng);
            let n_train = ((train * n as f64).round() as usize).min(n);
            let n_val = ((val * n as f64).round() as usize).min(n - n_train);
            for (i, &v) in order.iter().enumerate() {
                splits[v] = if i < n_train {
                    Split::Train
                } else if i < n_train + n_val {
                    Split::Val
                } else {
                    Split::Test
                };
            }
        }
        SplitPolicy::PerClass { train, val, test } => {
            let categories = g.categories();
            let mut by_class: Vec<Vec<NodeId>> = vec![Vec::new(); categories.len()];
            for v in 0..n {
                if let Some(l) = g.label(v) {
                    by_class[l].push(v);
                }
            }
            if by_class.iter().all(Vec::is_empty) {
                return Err(Error::InvalidSplit(
                    "per-class policy needs labeled nodes".into(),
                ));
            }
            let mut rest = Vec::new();
            for (class, members) in by_class.iter_mut().enumerate() {
                if members.len() < train {
                    return Err(Error::InsufficientClass {
                        class: categories[class].clone(),
                        available: members.len(),
                        required: train,
                    });
                }
                members.shuffle(&mut rng);
                for &v in &members[..train] {
                    splits[v] = Split::Train;
                }
                rest.extend_from_slice(&members[train..]);
            }
            rest.sort_unstable();
            rest.shuffle(&mut rng);
            let n_val = val.min(rest.len());
            let n_test = test.min(rest.len() - n_val);
            for &v in &rest[..n_val] {
                splits[v] = Split::Val;
            }
            for &v in &rest[n_val..n_val + n_test] {
                splits[v] = Split::Test;
            }
        }
    }
    g.with_splits(splits)
}
