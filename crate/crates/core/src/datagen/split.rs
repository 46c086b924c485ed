use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Validation => "validation",
            Split::Test => "test",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

/// Sample indices per split.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

impl DatasetSplit {
    pub fn counts(&self) -> [usize; 3] {
        [self.train.len(), self.validation.len(), self.test.len()]
    }
}

/// Holds out `test_fraction` of the groups for testing, then
/// `validation_fraction` of the remaining groups for validation. Samples
/// sharing a group id always land in the same split.
pub fn split_groups(groups: &[u64], test_fraction: f64, validation_fraction: f64, seed: u64) -> Result<(Vec<Split>, DatasetSplit)> {
    if groups.len() < 10 {
        return Err(Error::invalid(format!("need at least 10 samples to split, got {}", groups.len())));
    }
    if !(0.0..1.0).contains(&test_fraction) || !(0.0..1.0).contains(&validation_fraction) {
        return Err(Error::invalid("split fractions must lie in [0, 1)"));
    }
    let mut ids: Vec<u64> = groups.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.shuffle(&mut rng::stream(seed, 0x5917));
    let n_test = (ids.len() as f64 * test_fraction).round() as usize;
    let n_val = ((ids.len() - n_test) as f64 * validation_fraction).round() as usize;
    let tag: BTreeMap<u64, Split> = ids
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let s = if k < n_test {
                Split::Test
            } else if k < n_test + n_val {
                Split::Validation
            } else {
                Split::Train
            };
            (*g, s)
        })
        .collect();
    let tags: Vec<Split> = groups.iter().map(|g| tag[g]).collect();
    let mut out = DatasetSplit::default();
    for (i, s) in tags.iter().enumerate() {
        match s {
            Split::Train => out.train.push(i),
            Split::Validation => out.validation.push(i),
            Split::Test => out.test.push(i),
        }
    }
    Ok((tags, out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_and_disjointness() {
        let groups: Vec<u64> = (0..100).collect();
        let (_, s) = split_groups(&groups, 0.2, 0.2, 1).unwrap();
        assert_eq!(s.counts(), [64, 16, 20]);
        let mut all: Vec<usize> = s.train.iter().chain(&s.validation).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
        assert_eq!(split_groups(&groups, 0.2, 0.2, 1).unwrap().1, s);
        assert_ne!(split_groups(&groups, 0.2, 0.2, 2).unwrap().1, s);
    }

    #[test]
    fn groups_never_straddle() {
        let groups: Vec<u64> = (0..500).map(|i| i / 10).collect();
        let (tags, _) = split_groups(&groups, 0.2, 0.2, 3).unwrap();
        for g in tags.chunks(10) {
            assert!(g.iter().all(|t| *t == g[0]));
        }
    }

    #[test]
    fn too_small_is_rejected() {
        assert!(split_groups(&[1, 2, 3], 0.2, 0.2, 0).is_err());
    }
}
