use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Alignment {
    Aligned,
    Conflicting,
}

/// Per-bias alignment of a sample, e.g. `AC` = aligned on bias 0,
/// conflicting on bias 1.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AlignmentPattern(pub Vec<Alignment>);

impl AlignmentPattern {
    /// Bit `k` of `mask` set means bias `k` is conflicting.
    pub fn from_mask(mask: usize, n_biases: usize) -> Self {
        Self(
            (0..n_biases)
                .map(|k| {
                    if mask >> k & 1 == 1 {
                        Alignment::Conflicting
                    } else {
                        Alignment::Aligned
                    }
                })
                .collect(),
        )
    }

    pub fn mask(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, a)| **a == Alignment::Conflicting)
            .map(|(k, _)| 1 << k)
            .sum()
    }

    /// All `2^K` patterns in lexicographic order (`AA`, `AC`, `CA`, `CC` for K = 2).
    pub fn all(n_biases: usize) -> Vec<Self> {
        let mut out: Vec<Self> = (0..1usize << n_biases)
            .map(|m| Self::from_mask(m, n_biases))
            .collect();
        out.sort();
        out
    }

    pub fn n_biases(&self) -> usize {
        self.0.len()
    }

    pub fn is_all_aligned(&self) -> bool {
        self.0.iter().all(|a| *a == Alignment::Aligned)
    }

    pub fn is_conflicting(&self) -> bool {
        !self.is_all_aligned()
    }

    pub fn with(&self, k: usize, value: Alignment) -> Self {
        let mut out = self.clone();
        out.0[k] = value;
        out
    }
}

impl fmt::Display for AlignmentPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.0 {
            f.write_str(match a {
                Alignment::Aligned => "A",
                Alignment::Conflicting => "C",
            })?;
        }
        Ok(())
    }
}

/// Joint group: target class together with the alignment pattern.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroupId {
    pub target: usize,
    pub alignment: AlignmentPattern,
}

impl GroupId {
    /// All `C · 2^K` joint groups, ordered by target then pattern.
    pub fn all(n_classes: usize, n_biases: usize) -> Vec<Self> {
        let patterns = AlignmentPattern::all(n_biases);
        (0..n_classes)
            .flat_map(|target| {
                patterns.iter().map(move |p| GroupId {
                    target,
                    alignment: p.clone(),
                })
            })
            .collect()
    }

    /// Dense index `target · 2^K + mask`.
    pub fn index(&self) -> usize {
        (self.target << self.alignment.n_biases()) + self.alignment.mask()
    }
}

impl fmt::Display for GroupId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y{}_{}", self.target, self.alignment)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_order_and_names() {
        let names: Vec<String> = AlignmentPattern::all(2).iter().map(|p| p.to_string()).collect();
        assert_eq!(names, ["AA", "AC", "CA", "CC"]);
        let p = AlignmentPattern::from_mask(0b01, 2);
        assert_eq!(p.to_string(), "CA");
        assert_eq!(p.mask(), 1);
    }

    #[test]
    fn group_index_is_dense() {
        let groups = GroupId::all(3, 2);
        assert_eq!(groups.len(), 12);
        let mut idx: Vec<usize> = groups.iter().map(GroupId::index).collect();
        idx.sort_unstable();
        assert_eq!(idx, (0..12).collect::<Vec<_>>());
        assert_eq!(groups[5].to_string(), "y1_AC");
    }
}
