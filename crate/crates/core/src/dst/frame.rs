use std::fmt;
use std::ops::{BitAnd, BitOr};

use super::DstError;

/// Largest supported number of hypotheses in a frame.
pub const MAX_FRAME_SIZE: usize = 16;

/// A subset of a frame of discernment, encoded as a bitmask over the frame's
/// label order. Bit `k` set means the `k`-th hypothesis belongs to the set.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub const fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub const fn singleton(index: usize) -> Self {
        Subset(1 << index)
    }

    /// The full set `Ω` of a frame with `n` hypotheses.
    pub const fn full(n: usize) -> Self {
        Subset(((1u64 << n) - 1) as u32)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// Position of this subset in a dense mass array.
    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub const fn len(self) -> u32 {
        self.0.count_ones()
    }

    pub const fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub const fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub const fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub const fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub const fn without(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    /// Indices of the hypotheses in this subset, ascending.
    pub fn elements(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..32).filter(move |k| bits & (1 << k) != 0)
    }
}

impl BitAnd for Subset {
    type Output = Subset;

    fn bitand(self, rhs: Subset) -> Subset {
        self.intersect(rhs)
    }
}

impl BitOr for Subset {
    type Output = Subset;

    fn bitor(self, rhs: Subset) -> Subset {
        self.union(rhs)
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subset({:#b})", self.0)
    }
}

/// A finite, ordered set of mutually exclusive hypotheses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameOfDiscernment {
    labels: Vec<String>,
}

impl FrameOfDiscernment {
    pub fn new<I, S>(labels: I) -> Result<Self, DstError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() || labels.len() > MAX_FRAME_SIZE {
            return Err(DstError::FrameSize(labels.len()));
        }
        for (k, label) in labels.iter().enumerate() {
            if label.trim().is_empty() {
                return Err(DstError::InvalidLabel(label.clone()));
            }
            if labels[..k].contains(label) {
                return Err(DstError::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Number of subsets, `2^n`.
    pub fn subset_count(&self) -> usize {
        1 << self.labels.len()
    }

    pub fn omega(&self) -> Subset {
        Subset::full(self.labels.len())
    }

    pub fn contains(&self, subset: Subset) -> bool {
        subset.is_subset_of(self.omega())
    }

    /// All subsets in index order, `∅` first and `Ω` last.
    pub fn subsets(&self) -> impl Iterator<Item = Subset> {
        (0..self.subset_count() as u32).map(Subset::from_bits)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn subset<S: AsRef<str>>(&self, labels: &[S]) -> Result<Subset, DstError> {
        labels.iter().try_fold(Subset::EMPTY, |acc, label| {
            let label = label.as_ref();
            self.index_of(label)
                .map(|k| acc | Subset::singleton(k))
                .ok_or_else(|| DstError::UnknownLabel(label.to_string()))
        })
    }

    /// Human readable form such as `{F,S,M}`; `∅` for the empty set.
    pub fn describe(&self, subset: Subset) -> String {
        if subset.is_empty() {
            return "∅".to_string();
        }
        let names: Vec<&str> = subset
            .elements()
            .filter_map(|k| self.labels.get(k).map(String::as_str))
            .collect();
        format!("{{{}}}", names.join(","))
    }

    /// ASCII column name used in grid exports: `m_empty`, `m_F`, `m_F_S_M`, ...
    pub fn column_name(&self, subset: Subset) -> String {
        if subset.is_empty() {
            return "m_empty".to_string();
        }
        let names: Vec<&str> = subset
            .elements()
            .filter_map(|k| self.labels.get(k).map(String::as_str))
            .collect();
        format!("m_{}", names.join("_"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_frames() {
        assert_eq!(
            FrameOfDiscernment::new(Vec::<String>::new()),
            Err(DstError::FrameSize(0))
        );
        assert!(matches!(
            FrameOfDiscernment::new(["a", "a"]),
            Err(DstError::DuplicateLabel(_))
        ));
        assert!(matches!(
            FrameOfDiscernment::new(["a", " "]),
            Err(DstError::InvalidLabel(_))
        ));
        let many: Vec<String> = (0..17).map(|k| format!("h{k}")).collect();
        assert_eq!(FrameOfDiscernment::new(many), Err(DstError::FrameSize(17)));
    }

    #[test]
    fn subset_addressing() {
        let frame = FrameOfDiscernment::new(["F", "I", "U", "S", "M"]).unwrap();
        assert_eq!(frame.subset_count(), 32);
        assert_eq!(frame.omega().index(), 31);
        let sm = frame.subset(&["S", "M"]).unwrap();
        assert_eq!(sm.bits(), 0b11000);
        assert_eq!(frame.describe(sm), "{S,M}");
        assert_eq!(frame.column_name(sm), "m_S_M");
        assert_eq!(frame.describe(Subset::EMPTY), "∅");
        assert!(matches!(
            frame.subset(&["X"]),
            Err(DstError::UnknownLabel(_))
        ));
        assert_eq!(Subset::full(16).bits(), 0xFFFF);
    }
}
