//! Taxon labels and ordered taxon sets.

use std::collections::BTreeSet;
use std::fmt;

/// A leaf label. Ordering is plain lexicographic ordering of the label text,
/// which is the canonical order used everywhere in this crate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Taxon(String);

impl Taxon {
    pub fn new(label: impl Into<String>) -> Self {
        let label = label.into();
        assert!(!label.is_empty(), "taxon labels must be non-empty");
        Taxon(label)
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Taxon {
    fn from(s: &str) -> Self {
        Taxon::new(s)
    }
}

impl From<String> for Taxon {
    fn from(s: String) -> Self {
        Taxon::new(s)
    }
}

impl fmt::Display for Taxon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of distinct taxa. Iteration is always in canonical (lexicographic) order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct TaxonSet(BTreeSet<Taxon>);

impl TaxonSet {
    pub fn new() -> Self {
        TaxonSet(BTreeSet::new())
    }

    pub fn insert(&mut self, taxon: Taxon) -> bool {
        self.0.insert(taxon)
    }

    pub fn remove(&mut self, taxon: &Taxon) -> bool {
        self.0.remove(taxon)
    }

    pub fn contains(&self, taxon: &Taxon) -> bool {
        self.0.contains(taxon)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Taxon> {
        self.0.iter()
    }

    pub fn is_subset(&self, other: &TaxonSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &TaxonSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &TaxonSet) -> TaxonSet {
        TaxonSet(self.0.union(&other.0).cloned().collect())
    }

    pub fn difference(&self, other: &TaxonSet) -> TaxonSet {
        TaxonSet(self.0.difference(&other.0).cloned().collect())
    }

    pub fn intersection(&self, other: &TaxonSet) -> TaxonSet {
        TaxonSet(self.0.intersection(&other.0).cloned().collect())
    }

    /// Smallest taxon in canonical order; `None` for the empty set.
    pub fn smallest(&self) -> Option<&Taxon> {
        self.0.iter().next()
    }
}

impl FromIterator<Taxon> for TaxonSet {
    fn from_iter<I: IntoIterator<Item = Taxon>>(iter: I) -> Self {
        TaxonSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for TaxonSet {
    fn from_iter<I: IntoIterator<Item = &'a str>>(iter: I) -> Self {
        TaxonSet(iter.into_iter().map(Taxon::from).collect())
    }
}

impl<'a> IntoIterator for &'a TaxonSet {
    type Item = &'a Taxon;
    type IntoIter = std::collections::btree_set::Iter<'a, Taxon>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl IntoIterator for TaxonSet {
    type Item = Taxon;
    type IntoIter = std::collections::btree_set::IntoIter<Taxon>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

impl fmt::Display for TaxonSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for t in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_iteration_order() {
        let s: TaxonSet = ["c", "a", "b"].into_iter().collect();
        let order: Vec<&str> = s.iter().map(|t| t.as_str()).collect();
        assert_eq!(order, ["a", "b", "c"]);
    }

    #[test]
    fn duplicates_collapse() {
        let s: TaxonSet = ["a", "a", "b"].into_iter().collect();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn display_is_comma_joined() {
        let s: TaxonSet = ["b", "a"].into_iter().collect();
        assert_eq!(s.to_string(), "a,b");
    }
}
