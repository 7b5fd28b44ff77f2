//! Finite outcome spaces.
//!
//! A [`FinSpace`] is an ordered list of atomic factors. An ordinary space
//! has one factor; a product space has several, and its elements are the
//! lexicographic product of the factors' label lists (leftmost factor most
//! significant). Products are always kept flat, so `(A⊗B)⊗C` and `A⊗(B⊗C)`
//! are the same concrete space. The unit space `𝟙` has zero factors and a
//! single element, written `*`.

use super::FinStochError;

/// One atomic factor of a space: a name and an ordered list of distinct
/// outcome labels.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    name: String,
    labels: Vec<String>,
}

impl Factor {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// A finite outcome space: zero or more atomic factors, kept flat.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FinSpace {
    factors: Vec<Factor>,
}

impl FinSpace {
    /// An atomic space from a name and its outcome labels. Labels must be
    /// nonempty and pairwise distinct.
    pub fn new(
        name: impl Into<String>,
        labels: impl IntoIterator<Item = impl Into<String>>,
    ) -> Result<Self, FinStochError> {
        let name = name.into();
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(FinStochError::EmptySpace { space: name });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(FinStochError::DuplicateLabel {
                    space: name,
                    label: label.clone(),
                });
            }
        }
        Ok(FinSpace {
            factors: vec![Factor { name, labels }],
        })
    }

    /// The one-element unit space `𝟙`.
    pub fn unit() -> Self {
        FinSpace {
            factors: Vec::new(),
        }
    }

    /// The product `self ⊗ other`, flattened.
    pub fn tensor(&self, other: &FinSpace) -> FinSpace {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        FinSpace { factors }
    }

    /// n-fold tensor product of a list of spaces, flattened.
    pub fn tensor_all<'a>(spaces: impl IntoIterator<Item = &'a FinSpace>) -> FinSpace {
        let mut factors = Vec::new();
        for s in spaces {
            factors.extend(s.factors.iter().cloned());
        }
        FinSpace { factors }
    }

    /// Display name: factor names joined by `⊗`, or `𝟙` for the unit space.
    pub fn name(&self) -> String {
        if self.factors.is_empty() {
            "𝟙".to_string()
        } else {
            self.factors
                .iter()
                .map(|f| f.name.as_str())
                .collect::<Vec<_>>()
                .join("⊗")
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn factor_count(&self) -> usize {
        self.factors.len()
    }

    /// True for a declared product (two or more factors).
    pub fn is_product(&self) -> bool {
        self.factors.len() >= 2
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    /// Number of elements (product of factor sizes; 1 for the unit space).
    pub fn len(&self) -> usize {
        self.factors.iter().map(Factor::len).product()
    }

    pub fn is_empty(&self) -> bool {
        false // every well-formed space has at least one element
    }

    /// Iterator over element indices in lexicographic order.
    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.len()
    }

    /// Decodes an element index into per-factor indices (mixed radix,
    /// leftmost factor most significant).
    pub fn decode(&self, index: usize) -> Vec<usize> {
        debug_assert!(index < self.len());
        let mut out = vec![0; self.factors.len()];
        let mut rest = index;
        for (slot, factor) in out.iter_mut().zip(&self.factors).rev() {
            *slot = rest % factor.len();
            rest /= factor.len();
        }
        out
    }

    /// Inverse of [`FinSpace::decode`].
    pub fn encode(&self, parts: &[usize]) -> usize {
        debug_assert_eq!(parts.len(), self.factors.len());
        let mut index = 0;
        for (part, factor) in parts.iter().zip(&self.factors) {
            debug_assert!(*part < factor.len());
            index = index * factor.len() + part;
        }
        index
    }

    /// Label of an element: the bare label for atomic spaces, a tuple like
    /// `(a,b)` for products, `*` for the unit element.
    pub fn label(&self, index: usize) -> String {
        match self.factors.len() {
            0 => "*".to_string(),
            1 => self.factors[0].labels[index].clone(),
            _ => {
                let parts = self.decode(index);
                let joined = parts
                    .iter()
                    .zip(&self.factors)
                    .map(|(i, f)| f.labels[*i].as_str())
                    .collect::<Vec<_>>()
                    .join(",");
                format!("({joined})")
            }
        }
    }

    /// All element labels in order.
    pub fn labels(&self) -> Vec<String> {
        self.elements().map(|i| self.label(i)).collect()
    }

    /// Index of the element with the given label.
    pub fn index_of(&self, label: &str) -> Option<usize> {
        if self.factors.len() == 1 {
            return self.factors[0].labels.iter().position(|l| l == label);
        }
        self.elements().find(|&i| self.label(i) == label)
    }

    /// Like [`FinSpace::index_of`] but returns a typed error naming the space.
    pub fn resolve(&self, label: &str) -> Result<usize, FinStochError> {
        self.index_of(label).ok_or_else(|| FinStochError::UnknownLabel {
            label: label.to_string(),
            space: self.name(),
        })
    }

    /// The sub-space made of the given factor positions, in the given order.
    pub fn factor_subspace(&self, positions: &[usize]) -> Result<FinSpace, FinStochError> {
        let mut factors = Vec::with_capacity(positions.len());
        for &p in positions {
            let factor = self.factors.get(p).ok_or(FinStochError::FactorOutOfRange {
                index: p,
                space: self.name(),
            })?;
            factors.push(factor.clone());
        }
        Ok(FinSpace { factors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> FinSpace {
        FinSpace::new("A", ["a0", "a1"]).unwrap()
    }

    fn cde() -> FinSpace {
        FinSpace::new("C", ["c0", "c1", "c2"]).unwrap()
    }

    #[test]
    fn rejects_empty_and_duplicate_labels() {
        assert!(matches!(
            FinSpace::new("E", Vec::<String>::new()).unwrap_err(),
            FinStochError::EmptySpace { .. }
        ));
        assert!(matches!(
            FinSpace::new("D", ["x", "x"]).unwrap_err(),
            FinStochError::DuplicateLabel { .. }
        ));
    }

    #[test]
    fn product_is_lexicographic() {
        let p = ab().tensor(&cde());
        assert_eq!(p.len(), 6);
        assert_eq!(p.label(0), "(a0,c0)");
        assert_eq!(p.label(1), "(a0,c1)");
        assert_eq!(p.label(3), "(a1,c0)");
        assert_eq!(p.index_of("(a1,c2)"), Some(5));
    }

    #[test]
    fn products_flatten() {
        let left = ab().tensor(&cde()).tensor(&ab());
        let right = ab().tensor(&cde().tensor(&ab()));
        assert_eq!(left, right);
        assert_eq!(left.factor_count(), 3);
        assert_eq!(left.name(), "A⊗C⊗A");
    }

    #[test]
    fn unit_space_has_one_element() {
        let unit = FinSpace::unit();
        assert_eq!(unit.len(), 1);
        assert_eq!(unit.label(0), "*");
        assert_eq!(ab().tensor(&unit), ab());
    }

    #[test]
    fn encode_decode_roundtrip() {
        let p = cde().tensor(&ab()).tensor(&cde());
        for i in p.elements() {
            assert_eq!(p.encode(&p.decode(i)), i);
        }
    }
}
