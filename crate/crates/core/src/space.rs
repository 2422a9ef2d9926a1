//! Labeled tensor factorizations of finite-dimensional Hilbert spaces.
//!
//! Factors are kept in insertion order and every basis index is row-major:
//! the last factor varies fastest. Operations that build multipartite
//! results document the label order they produce.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Ordered list of labeled tensor factors.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Space {
    labels: Vec<String>,
    dims: Vec<usize>,
}

impl Space {
    pub fn new<I, S>(factors: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut labels = Vec::new();
        let mut dims = Vec::new();
        for (label, dim) in factors {
            let label = label.into();
            if dim == 0 {
                return Err(Error::InvalidArgument(format!(
                    "factor `{label}` has dimension 0"
                )));
            }
            if labels.contains(&label) {
                return Err(Error::LabelCollision(label));
            }
            labels.push(label);
            dims.push(dim);
        }
        Ok(Space { labels, dims })
    }

    pub fn single(label: impl Into<String>, dim: usize) -> Result<Self> {
        Space::new([(label.into(), dim)])
    }

    /// The one-dimensional space with no factors.
    pub fn trivial() -> Self {
        Space {
            labels: Vec::new(),
            dims: Vec::new(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::LabelNotFound(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn factors(&self) -> impl Iterator<Item = (&str, usize)> + '_ {
        self.labels
            .iter()
            .map(String::as_str)
            .zip(self.dims.iter().copied())
    }

    /// Concatenation `self ⊗ other`.
    pub fn concat(&self, other: &Space) -> Result<Space> {
        Space::new(self.factors().chain(other.factors()))
    }

    /// The factors named in `subs`, kept in `self`'s order.
    pub fn select(&self, subs: &Subsystems) -> Result<Space> {
        for label in subs.iter() {
            self.position(label)?;
        }
        Space::new(self.factors().filter(|(l, _)| subs.contains(l)))
    }

    /// Labels of `self` not named in `subs`.
    pub fn complement(&self, subs: &Subsystems) -> Subsystems {
        Subsystems {
            labels: self
                .labels
                .iter()
                .filter(|l| !subs.contains(l))
                .cloned()
                .collect(),
        }
    }

    pub fn subsystems(&self) -> Subsystems {
        Subsystems {
            labels: self.labels.clone(),
        }
    }

    /// Renames factors; labels absent from `map` are kept.
    pub fn relabel(&self, map: &[(&str, &str)]) -> Result<Space> {
        Space::new(self.factors().map(|(l, d)| {
            let new = map
                .iter()
                .find(|(from, _)| *from == l)
                .map_or(l, |(_, to)| *to);
            (new.to_string(), d)
        }))
    }

    /// Row-major strides of each factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    /// Reorders factors so that the result lists `order` (labels of `self`).
    pub fn reordered(&self, order: &[String]) -> Result<Space> {
        if order.len() != self.len() {
            return Err(Error::SpaceMismatch(format!(
                "reorder {:?} is not a permutation of {:?}",
                order, self.labels
            )));
        }
        Space::new(
            order
                .iter()
                .map(|l| self.dim_of(l).map(|d| (l.clone(), d)))
                .collect::<Result<Vec<_>>>()?,
        )
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, (l, d)) in self.factors().enumerate() {
            if i > 0 {
                write!(f, " ⊗ ")?;
            }
            write!(f, "{l}:{d}")?;
        }
        write!(f, "]")
    }
}

/// A selection of labeled factors. Order carries no meaning; results that
/// depend on order follow the parent factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize)]
pub struct Subsystems {
    labels: Vec<String>,
}

impl Subsystems {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for l in labels {
            let l = l.into();
            if out.contains(&l) {
                return Err(Error::LabelCollision(l));
            }
            out.push(l);
        }
        Ok(Subsystems { labels: out })
    }

    pub fn empty() -> Self {
        Subsystems::default()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.labels.iter().any(|l| l == label)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> + '_ {
        self.labels.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn union(&self, other: &Subsystems) -> Subsystems {
        let mut labels = self.labels.clone();
        for l in &other.labels {
            if !labels.contains(l) {
                labels.push(l.clone());
            }
        }
        Subsystems { labels }
    }

    pub fn as_slice(&self) -> &[String] {
        &self.labels
    }
}

/// A subset of the parties `[L] = {0, .., L-1}` stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn from_bits(bits: u32) -> Self {
        Subset(bits)
    }

    pub fn full(parties: usize) -> Self {
        assert!(parties < 32, "at most 31 parties");
        Subset((1u32 << parties) - 1)
    }

    pub fn from_members(members: &[usize]) -> Self {
        Subset(members.iter().fold(0, |acc, &m| acc | (1 << m)))
    }

    pub fn singleton(i: usize) -> Self {
        Subset(1 << i)
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << i) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn minus(self, other: Subset) -> Subset {
        Subset(self.0 & !other.0)
    }

    pub fn members(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }

    /// All subsets of `[parties]`, including the empty set, in bit order.
    pub fn all(parties: usize) -> impl Iterator<Item = Subset> {
        (0..(1u32 << parties)).map(Subset)
    }

    /// All nonempty subsets of `[parties]` in bit order.
    pub fn nonempty(parties: usize) -> impl Iterator<Item = Subset> {
        (1..(1u32 << parties)).map(Subset)
    }

    /// All subsets of `self`.
    pub fn subsets(self) -> impl Iterator<Item = Subset> {
        Subset::all(32 - self.0.leading_zeros() as usize)
            .filter(move |s| s.is_subset_of(self))
    }
}

impl fmt::Display for Subset {
    /// One-based member list, e.g. `{1,2}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, m) in self.members().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", m + 1)?;
        }
        write!(f, "}}")
    }
}

impl Serialize for Subset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// For every basis index of `target` (a reordering of `source`), the
/// matching basis index of `source`.
pub(crate) fn permutation_map(source: &Space, target: &Space) -> Result<Vec<usize>> {
    if source.len() != target.len() {
        return Err(Error::SpaceMismatch(format!("{source} vs {target}")));
    }
    let src_strides = source.strides();
    let mut strides = Vec::with_capacity(target.len());
    for (label, dim) in target.factors() {
        let p = source.position(label)?;
        if source.dims()[p] != dim {
            return Err(Error::SpaceMismatch(format!("{source} vs {target}")));
        }
        strides.push(src_strides[p]);
    }
    Ok(odometer(target.dims(), &strides))
}

/// Enumerates the multi-indices over `dims` in row-major order and returns
/// `Σ_k digit_k * strides[k]` for each.
pub(crate) fn odometer(dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let total: usize = dims.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![0usize; dims.len()];
    let mut offset = 0usize;
    for _ in 0..total {
        out.push(offset);
        for k in (0..dims.len()).rev() {
            digits[k] += 1;
            offset += strides[k];
            if digits[k] < dims[k] {
                break;
            }
            offset -= strides[k] * digits[k];
            digits[k] = 0;
        }
    }
    out
}
