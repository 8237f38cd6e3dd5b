use serde::Serialize;

use crate::error::{Error, Result};

/// An even-weight sequence `b_{2m}, b_{2(m+1)}, ..., b_{2K}` indexed by
/// half-weight; odd weights are implicitly zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EvenSeq<T> {
    m: u64,
    entries: Vec<T>,
}

impl<T> EvenSeq<T> {
    pub fn new(m: u64, entries: Vec<T>) -> Self {
        Self { m, entries }
    }

    /// Start half-weight.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// Last stored half-weight, `None` when empty.
    pub fn k_max(&self) -> Option<u64> {
        (!self.entries.is_empty()).then(|| self.m + self.entries.len() as u64 - 1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    /// `b_{2k}`.
    pub fn at(&self, k: u64) -> Option<&T> {
        k.checked_sub(self.m).and_then(|i| self.entries.get(i as usize))
    }

    /// Like `at`, for weight `2k` given directly.
    pub fn at_weight(&self, weight: u64) -> Option<&T> {
        if weight % 2 == 1 {
            return None;
        }
        self.at(weight / 2)
    }

    /// Half-weights paired with entries.
    pub fn iter(&self) -> impl Iterator<Item = (u64, &T)> {
        self.entries.iter().enumerate().map(move |(i, b)| (self.m + i as u64, b))
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> EvenSeq<U> {
        EvenSeq { m: self.m, entries: self.entries.iter().map(f).collect() }
    }

    /// Like `map`, with the half-weight passed alongside.
    pub fn map_indexed<U>(&self, mut f: impl FnMut(u64, &T) -> U) -> EvenSeq<U> {
        EvenSeq { m: self.m, entries: self.iter().map(|(k, b)| f(k, b)).collect() }
    }

    pub fn try_map_indexed<U>(&self, mut f: impl FnMut(u64, &T) -> Result<U>) -> Result<EvenSeq<U>> {
        let entries = self.iter().map(|(k, b)| f(k, b)).collect::<Result<_>>()?;
        Ok(EvenSeq { m: self.m, entries })
    }
}

impl<T: Clone> EvenSeq<T> {
    /// Entries from half-weight `from` through `to` (inclusive).
    pub fn window(&self, from: u64, to: u64) -> Result<EvenSeq<T>> {
        if from < self.m || self.k_max().map_or(true, |k| to > k) || from > to + 1 {
            return Err(Error::InvalidArgument(format!(
                "window [{from}, {to}] outside stored half-weights [{}, {:?}]",
                self.m,
                self.k_max()
            )));
        }
        let lo = (from - self.m) as usize;
        let hi = (to + 1 - self.m) as usize;
        Ok(EvenSeq { m: from, entries: self.entries[lo..hi].to_vec() })
    }

    /// Keeps half-weights `<= k`.
    pub fn truncate(&self, k: u64) -> EvenSeq<T> {
        let len = (k + 1).saturating_sub(self.m) as usize;
        EvenSeq { m: self.m, entries: self.entries.iter().take(len).cloned().collect() }
    }
}
