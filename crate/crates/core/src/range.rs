/// Closed interval of lattice sites, possibly empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteRange {
    pub lo: i64,
    pub hi: i64,
}

impl SiteRange {
    pub const EMPTY: SiteRange = SiteRange { lo: 0, hi: -1 };

    pub fn new(lo: i64, hi: i64) -> Self {
        if lo > hi {
            Self::EMPTY
        } else {
            SiteRange { lo, hi }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn contains(&self, site: i64) -> bool {
        !self.is_empty() && site >= self.lo && site <= self.hi
    }

    pub fn union(&self, other: SiteRange) -> SiteRange {
        if self.is_empty() {
            other
        } else if other.is_empty() {
            *self
        } else {
            SiteRange::new(self.lo.min(other.lo), self.hi.max(other.hi))
        }
    }

    pub fn expand(&self, margin: i64) -> SiteRange {
        if self.is_empty() {
            *self
        } else {
            SiteRange::new(self.lo - margin, self.hi + margin)
        }
    }

    /// Intersect with [0, inf), used for half-line operators.
    pub fn clip_nonneg(&self) -> SiteRange {
        if self.is_empty() {
            *self
        } else {
            SiteRange::new(self.lo.max(0), self.hi)
        }
    }

    pub fn intersect(&self, other: SiteRange) -> SiteRange {
        if self.is_empty() || other.is_empty() {
            Self::EMPTY
        } else {
            SiteRange::new(self.lo.max(other.lo), self.hi.min(other.hi))
        }
    }

    /// Image under the fold reflection `n -> -n-1`.
    pub fn reflect(&self) -> SiteRange {
        if self.is_empty() {
            *self
        } else {
            SiteRange::new(-self.hi - 1, -self.lo - 1)
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    /// Position of `site` inside the range (caller must ensure membership).
    pub fn offset_of(&self, site: i64) -> usize {
        debug_assert!(self.contains(site));
        (site - self.lo) as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_behaves() {
        let e = SiteRange::EMPTY;
        assert!(e.is_empty());
        assert_eq!(e.len(), 0);
        assert!(!e.contains(0));
        assert_eq!(e.union(SiteRange::new(2, 5)), SiteRange::new(2, 5));
    }

    #[test]
    fn reflect_is_involutive() {
        let r = SiteRange::new(-3, 7);
        assert_eq!(r.reflect().reflect(), r);
    }
}
