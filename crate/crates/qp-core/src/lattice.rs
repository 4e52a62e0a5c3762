//! Exact geometry on half-integer lattices.
//!
//! Every site set of the multi-scale analysis lives in a single coset
//! `Z^d + ½ Σ l_i`. Points are stored in doubled-integer coordinates so that
//! set membership, mirror maps and midpoints are exact; floating point only
//! enters when a point is paired with a frequency vector.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("parity mismatch: point does not lie in the region's coset")]
    ParityMismatch,
    #[error("midpoint undefined: doubled coordinates differ in parity")]
    MidpointParity,
    #[error("empty-region")]
    EmptyRegion,
    #[error("inner region is not contained in the outer region")]
    NotContained,
}

/// A point of `Z^d + ½ Σ l_i`, stored as doubled integers (the point is
/// `doubled / 2`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HalfLatticePoint {
    doubled: Vec<i64>,
}

impl HalfLatticePoint {
    pub fn new(doubled: Vec<i64>) -> Self {
        Self { doubled }
    }

    /// Point of `Z^d` from integer coordinates.
    pub fn integer(coords: &[i64]) -> Self {
        Self {
            doubled: coords.iter().map(|c| 2 * c).collect(),
        }
    }

    pub fn zero(d: usize) -> Self {
        Self {
            doubled: vec![0; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.doubled.len()
    }

    pub fn doubled(&self) -> &[i64] {
        &self.doubled
    }

    /// Real coordinates (`doubled / 2`).
    pub fn coords(&self) -> Vec<f64> {
        self.doubled.iter().map(|&c| c as f64 / 2.0).collect()
    }

    /// Componentwise parity class of the doubled coordinates.
    pub fn parity(&self) -> Vec<u8> {
        self.doubled.iter().map(|c| (c.rem_euclid(2)) as u8).collect()
    }

    /// True iff the point lies in `Z^d` (every doubled coordinate even).
    pub fn is_integer(&self) -> bool {
        self.doubled.iter().all(|c| c % 2 == 0)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            doubled: self
                .doubled
                .iter()
                .zip(&other.doubled)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            doubled: self
                .doubled
                .iter()
                .zip(&other.doubled)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            doubled: self.doubled.iter().map(|a| -a).collect(),
        }
    }

    /// Exact midpoint; exists iff the doubled coordinates agree in parity
    /// componentwise.
    pub fn midpoint(&self, other: &Self) -> Result<Self, LatticeError> {
        let mut doubled = Vec::with_capacity(self.doubled.len());
        for (a, b) in self.doubled.iter().zip(&other.doubled) {
            if (a - b) % 2 != 0 {
                return Err(LatticeError::MidpointParity);
            }
            doubled.push((a + b) / 2);
        }
        Ok(Self { doubled })
    }

    /// Point reflected through `center` (`2c - p`).
    pub fn mirror_through(&self, center: &Self) -> Self {
        Self {
            doubled: self
                .doubled
                .iter()
                .zip(&center.doubled)
                .map(|(p, c)| 2 * c - p)
                .collect(),
        }
    }

    /// Sup-norm distance to another point.
    pub fn dist(&self, other: &Self) -> f64 {
        self.doubled
            .iter()
            .zip(&other.doubled)
            .map(|(a, b)| (a - b).abs())
            .max()
            .unwrap_or(0) as f64
            / 2.0
    }

    /// ℓ¹ distance to another point.
    pub fn dist_l1(&self, other: &Self) -> f64 {
        self.doubled
            .iter()
            .zip(&other.doubled)
            .map(|(a, b)| (a - b).abs())
            .sum::<i64>() as f64
            / 2.0
    }

    /// Sup norm of the point itself.
    pub fn norm(&self) -> f64 {
        self.doubled.iter().map(|a| a.abs()).max().unwrap_or(0) as f64 / 2.0
    }

    /// Dot product with a real vector.
    pub fn dot(&self, v: &[f64]) -> f64 {
        self.doubled
            .iter()
            .zip(v)
            .map(|(&c, &w)| c as f64 * w)
            .sum::<f64>()
            / 2.0
    }
}

impl fmt::Display for HalfLatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coords: Vec<String> = self
            .doubled
            .iter()
            .map(|&c| {
                if c % 2 == 0 {
                    format!("{}", c / 2)
                } else {
                    format!("{}/2", c)
                }
            })
            .collect();
        write!(f, "({})", coords.join(","))
    }
}

/// A finite subset of one parity class of a half-integer lattice.
///
/// Iteration order is lexicographic on doubled coordinates everywhere, which
/// keeps downstream matrix indexing and tie-breaking reproducible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    d: usize,
    parity: Vec<u8>,
    points: BTreeSet<HalfLatticePoint>,
}

impl Region {
    pub fn empty(d: usize, parity: Vec<u8>) -> Self {
        Self {
            d,
            parity,
            points: BTreeSet::new(),
        }
    }

    /// Region from points; all points must share one parity class.
    pub fn from_points(points: impl IntoIterator<Item = HalfLatticePoint>) -> Result<Self, LatticeError> {
        let mut iter = points.into_iter();
        let first = iter.next().ok_or(LatticeError::EmptyRegion)?;
        let d = first.dim();
        let parity = first.parity();
        let mut set = BTreeSet::new();
        set.insert(first);
        for p in iter {
            if p.dim() != d {
                return Err(LatticeError::DimensionMismatch(p.dim(), d));
            }
            if p.parity() != parity {
                return Err(LatticeError::ParityMismatch);
            }
            set.insert(p);
        }
        Ok(Self {
            d,
            parity,
            points: set,
        })
    }

    /// `Λ_L(n) = {k : ‖k - n‖ ≤ L}` restricted to the given parity class.
    /// The radius may be fractional; the center may lie off the class.
    pub fn cube(radius: f64, center: &HalfLatticePoint, parity: &[u8]) -> Self {
        let d = center.dim();
        assert_eq!(parity.len(), d);
        let half_units = (2.0 * radius).floor() as i64; // |doubled delta| ≤ 2L
        let mut ranges: Vec<Vec<i64>> = Vec::with_capacity(d);
        for (i, &par) in parity.iter().enumerate() {
            let c = center.doubled()[i];
            let lo = c - half_units;
            let hi = c + half_units;
            let mut vals = Vec::new();
            let mut v = lo;
            // advance to the first value in the parity class
            while v.rem_euclid(2) != par as i64 {
                v += 1;
            }
            while v <= hi {
                vals.push(v);
                v += 2;
            }
            ranges.push(vals);
        }
        let mut points = BTreeSet::new();
        let mut idx = vec![0usize; d];
        if ranges.iter().all(|r| !r.is_empty()) {
            loop {
                let doubled: Vec<i64> = idx.iter().enumerate().map(|(i, &j)| ranges[i][j]).collect();
                points.insert(HalfLatticePoint::new(doubled));
                let mut i = 0;
                loop {
                    if i == d {
                        return Self {
                            d,
                            parity: parity.to_vec(),
                            points,
                        };
                    }
                    idx[i] += 1;
                    if idx[i] < ranges[i].len() {
                        break;
                    }
                    idx[i] = 0;
                    i += 1;
                }
            }
        }
        Self {
            d,
            parity: parity.to_vec(),
            points,
        }
    }

    /// Integer-lattice cube `Λ_L(n) ⊂ Z^d`.
    pub fn integer_cube(radius: f64, center: &HalfLatticePoint) -> Self {
        Self::cube(radius, center, &vec![0; center.dim()])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn parity(&self) -> &[u8] {
        &self.parity
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &HalfLatticePoint> {
        self.points.iter()
    }

    pub fn contains(&self, p: &HalfLatticePoint) -> bool {
        self.points.contains(p)
    }

    pub fn contains_region(&self, other: &Region) -> bool {
        other.points.is_subset(&self.points)
    }

    pub fn intersects(&self, other: &Region) -> bool {
        // iterate over the smaller set
        let (a, b) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        a.points.iter().any(|p| b.points.contains(p))
    }

    pub fn union(&self, other: &Region) -> Result<Region, LatticeError> {
        if self.parity != other.parity {
            return Err(LatticeError::ParityMismatch);
        }
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(Region {
            d: self.d,
            parity: self.parity.clone(),
            points,
        })
    }

    pub fn difference(&self, other: &Region) -> Region {
        Region {
            d: self.d,
            parity: self.parity.clone(),
            points: self.points.difference(&other.points).cloned().collect(),
        }
    }

    pub fn translate(&self, v: &HalfLatticePoint) -> Region {
        let points: BTreeSet<_> = self.points.iter().map(|p| p.add(v)).collect();
        let parity = points
            .iter()
            .next()
            .map(|p| p.parity())
            .unwrap_or_else(|| self.parity.clone());
        Region {
            d: self.d,
            parity,
            points,
        }
    }

    /// Sup-norm diameter. Equals the max coordinate range, so this is O(n·d).
    pub fn diam(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let mut span = 0i64;
        for i in 0..self.d {
            let mut lo = i64::MAX;
            let mut hi = i64::MIN;
            for p in &self.points {
                lo = lo.min(p.doubled()[i]);
                hi = hi.max(p.doubled()[i]);
            }
            span = span.max(hi - lo);
        }
        span as f64 / 2.0
    }

    /// Sup-norm distance between two regions (`+∞` if either is empty).
    pub fn dist(&self, other: &Region) -> f64 {
        if self.is_empty() || other.is_empty() {
            return f64::INFINITY;
        }
        let mut best = f64::INFINITY;
        for p in &self.points {
            for q in &other.points {
                let d = p.dist(q);
                if d < best {
                    best = d;
                    if best == 0.0 {
                        return 0.0;
                    }
                }
            }
        }
        best
    }

    /// Sup-norm distance from a point to the region.
    pub fn dist_point(&self, p: &HalfLatticePoint) -> f64 {
        self.points
            .iter()
            .map(|q| p.dist(q))
            .fold(f64::INFINITY, f64::min)
    }

    /// `p ∈ Λ ⇔ 2c - p ∈ Λ`.
    pub fn symmetric_about(&self, center: &HalfLatticePoint) -> bool {
        self.points
            .iter()
            .all(|p| self.points.contains(&p.mirror_through(center)))
    }

    /// Inner boundary `∂⁻_outer(inner)`: points of `inner` at sup-distance 1
    /// from `outer ∖ inner`.
    pub fn inner_boundary(inner: &Region, outer: &Region) -> Result<Vec<HalfLatticePoint>, LatticeError> {
        if !outer.contains_region(inner) {
            return Err(LatticeError::NotContained);
        }
        let complement = outer.difference(inner);
        Ok(inner
            .iter()
            .filter(|p| complement.points.iter().any(|q| p.dist(q) == 1.0))
            .cloned()
            .collect())
    }

    /// Outer boundary `∂⁺_outer(inner)`: points of `outer` at sup-distance 1
    /// from `inner`.
    pub fn outer_boundary(inner: &Region, outer: &Region) -> Result<Vec<HalfLatticePoint>, LatticeError> {
        if !outer.contains_region(inner) {
            return Err(LatticeError::NotContained);
        }
        Ok(outer
            .difference(inner)
            .iter()
            .filter(|p| inner.points.iter().any(|q| p.dist(q) == 1.0))
            .cloned()
            .collect())
    }

    /// Boundary pairs `∂_outer(inner) = {(k, k') : ‖k - k'‖ = 1}` with
    /// `k ∈ ∂⁻`, `k' ∈ ∂⁺`.
    pub fn boundary(
        inner: &Region,
        outer: &Region,
    ) -> Result<Vec<(HalfLatticePoint, HalfLatticePoint)>, LatticeError> {
        let minus = Self::inner_boundary(inner, outer)?;
        let plus = Self::outer_boundary(inner, outer)?;
        let mut pairs = Vec::new();
        for k in &minus {
            for k2 in &plus {
                if k.dist(k2) == 1.0 {
                    pairs.push((k.clone(), k2.clone()));
                }
            }
        }
        Ok(pairs)
    }
}
