use std::fmt;

use crate::error::{Error, Result};
use crate::expr::FuncExpr;

/// Largest number of spectral values on either grid axis.
pub const MAX_AXIS: usize = 64;

/// A subset of the grid `σ_p(A) × σ_p(B)`, stored as one column bitmask per
/// row: cell `(i, k)` is the pair `(λ_i, μ_k)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GridRegion {
    n: usize,
    m: usize,
    rows: Vec<u64>,
}

pub(crate) fn low_bits(k: usize) -> u64 {
    if k >= 64 {
        u64::MAX
    } else {
        (1u64 << k) - 1
    }
}

impl GridRegion {
    pub fn empty(n: usize, m: usize) -> Self {
        assert!(n <= MAX_AXIS && m <= MAX_AXIS, "grid axis limited to {MAX_AXIS}");
        Self { n, m, rows: vec![0; n] }
    }

    pub fn full(n: usize, m: usize) -> Self {
        let mut r = Self::empty(n, m);
        r.rows.iter_mut().for_each(|row| *row = low_bits(m));
        r
    }

    /// Row-major boolean mask of length `n·m`.
    pub fn from_mask(n: usize, m: usize, mask: &[bool]) -> Result<Self> {
        check_axes(n, m)?;
        if mask.len() != n * m {
            return Err(Error::MalformedRegion(format!(
                "mask has {} cells, grid has {}",
                mask.len(),
                n * m
            )));
        }
        let mut r = Self::empty(n, m);
        for i in 0..n {
            for k in 0..m {
                if mask[i * m + k] {
                    r.rows[i] |= 1 << k;
                }
            }
        }
        Ok(r)
    }

    /// Cells enumerated by a bit pattern over the row-major cell index.
    pub fn from_cell_bits(n: usize, m: usize, bits: u128) -> Self {
        let mut r = Self::empty(n, m);
        for c in 0..(n * m).min(128) {
            if bits >> c & 1 == 1 {
                r.rows[c / m] |= 1 << (c % m);
            }
        }
        r
    }

    pub fn from_points(n: usize, m: usize, points: &[(usize, usize)]) -> Result<Self> {
        check_axes(n, m)?;
        let mut r = Self::empty(n, m);
        for &(i, k) in points {
            if i >= n || k >= m {
                return Err(Error::MalformedRegion(format!("point ({i}, {k}) outside the {n}×{m} grid")));
            }
            r.insert(i, k);
        }
        Ok(r)
    }

    /// The rectangle `rows × cols` given as bitmasks.
    pub fn rectangle(n: usize, m: usize, rows: u64, cols: u64) -> Self {
        let mut r = Self::empty(n, m);
        for i in 0..n {
            if rows >> i & 1 == 1 {
                r.rows[i] = cols & low_bits(m);
            }
        }
        r
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn row_bits(&self) -> &[u64] {
        &self.rows
    }

    pub fn contains(&self, i: usize, k: usize) -> bool {
        self.rows[i] >> k & 1 == 1
    }

    pub fn insert(&mut self, i: usize, k: usize) {
        self.rows[i] |= 1 << k;
    }

    pub fn remove(&mut self, i: usize, k: usize) {
        self.rows[i] &= !(1 << k);
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn is_full(&self) -> bool {
        self.rows.iter().all(|&r| r == low_bits(self.m))
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| (0..self.m).filter(move |&k| self.contains(i, k)).map(move |k| (i, k)))
    }

    pub fn mask(&self) -> Vec<bool> {
        (0..self.n)
            .flat_map(|i| (0..self.m).map(move |k| (i, k)))
            .map(|(i, k)| self.contains(i, k))
            .collect()
    }

    pub fn union(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        self.zip(other, |a, b| a & b)
    }

    pub fn complement(&self) -> Self {
        let full = low_bits(self.m);
        Self {
            n: self.n,
            m: self.m,
            rows: self.rows.iter().map(|r| !r & full).collect(),
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & b == 0)
    }

    fn zip(&self, other: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.shape(), other.shape(), "regions on different grids");
        Self {
            n: self.n,
            m: self.m,
            rows: self.rows.iter().zip(&other.rows).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl fmt::Debug for GridRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GridRegion {}×{} [", self.n, self.m)?;
        for i in 0..self.n {
            if i > 0 {
                f.write_str(" ")?;
            }
            for k in 0..self.m {
                f.write_str(if self.contains(i, k) { "1" } else { "0" })?;
            }
        }
        f.write_str("]")
    }
}

fn check_axes(n: usize, m: usize) -> Result<()> {
    for axis in [n, m] {
        if axis > MAX_AXIS {
            return Err(Error::GridTooLarge(axis));
        }
    }
    Ok(())
}

/// A real interval; `None` endpoints are infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: None,
        hi: None,
        lo_closed: false,
        hi_closed: false,
    };

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self {
            lo: Some(lo),
            hi: Some(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `(−∞, hi]`.
    pub fn at_most(hi: f64) -> Self {
        Self {
            hi: Some(hi),
            hi_closed: true,
            ..Self::REAL_LINE
        }
    }

    pub fn validate(&self) -> Result<()> {
        for v in [self.lo, self.hi].into_iter().flatten() {
            if v.is_nan() {
                return Err(Error::MalformedRegion("NaN interval endpoint".into()));
            }
        }
        if let (Some(lo), Some(hi)) = (self.lo, self.hi) {
            if lo > hi {
                return Err(Error::MalformedRegion(format!("interval with lo {lo} > hi {hi}")));
            }
        }
        Ok(())
    }

    /// Membership with endpoint slack `tol`: closed ends admit values within
    /// `tol` outside, open ends reject values within `tol` inside.
    pub fn contains(&self, v: f64, tol: f64) -> bool {
        let above = match self.lo {
            None => true,
            Some(lo) if self.lo_closed => v >= lo - tol,
            Some(lo) => v > lo + tol,
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_closed => v <= hi + tol,
            Some(hi) => v < hi - tol,
        };
        above && below
    }
}

/// A Borel set of the plane in one of the forms the front end understands.
#[derive(Debug, Clone, PartialEq)]
pub enum RegionSpec {
    Full,
    /// Grid indices `(i, k)`.
    Points(Vec<(usize, usize)>),
    /// Union of interval rectangles `x × y`.
    Rects(Vec<(Interval, Interval)>),
    /// `{(x, y) : f(x, y) ∈ interval}`.
    Preimage { f: FuncExpr, interval: Interval },
}

/// Endpoint slack used when intersecting intervals with spectra.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// Restricts a planar set to the grid `a_values × b_values`.
pub fn region_from_borel(a_values: &[f64], b_values: &[f64], spec: &RegionSpec) -> Result<GridRegion> {
    let (n, m) = (a_values.len(), b_values.len());
    check_axes(n, m)?;
    match spec {
        RegionSpec::Full => Ok(GridRegion::full(n, m)),
        RegionSpec::Points(points) => GridRegion::from_points(n, m, points),
        RegionSpec::Rects(rects) => {
            let mut r = GridRegion::empty(n, m);
            for (x, y) in rects {
                x.validate()?;
                y.validate()?;
                for (i, &a) in a_values.iter().enumerate() {
                    if !x.contains(a, BOUNDARY_TOL) {
                        continue;
                    }
                    for (k, &b) in b_values.iter().enumerate() {
                        if y.contains(b, BOUNDARY_TOL) {
                            r.insert(i, k);
                        }
                    }
                }
            }
            Ok(r)
        }
        RegionSpec::Preimage { f, interval } => {
            interval.validate()?;
            let mut r = GridRegion::empty(n, m);
            for (i, &a) in a_values.iter().enumerate() {
                for (k, &b) in b_values.iter().enumerate() {
                    if interval.contains(f.eval_xy(a, b)?, BOUNDARY_TOL) {
                        r.insert(i, k);
                    }
                }
            }
            Ok(r)
        }
    }
}

/// A labelled family of disjoint regions covering the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPartition {
    pub regions: Vec<GridRegion>,
    pub labels: Vec<String>,
}

impl GridPartition {
    pub fn new(regions: Vec<GridRegion>) -> Self {
        let labels = (0..regions.len()).map(|i| format!("Q{i}")).collect();
        Self { regions, labels }
    }

    /// One cell per grid point, labelled `a{i}b{k}`.
    pub fn singletons(n: usize, m: usize) -> Self {
        let mut regions = Vec::new();
        let mut labels = Vec::new();
        for i in 0..n {
            for k in 0..m {
                regions.push(GridRegion::rectangle(n, m, 1 << i, 1 << k));
                labels.push(format!("a{i}b{k}"));
            }
        }
        Self { regions, labels }
    }

    /// One strip `{λ_i} × σ(B)` per value of `A`, labelled `a{i}`.
    pub fn rows(n: usize, m: usize) -> Self {
        Self {
            regions: (0..n).map(|i| GridRegion::rectangle(n, m, 1 << i, low_bits(m))).collect(),
            labels: (0..n).map(|i| format!("a{i}")).collect(),
        }
    }

    /// One strip `σ(A) × {μ_k}` per value of `B`, labelled `b{k}`.
    pub fn cols(n: usize, m: usize) -> Self {
        Self {
            regions: (0..m).map(|k| GridRegion::rectangle(n, m, low_bits(n), 1 << k)).collect(),
            labels: (0..m).map(|k| format!("b{k}")).collect(),
        }
    }

    pub fn full(n: usize, m: usize) -> Self {
        Self {
            regions: vec![GridRegion::full(n, m)],
            labels: vec!["all".into()],
        }
    }

    pub fn validate(&self, n: usize, m: usize) -> Result<()> {
        if self.labels.len() != self.regions.len() {
            return Err(Error::InvalidPartition("label count differs from region count".into()));
        }
        let mut seen = GridRegion::empty(n, m);
        for (idx, r) in self.regions.iter().enumerate() {
            if r.shape() != (n, m) {
                return Err(Error::GridMismatch {
                    expected: (n, m),
                    found: r.shape(),
                });
            }
            if !r.is_disjoint(&seen) {
                return Err(Error::InvalidPartition(format!("region {idx} overlaps an earlier region")));
            }
            seen = seen.union(r);
        }
        if !seen.is_full() {
            let (i, k) = seen.complement().cells().next().expect("not full");
            return Err(Error::InvalidPartition(format!("cell ({i}, {k}) is not covered")));
        }
        Ok(())
    }
}
