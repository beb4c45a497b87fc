//! Uniform cell-list index over a point set.
//!
//! Points are bucketed into a dense grid of cells covering the [`Domain`].
//! Queries with a radius larger than the cell size scan as many cell shells
//! as needed, so one index can serve several cutoffs. Periodic axes use the
//! minimum-image convention.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::geom::{Domain, Vector};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct CellList<const D: usize> {
    domain: Domain<D>,
    cell_size: [f64; D],
    dims: [usize; D],
    starts: Vec<u32>,
    entries: Vec<u32>,
    points: Vec<Vector<D>>,
}

impl<const D: usize> CellList<D> {
    /// Indexes `points`. Periodic coordinates are wrapped into the box; a
    /// point outside an open axis is an error.
    pub fn build(points: &[Vector<D>], cell_size: f64, domain: Domain<D>) -> Result<Self> {
        if !(cell_size > 0.0) || !cell_size.is_finite() {
            return Err(Error::NonPositiveCellSize(cell_size));
        }
        let extent = domain.extent();
        let mut dims = [1usize; D];
        let mut actual = [cell_size; D];
        for i in 0..D {
            let n = ((extent[i] / cell_size).floor() as usize).clamp(1, 1 << 20);
            dims[i] = n;
            actual[i] = extent[i] / n as f64;
        }
        let mut wrapped = Vec::with_capacity(points.len());
        for (index, p) in points.iter().enumerate() {
            if !domain.contains(p) || p.iter().any(|x| !x.is_finite()) {
                return Err(Error::PointOutsideDomain { index });
            }
            wrapped.push(domain.wrap(p));
        }
        let mut list = Self {
            domain,
            cell_size: actual,
            dims,
            starts: Vec::new(),
            entries: Vec::new(),
            points: wrapped,
        };
        let ncells: usize = dims.iter().product();
        let cell_of: Vec<u32> = list.points.iter().map(|p| list.linear(&list.cell_coords(p)) as u32).collect();
        let mut counts = vec![0u32; ncells + 1];
        for &c in &cell_of {
            counts[c as usize + 1] += 1;
        }
        for c in 0..ncells {
            counts[c + 1] += counts[c];
        }
        let mut fill = counts.clone();
        let mut entries = vec![0u32; cell_of.len()];
        // ascending point order inside each cell
        for (i, &c) in cell_of.iter().enumerate() {
            entries[fill[c as usize] as usize] = i as u32;
            fill[c as usize] += 1;
        }
        list.starts = counts;
        list.entries = entries;
        Ok(list)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn domain(&self) -> &Domain<D> {
        &self.domain
    }

    /// Indexed positions (wrapped into the box).
    pub fn points(&self) -> &[Vector<D>] {
        &self.points
    }

    pub fn occupied_cells(&self) -> usize {
        self.starts.windows(2).filter(|w| w[1] > w[0]).count()
    }

    fn cell_coords(&self, p: &Vector<D>) -> [isize; D] {
        core::array::from_fn(|i| ((p[i] - self.domain.lo[i]) / self.cell_size[i]).floor() as isize)
    }

    fn linear(&self, c: &[isize; D]) -> usize {
        let mut idx = 0usize;
        for i in 0..D {
            let ci = c[i].clamp(0, self.dims[i] as isize - 1) as usize;
            idx = idx * self.dims[i] + ci;
        }
        idx
    }

    /// Allowed cell offsets along `axis` from cell coordinate `c`, each
    /// distinct cell reachable exactly once.
    fn offset_range(&self, axis: usize, c: isize) -> (isize, isize) {
        let n = self.dims[axis] as isize;
        if self.domain.periodic[axis] {
            let lo = (n - 1) / 2;
            (-lo, n - 1 - lo)
        } else {
            let cc = c.clamp(0, n - 1);
            (-cc, n - 1 - cc)
        }
    }

    fn cell_at(&self, base: &[isize; D], off: &[isize; D]) -> usize {
        let mut idx = 0usize;
        for i in 0..D {
            let n = self.dims[i] as isize;
            let mut c = base[i].clamp(0, n - 1) + off[i];
            if self.domain.periodic[i] {
                c = c.rem_euclid(n);
            }
            idx = idx * self.dims[i] + c as usize;
        }
        idx
    }

    #[inline]
    fn cell_entries(&self, cell: usize) -> &[u32] {
        &self.entries[self.starts[cell] as usize..self.starts[cell + 1] as usize]
    }

    /// Calls `f(index, distance_sq)` for every point within `radius` of
    /// `query`, in unspecified order.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, query: &Vector<D>, radius: f64, mut f: F) {
        if self.points.is_empty() || !(radius >= 0.0) {
            return;
        }
        let q = self.domain.wrap(query);
        let base = self.cell_coords(&q);
        let r2 = radius * radius;
        let mut lo = [0isize; D];
        let mut hi = [0isize; D];
        for i in 0..D {
            let s = ((radius / self.cell_size[i]).ceil() as isize).max(1);
            let (a, b) = self.offset_range(i, base[i]);
            // an open-axis query outside the box still reaches the edge cells
            let shift = if self.domain.periodic[i] { 0 } else { base[i] - base[i].clamp(0, self.dims[i] as isize - 1) };
            lo[i] = (shift - s).max(a);
            hi[i] = (shift + s).min(b);
            if lo[i] > hi[i] {
                return;
            }
        }
        let mut off = lo;
        loop {
            let cell = self.cell_at(&base, &off);
            for &j in self.cell_entries(cell) {
                let d2 = self.domain.distance_sq(&q, &self.points[j as usize]);
                if d2 <= r2 {
                    f(j as usize, d2);
                }
            }
            let mut axis = D;
            while axis > 0 {
                axis -= 1;
                if off[axis] < hi[axis] {
                    off[axis] += 1;
                    break;
                }
                off[axis] = lo[axis];
                if axis == 0 {
                    return;
                }
            }
        }
    }

    /// Indices with `distance(query, point) <= radius`, ascending.
    pub fn neighbors_within(&self, query: &Vector<D>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(query, radius, |j, _| out.push(j));
        out.sort_unstable();
        out
    }

    /// Closest indexed point; ties go to the smallest index.
    pub fn nearest(&self, query: &Vector<D>) -> Result<usize> {
        self.nearest_where(query, |_| true)
    }

    /// Closest point among those accepted by `accept`.
    pub fn nearest_where<P: Fn(usize) -> bool>(&self, query: &Vector<D>, accept: P) -> Result<usize> {
        if self.points.is_empty() {
            return Err(Error::EmptyCandidateSet);
        }
        let q = self.domain.wrap(query);
        let base = self.cell_coords(&q);
        let mut ranges = [(0isize, 0isize); D];
        let mut max_ring = 0isize;
        let mut shift = [0isize; D];
        for i in 0..D {
            if !self.domain.periodic[i] {
                shift[i] = base[i] - base[i].clamp(0, self.dims[i] as isize - 1);
            }
            ranges[i] = self.offset_range(i, base[i]);
            max_ring = max_ring.max(ranges[i].1 + shift[i].abs()).max(-ranges[i].0 + shift[i].abs());
        }
        let min_cs = self.cell_size.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let mut best: Option<(f64, usize)> = None;
        for ring in 0..=max_ring {
            let mut lo = [0isize; D];
            let mut hi = [0isize; D];
            let mut empty = false;
            for i in 0..D {
                lo[i] = (-ring).max(ranges[i].0 - shift[i]);
                hi[i] = ring.min(ranges[i].1 - shift[i]);
                if lo[i] > hi[i] {
                    empty = true;
                }
            }
            if !empty {
                let mut off = lo;
                'cells: loop {
                    if off.iter().any(|o| o.abs() == ring) {
                        let shifted: [isize; D] = core::array::from_fn(|i| off[i] + shift[i]);
                        let cell = self.cell_at(&base, &shifted);
                        for &j in self.cell_entries(cell) {
                            let j = j as usize;
                            if !accept(j) {
                                continue;
                            }
                            let d2 = self.domain.distance_sq(&q, &self.points[j]);
                            let better = match best {
                                None => true,
                                Some((bd, bj)) => d2 < bd || (d2 == bd && j < bj),
                            };
                            if better {
                                best = Some((d2, j));
                            }
                        }
                    }
                    let mut axis = D;
                    loop {
                        if axis == 0 {
                            break 'cells;
                        }
                        axis -= 1;
                        if off[axis] < hi[axis] {
                            off[axis] += 1;
                            break;
                        }
                        off[axis] = lo[axis];
                    }
                }
            }
            if let Some((bd, _)) = best {
                // anything beyond this ring is at least ring * cell size away
                let bound = ring as f64 * min_cs;
                if bd.sqrt() < bound {
                    break;
                }
            }
        }
        best.map(|(_, j)| j).ok_or(Error::EmptyCandidateSet)
    }
}
