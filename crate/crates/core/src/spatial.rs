//! Nearest-neighbour queries for planar point clouds.

/// Uniform bucket grid over the bounding box of a point set.
#[derive(Debug, Clone)]
pub struct PointIndex {
    points: Vec<[f64; 2]>,
    origin: [f64; 2],
    cell: f64,
    nx: usize,
    ny: usize,
    /// `starts[c]..starts[c + 1]` indexes `order` for bucket `c`
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl PointIndex {
    pub fn new(points: &[[f64; 2]]) -> Self {
        assert!(!points.is_empty(), "point index needs at least one point");
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in points {
            for a in 0..2 {
                lo[a] = lo[a].min(p[a]);
                hi[a] = hi[a].max(p[a]);
            }
        }
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
        // about two points per bucket
        let per_axis = ((points.len() as f64 / 2.0).sqrt().ceil() as usize).clamp(1, 4096);
        let cell = extent / per_axis as f64;
        let nx = (((hi[0] - lo[0]) / cell) as usize + 1).min(per_axis + 1);
        let ny = (((hi[1] - lo[1]) / cell) as usize + 1).min(per_axis + 1);
        let mut index =
            Self { points: points.to_vec(), origin: lo, cell, nx, ny, starts: vec![0; nx * ny + 1], order: vec![] };
        let buckets: Vec<usize> = points.iter().map(|p| index.bucket(p)).collect();
        for &b in &buckets {
            index.starts[b + 1] += 1;
        }
        for c in 0..nx * ny {
            index.starts[c + 1] += index.starts[c];
        }
        let mut fill = index.starts.clone();
        let mut order = vec![0; points.len()];
        for (i, &b) in buckets.iter().enumerate() {
            order[fill[b]] = i;
            fill[b] += 1;
        }
        index.order = order;
        index
    }

    fn cell_of(&self, p: &[f64; 2]) -> (i64, i64) {
        (((p[0] - self.origin[0]) / self.cell).floor() as i64, ((p[1] - self.origin[1]) / self.cell).floor() as i64)
    }

    fn bucket(&self, p: &[f64; 2]) -> usize {
        let (i, j) = self.cell_of(p);
        let i = i.clamp(0, self.nx as i64 - 1) as usize;
        let j = j.clamp(0, self.ny as i64 - 1) as usize;
        j * self.nx + i
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    /// Index of and distance to the nearest point, optionally skipping one index.
    pub fn nearest_excluding(&self, q: &[f64; 2], skip: Option<usize>) -> Option<(usize, f64)> {
        let (ci, cj) = self.cell_of(q);
        let (nx, ny) = (self.nx as i64, self.ny as i64);
        // clamp the starting cell into the grid; ring r then covers everything within
        // r cells of it
        let (si, sj) = (ci.clamp(0, nx - 1), cj.clamp(0, ny - 1));
        let mut best: Option<(usize, f64)> = None;
        for r in 0..=nx.max(ny) {
            // cells in ring r are at least r − 1 cells from q along some axis
            if best.is_some_and(|(_, d)| d < (r - 1) as f64 * self.cell) {
                break;
            }
            for j in (sj - r)..=(sj + r) {
                if j < 0 || j >= ny {
                    continue;
                }
                let ring_row = j == sj - r || j == sj + r;
                let mut i = si - r;
                while i <= si + r {
                    if i >= 0 && i < nx {
                        let c = (j * nx + i) as usize;
                        for &k in &self.order[self.starts[c]..self.starts[c + 1]] {
                            if Some(k) == skip {
                                continue;
                            }
                            let p = self.points[k];
                            let d = (p[0] - q[0]).hypot(p[1] - q[1]);
                            if best.is_none_or(|(_, bd)| d < bd) {
                                best = Some((k, d));
                            }
                        }
                    }
                    i += if ring_row || r == 0 { 1 } else { 2 * r };
                }
            }
        }
        best
    }

    pub fn nearest(&self, q: &[f64; 2]) -> (usize, f64) {
        self.nearest_excluding(q, None).expect("non-empty index")
    }
}
