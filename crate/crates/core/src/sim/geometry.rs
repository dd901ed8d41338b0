//! Planar helpers for the Voronoi network sampler: convex polygon clipping,
//! areas and uniform sampling.

use rand::Rng;

pub type Point = [f64; 2];

#[inline]
pub fn norm(p: Point) -> f64 {
    p[0].hypot(p[1])
}

#[inline]
fn dist2(a: Point, b: Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// Regular polygon with `sides` vertices circumscribing the disc of `radius`.
pub fn circumscribed_polygon(radius: f64, sides: usize) -> Vec<Point> {
    let vertex_radius = radius / (std::f64::consts::PI / sides as f64).cos();
    (0..sides)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * i as f64 / sides as f64;
            [vertex_radius * th.cos(), vertex_radius * th.sin()]
        })
        .collect()
}

/// Keeps the part of a convex polygon closer to `site` than to `other`.
pub fn clip_to_bisector(poly: &[Point], site: Point, other: Point, out: &mut Vec<Point>) {
    out.clear();
    let n = [other[0] - site[0], other[1] - site[1]];
    let mid = [0.5 * (site[0] + other[0]), 0.5 * (site[1] + other[1])];
    let side = |p: Point| (p[0] - mid[0]) * n[0] + (p[1] - mid[1]) * n[1];
    let len = poly.len();
    for i in 0..len {
        let cur = poly[i];
        let next = poly[(i + 1) % len];
        let dc = side(cur);
        let dn = side(next);
        if dc <= 0.0 {
            out.push(cur);
        }
        if (dc < 0.0 && dn > 0.0) || (dc > 0.0 && dn < 0.0) {
            let t = dc / (dc - dn);
            out.push([cur[0] + t * (next[0] - cur[0]), cur[1] + t * (next[1] - cur[1])]);
        }
    }
}

/// Voronoi cell of `sites[index]` inside the convex `window`.
///
/// Neighbours are visited nearest first; once a neighbour is farther than
/// twice the current cell radius no later bisector can cut the cell.
pub fn voronoi_cell(sites: &[Point], index: usize, window: &[Point]) -> Vec<Point> {
    let site = sites[index];
    let mut order: Vec<(f64, usize)> = sites
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != index)
        .map(|(j, &p)| (dist2(site, p), j))
        .collect();
    order.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut cell = window.to_vec();
    let mut scratch = Vec::with_capacity(cell.len() + 4);
    let mut radius2 = cell.iter().map(|&v| dist2(site, v)).fold(0.0, f64::max);
    for (d2, j) in order {
        if d2 > 4.0 * radius2 {
            break;
        }
        clip_to_bisector(&cell, site, sites[j], &mut scratch);
        std::mem::swap(&mut cell, &mut scratch);
        radius2 = cell.iter().map(|&v| dist2(site, v)).fold(0.0, f64::max);
    }
    cell
}

pub fn polygon_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a[0] * b[1] - b[0] * a[1]
        })
        .sum();
    0.5 * twice.abs()
}

/// Fan triangulation of a convex polygon with cumulative areas, for
/// drawing uniform points.
pub struct PolygonSampler<'a> {
    poly: &'a [Point],
    cumulative: Vec<f64>,
}

impl<'a> PolygonSampler<'a> {
    pub fn new(poly: &'a [Point]) -> Self {
        let mut cumulative = Vec::with_capacity(poly.len().saturating_sub(2));
        let mut acc = 0.0;
        for i in 1..poly.len().saturating_sub(1) {
            acc += triangle_area(poly[0], poly[i], poly[i + 1]);
            cumulative.push(acc);
        }
        Self { poly, cumulative }
    }

    pub fn area(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let target = rng.random::<f64>() * self.area();
        let i = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.cumulative.len() - 1);
        let (a, b, c) = (self.poly[0], self.poly[i + 1], self.poly[i + 2]);
        let mut u: f64 = rng.random();
        let mut v: f64 = rng.random();
        if u + v > 1.0 {
            u = 1.0 - u;
            v = 1.0 - v;
        }
        [
            a[0] + u * (b[0] - a[0]) + v * (c[0] - a[0]),
            a[1] + u * (b[1] - a[1]) + v * (c[1] - a[1]),
        ]
    }
}

fn triangle_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1])).abs()
}

/// Uniform point in the disc of `radius` centred at `center`.
pub fn sample_in_disc<R: Rng + ?Sized>(rng: &mut R, center: Point, radius: f64) -> Point {
    let r = radius * rng.random::<f64>().sqrt();
    let th = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    [center[0] + r * th.cos(), center[1] + r * th.sin()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> Vec<Point> {
        vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]
    }

    #[test]
    fn bisector_halves_square() {
        let mut out = Vec::new();
        clip_to_bisector(&square(), [0.0, 0.0], [2.0, 0.0], &mut out);
        assert!((polygon_area(&out) - 4.0).abs() < 1e-12);
        clip_to_bisector(&square(), [-0.5, 0.0], [0.5, 0.0], &mut out);
        assert!((polygon_area(&out) - 2.0).abs() < 1e-12);
        assert!(out.iter().all(|p| p[0] <= 1e-12));
    }

    #[test]
    fn lattice_cell_is_unit_square() {
        let mut sites = Vec::new();
        for i in -3..=3 {
            for j in -3..=3 {
                sites.push([i as f64, j as f64]);
            }
        }
        let centre = sites.iter().position(|p| p == &[0.0, 0.0]).unwrap();
        let window = circumscribed_polygon(10.0, 64);
        let cell = voronoi_cell(&sites, centre, &window);
        assert!((polygon_area(&cell) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cells_tile_the_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let window = circumscribed_polygon(5.0, 64);
        let sites: Vec<Point> = (0..60).map(|_| sample_in_disc(&mut rng, [0.0, 0.0], 5.0)).collect();
        let total: f64 = (0..sites.len())
            .map(|i| polygon_area(&voronoi_cell(&sites, i, &window)))
            .sum();
        assert!((total - polygon_area(&window)).abs() < 1e-9 * total);
    }

    #[test]
    fn polygon_samples_stay_inside_and_are_uniform() {
        let tri_like = vec![[0.0, 0.0], [4.0, 0.0], [4.0, 1.0], [0.0, 1.0]];
        let sampler = PolygonSampler::new(&tri_like);
        assert!((sampler.area() - 4.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 200_000;
        let mut left = 0;
        for _ in 0..n {
            let p = sampler.sample(&mut rng);
            assert!(p[0] >= 0.0 && p[0] <= 4.0 && p[1] >= 0.0 && p[1] <= 1.0);
            if p[0] < 1.0 {
                left += 1;
            }
        }
        let frac = left as f64 / n as f64;
        assert!((frac - 0.25).abs() < 4.0 * (0.25f64 * 0.75 / n as f64).sqrt());
    }
}
