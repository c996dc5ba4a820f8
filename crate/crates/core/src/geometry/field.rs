use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{Point3, RngStream};
use crate::analytics::ChannelParams;
use crate::error::{domain, Error, Result};
use crate::harness::csv::fmt_real;

/// Default cap on the expected number of receivers in one realization.
pub const DEFAULT_RECEIVER_CAP: f64 = 1e8;

const MAX_CELLS_PER_AXIS: f64 = 256.0;

type CellKey = [i32; 3];

/// Earliest crossing of a segment into a receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentHit {
    pub point: Point3,
    /// Position along the segment, 0 at `from` and 1 at `to`.
    pub fraction: f64,
}

/// One realization of the receiver process restricted to a ball of radius
/// `domain_radius`, with a uniform-grid index over the centers.
///
/// Centers lie strictly outside the transmitter's exclusion ball B(0, a).
/// They are stored sorted by grid cell, so [`ReceiverField::centers`] does not
/// preserve insertion order.
#[derive(Debug, Clone)]
pub struct ReceiverField {
    centers: Vec<Point3>,
    radius: f64,
    domain_radius: f64,
    cell: f64,
    inv_cell: f64,
    cells: HashMap<CellKey, (u32, u32)>,
    lo: CellKey,
    hi: CellKey,
}

impl ReceiverField {
    pub fn new(centers: Vec<Point3>, radius: f64, domain_radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(domain("radius", format!("must be finite and > 0, got {radius}")));
        }
        if !(domain_radius.is_finite() && domain_radius > radius) {
            return Err(domain(
                "domain_radius",
                format!("must be finite and exceed the receiver radius {radius}, got {domain_radius}"),
            ));
        }
        if centers.len() >= u32::MAX as usize {
            return Err(Error::Capacity {
                expected: centers.len() as f64,
                cap: u32::MAX as f64,
            });
        }
        for c in &centers {
            let r = c.norm();
            if !c.is_finite() || r <= radius || r > domain_radius {
                return Err(domain(
                    "centers",
                    format!("center {c:?} at distance {r} is outside the shell ({radius}, {domain_radius}]"),
                ));
            }
        }
        let cell = (2.0 * radius).max(domain_radius / MAX_CELLS_PER_AXIS);
        let mut field = Self {
            centers: Vec::new(),
            radius,
            domain_radius,
            cell,
            inv_cell: 1.0 / cell,
            cells: HashMap::new(),
            lo: [i32::MAX; 3],
            hi: [i32::MIN; 3],
        };
        field.build_index(centers);
        Ok(field)
    }

    pub fn empty(radius: f64, domain_radius: f64) -> Result<Self> {
        Self::new(Vec::new(), radius, domain_radius)
    }

    /// Samples the receiver process in the shell a < ‖x‖ ≤ `domain_radius`:
    /// a Poisson number of centers, each placed uniformly in volume by
    /// inverting the r³ law and drawing an isotropic direction.
    pub fn sample<R: Rng + ?Sized>(
        p: &ChannelParams,
        domain_radius: f64,
        cap: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let a = p.radius();
        if !(domain_radius.is_finite() && domain_radius > a) {
            return Err(domain(
                "domain_radius",
                format!("must exceed the receiver radius {a}, got {domain_radius}"),
            ));
        }
        let (a3, r3) = (a.powi(3), domain_radius.powi(3));
        let mean = p.density() * 4.0 / 3.0 * PI * (r3 - a3);
        if mean > cap {
            return Err(Error::Capacity {
                expected: mean,
                cap,
            });
        }
        let count = if mean > 0.0 {
            let poisson = Poisson::new(mean).map_err(|e| domain("density", e.to_string()))?;
            poisson.sample(rng) as usize
        } else {
            0
        };
        let mut centers = Vec::with_capacity(count);
        while centers.len() < count {
            // 1 - u lies in (0, 1], keeping r off the exclusion sphere
            let w = 1.0 - rng.random::<f64>();
            let r = (a3 + w * (r3 - a3)).cbrt().min(domain_radius);
            let cos_theta = 2.0 * rng.random::<f64>() - 1.0;
            let phi = 2.0 * PI * rng.random::<f64>();
            if r <= a {
                continue;
            }
            let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
            centers.push(Point3::new(
                r * sin_theta * phi.cos(),
                r * sin_theta * phi.sin(),
                r * cos_theta,
            ));
        }
        Self::new(centers, a, domain_radius)
    }

    fn key(&self, q: Point3) -> CellKey {
        [
            (q.x * self.inv_cell).floor() as i32,
            (q.y * self.inv_cell).floor() as i32,
            (q.z * self.inv_cell).floor() as i32,
        ]
    }

    fn build_index(&mut self, centers: Vec<Point3>) {
        let mut keyed: Vec<(CellKey, Point3)> = centers.into_iter().map(|c| (self.key(c), c)).collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        let mut start = 0usize;
        while start < keyed.len() {
            let key = keyed[start].0;
            let mut end = start;
            while end < keyed.len() && keyed[end].0 == key {
                end += 1;
            }
            self.cells.insert(key, (start as u32, end as u32));
            for axis in 0..3 {
                self.lo[axis] = self.lo[axis].min(key[axis]);
                self.hi[axis] = self.hi[axis].max(key[axis]);
            }
            start = end;
        }
        self.centers = keyed.into_iter().map(|(_, c)| c).collect();
    }

    pub fn centers(&self) -> &[Point3] {
        &self.centers
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    fn cell_centers(&self, key: &CellKey) -> &[Point3] {
        match self.cells.get(key) {
            Some(&(s, e)) => &self.centers[s as usize..e as usize],
            None => &[],
        }
    }

    /// Visits every center whose cell lies in the inclusive key box.
    fn for_each_in_box(&self, lo: CellKey, hi: CellKey, mut f: impl FnMut(Point3)) {
        let lo = [0, 1, 2].map(|i| lo[i].max(self.lo[i]));
        let hi = [0, 1, 2].map(|i| hi[i].min(self.hi[i]));
        for x in lo[0]..=hi[0] {
            for y in lo[1]..=hi[1] {
                for z in lo[2]..=hi[2] {
                    for &c in self.cell_centers(&[x, y, z]) {
                        f(c);
                    }
                }
            }
        }
    }

    /// Distance from `q` to the nearest receiver surface, negative inside a
    /// receiver and `+∞` for an empty field.
    pub fn nearest_surface_distance(&self, q: Point3) -> f64 {
        if self.centers.is_empty() {
            return f64::INFINITY;
        }
        let c = self.key(q);
        // first ring that can touch the occupied extent
        let start = (0..3)
            .map(|i| (self.lo[i] - c[i]).max(c[i] - self.hi[i]).max(0))
            .max()
            .unwrap_or(0);
        let mut best = f64::INFINITY;
        let mut k = start;
        loop {
            let lo = [0, 1, 2].map(|i| (c[i] - k).max(self.lo[i]));
            let hi = [0, 1, 2].map(|i| (c[i] + k).min(self.hi[i]));
            for x in lo[0]..=hi[0] {
                for y in lo[1]..=hi[1] {
                    for z in lo[2]..=hi[2] {
                        let ring = (x - c[0]).abs().max((y - c[1]).abs()).max((z - c[2]).abs());
                        if ring != k {
                            continue;
                        }
                        for &center in self.cell_centers(&[x, y, z]) {
                            best = best.min((q - center).norm_sq());
                        }
                    }
                }
            }
            // unvisited cells are at least k cells away
            let covers_all = (0..3).all(|i| c[i] - k <= self.lo[i] && c[i] + k >= self.hi[i]);
            if covers_all || best.sqrt() <= k as f64 * self.cell {
                break;
            }
            k += 1;
        }
        best.sqrt() - self.radius
    }

    /// Lower bound on the distance from `q` to any receiver surface, exact
    /// when a receiver center lies within one cell of `q` and otherwise
    /// capped at `cell_size - radius`. Non-positive means `q` is inside.
    pub(crate) fn clearance(&self, q: Point3) -> f64 {
        let c = self.key(q);
        let mut best = self.cell * self.cell;
        self.for_each_in_box(
            [c[0] - 1, c[1] - 1, c[2] - 1],
            [c[0] + 1, c[1] + 1, c[2] + 1],
            |center| best = best.min((q - center).norm_sq()),
        );
        best.sqrt() - self.radius
    }

    /// Earliest point where the segment `from → to` meets a receiver. A
    /// segment that starts inside a receiver hits at fraction 0.
    pub fn first_hit_on_segment(&self, from: Point3, to: Point3) -> Option<SegmentHit> {
        let a = self.radius;
        let lo = Point3::new(from.x.min(to.x) - a, from.y.min(to.y) - a, from.z.min(to.z) - a);
        let hi = Point3::new(from.x.max(to.x) + a, from.y.max(to.y) + a, from.z.max(to.z) + a);
        let dir = to - from;
        let mut best: Option<f64> = None;
        self.for_each_in_box(self.key(lo), self.key(hi), |center| {
            if let Some(s) = segment_entry(from, dir, center, a) {
                if best.is_none_or(|b| s < b) {
                    best = Some(s);
                }
            }
        });
        best.map(|s| SegmentHit {
            point: from + dir * s,
            fraction: s,
        })
    }

    /// Probability that a Brownian bridge from `from` to `to` over one step
    /// misses every receiver, given both ends lie outside all of them.
    ///
    /// Each sphere is replaced by its tangent plane, for which the crossing
    /// probability is exp(−d₀·d₁ / (D·dt)) with d₀, d₁ the surface distances
    /// of the two ends. Receivers whose surface is farther than `reach` from
    /// the segment's bounding box are skipped.
    pub fn bridge_miss_prob(&self, from: Point3, to: Point3, d_dt: f64, reach: f64) -> f64 {
        let pad = self.radius + reach;
        let lo = Point3::new(from.x.min(to.x) - pad, from.y.min(to.y) - pad, from.z.min(to.z) - pad);
        let hi = Point3::new(from.x.max(to.x) + pad, from.y.max(to.y) + pad, from.z.max(to.z) + pad);
        let mut miss = 1.0;
        self.for_each_in_box(self.key(lo), self.key(hi), |center| {
            let d0 = (from - center).norm() - self.radius;
            let d1 = (to - center).norm() - self.radius;
            if d0 > 0.0 && d1 > 0.0 {
                miss *= -(-d0 * d1 / d_dt).exp_m1();
            } else {
                miss = 0.0;
            }
        });
        miss
    }

    /// Writes the centers as CSV (`x_um,y_um,z_um`) after a `#` line holding
    /// the receiver and domain radii.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# radius_um={} domain_radius_um={}",
            fmt_real(self.radius),
            fmt_real(self.domain_radius)
        )?;
        writeln!(out, "x_um,y_um,z_um")?;
        for c in &self.centers {
            writeln!(out, "{},{},{}", fmt_real(c.x), fmt_real(c.y), fmt_real(c.z))?;
        }
        Ok(())
    }

    /// Reads a field written by [`ReceiverField::write_csv`].
    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let first = text.lines().next().unwrap_or_default();
        let mut radius = None;
        let mut domain_radius = None;
        for token in first.trim_start_matches('#').split_whitespace() {
            match token.split_once('=') {
                Some(("radius_um", v)) => radius = v.parse::<f64>().ok(),
                Some(("domain_radius_um", v)) => domain_radius = v.parse::<f64>().ok(),
                _ => {}
            }
        }
        let (Some(radius), Some(domain_radius)) = (radius, domain_radius) else {
            return Err(crate::error::config(
                "field csv",
                "first line must be `# radius_um=<a> domain_radius_um=<R>`",
            ));
        };
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut centers = Vec::new();
        for row in reader.deserialize() {
            let (x, y, z): (f64, f64, f64) = row?;
            centers.push(Point3::new(x, y, z));
        }
        Self::new(centers, radius, domain_radius)
    }
}

/// Smallest s in [0, 1] with ‖from + s·dir − center‖ ≤ a.
fn segment_entry(from: Point3, dir: Point3, center: Point3, a: f64) -> Option<f64> {
    let f = from - center;
    let c = f.norm_sq() - a * a;
    if c <= 0.0 {
        return Some(0.0);
    }
    let qa = dir.norm_sq();
    if qa == 0.0 {
        return None;
    }
    let half_b = f.dot(dir);
    if half_b >= 0.0 {
        // moving away from the center while outside
        return None;
    }
    let disc = half_b * half_b - qa * c;
    if disc < 0.0 {
        return None;
    }
    // entry root, written to avoid cancellation: c / (−half_b + √disc)
    let s = c / (-half_b + disc.sqrt());
    (s <= 1.0).then_some(s)
}

/// Samples one receiver realization for `p` inside `B(0, domain_radius)`.
pub fn sample_receiver_field(
    p: &ChannelParams,
    domain_radius: f64,
    stream: RngStream,
) -> Result<ReceiverField> {
    ReceiverField::sample(p, domain_radius, DEFAULT_RECEIVER_CAP, &mut stream.rng())
}
