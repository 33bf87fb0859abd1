//! Unscrambled Sobol sequences (Gray-code order, Joe–Kuo direction numbers)
//! and the interior/boundary samplers built on them.

use std::sync::OnceLock;

use crate::error::{Error, Result};

const BITS: usize = 32;
pub const MAX_DIM: usize = 16;

static TABLE_SRC: &str = include_str!("../data/sobol_directions.txt");

#[derive(Debug, Clone)]
struct Primitive {
    s: usize,
    a: u32,
    m: Vec<u32>,
}

fn table() -> &'static [Primitive] {
    static TABLE: OnceLock<Vec<Primitive>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut out = Vec::new();
        for (ln, line) in TABLE_SRC.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let nums: Vec<u32> = line
                .split_whitespace()
                .map(|t| t.parse().unwrap_or_else(|_| panic!("bad token on line {}", ln + 1)))
                .collect();
            let (d, s, a) = (nums[0] as usize, nums[1] as usize, nums[2]);
            assert_eq!(d, out.len() + 2, "direction table out of order");
            assert_eq!(nums.len(), 3 + s, "wrong number of m values for dim {d}");
            out.push(Primitive {
                s,
                a,
                m: nums[3..].to_vec(),
            });
        }
        out
    })
}

/// Direction numbers `v_1..v_32` of one coordinate, scaled to 32 bits.
fn directions(dim_index: usize) -> [u32; BITS] {
    let mut v = [0u32; BITS];
    if dim_index == 0 {
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = 1 << (BITS - 1 - j);
        }
        return v;
    }
    let p = &table()[dim_index - 1];
    let s = p.s;
    for j in 0..BITS {
        v[j] = if j < s {
            p.m[j] << (BITS - 1 - j)
        } else {
            let mut x = v[j - s] ^ (v[j - s] >> s);
            for k in 1..s {
                if (p.a >> (s - 1 - k)) & 1 == 1 {
                    x ^= v[j - k];
                }
            }
            x
        };
    }
    v
}

/// A single-owner Sobol stream. Points lie in `[0, 1)^dim`.
#[derive(Debug, Clone)]
pub struct SobolStream {
    dim: usize,
    v: Vec<[u32; BITS]>,
    index: u64,
    state: Vec<u32>,
}

impl SobolStream {
    /// Stream positioned after `skip` points (`skip = 1` drops the origin).
    pub fn new(dim: usize, skip: u64) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::SobolDimension(dim));
        }
        let mut s = Self {
            dim,
            v: (0..dim).map(directions).collect(),
            index: 0,
            state: vec![0; dim],
        };
        s.skip_to(skip);
        Ok(s)
    }

    /// Default stream: skips the all-zero point.
    pub fn with_dim(dim: usize) -> Result<Self> {
        Self::new(dim, 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of the next point to be emitted.
    pub fn index(&self) -> u64 {
        self.index
    }

    fn skip_to(&mut self, n: u64) {
        // Gray-code point n is the XOR of the directions of the set bits of n ^ (n >> 1)
        let g = n ^ (n >> 1);
        for (d, st) in self.state.iter_mut().enumerate() {
            let mut x = 0;
            for (j, vj) in self.v[d].iter().enumerate() {
                if (g >> j) & 1 == 1 {
                    x ^= vj;
                }
            }
            *st = x;
        }
        self.index = n;
    }

    /// Next point as raw 32-bit integers (coordinate × 2^32).
    pub fn next_raw(&mut self) -> Vec<u32> {
        let out = self.state.clone();
        let c = (!self.index).trailing_zeros() as usize;
        assert!(c < BITS, "Sobol stream exhausted after 2^32 points");
        for (st, v) in self.state.iter_mut().zip(&self.v) {
            *st ^= v[c];
        }
        self.index += 1;
        out
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.next_raw().into_iter().map(|x| x as f64 / 4294967296.0).collect()
    }
}

/// Axis-aligned box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn unit(dim: usize) -> Self {
        Self {
            lo: vec![0.0; dim],
            hi: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| h - l).product()
    }
}

/// Next `n` stream points mapped affinely into `domain`.
pub fn sample_interior(stream: &mut SobolStream, n: usize, domain: &BoxDomain) -> Result<Vec<Vec<f64>>> {
    if domain.dim() != stream.dim() || domain.hi.len() != domain.dim() {
        return Err(Error::Shape(format!(
            "box of dimension {} for a {}-dimensional stream",
            domain.dim(),
            stream.dim()
        )));
    }
    Ok((0..n)
        .map(|_| {
            stream
                .next_point()
                .iter()
                .zip(domain.lo.iter().zip(&domain.hi))
                .map(|(u, (lo, hi))| lo + (hi - lo) * u)
                .collect()
        })
        .collect())
}

/// Faces of the unit square, in perimeter order starting at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    Bottom,
    Right,
    Top,
    Left,
}

impl Face {
    pub fn normal(self) -> [f64; 2] {
        match self {
            Face::Bottom => [0.0, -1.0],
            Face::Right => [1.0, 0.0],
            Face::Top => [0.0, 1.0],
            Face::Left => [-1.0, 0.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub x: [f64; 2],
    pub face: Face,
}

/// Maps a perimeter fraction `s ∈ [0, 1)` to the unit-square boundary,
/// counter-clockwise from `(0, 0)`.
pub fn perimeter_point(s: f64) -> BoundaryPoint {
    let p = 4.0 * s;
    if p < 1.0 {
        BoundaryPoint {
            x: [p, 0.0],
            face: Face::Bottom,
        }
    } else if p < 2.0 {
        BoundaryPoint {
            x: [1.0, p - 1.0],
            face: Face::Right,
        }
    } else if p < 3.0 {
        BoundaryPoint {
            x: [3.0 - p, 1.0],
            face: Face::Top,
        }
    } else {
        BoundaryPoint {
            x: [0.0, 4.0 - p],
            face: Face::Left,
        }
    }
}

/// Next `n` points of a one-dimensional stream placed on the boundary of the
/// unit square by arc length.
pub fn sample_boundary(stream: &mut SobolStream, n: usize) -> Result<Vec<BoundaryPoint>> {
    if stream.dim() != 1 {
        return Err(Error::Shape(format!(
            "boundary sampling needs a 1-dimensional stream, got {}",
            stream.dim()
        )));
    }
    Ok((0..n).map(|_| perimeter_point(stream.next_point()[0])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_points() {
        let mut s = SobolStream::with_dim(2).unwrap();
        assert_eq!(s.next_point(), vec![0.5, 0.5]);
        assert_eq!(s.next_point(), vec![0.75, 0.25]);
        assert_eq!(s.next_point(), vec![0.25, 0.75]);
        let mut s = SobolStream::new(1, 0).unwrap();
        assert_eq!(s.next_point(), vec![0.0]);
    }

    #[test]
    fn dimension_range() {
        assert!(matches!(SobolStream::new(0, 1), Err(Error::SobolDimension(0))));
        assert!(matches!(SobolStream::new(17, 1), Err(Error::SobolDimension(17))));
        assert!(SobolStream::new(16, 1).is_ok());
    }

    #[test]
    fn skip_matches_stepping() {
        let mut a = SobolStream::new(5, 0).unwrap();
        for _ in 0..37 {
            a.next_raw();
        }
        let mut b = SobolStream::new(5, 37).unwrap();
        for _ in 0..10 {
            assert_eq!(a.next_raw(), b.next_raw());
        }
        assert_eq!(a.index(), 47);
    }

    #[test]
    fn dyadic_boxes_are_filled_exactly() {
        // (0, m, 2)-net: every elementary box of volume 2^-m holds one point
        for m in 1..=8u32 {
            let n = 1usize << m;
            let mut s = SobolStream::new(2, 0).unwrap();
            let pts: Vec<Vec<u32>> = (0..n).map(|_| s.next_raw()).collect();
            for a in 0..=m {
                let b = m - a;
                let mut count = vec![0u32; n];
                for p in &pts {
                    let i = if a == 0 { 0 } else { (p[0] >> (32 - a)) as usize };
                    let j = if b == 0 { 0 } else { (p[1] >> (32 - b)) as usize };
                    count[(i << b) | j] += 1;
                }
                assert!(count.iter().all(|&c| c == 1), "m={m} a={a}");
            }
        }
    }

    #[test]
    fn points_stay_in_unit_cube() {
        let mut s = SobolStream::with_dim(16).unwrap();
        for _ in 0..1000 {
            assert!(s.next_point().iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn interior_mapping() {
        let mut a = SobolStream::with_dim(2).unwrap();
        let mut b = SobolStream::with_dim(2).unwrap();
        let unit = sample_interior(&mut a, 8, &BoxDomain::unit(2)).unwrap();
        let big = sample_interior(
            &mut b,
            8,
            &BoxDomain {
                lo: vec![0.0, 0.0],
                hi: vec![2.0, 2.0],
            },
        )
        .unwrap();
        for (u, v) in unit.iter().zip(&big) {
            assert_eq!(vec![2.0 * u[0], 2.0 * u[1]], *v);
        }

        let mut s = SobolStream::with_dim(2).unwrap();
        let pts = sample_interior(&mut s, 4096, &BoxDomain::unit(2)).unwrap();
        for c in 0..2 {
            let mean = pts.iter().map(|p| p[c]).sum::<f64>() / 4096.0;
            assert!((mean - 0.5).abs() < 0.01);
        }
        assert!(sample_interior(&mut s, 1, &BoxDomain::unit(3)).is_err());
    }

    #[test]
    fn boundary_mapping() {
        assert_eq!(
            perimeter_point(0.0),
            BoundaryPoint {
                x: [0.0, 0.0],
                face: Face::Bottom
            }
        );
        assert_eq!(
            perimeter_point(0.5),
            BoundaryPoint {
                x: [1.0, 1.0],
                face: Face::Top
            }
        );
        assert_eq!(perimeter_point(0.25).face, Face::Right);
        assert_eq!(perimeter_point(0.875).x, [0.0, 0.5]);

        let mut s = SobolStream::with_dim(1).unwrap();
        let pts = sample_boundary(&mut s, 256).unwrap();
        for p in &pts {
            let [x, y] = p.x;
            assert_eq!(x.min(1.0 - x).min(y).min(1.0 - y), 0.0);
        }
        for face in [Face::Bottom, Face::Right, Face::Top, Face::Left] {
            assert_eq!(pts.iter().filter(|p| p.face == face).count(), 64);
        }
        let mut s2 = SobolStream::with_dim(2).unwrap();
        assert!(sample_boundary(&mut s2, 1).is_err());
    }
}
