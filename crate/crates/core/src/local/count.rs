//! Point counts on `y² = f̄(z)` over prime fields and the singular Weil bound.

use num_integer::Roots;

use crate::arith::{mod_pow, sqrt_mod_prime};

/// `⌈q + 1 - 4√q⌉`, computed as `q + 1 - ⌊√(16q)⌋` with no floating point.
pub fn weil_lower_bound(q: u64) -> i64 {
    let s = (16 * q as u128).sqrt();
    q as i64 + 1 - s as i64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointCount {
    pub total: u64,
    pub smooth: u64,
}

pub(crate) fn eval_mod(f: &[u64], z: u64, p: u64) -> u64 {
    f.iter()
        .rev()
        .fold(0u128, |acc, &c| (acc * z as u128 + c as u128) % p as u128) as u64
}

pub(crate) fn derivative_mod(f: &[u64], p: u64) -> Vec<u64> {
    f.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| ((i as u128 * c as u128) % p as u128) as u64)
        .collect()
}

/// The `y` with `y² = v` in `𝔽_p`.
fn roots_of(v: u64, p: u64) -> Vec<u64> {
    if p == 2 || v == 0 {
        return vec![v % p];
    }
    if mod_pow(v, (p - 1) / 2, p) != 1 {
        return Vec::new();
    }
    let r = sqrt_mod_prime(v, p).expect("residue");
    vec![r, p - r]
}

fn for_each_point(f: &[u64], p: u64, mut visit: impl FnMut(u64, u64, bool)) {
    let df = derivative_mod(f, p);
    for z in 0..p {
        let v = eval_mod(f, z, p);
        let dz = eval_mod(&df, z, p);
        for y in roots_of(v, p) {
            let singular = (2 * y) % p == 0 && dz == 0;
            visit(z, y, !singular);
        }
    }
}

/// Affine points of `y² = f̄(z)` over `𝔽_p`; a point is smooth unless both
/// partial derivatives `2y` and `f̄'(z)` vanish there.
pub fn count_affine_points(f: &[u64], p: u64) -> PointCount {
    let mut c = PointCount { total: 0, smooth: 0 };
    for_each_point(f, p, |_, _, smooth| {
        c.total += 1;
        if smooth {
            c.smooth += 1;
        }
    });
    c
}

pub fn find_smooth_point(f: &[u64], p: u64) -> Option<(u64, u64)> {
    let mut found = None;
    for_each_point(f, p, |z, y, smooth| {
        if smooth && found.is_none() {
            found = Some((z, y));
        }
    });
    found
}

pub fn singular_points(f: &[u64], p: u64) -> Vec<(u64, u64)> {
    let mut out = Vec::new();
    for_each_point(f, p, |z, y, smooth| {
        if !smooth {
            out.push((z, y));
        }
    });
    out
}
