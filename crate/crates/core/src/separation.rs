//! Strong Separation Condition, overlap checks and configuration generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kinematics::{MuSpec, StarFrame};
use crate::linalg::{norm, sub, Vec3};
use crate::scalar::Scalar;

pub const DEFAULT_PAIR_SAMPLES: usize = 1000;
pub const GOLDEN_STEPS: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SscArgmin {
    pub star: usize,
    pub other: usize,
    pub lambda: f64,
    pub x: [f64; 3],
    pub z: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparationReport {
    pub ssc_value: f64,
    pub argmin: SscArgmin,
    pub required: f64,
    pub pass: bool,
    /// `(κ, κ', |x̄_κ − x̄_κ'|)` for every pair.
    pub center_distances: Vec<(usize, usize, f64)>,
    pub overlap_pass: bool,
}

/// Distance from the origin to the segment `[u, v]` and the minimizing `λ`
/// along `(1 − λ) u + λ v`.
pub fn segment_distance<T: Scalar>(u: Vec3<T>, v: Vec3<T>) -> (T, T) {
    let d = sub(v, u);
    let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let lambda = if dd == T::zero() {
        T::zero()
    } else {
        let t = -(u[0] * d[0] + u[1] * d[1] + u[2] * d[2]) / dd;
        t.max(T::zero()).min(T::one())
    };
    let p = [u[0] + lambda * d[0], u[1] + lambda * d[1], u[2] + lambda * d[2]];
    (norm(p), lambda)
}

/// Golden-section minimization of `|(1 − λ) u + λ v|` over `λ ∈ [0, 1]`.
pub fn golden_segment_distance<T: Scalar>(u: Vec3<T>, v: Vec3<T>, steps: usize) -> (T, T) {
    let f = |l: T| {
        let one = T::one() - l;
        norm([one * u[0] + l * v[0], one * u[1] + l * v[1], one * u[2] + l * v[2]])
    };
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (T::zero(), T::one());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..steps {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let mut best = ((a + b) / T::lit(2.0), f((a + b) / T::lit(2.0)));
    for l in [T::zero(), T::one()] {
        let v = f(l);
        if v < best.1 {
            best = (l, v);
        }
    }
    (best.1, best.0)
}

fn ball_point<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= 1.0 {
            return p;
        }
    }
}

/// Reference points used for non-constant `μ`: the centre, the six axis
/// poles, then seeded uniform samples (a prefix of a fixed stream, so larger
/// sample counts refine smaller ones).
pub fn reference_samples(count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut pts = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pts.len() < count {
        pts.push(ball_point(&mut rng));
    }
    pts.truncate(count.max(1));
    pts
}

/// Estimate of
/// `min_{κ≠κ'} inf_λ inf_{x,z} |(1−λ)(μ_κ(x) − μ_κ'(z)) + λ(x̄_κ − x̄_κ')|`,
/// closed form for constant `μ`, `(x, z)` sampling with golden-section
/// refinement in `λ` otherwise.
pub fn ssc_min(frames: &[StarFrame<f64>], epsilon2: f64, pair_samples: usize, seed: u64) -> Result<SeparationReport> {
    if frames.len() < 2 {
        return Err(Error::Argument("the separation condition needs at least two stars".into()));
    }
    let per_side = (pair_samples as f64).sqrt().ceil().max(1.0) as usize;
    let samples = reference_samples(per_side, seed);
    let mut best = f64::INFINITY;
    let mut argmin = SscArgmin {
        star: 0,
        other: 1,
        lambda: 0.0,
        x: [0.0; 3],
        z: [0.0; 3],
    };
    let mut distances = Vec::new();
    for k in 0..frames.len() {
        for k2 in (k + 1)..frames.len() {
            let dc = sub(frames[k].center, frames[k2].center);
            distances.push((k, k2, norm(dc)));
            let both_constant = frames[k].mu.is_constant() && frames[k2].mu.is_constant();
            if both_constant {
                let dmu = sub(frames[k].mu.eval(&[0.0; 3]), frames[k2].mu.eval(&[0.0; 3]));
                let (d, l) = segment_distance(dmu, dc);
                if d < best {
                    best = d;
                    argmin = SscArgmin {
                        star: k,
                        other: k2,
                        lambda: l,
                        x: [0.0; 3],
                        z: [0.0; 3],
                    };
                }
                continue;
            }
            for x in &samples {
                let mx = frames[k].mu.eval(x);
                for z in &samples {
                    let dmu = sub(mx, frames[k2].mu.eval(z));
                    let (d, l) = golden_segment_distance(dmu, dc, GOLDEN_STEPS);
                    if d < best {
                        best = d;
                        argmin = SscArgmin {
                            star: k,
                            other: k2,
                            lambda: l,
                            x: *x,
                            z: *z,
                        };
                    }
                }
            }
        }
    }
    let required = 3.0 + epsilon2;
    Ok(SeparationReport {
        ssc_value: best,
        argmin,
        required,
        pass: best >= required,
        center_distances: distances,
        overlap_pass: check_overlap(frames),
    })
}

/// Same infimum with `λ` restricted to `{0, 1}`; an upper bound on
/// [`ssc_min`]'s value.
pub fn ssc_endpoints(frames: &[StarFrame<f64>], pair_samples: usize, seed: u64) -> Result<f64> {
    if frames.len() < 2 {
        return Err(Error::Argument("the separation condition needs at least two stars".into()));
    }
    let per_side = (pair_samples as f64).sqrt().ceil().max(1.0) as usize;
    let samples = reference_samples(per_side, seed);
    let mut best = f64::INFINITY;
    for k in 0..frames.len() {
        for k2 in (k + 1)..frames.len() {
            let dc = norm(sub(frames[k].center, frames[k2].center));
            best = best.min(dc);
            for x in &samples {
                for z in &samples {
                    best = best.min(norm(sub(frames[k].mu.eval(x), frames[k2].mu.eval(z))));
                }
            }
        }
    }
    Ok(best)
}

/// `min |x̄_κ − x̄_κ'| > 2`; vacuous for a single star.
pub fn check_overlap<T: Scalar>(frames: &[StarFrame<T>]) -> bool {
    min_center_distance(frames).map(|d| d > T::lit(2.0)).unwrap_or(true)
}

pub fn min_center_distance<T: Scalar>(frames: &[StarFrame<T>]) -> Option<T> {
    let mut best: Option<T> = None;
    for k in 0..frames.len() {
        for k2 in (k + 1)..frames.len() {
            let d = norm(sub(frames[k].center, frames[k2].center));
            best = Some(best.map_or(d, |b: T| b.min(d)));
        }
    }
    best
}

/// Six stars on the vertices of a regular hexagon of circumradius `r` in the
/// `x₃ = 0` plane, each with `μ ≡ x̄`.
pub fn generate_hexagon<T: Scalar>(r: T) -> Result<Vec<StarFrame<T>>> {
    if !(r > T::zero()) {
        return Err(Error::Argument(format!("hexagon radius must be positive, got {r}")));
    }
    Ok((0..6)
        .map(|k| {
            let a = T::PI() * T::lit(k as f64) / T::lit(3.0);
            StarFrame {
                center: [r * a.cos(), r * a.sin(), T::zero()],
                mu: MuSpec::Constant([r * a.cos(), r * a.sin(), T::zero()]),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn segment_examples() {
        let (d, _) = segment_distance([4.0, 0.0, 0.0], [0.0, 4.0, 0.0]);
        assert!((d - 8f64.sqrt()).abs() < 1e-12);
        let (d, _) = segment_distance([4.0, 0.0, 0.0], [4.0, 0.0, 0.0]);
        assert_eq!(d, 4.0);
        let (g, _) = golden_segment_distance([4.0, 0.0, 0.0], [0.0, 4.0, 0.0], GOLDEN_STEPS);
        assert!((g - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn hexagon_thresholds() {
        let h = generate_hexagon(3.2).unwrap();
        let r = ssc_min(&h, 0.1, 1000, 1).unwrap();
        assert!((r.ssc_value - 3.2).abs() < 1e-12 && r.pass && r.overlap_pass);
        assert!(!ssc_min(&generate_hexagon(2.5).unwrap(), 0.1, 1000, 1).unwrap().pass);
        assert!(generate_hexagon(0.0).is_err());
    }
}
