use std::f64::consts::PI;

use vacuumstars::domain::{build_grid, FieldRep, ReferenceGrid, VectorField};
use vacuumstars::gravity::{
    potential_field, self_interaction, self_interaction_exterior, tidal, tidal_raw, GravityKernel, DEFAULT_D_SAFE,
};
use vacuumstars::kinematics::{star_fields, StarFields, StarFrame};
use vacuumstars::profiles::{make_profile, DensityProfile, ProfileKind};
use vacuumstars::Error;

const MASS: f64 = 32.0 * PI / 105.0;

fn zero() -> VectorField<f64> {
    std::array::from_fn(|_| FieldRep::zero(6))
}

fn parabolic(center: [f64; 3], delta: f64) -> DensityProfile<f64> {
    make_profile(ProfileKind::Parabolic, center, 1.5, delta).unwrap()
}

fn pair(grid: &ReferenceGrid<f64>, d: f64, delta: f64, tau: f64) -> (Vec<DensityProfile<f64>>, Vec<StarFields<f64>>) {
    let centers = [[-d / 2.0, 0.0, 0.0], [d / 2.0, 0.0, 0.0]];
    let profiles = centers.iter().map(|c| parabolic(*c, delta)).collect();
    let fields = centers
        .iter()
        .map(|c| star_fields(&StarFrame::canonical(*c), &zero(), tau, grid))
        .collect();
    (profiles, fields)
}

#[test]
fn tidal_between_two_parabolic_stars() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let (profiles, fields) = pair(&grid, 4.0, 0.1, 0.0);
    // δ² m (−4, 0, 0)/4³ at the centre of star 1
    let expect = -0.01 * MASS * 4.0 / 64.0;
    let (v, dmin) = tidal_raw(&kernel, &grid, &profiles[1], &fields[1], 0.0, &[-2.0, 0.0, 0.0]);
    assert!((v[0] - expect).abs() < 1e-15, "{v:?}");
    assert!(v[1].abs() < 1e-16 && v[2].abs() < 1e-16);
    assert!(dmin > 3.0 && dmin < 3.1, "{dmin}");
    assert!((expect + 5.9840e-4).abs() < 1e-8);

    // mirrored point, mirrored source
    let (w, _) = tidal_raw(&kernel, &grid, &profiles[0], &fields[0], 0.0, &[2.0, 0.0, 0.0]);
    assert!((w[0] + v[0]).abs() < 1e-16);

    // τ = log 2: the ζ-separation is frozen, the prefactor halves
    let tau = 2f64.ln();
    let (profiles, fields) = pair(&grid, 4.0, 0.1, tau);
    let (h, _) = tidal_raw(&kernel, &grid, &profiles[1], &fields[1], tau, &[-2.0, 0.0, 0.0]);
    assert!((h[0] - expect / 2.0).abs() < 1e-15, "{h:?}");
}

#[test]
fn tidal_refuses_near_contact() {
    let grid = build_grid::<f64>(6, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let (profiles, fields) = pair(&grid, 2.2, 0.1, 0.0);
    // the outermost node of star 0 facing star 1
    let node = (0..grid.len())
        .max_by(|&a, &b| fields[0].zeta[a][0].total_cmp(&fields[0].zeta[b][0]))
        .unwrap();
    let err = tidal(&kernel, &grid, &profiles, &fields, 0, 1, node, 0.0, DEFAULT_D_SAFE).unwrap_err();
    assert!(matches!(err, Error::NearContact { .. }));
    assert!(tidal(&kernel, &grid, &profiles, &fields, 0, 0, node, 0.0, DEFAULT_D_SAFE).is_err());
}

#[test]
fn exterior_field_of_a_deformed_star_matches_a_fine_direct_sum() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let profile = parabolic([0.0; 3], 1.0);
    let theta: VectorField<f64> = [
        FieldRep::from_coeffs(6, {
            let mut c = vec![0.0; 84];
            c[2] = 0.1;
            c[5] = 0.05;
            c
        })
        .unwrap(),
        FieldRep::zero(6),
        FieldRep::from_coeffs(6, {
            let mut c = vec![0.0; 84];
            c[1] = -0.08;
            c
        })
        .unwrap(),
    ];
    let frame = StarFrame::canonical([0.0; 3]);
    let tau = 0.3;
    let p = [1.1, 0.2, -0.3];
    let (v, _) = tidal_raw(&kernel, &grid, &profile, &star_fields(&frame, &theta, tau, &grid), tau, &p);

    // independent oracle: the displayed W̃^α kernel on a much finer grid
    let fine = build_grid::<f64>(24, 1500).unwrap();
    let ff = star_fields(&frame, &theta, tau, &fine);
    let mut oracle = [0.0; 3];
    for (n, x) in fine.nodes.iter().enumerate() {
        let z = ff.zeta[n];
        let d = [p[0] - z[0], p[1] - z[1], p[2] - z[2]];
        let r = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
        for k in 0..3 {
            oracle[k] += fine.weights[n] * profile.w_alpha(x) * d[k] / (r * r * r);
        }
    }
    let scale = (-tau).exp();
    let oracle = oracle.map(|o| o * scale);
    let size = oracle.iter().map(|o| o.abs()).fold(0.0, f64::max);
    for k in 0..3 {
        assert!((v[k] - oracle[k]).abs() < 2e-3 * size, "{v:?} vs {oracle:?}");
    }
}

#[test]
fn self_interaction_center_and_delta_scaling() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let fields = star_fields(&StarFrame::canonical([0.0; 3]), &zero(), 0.0, &grid);
    let strong = self_interaction(&kernel, &grid, &parabolic([0.0; 3], 1.0), &fields, 0.0);
    let weak = self_interaction(&kernel, &grid, &parabolic([0.0; 3], 0.1), &fields, 0.0);
    let (mut worst, mut ratio) = (0.0f64, 0.0f64);
    for (s, w) in strong.iter().zip(&weak) {
        for k in 0..3 {
            if s[k].abs() > 1e-8 {
                ratio = ratio.max((w[k] / s[k] - 0.01).abs());
            }
        }
        worst = worst.max(s.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
    assert!(ratio < 1e-12);
    assert!(worst > 0.1);

    let at_center = self_interaction_exterior(&kernel, &grid, &parabolic([0.0; 3], 1.0), &fields, 0.0, &[3.0, 0.0, 0.0]);
    assert!((at_center[0] + MASS / 9.0).abs() < 1e-14);
}

#[test]
fn single_star_potential_gradient_is_minus_self_field() {
    let grid = build_grid::<f64>(6, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let profiles = vec![parabolic([0.0; 3], 1.0)];
    let fields = vec![star_fields(&StarFrame::canonical([0.0; 3]), &zero(), 0.0, &grid)];
    let pf = potential_field(&kernel, &grid, &profiles, &fields, 0.0, DEFAULT_D_SAFE, true).unwrap();
    for (g, s) in pf.grad_psi[0].iter().zip(&pf.self_field[0]) {
        for k in 0..3 {
            assert_eq!(g[k], -s[k]);
        }
    }
    assert!(pf.tidal_sum[0].iter().all(|v| v == &[0.0; 3]));
}

#[test]
fn distant_pair_is_self_gravity_dominated_and_mirrored() {
    let grid = build_grid::<f64>(6, 98).unwrap();
    let kernel = GravityKernel::new(&grid, 6).unwrap();
    let (profiles, fields) = pair(&grid, 1000.0, 1.0, 0.0);
    let pf = potential_field(&kernel, &grid, &profiles, &fields, 0.0, DEFAULT_D_SAFE, false).unwrap();
    let rel = pf.tidal_norm(&grid, 0) / pf.self_norm(&grid, 0);
    // m/d² against the L² size of 𝒢
    assert!(rel < 5e-6, "{rel}");
    let (a, b) = (&pf.tidal_sum[0], &pf.tidal_sum[1]);
    let mean = |v: &Vec<[f64; 3]>| v.iter().map(|x| x[0]).sum::<f64>() / v.len() as f64;
    assert!((mean(a) + mean(b)).abs() < 1e-12 * mean(b).abs());
    assert!(mean(a) < 0.0);
}
