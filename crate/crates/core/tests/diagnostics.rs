use std::f64::consts::PI;

use proptest::prelude::*;
use vacuumstars::diagnostics::{
    damping, decay_fit, x_norm, y_seminorm, EnergyHistory, EnergyReport, StarEnergy, ZetaOperator,
};
use vacuumstars::domain::{build_grid, chi, FieldRep, VectorField};
use vacuumstars::kinematics::{star_fields, FlowState, StarFrame};
use vacuumstars::profiles::{make_profile, DensityProfile, ProfileKind};

fn parabolic(delta: f64) -> DensityProfile<f64> {
    make_profile(ProfileKind::Parabolic, [0.0; 3], 1.5, delta).unwrap()
}

fn identity_field() -> VectorField<f64> {
    std::array::from_fn(|i| FieldRep::coordinate(6, i))
}

#[test]
fn x_norm_of_constants_and_zero() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let p = parabolic(1.0);
    let zero: VectorField<f64> = std::array::from_fn(|_| FieldRep::zero(6));
    assert_eq!(x_norm(&zero, 2, 2, &grid, &p).unwrap(), 0.0);
    let c = [0.3, -1.2, 0.5];
    let f: VectorField<f64> = std::array::from_fn(|i| FieldRep::constant(6, c[i]));
    let c2: f64 = c.iter().map(|v| v * v).sum();
    let v = x_norm(&f, 0, 2, &grid, &p).unwrap();
    assert!((v - c2 * 32.0 * PI / 105.0).abs() < 1e-12);
    // derivatives of a constant vanish
    assert!((x_norm(&f, 2, 2, &grid, &p).unwrap() - v).abs() < 1e-12);
    assert!(x_norm(&f, 3, 2, &grid, &p).is_err());
}

#[test]
fn x_norm_of_identity_matches_a_dense_radial_integral() {
    let grid = build_grid::<f64>(16, 110).unwrap();
    let p = parabolic(1.0);
    let v = x_norm(&identity_field(), 1, 1, &grid, &p).unwrap();
    // F = x at order 1: χW²(r² + 2r²) + χW³r² + χ̄W²(r² + 3), radial
    let n = 200_000;
    let mut oracle = 0.0;
    for k in 0..n {
        let r = (k as f64 + 0.5) / n as f64;
        let w = 1.0 - r * r;
        let c = chi(r).unwrap();
        let integrand = c * w * w * 3.0 * r * r + c * w.powi(3) * r * r + (1.0 - c) * w * w * (r * r + 3.0);
        oracle += 4.0 * PI * r * r * integrand / n as f64;
    }
    assert!(((v - oracle) / oracle).abs() < 5e-3, "{v} vs {oracle}");
}

#[test]
fn y_seminorms_on_the_identity_map() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let p = parabolic(1.0);
    let fields = star_fields(&StarFrame::canonical([0.0; 3]), &std::array::from_fn(|_| FieldRep::zero(6)), 0.0, &grid);
    let div = y_seminorm(&identity_field(), 0, 2, ZetaOperator::Divergence, &grid, &p, &fields).unwrap();
    assert!((div - 9.0 * 64.0 * PI / 315.0).abs() < 1e-12, "{div}");

    let zero: VectorField<f64> = std::array::from_fn(|_| FieldRep::zero(6));
    for op in [ZetaOperator::Gradient, ZetaOperator::Divergence, ZetaOperator::Curl] {
        assert_eq!(y_seminorm(&zero, 2, 2, op, &grid, &p, &fields).unwrap(), 0.0);
    }

    // F = ∇(x²y + z³)
    let g: VectorField<f64> = [
        FieldRep::monomial(6, [1, 1, 0], 2.0).unwrap(),
        FieldRep::monomial(6, [2, 0, 0], 1.0).unwrap(),
        FieldRep::monomial(6, [0, 0, 2], 3.0).unwrap(),
    ];
    let curl = y_seminorm(&g, 0, 2, ZetaOperator::Curl, &grid, &p, &fields).unwrap();
    assert!(curl < 1e-20, "{curl}");
    // Curl acts after Λ and ∂̸, which do not commute with ∂
    assert!(y_seminorm(&g, 1, 2, ZetaOperator::Curl, &grid, &p, &fields).unwrap() > 1e-3);
}

#[test]
fn damping_scaling() {
    let grid = build_grid::<f64>(8, 98).unwrap();
    let v: VectorField<f64> = std::array::from_fn(|i| FieldRep::coordinate(6, i).scale(0.01));
    let mut state = FlowState::initial(vec![v.clone()]);
    state.tau = 0.4;
    let d1 = damping(&state, 2, &grid, &[parabolic(1e-3)]).unwrap();
    let d2 = damping(&state, 2, &grid, &[parabolic(2e-3)]).unwrap();
    assert!((d1 / d2 - 2.0).abs() < 1e-12);
    let expect = 0.5 * (1.5f64 * 0.4).exp() / 1e-3 * x_norm(&v, 2, 2, &grid, &parabolic(1e-3)).unwrap();
    assert!((d1 - expect).abs() < 1e-12 * expect);
    assert_eq!(damping(&FlowState::at_rest(1, 6), 2, &grid, &[parabolic(1e-3)]).unwrap(), 0.0);
}

#[test]
fn decay_fit_examples() {
    let exp = |c: f64| (0..10).map(|k| (0.3 * k as f64, c * (-2.0 * 0.3 * k as f64).exp())).collect::<Vec<_>>();
    let (slope, _) = decay_fit(&exp(1.0)).unwrap();
    assert!((slope + 2.0).abs() < 1e-12);
    let (_, a) = decay_fit(&exp(0.01)).unwrap();
    let (_, b) = decay_fit(&exp(0.0025)).unwrap();
    assert!((a - b - 2.0 * 2f64.ln()).abs() < 1e-12);
    let flat: Vec<(f64, f64)> = (0..6).map(|k| (k as f64, 3.0)).collect();
    assert!(decay_fit(&flat).unwrap().0.abs() < 1e-15);
    assert!(decay_fit(&flat[..4]).is_err());
    let mut bad = flat.clone();
    bad[2].1 = 0.0;
    assert!(decay_fit(&bad).is_err());
}

fn report(tau: f64, values: &[f64]) -> EnergyReport<f64> {
    let stars = values
        .iter()
        .map(|v| StarEnergy {
            x_theta: vec![*v, 0.0],
            x_theta_dot: vec![0.5 * v, 0.0],
            y_grad: vec![0.0; 2],
            y_div: vec![0.0; 2],
            y_curl_theta: vec![0.1 * v, 0.0],
            y_curl_theta_dot: vec![0.0; 2],
        })
        .collect();
    EnergyReport {
        tau,
        cap: 1,
        stars,
        damping: 0.0,
        tidal_norm: 0.0,
        self_norm: 0.0,
        min_separation: f64::INFINITY,
        mass: 1.0,
    }
}

fn history(values: &[(f64, f64)]) -> EnergyHistory<f64> {
    let mut h = EnergyHistory::new();
    for (k, (a, b)) in values.iter().enumerate() {
        h.push(report(0.1 * k as f64, &[*a, *b]));
    }
    h
}

#[test]
fn single_snapshot_and_zero_history() {
    let h = history(&[(2.0, 1.0)]);
    let inst = h.reports[0].stars.iter().map(|s| s.energy(0)).sum::<f64>();
    assert_eq!(h.energy_s(0.0, 0).unwrap(), inst);
    assert_eq!(h.truncated_s(0.0, 0.0, 0).unwrap(), inst);
    let z = history(&[(0.0, 0.0), (0.0, 0.0)]);
    assert_eq!(z.energy_s(0.1, 1).unwrap(), 0.0);
    assert_eq!(z.curl_energy_c(0.1, 1).unwrap(), 0.0);
    assert!(h.energy_s(0.0, 2).is_err());
}

proptest! {
    #[test]
    fn running_suprema_and_truncation_chain(values in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..20)) {
        let h = history(&values);
        let taus: Vec<f64> = h.reports.iter().map(|r| r.tau).collect();
        let mut prev = 0.0;
        for &t in &taus {
            let s = h.energy_s(t, 0).unwrap();
            prop_assert!(s >= prev);
            prev = s;
            prop_assert_eq!(h.truncated_s(taus[0], t, 0).unwrap(), s);
            prop_assert_eq!(h.truncated_s(t, t, 0).unwrap(), h.reports.iter().find(|r| r.tau == t).unwrap().stars.iter().map(|s| s.energy(0)).sum::<f64>());
        }
        prop_assert!(h.truncation_chain_violation(0).unwrap() <= 0.0);
        let last = *taus.last().unwrap();
        let mid = taus[taus.len() / 2];
        prop_assert!(h.truncated_s(mid, last, 0).unwrap() <= h.truncated_s(0.0, last, 0).unwrap());
    }

    #[test]
    fn x_norm_is_quadratic(scale in -3.0f64..3.0, c in prop::array::uniform3(-1.0f64..1.0)) {
        let grid = build_grid::<f64>(4, 50).unwrap();
        let p = parabolic(1.0);
        let f: VectorField<f64> = std::array::from_fn(|i| &FieldRep::coordinate(6, i).scale(c[i]) + &FieldRep::constant(6, c[(i + 1) % 3]));
        let g: VectorField<f64> = std::array::from_fn(|i| f[i].scale(scale));
        let a = x_norm(&f, 2, 2, &grid, &p).unwrap();
        let b = x_norm(&g, 2, 2, &grid, &p).unwrap();
        prop_assert!(a >= 0.0);
        prop_assert!((b - scale * scale * a).abs() <= 1e-12 * (1.0 + b.abs()));
    }
}
