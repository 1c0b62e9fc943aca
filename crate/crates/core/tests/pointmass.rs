use std::f64::consts::PI;

use proptest::prelude::*;
use vacuumstars::pointmass::{compare_centroids, ParticleSystem, DEFAULT_R_MIN};

fn binary(m: f64, d: f64) -> (ParticleSystem<f64>, f64) {
    let w = (2.0 * m / (d * d * d)).sqrt();
    let v = w * d / 2.0;
    let s = ParticleSystem::new(
        vec![[d / 2.0, 0.0, 0.0], [-d / 2.0, 0.0, 0.0]],
        vec![[0.0, v, 0.0], [0.0, -v, 0.0]],
        vec![m, m],
    )
    .unwrap();
    (s, w)
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

#[test]
fn single_particle_is_unaccelerated() {
    let s = ParticleSystem::new(vec![[0.0, 1.0, -1.0]], vec![[0.3, 0.0, -0.1]], vec![2.0]).unwrap();
    let tr = s.nbody_integrate(5.0, 0.25, DEFAULT_R_MIN).unwrap();
    assert_eq!(tr.times.len(), 21);
    for (t, x) in tr.times.iter().zip(&tr.positions) {
        let expect = [0.3 * t, 1.0, -1.0 - 0.1 * t];
        assert!(dist(x[0], expect) < 1e-13);
    }
}

#[test]
fn circular_orbit_angular_velocity() {
    let (s, w) = binary(0.957, 4.0);
    let quarter = PI / (2.0 * w);
    let tr = s.integrate_to(&[quarter, 2.0 * quarter], 0.01, DEFAULT_R_MIN).unwrap();
    // a quarter period turns the first particle onto the +y axis
    let p = tr.positions[0][0];
    assert!(dist(p, [0.0, 2.0, 0.0]) < 2e-3 * 2.0, "{p:?}");
    let q = tr.positions[1][0];
    let angle = q[1].atan2(q[0]);
    assert!((angle - PI).abs() < 1e-3 * PI || (angle + PI).abs() < 1e-3 * PI, "{angle}");
    for x in &tr.positions {
        assert!((dist(x[0], x[1]) - 4.0).abs() < 1e-8);
    }
}

#[test]
fn conserved_quantities_over_ten_periods() {
    let (s, w) = binary(1.0, 3.0);
    let period = 2.0 * PI / w;
    let tr = s.nbody_integrate(10.0 * period, period / 400.0, DEFAULT_R_MIN).unwrap();
    let e0 = s.energy(&s.positions, &s.velocities);
    let l0 = s.angular_momentum(&s.positions, &s.velocities)[2];
    for (x, v) in tr.positions.iter().zip(&tr.velocities) {
        assert!(((s.energy(x, v) - e0) / e0).abs() < 1e-6);
        assert!(((s.angular_momentum(x, v)[2] - l0) / l0).abs() < 1e-6);
        assert!(dist(s.center_of_mass(x), [0.0; 3]) < 1e-10);
    }
}

#[test]
fn argument_checks() {
    assert!(ParticleSystem::new(vec![[0.0; 3]], vec![], vec![1.0]).is_err());
    assert!(ParticleSystem::new(vec![[0.0; 3]], vec![[0.0; 3]], vec![0.0]).is_err());
    let (s, _) = binary(1.0, 3.0);
    assert!(s.nbody_integrate(1.0, 0.0, DEFAULT_R_MIN).is_err());
    assert!(s.integrate_to(&[1.0, 0.5], 0.1, DEFAULT_R_MIN).is_err());
}

#[test]
fn mirrored_centroids_compare_relative_to_separation() {
    let (s, _) = binary(1.0, 4.0);
    let tr = s.integrate_to(&[0.0, 1.0, 2.0], 0.01, DEFAULT_R_MIN).unwrap();
    let shifted: Vec<Vec<[f64; 3]>> = tr
        .positions
        .iter()
        .map(|x| vec![[x[0][0] + 0.04, x[0][1], x[0][2]], [x[1][0] - 0.04, x[1][1], x[1][2]]])
        .collect();
    let dev = compare_centroids(&shifted, &tr).unwrap();
    assert!((dev - 0.01).abs() < 1e-12, "{dev}");
    assert!(compare_centroids(&shifted[..2], &tr).is_err());
}

proptest! {
    #[test]
    fn momentum_and_time_reversal(
        seed in prop::array::uniform3(-1.0f64..1.0),
        masses in prop::array::uniform3(0.2f64..2.0),
    ) {
        let positions = vec![[0.0, 0.0, 0.0], [3.0, seed[0], 0.0], [-1.0, 3.0 + seed[1], seed[2]]];
        let velocities = vec![[0.1, 0.0, seed[2] * 0.1], [0.0, 0.3, 0.0], [-0.2, 0.0, 0.05]];
        let s = ParticleSystem::new(positions.clone(), velocities, masses.to_vec()).unwrap();
        let tr = s.integrate_to(&[1.5], 1e-3, DEFAULT_R_MIN).unwrap();
        let (x, v) = (&tr.positions[0], &tr.velocities[0]);
        let p0 = s.total_momentum(&s.velocities);
        let p1 = s.total_momentum(v);
        prop_assert!(dist(p0, p1) < 1e-12);

        let back = ParticleSystem::new(x.clone(), v.iter().map(|w| [-w[0], -w[1], -w[2]]).collect(), masses.to_vec()).unwrap();
        let end = back.integrate_to(&[1.5], 1e-3, DEFAULT_R_MIN).unwrap();
        for (a, b) in end.positions[0].iter().zip(&positions) {
            prop_assert!(dist(*a, *b) < 1e-8);
        }
    }
}
