use num_complex::Complex64;
use proptest::prelude::*;
use tiltrotor::linsys::{integrate_fixed_step, saturate, tf_series, tf_to_ss, Polynomial, RationalTransfer, StateSpaceModel};
use tiltrotor::synthesis::{
    altitude_kb, characteristic_poly, place_poles, routh_hurwitz, stability_check, PidGains,
};
use tiltrotor::vehicle::{
    allocate_thrust, altitude_plant_tf, combined_plant_tf, motor_simplified_tf, AirframeParams, DuctState,
    FullMotorParams, MotorHealth, MotorParams,
};

/// Weierstrass iteration on the monic form; independent of the companion
/// matrix solver under test.
fn durand_kerner(p: &Polynomial) -> Vec<Complex64> {
    let lead = p.leading();
    let c: Vec<f64> = p.coeffs().iter().map(|v| v / lead).collect();
    let n = c.len() - 1;
    let eval = |z: Complex64| c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    let radius = 1.0 + c[..n].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..2000 {
        let mut delta = 0.0_f64;
        for i in 0..n {
            let denom = (0..n).filter(|&j| j != i).fold(Complex64::new(1.0, 0.0), |acc, j| acc * (z[i] - z[j]));
            let step = eval(z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-14 * radius {
            break;
        }
    }
    z
}

fn coeff_vec(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0_f64, len)
}

fn nonzero_poly(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Polynomial> {
    (coeff_vec(len), prop_oneof![0.5..5.0_f64, -5.0..-0.5_f64]).prop_map(|(mut c, lead)| {
        c.push(lead);
        Polynomial::new(c)
    })
}

fn stable_poly(max_extra: usize) -> impl Strategy<Value = Polynomial> {
    // Monic with negative real roots, so realizations stay bounded.
    prop::collection::vec(0.2..3.0_f64, 1..=max_extra)
        .prop_map(|rs| Polynomial::from_roots(&rs.iter().map(|r| Complex64::new(-r, 0.0)).collect::<Vec<_>>()))
}

fn motor_strategy() -> impl Strategy<Value = MotorParams> {
    (1.0..50.0_f64, 0.01..1.0_f64, 0.01..1.0_f64, 0.5..2.0_f64)
        .prop_map(|(km, l, r, kt)| MotorParams::new(km, l, r, kt).unwrap())
}

/// Four poles summing to `-kb`: a conjugate pair and two reals.
fn constrained_poles(kb: f64) -> impl Strategy<Value = [Complex64; 4]> {
    (0.05..0.45_f64, 0.0..2.0_f64, 0.1..0.9_f64).prop_map(move |(pair_share, im, split)| {
        let pair_re = -kb * pair_share / 2.0;
        let rest = -kb * (1.0 - pair_share);
        let r1 = rest * split;
        [
            Complex64::new(pair_re, im),
            Complex64::new(pair_re, -im),
            Complex64::new(r1, 0.0),
            Complex64::new(rest - r1, 0.0),
        ]
    })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_degree_adds(p in nonzero_poly(0..=5), q in nonzero_poly(0..=5)) {
        prop_assert_eq!((&p * &q).degree(), p.degree() + q.degree());
    }

    #[test]
    fn roots_rebuild_polynomial(p in nonzero_poly(1..=6)) {
        let roots = p.roots().unwrap();
        prop_assert_eq!(roots.len(), p.degree());
        let rebuilt = Polynomial::from_roots(&roots).scale(p.leading());
        let scale = p.max_abs_coeff();
        for i in 0..=p.degree() {
            prop_assert!((rebuilt.coeff(i) - p.coeff(i)).abs() <= 1e-6 * scale,
                "coefficient {} differs: {} vs {}", i, rebuilt.coeff(i), p.coeff(i));
        }
    }

    #[test]
    fn roots_match_independent_oracle(p in nonzero_poly(1..=5)) {
        let ours = p.roots().unwrap();
        let oracle = durand_kerner(&p);
        let scale = 1.0 + oracle.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        // Cross-check by evaluating the oracle polynomial at our roots.
        for r in &ours {
            let nearest = oracle.iter().map(|z| (z - r).norm()).fold(f64::INFINITY, f64::min);
            let residual = p.eval_complex(*r).norm() / (p.max_abs_coeff() * scale.powi(p.degree() as i32));
            prop_assert!(nearest <= 1e-3 * scale || residual < 1e-9, "root {} far from oracle", r);
        }
    }

    #[test]
    fn series_commutes(a in stable_poly(3), b in stable_poly(3), ka in 0.1..10.0_f64, kb in 0.1..10.0_f64) {
        let g1 = RationalTransfer::new(Polynomial::constant(ka), a).unwrap();
        let g2 = RationalTransfer::new(Polynomial::from_descending(&[1.0, kb]), b).unwrap();
        prop_assert!(tf_series(&g1, &g2).approx_eq(&tf_series(&g2, &g1), 1e-12));
    }

    #[test]
    fn saturate_is_idempotent(u in -1e4..1e4_f64, lo in -100.0..0.0_f64, width in 0.0..200.0_f64) {
        let hi = lo + width;
        let once = saturate(u, lo, hi).unwrap();
        prop_assert_eq!(saturate(once, lo, hi).unwrap(), once);
        prop_assert!(once >= lo && once <= hi);
    }

    #[test]
    fn realization_reproduces_transfer(den in stable_poly(4), num in coeff_vec(1..=4)) {
        let num = Polynomial::new(num[..num.len().min(den.degree() + 1)].to_vec());
        prop_assume!(!num.is_zero());
        let g = RationalTransfer::new(num, den).unwrap();
        let back = tf_to_ss(&g).unwrap().to_transfer();
        prop_assert!(back.approx_eq(&g, 1e-9), "{} vs {}", back, g);
    }

    #[test]
    fn combined_plant_is_series(motor in motor_strategy(), m in 100.0..1000.0_f64, lambda in 0.1..20.0_f64) {
        let combined = combined_plant_tf(&motor, m, lambda).unwrap();
        let series = tf_series(&altitude_plant_tf(m, lambda).unwrap(), &motor_simplified_tf(&motor));
        prop_assert!(combined.approx_eq(&series, 1e-12));
    }

    #[test]
    fn allocation_conserves_and_is_symmetric(f in 0.0..7100.0_f64) {
        let af = AirframeParams::default();
        let healthy = allocate_thrust(f, &af, &DuctState::healthy(&af)).unwrap();
        prop_assert!(close(healthy.motor_forces.iter().sum(), f, 1e-12));
        prop_assert!(healthy.motor_forces.iter().all(|&x| close(x, f / 8.0, 1e-12)));
        prop_assert!(!healthy.saturated);
    }

    #[test]
    fn failed_allocation_keeps_ducts_balanced(f in 0.0..7100.0_f64, duct in 0usize..4, motor in 0usize..2) {
        let af = AirframeParams::default();
        let mut st = DuctState::healthy(&af);
        st.set(duct, motor, MotorHealth::Failed).unwrap();
        let r = allocate_thrust(f, &af, &st).unwrap();
        prop_assert!(r.total <= f + 1e-9);
        prop_assert!(close(r.motor_forces.iter().sum(), r.total, 1e-12));
        prop_assert_eq!(r.motor_forces[duct * 2 + motor], 0.0);
        let per_duct: Vec<f64> = r.motor_forces.chunks(2).map(|c| c.iter().sum()).collect();
        for d in &per_duct {
            prop_assert!(close(*d, per_duct[0], 1e-12));
        }
        if !r.saturated {
            prop_assert!(close(r.total, f, 1e-12));
        }
    }

    #[test]
    fn place_poles_round_trip(
        (motor, m, lambda, poles) in (motor_strategy(), 100.0..1000.0_f64, 0.1..20.0_f64).prop_flat_map(|(mo, m, l)| {
            (Just(mo), Just(m), Just(l), constrained_poles(altitude_kb(&mo, m, l)))
        })
    ) {
        let gains = place_poles(&motor, m, lambda, &poles).unwrap();
        let got = characteristic_poly(&motor, m, lambda, &gains).unwrap();
        let want = Polynomial::from_roots(&poles);
        for i in 0..=4 {
            prop_assert!(close(got.coeff(i), want.coeff(i), 1e-9), "coefficient {}: {} vs {}", i, got.coeff(i), want.coeff(i));
        }
    }

    #[test]
    fn gains_never_move_the_cubic_coefficient(motor in motor_strategy(), kp in -10.0..10.0_f64, ki in -1.0..1.0_f64, kd in -50.0..50.0_f64) {
        let (m, lambda) = (577.0, 9.0);
        let p = characteristic_poly(&motor, m, lambda, &PidGains::new(kp, ki, kd)).unwrap();
        prop_assert!(close(p.coeff(3), altitude_kb(&motor, m, lambda), 1e-12));
        prop_assert_eq!(p.coeff(4), 1.0);
    }

    #[test]
    fn routh_agrees_with_roots(roots in prop::collection::vec((-3.0..3.0_f64, 0.0..3.0_f64, any::<bool>()), 2..=2)) {
        // Two pairs (complex or split real) give a real quartic.
        let mut rs = Vec::new();
        for (re, im, complex) in roots {
            if complex {
                rs.push(Complex64::new(re, im));
                rs.push(Complex64::new(re, -im));
            } else {
                rs.push(Complex64::new(re, 0.0));
                rs.push(Complex64::new(re - im, 0.0));
            }
        }
        prop_assume!(rs.iter().all(|r| r.re.abs() > 1e-3));
        let p = Polynomial::from_roots(&rs);
        let v = stability_check(&p).unwrap();
        prop_assert_eq!(v.stable, routh_hurwitz(&p).unwrap().stable);
        prop_assert_eq!(v.stable, v.routh_stable);
    }

    #[test]
    fn full_motor_gain_matches_finite_difference(v in 10.0..200.0_f64) {
        let p = FullMotorParams::default();
        let h = 1e-4 * v;
        let fd = (p.steady_state_force(v + h).unwrap() - p.steady_state_force(v - h).unwrap()) / (2.0 * h);
        prop_assert!(close(p.small_signal_gain(v), fd, 1e-6));
    }
}

#[test]
fn rk4_is_fourth_order() {
    // x' = -x + 1, x(0) = 0 has x(t) = 1 - exp(-t).
    let err = |dt: f64| {
        let traj = integrate_fixed_step(|_, x, _, dx| dx[0] = -x[0] + 1.0, &[0.0], |_| 0.0, dt, 2.0).unwrap();
        (traj.last()[0] - (1.0 - (-2.0_f64).exp())).abs()
    };
    let ratio = err(0.1) / err(0.05);
    assert!((ratio - 16.0).abs() <= 0.2 * 16.0, "ratio {ratio}");
}

#[test]
fn state_space_step_matches_first_order_closed_form() {
    let g = RationalTransfer::new(Polynomial::constant(2.0), Polynomial::from_descending(&[1.0, 3.0])).unwrap();
    let y = StateSpaceModel::from_transfer(&g).unwrap().step_response(1e-3, 3.0).unwrap();
    for (k, yk) in y.iter().enumerate() {
        let t = k as f64 * 1e-3;
        assert!((yk - 2.0 / 3.0 * (1.0 - (-3.0 * t).exp())).abs() < 1e-9);
    }
}

#[test]
fn durand_kerner_oracle_sanity() {
    let p = Polynomial::from_descending(&[1.0, -6.0, 11.0, -6.0]);
    let mut z: Vec<f64> = durand_kerner(&p).iter().map(|r| r.re).collect();
    z.sort_by(f64::total_cmp);
    for (a, b) in z.iter().zip([1.0, 2.0, 3.0]) {
        assert!((a - b).abs() < 1e-10);
    }
}
