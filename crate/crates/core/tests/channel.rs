use std::f64::consts::PI;

use channelformer::channel::{
    bessel_j0, realize_channel, realize_channel_with, standard_pdp, time_correlation, uniform_delay_correlation,
    ChannelRealization, DopplerSpec, Numerology, PowerDelayProfile,
};
use channelformer::rng::SimRng;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;

/// Power series of J0, evaluated with enough terms for |x| <= 10.
fn j0_series(x: f64) -> f64 {
    let q = -(x * x) / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..80 {
        term *= q / (k as f64 * k as f64);
        sum += term;
    }
    sum
}

// TS 36.101 Annex B tapped delay lines, transcribed independently of the library tables.
const FIXTURE: &[(&str, &[f64], &[f64])] = &[
    (
        "EPA",
        &[0., 30., 70., 90., 110., 190., 410.],
        &[0.0, -1.0, -2.0, -3.0, -8.0, -17.2, -20.8],
    ),
    (
        "EVA",
        &[0., 30., 150., 310., 370., 710., 1090., 1730., 2510.],
        &[0.0, -1.5, -1.4, -3.6, -0.6, -9.1, -7.0, -12.0, -16.9],
    ),
    (
        "ETU",
        &[0., 50., 120., 200., 230., 500., 1600., 2300., 5000.],
        &[-1.0, -1.0, -1.0, 0.0, 0.0, 0.0, -3.0, -5.0, -7.0],
    ),
];

#[test]
fn standard_profiles_match_fixture() {
    for (name, d, g) in FIXTURE {
        let p = standard_pdp(name).unwrap();
        assert_eq!(p.delays_ns(), *d);
        assert_eq!(p.gains_db(), *g);
    }
    assert_eq!(standard_pdp("ETU").unwrap().n_paths(), 9);
    assert_eq!(standard_pdp("ETU").unwrap().max_delay_ns(), 5000.0);
    let epa = standard_pdp("EPA").unwrap();
    assert_eq!(epa.n_paths(), 7);
    assert!(epa.delays_ns().iter().all(|d| *d <= 410.0));
    let custom = standard_pdp("CUSTOM").unwrap();
    assert_eq!(
        custom.delays_ns(),
        &[0., 30., 200., 300., 500., 1500., 2500., 5000., 7000., 9000.]
    );
    assert_eq!(custom.gains_db(), &[-1., 0., 0., -1., -2., -1., -1., -1.5, -3., -5.]);
}

#[test]
fn j0_matches_series() {
    for i in 0..=200 {
        let x = i as f64 * 0.05;
        assert!((bessel_j0(x) - j0_series(x)).abs() < 2e-7, "x={x}");
    }
}

#[test]
fn time_correlation_values() {
    assert_eq!(time_correlation(97.0, 0), 1.0);
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    for f in [750.0, 800.0, 850.0, 900.0, 972.0] {
        let r = round2(time_correlation(f, 1));
        assert!((0.94..=0.97).contains(&r), "f={f} r={r}");
    }
    let x = 2.0 * PI * 97.0 * 88.0 / 1.08e6 * 12.0;
    assert!((x - 0.5958).abs() < 5e-4);
    assert!((time_correlation(97.0, 12) - j0_series(x)).abs() < 1e-7);
    assert!((j0_series(x) - 0.913_17).abs() < 1e-5);
}

#[test]
fn zero_doppler_constant_taps() {
    let pdp = standard_pdp("EVA").unwrap();
    let r = realize_channel(&pdp, &DopplerSpec::new(0.0), 14, 8).unwrap();
    for l in 1..14 {
        assert_eq!(r.taps.column(l), r.taps.column(0));
        assert_eq!(r.h.column(l), r.h.column(0));
    }
}

#[test]
fn single_path_is_flat() {
    let pdp = PowerDelayProfile::new("flat", vec![0.0], vec![0.0]).unwrap();
    let r = realize_channel(&pdp, &DopplerSpec::new(50.0), 14, 2).unwrap();
    for l in 0..14 {
        for k in 1..72 {
            assert_eq!(r.h[(k, l)].norm(), r.h[(0, l)].norm());
        }
    }
}

#[test]
fn h_rebuilt_from_taps_bit_for_bit() {
    let pdp = standard_pdp("CUSTOM").unwrap();
    let r = realize_channel(&pdp, &DopplerSpec::new(300.0), 14, 77).unwrap();
    for k in 0..72 {
        for l in 0..14 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (m, ns) in pdp.delays_ns().iter().enumerate() {
                let d = ns * 1e-9 * 1.08e6;
                let th = -2.0 * PI * k as f64 * d / 72.0;
                acc += r.taps[(m, l)] * Complex64::new(th.cos(), th.sin());
            }
            assert_eq!(acc, r.h[(k, l)]);
        }
    }
}

#[test]
fn seed_determinism() {
    let pdp = standard_pdp("ETU").unwrap();
    let a = realize_channel(&pdp, &DopplerSpec::new(97.0), 14, 5).unwrap();
    let b = realize_channel(&pdp, &DopplerSpec::new(97.0), 14, 5).unwrap();
    let c = realize_channel(&pdp, &DopplerSpec::new(97.0), 14, 6).unwrap();
    assert_eq!(a.h, b.h);
    assert_ne!(a.h, c.h);
}

struct Moments {
    power: Vec<f64>,
    re_mean: Vec<f64>,
    im_mean: Vec<f64>,
    re_var: Vec<f64>,
    im_var: Vec<f64>,
}

fn tap_moments(pdp: &PowerDelayProfile, f: f64, n: usize) -> Moments {
    let m = pdp.n_paths();
    let mut rng = SimRng::seed_from_u64(123);
    let num = Numerology::default();
    let mut mo = Moments {
        power: vec![0.0; m],
        re_mean: vec![0.0; m],
        im_mean: vec![0.0; m],
        re_var: vec![0.0; m],
        im_var: vec![0.0; m],
    };
    for _ in 0..n {
        let r = realize_channel_with(pdp, &DopplerSpec::new(f), 1, &num, &mut rng).unwrap();
        for p in 0..m {
            let a = r.taps[(p, 0)];
            mo.power[p] += a.norm_sqr();
            mo.re_mean[p] += a.re;
            mo.im_mean[p] += a.im;
            mo.re_var[p] += a.re * a.re;
            mo.im_var[p] += a.im * a.im;
        }
    }
    for v in [
        &mut mo.power,
        &mut mo.re_mean,
        &mut mo.im_mean,
        &mut mo.re_var,
        &mut mo.im_var,
    ] {
        v.iter_mut().for_each(|x| *x /= n as f64);
    }
    mo
}

#[test]
fn rayleigh_marginals() {
    let pdp = standard_pdp("EVA").unwrap();
    let g = pdp.linear_gains();
    let mo = tap_moments(&pdp, 97.0, 20_000);
    for p in 0..pdp.n_paths() {
        assert!(
            (mo.power[p] / g[p] - 1.0).abs() < 0.03,
            "path {p}: {} vs {}",
            mo.power[p],
            g[p]
        );
        let sd = (g[p] / 2.0).sqrt();
        assert!(mo.re_mean[p].abs() < 0.03 * sd * 4.0);
        assert!(mo.im_mean[p].abs() < 0.03 * sd * 4.0);
        assert!((mo.re_var[p] / mo.im_var[p] - 1.0).abs() < 0.06);
    }
}

fn empirical_lag_corr(f: f64, lag: usize, n: usize) -> f64 {
    let pdp = PowerDelayProfile::new("one", vec![0.0], vec![0.0]).unwrap();
    let mut rng = SimRng::seed_from_u64(7);
    let num = Numerology::default();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut pow = 0.0;
    for _ in 0..n {
        let r = realize_channel_with(&pdp, &DopplerSpec::new(f), lag + 1, &num, &mut rng).unwrap();
        let a0 = r.taps[(0, 0)];
        let a1 = r.taps[(0, lag)];
        acc += a1 * a0.conj();
        pow += a0.norm_sqr();
    }
    (acc / pow).re
}

#[test]
fn empirical_autocorrelation_follows_j0() {
    for (f, lag) in [(97.0, 1), (972.0, 1), (500.0, 4), (97.0, 13)] {
        let emp = empirical_lag_corr(f, lag, 10_000);
        let th = time_correlation(f, lag as i64);
        assert!((emp - th).abs() < 0.02, "f={f} lag={lag}: {emp} vs {th}");
    }
}

#[test]
fn column_power_is_unit_on_average() {
    let pdp = standard_pdp("ETU").unwrap();
    let num = Numerology::default();
    let mut rng = SimRng::seed_from_u64(9);
    let n = 4000;
    let mut p = 0.0;
    for _ in 0..n {
        let r = realize_channel_with(&pdp, &DopplerSpec::new(200.0), 2, &num, &mut rng).unwrap();
        p += r.h.column(1).norm_squared() / 72.0;
    }
    assert!((p / n as f64 - 1.0).abs() < 0.03);
}

#[test]
fn uniform_correlation_structure() {
    let r = uniform_delay_correlation(72, 16.0).unwrap();
    for i in 0..72 {
        assert_eq!(r[(i, i)], Complex64::new(1.0, 0.0));
        for j in 0..72 {
            assert!((r[(i, j)] - r[(j, i)].conj()).norm() < 1e-15);
            let d = i as i64 - j as i64;
            if d != 0 && d % 9 == 0 {
                assert_eq!(r[(i, j)].norm(), 0.0);
            }
        }
    }
    assert_eq!(r[(1, 10)].norm(), 0.0);
    let eig = r.clone().symmetric_eigen();
    let rho = eig.eigenvalues.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    assert!(rho <= 72.0 + 1e-9);
}

#[test]
fn uniform_correlation_matches_numeric_integral() {
    // r(delta) = (1/T) * integral_0^T exp(-i 2 pi delta tau / N) d tau, Simpson's rule
    let r = uniform_delay_correlation(72, 16.0).unwrap();
    let steps = 2000;
    for d in 1..40usize {
        let h = 16.0 / steps as f64;
        let f = |tau: f64| Complex64::from_polar(1.0, -2.0 * PI * d as f64 * tau / 72.0);
        let mut s = f(0.0) + f(16.0);
        for k in 1..steps {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            s += f(k as f64 * h) * w;
        }
        let integral = s * (h / 3.0) / 16.0;
        assert!((r[(d, 0)] - integral).norm() < 1e-9, "d={d}");
        let x = PI * 16.0 * d as f64 / 72.0;
        assert!((r[(d, 0)].norm() - (x.sin() / x).abs()).abs() < 1e-12);
    }
}

#[test]
fn realization_records_metadata() {
    let pdp = standard_pdp("EPA").unwrap();
    let r: ChannelRealization = realize_channel(&pdp, &DopplerSpec::new(12.5), 3, 1).unwrap();
    assert_eq!(r.profile, "EPA");
    assert_eq!(r.f_d_hz, 12.5);
    assert_eq!(r.h.shape(), (72, 3));
    assert_eq!(r.taps.shape(), (7, 3));
}

proptest! {
    #[test]
    fn correlation_hermitian_any_size(n in 2usize..40, cp in 1.0f64..30.0) {
        let r = uniform_delay_correlation(n, cp).unwrap();
        for i in 0..n {
            prop_assert_eq!(r[(i, i)], Complex64::new(1.0, 0.0));
            for j in 0..n {
                prop_assert!((r[(i, j)] - r[(j, i)].conj()).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn realization_deterministic(seed in any::<u64>(), f in 0.0f64..1000.0) {
        let pdp = standard_pdp("CUSTOM").unwrap();
        let a = realize_channel(&pdp, &DopplerSpec::new(f), 14, seed).unwrap();
        let b = realize_channel(&pdp, &DopplerSpec::new(f), 14, seed).unwrap();
        prop_assert_eq!(a.h, b.h);
    }
}
