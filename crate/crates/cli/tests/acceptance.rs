//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line to stderr (written around the test harness's capture).
//!
//! Trained models are shared through `OnceLock` fixtures, so the first
//! criterion that needs one pays for training.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::process::Command;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use channelformer::channel::{
    realize_channel_with, standard_pdp, time_correlation, uniform_delay_correlation, ChannelSpec, DopplerDraw,
    DopplerSpec, Numerology, PowerDelayProfile,
};
use channelformer::estimators::bilinear_to_frame;
use channelformer::experiments::{
    denoising_gain, mse, run_dynamic_adaptation, simulate_link, DynamicReport, DynamicSpec, Estimator, GenieSource,
    LinkContext, LinkDraw, Stats,
};
use channelformer::model::{forward_graph, Mode, ModelConfig, ModelWeights};
use channelformer::nn::{attention, Graph, Tensor, Var};
use channelformer::ofdm::{
    apply_channel, build_slot, equalize_and_count_errors, ofdm_demodulate, ofdm_modulate, random_payload, FrameConfig,
    Grid, PilotPattern, SnrSpec,
};
use channelformer::pruning::{fine_tune, prune_by_magnitude, prune_without_finetune};
use channelformer::rng::{mix_seed, SimRng};
use channelformer::training::{generate_offline_dataset, train, DatasetSpec, Hyperparams, LabelDesign, OnlineLabeler};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};

// pinned tolerances and sizes
const GRAD_REL_TOL: f64 = 1e-4;
const LS_LAW_REL_TOL: f64 = 0.05;
const LS_LAW_REALIZATIONS: usize = 5000;
const CORR_RANGE: (f64, f64) = (0.94, 0.97);
const CORR_INTEGRAL_TOL: f64 = 1e-3;
const ORDERING_REALIZATIONS: usize = 1000;
const ORDERING_SE_MARGIN: f64 = 2.0;
const NEURAL_REALIZATIONS: usize = 1000;
const NEURAL_SE_MARGIN: f64 = 2.0;
const DG_RETAIN_DB: f64 = 1.0;
const DG_DEGRADE_DB: f64 = 1.0;
const DG_REALIZATIONS: usize = 1000;
const ADAPT_SEGMENT: usize = 2000;
const ADAPT_SETTLE: usize = 500;
const ADAPT_SE_MARGIN: f64 = 3.0;
const ADAPT_EQUAL_REL: f64 = 0.10;
const LABEL_REL_TOL: f64 = 0.10;
const LABEL_SLOTS: usize = 5000;
const BER_BITS: usize = 100_000;
const FFT_TOL: f64 = 1e-10;
const J0_TOL: f64 = 0.02;
const J0_REALIZATIONS: usize = 10_000;
const GENIE_MC: usize = 4000;

// desk-scale training
const ONLINE_SAMPLES: usize = 20_000;
const ONLINE_EPOCHS: usize = 20;
const OFFLINE_SAMPLES: usize = 12_000;
const OFFLINE_EPOCHS: usize = 20;
const OFFLINE_BATCH: usize = 32;
const PRUNE_RATIO: f64 = 0.7;
const NOFT_RATIO: f64 = 0.3;
const REACTIVATION_FACTOR: f64 = 10.0;

const SEED: u64 = 2024;

fn report(n: u32, title: &str, pass: bool, detail: &str, t: Duration) {
    let line = format!(
        "criterion {n:>2} [{}] {title}: {detail} ({:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        t.as_secs_f64()
    );
    let _ = writeln!(std::io::stderr(), "{line}");
    assert!(pass, "{line}");
}

fn frame() -> FrameConfig {
    FrameConfig::default()
}

fn etu_channel(max_doppler: f64) -> ChannelSpec {
    ChannelSpec::new(
        standard_pdp("ETU").unwrap(),
        DopplerDraw::Uniform {
            lo: 0.0,
            hi: max_doppler,
        },
    )
}

fn dataset_spec(mode: Mode, n: usize, seed: u64) -> DatasetSpec {
    DatasetSpec {
        mode,
        channel: etu_channel(97.0),
        snr_range_db: (5.0, 25.0),
        n_samples: n,
        val_fraction: 0.05,
        noise: true,
        seed,
    }
}

struct OnlineModels {
    full: ModelWeights<f64>,
    /// 70% pruned and fine-tuned
    pruned_ft: ModelWeights<f64>,
}

fn online_models() -> &'static OnlineModels {
    static M: OnceLock<OnlineModels> = OnceLock::new();
    M.get_or_init(|| {
        let t = Instant::now();
        let on_data = generate_offline_dataset(&dataset_spec(Mode::Online, ONLINE_SAMPLES, SEED)).unwrap();
        let mut full = ModelWeights::build(&ModelConfig::online(), SEED).unwrap();
        let hp = Hyperparams::online().with_epochs(ONLINE_EPOCHS);
        let rep = train(&mut full, &on_data, &hp, SEED, |_| {}).unwrap();
        let _ = writeln!(
            std::io::stderr(),
            "fixture: online model, {ONLINE_SAMPLES} samples x {ONLINE_EPOCHS} epochs, val loss {:.3e} -> {:.3e} ({:.0} s)",
            rep.initial_loss,
            rep.best_loss,
            t.elapsed().as_secs_f64()
        );

        let t = Instant::now();
        let mut pruned_ft = full.clone();
        prune_by_magnitude(&mut pruned_ft, PRUNE_RATIO).unwrap();
        let ft = fine_tune(&mut pruned_ft, &on_data, &Hyperparams::fine_tune(), REACTIVATION_FACTOR, SEED, |_| {})
            .unwrap();
        let _ = writeln!(
            std::io::stderr(),
            "fixture: 70% prune + fine-tune, {} of {} pruned entries reactivated ({:.0} s)",
            ft.reactivated.len(),
            ft.pruned_before,
            t.elapsed().as_secs_f64()
        );
        OnlineModels { full, pruned_ft }
    })
}

fn offline_model() -> &'static ModelWeights<f64> {
    static M: OnceLock<ModelWeights<f64>> = OnceLock::new();
    M.get_or_init(|| {
        let t = Instant::now();
        let off_data = generate_offline_dataset(&dataset_spec(Mode::Offline, OFFLINE_SAMPLES, SEED + 1)).unwrap();
        let mut offline = ModelWeights::build(&ModelConfig::offline(), SEED + 1).unwrap();
        let hp = Hyperparams { batch_size: OFFLINE_BATCH, ..Hyperparams::offline().with_epochs(OFFLINE_EPOCHS) };
        let rep = train(&mut offline, &off_data, &hp, SEED + 1, |_| {}).unwrap();
        let _ = writeln!(
            std::io::stderr(),
            "fixture: offline model, {OFFLINE_SAMPLES} samples x {OFFLINE_EPOCHS} epochs, val loss {:.3e} -> {:.3e} ({:.0} s)",
            rep.initial_loss,
            rep.best_loss,
            t.elapsed().as_secs_f64()
        );
        offline
    })
}

/// Paired per-realization metric differences for a set of estimators.
struct Paired {
    values: Vec<Vec<f64>>,
}

impl Paired {
    fn mean(&self, e: usize) -> Stats {
        self.values[e].iter().copied().collect()
    }

    /// statistics of `a - b` over shared realizations
    fn diff(&self, a: usize, b: usize) -> Stats {
        self.values[a].iter().zip(&self.values[b]).map(|(x, y)| x - y).collect()
    }
}

fn paired_mse(channel: &ChannelSpec, snr_db: f64, ests: &[Estimator], n: usize, seed: u64) -> Paired {
    let pattern = PilotPattern::single(&frame()).unwrap();
    let snr = SnrSpec::db(snr_db);
    let corr = GenieSource {
        n_mc: GENIE_MC,
        seed: mix_seed(SEED, 9),
        cache_dir: None,
    }
    .correlations(channel, 14)
    .unwrap();
    let ctx = LinkContext::new(&pattern, snr, Some(&corr), ests).unwrap();
    let mut values = vec![Vec::with_capacity(n); ests.len()];
    for r in 0..n {
        let d = simulate_link(channel, &pattern, snr, mix_seed(seed, r as u64)).unwrap();
        for (e, v) in ests.iter().zip(&mut values) {
            v.push(mse(&ctx.estimate(e, &d).unwrap(), &d.h).unwrap());
        }
    }
    Paired { values }
}

#[test]
fn c01_parameter_counts() {
    let t = Instant::now();
    let off = ModelWeights::<f64>::build(&ModelConfig::offline(), 1).unwrap();
    let on = ModelWeights::<f64>::build(&ModelConfig::online(), 1).unwrap();
    let got = [
        off.count_parameters(),
        on.count_parameters(),
        off.count_region("enc."),
        on.count_region("enc."),
        off.count_region("dec."),
        on.count_region("dec."),
    ];
    let want = [117_659, 32_069, 21_358, 21_358, 96_301, 10_711];
    let el = t.elapsed();
    report(
        1,
        "parameter counts",
        got == want && el < Duration::from_secs(1),
        &format!(
            "offline {} / online {}, enc {}, dec {} / {}",
            got[0], got[1], got[2], got[4], got[5]
        ),
        el,
    );
}

fn rel_err(a: f64, n: f64) -> f64 {
    let scale = a.abs().max(n.abs());
    if scale < 1e-7 {
        (a - n).abs() / 1e-7
    } else {
        (a - n).abs() / scale
    }
}

fn random_tensor(shape: &[usize], scale: f64, r: &mut SimRng) -> Tensor<f64> {
    let n = shape.iter().product();
    Tensor::new(shape, (0..n).map(|_| r.random_range(-scale..scale)).collect()).unwrap()
}

/// Worst central-difference error over every entry of every input; a step
/// that straddles a ReLU/Huber kink is retried with a smaller one.
fn layer_grad_check<F>(inputs: &[Tensor<f64>], f: F) -> f64
where
    F: for<'a> Fn(&mut Graph<'a, f64>, &[Var]) -> Var,
{
    let eval = |ts: &[Tensor<f64>]| {
        let mut g = Graph::new();
        let v: Vec<Var> = ts.iter().map(|t| g.param(t)).collect();
        let out = f(&mut g, &v);
        g.scalar(out)
    };
    let tracked: Vec<Tensor<f64>> = inputs.iter().cloned().map(|t| t.with_grad()).collect();
    let analytic: Vec<Vec<f64>> = {
        let mut g = Graph::new();
        let v: Vec<Var> = tracked.iter().map(|t| g.param(t)).collect();
        let out = f(&mut g, &v);
        let gr = g.backward(out).unwrap();
        v.iter()
            .zip(&tracked)
            .map(|(v, t)| gr.get_or_zero(*v, t.len()))
            .collect()
    };
    let mut work = inputs.to_vec();
    let mut worst = 0.0_f64;
    for ti in 0..inputs.len() {
        for j in 0..inputs[ti].len() {
            let mut numeric = |h: f64| {
                let orig = work[ti].data()[j];
                work[ti].data_mut()[j] = orig + h;
                let up = eval(&work);
                work[ti].data_mut()[j] = orig - h;
                let down = eval(&work);
                work[ti].data_mut()[j] = orig;
                (up - down) / (2.0 * h)
            };
            let mut e = rel_err(analytic[ti][j], numeric(1e-5));
            if e >= GRAD_REL_TOL {
                e = e.min(rel_err(analytic[ti][j], numeric(1e-6)));
            }
            worst = worst.max(e);
        }
    }
    worst
}

fn model_loss(w: &ModelWeights<f64>, x: &Tensor<f64>, y: &Tensor<f64>) -> f64 {
    let mut g = Graph::new();
    let (xv, yv) = (g.param(x), g.param(y));
    let f = forward_graph(&mut g, w, xv, false).unwrap();
    let l = g.huber_loss(f.output, yv, 1.0).unwrap();
    g.scalar(l)
}

fn model_grad_check(cfg: ModelConfig, per_tensor: usize, r: &mut SimRng) -> f64 {
    let mut w = ModelWeights::<f64>::build(&cfg, 11).unwrap();
    w.jitter(0.05, r);
    let x = random_tensor(&[cfg.input_rows(), 2], 1.0, r);
    let y = random_tensor(&[cfg.out_rows(), 2], 1.5, r);
    let grads: Vec<Vec<f64>> = {
        let mut g = Graph::new();
        let (xv, yv) = (g.param(&x), g.param(&y));
        let f = forward_graph(&mut g, &w, xv, true).unwrap();
        let l = g.huber_loss(f.output, yv, 1.0).unwrap();
        let gr = g.backward(l).unwrap();
        f.params
            .iter()
            .zip(&w.params)
            .map(|(v, p)| gr.get_or_zero(*v, p.tensor.len()))
            .collect()
    };
    let mut worst = 0.0_f64;
    for i in 0..w.params.len() {
        let n = w.params[i].tensor.len();
        let stride = n.div_ceil(per_tensor).max(1);
        let offset = r.random_range(0..stride);
        for j in (offset..n).step_by(stride) {
            let mut numeric = |h: f64| {
                let orig = w.params[i].tensor.data()[j];
                w.params[i].tensor.data_mut()[j] = orig + h;
                let up = model_loss(&w, &x, &y);
                w.params[i].tensor.data_mut()[j] = orig - h;
                let down = model_loss(&w, &x, &y);
                w.params[i].tensor.data_mut()[j] = orig;
                (up - down) / (2.0 * h)
            };
            let mut e = rel_err(grads[i][j], numeric(1e-5));
            if e >= GRAD_REL_TOL {
                e = e.min(rel_err(grads[i][j], numeric(1e-6)));
            }
            worst = worst.max(e);
        }
    }
    worst
}

#[test]
fn c02_gradient_suite() {
    let t = Instant::now();
    let mut r = SimRng::seed_from_u64(21);
    let mut results: Vec<(&str, f64)> = Vec::new();

    let ins = [
        random_tensor(&[72, 2], 1.0, &mut r),
        random_tensor(&[20, 72], 0.2, &mut r),
        random_tensor(&[20], 0.2, &mut r),
    ];
    results.push((
        "fc",
        layer_grad_check(&ins, |g, v| {
            let y = g.fully_connected(v[0], v[1], v[2]).unwrap();
            g.sum(y)
        }),
    ));
    let ins = [
        random_tensor(&[12, 2, 2], 1.0, &mut r),
        random_tensor(&[5, 5, 2, 3], 0.3, &mut r),
        random_tensor(&[3], 0.2, &mut r),
        random_tensor(&[12, 2, 3], 1.0, &mut r),
    ];
    results.push((
        "conv2d",
        layer_grad_check(&ins, |g, v| {
            let y = g.conv2d(v[0], v[1], v[2]).unwrap();
            g.mse_loss(y, v[3]).unwrap()
        }),
    ));
    let ins = [
        random_tensor(&[72, 2], 2.0, &mut r),
        random_tensor(&[72], 1.0, &mut r),
        random_tensor(&[72], 1.0, &mut r),
        random_tensor(&[72, 2], 1.0, &mut r),
    ];
    results.push((
        "layer_norm",
        layer_grad_check(&ins, |g, v| {
            let y = g.layer_norm(v[0], v[1], v[2]).unwrap();
            g.mse_loss(y, v[3]).unwrap()
        }),
    ));
    let ins = [
        random_tensor(&[40, 3], 2.0, &mut r),
        random_tensor(&[40, 3], 1.0, &mut r),
    ];
    results.push((
        "gelu",
        layer_grad_check(&ins, |g, v| {
            let y = g.gelu(v[0]);
            g.mse_loss(y, v[1]).unwrap()
        }),
    ));
    results.push((
        "relu",
        layer_grad_check(&ins, |g, v| {
            let y = g.relu(v[0]);
            g.mse_loss(y, v[1]).unwrap()
        }),
    ));
    let ins = [random_tensor(&[6, 6], 2.0, &mut r), random_tensor(&[6, 6], 0.3, &mut r)];
    results.push((
        "softmax",
        layer_grad_check(&ins, |g, v| {
            let y = g.softmax_rows(v[0]).unwrap();
            g.mse_loss(y, v[1]).unwrap()
        }),
    ));
    let ins = [
        random_tensor(&[24, 2], 1.0, &mut r),
        random_tensor(&[8, 8], 0.3, &mut r),
        random_tensor(&[8], 0.1, &mut r),
        random_tensor(&[8, 2], 0.5, &mut r),
    ];
    results.push((
        "multi_head_attention",
        layer_grad_check(&ins, |g, v| {
            let out = attention::multi_head_attention(g, v[0], 1, v[1], v[2]).unwrap();
            g.huber_loss(out.output, v[3], 1.0).unwrap()
        }),
    ));
    let ins = [
        random_tensor(&[50, 2], 3.0, &mut r),
        random_tensor(&[50, 2], 0.5, &mut r),
    ];
    results.push((
        "huber",
        layer_grad_check(&ins, |g, v| g.huber_loss(v[0], v[1], 1.0).unwrap()),
    ));
    results.push(("mse", layer_grad_check(&ins, |g, v| g.mse_loss(v[0], v[1]).unwrap())));
    results.push(("online model", model_grad_check(ModelConfig::online(), 40, &mut r)));
    results.push(("offline model", model_grad_check(ModelConfig::offline(), 12, &mut r)));

    let worst = results.iter().fold(0.0_f64, |m, (_, e)| m.max(*e));
    let failing: Vec<&str> = results
        .iter()
        .filter(|(_, e)| *e >= GRAD_REL_TOL)
        .map(|(n, _)| *n)
        .collect();
    let el = t.elapsed();
    report(
        2,
        "finite-difference gradients",
        failing.is_empty() && el < Duration::from_secs(120),
        &format!(
            "{} checks, worst rel err {worst:.2e}, failing {failing:?}",
            results.len()
        ),
        el,
    );
}

fn pilot_truth(h: &Grid, p: &PilotPattern) -> Vec<Complex64> {
    p.feature_symbols()
        .flat_map(|s| s.subcarriers.iter().map(move |&k| h[(k, s.symbol)]))
        .collect()
}

#[test]
fn c03_ls_noise_law() {
    let t = Instant::now();
    let p = PilotPattern::single(&frame()).unwrap();
    let ch = etu_channel(97.0);
    let mut worst = 0.0_f64;
    let mut detail = Vec::new();
    for snr_db in [0.0, 10.0, 20.0] {
        let mut s = Stats::default();
        for r in 0..LS_LAW_REALIZATIONS {
            let d = simulate_link(&ch, &p, SnrSpec::db(snr_db), mix_seed(31, r as u64)).unwrap();
            let truth = pilot_truth(&d.h, &p);
            // ls.h columns follow the feature symbols, rows their comb subcarriers
            let est: Vec<Complex64> = (0..d.ls.h.ncols())
                .flat_map(|j| d.ls.h.column(j).iter().copied().collect::<Vec<_>>())
                .collect();
            for (a, b) in est.iter().zip(&truth) {
                s.push((a - b).norm_sqr());
            }
        }
        let expect = 10f64.powf(-snr_db / 10.0);
        let rel = (s.mean() / expect - 1.0).abs();
        worst = worst.max(rel);
        detail.push(format!("{snr_db} dB: {:.4e} vs {expect:.4e}", s.mean()));
    }
    let el = t.elapsed();
    report(
        3,
        "LS pilot MSE law",
        worst < LS_LAW_REL_TOL && el < Duration::from_secs(60),
        &format!("{}, worst rel dev {worst:.3}", detail.join("; ")),
        el,
    );
}

#[test]
fn c04_time_correlation_anchor() {
    let t = Instant::now();
    let mut ok = true;
    let mut f = 750.0;
    let (mut lo, mut hi) = (f64::MAX, f64::MIN);
    while f <= 972.0 {
        let r = time_correlation(f, 1);
        let rounded = (r * 100.0).round() / 100.0;
        ok &= rounded >= CORR_RANGE.0 && rounded <= CORR_RANGE.1;
        lo = lo.min(r);
        hi = hi.max(r);
        f += 1.0;
    }
    report(
        4,
        "time correlation at lag 1",
        ok,
        &format!("range [{lo:.4}, {hi:.4}] over 750..972 Hz"),
        t.elapsed(),
    );
}

#[test]
fn c05_uniform_delay_correlation() {
    let t = Instant::now();
    let (n_f, t_cp) = (72usize, 16.0);
    let r = uniform_delay_correlation(n_f, t_cp).unwrap();
    // exponential delay density with a very long rms spread, truncated to the CP;
    // the closed form is its tau_rms -> infinity limit
    let tau_rms = 1e4 * t_cp;
    let steps = 4000;
    let h = t_cp / steps as f64;
    let simpson = |f: &dyn Fn(f64) -> Complex64| {
        let mut s = f(0.0) + f(t_cp);
        for k in 1..steps {
            s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * (h / 3.0)
    };
    let norm = simpson(&|tau| Complex64::new((-tau / tau_rms).exp(), 0.0));
    let mut worst = 0.0_f64;
    let mut zeros_ok = true;
    for d in 0..n_f {
        let integral =
            simpson(&|tau| Complex64::from_polar((-tau / tau_rms).exp(), -2.0 * PI * d as f64 * tau / n_f as f64))
                / norm;
        for i in 0..n_f - d {
            worst = worst.max((r[(i + d, i)] - integral).norm());
            if d > 0 && d % 9 == 0 {
                zeros_ok &= r[(i + d, i)].norm() == 0.0 && r[(i, i + d)].norm() == 0.0;
            }
        }
    }
    let el = t.elapsed();
    report(
        5,
        "uniform delay correlation",
        worst < CORR_INTEGRAL_TOL && zeros_ok && el < Duration::from_secs(10),
        &format!("max entry error {worst:.2e}, exact zeros at multiples of 9: {zeros_ok}"),
        el,
    );
}

#[test]
fn c06_classical_estimator_ordering() {
    let t = Instant::now();
    let ests: Vec<Estimator> = ["mmse-2d", "mmse-1d", "ls"]
        .iter()
        .map(|n| Estimator::builtin(n).unwrap())
        .collect();
    let ch = etu_channel(97.0);
    let mut ok = true;
    let mut worst_z = f64::MAX;
    for (i, snr_db) in (-10..=30).step_by(5).enumerate() {
        let p = paired_mse(&ch, snr_db as f64, &ests, ORDERING_REALIZATIONS, mix_seed(61, i as u64));
        for (better, worse) in [(0, 1), (1, 2)] {
            let d = p.diff(worse, better);
            let z = d.mean() / d.std_err();
            worst_z = worst_z.min(z);
            ok &= z > ORDERING_SE_MARGIN;
        }
    }
    let el = t.elapsed();
    report(
        6,
        "2D MMSE <= 1D MMSE <= LS",
        ok && el < Duration::from_secs(20 * 60),
        &format!("9 SNR points x {ORDERING_REALIZATIONS}, smallest paired margin {worst_z:.1} SE"),
        el,
    );
}

#[test]
fn c07_neural_bounds() {
    let m = online_models();
    let t = Instant::now();
    let ch = etu_channel(97.0);
    let ests = vec![
        Estimator::builtin("mmse-1d").unwrap(),
        Estimator::builtin("ls").unwrap(),
        Estimator::network("online", m.full.clone()),
        Estimator::network("offline", offline_model().clone()),
    ];
    let mut online_ok = true;
    let mut offline_ok = true;
    let mut online_min_z = f64::MAX;
    let mut offline_detail = Vec::new();
    for (i, snr_db) in (-10..=30).step_by(5).enumerate() {
        let p = paired_mse(&ch, snr_db as f64, &ests, NEURAL_REALIZATIONS, mix_seed(71, i as u64));
        let d = p.diff(2, 0);
        let z = d.mean() / d.std_err();
        online_min_z = online_min_z.min(z);
        online_ok &= z >= -NEURAL_SE_MARGIN;
        if (5..=25).contains(&snr_db) {
            let (off, ls) = (p.mean(3).mean(), p.mean(1).mean());
            offline_ok &= off < ls;
            offline_detail.push(format!("{snr_db} dB {off:.2e}/{ls:.2e}"));
        }
    }
    let el = t.elapsed();
    report(
        7,
        "neural bounds",
        online_ok && offline_ok,
        &format!(
            "online - 1D MMSE min {online_min_z:.1} SE (need >= -{NEURAL_SE_MARGIN}); offline/LS {}",
            offline_detail.join(", ")
        ),
        el,
    );
}

/// Mean DG over `snrs` visited round-robin, paired across estimators.
fn mean_dg(ests: &[Estimator], snrs: &[f64], n: usize, seed: u64) -> Vec<Stats> {
    let pattern = PilotPattern::single(&frame()).unwrap();
    let ch = etu_channel(97.0);
    let ctxs: Vec<LinkContext> = snrs
        .iter()
        .map(|s| LinkContext::new(&pattern, SnrSpec::db(*s), None, &[]).unwrap())
        .collect();
    let mut out = vec![Stats::default(); ests.len()];
    for r in 0..n {
        let ctx = &ctxs[r % ctxs.len()];
        let d: LinkDraw = simulate_link(&ch, &pattern, ctx.snr, mix_seed(seed, r as u64)).unwrap();
        let ls = bilinear_to_frame(&d.ls, &pattern).unwrap();
        for (e, s) in ests.iter().zip(&mut out) {
            s.push(denoising_gain(&ls, &ctx.estimate(e, &d).unwrap(), &d.h).unwrap().db);
        }
    }
    out
}

#[test]
fn c08_pruning_retention() {
    let m = online_models();
    let t = Instant::now();
    let ests = [
        Estimator::network("full", m.full.clone()),
        Estimator::network("pruned70-ft", m.pruned_ft.clone()),
        Estimator::network("pruned30-noft", prune_without_finetune(&m.full, NOFT_RATIO).unwrap()),
    ];
    let band = mean_dg(&ests[..2], &[5.0, 10.0, 15.0, 20.0, 25.0], DG_REALIZATIONS, 81);
    let at10 = mean_dg(&[ests[0].clone(), ests[2].clone()], &[10.0], DG_REALIZATIONS, 82);
    let loss_ft = band[0].mean() - band[1].mean();
    let loss_noft = at10[0].mean() - at10[1].mean();
    let el = t.elapsed();
    report(
        8,
        "pruning retention",
        loss_ft < DG_RETAIN_DB && loss_noft > DG_DEGRADE_DB,
        &format!(
            "DG full {:.2} dB, 70%+ft {:.2} dB (loss {loss_ft:.2}); at 10 dB full {:.2}, 30% no-ft {:.2} (loss {loss_noft:.2})",
            band[0].mean(),
            band[1].mean(),
            at10[0].mean(),
            at10[1].mean()
        ),
        el,
    );
}

fn dynamic() -> &'static DynamicReport {
    static R: OnceLock<DynamicReport> = OnceLock::new();
    R.get_or_init(|| {
        let m = online_models();
        let mut spec = DynamicSpec::standard(ADAPT_SEGMENT, SEED + 3).unwrap();
        spec.settle = ADAPT_SETTLE;
        run_dynamic_adaptation(
            &[("full".into(), m.full.clone()), ("pruned".into(), m.pruned_ft.clone())],
            &spec,
        )
        .unwrap()
    })
}

#[test]
fn c09_online_adaptation() {
    let t = Instant::now();
    let rep = dynamic();
    let custom = rep.segment("CUSTOM").unwrap();
    let (a, f) = (custom.settled_adapt[0], custom.frozen[0]);
    let se = (a.std_err().powi(2) + f.std_err().powi(2)).sqrt();
    let margin = (f.mean() - a.mean()) / se;
    let eva = rep.segment("EVA").unwrap();
    let (ea, ef) = (eva.settled_adapt[0].mean(), eva.settled_frozen[0].mean());
    let eva_rel = (ea / ef - 1.0).abs();
    let mut extra = String::new();
    for s in &rep.segments {
        let _ = write!(
            extra,
            "; {} settled full {:.2e} pruned {:.2e} frozen {:.2e}",
            s.profile,
            s.settled_adapt[0].mean(),
            s.settled_adapt[1].mean(),
            s.frozen[0].mean()
        );
    }
    let _ = writeln!(std::io::stderr(), "dynamic harness{extra}");
    let el = t.elapsed();
    report(
        9,
        "online adaptation",
        margin >= ADAPT_SE_MARGIN && eva_rel < ADAPT_EQUAL_REL,
        &format!(
            "CUSTOM settled {:.3e} vs frozen {:.3e} ({margin:.1} SE); EVA adapting {ea:.3e} vs frozen {ef:.3e} ({:.1}%)",
            a.mean(),
            f.mean(),
            100.0 * eva_rel
        ),
        el,
    );
}

#[test]
fn c10_online_label_quality() {
    let t = Instant::now();
    let f = frame();
    let p = PilotPattern::double(&f, 5.0).unwrap();
    let ch = etu_channel(97.0);
    let num = Numerology::default();
    let labels: Vec<usize> = p.label_symbols().map(|s| s.symbol).collect();
    let run = |snr_db: f64, design: LabelDesign, seed: u64| -> f64 {
        let mut labeler = OnlineLabeler::new(design);
        let mut rng = SimRng::seed_from_u64(seed);
        let mut s = Stats::default();
        for _ in 0..LABEL_SLOTS {
            let real = ch.draw(14, &num, &mut rng).unwrap();
            let x = build_slot(&random_payload(&p, &mut rng), &p).unwrap();
            let y = apply_channel(&x, &real.h, SnrSpec::db(snr_db), &mut rng).unwrap();
            let est = labeler.label(&y.grid, &p, SnrSpec::db(snr_db)).unwrap();
            for (j, &l) in labels.iter().enumerate() {
                for k in 0..72 {
                    s.push((est[(k, j)] - real.h[(k, l)]).norm_sqr());
                }
            }
        }
        s.mean()
    };
    let mut ok = true;
    let mut detail = Vec::new();
    for snr_db in [0.0, 10.0, 20.0] {
        let got = run(snr_db, LabelDesign::PowerBoost, 100 + snr_db as u64);
        let want = 10f64.powf(-(snr_db + 5.0) / 10.0);
        ok &= (got / want - 1.0).abs() < LABEL_REL_TOL;
        detail.push(format!("{snr_db} dB {got:.3e}/{want:.3e}"));
    }
    let raw = run(10.0, LabelDesign::PowerBoost, 200);
    let mmse_label = run(10.0, LabelDesign::Mmse, 200);
    ok &= mmse_label < raw;
    let el = t.elapsed();
    report(
        10,
        "online label quality",
        ok && el < Duration::from_secs(300),
        &format!(
            "power-boost {}; MMSE {mmse_label:.3e} < raw {raw:.3e} at 10 dB",
            detail.join(", ")
        ),
        el,
    );
}

#[test]
fn c11_link_sanity() {
    let t = Instant::now();
    let f = frame();
    let p = PilotPattern::single(&f).unwrap();
    let mut rng = SimRng::seed_from_u64(111);
    let ch = etu_channel(97.0);
    let (mut errors, mut bits) = (0.0, 0usize);
    while bits < BER_BITS {
        let real = ch.draw(14, &f.numerology, &mut rng).unwrap();
        let payload = random_payload(&p, &mut rng);
        let x = build_slot(&payload, &p).unwrap();
        let y = apply_channel(&x, &real.h, SnrSpec::noiseless(), &mut rng).unwrap();
        let e = equalize_and_count_errors(&y.grid, &real.h, &payload, &p).unwrap();
        errors += e.errors;
        bits += e.bits;
    }

    let g = Grid::from_fn(72, 14, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let back = ofdm_demodulate(&ofdm_modulate(&g, &f).unwrap(), &f).unwrap();
    let fft_err = (&back - &g).iter().fold(0.0_f64, |m, v| m.max(v.norm()));

    let one = PowerDelayProfile::new("one", vec![0.0], vec![0.0]).unwrap();
    let f_d = 972.0;
    let (mut acc, mut pow) = (Complex64::new(0.0, 0.0), 0.0);
    for _ in 0..J0_REALIZATIONS {
        let r = realize_channel_with(&one, &DopplerSpec::new(f_d), 2, &f.numerology, &mut rng).unwrap();
        acc += r.taps[(0, 1)] * r.taps[(0, 0)].conj();
        pow += r.taps[(0, 0)].norm_sqr();
    }
    let emp = (acc / pow).re;
    let j0 = time_correlation(f_d, 1);
    let ok = errors == 0.0 && fft_err < FFT_TOL && (emp - j0).abs() < J0_TOL;
    report(
        11,
        "link sanity",
        ok,
        &format!(
            "BER {} over {bits} bits, FFT round-trip {fft_err:.1e}, lag-1 tap corr {emp:.4} vs J0 {j0:.4}",
            errors / bits as f64
        ),
        t.elapsed(),
    );
}

const CLI_CONFIG: &str = r#"
seed = 5

[dataset]
mode = "online"
profile = "ETU"
doppler_hz = [0.0, 97.0]
snr_db = [5.0, 25.0]
n_samples = 120

[train]
mode = "online"
epochs = 2
batch_size = 16

[prune]
weights = "run/model.cfw"
ratio = 0.7

[finetune]
weights = "run/pruned.cfw"
epochs = 1

[sweep]
kind = "mse_vs_snr"
axis = [0.0, 10.0, 20.0]
realizations = 8
estimators = ["ls", "mmse-1d", "mmse-2d", "dd-ce"]
network = [{ name = "online", weights = "run/model.cfw" }]
genie_realizations = 200

[online]
segment_realizations = 12
settle = 4
block = 4
model = [{ name = "full", weights = "run/model.cfw" }]

[probe]
weights = "run/model.cfw"
realizations = 3
"#;

fn run_cli(dir: &Path, args: &[&str]) {
    let out = Command::new(env!("CARGO_BIN_EXE_channelformer"))
        .current_dir(dir)
        .args(args)
        .args(["--config", "cfg.toml", "--out", "run", "--quiet"])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn cli_pipeline(dir: &Path) -> Vec<(String, Vec<u8>)> {
    std::fs::write(dir.join("cfg.toml"), CLI_CONFIG).unwrap();
    for cmd in [
        "gen-dataset",
        "train",
        "prune",
        "finetune",
        "eval-sweep",
        "online-sim",
        "probe-attention",
    ] {
        run_cli(dir, &[cmd]);
    }
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir.join("run"))
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn c12_cli_determinism() {
    let t = Instant::now();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let fa = cli_pipeline(a.path());
    let fb = cli_pipeline(b.path());
    let names: Vec<&str> = fa.iter().map(|(n, _)| n.as_str()).collect();
    let identical = fa == fb;
    let has_all = [
        "model.cfw",
        "pruned.cfw",
        "finetuned.cfw",
        "mse_vs_snr.csv",
        "dynamic_adaptation.csv",
        "attention_probe.csv",
    ]
    .iter()
    .all(|n| names.contains(n));
    report(
        12,
        "CLI determinism",
        identical && has_all,
        &format!("{} files byte-identical across two runs: {identical}", fa.len()),
        t.elapsed(),
    );
}
