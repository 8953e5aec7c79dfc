//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use asca::audio::FrameSpec;
use asca::features::{
    bin_frequencies, chroma, contrast_bands, mfcc, spectral_bandwidth, spectral_centroid,
    spectral_contrast, spectral_rolloff, stft_power, FeatureExtractor, MelFilterbank,
    PowerSpectrogram, N_MELS, N_MFCC,
};
use asca::filters::{butter_design, ButterworthSpec, SosFilter};
use asca::harness::{
    fit_and_evaluate, load_manifest, model_from_bytes, model_to_bytes, read_manifest,
    run_manifest_experiment, save_model, load_model, ExperimentAxis, ExperimentReport, ExperimentSpec,
};
use asca::models::cnn::CNN_CHANNELS;
use asca::models::lstm::{LSTM_DROPOUT, LSTM_UNITS};
use asca::models::mlp::{MLP_DROPOUT, MLP_HIDDEN};
use asca::models::{stratified_group_split, ClassifierKind, CnnModel, LstmModel, MlpModel, Network, TrainConfig, TrainedModel};
use asca::synth::{synth_dataset, synth_emission, MovementLabel, SynthSpec, WorkflowLabel, MIC_DISTANCES_CM};

const SR: u32 = 44_100;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// `|a - b| / max(|a|, |b|, floor)`
fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

fn max_rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let floor = (1e-8 * scale).max(1e-300);
    a.iter().zip(b).map(|(&x, &y)| rel(x, y, floor)).fold(0.0, f64::max)
}

fn movement_grid(f: impl Fn(SynthSpec) -> SynthSpec) -> Vec<SynthSpec> {
    MovementLabel::ALL.iter().map(|&m| f(SynthSpec::movement(m))).collect()
}

fn workflow_grid() -> Vec<SynthSpec> {
    WorkflowLabel::ALL.iter().map(|&w| SynthSpec::workflow(w)).collect()
}

// ---- naive DSP references ----

fn naive_power(frame: &[f64], fft: usize) -> Vec<f64> {
    let n = frame.len();
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos())
        .collect();
    (0..=fft / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, (&x, &w)) in frame.iter().zip(&window).enumerate() {
                let phase = -2.0 * std::f64::consts::PI * ((k * t) % fft) as f64 / fft as f64;
                re += x * w * phase.cos();
                im += x * w * phase.sin();
            }
            re * re + im * im
        })
        .collect()
}

fn mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

fn naive_mfcc(power: &[f64], freqs: &[f64]) -> Vec<f64> {
    let (lo, hi) = (mel(0.0), mel(SR as f64 / 2.0));
    let edge = |i: usize| lo + (hi - lo) * i as f64 / (N_MELS + 1) as f64;
    let mut log_e = Vec::with_capacity(N_MELS);
    for m in 0..N_MELS {
        let (l, c, r) = (edge(m), edge(m + 1), edge(m + 2));
        let mut e = 0.0;
        for (&p, &f) in power.iter().zip(freqs) {
            let x = mel(f);
            let w = if x > l && x <= c {
                (x - l) / (c - l)
            } else if x > c && x < r {
                (r - x) / (r - c)
            } else {
                0.0
            };
            e += w * p;
        }
        log_e.push((e + 1e-10).ln());
    }
    let n = N_MELS as f64;
    (0..N_MFCC)
        .map(|k| {
            let s = if k == 0 { (1.0 / n).sqrt() } else { (2.0 / n).sqrt() };
            s * log_e
                .iter()
                .enumerate()
                .map(|(i, &v)| v * (std::f64::consts::PI * k as f64 * (i as f64 + 0.5) / n).cos())
                .sum::<f64>()
        })
        .collect()
}

fn naive_centroid(p: &[f64], f: &[f64]) -> f64 {
    let t: f64 = p.iter().sum();
    let mut s = 0.0;
    for i in 0..p.len() {
        s += p[i] * f[i];
    }
    if t > 0.0 { s / t } else { 0.0 }
}

fn naive_bandwidth(p: &[f64], f: &[f64]) -> f64 {
    let t: f64 = p.iter().sum();
    if t <= 0.0 {
        return 0.0;
    }
    let c = naive_centroid(p, f);
    let mut s = 0.0;
    for i in 0..p.len() {
        s += p[i] * (f[i] - c).powi(2);
    }
    (s / t).sqrt()
}

fn naive_rolloff(p: &[f64], f: &[f64]) -> f64 {
    let t: f64 = p.iter().sum();
    (0..p.len())
        .find(|&m| p[..=m].iter().sum::<f64>() >= 0.85 * t)
        .map_or(0.0, |m| f[m])
}

fn naive_contrast(p: &[f64], f: &[f64]) -> Vec<f64> {
    let nyq = SR as f64 / 2.0;
    let edges = [0.0, 200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0, nyq];
    let db = |x: f64| 10.0 * (x + 1e-10).log10();
    (0..7)
        .map(|b| {
            let mut band: Vec<f64> = p
                .iter()
                .zip(f)
                .filter(|&(_, &hz)| hz >= edges[b] && (hz < edges[b + 1] || (b == 6 && hz <= nyq)))
                .map(|(&v, _)| v)
                .collect();
            if band.is_empty() {
                return 0.0;
            }
            band.sort_by(f64::total_cmp);
            let k = ((0.02 * band.len() as f64).round() as usize).clamp(1, band.len());
            let valley = band[..k].iter().sum::<f64>() / k as f64;
            let peak = band[band.len() - k..].iter().sum::<f64>() / k as f64;
            db(peak) - db(valley)
        })
        .collect()
}

fn naive_chroma(p: &[f64], f: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; 12];
    for (&v, &hz) in p.iter().zip(f) {
        if hz >= 20.0 {
            let midi = (12.0 * (hz / 440.0).log2()).round() as i64 + 69;
            out[midi.rem_euclid(12) as usize] += v;
        }
    }
    let max = out.iter().fold(0.0f64, |m, &v| m.max(v));
    if max > 0.0 {
        out.iter_mut().for_each(|v| *v /= max);
    }
    out
}

fn dsp_oracles() -> Outcome {
    let start = Instant::now();
    let spec = FrameSpec::default();
    let freqs: Vec<f64> = bin_frequencies(spec.fft_size, SR);
    let bank = MelFilterbank::<f64>::new(N_MELS, 0.0, SR as f64 / 2.0, spec.fft_size, SR).map_err(|e| e.to_string())?;
    let bands = contrast_bands(&freqs, SR);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 7];
    for _ in 0..100 {
        let amp = 10f64.powf(rng.random_range(-3.0..0.0));
        let tone = rng.random_range(50.0..15_000.0);
        let frame: Vec<f64> = (0..spec.win_length)
            .map(|i| {
                let t = i as f64 / SR as f64;
                amp * (0.5 * (2.0 * std::f64::consts::PI * tone * t).sin() + 0.5 * rng.random_range(-1.0..1.0))
            })
            .collect();
        let got: PowerSpectrogram = stft_power(&frame, SR, &spec).map_err(|e| e.to_string())?;
        let power = &got.power[0];
        let naive = naive_power(&frame, spec.fft_size);
        let cepstrum = mfcc(&got, &bank, N_MFCC).map_err(|e| e.to_string())?;
        let errs = [
            max_rel(power, &naive),
            max_rel(&cepstrum[0], &naive_mfcc(power, &freqs)),
            rel(spectral_centroid(power, &freqs), naive_centroid(power, &freqs), 1e-12),
            rel(spectral_bandwidth(power, &freqs), naive_bandwidth(power, &freqs), 1e-12),
            rel(spectral_rolloff(power, &freqs, 0.85), naive_rolloff(power, &freqs), 1e-12),
            max_rel(&spectral_contrast(power, &bands), &naive_contrast(power, &freqs)),
            max_rel(&chroma(power, &freqs), &naive_chroma(power, &freqs)),
        ];
        for (w, e) in worst.iter_mut().zip(errs) {
            *w = w.max(e);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let names = ["stft", "mfcc", "centroid", "bandwidth", "rolloff", "contrast", "chroma"];
    let tol = [1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-5, 1e-6];
    let ok = worst.iter().zip(tol).all(|(&w, t)| w < t) && secs < 30.0;
    let detail = names
        .iter()
        .zip(worst)
        .map(|(n, w)| format!("{n} {w:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    check(ok, format!("{detail}; {secs:.1} s"))
}

fn mfcc_scaling() -> Outcome {
    let clip = synth_emission(&SynthSpec::movement(MovementLabel::XY)).map_err(|e| e.to_string())?;
    let base: Vec<f64> = clip.samples[..SR as usize].iter().map(|&s| 0.1 * s).collect();
    let peak = base.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let loud: Vec<f64> = base.iter().map(|&s| 10.0 * s).collect();
    let fx = FeatureExtractor::<f64>::new(FrameSpec::default(), SR).map_err(|e| e.to_string())?;
    let a = fx.extract(&base).map_err(|e| e.to_string())?;
    let b = fx.extract(&loud).map_err(|e| e.to_string())?;
    let dc0 = b.mfcc()[0] - a.mfcc()[0];
    let drift = (1..N_MFCC).map(|k| (b.mfcc()[k] - a.mfcc()[k]).abs()).fold(0.0, f64::max);
    check(
        peak <= 0.1 && dc0.abs() > 1.0 && drift < 1e-3,
        format!("peak {peak:.3}, c0 shift {dc0:.3}, max |c1..c13 shift| {drift:.1e}"),
    )
}

fn butterworth() -> Outcome {
    let fc = 1000.0;
    let mut notes = Vec::new();
    let mut ok = true;
    for order in [2, 4, 6, 8] {
        let sos: SosFilter = butter_design(&ButterworthSpec { order, cutoff_hz: fc }, SR).map_err(|e| e.to_string())?;
        let dc = sos.response(0.0, SR).norm();
        let at_fc = sos.magnitude_db(fc, SR);
        ok &= (dc - 1.0).abs() <= 1e-9 && (at_fc + 3.01).abs() <= 0.05;
        if order == 4 {
            let w = |f: f64| (std::f64::consts::PI * f / SR as f64).tan();
            let omega = w(2.0 * fc) / w(fc);
            let analytic = -10.0 * (1.0 + omega.powi(8)).log10();
            let got = sos.magnitude_db(2.0 * fc, SR);
            ok &= (got - analytic).abs() <= 0.3;
            notes.push(format!("order 4: DC {dc:.12}, fc {at_fc:.3} dB, 2fc {got:.3} vs {analytic:.3} dB"));

            let mut rng = ChaCha8Rng::seed_from_u64(9);
            let x: Vec<f64> = (0..4096).map(|_| rng.random_range(-0.5..0.5)).collect();
            let y: Vec<f64> = (0..4096).map(|_| rng.random_range(-0.5..0.5)).collect();
            let (a, b) = (0.7, -1.3);
            let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
            let (fx, fy, fm) = (sos.filter(&x), sos.filter(&y), sos.filter(&mix));
            let lin = fm
                .iter()
                .zip(fx.iter().zip(&fy))
                .map(|(m, (p, q))| (m - (a * p + b * q)).abs())
                .fold(0.0, f64::max);
            ok &= lin <= 1e-9;
            notes.push(format!("linearity {lin:.1e}"));
        }
    }
    check(ok, notes.join(", "))
}

// ---- gradient checks ----

fn grad_error<N: Network<f64>>(net: &N, xs: &[&[f64]], ys: &[usize], indices: &[usize]) -> f64 {
    let step = 1e-5;
    let analytic = net.loss_grad(xs, ys, None).grad;
    let mut probe = net.clone();
    let mut worst = 0.0f64;
    for &i in indices {
        let orig = probe.params()[i];
        probe.params_mut()[i] = orig + step;
        let up = probe.loss_grad(xs, ys, None).loss;
        probe.params_mut()[i] = orig - step;
        let down = probe.loss_grad(xs, ys, None).loss;
        probe.params_mut()[i] = orig;
        let numeric = (up - down) / (2.0 * step);
        worst = worst.max(rel(analytic[i], numeric, 1e-7));
    }
    worst
}

fn gradient_checks() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let xs: Vec<Vec<f64>> = (0..5).map(|_| (0..27).map(|_| rng.random::<f64>()).collect()).collect();
    let refs: Vec<&[f64]> = xs.iter().map(Vec::as_slice).collect();
    let ys = [0, 3, 6, 2, 5];

    let mlp = MlpModel::<f64>::init(vec![27, MLP_HIDDEN[0], MLP_HIDDEN[1], 7], MLP_DROPOUT, 5);
    let all: Vec<usize> = (0..mlp.params().len()).collect();
    let e_mlp = grad_error(&mlp, &refs, &ys, &all);

    let cnn = CnnModel::<f64>::init(27, CNN_CHANNELS, 7, 5);
    let all: Vec<usize> = (0..cnn.params().len()).collect();
    let e_cnn = grad_error(&cnn, &refs, &ys, &all);

    // every bias plus a seeded sample of weights
    let lstm = LstmModel::<f64>::init(27, LSTM_UNITS, 7, LSTM_DROPOUT, 5);
    let n = lstm.params().len();
    let mut subset: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.05)).collect();
    subset.extend(n - 7..n);
    let e_lstm = grad_error(&lstm, &refs, &ys, &subset);

    let secs = start.elapsed().as_secs_f64();
    check(
        e_mlp < 1e-4 && e_cnn < 1e-4 && e_lstm < 1e-3 && secs < 120.0,
        format!(
            "mlp {e_mlp:.1e} ({} params), cnn {e_cnn:.1e} ({} params), lstm {e_lstm:.1e} ({} of {n} params); {secs:.1} s",
            mlp.params().len(),
            cnn.params().len(),
            subset.len()
        ),
    )
}

// ---- end to end ----

fn train_all(manifest: &Path, seed: u64) -> Result<Vec<(ClassifierKind, f64, TrainedModel)>, String> {
    let ds = load_manifest::<f64>(manifest).map_err(|e| e.to_string())?;
    let (train, val) = stratified_group_split(&ds, 0.2, seed).map_err(|e| e.to_string())?;
    let config = TrainConfig { seed, ..TrainConfig::default() };
    ClassifierKind::ALL
        .iter()
        .map(|&k| {
            let (model, report) = fit_and_evaluate(k, &train, &val, &config).map_err(|e| e.to_string())?;
            Ok((k, report.accuracy, model))
        })
        .collect()
}

fn end_to_end(models: &mut Vec<TrainedModel>) -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mv = dir.path().join("movement");
    let wf = dir.path().join("workflow");
    synth_dataset(&movement_grid(|s| s), 50, 11, &mv).map_err(|e| e.to_string())?;
    synth_dataset(&workflow_grid(), 50, 12, &wf).map_err(|e| e.to_string())?;
    let movement = train_all(&mv.join("manifest.csv"), 1)?;
    let workflow = train_all(&wf.join("manifest.csv"), 1)?;
    let ok = movement.iter().all(|r| r.1 >= 0.90) && workflow.iter().all(|r| r.1 >= 0.85);
    let fmt = |rs: &[(ClassifierKind, f64, TrainedModel)]| {
        rs.iter().map(|(k, a, _)| format!("{k} {:.1}%", 100.0 * a)).collect::<Vec<_>>().join(" ")
    };
    let detail = format!(
        "movement: {}; workflow: {}; {:.0} s",
        fmt(&movement),
        fmt(&workflow),
        start.elapsed().as_secs_f64()
    );
    models.extend(movement.into_iter().map(|r| r.2));
    check(ok, detail)
}

/// 7 movements at mic 30 and 100 cm with noise raised to -30 dBFS.
fn noisy_set(dir: &Path) -> Result<std::path::PathBuf, String> {
    let mut grid = Vec::new();
    for mic in [MIC_DISTANCES_CM[0], MIC_DISTANCES_CM[2]] {
        grid.extend(movement_grid(|s| SynthSpec { mic_distance_cm: mic, noise_db: -30.0, ..s }));
    }
    synth_dataset(&grid, 20, 21, dir).map_err(|e| e.to_string())?;
    Ok(dir.join("manifest.csv"))
}

fn accuracy(reports: &[ExperimentReport], value: &str, kind: ClassifierKind) -> f64 {
    reports
        .iter()
        .find(|r| r.axis_value == value && r.classifier == kind)
        .map_or(f64::NAN, |r| r.report.accuracy)
}

fn mic_trend(manifest: &Path) -> Outcome {
    let reports = run_manifest_experiment::<f64>(&ExperimentSpec::new(ExperimentAxis::MicDistance, 3), manifest)
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut notes = Vec::new();
    for k in ClassifierKind::ALL {
        let (near, far) = (accuracy(&reports, "30", k), accuracy(&reports, "100", k));
        ok &= far <= near + 0.05;
        notes.push(format!("{k} 30cm {:.1}% / 100cm {:.1}%", 100.0 * near, 100.0 * far));
    }
    check(ok, notes.join(", "))
}

fn filter_ordering(manifest: &Path) -> Outcome {
    let reports = run_manifest_experiment::<f64>(&ExperimentSpec::new(ExperimentAxis::Filter, 3), manifest)
        .map_err(|e| e.to_string())?;
    let mean = |mode: &str| {
        ClassifierKind::ALL.iter().map(|&k| accuracy(&reports, mode, k)).sum::<f64>() / 4.0
    };
    let per = ClassifierKind::ALL
        .iter()
        .map(|&k| {
            format!(
                "{k} {:.1}/{:.1}/{:.1}",
                100.0 * accuracy(&reports, "none", k),
                100.0 * accuracy(&reports, "amplitude", k),
                100.0 * accuracy(&reports, "lowpass", k)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    let (amp, low) = (mean("amplitude"), mean("lowpass"));
    check(
        amp >= low,
        format!("mean amplitude {:.2}% vs lowpass {:.2}% (none/amplitude/lowpass: {per})", 100.0 * amp, 100.0 * low),
    )
}

// ---- CLI ----

fn asca(args: &[&str]) -> Result<std::process::Output, String> {
    Command::new(env!("CARGO_BIN_EXE_asca"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())
}

fn asca_ok(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = asca(args)?;
    if !out.status.success() {
        return Err(format!("asca {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    asca_ok(&["synth", "--out", &p("data"), "--clips", "6", "--seed", "4"])?;
    let manifest = p("data/manifest.csv");
    let mut notes = Vec::new();
    let mut ok = true;
    for kind in ["svm", "dnn", "rnn", "cnn"] {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let model = p(&format!("{kind}{run}.asca"));
            asca_ok(&["train", "--manifest", &manifest, "--classifier", kind, "--out", &model, "--seed", "8", "--epochs", "5"])?;
            outputs.push(asca_ok(&["eval", "--model", &model, "--manifest", &manifest])?);
        }
        let same = outputs[0] == outputs[1] && !outputs[0].is_empty();
        ok &= same;
        notes.push(format!("{kind} {}", if same { "identical" } else { "differs" }));
    }
    check(ok, notes.join(", "))
}

fn verdicts() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let p = |s: &str| dir.path().join(s).to_string_lossy().into_owned();
    asca_ok(&["synth", "--out", &p("train"), "--clips", "20", "--seed", "5"])?;
    asca_ok(&["synth", "--out", &p("held"), "--clips", "15", "--seed", "6"])?;
    let model = p("svm.asca");
    asca_ok(&["train", "--manifest", &p("train/manifest.csv"), "--classifier", "svm", "--out", &model])?;
    let rows = read_manifest(p("held/manifest.csv")).map_err(|e| e.to_string())?;
    let (mut hit, mut reject) = (0, 0);
    let n = 100;
    for row in rows.iter().take(n) {
        let wav = p(&format!("held/{}", row.path));
        let truth = MovementLabel::NAMES.iter().position(|&l| l == row.label).ok_or("bad label")?;
        let wrong = MovementLabel::NAMES[(truth + 1) % MovementLabel::NAMES.len()];
        hit += (asca(&["verify", &wav, "--model", &model, "--expected", &row.label])?.status.code() == Some(0)) as usize;
        reject += (asca(&["verify", &wav, "--model", &model, "--expected", wrong])?.status.code() == Some(3)) as usize;
    }
    check(
        rows.len() >= n && hit * 100 >= 95 * n && reject * 100 >= 95 * n,
        format!("matching -> exit 0: {hit}/{n}, mismatched -> exit 3: {reject}/{n}"),
    )
}

fn persistence(models: &[TrainedModel]) -> Outcome {
    if models.len() != ClassifierKind::ALL.len() {
        return Err("no trained models available".into());
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let clip = synth_emission(&SynthSpec::movement(MovementLabel::Z)).map_err(|e| e.to_string())?;
    let fx = FeatureExtractor::<f64>::new(FrameSpec::default(), SR).map_err(|e| e.to_string())?;
    let probes: Vec<Vec<f64>> = clip
        .samples
        .chunks_exact(SR as usize)
        .map(|c| fx.extract(c).map(|v| v.as_slice().to_vec()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut notes = Vec::new();
    let mut ok = true;
    for m in models {
        let bytes = model_to_bytes(m);
        let path = dir.path().join(format!("{}.asca", m.kind()));
        save_model(m, &path).map_err(|e| e.to_string())?;
        let back: TrainedModel = load_model(&path).map_err(|e| e.to_string())?;
        let again: TrainedModel = model_from_bytes(&bytes).map_err(|e| e.to_string())?;
        let bits = |x: &[f64]| x.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        let same_preds = probes.iter().all(|x| {
            let a = m.predict(x).unwrap();
            bits(&a) == bits(&back.predict(x).unwrap()) && bits(&a) == bits(&again.predict(x).unwrap())
        });
        let same = back == *m && again == *m && model_to_bytes(&back) == bytes && same_preds;
        ok &= same;
        notes.push(format!("{} {} ({} bytes)", m.kind(), if same { "exact" } else { "differs" }, bytes.len()));
    }
    check(ok, notes.join(", "))
}

fn run(name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into()))
    });
    let (tag, detail) = match &outcome {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    println!("{tag} {name}: {detail}");
    outcome.is_ok()
}

fn main() {
    let mut models = Vec::new();
    let noisy = tempfile::tempdir().expect("tempdir");
    let mut noisy_manifest = None;
    let results = [
        run("dsp oracle equivalence", dsp_oracles),
        run("mfcc scaling", mfcc_scaling),
        run("butterworth response", butterworth),
        run("gradient checks", gradient_checks),
        run("synthetic end to end", || end_to_end(&mut models)),
        run("mic distance trend", || {
            let m = noisy_set(noisy.path())?;
            noisy_manifest = Some(m.clone());
            mic_trend(&m)
        }),
        run("filter ordering", || match &noisy_manifest {
            Some(m) => filter_ordering(m),
            None => Err("noisy set unavailable".into()),
        }),
        run("cli determinism", cli_determinism),
        run("verification verdicts", verdicts),
        run("persistence round trip", || persistence(&models)),
    ];
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
