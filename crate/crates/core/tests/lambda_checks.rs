use std::f64::consts::{PI, SQRT_2};

use qflq::lambda::{
    omega_eff, p12_effective, periodic_reference, run_experiment, two_tone_fast, two_tone_reference,
    LambdaExperiment, CURVE_HEADER,
};
use qflq::propagator::TimeGrid;

/// Hann-windowed discrete transform magnitude of the residual at each
/// angular frequency in `freqs`.
fn residual_spectrum(times: &[f64], residual: &[f64], freqs: &[f64]) -> Vec<f64> {
    let n = times.len();
    let span = times[n - 1] - times[0];
    let mean = residual.iter().sum::<f64>() / n as f64;
    freqs
        .iter()
        .map(|w| {
            let (mut re, mut im) = (0.0, 0.0);
            for (t, r) in times.iter().zip(residual) {
                let win = 0.5 - 0.5 * (2.0 * PI * (t - times[0]) / span).cos();
                re += win * (r - mean) * (w * t).cos();
                im += win * (r - mean) * (w * t).sin();
            }
            re.hypot(im)
        })
        .collect()
}

fn residual(exp: &LambdaExperiment) -> (Vec<f64>, Vec<f64>) {
    let table = run_experiment(exp).unwrap();
    let t = table.column("t").unwrap();
    let exact = table.column("P12_exact").unwrap();
    let eff = table.column("P12_eff").unwrap();
    (t, exact.iter().zip(&eff).map(|(a, b)| a - b).collect())
}

/// Local maxima of the spectrum that carry at least `fraction` of its peak.
fn lines(freqs: &[f64], spec: &[f64], fraction: f64) -> Vec<f64> {
    let top = spec.iter().cloned().fold(0.0, f64::max);
    (1..spec.len() - 1)
        .filter(|&k| spec[k] > spec[k - 1] && spec[k] >= spec[k + 1] && spec[k] >= fraction * top)
        .map(|k| freqs[k])
        .collect()
}

fn band() -> Vec<f64> {
    (0..=1000).map(|k| 0.5 + 2.5 * k as f64 / 1000.0).collect()
}

#[test]
fn periodic_residual_oscillates_at_drive_harmonics() {
    let exp = LambdaExperiment::new(periodic_reference(), TimeGrid::new(0.0, 300.0, 3000).unwrap());
    let (t, r) = residual(&exp);
    let freqs = band();
    let spec = residual_spectrum(&t, &r, &freqs);
    let found = lines(&freqs, &spec, 0.2);
    let dominant = freqs[spec.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0];
    assert!((dominant - dominant.round()).abs() <= 0.05 * dominant.round(), "dominant line at {dominant}");
    // The slow transfer modulates the fast fluctuations, which splits each
    // line into sidebands up to 4Ω_eff away, broadened by the window.
    let rate = omega_eff(&exp.drive).unwrap();
    let spread = 4.0 * rate + 2.0 * (2.0 * PI / 300.0);
    for w in &found {
        let k = w.round();
        assert!(k >= 1.0 && (w - k).abs() <= spread, "line at {w} is not near a multiple of ω₁ ({found:?})");
    }
}

#[test]
fn two_tone_residual_shows_both_tones() {
    let exp = LambdaExperiment::new(two_tone_reference(), TimeGrid::new(0.0, 300.0, 3000).unwrap());
    let (t, r) = residual(&exp);
    let freqs = band();
    let spec = residual_spectrum(&t, &r, &freqs);
    let found = lines(&freqs, &spec, 0.1);
    for target in [1.0, SQRT_2] {
        assert!(
            found.iter().any(|w| (w - target).abs() <= 0.05 * target),
            "no line near {target} in {found:?}"
        );
    }
}

fn max_deviation_over_effective_period(exp_drive: qflq::lambda::DriveSpec) -> f64 {
    let rate = omega_eff(&exp_drive).unwrap();
    let grid = TimeGrid::new(0.0, PI / rate, 1000).unwrap();
    let (_, r) = residual(&LambdaExperiment::new(exp_drive, grid));
    r.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

#[test]
fn weaker_drive_tracks_effective_curve_better() {
    let strong = max_deviation_over_effective_period(two_tone_reference());
    let weak = max_deviation_over_effective_period(two_tone_fast());
    assert!(strong >= 1.5 * weak, "strong {strong}, weak {weak}");
}

#[test]
fn curve_table_layout_and_ranges() {
    let exp = LambdaExperiment::short_window(two_tone_reference());
    let table = run_experiment(&exp).unwrap();
    assert_eq!(table.header(), CURVE_HEADER.map(String::from));
    assert_eq!(table.rows().len(), 601);
    let rate = omega_eff(&exp.drive).unwrap();
    for row in table.rows() {
        assert!((0.0..=1.0 + 1e-12).contains(&row[1]));
        assert!((0.0..=1.0).contains(&row[2]));
        assert!((row[2] - p12_effective(rate, row[0])).abs() < 1e-12);
    }
    assert_eq!(run_experiment(&exp).unwrap(), table);
}

#[test]
fn long_window_spans_an_effective_oscillation() {
    let exp = LambdaExperiment::long_window(two_tone_fast());
    let rate = omega_eff(&exp.drive).unwrap();
    assert!(exp.grid.t1() >= PI / rate);
    let short = LambdaExperiment::short_window(periodic_reference());
    assert!(short.grid.t1() >= PI / omega_eff(&short.drive).unwrap());
}
