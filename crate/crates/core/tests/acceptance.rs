//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex;
use qlitho::deposition::{
    fixed_n_rate_bilinear, fixed_n_superposition_rate, noon_rate, superposition_2d_rate_bilinear,
};
use qlitho::fit::{fit_superposition_1d, FitOptions};
use qlitho::optimize::StrategyKind;
use qlitho::states::{Superposition2D, SuperpositionFixedN, Term1D, Term2D};
use qlitho::synth::fourier::fourier_coefficients;
use qlitho::synth::{
    classical_intensity, rayleigh_resolution, to_fourier_program, PeriodicGrid, Trench,
};
use qlitho::verify::verify_oracle;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    match verify_oracle(8, 6, 20, 2024) {
        Ok(r) => {
            let secs = start.elapsed().as_secs_f64();
            outcome(
                r.passed() && secs < 60.0,
                format!(
                    "{} comparisons, max relative deviation {:.2e} (limit 1e-10), {secs:.1} s",
                    r.comparisons, r.max_relative_deviation
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

/// Strict local maxima of periodic samples, refined by a parabola through
/// the three neighbouring points.
fn periodic_maxima(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = Vec::new();
    for j in 0..n {
        let (l, c, r) = (values[(j + n - 1) % n], values[j], values[(j + 1) % n]);
        if c > l && c >= r {
            let denom = l - 2.0 * c + r;
            let shift = if denom != 0.0 { 0.5 * (l - r) / denom } else { 0.0 };
            out.push((j as f64 + shift) * step);
        }
    }
    out
}

fn noon_super_resolution() -> Outcome {
    let points = 1024;
    let grid = PeriodicGrid::new(points).unwrap();
    let mut notes = Vec::new();
    let mut pass = true;
    for n in 1..=6u32 {
        let values: Vec<f64> = grid.nodes().iter().map(|&p| noon_rate(n, p).unwrap()).collect();
        let maxima = periodic_maxima(&values, grid.weight());
        let spacing_ok = maxima.len() == n as usize
            && (0..maxima.len()).all(|i| {
                let next = if i + 1 == maxima.len() { maxima[0] + TAU } else { maxima[i + 1] };
                ((next - maxima[i]) - TAU / f64::from(n)).abs() < 1e-3
            });
        pass &= spacing_ok;
        notes.push(format!("N={n}:{}", maxima.len()));
    }
    outcome(pass, format!("maxima per N [{}], spacing 2π/N", notes.join(" ")))
}

fn fig2_zeros() -> Outcome {
    let s = SuperpositionFixedN::normalized(
        20,
        vec![
            Term1D { m: 9, theta: 0.0, amplitude: Complex::new(1.0, 0.0) },
            Term1D { m: 5, theta: 0.0, amplitude: Complex::new(1.0, 0.0) },
        ],
    )
    .unwrap();
    let a = fixed_n_superposition_rate(&s, FRAC_PI_2).unwrap();
    let b = fixed_n_superposition_rate(&s, 1.5 * PI).unwrap();
    let peak = fixed_n_superposition_rate(&s, 0.0).unwrap();
    outcome(
        a.abs() <= 1e-12 && b.abs() <= 1e-12,
        format!("rate {a:.2e} at π/2, {b:.2e} at 3π/2 (rate at 0 is {peak:.3e})"),
    )
}

fn trench_coefficients() -> Outcome {
    let trench = Trench::new(1.0).unwrap();
    let coeffs = fourier_coefficients(&trench, 10).unwrap();
    let mut worst = 0.0f64;
    let mut ratio = Vec::new();
    for q in 0..=4usize {
        let n = 2 * q + 1;
        let printed = if q % 2 == 0 { 1.0 } else { -1.0 } / n as f64;
        worst = worst.max((coeffs.a[n] - printed).abs());
        ratio.push(coeffs.a[n] / printed);
    }
    let values_ok = worst <= 1e-6;
    let program = to_fourier_program(&coeffs, 1.0).unwrap();
    let phases_ok = program.terms.len() == 5
        && program.terms.iter().all(|t| {
            let q = (t.n - 1) / 2;
            t.phase == if q % 2 == 1 { PI } else { 0.0 }
        });
    outcome(
        values_ok && phases_ok,
        format!(
            "coefficients {} (max |a − (−1)^q/(2q+1)| = {worst:.3e}, a/printed = {:.9} = 2/π), κ_q phases {}",
            if values_ok { "match" } else { "differ" },
            ratio[0],
            if phases_ok { "exact" } else { "wrong" }
        ),
    )
}

struct TrenchFit {
    dead_max: f64,
    plateau_mean: f64,
    dead_min: f64,
    distance: f64,
    secs: f64,
}

fn trench_fit() -> Result<TrenchFit, String> {
    let start = Instant::now();
    let trench = Trench::new(1.0).unwrap();
    let opts = FitOptions {
        seed: 1,
        generations: Some(500),
        strategy: StrategyKind::Best1Bin,
        ..FitOptions::default()
    };
    let fit = fit_superposition_1d(10, &trench, &opts).map_err(|e| e.to_string())?;
    let grid = PeriodicGrid::new(4096).unwrap();
    let (mut dead_max, mut dead_min) = (f64::NEG_INFINITY, f64::INFINITY);
    let (mut plateau, mut count) = (0.0, 0usize);
    for phi in grid.nodes() {
        let p = fixed_n_superposition_rate(&fit.state, phi).unwrap() * fit.exposure_time;
        let centered = if phi >= PI { phi - TAU } else { phi };
        if (FRAC_PI_2 + 0.1..=1.5 * PI - 0.1).contains(&phi) {
            dead_max = dead_max.max(p);
        }
        if (FRAC_PI_2..=1.5 * PI).contains(&phi) {
            dead_min = dead_min.min(p);
        }
        if centered > -FRAC_PI_2 + 0.1 && centered < FRAC_PI_2 - 0.1 {
            plateau += p;
            count += 1;
        }
    }
    Ok(TrenchFit {
        dead_max,
        plateau_mean: plateau / count as f64,
        dead_min,
        distance: fit.distance,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn superposition_fit(fit: &Result<TrenchFit, String>) -> Outcome {
    match fit {
        Ok(f) => outcome(
            f.dead_max <= 0.05 && f.plateau_mean >= 0.7 && f.secs <= 300.0,
            format!(
                "d_N = {:.4}, max exposure on [π/2+0.1, 3π/2−0.1] = {:.4} (limit 0.05), plateau mean = {:.4} (limit 0.7), {:.1} s",
                f.distance, f.dead_max, f.plateau_mean, f.secs
            ),
        ),
        Err(e) => outcome(false, e.clone()),
    }
}

fn penalty_exposure(fit: &Result<TrenchFit, String>) -> Outcome {
    let trench = Trench::new(1.0).unwrap();
    let t = 1.0;
    let program = to_fourier_program(&fourier_coefficients(&trench, 10).unwrap(), t).unwrap();
    let grid = PeriodicGrid::new(4096).unwrap();
    let min = grid.nodes().iter().map(|&p| program.exposure(p)).fold(f64::INFINITY, f64::min);
    let mean = grid.integrate(|p| program.exposure(p)) / TAU;
    let q = program.penalty_rate();
    let pseudo_ok = min > 0.0 && (mean - q * t).abs() <= 1e-8;
    let (fit_ok, fit_note) = match fit {
        Ok(f) => (f.dead_min < 0.05, format!("fit minimum on [π/2, 3π/2] = {:.2e}", f.dead_min)),
        Err(e) => (false, e.clone()),
    };
    outcome(
        pseudo_ok && fit_ok,
        format!("program min = {min:.4} > 0, mean − Q t = {:.1e} (Q = {q:.6}); {fit_note}", mean - q * t),
    )
}

fn classical_baseline() -> Outcome {
    let lambda = 532.0;
    let exact = rayleigh_resolution(lambda, FRAC_PI_2).unwrap() == lambda / 4.0;
    let mut worst = 0.0f64;
    for theta in [0.1, 0.4, PI / 6.0, 1.0, 1.3, FRAC_PI_2] {
        let x = rayleigh_resolution(lambda, theta).unwrap();
        worst = worst.max(classical_intensity(x, lambda, theta).unwrap());
    }
    outcome(
        exact && worst <= 1e-12,
        format!("λ/4 exact: {exact}, max intensity at predicted zeros {worst:.1e}"),
    )
}

fn realness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut worst_im, mut worst_neg) = (0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.random_range(1..=12u32);
        let terms: Vec<_> = (0..=n / 2)
            .map(|m| Term1D {
                m,
                theta: rng.random_range(0.0..3.0),
                amplitude: Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            })
            .collect();
        let s = SuperpositionFixedN::normalized(n, terms).unwrap();
        let z = fixed_n_rate_bilinear(&s, rng.random_range(0.0..TAU)).unwrap();
        worst_im = worst_im.max(z.im.abs());
        worst_neg = worst_neg.max(-z.re);
    }
    for _ in 0..1000 {
        let n = rng.random_range(1..=6u32);
        let mut terms = Vec::new();
        for m in 0..=n / 2 {
            for k in 0..=n / 2 {
                terms.push(Term2D {
                    m,
                    k,
                    zeta: rng.random_range(0.0..3.0),
                    zeta_bar: rng.random_range(0.0..3.0),
                    amplitude: Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                });
            }
        }
        let s = Superposition2D::normalized(n, terms).unwrap();
        let z = superposition_2d_rate_bilinear(&s, rng.random_range(0.0..TAU), rng.random_range(0.0..TAU)).unwrap();
        worst_im = worst_im.max(z.im.abs());
        worst_neg = worst_neg.max(-z.re);
    }
    outcome(
        worst_im <= 1e-12 && worst_neg <= 1e-12,
        format!("2000 states: max |Im| = {worst_im:.1e}, most negative value = {:.1e}", -worst_neg),
    )
}

fn determinism() -> Outcome {
    let trench = Trench::new(1.0).unwrap();
    let run = |threads| {
        let opts = FitOptions {
            seed: 99,
            generations: Some(60),
            threads: Some(threads),
            grid_points: Some(256),
            ..FitOptions::default()
        };
        fit_superposition_1d(6, &trench, &opts).map(|f| f.result)
    };
    match (run(1), run(4)) {
        (Ok(a), Ok(b)) => outcome(
            a.best_params == b.best_params && a == b,
            format!("1 vs 4 threads: {} parameters bit-identical: {}", a.best_params.len(), a == b),
        ),
        (Err(e), _) | (_, Err(e)) => outcome(false, e.to_string()),
    }
}

fn main() -> ExitCode {
    let fit = trench_fit();
    let results = [
        ("1 oracle equivalence", oracle_equivalence()),
        ("2 N00N super-resolution", noon_super_resolution()),
        ("3 two-branch zeros at π/2 and 3π/2", fig2_zeros()),
        ("4 trench Fourier coefficients", trench_coefficients()),
        ("5 superposition trench fit", superposition_fit(&fit)),
        ("6 penalty exposure", penalty_exposure(&fit)),
        ("7 classical baseline", classical_baseline()),
        ("8 realness and non-negativity", realness()),
        ("9 determinism across thread counts", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!("[{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
