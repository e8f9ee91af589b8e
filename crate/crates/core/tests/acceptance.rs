//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adiabatic_decoherence::cli::{cmd_verify, RunConfig};
use adiabatic_decoherence::decoherence::{factor_single_weak, r_bound_homogeneous, r_continuum};
use adiabatic_decoherence::density::{peak_heights, rho_gaussian, rho_plane_waves};
use adiabatic_decoherence::dissipation::{limit_width, width_damped, width_free};
use adiabatic_decoherence::oracle::{band_closed_form, factor_brute_tensor, s_matrix_numeric};
use adiabatic_decoherence::verify::{kernel_free_control_error, kernel_scaling_products};
use adiabatic_decoherence::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    detail: String,
    ok: bool,
}

fn outcome(ok: bool, detail: String) -> Outcome {
    Outcome { detail, ok }
}

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(0xdec0_4e5e);
    r.set_stream(stream);
    r
}

fn particle(r: &mut ChaCha8Rng) -> TwoLevelParticle {
    TwoLevelParticle::with_offset(r.gen_range(0.1..6.0), r.gen_range(-3.0..3.0), r.gen_range(-1.0..1.0)).unwrap()
}

fn unitarity_and_group() -> Outcome {
    let mut r = rng(1);
    let c = CouplingForm::Linear;
    let (mut unit, mut group) = (0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let p = particle(&mut r);
        let x = r.gen_range(-4.0..4.0);
        let (t1, t2) = (r.gen_range(0.0..15.0), r.gen_range(0.0..15.0));
        let s = s_matrix_single(&p, &c, x, t1).unwrap();
        unit = unit.max(s.unitarity_defect());
        let composed = s_matrix_single(&p, &c, x, t2).unwrap() * s;
        group = group.max(composed.max_abs_diff(&s_matrix_single(&p, &c, x, t1 + t2).unwrap()));
    }
    outcome(
        unit <= 1e-12 && group <= 1e-10,
        format!("max ‖S†S−I‖∞ = {unit:.2e} (≤ 1e-12), composition {group:.2e} (≤ 1e-10)"),
    )
}

fn oracle_agreement() -> Outcome {
    let mut r = rng(2);
    let c = CouplingForm::Linear;
    let mut s_err = 0.0_f64;
    for _ in 0..10_000 {
        let p = particle(&mut r);
        let (x, t) = (r.gen_range(-4.0..4.0), r.gen_range(0.0..30.0));
        let a = s_matrix_single(&p, &c, x, t).unwrap();
        s_err = s_err.max(a.max_abs_diff(&s_matrix_numeric(&p, &c, x, t).unwrap()));
    }
    let mut f_err = 0.0_f64;
    for n in 1..=10 {
        for _ in 0..100 {
            let ps: Vec<_> = (0..n).map(|_| particle(&mut r)).collect();
            let (x, xp, t) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0), r.gen_range(0.0..10.0));
            let prod = factor_product(&ps, &c, x, xp, t, FactorMode::Exact).unwrap().factor.value;
            f_err = f_err.max((prod - factor_brute_tensor(&ps, &c, x, xp, t).unwrap()).norm());
        }
    }
    outcome(
        s_err <= 1e-10 && f_err <= 1e-10,
        format!("S vs eigendecomposition {s_err:.2e}, product vs 2^N tensor (N ≤ 10) {f_err:.2e} (≤ 1e-10)"),
    )
}

/// Mirror points `x′ = −x` at fixed `ωt`; there the weak form's leading error is quartic.
fn weak_quartic() -> Outcome {
    let ground = QubitState::ground();
    let err = |omega: f64, ratio: f64, x: f64| {
        let p = TwoLevelParticle::new(omega, ratio * omega).unwrap();
        (1..12)
            .map(|k| {
                let t = k as f64 * PI / 12.0 / omega;
                let exact = factor_single_exact(&p, &CouplingForm::Linear, x, -x, t, &ground).unwrap().value;
                (exact - factor_single_weak(&p, x, -x, t).unwrap().value).norm()
            })
            .fold(0.0_f64, f64::max)
    };
    let mut ratios = Vec::new();
    for (omega, x) in [(1.0, 1.0), (0.5, 2.0), (2.0, 0.7), (3.0, 1.5)] {
        ratios.push(err(omega, 1e-2, x) / err(omega, 1e-3, x));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    outcome(
        lo >= 1e3 && hi <= 1e5,
        format!("error ratio g/ω=1e-2 : 1e-3 in [{lo:.4e}, {hi:.4e}] (within [1e3, 1e5])"),
    )
}

fn ohmic_rate() -> Outcome {
    let mut worst = 0.0_f64;
    for gamma in [0.1, 1.0, 10.0] {
        let spec = SpectralDensity::OhmicLike { gamma, g: 1.0 };
        for k in 0..20 {
            let t = 0.1 + 9.9 * k as f64 / 19.0;
            let r = r_continuum(&spec, t).unwrap().value;
            worst = worst.max((r - gamma * t).abs() / (gamma * t));
        }
    }
    outcome(worst <= 1e-3, format!("max |R − γt|/(γt) = {worst:.2e} (≤ 1e-3)"))
}

fn band_bound() -> Outcome {
    let mut r = rng(5);
    let (mut worst, mut closed) = (f64::NEG_INFINITY, 0.0_f64);
    for _ in 0..10 {
        let omega1 = r.gen_range(0.1..2.0);
        let omega2 = omega1 + r.gen_range(0.2..4.0);
        let spec = SpectralDensity::HomogeneousBand {
            omega1,
            omega2,
            n: r.gen_range(10.0..1e4),
            g: r.gen_range(1e-3..0.2),
        };
        let omega3 = r.gen_range(omega1..omega2);
        let omega4 = r.gen_range(omega3..omega2);
        for k in 0..100 {
            let t = 0.25 * k as f64;
            let value = r_continuum(&spec, t).unwrap().value;
            worst = worst.max(r_bound_homogeneous(&spec, t, omega3, omega4).unwrap() - value);
            if t > 0.0 {
                let c = band_closed_form(&spec, t).unwrap();
                closed = closed.max((value - c).abs() / c);
            }
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max (bound − R) = {worst:.2e} (≤ 1e-12); quadrature vs Si closed form {closed:.1e} rel"),
    )
}

fn four_peaks() -> Outcome {
    let (d, a) = (1.0, 3.0);
    let pair = GaussianPair::new(d, a).unwrap();
    let grid = GridSpec::new(-8.0, 8.0, 256).unwrap();
    let h0 = peak_heights(&rho_gaussian(&pair, 0.0, 0.0, 0.0, grid).unwrap(), &pair).unwrap();
    let (mut diag, mut ratio) = (0.0_f64, 0.0_f64);
    for target in [0.25, 0.5, 1.0] {
        for gamma in [0.05, 0.2] {
            let t = target / (gamma * a * a);
            let h = peak_heights(&rho_gaussian(&pair, gamma, 0.0, t, grid).unwrap(), &pair).unwrap();
            diag = diag.max((h.p11 - h0.p11).abs()).max((h.p00 - h0.p00).abs());
            let off = 0.5 * (h.p10 + h.p01) / (0.5 * (h.p11 + h.p00));
            ratio = ratio.max((off - (-4.0 * target).exp()).abs());
        }
    }
    outcome(
        diag <= 1e-9 && ratio <= 1e-6,
        format!("diagonal drift {diag:.2e} (≤ 1e-9), ratio vs e^(-4γta²) {ratio:.2e} (≤ 1e-6)"),
    )
}

fn plane_wave_diagonal() -> Outcome {
    let pair = PlaneWavePair::new(1.3, -0.8, 2.0).unwrap();
    let grid = GridSpec::new(-15.0, 15.0, 1000).unwrap();
    let t = 1.7;
    let mut worst = 0.0_f64;
    for gamma in [0.0, 0.5, 5.0] {
        let rho = rho_plane_waves(&pair, gamma, t, grid).unwrap();
        for (i, x) in grid.points().into_iter().enumerate() {
            worst = worst.max((rho.get(i, i) - pair.rho0(x, x, t)).norm());
            worst = worst.max((rho.get(i, i) - Complex64::new(pair.diagonal(x, t), 0.0)).norm());
        }
    }
    outcome(worst <= 1e-12, format!("max |ρ(x,x,t) − ρ₀(x,x,t)| = {worst:.2e} (≤ 1e-12)"))
}

fn dissipation() -> Outcome {
    let mut r = rng(8);
    let mut limit_err = 0.0_f64;
    for _ in 0..100 {
        let p = PacketParams::new(r.gen_range(0.05..5.0), r.gen_range(0.1..50.0), r.gen_range(1e-3..10.0)).unwrap();
        let late = width_damped(&p, 50.0 * p.mass / p.eta).unwrap();
        let lim = limit_width(&p).unwrap();
        let closed = p.a0 * (1.0 + (1.0 / (2.0 * p.eta * p.a0 * p.a0)).powi(2)).sqrt();
        limit_err = limit_err.max((late - lim).abs() / lim).max((lim - closed).abs() / closed);
    }
    let mut free_err = 0.0_f64;
    for _ in 0..100 {
        let p = PacketParams::new(r.gen_range(0.05..5.0), r.gen_range(0.1..50.0), 1e-12).unwrap();
        let t = r.gen_range(0.0..100.0);
        let eq1 = p.a0 * (1.0 + t * t / (4.0 * p.mass * p.mass * p.a0.powi(4))).sqrt();
        free_err = free_err.max((width_damped(&p, t).unwrap() - eq1).abs() / eq1);
        free_err = free_err.max((width_free(&p, t).unwrap() - eq1).abs() / eq1);
    }
    outcome(
        limit_err <= 1e-6 && free_err <= 1e-9,
        format!("limit breadth {limit_err:.2e} (≤ 1e-6), η=1e-12 vs free law {free_err:.2e} (≤ 1e-9)"),
    )
}

fn kernel_scaling() -> Outcome {
    let masses = [100.0, 200.0, 400.0, 800.0];
    let products = kernel_scaling_products(&masses).unwrap();
    let mean = products.iter().sum::<f64>() / products.len() as f64;
    let spread = products.iter().map(|p| (p / mean - 1.0).abs()).fold(0.0_f64, f64::max);
    let halving = products.windows(2).map(|w| (w[1] / w[0] - 1.0).abs()).fold(0.0_f64, f64::max);
    let free = kernel_free_control_error().unwrap();
    outcome(
        spread <= 0.25 && halving <= 0.25 && free <= 0.01,
        format!("M·spread within {spread:.2e} of mean (≤ 0.25), free control {free:.2e} (≤ 0.01)"),
    )
}

fn determinism() -> Outcome {
    let cfg = RunConfig::default();
    let a = cmd_verify(&cfg, Some(7)).unwrap().to_string();
    let b = cmd_verify(&cfg, Some(7)).unwrap().to_string();
    let c = cmd_verify(&cfg, Some(8)).unwrap();
    outcome(
        a == b && c.all_passed(),
        format!("two seed-7 reports byte-identical: {} ({} bytes)", a == b, a.len()),
    )
}

type Criterion = (&'static str, fn() -> Outcome, Duration);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("unitarity and composition", unitarity_and_group, Duration::from_secs(1)),
        ("oracle agreement", oracle_agreement, Duration::from_secs(10)),
        ("weak-coupling quartic convergence", weak_quartic, Duration::from_secs(1)),
        ("Ohmic-like rate R = γt", ohmic_rate, Duration::from_secs(5)),
        ("homogeneous band lower bound", band_bound, Duration::from_secs(5)),
        ("four-peak density matrix", four_peaks, Duration::from_secs(5)),
        ("plane-wave diagonal invariance", plane_wave_diagonal, Duration::from_secs(1)),
        ("dissipative localization", dissipation, Duration::from_secs(1)),
        ("adiabatic kernel mass scaling", kernel_scaling, Duration::from_secs(60)),
        ("verify determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        let elapsed = start.elapsed();
        let ok = o.ok && elapsed <= *budget;
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {} [{:.3} s, budget {} s]",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            o.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
