//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use common::*;
use qhe_core::css_code::{steane_code, Pauli};
use qhe_core::noise_model::mc_uncorrectable_rate;
use qhe_core::qhe_protocol::keygen;
use qhe_core::rng::seeded;
use qhe_core::security_analysis::{
    brute_force_eve_distance, delta_bound, delta_previous, delta_proposed, region_fraction, threshold_n, SecurityParams,
    StirlingMode, DEFAULT_RESOLUTION,
};
use qhe_core::state_sim::{DensityMatrix, PureState};
use statrs::distribution::{ChiSquared, ContinuousCDF};

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut out = f();
    let elapsed = start.elapsed();
    if let Some(limit) = limit {
        if elapsed > limit {
            out.pass = false;
            out.detail.push_str(&format!("; exceeded {limit:?}"));
        }
    }
    println!(
        "{} {name}: {} [{:.2}s]",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        elapsed.as_secs_f64()
    );
    out.pass
}

fn region_values() -> Outcome {
    let targets = [(5u64, 0.6617), (50, 0.8410), (5000, 0.9834)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in targets {
        let start = Instant::now();
        let got = region_fraction(n, DEFAULT_RESOLUTION).unwrap().fraction;
        let ok = (got - want).abs() <= 1e-3 && start.elapsed() < Duration::from_secs(10);
        pass &= ok;
        parts.push(format!("N={n} {got:.4} (target {want:.4}) {}", if ok { "ok" } else { "MISS" }));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn threshold_points() -> Outcome {
    let a = threshold_n(2.0).unwrap();
    let b = threshold_n(8.0).unwrap();
    Outcome {
        pass: (a - 2.0).abs() <= 1e-12 && (b - 4.0).abs() <= 1e-12,
        detail: format!("threshold_n(2) = {a}, threshold_n(8) = {b}"),
    }
}

/// Identity-code micro instances: the code state is the single-qubit message
/// followed by `n - 1` zero ancillas, exactly what encryption builds when the
/// encoder is trivial.
fn bound_oracle() -> Outcome {
    let mut rng = seeded(2024);
    let per_shape = 60;
    let mut pass = true;
    let mut parts = Vec::new();
    for (m, n) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
        let bound = delta_bound(0, ((2 * m) as u128).pow(n as u32)).unwrap();
        let mut worst = 0.0f64;
        for _ in 0..per_shape {
            let state = |rng: &mut _| {
                let msg = PureState::random(1, rng);
                let s = if n == 1 { msg } else { msg.tensor(&PureState::basis(n - 1, 0)) };
                DensityMatrix::from_pure(&s)
            };
            let (a, b) = (state(&mut rng), state(&mut rng));
            worst = worst.max(brute_force_eve_distance(&a, &b, m, n).unwrap());
        }
        let ok = worst <= bound + 1e-9;
        pass &= ok;
        parts.push(format!(
            "(m={m},n={n}) max {worst:.4} vs bound {bound:.4} {}",
            if ok { "ok" } else { "VIOLATED" }
        ));
    }
    Outcome {
        pass,
        detail: format!("{} instances: {}", 4 * per_shape, parts.join(", ")),
    }
}

fn comparison() -> Outcome {
    let mut checked = 0;
    let mut violations = 0;
    for r in [0u32, 4, 16] {
        for n in 1..=50u64 {
            for m in 1..=n {
                let p = SecurityParams::new(r, m, n).unwrap();
                checked += 1;
                if delta_proposed(p) > delta_previous(p, StirlingMode::Exact) {
                    violations += 1;
                }
            }
        }
    }
    Outcome {
        pass: violations == 0,
        detail: format!("{checked} (r, m, n) triples, {violations} violations"),
    }
}

fn noise_formula() -> Outcome {
    let trials = 100_000;
    let code = steane_code();
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, p) in [0.001, 0.01, 0.05, 0.1].into_iter().enumerate() {
        let report = mc_uncorrectable_rate(&code, p, trials, 100 + i as u64).unwrap();
        let pl = 1.0 - (1.0 - p).powi(7) - 7.0 * p * (1.0 - p).powi(6);
        let sigma = (pl * (1.0 - pl) / trials as f64).sqrt();
        let z = (report.uncorrectable_rate - pl) / sigma;
        pass &= z.abs() <= 3.0;
        parts.push(format!("p={p} rate {:.5} vs {pl:.5} ({z:+.2} sigma)", report.uncorrectable_rate));
    }
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn protocol_correctness() -> Outcome {
    let mut rng = seeded(4242);
    let circuits = 50;
    let seeds_per_circuit = 4;
    let mut worst = 1.0f64;
    let mut outcomes = [0usize; 2];
    for i in 0..circuits {
        let circuit = random_circuit(&mut rng, 2, 6, 3);
        let inputs: Vec<PureState> = (0..circuit.num_wires).map(|_| PureState::random(1, &mut rng)).collect();
        let base = 1000 + i * seeds_per_circuit;
        let (f, seen) = homomorphism_check(&circuit, &inputs, base..base + seeds_per_circuit);
        worst = worst.min(f);
        outcomes[0] += seen[0];
        outcomes[1] += seen[1];
    }
    Outcome {
        pass: worst >= 1.0 - 1e-6 && outcomes[0] > 0 && outcomes[1] > 0,
        detail: format!(
            "{circuits} circuits x {seeds_per_circuit} seeds, worst fidelity {worst:.9}, T outcomes seen 0:{} 1:{}",
            outcomes[0], outcomes[1]
        ),
    }
}

fn error_correction() -> Outcome {
    let mut rng = seeded(77);
    let key = keygen(1, 7, &mut rng).unwrap();
    let message = PureState::random(1, &mut rng);
    let code_positions: Vec<usize> = (0..7).map(|g| key.code_position(g)).collect();
    let mut worst = 1.0f64;
    let mut code_cases = 0;
    // Every combination of at most one X and at most one Z on the code
    // positions: 8 x 8 - 1 = 63 cases, which includes all 21 single-qubit
    // X, Y, Z errors.
    for x in 0..=7 {
        for z in 0..=7 {
            let mut errors = Vec::new();
            if x < 7 {
                errors.push((code_positions[x], Pauli::X));
            }
            if z < 7 {
                errors.push((code_positions[z], Pauli::Z));
            }
            if errors.is_empty() {
                continue;
            }
            worst = worst.min(corrected_fidelity_multi(&key, &message, &errors, (x * 8 + z) as u64));
            code_cases += 1;
        }
    }
    let mut padding_cases = 0;
    for pos in (0..14).filter(|p| !code_positions.contains(p)) {
        for pauli in [Pauli::X, Pauli::Y, Pauli::Z] {
            worst = worst.min(corrected_fidelity(&key, &message, pos, pauli, 500 + pos as u64));
            padding_cases += 1;
        }
    }
    Outcome {
        pass: worst >= 1.0 - 1e-9 && code_cases == 63,
        detail: format!(
            "{code_cases} code-position cases + {padding_cases} padding-position cases, worst fidelity {worst:.12}"
        ),
    }
}

fn key_privacy() -> Outcome {
    let rounds = 10_000;
    let stats = t_round_privacy(steane_code(), 1, rounds, 9);
    let chi = chi_squared_2x2(&stats.table);
    let critical = ChiSquared::new(1.0).unwrap().inverse_cdf(0.99);
    Outcome {
        pass: chi < critical && stats.shapes_ok,
        detail: format!(
            "{rounds} rounds, I/S counts by outcome {:?}, chi2 = {chi:.3} < {critical:.3}, lengths/alphabet fixed: {}",
            stats.table, stats.shapes_ok
        ),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        criterion("region fractions N=5/50/5000", Some(secs(30)), region_values),
        criterion("threshold curve through (2,2) and (8,4)", None, threshold_points),
        criterion("security bound oracle", Some(secs(60)), bound_oracle),
        criterion("comparison delta_proposed <= delta_previous", Some(secs(1)), comparison),
        criterion("noise formula Monte Carlo", Some(secs(60)), noise_formula),
        criterion("protocol correctness on random circuits", Some(secs(300)), protocol_correctness),
        criterion("error correction under encryption", None, error_correction),
        criterion("key privacy chi-squared", None, key_privacy),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
