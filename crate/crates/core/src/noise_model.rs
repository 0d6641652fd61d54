use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::css_code::{decode_syndrome, syndrome_of, CssCode, Pauli, PauliString};
use crate::error::{Error, Result};
use crate::qhe_protocol::{decrypt, keygen, Client, Loopback, Server, ServerConfig, SessionConfig};
use crate::rng::{stream, streams};
use crate::state_sim::PureState;

/// Decrypted fidelity below `1 − FAILURE_TOLERANCE` counts as a failed trial.
pub const FAILURE_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseLocation {
    Transmission,
    PerGate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub p: f64,
    pub locations: Vec<NoiseLocation>,
    pub trials: usize,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn transmission(p: f64, trials: usize, seed: u64) -> Self {
        NoiseConfig {
            p,
            locations: vec![NoiseLocation::Transmission],
            trials,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_p(self.p)?;
        if self.trials == 0 {
            return Err(Error::contract("trials must be at least 1"));
        }
        Ok(())
    }

    fn at(&self, location: NoiseLocation) -> f64 {
        if self.locations.contains(&location) {
            self.p
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseReport {
    pub p: f64,
    pub trials: usize,
    /// Share of trials whose error on the code positions has weight above `t`.
    pub uncorrectable_rate: f64,
    /// Share of trials the decoder (or the full pipeline) failed to undo.
    pub decoder_failure_rate: f64,
    pub closed_form_pl: f64,
    /// Binomial standard error of `uncorrectable_rate`.
    pub stderr: f64,
}

impl NoiseReport {
    fn new(p: f64, trials: usize, uncorrectable: usize, failures: usize, closed_form_pl: f64) -> Self {
        let rate = uncorrectable as f64 / trials as f64;
        NoiseReport {
            p,
            trials,
            uncorrectable_rate: rate,
            decoder_failure_rate: failures as f64 / trials as f64,
            closed_form_pl,
            stderr: (rate * (1.0 - rate) / trials as f64).sqrt(),
        }
    }
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::contract(format!("p = {p} outside [0, 1]")))
    }
}

/// `1 − Σ_{i ≤ t} C(n, i) pⁱ (1 − p)^{n−i}` with `t = ⌊(d − 1)/2⌋`.
pub fn logical_error_probability(n: usize, d: usize, p: f64) -> Result<f64> {
    check_p(p)?;
    if n == 0 || d == 0 || d > n {
        return Err(Error::contract(format!("need 1 <= d <= n, got n = {n}, d = {d}")));
    }
    let t = (d - 1) / 2;
    let mut binom = 1.0;
    let mut ok = 0.0;
    for i in 0..=t {
        if i > 0 {
            binom = binom * (n - i + 1) as f64 / i as f64;
        }
        ok += binom * p.powi(i as i32) * (1.0 - p).powi((n - i) as i32);
    }
    Ok((1.0 - ok).clamp(0.0, 1.0))
}

/// Samples one depolarizing Pauli per qubit.
pub fn sample_depolarizing<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> PauliString {
    let ops: Vec<Pauli> = (0..n)
        .map(|_| {
            if rng.gen::<f64>() < p {
                [Pauli::X, Pauli::Y, Pauli::Z][rng.gen_range(0..3)]
            } else {
                Pauli::I
            }
        })
        .collect();
    PauliString::from_ops(ops)
}

/// Monte Carlo over i.i.d. depolarizing errors on the bare code.
///
/// Each trial counts as uncorrectable when its weight exceeds `t`, and as a
/// decoder failure when the minimum-weight correction leaves a logical error.
pub fn mc_uncorrectable_rate(code: &CssCode, p: f64, trials: usize, seed: u64) -> Result<NoiseReport> {
    NoiseConfig::transmission(p, trials, seed).validate()?;
    let t = code.t();
    let (uncorrectable, failures) = (0..trials)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize)> {
            let mut rng = stream(seed, streams::TRIAL_BASE + i as u64);
            let error = sample_depolarizing(code.n(), p, &mut rng);
            let correction = decode_syndrome(code, &syndrome_of(code, &error)?)?;
            let residual = error.mul(&correction)?;
            Ok((usize::from(error.weight() > t), usize::from(code.is_logical_error(&residual))))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(NoiseReport::new(
        p,
        trials,
        uncorrectable,
        failures,
        logical_error_probability(code.n(), code.d(), p)?,
    ))
}

/// Full encrypted pipeline per trial: encrypt a random message, depolarize
/// every physical position on arrival, run one syndrome round, decrypt.
///
/// `uncorrectable_rate` counts trials whose sampled error on the key's code
/// positions has weight above `t`; `decoder_failure_rate` counts trials whose
/// decrypted fidelity falls below `1 − FAILURE_TOLERANCE`.
pub fn end_to_end_noise_experiment(session: &SessionConfig, noise: &NoiseConfig) -> Result<NoiseReport> {
    session.validate()?;
    noise.validate()?;
    let code = session.n_code.code();
    let server_config = ServerConfig {
        correct_after_transmission: true,
        syndrome_interval: None,
        transmission_noise: noise.at(NoiseLocation::Transmission),
        gate_noise: noise.at(NoiseLocation::PerGate),
    };
    let t = code.t();
    let (uncorrectable, failures) = (0..noise.trials)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize)> {
            let trial = streams::TRIAL_BASE + i as u64;
            let mut rng = stream(noise.seed, trial);
            let key = keygen(session.m, code.n(), &mut rng)?;
            let message = PureState::random(1, &mut rng);
            let mut client = Client::with_key(code.clone(), key.clone(), stream(noise.seed ^ streams::CLIENT, trial))?;
            let inputs = client.encrypt_inputs(std::slice::from_ref(&message))?;
            let mut server = Server::new(
                code.clone(),
                server_config.clone(),
                stream(noise.seed ^ streams::SERVER, trial),
                stream(noise.seed ^ streams::NOISE, trial),
            );
            let data = server.load_data(&inputs)[0];
            let ancillas = client.prepare_ancillas(0, 1, 1)?;
            let (zeros, pluses) = ancillas.split_at(1);
            server.stock_ancillas(Vec::new(), zeros.to_vec(), pluses.to_vec())?;
            server.depolarize_blocks(&[data], server_config.transmission_noise)?;

            let code_positions: Vec<usize> = (0..code.n())
                .map(|g| server.memory().block(data).map(|b| b.positions[key.code_position(g)]))
                .collect::<Result<_>>()?;
            let weight = server
                .noise_log()
                .iter()
                .filter(|(pos, _)| code_positions.contains(pos))
                .count();

            let mut channel = Loopback::new(client);
            server.syndrome_extraction_round(data, &mut channel)?;
            let fidelity = decrypt(&key, &code, server.memory(), data)?
                .state
                .fidelity_with_pure(&message)?;
            Ok((usize::from(weight > t), usize::from(fidelity < 1.0 - FAILURE_TOLERANCE)))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    Ok(NoiseReport::new(
        noise.p,
        noise.trials,
        uncorrectable,
        failures,
        logical_error_probability(code.n(), code.d(), noise.p)?,
    ))
}
