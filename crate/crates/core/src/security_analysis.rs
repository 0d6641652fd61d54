//! Trace-distance security bounds for the permutation-key scheme and the
//! earlier two-round scheme, the region where the former is tighter, and a
//! brute-force eavesdropper oracle for tiny instances.
//!
//! Every Δ is computed as `log2 Δ = (r − log2 |K|) / 2` so that key counts such
//! as `(2m)^n` with `m, n` in the thousands never materialize.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qhe_protocol::{key_space_size, PermutationKey};
use crate::state_sim::DensityMatrix;

/// Default Simpson step for [`region_fraction`].
pub const DEFAULT_RESOLUTION: f64 = 1e-3;

/// Largest `2mn` the eavesdropper oracle will build density matrices for.
pub const ORACLE_QUBIT_LIMIT: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecurityParams {
    pub r: u32,
    pub m: u64,
    pub n: u64,
}

impl SecurityParams {
    pub fn new(r: u32, m: u64, n: u64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::contract("m and n must be at least 1"));
        }
        Ok(SecurityParams { r, m, n })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StirlingMode {
    /// `√(2^r / C(2m, m))`.
    Exact,
    /// The closed approximation `√(π·n·2^r / 4^m)`.
    Stirling,
}

/// `√(2^r / key_count)`.
pub fn delta_bound(r: u32, key_count: u128) -> Result<f64> {
    if key_count == 0 {
        return Err(Error::contract("key count must be positive"));
    }
    Ok(delta_from_log2(r, (key_count as f64).log2()))
}

fn delta_from_log2(r: u32, log2_keys: f64) -> f64 {
    ((f64::from(r) - log2_keys) / 2.0).exp2()
}

/// `log2 (2m)^n`.
pub fn log2_keys_proposed(m: u64, n: u64) -> f64 {
    n as f64 * (2.0 * m as f64).log2()
}

/// `log2 C(2m, m)`, summed as `Σ log2((m + i)/i)`.
pub fn log2_keys_previous(m: u64) -> f64 {
    (1..=m).map(|i| ((m + i) as f64 / i as f64).log2()).sum()
}

pub fn delta_proposed(p: SecurityParams) -> f64 {
    delta_from_log2(p.r, log2_keys_proposed(p.m, p.n))
}

pub fn delta_previous(p: SecurityParams, mode: StirlingMode) -> f64 {
    match mode {
        StirlingMode::Exact => delta_from_log2(p.r, log2_keys_previous(p.m)),
        StirlingMode::Stirling => {
            let log2 = (std::f64::consts::PI * p.n as f64).log2() + f64::from(p.r) - 2.0 * p.m as f64;
            (log2 / 2.0).exp2()
        }
    }
}

/// Exact `C(2m, m)` if it fits in 128 bits.
pub fn central_binomial(m: u64) -> Option<u128> {
    let mut c: u128 = 1;
    for i in 1..=u128::from(m) {
        // c·(m+i)/i stays integral at every step: it equals C(m+i, i).
        c = c.checked_mul(u128::from(m) + i)? / i;
    }
    Some(c)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaReport {
    pub r: u32,
    pub m: u64,
    pub n: u64,
    pub delta_proposed: f64,
    pub delta_previous_exact: f64,
    pub delta_previous_stirling: f64,
    /// `(2m)^n`, absent when it exceeds 128 bits.
    pub key_count_proposed: Option<u128>,
    /// `C(2m, m)`, absent when it exceeds 128 bits.
    pub key_count_previous: Option<u128>,
    pub log2_key_count_proposed: f64,
    pub log2_key_count_previous: f64,
}

pub fn delta_report(p: SecurityParams) -> DeltaReport {
    DeltaReport {
        r: p.r,
        m: p.m,
        n: p.n,
        delta_proposed: delta_proposed(p),
        delta_previous_exact: delta_previous(p, StirlingMode::Exact),
        delta_previous_stirling: delta_previous(p, StirlingMode::Stirling),
        key_count_proposed: usize::try_from(p.m)
            .ok()
            .zip(usize::try_from(p.n).ok())
            .and_then(|(m, n)| key_space_size(m, n)),
        key_count_previous: central_binomial(p.m),
        log2_key_count_proposed: log2_keys_proposed(p.m, p.n),
        log2_key_count_previous: log2_keys_previous(p.m),
    }
}

/// Smallest code length at which the proposed scheme has more keys than the
/// previous one's Stirling estimate: `n = log 4^m / log 2m`.
pub fn threshold_n(m: f64) -> Result<f64> {
    if !(m > 0.5) || !m.is_finite() {
        return Err(Error::contract(format!("threshold_n needs m > 0.5, got {m}")));
    }
    Ok(2.0 * m * std::f64::consts::LN_2 / (2.0 * m).ln())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    /// Area of the region in the continuous square `[1, N]²`.
    Area,
    /// Share of integer points `(m, n) ∈ {1..N}²`.
    Lattice,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    #[serde(rename = "N")]
    pub n: u64,
    pub resolution: f64,
    pub fraction: f64,
}

/// Fraction of `[1, N]²` lying above the threshold curve `n = threshold_n(m)`.
///
/// The area is `∫₁ᴺ (N − clamp(threshold_n(m), 1, N)) dm`, integrated with
/// composite Simpson at step close to `resolution`.
pub fn region_fraction(n_max: u64, resolution: f64) -> Result<RegionReport> {
    region_fraction_with_mode(n_max, resolution, RegionMode::Area)
}

pub fn region_fraction_with_mode(n_max: u64, resolution: f64, mode: RegionMode) -> Result<RegionReport> {
    if n_max < 2 {
        return Err(Error::contract(format!("N must be at least 2, got {n_max}")));
    }
    if !(resolution > 0.0) {
        return Err(Error::contract("resolution must be positive"));
    }
    let big_n = n_max as f64;
    let fraction = match mode {
        RegionMode::Area => {
            let span = big_n - 1.0;
            let mut intervals = (span / resolution).ceil() as u64;
            intervals += intervals % 2;
            intervals = intervals.max(2);
            let h = span / intervals as f64;
            let f = |m: f64| big_n - threshold_n(m).map_or(big_n, |t| t.clamp(1.0, big_n));
            let mut sum = f(1.0) + f(big_n);
            for i in 1..intervals {
                let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * f(1.0 + i as f64 * h);
            }
            (sum * h / 3.0 / (span * span)).clamp(0.0, 1.0)
        }
        RegionMode::Lattice => {
            let mut count = 0u64;
            for m in 1..=n_max {
                let t = threshold_n(m as f64)?;
                // integers n in 1..=N with n > t
                let above = if t < 1.0 { n_max } else { n_max.saturating_sub(t.floor() as u64) };
                count += above;
            }
            count as f64 / (big_n * big_n)
        }
    };
    Ok(RegionReport {
        n: n_max,
        resolution,
        fraction,
    })
}

/// Permutation taking canonical order (code qubits `0..n`, then padding) to
/// the physical layout of `key`; `perm[q]` is the new position of qubit `q`.
fn key_permutation(key: &PermutationKey) -> Vec<usize> {
    let n = key.n();
    let total = n * key.group_size();
    let code: Vec<usize> = (0..n).map(|g| key.code_position(g)).collect();
    let padding = (0..total).filter(|p| !code.contains(p));
    code.iter().copied().chain(padding).collect()
}

/// The server's view of an encrypted state: the uniform mixture over every
/// key of the state with its code qubits moved into the key's slots.
///
/// `state` holds `2mn` qubits in canonical order.
pub fn eve_state(state: &DensityMatrix, m: usize, n: usize) -> Result<DensityMatrix> {
    let total = 2 * m * n;
    if total > ORACLE_QUBIT_LIMIT {
        return Err(Error::SizeLimit {
            requested: total,
            limit: ORACLE_QUBIT_LIMIT,
        });
    }
    if state.num_qubits() != total {
        return Err(Error::contract(format!(
            "state has {} qubits, expected 2mn = {total}",
            state.num_qubits()
        )));
    }
    let parts = PermutationKey::enumerate(m, n)?
        .iter()
        .map(|k| state.permute_qubits(&key_permutation(k)))
        .collect::<Result<Vec<_>>>()?;
    DensityMatrix::mixture(&parts)
}

/// Trace distance between the eavesdropper views of two `n`-qubit code states,
/// each padded with `2mn − n` maximally mixed qubits.
pub fn brute_force_eve_distance(rho: &DensityMatrix, rho_prime: &DensityMatrix, m: usize, n: usize) -> Result<f64> {
    if rho.num_qubits() != n || rho_prime.num_qubits() != n {
        return Err(Error::contract("code states must have n qubits"));
    }
    let total = 2 * m * n;
    if total > ORACLE_QUBIT_LIMIT {
        return Err(Error::SizeLimit {
            requested: total,
            limit: ORACLE_QUBIT_LIMIT,
        });
    }
    let pad = DensityMatrix::maximally_mixed(total - n);
    let a = eve_state(&rho.tensor(&pad), m, n)?;
    let b = eve_state(&rho_prime.tensor(&pad), m, n)?;
    a.trace_distance(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::state_sim::PureState;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn delta_bound_examples() {
        assert_eq!(delta_bound(0, 1).unwrap(), 1.0);
        assert!(close(delta_bound(0, 2).unwrap(), 0.5f64.sqrt(), 1e-15));
        assert!(close(delta_bound(2, 256).unwrap(), 0.125, 1e-15));
        assert!(delta_bound(0, 0).is_err());
    }

    #[test]
    fn delta_proposed_examples() {
        let d = |r, m, n| delta_proposed(SecurityParams::new(r, m, n).unwrap());
        assert!(close(d(0, 1, 7), (1.0f64 / 128.0).sqrt(), 1e-12));
        assert!(close(d(0, 1, 1), 0.5f64.sqrt(), 1e-12));
        assert!(close(d(7, 1, 7), 1.0, 1e-12));
        // (2m)^n = 100^50 overflows u128 but not the log form
        let want = (2.0f64.powi(4) / 100f64.powi(50)).sqrt();
        assert!(close(d(4, 50, 50) / want, 1.0, 1e-9));
    }

    #[test]
    fn delta_previous_examples() {
        let p = |m, n| SecurityParams::new(0, m, n).unwrap();
        assert!(close(delta_previous(p(1, 3), StirlingMode::Exact), 0.5f64.sqrt(), 1e-12));
        assert!(close(delta_previous(p(2, 9), StirlingMode::Exact), (1.0f64 / 6.0).sqrt(), 1e-12));
        let want = (4.0 * std::f64::consts::PI / 256.0).sqrt();
        assert!(close(delta_previous(p(4, 4), StirlingMode::Stirling), want, 1e-12));
    }

    #[test]
    fn central_binomials() {
        assert_eq!(central_binomial(1), Some(2));
        assert_eq!(central_binomial(2), Some(6));
        assert_eq!(central_binomial(10), Some(184_756));
        assert!(central_binomial(100).is_none());
        for m in 1..40u64 {
            let exact = central_binomial(m).unwrap() as f64;
            assert!(close(log2_keys_previous(m), exact.log2(), 1e-9));
        }
    }

    #[test]
    fn report_key_counts() {
        let r = delta_report(SecurityParams::new(0, 2, 3).unwrap());
        assert_eq!(r.key_count_proposed, Some(64));
        assert_eq!(r.key_count_previous, Some(6));
        assert!(close(r.delta_proposed, delta_bound(0, 64).unwrap(), 1e-15));
    }

    #[test]
    fn threshold_examples() {
        assert!(close(threshold_n(2.0).unwrap(), 2.0, 1e-12));
        assert!(close(threshold_n(8.0).unwrap(), 4.0, 1e-12));
        assert!(close(threshold_n(1.0).unwrap(), 2.0, 1e-12));
        assert!(threshold_n(0.5).is_err());
    }

    #[test]
    fn region_small_squares() {
        let r5 = region_fraction(5, DEFAULT_RESOLUTION).unwrap();
        assert!(close(r5.fraction, 0.6617, 1e-3), "{}", r5.fraction);
        let r50 = region_fraction(50, DEFAULT_RESOLUTION).unwrap();
        assert!(close(r50.fraction, 0.8410, 1e-3), "{}", r50.fraction);
    }

    #[test]
    fn region_converges() {
        for n in [5, 50, 5000] {
            let a = region_fraction(n, 2e-3).unwrap().fraction;
            let b = region_fraction(n, 1e-3).unwrap().fraction;
            assert!((a - b).abs() < 1e-4);
        }
        assert!(region_fraction(1, 1e-3).is_err());
        assert!(region_fraction(5, 0.0).is_err());
    }

    #[test]
    fn lattice_mode_counts_points() {
        // threshold_n(m) >= 1.88 everywhere, so n = 1 never counts; for N = 2
        // m = 1, 2 give threshold 2, so no point has n > 2.
        let r = region_fraction_with_mode(2, 1.0, RegionMode::Lattice).unwrap();
        assert_eq!(r.fraction, 0.0);
        let r = region_fraction_with_mode(50, 1.0, RegionMode::Lattice).unwrap();
        assert!(r.fraction > 0.5 && r.fraction < 1.0);
    }

    #[test]
    fn eve_state_two_term_average() {
        let zero = DensityMatrix::from_pure(&PureState::zero());
        let half = DensityMatrix::maximally_mixed(1);
        let eve = eve_state(&zero.tensor(&half), 1, 1).unwrap();
        let want = DensityMatrix::mixture(&[zero.tensor(&half), half.tensor(&zero)]).unwrap();
        assert!(eve.trace_distance(&want).unwrap() < 1e-12);

        let mixed = DensityMatrix::maximally_mixed(2);
        assert!(eve_state(&mixed, 1, 1).unwrap().trace_distance(&mixed).unwrap() < 1e-12);
    }

    #[test]
    fn eve_state_has_unit_trace() {
        let mut rng = seeded(3);
        for _ in 0..5 {
            let psi = DensityMatrix::from_pure(&PureState::random(4, &mut rng));
            let eve = eve_state(&psi, 1, 2).unwrap();
            assert!((eve.trace().re - 1.0).abs() < 1e-12);
        }
        assert!(matches!(
            eve_state(&DensityMatrix::maximally_mixed(12), 3, 2),
            Err(Error::SizeLimit { .. })
        ));
    }

    #[test]
    fn brute_force_respects_bound() {
        let zero = DensityMatrix::from_pure(&PureState::zero());
        let one = DensityMatrix::from_pure(&PureState::one());
        let d = brute_force_eve_distance(&zero, &one, 1, 1).unwrap();
        // difference is (Z⊗I + I⊗Z)/4 with eigenvalues ±1/2, 0, 0
        assert!(close(d, 0.5, 1e-12), "{d}");
        assert!(d <= delta_bound(0, 2).unwrap());
        assert!(brute_force_eve_distance(&zero, &zero, 1, 1).unwrap() < 1e-12);
    }
}
