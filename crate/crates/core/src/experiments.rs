//! The two concrete models: a single spin recorded first along z and then
//! along x, and a singlet pair whose spins are recorded along z and along a
//! direction rotated by θ toward x.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::branching::{born_weight, enumerate_histories};
use crate::ensemble::{build_ensemble, sample_counts};
use crate::error::{Error, Result};
use crate::gates;
use crate::schedule::{EventSchedule, RecordQubit, SplittingEvent, SystemSpec};
use crate::statevec::StateVector;

/// Integers whose square roots serve as record frequencies. Square roots of
/// distinct square-free integers are linearly independent over the
/// rationals, so no two record patterns share a phase sum.
const FREQUENCY_ROOTS: [f64; 16] = [
    1.0, 2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0, 31.0, 37.0, 41.0, 43.0, 47.0,
];

/// Frequencies for record qubits `e_0..e_3`: `(1, √2, √3, √5)`.
pub fn default_omegas() -> [f64; 4] {
    [1.0, 2f64.sqrt(), 3f64.sqrt(), 5f64.sqrt()]
}

pub const TOY_T1: f64 = 1.0;
pub const TOY_T2: f64 = 2.0;
pub const TOY_HORIZON: f64 = 3.0;

/// Qubits `[s, e_0, e_1, e_2, e_3]`, spin up with all records at 0. `U_1`
/// records z spin on `(e_0, e_1)` at `t = 1`; `U_2` records x spin on
/// `(e_2, e_3)` at `t = 2`; readout at `t = 3`.
pub fn build_toy() -> (StateVector, EventSchedule) {
    let records = default_omegas()
        .iter()
        .enumerate()
        .map(|(i, &omega)| RecordQubit { qubit: i + 1, omega })
        .collect();
    let events = vec![
        SplittingEvent::new(TOY_T1, gates::u1_z(), vec![0, 1, 2], vec![1, 2]),
        SplittingEvent::new(TOY_T2, gates::u2_x(), vec![0, 3, 4], vec![3, 4]),
    ];
    let schedule = EventSchedule::new(SystemSpec::new(5, records), events, TOY_HORIZON)
        .expect("toy schedule is valid");
    let psi0 = StateVector::from_bits("00000").expect("five qubits");
    (psi0, schedule)
}

/// Qubits per Bell subsystem: `[s_0, s_1, e_0, e_1, e_2, e_3]`.
pub const BELL_SUBSYSTEM_QUBITS: usize = 6;

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..TAU).contains(&theta) {
        return Err(Error::InvalidAngle(theta));
    }
    Ok(())
}

/// `(|up>|down> - |down>|up>)/√2 ⊗ |0000>`.
pub fn singlet_subsystem_state() -> StateVector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << BELL_SUBSYSTEM_QUBITS];
    amps[0b01_0000] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amps[0b10_0000] = Complex64::new(-FRAC_1_SQRT_2, 0.0);
    StateVector::from_amplitudes(BELL_SUBSYSTEM_QUBITS, amps).expect("six qubits")
}

/// `U_2·U_1` on one subsystem's local qubits: `U_1` on `(s_0, e_0, e_1)`,
/// the θ recorder on `(s_1, e_2, e_3)`. The two act on disjoint qubits.
pub fn bell_composite_unitary(theta: f64) -> crate::statevec::UnitaryMatrix {
    let u1 = gates::u1_z();
    let u2 = gates::u2_theta(theta);
    gates::compose(BELL_SUBSYSTEM_QUBITS, &[(&u1, &[0, 2, 3]), (&u2, &[1, 4, 5])])
        .expect("local register fits")
}

/// One subsystem: singlet pair, single composite event at `t = 1`, readout at `t = 2`.
pub fn build_bell_subsystem(theta: f64) -> Result<(StateVector, EventSchedule)> {
    build_bell_system(theta, 1)
}

/// `n` independent subsystems materialized side by side. Subsystem `i`
/// occupies qubits `6i..6i+6` and records at `t = i + 1`; readout at `t = n + 1`.
pub fn build_bell_system(theta: f64, n_subsystems: usize) -> Result<(StateVector, EventSchedule)> {
    check_theta(theta)?;
    let n_qubits = n_subsystems * BELL_SUBSYSTEM_QUBITS;
    if n_subsystems == 0 || n_qubits > crate::MAX_QUBITS {
        return Err(Error::InvalidArgument(format!(
            "cannot materialize {n_subsystems} Bell subsystems"
        )));
    }
    let u = bell_composite_unitary(theta);
    let mut records = Vec::new();
    let mut events = Vec::new();
    let mut psi0: Option<StateVector> = None;
    for i in 0..n_subsystems {
        let base = i * BELL_SUBSYSTEM_QUBITS;
        let rec: Vec<usize> = (base + 2..base + 6).collect();
        for (j, &q) in rec.iter().enumerate() {
            records.push(RecordQubit {
                qubit: q,
                omega: FREQUENCY_ROOTS[4 * i + j].sqrt(),
            });
        }
        events.push(SplittingEvent::new(
            (i + 1) as f64,
            u.clone(),
            (base..base + BELL_SUBSYSTEM_QUBITS).collect(),
            rec,
        ));
        let sub = singlet_subsystem_state();
        psi0 = Some(match psi0 {
            None => sub,
            Some(acc) => acc.tensor(&sub)?,
        });
    }
    let schedule = EventSchedule::new(
        SystemSpec::new(n_qubits, records),
        events,
        (n_subsystems + 1) as f64,
    )?;
    Ok((psi0.expect("at least one subsystem"), schedule))
}

/// `(e_1 - e_0)(e_3 - e_2)` for one subsystem's record bits.
pub fn bell_outcome(bits: &[u8]) -> i32 {
    assert_eq!(bits.len(), 4, "one subsystem has four record bits");
    let b: Vec<i32> = bits.iter().map(|&x| i32::from(x)).collect();
    (b[1] - b[0]) * (b[3] - b[2])
}

/// Exact correlation `Σ_h w(h)·outcome(h)` over all candidate histories of
/// one subsystem, with `w` from the history-operator route.
pub fn bell_exact(theta: f64) -> Result<f64> {
    let (psi0, schedule) = build_bell_subsystem(theta)?;
    enumerate_histories(&schedule)?
        .iter()
        .map(|h| Ok(born_weight(&psi0, &schedule, h)? * f64::from(bell_outcome(&h.bits()))))
        .sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellConfig {
    pub theta: f64,
    pub n_subsystems: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub theta: f64,
    pub n: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub exact: f64,
    pub seed: u64,
}

impl CorrelationResult {
    /// `|estimate - exact| <= k·stderr`.
    pub fn within(&self, k: f64) -> bool {
        (self.estimate - self.exact).abs() <= k * self.stderr
    }
}

/// Samples `n_subsystems` independent subsystem histories from the
/// one-subsystem ensemble and averages the outcome.
pub fn bell_correlation(config: &BellConfig) -> Result<CorrelationResult> {
    check_theta(config.theta)?;
    let n = config.n_subsystems;
    if n == 0 {
        return Err(Error::InvalidArgument("need at least one subsystem".into()));
    }
    let (psi0, schedule) = build_bell_subsystem(config.theta)?;
    let entries = build_ensemble(&schedule, &psi0)?;
    let counts = sample_counts(&entries, n, config.seed)?;
    let (mut sum, mut sum_sq) = (0i64, 0i64);
    for (entry, &c) in entries.iter().zip(&counts) {
        let o = i64::from(bell_outcome(&entry.history.bits()));
        sum += o * c as i64;
        sum_sq += o * o * c as i64;
    }
    let nf = n as f64;
    let estimate = sum as f64 / nf;
    let exact = -config.theta.cos();
    let model_var = (1.0 - exact * exact).max(0.0);
    let empirical_var = (sum_sq as f64 / nf - estimate * estimate).max(0.0);
    let var = if model_var > 0.0 { model_var } else { empirical_var };
    Ok(CorrelationResult {
        theta: config.theta,
        n,
        estimate,
        stderr: (var / nf).sqrt(),
        exact,
        seed: config.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branching::{decompose, History};
    use crate::ensemble::replay;
    use std::f64::consts::PI;

    #[test]
    fn toy_state_after_first_event() {
        let (psi0, schedule) = build_toy();
        let s = schedule.evolve_window(&psi0, 0.0, 1.5).unwrap();
        // spin up, records (0,1,0,0), up to the phase of |e_1=1, t>
        let idx = 0b00100;
        assert!((s.amplitude(idx).norm() - 1.0).abs() < 1e-14);
        let parts = schedule.event_unitary_record(&schedule.events()[0], &s).unwrap();
        let nonzero: Vec<_> = parts.iter().filter(|(_, v)| v.norm_sqr() > 1e-20).collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(nonzero[0].0.to_string(), "(0,1)");
    }

    #[test]
    fn toy_state_after_second_event() {
        let (psi0, schedule) = build_toy();
        let t = 2.25;
        let s = schedule.evolve_window(&psi0, 0.0, t).unwrap();
        // ±1/2 on |s>|0,1,0,1> and |s>|0,1,1,0>, each carrying the phase of its records
        let w = default_omegas();
        let phase = |bits: [u8; 4]| {
            let e: f64 = bits.iter().zip(w).map(|(&b, w)| f64::from(b) * w).sum();
            Complex64::from_polar(1.0, -t * e)
        };
        let expected = [
            (0b00101, 0.5 * phase([0, 1, 0, 1])),
            (0b10101, 0.5 * phase([0, 1, 0, 1])),
            (0b00110, 0.5 * phase([0, 1, 1, 0])),
            (0b10110, -0.5 * phase([0, 1, 1, 0])),
        ];
        let mut reference = vec![Complex64::new(0.0, 0.0); 32];
        for (i, a) in expected {
            reference[i] = a;
        }
        let reference = StateVector::from_vec(reference).unwrap();
        assert!(s.max_abs_diff(&reference).unwrap() < 1e-14);
    }

    #[test]
    fn bell_branch_weights_follow_half_angle_formula() {
        for k in 0..=12 {
            let theta = k as f64 * PI / 12.0;
            let (psi0, schedule) = build_bell_subsystem(theta).unwrap();
            let s2 = (theta / 2.0).sin().powi(2) / 2.0;
            let c2 = (theta / 2.0).cos().powi(2) / 2.0;
            for (label, expected) in [("0101", s2), ("0110", c2), ("1001", c2), ("1010", s2)] {
                let h = History::parse(&schedule, label).unwrap();
                let w = born_weight(&psi0, &schedule, &h).unwrap();
                assert!((w - expected).abs() < 1e-12, "θ={theta} {label}: {w} vs {expected}");
            }
        }
    }

    #[test]
    fn bell_zero_angle_has_two_branches() {
        let (psi0, schedule) = build_bell_subsystem(0.0).unwrap();
        let branches = decompose(&schedule, &psi0).unwrap();
        let labels: Vec<String> = branches.iter().map(|b| b.history.to_string()).collect();
        assert_eq!(labels, ["(0,1,1,0)", "(1,0,0,1)"]);
        for b in &branches {
            assert!((b.weight - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn bell_branch_amplitude_sign() {
        let theta = 1.1;
        let (psi0, schedule) = build_bell_subsystem(theta).unwrap();
        let branches = decompose(&schedule, &psi0).unwrap();
        let b = branches.iter().find(|b| b.history.to_string() == "(1,0,0,1)").unwrap();
        // −(1/√2)cos(θ/2)|down>|up>_θ|1001>, records phase exp(-i t (ω0 + ω3))
        let w = default_omegas();
        let phase = Complex64::from_polar(1.0, -2.0 * (w[0] + w[3]));
        let (up_theta, _) = gates::theta_basis(theta);
        let amp = -FRAC_1_SQRT_2 * (theta / 2.0).cos();
        // s_0 = down (1); s_1 in |up>_θ; records 1001
        let i_up = 0b10_1001;
        let i_down = 0b11_1001;
        assert!((b.vector.amplitude(i_up) - amp * up_theta[0] * phase).norm() < 1e-14);
        assert!((b.vector.amplitude(i_down) - amp * up_theta[1] * phase).norm() < 1e-14);
    }

    #[test]
    fn bell_exact_values() {
        assert!((bell_exact(0.0).unwrap() + 1.0).abs() < 1e-12);
        assert!(bell_exact(PI / 2.0).unwrap().abs() < 1e-12);
        assert!((bell_exact(PI / 3.0).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn bell_sampled_histories_replay() {
        for theta in [0.0, 0.7, PI / 2.0, PI] {
            let (psi0, schedule) = build_bell_subsystem(theta).unwrap();
            for entry in build_ensemble(&schedule, &psi0).unwrap() {
                let report = replay(&entry, &schedule).unwrap();
                assert!(report.is_faithful(1e-10), "{report:?}");
            }
        }
    }

    #[test]
    fn bell_endpoints_are_exact() {
        for (theta, value) in [(0.0, -1.0), (PI, 1.0)] {
            let r = bell_correlation(&BellConfig { theta, n_subsystems: 1000, seed: 5 }).unwrap();
            assert_eq!(r.estimate, value);
            assert_eq!(r.stderr, 0.0);
            assert!(r.within(4.0));
        }
    }

    #[test]
    fn bell_rejects_bad_config() {
        assert!(matches!(build_bell_subsystem(TAU), Err(Error::InvalidAngle(_))));
        assert!(matches!(build_bell_subsystem(-0.1), Err(Error::InvalidAngle(_))));
        assert!(bell_correlation(&BellConfig { theta: 0.5, n_subsystems: 0, seed: 1 }).is_err());
        assert!(build_bell_system(0.5, 5).is_err());
    }

    #[test]
    fn outcome_mapping() {
        assert_eq!(bell_outcome(&[0, 1, 0, 1]), 1);
        assert_eq!(bell_outcome(&[0, 1, 1, 0]), -1);
        assert_eq!(bell_outcome(&[1, 0, 0, 1]), -1);
        assert_eq!(bell_outcome(&[1, 0, 1, 0]), 1);
        assert_eq!(bell_outcome(&[0, 0, 1, 0]), 0);
    }
}
