//! Optimal cheating strategies for both parties.
//!
//! **Receiver**: measure each payload pair with the minimum-error measurement
//! for the four encoded states. For this symmetric set that is the
//! square-root measurement, realized as a product of two single-qubit bases
//! rotated by pi/8, and it identifies both input bits with probability
//! `(1/4)(1 + 1/sqrt 2)^2 ~ 0.729`. The attack touches only the final
//! measurement, so it is undetectable.
//!
//! **Sender**: replace the product state by an entangled state
//! `a|0>|00> + b|1>|++> + c|2>|11> + d|3>|-->` whose branches are exactly the
//! legal encodings, so every test passes with certainty. After the receiver's
//! USE measurement, the sender's retained register holds one of two
//! conditional states depending on which bit the receiver learned; Helstrom
//! discrimination between them guesses `c` with probability
//! `(1/2)[1 + sqrt((|a|^2+|c|^2)(|b|^2+|d|^2))]`, maximized at 3/4.
//!
//! **Any framework protocol**: the sender runs two honest input branches in
//! superposition against a control qubit, steered onto the maximal-overlap
//! purifications of the two output states. The control qubit then
//! distinguishes the receiver's `c = 0` / `c = 1` outcomes exactly as well as
//! the trace distance of its conditionals, which no-signalling pins to the
//! fidelity of the two output states.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{
    self, kron, matrix_sqrt_psd, maximal_overlap_purifications, partial_trace_matrix,
    trace_distance, ComplexMatrix, DensityMatrix, StateVector,
};
use crate::optim;
use crate::protocol::GenericFramework;
use crate::rng::SeedStream;
use crate::states::{
    protocol_state_set, use_measurement_povm, use_outcome_meaning, AliceInput, Povm,
};

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Amplitudes of the sender's entangled cheating state over the four legal
/// encoding branches.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CheatStateParams {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl CheatStateParams {
    /// Validates `|a|^2 + |b|^2 + |c|^2 + |d|^2 = 1` within 1e-10.
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let norm_sq = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        if (norm_sq - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm_sq));
        }
        Ok(Self { a, b, c, d })
    }

    pub fn normalized(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let norm_sq = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        if norm_sq <= 0.0 {
            return Err(Error::NotNormalized(norm_sq));
        }
        let inv = Complex64::new(1.0 / norm_sq.sqrt(), 0.0);
        Self::new(a * inv, b * inv, c * inv, d * inv)
    }

    /// The canonical optimum `a = b = 1/sqrt 2`, `c = d = 0`: an equal
    /// superposition of the `|00>` and `|++>` branches.
    pub fn balanced_optimal() -> Self {
        Self::new(
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        )
        .expect("balanced amplitudes are normalized")
    }

    pub fn amplitudes(&self) -> [Complex64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// `|a|^2 + |c|^2`, the total weight on the branches whose first bit the
    /// receiver can learn... both weights drive the cheat probability.
    pub fn branch_weights(&self) -> (f64, f64) {
        (
            self.a.norm_sqr() + self.c.norm_sqr(),
            self.b.norm_sqr() + self.d.norm_sqr(),
        )
    }
}

/// The entangled cheating state on `A (x) B` (sender's four-level register
/// first, the two transmitted qubits second).
pub fn cheat_state(params: &CheatStateParams) -> StateVector {
    let set = protocol_state_set();
    let amps = params.amplitudes();
    let mut full = vec![Complex64::new(0.0, 0.0); 16];
    for (branch, input) in AliceInput::ALL.iter().enumerate() {
        let encoded = set.state_for_input(*input);
        for (i, amp) in encoded.amplitudes().iter().enumerate() {
            full[branch * 4 + i] += amps[branch] * amp;
        }
    }
    StateVector::new(full).expect("cheat state is normalized")
}

/// The two states the sender must tell apart, conditioned on which bit the
/// receiver learned: `rho0` for outcomes `{0*, 1*}` (c = 0), `rho1` for
/// `{0-, 1+}` (c = 1). Each arises with probability 1/2 for every parameter
/// choice, so the priors are always (1/2, 1/2).
pub fn alice_conditional_states(
    params: &CheatStateParams,
) -> Result<(DensityMatrix, DensityMatrix)> {
    let psi = cheat_state(params);
    let use_povm = use_measurement_povm();

    let mut rho0 = ComplexMatrix::zeros(4, 4);
    let mut rho1 = ComplexMatrix::zeros(4, 4);
    for (label, _) in use_povm.effects() {
        let (c, _) = use_outcome_meaning(label).expect("USE labels decode");
        let projected = project_bob_outcome(&psi, label)?;
        let outer = ComplexMatrix::outer(&projected, &projected);
        if c == 0 {
            rho0 = rho0.add(&outer);
        } else {
            rho1 = rho1.add(&outer);
        }
    }
    // each branch carries total probability 1/2
    let two = Complex64::new(2.0, 0.0);
    Ok((
        DensityMatrix::new(rho0.scale(two).hermitized())?,
        DensityMatrix::new(rho1.scale(two).hermitized())?,
    ))
}

/// Sub-normalized sender state `<outcome|_B psi>`, a 4-vector on `A`.
fn project_bob_outcome(psi: &StateVector, outcome: &str) -> Result<Vec<Complex64>> {
    let bob_vector = match outcome {
        "0*" => linalg::qubit::ket0().kron(&linalg::qubit::ket_plus()),
        "1*" => linalg::qubit::ket1().kron(&linalg::qubit::ket_minus()),
        "*0" => linalg::qubit::ket0().kron(&linalg::qubit::ket_minus()),
        "*1" => linalg::qubit::ket1().kron(&linalg::qubit::ket_plus()),
        other => return Err(Error::LabelMismatch(other.to_string())),
    };
    let amps = psi.amplitudes();
    let mut projected = vec![Complex64::new(0.0, 0.0); 4];
    for (a_idx, slot) in projected.iter_mut().enumerate() {
        for (b_idx, bob_amp) in bob_vector.amplitudes().iter().enumerate() {
            *slot += bob_amp.conj() * amps[a_idx * 4 + b_idx];
        }
    }
    Ok(projected)
}

/// Closed-form sender cheating probability
/// `(1/2)[1 + sqrt((|a|^2+|c|^2)(|b|^2+|d|^2))]`.
pub fn alice_cheat_probability(params: &CheatStateParams) -> f64 {
    let (w02, w13) = params.branch_weights();
    0.5 * (1.0 + (w02 * w13).sqrt())
}

/// Numerically maximizes the sender's cheating probability over the
/// normalized amplitude sphere (8 real parameters, multi-start Nelder-Mead).
///
/// The optimum 3/4 is reached exactly when the branch weights balance,
/// `|a|^2 + |c|^2 = |b|^2 + |d|^2 = 1/2`; the optimizer must find that
/// condition on its own, which doubles as a self-test of the closed form.
pub fn alice_cheat_optimize(seed: u64, restarts: usize) -> Result<(CheatStateParams, f64)> {
    let objective = |x: &[f64]| -> f64 {
        let params = CheatStateParams::normalized(
            Complex64::new(x[0], x[1]),
            Complex64::new(x[2], x[3]),
            Complex64::new(x[4], x[5]),
            Complex64::new(x[6], x[7]),
        );
        match params {
            Ok(p) => alice_cheat_probability(&p),
            Err(_) => f64::NEG_INFINITY,
        }
    };

    let mut stream = SeedStream::new(seed, "alice-cheat-optimizer");
    let mut best: Option<optim::OptimOutcome> = None;
    for _ in 0..restarts.max(1) {
        let start: Vec<f64> = (0..8).map(|_| stream.standard_normal()).collect();
        let outcome = optim::maximize_nelder_mead(&objective, &start, 0.4, 4_000, 1e-12);
        if best.as_ref().is_none_or(|b| outcome.value > b.value) {
            best = Some(outcome);
        }
    }
    let best = best.expect("at least one restart ran");
    if !best.converged && (best.value - 0.75).abs() > 1e-6 {
        return Err(Error::OptimizerStalled {
            iterations: best.iterations,
            best: best.value,
        });
    }
    let x = &best.point;
    let params = CheatStateParams::normalized(
        Complex64::new(x[0], x[1]),
        Complex64::new(x[2], x[3]),
        Complex64::new(x[4], x[5]),
        Complex64::new(x[6], x[7]),
    )?;
    Ok((params, best.value))
}

/// Monte Carlo estimate of a cheating strategy with its dispersion, the
/// matching closed form, and (for sender strategies) the probability of
/// being caught by the receiver's tests.
#[derive(Debug, Clone, Serialize)]
pub struct CheatReport {
    pub strategy: String,
    pub estimate: f64,
    pub sigma: f64,
    pub closed_form: Option<f64>,
    pub detection: Option<f64>,
}

/// One sampled payload round under the sender's entangled attack.
#[derive(Debug, Clone, Copy)]
pub struct AliceCheatRound {
    pub bob_c: u8,
    pub alice_guess: u8,
    pub guess_correct: bool,
    /// The sender's outcome pins the receiver's bit with certainty.
    pub certain: bool,
}

/// Joint sampler for the sender's attack: the receiver USE-measures his half
/// of the cheating state, the sender Helstrom-measures her register.
pub struct AliceCheatSampler {
    cells: Vec<AliceCheatRound>,
    probabilities: Vec<f64>,
    /// A-register amplitudes conditioned on each branch, for test rounds.
    params: CheatStateParams,
}

impl AliceCheatSampler {
    pub fn new(params: &CheatStateParams) -> Result<Self> {
        let psi = cheat_state(params);
        let (rho0, rho1) = alice_conditional_states(params)?;
        let (alice_povm, _) = crate::states::helstrom_discriminate(&rho0, &rho1, 0.5)?;
        let use_povm = use_measurement_povm();

        // joint distribution over (receiver outcome, sender outcome)
        let mut cells = Vec::with_capacity(8);
        let mut probabilities = Vec::with_capacity(8);
        let mut alice_outcome_mass = [0.0f64; 2]; // P(alice outcome)
        let mut alice_c0_mass = [0.0f64; 2]; // P(alice outcome AND c = 0)
        let mut raw = Vec::with_capacity(8);
        for (label, _) in use_povm.effects() {
            let (c, _) = use_outcome_meaning(label).expect("USE labels decode");
            let projected = project_bob_outcome(&psi, label)?;
            let p_bob: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
            if p_bob < 1e-15 {
                continue;
            }
            let conditional = DensityMatrix::new(
                ComplexMatrix::outer(&projected, &projected)
                    .scale(Complex64::new(1.0 / p_bob, 0.0))
                    .hermitized(),
            )?;
            for (guess_idx, (_, effect)) in alice_povm.effects().iter().enumerate() {
                let q = conditional.expectation(effect).max(0.0);
                let joint = p_bob * q;
                alice_outcome_mass[guess_idx] += joint;
                if c == 0 {
                    alice_c0_mass[guess_idx] += joint;
                }
                raw.push((c, guess_idx as u8, joint));
            }
        }
        // an outcome is certain when it only ever coincides with one value of c
        let certain = [0, 1].map(|k| {
            let mass = alice_outcome_mass[k];
            if mass < 1e-15 {
                return true;
            }
            let frac_c0 = alice_c0_mass[k] / mass;
            !(1e-12..=1.0 - 1e-12).contains(&frac_c0)
        });
        for (c, guess, joint) in raw {
            cells.push(AliceCheatRound {
                bob_c: c,
                alice_guess: guess,
                guess_correct: guess == c,
                certain: certain[guess as usize],
            });
            probabilities.push(joint);
        }
        Ok(Self {
            cells,
            probabilities,
            params: *params,
        })
    }

    pub fn sample(&self, stream: &mut SeedStream) -> AliceCheatRound {
        self.cells[stream.sample_index(&self.probabilities)]
    }

    /// One test round: the sender measures her register to pick a declaration,
    /// leaving the receiver exactly the declared encoding, so his test passes.
    /// Returns whether the receiver caught a mismatch.
    pub fn sample_test_round(
        &self,
        povm_z: &Povm,
        povm_x: &Povm,
        stream: &mut SeedStream,
    ) -> Result<bool> {
        let psi = cheat_state(&self.params);
        let branch_probs: Vec<f64> = self
            .params
            .amplitudes()
            .iter()
            .map(|z| z.norm_sqr())
            .collect();
        let branch = stream.sample_index(&branch_probs);
        let declared = AliceInput::ALL[branch];

        // receiver's conditional state given the sender's declaration
        let amps = psi.amplitudes();
        let mut bob_amps = vec![Complex64::new(0.0, 0.0); 4];
        let norm = branch_probs[branch].sqrt();
        for (i, slot) in bob_amps.iter_mut().enumerate() {
            *slot = amps[branch * 4 + i] / norm;
        }
        let bob_state = StateVector::new(bob_amps)?.to_density();
        let (_, pass) = crate::protocol::test_round(declared, &bob_state, povm_z, povm_x, stream)?;
        Ok(!pass)
    }
}

/// Simulates the sender's attack: `runs` payload rounds for the guess rate
/// and `runs` test rounds for the detection rate.
pub fn alice_cheat_simulate(
    params: &CheatStateParams,
    runs: usize,
    seed: u64,
) -> Result<CheatReport> {
    if runs == 0 {
        return Err(Error::EmptyInput("simulation runs"));
    }
    let sampler = AliceCheatSampler::new(params)?;
    let povm_z = crate::states::product_basis_povm(crate::states::Basis::Z);
    let povm_x = crate::states::product_basis_povm(crate::states::Basis::X);

    let sizes = crate::parallel::batch_sizes(runs);
    let hits: usize = crate::parallel::map_batches(crate::parallel::MC_BATCHES, |b| {
        let mut stream = SeedStream::derive(seed, "alice-cheat-payload", b as u64);
        (0..sizes[b])
            .filter(|_| sampler.sample(&mut stream).guess_correct)
            .count()
    })
    .into_iter()
    .sum();
    let detections: usize = crate::parallel::map_batches(crate::parallel::MC_BATCHES, |b| {
        let mut stream = SeedStream::derive(seed, "alice-cheat-test", b as u64);
        (0..sizes[b])
            .filter(|_| {
                sampler
                    .sample_test_round(&povm_z, &povm_x, &mut stream)
                    .expect("test round on a valid cheat state")
            })
            .count()
    })
    .into_iter()
    .sum();

    let estimate = hits as f64 / runs as f64;
    Ok(CheatReport {
        strategy: "alice-entangled".to_string(),
        estimate,
        sigma: (estimate * (1.0 - estimate) / runs as f64).sqrt(),
        closed_form: Some(alice_cheat_probability(params)),
        detection: Some(detections as f64 / runs as f64),
    })
}

/// Certainty structure of the sender's attack: how often her outcome pins the
/// receiver's bit exactly, and how accurate she is otherwise.
#[derive(Debug, Clone, Serialize)]
pub struct CertaintyStats {
    pub certain_fraction: f64,
    pub certain_accuracy: f64,
    pub uncertain_accuracy: f64,
    pub rounds: usize,
}

pub fn alice_certainty_stats(
    params: &CheatStateParams,
    runs: usize,
    seed: u64,
) -> Result<CertaintyStats> {
    let sampler = AliceCheatSampler::new(params)?;
    let mut stream = SeedStream::new(seed, "alice-certainty");
    let (mut certain, mut certain_hits, mut uncertain, mut uncertain_hits) = (0, 0, 0, 0);
    for _ in 0..runs {
        let round = sampler.sample(&mut stream);
        if round.certain {
            certain += 1;
            certain_hits += round.guess_correct as usize;
        } else {
            uncertain += 1;
            uncertain_hits += round.guess_correct as usize;
        }
    }
    Ok(CertaintyStats {
        certain_fraction: certain as f64 / runs as f64,
        certain_accuracy: if certain > 0 {
            certain_hits as f64 / certain as f64
        } else {
            f64::NAN
        },
        uncertain_accuracy: if uncertain > 0 {
            uncertain_hits as f64 / uncertain as f64
        } else {
            f64::NAN
        },
        rounds: runs,
    })
}

/// The receiver's minimum-error measurement bases, rotated by pi/8:
/// `zeta_0 = cos(pi/8)|0> + sin(pi/8)|1>`, `zeta_1 = sin(pi/8)|0> - cos(pi/8)|1>`
/// for the first qubit and
/// `xi_0 = cos(pi/8)|0> - sin(pi/8)|1>`, `xi_1 = sin(pi/8)|0> + cos(pi/8)|1>`
/// for the second.
pub fn bob_srm_bases() -> ([StateVector; 2], [StateVector; 2]) {
    let alpha = (std::f64::consts::PI / 8.0).cos();
    let beta = (std::f64::consts::PI / 8.0).sin();
    let re = |x: f64| Complex64::new(x, 0.0);
    let zeta = [
        StateVector::new(vec![re(alpha), re(beta)]).unwrap(),
        StateVector::new(vec![re(beta), re(-alpha)]).unwrap(),
    ];
    let xi = [
        StateVector::new(vec![re(alpha), re(-beta)]).unwrap(),
        StateVector::new(vec![re(beta), re(alpha)]).unwrap(),
    ];
    (zeta, xi)
}

/// Product form of the receiver's cheat measurement, outcomes labeled
/// `zeta{i}xi{j}`.
pub fn bob_product_povm() -> Povm {
    let (zeta, xi) = bob_srm_bases();
    let mut effects = Vec::with_capacity(4);
    for (i, z) in zeta.iter().enumerate() {
        for (j, x) in xi.iter().enumerate() {
            effects.push((format!("zeta{i}xi{j}"), z.kron(x).projector()));
        }
    }
    Povm::new(effects).expect("product bases form a complete POVM")
}

/// Outcome -> guessed input, frozen from the maximum-likelihood assignment;
/// [`derive_bob_guess_map`] recomputes it from scratch.
pub const BOB_GUESS_MAP: [(&str, AliceInput); 4] = [
    ("zeta0xi0", AliceInput::X00),
    ("zeta0xi1", AliceInput::X01),
    ("zeta1xi0", AliceInput::X10),
    ("zeta1xi1", AliceInput::X11),
];

/// For each product outcome, the encoding it most likely came from.
pub fn derive_bob_guess_map() -> Vec<(String, AliceInput)> {
    let set = protocol_state_set();
    let povm = bob_product_povm();
    let mut map = Vec::with_capacity(4);
    for (label, effect) in povm.effects() {
        let best = AliceInput::ALL
            .iter()
            .copied()
            .max_by(|&a, &b| {
                let pa = set.state_for_input(a).to_density().expectation(effect);
                let pb = set.state_for_input(b).to_density().expectation(effect);
                pa.partial_cmp(&pb).unwrap()
            })
            .unwrap();
        map.push((label.clone(), best));
    }
    map
}

/// One sampled round of the receiver's cheat.
#[derive(Debug, Clone, Copy)]
pub struct BobCheatRound {
    pub input: AliceInput,
    pub guess: AliceInput,
    pub guess_correct: bool,
}

/// Sampler for the receiver's product-measurement cheat against an honest
/// sender; per-round distributions are precomputed.
pub struct BobCheatSampler {
    /// outcome distribution per input (cyclic order), outcomes in POVM order
    outcome_probs: [[f64; 4]; 4],
    guesses: [AliceInput; 4],
}

impl BobCheatSampler {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        let set = protocol_state_set();
        let povm = bob_product_povm();
        let mut outcome_probs = [[0.0; 4]; 4];
        let mut guesses = [AliceInput::X00; 4];
        for (k, (label, effect)) in povm.effects().iter().enumerate() {
            guesses[k] = BOB_GUESS_MAP
                .iter()
                .find(|(l, _)| l == label)
                .expect("frozen guess map covers all outcomes")
                .1;
            for input in AliceInput::ALL {
                outcome_probs[input.cyclic_index()][k] =
                    set.state_for_input(input).to_density().expectation(effect);
            }
        }
        Self {
            outcome_probs,
            guesses,
        }
    }

    pub fn sample(&self, stream: &mut SeedStream) -> BobCheatRound {
        let input = AliceInput::ALL[stream.usize_below(4)];
        let outcome = stream.sample_index(&self.outcome_probs[input.cyclic_index()]);
        let guess = self.guesses[outcome];
        BobCheatRound {
            input,
            guess,
            guess_correct: guess == input,
        }
    }

    /// Probability of guessing the input exactly, averaged over inputs.
    pub fn success_probability(&self) -> f64 {
        let mut total = 0.0;
        for input in AliceInput::ALL {
            for (k, &guess) in self.guesses.iter().enumerate() {
                if guess == input {
                    total += 0.25 * self.outcome_probs[input.cyclic_index()][k];
                }
            }
        }
        total
    }
}

/// Simulates the receiver's cheat over honest payload rounds.
pub fn bob_cheat_simulate(runs: usize, seed: u64) -> Result<CheatReport> {
    if runs == 0 {
        return Err(Error::EmptyInput("simulation runs"));
    }
    let sampler = BobCheatSampler::new();
    let sizes = crate::parallel::batch_sizes(runs);
    let hits: usize = crate::parallel::map_batches(crate::parallel::MC_BATCHES, |b| {
        let mut stream = SeedStream::derive(seed, "bob-cheat", b as u64);
        (0..sizes[b])
            .filter(|_| sampler.sample(&mut stream).guess_correct)
            .count()
    })
    .into_iter()
    .sum();
    let estimate = hits as f64 / runs as f64;
    Ok(CheatReport {
        strategy: "bob-srm".to_string(),
        estimate,
        sigma: (estimate * (1.0 - estimate) / runs as f64).sqrt(),
        closed_form: Some(crate::bob_optimal_cheat()),
        detection: None,
    })
}

/// Outcome of the control-qubit attack on a framework protocol.
#[derive(Debug, Clone, Serialize)]
pub struct FrameworkAttackReport {
    /// Trace distance between the control qubit's conditionals on c = 0 / 1.
    pub distinguishability: f64,
    /// `(1 + distinguishability) / 2`.
    pub guess_probability: f64,
    /// Fidelity of the two attacked output states; equals the
    /// distinguishability by the no-signalling argument.
    pub output_fidelity: f64,
    /// Max deviation of the control marginal with vs without the receiver's
    /// measurement.
    pub no_signalling_deviation: f64,
    /// Max deviation of the receiver's marginal from the honest equal mixture
    /// of the two attacked outputs.
    pub bob_marginal_deviation: f64,
}

/// Runs the superposition attack on input pair `(first, second)` (which must
/// differ in exactly one bit): prepare maximal-overlap purifications of the
/// two honest outputs entangled with a control qubit, apply the receiver's
/// final POVM, and measure how well the control distinguishes `c = 0` from
/// `c = 1`.
pub fn framework_alice_attack(
    fw: &GenericFramework,
    pair: (AliceInput, AliceInput),
) -> Result<FrameworkAttackReport> {
    let (b0, b1) = (pair.0.bits(), pair.1.bits());
    let differing = (b0.0 ^ b1.0) + (b0.1 ^ b1.1);
    if differing != 1 {
        return Err(Error::InvalidInputPair(
            pair.0.label().to_string(),
            pair.1.label().to_string(),
        ));
    }

    let sigma_first = fw.run(pair.0)?;
    let sigma_second = fw.run(pair.1)?;
    let output_fidelity = linalg::fidelity(&sigma_first, &sigma_second)?;
    let (phi_first, phi_second) = maximal_overlap_purifications(&sigma_first, &sigma_second)?;

    // |Phi> = (|phi_first>|0>_D + |phi_second>|1>_D) / sqrt 2
    let d = sigma_first.dim();
    let purified_dim = phi_first.dim(); // d * d
    let mut amps = vec![Complex64::new(0.0, 0.0); purified_dim * 2];
    for k in 0..purified_dim {
        amps[2 * k] = phi_first.amplitudes()[k] * FRAC_1_SQRT_2;
        amps[2 * k + 1] = phi_second.amplitudes()[k] * FRAC_1_SQRT_2;
    }
    let joint = StateVector::new(amps)?.projector();
    let dims = [d, d, 2];

    // control-qubit conditionals per receiver outcome class
    let identity_rest = kron(&ComplexMatrix::identity(d), &ComplexMatrix::identity(2));
    let mut mu_c = [ComplexMatrix::zeros(2, 2), ComplexMatrix::zeros(2, 2)];
    let mut mu_total = ComplexMatrix::zeros(2, 2);
    for (label, effect) in fw.final_povm().effects() {
        let Some((c, _)) = use_outcome_meaning(label) else {
            continue;
        };
        let embedded = kron(effect, &identity_rest);
        // the effect acts only on traced systems, so sandwiching reduces to a
        // one-sided product under the partial trace
        let weighted = embedded.mul(&joint);
        let mu = partial_trace_matrix(&weighted, &dims, &[2])?;
        mu_c[c as usize] = mu_c[c as usize].add(&mu);
        mu_total = mu_total.add(&mu);
    }

    let normalize = |m: &ComplexMatrix| -> Result<DensityMatrix> {
        let tr = m.trace().re;
        DensityMatrix::new(m.scale(Complex64::new(1.0 / tr, 0.0)).hermitized())
    };
    let mu0 = normalize(&mu_c[0])?;
    let mu1 = normalize(&mu_c[1])?;
    let distinguishability = trace_distance(&mu0, &mu1)?;

    // no-signalling: summing over all outcomes must reproduce the unmeasured
    // control marginal
    let unmeasured = partial_trace_matrix(&joint, &dims, &[2])?;
    let no_signalling_deviation = mu_total.max_abs_diff(&unmeasured);

    // undetectability: the receiver's marginal equals the honest mixture
    let bob_marginal = partial_trace_matrix(&joint, &dims, &[0])?;
    let honest_mixture = sigma_first
        .matrix()
        .add(sigma_second.matrix())
        .scale(Complex64::new(0.5, 0.0));
    let bob_marginal_deviation = bob_marginal.max_abs_diff(&honest_mixture);

    Ok(FrameworkAttackReport {
        distinguishability,
        guess_probability: 0.5 * (1.0 + distinguishability),
        output_fidelity,
        no_signalling_deviation,
        bob_marginal_deviation,
    })
}

/// Canonical purification of a state (maximal overlap with itself), used by
/// annihilation checks on the framework outputs.
pub fn canonical_purification(rho: &DensityMatrix) -> Result<StateVector> {
    let sqrt = matrix_sqrt_psd(rho.matrix())?;
    let d = rho.dim();
    let mut amps = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            amps.push(sqrt[(i, j)]);
        }
    }
    StateVector::new(amps)
}
