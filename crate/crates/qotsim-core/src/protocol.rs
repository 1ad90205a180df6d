//! The semi-random OT protocol engine.
//!
//! One protocol session transmits `N` encoded two-qubit states. The receiver
//! tests a random subset against the sender's declarations (Z x Z basis for
//! declared `|00>`/`|11>`, X x X for `|++>`/`|-->`, abort on any mismatch)
//! and measures the rest with the USE measurement to obtain `(c, x_c)`.
//! Each surviving payload round is one instance of semi-random OT; the
//! classical reductions in this module turn those instances into random OT
//! and chosen-input 1-2 OT without changing either party's cheating odds.
//!
//! The module also hosts the generic round-based framework (initial state,
//! per-round sender/receiver unitaries, final four-outcome POVM) that the
//! analytic bounds quantify over, plus the probabilistic mix of this protocol
//! with the trivial send-both-bits protocol.

use std::collections::BTreeSet;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::cheating;
use crate::error::{Error, Result};
use crate::linalg::{kron, partial_trace, ComplexMatrix, DensityMatrix};
use crate::rng::SeedStream;
use crate::states::{
    product_basis_povm, protocol_state_set, sample_measurement, use_measurement_povm,
    use_outcome_meaning, AliceInput, Povm,
};

/// Session parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProtocolConfig {
    pub total_rounds: usize,
    pub test_count: usize,
    pub seed: u64,
}

impl ProtocolConfig {
    /// Default test budget: `floor(sqrt(N))` rounds.
    pub fn new(total_rounds: usize, seed: u64) -> Result<Self> {
        let test_count = (total_rounds as f64).sqrt().floor() as usize;
        Self::with_test_count(total_rounds, test_count.max(1), seed)
    }

    pub fn with_test_count(total_rounds: usize, test_count: usize, seed: u64) -> Result<Self> {
        if total_rounds < 4 {
            return Err(Error::InvalidConfig(format!(
                "need at least 4 rounds, got {total_rounds}"
            )));
        }
        if test_count == 0 || test_count >= total_rounds {
            return Err(Error::InvalidConfig(format!(
                "test_count {test_count} must be in 1..{total_rounds}"
            )));
        }
        Ok(Self {
            total_rounds,
            test_count,
            seed,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundRole {
    Test,
    Payload,
}

/// The receiver's payload-round output: which bit he learned and its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BobOutput {
    pub c: u8,
    pub y: u8,
}

/// One round of a protocol session.
#[derive(Debug, Clone, Serialize)]
pub struct RoundRecord {
    pub index: usize,
    pub alice_input: AliceInput,
    pub role: RoundRole,
    /// Star label for payload rounds, product-basis label for test rounds;
    /// absent when the session aborted before this round was measured.
    pub bob_outcome: Option<String>,
    pub bob_output: Option<BobOutput>,
    pub abort: bool,
    pub abort_reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AbortInfo {
    pub round_index: usize,
    pub reason: String,
}

/// Complete record of one protocol session.
#[derive(Debug, Clone, Serialize)]
pub struct Transcript {
    pub config: ProtocolConfig,
    pub rounds: Vec<RoundRecord>,
    pub abort: Option<AbortInfo>,
}

impl Transcript {
    pub fn aborted(&self) -> bool {
        self.abort.is_some()
    }

    /// Measured payload rounds as `(alice_input, bob_output)` pairs.
    pub fn payload_outputs(&self) -> impl Iterator<Item = (AliceInput, BobOutput)> + '_ {
        self.rounds.iter().filter_map(|r| {
            if r.role == RoundRole::Payload {
                r.bob_output.map(|out| (r.alice_input, out))
            } else {
                None
            }
        })
    }

    /// Each measured payload round as a standalone semi-random OT run.
    pub fn semi_random_runs(&self) -> Vec<SemiRandomRun> {
        self.payload_outputs()
            .map(|(input, out)| SemiRandomRun {
                alice: input.bits(),
                bob: out,
                aborted: false,
            })
            .collect()
    }

    /// Line-delimited JSON export, one record per round.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for record in &self.rounds {
            serde_json::to_writer(&mut w, record).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// One test round: the receiver measures `state` in the basis fixed by the
/// declaration and compares against the declared product state.
pub fn test_round(
    declared: AliceInput,
    state: &DensityMatrix,
    povm_z: &Povm,
    povm_x: &Povm,
    stream: &mut SeedStream,
) -> Result<(String, bool)> {
    let povm = match declared.test_basis() {
        crate::states::Basis::Z => povm_z,
        crate::states::Basis::X => povm_x,
    };
    let outcome = sample_measurement(state, povm, stream)?;
    let pass = outcome == declared.encoded_label();
    Ok((outcome, pass))
}

/// Runs one honest session: tests first (abort on the first mismatch), then
/// USE measurements on the surviving payload rounds.
pub fn run_honest(config: ProtocolConfig) -> Result<Transcript> {
    let set = protocol_state_set();
    let use_povm = use_measurement_povm();
    let povm_z = product_basis_povm(crate::states::Basis::Z);
    let povm_x = product_basis_povm(crate::states::Basis::X);

    let mut alice_stream = SeedStream::new(config.seed, "alice-input");
    let mut select_stream = SeedStream::new(config.seed, "bob-test-select");
    let mut test_stream = SeedStream::new(config.seed, "bob-test");
    let mut use_stream = SeedStream::new(config.seed, "bob-use");

    let inputs: Vec<AliceInput> = (0..config.total_rounds)
        .map(|_| AliceInput::ALL[alice_stream.usize_below(4)])
        .collect();
    let test_set: BTreeSet<usize> = select_stream
        .choose_indices(config.total_rounds, config.test_count)
        .into_iter()
        .collect();

    let mut rounds: Vec<RoundRecord> = inputs
        .iter()
        .enumerate()
        .map(|(index, &alice_input)| RoundRecord {
            index,
            alice_input,
            role: if test_set.contains(&index) {
                RoundRole::Test
            } else {
                RoundRole::Payload
            },
            bob_outcome: None,
            bob_output: None,
            abort: false,
            abort_reason: None,
        })
        .collect();

    let mut abort = None;
    for &index in &test_set {
        let declared = inputs[index];
        let state = set.state_for_input(declared).to_density();
        let (outcome, pass) = test_round(declared, &state, &povm_z, &povm_x, &mut test_stream)?;
        rounds[index].bob_outcome = Some(outcome.clone());
        if !pass {
            let reason = format!("test outcome {outcome} contradicts declared {declared}");
            rounds[index].abort = true;
            rounds[index].abort_reason = Some(reason.clone());
            abort = Some(AbortInfo {
                round_index: index,
                reason,
            });
            break;
        }
    }

    if abort.is_none() {
        for index in 0..config.total_rounds {
            if test_set.contains(&index) {
                continue;
            }
            let input = inputs[index];
            let rho = set.state_for_input(input).to_density();
            let outcome = sample_measurement(&rho, &use_povm, &mut use_stream)?;
            let (c, y) = use_outcome_meaning(&outcome).expect("USE labels decode");
            rounds[index].bob_outcome = Some(outcome);
            rounds[index].bob_output = Some(BobOutput { c, y });
        }
    }

    Ok(Transcript {
        config,
        rounds,
        abort,
    })
}

/// Subsystem layout of a framework: receiver's kept system `B`, the shuttled
/// message system `M`, and the sender's ancilla `A`, ordered `B (x) M (x) A`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FrameworkDims {
    pub b: usize,
    pub m: usize,
    pub a: usize,
}

impl FrameworkDims {
    pub fn total(&self) -> usize {
        self.b * self.m * self.a
    }

    pub fn bm(&self) -> usize {
        self.b * self.m
    }
}

/// Round-based description of a semi-random OT protocol: an initial state on
/// `B (x) M (x) A`, per-round sender unitaries on `M (x) A` (one per two-bit
/// input), per-round receiver unitaries on `B (x) M`, and a final four-outcome
/// POVM on `B (x) M` with the star-labeled outcomes.
#[derive(Debug, Clone)]
pub struct GenericFramework {
    dims: FrameworkDims,
    initial_state: DensityMatrix,
    alice_unitaries: Vec<[ComplexMatrix; 4]>,
    bob_unitaries: Vec<ComplexMatrix>,
    final_povm: Povm,
}

impl GenericFramework {
    /// Checks dimensions, unitarity (1e-10) and POVM completeness. Honest
    /// correctness is a separate, stronger check: [`Self::verify_correctness`].
    pub fn new(
        dims: FrameworkDims,
        initial_state: DensityMatrix,
        alice_unitaries: Vec<[ComplexMatrix; 4]>,
        bob_unitaries: Vec<ComplexMatrix>,
        final_povm: Povm,
    ) -> Result<Self> {
        if initial_state.dim() != dims.total() {
            return Err(Error::DimensionMismatch(initial_state.dim(), dims.total()));
        }
        if alice_unitaries.len() != bob_unitaries.len() || alice_unitaries.is_empty() {
            return Err(Error::InvalidConfig(
                "need one sender and one receiver unitary per round".into(),
            ));
        }
        let ma = dims.m * dims.a;
        for family in &alice_unitaries {
            for u in family {
                if u.rows() != ma {
                    return Err(Error::DimensionMismatch(u.rows(), ma));
                }
                u.require_unitary(1e-10)?;
            }
        }
        for v in &bob_unitaries {
            if v.rows() != dims.bm() {
                return Err(Error::DimensionMismatch(v.rows(), dims.bm()));
            }
            v.require_unitary(1e-10)?;
        }
        if final_povm.dim() != dims.bm() {
            return Err(Error::DimensionMismatch(final_povm.dim(), dims.bm()));
        }
        for label in ["0*", "1*", "*0", "*1"] {
            if final_povm.effect(label).is_none() {
                return Err(Error::LabelMismatch(format!(
                    "final POVM lacks outcome {label}"
                )));
            }
        }
        Ok(Self {
            dims,
            initial_state,
            alice_unitaries,
            bob_unitaries,
            final_povm,
        })
    }

    pub fn dims(&self) -> FrameworkDims {
        self.dims
    }

    pub fn rounds(&self) -> usize {
        self.bob_unitaries.len()
    }

    pub fn final_povm(&self) -> &Povm {
        &self.final_povm
    }

    /// `I_B (x) U_MA`.
    fn embed_alice(&self, u: &ComplexMatrix) -> ComplexMatrix {
        kron(&ComplexMatrix::identity(self.dims.b), u)
    }

    /// `V_BM (x) I_A`.
    fn embed_bob(&self, v: &ComplexMatrix) -> ComplexMatrix {
        kron(v, &ComplexMatrix::identity(self.dims.a))
    }

    /// The receiver's honest pre-measurement state for one sender input:
    /// compose all rounds, then trace out the sender's ancilla.
    pub fn run(&self, input: AliceInput) -> Result<DensityMatrix> {
        let idx = input.cyclic_index();
        let mut state = self.initial_state.clone();
        for round in 0..self.rounds() {
            let u = self.embed_alice(&self.alice_unitaries[round][idx]);
            state = state.conjugate(&u)?;
            let v = self.embed_bob(&self.bob_unitaries[round]);
            state = state.conjugate(&v)?;
        }
        partial_trace(&state, &[self.dims.b, self.dims.m, self.dims.a], &[0, 1])
    }

    /// Honest-correctness conditions: for every final outcome and input,
    /// `Tr(Pi^{j*} sigma^{kl}) = (1/2) [j = k]` and
    /// `Tr(Pi^{*j} sigma^{kl}) = (1/2) [j = l]`, within `tol`.
    pub fn verify_correctness(&self, tol: f64) -> Result<()> {
        for input in AliceInput::ALL {
            let sigma = self.run(input)?;
            let (x0, x1) = input.bits();
            for (label, effect) in self.final_povm.effects() {
                let Some((c, value)) = use_outcome_meaning(label) else {
                    continue;
                };
                let truth = if c == 0 { x0 } else { x1 };
                let expected = if value == truth { 0.5 } else { 0.0 };
                let got = sigma.expectation(effect);
                if (got - expected).abs() > tol {
                    return Err(Error::InvalidConfig(format!(
                        "correctness violated: Tr(Pi^{label} sigma^{input}) = {got}, expected {expected}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Composes the framework rounds for `input` and returns the receiver's
/// reduced output state.
pub fn run_framework(fw: &GenericFramework, input: AliceInput) -> Result<DensityMatrix> {
    fw.run(input)
}

/// The example protocol as a one-round framework: trivial `B` and `A`, the
/// two encoded qubits as `M`, sender unitaries = powers of the cyclic
/// generator on `|00>`, receiver unitary = identity, final POVM = USE.
pub fn example_protocol_framework() -> GenericFramework {
    let set = protocol_state_set();
    let generator = set.generator().clone();
    let g2 = generator.mul(&generator);
    let g3 = g2.mul(&generator);
    let fw = GenericFramework::new(
        FrameworkDims { b: 1, m: 4, a: 1 },
        set.state_for_input(AliceInput::X00).to_density(),
        vec![[ComplexMatrix::identity(4), generator, g2, g3]],
        vec![ComplexMatrix::identity(4)],
        use_measurement_povm(),
    )
    .expect("example framework is well-formed");
    fw.verify_correctness(1e-9)
        .expect("example framework satisfies honest correctness");
    fw
}

/// Encodes a two-bit value `(x0, x1)` as the basis index `2 x0 + x1`.
fn two_bit_index(x0: u8, x1: u8) -> usize {
    (2 * (x0 & 1) + (x1 & 1)) as usize
}

/// Unitary on `C (x) D` (two four-level registers) implementing
/// `|x>_C |w>_D -> |x>_C |w xor z xor x>_D`.
///
/// With `D` blank this defers the sender's output measurement in the
/// random-OT masking step: instead of measuring her register `C` and sending
/// the masked bits classically, she writes them coherently into `D`. By
/// no-signalling the receiver's view is identical either way, which is what
/// makes the framework description general.
pub fn deferred_masking_unitary(z0: u8, z1: u8) -> ComplexMatrix {
    let z = two_bit_index(z0, z1);
    let mut u = ComplexMatrix::zeros(16, 16);
    for x in 0..4usize {
        for w in 0..4usize {
            let target = w ^ z ^ x;
            u[(x * 4 + target, x * 4 + w)] = Complex64::new(1.0, 0.0);
        }
    }
    u
}

/// One semi-random OT instance: the sender's two input bits and the
/// receiver's `(c, y)` output.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SemiRandomRun {
    pub alice: (u8, u8),
    pub bob: BobOutput,
    pub aborted: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OtMode {
    SemiRandom,
    RandomOt,
    OneTwoOt,
}

/// Outputs of one OT instance at any stage of the reduction chain.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OtOutputs {
    pub mode: OtMode,
    /// `(x0, x1)` for random OT, `(z0, z1)` for 1-2 OT.
    pub alice_bits: Option<(u8, u8)>,
    /// `(c, y)` for random OT, `(b, y')` for 1-2 OT.
    pub bob_bits: Option<(u8, u8)>,
    pub aborted: bool,
}

/// Semi-random OT already is random OT once the sender's uniformly random
/// inputs are read as outputs; this just relabels (aborts propagate).
pub fn reduce_to_random_ot(run: &SemiRandomRun) -> OtOutputs {
    if run.aborted {
        return OtOutputs {
            mode: OtMode::RandomOt,
            alice_bits: None,
            bob_bits: None,
            aborted: true,
        };
    }
    OtOutputs {
        mode: OtMode::RandomOt,
        alice_bits: Some(run.alice),
        bob_bits: Some((run.bob.c, run.bob.y)),
        aborted: false,
    }
}

/// Builds chosen-input 1-2 OT from a random OT run.
///
/// The receiver announces `d = b xor c`; the sender replies with the masked
/// bits `e_i = z_i xor x_{i xor d}`, and the receiver outputs
/// `y' = e_b xor y = z_b xor x_c xor y`, which equals `z_b` when honest.
/// Neither party's cheating probability changes: guessing `(z0, z1)` from the
/// masks is guessing `(x0, x1)`, and guessing `b` given the announced `d` is
/// guessing `c`.
pub fn reduce_to_one_two_ot(
    rot: &OtOutputs,
    alice_inputs: (u8, u8),
    bob_choice: u8,
) -> Result<OtOutputs> {
    if rot.mode != OtMode::RandomOt {
        return Err(Error::InvalidConfig(format!(
            "expected a random OT run, got {:?}",
            rot.mode
        )));
    }
    let b = bob_choice & 1;
    if rot.aborted {
        return Ok(OtOutputs {
            mode: OtMode::OneTwoOt,
            alice_bits: None,
            bob_bits: None,
            aborted: true,
        });
    }
    let (x0, x1) = rot.alice_bits.expect("non-aborted run has outputs");
    let (c, y) = rot.bob_bits.expect("non-aborted run has outputs");
    let (z0, z1) = (alice_inputs.0 & 1, alice_inputs.1 & 1);

    let d = b ^ c;
    let e0 = z0 ^ if d == 0 { x0 } else { x1 };
    let e1 = z1 ^ if d == 0 { x1 } else { x0 };
    let e_b = if b == 0 { e0 } else { e1 };
    let y_prime = e_b ^ y;

    Ok(OtOutputs {
        mode: OtMode::OneTwoOt,
        alice_bits: Some((z0, z1)),
        bob_bits: Some((b, y_prime)),
        aborted: false,
    })
}

/// Analytic average cheating probabilities when the example protocol is
/// chosen with probability `p` and the trivial protocol otherwise.
pub fn combined_analytic(p: f64) -> (f64, f64) {
    let alice = 0.75 * p + 0.5 * (1.0 - p);
    let bob = crate::bob_optimal_cheat() * p + (1.0 - p);
    (alice, bob)
}

/// The mixing probability that equalizes both parties' average cheating
/// probabilities, with the common value. In closed form `p = 4/(7 - 2 sqrt 2)`
/// and the value is `1/2 + p/4`, about 0.7397.
pub fn equalizing_mix_probability() -> (f64, f64) {
    let p = 4.0 / (7.0 - 2.0 * std::f64::consts::SQRT_2);
    let value = 0.5 + p / 4.0;
    (p, value)
}

/// Monte Carlo and analytic cheat rates for the mixed protocol.
#[derive(Debug, Clone, Serialize)]
pub struct CombinedReport {
    pub p: f64,
    pub runs: usize,
    pub analytic_alice: f64,
    pub analytic_bob: f64,
    pub mc_alice: f64,
    pub mc_alice_sigma: f64,
    pub mc_bob: f64,
    pub mc_bob_sigma: f64,
}

/// Simulates the weak-coin-flip mix: with probability `p` one round of the
/// example protocol under the respective optimal cheat, otherwise the trivial
/// protocol (sender learns nothing, receiver learns everything). The coin is
/// modeled as an ideal fair randomizer drawn from the shared seed.
pub fn run_combined(p: f64, runs: usize, seed: u64) -> Result<CombinedReport> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p,
            range: "[0, 1]",
        });
    }
    if runs == 0 {
        return Err(Error::EmptyInput("combined runs"));
    }

    let alice_sampler =
        cheating::AliceCheatSampler::new(&cheating::CheatStateParams::balanced_optimal())?;
    let bob_sampler = cheating::BobCheatSampler::new();

    let sizes = crate::parallel::batch_sizes(runs);
    let per_batch: Vec<(usize, usize)> =
        crate::parallel::map_batches(crate::parallel::MC_BATCHES, |batch| {
            let b = batch as u64;
            let mut coin_alice = SeedStream::derive(seed, "combined-coin-alice", b);
            let mut coin_bob = SeedStream::derive(seed, "combined-coin-bob", b);
            let mut alice_stream = SeedStream::derive(seed, "combined-alice-cheat", b);
            let mut bob_stream = SeedStream::derive(seed, "combined-bob-cheat", b);
            let mut trivial_stream = SeedStream::derive(seed, "combined-trivial", b);

            let mut alice_hits = 0usize;
            let mut bob_hits = 0usize;
            for _ in 0..sizes[batch] {
                if coin_alice.bernoulli(p) {
                    let round = alice_sampler.sample(&mut alice_stream);
                    if round.guess_correct {
                        alice_hits += 1;
                    }
                } else if trivial_stream.bernoulli(0.5) {
                    // trivial protocol: the sender's guess of c is a coin toss
                    alice_hits += 1;
                }
                if coin_bob.bernoulli(p) {
                    if bob_sampler.sample(&mut bob_stream).guess_correct {
                        bob_hits += 1;
                    }
                } else {
                    // trivial protocol hands the receiver both bits
                    bob_hits += 1;
                }
            }
            (alice_hits, bob_hits)
        });
    let alice_hits: usize = per_batch.iter().map(|(a, _)| a).sum();
    let bob_hits: usize = per_batch.iter().map(|(_, b)| b).sum();

    let n = runs as f64;
    let mc_alice = alice_hits as f64 / n;
    let mc_bob = bob_hits as f64 / n;
    let (analytic_alice, analytic_bob) = combined_analytic(p);
    Ok(CombinedReport {
        p,
        runs,
        analytic_alice,
        analytic_bob,
        mc_alice,
        mc_alice_sigma: (mc_alice * (1.0 - mc_alice) / n).sqrt(),
        mc_bob,
        mc_bob_sigma: (mc_bob * (1.0 - mc_bob) / n).sqrt(),
    })
}
