//! State sets and measurements for the semi-random OT protocol.
//!
//! The sender encodes her two-bit input as one of four two-qubit states,
//!
//! ```text
//! 00 -> |00>,  01 -> |++>,  11 -> |11>,  10 -> |-->
//! ```
//!
//! a cyclic-symmetric set generated by `R (x) R` with `R = |+><0| - |-><1|`.
//! This module builds that set and every measurement the protocol and its
//! attacks need: generic POVMs, the square-root measurement, the two-state
//! Helstrom discriminator, and the receiver's unambiguous-state-elimination
//! (USE) measurement, whose outcomes carry the star labels `0*`, `1*`, `*0`,
//! `*1` (star position = which bit stays unknown).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, qubit, ComplexMatrix, DensityMatrix, StateVector};
use crate::rng::SeedStream;

/// Completeness tolerance for POVMs.
pub const POVM_TOL: f64 = 1e-10;

/// The sender's two-bit input, in the cyclic order 00, 01, 11, 10.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AliceInput {
    #[serde(rename = "00")]
    X00,
    #[serde(rename = "01")]
    X01,
    #[serde(rename = "11")]
    X11,
    #[serde(rename = "10")]
    X10,
}

impl AliceInput {
    /// All inputs in cyclic (generator) order.
    pub const ALL: [AliceInput; 4] = [
        AliceInput::X00,
        AliceInput::X01,
        AliceInput::X11,
        AliceInput::X10,
    ];

    pub fn bits(self) -> (u8, u8) {
        match self {
            AliceInput::X00 => (0, 0),
            AliceInput::X01 => (0, 1),
            AliceInput::X11 => (1, 1),
            AliceInput::X10 => (1, 0),
        }
    }

    pub fn from_bits(x0: u8, x1: u8) -> Self {
        match (x0 & 1, x1 & 1) {
            (0, 0) => AliceInput::X00,
            (0, 1) => AliceInput::X01,
            (1, 1) => AliceInput::X11,
            _ => AliceInput::X10,
        }
    }

    /// Position under the cyclic generator: 00 -> 0, 01 -> 1, 11 -> 2, 10 -> 3.
    pub fn cyclic_index(self) -> usize {
        match self {
            AliceInput::X00 => 0,
            AliceInput::X01 => 1,
            AliceInput::X11 => 2,
            AliceInput::X10 => 3,
        }
    }

    pub fn from_cyclic_index(index: usize) -> Self {
        Self::ALL[index % 4]
    }

    pub fn label(self) -> &'static str {
        match self {
            AliceInput::X00 => "00",
            AliceInput::X01 => "01",
            AliceInput::X11 => "11",
            AliceInput::X10 => "10",
        }
    }

    /// Label of the encoded two-qubit state.
    pub fn encoded_label(self) -> &'static str {
        match self {
            AliceInput::X00 => "00",
            AliceInput::X01 => "++",
            AliceInput::X11 => "11",
            AliceInput::X10 => "--",
        }
    }

    /// Basis the receiver uses to test a declared state.
    pub fn test_basis(self) -> Basis {
        match self {
            AliceInput::X00 | AliceInput::X11 => Basis::Z,
            AliceInput::X01 | AliceInput::X10 => Basis::X,
        }
    }
}

impl std::fmt::Display for AliceInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Measurement basis for two-qubit product measurements.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Basis {
    Z,
    X,
}

/// A positive operator-valued measure with labeled outcomes.
#[derive(Debug, Clone)]
pub struct Povm {
    effects: Vec<(String, ComplexMatrix)>,
    dim: usize,
}

impl Povm {
    /// Validates completeness (sum = identity within 1e-10) and per-effect
    /// positivity (eigenvalues >= -1e-10).
    pub fn new(effects: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        if effects.is_empty() {
            return Err(Error::EmptyInput("povm effects"));
        }
        let dim = effects[0].1.rows();
        let mut sum = ComplexMatrix::zeros(dim, dim);
        for (_, op) in &effects {
            if op.rows() != dim || op.cols() != dim {
                return Err(Error::DimensionMismatch(op.rows(), dim));
            }
            let dev = op.hermiticity_deviation();
            if dev > 1e-10 {
                return Err(Error::NotHermitian(dev));
            }
            let (evals, _) = linalg::eig_hermitian(op)?;
            if let Some(&min) = evals.last() {
                if min < -1e-10 {
                    return Err(Error::NotPsd(min));
                }
            }
            sum = sum.add(op);
        }
        let dev = sum.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > POVM_TOL {
            return Err(Error::IncompletePovm(dev));
        }
        Ok(Self { effects, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.effects.iter().map(|(label, _)| label.as_str())
    }

    pub fn effects(&self) -> &[(String, ComplexMatrix)] {
        &self.effects
    }

    pub fn effect(&self, label: &str) -> Option<&ComplexMatrix> {
        self.effects
            .iter()
            .find(|(l, _)| l == label)
            .map(|(_, op)| op)
    }

    /// Born-rule outcome probabilities `Tr(Pi_i rho)`.
    pub fn outcome_probabilities(&self, state: &DensityMatrix) -> Result<Vec<f64>> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch(state.dim(), self.dim));
        }
        let probs: Vec<f64> = self
            .effects
            .iter()
            .map(|(_, op)| state.expectation(op).max(0.0))
            .collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidProbabilities(total));
        }
        Ok(probs)
    }
}

/// Draws one outcome label from a POVM applied to `state`.
pub fn sample_measurement(
    state: &DensityMatrix,
    povm: &Povm,
    stream: &mut SeedStream,
) -> Result<String> {
    let probs = povm.outcome_probabilities(state)?;
    let idx = stream.sample_index(&probs);
    Ok(povm.effects[idx].0.clone())
}

/// Which cyclic ordering the four symmetric states follow.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// Adjacent inputs (00, 01) overlap; opposite inputs (00, 11) are orthogonal.
    Case1,
    /// Opposite inputs overlap; adjacent inputs are orthogonal.
    Case2,
}

/// Four pure states cyclically generated by a unitary with `U^4 = 1`.
#[derive(Debug, Clone)]
pub struct SymmetricStateSet {
    states: [StateVector; 4],
    input_labels: [AliceInput; 4],
    generator: ComplexMatrix,
    case_tag: CaseTag,
}

impl SymmetricStateSet {
    /// `states[k]` must equal `generator^k |states[0]>` and `generator^4 = 1`,
    /// both within 1e-9.
    pub fn new(
        states: [StateVector; 4],
        input_labels: [AliceInput; 4],
        generator: ComplexMatrix,
        case_tag: CaseTag,
    ) -> Result<Self> {
        generator.require_unitary(1e-10)?;
        let dim = states[0].dim();
        let u2 = generator.mul(&generator);
        let u4 = u2.mul(&u2);
        let dev = u4.max_abs_diff(&ComplexMatrix::identity(dim));
        if dev > 1e-9 {
            return Err(Error::NotUnitary(dev));
        }
        for k in 0..4 {
            let mapped = states[k].apply(&generator)?;
            let next = &states[(k + 1) % 4];
            let dev: f64 = mapped
                .amplitudes()
                .iter()
                .zip(next.amplitudes())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if dev > 1e-9 {
                return Err(Error::NotSymmetricSet(dev));
            }
        }
        Ok(Self {
            states,
            input_labels,
            generator,
            case_tag,
        })
    }

    pub fn states_cyclic(&self) -> &[StateVector; 4] {
        &self.states
    }

    pub fn state_for_input(&self, input: AliceInput) -> &StateVector {
        let pos = self
            .input_labels
            .iter()
            .position(|&l| l == input)
            .expect("all four inputs are labeled");
        &self.states[pos]
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.generator
    }

    pub fn case_tag(&self) -> CaseTag {
        self.case_tag
    }

    pub fn density_states(&self) -> Vec<DensityMatrix> {
        self.states.iter().map(StateVector::to_density).collect()
    }
}

/// The protocol's encoding set {|00>, |++>, |11>, |-->} with generator `R (x) R`.
pub fn protocol_state_set() -> SymmetricStateSet {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // R = |+><0| - |-><1|
    let r = ComplexMatrix::from_real_rows(&[vec![h, -h], vec![h, h]]);
    let generator = linalg::kron(&r, &r);
    let states = [
        qubit::ket0().kron(&qubit::ket0()),
        qubit::ket_plus().kron(&qubit::ket_plus()),
        qubit::ket1().kron(&qubit::ket1()),
        qubit::ket_minus().kron(&qubit::ket_minus()),
    ];
    SymmetricStateSet::new(states, AliceInput::ALL, generator, CaseTag::Case1)
        .expect("protocol set is cyclic-symmetric")
}

/// Pairwise-overlap structure of a symmetric four-state set.
///
/// In cyclic order the matrix reads
///
/// ```text
/// [ 1   f   G   f* ]
/// [ f*  1   f   G  ]
/// [ G   f*  1   f  ]
/// [ f   G   f*  1  ]
/// ```
///
/// with `f` complex (adjacent overlap) and `G` real (opposite overlap).
#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub f: Complex64,
    pub g: f64,
    pub matrix: ComplexMatrix,
}

/// Extracts the Gram parameters of a symmetric set, verifying the pattern.
pub fn gram_matrix(set: &SymmetricStateSet) -> Result<GramMatrix> {
    let states = set.states_cyclic();
    let overlaps = ComplexMatrix::from_fn(4, 4, |i, j| states[i].inner(&states[j]));

    let f = overlaps[(0, 1)];
    let g_entry = overlaps[(0, 2)];
    let mut dev: f64 = g_entry.im.abs();
    for i in 0..4 {
        dev = dev.max((overlaps[(i, i)] - Complex64::new(1.0, 0.0)).norm());
        dev = dev.max((overlaps[(i, (i + 1) % 4)] - f).norm());
        dev = dev.max((overlaps[(i, (i + 2) % 4)] - g_entry).norm());
        dev = dev.max((overlaps[(i, (i + 3) % 4)] - f.conj()).norm());
    }
    if dev > 1e-9 {
        return Err(Error::NotSymmetricSet(dev));
    }
    Ok(GramMatrix {
        f,
        g: g_entry.re,
        matrix: overlaps,
    })
}

/// Square-root measurement for states with prior probabilities.
///
/// Effects are `Pi_i = rho^{-1/2} p_i rho_i rho^{-1/2}` with the inverse
/// square root taken on the support of `rho = sum p_i rho_i`; a `residual`
/// effect on the orthocomplement completes the POVM when the states do not
/// span the space. Outcome `i` is labeled by its decimal index.
pub fn srm_construct(states: &[DensityMatrix], priors: &[f64]) -> Result<Povm> {
    if states.is_empty() {
        return Err(Error::EmptyInput("srm states"));
    }
    if states.len() != priors.len() {
        return Err(Error::DimensionMismatch(states.len(), priors.len()));
    }
    let total: f64 = priors.iter().sum();
    if (total - 1.0).abs() > 1e-10 || priors.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidProbabilities(total));
    }
    let dim = states[0].dim();
    let mut average = ComplexMatrix::zeros(dim, dim);
    for (state, &p) in states.iter().zip(priors) {
        if state.dim() != dim {
            return Err(Error::DimensionMismatch(state.dim(), dim));
        }
        average = average.add(&state.matrix().scale(Complex64::new(p, 0.0)));
    }
    let inv_sqrt = linalg::matrix_inv_sqrt_psd(&average, 1e-12)?;

    let mut effects = Vec::with_capacity(states.len() + 1);
    let mut sum = ComplexMatrix::zeros(dim, dim);
    for (i, (state, &p)) in states.iter().zip(priors).enumerate() {
        let weighted = state.matrix().scale(Complex64::new(p, 0.0));
        let effect = inv_sqrt.mul(&weighted).mul(&inv_sqrt).hermitized();
        sum = sum.add(&effect);
        effects.push((i.to_string(), effect));
    }
    let residual = ComplexMatrix::identity(dim).sub(&sum).hermitized();
    if residual.max_abs() > POVM_TOL {
        effects.push(("residual".to_string(), residual));
    }
    Povm::new(effects)
}

/// Success probability of the square-root measurement, `sum_i p_i Tr(Pi_i rho_i)`.
pub fn srm_success_probability(states: &[DensityMatrix], priors: &[f64]) -> Result<f64> {
    let povm = srm_construct(states, priors)?;
    let mut success = 0.0;
    for (i, (state, &p)) in states.iter().zip(priors).enumerate() {
        let effect = povm
            .effect(&i.to_string())
            .expect("srm effect labels are indices");
        success += p * state.expectation(effect);
    }
    Ok(success)
}

/// Minimum-error discrimination of two states.
///
/// The optimal POVM projects onto the eigenspaces of `p0 rho0 - p1 rho1`:
/// non-negative eigenvalues report outcome `0`, negative ones outcome `1`
/// (zero eigenvalues may go either way without changing the success
/// probability; they are fixed to outcome `0`). The success probability is
/// `p1 + Tr[positive part of (p0 rho0 - p1 rho1)]`.
pub fn helstrom_discriminate(
    rho0: &DensityMatrix,
    rho1: &DensityMatrix,
    prior0: f64,
) -> Result<(Povm, f64)> {
    if rho0.dim() != rho1.dim() {
        return Err(Error::DimensionMismatch(rho0.dim(), rho1.dim()));
    }
    if !(0.0..=1.0).contains(&prior0) {
        return Err(Error::OutOfRange {
            what: "prior0",
            value: prior0,
            range: "[0, 1]",
        });
    }
    let prior1 = 1.0 - prior0;
    let dim = rho0.dim();
    let weighted_diff = rho0
        .matrix()
        .scale(Complex64::new(prior0, 0.0))
        .sub(&rho1.matrix().scale(Complex64::new(prior1, 0.0)));
    let (evals, vecs) = linalg::eig_hermitian(&weighted_diff)?;

    let mut pi0 = ComplexMatrix::zeros(dim, dim);
    for (j, &lambda) in evals.iter().enumerate() {
        if lambda >= -1e-12 {
            let col = vecs.column(j);
            pi0 = pi0.add(&ComplexMatrix::outer(&col, &col));
        }
    }
    let pi0 = pi0.hermitized();
    let pi1 = ComplexMatrix::identity(dim).sub(&pi0).hermitized();
    let success = prior0 * rho0.expectation(&pi0) + prior1 * rho1.expectation(&pi1);
    let povm = Povm::new(vec![("0".to_string(), pi0), ("1".to_string(), pi1)])?;
    Ok((povm, success))
}

/// Star-notation outcome labels of the USE measurement.
pub const USE_LABELS: [&str; 4] = ["0*", "1*", "*0", "*1"];

/// Decodes a star label into `(c, x_c)`: the star position gives which bit
/// stays unknown, the explicit digit is the learned bit's value.
pub fn use_outcome_meaning(label: &str) -> Option<(u8, u8)> {
    match label {
        "0*" => Some((0, 0)),
        "1*" => Some((0, 1)),
        "*0" => Some((1, 0)),
        "*1" => Some((1, 1)),
        _ => None,
    }
}

/// The receiver's unambiguous-state-elimination measurement: qubit 1 in the
/// Z basis, qubit 2 in the X basis.
///
/// Physical outcomes map to star labels as
///
/// ```text
/// |0+> -> 0*    |1-> -> 1*    |0-> -> *0    |1+> -> *1
/// ```
///
/// so `0+` and `1-` reveal the first bit (c = 0) while `0-` and `1+` reveal
/// the second (c = 1). On any state of the encoding set the revealed bit is
/// always correct.
pub fn use_measurement_povm() -> Povm {
    let z0 = qubit::ket0();
    let z1 = qubit::ket1();
    let xp = qubit::ket_plus();
    let xm = qubit::ket_minus();
    Povm::new(vec![
        ("0*".to_string(), z0.kron(&xp).projector()),
        ("1*".to_string(), z1.kron(&xm).projector()),
        ("*0".to_string(), z0.kron(&xm).projector()),
        ("*1".to_string(), z1.kron(&xp).projector()),
    ])
    .expect("USE projectors form a complete POVM")
}

/// Two-qubit product-basis measurement used in the protocol's test phase.
/// Outcome labels spell the observed product state, e.g. `01` or `+-`.
pub fn product_basis_povm(basis: Basis) -> Povm {
    let (kets, symbols): ([StateVector; 2], [char; 2]) = match basis {
        Basis::Z => ([qubit::ket0(), qubit::ket1()], ['0', '1']),
        Basis::X => ([qubit::ket_plus(), qubit::ket_minus()], ['+', '-']),
    };
    let mut effects = Vec::with_capacity(4);
    for (i, a) in kets.iter().enumerate() {
        for (j, b) in kets.iter().enumerate() {
            let label: String = [symbols[i], symbols[j]].iter().collect();
            effects.push((label, a.kron(b).projector()));
        }
    }
    Povm::new(effects).expect("product basis is complete")
}
