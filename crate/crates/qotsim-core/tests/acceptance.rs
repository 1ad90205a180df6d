//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line (run with `cargo test --test acceptance -- --nocapture` to
//! see them all).

use std::time::Instant;

use num_complex::Complex64;
use qotsim_core::cheating::{
    alice_certainty_stats, alice_cheat_probability, alice_cheat_simulate, bob_cheat_simulate,
    canonical_purification, framework_alice_attack, CheatStateParams,
};
use qotsim_core::experiment::{self, bundled};
use qotsim_core::linalg::{
    self, fidelity, kron, trace_distance, ComplexMatrix, DensityMatrix, StateVector,
};
use qotsim_core::protocol::{
    self, equalizing_mix_probability, example_protocol_framework, reduce_to_one_two_ot,
    reduce_to_random_ot, run_combined,
};
use qotsim_core::rng::{random_density, random_state_vector, SeedStream};
use qotsim_core::states::{
    gram_matrix, helstrom_discriminate, protocol_state_set, srm_construct, srm_success_probability,
    AliceInput,
};
use qotsim_core::{bob_optimal_cheat, bounds};

/// Collects named checks for one criterion and prints a single verdict line.
struct Criterion {
    number: u32,
    name: &'static str,
    failures: Vec<String>,
    checks: usize,
}

impl Criterion {
    fn new(number: u32, name: &'static str) -> Self {
        Self {
            number,
            name,
            failures: Vec::new(),
            checks: 0,
        }
    }

    fn check(&mut self, description: &str, ok: bool) {
        self.checks += 1;
        if !ok {
            self.failures.push(description.to_string());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!(
                "criterion {:>2} PASS - {} ({} checks)",
                self.number, self.name, self.checks
            );
        } else {
            println!(
                "criterion {:>2} FAIL - {}: {}",
                self.number,
                self.name,
                self.failures.join("; ")
            );
            panic!(
                "criterion {} failed: {}",
                self.number,
                self.failures.join("; ")
            );
        }
    }
}

fn five_sigma(p: f64, n: usize) -> f64 {
    5.0 * (p * (1.0 - p) / n as f64).sqrt()
}

#[test]
fn acceptance_01_bob_optimal_cheat() {
    let mut c = Criterion::new(1, "receiver SRM cheat rate and dual formula routes");
    let start = Instant::now();

    let runs = 100_000;
    let report = bob_cheat_simulate(runs, 20_240).unwrap();
    let target = bob_optimal_cheat();
    c.check(
        &format!("simulated {} vs {target} (5 sigma)", report.estimate),
        (report.estimate - target).abs() < five_sigma(target, runs),
    );

    let set = protocol_state_set();
    let via_construction = srm_success_probability(&set.density_states(), &[0.25; 4]).unwrap();
    let gram = gram_matrix(&set).unwrap();
    let via_gram = bounds::srm_success_from_gram(gram.f, gram.g).unwrap();
    c.check(
        &format!("construction route {via_construction} vs Gram route {via_gram} (1e-10)"),
        (via_construction - via_gram).abs() < 1e-10,
    );
    c.check(
        "closed form (3 + 2 sqrt 2)/8 matches both routes",
        (via_construction - target).abs() < 1e-10,
    );

    let elapsed = start.elapsed();
    c.check(
        &format!("runtime {elapsed:?} < 10 s"),
        elapsed.as_secs_f64() < 10.0,
    );
    c.finish();
}

#[test]
fn acceptance_02_alice_optimal_cheat() {
    let mut c = Criterion::new(2, "sender entangled cheat rate, detection, closed form");

    let runs = 100_000;
    let report = alice_cheat_simulate(&CheatStateParams::balanced_optimal(), runs, 77).unwrap();
    c.check(
        &format!("simulated {} vs 0.75 (5 sigma)", report.estimate),
        (report.estimate - 0.75).abs() < five_sigma(0.75, runs),
    );
    c.check(
        &format!("detection rate {:?} exactly 0", report.detection),
        report.detection == Some(0.0),
    );

    let mut stream = SeedStream::new(4, "acceptance-c7");
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let params = CheatStateParams::normalized(
            qotsim_core::rng::random_complex(&mut stream),
            qotsim_core::rng::random_complex(&mut stream),
            qotsim_core::rng::random_complex(&mut stream),
            qotsim_core::rng::random_complex(&mut stream),
        )
        .unwrap();
        let closed = alice_cheat_probability(&params);
        let (rho0, rho1) = qotsim_core::cheating::alice_conditional_states(&params).unwrap();
        let (_, numeric) = helstrom_discriminate(&rho0, &rho1, 0.5).unwrap();
        worst = worst.max((closed - numeric).abs());
    }
    c.check(
        &format!("closed form vs Helstrom on 200 random parameter sets, worst {worst:.2e} (1e-9)"),
        worst < 1e-9,
    );
    c.finish();
}

#[test]
fn acceptance_03_alice_certainty_structure() {
    let mut c = Criterion::new(
        3,
        "sender certainty fraction 1/4 and conditional accuracy 2/3",
    );
    let runs = 100_000;
    let stats = alice_certainty_stats(&CheatStateParams::balanced_optimal(), runs, 99).unwrap();
    c.check(
        &format!(
            "certain fraction {} vs 0.25 (5 sigma)",
            stats.certain_fraction
        ),
        (stats.certain_fraction - 0.25).abs() < five_sigma(0.25, runs),
    );
    c.check(
        &format!("certain rounds always correct ({})", stats.certain_accuracy),
        (stats.certain_accuracy - 1.0).abs() < 1e-12,
    );
    let uncertain_rounds = (runs as f64 * 0.75) as usize;
    c.check(
        &format!(
            "uncertain accuracy {} vs 2/3 (5 sigma)",
            stats.uncertain_accuracy
        ),
        (stats.uncertain_accuracy - 2.0 / 3.0).abs() < five_sigma(2.0 / 3.0, uncertain_rounds),
    );
    c.finish();
}

#[test]
fn acceptance_04_bounds() {
    let mut c = Criterion::new(4, "minimax values and the pure-symmetric bound at F = 1/2");
    let (f_general, v_general) = bounds::minimax_general();
    c.check(
        &format!("general minimax = ({f_general}, {v_general}), expected (1/3, 2/3) exactly"),
        f_general == 1.0 / 3.0 && v_general == 2.0 / 3.0,
    );
    let (_, v_pure) = bounds::minimax_pure_symmetric();
    c.check(
        &format!("pure-symmetric minimax {v_pure} in [0.748, 0.750]"),
        (0.748..=0.750).contains(&v_pure),
    );
    let at_half = bounds::bob_bound_pure_symmetric(0.5).unwrap();
    let exact = (3.0 + 2.0 * std::f64::consts::SQRT_2) / 8.0;
    c.check(
        &format!("bound at F = 1/2: {at_half} vs (3 + 2 sqrt 2)/8 (1e-12)"),
        (at_half - exact).abs() < 1e-12,
    );
    c.finish();
}

#[test]
fn acceptance_05_combined_protocol() {
    let mut c = Criterion::new(5, "equalized protocol mix at p ~ 0.9589");
    let (p, value) = equalizing_mix_probability();
    let (alice, bob) = protocol::combined_analytic(p);
    c.check(
        &format!("analytic balance |{alice} - {bob}| < 1e-6"),
        (alice - bob).abs() < 1e-6,
    );
    c.check(
        &format!("value {value} ~ 0.7397"),
        (value - 0.7397).abs() < 1e-4,
    );
    c.check("value below 0.749", value < 0.749);
    c.check("value above 2/3", value > 2.0 / 3.0);

    let runs = 100_000;
    let report = run_combined(p, runs, 555).unwrap();
    c.check(
        &format!(
            "Monte Carlo sender {} vs {} (5 sigma)",
            report.mc_alice, report.analytic_alice
        ),
        (report.mc_alice - report.analytic_alice).abs() < five_sigma(report.analytic_alice, runs),
    );
    c.check(
        &format!(
            "Monte Carlo receiver {} vs {} (5 sigma)",
            report.mc_bob, report.analytic_bob
        ),
        (report.mc_bob - report.analytic_bob).abs() < five_sigma(report.analytic_bob, runs),
    );
    c.finish();
}

#[test]
fn acceptance_06_reduction_chain() {
    let mut c = Criterion::new(6, "semi-random -> random OT -> 1-2 OT preserves everything");

    // honest correctness through the full chain, 10^4 instances
    let config = protocol::ProtocolConfig::new(10_200, 606).unwrap();
    let transcript = protocol::run_honest(config).unwrap();
    let runs = transcript.semi_random_runs();
    c.check("at least 10^4 payload instances", runs.len() >= 10_000);
    let mut z_stream = SeedStream::new(606, "acceptance-z-choices");
    let mut failures = 0usize;
    for run in runs.iter().take(10_000) {
        let rot = reduce_to_random_ot(run);
        let z = (z_stream.bernoulli(0.5) as u8, z_stream.bernoulli(0.5) as u8);
        let b = z_stream.bernoulli(0.5) as u8;
        let ot = reduce_to_one_two_ot(&rot, z, b).unwrap();
        let (bb, y_prime) = ot.bob_bits.unwrap();
        let z_b = if bb == 0 { z.0 } else { z.1 };
        if y_prime != z_b {
            failures += 1;
        }
    }
    c.check(
        &format!("y' = z_b with zero failures over 10^4 runs (got {failures})"),
        failures == 0,
    );

    // receiver's cheat estimate is identical before and after the reduction:
    // his guess of (z0, z1) is his guess of (x0, x1) shifted by the masks
    let sampler = qotsim_core::cheating::BobCheatSampler::new();
    let mut bob_stream = SeedStream::new(607, "acceptance-bob-reduction");
    let mut mask_stream = SeedStream::new(607, "acceptance-bob-masks");
    let n = 20_000;
    let (mut semi_hits, mut ot_hits) = (0usize, 0usize);
    for _ in 0..n {
        let round = sampler.sample(&mut bob_stream);
        let (x0, x1) = round.input.bits();
        let (g0, g1) = round.guess.bits();
        if round.guess_correct {
            semi_hits += 1;
        }
        let z = (
            mask_stream.bernoulli(0.5) as u8,
            mask_stream.bernoulli(0.5) as u8,
        );
        // the sender publishes masks e_i = z_i xor x_i (d = 0 branch); the
        // receiver converts his (x0, x1) guess into a (z0, z1) guess
        let masks = (z.0 ^ x0, z.1 ^ x1);
        let z_guess = (masks.0 ^ g0, masks.1 ^ g1);
        if z_guess == z {
            ot_hits += 1;
        }
    }
    c.check(
        &format!("receiver cheat preserved exactly ({semi_hits} vs {ot_hits} hits)"),
        semi_hits == ot_hits,
    );
    let rate = ot_hits as f64 / n as f64;
    c.check(
        &format!(
            "reduced-level cheat rate {rate} vs {} (5 sigma)",
            bob_optimal_cheat()
        ),
        (rate - bob_optimal_cheat()).abs() < five_sigma(bob_optimal_cheat(), n),
    );

    // sender's cheat: guessing b = d xor c succeeds exactly when the guess of
    // c does, for any announced d
    let alice_sampler =
        qotsim_core::cheating::AliceCheatSampler::new(&CheatStateParams::balanced_optimal())
            .unwrap();
    let mut alice_stream = SeedStream::new(608, "acceptance-alice-reduction");
    let mut d_stream = SeedStream::new(608, "acceptance-alice-d");
    let (mut c_hits, mut b_hits) = (0usize, 0usize);
    for _ in 0..n {
        let round = alice_sampler.sample(&mut alice_stream);
        if round.guess_correct {
            c_hits += 1;
        }
        let d = d_stream.bernoulli(0.5) as u8;
        let b = d ^ round.bob_c;
        let b_guess = d ^ round.alice_guess;
        if b_guess == b {
            b_hits += 1;
        }
    }
    c.check(
        &format!("sender cheat preserved exactly ({c_hits} vs {b_hits} hits)"),
        c_hits == b_hits,
    );
    c.finish();
}

#[test]
fn acceptance_07_framework_attack() {
    let mut c = Criterion::new(7, "control-qubit attack on the example framework");
    let fw = example_protocol_framework();
    let report = framework_alice_attack(&fw, (AliceInput::X00, AliceInput::X01)).unwrap();
    c.check(
        &format!(
            "distinguishability {} vs 0.5 (1e-8)",
            report.distinguishability
        ),
        (report.distinguishability - 0.5).abs() < 1e-8,
    );
    c.check(
        &format!(
            "receiver marginal deviation {:.2e} (1e-10)",
            report.bob_marginal_deviation
        ),
        report.bob_marginal_deviation < 1e-10,
    );
    c.check(
        &format!(
            "no-signalling deviation {:.2e} (1e-10)",
            report.no_signalling_deviation
        ),
        report.no_signalling_deviation < 1e-10,
    );
    c.finish();
}

#[test]
fn acceptance_08_circuit_preparation() {
    let mut c = Criterion::new(8, "published circuit parameters prepare the cheating state");
    let start = Instant::now();
    let report = qotsim_core::circuit::verify_reference_preparation(50, 42).unwrap();
    let elapsed = start.elapsed();
    c.check(
        &format!(
            "E = {:.12} >= 1 - 1e-6 (1 - E = {:.2e})",
            report.e, report.one_minus_e
        ),
        report.e >= 1.0 - 1e-6,
    );
    c.check(
        &format!(
            "reduced single-qubit spectra deviation {:.2e} (1e-5)",
            report.spectrum_deviation
        ),
        report.spectrum_deviation < 1e-5,
    );
    c.check(
        &format!("runtime {elapsed:?} < 60 s including multi-start"),
        elapsed.as_secs_f64() < 60.0,
    );
    c.finish();
}

#[test]
fn acceptance_09_experiment_reproduction() {
    let mut c = Criterion::new(9, "bundled count tables reproduce the published analysis");

    c.check(
        "transcription checksums verify",
        bundled::verify_checksums().is_ok(),
    );

    // every printed relative-frequency cell, by table, in row order
    let printed: [(&str, &[&str]); 4] = [
        (
            "correct_transfer",
            &[
                "0.52(1)",
                "0.48(1)",
                "0.002(1)",
                "0.002(1)",
                "0.51(1)",
                "0.0012(9)",
                "0.48(1)",
                "0.004(2)",
                "0.004(2)",
                "0.48(1)",
                "0.009(2)",
                "0.51(1)",
                "0.000(0)",
                "0.0006(5)",
                "0.49(1)",
                "0.51(1)",
            ],
        ),
        (
            "honest_alarms",
            &[
                "0.998(1)",
                "0.002(1)",
                "0.0006(5)",
                "0.000(0)",
                "0.000(0)",
                "0.000(0)",
                "0.009(2)",
                "0.991(2)",
                "0.973(4)",
                "0.0006(5)",
                "0.026(4)",
                "0.0006(5)",
                "0.003(1)",
                "0.005(2)",
                "0.005(2)",
                "0.986(3)",
            ],
        ),
        (
            "bob_cheating",
            &[
                "0.060(6)", "0.857(9)", "0.003(1)", "0.080(7)", "0.65(1)", "0.119(8)", "0.19(1)",
                "0.034(5)", "0.030(4)", "0.118(7)", "0.179(8)", "0.67(1)", "0.121(7)", "0.025(4)",
                "0.72(1)", "0.134(8)",
            ],
        ),
        (
            "alice_cheating",
            &[
                "0.53(1)", "0.22(1)", "0.010(3)", "0.25(1)", "0.52(1)", "0.009(2)", "0.017(3)",
                "0.019(3)", "0.42(1)", "0.004(2)", "0.007(2)", "0.002(1)",
            ],
        ),
    ];
    for (table_id, cells) in printed {
        let table = bundled::table(table_id).unwrap();
        let rows = experiment::relative_frequencies(&table).unwrap();
        c.check(
            &format!("{table_id} has {} cells", cells.len()),
            rows.len() == cells.len(),
        );
        let mut all_within = true;
        for (row, cell) in rows.iter().zip(cells) {
            let open = cell.find('(').unwrap();
            let value: f64 = cell[..open].parse().unwrap();
            let decimals = cell[..open].split('.').nth(1).map_or(0, str::len);
            let unit = 10f64.powi(-(decimals as i32));
            if (row.f - value).abs() > unit + 1e-12 {
                all_within = false;
            }
        }
        c.check(
            &format!("{table_id}: every f cell within one printed unit"),
            all_within,
        );
    }

    let headlines: [(&str, &str, &str); 5] = [
        ("correct_transfer", "honest_transfer_success", "0.9943(9)"),
        ("honest_alarms", "false_alarm_rate", "0.013(1)"),
        ("bob_cheating", "bob_cheat_rate", "0.718(5)"),
        ("alice_cheating", "alice_guess_rate", "0.77(1)"),
        ("alice_cheating", "alice_detection_rate", "0.059(6)"),
    ];
    for (table_id, name, expected) in headlines {
        let table = bundled::table(table_id).unwrap();
        let report = experiment::analyze_table(&table).unwrap();
        let stat = report.aggregates.iter().find(|s| s.name == name).unwrap();
        c.check(
            &format!("{name} = {} (published {expected})", stat.display),
            stat.display == expected,
        );
    }
    c.finish();
}

#[test]
fn acceptance_10_property_suite() {
    let mut c = Criterion::new(10, "randomized property suite (>= 100 instances each)");
    let mut stream = SeedStream::new(1_000, "acceptance-properties");

    // POVM completeness for 100 constructed measurements
    let mut completeness_ok = true;
    for k in 0..100 {
        let dim = 4;
        let povm = if k % 2 == 0 {
            let states: Vec<DensityMatrix> = (0..4)
                .map(|_| random_state_vector(dim, &mut stream).to_density())
                .collect();
            srm_construct(&states, &[0.25; 4]).unwrap()
        } else {
            let rho0 = random_density(dim, 2, &mut stream);
            let rho1 = random_density(dim, 3, &mut stream);
            helstrom_discriminate(&rho0, &rho1, stream.uniform())
                .unwrap()
                .0
        };
        let sum = povm
            .effects()
            .iter()
            .fold(ComplexMatrix::zeros(dim, dim), |acc, (_, op)| acc.add(op));
        if sum.max_abs_diff(&ComplexMatrix::identity(dim)) > 1e-10 {
            completeness_ok = false;
        }
    }
    c.check(
        "POVM completeness within 1e-10 (100 instances)",
        completeness_ok,
    );

    // fidelity symmetry
    let mut worst_asym: f64 = 0.0;
    for _ in 0..100 {
        let rho = random_density(4, 1 + stream.usize_below(4), &mut stream);
        let sigma = random_density(4, 1 + stream.usize_below(4), &mut stream);
        let f1 = fidelity(&rho, &sigma).unwrap();
        let f2 = fidelity(&sigma, &rho).unwrap();
        worst_asym = worst_asym.max((f1 - f2).abs());
    }
    c.check(
        &format!("fidelity symmetry, worst asymmetry {worst_asym:.2e} (1e-10)"),
        worst_asym < 1e-10,
    );

    // Fuchs - van de Graaf sandwich, with tightness for pure states
    let mut sandwich_ok = true;
    let mut pure_tight_ok = true;
    for _ in 0..100 {
        let rho = random_density(4, 1 + stream.usize_below(4), &mut stream);
        let sigma = random_density(4, 1 + stream.usize_below(4), &mut stream);
        let f = fidelity(&rho, &sigma).unwrap();
        let t = trace_distance(&rho, &sigma).unwrap();
        if 1.0 - f > t + 1e-9 || t > (1.0 - f * f).max(0.0).sqrt() + 1e-9 {
            sandwich_ok = false;
        }
        let psi = random_state_vector(4, &mut stream).to_density();
        let phi = random_state_vector(4, &mut stream).to_density();
        let fp = fidelity(&psi, &phi).unwrap();
        let tp = trace_distance(&psi, &phi).unwrap();
        if (tp - (1.0 - fp * fp).max(0.0).sqrt()).abs() > 1e-8 {
            pure_tight_ok = false;
        }
    }
    c.check("Fuchs-van de Graaf sandwich (100 instances)", sandwich_ok);
    c.check("pure-state upper bound tight within 1e-8", pure_tight_ok);

    // annihilation: a zero-probability effect kills every purification
    let mut annihilation_ok = true;
    for _ in 0..100 {
        let dim = 4;
        let rho = random_density(dim, 2, &mut stream);
        // a rank-1 projector inside the kernel of rho
        let (evals, vecs) = linalg::eig_hermitian(rho.matrix()).unwrap();
        let Some(kernel_col) = (0..dim).find(|&j| evals[j].abs() < 1e-12) else {
            continue;
        };
        let kernel_vec = vecs.column(kernel_col);
        let effect = ComplexMatrix::outer(&kernel_vec, &kernel_vec);
        if rho.expectation(&effect).abs() > 1e-12 {
            continue;
        }
        let purification = canonical_purification(&rho).unwrap();
        let embedded = kron(&effect, &ComplexMatrix::identity(dim));
        let image = embedded.mul_vec(purification.amplitudes());
        let norm: f64 = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            annihilation_ok = false;
        }
    }
    // plus the protocol's own zero-probability outcomes
    let fw = example_protocol_framework();
    for input in AliceInput::ALL {
        let sigma = fw.run(input).unwrap();
        let purification = canonical_purification(&sigma).unwrap();
        for (_, effect) in fw.final_povm().effects() {
            if sigma.expectation(effect) > 1e-12 {
                continue;
            }
            let embedded = kron(effect, &ComplexMatrix::identity(4));
            let image = embedded.mul_vec(purification.amplitudes());
            let norm: f64 = image.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm > 1e-9 {
                annihilation_ok = false;
            }
        }
    }
    c.check(
        "annihilation of zero-probability outcomes (100+ instances)",
        annihilation_ok,
    );

    // SRM success is bounded below by the pairwise-fidelity expression
    let mut srm_bound_ok = true;
    for _ in 0..100 {
        // random symmetric-ish ensembles: four pure states with moderate overlaps
        let base = random_state_vector(4, &mut stream);
        let states: Vec<DensityMatrix> = (0..4)
            .map(|_| {
                let mut amps: Vec<Complex64> = base.amplitudes().to_vec();
                for a in amps.iter_mut() {
                    *a += Complex64::new(
                        0.6 * stream.standard_normal(),
                        0.6 * stream.standard_normal(),
                    );
                }
                StateVector::normalized(amps).unwrap().to_density()
            })
            .collect();
        let success = srm_success_probability(&states, &[0.25; 4]).unwrap();
        let mut fidelity_sum = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    fidelity_sum += fidelity(&states[i], &states[j]).unwrap();
                }
            }
        }
        let bound = 1.0 - fidelity_sum / 8.0;
        if success < bound - 1e-9 {
            srm_bound_ok = false;
        }
    }
    c.check(
        "SRM success above the fidelity-sum lower bound (100 instances)",
        srm_bound_ok,
    );
    c.finish();
}
