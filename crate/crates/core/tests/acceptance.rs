//! Exit-gate checks, one line per criterion.
//!
//! Runs with its own harness so every line is printed whether it passes or not;
//! the process exits non-zero if any criterion fails.

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nrcg_battery::gates::{embed_gate, nrcg_2q};
use nrcg_battery::metrics::{ergotropy, passive_state};
use nrcg_battery::protocol::{run, run_observed};
use nrcg_battery::scan::{
    cnot_comparison, convergence_study, scan_theta_iterations, scan_theta_phi_max, thermal_comparison, BPreparation,
    DEFAULT_ROOTS, THERMAL_METRICS,
};
use nrcg_battery::states::gibbs_state;
use nrcg_battery::{
    CircuitCase, ComplexMatrix, GateSpec, Metric, ProtocolConfig, QubitHamiltonian, QubitInit, ScanGrid, SystemSpec,
};

type M = ComplexMatrix;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn config(n: usize, case: CircuitCase, theta: f64, phi: f64) -> ProtocolConfig<f64> {
    let spec = SystemSpec::standard(n, QubitInit::Pure { theta, phi }).unwrap();
    ProtocolConfig::new(spec, case, 15, 30).unwrap()
}

fn phi_grid(phi: f64) -> ScanGrid<f64> {
    ScanGrid {
        phi_fixed: Some(phi),
        ..ScanGrid::default()
    }
}

/// CNOT written out as a basis permutation, independent of the gate builder.
fn cnot_oracle(n_qubits: usize, control: usize, target: usize) -> M {
    let dim = 1 << n_qubits;
    let bit = |q: usize| 1usize << (n_qubits - 1 - q);
    let mut m = M::zeros(dim);
    for col in 0..dim {
        let row = if col & bit(control) != 0 {
            col ^ bit(target)
        } else {
            col
        };
        m[(row, col)] = Complex64::new(1.0, 0.0);
    }
    m
}

fn random_density(rng: &mut ChaCha8Rng, n: usize) -> M {
    let mut g = M::zeros(n);
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let rho = g.matmul(&g.adjoint()).unwrap();
    let tr = rho.trace().re;
    rho.scale(Complex64::new(1.0 / tr, 0.0))
}

fn gate_algebra() -> Outcome {
    let mut worst_power = 0.0f64;
    for root in 1..=30 {
        for control_first in [true, false] {
            let g = nrcg_2q::<f64>(control_first, root).unwrap();
            let cnot = if control_first {
                cnot_oracle(2, 0, 1)
            } else {
                cnot_oracle(2, 1, 0)
            };
            worst_power = worst_power.max(g.pow(root).max_abs_diff(&cnot).unwrap());
        }
    }
    let mut worst_unitary = 0.0f64;
    for n in [2, 3] {
        for (control, target) in (0..n).tuple_combinations().flat_map(|(a, b)| [(a, b), (b, a)]) {
            for root in 1..=30 {
                let u = embed_gate::<f64>(&GateSpec::new(control, target, root), n).unwrap();
                let dev = u
                    .matmul(&u.adjoint())
                    .unwrap()
                    .max_abs_diff(&M::identity(1 << n))
                    .unwrap();
                worst_unitary = worst_unitary.max(dev);
            }
        }
    }
    outcome(
        worst_power <= 1e-10 && worst_unitary <= 1e-12,
        format!("max |G^N - CNOT| = {worst_power:.2e} (tol 1e-10), max |UU^dag - I| = {worst_unitary:.2e} (tol 1e-12)"),
    )
}

fn state_validity() -> Outcome {
    let angles: Vec<(f64, f64)> = (0..11)
        .flat_map(|i| (0..11).map(move |j| (PI * i as f64 / 10.0, 2.0 * PI * j as f64 / 11.0)))
        .collect();
    let mut inits: Vec<QubitInit<f64>> = angles
        .iter()
        .map(|&(theta, phi)| QubitInit::Pure { theta, phi })
        .collect();
    inits.extend((0..11).map(|k| QubitInit::ExcitedPopulation { p: k as f64 / 20.0 }));
    let mut worst_trace = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut runs = 0;
    for n in [2, 3] {
        for case in CircuitCase::ALL {
            for &b in &inits {
                let spec = SystemSpec::standard(n, b).unwrap();
                let cfg = ProtocolConfig::new(spec, case, 15, 30).unwrap();
                run_observed(&cfg, |_, rho, _| {
                    worst_trace = worst_trace.max((rho.trace() - Complex64::new(1.0, 0.0)).norm());
                    min_eig = min_eig.min(rho.hermitian_eigenvalues(1e-9).unwrap()[0]);
                })
                .unwrap();
                runs += 1;
            }
        }
    }
    outcome(
        worst_trace <= 1e-10 && min_eig >= -1e-9,
        format!("{runs} runs: max |tr - 1| = {worst_trace:.2e} (tol 1e-10), min eigenvalue = {min_eig:.2e} (>= -1e-9)"),
    )
}

fn passivity_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let energies = [0.0, 1.0, 1.0, 2.0];
    let h = M::from_real_diag(&energies);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let rho = random_density(&mut rng, 4);
        let eig = rho.hermitian_eigenvalues(1e-10).unwrap();
        let brute = (0..4)
            .permutations(4)
            .map(|perm| perm.iter().enumerate().map(|(i, &j)| eig[j] * energies[i]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let passive = passive_state(&rho, &h).unwrap().passive_energy;
        worst = worst.max((passive - brute).abs());
    }
    let qubit = QubitHamiltonian::<f64>::default();
    let mut worst_gibbs = 0.0f64;
    for kt in [0.1, 0.4, 1.0, 4.0, 100.0] {
        let w = ergotropy(&gibbs_state(&qubit, kt).unwrap(), &qubit.matrix()).unwrap();
        worst_gibbs = worst_gibbs.max(w.abs());
    }
    outcome(
        worst <= 1e-10 && worst_gibbs <= 1e-12,
        format!("200 random 4x4: max |passive - brute force| = {worst:.2e} (tol 1e-10); Gibbs max |W| = {worst_gibbs:.2e} (tol 1e-12)"),
    )
}

fn cycle_equivalence() -> Outcome {
    let mut worst = 0.0f64;
    let mut checks = 0;
    for case in [CircuitCase::Case1, CircuitCase::Case2] {
        let cnot = match case {
            CircuitCase::Case1 => cnot_oracle(2, 0, 1),
            _ => cnot_oracle(2, 1, 0),
        };
        for root in [3, 5, 15] {
            let mut cfg = config(2, case, 2.0, 1.0);
            cfg.root = root;
            let mut states = Vec::new();
            run_observed(&cfg, |_, rho, _| states.push(rho.clone())).unwrap();
            let mut expected = states[0].clone();
            for k in 1..=30 / root {
                expected = cnot.matmul(&expected).unwrap().matmul(&cnot.adjoint()).unwrap();
                worst = worst.max(states[k * root].max_abs_diff(&expected).unwrap());
                checks += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{checks} whole-cycle states: max deviation {worst:.2e} (tol 1e-9)"),
    )
}

fn determinism() -> Outcome {
    let pool = |threads: usize| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    let bits = |v: &[Option<f64>]| v.iter().map(|x| x.map(f64::to_bits)).collect::<Vec<_>>();

    let cfg = config(3, CircuitCase::Case3, 0.0, PI);
    let grid = ScanGrid {
        theta_points: 31,
        phi_points: 31,
        ..ScanGrid::default()
    };
    let a = pool(1).install(|| scan_theta_phi_max(&cfg, &grid, Metric::Fom).unwrap());
    let b = pool(4).install(|| scan_theta_phi_max(&cfg, &grid, Metric::Fom).unwrap());
    let c = scan_theta_phi_max(&cfg, &grid, Metric::Fom).unwrap();
    let cfg1 = config(3, CircuitCase::Case1, 0.0, PI);
    let d = pool(1).install(|| scan_theta_iterations(&cfg1, &ScanGrid::default(), Metric::DeltaW).unwrap());
    let e = pool(3).install(|| scan_theta_iterations(&cfg1, &ScanGrid::default(), Metric::DeltaW).unwrap());
    let same = bits(&a.values) == bits(&b.values)
        && bits(&a.values) == bits(&c.values)
        && a.rows == b.rows
        && bits(&d.values) == bits(&e.values)
        && d.rows == e.rows;
    outcome(
        same,
        format!(
            "31x31 FoM map (1/4/default threads) and 101x31 delta_w scan (1/3 threads): {}",
            if same { "bit-identical" } else { "differ" }
        ),
    )
}

/// Largest value of `metric` over `θ × iteration` at `φ`, over the given cases.
fn joint_max(n: usize, cases: &[CircuitCase], phi: f64, metric: Metric) -> (f64, f64, usize, CircuitCase) {
    cases
        .iter()
        .map(|&case| {
            let m = scan_theta_iterations(&config(n, case, 0.0, phi), &phi_grid(phi), metric)
                .unwrap()
                .maximum()
                .unwrap();
            (m.value, m.theta().unwrap(), m.iteration, case)
        })
        .fold((f64::NEG_INFINITY, 0.0, 0, CircuitCase::Case1), |best, x| {
            if x.0 > best.0 {
                x
            } else {
                best
            }
        })
}

fn delta_w_coherence_gain() -> Outcome {
    let cases = [CircuitCase::Case1, CircuitCase::Case3];
    let (at0, ..) = joint_max(3, &cases, 0.0, Metric::DeltaW);
    let (atpi, ..) = joint_max(3, &cases, PI, Metric::DeltaW);
    let ratio = atpi / at0;
    let (c3_0, ..) = joint_max(3, &[CircuitCase::Case3], 0.0, Metric::DeltaW);
    let (c3_pi, ..) = joint_max(3, &[CircuitCase::Case3], PI, Metric::DeltaW);
    outcome(
        within(at0, 0.49, 0.03) && within(atpi, 0.62, 0.03) && within(ratio, 1.265, 0.05),
        format!(
            "max delta_w phi=0: {at0:.4} (0.49+-0.03), phi=pi: {atpi:.4} (0.62+-0.03), ratio {ratio:.4} (1.265+-0.05); case 3 alone {c3_0:.4} / {c3_pi:.4}"
        ),
    )
}

fn fom_plateau() -> Outcome {
    let map = scan_theta_phi_max(
        &config(3, CircuitCase::Case1, 0.0, PI),
        &ScanGrid::default(),
        Metric::Fom,
    )
    .unwrap();
    let best = map.maximum().unwrap();
    let in_box = |theta: f64, phi: f64| (0.63..=2.51).contains(&theta) && (1.57..=4.71).contains(&phi);
    let plateau: Vec<(f64, f64)> = map
        .rows
        .iter()
        .zip(&map.values)
        .filter(|(_, v)| v.is_some_and(|v| v >= 0.95 * best.value))
        .map(|(row, _)| match row.b {
            QubitInit::Pure { theta, phi } => (theta, phi),
            _ => unreachable!(),
        })
        .collect();
    let inside = plateau.iter().filter(|&&(t, p)| in_box(t, p)).count();
    let (f0, ..) = joint_max(3, &[CircuitCase::Case1], 0.0, Metric::Fom);
    let (fpi, ..) = joint_max(3, &[CircuitCase::Case1], PI, Metric::Fom);
    let gain = fpi / f0 - 1.0;
    outcome(
        within(best.value, 0.42, 0.04) && inside > 0 && within(gain, 0.35, 0.08),
        format!(
            "max FoM {:.4} (0.42+-0.04) at theta={:.3} phi={:.3} it={}; plateau cells (>=95% of max) {} of which {inside} in box; phi=pi vs phi=0 gain {:.1}% (35+-8)",
            best.value,
            best.theta().unwrap(),
            best.phi().unwrap(),
            best.iteration,
            plateau.len(),
            gain * 100.0
        ),
    )
}

fn power_gain() -> Outcome {
    let (p0, ..) = joint_max(3, &CircuitCase::ALL, 0.0, Metric::PowerErgotropy);
    let (ppi, theta_pi, it_pi, case_pi) = joint_max(3, &CircuitCase::ALL, PI, Metric::PowerErgotropy);
    let dw = scan_theta_iterations(&config(3, case_pi, 0.0, PI), &phi_grid(PI), Metric::DeltaW)
        .unwrap()
        .maximum()
        .unwrap();
    let gain = ppi / p0 - 1.0;
    outcome(
        within(ppi, 1.42, 0.05)
            && within(p0, 1.07, 0.05)
            && within(gain, 0.327, 0.05)
            && (theta_pi - FRAC_PI_2).abs() <= 0.4
            && it_pi < dw.iteration,
        format!(
            "max P_dW phi=pi: {ppi:.4} (1.42+-0.05), phi=0: {p0:.4} (1.07+-0.05), gain {:.1}% (32.7+-5); phi=pi argmax {case_pi} theta={theta_pi:.3} (|theta-pi/2|<=0.4) it={it_pi} vs delta_w argmax it={}",
            gain * 100.0,
            dw.iteration
        ),
    )
}

fn sign_structure() -> Outcome {
    let dw = |n: usize| run(&config(n, CircuitCase::Case1, PI, PI)).unwrap().records[15].ergotropy_variation;
    let (two, three) = (dw(2), dw(3));
    outcome(
        two < 0.0 && three > 0.0,
        format!("delta_w at iteration 15, theta=phi=pi, case 1: 2 qubits {two:.4} (< 0), 3 qubits {three:.4} (> 0)"),
    )
}

fn cnot_structure() -> Outcome {
    let mut pass = true;
    let mut notes = Vec::new();
    for n in [2, 3] {
        for case in CircuitCase::ALL {
            let cmp = cnot_comparison(&config(n, case, 0.0, PI), &ScanGrid::default()).unwrap();
            let nrcg = cmp.pair.nrcg.ergotropies();
            let above = (1..30)
                .filter(|&i| nrcg[i] > cmp.pair.cnot_at(i).ergotropy + 1e-12)
                .count();
            pass &= above > 0;
            let mut note = format!("{n}q {case} theta*={:.3} above at {above} iterations", cmp.theta_star);
            if case != CircuitCase::Case3 {
                if n == 2 {
                    let gap = [0usize, 15, 30]
                        .iter()
                        .map(|&i| (nrcg[i] - cmp.pair.cnot_at(i).ergotropy).abs())
                        .fold(0.0, f64::max);
                    pass &= gap <= 1e-9;
                    note += &format!(" gap at 0,15,30 {gap:.1e}");
                } else {
                    let max_n = nrcg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let max_1 = cmp
                        .pair
                        .cnot
                        .ergotropies()
                        .into_iter()
                        .fold(f64::NEG_INFINITY, f64::max);
                    pass &= max_n > max_1;
                    note += &format!(" max {max_n:.4} vs {max_1:.4}");
                }
            }
            notes.push(note);
        }
    }
    outcome(pass, notes.join("; "))
}

fn thermal_advantage() -> Outcome {
    let base = config(3, CircuitCase::Case1, 0.0, PI);
    let table = thermal_comparison(&base, &ScanGrid::default()).unwrap();
    let mut pass = true;
    let mut violations = Vec::new();
    let mut ratios = Vec::new();
    for n in [2, 3] {
        for case in CircuitCase::ALL {
            for metric in THERMAL_METRICS {
                let pure = table.get(n, case, BPreparation::Pure, metric).unwrap().maximum.value;
                let thermal = table.get(n, case, BPreparation::Thermal, metric).unwrap().maximum.value;
                if pure < thermal {
                    pass = false;
                    violations.push(format!("{n}q {case} {metric}"));
                }
            }
            let adv = table.advantage(n, case, Metric::Ergotropy).unwrap();
            let ok = match case {
                CircuitCase::Case2 => adv >= 5.0,
                _ => (1.5..=5.5).contains(&adv),
            };
            pass &= ok;
            ratios.push(format!("{n}q {case} {adv:.2}x{}", if ok { "" } else { "!" }));
        }
    }
    outcome(
        pass,
        format!(
            "pure >= thermal violations: [{}]; W_max advantage (case 2 >= 5, cases 1/3 in [1.5, 5.5]): {}",
            violations.join(", "),
            ratios.join(", ")
        ),
    )
}

fn convergence() -> Outcome {
    let study = convergence_study(&config(3, CircuitCase::Case3, PI, PI), &DEFAULT_ROOTS).unwrap();
    let jumps = study.max_jumps();
    let monotone = jumps.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let gap = study.cycle_fraction_gap(15, 20).unwrap();
    outcome(
        monotone && gap < 0.05,
        format!(
            "max jump per N {:?}: {}; N=15 vs N=20 gap on cycle fraction {gap:.4} (< 0.05)",
            study
                .roots()
                .iter()
                .zip(&jumps)
                .map(|(n, j)| format!("{n}:{j:.4}"))
                .collect::<Vec<_>>(),
            if monotone { "non-increasing" } else { "increases" }
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 12] = [
        ("gate algebra", gate_algebra),
        ("state validity", state_validity),
        ("passivity oracle", passivity_oracle),
        ("cycle equivalence", cycle_equivalence),
        ("scan determinism", determinism),
        ("delta_w coherence gain", delta_w_coherence_gain),
        ("FoM plateau", fom_plateau),
        ("power gain", power_gain),
        ("charging sign", sign_structure),
        ("CNOT comparison", cnot_structure),
        ("thermal advantage", thermal_advantage),
        ("root convergence", convergence),
    ];
    // `cargo test -- <filter>` style selection by number or name.
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = (i + 1).to_string();
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id:>2} {:<4} {name} ({secs:.1}s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
