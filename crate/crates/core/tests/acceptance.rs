//! Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any failure.
//!
//! `cargo test -p fidmoments --test acceptance`

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fidmoments::bases::matrix_unit_basis;
use fidmoments::channels::{
    apply, chi_gell_mann, chi_to_kraus, dephasing, depolarizing, jamiolkowski_state, kraus_to_chi,
    pauli_x, random_cptp, random_unitary, unitary_channel, unitary_conjugate, KrausChannel,
};
use fidmoments::moments::{
    analyze, average_fidelity, bound_report, moment, scaling_sweep, second_moment, AnalysisOptions,
    ChiInvariants,
};
use fidmoments::oracle::{compare, estimate_moments, SampleConfig};
use fidmoments::{ComplexMatrix, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

/// Tracks the largest deviation seen and fails once any exceeds `tol`.
struct MaxErr {
    tol: f64,
    worst: f64,
    failure: Option<String>,
}

impl MaxErr {
    fn new(tol: f64) -> Self {
        MaxErr {
            tol,
            worst: 0.0,
            failure: None,
        }
    }

    fn check(&mut self, what: impl FnOnce() -> String, got: f64, want: f64) {
        let err = (got - want).abs();
        self.worst = self.worst.max(err);
        if (err > self.tol || err.is_nan()) && self.failure.is_none() {
            self.failure = Some(format!("{}: got {got:.15e}, want {want:.15e}", what()));
        }
    }

    fn finish(self, label: &str) -> Outcome {
        let summary = format!("{label} max err {:.2e} (tol {:.0e})", self.worst, self.tol);
        match self.failure {
            None => Ok(summary),
            Some(f) => Err(format!("{summary}; first violation {f}")),
        }
    }
}

fn channel(d: usize, rank: usize, seed: u64) -> Result<KrausChannel, String> {
    random_cptp(d, rank, seed).map_err(|e| e.to_string())
}

fn exact_fixtures() -> Outcome {
    let mut err = MaxErr::new(1e-12);
    for d in [2, 3, 4, 8] {
        let id = KrausChannel::identity(d).map_err(|e| e.to_string())?;
        err.check(
            || format!("identity d={d} avg"),
            average_fidelity(&id).unwrap(),
            1.0,
        );
        err.check(
            || format!("identity d={d} var"),
            fidmoments::moments::variance(&id).unwrap(),
            0.0,
        );
    }
    for p in [0.1, 0.5, 0.9] {
        let ch = depolarizing(2, p).map_err(|e| e.to_string())?;
        err.check(
            || format!("depolarizing p={p} avg"),
            average_fidelity(&ch).unwrap(),
            1.0 - p / 2.0,
        );
        err.check(
            || format!("depolarizing p={p} var"),
            fidmoments::moments::variance(&ch).unwrap(),
            0.0,
        );
    }
    err.finish("14 values")
}

fn qubit_targets() -> Outcome {
    let mut err = MaxErr::new(1e-10);
    for p in [0.25, 0.5, 1.0] {
        let ch = dephasing(p).map_err(|e| e.to_string())?;
        err.check(
            || format!("dephasing p={p} avg"),
            average_fidelity(&ch).unwrap(),
            1.0 - 2.0 * p / 3.0,
        );
        err.check(
            || format!("dephasing p={p} var"),
            fidmoments::moments::variance(&ch).unwrap(),
            4.0 * p * p / 45.0,
        );
    }
    let x = unitary_channel(&pauli_x()).map_err(|e| e.to_string())?;
    err.check(
        || "pauli-x avg".into(),
        average_fidelity(&x).unwrap(),
        1.0 / 3.0,
    );
    err.check(
        || "pauli-x var".into(),
        fidmoments::moments::variance(&x).unwrap(),
        4.0 / 45.0,
    );
    err.finish("8 values")
}

fn oracle_agreement() -> Outcome {
    const GATE: f64 = 5.0;
    let opts = AnalysisOptions::default();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut rows = 0;
    for d in [2usize, 3, 4] {
        for i in 0..25u64 {
            let rank = 1 + (i as usize % 4);
            let seed = 3_000 + 100 * d as u64 + i;
            let ch = channel(d, rank, seed)?;
            let analytic = analyze(&ch, &opts).map_err(|e| e.to_string())?;
            let cfg = SampleConfig::with_shards(100_000, seed, 8).map_err(|e| e.to_string())?;
            let empirical = estimate_moments(&ch, 2, &cfg).map_err(|e| e.to_string())?;
            for row in compare(&analytic, &empirical).rows {
                rows += 1;
                let z = row.z.unwrap_or(0.0).abs();
                worst = worst.max(z);
                if z >= GATE || z.is_nan() {
                    failures.push(format!("d={d} seed={seed} {} z={z:.2}", row.quantity));
                }
            }
        }
    }
    let summary = format!("{rows} comparisons, max |z| {worst:.2} (gate {GATE})");
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", failures.join(", ")))
    }
}

fn cross_path_consistency() -> Outcome {
    let mut qubit = MaxErr::new(1e-8);
    for i in 0..200u64 {
        let ch = channel(2, 1 + (i as usize % 4), 4_000 + i)?;
        let inv = ChiInvariants::from_channel(&ch).map_err(|e| e.to_string())?;
        let sub = inv.variance().map_err(|e| e.to_string())?.value;
        qubit.check(
            || format!("qubit seed {i}"),
            inv.variance_qubit().unwrap(),
            sub,
        );
    }
    let mut kraus = MaxErr::new(1e-10);
    for i in 0..100u64 {
        let d = 2 + (i as usize % 2);
        let ch = channel(d, 1 + (i as usize % 4), 5_000 + i)?;
        kraus.check(
            || format!("m=1 d={d} seed {i}"),
            moment(&ch, 1).unwrap(),
            average_fidelity(&ch).unwrap(),
        );
        kraus.check(
            || format!("m=2 d={d} seed {i}"),
            moment(&ch, 2).unwrap(),
            second_moment(&ch).unwrap(),
        );
    }
    let a = qubit.finish("qubit form:")?;
    let b = kraus.finish("kraus path:")?;
    Ok(format!("{a}; {b}"))
}

fn exceptional_identities() -> Outcome {
    let mut swap = MaxErr::new(1e-9);
    let mut purity = MaxErr::new(1e-9);
    for i in 0..50u64 {
        let d = 2 + (i as usize % 2);
        let ch = channel(d, 1 + (i as usize % 4), 6_000 + i)?;
        let inv = ChiInvariants::from_channel(&ch).map_err(|e| e.to_string())?;
        let chi = chi_gell_mann(&ch).map_err(|e| e.to_string())?;
        let p = chi.basis().elements();
        let images: Vec<ComplexMatrix> = p.iter().map(|pm| apply(&ch, pm).unwrap()).collect();
        let chi = &chi;
        let direct: C64 = p
            .iter()
            .enumerate()
            .flat_map(|(l, pl)| {
                images
                    .iter()
                    .enumerate()
                    .map(move |(m, im)| chi.entry(l, m) * (pl * im).trace())
            })
            .sum();
        swap.check(
            || format!("swap d={d} seed {i}"),
            inv.basis_swap_sum(),
            direct.re,
        );
        swap.check(|| format!("swap imag d={d} seed {i}"), direct.im, 0.0);
        let out = apply(&ch, &ComplexMatrix::identity(d)).unwrap();
        purity.check(
            || format!("purity d={d} seed {i}"),
            inv.output_purity(),
            (&out * &out).trace().re,
        );
    }
    let a = swap.finish("swap form:")?;
    let b = purity.finish("output purity:")?;
    Ok(format!("{a}; {b}"))
}

fn magnitude_bounds() -> Outcome {
    let mut checked = 0;
    let mut violations = Vec::new();
    for d in [2usize, 3, 4] {
        for i in 0..100u64 {
            let seed = 7_000 + 1_000 * d as u64 + i;
            let rep = bound_report(&channel(d, 1 + (i as usize % 4), seed)?)
                .map_err(|e| e.to_string())?;
            for c in &rep.checks {
                checked += 1;
                if !c.holds {
                    violations.push(format!("d={d} seed={seed} {}={:.3e}", c.name, c.value));
                }
            }
        }
    }
    let summary = format!("{checked} checks, {} violations", violations.len());
    if violations.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}: {}", violations.join(", ")))
    }
}

fn scaling() -> Outcome {
    const FACTOR: f64 = 2.0;
    let table = scaling_sweep(&[2, 4, 8, 16, 32], 2, 20, 8_000).map_err(|e| e.to_string())?;
    let base = table.baseline().ok_or("empty sweep")?;
    let values: Vec<String> = table
        .rows
        .iter()
        .map(|r| format!("d={} {:.4}", r.d, r.d_times_max_var))
        .collect();
    let summary = format!(
        "d*max_var: {} (limit {:.4})",
        values.join(", "),
        FACTOR * base
    );
    if table.trend_ok(FACTOR) {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn unitary_invariance() -> Outcome {
    let mut err = MaxErr::new(1e-9);
    for i in 0..50u64 {
        let d = 2 + (i as usize % 2);
        let ch = channel(d, 1 + (i as usize % 4), 9_000 + i)?;
        let v = random_unitary(d, &mut ChaCha8Rng::seed_from_u64(9_500 + i));
        let conj = unitary_conjugate(&ch, &v).map_err(|e| e.to_string())?;
        let opts = AnalysisOptions {
            max_moment: 3,
            ..Default::default()
        };
        let a = analyze(&ch, &opts).map_err(|e| e.to_string())?;
        let b = analyze(&conj, &opts).map_err(|e| e.to_string())?;
        err.check(|| format!("avg seed {i}"), b.avg, a.avg);
        err.check(
            || format!("second seed {i}"),
            b.second_moment,
            a.second_moment,
        );
        err.check(|| format!("var seed {i}"), b.variance, a.variance);
        err.check(
            || format!("rational seed {i}"),
            b.variance_rational,
            a.variance_rational,
        );
        if let (Some(x), Some(y)) = (a.variance_qubit, b.variance_qubit) {
            err.check(|| format!("qubit seed {i}"), y, x);
        }
        for (x, y) in a.higher_moments.iter().zip(&b.higher_moments) {
            err.check(|| format!("m={} seed {i}", x.order), y.raw, x.raw);
            err.check(
                || format!("central m={} seed {i}", x.order),
                y.central,
                x.central,
            );
        }
    }
    err.finish("50 pairs,")
}

fn roundtrips() -> Outcome {
    let mut chi_err = MaxErr::new(1e-9);
    let mut jam_err = MaxErr::new(1e-10);
    for i in 0..50u64 {
        let d = 2 + (i as usize % 3);
        let ch = channel(d, 1 + (i as usize % (d * d)), 10_000 + i)?;
        let chi = chi_gell_mann(&ch).map_err(|e| e.to_string())?;
        let back = chi_to_kraus(&chi).map_err(|e| e.to_string())?;
        let again = chi_gell_mann(&back).map_err(|e| e.to_string())?;
        chi_err.check(
            || format!("chi d={d} seed {i}"),
            again.matrix().max_abs_diff(chi.matrix()),
            0.0,
        );

        let rho = jamiolkowski_state(&ch);
        let units = kraus_to_chi(&ch, matrix_unit_basis(d).unwrap()).map_err(|e| e.to_string())?;
        jam_err.check(
            || format!("jamiolkowski d={d} seed {i}"),
            units.matrix().max_abs_diff(rho.matrix()),
            0.0,
        );
    }
    let a = chi_err.finish("kraus-chi:")?;
    let b = jam_err.finish("jamiolkowski:")?;
    Ok(format!("{a}; {b}"))
}

const CRITERIA: [Criterion; 9] = [
    Criterion {
        id: 1,
        name: "exact fixtures",
        limit: Duration::from_secs(1),
        run: exact_fixtures,
    },
    Criterion {
        id: 2,
        name: "qubit closed-form targets",
        limit: Duration::from_secs(1),
        run: qubit_targets,
    },
    Criterion {
        id: 3,
        name: "Monte Carlo agreement",
        limit: Duration::from_secs(60),
        run: oracle_agreement,
    },
    Criterion {
        id: 4,
        name: "cross-path consistency",
        limit: Duration::from_secs(30),
        run: cross_path_consistency,
    },
    Criterion {
        id: 5,
        name: "exceptional-term identities",
        limit: Duration::from_secs(10),
        run: exceptional_identities,
    },
    Criterion {
        id: 6,
        name: "magnitude bounds",
        limit: Duration::from_secs(30),
        run: magnitude_bounds,
    },
    Criterion {
        id: 7,
        name: "1/d variance scaling",
        limit: Duration::from_secs(120),
        run: scaling,
    },
    Criterion {
        id: 8,
        name: "unitary invariance",
        limit: Duration::from_secs(30),
        run: unitary_invariance,
    },
    Criterion {
        id: 9,
        name: "conversion roundtrips",
        limit: Duration::from_secs(10),
        run: roundtrips,
    },
];

fn main() -> ExitCode {
    let mut failed = 0;
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        let (tag, detail) = match outcome {
            Ok(s) => ("PASS", s),
            Err(s) => {
                failed += 1;
                ("FAIL", s)
            }
        };
        let over = if elapsed > c.limit {
            " over budget"
        } else {
            ""
        };
        println!(
            "{tag} [{}] {:<28} {detail} [{:.2} s / {} s{over}]",
            c.id,
            c.name,
            elapsed.as_secs_f64(),
            c.limit.as_secs()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        CRITERIA.len() - failed,
        CRITERIA.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "unknown panic".into())
}
