//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero when a criterion fails that is not listed in `KNOWN_FAILURES`.
//!
//! Runs as a plain binary (`harness = false`) so the report is always shown.

use std::time::Instant;

use rand::Rng;
use tgprior::experiments::{self, denoising as dn, robin};
use tgprior::forward::generate_data;
use tgprior::gaussian::{factor, CovarianceOperator};
use tgprior::linalg::SquareMatrix;
use tgprior::samplers::acceptance_probability;
use tgprior::*;

/// Criteria that fail at these settings, with the reason. The runner checks
/// they still fail so a fix is noticed.
const KNOWN_FAILURES: &[(u8, &str)] = &[
    (
        3,
        "with 1e6 pCN steps the chain-to-chain spread of the mean at the jumps (0.07 to 0.18 on one grid) \
         exceeds the 0.05 tolerance; resolving it needs roughly 100x more steps",
    ),
    (
        5,
        "at beta = 0.02 the TV increment of a pCN move is far above O(1) on the 200-node grid, \
         so pCN almost never accepts and the S-pCN inner loop almost never moves",
    ),
];

// Pinned tolerances.
const HEAT_MAX_ERR: f64 = 1e-3;
const HEAT_MIN_ORDER: f64 = 1.9;
const GP_SUP_TOL: f64 = 0.02;
const TG_MESH_TOL: f64 = 0.05;
const PCN_RATE: (f64, f64) = (0.05, 0.25);
const SPCN_RATE: (f64, f64) = (0.30, 0.50);
const ESS_RATIO_MIN: f64 = 2.0;
const TOY_Z_MAX: f64 = 3.0;
const AR1_ESS_REL: f64 = 0.15;
const COV_RECON_REL: f64 = 1e-10;

// Sample budgets and tuning.
const SEED: u64 = 1;
const GP_SAMPLES: usize = 200_000;
const GP_BETA: f64 = 0.05;
const MESH_SAMPLES: usize = 1_000_000;
const MESH_BURN: usize = 200_000;
const MESH_BETA: f64 = 0.01;
const RW_STEP_PER_N: f64 = 0.04;
const RATE_SAMPLES: usize = 100_000;
const RATE_BURN: usize = 10_000;
const ESS_SAMPLES: usize = 200_000;
const ESS_BURN: usize = 50_000;
const ESS_BETA: f64 = 0.005;
const ROBIN_NX: usize = 51;
const ROBIN_NT: usize = 200;
const TOY_OUTER: usize = 1_000_000;
const TOY_REF_STEPS: usize = 10_000_000;
const TOY_BATCHES: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn sup_diff(a: &Field64, b: &Field64) -> f64 {
    a.sup_distance(b).expect("same grid")
}

// 1 -----------------------------------------------------------------------

fn heat_max_error(nx: usize, nt: usize) -> f64 {
    let times = experiments::heat_obs_times::<f64>(100);
    let model = HeatModel::new(experiments::manufactured_heat_setup(nx, nt, times.clone())).unwrap();
    let rho = Field::from_fn(Grid64::unit(nt + 1).unwrap(), |t| t).unwrap();
    let out = model.apply(&rho).unwrap();
    times.iter().zip(&out).map(|(&t, &u)| (u - (2.0 + 2.0 * t)).abs()).fold(0.0, f64::max)
}

fn criterion_heat() -> Outcome {
    let e0 = heat_max_error(26, 100);
    let e1 = heat_max_error(51, 200);
    let e2 = heat_max_error(101, 400);
    let p1 = (e0 / e1).log2();
    let p2 = (e1 / e2).log2();
    outcome(
        e2 < HEAT_MAX_ERR && p1 >= HEAT_MIN_ORDER && p2 >= HEAT_MIN_ORDER,
        format!("max err {e2:.2e} at (101,400); orders {p1:.3}, {p2:.3} (errors {e0:.2e}, {e1:.2e}, {e2:.2e})"),
    )
}

// 2 -----------------------------------------------------------------------

fn denoising_data() -> Observations64 {
    let fine = Grid64::unit(353).unwrap();
    let model = DenoisingModel::new(experiments::denoising_locations(), &fine).unwrap();
    generate_data(&model, &experiments::denoising_truth(&fine), dn::NOISE_SD, &mut seeded_rng(SEED)).unwrap()
}

fn criterion_gp_oracle(obs: &Observations64) -> Outcome {
    let grid = Grid64::unit(89).unwrap();
    let kernel = SqExpKernel::new(dn::GAMMA, 0.08).unwrap();
    let exact = gp_posterior_exact(&kernel, &grid, obs).unwrap();
    let f = prior_factor(&kernel, &grid).unwrap();
    let model = DenoisingModel::new(obs.locations().to_vec(), &grid).unwrap();
    let mis = DataMisfit::new(&model, obs).unwrap();
    let post = Posterior::new(&f, &mis, None);
    let cfg = SamplerConfig::new(GP_BETA, 1, GP_SAMPLES, GP_SAMPLES / 4, 1000, SEED);
    let init = experiments::data_interpolant(obs, &grid).unwrap();
    let out = run_chain(SamplerKind::Pcn, init, &cfg, &post).unwrap();
    let d = sup_diff(&out.mean(), &exact.mean);
    outcome(
        d < GP_SUP_TOL,
        format!("sup |mean_pcn - mean_exact| = {d:.4} (acceptance {:.3})", out.stats.outer_accept_rate()),
    )
}

// 3, 4 --------------------------------------------------------------------

fn mesh_means(obs: &Observations64, kind: SamplerKind) -> Vec<(usize, Field64, f64)> {
    let fine = Grid64::unit(*dn::GRID_SIZES.last().unwrap()).unwrap();
    std::thread::scope(|s| {
        let handles: Vec<_> = dn::GRID_SIZES
            .iter()
            .map(|&n| {
                let fine = &fine;
                s.spawn(move || {
                    let grid = Grid64::unit(n).unwrap();
                    let model = DenoisingModel::new(obs.locations().to_vec(), &grid).unwrap();
                    let mis = DataMisfit::new(&model, obs).unwrap();
                    let tv = Some(TvTerm::new(dn::LAMBDA).unwrap());
                    let f = prior_factor(&SqExpKernel::new(dn::GAMMA, dn::D).unwrap(), &grid).unwrap();
                    let post = match kind {
                        SamplerKind::RwTv => Posterior::lebesgue(&mis, tv),
                        _ => Posterior::new(&f, &mis, tv),
                    };
                    let mut cfg = SamplerConfig::new(MESH_BETA, 1, MESH_SAMPLES, MESH_BURN, 10_000, SEED + n as u64);
                    cfg.rw_step_sd = RW_STEP_PER_N / n as f64;
                    let init = experiments::data_interpolant(obs, &grid).unwrap();
                    let out = run_chain(kind, init, &cfg, &post).unwrap();
                    (n, out.mean().regrid(fine).unwrap(), out.stats.outer_accept_rate())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn max_pairwise(means: &[(usize, Field64, f64)]) -> (f64, String) {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for i in 0..means.len() {
        for j in i + 1..means.len() {
            let d = sup_diff(&means[i].1, &means[j].1);
            worst = worst.max(d);
            parts.push(format!("{}/{}: {d:.4}", means[i].0, means[j].0));
        }
    }
    let rates: Vec<String> = means.iter().map(|m| format!("{:.3}", m.2)).collect();
    (worst, format!("{}; acceptance {}", parts.join(", "), rates.join("/")))
}

// 5, 6 --------------------------------------------------------------------

struct Robin {
    grid: Grid64,
    model: HeatModel<f64>,
    obs: Observations64,
    factor: CholeskyFactor<f64>,
}

impl Robin {
    fn new() -> Self {
        let grid = Grid64::unit(robin::GRID_SIZE).unwrap();
        let setup =
            experiments::manufactured_heat_setup(ROBIN_NX, ROBIN_NT, experiments::heat_obs_times(robin::N_OBS));
        let model = HeatModel::new(setup).unwrap();
        let obs = generate_data(&model, &experiments::robin_truth(&grid), robin::NOISE_SD, &mut seeded_rng(SEED))
            .unwrap();
        let factor = prior_factor(&SqExpKernel::new(robin::GAMMA, robin::D).unwrap(), &grid).unwrap();
        Self { grid, model, obs, factor }
    }

    fn run(&self, kind: SamplerKind, cfg: &SamplerConfig<f64>, init: Field64) -> ChainOutput<f64> {
        let mis = DataMisfit::new(&self.model, &self.obs).unwrap();
        let post = Posterior::new(&self.factor, &mis, Some(TvTerm::new(robin::LAMBDA).unwrap()));
        run_chain(kind, init, cfg, &post).unwrap()
    }
}

fn criterion_ess(r: &Robin) -> (Outcome, Field64) {
    let probes: Vec<usize> = [0.2, 0.5, 0.8].iter().map(|&t| r.grid.nearest_index(t)).collect();
    let init = sample_prior(&r.factor, &mut seeded_rng(SEED));
    let mut cfg = SamplerConfig::new(ESS_BETA, robin::INNER_STEPS, ESS_SAMPLES, ESS_BURN, 1000, SEED);
    cfg.trace_nodes = probes.clone();
    let (pcn, spcn) = std::thread::scope(|s| {
        let a = s.spawn(|| r.run(SamplerKind::Pcn, &cfg, init.clone()));
        let b = s.spawn(|| r.run(SamplerKind::Spcn, &cfg, init.clone()));
        (a.join().unwrap(), b.join().unwrap())
    });
    let mut pass = true;
    let mut parts = Vec::new();
    for &node in &probes {
        let e_p = diagnostics::ess(pcn.trace(node).unwrap()).unwrap();
        let e_s = diagnostics::ess(spcn.trace(node).unwrap()).unwrap();
        pass &= e_s >= ESS_RATIO_MIN * e_p;
        parts.push(format!("t={:.2}: {:.0}/{:.0} = {:.2}", r.grid.point(node), e_s, e_p, e_s / e_p));
    }
    let detail = format!(
        "beta {ESS_BETA}, {ESS_SAMPLES} steps; ESS spcn/pcn {}; acceptance pcn {:.3}, spcn {:.3}",
        parts.join(", "),
        pcn.stats.outer_accept_rate(),
        spcn.stats.outer_accept_rate()
    );
    (outcome(pass, detail), spcn.final_state)
}

fn criterion_rates(r: &Robin, warm: Field64) -> Outcome {
    let cfg = SamplerConfig::new(robin::BETA, robin::INNER_STEPS, RATE_SAMPLES, RATE_BURN, 1000, SEED);
    let (pcn, spcn) = std::thread::scope(|s| {
        let a = s.spawn(|| r.run(SamplerKind::Pcn, &cfg, warm.clone()));
        let b = s.spawn(|| r.run(SamplerKind::Spcn, &cfg, warm.clone()));
        (a.join().unwrap(), b.join().unwrap())
    });
    let a_p = pcn.stats.outer_accept_rate();
    let a_s = spcn.stats.outer_accept_rate();
    let in_range = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
    outcome(
        in_range(a_p, PCN_RATE) && in_range(a_s, SPCN_RATE),
        format!(
            "beta {}, k {}: pcn {a_p:.4} (want {:?}), spcn {a_s:.4} (want {:?}, inner {:.4})",
            robin::BETA,
            robin::INNER_STEPS,
            PCN_RATE,
            SPCN_RATE,
            spcn.stats.inner_accept_rate()
        ),
    )
}

// 7 -----------------------------------------------------------------------

/// Batch-means estimate of a mean and its standard error.
fn batch_mean(xs: &[f64]) -> (f64, f64) {
    let len = xs.len() / TOY_BATCHES;
    let means: Vec<f64> = xs.chunks_exact(len).map(|c| c.iter().sum::<f64>() / len as f64).collect();
    let m = means.iter().sum::<f64>() / means.len() as f64;
    let var = means.iter().map(|b| (b - m).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
    (m, (var / means.len() as f64).sqrt())
}

/// Statistics `u1, u2, u1^2, u2^2, u1 u2` along a 2-d chain.
fn toy_stats(u1: &[f64], u2: &[f64]) -> Vec<(f64, f64)> {
    let sq = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).collect::<Vec<_>>();
    vec![batch_mean(u1), batch_mean(u2), batch_mean(&sq(u1, u1)), batch_mean(&sq(u2, u2)), batch_mean(&sq(u1, u2))]
}

/// Independent random-walk Metropolis on `exp(-|u|^2 - |u2 - u1|)`.
fn toy_reference() -> (Vec<f64>, Vec<f64>) {
    let log_target = |a: f64, b: f64| -(a * a + b * b) - (b - a).abs();
    let mut rng = seeded_rng(SEED + 7);
    let (mut a, mut b) = (0.0f64, 0.0f64);
    let mut lp = log_target(a, b);
    let mut u1 = Vec::with_capacity(TOY_REF_STEPS);
    let mut u2 = Vec::with_capacity(TOY_REF_STEPS);
    for _ in 0..TOY_REF_STEPS {
        let pa = a + 0.9 * f64::standard_normal(&mut rng);
        let pb = b + 0.9 * f64::standard_normal(&mut rng);
        let lq = log_target(pa, pb);
        if rng.random::<f64>() < (lq - lp).exp() {
            (a, b, lp) = (pa, pb, lq);
        }
        u1.push(a);
        u2.push(b);
    }
    (u1, u2)
}

/// Quadrature value of `E[(u2 - u1)^2 / 2]` under the toy target.
fn toy_quadrature_b2() -> f64 {
    let w = |b: f64| (-b * b - std::f64::consts::SQRT_2 * b.abs()).exp();
    let (mut num, mut den) = (0.0, 0.0);
    let h = 1e-4;
    let mut b = h / 2.0;
    while b < 10.0 {
        num += b * b * w(b);
        den += w(b);
        b += h;
    }
    num / den
}

fn criterion_toy() -> Outcome {
    let grid = Grid64::unit(2).unwrap();
    let mut cov = CovarianceOperator::from_matrix(grid, SquareMatrix::identity(2)).unwrap();
    let f = factor(&mut cov).unwrap();
    let model = DenoisingModel::new(vec![0.0, 1.0], &grid).unwrap();
    let obs = ObservationSet::new(vec![0.0, 1.0], vec![0.0, 0.0], 1.0).unwrap();
    let mis = DataMisfit::new(&model, &obs).unwrap();
    let post = Posterior::new(&f, &mis, Some(TvTerm::new(1.0).unwrap()));
    let mut cfg = SamplerConfig::new(0.5, 10, TOY_OUTER, 10_000, TOY_OUTER, SEED);
    cfg.trace_nodes = vec![0, 1];
    let out = run_chain(SamplerKind::Spcn, Field::zeros(grid), &cfg, &post).unwrap();
    let s = toy_stats(out.trace(0).unwrap(), out.trace(1).unwrap());
    let (r1, r2) = toy_reference();
    let r = toy_stats(&r1, &r2);

    let names = ["E[u1]", "E[u2]", "E[u1^2]", "E[u2^2]", "E[u1u2]"];
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for ((name, (ms, ss)), (mr, sr)) in names.iter().zip(&s).zip(&r) {
        let z = (ms - mr).abs() / (ss * ss + sr * sr).sqrt();
        worst = worst.max(z);
        parts.push(format!("{name} {ms:.4}/{mr:.4} z={z:.2}"));
    }
    // Rotated coordinates: E[u1^2] = (1/2 + E[b^2]) / 2.
    let quad = 0.5 * (0.5 + toy_quadrature_b2());
    outcome(
        worst <= TOY_Z_MAX,
        format!("spcn/rwm {}; quadrature E[u1^2] = {quad:.4}", parts.join(", ")),
    )
}

// 8 -----------------------------------------------------------------------

fn criterion_properties() -> Outcome {
    let mut fails: Vec<&str> = Vec::new();
    let mut rng = seeded_rng(SEED);

    // TV seminorm axioms.
    let g = Grid64::unit(40).unwrap();
    let mut tv_ok = true;
    for _ in 0..500 {
        let u = Field::new(g, (0..40).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let v = Field::new(g, (0..40).map(|_| rng.random_range(-5.0..5.0)).collect()).unwrap();
        let c: f64 = rng.random_range(-10.0..10.0);
        let (tu, tvv) = (tv_seminorm(&u).unwrap(), tv_seminorm(&v).unwrap());
        let sum = tv_seminorm(&u.lincomb(1.0, &v, 1.0).unwrap()).unwrap();
        let shifted = Field::new(g, u.values().iter().map(|x| x + c).collect()).unwrap();
        tv_ok &= tu >= 0.0 && sum <= tu + tvv + 1e-12 && (tv_seminorm(&shifted).unwrap() - tu).abs() < 1e-9;
    }
    for &n in &dn::GRID_SIZES {
        tv_ok &= tv_seminorm(&experiments::denoising_truth(&Grid64::unit(n).unwrap())).unwrap() == 2.0;
    }
    if !tv_ok {
        fails.push("tv");
    }

    // Covariance SPD and reconstruction.
    let kernel = SqExpKernel::new(0.1, 0.02).unwrap();
    let mut cov = build_covariance(&kernel, &Grid64::unit(100).unwrap());
    let f = factor(&mut cov).unwrap();
    let llt = f.lower().mul_transpose_self();
    let mut worst = 0.0f64;
    for i in 0..100 {
        for j in 0..100 {
            let target = cov.matrix().get(i, j) + if i == j { cov.jitter() } else { 0.0 };
            worst = worst.max((llt.get(i, j) - target).abs());
        }
    }
    if !(worst < COV_RECON_REL * kernel.gamma() && (0..100).all(|i| f.lower().get(i, i) > 0.0)) {
        fails.push("covariance");
    }

    // Acceptance probabilities.
    let acc_ok = (0..10_000).all(|_| {
        let x: f64 = rng.random_range(-50.0..50.0);
        let p = acceptance_probability(x);
        (0.0..=1.0).contains(&p) && (x < 0.0 || p == 1.0)
    });
    if !acc_ok {
        fails.push("acceptance");
    }

    // ESS against the AR(1) closed form, phi = 0.9: tau = phi / (1 - phi).
    let phi = 0.9;
    let mut x = 0.0f64;
    let series: Vec<f64> = (0..1_000_000)
        .map(|_| {
            x = phi * x + (1.0 - phi * phi).sqrt() * f64::standard_normal(&mut rng);
            x
        })
        .collect();
    let ess = diagnostics::ess(&series).unwrap();
    let expect = series.len() as f64 / (1.0 + 2.0 * phi / (1.0 - phi));
    if (ess / expect - 1.0).abs() > AR1_ESS_REL {
        fails.push("ess");
    }

    // Bit-exact reruns.
    let obs = denoising_data();
    let grid = Grid64::unit(89).unwrap();
    let model = DenoisingModel::new(obs.locations().to_vec(), &grid).unwrap();
    let mis = DataMisfit::new(&model, &obs).unwrap();
    let pf = prior_factor(&SqExpKernel::new(dn::GAMMA, dn::D).unwrap(), &grid).unwrap();
    let post = Posterior::new(&pf, &mis, Some(TvTerm::new(dn::LAMBDA).unwrap()));
    let cfg = SamplerConfig::new(0.01, 10, 2000, 100, 10, 99);
    let a = run_chain(SamplerKind::Spcn, Field::zeros(grid), &cfg, &post).unwrap();
    let b = run_chain(SamplerKind::Spcn, Field::zeros(grid), &cfg, &post).unwrap();
    if a != b {
        fails.push("determinism");
    }

    let pass = fails.is_empty();
    outcome(
        pass,
        if pass {
            format!("tv axioms, covariance (recon {worst:.1e}), acceptance bounds, AR(1) ESS {ess:.0}/{expect:.0}, determinism")
        } else {
            format!("failing: {}", fails.join(", "))
        },
    )
}

const NAMES: [&str; 8] = [
    "heat solver correctness",
    "pCN vs exact GP posterior",
    "TG posterior mesh invariance",
    "TV posterior mesh dependence",
    "Robin acceptance rates",
    "S-pCN vs pCN ESS",
    "S-pCN detailed balance on 2-node toy",
    "property suites",
];

fn report(results: &mut Vec<(u8, bool)>, id: u8, o: Outcome, secs: f64) {
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("[{tag}] {id}. {}: {} ({secs:.1}s)", NAMES[id as usize - 1], o.detail);
    results.push((id, o.pass));
}

fn timed<R>(f: impl FnOnce() -> R) -> (R, f64) {
    let t0 = Instant::now();
    let r = f();
    (r, t0.elapsed().as_secs_f64())
}

fn main() {
    let mut results = Vec::new();

    let (o, t) = timed(criterion_heat);
    report(&mut results, 1, o, t);

    let obs = denoising_data();
    let (o, t) = timed(|| criterion_gp_oracle(&obs));
    report(&mut results, 2, o, t);

    let ((tg_diff, detail), t) = timed(|| max_pairwise(&mesh_means(&obs, SamplerKind::Pcn)));
    report(&mut results, 3, outcome(tg_diff < TG_MESH_TOL, format!("max sup-diff {tg_diff:.4}; {detail}")), t);

    let ((tv_diff, detail), t) = timed(|| max_pairwise(&mesh_means(&obs, SamplerKind::RwTv)));
    let o = outcome(tv_diff > tg_diff, format!("max sup-diff {tv_diff:.4} vs TG {tg_diff:.4}; {detail}"));
    report(&mut results, 4, o, t);

    // The ESS chains run first; the S-pCN end state warm-starts the rate chains.
    let r = Robin::new();
    let ((o6, warm), t6) = timed(|| criterion_ess(&r));
    let (o5, t5) = timed(|| criterion_rates(&r, warm));
    report(&mut results, 5, o5, t5);
    report(&mut results, 6, o6, t6);

    let (o, t) = timed(criterion_toy);
    report(&mut results, 7, o, t);
    let (o, t) = timed(criterion_properties);
    report(&mut results, 8, o, t);

    let mut unexpected = Vec::new();
    for &(id, pass) in &results {
        let known = KNOWN_FAILURES.iter().any(|(k, _)| *k == id);
        match (pass, known) {
            (false, false) => unexpected.push(format!("criterion {id} failed")),
            (true, true) => unexpected.push(format!("criterion {id} passed but is listed as a known failure")),
            _ => {}
        }
    }
    let passed = results.iter().filter(|r| r.1).count();
    println!("{passed}/{} criteria pass", results.len());
    for (id, why) in KNOWN_FAILURES {
        println!("known failure {id}: {why}");
    }
    if !unexpected.is_empty() {
        eprintln!("{}", unexpected.join("; "));
        std::process::exit(1);
    }
}
