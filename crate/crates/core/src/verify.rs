//! Randomized property suites behind `gpvm verify`.
//!
//! Every trial draws its instance from a generator seeded by the suite, the
//! run seed and the trial index, so a failing trial can be replayed alone.
//! Trials run in parallel; reports list them in trial order.

use rand::Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::funcalc::{self, ChainOrder, GeneralizedObservable};
use crate::joint::{Axis, GridPartition, GridRegion, JointObservable};
use crate::linalg::{complement, eigh, join, matrix_exp_hermitian, meet, ComplexMatrix, Projector};
use crate::measure::build_channel;
use crate::observable::{Observable, ValueSet};
use crate::random::{self, ChaCha};
use crate::tolerance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lattice,
    Gpvm,
    Funcalc,
    Measure,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Lattice, Suite::Gpvm, Suite::Funcalc, Suite::Measure];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lattice => "lattice",
            Suite::Gpvm => "gpvm",
            Suite::Funcalc => "funcalc",
            Suite::Measure => "measure",
        }
    }

    /// A suite name, or `all`.
    pub fn parse_list(s: &str) -> Option<Vec<Suite>> {
        if s == "all" {
            return Some(Self::ALL.to_vec());
        }
        Self::ALL.iter().copied().find(|x| x.name() == s).map(|x| vec![x])
    }

    fn tag(self) -> u64 {
        match self {
            Suite::Lattice => 0x6c61_7474,
            Suite::Gpvm => 0x6770_766d,
            Suite::Funcalc => 0x6663_616c,
            Suite::Measure => 0x6d65_6173,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub seed: u64,
    /// Base bound; operator identities of the functional calculus use ten
    /// times this, the ancilla composite a tenth.
    pub tol: f64,
}

impl VerifyConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            trials,
            seed,
            tol: tolerance::active().check,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub property: String,
    pub trial: usize,
    pub trial_seed: u64,
    pub deviation: f64,
    pub bound: f64,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub trials: usize,
    pub checks: usize,
    pub failures: Vec<Failure>,
    /// Observations that are not pass/fail, such as exact additivity of
    /// commuting fixtures.
    pub notes: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed)
    }
}

pub fn run(suites: &[Suite], cfg: &VerifyConfig) -> VerifyReport {
    VerifyReport {
        seed: cfg.seed,
        suites: suites.iter().map(|&s| run_suite(s, cfg)).collect(),
    }
}

/// Seed of trial `trial` of `suite` in a run with seed `seed`.
pub fn trial_seed(suite: Suite, seed: u64, trial: usize) -> u64 {
    let mut z = seed ^ suite.tag().rotate_left(32) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let outcomes: Vec<Probe> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(suite, cfg.seed, trial);
            let mut probe = Probe::new(trial, seed, cfg.tol);
            let mut rng = random::rng(seed);
            let result = match suite {
                Suite::Lattice => lattice_trial(&mut probe, &mut rng),
                Suite::Gpvm => gpvm_trial(&mut probe, &mut rng),
                Suite::Funcalc => funcalc_trial(&mut probe, &mut rng),
                Suite::Measure => measure_trial(&mut probe, &mut rng),
            };
            if let Err(e) = result {
                probe.fail("error", f64::INFINITY, 1.0, e.to_string());
            }
            probe
        })
        .collect();
    let mut report = SuiteReport {
        suite,
        trials: cfg.trials,
        checks: 0,
        failures: Vec::new(),
        notes: Vec::new(),
    };
    let mut commuting = 0;
    let mut additive = 0;
    for p in outcomes {
        report.checks += p.checks;
        report.failures.extend(p.failures);
        commuting += p.commuting;
        additive += p.additive;
    }
    if commuting > 0 {
        report.notes.push(format!("commuting fixtures exactly additive: {additive}/{commuting}"));
    }
    report
}

struct Probe {
    trial: usize,
    seed: u64,
    tol: f64,
    checks: usize,
    failures: Vec<Failure>,
    commuting: usize,
    additive: usize,
}

impl Probe {
    fn new(trial: usize, seed: u64, tol: f64) -> Self {
        Self {
            trial,
            seed,
            tol,
            checks: 0,
            failures: Vec::new(),
            commuting: 0,
            additive: 0,
        }
    }

    /// Records `deviation ≤ scale·tol`.
    fn check(&mut self, property: &str, deviation: f64, scale: f64, witness: impl FnOnce() -> String) {
        self.checks += 1;
        let bound = scale * self.tol;
        if deviation.is_nan() || deviation > bound {
            self.fail(property, deviation, scale, witness());
        }
    }

    fn truth(&mut self, property: &str, ok: bool, witness: impl FnOnce() -> String) {
        self.check(property, if ok { 0.0 } else { f64::INFINITY }, 1.0, witness);
    }

    fn fail(&mut self, property: &str, deviation: f64, scale: f64, witness: String) {
        self.failures.push(Failure {
            property: property.to_string(),
            trial: self.trial,
            trial_seed: self.seed,
            deviation,
            bound: scale * self.tol,
            witness,
        });
    }
}

fn diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.max_diff(b)
}

fn pair(rng: &mut ChaCha, dims: std::ops::RangeInclusive<usize>, values: std::ops::RangeInclusive<usize>) -> (Observable, Observable) {
    let dim = rng.random_range(dims);
    let k = rng.random_range(*values.start()..=(*values.end()).min(dim));
    let l = rng.random_range(*values.start()..=(*values.end()).min(dim));
    (random::observable(rng, dim, k), random::observable(rng, dim, l))
}

fn describe(o: &Observable) -> String {
    format!("{:?}", o.matrix())
}

fn lattice_trial(p: &mut Probe, rng: &mut ChaCha) -> Result<()> {
    let dim = rng.random_range(2..=6);
    let (r1, r2) = (rng.random_range(0..=dim), rng.random_range(0..=dim));
    let a = random::projector(rng, dim, r1);
    let b = random::projector(rng, dim, r2);
    let w = || format!("P = {:?}\nQ = {:?}", a.matrix(), b.matrix());
    let m = meet(&a, &b)?;
    let j = join(&a, &b)?;
    let id = ComplexMatrix::identity(dim);
    p.check("meet below both", diff(&(m.matrix() * a.matrix()), m.matrix()).max(diff(&(m.matrix() * b.matrix()), m.matrix())), 1.0, w);
    p.check("join above both", diff(&(j.matrix() * a.matrix()), a.matrix()).max(diff(&(j.matrix() * b.matrix()), b.matrix())), 1.0, w);
    let ca = complement(&a);
    p.check("complement", diff(&(a.matrix() + ca.matrix()), &id).max((a.matrix() * ca.matrix()).max_abs()), 1.0, w);
    let dm = join(&ca, &complement(&b))?;
    p.check("de Morgan", diff(complement(&m).matrix(), dm.matrix()), 1.0, w);
    p.check("absorption", diff(meet(&a, &j)?.matrix(), a.matrix()).max(diff(join(&a, &m)?.matrix(), a.matrix())), 1.0, w);
    p.check("idempotence", diff(meet(&a, &a)?.matrix(), a.matrix()).max(diff(join(&a, &a)?.matrix(), a.matrix())), 1.0, w);
    p.check(
        "ranks",
        ((j.rank() + m.rank()) as f64 - (a.rank() + b.rank()) as f64).abs(),
        1.0,
        w,
    );
    // commuting pair: P ∧ Q = PQ
    let u = random::unitary(rng, dim);
    let d1 = diagonal_projector(rng, dim).conjugate_by(&u);
    let d2 = diagonal_projector(rng, dim).conjugate_by(&u);
    p.check("commuting meet is product", diff(meet(&d1, &d2)?.matrix(), &(d1.matrix() * d2.matrix())), 1.0, || {
        format!("P = {:?}\nQ = {:?}", d1.matrix(), d2.matrix())
    });
    let h = random::hermitian(rng, dim);
    let e = eigh(&h)?;
    p.check("eigh reconstruction", diff(&e.reconstruct(), &h) / (1.0 + h.max_abs()), 1.0, || format!("M = {h:?}"));
    p.check("eigh orthonormal", e.eigenvectors.unitary_deviation(), 1.0, || format!("M = {h:?}"));
    Ok(())
}

fn diagonal_projector(rng: &mut ChaCha, dim: usize) -> Projector {
    let d: Vec<f64> = (0..dim).map(|_| if rng.random_bool(0.5) { 1.0 } else { 0.0 }).collect();
    Projector::new(ComplexMatrix::from_real_diagonal(&d)).expect("diagonal 0/1")
}

fn random_region(rng: &mut ChaCha, n: usize, m: usize) -> GridRegion {
    GridRegion::from_mask(n, m, &random::mask(rng, n * m, 0.5)).expect("sized mask")
}

fn gpvm_trial(p: &mut Probe, rng: &mut ChaCha) -> Result<()> {
    let (a, b) = pair(rng, 2..=6, 2..=4);
    let j = JointObservable::new(a.clone(), b.clone())?;
    let (n, m) = j.grid();
    let pair_w = || format!("A = {}\nB = {}", describe(&a), describe(&b));
    let gp = j.verify_gpvm_with(6, rng.random(), p.tol)?;
    p.checks += gp.checks;
    for v in gp.violations {
        p.fail(v.check, v.deviation, 1.0, format!("{} on {}\n{}", v.witness, v.check, pair_w()));
    }
    for axis in [Axis::A, Axis::B] {
        let (obs, len) = match axis {
            Axis::A => (&a, n),
            Axis::B => (&b, m),
        };
        let bits: u64 = rng.random_range(0..(1u64 << len));
        let r = ValueSet::from_bits(bits);
        let dev = diff(j.margin(&r, axis)?.matrix(), obs.evaluate(&r)?.matrix());
        p.check("margin", dev, 1.0, || format!("{axis:?} margin on {r:?}\n{}", pair_w()));
    }
    let q = random_region(rng, n, m);
    let (dev, _) = j.eigenstate_law(&q)?;
    p.check("eigenstate law", dev, 1.0, || format!("Q = {q:?}\n{}", pair_w()));
    let u = random::unitary(rng, j.dim());
    let moved = JointObservable::new(a.conjugate(&u)?, b.conjugate(&u)?)?;
    let dev = diff(moved.eval(&q)?.matrix(), j.eval(&q)?.conjugate_by(&u).matrix());
    p.check("unitary covariance", dev, 1.0, || format!("Q = {q:?}\nU = {u:?}\n{}", pair_w()));
    let c = j.characterization_check(&q, rng)?;
    p.check(
        "characterization",
        c.fixing_deviation.max(c.annihilating_deviation).max(c.hypothesis_deviation),
        1.0,
        || format!("Q = {q:?}\n{c:?}\n{}", pair_w()),
    );
    let dev = diff(j.eval(&q)?.matrix(), j.minimality_oracle(&q)?.matrix());
    p.check("oracle", dev, 1.0, || format!("Q = {q:?}\n{}", pair_w()));
    let psi = random::unit_vector(rng, j.dim());
    let ur = j.uncertainty_check(&psi)?;
    p.check(
        "uncertainty bound",
        (2.0 * ur.delta_a * ur.delta_b - ur.l_a * ur.l_b).max(0.0),
        1.0,
        || format!("ψ = {psi:?}\n{ur:?}\n{}", pair_w()),
    );
    p.truth("uncertainty confinement", ur.confined, || format!("ψ = {psi:?}\n{}", pair_w()));

    // commuting fixture: diagonal in a shared basis, exactly additive
    let dim = j.dim();
    let basis = random::unitary(rng, dim);
    let k = rng.random_range(1..=dim.min(4));
    let l = rng.random_range(1..=dim.min(4));
    let ca = random::observable_in_basis(rng, &basis, k);
    let cb = random::observable_in_basis(rng, &basis, l);
    let cj = JointObservable::new(ca, cb)?;
    let report = cj.verify_gpvm_with(6, rng.random(), p.tol)?;
    p.checks += report.checks;
    for v in report.violations {
        p.fail(v.check, v.deviation, 1.0, format!("commuting fixture: {}", v.witness));
    }
    p.commuting += 1;
    if report.additive {
        p.additive += 1;
    }
    p.truth("commuting additivity", report.additive, || {
        format!("A = {}\nB = {}", describe(cj.a()), describe(cj.b()))
    });
    Ok(())
}

fn funcalc_trial(p: &mut Probe, rng: &mut ChaCha) -> Result<()> {
    let (a, b) = pair(rng, 2..=4, 1..=4);
    let pair_w = || format!("A = {}\nB = {}", describe(&a), describe(&b));
    let sum = funcalc::dot_plus(&a, &b)?;
    p.check("dot-plus commutes", sum.distance(&funcalc::dot_plus(&b, &a)?), 1.0, pair_w);
    let prod = funcalc::dot_times(&a, &b)?;
    p.check("dot-times commutes", prod.distance(&funcalc::dot_times(&b, &a)?), 1.0, pair_w);

    let shift: f64 = rng.random_range(-1.0..1.0);
    let f = move |x: f64, y: f64| x * y + shift * x - y * y;
    let g = GeneralizedObservable::new(&a, &b, f)?;
    let mut perm: Vec<usize> = (0..g.values().len()).collect();
    use rand::seq::SliceRandom;
    perm.shuffle(rng);
    let order = ChainOrder::from_permutation(perm)?;
    let out = funcalc::extract_pvm(&g, &order)?;
    let dev = funcalc::prefix_deviation(&g, &order, &out)?;
    p.check("chain prefixes", dev, 1.0, || format!("order {:?}\n{}", order.as_slice(), pair_w()));
    let gp = g.verify_gpvm(4, rng.random(), p.tol)?;
    p.checks += gp.checks;
    for v in gp.violations {
        p.fail(&format!("f(A,B) {}", v.check), v.deviation, 1.0, format!("{}\n{}", v.witness, pair_w()));
    }
    let r = funcalc::property_suite_fe(&a, &b, f, Some(&order), rng)?;
    p.check("spectrum containment", r.spectrum_deviation, 10.0, pair_w);
    p.check("f_E covariance", r.covariance_deviation, 10.0, pair_w);
    p.check("f_E eigenstates", r.eigenstate_deviation, 10.0, pair_w);

    let ha = a.matrix();
    let hb = b.matrix();
    let ea = Observable::from_matrix(&matrix_exp_hermitian(&ha)?)?;
    let eb = Observable::from_matrix(&matrix_exp_hermitian(&hb)?)?;
    let bch = funcalc::dot_times(&ea, &eb)?.distance(&sum.apply_scalar_function(f64::exp)?);
    p.check("BCH identity", bch, 10.0, pair_w);
    let comp = funcalc::composition_deviation(|x| 2.0 * x + 1.0, |x, y| x * y, &a, &b, None)?;
    p.check("composition", comp, 10.0, pair_w);
    let right = funcalc::right_composition_deviation(|x, y| x * y, f64::exp, |y| y * y * y, &a, &b, None)?;
    p.check("right composition", right, 10.0, pair_w);

    let dim = a.dim();
    let lo: Vec<f64> = (0..dim).map(|_| rng.random_range(-2i32..=2) as f64).collect();
    let hi: Vec<f64> = lo.iter().map(|x| x + rng.random_range(0i32..=2) as f64).collect();
    let lo_o = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&lo))?;
    let hi_o = Observable::from_matrix(&ComplexMatrix::from_real_diagonal(&hi))?;
    let ok = funcalc::check_spectral_monotonicity(&lo_o, &hi_o, &b)?;
    p.truth("spectral monotonicity", ok, || format!("A = diag{lo:?}\nB = diag{hi:?}\nC = {}", describe(&b)));
    Ok(())
}

fn measure_trial(p: &mut Probe, rng: &mut ChaCha) -> Result<()> {
    let (a, b) = pair(rng, 2..=4, 1..=3);
    let j = JointObservable::new(a.clone(), b.clone())?;
    let (n, m) = j.grid();
    let part = match rng.random_range(0..4) {
        0 => GridPartition::rows(n, m),
        1 => GridPartition::cols(n, m),
        2 => GridPartition::singletons(n, m),
        _ => random_partition(rng, n, m),
    };
    let pair_w = || format!("A = {}\nB = {}\npartition {:?}", describe(&a), describe(&b), part.regions);
    let c = build_channel(&j, &part)?;
    let rho = random::density(rng, j.dim());
    let out = c.apply_unselected(&rho)?;
    p.check("trace monotone", (out.trace() - rho.trace()).max(0.0), 0.1, pair_w);
    let low = eigh(out.matrix())?.eigenvalues.first().copied().unwrap_or(0.0);
    p.check("positivity", (-low).max(0.0), 1.0, pair_w);
    let twice = c.apply_unselected(&out)?;
    p.check("sharpness", diff(twice.matrix(), out.matrix()), 1.0, pair_w);
    let probs = c.outcome_probabilities(&rho)?;
    p.check("probabilities sum to one", (probs.total() - 1.0).abs(), 1.0, pair_w);
    let preserved = (out.trace() - rho.trace()).abs() <= 0.1 * p.tol;
    let defect_free = probs.none <= 0.1 * p.tol;
    p.truth("trace preserved iff no defect weight", preserved == defect_free, pair_w);
    let u = c.realize_ancilla()?;
    p.check("ancilla unitary", u.unitary_deviation(), 1.0, pair_w);
    let composite = c.ancilla_composite(&u, rho.matrix())?;
    p.check("ancilla composite", diff(&composite, out.matrix()), 0.1, pair_w);
    let fine = build_channel(&j, &GridPartition::singletons(n, m))?;
    let fine_total: f64 = fine.outcome_probabilities(&rho)?.outcomes.iter().map(|(_, x)| x).sum();
    let coarse_total = probs.total() - probs.none;
    p.check("refinement lowers outcome weight", (fine_total - coarse_total).max(0.0), 1.0, pair_w);
    Ok(())
}

fn random_partition(rng: &mut ChaCha, n: usize, m: usize) -> GridPartition {
    let k = rng.random_range(1..=3usize);
    let mut regions = vec![GridRegion::empty(n, m); k];
    for i in 0..n {
        for c in 0..m {
            regions[rng.random_range(0..k)].insert(i, c);
        }
    }
    regions.retain(|r| !r.is_empty());
    GridPartition::new(regions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_suites_pass() {
        let report = run(&Suite::ALL, &VerifyConfig::new(6, 7));
        for s in &report.suites {
            assert!(s.passed(), "{}: {:#?}", s.suite.name(), s.failures);
            assert!(s.checks > 0);
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = VerifyConfig::new(4, 99);
        assert_eq!(run(&[Suite::Gpvm], &cfg), run(&[Suite::Gpvm], &cfg));
    }

    #[test]
    fn skewed_tolerance_fails_with_witness() {
        let cfg = VerifyConfig {
            tol: 1e-300,
            ..VerifyConfig::new(2, 7)
        };
        let report = run(&[Suite::Lattice], &cfg);
        assert!(!report.passed());
        assert!(report.suites[0].failures.iter().all(|f| !f.witness.is_empty()));
    }

    #[test]
    fn commuting_fixtures_are_additive() {
        let report = run_suite(Suite::Gpvm, &VerifyConfig::new(5, 3));
        assert_eq!(report.notes, vec!["commuting fixtures exactly additive: 5/5".to_string()]);
    }

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse_list("all").unwrap().len(), 4);
        assert_eq!(Suite::parse_list("gpvm").unwrap(), vec![Suite::Gpvm]);
        assert!(Suite::parse_list("nope").is_none());
    }
}
