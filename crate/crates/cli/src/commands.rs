use std::fmt::Write;
use std::path::Path;

use serde_json::{json, Value};

use gpvm::expr::{self, ParseError};
use gpvm::files::{self, ChainSpec, PartitionSpec};
use gpvm::funcalc::{extract_pvm, GeneralizedObservable};
use gpvm::verify::{self, Suite, VerifyConfig};
use gpvm::{build_channel, Error, GridPartition, GridRegion, JointObservable, Observable, Projector};

use crate::render::{json_text, matrix_json, matrix_text, num, nums};
use crate::{exit_code, Format, Outcome};

/// A failure carrying its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

type Res<T> = Result<T, Fail>;

fn finish(r: Res<String>) -> Outcome {
    match r {
        Ok(s) => Outcome::Ok(s),
        Err(f) => Outcome::Failed {
            code: f.code,
            stderr: format!("error: {}\n", f.message),
        },
    }
}

fn read(path: &Path) -> Res<String> {
    std::fs::read_to_string(path).map_err(|e| Fail {
        code: 2,
        message: format!("cannot read {}: {e}", path.display()),
    })
}

fn in_file<T>(path: &Path, r: gpvm::Result<T>) -> Res<T> {
    r.map_err(|e| {
        let f = Fail::from(e);
        Fail {
            message: format!("{}: {}", path.display(), f.message),
            ..f
        }
    })
}

fn load_observable(path: &Path) -> Res<Observable> {
    in_file(path, files::parse_observable(&read(path)?))
}

fn load_pair(a: &Path, b: &Path) -> Res<JointObservable> {
    Ok(JointObservable::new(load_observable(a)?, load_observable(b)?)?)
}

fn load_partition(spec: &str, j: &JointObservable) -> Res<GridPartition> {
    let parsed = match PartitionSpec::keyword(spec) {
        Some(p) => p,
        None => {
            let path = Path::new(spec);
            in_file(path, files::parse_partition(&read(path)?))?
        }
    };
    Ok(parsed.build(j.a().eigenvalues(), j.b().eigenvalues())?)
}

fn grid_line(j: &JointObservable) -> String {
    let (n, m) = j.grid();
    format!(
        "grid {n}×{m}\n  σ(A) = {{{}}}\n  σ(B) = {{{}}}\n",
        nums(j.a().eigenvalues()),
        nums(j.b().eigenvalues())
    )
}

fn cells(q: &GridRegion) -> Vec<[usize; 2]> {
    q.cells().map(|(i, k)| [i, k]).collect()
}

fn cells_text(q: &GridRegion) -> String {
    let c: Vec<String> = q.cells().map(|(i, k)| format!("({i},{k})")).collect();
    format!("{{{}}}", c.join(" "))
}

fn projector_json(p: &Projector) -> Value {
    json!({ "rank": p.rank(), "matrix": matrix_json(p.matrix()) })
}

pub fn joint(a: &Path, b: &Path, region: Option<&Path>, partition: Option<&str>, format: Format) -> Outcome {
    finish((|| {
        let j = load_pair(a, b)?;
        let dim = j.dim();
        if let Some(path) = region {
            let spec = in_file(path, files::parse_region(&read(path)?))?;
            let q = j.region(&spec)?;
            let p = j.eval(&q)?;
            return Ok(match format {
                Format::Json => json_text(&json!({
                    "dim": dim,
                    "a_values": j.a().eigenvalues(),
                    "b_values": j.b().eigenvalues(),
                    "region": cells(&q),
                    "rank": p.rank(),
                    "matrix": matrix_json(p.matrix()),
                })),
                Format::Text => {
                    let mut s = grid_line(&j);
                    let _ = writeln!(s, "region {}", cells_text(&q));
                    let _ = writeln!(s, "rank {}", p.rank());
                    let _ = write!(s, "J(Q) =\n{}", matrix_text(p.matrix(), 2));
                    s
                }
            });
        }
        let spec = partition.expect("clap requires a region or a partition");
        let part = load_partition(spec, &j)?;
        let channel = build_channel(&j, &part)?;
        Ok(match format {
            Format::Json => {
                let regions: Vec<Value> = part
                    .labels
                    .iter()
                    .zip(&part.regions)
                    .zip(channel.kraus())
                    .map(|((l, q), p)| json!({ "label": l, "region": cells(q), "value": projector_json(p) }))
                    .collect();
                json_text(&json!({
                    "dim": dim,
                    "a_values": j.a().eigenvalues(),
                    "b_values": j.b().eigenvalues(),
                    "regions": regions,
                    "defect": projector_json(channel.defect()),
                    "trace_preserving": channel.is_trace_preserving(),
                }))
            }
            Format::Text => {
                let mut s = grid_line(&j);
                for ((l, q), p) in part.labels.iter().zip(&part.regions).zip(channel.kraus()) {
                    let _ = writeln!(s, "{l} {} rank {}", cells_text(q), p.rank());
                    s.push_str(&matrix_text(p.matrix(), 2));
                }
                let _ = writeln!(s, "defect rank {}", channel.defect().rank());
                s.push_str(&matrix_text(channel.defect().matrix(), 2));
                s
            }
        })
    })())
}

fn parse_failure(src: &str, e: &ParseError) -> Fail {
    let caret = format!("{:width$}^", "", width = src[..e.offset().min(src.len())].chars().count());
    Fail {
        code: 2,
        message: format!("{e}\n  {src}\n  {caret}"),
    }
}

pub fn funcalc(a: &Path, b: &Path, f: &str, chain: &str, format: Format) -> Outcome {
    finish((|| {
        let e = expr::parse(f, &["x", "y"]).map_err(|err| parse_failure(f, &err))?;
        let a_obs = load_observable(a)?;
        let b_obs = load_observable(b)?;
        let g = GeneralizedObservable::try_new(&a_obs, &b_obs, |x, y| e.eval_xy(x, y))?;
        let spec = if chain == "ascending" {
            ChainSpec::Ascending
        } else {
            let path = Path::new(chain);
            in_file(path, files::parse_chain(&read(path)?))?
        };
        let order = spec.resolve(g.table())?;
        let out = extract_pvm(&g, &order)?;
        let is_pvm = g.is_pvm()?;
        let chain_values: Vec<f64> = order.as_slice().iter().map(|&k| g.values()[k]).collect();
        let ranks: Vec<usize> = out.projectors().iter().map(Projector::rank).collect();
        Ok(match format {
            Format::Json => json_text(&json!({
                "f": e.to_string(),
                "values": g.values(),
                "chain": chain_values,
                "is_pvm": is_pvm,
                "eigenvalues": out.eigenvalues(),
                "ranks": ranks,
                "projectors": out.projectors().iter().map(|p| matrix_json(p.matrix())).collect::<Vec<_>>(),
                "matrix": matrix_json(&out.matrix()),
            })),
            Format::Text => {
                let mut s = String::new();
                let _ = writeln!(s, "f(x, y) = {e}");
                let _ = writeln!(s, "values of f on the grid: {{{}}}", nums(g.values()));
                let _ = writeln!(s, "chain: {}", chain_values.iter().map(|&v| num(v)).collect::<Vec<_>>().join(" ≺ "));
                let _ = writeln!(
                    s,
                    "f(A,B) is {}",
                    if is_pvm { "a PVM (f_E(A,B) = f(A,B))" } else { "not a PVM" }
                );
                let _ = writeln!(s, "f_E(A,B):");
                for (v, r) in out.eigenvalues().iter().zip(&ranks) {
                    let _ = writeln!(s, "  eigenvalue {} rank {r}", num(*v));
                }
                let _ = write!(s, "matrix =\n{}", matrix_text(&out.matrix(), 2));
                s
            }
        })
    })())
}

pub fn measure(a: &Path, b: &Path, partition: &str, rho: &Path, shots: u64, seed: u64, format: Format) -> Outcome {
    finish((|| {
        let j = load_pair(a, b)?;
        let part = load_partition(partition, &j)?;
        let channel = build_channel(&j, &part)?;
        let state = in_file(rho, files::parse_density(&read(rho)?))?;
        let probs = channel.outcome_probabilities(&state)?;
        let hist = channel.sample_outcomes(&state, shots, seed)?;
        Ok(match format {
            Format::Json => {
                let mut p: Vec<Value> = probs.outcomes.iter().map(|(l, x)| json!({ "label": l, "probability": x })).collect();
                p.push(json!({ "label": gpvm::measure::NO_OUTCOME, "probability": probs.none }));
                let h: Vec<Value> = hist
                    .labels
                    .iter()
                    .zip(&hist.counts)
                    .map(|(l, c)| json!({ "label": l, "count": c, "frequency": *c as f64 / shots as f64 }))
                    .collect();
                json_text(&json!({
                    "probabilities": p,
                    "histogram": h,
                    "shots": shots,
                    "seed": seed,
                    "rng": hist.algorithm,
                }))
            }
            Format::Text => {
                let mut s = String::from("label,probability\n");
                for (l, x) in &probs.outcomes {
                    let _ = writeln!(s, "{l},{}", num(*x));
                }
                let _ = writeln!(s, "{},{}", gpvm::measure::NO_OUTCOME, num(probs.none));
                let _ = writeln!(s, "\n# shots={shots} seed={seed} rng={}", hist.algorithm);
                s.push_str(&hist.to_csv());
                s
            }
        })
    })())
}

pub fn verify(suite: &str, trials: usize, seed: u64, inject_fault: bool, format: Format) -> Outcome {
    let suites = Suite::parse_list(suite).expect("clap restricts suite names");
    let mut cfg = VerifyConfig::new(trials, seed);
    if inject_fault {
        cfg.tol = 1e-300;
    }
    let report = verify::run(&suites, &cfg);
    let text = match format {
        Format::Json => {
            let suites: Vec<Value> = report
                .suites
                .iter()
                .map(|s| {
                    json!({
                        "suite": s.suite.name(),
                        "trials": s.trials,
                        "checks": s.checks,
                        "passed": s.passed(),
                        "notes": s.notes,
                        "failures": s.failures.iter().map(|f| json!({
                            "property": f.property,
                            "trial": f.trial,
                            "trial_seed": f.trial_seed,
                            "deviation": f.deviation,
                            "bound": f.bound,
                            "witness": f.witness,
                        })).collect::<Vec<_>>(),
                    })
                })
                .collect();
            json_text(&json!({ "seed": seed, "passed": report.passed(), "suites": suites }))
        }
        Format::Text => {
            let mut s = String::new();
            for r in &report.suites {
                let status = if r.passed() { "ok" } else { "FAILED" };
                let _ = writeln!(
                    s,
                    "{:<8} {status}: {} trials, {} checks, {} failures",
                    r.suite.name(),
                    r.trials,
                    r.checks,
                    r.failures.len()
                );
                for n in &r.notes {
                    let _ = writeln!(s, "  {n}");
                }
                for f in &r.failures {
                    let _ = writeln!(
                        s,
                        "  {} failed in trial {} (trial seed {:#018x}): deviation {:.3e} > {:.3e}",
                        f.property, f.trial, f.trial_seed, f.deviation, f.bound
                    );
                    for line in f.witness.lines() {
                        let _ = writeln!(s, "    {line}");
                    }
                }
            }
            let _ = writeln!(s, "seed {seed}: {}", if report.passed() { "all properties hold" } else { "property failures" });
            s
        }
    };
    if report.passed() {
        Outcome::Ok(text)
    } else {
        Outcome::Failed { code: 1, stderr: text }
    }
}
