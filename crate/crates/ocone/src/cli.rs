//! Command-line front end.
//!
//! Exit codes: 0 on success or acceptance, 1 when a verification fails, 2 on
//! usage or input errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use ocone_core::bridge::{discretize, sup_gap, StepFunction};
use ocone_core::counterexamples::{ce1_invariance_report, ce1_law, ce2_invariance_report, ce2_law};
use ocone_core::law::{
    enumerate_law_with_cap, invariance_report, ocone_check, ocone_check_pasted,
    pushforward_reflect, CheckMode, InvarianceReport, Mass, OconeReport, PathLaw, ProcessSpec,
};
use ocone_core::solver::{orbit_census, Solver};
use ocone_core::{SkipFreePath, WalkPath};
use serde::Serialize;
use serde_json::{json, Value};

use crate::continuous::cf_check;
use crate::error::{Error, Result};
use crate::formats::{
    lattice_jumps, law_entries, read_law_csv, read_law_json, read_sampled_csv, write_law_csv,
};
use crate::sampler::{sample, Clock, Sample, SamplerKind, SamplerSpec, TimeChange};
use crate::stats::{ocone_independence_test, reflect_two_sample_test, TestReport};

/// Environment variable holding the default seed.
pub const SEED_ENV: &str = "OCONE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "ocone",
    version,
    about = "Reflection invariance and Ocone checks for skip-free processes"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GlobalArgs {
    /// Output format; `reflect` defaults to text, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Significance level of the statistical tests.
    #[arg(long, global = true, default_value_t = 0.01)]
    pub alpha: f64,
    /// Pass threshold of the characteristic-function check, in standard errors.
    #[arg(long, global = true, default_value_t = 3.0)]
    pub z: f64,
    #[arg(long, global = true, default_value_t = 16)]
    pub law_cap: usize,
    #[arg(long, global = true, default_value_t = 12)]
    pub orbit_cap: usize,
    /// Number of meshes `a_n = 2^-n` in the default mesh sequence.
    #[arg(long, global = true, default_value_t = 10)]
    pub mesh_levels: usize,
    /// Explicit strictly decreasing mesh sequence, overriding the default.
    #[arg(long, global = true, value_delimiter = ',')]
    pub mesh_sequence: Option<Vec<f64>>,
    /// Worker threads; 0 lets the thread pool decide.
    #[arg(long, global = true, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Reflect a path at a level.
    Reflect {
        #[arg(long, allow_hyphen_values = true)]
        path: String,
        #[arg(long, allow_hyphen_values = true)]
        level: i64,
        /// Reflect at the first exit from `(-level, level)` instead.
        #[arg(long)]
        exit: bool,
    },
    /// Find a word in the levels {0,1,2} mapping one walk onto another.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
    },
    /// Connected components of the reflection graph on walks.
    OrbitCensus {
        #[arg(long, default_value_t = 8)]
        m_max: usize,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0,1,2",
            allow_hyphen_values = true
        )]
        levels: Vec<i64>,
    },
    /// Exact law of a process, optionally pushed forward by a reflection.
    Law {
        #[command(flatten)]
        process: ProcessArgs,
        #[arg(long, allow_hyphen_values = true)]
        reflect: Option<i64>,
    },
    /// Exact Ocone check of a process law.
    OconeCheck {
        #[command(flatten)]
        process: ProcessArgs,
        /// Extend paths that stop moving by an independent fair walk first.
        #[arg(long)]
        pasted: bool,
        /// Exit with 1 unless the law is Ocone.
        #[arg(long)]
        assert_ocone: bool,
    },
    /// Invariance report of one of the two counterexamples.
    Counterexample {
        /// 1 or 2.
        which: u8,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "level", allow_hyphen_values = true)]
        levels: Option<Vec<i64>>,
        /// Exit with 1 unless every checked level leaves the law invariant.
        #[arg(long)]
        assert_invariant: bool,
        /// Also write the support as CSV.
        #[arg(long)]
        support_csv: Option<PathBuf>,
    },
    /// Discretize a sampled path (CSV with columns t,value) on a lattice.
    Discretize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mesh: Option<f64>,
        /// Use `a_n` from the mesh sequence (1-based) when no mesh is given.
        #[arg(long, default_value_t = 1)]
        level: usize,
        /// The input is a scaled lattice walk, so crossings are exact.
        #[arg(long)]
        exact: bool,
    },
    /// Characteristic-function check on continuous samples.
    CfCheck {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        lambda: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        breaks: Vec<f64>,
        #[arg(long, default_value_t = 10_000)]
        n_samples: usize,
    },
    /// Draw samples from a sampler.
    Simulate {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 10)]
        n: usize,
    },
    /// Two-sample test of invariance under one reflection.
    TestReflect {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        level: i64,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
    /// Independence test between walk prefix and quadratic variation.
    TestIndependence {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 100_000)]
        n: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    Bernoulli,
    Ce1,
    Ce2,
    Zero,
    /// Fair walk run by a clock with Bernoulli(p) increments.
    LazyClock,
    /// Law read from `--law-file`.
    Table,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProcessArgs {
    #[arg(long, value_enum, default_value = "bernoulli")]
    pub process: ProcessKind,
    #[arg(long, default_value_t = 3)]
    pub m: usize,
    /// Clock probability for `lazy-clock`, as a fraction such as 1/2.
    #[arg(long, default_value = "1/2")]
    pub p: String,
    /// Law file (JSON, or CSV when the name ends in .csv).
    #[arg(long)]
    pub law_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SamplerChoice {
    BernoulliWalk,
    OconeTimeChange,
    Ce1,
    Ce2,
    DependentTimeChange,
    BrownianGrid,
    BrownianWalk,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SamplerArgs {
    #[arg(long = "spec", value_enum)]
    pub kind: Option<SamplerChoice>,
    /// Steps of a discrete sampler.
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Clock probability of `ocone-time-change`.
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Fixed clock path for `ocone-time-change`, e.g. 0,1,1,2.
    #[arg(long, value_delimiter = ',')]
    pub clock: Option<Vec<i64>>,
    /// Grid steps of `brownian-grid`.
    #[arg(long, default_value_t = 64)]
    pub steps: usize,
    #[arg(long, default_value_t = 1.0)]
    pub horizon: f64,
    /// Walk mesh of `brownian-walk`.
    #[arg(long, default_value_t = 1.0 / 64.0)]
    pub mesh: f64,
    #[arg(long, value_enum, default_value = "none")]
    pub time_change: TimeChange,
}

impl SamplerArgs {
    fn spec(&self, default: SamplerChoice, seed: u64) -> Result<SamplerSpec> {
        let m = self.m;
        let kind = match self.kind.unwrap_or(default) {
            SamplerChoice::BernoulliWalk => SamplerKind::BernoulliWalk { horizon: m },
            SamplerChoice::OconeTimeChange => SamplerKind::OconeTimeChange {
                horizon: m,
                clock: match &self.clock {
                    Some(values) => Clock::Fixed {
                        values: values.clone(),
                    },
                    None => Clock::Lazy { p: self.p },
                },
            },
            SamplerChoice::Ce1 => SamplerKind::Ce1 { horizon: m },
            SamplerChoice::Ce2 => SamplerKind::Ce2 { horizon: m },
            SamplerChoice::DependentTimeChange => SamplerKind::DependentTimeChange { horizon: m },
            SamplerChoice::BrownianGrid => SamplerKind::BrownianGrid {
                steps: self.steps,
                horizon: self.horizon,
                time_change: self.time_change,
            },
            SamplerChoice::BrownianWalk => SamplerKind::BrownianWalk {
                mesh: self.mesh,
                horizon: self.horizon,
            },
        };
        SamplerSpec::new(kind, seed)
    }
}

/// Fully resolved configuration, embedded in every report.
#[derive(Debug, Clone, Serialize)]
pub struct Config {
    pub command: Command,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub seed: u64,
    pub alpha: f64,
    pub z: f64,
    pub law_cap: usize,
    pub orbit_cap: usize,
    pub mesh_sequence: Vec<f64>,
    pub workers: usize,
}

impl Config {
    pub fn resolve(cli: &Cli) -> Result<Config> {
        let g = &cli.global;
        let default_format = match cli.command {
            Command::Reflect { .. } => Format::Text,
            _ => Format::Json,
        };
        let mesh_sequence = match &g.mesh_sequence {
            Some(seq) => seq.clone(),
            None => (1..=g.mesh_levels).map(|n| 0.5f64.powi(n as i32)).collect(),
        };
        let config = Config {
            command: cli.command.clone(),
            format: g.format.unwrap_or(default_format),
            output: g.output.clone(),
            seed: g.seed,
            alpha: g.alpha,
            z: g.z,
            law_cap: g.law_cap,
            orbit_cap: g.orbit_cap,
            mesh_sequence,
            workers: g.workers,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.law_cap == 0 || self.orbit_cap == 0 {
            return bad("caps must be positive");
        }
        if self.mesh_sequence.is_empty()
            || self
                .mesh_sequence
                .iter()
                .any(|a| !(*a > 0.0) || !a.is_finite())
        {
            return bad("mesh sequence must be nonempty and positive");
        }
        if self.mesh_sequence.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("mesh sequence must be strictly decreasing");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must lie in (0, 1)");
        }
        if !(self.z > 0.0) {
            return bad("z must be positive");
        }
        Ok(())
    }
}

/// What a command produced and whether its verification held.
struct Outcome {
    body: Body,
    ok: bool,
}

enum Body {
    Text(String),
    Json(Value),
    Csv(Vec<u8>),
}

impl Outcome {
    fn pass(body: Body) -> Self {
        Outcome { body, ok: true }
    }
}

fn csv_bytes<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn report(config: &Config, mut body: Value) -> Value {
    body.as_object_mut()
        .expect("reports are objects")
        .insert("config".into(), json!(config));
    body
}

fn mass_json(q: &Mass) -> Value {
    json!({ "num": q.numer().to_string(), "den": q.denom().to_string() })
}

fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("bad fraction {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: num_bigint::BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: num_bigint::BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == 0.into() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let x: f64 = s.trim().parse().map_err(|_| bad())?;
            BigRational::from_float(x).ok_or_else(bad)
        }
    }
}

fn read_law_file(path: &Path) -> Result<PathLaw> {
    let file = BufReader::new(File::open(path)?);
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
    {
        read_law_csv(file)
    } else {
        read_law_json(file)
    }
}

fn process_law(args: &ProcessArgs, cap: usize) -> Result<PathLaw> {
    let spec = match args.process {
        ProcessKind::Bernoulli => ProcessSpec::BernoulliWalk,
        ProcessKind::Ce1 => ProcessSpec::Ce1,
        ProcessKind::Ce2 => ProcessSpec::Ce2,
        ProcessKind::Zero => ProcessSpec::Zero,
        ProcessKind::LazyClock => {
            let p = parse_rational(&args.p)?;
            if p < BigRational::from_integer(0.into()) || p > BigRational::from_integer(1.into()) {
                return Err(Error::InvalidConfig(
                    "clock probability must lie in [0, 1]".into(),
                ));
            }
            ProcessSpec::TimeChangedWalk {
                clock: ProcessSpec::lazy_clock(args.m, &p),
            }
        }
        ProcessKind::Table => {
            let path = args
                .law_file
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("table needs --law-file".into()))?;
            ProcessSpec::Table(read_law_file(path)?)
        }
    };
    Ok(enumerate_law_with_cap(&spec, args.m, cap)?)
}

fn law_body(config: &Config, law: &PathLaw) -> Result<Body> {
    Ok(match config.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_law_csv(law, &mut buf)?;
            Body::Csv(buf)
        }
        _ => Body::Json(report(
            config,
            json!({ "horizon": law.horizon(), "law": law_entries(law) }),
        )),
    })
}

fn ocone_json(r: &OconeReport) -> Value {
    json!({
        "mode": match r.mode { CheckMode::Direct => "direct", CheckMode::Pasted => "pasted" },
        "is_product": r.is_product,
        "embedded_uniform": r.embedded_uniform,
        "is_ocone": r.is_ocone(),
        "stagnating_mass": mass_json(&r.stagnating_mass),
        "censored_classes": r.censored_classes,
        "witness": r.witness().map(|w| w.increments()),
        "uniformity_witness": r.uniformity_witness.as_ref().map(|w| json!({
            "class": qv_string(&w.class),
            "path": w.path.increments(),
            "mass": mass_json(&w.mass),
            "level": w.level,
            "image": w.image.map(|i| i.increments()),
            "image_mass": w.image_mass.as_ref().map(mass_json),
        })),
        "product_witness": r.product_witness.as_ref().map(|w| json!({
            "reference": qv_string(&w.reference),
            "class": qv_string(&w.class),
            "prefix": w.prefix.increments(),
            "reference_mass": mass_json(&w.reference_mass),
            "class_mass": mass_json(&w.class_mass),
        })),
    })
}

fn qv_string(qv: &ocone_core::QuadraticVariation) -> String {
    qv.as_slice()
        .iter()
        .map(u32::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn invariance_json(r: &InvarianceReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            json!({
                "level": c.level,
                "invariant": c.invariant,
                "discrepancies": c.discrepancies.len(),
                "witness": c.witness.as_ref().map(|w| json!({
                    "path": w.path.increments(),
                    "values": w.path.as_slice(),
                    "original": mass_json(&w.left),
                    "reflected": mass_json(&w.right),
                })),
            })
        })
        .collect();
    json!({ "horizon": r.horizon, "checks": checks })
}

fn test_outcome(config: &Config, spec: &SamplerSpec, r: &TestReport) -> Result<Outcome> {
    let body = match config.format {
        Format::Csv => Body::Csv(csv_bytes(r.witness_cells.iter().map(|c| {
            (
                c.first.clone(),
                c.last.clone(),
                c.observed[0],
                c.observed.get(1).copied().unwrap_or(0),
                c.contribution,
            )
        }))?),
        _ => Body::Json(report(config, json!({ "sampler": spec, "result": r }))),
    };
    Ok(Outcome {
        body,
        ok: !r.reject,
    })
}

fn execute(config: &Config) -> Result<Outcome> {
    match &config.command {
        Command::Reflect { path, level, exit } => {
            let p: SkipFreePath = path.parse()?;
            let q = if *exit {
                p.exit_reflect(*level)?
            } else {
                p.reflect(*level)
            };
            Ok(Outcome::pass(match config.format {
                Format::Text => Body::Text(format!("{}\n", q.increments())),
                Format::Csv => Body::Csv(csv_bytes([(p.increments(), *level, q.increments())])?),
                Format::Json => Body::Json(report(
                    config,
                    json!({
                        "input": p.increments(),
                        "level": level,
                        "map": if *exit { "exit" } else { "first-passage" },
                        "output": q.increments(),
                        "values": q.as_slice(),
                    }),
                )),
            }))
        }
        Command::Solve { s, t } => {
            let s: WalkPath = s.parse()?;
            let t: WalkPath = t.parse()?;
            let word = Solver::new().solve(&s, &t)?;
            let verified = word.apply(&s) == t && word.first_ineffective(&s).is_none();
            let body = match config.format {
                Format::Csv => Body::Csv(csv_bytes([(
                    s.len(),
                    s.increments(),
                    t.increments(),
                    word.to_string(),
                    verified,
                )])?),
                _ => Body::Json(report(
                    config,
                    json!({ "m": s.len(), "s": s.increments(), "t": t.increments(), "word": word.levels(), "verified": verified }),
                )),
            };
            Ok(Outcome { body, ok: verified })
        }
        Command::OrbitCensus { m_max, levels } => {
            let rows = orbit_census(*m_max, levels, config.orbit_cap)?;
            let flat: Vec<(usize, String, usize, usize)> = rows
                .iter()
                .map(|r| {
                    let lv = r
                        .levels
                        .iter()
                        .map(i64::to_string)
                        .collect::<Vec<_>>()
                        .join(";");
                    (r.m, lv, r.n_components, r.max_component_diameter)
                })
                .collect();
            Ok(Outcome::pass(match config.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    w.write_record(["m", "levels", "n_components", "max_component_diameter"])?;
                    for r in &flat {
                        w.serialize(r)?;
                    }
                    Body::Csv(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                }
                _ => Body::Json(report(
                    config,
                    json!({ "rows": flat.iter().map(|r| json!({
                        "m": r.0, "levels": levels, "n_components": r.2, "max_component_diameter": r.3,
                    })).collect::<Vec<_>>() }),
                )),
            }))
        }
        Command::Law { process, reflect } => {
            let mut law = process_law(process, config.law_cap)?;
            if let Some(a) = reflect {
                law = pushforward_reflect(&law, *a);
            }
            Ok(Outcome::pass(law_body(config, &law)?))
        }
        Command::OconeCheck {
            process,
            pasted,
            assert_ocone,
        } => {
            let law = process_law(process, config.law_cap)?;
            let r = if *pasted {
                ocone_check_pasted(&law)
            } else {
                ocone_check(&law)
            };
            let ok = !*assert_ocone || r.is_ocone();
            Ok(Outcome {
                body: Body::Json(report(config, ocone_json(&r))),
                ok,
            })
        }
        Command::Counterexample {
            which,
            m,
            levels,
            assert_invariant,
            support_csv,
        } => {
            let (law, r) = match which {
                1 => {
                    let m = m.unwrap_or(3);
                    let law = ce1_law(m)?;
                    let r = match levels {
                        Some(l) => invariance_report(&law, l)?,
                        None => ce1_invariance_report(m)?,
                    };
                    (law, r)
                }
                2 => {
                    let m = m.unwrap_or(7);
                    let law = ce2_law(m)?;
                    let r = match levels {
                        Some(l) => {
                            // block-complete check is shared with the default report
                            ce2_invariance_report(m)?;
                            invariance_report(&law, l)?
                        }
                        None => ce2_invariance_report(m)?,
                    };
                    (law, r)
                }
                _ => return Err(Error::InvalidConfig("counterexample must be 1 or 2".into())),
            };
            if let Some(path) = support_csv {
                write_law_csv(&law, File::create(path)?)?;
            }
            let ok = !*assert_invariant || r.all_invariant();
            let body = match config.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    write_law_csv(&law, &mut buf)?;
                    Body::Csv(buf)
                }
                _ => {
                    let mut v = invariance_json(&r);
                    v["process"] = json!(which);
                    v["ocone"] = ocone_json(&ocone_check(&law));
                    Body::Json(report(config, v))
                }
            };
            Ok(Outcome { body, ok })
        }
        Command::Discretize {
            input,
            mesh,
            level,
            exact,
        } => {
            let a = match mesh {
                Some(a) => *a,
                None => *config
                    .mesh_sequence
                    .get(level.wrapping_sub(1))
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("no mesh a_{level} in the sequence"))
                    })?,
            };
            let path = read_sampled_csv(BufReader::new(File::open(input)?), *exact)?;
            let lattice = discretize(&path, a)?;
            let gap = sup_gap(&path, &lattice)?;
            let jumps = lattice_jumps(&lattice);
            let body = match config.format {
                Format::Csv => Body::Csv(csv_bytes(jumps)?),
                _ => Body::Json(report(
                    config,
                    json!({
                        "mesh": a,
                        "exact_crossings": exact,
                        "n_jumps": jumps.len(),
                        "bracket": a * a * jumps.len() as f64,
                        "jumps": jumps,
                        "sup_gap": { "gap": gap.gap, "slack": gap.slack, "bound": gap.bound(), "within_bound": gap.within_bound() },
                    }),
                )),
            };
            Ok(Outcome {
                body,
                ok: gap.within_bound(),
            })
        }
        Command::CfCheck {
            sampler,
            lambda,
            breaks,
            n_samples,
        } => {
            let spec = sampler.spec(SamplerChoice::BrownianGrid, config.seed)?;
            let h = StepFunction::new(breaks.clone(), lambda.clone())?;
            let r = cf_check(&spec, *n_samples, &h, config.z)?;
            let body = match config.format {
                Format::Csv => Body::Csv(csv_bytes([&r])?),
                _ => Body::Json(report(config, json!({ "sampler": spec, "result": r }))),
            };
            Ok(Outcome { body, ok: r.pass })
        }
        Command::Simulate { sampler, n } => {
            let spec = sampler.spec(SamplerChoice::BernoulliWalk, config.seed)?;
            let samples = sample(&spec, *n)?;
            let body = match config.format {
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    if spec.is_discrete() {
                        w.write_record(["sample", "path"])?;
                    } else {
                        w.write_record(["sample", "t", "value", "qv"])?;
                    }
                    for (i, s) in samples.iter().enumerate() {
                        match s {
                            Sample::Discrete(p) => w.serialize((i, p.increments()))?,
                            Sample::Continuous(c) => {
                                for (k, (&t, &x)) in
                                    c.path.times().iter().zip(c.path.values()).enumerate()
                                {
                                    let q =
                                        c.qv.values()
                                            .get(k)
                                            .copied()
                                            .unwrap_or_else(|| c.qv.value_at(t));
                                    w.serialize((i, t, x, q))?;
                                }
                            }
                        }
                    }
                    Body::Csv(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                }
                _ => {
                    let items: Vec<Value> = samples
                        .iter()
                        .map(|s| match s {
                            Sample::Discrete(p) => json!(p.increments()),
                            Sample::Continuous(c) => json!({
                                "times": c.path.times(),
                                "values": c.path.values(),
                                "qv_times": c.qv.times(),
                                "qv": c.qv.values(),
                            }),
                        })
                        .collect();
                    Body::Json(report(config, json!({ "sampler": spec, "samples": items })))
                }
            };
            Ok(Outcome::pass(body))
        }
        Command::TestReflect {
            sampler,
            level,
            depth,
            n,
        } => {
            let spec = sampler.spec(SamplerChoice::BernoulliWalk, config.seed)?;
            let r = reflect_two_sample_test(&spec, *level, *n, *depth, config.alpha)?;
            test_outcome(config, &spec, &r)
        }
        Command::TestIndependence { sampler, depth, n } => {
            let spec = sampler.spec(SamplerChoice::OconeTimeChange, config.seed)?;
            let r = ocone_independence_test(&spec, *n, *depth, config.alpha)?;
            test_outcome(config, &spec, &r)
        }
    }
}

fn write_body(config: &Config, body: &Body, out: &mut dyn Write) -> Result<()> {
    let bytes = match body {
        Body::Text(s) => s.clone().into_bytes(),
        Body::Json(v) => {
            let mut b = serde_json::to_vec_pretty(v)?;
            b.push(b'\n');
            b
        }
        Body::Csv(b) => b.clone(),
    };
    match &config.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => out.write_all(&bytes)?,
    }
    Ok(())
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let config = match Config::resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let outcome = if config.workers > 0 {
        match rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
        {
            Ok(pool) => pool.install(|| execute(&config)),
            Err(e) => Err(Error::InvalidConfig(e.to_string())),
        }
    } else {
        execute(&config)
    };
    match outcome.and_then(|o| write_body(&config, &o.body, out).map(|_| o.ok)) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}
