//! Command-line surface: session/cache handling and the subcommand tree.
//!
//! Every command emits JSON (schema version field `v: 1`) to stdout or
//! `--out`; DOT graphs go to `--dot`. Exit codes: 0 success, 2 validation
//! failure, 3 for three-valued "unknown" verdicts under `--strict`.

use crate::cauchy::{self, NullVerdict};
use crate::complete::{self, CompletionReport};
use crate::dercat::{der_object_from_json, der_object_to_json, HomTable, TableReport};
use crate::functor::{CompressionVerdict, FunctorSpec};
use crate::metric::{CompareVerdict, ExtStatus, Metric};
use crate::quiver::{dimvec_to_string, Quiver};
use crate::subcat::Subcategory;
use clap::{Args, Parser, Subcommand};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
enum CliError {
    /// Bad input or failed validation: exit code 2.
    Validation(String),
    /// A three-valued verdict came back unknown under --strict: exit 3.
    StrictUnknown(String),
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Validation(e.to_string())
    }
}

type CliResult = Result<serde_json::Value, CliError>;

#[derive(Parser, Debug)]
#[command(name = "dyncomplete", version, about = "Metric completions of bounded derived categories of Dynkin path algebras")]
pub struct Cli {
    /// Write the JSON report to a file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the DOT graph (where a command produces one) to a file.
    #[arg(long, global = true)]
    dot: Option<PathBuf>,
    /// Escalate "unknown" verdicts to exit code 3.
    #[arg(long, global = true)]
    strict: bool,
    /// Seed for the randomized indecomposable witnesses.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Skip the on-disk hom-table cache.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Inspect a quiver document.
    Quiver {
        #[command(subcommand)]
        cmd: QuiverCmd,
    },
    /// Derived-category dimension tables.
    Dercat {
        #[command(subcommand)]
        cmd: DercatCmd,
    },
    /// Metric validation, improvement, comparison and intersection.
    Metric {
        #[command(subcommand)]
        cmd: MetricCmd,
    },
    /// Completions, thick-subcategory enumeration and supports.
    Complete {
        #[command(subcommand)]
        cmd: CompleteCmd,
    },
    /// Functor application and metric transport.
    Functor {
        #[command(subcommand)]
        cmd: FunctorCmd,
    },
    /// Finite-window Cauchy diagnostics.
    Cauchy {
        #[command(subcommand)]
        cmd: CauchyCmd,
    },
}

#[derive(Args, Debug)]
struct QuiverArg {
    /// Quiver JSON document.
    #[arg(long)]
    quiver: PathBuf,
}

#[derive(Subcommand, Debug)]
enum QuiverCmd {
    /// Dynkin type, positive roots and the table hash.
    Info(QuiverArg),
}

#[derive(Subcommand, Debug)]
enum DercatCmd {
    /// Full Hom/Ext tables, projectives, injectives and the translate.
    Table(QuiverArg),
    /// Auslander-Reiten quiver as DOT.
    ArDot(QuiverArg),
}

#[derive(Subcommand, Debug)]
enum MetricCmd {
    /// Validate the metric axioms and goodness.
    Check {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
        /// Run the bounded extension-closedness verifier with this budget.
        #[arg(long)]
        verify_budget: Option<usize>,
        /// Prime field size for the bounded verifier.
        #[arg(long, default_value_t = 2)]
        verify_prime: u32,
    },
    /// Compute the improvement (coarsest good refinement).
    Improve {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
    },
    /// Compare two metrics in the refinement preorder.
    Compare {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        metric2: PathBuf,
    },
    /// Ball-wise intersection of two metrics.
    Intersect {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        metric2: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CompleteCmd {
    /// Completion with respect to a metric (the closed formula).
    Run {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
    },
    /// All thick subcategories (= all completions).
    Enumerate {
        #[command(flatten)]
        quiver: QuiverArg,
        /// Frontier cap for the fixpoint enumeration.
        #[arg(long, default_value_t = 100_000)]
        cap: usize,
    },
    /// A metric whose completion is the given thick subcategory.
    Realize {
        #[command(flatten)]
        quiver: QuiverArg,
        /// Subcategory JSON document.
        #[arg(long)]
        subcat: PathBuf,
    },
    /// Compactly and weakly compactly supported objects.
    Supports {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        metric: PathBuf,
    },
}

#[derive(Args, Debug)]
struct FunctorArgs {
    /// Source quiver of the functor.
    #[arg(long)]
    quiver: PathBuf,
    /// Target quiver; defaults to the source (endofunctors) or to A_1 for
    /// the vertex-evaluation builtin.
    #[arg(long)]
    target_quiver: Option<PathBuf>,
    /// Functor JSON document (explicit map or builtin).
    #[arg(long)]
    functor: PathBuf,
}

#[derive(Subcommand, Debug)]
enum FunctorCmd {
    /// Apply the functor to an object.
    Apply {
        #[command(flatten)]
        f: FunctorArgs,
        /// Object JSON: list of [dimvec, shift].
        #[arg(long)]
        object: PathBuf,
    },
    /// Preimage of a metric on the target.
    Preimage {
        #[command(flatten)]
        f: FunctorArgs,
        #[arg(long)]
        metric: PathBuf,
    },
    /// Image of a metric on the source (requires fullness).
    Image {
        #[command(flatten)]
        f: FunctorArgs,
        #[arg(long)]
        metric: PathBuf,
        /// Compute the image even when fullness is unknown.
        #[arg(long)]
        force_full: bool,
    },
    /// Decide whether the functor is a compression.
    Compress {
        #[command(flatten)]
        f: FunctorArgs,
        /// Metric on the source category.
        #[arg(long)]
        metric_src: PathBuf,
        /// Metric on the target category.
        #[arg(long)]
        metric_tgt: PathBuf,
    },
    /// Object-level check of the induced equivalence between completions.
    Transport {
        #[command(flatten)]
        f: FunctorArgs,
        /// Metric on the target category.
        #[arg(long)]
        metric: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum CauchyCmd {
    /// Cone of an explicit map of representations.
    Cone {
        #[command(flatten)]
        quiver: QuiverArg,
        /// Map JSON: {"source": rep, "target": rep, "components": {...},
        /// "shift": 0}.
        #[arg(long)]
        map: PathBuf,
    },
    /// Cauchy-window verdict against a metric ball.
    Window {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// Ball index to test against.
        #[arg(long, default_value_t = 1)]
        ball: usize,
        /// Shift bound for the good-Cauchy variant.
        #[arg(long, default_value_t = 2)]
        shift_bound: i64,
    },
    /// Null-sequence necessary-condition test.
    Null {
        #[command(flatten)]
        quiver: QuiverArg,
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        metric: PathBuf,
        /// Check balls 1..=i_max.
        #[arg(long, default_value_t = 8)]
        i_max: usize,
    },
}

/// Table loading with the on-disk cache. Cache entries are keyed by the
/// quiver hash; writes go through a temp file and an atomic rename.
struct Session {
    seed: u64,
    cache_dir: Option<PathBuf>,
}

impl Session {
    fn new(seed: u64, no_cache: bool) -> Self {
        let cache_dir = if no_cache {
            None
        } else {
            std::env::var_os("DYNCOMPLETE_CACHE")
                .map(PathBuf::from)
                .or_else(|| {
                    std::env::var_os("HOME")
                        .map(|h| PathBuf::from(h).join(".cache").join("dyncomplete"))
                })
        };
        Session { seed, cache_dir }
    }

    fn load_quiver(&self, path: &Path) -> Result<Quiver, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
        Ok(Quiver::parse(&text)?)
    }

    fn table(&self, path: &Path) -> Result<HomTable, CliError> {
        let q = self.load_quiver(path)?;
        self.table_for(q)
    }

    fn table_for(&self, q: Quiver) -> Result<HomTable, CliError> {
        if let Some(dir) = &self.cache_dir {
            let file = dir.join(format!("{}.json", q.hash()));
            if let Ok(json) = std::fs::read_to_string(&file) {
                if let Ok(t) = HomTable::from_cache_json(q.clone(), self.seed, &json) {
                    return Ok(t);
                }
                // corrupt or stale: fall through and rebuild
            }
            let t = HomTable::build(q, self.seed)?;
            if std::fs::create_dir_all(dir).is_ok() {
                let tmp = dir.join(format!(".{}.tmp-{}", t.hash(), std::process::id()));
                if std::fs::write(&tmp, t.cache_json()).is_ok() {
                    let _ = std::fs::rename(&tmp, &file);
                }
            }
            Ok(t)
        } else {
            Ok(HomTable::build(q, self.seed)?)
        }
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn subcat_json(t: &HomTable, s: &Subcategory) -> serde_json::Value {
    s.to_json(t)
}

/// JSON form of an extension-closedness status (shared with the C ABI).
pub fn ext_status_json(s: &ExtStatus) -> serde_json::Value {
    match s {
        ExtStatus::Guaranteed(reason) => serde_json::json!({
            "status": "guaranteed",
            "reason": reason,
        }),
        ExtStatus::Unverified => serde_json::json!({"status": "unverified"}),
        ExtStatus::VerifiedUpToBudget => serde_json::json!({"status": "verified-up-to-budget"}),
        ExtStatus::Counterexample(w) => serde_json::json!({
            "status": "counterexample",
            "witness": w,
        }),
    }
}

/// JSON form of a completion report (shared with the C ABI).
pub fn completion_report_json(t: &HomTable, r: &CompletionReport) -> serde_json::Value {
    serde_json::json!({
        "v": SCHEMA_VERSION,
        "intersection_ball": subcat_json(t, &r.intersection_ball),
        "shift_closure": subcat_json(t, &r.ball_shift_closure),
        "completion": subcat_json(t, &r.completion),
        "good_branch_used": r.good_branch_used,
        "generators": r.generators.iter().map(|g| {
            g.iter().map(|&x| dimvec_to_string(t.registry().root(x))).collect::<Vec<_>>()
        }).collect::<Vec<_>>(),
        "cross_checks": r.cross_checks.iter().map(|(n, p)| {
            serde_json::json!({"name": n, "pass": p})
        }).collect::<Vec<_>>(),
    })
}

/// Builds a functor from a document: either an explicit object map or a
/// builtin constructor.
fn load_functor(
    session: &Session,
    args: &FunctorArgs,
) -> Result<(HomTable, HomTable, FunctorSpec), CliError> {
    let doc = read_json(&args.functor)?;
    let source = session.table(&args.quiver)?;
    if let Some(builtin) = doc.get("builtin") {
        let kind = builtin
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| CliError::Validation("builtin needs a kind".into()))?;
        match kind {
            "identity" => {
                let f = crate::functor::identity(&source);
                let target = session.load_quiver(&args.quiver)?;
                let target = session.table_for(target)?;
                Ok((source, target, f))
            }
            "shift" => {
                let k = builtin.get("k").and_then(|k| k.as_i64()).unwrap_or(1);
                let f = crate::functor::shift_power(&source, k);
                let target = session.table(&args.quiver)?;
                Ok((source, target, f))
            }
            "vertex_eval" => {
                let label = builtin
                    .get("vertex")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| CliError::Validation("vertex_eval needs a vertex".into()))?;
                let v = source
                    .quiver()
                    .labels()
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| CliError::Validation(format!("unknown vertex {label:?}")))?;
                let target = match &args.target_quiver {
                    Some(p) => session.table(p)?,
                    None => session.table_for(a1_quiver())?,
                };
                let f = crate::functor::vertex_evaluation(&source, &target, v)?;
                Ok((source, target, f))
            }
            "tensor_proj" => {
                let label = builtin
                    .get("vertex")
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| CliError::Validation("tensor_proj needs a vertex".into()))?;
                let target = match &args.target_quiver {
                    Some(p) => session.table(p)?,
                    None => {
                        return Err(CliError::Validation(
                            "tensor_proj needs --target-quiver".into(),
                        ))
                    }
                };
                let v = target
                    .quiver()
                    .labels()
                    .iter()
                    .position(|l| l == label)
                    .ok_or_else(|| CliError::Validation(format!("unknown vertex {label:?}")))?;
                let f = crate::functor::tensor_projective(&source, &target, v)?;
                Ok((source, target, f))
            }
            "inclusion" => {
                let target = match &args.target_quiver {
                    Some(p) => session.table(p)?,
                    None => {
                        return Err(CliError::Validation(
                            "inclusion needs --target-quiver".into(),
                        ))
                    }
                };
                let images_doc = builtin
                    .get("images")
                    .ok_or_else(|| CliError::Validation("inclusion needs images".into()))?;
                let obj = der_object_from_json(&target, images_doc)?;
                if obj.summands().len() != source.root_count() {
                    return Err(CliError::Validation(
                        "inclusion images must list one target per source root".into(),
                    ));
                }
                let f = crate::functor::inclusion(&source, &target, obj.summands().to_vec())?;
                Ok((source, target, f))
            }
            "zero" => {
                let target = match &args.target_quiver {
                    Some(p) => session.table(p)?,
                    None => session.table(&args.quiver)?,
                };
                let f = crate::functor::zero_functor(&source, &target);
                Ok((source, target, f))
            }
            other => Err(CliError::Validation(format!("unknown builtin {other:?}"))),
        }
    } else {
        let target = match &args.target_quiver {
            Some(p) => session.table(p)?,
            None => session.table(&args.quiver)?,
        };
        let f = FunctorSpec::from_json(&source, &target, &doc)?;
        Ok((source, target, f))
    }
}

fn a1_quiver() -> Quiver {
    Quiver::parse(r#"{"vertices":["1"],"arrows":[]}"#).expect("A_1 parses")
}

fn run_command(cli: &Cli) -> CliResult {
    let session = Session::new(cli.seed, cli.no_cache);
    let mut dot_payload: Option<String> = None;
    let report = match &cli.cmd {
        Cmd::Quiver { cmd: QuiverCmd::Info(qa) } => {
            let q = session.load_quiver(&qa.quiver)?;
            let reg = q.enumerate_positive_roots();
            serde_json::json!({
                "v": SCHEMA_VERSION,
                "dynkin_type": q.dynkin_type().to_string(),
                "vertices": q.labels(),
                "arrows": q.arrows().iter().map(|&(s, t)| {
                    serde_json::json!([q.labels()[s], q.labels()[t]])
                }).collect::<Vec<_>>(),
                "root_count": reg.len(),
                "roots": reg.roots().iter().map(|r| dimvec_to_string(r)).collect::<Vec<_>>(),
                "hash": q.hash(),
            })
        }
        Cmd::Dercat { cmd } => match cmd {
            DercatCmd::Table(qa) => {
                let t = session.table(&qa.quiver)?;
                serde_json::to_value(TableReport::new(&t)).expect("report serializes")
            }
            DercatCmd::ArDot(qa) => {
                let t = session.table(&qa.quiver)?;
                let dot = complete::ar_quiver_dot(&t)?;
                dot_payload = Some(dot.clone());
                serde_json::json!({"v": SCHEMA_VERSION, "dot": dot})
            }
        },
        Cmd::Metric { cmd } => match cmd {
            MetricCmd::Check {
                quiver,
                metric,
                verify_budget,
                verify_prime,
            } => {
                let t = session.table(&quiver.quiver)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                let verdict = m.validate();
                let ext = match verify_budget {
                    Some(budget) => m.verify_extension_closed(&t, *budget, *verify_prime)?,
                    None => verdict.extension_closed.clone(),
                };
                if cli.strict && matches!(ext, ExtStatus::Unverified) {
                    return Err(CliError::StrictUnknown(
                        "extension-closedness unverified".into(),
                    ));
                }
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "is_metric": verdict.is_metric && !matches!(ext, ExtStatus::Counterexample(_)),
                    "is_good": verdict.is_good,
                    "witnesses": verdict.witnesses,
                    "extension_closed": ext_status_json(&ext),
                })
            }
            MetricCmd::Improve { quiver, metric } => {
                let t = session.table(&quiver.quiver)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                let imp = m.improvement()?;
                if cli.strict && imp.finite_horizon().is_some() {
                    return Err(CliError::StrictUnknown(
                        "improvement tail inference hit the finite horizon".into(),
                    ));
                }
                let mut doc = imp.to_json(&t);
                doc["v"] = serde_json::json!(SCHEMA_VERSION);
                doc
            }
            MetricCmd::Compare { quiver, metric, metric2 } => {
                let t = session.table(&quiver.quiver)?;
                let m1 = Metric::from_json(&t, &read_json(metric)?)?;
                let m2 = Metric::from_json(&t, &read_json(metric2)?)?;
                let verdict = m1.compare(&m2);
                if cli.strict && verdict == CompareVerdict::Unknown {
                    return Err(CliError::StrictUnknown("comparison is unknown".into()));
                }
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "verdict": verdict.to_string(),
                })
            }
            MetricCmd::Intersect { quiver, metric, metric2 } => {
                let t = session.table(&quiver.quiver)?;
                let m1 = Metric::from_json(&t, &read_json(metric)?)?;
                let m2 = Metric::from_json(&t, &read_json(metric2)?)?;
                let m = m1.intersect_metric(&m2)?;
                if cli.strict && m.finite_horizon().is_some() {
                    return Err(CliError::StrictUnknown(
                        "intersection tail inference hit the finite horizon".into(),
                    ));
                }
                let mut doc = m.to_json(&t);
                doc["v"] = serde_json::json!(SCHEMA_VERSION);
                doc
            }
        },
        Cmd::Complete { cmd } => match cmd {
            CompleteCmd::Run { quiver, metric } => {
                let t = session.table(&quiver.quiver)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                let rep = complete::completion(&t, &m)?;
                completion_report_json(&t, &rep)
            }
            CompleteCmd::Enumerate { quiver, cap } => {
                let t = session.table(&quiver.quiver)?;
                let thicks = complete::enumerate_thick(&t, *cap)?;
                dot_payload = Some(complete::hasse_dot(&t, &thicks));
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "count": thicks.len(),
                    "thick_subcategories": thicks.iter().map(|s| subcat_json(&t, s)).collect::<Vec<_>>(),
                })
            }
            CompleteCmd::Realize { quiver, subcat } => {
                let t = session.table(&quiver.quiver)?;
                let s = Subcategory::from_json(&t, &read_json(subcat)?)?;
                let m = complete::realize_as_completion(&t, &s)?;
                let mut doc = serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "completion_check": "pass",
                });
                doc["metric"] = m.to_json(&t);
                doc
            }
            CompleteCmd::Supports { quiver, metric } => {
                let t = session.table(&quiver.quiver)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                let (compact, weak) = complete::supports(&t, &m)?;
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "compact": subcat_json(&t, &compact),
                    "weak": subcat_json(&t, &weak),
                })
            }
        },
        Cmd::Functor { cmd } => match cmd {
            FunctorCmd::Apply { f, object } => {
                let (source, target, func) = load_functor(&session, f)?;
                let x = der_object_from_json(&source, &read_json(object)?)?;
                let image = func.apply(&x);
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "image": der_object_to_json(&target, &image),
                })
            }
            FunctorCmd::Preimage { f, metric } => {
                let (source, target, func) = load_functor(&session, f)?;
                let m = Metric::from_json(&target, &read_json(metric)?)?;
                let pre = func.preimage_metric(&source, &m)?;
                let mut doc = pre.to_json(&source);
                doc["v"] = serde_json::json!(SCHEMA_VERSION);
                doc
            }
            FunctorCmd::Image { f, metric, force_full } => {
                let (source, target, func) = load_functor(&session, f)?;
                let m = Metric::from_json(&source, &read_json(metric)?)?;
                let img = func.image_metric(&source, &m, *force_full)?;
                let mut doc = img.to_json(&target);
                doc["v"] = serde_json::json!(SCHEMA_VERSION);
                doc
            }
            FunctorCmd::Compress { f, metric_src, metric_tgt } => {
                let (source, target, func) = load_functor(&session, f)?;
                let ms = Metric::from_json(&source, &read_json(metric_src)?)?;
                let mt = Metric::from_json(&target, &read_json(metric_tgt)?)?;
                let verdict = func.is_compression(&source, &ms, &mt)?;
                if cli.strict && verdict == CompressionVerdict::Unknown {
                    return Err(CliError::StrictUnknown("compression is unknown".into()));
                }
                match verdict {
                    CompressionVerdict::Yes => serde_json::json!({
                        "v": SCHEMA_VERSION, "verdict": "yes",
                    }),
                    CompressionVerdict::No { ball_index } => serde_json::json!({
                        "v": SCHEMA_VERSION, "verdict": "no", "witness_ball": ball_index,
                    }),
                    CompressionVerdict::Unknown => serde_json::json!({
                        "v": SCHEMA_VERSION, "verdict": "unknown",
                    }),
                }
            }
            FunctorCmd::Transport { f, metric } => {
                let (source, target, func) = load_functor(&session, f)?;
                let m = Metric::from_json(&target, &read_json(metric)?)?;
                let rep = complete::transport_check(&func, &source, &target, &m)?;
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "bijection": rep.bijection,
                    "adjunction_dims_ok": rep.adjunction_dims_ok,
                    "pairs": rep.pairs.iter().map(|&(s, t2, off)| {
                        serde_json::json!([
                            dimvec_to_string(source.registry().root(s)),
                            dimvec_to_string(target.registry().root(t2)),
                            off,
                        ])
                    }).collect::<Vec<_>>(),
                    "source_completion": subcat_json(&source, &rep.source_completion),
                    "target_completion": subcat_json(&target, &rep.target_completion),
                })
            }
        },
        Cmd::Cauchy { cmd } => match cmd {
            CauchyCmd::Cone { quiver, map } => {
                let t = session.table(&quiver.quiver)?;
                let doc = read_json(map)?;
                let src = crate::replin::representation_from_json(
                    t.quiver(),
                    doc.get("source")
                        .ok_or_else(|| CliError::Validation("map needs a source".into()))?,
                )?;
                let tgt = crate::replin::representation_from_json(
                    t.quiver(),
                    doc.get("target")
                        .ok_or_else(|| CliError::Validation("map needs a target".into()))?,
                )?;
                let f = crate::replin::repmap_from_json(t.quiver(), &src, &tgt, &doc)?;
                let shift = doc.get("shift").and_then(|s| s.as_i64()).unwrap_or(0);
                let cone = cauchy::cone_of_map(&t, &f, &src, &tgt, shift)?;
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "cone": der_object_to_json(&t, &cone),
                })
            }
            CauchyCmd::Window { quiver, window, metric, ball, shift_bound } => {
                let t = session.table(&quiver.quiver)?;
                let w = cauchy::window_from_json(&t, &read_json(window)?)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                let v = cauchy::window_is_cauchy(&t, &w, &m, *ball, *shift_bound)?;
                if cli.strict && v.dimension_level {
                    return Err(CliError::StrictUnknown(
                        "window verdict is dimension-level only".into(),
                    ));
                }
                serde_json::json!({
                    "v": SCHEMA_VERSION,
                    "ball": ball,
                    "cauchy_from": v.cauchy_from,
                    "good_cauchy_from": v.good_cauchy_from,
                    "shift_bound": v.shift_bound,
                    "dimension_level": v.dimension_level,
                    "cones": v.cones.iter().map(|((a, b), c)| {
                        serde_json::json!({
                            "pair": [a, b],
                            "cone": der_object_to_json(&t, c),
                        })
                    }).collect::<Vec<_>>(),
                })
            }
            CauchyCmd::Null { quiver, window, metric, i_max } => {
                let t = session.table(&quiver.quiver)?;
                let w = cauchy::window_from_json(&t, &read_json(window)?)?;
                let m = Metric::from_json(&t, &read_json(metric)?)?;
                match cauchy::null_test(&t, &w, &m, *i_max)? {
                    NullVerdict::NullConsistent => serde_json::json!({
                        "v": SCHEMA_VERSION, "verdict": "null-consistent",
                    }),
                    NullVerdict::Obstruction { index, ball } => serde_json::json!({
                        "v": SCHEMA_VERSION, "verdict": "obstruction",
                        "index": index, "ball": ball,
                    }),
                }
            }
        },
    };
    Ok((report, dot_payload))
        .map(|(mut r, dot)| {
            if let (Some(path), Some(dot)) = (&cli.dot, dot) {
                if let Err(e) = std::fs::write(path, dot) {
                    r["dot_error"] = serde_json::json!(e.to_string());
                }
            }
            r
        })
}

/// Entry point used by the binary; parses argv and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run_command(&cli) {
        Ok(report) => {
            let mut text = serde_json::to_string_pretty(&report).expect("reports serialize");
            text.push('\n');
            match &cli.out {
                Some(path) => {
                    if let Err(e) = std::fs::write(path, text) {
                        eprintln!("error: {e}");
                        return 2;
                    }
                }
                None => print!("{text}"),
            }
            0
        }
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::StrictUnknown(msg)) => {
            let mut text = String::new();
            let _ = writeln!(text, "{{\"v\":{SCHEMA_VERSION},\"verdict\":\"unknown\"}}");
            match &cli.out {
                Some(path) => {
                    let _ = std::fs::write(path, &text);
                }
                None => print!("{text}"),
            }
            eprintln!("unknown verdict under --strict: {msg}");
            3
        }
    }
}
