//! The `hsforge` command line: parse canonical JSON documents, run one
//! operation, print the canonical result.
//!
//! Results go to standard output; structured error objects go to standard
//! error. Exit codes: 0 success, 1 parse or validation failure, 2
//! precondition violation (and command-line usage errors), 3 self-check
//! failures. `--pretty` renders human-readable text instead of JSON.

use std::io::Read;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::document::{mindex_from_json, poly_from_json, poly_to_json, Document};
use crate::generate::{canonical_hs, generate_subst, integrate, GenerationProblem};
use crate::hsderiv::{act, d_of_phi, is_iterative, phi_upper_d, HSDeriv};
use crate::oracle::{default_sizes, run_suite_mode, CheckReport};
use crate::series::Series;
use crate::substitution::SubstMap;
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(
    name = "hsforge",
    version,
    about = "Exact truncated multivariate power series, substitution maps, and Hasse-Schmidt derivations"
)]
pub struct Cli {
    /// Render human-readable text instead of canonical JSON
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Cmd,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Truncated power series arithmetic
    Series {
        #[command(subcommand)]
        op: SeriesOp,
    },
    /// Substitution maps between truncated series rings
    Subst {
        #[command(subcommand)]
        op: SubstOp,
    },
    /// Hasse-Schmidt derivations
    Hs {
        #[command(subcommand)]
        op: HsOp,
    },
    /// Compute the twisted substitution map phi^D
    Phid {
        /// Substitution map document
        phi: String,
        /// Derivation document over the map's source universe
        d: String,
    },
    /// Find the substitution map phi with act(phi, D) = G
    Generate {
        /// Base derivation document (degree-one components must be a basis)
        d: String,
        /// Target derivation document of the same length
        g: String,
    },
    /// Extend a derivation on t_n to length m
    Integrate {
        /// Derivation document over a full t_n universe
        e: String,
        /// Target length
        #[arg(long)]
        m: u32,
    },
    /// Run the oracle cross-check suite
    Selfcheck(SelfcheckArgs),
}

#[derive(Subcommand, Debug)]
pub enum SeriesOp {
    /// Invert a unit series
    Invert { input: String },
    /// Multiply two series over the same universe
    Mul { a: String, b: String },
    /// Add two series over the same universe
    Add { a: String, b: String },
    /// External product over disjoint variable sets
    External { a: String, b: String },
}

#[derive(Subcommand, Debug)]
pub enum SubstOp {
    /// Apply a map to a series of its source universe
    Apply { phi: String, a: String },
    /// Compose two maps (first argument applied last)
    Compose { psi: String, phi: String },
    /// Add two maps imagewise (revalidated)
    Add { a: String, b: String },
    /// Tensor product on disjoint unions
    Tensor { a: String, b: String },
    /// The coefficient C_e(phi, alpha)
    Coeff {
        phi: String,
        /// Source multi-index as a JSON object, e.g. '{"s":2}'
        #[arg(long)]
        alpha: String,
        /// Target multi-index as a JSON object, e.g. '{"t":3}'
        #[arg(long)]
        e: String,
    },
    /// Check well-definedness on the source truncation
    Validate { phi: String },
    /// Truncate a map to norm at most n
    Truncate {
        phi: String,
        #[arg(long)]
        n: u32,
    },
}

#[derive(Subcommand, Debug)]
pub enum HsOp {
    /// Group law D ∘ E
    Compose { d: String, e: String },
    /// Group inverse
    Invert { d: String },
    /// The action phi • D
    Act { phi: String, d: String },
    /// The order ell(D) = ord(D - I)
    Ell { d: String },
    /// External product over disjoint variable sets
    External { d: String, e: String },
    /// Group commutator [D, E]
    Commutator { d: String, e: String },
    /// Iterativity test
    Iterative { d: String },
    /// The component D_alpha applied to a polynomial
    Component {
        d: String,
        /// Multi-index as a JSON object over the derivation variables
        #[arg(long)]
        alpha: String,
        /// Polynomial as a JSON term list over the derivation's ring
        #[arg(long)]
        poly: String,
    },
}

#[derive(Args, Debug)]
pub struct SelfcheckArgs {
    /// Base seed (HSFORGE_SEED overrides)
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated name=count pairs selecting checks; default runs all
    #[arg(long)]
    pub sizes: Option<String>,
    /// Corrupt one comparison per check; the suite must then fail
    #[arg(long)]
    pub perturb: bool,
}

struct CmdOutput {
    text: String,
    code: i32,
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Parse(format!("cannot read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read `{path}`: {e}")))
    }
}

fn load(path: &str) -> Result<Document> {
    Document::parse_validated(&read_input(path)?)
}

fn load_series(path: &str) -> Result<Series> {
    match load(path)? {
        Document::Series(s) => Ok(s),
        other => Err(Error::Parse(format!("expected a series document, got {}", other.kind()))),
    }
}

fn load_subst(path: &str) -> Result<SubstMap> {
    match load(path)? {
        Document::Subst(m) => Ok(m),
        other => Err(Error::Parse(format!(
            "expected a substitution document, got {}",
            other.kind()
        ))),
    }
}

fn load_subst_unchecked(path: &str) -> Result<SubstMap> {
    match Document::parse(&read_input(path)?)? {
        Document::Subst(m) => Ok(m),
        other => Err(Error::Parse(format!(
            "expected a substitution document, got {}",
            other.kind()
        ))),
    }
}

fn load_hs(path: &str) -> Result<HSDeriv> {
    match load(path)? {
        Document::Hs(d) => Ok(d),
        other => Err(Error::Parse(format!(
            "expected a derivation document, got {}",
            other.kind()
        ))),
    }
}

fn same_ring(a: &Document, b: &Document) -> Result<()> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    Ok(())
}

fn doc_out(doc: Document, pretty: bool) -> CmdOutput {
    let text = if pretty {
        match &doc {
            Document::Poly(p) => p.to_string(),
            Document::Series(s) => s.to_string(),
            Document::Subst(m) => m.to_string(),
            Document::Hs(d) => d.to_string(),
        }
    } else {
        doc.to_canonical_string()
    };
    CmdOutput { text, code: 0 }
}

fn report_to_json(reports: &[CheckReport]) -> Value {
    Value::Array(
        reports
            .iter()
            .map(|r| {
                json!({
                    "name": r.name,
                    "instances": r.instances,
                    "failures": r.failures.iter().map(|f| json!({
                        "input": f.input,
                        "expected": f.expected,
                        "got": f.got,
                    })).collect::<Vec<_>>(),
                })
            })
            .collect(),
    )
}

fn parse_sizes(spec: &str) -> Result<Vec<(String, usize)>> {
    let trimmed = spec.trim();
    if trimmed.is_empty() {
        return Ok(Vec::new());
    }
    trimmed
        .split(',')
        .map(|part| {
            let (name, count) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("size `{part}` is not name=count")))?;
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad count in `{part}`")))?;
            Ok((name.trim().to_string(), count))
        })
        .collect()
}

fn execute(cli: &Cli) -> Result<CmdOutput> {
    let pretty = cli.pretty;
    match &cli.command {
        Cmd::Series { op } => {
            let doc = match op {
                SeriesOp::Invert { input } => {
                    Document::Series(load_series(input)?.invert_recursive()?)
                }
                SeriesOp::Mul { a, b } => {
                    let (sa, sb) = (load_series(a)?, load_series(b)?);
                    Document::Series(sa.mul(&sb)?)
                }
                SeriesOp::Add { a, b } => {
                    let (sa, sb) = (load_series(a)?, load_series(b)?);
                    Document::Series(sa.add(&sb)?)
                }
                SeriesOp::External { a, b } => {
                    let (sa, sb) = (load_series(a)?, load_series(b)?);
                    Document::Series(sa.external_product(&sb)?)
                }
            };
            Ok(doc_out(doc, pretty))
        }
        Cmd::Subst { op } => match op {
            SubstOp::Apply { phi, a } => {
                let (phi, a) = (load_subst(phi)?, load_series(a)?);
                Ok(doc_out(Document::Series(phi.apply(&a)?), pretty))
            }
            SubstOp::Compose { psi, phi } => {
                let (psi, phi) = (load_subst(psi)?, load_subst(phi)?);
                Ok(doc_out(Document::Subst(SubstMap::compose(&psi, &phi)?), pretty))
            }
            SubstOp::Add { a, b } => {
                let (a, b) = (load_subst(a)?, load_subst(b)?);
                Ok(doc_out(Document::Subst(a.add(&b)?), pretty))
            }
            SubstOp::Tensor { a, b } => {
                let (a, b) = (load_subst(a)?, load_subst(b)?);
                Ok(doc_out(Document::Subst(a.tensor(&b)?), pretty))
            }
            SubstOp::Coeff { phi, alpha, e } => {
                let phi = load_subst(phi)?;
                let alpha_v: Value = serde_json::from_str(alpha)
                    .map_err(|err| Error::Parse(format!("bad alpha: {err}")))?;
                let e_v: Value = serde_json::from_str(e)
                    .map_err(|err| Error::Parse(format!("bad e: {err}")))?;
                let alpha = mindex_from_json(phi.src_vars(), &alpha_v)?;
                let e = mindex_from_json(phi.dst_vars(), &e_v)?;
                Ok(doc_out(Document::Poly(phi.coeff(&alpha, &e)?), pretty))
            }
            SubstOp::Validate { phi } => {
                let phi = load_subst_unchecked(phi)?;
                let valid = phi.validate();
                let text = if pretty {
                    format!("{}", if valid { "valid" } else { "invalid" })
                } else {
                    json!({ "valid": valid }).to_string()
                };
                Ok(CmdOutput { text, code: 0 })
            }
            SubstOp::Truncate { phi, n } => {
                let phi = load_subst(phi)?;
                Ok(doc_out(Document::Subst(phi.truncate(*n)), pretty))
            }
        },
        Cmd::Hs { op } => match op {
            HsOp::Compose { d, e } => {
                let (d, e) = (load_hs(d)?, load_hs(e)?);
                Ok(doc_out(Document::Hs(d.compose(&e)?), pretty))
            }
            HsOp::Invert { d } => Ok(doc_out(Document::Hs(load_hs(d)?.invert()), pretty)),
            HsOp::Act { phi, d } => {
                let (phi, d) = (load_subst(phi)?, load_hs(d)?);
                same_ring(&Document::Subst(phi.clone()), &Document::Hs(d.clone()))?;
                Ok(doc_out(Document::Hs(act(&phi, &d)?), pretty))
            }
            HsOp::Ell { d } => {
                let d = load_hs(d)?;
                let text = match (d.ell(), pretty) {
                    (Some(n), true) => format!("ell = {n}"),
                    (None, true) => "ell = infinity".to_string(),
                    (Some(n), false) => json!({ "ell": n }).to_string(),
                    (None, false) => json!({ "ell": "infinity" }).to_string(),
                };
                Ok(CmdOutput { text, code: 0 })
            }
            HsOp::External { d, e } => {
                let (d, e) = (load_hs(d)?, load_hs(e)?);
                Ok(doc_out(Document::Hs(d.external(&e)?), pretty))
            }
            HsOp::Commutator { d, e } => {
                let (d, e) = (load_hs(d)?, load_hs(e)?);
                Ok(doc_out(Document::Hs(d.commutator(&e)?), pretty))
            }
            HsOp::Iterative { d } => {
                let d = load_hs(d)?;
                let it = is_iterative(&d)?;
                let text = if pretty {
                    format!("{}", if it { "iterative" } else { "not iterative" })
                } else {
                    json!({ "iterative": it }).to_string()
                };
                Ok(CmdOutput { text, code: 0 })
            }
            HsOp::Component { d, alpha, poly } => {
                let d = load_hs(d)?;
                let alpha_v: Value = serde_json::from_str(alpha)
                    .map_err(|err| Error::Parse(format!("bad alpha: {err}")))?;
                let poly_v: Value = serde_json::from_str(poly)
                    .map_err(|err| Error::Parse(format!("bad poly: {err}")))?;
                let alpha = mindex_from_json(d.vars(), &alpha_v)?;
                let a = poly_from_json(d.ring(), &poly_v)?;
                Ok(doc_out(Document::Poly(d.component(&alpha, &a)?), pretty))
            }
        },
        Cmd::Phid { phi, d } => {
            let (phi, d) = (load_subst(phi)?, load_hs(d)?);
            Ok(doc_out(Document::Subst(phi_upper_d(&phi, &d)?), pretty))
        }
        Cmd::Generate { d, g } => {
            let (d, g) = (load_hs(d)?, load_hs(g)?);
            same_ring(&Document::Hs(d.clone()), &Document::Hs(g.clone()))?;
            let phi = generate_subst(&GenerationProblem::new(d, g))?;
            Ok(doc_out(Document::Subst(phi), pretty))
        }
        Cmd::Integrate { e, m } => {
            let e = load_hs(e)?;
            Ok(doc_out(Document::Hs(integrate(&e, *m)?), pretty))
        }
        Cmd::Selfcheck(args) => {
            let seed = match std::env::var("HSFORGE_SEED") {
                Ok(v) => v
                    .parse()
                    .map_err(|_| Error::Parse(format!("HSFORGE_SEED `{v}` is not an integer")))?,
                Err(_) => args.seed,
            };
            let sizes = match &args.sizes {
                Some(spec) => parse_sizes(spec)?,
                None => default_sizes(),
            };
            let reports = run_suite_mode(seed, &sizes, args.perturb);
            let failed = reports.iter().any(|r| !r.passed());
            let text = if pretty {
                let mut lines = Vec::new();
                for r in &reports {
                    lines.push(format!(
                        "{}: {} ({} assertions, {} failures)",
                        r.name,
                        if r.passed() { "pass" } else { "FAIL" },
                        r.instances,
                        r.failures.len()
                    ));
                    for f in &r.failures {
                        lines.push(format!("  {} expected {} got {}", f.input, f.expected, f.got));
                    }
                }
                lines.join("\n")
            } else {
                report_to_json(&reports).to_string()
            };
            Ok(CmdOutput { text, code: if failed { 3 } else { 0 } })
        }
    }
}

fn error_value(e: &Error) -> Value {
    json!({ "error": { "code": e.exit_code(), "message": e.to_string() } })
}

/// Parse arguments and run; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with success
            let code = if e.exit_code() == 0 { 0 } else { 2 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(out) => {
            println!("{}", out.text);
            out.code
        }
        Err(e) => {
            eprintln!("{}", error_value(&e));
            e.exit_code()
        }
    }
}

/// Which subcommand exercises each library operation; the coverage test
/// walks this table against the command tree.
pub const OP_REGISTRY: &[(&str, &str)] = &[
    ("multiindex.add", "selfcheck"),
    ("multiindex.leq", "selfcheck"),
    ("multiindex.join", "selfcheck"),
    ("multiindex.below", "selfcheck"),
    ("multiindex.coideal_tm", "series invert"),
    ("multiindex.coideal_ops", "subst truncate"),
    ("multiindex.minimal_outside", "subst validate"),
    ("multiindex.enum_ordered_partitions", "selfcheck"),
    ("multiindex.enum_indexed_partitions", "subst coeff"),
    ("algebra.poly_arith", "series mul"),
    ("algebra.derivation_apply", "generate"),
    ("algebra.solve_in_derivation_basis", "generate"),
    ("series.series_add", "series add"),
    ("series.series_mul", "series mul"),
    ("series.truncate", "subst truncate"),
    ("series.is_unit", "series invert"),
    ("series.invert_recursive", "series invert"),
    ("series.invert_partition", "selfcheck"),
    ("series.external_product", "series external"),
    ("substitution.make_subst", "subst validate"),
    ("substitution.validate", "subst validate"),
    ("substitution.coeff", "subst coeff"),
    ("substitution.apply", "subst apply"),
    ("substitution.compose", "subst compose"),
    ("substitution.add", "subst add"),
    ("substitution.tensor", "subst tensor"),
    ("substitution.power_map", "selfcheck"),
    ("substitution.has_constant_coeffs", "selfcheck"),
    ("substitution.truncate_subst", "subst truncate"),
    ("substitution.check_multiplicativity_table", "selfcheck"),
    ("hsderiv.phi_apply", "hs component"),
    ("hsderiv.component", "hs component"),
    ("hsderiv.tilde_apply", "hs compose"),
    ("hsderiv.compose", "hs compose"),
    ("hsderiv.invert", "hs invert"),
    ("hsderiv.ell", "hs ell"),
    ("hsderiv.commutator", "hs commutator"),
    ("hsderiv.external", "hs external"),
    ("hsderiv.act", "hs act"),
    ("hsderiv.phi_upper_d", "phid"),
    ("hsderiv.d_of_phi", "selfcheck"),
    ("hsderiv.is_iterative", "hs iterative"),
    ("hsderiv.op_order_at_most", "selfcheck"),
    ("generate.split_top", "selfcheck"),
    ("generate.top_action_law", "selfcheck"),
    ("generate.generate_subst", "generate"),
    ("generate.verify_uniqueness", "selfcheck"),
    ("generate.canonical_hs", "integrate"),
    ("generate.integrate", "integrate"),
    ("oracle.direct_c", "selfcheck"),
    ("oracle.hs_inverse_partition", "selfcheck"),
    ("oracle.phi_d_recursive_coeff", "selfcheck"),
    ("oracle.run_suite", "selfcheck"),
];
