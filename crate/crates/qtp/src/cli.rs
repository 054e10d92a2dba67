//! The `qtp` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use qtp_core::knit::{knit_component, ComponentSide};
use qtp_core::roots::{self, QuiverKind, SchofieldOrder};
use qtp_core::verify::{prove, prove_end_dim_one, Library, ProveOptions};
use qtp_core::{rep, Quiver};

use crate::exec::Threads;
use crate::input::{self, InputError};

#[derive(Debug, Parser)]
#[command(name = "qtp", version, about = "Certify tree modules of tame quivers as exceptional over every field")]
#[command(after_help = "Exit codes: 0 certified, 1 not certified or refused, 2 input error, 3 budget exhausted.")]
pub struct Cli {
    /// Backtracking budget of the field-independent echelonization.
    #[arg(long, global = true, env = "QTP_BACKTRACK_LIMIT", default_value_t = qtp_core::DEFAULT_BACKTRACK_LIMIT)]
    pub backtrack_limit: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tree count and the endomorphism check of one formula at a fixed n.
    CheckFormula {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long)]
        n: i64,
    },
    /// Run a proof script and everything it cites.
    Prove {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        proof: String,
        /// Write the LaTeX proof document here.
        #[arg(long)]
        emit_latex: Option<PathBuf>,
        /// Write the JSON trace here.
        #[arg(long)]
        emit_json: Option<PathBuf>,
        /// Worker threads for independent obligations.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, value_enum, default_value_t = OrderArg::SubFirst)]
        schofield_order: OrderArg,
    },
    /// Print the dimension vectors of a knitted component.
    Knit {
        /// Document holding the quiver. Without it the built-in quivers
        /// A2, K (Kronecker) and D4 are available.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        quiver: String,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long)]
        depth: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OrderArg {
    SubFirst,
    Literal,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SideArg {
    Pre,
    Inj,
}

/// Loaded input with its raw bytes.
struct Input {
    bytes: Vec<u8>,
    lib: Library,
}

fn load(path: &Path) -> Result<Input, String> {
    let bytes = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| format!("{}: not UTF-8: {e}", path.display()))?;
    let (_, lib) = input::load(text).map_err(|e: InputError| format!("{}:{e}", path.display()))?;
    Ok(Input { bytes, lib })
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display()))
}

/// Runs the command; stdout gets results, stderr diagnostics.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let budget = cli.backtrack_limit;
    match cli.command {
        Command::CheckFormula { input, formula, n } => check_formula(&input, &formula, n, budget, out, err),
        Command::Prove { input, proof, emit_latex, emit_json, jobs, schofield_order } => {
            let inp = match load(&input) {
                Ok(i) => i,
                Err(e) => {
                    let _ = writeln!(err, "error: {e}");
                    return 2;
                }
            };
            let order = match schofield_order {
                OrderArg::SubFirst => SchofieldOrder::SubFirst,
                OrderArg::Literal => SchofieldOrder::Literal,
            };
            let opts = ProveOptions { budget, order };
            let mut r = prove(&inp.lib, &proof, &opts, &Threads(jobs.max(1)));
            r.trace.meta.tool_version = env!("CARGO_PKG_VERSION").to_string();
            r.trace.meta.input_hash = crate::emit::input_hash(&inp.bytes);
            for (path, text) in [
                (emit_latex.as_deref(), emit_latex.as_ref().map(|_| qtp_core::trace::emit_latex(&r.trace))),
                (emit_json.as_deref(), emit_json.as_ref().map(|_| crate::emit::emit_json(&r.trace))),
            ] {
                if let (Some(p), Some(t)) = (path, text) {
                    if let Err(e) = write_file(p, &t) {
                        let _ = writeln!(err, "error: {e}");
                        return 2;
                    }
                }
            }
            for f in &r.failures {
                let _ = writeln!(err, "{}: {}", f.kind, f.message);
            }
            for (id, e) in r.registry.iter() {
                let _ = writeln!(out, "certified {id} {}", coverage(&e.coverage));
            }
            let code = r.exit_code();
            let _ = writeln!(out, "{}", if code == 0 { "result: certified" } else { "result: not certified" });
            code
        }
        Command::Knit { input, quiver, side, depth } => knit(input.as_deref(), &quiver, side, depth, out, err),
    }
}

fn coverage(c: &qtp_core::verify::Coverage) -> String {
    match c {
        qtp_core::verify::Coverage::From(i64::MIN) => "for all n".into(),
        qtp_core::verify::Coverage::From(k) => format!("for n >= {k}"),
        qtp_core::verify::Coverage::Points(p) => {
            let v: Vec<String> = p.iter().map(|k| k.to_string()).collect();
            format!("at n = {}", v.join(", "))
        }
    }
}

fn check_formula(path: &Path, id: &str, n: i64, budget: u64, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let inp = match load(path) {
        Ok(i) => i,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let Ok(f) = inp.lib.formula(id) else {
        let _ = writeln!(err, "error: unknown formula {id}");
        return 2;
    };
    let q = &inp.lib.quivers[&f.quiver];
    if n < f.rep.n0 {
        let _ = writeln!(err, "error: n = {n} is below the starting value {}", f.rep.n0);
        return 2;
    }
    let mut ok = true;
    match rep::tree_count(&f.rep) {
        Ok((ones, len)) => {
            let holds = ones == len - qtp_core::PolyN::constant(1);
            let _ = writeln!(out, "tree count: {ones} ones, length {len}: {}", if holds { "ok" } else { "fails" });
            if !holds {
                let _ = writeln!(err, "{id}: the number of ones is not the length minus one");
                ok = false;
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    }
    let m = match rep::instantiate_formula(q, &f.rep, n) {
        Ok(m) => m,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let _ = writeln!(out, "dimension vector at n = {n}: {:?}", m.dims.0);
    let tree = rep::coefficient_quiver_is_tree(q, &m);
    let _ = writeln!(out, "coefficient quiver is a tree: {}", if tree { "yes" } else { "no" });
    ok &= tree;
    let kind = roots::quiver_kind(q);
    if kind == QuiverKind::Other {
        let _ = writeln!(err, "{}: the quiver is neither Dynkin nor extended Dynkin", q.id);
        return 1;
    }
    let delta = if kind == QuiverKind::Tame { roots::radical_delta(q).ok() } else { None };
    match prove_end_dim_one(q, &m, delta.as_ref(), budget) {
        Ok(c) => {
            let _ = writeln!(out, "endomorphism system: {} x {}, rank {}, corank 1", c.matrix.rows(), c.matrix.cols(), c.cert.rank);
        }
        Err(e) => {
            let _ = writeln!(err, "{id} at n = {n}: {e}");
            return if e.is_budget() { 3 } else { 1 };
        }
    }
    if ok {
        0
    } else {
        1
    }
}

fn builtin(id: &str) -> Option<Quiver> {
    use qtp_core::quiver::examples::*;
    match id {
        "A2" => Some(a2()),
        "K" => Some(kronecker()),
        "D4" => Some(d4_subspace()),
        _ => None,
    }
}

fn knit(path: Option<&Path>, id: &str, side: SideArg, depth: u32, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let q = match path {
        Some(p) => match load(p) {
            Ok(i) => i.lib.quivers.get(id).cloned(),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return 2;
            }
        },
        None => builtin(id),
    };
    let Some(q) = q else {
        let _ = writeln!(err, "error: unknown quiver {id}");
        return 2;
    };
    let side = match side {
        SideArg::Pre => ComponentSide::Preprojective,
        SideArg::Inj => ComponentSide::Preinjective,
    };
    match knit_component(&q, side, depth) {
        Ok(c) => {
            let _ = writeln!(out, "vertices: {}", q.vertices().join(" "));
            for v in &c.vertices {
                let _ = writeln!(out, "({}, {}) {:?}", v.s, q.vertices()[v.i], v.dim.0);
            }
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
