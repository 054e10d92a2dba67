//! Proof traces: every step a verifier takes, with the matrices before and
//! after, and a LaTeX rendering of the whole document.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use crate::block::{BlockMatrix, Combo, ComboMatrix, ProductDetail, Sym};
use crate::block_rank::{BlockCoef, BlockOpKind};
use crate::expr::{DimExpr, PolyN};
use crate::fi::{ElementaryOp, FiMatrix, OpKind};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "kebab-case"))]
pub enum Snapshot {
    Fi { label: String, matrix: FiMatrix },
    Block { label: String, matrix: BlockMatrix },
    Combo { label: String, matrix: ComboMatrix },
    Dims { label: String, dims: Vec<DimExpr> },
    Poly { label: String, value: PolyN },
    /// A concrete integer matrix, row-major.
    Int { label: String, rows: usize, cols: usize, entries: Vec<i64> },
}

impl Snapshot {
    pub fn label(&self) -> &str {
        match self {
            Snapshot::Fi { label, .. }
            | Snapshot::Block { label, .. }
            | Snapshot::Combo { label, .. }
            | Snapshot::Dims { label, .. }
            | Snapshot::Poly { label, .. }
            | Snapshot::Int { label, .. } => label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "kebab-case"))]
pub enum Operation {
    None,
    Fi { op: ElementaryOp },
    Block { op: BlockOpKind },
    Product { detail: ProductDetail },
    Check { statement: String, holds: bool },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StepKind {
    Section,
    Note,
    Echelon,
    BlockEchelon,
    Product,
    Refinement,
    Check,
    Conclusion,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Step {
    pub kind: StepKind,
    pub caption: String,
    pub inputs: Vec<Snapshot>,
    pub operation: Operation,
    pub outputs: Vec<Snapshot>,
}

impl Step {
    pub fn section(caption: impl Into<String>) -> Step {
        Step { kind: StepKind::Section, caption: caption.into(), inputs: Vec::new(), operation: Operation::None, outputs: Vec::new() }
    }

    pub fn note(caption: impl Into<String>) -> Step {
        Step { kind: StepKind::Note, caption: caption.into(), inputs: Vec::new(), operation: Operation::None, outputs: Vec::new() }
    }

    pub fn check(caption: impl Into<String>, statement: impl Into<String>, holds: bool) -> Step {
        Step {
            kind: StepKind::Check,
            caption: caption.into(),
            inputs: Vec::new(),
            operation: Operation::Check { statement: statement.into(), holds },
            outputs: Vec::new(),
        }
    }

    pub fn with_inputs(mut self, s: Vec<Snapshot>) -> Step {
        self.inputs = s;
        self
    }

    pub fn with_outputs(mut self, s: Vec<Snapshot>) -> Step {
        self.outputs = s;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceMeta {
    pub formula: String,
    pub proof: String,
    pub method: u8,
    pub tool_version: String,
    pub input_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ProofTrace {
    pub meta: TraceMeta,
    pub steps: Vec<Step>,
}

/// Steps for an echelonization: the input once, then every operation with
/// the matrix it produced.
pub fn echelon_steps(label: &str, input: &FiMatrix, ops: &[ElementaryOp]) -> Result<Vec<Step>, crate::fi::FiError> {
    let mut out = Vec::with_capacity(ops.len());
    let mut m = input.clone();
    for (k, op) in ops.iter().enumerate() {
        let before = m.clone();
        crate::fi::apply_op(&mut m, op.kind)?;
        let inputs = if k == 0 { alloc::vec![Snapshot::Fi { label: label.to_string(), matrix: before }] } else { Vec::new() };
        out.push(Step {
            kind: StepKind::Echelon,
            caption: format!("{}", op.kind),
            inputs,
            operation: Operation::Fi { op: *op },
            outputs: alloc::vec![Snapshot::Fi { label: label.to_string(), matrix: m.clone() }],
        });
    }
    Ok(out)
}

pub fn block_echelon_steps(label: &str, cert: &crate::block_rank::BlockRankCertificate) -> Vec<Step> {
    let mut out = Vec::with_capacity(cert.steps.len());
    for (k, s) in cert.steps.iter().enumerate() {
        let inputs = if k == 0 {
            alloc::vec![Snapshot::Block { label: label.to_string(), matrix: cert.input.clone() }]
        } else {
            Vec::new()
        };
        out.push(Step {
            kind: StepKind::BlockEchelon,
            caption: format!("{}", s.kind),
            inputs,
            operation: Operation::Block { op: s.kind },
            outputs: alloc::vec![Snapshot::Block { label: label.to_string(), matrix: s.after.clone() }],
        });
    }
    out
}

// ---- LaTeX ---------------------------------------------------------------

/// Escapes text for LaTeX body text.
pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\textbackslash{}"),
            '{' | '}' | '$' | '&' | '#' | '_' | '%' => {
                out.push('\\');
                out.push(ch);
            }
            '^' => out.push_str("\\^{}"),
            '~' => out.push_str("\\~{}"),
            '<' => out.push_str("$<$"),
            '>' => out.push_str("$>$"),
            c => out.push(c),
        }
    }
    out
}

fn dim_tex(d: DimExpr) -> String {
    format!("{{{d}}}")
}

fn block_tex(sym: Sym, sign: i8, r: DimExpr, c: DimExpr) -> String {
    let s = if sign < 0 { "-" } else { "" };
    match sym {
        Sym::Zero => format!("0_{{{r}\\times {c}}}"),
        Sym::I => format!("{s}I_{}", dim_tex(r)),
        Sym::E => format!("{s}E_{}", dim_tex(r)),
    }
}

fn combo_tex(c: Combo, r: DimExpr, col: DimExpr) -> String {
    let term = |k: i64, name: &str, first: bool| -> String {
        let sign = if k < 0 { "-" } else if first { "" } else { "+" };
        let mag = if k.abs() == 1 { String::new() } else { format!("{}", k.abs()) };
        format!("{sign}{mag}{name}_{}", dim_tex(r))
    };
    match (c.ci, c.ce) {
        (0, 0) => format!("0_{{{r}\\times {col}}}"),
        (i, 0) => term(i, "I", true),
        (0, e) => term(e, "E", true),
        (i, e) => format!("{}{}", term(i, "I", true), term(e, "E", false)),
    }
}

fn matrix_env(rows: usize, cols: usize, cell: impl Fn(usize, usize) -> String) -> String {
    if rows == 0 || cols == 0 {
        return format!("0_{{{rows}\\times {cols}}}");
    }
    let mut s = String::from("\\begin{pmatrix}");
    for i in 0..rows {
        if i > 0 {
            s.push_str("\\\\ ");
        }
        for j in 0..cols {
            if j > 0 {
                s.push_str(" & ");
            }
            s.push_str(&cell(i, j));
        }
    }
    s.push_str("\\end{pmatrix}");
    s
}

pub fn fi_tex(m: &FiMatrix) -> String {
    matrix_env(m.rows(), m.cols(), |i, j| format!("{}", m.get(i, j)))
}

pub fn block_matrix_tex(m: &BlockMatrix) -> String {
    let (r, c) = (m.row_partition(), m.col_partition());
    matrix_env(r.len(), c.len(), |i, j| {
        let b = m.get(i, j);
        block_tex(b.sym, b.sign, r[i], c[j])
    })
}

pub fn combo_matrix_tex(m: &ComboMatrix) -> String {
    matrix_env(m.rows.len(), m.cols.len(), |i, j| combo_tex(m.get(i, j), m.rows[i], m.cols[j]))
}

fn dims_tex(d: &[DimExpr]) -> String {
    let parts: Vec<String> = d.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn snapshot_tex(s: &Snapshot) -> String {
    let body = match s {
        Snapshot::Fi { matrix, .. } => fi_tex(matrix),
        Snapshot::Block { matrix, .. } => block_matrix_tex(matrix),
        Snapshot::Combo { matrix, .. } => combo_matrix_tex(matrix),
        Snapshot::Dims { dims, .. } => dims_tex(dims),
        Snapshot::Poly { value, .. } => format!("{value}"),
        Snapshot::Int { rows, cols, entries, .. } => matrix_env(*rows, *cols, |i, j| format!("{}", entries[i * cols + j])),
    };
    format!("\\text{{{}}} = {}", escape(s.label()), body)
}

fn fi_op_tex(k: OpKind) -> String {
    let pm = |s: i8| if s < 0 { "-" } else { "+" };
    match k {
        OpKind::SwapRows { i, j } => format!("r_{{{}}} \\leftrightarrow r_{{{}}}", i + 1, j + 1),
        OpKind::SwapCols { i, j } => format!("c_{{{}}} \\leftrightarrow c_{{{}}}", i + 1, j + 1),
        OpKind::AddRow { target, source, sign } => {
            format!("r_{{{t}}} \\leftarrow r_{{{t}}} {} r_{{{}}}", pm(sign), source + 1, t = target + 1)
        }
        OpKind::AddCol { target, source, sign } => {
            format!("c_{{{t}}} \\leftarrow c_{{{t}}} {} c_{{{}}}", pm(sign), source + 1, t = target + 1)
        }
    }
}

fn coef_tex(c: BlockCoef) -> (&'static str, &'static str) {
    let pm = if c.sign < 0 { "-" } else { "+" };
    let m = if c.sym == Sym::E { "E" } else { "" };
    (pm, m)
}

fn block_op_tex(k: BlockOpKind) -> String {
    match k {
        BlockOpKind::AddRow { target, source, coef } => {
            let (pm, m) = coef_tex(coef);
            format!("R_{{{t}}} \\leftarrow R_{{{t}}} {pm} {m}R_{{{}}}", source + 1, t = target + 1)
        }
        BlockOpKind::AddCol { target, source, coef } => {
            let (pm, m) = coef_tex(coef);
            format!("C_{{{t}}} \\leftarrow C_{{{t}}} {pm} C_{{{}}}{m}", source + 1, t = target + 1)
        }
    }
}

fn combo_plain(c: Combo) -> String {
    match (c.ci, c.ce) {
        (0, 0) => "0".into(),
        _ => {
            let t = combo_tex(c, DimExpr::ZERO, DimExpr::ZERO);
            t.replace("_{0}", "")
        }
    }
}

fn product_tex(d: &ProductDetail, out: &mut String) {
    if d.cells.is_empty() {
        out.push_str("All products vanish.\n\n");
        return;
    }
    out.push_str("\\begin{align*}\n");
    for (k, cell) in d.cells.iter().enumerate() {
        let terms: Vec<String> =
            cell.terms.iter().map(|t| format!("({})({})", combo_plain(t.left), combo_plain(t.right))).collect();
        let _ = write!(out, "({},{}) &= {} = {}", cell.row + 1, cell.col + 1, terms.join(" + "), combo_plain(cell.result));
        if cell.terms.iter().any(|t| t.rewrite) {
            out.push_str(" && \\text{using } E^2 = I");
        }
        if k + 1 < d.cells.len() {
            out.push_str("\\\\");
        }
        out.push('\n');
    }
    out.push_str("\\end{align*}\n");
}

const PREAMBLE: &str = "\\documentclass{article}\n\
\\usepackage{amsmath}\n\
\\usepackage{amssymb}\n\
\\setcounter{MaxMatrixCols}{200}\n\
\\allowdisplaybreaks\n\
\\begin{document}\n";

/// Renders the trace as a standalone LaTeX document.
pub fn emit_latex(t: &ProofTrace) -> String {
    let mut out = String::from(PREAMBLE);
    let _ = write!(
        out,
        "\\section*{{Proof {} for {}}}\n\\begin{{itemize}}\n\\item method: {}\n\\item tool version: {}\n\\item input hash: \\texttt{{{}}}\n\\end{{itemize}}\n\n",
        escape(&t.meta.proof),
        escape(&t.meta.formula),
        t.meta.method,
        escape(&t.meta.tool_version),
        escape(&t.meta.input_hash),
    );
    for s in &t.steps {
        step_tex(s, &mut out);
    }
    out.push_str("\\end{document}\n");
    out
}

fn display(out: &mut String, body: &str) {
    let _ = writeln!(out, "\\[ {body} \\]");
}

fn step_tex(s: &Step, out: &mut String) {
    match s.kind {
        StepKind::Section => {
            let _ = writeln!(out, "\\subsection*{{{}}}", escape(&s.caption));
        }
        StepKind::Note | StepKind::Conclusion | StepKind::Refinement => {
            let _ = writeln!(out, "{}\n", escape(&s.caption));
        }
        StepKind::Echelon | StepKind::BlockEchelon => {}
        StepKind::Product | StepKind::Check => {
            let _ = writeln!(out, "{}\n", escape(&s.caption));
        }
    }
    for i in &s.inputs {
        display(out, &snapshot_tex(i));
    }
    match &s.operation {
        Operation::Fi { op } => {
            let after = s.outputs.first().map(snapshot_tex).unwrap_or_default();
            display(out, &format!("\\xrightarrow{{{}}} {}", fi_op_tex(op.kind), after));
            return;
        }
        Operation::Block { op } => {
            let after = s.outputs.first().map(snapshot_tex).unwrap_or_default();
            display(out, &format!("\\xrightarrow{{{}}} {}", block_op_tex(*op), after));
            return;
        }
        Operation::Product { detail } => product_tex(detail, out),
        Operation::Check { statement, holds } => {
            let mark = if *holds { "holds" } else { "FAILS" };
            let _ = writeln!(out, "\\emph{{{}}}: {}\n", escape(statement), mark);
        }
        Operation::None => {}
    }
    for o in &s.outputs {
        display(out, &snapshot_tex(o));
    }
}
