//! Canonical text form. Comments are not preserved.

use std::fmt::Write;

use qtp_core::verify::{FormulaRef, Method, SesRef, Shift};
use qtp_core::{Block, DimExpr, Sym};

use super::ast::*;

pub fn dimexpr(d: DimExpr) -> String {
    let head = match d.a {
        0 => return d.b.to_string(),
        1 => "n".to_string(),
        a => format!("{a}n"),
    };
    match d.b {
        0 => head,
        b if b > 0 => format!("{head}+{b}"),
        b => format!("{head}-{}", -b),
    }
}

fn block(b: Block) -> &'static str {
    match (b.sym, b.sign < 0) {
        (Sym::Zero, _) => "Z",
        (Sym::I, false) => "I",
        (Sym::I, true) => "-I",
        (Sym::E, false) => "E",
        (Sym::E, true) => "-E",
    }
}

fn dims(v: &[DimExpr]) -> String {
    v.iter().map(|&d| dimexpr(d)).collect::<Vec<_>>().join(", ")
}

fn matrix(out: &mut String, kw: &str, m: &MatrixDecl) {
    let _ = write!(out, "  {kw} {} rows({}) cols({}) {{", m.name, dims(&m.rows), dims(&m.cols));
    if m.blocks.is_empty() {
        out.push_str("}\n");
        return;
    }
    out.push('\n');
    for b in &m.blocks {
        let _ = writeln!(out, "    block {} {} = {}", b.row, b.col, block(b.block));
    }
    out.push_str("  }\n");
}

pub fn reference(r: &FormulaRef) -> String {
    let mut s = r.formula.clone();
    match r.shift {
        Shift::Same => {}
        Shift::Minus(c) => {
            let _ = write!(s, "@n-{c}");
        }
        Shift::At(k) => {
            let _ = write!(s, "@{k}");
        }
    }
    if !r.perm.is_empty() {
        let p: Vec<String> = r.perm.iter().map(|(a, b)| format!("{a} -> {b}")).collect();
        let _ = write!(s, " permuted({})", p.join(", "));
    }
    s
}

fn ses(s: &SesRef) -> String {
    format!("pair (sub {} quot {} f {} g {})", reference(&s.sub), reference(&s.quot), s.f, s.g)
}

pub fn serialize_document(d: &Document) -> String {
    let mut out = String::new();
    let sep = |out: &mut String| {
        if !out.is_empty() {
            out.push('\n');
        }
    };
    for q in &d.quivers {
        sep(&mut out);
        let _ = writeln!(out, "quiver {} {{", q.id);
        for (_, v) in &q.vertices {
            let _ = writeln!(out, "  vertex {v}");
        }
        for a in &q.arrows {
            let _ = writeln!(out, "  arrow {} : {} -> {}", a.id, a.source, a.target);
        }
        out.push_str("}\n");
    }
    for f in &d.formulas {
        sep(&mut out);
        let _ = write!(out, "formula {} on {}", f.id, f.quiver);
        if f.n0 != 0 {
            let _ = write!(out, " param n >= {}", f.n0);
        }
        out.push_str(" {\n");
        for x in &f.dims {
            let _ = writeln!(out, "  dim {} = {}", x.vertex, dimexpr(x.dim));
        }
        for m in &f.matrices {
            matrix(&mut out, "matrix", m);
        }
        out.push_str("}\n");
    }
    for m in &d.morphisms {
        sep(&mut out);
        let _ = writeln!(out, "morphism {} : {} -> {} {{", m.id, reference(&m.source), reference(&m.target));
        for x in &m.maps {
            matrix(&mut out, "map", x);
        }
        out.push_str("}\n");
    }
    for p in &d.proofs {
        sep(&mut out);
        let _ = writeln!(out, "proof {} for {} {{", p.id, p.target);
        match &p.method {
            Method::One { n } => {
                let _ = writeln!(out, "  method1 at n = {n}");
            }
            Method::Two { base, pairs } => {
                let b: Vec<String> = base.iter().map(|k| k.to_string()).collect();
                let _ = writeln!(out, "  method2 base {}", b.join(", "));
                for s in pairs {
                    let _ = writeln!(out, "    {}", ses(s));
                }
            }
            Method::Three { pairs } => {
                out.push_str("  method3\n");
                for s in pairs {
                    let _ = writeln!(out, "    {}", ses(s));
                }
            }
        }
        out.push_str("}\n");
    }
    out
}
