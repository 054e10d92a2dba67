use qtp_core::verify::{FormulaRef, Method};
use qtp_core::{Block, DimExpr};

/// A source position, 1-based. Positions are carried for diagnostics and
/// never take part in equality, so a document equals its reprint.
#[derive(Debug, Clone, Copy, Default)]
pub struct Loc {
    pub line: u32,
    pub col: u32,
}

impl PartialEq for Loc {
    fn eq(&self, _: &Loc) -> bool {
        true
    }
}

impl Eq for Loc {}

impl std::fmt::Display for Loc {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Document {
    pub quivers: Vec<QuiverDecl>,
    pub formulas: Vec<FormulaDecl>,
    pub morphisms: Vec<MorphismDecl>,
    pub proofs: Vec<ProofDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuiverDecl {
    pub loc: Loc,
    pub id: String,
    pub vertices: Vec<(Loc, String)>,
    pub arrows: Vec<ArrowDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArrowDecl {
    pub loc: Loc,
    pub id: String,
    pub source: String,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockDecl {
    pub loc: Loc,
    pub row: usize,
    pub col: usize,
    pub block: Block,
}

/// `matrix`/`map` body. `name` is an arrow in a formula and a vertex in a
/// morphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatrixDecl {
    pub loc: Loc,
    pub name: String,
    pub rows: Vec<DimExpr>,
    pub cols: Vec<DimExpr>,
    pub blocks: Vec<BlockDecl>,
}

/// `dim v = e`, needed only for vertices without arrows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimDecl {
    pub loc: Loc,
    pub vertex: String,
    pub dim: DimExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FormulaDecl {
    pub loc: Loc,
    pub id: String,
    pub quiver: String,
    pub n0: i64,
    pub dims: Vec<DimDecl>,
    pub matrices: Vec<MatrixDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorphismDecl {
    pub loc: Loc,
    pub id: String,
    pub source: FormulaRef,
    pub target: FormulaRef,
    pub maps: Vec<MatrixDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofDecl {
    pub loc: Loc,
    pub id: String,
    pub target: String,
    pub method: Method,
}
