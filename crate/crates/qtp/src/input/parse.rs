use qtp_core::verify::{FormulaRef, Method, SesRef, Shift};
use qtp_core::{Block, DimExpr};

use super::ast::*;
use super::lex::{lex, Tok};
use super::InputError;

struct Parser {
    toks: Vec<(Loc, Tok)>,
    pos: usize,
}

type R<T> = Result<T, InputError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn loc(&self) -> Loc {
        self.toks[self.pos].0
    }

    fn next(&mut self) -> (Loc, Tok) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &str) -> R<T> {
        Err(InputError::syntax(self.loc(), format!("expected {expected}, found {}", self.peek().describe())))
    }

    fn expect(&mut self, t: Tok) -> R<Loc> {
        if *self.peek() == t {
            Ok(self.next().0)
        } else {
            self.fail(&t.describe())
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Word(w) if w == kw)
    }

    fn keyword(&mut self, kw: &str) -> R<Loc> {
        if self.is_kw(kw) {
            Ok(self.next().0)
        } else {
            self.fail(&format!("`{kw}`"))
        }
    }

    fn id(&mut self) -> R<String> {
        match self.peek().clone() {
            Tok::Word(w) => {
                self.next();
                Ok(w)
            }
            Tok::Int(k) => {
                self.next();
                Ok(k.to_string())
            }
            _ => self.fail("an identifier"),
        }
    }

    fn int(&mut self) -> R<i64> {
        match *self.peek() {
            Tok::Int(k) => {
                self.next();
                Ok(k)
            }
            _ => self.fail("an integer"),
        }
    }

    fn usize(&mut self) -> R<usize> {
        Ok(self.int()? as usize)
    }

    fn dimexpr(&mut self) -> R<DimExpr> {
        let a = match self.peek().clone() {
            Tok::Int(k) => {
                self.next();
                if self.is_kw("n") {
                    self.next();
                    k
                } else {
                    return Ok(DimExpr::constant(k));
                }
            }
            Tok::Word(w) if w == "n" => {
                self.next();
                1
            }
            _ => return self.fail("a dimension expression"),
        };
        let b = match self.peek() {
            Tok::Plus => {
                self.next();
                self.int()?
            }
            Tok::Minus => {
                self.next();
                -self.int()?
            }
            _ => 0,
        };
        Ok(DimExpr::new(a, b))
    }

    fn dim_list(&mut self, kw: &str) -> R<Vec<DimExpr>> {
        self.keyword(kw)?;
        self.expect(Tok::LParen)?;
        let mut v = vec![self.dimexpr()?];
        while *self.peek() == Tok::Comma {
            self.next();
            v.push(self.dimexpr()?);
        }
        self.expect(Tok::RParen)?;
        Ok(v)
    }

    fn block_value(&mut self) -> R<Block> {
        let neg = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        let b = match self.peek() {
            Tok::Word(w) if w == "Z" && !neg => Block::ZERO,
            Tok::Word(w) if w == "I" => Block::I,
            Tok::Word(w) if w == "E" => Block::E,
            _ => return self.fail(if neg { "`I` or `E`" } else { "`Z`, `I`, `-I`, `E` or `-E`" }),
        };
        self.next();
        Ok(if neg { b.neg() } else { b })
    }

    /// `NAME rows(...) cols(...) { block i j = B ... }`
    fn matrix(&mut self, loc: Loc) -> R<MatrixDecl> {
        let name = self.id()?;
        let rows = self.dim_list("rows")?;
        let cols = self.dim_list("cols")?;
        self.expect(Tok::LBrace)?;
        let mut blocks = Vec::new();
        while self.is_kw("block") {
            let loc = self.next().0;
            let row = self.usize()?;
            let col = self.usize()?;
            self.expect(Tok::Eq)?;
            let block = self.block_value()?;
            blocks.push(BlockDecl { loc, row, col, block });
        }
        self.expect(Tok::RBrace)?;
        Ok(MatrixDecl { loc, name, rows, cols, blocks })
    }

    fn quiver(&mut self) -> R<QuiverDecl> {
        let loc = self.keyword("quiver")?;
        let id = self.id()?;
        self.expect(Tok::LBrace)?;
        let mut vertices = Vec::new();
        while self.is_kw("vertex") {
            let l = self.next().0;
            vertices.push((l, self.id()?));
        }
        if vertices.is_empty() {
            return self.fail("`vertex`");
        }
        let mut arrows = Vec::new();
        while self.is_kw("arrow") {
            let loc = self.next().0;
            let id = self.id()?;
            self.expect(Tok::Colon)?;
            let source = self.id()?;
            self.expect(Tok::Arrow)?;
            let target = self.id()?;
            arrows.push(ArrowDecl { loc, id, source, target });
        }
        if *self.peek() != Tok::RBrace {
            return self.fail("`arrow` or `}`");
        }
        self.next();
        Ok(QuiverDecl { loc, id, vertices, arrows })
    }

    fn formula(&mut self) -> R<FormulaDecl> {
        let loc = self.keyword("formula")?;
        let id = self.id()?;
        self.keyword("on")?;
        let quiver = self.id()?;
        let mut n0 = 0;
        if self.is_kw("param") {
            self.next();
            self.keyword("n")?;
            self.expect(Tok::Ge)?;
            n0 = self.int()?;
        }
        self.expect(Tok::LBrace)?;
        let (mut dims, mut matrices) = (Vec::new(), Vec::new());
        loop {
            if self.is_kw("dim") {
                let loc = self.next().0;
                let vertex = self.id()?;
                self.expect(Tok::Eq)?;
                dims.push(DimDecl { loc, vertex, dim: self.dimexpr()? });
            } else if self.is_kw("matrix") {
                let l = self.next().0;
                matrices.push(self.matrix(l)?);
            } else if *self.peek() == Tok::RBrace && !(matrices.is_empty() && dims.is_empty()) {
                self.next();
                break;
            } else {
                return self.fail(if matrices.is_empty() && dims.is_empty() {
                    "`matrix` or `dim`"
                } else {
                    "`matrix`, `dim` or `}`"
                });
            }
        }
        Ok(FormulaDecl { loc, id, quiver, n0, dims, matrices })
    }

    /// `ID [@n-c | @K] [permuted(i -> j, ...)]`
    fn reference(&mut self) -> R<FormulaRef> {
        let formula = self.id()?;
        let mut shift = Shift::Same;
        if *self.peek() == Tok::At {
            self.next();
            if self.is_kw("n") {
                self.next();
                self.expect(Tok::Minus)?;
                let loc = self.loc();
                let c = self.int()?;
                if c < 1 {
                    return Err(InputError::syntax(loc, "shift must be at least 1"));
                }
                shift = Shift::Minus(c);
            } else {
                shift = Shift::At(self.int()?);
            }
        }
        let mut perm = Vec::new();
        if self.is_kw("permuted") {
            self.next();
            self.expect(Tok::LParen)?;
            loop {
                let a = self.id()?;
                self.expect(Tok::Arrow)?;
                let b = self.id()?;
                perm.push((a, b));
                match self.peek() {
                    Tok::Comma => {
                        self.next();
                    }
                    Tok::RParen => {
                        self.next();
                        break;
                    }
                    Tok::Word(_) | Tok::Int(_) => {}
                    _ => return self.fail("`,` or `)`"),
                }
            }
        }
        Ok(FormulaRef { formula, shift, perm })
    }

    fn morphism(&mut self) -> R<MorphismDecl> {
        let loc = self.keyword("morphism")?;
        let id = self.id()?;
        self.expect(Tok::Colon)?;
        let source = self.reference()?;
        self.expect(Tok::Arrow)?;
        let target = self.reference()?;
        self.expect(Tok::LBrace)?;
        let mut maps = Vec::new();
        while self.is_kw("map") {
            let l = self.next().0;
            maps.push(self.matrix(l)?);
        }
        if *self.peek() != Tok::RBrace {
            return self.fail("`map` or `}`");
        }
        self.next();
        Ok(MorphismDecl { loc, id, source, target, maps })
    }

    fn ses(&mut self) -> R<SesRef> {
        self.keyword("pair")?;
        self.expect(Tok::LParen)?;
        self.keyword("sub")?;
        let sub = self.reference()?;
        self.keyword("quot")?;
        let quot = self.reference()?;
        self.keyword("f")?;
        let f = self.id()?;
        self.keyword("g")?;
        let g = self.id()?;
        self.expect(Tok::RParen)?;
        Ok(SesRef { sub, quot, f, g })
    }

    fn proof(&mut self) -> R<ProofDecl> {
        let loc = self.keyword("proof")?;
        let id = self.id()?;
        self.keyword("for")?;
        let target = self.id()?;
        self.expect(Tok::LBrace)?;
        let method = match self.peek() {
            Tok::Word(w) if w == "method1" => {
                self.next();
                self.keyword("at")?;
                self.keyword("n")?;
                self.expect(Tok::Eq)?;
                Method::One { n: self.int()? }
            }
            Tok::Word(w) if w == "method2" => {
                self.next();
                self.keyword("base")?;
                let mut base = vec![self.int()?];
                while *self.peek() == Tok::Comma {
                    self.next();
                    base.push(self.int()?);
                }
                Method::Two { base, pairs: [self.ses()?, self.ses()?] }
            }
            Tok::Word(w) if w == "method3" => {
                self.next();
                Method::Three { pairs: [self.ses()?, self.ses()?] }
            }
            _ => return self.fail("`method1`, `method2` or `method3`"),
        };
        self.expect(Tok::RBrace)?;
        Ok(ProofDecl { loc, id, target, method })
    }
}

/// Syntax only; see [`super::parse_document`] for the validated entry point.
pub fn parse_syntax(text: &str) -> Result<Document, InputError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let mut d = Document::default();
    loop {
        match p.peek() {
            Tok::Eof => return Ok(d),
            Tok::Word(w) => match w.as_str() {
                "quiver" => d.quivers.push(p.quiver()?),
                "formula" => d.formulas.push(p.formula()?),
                "morphism" => d.morphisms.push(p.morphism()?),
                "proof" => d.proofs.push(p.proof()?),
                _ => return p.fail("`quiver`, `formula`, `morphism` or `proof`"),
            },
            _ => return p.fail("`quiver`, `formula`, `morphism` or `proof`"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_expressions() {
        let d = parse_syntax("formula F on Q param n >= 1 { matrix a rows(2n+1, n-3, n, 4, 3n) cols(0) {} }").unwrap();
        assert_eq!(
            d.formulas[0].matrices[0].rows,
            vec![DimExpr::new(2, 1), DimExpr::new(1, -3), DimExpr::N, DimExpr::constant(4), DimExpr::new(3, 0)]
        );
        assert_eq!(d.formulas[0].n0, 1);
    }

    #[test]
    fn references() {
        let d = parse_syntax(
            "proof p for F { method2 base 0, 1 pair (sub A@n-2 permuted(1 -> 2, 2 -> 1) quot B@3 f f g g) \
             pair (sub A permuted(1 -> 2 2 -> 1) quot B f f g g) }",
        )
        .unwrap();
        let Method::Two { base, pairs } = &d.proofs[0].method else { panic!() };
        assert_eq!(base, &vec![0, 1]);
        assert_eq!(pairs[0].sub.shift, Shift::Minus(2));
        assert_eq!(pairs[0].quot.shift, Shift::At(3));
        assert_eq!(pairs[0].sub.perm, pairs[1].sub.perm);
    }

    #[test]
    fn errors_name_the_position() {
        let e = parse_syntax("quiver Q {\n  vertex 1\n  arrow a 1 -> 2\n}").unwrap_err();
        assert_eq!(e.to_string(), "3:11: expected `:`, found `1`");
        assert!(parse_syntax("proof p for F { method2 base 0 pair (sub A@n-0 quot B f f g g) }").is_err());
        assert!(parse_syntax("formula F on Q { }").is_err());
    }
}
