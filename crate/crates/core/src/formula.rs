//! IL formulas: the core syntax tree, the surface parser and the printer.
//!
//! The core language has exactly four constructors: atoms, `⊥`, `→` and `▷`.
//! Everything else (`~`, `&`, `|`, `<->`, `true`, `box`, `dia`) is sugar that
//! the parser expands on the way in. The printer re-sugars a few shapes for
//! readability, and `parse(print(φ)) == φ` holds for every core tree.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// A core IL formula.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(String),
    Bottom,
    Implies(Box<Formula>, Box<Formula>),
    Rhd(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    pub fn implies(left: Formula, right: Formula) -> Formula {
        Formula::Implies(Box::new(left), Box::new(right))
    }

    pub fn rhd(left: Formula, right: Formula) -> Formula {
        Formula::Rhd(Box::new(left), Box::new(right))
    }

    /// `A → ⊥`
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::implies(f, Formula::Bottom)
    }

    /// `⊥ → ⊥`
    pub fn top() -> Formula {
        Formula::not(Formula::Bottom)
    }

    /// `(A → (B → ⊥)) → ⊥`
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    /// `(A → ⊥) → B`
    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(
            Formula::implies(a.clone(), b.clone()),
            Formula::implies(b, a),
        )
    }

    /// `□A`, i.e. `¬A ▷ ⊥`.
    pub fn boxed(f: Formula) -> Formula {
        Formula::rhd(Formula::not(f), Formula::Bottom)
    }

    /// `◇A`, i.e. `¬(A ▷ ⊥)`.
    pub fn diamond(f: Formula) -> Formula {
        Formula::not(Formula::rhd(f, Formula::Bottom))
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Bottom => 1,
            Formula::Implies(a, b) | Formula::Rhd(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn is_rhd(&self) -> bool {
        matches!(self, Formula::Rhd(..))
    }

    /// All subtrees, including `self`, deduplicated.
    pub fn subformulas(&self) -> BTreeSet<Formula> {
        let mut out = BTreeSet::new();
        self.collect_subformulas(&mut out);
        out
    }

    fn collect_subformulas(&self, out: &mut BTreeSet<Formula>) {
        if out.contains(self) {
            return;
        }
        if let Formula::Implies(a, b) | Formula::Rhd(a, b) = self {
            a.collect_subformulas(out);
            b.collect_subformulas(out);
        }
        out.insert(self.clone());
    }

    /// Propositional variables occurring in the formula.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(p) => {
                out.insert(p.clone());
            }
            Formula::Bottom => {}
            Formula::Implies(a, b) | Formula::Rhd(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// True when no `▷` occurs anywhere in the tree.
    pub fn is_propositional(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Bottom => true,
            Formula::Implies(a, b) => a.is_propositional() && b.is_propositional(),
            Formula::Rhd(..) => false,
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        write_formula(self, Level::Imp, &mut out);
        f.write_str(&out)
    }
}

/// Renders `φ` in the surface syntax with minimal parentheses.
pub fn print(formula: &Formula) -> String {
    formula.to_string()
}

// Binding strength, loosest first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Imp,
    Rhd,
    Unary,
}

enum Shape<'a> {
    True,
    Box(&'a Formula),
    Dia(&'a Formula),
    Not(&'a Formula),
    Plain,
}

fn shape(formula: &Formula) -> Shape<'_> {
    use Formula::*;
    match formula {
        Implies(a, b) if **a == Bottom && **b == Bottom => Shape::True,
        Rhd(a, b) if **b == Bottom => match &**a {
            Implies(inner, bot) if **bot == Bottom => Shape::Box(inner),
            _ => Shape::Plain,
        },
        Implies(a, b) if **b == Bottom => match &**a {
            Rhd(inner, bot) if **bot == Bottom => Shape::Dia(inner),
            _ => Shape::Not(a),
        },
        _ => Shape::Plain,
    }
}

fn level_of(formula: &Formula) -> Level {
    match (formula, shape(formula)) {
        (_, Shape::True | Shape::Box(_) | Shape::Dia(_) | Shape::Not(_)) => Level::Unary,
        (Formula::Atom(_) | Formula::Bottom, _) => Level::Unary,
        (Formula::Implies(..), _) => Level::Imp,
        (Formula::Rhd(..), _) => Level::Rhd,
    }
}

fn write_formula(formula: &Formula, min: Level, out: &mut String) {
    let parens = level_of(formula) < min;
    if parens {
        out.push('(');
    }
    match (formula, shape(formula)) {
        (_, Shape::True) => out.push_str("true"),
        (_, Shape::Box(inner)) => {
            out.push_str("box ");
            write_formula(inner, Level::Unary, out);
        }
        (_, Shape::Dia(inner)) => {
            out.push_str("dia ");
            write_formula(inner, Level::Unary, out);
        }
        (_, Shape::Not(inner)) => {
            out.push('~');
            write_formula(inner, Level::Unary, out);
        }
        (Formula::Atom(p), _) => out.push_str(p),
        (Formula::Bottom, _) => out.push_str("false"),
        (Formula::Implies(a, b), _) => {
            write_formula(a, Level::Rhd, out);
            out.push_str(" -> ");
            write_formula(b, Level::Imp, out);
        }
        (Formula::Rhd(a, b), _) => {
            write_formula(a, Level::Rhd, out);
            out.push_str(" |> ");
            write_formula(b, Level::Unary, out);
        }
    }
    if parens {
        out.push(')');
    }
}

/// Maximum syntactic nesting accepted by [`parse`].
pub const MAX_NESTING: usize = 512;

/// Maximum number of core nodes a parsed formula may expand to. `<->`
/// duplicates both operands, so nested biconditionals grow exponentially.
pub const MAX_NODES: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("unbalanced parentheses")]
    UnbalancedParen,
    #[error("operator {0:?} is missing an operand")]
    DanglingOperator(String),
    #[error("unexpected token {0:?}")]
    UnexpectedToken(String),
    #[error("empty input")]
    Empty,
    #[error("nesting deeper than {MAX_NESTING}")]
    TooDeep,
    #[error("formula expands to more than {MAX_NODES} nodes")]
    TooLarge,
}

/// A parse failure at a byte offset of the input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {position}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Box,
    Dia,
    Not,
    And,
    Or,
    Rhd,
    Arrow,
    Iff,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::True => "true".into(),
            Tok::False => "false".into(),
            Tok::Box => "box".into(),
            Tok::Dia => "dia".into(),
            Tok::Not => "~".into(),
            Tok::And => "&".into(),
            Tok::Or => "|".into(),
            Tok::Rhd => "|>".into(),
            Tok::Arrow => "->".into(),
            Tok::Iff => "<->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn is_binary(&self) -> bool {
        matches!(self, Tok::And | Tok::Or | Tok::Rhd | Tok::Arrow | Tok::Iff)
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let rest = &text[i..];
        let tok = if rest.starts_with("|>") {
            i += 2;
            Tok::Rhd
        } else if rest.starts_with("->") {
            i += 2;
            Tok::Arrow
        } else if rest.starts_with("<->") {
            i += 3;
            Tok::Iff
        } else if c == b'|' {
            i += 1;
            Tok::Or
        } else if c == b'&' {
            i += 1;
            Tok::And
        } else if c == b'~' {
            i += 1;
            Tok::Not
        } else if c == b'(' {
            i += 1;
            Tok::LParen
        } else if c == b')' {
            i += 1;
            Tok::RParen
        } else if c.is_ascii_lowercase() {
            while i < bytes.len()
                && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit() || bytes[i] == b'_')
            {
                i += 1;
            }
            match &text[start..i] {
                "true" => Tok::True,
                "false" => Tok::False,
                "box" => Tok::Box,
                "dia" => Tok::Dia,
                name => Tok::Ident(name.to_string()),
            }
        } else {
            let ch = rest.chars().next().unwrap_or('?');
            return Err(ParseError {
                kind: ParseErrorKind::UnknownToken(ch.to_string()),
                position: start,
            });
        };
        toks.push((tok, start));
    }
    toks.push((Tok::End, text.len()));
    Ok(toks)
}

type Node = (Formula, usize);

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.offset(),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(self.err(ParseErrorKind::TooDeep));
        }
        Ok(())
    }

    fn formula(&mut self) -> Result<Node, ParseError> {
        self.imp()
    }

    // Every constructor goes through here so the expanded size stays bounded.
    fn build(&self, size: usize, make: impl FnOnce() -> Formula) -> Result<Node, ParseError> {
        if size > MAX_NODES {
            return Err(self.err(ParseErrorKind::TooLarge));
        }
        Ok((make(), size))
    }

    fn imp(&mut self) -> Result<Node, ParseError> {
        let left = self.rhd()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            self.enter()?;
            let right = self.imp()?;
            self.depth -= 1;
            return self.build(left.1 + right.1 + 1, || Formula::implies(left.0, right.0));
        }
        Ok(left)
    }

    fn rhd(&mut self) -> Result<Node, ParseError> {
        let base = self.depth;
        let mut left = self.or()?;
        while *self.peek() == Tok::Rhd {
            self.bump();
            self.enter()?;
            let right = self.or()?;
            left = self.build(left.1 + right.1 + 1, || Formula::rhd(left.0, right.0))?;
        }
        self.depth = base;
        Ok(left)
    }

    fn or(&mut self) -> Result<Node, ParseError> {
        let base = self.depth;
        let mut left = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            self.enter()?;
            let right = self.and()?;
            left = self.build(left.1 + right.1 + 3, || Formula::or(left.0, right.0))?;
        }
        self.depth = base;
        Ok(left)
    }

    fn and(&mut self) -> Result<Node, ParseError> {
        let base = self.depth;
        let mut left = self.iff()?;
        while *self.peek() == Tok::And {
            self.bump();
            self.enter()?;
            let right = self.iff()?;
            left = self.build(left.1 + right.1 + 6, || Formula::and(left.0, right.0))?;
        }
        self.depth = base;
        Ok(left)
    }

    fn iff(&mut self) -> Result<Node, ParseError> {
        let left = self.unary()?;
        if *self.peek() == Tok::Iff {
            self.bump();
            let right = self.unary()?;
            let size = 2 * (left.1 + right.1) + 2 + 6;
            return self.build(size, || Formula::iff(left.0, right.0));
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        let (wrap, extra): (fn(Formula) -> Formula, usize) = match self.peek() {
            Tok::Not => (Formula::not, 2),
            Tok::Box => (Formula::boxed, 4),
            Tok::Dia => (Formula::diamond, 4),
            _ => return self.atomexpr(),
        };
        self.bump();
        self.enter()?;
        let inner = self.unary()?;
        self.depth -= 1;
        self.build(inner.1 + extra, || wrap(inner.0))
    }

    fn atomexpr(&mut self) -> Result<Node, ParseError> {
        let at = self.offset();
        match self.bump() {
            Tok::Ident(name) => Ok((Formula::Atom(name), 1)),
            Tok::True => Ok((Formula::top(), 3)),
            Tok::False => Ok((Formula::Bottom, 1)),
            Tok::LParen => {
                self.enter()?;
                let inner = self.formula()?;
                self.depth -= 1;
                match self.peek() {
                    Tok::RParen => {
                        self.bump();
                        Ok(inner)
                    }
                    Tok::End => Err(self.err(ParseErrorKind::UnbalancedParen)),
                    other => Err(self.err(ParseErrorKind::UnexpectedToken(other.text()))),
                }
            }
            Tok::RParen => Err(ParseError {
                kind: ParseErrorKind::UnbalancedParen,
                position: at,
            }),
            Tok::End => {
                // Ran out of input where an operand was expected.
                let prev = self.pos.checked_sub(1).map(|p| &self.toks[p].0);
                match prev {
                    None | Some(Tok::End) => Err(ParseError {
                        kind: ParseErrorKind::Empty,
                        position: at,
                    }),
                    Some(Tok::LParen) => Err(ParseError {
                        kind: ParseErrorKind::UnbalancedParen,
                        position: at,
                    }),
                    Some(op) => Err(ParseError {
                        kind: ParseErrorKind::DanglingOperator(op.text()),
                        position: self.toks[self.pos - 1].1,
                    }),
                }
            }
            tok if tok.is_binary() => {
                let prev = self.pos.checked_sub(2).map(|p| self.toks[p].0.clone());
                match prev {
                    Some(op) if op.is_binary() || matches!(op, Tok::Not | Tok::Box | Tok::Dia) => {
                        Err(ParseError {
                            kind: ParseErrorKind::DanglingOperator(op.text()),
                            position: self.toks[self.pos - 2].1,
                        })
                    }
                    _ => Err(ParseError {
                        kind: ParseErrorKind::DanglingOperator(tok.text()),
                        position: at,
                    }),
                }
            }
            tok => Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(tok.text()),
                position: at,
            }),
        }
    }
}

/// Parses the surface syntax into a core tree, expanding all sugar.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        depth: 0,
    };
    let (f, _) = p.formula()?;
    match p.peek() {
        Tok::End => Ok(f),
        Tok::RParen => Err(p.err(ParseErrorKind::UnbalancedParen)),
        other => Err(p.err(ParseErrorKind::UnexpectedToken(other.text()))),
    }
}

impl std::str::FromStr for Formula {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}
