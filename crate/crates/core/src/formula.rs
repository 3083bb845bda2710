//! Propositional formulas over `!`, `&`, `|`, `->`; `<->` is parsed as sugar.
//!
//! Grammar (whitespace between tokens is ignored):
//!
//! ```text
//! iff := imp ('<->' imp)*          left-associative, desugared
//! imp := or ('->' imp)?            right-associative
//! or  := and ('|' and)*
//! and := neg ('&' neg)*
//! neg := '!' neg | '(' iff ')' | atom
//! atom := [a-z][A-Za-z0-9_]*
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::lattice::{Degree, DegreeLattice};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at column {column}: {message}")]
pub struct SyntaxError {
    /// 1-based character column.
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("no value for variable `{0}`")]
    MissingVariable(String),
    #[error("value `{0}` is not on the chain grid")]
    OffGrid(Degree),
    #[error("many-valued evaluation needs a chain lattice")]
    NotAChain,
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Formula, r: Formula) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    /// `(l -> r) & (r -> l)`.
    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::and(
            Formula::implies(l.clone(), r.clone()),
            Formula::implies(r, l),
        )
    }

    pub fn parse(text: &str) -> Result<Self, SyntaxError> {
        let tokens = tokenize(text)?;
        if tokens.is_empty() {
            return Err(SyntaxError {
                column: 1,
                message: "empty formula".into(),
            });
        }
        let mut p = Parser {
            tokens,
            pos: 0,
            end_column: text.chars().count() + 1,
        };
        let f = p.iff()?;
        if let Some((tok, col)) = p.tokens.get(p.pos) {
            return Err(SyntaxError {
                column: *col,
                message: format!("unexpected {tok}"),
            });
        }
        Ok(f)
    }

    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(a) => {
                out.insert(a.clone());
            }
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
        }
    }

    pub fn eval_crisp(&self, valuation: &BTreeMap<String, bool>) -> Result<bool, EvalError> {
        Ok(match self {
            Formula::Atom(a) => *valuation
                .get(a)
                .ok_or_else(|| EvalError::MissingVariable(a.clone()))?,
            Formula::Not(f) => !f.eval_crisp(valuation)?,
            Formula::And(l, r) => l.eval_crisp(valuation)? & r.eval_crisp(valuation)?,
            Formula::Or(l, r) => l.eval_crisp(valuation)? | r.eval_crisp(valuation)?,
            Formula::Implies(l, r) => !l.eval_crisp(valuation)? | r.eval_crisp(valuation)?,
        })
    }

    /// Łukasiewicz truth value on a chain: `1 - a`, `min`, `max`,
    /// `min(1, 1 - a + b)`.
    pub fn eval_luk(
        &self,
        lattice: &DegreeLattice,
        valuation: &BTreeMap<String, Degree>,
    ) -> Result<Degree, EvalError> {
        let k = lattice.chain_k().ok_or(EvalError::NotAChain)?;
        let vars: Vec<String> = self.variables().into_iter().collect();
        let mut steps = Vec::with_capacity(vars.len());
        for v in &vars {
            let d = valuation
                .get(v)
                .ok_or_else(|| EvalError::MissingVariable(v.clone()))?;
            let idx = lattice
                .index_of(d)
                .map_err(|_| EvalError::OffGrid(d.clone()))?;
            steps.push(idx as u32);
        }
        let compiled = CompiledFormula::new(self, &vars);
        let mut scratch = Vec::new();
        let out = compiled.eval_grid(&steps, k, &mut scratch);
        Ok(lattice.degree(out as usize).clone())
    }

    /// Binding strength used by the renderer: higher binds tighter.
    fn level(&self) -> u8 {
        match self {
            Formula::Implies(..) => 1,
            Formula::Or(..) => 2,
            Formula::And(..) => 3,
            Formula::Not(_) | Formula::Atom(_) => 4,
        }
    }

    fn render(&self, min_level: u8, out: &mut String) {
        let wrap = self.level() < min_level;
        if wrap {
            out.push('(');
        }
        match self {
            Formula::Atom(a) => out.push_str(a),
            Formula::Not(f) => {
                out.push('!');
                f.render(4, out);
            }
            Formula::And(l, r) => {
                l.render(3, out);
                out.push_str(" & ");
                r.render(4, out);
            }
            Formula::Or(l, r) => {
                l.render(2, out);
                out.push_str(" | ");
                r.render(3, out);
            }
            Formula::Implies(l, r) => {
                l.render(2, out);
                out.push_str(" -> ");
                r.render(1, out);
            }
        }
        if wrap {
            out.push(')');
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.render(1, &mut s);
        f.write_str(&s)
    }
}

impl FromStr for Formula {
    type Err = SyntaxError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Formula::parse(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Atom(String),
    Not,
    And,
    Or,
    Imp,
    Iff,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Atom(a) => write!(f, "atom `{a}`"),
            Token::Not => f.write_str("`!`"),
            Token::And => f.write_str("`&`"),
            Token::Or => f.write_str("`|`"),
            Token::Imp => f.write_str("`->`"),
            Token::Iff => f.write_str("`<->`"),
            Token::LParen => f.write_str("`(`"),
            Token::RParen => f.write_str("`)`"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, SyntaxError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |i: usize, message: String| SyntaxError {
        column: i + 1,
        message,
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' => Token::Not,
            '&' => Token::And,
            '|' => Token::Or,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '-' if chars.get(i + 1) == Some(&'>') => {
                i += 1;
                Token::Imp
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                i += 2;
                Token::Iff
            }
            c if c.is_ascii_lowercase() => {
                let mut name = String::new();
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    name.push(chars[i]);
                    i += 1;
                }
                out.push((Token::Atom(name), start + 1));
                continue;
            }
            c => return Err(err(i, format!("unexpected character `{c}`"))),
        };
        i += 1;
        out.push((tok, start + 1));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end_column: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn column(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(_, c)| *c)
            .unwrap_or(self.end_column)
    }

    fn iff(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.imp()?;
        while self.eat(&Token::Iff) {
            let rhs = self.imp()?;
            acc = Formula::iff(acc, rhs);
        }
        Ok(acc)
    }

    fn imp(&mut self) -> Result<Formula, SyntaxError> {
        let lhs = self.or()?;
        if self.eat(&Token::Imp) {
            let rhs = self.imp()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.and()?;
        while self.eat(&Token::Or) {
            acc = Formula::or(acc, self.and()?);
        }
        Ok(acc)
    }

    fn and(&mut self) -> Result<Formula, SyntaxError> {
        let mut acc = self.neg()?;
        while self.eat(&Token::And) {
            acc = Formula::and(acc, self.neg()?);
        }
        Ok(acc)
    }

    fn neg(&mut self) -> Result<Formula, SyntaxError> {
        let column = self.column();
        match self.tokens.get(self.pos).map(|(t, _)| t.clone()) {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(Formula::not(self.neg()?))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.iff()?;
                if !self.eat(&Token::RParen) {
                    return Err(SyntaxError {
                        column: self.column(),
                        message: "expected `)`".into(),
                    });
                }
                Ok(inner)
            }
            Some(Token::Atom(a)) => {
                self.pos += 1;
                Ok(Formula::Atom(a))
            }
            Some(tok) => Err(SyntaxError {
                column,
                message: format!("expected a formula, found {tok}"),
            }),
            None => Err(SyntaxError {
                column,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

#[derive(Clone, Debug)]
enum Node {
    Var(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
}

/// A formula flattened into a topologically ordered node list with atoms
/// replaced by positions in a fixed variable list. Evaluating it many times
/// (once per valuation) avoids map lookups.
#[derive(Clone, Debug)]
pub struct CompiledFormula {
    nodes: Vec<Node>,
}

impl CompiledFormula {
    /// Every atom of `f` must appear in `vars`.
    pub fn new(f: &Formula, vars: &[String]) -> Self {
        let mut nodes = Vec::new();
        Self::push(f, vars, &mut nodes);
        CompiledFormula { nodes }
    }

    fn push(f: &Formula, vars: &[String], nodes: &mut Vec<Node>) -> usize {
        let node = match f {
            Formula::Atom(a) => Node::Var(
                vars.iter()
                    .position(|v| v == a)
                    .expect("variable list covers the formula"),
            ),
            Formula::Not(g) => Node::Not(Self::push(g, vars, nodes)),
            Formula::And(l, r) => {
                let l = Self::push(l, vars, nodes);
                Node::And(l, Self::push(r, vars, nodes))
            }
            Formula::Or(l, r) => {
                let l = Self::push(l, vars, nodes);
                Node::Or(l, Self::push(r, vars, nodes))
            }
            Formula::Implies(l, r) => {
                let l = Self::push(l, vars, nodes);
                Node::Implies(l, Self::push(r, vars, nodes))
            }
        };
        nodes.push(node);
        nodes.len() - 1
    }

    /// Classical value; bit `i` of `assignment` is the value of `vars[i]`.
    pub fn eval_bool(&self, assignment: u64, scratch: &mut Vec<bool>) -> bool {
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Var(i) => assignment >> i & 1 == 1,
                Node::Not(a) => !scratch[a],
                Node::And(a, b) => scratch[a] && scratch[b],
                Node::Or(a, b) => scratch[a] || scratch[b],
                Node::Implies(a, b) => !scratch[a] || scratch[b],
            };
            scratch.push(v);
        }
        *scratch.last().expect("non-empty formula")
    }

    /// Łukasiewicz value on the grid `{0, 1/k, ..., 1}`, with values given
    /// and returned as numerators over `k`.
    pub fn eval_grid(&self, steps: &[u32], k: u32, scratch: &mut Vec<u32>) -> u32 {
        scratch.clear();
        for node in &self.nodes {
            let v = match *node {
                Node::Var(i) => steps[i],
                Node::Not(a) => k - scratch[a],
                Node::And(a, b) => scratch[a].min(scratch[b]),
                Node::Or(a, b) => scratch[a].max(scratch[b]),
                Node::Implies(a, b) => (k + scratch[b]).saturating_sub(scratch[a]).min(k),
            };
            scratch.push(v);
        }
        *scratch.last().expect("non-empty formula")
    }
}
