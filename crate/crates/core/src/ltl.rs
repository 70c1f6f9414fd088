//! LTL and BLTL syntax: AST, parser, printer, normal forms and a direct
//! evaluator on ultimately periodic words.

use crate::propset::PropSet;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Iff(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Globally(Box<Ltl>),
    Eventually(Box<Ltl>),
}

/// Belief formulas: `K ψ`, `Kc ψ`, negation and conjunction.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bltl {
    K(Ltl),
    Kc(Ltl),
    Not(Box<Bltl>),
    And(Box<Bltl>, Box<Bltl>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at column {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl Ltl {
    pub fn atom(name: &str) -> Ltl {
        Ltl::Atom(name.to_string())
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Ltl) -> Ltl {
        Ltl::Not(Box::new(a))
    }
    pub fn and(a: Ltl, b: Ltl) -> Ltl {
        Ltl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Or(Box::new(a), Box::new(b))
    }
    pub fn implies(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Implies(Box::new(a), Box::new(b))
    }
    pub fn next(a: Ltl) -> Ltl {
        Ltl::Next(Box::new(a))
    }
    pub fn until(a: Ltl, b: Ltl) -> Ltl {
        Ltl::Until(Box::new(a), Box::new(b))
    }
    pub fn globally(a: Ltl) -> Ltl {
        Ltl::Globally(Box::new(a))
    }
    pub fn eventually(a: Ltl) -> Ltl {
        Ltl::Eventually(Box::new(a))
    }

    /// Conjunction of a list; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Ltl>) -> Ltl {
        let mut it = items.into_iter();
        match it.next() {
            None => Ltl::True,
            Some(first) => it.fold(first, Ltl::and),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => 0,
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Globally(a) | Ltl::Eventually(a) => 1 + a.depth(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Iff(a, b) | Ltl::Until(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out.sort();
        out.dedup();
        out
    }

    fn collect_atoms(&self, out: &mut Vec<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(a) => out.push(a.clone()),
            Ltl::Not(a) | Ltl::Next(a) | Ltl::Globally(a) | Ltl::Eventually(a) => a.collect_atoms(out),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Iff(a, b) | Ltl::Until(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// True when no temporal operator occurs.
    pub fn is_propositional(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => true,
            Ltl::Not(a) => a.is_propositional(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Implies(a, b) | Ltl::Iff(a, b) => {
                a.is_propositional() && b.is_propositional()
            }
            _ => false,
        }
    }

    /// Rewrites into the core fragment {true, atom, ¬, ∧, X, U}.
    pub fn to_core(&self) -> Ltl {
        match self {
            Ltl::True => Ltl::True,
            Ltl::False => Ltl::not(Ltl::True),
            Ltl::Atom(a) => Ltl::Atom(a.clone()),
            Ltl::Not(a) => Ltl::not(a.to_core()),
            Ltl::And(a, b) => Ltl::and(a.to_core(), b.to_core()),
            Ltl::Or(a, b) => Ltl::not(Ltl::and(Ltl::not(a.to_core()), Ltl::not(b.to_core()))),
            Ltl::Implies(a, b) => Ltl::not(Ltl::and(a.to_core(), Ltl::not(b.to_core()))),
            Ltl::Iff(a, b) => {
                let (a, b) = (a.to_core(), b.to_core());
                Ltl::and(
                    Ltl::not(Ltl::and(a.clone(), Ltl::not(b.clone()))),
                    Ltl::not(Ltl::and(b, Ltl::not(a))),
                )
            }
            Ltl::Next(a) => Ltl::next(a.to_core()),
            Ltl::Until(a, b) => Ltl::until(a.to_core(), b.to_core()),
            Ltl::Eventually(a) => Ltl::until(Ltl::True, a.to_core()),
            Ltl::Globally(a) => Ltl::not(Ltl::until(Ltl::True, Ltl::not(a.to_core()))),
        }
    }

    /// Negation normal form over resolved propositions. Atoms the resolver does
    /// not know evaluate to false.
    pub fn to_nnf(&self, resolve: &dyn Fn(&str) -> Option<usize>) -> Nnf {
        nnf(&self.to_core(), true, resolve)
    }

    /// Evaluates a propositional formula on one letter.
    pub fn eval_letter(&self, letter: PropSet, resolve: &dyn Fn(&str) -> Option<usize>) -> bool {
        match self {
            Ltl::True => true,
            Ltl::False => false,
            Ltl::Atom(a) => resolve(a).is_some_and(|p| letter.contains(p)),
            Ltl::Not(a) => !a.eval_letter(letter, resolve),
            Ltl::And(a, b) => a.eval_letter(letter, resolve) && b.eval_letter(letter, resolve),
            Ltl::Or(a, b) => a.eval_letter(letter, resolve) || b.eval_letter(letter, resolve),
            Ltl::Implies(a, b) => !a.eval_letter(letter, resolve) || b.eval_letter(letter, resolve),
            Ltl::Iff(a, b) => a.eval_letter(letter, resolve) == b.eval_letter(letter, resolve),
            _ => panic!("eval_letter on temporal formula"),
        }
    }

    /// Direct semantics on the word `stem · cycle^ω` (cycle nonempty).
    pub fn eval_lasso(&self, stem: &[PropSet], cycle: &[PropSet], resolve: &dyn Fn(&str) -> Option<usize>) -> bool {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        let word: Vec<PropSet> = stem.iter().chain(cycle.iter()).copied().collect();
        let ev = LassoEval { word: &word, loop_start: stem.len(), resolve };
        ev.eval(self)[0]
    }
}

struct LassoEval<'a> {
    word: &'a [PropSet],
    loop_start: usize,
    resolve: &'a dyn Fn(&str) -> Option<usize>,
}

impl LassoEval<'_> {
    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.word.len() {
            i + 1
        } else {
            self.loop_start
        }
    }

    /// Fixpoint of `v[i] = now[i] || (stay[i] && v[succ i])`, least or greatest.
    fn fix(&self, now: &[bool], stay: &[bool], least: bool) -> Vec<bool> {
        let n = self.word.len();
        let mut v = vec![!least; n];
        loop {
            let mut changed = false;
            for i in (0..n).rev() {
                let nv = now[i] || (stay[i] && v[self.succ(i)]);
                if nv != v[i] {
                    v[i] = nv;
                    changed = true;
                }
            }
            if !changed {
                return v;
            }
        }
    }

    fn eval(&self, f: &Ltl) -> Vec<bool> {
        let n = self.word.len();
        match f {
            Ltl::True => vec![true; n],
            Ltl::False => vec![false; n],
            Ltl::Atom(a) => {
                let p = (self.resolve)(a);
                self.word.iter().map(|l| p.is_some_and(|p| l.contains(p))).collect()
            }
            Ltl::Not(a) => self.eval(a).into_iter().map(|x| !x).collect(),
            Ltl::And(a, b) => zip(self.eval(a), self.eval(b), |x, y| x && y),
            Ltl::Or(a, b) => zip(self.eval(a), self.eval(b), |x, y| x || y),
            Ltl::Implies(a, b) => zip(self.eval(a), self.eval(b), |x, y| !x || y),
            Ltl::Iff(a, b) => zip(self.eval(a), self.eval(b), |x, y| x == y),
            Ltl::Next(a) => {
                let v = self.eval(a);
                (0..n).map(|i| v[self.succ(i)]).collect()
            }
            Ltl::Until(a, b) => {
                let (va, vb) = (self.eval(a), self.eval(b));
                self.fix(&vb, &va, true)
            }
            Ltl::Eventually(a) => {
                let v = self.eval(a);
                self.fix(&v, &vec![true; n], true)
            }
            Ltl::Globally(a) => {
                // G a = ¬F¬a
                let neg: Vec<bool> = self.eval(a).into_iter().map(|x| !x).collect();
                self.fix(&neg, &vec![true; n], true).into_iter().map(|x| !x).collect()
            }
        }
    }
}

fn zip(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

/// LTL in negation normal form over proposition ids.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Nnf {
    True,
    False,
    Lit(usize, bool),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Next(Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

fn nnf(f: &Ltl, pos: bool, r: &dyn Fn(&str) -> Option<usize>) -> Nnf {
    match f {
        Ltl::True => {
            if pos {
                Nnf::True
            } else {
                Nnf::False
            }
        }
        Ltl::Atom(a) => match r(a) {
            Some(p) => Nnf::Lit(p, pos),
            None if pos => Nnf::False,
            None => Nnf::True,
        },
        Ltl::Not(a) => nnf(a, !pos, r),
        Ltl::And(a, b) => {
            let (x, y) = (nnf(a, pos, r), nnf(b, pos, r));
            if pos {
                Nnf::And(Box::new(x), Box::new(y))
            } else {
                Nnf::Or(Box::new(x), Box::new(y))
            }
        }
        Ltl::Next(a) => Nnf::Next(Box::new(nnf(a, pos, r))),
        Ltl::Until(a, b) => {
            let (x, y) = (nnf(a, pos, r), nnf(b, pos, r));
            if pos {
                Nnf::Until(Box::new(x), Box::new(y))
            } else {
                Nnf::Release(Box::new(x), Box::new(y))
            }
        }
        _ => unreachable!("nnf expects core formulas"),
    }
}

impl Bltl {
    pub fn k(f: Ltl) -> Bltl {
        Bltl::K(f)
    }
    pub fn kc(f: Ltl) -> Bltl {
        Bltl::Kc(f)
    }
    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Bltl) -> Bltl {
        Bltl::Not(Box::new(a))
    }
    pub fn and(a: Bltl, b: Bltl) -> Bltl {
        Bltl::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Bltl, b: Bltl) -> Bltl {
        Bltl::not(Bltl::and(Bltl::not(a), Bltl::not(b)))
    }

    pub fn atoms(&self) -> Vec<String> {
        let mut out = match self {
            Bltl::K(f) | Bltl::Kc(f) => f.atoms(),
            Bltl::Not(a) => a.atoms(),
            Bltl::And(a, b) => {
                let mut v = a.atoms();
                v.extend(b.atoms());
                v
            }
        };
        out.sort();
        out.dedup();
        out
    }
}

fn binary_prec(f: &Ltl) -> Option<(&'static str, &Ltl, &Ltl)> {
    match f {
        Ltl::And(a, b) => Some(("&", a, b)),
        Ltl::Or(a, b) => Some(("|", a, b)),
        Ltl::Implies(a, b) => Some(("->", a, b)),
        Ltl::Iff(a, b) => Some(("<->", a, b)),
        Ltl::Until(a, b) => Some(("U", a, b)),
        _ => None,
    }
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some((op, a, b)) = binary_prec(self) {
            return write!(f, "({a} {op} {b})");
        }
        match self {
            Ltl::True => write!(f, "true"),
            Ltl::False => write!(f, "false"),
            Ltl::Atom(a) => write!(f, "{a}"),
            Ltl::Not(a) => write!(f, "!{a}"),
            Ltl::Next(a) => write!(f, "X {a}"),
            Ltl::Globally(a) => write!(f, "G {a}"),
            Ltl::Eventually(a) => write!(f, "F {a}"),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Bltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bltl::K(a) => write!(f, "K {a}"),
            Bltl::Kc(a) => write!(f, "Kc {a}"),
            Bltl::Not(a) => write!(f, "!{a}"),
            Bltl::And(a, b) => write!(f, "({a} & {b})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eof,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let is_ident = |c: char| c.is_ascii_alphanumeric() || c == '_' || c == '=';
    while i < chars.len() {
        let c = chars[i];
        let start = i + 1;
        match c {
            c if c.is_whitespace() => i += 1,
            '(' => {
                out.push((start, Tok::LParen));
                i += 1
            }
            ')' => {
                out.push((start, Tok::RParen));
                i += 1
            }
            '!' => {
                out.push((start, Tok::Not));
                i += 1
            }
            '&' => {
                out.push((start, Tok::And));
                i += 1
            }
            '|' => {
                out.push((start, Tok::Or));
                i += 1
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((start, Tok::Implies));
                i += 2
            }
            '<' if chars.get(i + 1) == Some(&'-') && chars.get(i + 2) == Some(&'>') => {
                out.push((start, Tok::Iff));
                i += 3
            }
            c if is_ident(c) && c != '=' => {
                let mut j = i;
                while j < chars.len() && is_ident(chars[j]) {
                    j += 1;
                }
                out.push((start, Tok::Ident(chars[i..j].iter().collect())));
                i = j;
            }
            other => {
                return Err(ParseError { pos: start, msg: format!("unexpected character `{other}`") });
            }
        }
    }
    out.push((chars.len() + 1, Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
}

impl Parser {
    fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].1
    }

    fn pos(&self) -> usize {
        self.toks[self.i].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].1.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: &str) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), msg: msg.to_string() })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err("unexpected trailing input")
        }
    }

    fn ltl_iff(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.ltl_implies()?;
            lhs = Ltl::Iff(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn ltl_implies(&mut self) -> Result<Ltl, ParseError> {
        let lhs = self.ltl_or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.ltl_implies()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltl_or(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Ltl::or(lhs, self.ltl_and()?);
        }
        Ok(lhs)
    }

    fn ltl_and(&mut self) -> Result<Ltl, ParseError> {
        let mut lhs = self.ltl_until()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Ltl::and(lhs, self.ltl_until()?);
        }
        Ok(lhs)
    }

    fn ltl_until(&mut self) -> Result<Ltl, ParseError> {
        let lhs = self.ltl_unary()?;
        if self.is_kw("U") {
            self.bump();
            let rhs = self.ltl_until()?;
            return Ok(Ltl::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn ltl_unary(&mut self) -> Result<Ltl, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Ltl::not(self.ltl_unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.ltl_iff()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(f)
            }
            Tok::Ident(s) => match s.as_str() {
                "X" | "G" | "F" => {
                    self.bump();
                    if matches!(self.peek(), Tok::Eof | Tok::RParen | Tok::And | Tok::Or | Tok::Implies | Tok::Iff) {
                        return self.err(&format!("operator `{s}` expects an operand"));
                    }
                    let a = self.ltl_unary()?;
                    Ok(match s.as_str() {
                        "X" => Ltl::next(a),
                        "G" => Ltl::globally(a),
                        _ => Ltl::eventually(a),
                    })
                }
                "U" => self.err("`U` needs a left operand"),
                "true" => {
                    self.bump();
                    Ok(Ltl::True)
                }
                "false" => {
                    self.bump();
                    Ok(Ltl::False)
                }
                _ => {
                    if s.ends_with('=') || s.matches('=').count() > 1 {
                        return self.err(&format!("malformed atom `{s}`"));
                    }
                    self.bump();
                    Ok(Ltl::Atom(s))
                }
            },
            Tok::Eof => self.err("unexpected end of input"),
            _ => self.err("expected a formula"),
        }
    }

    fn bltl_iff(&mut self) -> Result<Bltl, ParseError> {
        let mut lhs = self.bltl_implies()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let rhs = self.bltl_implies()?;
            let fwd = Bltl::not(Bltl::and(lhs.clone(), Bltl::not(rhs.clone())));
            let bwd = Bltl::not(Bltl::and(rhs, Bltl::not(lhs)));
            lhs = Bltl::and(fwd, bwd);
        }
        Ok(lhs)
    }

    fn bltl_implies(&mut self) -> Result<Bltl, ParseError> {
        let lhs = self.bltl_or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.bltl_implies()?;
            return Ok(Bltl::not(Bltl::and(lhs, Bltl::not(rhs))));
        }
        Ok(lhs)
    }

    fn bltl_or(&mut self) -> Result<Bltl, ParseError> {
        let mut lhs = self.bltl_and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = Bltl::or(lhs, self.bltl_and()?);
        }
        Ok(lhs)
    }

    fn bltl_and(&mut self) -> Result<Bltl, ParseError> {
        let mut lhs = self.bltl_unary()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = Bltl::and(lhs, self.bltl_unary()?);
        }
        Ok(lhs)
    }

    fn bltl_unary(&mut self) -> Result<Bltl, ParseError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Bltl::not(self.bltl_unary()?))
            }
            Tok::LParen => {
                self.bump();
                let f = self.bltl_iff()?;
                if *self.peek() != Tok::RParen {
                    return self.err("expected `)`");
                }
                self.bump();
                Ok(f)
            }
            Tok::Ident(s) if s == "K" || s == "Kc" => {
                self.bump();
                let inner = self.ltl_unary()?;
                Ok(if s == "K" { Bltl::K(inner) } else { Bltl::Kc(inner) })
            }
            Tok::Eof => self.err("unexpected end of input"),
            _ => self.err("expected `K` or `Kc`"),
        }
    }
}

pub fn parse_ltl(text: &str) -> Result<Ltl, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.ltl_iff()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_bltl(text: &str) -> Result<Bltl, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.bltl_iff()?;
    p.expect_eof()?;
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn res(name: &str) -> Option<usize> {
        match name {
            "p" => Some(0),
            "q" => Some(1),
            _ => None,
        }
    }

    #[test]
    fn parses_collision_goal() {
        let f = parse_ltl("G (!(xe=2 & ye=2) | !(xo=2))").unwrap();
        let expected = Ltl::globally(Ltl::or(
            Ltl::not(Ltl::and(Ltl::atom("xe=2"), Ltl::atom("ye=2"))),
            Ltl::not(Ltl::atom("xo=2")),
        ));
        assert_eq!(f, expected);
        assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn parses_zone_knowledge() {
        let f = parse_bltl("K G ((!(xo=5) & !(xo=6)) | undef)").unwrap();
        let Bltl::K(inner) = &f else { panic!("expected K") };
        assert!(matches!(inner, Ltl::Globally(_)));
        assert_eq!(parse_bltl(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn lone_operator_is_error() {
        let e = parse_ltl("F").unwrap_err();
        assert_eq!(e.pos, 2);
        assert!(parse_ltl("p &").is_err());
        assert!(parse_ltl("(p").is_err());
        assert!(parse_bltl("G p").is_err());
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_ltl("p | q & r").unwrap(),
            Ltl::or(Ltl::atom("p"), Ltl::and(Ltl::atom("q"), Ltl::atom("r")))
        );
        assert_eq!(
            parse_ltl("p -> q -> r").unwrap(),
            Ltl::implies(Ltl::atom("p"), Ltl::implies(Ltl::atom("q"), Ltl::atom("r")))
        );
        assert_eq!(
            parse_ltl("!p U q").unwrap(),
            Ltl::until(Ltl::not(Ltl::atom("p")), Ltl::atom("q"))
        );
    }

    #[test]
    fn lasso_semantics() {
        let p = PropSet::singleton(0);
        let e = PropSet::EMPTY;
        let f = parse_ltl("F q").unwrap();
        assert!(!f.eval_lasso(&[p], &[e], &res));
        let g = parse_ltl("G F p").unwrap();
        assert!(g.eval_lasso(&[e], &[e, p], &res));
        assert!(!g.eval_lasso(&[p], &[e], &res));
        let u = parse_ltl("p U X q").unwrap();
        assert!(u.eval_lasso(&[p, p, PropSet::singleton(1)], &[e], &res));
        // undeclared atoms are false
        assert!(!parse_ltl("r").unwrap().eval_lasso(&[], &[p], &res));
    }

    #[test]
    fn core_form_equivalent() {
        let p = PropSet::singleton(0);
        let q = PropSet::singleton(1);
        let e = PropSet::EMPTY;
        for text in ["G (p -> F q)", "(p <-> q) U G p", "!(F p | X q)"] {
            let f = parse_ltl(text).unwrap();
            let c = f.to_core();
            for (stem, cyc) in [(vec![p], vec![q]), (vec![], vec![p, e]), (vec![q, e], vec![p])] {
                assert_eq!(f.eval_lasso(&stem, &cyc, &res), c.eval_lasso(&stem, &cyc, &res), "{text}");
            }
        }
    }
}
