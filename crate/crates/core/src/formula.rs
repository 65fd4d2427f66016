//! Syntactically co-safe LTL: syntax tree, parser, bounded-operator
//! expansion and finite-word (strong) semantics.
//!
//! Concrete grammar, tightest binding first:
//!
//! ```text
//! unary   := '!' unary | 'X' unary | 'F' unary | 'F<=k' unary | primary
//! until   := unary (('U' | 'U<=k') until)?        right-associative
//! and     := until ('&' until)*
//! or      := and ('|' and)*
//! primary := ident | 'true' | 'false' | '(' or ')'
//! ```
//!
//! `!` may only be applied to an atomic proposition (or a literal).

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{PropSet, MAX_PROPOSITIONS};

/// Ordered set of atomic proposition names. Position = bit in [`PropSet`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ApSet {
    names: Vec<String>,
}

impl ApSet {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for n in names {
            let n = n.into();
            if !out.contains(&n) {
                out.push(n);
            }
        }
        ApSet { names: out }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn name(&self, index: usize) -> &str {
        &self.names[index]
    }

    /// Number of letters in the alphabet `2^AP`.
    pub fn alphabet_size(&self) -> usize {
        1usize << self.names.len()
    }

    /// Builds a letter from proposition names; `None` if a name is unknown.
    pub fn letter<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Option<PropSet> {
        let mut set = PropSet::EMPTY;
        for n in names {
            set = set.with(self.index_of(n)?);
        }
        Some(set)
    }
}

/// An scLTL formula. `BoundedEventually` and `BoundedUntil` are sugar
/// removed by [`expand_bounded`].
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(usize),
    NegAtom(usize),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    BoundedEventually(u32, Box<Formula>),
    BoundedUntil(u32, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(a: Formula) -> Formula {
        Formula::Next(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: Formula) -> Formula {
        Formula::Eventually(Box::new(a))
    }

    pub fn is_sugar_free(&self) -> bool {
        use Formula::*;
        match self {
            True | False | Atom(_) | NegAtom(_) => true,
            And(a, b) | Or(a, b) | Until(a, b) => a.is_sugar_free() && b.is_sugar_free(),
            Next(a) | Eventually(a) => a.is_sugar_free(),
            BoundedEventually(..) | BoundedUntil(..) => false,
        }
    }

    /// Largest proposition index mentioned, if any.
    pub fn max_prop(&self) -> Option<usize> {
        use Formula::*;
        match self {
            True | False => None,
            Atom(p) | NegAtom(p) => Some(*p),
            And(a, b) | Or(a, b) | Until(a, b) | BoundedUntil(_, a, b) => {
                a.max_prop().max(b.max_prop())
            }
            Next(a) | Eventually(a) | BoundedEventually(_, a) => a.max_prop(),
        }
    }

    pub fn depth(&self) -> usize {
        use Formula::*;
        match self {
            True | False | Atom(_) | NegAtom(_) => 0,
            And(a, b) | Or(a, b) | Until(a, b) | BoundedUntil(_, a, b) => 1 + a.depth().max(b.depth()),
            Next(a) | Eventually(a) | BoundedEventually(_, a) => 1 + a.depth(),
        }
    }

    /// Renders in the concrete grammar with explicit parentheses.
    pub fn display<'a>(&'a self, ap: &'a ApSet) -> FormulaDisplay<'a> {
        FormulaDisplay { formula: self, ap }
    }
}

pub struct FormulaDisplay<'a> {
    formula: &'a Formula,
    ap: &'a ApSet,
}

impl<'a> fmt::Display for FormulaDisplay<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Formula::*;
        let sub = |g: &'a Formula| FormulaDisplay { formula: g, ap: self.ap };
        match self.formula {
            True => f.write_str("true"),
            False => f.write_str("false"),
            Atom(p) => f.write_str(self.ap.name(*p)),
            NegAtom(p) => write!(f, "!{}", self.ap.name(*p)),
            And(a, b) => write!(f, "({} & {})", sub(a), sub(b)),
            Or(a, b) => write!(f, "({} | {})", sub(a), sub(b)),
            Next(a) => write!(f, "X {}", sub(a)),
            Until(a, b) => write!(f, "({} U {})", sub(a), sub(b)),
            Eventually(a) => write!(f, "F {}", sub(a)),
            BoundedEventually(k, a) => write!(f, "F<={k} {}", sub(a)),
            BoundedUntil(k, a, b) => write!(f, "({} U<={k} {})", sub(a), sub(b)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unexpected token '{0}'")]
    UnexpectedToken(String),
    #[error("expected ')'")]
    UnclosedParen,
    #[error("invalid bound '{0}'")]
    InvalidBound(String),
    #[error("negation only on atomic propositions")]
    NegationOfNonAtom,
    #[error("unknown proposition '{0}'")]
    UnknownProposition(String),
}

/// A parse failure at a byte offset into the input.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Next,
    Until(Option<u32>),
    Eventually(Option<u32>),
    LParen,
    RParen,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => f.write_str(s),
            Tok::True => f.write_str("true"),
            Tok::False => f.write_str("false"),
            Tok::Not => f.write_str("!"),
            Tok::And => f.write_str("&"),
            Tok::Or => f.write_str("|"),
            Tok::Next => f.write_str("X"),
            Tok::Until(None) => f.write_str("U"),
            Tok::Until(Some(k)) => write!(f, "U<={k}"),
            Tok::Eventually(None) => f.write_str("F"),
            Tok::Eventually(Some(k)) => write!(f, "F<={k}"),
            Tok::LParen => f.write_str("("),
            Tok::RParen => f.write_str(")"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position, kind| ParseError { position, kind };
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'!' => {
                out.push((start, Tok::Not));
                i += 1;
            }
            b'&' => {
                i += if bytes.get(i + 1) == Some(&b'&') { 2 } else { 1 };
                out.push((start, Tok::And));
            }
            b'|' => {
                i += if bytes.get(i + 1) == Some(&b'|') { 2 } else { 1 };
                out.push((start, Tok::Or));
            }
            b'(' => {
                out.push((start, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((start, Tok::RParen));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::Next,
                    "U" | "F" => {
                        let bound = if text[i..].starts_with("<=") {
                            let mut j = i + 2;
                            while j < bytes.len() && bytes[j] == b' ' {
                                j += 1;
                            }
                            let digits_start = j;
                            while j < bytes.len() && bytes[j].is_ascii_digit() {
                                j += 1;
                            }
                            let digits = &text[digits_start..j];
                            let k = digits.parse::<u32>().map_err(|_| {
                                let shown = text[i + 2..].chars().take(4).collect::<String>();
                                err(i + 2, ParseErrorKind::InvalidBound(shown))
                            })?;
                            i = j;
                            Some(k)
                        } else {
                            None
                        };
                        if word == "U" {
                            Tok::Until(bound)
                        } else {
                            Tok::Eventually(bound)
                        }
                    }
                    _ => Tok::Ident(word.to_string()),
                };
                out.push((start, tok));
            }
            _ => {
                let ch = text[i..].chars().next().unwrap_or('?');
                return Err(err(start, ParseErrorKind::UnexpectedChar(ch)));
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    ap: &'a ApSet,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|(o, _)| *o).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { position: self.offset(), kind }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.bump();
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if let Some(Tok::Until(bound)) = self.peek().cloned() {
            self.bump();
            let rhs = self.until()?;
            return Ok(match bound {
                None => Formula::until(lhs, rhs),
                Some(k) => Formula::BoundedUntil(k, Box::new(lhs), Box::new(rhs)),
            });
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                let at = self.offset();
                self.bump();
                let inner = self.unary()?;
                match inner {
                    Formula::Atom(p) => Ok(Formula::NegAtom(p)),
                    Formula::NegAtom(p) => Ok(Formula::Atom(p)),
                    Formula::True => Ok(Formula::False),
                    Formula::False => Ok(Formula::True),
                    _ => Err(ParseError { position: at, kind: ParseErrorKind::NegationOfNonAtom }),
                }
            }
            Some(Tok::Next) => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Some(Tok::Eventually(bound)) => {
                self.bump();
                let body = self.unary()?;
                Ok(match bound {
                    None => Formula::eventually(body),
                    Some(k) => Formula::BoundedEventually(k, Box::new(body)),
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Ident(name)) => match self.ap.index_of(&name) {
                Some(p) => Ok(Formula::Atom(p)),
                None => Err(ParseError { position: at, kind: ParseErrorKind::UnknownProposition(name) }),
            },
            Some(Tok::True) => Ok(Formula::True),
            Some(Tok::False) => Ok(Formula::False),
            Some(Tok::LParen) => {
                let inner = self.or()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => {
                        self.pos -= 1;
                        Err(self.error(ParseErrorKind::UnclosedParen))
                    }
                }
            }
            Some(t) => Err(ParseError { position: at, kind: ParseErrorKind::UnexpectedToken(t.to_string()) }),
            None => Err(ParseError { position: at, kind: ParseErrorKind::UnexpectedEnd }),
        }
    }
}

/// Parses `text` against the proposition set `ap`. Bounded operators are
/// kept as sugar nodes.
pub fn parse_formula(text: &str, ap: &ApSet) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, end: text.len(), ap };
    let f = p.or()?;
    if let Some(t) = p.peek() {
        return Err(p.error(ParseErrorKind::UnexpectedToken(t.to_string())));
    }
    Ok(f)
}

/// Rewrites `F<=k` and `U<=k` into nested `X` formulas.
///
/// `F<=0 p = p`, `F<=k p = p | X F<=(k-1) p`;
/// `p U<=0 q = q`, `p U<=k q = q | (p & X (p U<=(k-1) q))`.
pub fn expand_bounded(f: &Formula) -> Formula {
    use Formula::*;
    match f {
        True | False | Atom(_) | NegAtom(_) => f.clone(),
        And(a, b) => Formula::and(expand_bounded(a), expand_bounded(b)),
        Or(a, b) => Formula::or(expand_bounded(a), expand_bounded(b)),
        Next(a) => Formula::next(expand_bounded(a)),
        Until(a, b) => Formula::until(expand_bounded(a), expand_bounded(b)),
        Eventually(a) => Formula::eventually(expand_bounded(a)),
        BoundedEventually(k, a) => {
            let body = expand_bounded(a);
            let mut out = body.clone();
            for _ in 0..*k {
                out = Formula::or(body.clone(), Formula::next(out));
            }
            out
        }
        BoundedUntil(k, a, b) => {
            let (lhs, rhs) = (expand_bounded(a), expand_bounded(b));
            let mut out = rhs.clone();
            for _ in 0..*k {
                out = Formula::or(rhs.clone(), Formula::and(lhs.clone(), Formula::next(out)));
            }
            out
        }
    }
}

/// Strong finite-word satisfaction at position 0.
///
/// Every obligation (a letter for literals, the next position for `X`,
/// the witness position for `U`/`F`) must lie inside the word. For scLTL
/// this is monotone under extension. Bounded sugar is evaluated directly.
pub fn holds_strong(word: &[PropSet], f: &Formula) -> bool {
    eval(word, f)[0]
}

/// Truth of `f` at every suffix `0..=n`; index `n` is the empty suffix.
fn eval(word: &[PropSet], f: &Formula) -> Vec<bool> {
    use Formula::*;
    let n = word.len();
    match f {
        True => (0..=n).map(|i| i < n).collect(),
        False => vec![false; n + 1],
        Atom(p) => (0..=n).map(|i| i < n && word[i].contains(*p)).collect(),
        NegAtom(p) => (0..=n).map(|i| i < n && !word[i].contains(*p)).collect(),
        And(a, b) => {
            let (x, y) = (eval(word, a), eval(word, b));
            x.iter().zip(&y).map(|(l, r)| *l && *r).collect()
        }
        Or(a, b) => {
            let (x, y) = (eval(word, a), eval(word, b));
            x.iter().zip(&y).map(|(l, r)| *l || *r).collect()
        }
        Next(a) => {
            let x = eval(word, a);
            (0..=n).map(|i| i < n && x[i + 1]).collect()
        }
        Until(a, b) => {
            let (x, y) = (eval(word, a), eval(word, b));
            let mut out = vec![false; n + 1];
            for i in (0..n).rev() {
                out[i] = y[i] || (x[i] && out[i + 1]);
            }
            out
        }
        Eventually(a) => {
            let x = eval(word, a);
            let mut out = vec![false; n + 1];
            for i in (0..n).rev() {
                out[i] = x[i] || out[i + 1];
            }
            out
        }
        BoundedEventually(k, a) => {
            let x = eval(word, a);
            (0..=n)
                .map(|i| (i..n).take(*k as usize + 1).any(|j| x[j]))
                .collect()
        }
        BoundedUntil(k, a, b) => {
            let (x, y) = (eval(word, a), eval(word, b));
            (0..=n)
                .map(|i| {
                    (i..n)
                        .take(*k as usize + 1)
                        .any(|j| y[j] && (i..j).all(|l| x[l]))
                })
                .collect()
        }
    }
}

/// Checks the proposition count against the alphabet cap.
pub fn check_alphabet(ap: &ApSet, cap: usize) -> Result<(), usize> {
    if ap.len() > cap.min(MAX_PROPOSITIONS) {
        Err(ap.len())
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ap(names: &[&str]) -> ApSet {
        ApSet::new(names.iter().copied())
    }

    fn word(ap: &ApSet, letters: &[&[&str]]) -> Vec<PropSet> {
        letters.iter().map(|l| ap.letter(l.iter().copied()).unwrap()).collect()
    }

    #[test]
    fn parses_eventually() {
        let ap = ap(&["star"]);
        assert_eq!(parse_formula("F star", &ap).unwrap(), Formula::eventually(Formula::Atom(0)));
    }

    #[test]
    fn parses_negated_until() {
        let ap = ap(&["dang", "target"]);
        assert_eq!(
            parse_formula("(! dang) U target", &ap).unwrap(),
            Formula::until(Formula::NegAtom(0), Formula::Atom(1))
        );
        assert_eq!(
            parse_formula("!dang U target", &ap).unwrap(),
            parse_formula("(! dang) U target", &ap).unwrap()
        );
    }

    #[test]
    fn rejects_negated_temporal() {
        let ap = ap(&["star"]);
        let e = parse_formula("! (F star)", &ap).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::NegationOfNonAtom);
        assert_eq!(e.position, 0);
        assert_eq!(e.to_string(), "negation only on atomic propositions at position 0");
    }

    #[test]
    fn reports_positions() {
        let ap = ap(&["p", "q"]);
        let e = parse_formula("p & (q", &ap).unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnclosedParen);
        assert_eq!(e.position, 6);
        let e = parse_formula("p & r", &ap).unwrap_err();
        assert_eq!(e, ParseError { position: 4, kind: ParseErrorKind::UnknownProposition("r".into()) });
        let e = parse_formula("p $ q", &ap).unwrap_err();
        assert_eq!(e.position, 2);
        assert!(parse_formula("", &ap).is_err());
        assert!(parse_formula("p q", &ap).is_err());
        assert!(matches!(
            parse_formula("F<=x p", &ap).unwrap_err().kind,
            ParseErrorKind::InvalidBound(_)
        ));
        assert!(parse_formula("F<=-1 p", &ap).is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let ap = ap(&["p", "q", "r"]);
        let (p, q, r) = (Formula::Atom(0), Formula::Atom(1), Formula::Atom(2));
        assert_eq!(
            parse_formula("p | q & r", &ap).unwrap(),
            Formula::or(p.clone(), Formula::and(q.clone(), r.clone()))
        );
        assert_eq!(
            parse_formula("p U q U r", &ap).unwrap(),
            Formula::until(p.clone(), Formula::until(q.clone(), r.clone()))
        );
        assert_eq!(
            parse_formula("p U q & r", &ap).unwrap(),
            Formula::and(Formula::until(p.clone(), q.clone()), r.clone())
        );
        assert_eq!(
            parse_formula("X p U q", &ap).unwrap(),
            Formula::until(Formula::next(p.clone()), q.clone())
        );
        assert_eq!(
            parse_formula("p U<=3 q", &ap).unwrap(),
            Formula::BoundedUntil(3, Box::new(p.clone()), Box::new(q.clone()))
        );
        assert_eq!(
            parse_formula("F<=2 r", &ap).unwrap(),
            Formula::BoundedEventually(2, Box::new(r))
        );
        assert_eq!(parse_formula("!true", &ap).unwrap(), Formula::False);
    }

    #[test]
    fn display_reparses() {
        let ap = ap(&["p", "q"]);
        for text in ["F p", "(!p) U q", "X (p & q) | F<=3 !q", "p U<=2 (q U p)", "true & !false"] {
            let f = parse_formula(text, &ap).unwrap();
            let shown = f.display(&ap).to_string();
            assert_eq!(parse_formula(&shown, &ap).unwrap(), f, "{text} -> {shown}");
        }
    }

    #[test]
    fn bounded_expansion_unfolds() {
        let ap = ap(&["p", "q"]);
        let (p, q) = (Formula::Atom(0), Formula::Atom(1));
        let f0 = parse_formula("F<=0 p", &ap).unwrap();
        assert_eq!(expand_bounded(&f0), p);
        let f2 = parse_formula("F<=2 p", &ap).unwrap();
        assert_eq!(
            expand_bounded(&f2),
            Formula::or(p.clone(), Formula::next(Formula::or(p.clone(), Formula::next(p.clone()))))
        );
        let u1 = parse_formula("p U<=1 q", &ap).unwrap();
        assert_eq!(
            expand_bounded(&u1),
            Formula::or(q.clone(), Formula::and(p, Formula::next(q)))
        );
        assert!(expand_bounded(&u1).is_sugar_free());
    }

    #[test]
    fn strong_semantics_examples() {
        let ap1 = ap(&["star"]);
        let f = parse_formula("F star", &ap1).unwrap();
        assert!(holds_strong(&word(&ap1, &[&[], &[], &["star"]]), &f));
        assert!(!holds_strong(&word(&ap1, &[&[], &[]]), &f));
        assert!(!holds_strong(&[], &f));

        let ap2 = ap(&["p", "q"]);
        let u = parse_formula("p U q", &ap2).unwrap();
        assert!(holds_strong(&word(&ap2, &[&["p"], &["p"], &["q"]]), &u));
        assert!(!holds_strong(&word(&ap2, &[&["p"], &["p"]]), &u));
        assert!(!holds_strong(&word(&ap2, &[&["p"], &[], &["q"]]), &u));

        let x = parse_formula("X p", &ap2).unwrap();
        assert!(!holds_strong(&word(&ap2, &[&["p"]]), &x));
        assert!(holds_strong(&word(&ap2, &[&[], &["p"]]), &x));
        assert!(!holds_strong(&[], &Formula::True));
        assert!(holds_strong(&word(&ap2, &[&[]]), &Formula::True));
    }
}
