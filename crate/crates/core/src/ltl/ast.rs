use std::collections::BTreeSet;
use std::fmt;

use super::LtlError;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Prop(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Globally(Box<Formula>),
    Finally(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    /// Only produced by [`to_nnf`].
    Release(Box<Formula>, Box<Formula>),
}

use Formula::*;

pub fn prop(name: &str) -> Formula {
    Prop(name.to_string())
}

pub fn not(f: Formula) -> Formula {
    Not(Box::new(f))
}

pub fn and(a: Formula, b: Formula) -> Formula {
    And(Box::new(a), Box::new(b))
}

pub fn or(a: Formula, b: Formula) -> Formula {
    Or(Box::new(a), Box::new(b))
}

pub fn implies(a: Formula, b: Formula) -> Formula {
    Implies(Box::new(a), Box::new(b))
}

pub fn next(f: Formula) -> Formula {
    Next(Box::new(f))
}

pub fn globally(f: Formula) -> Formula {
    Globally(Box::new(f))
}

pub fn finally(f: Formula) -> Formula {
    Finally(Box::new(f))
}

pub fn until(a: Formula, b: Formula) -> Formula {
    Until(Box::new(a), Box::new(b))
}

pub fn release(a: Formula, b: Formula) -> Formula {
    Release(Box::new(a), Box::new(b))
}

impl Formula {
    /// Proposition names occurring in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Prop(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn temporal_operators(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |f| {
            if matches!(f, Next(_) | Globally(_) | Finally(_) | Until(..) | Release(..)) {
                n += 1;
            }
        });
        n
    }

    fn visit(&self, g: &mut impl FnMut(&Formula)) {
        g(self);
        match self {
            True | False | Prop(_) => {}
            Not(a) | Next(a) | Globally(a) | Finally(a) => a.visit(g),
            And(a, b) | Or(a, b) | Implies(a, b) | Until(a, b) | Release(a, b) => {
                a.visit(g);
                b.visit(g);
            }
        }
    }

    /// Replaces every proposition for which `f` returns true by `false`.
    pub fn substitute_false(&self, f: &impl Fn(&str) -> bool) -> Formula {
        let s = |x: &Formula| Box::new(x.substitute_false(f));
        match self {
            Prop(p) if f(p) => False,
            True | False | Prop(_) => self.clone(),
            Not(a) => Not(s(a)),
            Next(a) => Next(s(a)),
            Globally(a) => Globally(s(a)),
            Finally(a) => Finally(s(a)),
            And(a, b) => And(s(a), s(b)),
            Or(a, b) => Or(s(a), s(b)),
            Implies(a, b) => Implies(s(a), s(b)),
            Until(a, b) => Until(s(a), s(b)),
            Release(a, b) => Release(s(a), s(b)),
        }
    }

    /// Propositional value in a state labeled `labels`; `None` for
    /// temporal formulas.
    pub fn eval_state(&self, labels: &BTreeSet<String>) -> Option<bool> {
        Some(match self {
            True => true,
            False => false,
            Prop(p) => labels.contains(p),
            Not(a) => !a.eval_state(labels)?,
            And(a, b) => a.eval_state(labels)? && b.eval_state(labels)?,
            Or(a, b) => a.eval_state(labels)? || b.eval_state(labels)?,
            Implies(a, b) => !a.eval_state(labels)? || b.eval_state(labels)?,
            _ => return None,
        })
    }
}

/// Negation normal form over `true, false, p, !p, &&, ||, X, U, R`.
pub fn to_nnf(f: &Formula) -> Formula {
    nnf(f, false)
}

fn nnf(f: &Formula, neg: bool) -> Formula {
    match (f, neg) {
        (True, false) | (False, true) => True,
        (True, true) | (False, false) => False,
        (Prop(_), false) => f.clone(),
        (Prop(_), true) => not(f.clone()),
        (Not(a), _) => nnf(a, !neg),
        (And(a, b), false) | (Or(a, b), true) => and(nnf(a, neg), nnf(b, neg)),
        (Or(a, b), false) | (And(a, b), true) => or(nnf(a, neg), nnf(b, neg)),
        (Implies(a, b), false) => or(nnf(a, true), nnf(b, false)),
        (Implies(a, b), true) => and(nnf(a, false), nnf(b, true)),
        (Next(a), _) => next(nnf(a, neg)),
        (Globally(a), false) | (Finally(a), true) => release(False, nnf(a, neg)),
        (Finally(a), false) | (Globally(a), true) => until(True, nnf(a, neg)),
        (Until(a, b), false) => until(nnf(a, false), nnf(b, false)),
        (Until(a, b), true) => release(nnf(a, true), nnf(b, true)),
        (Release(a, b), false) => release(nnf(a, false), nnf(b, false)),
        (Release(a, b), true) => until(nnf(a, true), nnf(b, true)),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            True => write!(f, "true"),
            False => write!(f, "false"),
            Prop(p) => write!(f, "{p}"),
            Not(a) => write!(f, "!{}", Atomic(a)),
            And(a, b) => write!(f, "({a} && {b})"),
            Or(a, b) => write!(f, "({a} || {b})"),
            Implies(a, b) => write!(f, "({a} -> {b})"),
            Next(a) => write!(f, "X{}", Atomic(a)),
            Globally(a) => write!(f, "G{}", Atomic(a)),
            Finally(a) => write!(f, "F{}", Atomic(a)),
            Until(a, b) => write!(f, "({a} U {b})"),
            Release(a, b) => write!(f, "!(!{} U !{})", Atomic(a), Atomic(b)),
        }
    }
}

/// Wraps unary operands so `G p` prints as `G(p)` and `!!p` stays parseable.
struct Atomic<'a>(&'a Formula);

impl fmt::Display for Atomic<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            True | False | Prop(_) => write!(f, "({})", self.0),
            And(..) | Or(..) | Implies(..) | Until(..) => write!(f, "{}", self.0),
            _ => write!(f, "({})", self.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, LtlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let two = |s: &str| chars[i..].iter().take(2).collect::<String>() == s;
        if c.is_whitespace() {
            i += 1;
        } else if c == '!' {
            out.push((i, Tok::Not));
            i += 1;
        } else if c == '(' {
            out.push((i, Tok::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Tok::RParen));
            i += 1;
        } else if two("&&") {
            out.push((i, Tok::And));
            i += 2;
        } else if two("||") {
            out.push((i, Tok::Or));
            i += 2;
        } else if two("->") {
            out.push((i, Tok::Arrow));
            i += 2;
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else {
            return Err(LtlError::Syntax { pos: i, message: format!("unexpected `{c}`") });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: &str) -> Result<T, LtlError> {
        Err(LtlError::Syntax { pos: self.here(), message: message.to_string() })
    }

    fn implication(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.pos += 1;
            return Ok(implies(lhs, self.implication()?));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            lhs = or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, LtlError> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            lhs = and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, LtlError> {
        let lhs = self.unary()?;
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "U") {
            self.pos += 1;
            return Ok(until(lhs, self.until()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, LtlError> {
        let Some(tok) = self.peek().cloned() else {
            return self.err("unexpected end of formula");
        };
        self.pos += 1;
        match tok {
            Tok::Not => Ok(not(self.unary()?)),
            Tok::LParen => {
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                self.pos += 1;
                Ok(inner)
            }
            Tok::Ident(s) => match s.as_str() {
                "G" => Ok(globally(self.unary()?)),
                "F" => Ok(finally(self.unary()?)),
                "X" => Ok(next(self.unary()?)),
                "U" => {
                    self.pos -= 1;
                    self.err("`U` needs a left operand")
                }
                "true" => Ok(True),
                "false" => Ok(False),
                _ => Ok(Prop(s)),
            },
            _ => {
                self.pos -= 1;
                self.err("expected a formula")
            }
        }
    }
}

/// Parses `G F X U ! && || -> ( ) true false IDENT` with precedence
/// unary > U > && > || > ->; `U` and `->` associate to the right.
pub fn parse_ltl(text: &str) -> Result<Formula, LtlError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, end: text.chars().count() };
    let f = p.implication()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(f)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_property_shapes() {
        let p1 = parse_ltl("G(!( !AUTH && PROT ) || !ACCESSOK)").unwrap();
        assert_eq!(
            p1,
            globally(or(not(and(not(prop("AUTH")), prop("PROT"))), not(prop("ACCESSOK"))))
        );
        assert_eq!(parse_ltl("true").unwrap(), True);
        let s = parse_ltl("((!SREADOK) U SSELEFOK) || G(!SREADOK)").unwrap();
        assert_eq!(
            s,
            or(until(not(prop("SREADOK")), prop("SSELEFOK")), globally(not(prop("SREADOK"))))
        );
    }

    #[test]
    fn precedence() {
        assert_eq!(
            parse_ltl("a -> b || c && d U e").unwrap(),
            implies(prop("a"), or(prop("b"), and(prop("c"), until(prop("d"), prop("e")))))
        );
        assert_eq!(parse_ltl("!a U b").unwrap(), until(not(prop("a")), prop("b")));
        assert_eq!(parse_ltl("a -> b -> c").unwrap(), implies(prop("a"), implies(prop("b"), prop("c"))));
        assert_eq!(parse_ltl("G F p").unwrap(), globally(finally(prop("p"))));
    }

    #[test]
    fn syntax_errors_carry_position() {
        assert_eq!(
            parse_ltl("G(p && )").unwrap_err(),
            LtlError::Syntax { pos: 7, message: "expected a formula".into() }
        );
        assert!(matches!(parse_ltl("p q"), Err(LtlError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_ltl("p $"), Err(LtlError::Syntax { pos: 2, .. })));
        assert!(matches!(parse_ltl("(p"), Err(LtlError::Syntax { pos: 2, .. })));
    }

    #[test]
    fn nnf_dualities() {
        let n = |s: &str| to_nnf(&parse_ltl(s).unwrap());
        assert_eq!(n("!G p"), until(True, not(prop("p"))));
        assert_eq!(n("!(p U q)"), release(not(prop("p")), not(prop("q"))));
        assert_eq!(n("!!p"), prop("p"));
        assert_eq!(n("G p"), release(False, prop("p")));
        assert_eq!(n("p -> q"), or(not(prop("p")), prop("q")));
    }

    pub(crate) fn arb_formula(props: usize, temporal: u32) -> impl Strategy<Value = Formula> {
        let leaf = prop_oneof![
            3 => (0..props).prop_map(|k| prop(&format!("p{k}"))),
            1 => Just(True),
            1 => Just(False),
        ];
        leaf.prop_recursive(temporal, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(not),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| implies(a, b)),
                inner.clone().prop_map(next),
                inner.clone().prop_map(globally),
                inner.clone().prop_map(finally),
                (inner.clone(), inner).prop_map(|(a, b)| until(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses(f in arb_formula(3, 4)) {
            prop_assert_eq!(parse_ltl(&f.to_string()).unwrap(), f);
        }

        #[test]
        fn nnf_has_negations_only_on_atoms(f in arb_formula(3, 4)) {
            fn ok(f: &Formula) -> bool {
                match f {
                    Not(a) => matches!(**a, Prop(_)),
                    Implies(..) | Globally(_) | Finally(_) => false,
                    True | False | Prop(_) => true,
                    Next(a) => ok(a),
                    And(a, b) | Or(a, b) | Until(a, b) | Release(a, b) => ok(a) && ok(b),
                }
            }
            prop_assert!(ok(&to_nnf(&f)));
        }
    }
}
