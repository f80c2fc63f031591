//! Concrete syntax for GML(T).
//!
//! ```text
//! imp   := or ( "->" imp )?
//! or    := and ( "|" and )*
//! and   := unary ( "&" unary )*
//! unary := "!" unary | atom
//! atom  := PROP | "(" imp ")" | "<" NAME ">=" INT ">" "(" [ imp ( "," imp )* ] ")"
//! ```
//!
//! `|` and `->` are desugared into `!` and `&`, so parsed formulae only
//! contain the core connectives.

use std::fmt;

use thiserror::Error;

use crate::logic::Formula;
use crate::template::Registry;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownProposition(String),
    UnknownTemplate(String),
    Arity {
        template: String,
        expected: usize,
        found: usize,
    },
    BadThreshold(String),
    Syntax(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnknownProposition(p) => write!(f, "unknown proposition `{p}`"),
            ParseErrorKind::UnknownTemplate(t) => write!(f, "unknown template `{t}`"),
            ParseErrorKind::Arity {
                template,
                expected,
                found,
            } => write!(
                f,
                "template `{template}` expects {expected} argument(s), found {found}"
            ),
            ParseErrorKind::BadThreshold(t) => {
                write!(f, "threshold must be an integer >= 1, found `{t}`")
            }
            ParseErrorKind::Syntax(msg) => f.write_str(msg),
        }
    }
}

/// Parses `text` against a template registry and a proposition list.
pub fn parse_formula(
    text: &str,
    registry: &Registry,
    props: &[String],
) -> Result<Formula, ParseError> {
    let mut p = Parser {
        chars: text.chars().collect(),
        pos: 0,
        registry,
        props,
    };
    let f = p.implication()?;
    p.skip_ws();
    if p.pos < p.chars.len() {
        return Err(p.error(format!("unexpected `{}`", p.chars[p.pos])));
    }
    Ok(f)
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    registry: &'a Registry,
    props: &'a [String],
}

impl Parser<'_> {
    fn error(&self, msg: impl Into<String>) -> ParseError {
        self.error_at(self.pos, ParseErrorKind::Syntax(msg.into()))
    }

    fn error_at(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek_str(&mut self, s: &str) -> bool {
        self.skip_ws();
        s.chars()
            .enumerate()
            .all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.peek_str(s) {
            self.pos += s.chars().count();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            let found = self
                .chars
                .get(self.pos)
                .map_or("end of input".to_string(), |c| format!("`{c}`"));
            Err(self.error(format!("expected `{s}`, found {found}")))
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let left = self.disjunction()?;
        if self.eat("->") {
            let right = self.implication()?;
            Ok(Formula::implies(left, right))
        } else {
            Ok(left)
        }
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while self.eat("|") {
            let right = self.conjunction()?;
            acc = Formula::or(acc, right);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.eat("&") {
            let right = self.unary()?;
            acc = Formula::and(acc, right);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.eat("!") {
            Ok(Formula::not(self.unary()?))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        self.skip_ws();
        match self.chars.get(self.pos) {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let f = self.implication()?;
                self.expect(")")?;
                Ok(f)
            }
            Some('<') => self.modal(),
            Some(&c) if c.is_alphanumeric() || c == '_' => {
                let start = self.pos;
                while self
                    .chars
                    .get(self.pos)
                    .is_some_and(|c| c.is_alphanumeric() || *c == '_')
                {
                    self.pos += 1;
                }
                let name: String = self.chars[start..self.pos].iter().collect();
                match self.props.iter().position(|p| *p == name) {
                    Some(i) => Ok(Formula::prop(i)),
                    None => Err(self.error_at(start, ParseErrorKind::UnknownProposition(name))),
                }
            }
            Some(c) => Err(self.error(format!("unexpected `{c}`"))),
        }
    }

    fn modal(&mut self) -> Result<Formula, ParseError> {
        self.expect("<")?;
        let name_start = self.pos;
        while self.chars.get(self.pos).is_some_and(|&c| c != '>') {
            self.pos += 1;
        }
        let name: String = self.chars[name_start..self.pos]
            .iter()
            .collect::<String>()
            .trim()
            .to_string();
        if name.is_empty() {
            return Err(self.error("missing template name"));
        }
        let template = self
            .registry
            .lookup(&name)
            .cloned()
            .ok_or_else(|| self.error_at(name_start, ParseErrorKind::UnknownTemplate(name.clone())))?;
        self.expect(">=")?;
        self.skip_ws();
        let num_start = self.pos;
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '-')
        {
            self.pos += 1;
        }
        let raw: String = self.chars[num_start..self.pos].iter().collect();
        let threshold = match raw.parse::<usize>() {
            Ok(j) if j >= 1 => j,
            _ => return Err(self.error_at(num_start, ParseErrorKind::BadThreshold(raw))),
        };
        self.expect(">")?;
        self.expect("(")?;
        let mut args = Vec::new();
        if !self.eat(")") {
            loop {
                args.push(self.implication()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        if args.len() != template.arity() {
            return Err(self.error_at(
                name_start,
                ParseErrorKind::Arity {
                    template: template.name().to_string(),
                    expected: template.arity(),
                    found: args.len(),
                },
            ));
        }
        Ok(Formula::diamond(template, threshold, args).expect("arity and threshold already checked"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::template::{builtin_registry, T1, TRIANGLE};

    fn props(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn parses_edge_modality() {
        let reg = builtin_registry();
        let f = parse_formula("<T1>=2>(p)", &reg, &props(&["p"])).unwrap();
        assert_eq!(
            f,
            Formula::diamond(reg.get(T1).unwrap(), 2, vec![Formula::prop(0)]).unwrap()
        );
    }

    #[test]
    fn parses_triangle_with_two_arguments() {
        let reg = builtin_registry();
        let f = parse_formula("<T△>=1>(p, q)", &reg, &props(&["p", "q"])).unwrap();
        match f {
            Formula::Diamond { template, args, .. } => {
                assert_eq!(template.name(), TRIANGLE);
                assert_eq!(args.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_formula("<Ttri>=1>(p, q)", &reg, &props(&["p", "q"])).is_ok());
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let err = parse_formula("<T1>=1>(p, q)", &builtin_registry(), &props(&["p", "q"])).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Arity { expected: 1, found: 2, .. }));
    }

    #[test]
    fn other_errors() {
        let reg = builtin_registry();
        let ap = props(&["p"]);
        let kind = |s: &str| parse_formula(s, &reg, &ap).unwrap_err().kind;
        assert!(matches!(kind("q"), ParseErrorKind::UnknownProposition(_)));
        assert!(matches!(kind("<Tx>=1>(p)"), ParseErrorKind::UnknownTemplate(_)));
        assert!(matches!(kind("<T1>=0>(p)"), ParseErrorKind::BadThreshold(_)));
        assert!(matches!(kind("p &"), ParseErrorKind::Syntax(_)));
        assert!(matches!(kind("(p"), ParseErrorKind::Syntax(_)));
        let err = parse_formula("p p", &reg, &ap).unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn precedence_and_sugar() {
        let reg = builtin_registry();
        let ap = props(&["p", "q", "r"]);
        let (p, q, r) = (Formula::prop(0), Formula::prop(1), Formula::prop(2));
        let f = parse_formula("!p & q | r -> p", &reg, &ap).unwrap();
        let expected = Formula::implies(
            Formula::or(Formula::and(Formula::not(p.clone()), q), r),
            p,
        );
        assert_eq!(f, expected);
        let right_assoc = parse_formula("p -> q -> r", &reg, &ap).unwrap();
        assert_eq!(
            right_assoc,
            Formula::implies(Formula::prop(0), Formula::implies(Formula::prop(1), Formula::prop(2)))
        );
        assert_eq!(
            parse_formula("  ( p )  ", &reg, &ap).unwrap(),
            Formula::prop(0)
        );
    }
}
