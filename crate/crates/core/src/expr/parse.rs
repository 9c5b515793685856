//! Prefix function-call text form: `name(arg, arg)`, identifiers and
//! signed decimal literals. Whitespace (including newlines) is ignored.

use std::fmt::Write as _;

use super::{ExprError, ExprNode, ExpressionTree, OperatorKind};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq)]
enum Token<'a> {
    Ident(&'a str),
    Number(&'a str),
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Spanned<'a> {
    token: Token<'a>,
    pos: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned<'_>>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'(' => {
                out.push(Spanned {
                    token: Token::LParen,
                    pos: start,
                });
                i += 1;
            }
            b')' => {
                out.push(Spanned {
                    token: Token::RParen,
                    pos: start,
                });
                i += 1;
            }
            b',' => {
                out.push(Spanned {
                    token: Token::Comma,
                    pos: start,
                });
                i += 1;
            }
            b'A'..=b'Z' | b'a'..=b'z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push(Spanned {
                    token: Token::Ident(&text[start..i]),
                    pos: start,
                });
            }
            b'+' | b'-' | b'0'..=b'9' => {
                if c == b'+' || c == b'-' {
                    i += 1;
                }
                let digits_start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i == digits_start {
                    return Err(ExprError::Lex {
                        pos: start,
                        message: "sign must be followed by digits".into(),
                    });
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let frac_start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    if i == frac_start {
                        return Err(ExprError::Lex {
                            pos: start,
                            message: "expected digits after '.'".into(),
                        });
                    }
                }
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(ExprError::Lex {
                        pos: i,
                        message: "identifier cannot follow a number".into(),
                    });
                }
                out.push(Spanned {
                    token: Token::Number(&text[start..i]),
                    pos: start,
                });
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Lex {
                    pos: start,
                    message: format!("unexpected character {ch:?}"),
                });
            }
        }
    }
    Ok(out)
}

struct Parser<'a, 'n> {
    tokens: Vec<Spanned<'a>>,
    next: usize,
    end: usize,
    names: &'n [String],
}

impl<'a> Parser<'a, '_> {
    fn peek(&self) -> Option<&Spanned<'a>> {
        self.tokens.get(self.next)
    }

    fn bump(&mut self) -> Option<Spanned<'a>> {
        let t = self.tokens.get(self.next).cloned();
        self.next += 1;
        t
    }

    fn pos(&self) -> usize {
        self.peek().map_or(self.end, |t| t.pos)
    }

    fn expr<T: Scalar>(&mut self) -> Result<ExprNode<T>, ExprError> {
        let pos = self.pos();
        let Some(tok) = self.bump() else {
            return Err(ExprError::Syntax {
                pos,
                message: "unexpected end of input".into(),
            });
        };
        match tok.token {
            Token::Number(s) => {
                let v: T = s.parse().map_err(|_| ExprError::Lex {
                    pos: tok.pos,
                    message: format!("invalid literal {s:?}"),
                })?;
                if !v.is_finite() {
                    return Err(ExprError::Lex {
                        pos: tok.pos,
                        message: format!("literal {s:?} out of range"),
                    });
                }
                Ok(ExprNode::Constant(v))
            }
            Token::Ident(name) => {
                if matches!(self.peek().map(|t| &t.token), Some(Token::LParen)) {
                    let open = self.bump().expect("peeked").pos;
                    self.call(name, tok.pos, open)
                } else {
                    self.variable(name, tok.pos)
                }
            }
            Token::LParen | Token::RParen | Token::Comma => Err(ExprError::Syntax {
                pos: tok.pos,
                message: "expected a literal, identifier or function call".into(),
            }),
        }
    }

    fn call<T: Scalar>(
        &mut self,
        name: &str,
        pos: usize,
        open: usize,
    ) -> Result<ExprNode<T>, ExprError> {
        let kind = OperatorKind::from_name(name).ok_or_else(|| ExprError::UnknownIdentifier {
            name: name.to_string(),
            pos,
        })?;
        let mut children = vec![self.expr()?];
        loop {
            match self.bump() {
                Some(Spanned {
                    token: Token::Comma,
                    ..
                }) => children.push(self.expr()?),
                Some(Spanned {
                    token: Token::RParen,
                    ..
                }) => break,
                Some(t) => {
                    return Err(ExprError::Syntax {
                        pos: t.pos,
                        message: "expected ',' or ')'".into(),
                    });
                }
                None => return Err(ExprError::Unbalanced { pos: open }),
            }
        }
        if children.len() != kind.arity() {
            return Err(ExprError::Arity {
                name: name.to_string(),
                expected: kind.arity(),
                found: children.len(),
            });
        }
        Ok(ExprNode::Operator { kind, children })
    }

    fn variable<T: Scalar>(&self, name: &str, pos: usize) -> Result<ExprNode<T>, ExprError> {
        if let Some(i) = self.names.iter().position(|n| n == name) {
            return Ok(ExprNode::Variable(i));
        }
        // Positional fallback `X<i>` when the schema uses other names.
        if let Some(i) = name.strip_prefix('X').and_then(|d| d.parse::<usize>().ok()) {
            if i < self.names.len() && name == format!("X{i}") {
                return Ok(ExprNode::Variable(i));
            }
        }
        if let Some(kind) = OperatorKind::from_name(name) {
            return Err(ExprError::Arity {
                name: name.to_string(),
                expected: kind.arity(),
                found: 0,
            });
        }
        Err(ExprError::UnknownIdentifier {
            name: name.to_string(),
            pos,
        })
    }
}

/// Parses `text` against a feature schema. Aliases (`div`, `log`, `sqrt`,
/// `exp`, `pow`) resolve to their protected operators; no other
/// normalization is applied.
pub fn parse_expression<T: Scalar>(
    text: &str,
    feature_names: &[String],
) -> Result<ExpressionTree<T>, ExprError> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        next: 0,
        end: text.len(),
        names: feature_names,
    };
    let root = p.expr()?;
    if let Some(t) = p.peek() {
        return Err(match t.token {
            Token::RParen => ExprError::Unbalanced { pos: t.pos },
            _ => ExprError::Syntax {
                pos: t.pos,
                message: "trailing input".into(),
            },
        });
    }
    Ok(ExpressionTree::from_parts_unchecked(
        root,
        feature_names.to_vec(),
    ))
}

/// Canonical text form. Variables print as schema names, operators by
/// their canonical names and constants in shortest round-trip decimal.
pub fn serialize<T: Scalar>(tree: &ExpressionTree<T>) -> String {
    let mut out = String::new();
    write_node(tree.root(), tree.feature_names(), &mut out);
    out
}

fn write_node<T: Scalar>(node: &ExprNode<T>, names: &[String], out: &mut String) {
    match node {
        ExprNode::Variable(i) => out.push_str(&names[*i]),
        ExprNode::Constant(c) => {
            // Display never uses exponent notation for floats, and -0 keeps its sign.
            let _ = write!(out, "{c}");
        }
        ExprNode::Operator { kind, children } => {
            out.push_str(kind.name());
            out.push('(');
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_node(c, names, out);
            }
            out.push(')');
        }
    }
}

impl<T: Scalar> std::fmt::Display for ExpressionTree<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&serialize(self))
    }
}
