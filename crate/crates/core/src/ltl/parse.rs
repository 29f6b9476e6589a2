use thiserror::Error;

use super::{Cmp, LtlFormula, Predicate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct SyntaxError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Finally,
    Globally,
    Next,
    Until,
    Implies,
    And,
    Or,
    Not,
    LParen,
    RParen,
    Cmp(Cmp),
    Ident(String),
    Int(i64),
    True,
    False,
    End,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::End => "end of input".into(),
        t => format!("{t:?}"),
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |position, message: &str| SyntaxError {
        position,
        message: message.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let rest = &text[i..];
        let fixed: &[(&str, Tok)] = &[
            ("<>", Tok::Finally),
            ("[]", Tok::Globally),
            ("->", Tok::Implies),
            ("&&", Tok::And),
            ("||", Tok::Or),
            ("==", Tok::Cmp(Cmp::Eq)),
            ("!=", Tok::Cmp(Cmp::Ne)),
            ("<=", Tok::Cmp(Cmp::Le)),
            (">=", Tok::Cmp(Cmp::Ge)),
            ("<", Tok::Cmp(Cmp::Lt)),
            (">", Tok::Cmp(Cmp::Gt)),
            ("!", Tok::Not),
            ("(", Tok::LParen),
            (")", Tok::RParen),
        ];
        if let Some((s, t)) = fixed.iter().find(|(s, _)| rest.starts_with(s)) {
            out.push((i, t.clone()));
            i += s.len();
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'-' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            i += 1;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let n = text[start..i]
                .parse()
                .map_err(|_| err(start, "integer out of range"))?;
            out.push((start, Tok::Int(n)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let tok = match &text[start..i] {
                "U" => Tok::Until,
                "X" => Tok::Next,
                "true" => Tok::True,
                "false" => Tok::False,
                w => Tok::Ident(w.to_string()),
            };
            out.push((start, tok));
        } else {
            return Err(err(i, "unexpected character"));
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn fail<T>(&self, what: &str) -> Result<T, SyntaxError> {
        Err(SyntaxError {
            position: self.offset(),
            message: format!("expected {what}, found {}", describe(self.peek())),
        })
    }

    fn implication(&mut self) -> Result<LtlFormula, SyntaxError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implication()?;
            return Ok(LtlFormula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<LtlFormula, SyntaxError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.bump();
            lhs = LtlFormula::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<LtlFormula, SyntaxError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            lhs = LtlFormula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<LtlFormula, SyntaxError> {
        let lhs = self.unary()?;
        if *self.peek() == Tok::Until {
            self.bump();
            let rhs = self.until()?;
            return Ok(LtlFormula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<LtlFormula, SyntaxError> {
        let wrap: fn(LtlFormula) -> LtlFormula = match self.peek() {
            Tok::Not => LtlFormula::not,
            Tok::Finally => LtlFormula::finally,
            Tok::Globally => LtlFormula::globally,
            Tok::Next => LtlFormula::next,
            _ => return self.primary(),
        };
        self.bump();
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<LtlFormula, SyntaxError> {
        match self.peek() {
            Tok::LParen => {
                self.bump();
                let f = self.implication()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("`)`");
                }
                self.bump();
                Ok(f)
            }
            Tok::True => {
                self.bump();
                Ok(LtlFormula::True)
            }
            Tok::False => {
                self.bump();
                Ok(LtlFormula::False)
            }
            Tok::Ident(_) | Tok::Int(_) => self.comparison(),
            _ => self.fail("a formula"),
        }
    }

    fn comparison(&mut self) -> Result<LtlFormula, SyntaxError> {
        let lhs = self.bump();
        let Tok::Cmp(cmp) = self.peek().clone() else {
            return self.fail("a comparison operator");
        };
        self.bump();
        let rhs = match self.peek() {
            Tok::Ident(_) | Tok::Int(_) => self.bump(),
            _ => return self.fail("a variable or integer"),
        };
        Ok(match (lhs, rhs) {
            (Tok::Ident(v), Tok::Int(n)) => LtlFormula::Atom(Predicate::new(v, cmp, n)),
            (Tok::Int(n), Tok::Ident(v)) => LtlFormula::Atom(Predicate::new(v, cmp.swapped(), n)),
            (Tok::Int(a), Tok::Int(b)) => {
                if cmp.holds(a, b) {
                    LtlFormula::True
                } else {
                    LtlFormula::False
                }
            }
            _ => {
                self.pos -= 1;
                return self.fail("an integer (variables can only be compared with constants)");
            }
        })
    }
}

/// Parses the concrete syntax: `<>` finally, `[]` globally, `X` next,
/// `U` until, `!`, `&&`, `||`, `->`, parentheses, `true`, `false` and
/// comparisons `var OP int` with `OP` one of `== != < <= > >=`.
///
/// Precedence from tightest: unary operators, `U`, `&&`, `||`, `->`.
/// `U` and `->` associate to the right, `&&` and `||` to the left.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, SyntaxError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
    };
    let f = p.implication()?;
    if *p.peek() != Tok::End {
        return p.fail("end of input");
    }
    Ok(f)
}
