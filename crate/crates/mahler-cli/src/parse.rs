//! Text grammars for series, operators, xi expressions and generalized
//! series.
//!
//! Series are sums of `c*z^(a/b)` terms; operators are series-coefficient
//! sums in `M` with `M^k` denoting the k-fold substitution, closed by
//! `@ p=<int>`; xi literals are `xi[alpha=(..); lambda=(..); a=(..)]` or the
//! positional short form `xi[(..);(..);(..)]`. Expressions are evaluated
//! directly over the operator algebra, so products respect `M f = f(z^p) M`.

use mahler_core::scalar::{Q, Scalar};
use mahler_core::series::TruncatedPuiseux;
use mahler_core::xi::{GeneralizedSeries, XiExpr, XiIndex};
use mahler_core::MahlerOperator;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum Token {
    Num(Q),
    Z,
    M,
    Xi(XiIndex),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    At,
    Semi,
    Comma,
    Ident(String),
    Eq,
}

pub fn tokenize(input: &str) -> Result<Vec<Token>, String> {
    let mut out = Vec::new();
    let chars: Vec<char> = input.chars().collect();
    let mut i = 0usize;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '+' => {
                out.push(Token::Plus);
                i += 1;
            }
            '-' => {
                out.push(Token::Minus);
                i += 1;
            }
            '*' => {
                out.push(Token::Star);
                i += 1;
            }
            '^' => {
                out.push(Token::Caret);
                i += 1;
            }
            '(' => {
                out.push(Token::LParen);
                i += 1;
            }
            ')' => {
                out.push(Token::RParen);
                i += 1;
            }
            '[' => {
                out.push(Token::LBracket);
                i += 1;
            }
            ']' => {
                out.push(Token::RBracket);
                i += 1;
            }
            '@' => {
                out.push(Token::At);
                i += 1;
            }
            ';' => {
                out.push(Token::Semi);
                i += 1;
            }
            ',' => {
                out.push(Token::Comma);
                i += 1;
            }
            '=' => {
                out.push(Token::Eq);
                i += 1;
            }
            '0'..='9' => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let num: BigInt = chars[i..j].iter().collect::<String>().parse().unwrap();
                // optional denominator
                if j < chars.len() && chars[j] == '/' {
                    let mut k = j + 1;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == j + 1 {
                        return Err("expected digits after '/'".into());
                    }
                    let den: BigInt = chars[j + 1..k].iter().collect::<String>().parse().unwrap();
                    if den.is_zero() {
                        return Err("zero denominator".into());
                    }
                    out.push(Token::Num(Q::new(num, den)));
                    i = k;
                } else {
                    out.push(Token::Num(Q::from_integer(num)));
                    i = j;
                }
            }
            'z' => {
                out.push(Token::Z);
                i += 1;
            }
            'M' => {
                out.push(Token::M);
                i += 1;
            }
            'a'..='y' | 'A'..='L' | 'N'..='Z' | '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                out.push(Token::Ident(chars[i..j].iter().collect()));
                i = j;
            }
            _ => return Err(format!("unexpected character '{c}'")),
        }
    }
    Ok(out)
}

/// Recursive-descent evaluator over the operator algebra.
pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    p: u32,
}

#[derive(Debug, Clone)]
enum Value {
    Op(MahlerOperator),
    Xi(XiExpr),
}

impl Parser {
    pub fn new(tokens: Vec<Token>, p: u32) -> Self {
        Parser { tokens, pos: 0, p }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: &Token) -> Result<(), String> {
        match self.bump() {
            Some(x) if &x == t => Ok(()),
            other => Err(format!("expected {t:?}, found {other:?}")),
        }
    }

    fn rational(&mut self) -> Result<Q, String> {
        let neg = matches!(self.peek(), Some(Token::Minus));
        if neg {
            self.bump();
        }
        match self.bump() {
            Some(Token::Num(q)) => Ok(if neg { -q } else { q }),
            other => Err(format!("expected a rational, found {other:?}")),
        }
    }

    /// A possibly parenthesized rational exponent, or a bare integer.
    fn exponent(&mut self) -> Result<Q, String> {
        if matches!(self.peek(), Some(Token::LParen)) {
            self.bump();
            let q = self.rational()?;
            self.expect(&Token::RParen)?;
            Ok(q)
        } else {
            self.rational()
        }
    }

    fn sum(&mut self) -> Result<Value, String> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    let rhs = self.product()?;
                    acc = add_values(acc, rhs, self.p)?;
                }
                Some(Token::Minus) => {
                    self.bump();
                    let rhs = self.product()?;
                    acc = add_values(acc, neg_value(rhs), self.p)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Value, String> {
        let mut acc = self.signed_atom()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    let rhs = self.signed_atom()?;
                    acc = mul_values(acc, rhs, self.p)?;
                }
                // juxtaposition of an atom also multiplies (e.g. `2 M`)
                Some(Token::Z) | Some(Token::M) | Some(Token::Num(_)) | Some(Token::LParen)
                | Some(Token::Ident(_)) => {
                    let rhs = self.signed_atom()?;
                    acc = mul_values(acc, rhs, self.p)?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn signed_atom(&mut self) -> Result<Value, String> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(neg_value(self.signed_atom()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Value, String> {
        match self.bump() {
            Some(Token::Num(q)) => Ok(Value::Op(MahlerOperator::new(
                self.p,
                vec![TruncatedPuiseux::constant(Scalar::from_q(q))],
            ))),
            Some(Token::Z) => {
                let e = if matches!(self.peek(), Some(Token::Caret)) {
                    self.bump();
                    self.exponent()?
                } else {
                    Q::one()
                };
                Ok(Value::Op(MahlerOperator::new(
                    self.p,
                    vec![TruncatedPuiseux::monomial(e, Scalar::one())],
                )))
            }
            Some(Token::M) => {
                let k: usize = if matches!(self.peek(), Some(Token::Caret)) {
                    self.bump();
                    let e = self.exponent()?;
                    if !e.is_integer() || e.is_negative() {
                        return Err("M powers must be nonnegative integers".into());
                    }
                    e.to_integer().try_into().map_err(|_| "M power too large")?
                } else {
                    1
                };
                let mut coeffs = vec![TruncatedPuiseux::zero(); k + 1];
                coeffs[k] = TruncatedPuiseux::one();
                Ok(Value::Op(MahlerOperator::new(self.p, coeffs)))
            }
            Some(Token::LParen) => {
                let v = self.sum()?;
                self.expect(&Token::RParen)?;
                Ok(v)
            }
            Some(Token::Ident(name)) if name == "xi" => {
                let idx = self.xi_index()?;
                Ok(Value::Xi(XiExpr::from_index(idx)))
            }
            other => Err(format!("unexpected token {other:?}")),
        }
    }

    fn tuple(&mut self) -> Result<Vec<Q>, String> {
        self.expect(&Token::LParen)?;
        let mut out = Vec::new();
        if matches!(self.peek(), Some(Token::RParen)) {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.rational()?);
            match self.bump() {
                Some(Token::Comma) => continue,
                Some(Token::RParen) => break,
                other => return Err(format!("expected ',' or ')', found {other:?}")),
            }
        }
        Ok(out)
    }

    fn xi_index(&mut self) -> Result<XiIndex, String> {
        self.expect(&Token::LBracket)?;
        let mut parts: Vec<Vec<Q>> = Vec::new();
        for slot in 0..3 {
            // optional `name =` prefix
            if let Some(Token::Ident(_)) = self.peek() {
                self.bump();
                self.expect(&Token::Eq)?;
            }
            parts.push(self.tuple()?);
            if slot < 2 {
                self.expect(&Token::Semi)?;
            }
        }
        self.expect(&Token::RBracket)?;
        let [alpha, lambda, a] = [&parts[0], &parts[1], &parts[2]];
        let alpha_u: Result<Vec<u32>, String> = alpha
            .iter()
            .map(|q| {
                if q.is_integer() && !q.is_negative() {
                    q.to_integer().try_into().map_err(|_| "alpha too large".into())
                } else {
                    Err("alpha entries must be nonnegative integers".into())
                }
            })
            .collect();
        XiIndex::new(
            alpha_u?,
            lambda.iter().map(|q| Scalar::from_q(q.clone())).collect(),
            a.clone(),
        )
        .map_err(|e| e.to_string())
    }
}

fn add_values(a: Value, b: Value, p: u32) -> Result<Value, String> {
    Ok(match (a, b) {
        (Value::Op(x), Value::Op(y)) => Value::Op(x.add(&y)),
        (x, y) => {
            let xe = into_xi(x, p)?;
            let ye = into_xi(y, p)?;
            Value::Xi(xe.add(&ye))
        }
    })
}

fn neg_value(a: Value) -> Value {
    match a {
        Value::Op(x) => Value::Op(x.neg()),
        Value::Xi(x) => Value::Xi(x.neg()),
    }
}

fn mul_values(a: Value, b: Value, p: u32) -> Result<Value, String> {
    Ok(match (a, b) {
        (Value::Op(x), Value::Op(y)) => Value::Op(x.mul(&y)),
        (x, y) => {
            let xe = into_xi(x, p)?;
            let ye = into_xi(y, p)?;
            Value::Xi(mahler_core::xi::xi_multiply(&xe, &ye, p))
        }
    })
}

fn into_xi(v: Value, _p: u32) -> Result<XiExpr, String> {
    match v {
        Value::Xi(x) => Ok(x),
        Value::Op(o) => {
            if o.order() != 0 {
                return Err("M is not allowed inside a xi expression".into());
            }
            Ok(XiExpr::from_puiseux(o.coeff(0)))
        }
    }
}

/// Parses an operator expression `... @ p=<int>` (the trailing clause is
/// required so the ambient substitution order is explicit).
pub fn parse_operator(input: &str) -> Result<MahlerOperator, String> {
    let (body, p) = split_p_clause(input)?;
    let tokens = tokenize(&body)?;
    let mut parser = Parser::new(tokens, p);
    match parser.sum()? {
        Value::Op(op) => {
            if parser.pos != parser.tokens.len() {
                return Err("trailing tokens after the operator".into());
            }
            op.validate_equation().map_err(|e| e.to_string())?;
            Ok(op)
        }
        Value::Xi(_) => Err("expected an operator, found a xi expression".into()),
    }
}

/// Parses an exact series (an order-0 operator body without the `@` clause
/// being mandatory; `p` only matters for xi content, so series accept any).
pub fn parse_series(input: &str) -> Result<TruncatedPuiseux, String> {
    let (body, p) = split_p_clause_optional(input, 2)?;
    let tokens = tokenize(&body)?;
    let mut parser = Parser::new(tokens, p);
    match parser.sum()? {
        Value::Op(op) => {
            if parser.pos != parser.tokens.len() {
                return Err("trailing tokens after the series".into());
            }
            if op.order() != 0 {
                return Err("M cannot appear in a series literal".into());
            }
            Ok(op.coeff(0))
        }
        Value::Xi(_) => Err("expected a series, found a xi expression".into()),
    }
}

/// Parses a xi-algebra expression; needs `@ p=<int>` when products occur,
/// defaulting to p = 2 otherwise.
pub fn parse_xi_expr(input: &str, default_p: u32) -> Result<(XiExpr, u32), String> {
    let (body, p) = split_p_clause_optional(input, default_p)?;
    let tokens = tokenize(&body)?;
    let mut parser = Parser::new(tokens, p);
    let v = parser.sum()?;
    if parser.pos != parser.tokens.len() {
        return Err("trailing tokens after the expression".into());
    }
    Ok((into_xi(v, p)?, p))
}

/// Generalized series: sum of `(c; j)*[ xi-expr ]` blocks.
pub fn parse_generalized(input: &str, default_p: u32) -> Result<(GeneralizedSeries, u32), String> {
    let (body, p) = split_p_clause_optional(input, default_p)?;
    let tokens = tokenize(&body)?;
    let mut parser = Parser::new(tokens, p);
    let mut out = GeneralizedSeries::zero();
    loop {
        // (c; j) * [ expr ]
        parser.expect(&Token::LParen)?;
        let c = parser.rational()?;
        parser.expect(&Token::Semi)?;
        let j = parser.rational()?;
        if !j.is_integer() || j.is_negative() {
            return Err("l exponent must be a nonnegative integer".into());
        }
        parser.expect(&Token::RParen)?;
        parser.expect(&Token::Star)?;
        parser.expect(&Token::LBracket)?;
        let v = parser.sum()?;
        parser.expect(&Token::RBracket)?;
        let e = into_xi(v, p)?;
        if c.is_zero() {
            return Err("e_c labels need nonzero c".into());
        }
        let ju: usize = j.to_integer().try_into().map_err(|_| "l power too large")?;
        out = out.add(&GeneralizedSeries::term(Scalar::from_q(c), ju, e));
        match parser.peek() {
            Some(Token::Plus) => {
                parser.bump();
            }
            None => break,
            other => return Err(format!("expected '+' or end, found {other:?}")),
        }
    }
    Ok((out, p))
}

fn split_p_clause(input: &str) -> Result<(String, u32), String> {
    match split_p_clause_optional(input, 0)? {
        (_, 0) => Err("missing '@ p=<int>' clause".into()),
        ok => Ok(ok),
    }
}

fn split_p_clause_optional(input: &str, default_p: u32) -> Result<(String, u32), String> {
    match input.rsplit_once('@') {
        None => Ok((input.to_string(), default_p)),
        Some((body, clause)) => {
            let clause = clause.trim();
            let rest = clause
                .strip_prefix('p')
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or("malformed '@ p=<int>' clause")?;
            let p: u32 = rest.trim().parse().map_err(|_| "malformed p value")?;
            if p < 2 {
                return Err("p must be at least 2".into());
            }
            Ok((body.to_string(), p))
        }
    }
}

/// Truncates an exact parsed series to a precision for guessing inputs.
pub fn with_precision(f: TruncatedPuiseux, n: i64) -> TruncatedPuiseux {
    f.truncate(&Q::from_integer(n.into()))
}
