//! Recursive-descent parser and dimension-checked evaluator for physics
//! expressions over a [`ConstantsRegistry`].
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | factor
//! factor := base ('^' unary)?
//! base   := NUMBER unit? | IDENT | IDENT '(' expr ')' | '(' expr ')'
//! unit   := '[' uexpr ']'
//! uexpr  := uterm (('*' | '/') uterm)*
//! uterm  := uatom ('^' unary)?
//! uatom  := SYMBOL | '(' uexpr ')'
//! ```
//!
//! `^` is right-associative and its exponent must fold to a dimensionless
//! rational while parsing. Unit symbols are the seven SI base symbols plus
//! `eV`. There is no implicit multiplication.

use std::fmt;

use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Zero};
use thiserror::Error;

use crate::units::{ConstantsRegistry, DimensionVector, Quantity, Ratio, UnitsError, EV};

pub const DEFAULT_MAX_DEPTH: usize = 64;

/// Byte range `[start, end)` in the parsed input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    fn join(self, other: Span) -> Span {
        Span {
            start: self.start.min(other.start),
            end: self.end.max(other.end),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {expected}, found {found}")]
pub struct ParseError {
    pub offset: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown identifier `{name}` at bytes {}..{}", span.start, span.end)]
    UnknownIdentifier { name: String, span: Span },
    #[error("dimension error in bytes {}..{}: {left} vs {right}", span.start, span.end)]
    Dimension {
        span: Span,
        left: DimensionVector,
        right: DimensionVector,
    },
    #[error("domain error in bytes {}..{}: {message}", span.start, span.end)]
    Domain { span: Span, message: String },
    #[error("range error in bytes {}..{}: {message}", span.start, span.end)]
    Range { span: Span, message: String },
}

impl EvalError {
    fn from_units(err: UnitsError, span: Span) -> Self {
        match err {
            UnitsError::DimensionMismatch { left, right } => EvalError::Dimension { span, left, right },
            UnitsError::Domain(message) => EvalError::Domain { span, message },
            UnitsError::UnknownConstant(name) => EvalError::UnknownIdentifier { name, span },
            other => EvalError::Range {
                span,
                message: other.to_string(),
            },
        }
    }

    pub fn span(&self) -> Span {
        match self {
            EvalError::UnknownIdentifier { span, .. }
            | EvalError::Dimension { span, .. }
            | EvalError::Domain { span, .. }
            | EvalError::Range { span, .. } => *span,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sqrt" => Func::Sqrt,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Abs => "abs",
        }
    }
}

/// Bracketed unit on a number literal, flattened to `symbol^exponent`
/// factors in source order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitAnnotation {
    pub factors: Vec<(String, Ratio)>,
}

impl UnitAnnotation {
    /// SI scale factor and dimension of the annotation.
    pub fn to_quantity(&self) -> Result<Quantity, UnitsError> {
        let mut q = Quantity::dimensionless(1.0)?;
        for (sym, exp) in &self.factors {
            q = q.checked_mul(&unit_symbol(sym).expect("validated at parse").checked_pow(*exp)?)?;
        }
        Ok(q)
    }
}

impl fmt::Display for UnitAnnotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (sym, e)) in self.factors.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            if *e == Ratio::from_integer(1) {
                write!(f, "{sym}")?;
            } else {
                write!(f, "{sym}^({}/{})", e.numer(), e.denom())?;
            }
        }
        f.write_str("]")
    }
}

fn unit_symbol(sym: &str) -> Option<Quantity> {
    if sym == "eV" {
        return Quantity::new(EV, DimensionVector::energy()).ok();
    }
    DimensionVector::base(sym).and_then(|d| Quantity::new(1.0, d).ok())
}

#[derive(Debug, Clone)]
pub enum ExprKind {
    Number {
        literal: String,
        value: f64,
        unit: Option<UnitAnnotation>,
    },
    Const(String),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Func {
        func: Func,
        arg: Box<Expr>,
    },
    Neg(Box<Expr>),
}

/// Parsed expression node. Equality is structural and ignores spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    depth: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (
                Number { literal: a, unit: ua, .. },
                Number { literal: b, unit: ub, .. },
            ) => a == b && ua == ub,
            (Const(a), Const(b)) => a == b,
            (
                Binary { op: oa, lhs: la, rhs: ra },
                Binary { op: ob, lhs: lb, rhs: rb },
            ) => oa == ob && la == lb && ra == rb,
            (Func { func: fa, arg: aa }, Func { func: fb, arg: ab }) => fa == fb && aa == ab,
            (Neg(a), Neg(b)) => a == b,
            _ => false,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        let depth = 1 + match &kind {
            ExprKind::Number { .. } | ExprKind::Const(_) => 0,
            ExprKind::Binary { lhs, rhs, .. } => lhs.depth.max(rhs.depth),
            ExprKind::Func { arg, .. } | ExprKind::Neg(arg) => arg.depth,
        };
        Self { kind, span, depth }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn number(literal: &str) -> Self {
        let value = literal.parse().expect("numeric literal");
        Expr::new(
            ExprKind::Number {
                literal: literal.to_string(),
                value,
                unit: None,
            },
            Span::default(),
        )
    }

    pub fn constant(name: &str) -> Self {
        Expr::new(ExprKind::Const(name.to_string()), Span::default())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        let span = lhs.span.join(rhs.span);
        Expr::new(
            ExprKind::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            },
            span,
        )
    }

    pub fn func(func: Func, arg: Expr) -> Self {
        let span = arg.span;
        Expr::new(ExprKind::Func { func, arg: Box::new(arg) }, span)
    }

    pub fn neg(arg: Expr) -> Self {
        let span = arg.span;
        Expr::new(ExprKind::Neg(Box::new(arg)), span)
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized form; re-parsing it yields a structurally equal tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Number { literal, unit, .. } => match unit {
                Some(u) => write!(f, "{literal} {u}"),
                None => f.write_str(literal),
            },
            ExprKind::Const(name) => f.write_str(name),
            ExprKind::Binary { op, lhs, rhs } => write!(f, "({lhs} {} {rhs})", op.symbol()),
            ExprKind::Func { func, arg } => write!(f, "{}({arg})", func.name()),
            ExprKind::Neg(arg) => write!(f, "(-{arg})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Number(String),
    Ident(String),
    Sym(char),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Number(s) => write!(f, "number `{s}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = input.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if b.is_ascii_digit() || (b == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            out.push(Token {
                tok: Tok::Number(input[start..i].to_string()),
                span: Span { start, end: i },
            });
        } else if b.is_ascii_alphabetic() || b == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(input[start..i].to_string()),
                span: Span { start, end: i },
            });
        } else if b"+-*/^()[]".contains(&b) {
            i += 1;
            out.push(Token {
                tok: Tok::Sym(b as char),
                span: Span { start, end: i },
            });
        } else {
            let ch = input[start..].chars().next().unwrap_or('?');
            return Err(ParseError {
                offset: start,
                expected: "a token".into(),
                found: format!("character {ch:?}"),
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: input.len(),
            end: input.len(),
        },
    });
    Ok(out)
}

/// Exact rational value of a decimal literal such as `6.674e-11`.
fn literal_ratio(literal: &str) -> Option<Ratio> {
    let (mantissa, exp) = match literal.find(['e', 'E']) {
        Some(p) => (&literal[..p], literal[p + 1..].parse::<i32>().ok()?),
        None => (literal, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let mut num: i64 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let scale = exp.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let ten_pow = |n: u32| 10i64.checked_pow(n);
    if scale >= 0 {
        num = num.checked_mul(ten_pow(scale as u32)?)?;
        Some(Ratio::from_integer(num))
    } else {
        Some(Ratio::new(num, ten_pow(scale.unsigned_abs())?))
    }
}

/// Fold an exponent expression to an exact rational, if it is one.
fn fold_rational(expr: &Expr) -> Option<Ratio> {
    match &expr.kind {
        ExprKind::Number { literal, unit: None, .. } => literal_ratio(literal),
        ExprKind::Neg(arg) => Some(-fold_rational(arg)?),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = fold_rational(lhs)?;
            let b = fold_rational(rhs)?;
            match op {
                BinOp::Add => a.checked_add(&b),
                BinOp::Sub => a.checked_sub(&b),
                BinOp::Mul => a.checked_mul(&b),
                BinOp::Div => {
                    if b.is_zero() {
                        None
                    } else {
                        a.checked_div(&b)
                    }
                }
                BinOp::Pow => {
                    if !b.is_integer() {
                        return None;
                    }
                    let n = i32::try_from(*b.numer()).ok()?;
                    if n.unsigned_abs() > 64 || (a.is_zero() && n < 0) {
                        return None;
                    }
                    let mut acc = Ratio::from_integer(1);
                    for _ in 0..n.unsigned_abs() {
                        acc = acc.checked_mul(&a)?;
                    }
                    Some(if n < 0 { acc.recip() } else { acc })
                }
            }
        }
        _ => None,
    }
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    max_depth: usize,
    recursion: usize,
    _input: &'a str,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        let t = self.peek();
        ParseError {
            offset: t.span.start,
            expected: expected.to_string(),
            found: t.tok.to_string(),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek().tok == Tok::Sym(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<Span, ParseError> {
        if self.peek().tok == Tok::Sym(c) {
            Ok(self.bump().span)
        } else {
            Err(self.error(&format!("`{c}`")))
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.recursion += 1;
        if self.recursion > self.max_depth {
            return Err(self.depth_error(self.recursion));
        }
        Ok(())
    }

    fn depth_error(&self, depth: usize) -> ParseError {
        ParseError {
            offset: self.peek().span.start,
            expected: format!("expression nested at most {} deep", self.max_depth),
            found: format!("depth {depth}"),
        }
    }

    fn checked(&self, e: Expr) -> Result<Expr, ParseError> {
        if e.depth > self.max_depth {
            Err(self.depth_error(e.depth))
        } else {
            Ok(e)
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('+') => BinOp::Add,
                Tok::Sym('-') => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = self.checked(Expr::binary(op, lhs, rhs))?;
        }
        self.recursion -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Sym('*') => BinOp::Mul,
                Tok::Sym('/') => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = self.checked(Expr::binary(op, lhs, rhs))?;
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let out = if self.peek().tok == Tok::Sym('-') {
            let minus = self.bump().span;
            let arg = self.unary()?;
            let mut e = Expr::neg(arg);
            e.span = minus.join(e.span);
            self.checked(e)?
        } else {
            self.factor()?
        };
        self.recursion -= 1;
        Ok(out)
    }

    fn exponent(&mut self) -> Result<(Expr, Ratio), ParseError> {
        let start = self.peek().span.start;
        let found = self.peek().tok.to_string();
        let e = self.unary()?;
        match fold_rational(&e) {
            Some(p) => Ok((e, p)),
            None => Err(ParseError {
                offset: start,
                expected: "a dimensionless rational exponent".into(),
                found,
            }),
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.eat_sym('^') {
            let (exp, _) = self.exponent()?;
            return self.checked(Expr::binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let tok = self.peek().clone();
        match tok.tok {
            Tok::Number(lit) => {
                self.bump();
                let value: f64 = lit.parse().map_err(|_| ParseError {
                    offset: tok.span.start,
                    expected: "a numeric literal".into(),
                    found: format!("`{lit}`"),
                })?;
                let mut span = tok.span;
                let unit = if self.peek().tok == Tok::Sym('[') {
                    let open = self.bump().span;
                    let factors = self.unit_expr()?;
                    let close = self.expect_sym(']')?;
                    span = span.join(open).join(close);
                    Some(UnitAnnotation { factors })
                } else {
                    None
                };
                Ok(Expr::new(
                    ExprKind::Number {
                        literal: lit,
                        value,
                        unit,
                    },
                    span,
                ))
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek().tok == Tok::Sym('(') {
                    let func = Func::from_name(&name).ok_or_else(|| ParseError {
                        offset: tok.span.start,
                        expected: "a function name (sqrt, exp, ln, abs)".into(),
                        found: format!("identifier `{name}`"),
                    })?;
                    self.bump();
                    let arg = self.expr()?;
                    let close = self.expect_sym(')')?;
                    let mut e = Expr::func(func, arg);
                    e.span = tok.span.join(close);
                    self.checked(e)
                } else {
                    Ok(Expr::new(ExprKind::Const(name), tok.span))
                }
            }
            Tok::Sym('(') => {
                self.bump();
                let mut e = self.expr()?;
                let close = self.expect_sym(')')?;
                e.span = tok.span.join(close);
                Ok(e)
            }
            _ => Err(self.error("a factor")),
        }
    }

    fn unit_expr(&mut self) -> Result<Vec<(String, Ratio)>, ParseError> {
        self.enter()?;
        let mut factors = self.unit_term()?;
        loop {
            let invert = match self.peek().tok {
                Tok::Sym('*') => false,
                Tok::Sym('/') => true,
                _ => break,
            };
            self.bump();
            let mut rhs = self.unit_term()?;
            if invert {
                for (_, e) in rhs.iter_mut() {
                    *e = -*e;
                }
            }
            factors.extend(rhs);
        }
        self.recursion -= 1;
        Ok(factors)
    }

    fn unit_term(&mut self) -> Result<Vec<(String, Ratio)>, ParseError> {
        let tok = self.peek().clone();
        let mut factors = match tok.tok {
            Tok::Ident(sym) if unit_symbol(&sym).is_some() => {
                self.bump();
                vec![(sym, Ratio::from_integer(1))]
            }
            Tok::Sym('(') => {
                self.bump();
                let inner = self.unit_expr()?;
                self.expect_sym(')')?;
                inner
            }
            _ => return Err(self.error("a unit symbol (m, kg, s, A, K, mol, cd, eV)")),
        };
        if self.eat_sym('^') {
            let at = self.peek().span.start;
            let (_, p) = self.exponent()?;
            for (_, e) in factors.iter_mut() {
                *e = e.checked_mul(&p).ok_or_else(|| ParseError {
                    offset: at,
                    expected: "a representable unit exponent".into(),
                    found: "exponent overflow".into(),
                })?;
            }
        }
        Ok(factors)
    }
}

/// Parse with the default depth limit.
pub fn parse(input: &str) -> Result<Expr, ParseError> {
    parse_with_depth(input, DEFAULT_MAX_DEPTH)
}

pub fn parse_with_depth(input: &str, max_depth: usize) -> Result<Expr, ParseError> {
    let tokens = lex(input)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        max_depth,
        recursion: 0,
        _input: input,
    };
    let e = p.expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("an operator or end of input"));
    }
    Ok(e)
}

fn pow_exponent(expr: &Expr) -> Result<Ratio, EvalError> {
    fold_rational(expr).ok_or_else(|| EvalError::Domain {
        span: expr.span,
        message: "exponent is not a dimensionless rational constant".into(),
    })
}

/// Dimension-checked evaluation.
pub fn evaluate(expr: &Expr, registry: &ConstantsRegistry) -> Result<Quantity, EvalError> {
    let span = expr.span;
    let lift = |r: Result<Quantity, UnitsError>| r.map_err(|e| EvalError::from_units(e, span));
    match &expr.kind {
        ExprKind::Number { value, unit, .. } => {
            let v = lift(Quantity::dimensionless(*value))?;
            match unit {
                Some(u) => lift(u.to_quantity().and_then(|uq| v.checked_mul(&uq))),
                None => Ok(v),
            }
        }
        ExprKind::Const(name) => registry
            .get(name)
            .copied()
            .map_err(|_| EvalError::UnknownIdentifier {
                name: name.clone(),
                span,
            }),
        ExprKind::Neg(arg) => Ok(evaluate(arg, registry)?.neg()),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = evaluate(lhs, registry)?;
            if *op == BinOp::Pow {
                let p = pow_exponent(rhs)?;
                return lift(a.checked_pow(p));
            }
            let b = evaluate(rhs, registry)?;
            lift(match op {
                BinOp::Add => a.checked_add(&b),
                BinOp::Sub => a.checked_sub(&b),
                BinOp::Mul => a.checked_mul(&b),
                BinOp::Div => a.checked_div(&b),
                BinOp::Pow => unreachable!(),
            })
        }
        ExprKind::Func { func, arg } => {
            let a = evaluate(arg, registry)?;
            match func {
                Func::Sqrt => {
                    if a.value() < 0.0 {
                        return Err(EvalError::Domain {
                            span,
                            message: format!("sqrt of negative value {:e}", a.value()),
                        });
                    }
                    lift(a.checked_pow(Ratio::new(1, 2)))
                }
                Func::Abs => lift(Quantity::new(a.value().abs(), *a.dim())),
                Func::Exp | Func::Ln => {
                    if !a.dim().is_dimensionless() {
                        return Err(EvalError::Dimension {
                            span,
                            left: *a.dim(),
                            right: DimensionVector::dimensionless(),
                        });
                    }
                    if *func == Func::Ln && a.value() <= 0.0 {
                        return Err(EvalError::Domain {
                            span,
                            message: format!("ln of non-positive value {:e}", a.value()),
                        });
                    }
                    let v = if *func == Func::Exp { a.value().exp() } else { a.value().ln() };
                    lift(Quantity::dimensionless(v))
                }
            }
        }
    }
}

/// Fold only the dimension of `expr`, without evaluating magnitudes.
pub fn infer_dimension(expr: &Expr, registry: &ConstantsRegistry) -> Result<DimensionVector, EvalError> {
    let span = expr.span;
    let overflow = || EvalError::Range {
        span,
        message: "dimension exponent overflow".into(),
    };
    match &expr.kind {
        ExprKind::Number { unit, .. } => match unit {
            Some(u) => u
                .to_quantity()
                .map(|q| *q.dim())
                .map_err(|e| EvalError::from_units(e, span)),
            None => Ok(DimensionVector::dimensionless()),
        },
        ExprKind::Const(name) => registry
            .get(name)
            .map(|q| *q.dim())
            .map_err(|_| EvalError::UnknownIdentifier {
                name: name.clone(),
                span,
            }),
        ExprKind::Neg(arg) => infer_dimension(arg, registry),
        ExprKind::Binary { op, lhs, rhs } => {
            let a = infer_dimension(lhs, registry)?;
            if *op == BinOp::Pow {
                return a.checked_scale(pow_exponent(rhs)?).ok_or_else(overflow);
            }
            let b = infer_dimension(rhs, registry)?;
            match op {
                BinOp::Add | BinOp::Sub => {
                    if a == b {
                        Ok(a)
                    } else {
                        Err(EvalError::Dimension { span, left: a, right: b })
                    }
                }
                BinOp::Mul => a.checked_add(&b).ok_or_else(overflow),
                BinOp::Div => a.checked_sub(&b).ok_or_else(overflow),
                BinOp::Pow => unreachable!(),
            }
        }
        ExprKind::Func { func, arg } => {
            let a = infer_dimension(arg, registry)?;
            match func {
                Func::Sqrt => a.checked_scale(Ratio::new(1, 2)).ok_or_else(overflow),
                Func::Abs => Ok(a),
                Func::Exp | Func::Ln => {
                    if a.is_dimensionless() {
                        Ok(a)
                    } else {
                        Err(EvalError::Dimension {
                            span,
                            left: a,
                            right: DimensionVector::dimensionless(),
                        })
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub computed: DimensionVector,
    pub expected: DimensionVector,
}

impl DimensionReport {
    pub fn pass(&self) -> bool {
        self.computed == self.expected
    }
}

pub fn check_dimension(
    expr: &Expr,
    expected: &DimensionVector,
    registry: &ConstantsRegistry,
) -> Result<DimensionReport, EvalError> {
    Ok(DimensionReport {
        computed: infer_dimension(expr, registry)?,
        expected: *expected,
    })
}

/// Parse a bare unit expression such as `kg*m^2/s^2` into its dimension and
/// SI scale.
pub fn parse_unit(input: &str) -> Result<Quantity, ParseError> {
    let tokens = lex(input)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        max_depth: DEFAULT_MAX_DEPTH,
        recursion: 0,
        _input: input,
    };
    let factors = p.unit_expr()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error("`*`, `/` or end of unit"));
    }
    UnitAnnotation { factors }.to_quantity().map_err(|e| ParseError {
        offset: 0,
        expected: "a representable unit".into(),
        found: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{C, G, HBAR};
    use proptest::prelude::*;

    fn reg() -> &'static ConstantsRegistry {
        ConstantsRegistry::codata2018()
    }

    fn c(name: &str) -> Expr {
        Expr::constant(name)
    }

    #[test]
    fn vacuum_density_tree_shape() {
        let e = parse("c^7/(2*G^2*hbar)").unwrap();
        let expected = Expr::binary(
            BinOp::Div,
            Expr::binary(BinOp::Pow, c("c"), Expr::number("7")),
            Expr::binary(
                BinOp::Mul,
                Expr::binary(
                    BinOp::Mul,
                    Expr::number("2"),
                    Expr::binary(BinOp::Pow, c("G"), Expr::number("2")),
                ),
                c("hbar"),
            ),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn truncated_input_reports_offset() {
        let err = parse("1 + ").unwrap_err();
        assert_eq!(err.offset, 4);
        assert_eq!(err.expected, "a factor");
        assert_eq!(err.found, "end of input");
    }

    #[test]
    fn sqrt_is_a_function_node() {
        let e = parse("sqrt(hbar*G/c^3)").unwrap();
        match e.kind {
            ExprKind::Func { func: Func::Sqrt, .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn power_binds_tighter_than_minus_and_is_right_associative() {
        assert_eq!(parse("-2^2").unwrap(), Expr::neg(Expr::binary(BinOp::Pow, Expr::number("2"), Expr::number("2"))));
        assert_eq!(
            parse("2^3^2").unwrap(),
            Expr::binary(
                BinOp::Pow,
                Expr::number("2"),
                Expr::binary(BinOp::Pow, Expr::number("3"), Expr::number("2"))
            )
        );
        let v = evaluate(&parse("2^3^2").unwrap(), reg()).unwrap();
        assert_eq!(v.value(), 512.0);
        assert_eq!(evaluate(&parse("2^-1").unwrap(), reg()).unwrap().value(), 0.5);
    }

    #[test]
    fn exponent_must_be_rational_constant() {
        let err = parse("c^G").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(err.expected.contains("rational exponent"));
        assert!(parse("c^sqrt(2)").is_err());
        assert!(parse("c^(1/2)").is_ok());
        assert!(parse("c^0.5").is_ok());
        assert!(parse("c^(1/0)").is_err());
    }

    #[test]
    fn no_implicit_multiplication() {
        let err = parse("2 c").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn unknown_function_is_a_parse_error() {
        let err = parse("sin(1)").unwrap_err();
        assert_eq!(err.offset, 0);
    }

    #[test]
    fn depth_limit() {
        let deep = format!("{}1{}", "(".repeat(80), ")".repeat(80));
        assert!(parse(&deep).is_err());
        assert!(parse_with_depth(&deep, 200).is_ok());
        let chain = vec!["1"; 100].join("+");
        assert!(parse(&chain).is_err());
        assert!(parse(&vec!["1"; 30].join("+")).is_ok());
    }

    #[test]
    fn vacuum_energy_density_value() {
        // long-hand CODATA 2018 evaluation: 2.316473393947558e113 J/m^3
        let q = evaluate(&parse("c^7/(2*G^2*hbar)").unwrap(), reg()).unwrap();
        assert!((q.value() / 2.316473393947558e113 - 1.0).abs() < 1e-12);
        assert_eq!(*q.dim(), DimensionVector::energy_density());
        assert!((q.value() / 2.36e113 - 1.0).abs() < 0.02);
    }

    #[test]
    fn mismatched_sum_is_a_dimension_error() {
        let err = evaluate(&parse("c + G").unwrap(), reg()).unwrap_err();
        match err {
            EvalError::Dimension { span, .. } => assert_eq!(span, Span { start: 0, end: 5 }),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn planck_length_expression() {
        let q = evaluate(&parse("sqrt(hbar*G/c^3)").unwrap(), reg()).unwrap();
        assert_eq!(*q.dim(), DimensionVector::length());
        assert!((q.value() / 1.616255024423705e-35 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn evaluation_errors() {
        assert!(matches!(
            evaluate(&parse("foo * 2").unwrap(), reg()),
            Err(EvalError::UnknownIdentifier { ref name, .. }) if name == "foo"
        ));
        assert!(matches!(evaluate(&parse("sqrt(-1)").unwrap(), reg()), Err(EvalError::Domain { .. })));
        assert!(matches!(evaluate(&parse("ln(0)").unwrap(), reg()), Err(EvalError::Domain { .. })));
        assert!(matches!(evaluate(&parse("exp(c)").unwrap(), reg()), Err(EvalError::Dimension { .. })));
        assert!((evaluate(&parse("ln(exp(2))").unwrap(), reg()).unwrap().value() - 2.0).abs() < 1e-15);
        assert_eq!(evaluate(&parse("abs(-3 [m])").unwrap(), reg()).unwrap().value(), 3.0);
    }

    #[test]
    fn unit_annotations() {
        let q = evaluate(&parse("5.972e24 [kg]").unwrap(), reg()).unwrap();
        assert_eq!(*q.dim(), DimensionVector::mass());
        let v0 = evaluate(&parse("10 [eV]").unwrap(), reg()).unwrap();
        assert!((v0.value() - 10.0 * EV).abs() < 1e-30);
        let g = evaluate(&parse("9.81 [m/s^2]").unwrap(), reg()).unwrap();
        assert_eq!(*g.dim(), DimensionVector::mechanical(1, 0, -2));
        let w = evaluate(&parse("1 [kg*m^2/(s^2)]").unwrap(), reg()).unwrap();
        assert_eq!(*w.dim(), DimensionVector::energy());
        assert!(parse("1 [furlong]").is_err());
        assert!(parse("1 [m").is_err());
        let u = parse_unit("kg*m^-1*s^-2").unwrap();
        assert_eq!(*u.dim(), DimensionVector::energy_density());
    }

    #[test]
    fn schwarzschild_ratio_is_dimensionless() {
        let r = reg()
            .with("M", Quantity::new(1.0, DimensionVector::mass()).unwrap())
            .unwrap()
            .with("r", Quantity::new(1.0, DimensionVector::length()).unwrap())
            .unwrap();
        let rep = check_dimension(&parse("2*G*M/(r*c^2)").unwrap(), &DimensionVector::dimensionless(), &r).unwrap();
        assert!(rep.pass());
    }

    #[test]
    fn zero_point_energy_has_energy_dimension() {
        // by hand: m * (m s^-1)^4 / (m^3 kg^-1 s^-2) = kg m^2 s^-2
        let r = reg().with("b", Quantity::new(1.0, DimensionVector::length()).unwrap()).unwrap();
        let rep = check_dimension(&parse("b*c^4/(2*G)").unwrap(), &DimensionVector::energy(), &r).unwrap();
        assert!(rep.pass());
        let bad = check_dimension(&parse("b*c^3/(2*G)").unwrap(), &DimensionVector::energy(), &r).unwrap();
        assert!(!bad.pass());
        assert_eq!(bad.computed, DimensionVector::mechanical(1, 1, -1));
    }

    #[test]
    fn vacuum_density_dimension_by_hand() {
        // (m s^-1)^7 / ((m^3 kg^-1 s^-2)^2 * kg m^2 s^-1) = kg m^-1 s^-2
        let rep = check_dimension(
            &parse("c^7/(2*G^2*hbar)").unwrap(),
            &DimensionVector::energy_density(),
            reg(),
        )
        .unwrap();
        assert!(rep.pass());
    }

    #[test]
    fn literal_ratios_are_exact() {
        assert_eq!(literal_ratio("0.5"), Some(Ratio::new(1, 2)));
        assert_eq!(literal_ratio("6.674e-11"), Some(Ratio::new(6674, 100_000_000_000_000)));
        assert_eq!(literal_ratio("1e3"), Some(Ratio::from_integer(1000)));
        assert_eq!(literal_ratio("1e30"), None);
    }

    // Random small trees over a fixed pool of constants, rendered to text.
    fn arb_tree() -> impl Strategy<Value = String> {
        let leaf = prop::sample::select(vec![
            "c", "G", "hbar", "h", "m_e", "eV", "l_p", "pi", "2", "0.5", "3 [m]", "1.5 [kg]", "4 [s]",
        ])
        .prop_map(str::to_string);
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone(), prop::sample::select(vec!['+', '-', '*', '/']))
                    .prop_map(|(a, b, op)| format!("({a} {op} {b})")),
                (inner.clone(), prop::sample::select(vec!["2", "3", "-1", "(1/2)", "(-3/2)"]))
                    .prop_map(|(a, p)| format!("({a})^{p}")),
                inner.clone().prop_map(|a| format!("-({a})")),
                inner.clone().prop_map(|a| format!("sqrt(abs({a}))")),
                inner.prop_map(|a| format!("abs({a})")),
            ]
        })
    }

    /// Direct composition of Quantity operations, independent of the parser.
    fn direct(text: &str) -> Option<Result<Quantity, UnitsError>> {
        // Evaluates the same small language with a separate hand-written reader.
        struct R<'a> {
            s: &'a [u8],
            i: usize,
        }
        impl R<'_> {
            fn ws(&mut self) {
                while self.i < self.s.len() && self.s[self.i] == b' ' {
                    self.i += 1;
                }
            }
            fn lit(&mut self, t: &str) -> bool {
                let save = self.i;
                self.ws();
                if self.s[self.i..].starts_with(t.as_bytes()) {
                    self.i += t.len();
                    true
                } else {
                    self.i = save;
                    false
                }
            }
            fn atom(&mut self) -> Result<Quantity, UnitsError> {
                let reg = ConstantsRegistry::codata2018();
                for (t, q) in [
                    ("3 [m]", Quantity::new(3.0, DimensionVector::length())),
                    ("1.5 [kg]", Quantity::new(1.5, DimensionVector::mass())),
                    ("4 [s]", Quantity::new(4.0, DimensionVector::time())),
                    ("0.5", Quantity::dimensionless(0.5)),
                    ("2", Quantity::dimensionless(2.0)),
                ] {
                    if self.lit(t) {
                        return q;
                    }
                }
                for name in ["hbar", "h", "G", "c", "m_e", "eV", "l_p", "pi"] {
                    if self.lit(name) {
                        return Ok(*reg.get(name).unwrap());
                    }
                }
                if self.lit("sqrt(abs(") {
                    let a = self.node()?;
                    assert!(self.lit("))"));
                    return Quantity::new(a.value().abs(), *a.dim())?.checked_pow(Ratio::new(1, 2));
                }
                if self.lit("abs(") {
                    let a = self.node()?;
                    assert!(self.lit(")"));
                    return Quantity::new(a.value().abs(), *a.dim());
                }
                if self.lit("-(") {
                    let a = self.node()?;
                    assert!(self.lit(")"));
                    return Ok(a.neg());
                }
                assert!(self.lit("("));
                let a = self.node()?;
                if self.lit(")^") {
                    for (t, p) in [("(1/2)", Ratio::new(1, 2)), ("(-3/2)", Ratio::new(-3, 2)),
                                   ("-1", Ratio::from_integer(-1)), ("2", Ratio::from_integer(2)),
                                   ("3", Ratio::from_integer(3))] {
                        if self.lit(t) {
                            return a.checked_pow(p);
                        }
                    }
                    unreachable!();
                }
                for (op, f) in [
                    (" + ", Quantity::checked_add as fn(&Quantity, &Quantity) -> Result<Quantity, UnitsError>),
                    (" - ", Quantity::checked_sub),
                    (" * ", Quantity::checked_mul),
                    (" / ", Quantity::checked_div),
                ] {
                    if self.s[self.i..].starts_with(op.as_bytes()) {
                        self.i += op.len();
                        let b = self.node()?;
                        assert!(self.lit(")"));
                        return f(&a, &b);
                    }
                }
                assert!(self.lit(")"));
                Ok(a)
            }
            fn node(&mut self) -> Result<Quantity, UnitsError> {
                self.atom()
            }
        }
        let mut r = R { s: text.as_bytes(), i: 0 };
        let out = r.node();
        Some(out)
    }

    proptest! {
        #[test]
        fn parse_is_total(s in "[ -~]{0,40}") {
            let _ = parse(&s);
        }

        #[test]
        fn parse_is_total_on_grammar_soup(
            parts in prop::collection::vec(prop::sample::select(vec![
                "c", "G", "(", ")", "^", "-", "+", "*", "/", "2", "0.5", "[", "]", "m", "kg",
                "sqrt", "ln", "1e400", "99999999999999999999", " ",
            ]), 0..40)
        ) {
            let _ = parse(&parts.concat());
        }

        #[test]
        fn print_parse_fixpoint(s in arb_tree()) {
            let e = parse(&s).unwrap();
            let printed = e.to_string();
            let again = parse(&printed).unwrap();
            prop_assert_eq!(&e, &again);
        }

        #[test]
        fn evaluate_matches_direct_composition(s in arb_tree()) {
            let e = parse(&s).unwrap();
            let ours = evaluate(&e, reg());
            let theirs = direct(&s).unwrap();
            match (ours, theirs) {
                (Ok(a), Ok(b)) => {
                    prop_assert_eq!(a.dim(), b.dim());
                    let scale = a.value().abs().max(b.value().abs()).max(f64::MIN_POSITIVE);
                    prop_assert!((a.value() - b.value()).abs() <= 1e-12 * scale);
                    prop_assert_eq!(infer_dimension(&e, reg()).unwrap(), *a.dim());
                }
                (Err(_), Err(_)) => {}
                (a, b) => prop_assert!(false, "disagree on {}: {:?} vs {:?}", s, a, b),
            }
        }
    }

    #[test]
    fn constants_match_module_values() {
        let q = evaluate(&parse("hbar*G/c").unwrap(), reg()).unwrap();
        assert!((q.value() / (HBAR * G / C) - 1.0).abs() < 1e-15);
    }
}
