//! Restricted arithmetic evaluator used as the numeric tool: the planner
//! gets exact arithmetic without any code execution. Supported: `+ - * / ^`
//! (also `×` and `÷`), parentheses, unary minus, `pi`, and the functions
//! sqrt, sin, cos, tan, atan2, abs, radians, degrees.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::mathf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sqrt,
    Sin,
    Cos,
    Tan,
    Atan2,
    Abs,
    Radians,
    Degrees,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "sqrt" => (Func::Sqrt, 1),
            "sin" => (Func::Sin, 1),
            "cos" => (Func::Cos, 1),
            "tan" => (Func::Tan, 1),
            "atan2" => (Func::Atan2, 2),
            "abs" => (Func::Abs, 1),
            "radians" => (Func::Radians, 1),
            "degrees" => (Func::Degrees, 1),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan2 => "atan2",
            Func::Abs => "abs",
            Func::Radians => "radians",
            Func::Degrees => "degrees",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExprError {
    /// Syntax error with a byte offset into the input.
    Parse { pos: usize, message: String },
    /// Arithmetic left the evaluator's domain (division by zero, sqrt of a
    /// negative, or a non-finite result).
    Domain { message: String },
}

impl core::fmt::Display for ExprError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExprError::Parse { pos, message } => write!(f, "parse error at byte {pos}: {message}"),
            ExprError::Domain { message } => write!(f, "math domain error: {message}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(usize, usize), // byte range into the source
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(usize, Tok)>,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut toks = Vec::new();
    let bytes = src.as_bytes();
    let mut iter = src.char_indices().peekable();
    while let Some((pos, ch)) = iter.next() {
        let tok = match ch {
            c if c.is_whitespace() => continue,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' | '×' => Tok::Star,
            '/' | '÷' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            c if c.is_ascii_digit() || c == '.' => {
                let mut end = pos + 1;
                let mut seen_exp = false;
                while end < bytes.len() {
                    let b = bytes[end];
                    let ok = b.is_ascii_digit()
                        || b == b'.'
                        || (!seen_exp && (b == b'e' || b == b'E'))
                        || (end > pos
                            && (bytes[end - 1] == b'e' || bytes[end - 1] == b'E')
                            && (b == b'+' || b == b'-'));
                    if !ok {
                        break;
                    }
                    if b == b'e' || b == b'E' {
                        seen_exp = true;
                    }
                    end += 1;
                }
                let text = &src[pos..end];
                let value: f64 = text.parse().map_err(|_| ExprError::Parse {
                    pos,
                    message: format!("invalid number literal '{text}'"),
                })?;
                if !value.is_finite() {
                    return Err(ExprError::Parse {
                        pos,
                        message: format!("number literal '{text}' is out of range"),
                    });
                }
                while iter.peek().is_some_and(|(p, _)| *p < end) {
                    iter.next();
                }
                toks.push((pos, Tok::Num(value)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = pos + 1;
                while end < bytes.len()
                    && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_')
                {
                    end += 1;
                }
                while iter.peek().is_some_and(|(p, _)| *p < end) {
                    iter.next();
                }
                toks.push((pos, Tok::Ident(pos, end)));
                continue;
            }
            other => {
                return Err(ExprError::Parse {
                    pos,
                    message: format!("unexpected character '{other}'"),
                })
            }
        };
        toks.push((pos, tok));
    }
    Ok(toks)
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.lexer.toks.get(self.at)
    }

    fn next(&mut self) -> Option<(usize, Tok)> {
        let t = self.lexer.toks.get(self.at).copied();
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn end_pos(&self) -> usize {
        self.lexer.src.len()
    }

    fn err(&self, pos: usize, message: impl Into<String>) -> ExprError {
        ExprError::Parse { pos, message: message.into() }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ExprError> {
        match self.next() {
            Some((_, t)) if t == want => Ok(()),
            Some((p, _)) => Err(self.err(p, format!("expected {what}"))),
            None => Err(self.err(self.end_pos(), format!("expected {what}, found end of input"))),
        }
    }

    fn parse_expr(&mut self) -> Result<Expr, ExprError> {
        let mut node = self.parse_term()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.next();
            let rhs = self.parse_term()?;
            node = Expr::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_term(&mut self) -> Result<Expr, ExprError> {
        let mut node = self.parse_unary()?;
        while let Some((_, tok)) = self.peek() {
            let op = match tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.next();
            let rhs = self.parse_unary()?;
            node = Expr::Bin(op, Box::new(node), Box::new(rhs));
        }
        Ok(node)
    }

    fn parse_unary(&mut self) -> Result<Expr, ExprError> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.next();
            let inner = self.parse_unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> Result<Expr, ExprError> {
        let base = self.parse_atom()?;
        if let Some((_, Tok::Caret)) = self.peek() {
            self.next();
            // Right-associative, and the exponent may carry a unary minus.
            let exp = self.parse_unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn parse_atom(&mut self) -> Result<Expr, ExprError> {
        match self.next() {
            Some((_, Tok::Num(v))) => Ok(Expr::Num(v)),
            Some((_, Tok::LParen)) => {
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some((pos, Tok::Ident(s, e))) => {
                let name = &self.lexer.src[s..e];
                if let Some((_, Tok::LParen)) = self.peek() {
                    let (func, arity) = Func::lookup(name)
                        .ok_or_else(|| self.err(pos, format!("unknown function '{name}'")))?;
                    self.next();
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some((_, Tok::RParen))) {
                        loop {
                            args.push(self.parse_expr()?);
                            match self.peek() {
                                Some((_, Tok::Comma)) => {
                                    self.next();
                                }
                                _ => break,
                            }
                        }
                    }
                    self.expect(Tok::RParen, "')'")?;
                    if args.len() != arity {
                        return Err(self.err(
                            pos,
                            format!("{name} takes {arity} argument(s), got {}", args.len()),
                        ));
                    }
                    Ok(Expr::Call(func, args))
                } else if name.eq_ignore_ascii_case("pi") {
                    Ok(Expr::Pi)
                } else {
                    Err(self.err(pos, format!("unknown identifier '{name}'")))
                }
            }
            Some((pos, _)) => Err(self.err(pos, "expected a value")),
            None => Err(self.err(self.end_pos(), "unexpected end of input")),
        }
    }
}

/// Parses an expression into its AST.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { lexer: Lexer { src, toks }, at: 0 };
    let node = p.parse_expr()?;
    if let Some((pos, _)) = p.peek() {
        return Err(ExprError::Parse { pos: *pos, message: "trailing input".to_string() });
    }
    Ok(node)
}

fn domain(message: impl Into<String>) -> ExprError {
    ExprError::Domain { message: message.into() }
}

fn check_finite(v: f64, what: &str) -> Result<f64, ExprError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(domain(format!("{what} produced a non-finite value")))
    }
}

/// Evaluates an AST. All domain violations (division by zero, sqrt of a
/// negative, overflow to infinity) surface as `ExprError::Domain`.
pub fn eval(expr: &Expr) -> Result<f64, ExprError> {
    match expr {
        Expr::Num(v) => Ok(*v),
        Expr::Pi => Ok(mathf::PI),
        Expr::Neg(inner) => Ok(-eval(inner)?),
        Expr::Bin(op, lhs, rhs) => {
            let a = eval(lhs)?;
            let b = eval(rhs)?;
            match op {
                BinOp::Add => check_finite(a + b, "addition"),
                BinOp::Sub => check_finite(a - b, "subtraction"),
                BinOp::Mul => check_finite(a * b, "multiplication"),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(domain("division by zero"))
                    } else {
                        check_finite(a / b, "division")
                    }
                }
                BinOp::Pow => {
                    let v = mathf::powf(a, b);
                    if v.is_nan() && !a.is_nan() && !b.is_nan() {
                        Err(domain("power of a negative base with fractional exponent"))
                    } else {
                        check_finite(v, "power")
                    }
                }
            }
        }
        Expr::Call(func, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval(a)?);
            }
            match func {
                Func::Sqrt => {
                    if vals[0] < 0.0 {
                        Err(domain("sqrt of a negative number"))
                    } else {
                        Ok(mathf::sqrt(vals[0]))
                    }
                }
                Func::Sin => Ok(mathf::sin(vals[0])),
                Func::Cos => Ok(mathf::cos(vals[0])),
                Func::Tan => check_finite(mathf::tan(vals[0]), "tan"),
                Func::Atan2 => Ok(mathf::atan2(vals[0], vals[1])),
                Func::Abs => Ok(mathf::abs(vals[0])),
                Func::Radians => Ok(vals[0] * mathf::PI / 180.0),
                Func::Degrees => Ok(vals[0] * 180.0 / mathf::PI),
            }
        }
    }
}

/// Parses and evaluates in one step.
pub fn eval_expression(src: &str) -> Result<f64, ExprError> {
    eval(&parse(src)?)
}

/// Canonical fully parenthesized rendering. `parse(pretty(e))` returns `e`
/// exactly (bit-identical numbers included).
pub fn pretty(expr: &Expr) -> String {
    match expr {
        Expr::Num(v) => format!("{v}"),
        Expr::Pi => "pi".to_string(),
        Expr::Neg(inner) => format!("(-{})", pretty(inner)),
        Expr::Bin(op, lhs, rhs) => {
            format!("({} {} {})", pretty(lhs), op.symbol(), pretty(rhs))
        }
        Expr::Call(func, args) => {
            let mut s = String::new();
            s.push_str(func.name());
            s.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                s.push_str(&pretty(a));
            }
            s.push(')');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str) -> f64 {
        eval_expression(src).unwrap()
    }

    #[test]
    fn basic_arithmetic() {
        assert_eq!(ev("(3 + 4) * 2"), 14.0);
        assert_eq!(ev("sqrt(16) + 2^3"), 12.0);
        assert_eq!(ev("10 - 4 - 3"), 3.0); // left associative
        assert_eq!(ev("2 + 3 * 4^2"), 50.0);
        assert_eq!(ev("2^3^2"), 512.0); // right associative
    }

    #[test]
    fn atan2_quarter_pi() {
        // atan2(1, 1) is the 45 degree angle.
        assert_eq!(ev("atan2(1, 1)"), core::f64::consts::FRAC_PI_4);
    }

    #[test]
    fn unicode_operators() {
        assert_eq!(ev("6 × 7"), 42.0);
        assert_eq!(ev("10 ÷ 4"), 2.5);
    }

    #[test]
    fn unary_minus_binds_below_power() {
        assert_eq!(ev("-2^2"), -4.0);
        assert_eq!(ev("(-2)^2"), 4.0);
        assert_eq!(ev("2^-1"), 0.5);
        assert_eq!(ev("--3"), 3.0);
    }

    #[test]
    fn angle_helpers_and_pi() {
        assert_eq!(ev("radians(180)"), mathf::PI);
        assert!((ev("degrees(pi)") - 180.0).abs() < 1e-12);
        assert_eq!(ev("cos(0)"), 1.0);
        assert_eq!(ev("abs(-3.5)"), 3.5);
    }

    #[test]
    fn domain_errors() {
        for src in ["1 / 0", "sqrt(-1)", "10 ^ 400", "(-8) ^ 0.5"] {
            match eval_expression(src) {
                Err(ExprError::Domain { .. }) => {}
                other => panic!("{src}: expected domain error, got {other:?}"),
            }
        }
    }

    #[test]
    fn parse_errors_carry_positions() {
        match eval_expression("2 + * 3") {
            Err(ExprError::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(eval_expression("2 +"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("foo(1)"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("bar"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("sqrt(1, 2)"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("atan2(1)"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("1e999"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("2 @ 3"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression(""), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("(1"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expression("1 2"), Err(ExprError::Parse { .. })));
    }

    #[test]
    fn pretty_round_trips_structurally() {
        for src in [
            "(3 + 4) * 2",
            "sqrt(16) + 2^3",
            "-2^-3",
            "atan2(1, 0.5) / pi",
            "degrees(radians(45.5))",
            "1.5e3 * 2",
        ] {
            let ast = parse(src).unwrap();
            let printed = pretty(&ast);
            let reparsed = parse(&printed).unwrap();
            assert_eq!(reparsed, ast, "{src} -> {printed}");
            assert_eq!(eval(&reparsed).unwrap(), eval(&ast).unwrap());
        }
    }

    #[test]
    fn scientific_notation_literals() {
        assert_eq!(ev("1.5e3"), 1500.0);
        assert_eq!(ev("2E-2"), 0.02);
        assert_eq!(ev("1e+2"), 100.0);
    }
}
