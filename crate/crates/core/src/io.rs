//! Text formats: the LP problem grammar, its emitter, the built-in
//! two-variable/eleven-constraint demo problem, and line-oriented trace
//! serialization.
//!
//! LP grammar (one statement per line, `#` starts a comment, blank lines
//! are skipped):
//!
//! ```text
//! problem    := objective constraint+ bound*
//! objective  := ("min" | "max") linexpr
//! constraint := "st" linexpr ("<=" | ">=" | "=") number
//! bound      := "free" ident            # default: every variable is ≥ 0
//! linexpr    := term (("+" | "-") term)*
//! term       := [number] ident | number
//! ```
//!
//! Variables are registered in first-appearance order; coefficients missing
//! from a line are zero; numbers are locale-independent decimals with an
//! optional exponent. Constant terms fold into the right-hand side of a
//! constraint and into the objective offset.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::barrier::{IterateTrace, TraceRecord};
use crate::model::{Constraint, LpProblem, Relation, Sense, Vector};

/// Trace schema version written and accepted by this crate.
pub const TRACE_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum IoError {
    #[error("parse error at line {line}, column {col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("trace error at line {line}: {message}")]
    Trace { line: usize, message: String },
    #[error("unsupported trace version {version} at line {line} (expected {TRACE_VERSION})")]
    TraceVersion { line: usize, version: u32 },
}

fn perr(line: usize, col: usize, message: impl Into<String>) -> IoError {
    IoError::Parse {
        line,
        col,
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Number(f64),
    Plus,
    Minus,
    Le,
    Ge,
    Eq,
}

struct Lexed {
    token: Token,
    col: usize,
}

fn lex_line(line: &str, line_no: usize) -> Result<Vec<Lexed>, IoError> {
    let mut out = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        match c {
            '#' => break,
            c if c.is_whitespace() => {
                i += 1;
            }
            '+' => {
                out.push(Lexed {
                    token: Token::Plus,
                    col,
                });
                i += 1;
            }
            '-' => {
                out.push(Lexed {
                    token: Token::Minus,
                    col,
                });
                i += 1;
            }
            '<' | '>' => {
                if i + 1 >= chars.len() || chars[i + 1] != '=' {
                    return Err(perr(line_no, col, format!("expected `{c}=`")));
                }
                out.push(Lexed {
                    token: if c == '<' { Token::Le } else { Token::Ge },
                    col,
                });
                i += 2;
            }
            '=' => {
                out.push(Lexed {
                    token: Token::Eq,
                    col,
                });
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        i = j;
                        while i < chars.len() && chars[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let value: f64 = text
                    .parse()
                    .map_err(|_| perr(line_no, col, format!("invalid number `{text}`")))?;
                if !value.is_finite() {
                    return Err(perr(line_no, col, format!("non-finite number `{text}`")));
                }
                out.push(Lexed {
                    token: Token::Number(value),
                    col,
                });
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
                {
                    i += 1;
                }
                out.push(Lexed {
                    token: Token::Ident(chars[start..i].iter().collect()),
                    col,
                });
            }
            other => {
                return Err(perr(line_no, col, format!("unknown token `{other}`")));
            }
        }
    }
    Ok(out)
}

#[derive(Default)]
struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    fn intern(&mut self, name: &str) -> usize {
        if let Some(idx) = self.names.iter().position(|n| n == name) {
            idx
        } else {
            self.names.push(name.to_string());
            self.names.len() - 1
        }
    }
}

/// A linear expression accumulated as sparse (variable, coefficient) terms
/// plus a constant.
struct LinExpr {
    terms: Vec<(usize, f64)>,
    constant: f64,
}

/// Parses `term (("+"|"-") term)*` starting at `pos`; stops at the first
/// token that cannot continue the expression (e.g. a relation).
fn parse_linexpr(
    tokens: &[Lexed],
    mut pos: usize,
    vars: &mut VarTable,
    line: usize,
) -> Result<(LinExpr, usize), IoError> {
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut first = true;
    loop {
        let mut sign = 1.0;
        let mut consumed_sign = false;
        match tokens.get(pos).map(|t| &t.token) {
            Some(Token::Plus) => {
                pos += 1;
                consumed_sign = true;
            }
            Some(Token::Minus) => {
                sign = -1.0;
                pos += 1;
                consumed_sign = true;
            }
            _ => {}
        }
        if !first && !consumed_sign {
            // No connective: expression ends before `pos`.
            return Ok((LinExpr { terms, constant }, pos));
        }
        match tokens.get(pos).map(|t| &t.token) {
            Some(Token::Number(v)) => {
                let v = *v;
                pos += 1;
                if let Some(Token::Ident(name)) = tokens.get(pos).map(|t| &t.token) {
                    let idx = vars.intern(name);
                    terms.push((idx, sign * v));
                    pos += 1;
                } else {
                    constant += sign * v;
                }
            }
            Some(Token::Ident(name)) => {
                let idx = vars.intern(name);
                terms.push((idx, sign));
                pos += 1;
            }
            other => {
                if consumed_sign || first {
                    let col = tokens
                        .get(pos)
                        .map_or_else(|| tokens.last().map_or(1, |t| t.col + 1), |t| t.col);
                    return Err(perr(
                        line,
                        col,
                        format!("expected a term, found {}", describe(other)),
                    ));
                }
                return Ok((LinExpr { terms, constant }, pos));
            }
        }
        first = false;
    }
}

fn describe(t: Option<&Token>) -> String {
    match t {
        None => "end of line".to_string(),
        Some(Token::Ident(s)) => format!("identifier `{s}`"),
        Some(Token::Number(v)) => format!("number `{v}`"),
        Some(Token::Plus) => "`+`".to_string(),
        Some(Token::Minus) => "`-`".to_string(),
        Some(Token::Le) => "`<=`".to_string(),
        Some(Token::Ge) => "`>=`".to_string(),
        Some(Token::Eq) => "`=`".to_string(),
    }
}

fn parse_signed_number(
    tokens: &[Lexed],
    mut pos: usize,
    line: usize,
) -> Result<(f64, usize), IoError> {
    let mut sign = 1.0;
    match tokens.get(pos).map(|t| &t.token) {
        Some(Token::Minus) => {
            sign = -1.0;
            pos += 1;
        }
        Some(Token::Plus) => {
            pos += 1;
        }
        _ => {}
    }
    match tokens.get(pos).map(|t| &t.token) {
        Some(Token::Number(v)) => Ok((sign * v, pos + 1)),
        other => {
            let col = tokens
                .get(pos)
                .map_or_else(|| tokens.last().map_or(1, |t| t.col + 1), |t| t.col);
            Err(perr(
                line,
                col,
                format!("expected a number, found {}", describe(other)),
            ))
        }
    }
}

struct RawConstraint {
    terms: Vec<(usize, f64)>,
    relation: Relation,
    rhs: f64,
}

/// Parses the LP grammar into an [`LpProblem`].
pub fn parse_lp(text: &str) -> Result<LpProblem, IoError> {
    let mut vars = VarTable::default();
    let mut sense: Option<Sense> = None;
    let mut objective_terms: Vec<(usize, f64)> = Vec::new();
    let mut objective_offset = 0.0;
    let mut raw_constraints: Vec<RawConstraint> = Vec::new();
    let mut free_vars: Vec<usize> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let tokens = lex_line(raw_line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        let head = &tokens[0];
        let keyword = match &head.token {
            Token::Ident(s) => s.as_str(),
            other => {
                return Err(perr(
                    line_no,
                    head.col,
                    format!(
                        "expected `min`, `max`, `st` or `free`, found {}",
                        describe(Some(other))
                    ),
                ))
            }
        };
        match keyword {
            "min" | "max" => {
                if sense.is_some() {
                    return Err(perr(line_no, head.col, "duplicate objective"));
                }
                let (expr, pos) = parse_linexpr(&tokens, 1, &mut vars, line_no)?;
                if pos != tokens.len() {
                    return Err(perr(
                        line_no,
                        tokens[pos].col,
                        format!("unexpected {}", describe(Some(&tokens[pos].token))),
                    ));
                }
                sense = Some(if keyword == "min" {
                    Sense::Minimize
                } else {
                    Sense::Maximize
                });
                objective_terms = expr.terms;
                objective_offset = expr.constant;
            }
            "st" => {
                if sense.is_none() {
                    return Err(perr(line_no, head.col, "constraint before objective"));
                }
                let (expr, pos) = parse_linexpr(&tokens, 1, &mut vars, line_no)?;
                let relation = match tokens.get(pos).map(|t| &t.token) {
                    Some(Token::Le) => Relation::Le,
                    Some(Token::Ge) => Relation::Ge,
                    Some(Token::Eq) => Relation::Eq,
                    other => {
                        let col = tokens
                            .get(pos)
                            .map_or_else(|| tokens.last().map_or(1, |t| t.col + 1), |t| t.col);
                        return Err(perr(
                            line_no,
                            col,
                            format!("expected `<=`, `>=` or `=`, found {}", describe(other)),
                        ));
                    }
                };
                let (rhs, pos) = parse_signed_number(&tokens, pos + 1, line_no)?;
                if pos != tokens.len() {
                    return Err(perr(
                        line_no,
                        tokens[pos].col,
                        format!("unexpected {}", describe(Some(&tokens[pos].token))),
                    ));
                }
                raw_constraints.push(RawConstraint {
                    terms: expr.terms,
                    relation,
                    // Constants on the left fold into the right-hand side.
                    rhs: rhs - expr.constant,
                });
            }
            "free" => {
                if sense.is_none() {
                    return Err(perr(line_no, head.col, "bound before objective"));
                }
                let Some(Token::Ident(name)) = tokens.get(1).map(|t| &t.token) else {
                    let col = tokens.get(1).map_or(head.col + 5, |t| t.col);
                    return Err(perr(line_no, col, "expected a variable name"));
                };
                if tokens.len() != 2 {
                    return Err(perr(
                        line_no,
                        tokens[2].col,
                        format!("unexpected {}", describe(Some(&tokens[2].token))),
                    ));
                }
                free_vars.push(vars.intern(name));
            }
            other => {
                return Err(perr(
                    line_no,
                    head.col,
                    format!("expected `min`, `max`, `st` or `free`, found identifier `{other}`"),
                ));
            }
        }
    }

    let Some(sense) = sense else {
        return Err(perr(1, 1, "empty problem: no objective"));
    };
    if raw_constraints.is_empty() {
        return Err(perr(1, 1, "empty problem: no constraints"));
    }
    let n = vars.names.len();
    if n == 0 {
        return Err(perr(1, 1, "empty problem: no variables"));
    }

    let assemble = |terms: &[(usize, f64)]| {
        let mut coeffs = vec![0.0; n];
        for &(idx, v) in terms {
            coeffs[idx] += v;
        }
        Vector::new(coeffs).expect("finite coefficients")
    };

    let mut nonneg = vec![true; n];
    for idx in free_vars {
        nonneg[idx] = false;
    }

    Ok(LpProblem {
        names: vars.names,
        sense,
        objective: assemble(&objective_terms),
        objective_offset,
        constraints: raw_constraints
            .iter()
            .map(|rc| Constraint {
                coeffs: assemble(&rc.terms),
                relation: rc.relation,
                rhs: rc.rhs,
            })
            .collect(),
        nonneg,
    })
}

fn push_term(out: &mut String, first: bool, coeff: f64, name: Option<&str>) {
    use std::fmt::Write;
    if first {
        if coeff < 0.0 {
            out.push_str("- ");
        }
    } else if coeff < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let _ = write!(out, "{}", coeff.abs());
    if let Some(name) = name {
        out.push(' ');
        out.push_str(name);
    }
}

/// Emits text that [`parse_lp`] maps back to an equal problem. The
/// objective line lists every variable (zero coefficients included) so that
/// first-appearance order reproduces the variable order.
pub fn emit_lp(p: &LpProblem) -> String {
    let mut out = String::new();
    out.push_str(match p.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    });
    out.push(' ');
    for (i, name) in p.names.iter().enumerate() {
        push_term(&mut out, i == 0, p.objective[i], Some(name));
    }
    if p.objective_offset != 0.0 {
        push_term(&mut out, false, p.objective_offset, None);
    }
    out.push('\n');
    for c in &p.constraints {
        out.push_str("st ");
        let mut wrote = false;
        for (i, name) in p.names.iter().enumerate() {
            if c.coeffs[i] != 0.0 {
                push_term(&mut out, !wrote, c.coeffs[i], Some(name));
                wrote = true;
            }
        }
        if !wrote {
            // All-zero row: keep a syntactically valid zero term.
            push_term(&mut out, true, 0.0, Some(&p.names[0]));
        }
        use std::fmt::Write;
        let _ = write!(out, " {} {}", c.relation, c.rhs);
        out.push('\n');
    }
    for (i, &nn) in p.nonneg.iter().enumerate() {
        if !nn {
            out.push_str("free ");
            out.push_str(&p.names[i]);
            out.push('\n');
        }
    }
    out
}

/// The built-in demo problem: maximize `x1 + x2` subject to the eleven
/// constraints `2p·x1 + x2 ≤ p² + 1` for `p = 0.0, 0.1, …, 1.0`, `x ≥ 0`.
pub fn build_toy_problem() -> LpProblem {
    let mut constraints = Vec::with_capacity(11);
    for k in 0..=10u32 {
        let p = f64::from(k) / 10.0;
        constraints.push(Constraint {
            coeffs: Vector::from_slice(&[2.0 * p, 1.0]),
            relation: Relation::Le,
            rhs: p * p + 1.0,
        });
    }
    LpProblem {
        names: vec!["x1".to_string(), "x2".to_string()],
        sense: Sense::Maximize,
        objective: Vector::from_slice(&[1.0, 1.0]),
        objective_offset: 0.0,
        constraints,
        nonneg: vec![true, true],
    }
}

#[derive(Serialize, Deserialize)]
struct TraceLine {
    v: u32,
    iter: usize,
    newton: usize,
    x: Vec<f64>,
    obj: f64,
    mu: f64,
    lambda2: f64,
    step: f64,
    gabp_rounds: usize,
    gabp_converged: bool,
}

/// Serializes a trace as one JSON record per line. Floating-point values
/// use the shortest round-trip representation, so `read_trace ∘ write_trace`
/// is the identity bit for bit.
pub fn write_trace(trace: &IterateTrace) -> String {
    let mut out = String::new();
    for r in &trace.records {
        let line = TraceLine {
            v: TRACE_VERSION,
            iter: r.iter,
            newton: r.newton,
            x: r.x.as_slice().to_vec(),
            obj: r.obj,
            mu: r.mu,
            lambda2: r.lambda2,
            step: r.step,
            gabp_rounds: r.gabp_rounds,
            gabp_converged: r.gabp_converged,
        };
        out.push_str(&serde_json::to_string(&line).expect("trace records serialize"));
        out.push('\n');
    }
    out
}

pub fn read_trace(text: &str) -> Result<IterateTrace, IoError> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TraceLine = serde_json::from_str(line).map_err(|e| IoError::Trace {
            line: line_no,
            message: e.to_string(),
        })?;
        if parsed.v != TRACE_VERSION {
            return Err(IoError::TraceVersion {
                line: line_no,
                version: parsed.v,
            });
        }
        records.push(TraceRecord {
            iter: parsed.iter,
            newton: parsed.newton,
            x: Vector::new(parsed.x).map_err(|e| IoError::Trace {
                line: line_no,
                message: e.to_string(),
            })?,
            obj: parsed.obj,
            mu: parsed.mu,
            lambda2: parsed.lambda2,
            step: parsed.step,
            gabp_rounds: parsed.gabp_rounds,
            gabp_converged: parsed.gabp_converged,
        });
    }
    Ok(IterateTrace { records })
}
