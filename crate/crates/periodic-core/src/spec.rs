//! Closed-form descriptions of periodic coefficient fields.
//!
//! A spec is a JSON object `{kind, shape, parameters}`:
//!
//! * `constant`: `{"value": M}`
//! * `fourier`: `{"modes": [{"k": [k1, ...], "coef": M}, ...]}`, the field
//!   `Σ coef_k e^{2πi k·y}`
//! * `piecewise`: `{"axis": a, "breaks": [b0, b1, ...], "values": [M0, M1, ...]}`,
//!   constant `M_i` on `b_i ⩽ y_a < b_{i+1}` (the last piece wraps to `b_0 + 1`)
//! * `expr`: `{"expr": "2 + sin(2*pi*x1)"}` (scalar times identity) or
//!   `{"entries": [["..", ".."], ...]}`
//!
//! A matrix `M` is a scalar (times the identity) or an array of rows; a
//! complex scalar is a number or `{"re": .., "im": ..}`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::f64::consts::PI;

use crate::{CMat, CoreError, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    Constant,
    Fourier,
    Piecewise,
    Expr,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub shape: [usize; 2],
    pub parameters: Value,
}

fn spec_err(msg: impl Into<String>) -> CoreError {
    CoreError::Spec(msg.into())
}

pub fn complex_to_json(z: C64) -> Value {
    if z.im == 0.0 {
        json!(z.re)
    } else {
        json!({"re": z.re, "im": z.im})
    }
}

pub fn complex_from_json(v: &Value) -> Result<C64> {
    match v {
        Value::Number(x) => Ok(C64::new(x.as_f64().unwrap(), 0.0)),
        Value::Object(map) => {
            let re = map.get("re").and_then(Value::as_f64).unwrap_or(0.0);
            let im = map.get("im").and_then(Value::as_f64).unwrap_or(0.0);
            Ok(C64::new(re, im))
        }
        _ => Err(spec_err(format!("expected complex scalar, got {v}"))),
    }
}

pub fn matrix_to_json(m: &CMat) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_to_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, shape: [usize; 2]) -> Result<CMat> {
    match v {
        Value::Array(rows) => {
            if rows.len() != shape[0] {
                return Err(spec_err(format!("expected {} rows, got {}", shape[0], rows.len())));
            }
            let mut m = CMat::zeros(shape[0], shape[1]);
            for (i, row) in rows.iter().enumerate() {
                let row = row.as_array().ok_or_else(|| spec_err("matrix row must be an array"))?;
                if row.len() != shape[1] {
                    return Err(spec_err(format!("expected {} columns, got {}", shape[1], row.len())));
                }
                for (j, z) in row.iter().enumerate() {
                    m[(i, j)] = complex_from_json(z)?;
                }
            }
            Ok(m)
        }
        _ => {
            let z = complex_from_json(v)?;
            if shape[0] != shape[1] {
                return Err(spec_err("scalar shorthand requires a square shape"));
            }
            Ok(CMat::identity(shape[0], shape[1]) * z)
        }
    }
}

impl FieldSpec {
    pub fn constant(m: &CMat) -> Self {
        Self {
            kind: FieldKind::Constant,
            shape: [m.nrows(), m.ncols()],
            parameters: json!({ "value": matrix_to_json(m) }),
        }
    }

    pub fn scalar_constant(n: usize, c: f64) -> Self {
        Self::constant(&(CMat::identity(n, n) * C64::new(c, 0.0)))
    }

    pub fn zero(rows: usize, cols: usize) -> Self {
        Self::constant(&CMat::zeros(rows, cols))
    }

    /// Scalar expression times the `n×n` identity.
    pub fn expr(n: usize, expr: &str) -> Self {
        Self {
            kind: FieldKind::Expr,
            shape: [n, n],
            parameters: json!({ "expr": expr }),
        }
    }

    pub fn expr_entries(entries: &[Vec<&str>]) -> Self {
        let rows = entries.len();
        let cols = entries.first().map_or(0, |r| r.len());
        Self {
            kind: FieldKind::Expr,
            shape: [rows, cols],
            parameters: json!({ "entries": entries }),
        }
    }

    pub fn fourier(shape: [usize; 2], modes: &[(Vec<i64>, CMat)]) -> Self {
        let modes: Vec<Value> = modes
            .iter()
            .map(|(k, c)| json!({"k": k, "coef": matrix_to_json(c)}))
            .collect();
        Self {
            kind: FieldKind::Fourier,
            shape,
            parameters: json!({ "modes": modes }),
        }
    }

    pub fn piecewise(axis: usize, breaks: &[f64], values: &[CMat]) -> Self {
        let shape = [values[0].nrows(), values[0].ncols()];
        Self {
            kind: FieldKind::Piecewise,
            shape,
            parameters: json!({
                "axis": axis,
                "breaks": breaks,
                "values": values.iter().map(matrix_to_json).collect::<Vec<_>>(),
            }),
        }
    }

    pub fn compile(&self, d: usize) -> Result<CompiledSpec> {
        let shape = self.shape;
        let p = &self.parameters;
        let body = match self.kind {
            FieldKind::Constant => {
                let v = p.get("value").ok_or_else(|| spec_err("constant spec needs 'value'"))?;
                Body::Constant(matrix_from_json(v, shape)?)
            }
            FieldKind::Fourier => {
                let modes = p
                    .get("modes")
                    .and_then(Value::as_array)
                    .ok_or_else(|| spec_err("fourier spec needs 'modes'"))?;
                let mut out = Vec::with_capacity(modes.len());
                for m in modes {
                    let k: Vec<i64> = m
                        .get("k")
                        .and_then(Value::as_array)
                        .ok_or_else(|| spec_err("mode needs 'k'"))?
                        .iter()
                        .map(|x| x.as_i64().ok_or_else(|| spec_err("integer frequency expected")))
                        .collect::<Result<_>>()?;
                    if k.len() != d {
                        return Err(spec_err(format!("frequency {k:?} has wrong dimension for d={d}")));
                    }
                    let c = matrix_from_json(m.get("coef").ok_or_else(|| spec_err("mode needs 'coef'"))?, shape)?;
                    out.push((k, c));
                }
                Body::Fourier(out)
            }
            FieldKind::Piecewise => {
                let axis = p
                    .get("axis")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| spec_err("piecewise spec needs 'axis'"))? as usize;
                if axis >= d {
                    return Err(spec_err(format!("axis {axis} out of range for d={d}")));
                }
                let breaks: Vec<f64> = p
                    .get("breaks")
                    .and_then(Value::as_array)
                    .ok_or_else(|| spec_err("piecewise spec needs 'breaks'"))?
                    .iter()
                    .map(|x| x.as_f64().ok_or_else(|| spec_err("numeric break expected")))
                    .collect::<Result<_>>()?;
                let values: Vec<CMat> = p
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or_else(|| spec_err("piecewise spec needs 'values'"))?
                    .iter()
                    .map(|v| matrix_from_json(v, shape))
                    .collect::<Result<_>>()?;
                if breaks.is_empty() || breaks.len() != values.len() {
                    return Err(spec_err("piecewise spec needs one value per break"));
                }
                if breaks.windows(2).any(|w| w[1] <= w[0]) || breaks[breaks.len() - 1] - breaks[0] >= 1.0 {
                    return Err(spec_err("breaks must increase within one period"));
                }
                Body::Piecewise { axis, breaks, values }
            }
            FieldKind::Expr => {
                let entries: Vec<Expr> = if let Some(e) = p.get("expr") {
                    if shape[0] != shape[1] {
                        return Err(spec_err("scalar expression requires a square shape"));
                    }
                    let e = e.as_str().ok_or_else(|| spec_err("'expr' must be a string"))?;
                    vec![parse_expr(e, d)?]
                } else {
                    let rows = p
                        .get("entries")
                        .and_then(Value::as_array)
                        .ok_or_else(|| spec_err("expr spec needs 'expr' or 'entries'"))?;
                    if rows.len() != shape[0] {
                        return Err(spec_err("entries do not match shape"));
                    }
                    let mut out = Vec::new();
                    for row in rows {
                        let row = row.as_array().ok_or_else(|| spec_err("entry row must be an array"))?;
                        if row.len() != shape[1] {
                            return Err(spec_err("entries do not match shape"));
                        }
                        for e in row {
                            let e = e.as_str().ok_or_else(|| spec_err("entry must be a string"))?;
                            out.push(parse_expr(e, d)?);
                        }
                    }
                    out
                };
                Body::Expr(entries)
            }
        };
        Ok(CompiledSpec { d, shape, body })
    }

    /// The spec of `s(y)·M` for a scalar (1×1) spec `s` and constant matrix `M`.
    pub fn times_matrix(&self, m: &CMat) -> Result<FieldSpec> {
        if self.shape != [1, 1] {
            return Err(spec_err("times_matrix needs a scalar spec"));
        }
        let p = &self.parameters;
        let scalar = |v: &Value| -> Result<C64> { Ok(matrix_from_json(v, [1, 1])?[(0, 0)]) };
        let shape = [m.nrows(), m.ncols()];
        let parameters = match self.kind {
            FieldKind::Constant => {
                let v = scalar(p.get("value").ok_or_else(|| spec_err("constant spec needs 'value'"))?)?;
                json!({ "value": matrix_to_json(&(m * v)) })
            }
            FieldKind::Fourier => {
                let modes = p
                    .get("modes")
                    .and_then(Value::as_array)
                    .ok_or_else(|| spec_err("fourier spec needs 'modes'"))?;
                let mut out = Vec::with_capacity(modes.len());
                for md in modes {
                    let c = scalar(md.get("coef").ok_or_else(|| spec_err("mode needs 'coef'"))?)?;
                    out.push(json!({ "k": md.get("k").cloned().unwrap_or(Value::Null), "coef": matrix_to_json(&(m * c)) }));
                }
                json!({ "modes": out })
            }
            FieldKind::Piecewise => {
                let values = p
                    .get("values")
                    .and_then(Value::as_array)
                    .ok_or_else(|| spec_err("piecewise spec needs 'values'"))?
                    .iter()
                    .map(|v| Ok(matrix_to_json(&(m * scalar(v)?))))
                    .collect::<Result<Vec<_>>>()?;
                json!({ "axis": p.get("axis").cloned().unwrap_or(Value::Null), "breaks": p.get("breaks").cloned().unwrap_or(Value::Null), "values": values })
            }
            FieldKind::Expr => {
                let e = match (p.get("expr"), p.get("entries")) {
                    (Some(Value::String(e)), _) => e.clone(),
                    (_, Some(rows)) => rows
                        .get(0)
                        .and_then(|r| r.get(0))
                        .and_then(Value::as_str)
                        .ok_or_else(|| spec_err("malformed scalar expression"))?
                        .to_string(),
                    _ => return Err(spec_err("expr spec needs 'expr' or 'entries'")),
                };
                let entries: Vec<Vec<String>> = (0..shape[0])
                    .map(|i| {
                        (0..shape[1])
                            .map(|j| {
                                let z = m[(i, j)];
                                if z == C64::new(0.0, 0.0) {
                                    "0".to_string()
                                } else if z.im == 0.0 {
                                    format!("({})*({e})", z.re)
                                } else {
                                    format!("({} + ({})*i)*({e})", z.re, z.im)
                                }
                            })
                            .collect()
                    })
                    .collect();
                json!({ "entries": entries })
            }
        };
        Ok(FieldSpec {
            kind: self.kind,
            shape,
            parameters,
        })
    }

    /// Whether every jump of a piecewise spec lies on a face of the
    /// cell-centred grid with `n` nodes per axis.
    pub fn jumps_on_grid(&self, n: usize) -> bool {
        if self.kind != FieldKind::Piecewise {
            return true;
        }
        let breaks = self.parameters.get("breaks").and_then(Value::as_array);
        breaks.is_some_and(|b| {
            b.iter().filter_map(Value::as_f64).all(|x| {
                let s = x * n as f64;
                (s - s.round()).abs() < 1e-9
            })
        })
    }
}

#[derive(Debug, Clone)]
enum Body {
    Constant(CMat),
    Fourier(Vec<(Vec<i64>, CMat)>),
    Piecewise {
        axis: usize,
        breaks: Vec<f64>,
        values: Vec<CMat>,
    },
    Expr(Vec<Expr>),
}

/// A spec ready for pointwise evaluation in lattice coordinates.
#[derive(Debug, Clone)]
pub struct CompiledSpec {
    pub d: usize,
    pub shape: [usize; 2],
    body: Body,
}

impl CompiledSpec {
    pub fn is_piecewise(&self) -> bool {
        matches!(self.body, Body::Piecewise { .. })
    }

    /// Writes the row-major value at lattice point `y` into `out`.
    pub fn eval_into(&self, y: &[f64], out: &mut [C64]) {
        let [r, c] = self.shape;
        match &self.body {
            Body::Constant(m) => {
                for i in 0..r {
                    for j in 0..c {
                        out[i * c + j] = m[(i, j)];
                    }
                }
            }
            Body::Fourier(modes) => {
                out[..r * c].fill(C64::new(0.0, 0.0));
                for (k, m) in modes {
                    let arg: f64 = k.iter().zip(y).map(|(&kj, &yj)| kj as f64 * yj).sum();
                    let e = C64::from_polar(1.0, 2.0 * PI * arg);
                    for i in 0..r {
                        for j in 0..c {
                            out[i * c + j] += m[(i, j)] * e;
                        }
                    }
                }
            }
            Body::Piecewise { axis, breaks, values } => {
                let t = y[*axis] - breaks[0];
                let t = breaks[0] + (t - t.floor());
                let piece = breaks.iter().rposition(|&b| b <= t + 1e-14).unwrap_or(breaks.len() - 1);
                let m = &values[piece];
                for i in 0..r {
                    for j in 0..c {
                        out[i * c + j] = m[(i, j)];
                    }
                }
            }
            Body::Expr(entries) => {
                if entries.len() == 1 && r * c != 1 {
                    let v = entries[0].eval(y);
                    for i in 0..r {
                        for j in 0..c {
                            out[i * c + j] = if i == j { v } else { C64::new(0.0, 0.0) };
                        }
                    }
                } else {
                    for (o, e) in out.iter_mut().zip(entries) {
                        *o = e.eval(y);
                    }
                }
            }
        }
    }

    pub fn eval(&self, y: &[f64]) -> CMat {
        let [r, c] = self.shape;
        let mut buf = vec![C64::new(0.0, 0.0); r * c];
        self.eval_into(y, &mut buf);
        CMat::from_row_slice(r, c, &buf)
    }
}

// ---- expression language ----------------------------------------------------

#[derive(Debug, Clone)]
enum Expr {
    Num(C64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy)]
enum Func {
    Sin,
    Cos,
    Exp,
}

impl Expr {
    fn eval(&self, y: &[f64]) -> C64 {
        match self {
            Expr::Num(z) => *z,
            Expr::Var(i) => C64::new(y[*i], 0.0),
            Expr::Neg(e) => -e.eval(y),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(y), b.eval(y));
                match op {
                    '+' => a + b,
                    '-' => a - b,
                    '*' => a * b,
                    '/' => a / b,
                    '^' => {
                        if b.im == 0.0 && b.re.fract() == 0.0 {
                            a.powi(b.re as i32)
                        } else {
                            a.powc(b)
                        }
                    }
                    _ => unreachable!(),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(y);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
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
            let v = text.parse::<f64>().map_err(|_| spec_err(format!("bad number '{text}'")))?;
            out.push(Tok::Num(v));
        } else if ch.is_ascii_alphabetic() || ch == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()·".contains(ch) {
            out.push(Tok::Op(if ch == '·' { '*' } else { ch }));
            i += 1;
        } else {
            return Err(spec_err(format!("unexpected character '{ch}' in expression")));
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    d: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Bin('+', Box::new(lhs), Box::new(self.product()?));
            } else if self.eat_op('-') {
                lhs = Expr::Bin('-', Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Bin('*', Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Bin('/', Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.peek().cloned().ok_or_else(|| spec_err("unexpected end of expression"))?;
        self.pos += 1;
        match tok {
            Tok::Num(v) => Ok(Expr::Num(C64::new(v, 0.0))),
            Tok::Op('(') => {
                let e = self.sum()?;
                if !self.eat_op(')') {
                    return Err(spec_err("missing ')'"));
                }
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    _ => None,
                };
                if let Some(f) = func {
                    if !self.eat_op('(') {
                        return Err(spec_err(format!("'{name}' must be followed by '('")));
                    }
                    let arg = self.sum()?;
                    if !self.eat_op(')') {
                        return Err(spec_err("missing ')'"));
                    }
                    return Ok(Expr::Call(f, Box::new(arg)));
                }
                let var = match name.as_str() {
                    "pi" => return Ok(Expr::Num(C64::new(PI, 0.0))),
                    "i" => return Ok(Expr::Num(C64::new(0.0, 1.0))),
                    "x" | "x1" => 0,
                    "x2" | "y" => 1,
                    "x3" | "z" => 2,
                    _ => return Err(spec_err(format!("unknown identifier '{name}'"))),
                };
                if var >= self.d {
                    return Err(spec_err(format!("variable '{name}' not available in d={}", self.d)));
                }
                Ok(Expr::Var(var))
            }
            Tok::Op(op) => Err(spec_err(format!("unexpected '{op}'"))),
        }
    }
}

fn parse_expr(s: &str, d: usize) -> Result<Expr> {
    let mut p = Parser {
        toks: tokenize(s)?,
        pos: 0,
        d,
    };
    let e = p.sum()?;
    if p.pos != p.toks.len() {
        return Err(spec_err(format!("trailing input in expression '{s}'")));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn expression_evaluates() {
        let spec = FieldSpec::expr(1, "2 + sin(2*pi*x1)");
        let c = spec.compile(1).unwrap();
        assert_abs_diff_eq!(c.eval(&[0.25])[(0, 0)].re, 3.0, epsilon = 1e-14);
        let spec = FieldSpec::expr(1, "exp(-x1^2) * cos(pi*x2) - 1e-1");
        let c = spec.compile(2).unwrap();
        let v = c.eval(&[0.5, 1.0])[(0, 0)].re;
        assert_abs_diff_eq!(v, -(-0.25f64).exp() - 0.1, epsilon = 1e-14);
    }

    #[test]
    fn complex_unit_in_expression() {
        let c = FieldSpec::expr(1, "i*sin(2*pi*x)").compile(1).unwrap();
        let v = c.eval(&[0.25])[(0, 0)];
        assert_abs_diff_eq!(v.im, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
    }

    #[test]
    fn bad_expressions_rejected() {
        assert!(FieldSpec::expr(1, "2 + ").compile(1).is_err());
        assert!(FieldSpec::expr(1, "sin x").compile(1).is_err());
        assert!(FieldSpec::expr(1, "x2").compile(1).is_err());
        assert!(FieldSpec::expr(1, "2 $ 3").compile(1).is_err());
    }

    #[test]
    fn piecewise_wraps() {
        let one = CMat::identity(1, 1);
        let spec = FieldSpec::piecewise(0, &[0.0, 0.5], &[one.clone(), one * C64::new(3.0, 0.0)]);
        let c = spec.compile(1).unwrap();
        assert_eq!(c.eval(&[0.1])[(0, 0)].re, 1.0);
        assert_eq!(c.eval(&[0.6])[(0, 0)].re, 3.0);
        assert_eq!(c.eval(&[-0.2])[(0, 0)].re, 3.0);
        assert_eq!(c.eval(&[1.1])[(0, 0)].re, 1.0);
        assert!(spec.jumps_on_grid(8));
        let odd = FieldSpec::piecewise(0, &[0.0, 0.3], &[CMat::identity(1, 1), CMat::identity(1, 1)]);
        assert!(!odd.jumps_on_grid(8));
    }

    #[test]
    fn scalar_specs_lift_to_matrices() {
        let m = CMat::from_row_slice(2, 2, &[C64::new(1.0, 0.0), C64::new(0.0, 0.5), C64::new(0.0, -0.5), C64::new(2.0, 0.0)]);
        let y = [0.3, 0.8];
        let scalars = [
            FieldSpec::expr(1, "2 + sin(2*pi*x1)"),
            FieldSpec::scalar_constant(1, 1.5),
            FieldSpec::piecewise(0, &[0.0, 0.5], &[CMat::identity(1, 1), CMat::identity(1, 1) * C64::new(3.0, 0.0)]),
            FieldSpec::fourier([1, 1], &[(vec![1, 0], CMat::identity(1, 1) * C64::new(0.2, 0.1))]),
        ];
        for s in scalars {
            let v = s.compile(2).unwrap().eval(&y)[(0, 0)];
            let lifted = s.times_matrix(&m).unwrap().compile(2).unwrap().eval(&y);
            assert!((lifted - &m * v).norm() < 1e-14, "{:?}", s.kind);
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = FieldSpec::fourier([1, 1], &[(vec![1], CMat::identity(1, 1) * C64::new(0.5, -0.25))]);
        let text = serde_json::to_string(&spec).unwrap();
        let back: FieldSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(spec, back);
    }

    #[test]
    fn matrix_json_forms() {
        let m = matrix_from_json(&json!(2.0), [2, 2]).unwrap();
        assert_eq!(m[(1, 1)].re, 2.0);
        assert_eq!(m[(0, 1)].re, 0.0);
        let m = matrix_from_json(&json!([[1.0, {"re": 0.0, "im": 2.0}]]), [1, 2]).unwrap();
        assert_eq!(m[(0, 1)].im, 2.0);
        assert!(matrix_from_json(&json!(2.0), [2, 1]).is_err());
    }
}
