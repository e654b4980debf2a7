//! The circuit description language: a line-oriented text format for
//! dual-rail circuits, with positioned diagnostics and a canonical printer.
//!
//! ```text
//! # comments run to end of line
//! particles 2
//! init 00                    # or `bell`, or `state (re,im) ...`
//! param t1 1.5707963267948966 tag AB
//! gate 0 H; gate 1 u(0.3,0.1,-0.2)   # `;` joins gates into one layer
//! cphase 0 1 t1 modes 1 1
//! gate 0 phase(pi-t1) tag A
//! ```
//!
//! Gate forms: `H`, `X`, `Z`, `phase(<expr>)`, `u(<expr>,<expr>,<expr>)`,
//! `mat(<8 reals>)` (row-major re/im pairs, unitarity checked), and
//! `pmat(<4 mags>,<4 phase exprs>)` for entry-wise polar matrices.
//! Expressions are linear in declared parameters: numbers, `pi`, parameter
//! names, products `<num>*<name>`, quotients `<num or pi>/<num>`, combined
//! with `+`/`-`.

use dualrail_core::circuit::{particle_label, LinExpr, Param};
use dualrail_core::{Circuit, CircuitLayer, GateForm, Mat2, StateVector, C64};
use std::fmt;

/// Registers wider than this are rejected at parse time; the dense simulator
/// is meant for desk-scale circuits.
pub const MAX_PARTICLES: usize = 12;

/// A parse failure with its position (1-based line and column).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

type PResult<T> = Result<T, ParseError>;

fn err<T>(line: usize, col: usize, message: impl Into<String>) -> PResult<T> {
    Err(ParseError { line, col, message: message.into() })
}

/// One whitespace-separated token (parenthesized argument lists stay glued
/// to their head word), with its 1-based starting column.
#[derive(Debug, Clone)]
struct Token {
    col: usize,
    text: String,
}

/// Split a statement into tokens; parentheses suppress whitespace splitting.
/// Unbalanced parentheses are reported.
fn tokenize(line_no: usize, col0: usize, text: &str) -> PResult<Vec<Token>> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut start_col = col0;
    let mut depth = 0usize;
    let mut col = col0;
    for ch in text.chars() {
        match ch {
            '(' => {
                depth += 1;
                if current.is_empty() {
                    start_col = col;
                }
                current.push(ch);
            }
            ')' => {
                if depth == 0 {
                    return err(line_no, col, "unbalanced ')'");
                }
                depth -= 1;
                current.push(ch);
            }
            c if c.is_whitespace() && depth == 0 => {
                if !current.is_empty() {
                    tokens.push(Token { col: start_col, text: std::mem::take(&mut current) });
                }
            }
            c => {
                if current.is_empty() {
                    start_col = col;
                }
                current.push(c);
            }
        }
        col += 1;
    }
    if depth != 0 {
        return err(line_no, col, "unbalanced '('");
    }
    if !current.is_empty() {
        tokens.push(Token { col: start_col, text: current });
    }
    Ok(tokens)
}

fn parse_finite(line: usize, col: usize, text: &str) -> PResult<f64> {
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(_) => err(line, col, format!("number `{text}` is not finite")),
        Err(_) => err(line, col, format!("expected a number, found `{text}`")),
    }
}

// ---------------------------------------------------------------------------
// Linear expressions
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum ExprTok {
    Num(f64),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
}

fn lex_expr(line: usize, col: usize, text: &str) -> PResult<Vec<ExprTok>> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '+' {
            out.push(ExprTok::Plus);
            i += 1;
        } else if c == '-' {
            out.push(ExprTok::Minus);
            i += 1;
        } else if c == '*' {
            out.push(ExprTok::Star);
            i += 1;
        } else if c == '/' {
            out.push(ExprTok::Slash);
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '+' || chars[i] == '-')
                        && i > start
                        && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
            {
                i += 1;
            }
            let token: String = chars[start..i].iter().collect();
            out.push(ExprTok::Num(parse_finite(line, col, &token)?));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '_')
            {
                i += 1;
            }
            out.push(ExprTok::Name(chars[start..i].iter().collect()));
        } else {
            return err(line, col, format!("unexpected character `{c}` in expression"));
        }
    }
    Ok(out)
}

/// A product term: scalar coefficient times at most one parameter.
#[derive(Debug, Clone)]
struct Factor {
    coefficient: f64,
    param: Option<usize>,
}

/// Parse a linear expression over the circuit's declared parameters.
/// The result is canonical: terms merged by parameter, zero terms dropped,
/// sorted by declaration order.
fn parse_linexpr(line: usize, col: usize, text: &str, circuit: &Circuit) -> PResult<LinExpr> {
    let toks = lex_expr(line, col, text)?;
    if toks.is_empty() {
        return err(line, col, "empty expression");
    }
    let mut constant = 0.0f64;
    let mut terms: Vec<(f64, usize)> = Vec::new();
    let mut i = 0;

    let primary = |i: &mut usize| -> PResult<Factor> {
        match toks.get(*i) {
            Some(ExprTok::Num(v)) => {
                *i += 1;
                Ok(Factor { coefficient: *v, param: None })
            }
            Some(ExprTok::Name(name)) => {
                *i += 1;
                if name == "pi" {
                    Ok(Factor { coefficient: std::f64::consts::PI, param: None })
                } else if let Some(id) = circuit.param_id(name) {
                    Ok(Factor { coefficient: 1.0, param: Some(id.0) })
                } else {
                    err(line, col, format!("unknown parameter `{name}`"))
                }
            }
            _ => err(line, col, "expected a number, `pi`, or a parameter name"),
        }
    };

    while i < toks.len() {
        // Optional leading sign for this additive term.
        let mut sign = 1.0;
        while matches!(toks.get(i), Some(ExprTok::Plus) | Some(ExprTok::Minus)) {
            if matches!(toks[i], ExprTok::Minus) {
                sign = -sign;
            }
            i += 1;
        }
        let mut factor = primary(&mut i)?;
        while matches!(toks.get(i), Some(ExprTok::Star) | Some(ExprTok::Slash)) {
            let divide = matches!(toks[i], ExprTok::Slash);
            i += 1;
            let rhs = primary(&mut i)?;
            if divide {
                if rhs.param.is_some() {
                    return err(line, col, "cannot divide by a parameter");
                }
                if rhs.coefficient == 0.0 {
                    return err(line, col, "division by zero");
                }
                factor.coefficient /= rhs.coefficient;
            } else {
                if factor.param.is_some() && rhs.param.is_some() {
                    return err(line, col, "expressions must stay linear in the parameters");
                }
                factor = Factor {
                    coefficient: factor.coefficient * rhs.coefficient,
                    param: factor.param.or(rhs.param),
                };
            }
        }
        if !factor.coefficient.is_finite() {
            return err(line, col, "expression coefficient is not finite");
        }
        match factor.param {
            None => constant += sign * factor.coefficient,
            Some(p) => terms.push((sign * factor.coefficient, p)),
        }
        // The next token, if any, must be an additive operator.
        if i < toks.len() && !matches!(toks[i], ExprTok::Plus | ExprTok::Minus) {
            return err(line, col, "expected `+` or `-` between terms");
        }
    }

    // Canonical form: merged, nonzero, sorted by parameter id.
    terms.sort_by_key(|&(_, p)| p);
    let mut expr = LinExpr::constant(constant);
    let mut iter = terms.into_iter().peekable();
    while let Some((mut coefficient, p)) = iter.next() {
        while matches!(iter.peek(), Some(&(_, q)) if q == p) {
            coefficient += iter.next().expect("peeked").0;
        }
        if coefficient != 0.0 {
            expr = expr.plus_term(coefficient, dualrail_core::ParamId(p));
        }
    }
    if !expr.constant.is_finite() {
        return err(line, col, "expression constant is not finite");
    }
    Ok(expr)
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

/// Split `head(args)` into the head word and the text between parentheses;
/// `None` when there is no parenthesis.
fn split_call(text: &str) -> (&str, Option<&str>) {
    match text.find('(') {
        Some(open) if text.ends_with(')') => {
            (&text[..open], Some(&text[open + 1..text.len() - 1]))
        }
        _ => (text, None),
    }
}

/// Comma- or whitespace-separated argument fields.
fn split_args(text: &str) -> Vec<&str> {
    if text.contains(',') {
        text.split(',').map(str::trim).collect()
    } else {
        text.split_whitespace().collect()
    }
}

fn parse_usize(line: usize, tok: &Token) -> PResult<usize> {
    tok.text
        .parse::<usize>()
        .map_err(|_| ParseError {
            line,
            col: tok.col,
            message: format!("expected an unsigned integer, found `{}`", tok.text),
        })
}

fn parse_mode(line: usize, tok: &Token) -> PResult<u8> {
    match tok.text.as_str() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => err(line, tok.col, format!("mode must be 0 or 1, found `{other}`")),
    }
}

fn valid_param_name(name: &str) -> bool {
    !name.is_empty()
        && name != "pi"
        && name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Trailing `tag <owner>` clause; returns (owner, tokens consumed).
fn parse_tag(line: usize, tokens: &[Token]) -> PResult<(Option<String>, usize)> {
    match tokens {
        [] => Ok((None, 0)),
        [tag, owner, ..] if tag.text == "tag" => {
            if owner.text.is_empty() {
                err(line, owner.col, "empty owner tag")
            } else {
                Ok((Some(owner.text.clone()), 2))
            }
        }
        [tag] if tag.text == "tag" => err(line, tag.col, "`tag` needs an owner name"),
        [other, ..] => err(line, other.col, format!("unexpected token `{}`", other.text)),
    }
}

fn parse_gate_form(
    line: usize,
    tok: &Token,
    circuit: &Circuit,
) -> PResult<GateForm> {
    let (head, args) = split_call(&tok.text);
    let col = tok.col;
    match (head, args) {
        ("H", None) => Ok(GateForm::Hadamard),
        ("X", None) => Ok(GateForm::PauliX),
        ("Z", None) => Ok(GateForm::PauliZ),
        ("phase", Some(arg)) => Ok(GateForm::Phase(parse_linexpr(line, col, arg, circuit)?)),
        ("u", Some(args)) => {
            let fields = split_args(args);
            if fields.len() != 3 {
                return err(line, col, format!("`u` takes 3 angles, found {}", fields.len()));
            }
            Ok(GateForm::Euler {
                theta: parse_linexpr(line, col, fields[0], circuit)?,
                phi: parse_linexpr(line, col, fields[1], circuit)?,
                lambda: parse_linexpr(line, col, fields[2], circuit)?,
            })
        }
        ("mat", Some(args)) => {
            let fields = split_args(args);
            if fields.len() != 8 {
                return err(
                    line,
                    col,
                    format!("`mat` takes 8 reals (row-major re/im pairs), found {}", fields.len()),
                );
            }
            let mut v = [0.0; 8];
            for (slot, field) in v.iter_mut().zip(&fields) {
                *slot = parse_finite(line, col, field)?;
            }
            Ok(GateForm::Fixed(Mat2::from_rows([
                [C64::new(v[0], v[1]), C64::new(v[2], v[3])],
                [C64::new(v[4], v[5]), C64::new(v[6], v[7])],
            ])))
        }
        ("pmat", Some(args)) => {
            let fields = split_args(args);
            if fields.len() != 8 {
                return err(
                    line,
                    col,
                    format!("`pmat` takes 4 magnitudes and 4 phases, found {}", fields.len()),
                );
            }
            let mut mags = [0.0; 4];
            for (slot, field) in mags.iter_mut().zip(&fields[..4]) {
                *slot = parse_finite(line, col, field)?;
            }
            let mut phases = Vec::with_capacity(4);
            for field in &fields[4..] {
                phases.push(parse_linexpr(line, col, field, circuit)?);
            }
            let phases: [LinExpr; 4] = match phases.try_into() {
                Ok(p) => p,
                Err(_) => unreachable!("length checked above"),
            };
            Ok(GateForm::Polar { mags, phases })
        }
        _ => err(
            line,
            col,
            format!("unknown gate `{}` (expected H, X, Z, phase, u, mat, or pmat)", tok.text),
        ),
    }
}

// ---------------------------------------------------------------------------
// Parser driver
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    BeforeParticles,
    Header,
    Body,
}

fn core_err(line: usize, col: usize, e: dualrail_core::Error) -> ParseError {
    ParseError { line, col, message: e.to_string() }
}

/// Parse a circuit document.  The result is ready to run: parameters are
/// resolved, matrices materialized, and unitarity enforced.
pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut phase = Phase::BeforeParticles;
    let mut n_particles = 0usize;
    let mut initial: Option<(usize, usize, StateVector)> = None;
    let mut circuit: Option<Circuit> = None;
    // Parameters may be declared before the circuit exists; buffer them.
    let mut pending_params: Vec<(usize, usize, String, f64, String)> = Vec::new();

    let ensure_circuit = |circuit: &mut Option<Circuit>,
                          n: usize,
                          initial: &mut Option<(usize, usize, StateVector)>,
                          pending: &mut Vec<(usize, usize, String, f64, String)>|
     -> PResult<()> {
        if circuit.is_none() {
            let init = match initial.take() {
                Some((_, _, s)) => s,
                None => StateVector::basis(n, 0),
            };
            let mut c = Circuit::new(n, init).map_err(|e| core_err(0, 0, e))?;
            for (line, col, name, value, owner) in pending.drain(..) {
                c.add_param(&name, value, &owner)
                    .map_err(|e| core_err(line, col, e))?;
            }
            *circuit = Some(c);
        }
        Ok(())
    };

    for (line_idx, raw_line) in text.lines().enumerate() {
        let line_no = line_idx + 1;
        // Strip comments; keep column arithmetic in characters.
        let stripped: String = raw_line.chars().take_while(|&c| c != '#').collect();
        if stripped.trim().is_empty() {
            continue;
        }

        // Statements share a line only to share a layer.
        let mut statements = Vec::new();
        let mut col = 1usize;
        for piece in stripped.split(';') {
            statements.push((col, piece));
            col += piece.chars().count() + 1;
        }
        let multi = statements.len() > 1;
        let mut line_gates: Vec<(usize, GateForm, Option<String>)> = Vec::new();

        for (col0, piece) in statements {
            let tokens = tokenize(line_no, col0, piece)?;
            let Some(head) = tokens.first() else {
                return err(line_no, col0, "empty statement before `;`");
            };
            match head.text.as_str() {
                "particles" => {
                    if multi {
                        return err(line_no, head.col, "`particles` must stand alone on its line");
                    }
                    if phase != Phase::BeforeParticles {
                        return err(line_no, head.col, "`particles` may appear only once, first");
                    }
                    let [_, count] = tokens.as_slice() else {
                        return err(line_no, head.col, "usage: particles <n>");
                    };
                    let n = parse_usize(line_no, count)?;
                    if n == 0 || n > MAX_PARTICLES {
                        return err(
                            line_no,
                            count.col,
                            format!("particle count must be between 1 and {MAX_PARTICLES}"),
                        );
                    }
                    n_particles = n;
                    phase = Phase::Header;
                }
                "init" => {
                    if multi {
                        return err(line_no, head.col, "`init` must stand alone on its line");
                    }
                    if phase == Phase::BeforeParticles {
                        return err(line_no, head.col, "`particles` must come before `init`");
                    }
                    if phase == Phase::Body {
                        return err(line_no, head.col, "`init` must come before any gate");
                    }
                    if initial.is_some() {
                        return err(line_no, head.col, "`init` may appear only once");
                    }
                    let state = parse_init(line_no, &tokens, n_particles)?;
                    initial = Some((line_no, head.col, state));
                }
                "param" => {
                    if multi {
                        return err(line_no, head.col, "`param` must stand alone on its line");
                    }
                    if phase == Phase::BeforeParticles {
                        return err(line_no, head.col, "`particles` must come before `param`");
                    }
                    if tokens.len() < 3 {
                        return err(line_no, head.col, "usage: param <name> <value> [tag <owner>]");
                    }
                    let name = &tokens[1];
                    if !valid_param_name(&name.text) {
                        return err(
                            line_no,
                            name.col,
                            format!("invalid parameter name `{}`", name.text),
                        );
                    }
                    let value = parse_finite(line_no, tokens[2].col, &tokens[2].text)?;
                    let (owner, used) = parse_tag(line_no, &tokens[3..])?;
                    if 3 + used != tokens.len() {
                        return err(line_no, tokens[3 + used].col, "trailing tokens after `param`");
                    }
                    let owner = owner.unwrap_or_else(|| all_labels(n_particles));
                    match circuit.as_mut() {
                        Some(c) => {
                            c.add_param(&name.text, value, &owner)
                                .map_err(|e| core_err(line_no, name.col, e))?;
                        }
                        None => pending_params.push((
                            line_no,
                            name.col,
                            name.text.clone(),
                            value,
                            owner,
                        )),
                    }
                }
                "gate" => {
                    if phase == Phase::BeforeParticles {
                        return err(line_no, head.col, "`particles` must come before `gate`");
                    }
                    phase = Phase::Body;
                    ensure_circuit(&mut circuit, n_particles, &mut initial, &mut pending_params)?;
                    if tokens.len() < 3 {
                        return err(line_no, head.col, "usage: gate <particle> <form> [tag <owner>]");
                    }
                    let target = parse_usize(line_no, &tokens[1])?;
                    let form =
                        parse_gate_form(line_no, &tokens[2], circuit.as_ref().expect("ensured"))?;
                    let (owner, used) = parse_tag(line_no, &tokens[3..])?;
                    if 3 + used != tokens.len() {
                        return err(line_no, tokens[3 + used].col, "trailing tokens after `gate`");
                    }
                    line_gates.push((target, form, owner));
                }
                "cphase" => {
                    if multi {
                        return err(
                            line_no,
                            head.col,
                            "`cphase` occupies a whole layer and must stand alone on its line",
                        );
                    }
                    if phase == Phase::BeforeParticles {
                        return err(line_no, head.col, "`particles` must come before `cphase`");
                    }
                    phase = Phase::Body;
                    ensure_circuit(&mut circuit, n_particles, &mut initial, &mut pending_params)?;
                    if tokens.len() < 4 {
                        return err(
                            line_no,
                            head.col,
                            "usage: cphase <p> <q> <phase> [modes <m_p> <m_q>] [tag <owner>]",
                        );
                    }
                    let p = parse_usize(line_no, &tokens[1])?;
                    let q = parse_usize(line_no, &tokens[2])?;
                    // The phase expression may contain spaces: consume tokens
                    // up to the first keyword.
                    let mut idx = 3;
                    let mut expr_text = String::new();
                    while idx < tokens.len()
                        && tokens[idx].text != "modes"
                        && tokens[idx].text != "tag"
                    {
                        expr_text.push_str(&tokens[idx].text);
                        idx += 1;
                    }
                    if expr_text.is_empty() {
                        return err(line_no, tokens[2].col, "missing phase expression");
                    }
                    let expr = parse_linexpr(
                        line_no,
                        tokens[3].col,
                        &expr_text,
                        circuit.as_ref().expect("ensured"),
                    )?;
                    let mut modes = None;
                    if idx < tokens.len() && tokens[idx].text == "modes" {
                        if idx + 2 >= tokens.len() {
                            return err(line_no, tokens[idx].col, "`modes` needs two mode bits");
                        }
                        modes = Some((
                            parse_mode(line_no, &tokens[idx + 1])?,
                            parse_mode(line_no, &tokens[idx + 2])?,
                        ));
                        idx += 3;
                    }
                    let (owner, used) = parse_tag(line_no, &tokens[idx..])?;
                    if idx + used != tokens.len() {
                        return err(line_no, tokens[idx + used].col, "trailing tokens after `cphase`");
                    }
                    circuit
                        .as_mut()
                        .expect("ensured")
                        .push_controlled((p, q), modes, expr, owner)
                        .map_err(|e| core_err(line_no, head.col, e))?;
                }
                other => {
                    return err(
                        line_no,
                        head.col,
                        format!(
                            "unknown statement `{other}` (expected particles, init, param, gate, or cphase)"
                        ),
                    );
                }
            }
        }

        if !line_gates.is_empty() {
            circuit
                .as_mut()
                .expect("gate statements ensure the circuit")
                .push_singles(line_gates)
                .map_err(|e| core_err(line_no, 1, e))?;
        }
    }

    if phase == Phase::BeforeParticles {
        return err(1, 1, "a circuit starts with `particles <n>`");
    }
    ensure_circuit(&mut circuit, n_particles, &mut initial, &mut pending_params)?;
    Ok(circuit.expect("ensured above"))
}

fn all_labels(n: usize) -> String {
    (0..n).map(particle_label).collect()
}

fn parse_init(line: usize, tokens: &[Token], n: usize) -> PResult<StateVector> {
    let spec = match tokens.get(1) {
        Some(t) => t,
        None => return err(line, tokens[0].col, "usage: init <bits|bell|state ...>"),
    };
    match spec.text.as_str() {
        "bell" => {
            if n != 2 {
                return err(line, spec.col, "`init bell` needs exactly 2 particles");
            }
            if tokens.len() != 2 {
                return err(line, spec.col, "trailing tokens after `init bell`");
            }
            Ok(StateVector::bell())
        }
        "state" => {
            let dim = 1usize << n;
            let fields = &tokens[2..];
            if fields.len() != dim {
                return err(
                    line,
                    spec.col,
                    format!("`init state` needs {dim} amplitudes, found {}", fields.len()),
                );
            }
            let mut amps = Vec::with_capacity(dim);
            for tok in fields {
                amps.push(parse_amplitude(line, tok)?);
            }
            StateVector::from_amplitudes(n, amps).map_err(|e| core_err(line, spec.col, e))
        }
        bits if bits.chars().all(|c| c == '0' || c == '1') => {
            if bits.chars().count() != n {
                return err(
                    line,
                    spec.col,
                    format!("basis string needs {n} bits, found {}", bits.chars().count()),
                );
            }
            if tokens.len() != 2 {
                return err(line, spec.col, "trailing tokens after basis string");
            }
            let modes: Vec<u8> = bits.chars().map(|c| if c == '1' { 1 } else { 0 }).collect();
            Ok(StateVector::from_modes(&modes))
        }
        other => err(
            line,
            spec.col,
            format!("unknown initial state `{other}` (expected a bitstring, `bell`, or `state`)"),
        ),
    }
}

/// An amplitude field: `(re,im)` or a bare real.
fn parse_amplitude(line: usize, tok: &Token) -> PResult<C64> {
    let text = tok.text.as_str();
    if let Some(inner) = text.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
        let fields: Vec<&str> = inner.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return err(line, tok.col, "amplitude pairs look like `(re,im)`");
        }
        Ok(C64::new(
            parse_finite(line, tok.col, fields[0])?,
            parse_finite(line, tok.col, fields[1])?,
        ))
    } else {
        Ok(C64::new(parse_finite(line, tok.col, text)?, 0.0))
    }
}

// ---------------------------------------------------------------------------
// Canonical printer
// ---------------------------------------------------------------------------

fn fmt_f64(v: f64) -> String {
    // `{}` on f64 is the shortest representation that parses back exactly.
    format!("{v}")
}

fn fmt_linexpr(expr: &LinExpr, params: &[Param]) -> String {
    // Canonicalize: merge terms per parameter, drop zeros, sort.
    let mut terms: Vec<(f64, usize)> =
        expr.terms.iter().map(|&(c, id)| (c, id.0)).collect();
    terms.sort_by_key(|&(_, p)| p);
    let mut merged: Vec<(f64, usize)> = Vec::new();
    for (c, p) in terms {
        match merged.last_mut() {
            Some((mc, mp)) if *mp == p => *mc += c,
            _ => merged.push((c, p)),
        }
    }
    merged.retain(|&(c, _)| c != 0.0);

    let mut out = String::new();
    if merged.is_empty() || expr.constant != 0.0 {
        out.push_str(&fmt_f64(expr.constant));
    }
    for (c, p) in merged {
        let name = &params[p].name;
        if out.is_empty() {
            if c == 1.0 {
                out.push_str(name);
            } else if c == -1.0 {
                out.push('-');
                out.push_str(name);
            } else {
                out.push_str(&format!("{}*{name}", fmt_f64(c)));
            }
        } else if c == 1.0 {
            out.push_str(&format!("+{name}"));
        } else if c == -1.0 {
            out.push_str(&format!("-{name}"));
        } else if c < 0.0 {
            out.push_str(&format!("-{}*{name}", fmt_f64(-c)));
        } else {
            out.push_str(&format!("+{}*{name}", fmt_f64(c)));
        }
    }
    out
}

fn fmt_gate_form(form: &GateForm, params: &[Param]) -> String {
    match form {
        GateForm::Hadamard => "H".into(),
        GateForm::PauliX => "X".into(),
        GateForm::PauliZ => "Z".into(),
        GateForm::Phase(e) => format!("phase({})", fmt_linexpr(e, params)),
        GateForm::Euler { theta, phi, lambda } => format!(
            "u({},{},{})",
            fmt_linexpr(theta, params),
            fmt_linexpr(phi, params),
            fmt_linexpr(lambda, params)
        ),
        GateForm::Fixed(m) => {
            let e = &m.e;
            format!(
                "mat({} {} {} {} {} {} {} {})",
                fmt_f64(e[0][0].re),
                fmt_f64(e[0][0].im),
                fmt_f64(e[0][1].re),
                fmt_f64(e[0][1].im),
                fmt_f64(e[1][0].re),
                fmt_f64(e[1][0].im),
                fmt_f64(e[1][1].re),
                fmt_f64(e[1][1].im)
            )
        }
        GateForm::Polar { mags, phases } => format!(
            "pmat({},{},{},{},{},{},{},{})",
            fmt_f64(mags[0]),
            fmt_f64(mags[1]),
            fmt_f64(mags[2]),
            fmt_f64(mags[3]),
            fmt_linexpr(&phases[0], params),
            fmt_linexpr(&phases[1], params),
            fmt_linexpr(&phases[2], params),
            fmt_linexpr(&phases[3], params)
        ),
    }
}

/// Render the initial state in the simplest form that reproduces it.
fn fmt_init(state: &StateVector) -> String {
    let n = state.n_particles();
    let amps = state.amplitudes();
    if *state == StateVector::bell() {
        return "init bell".into();
    }
    if let Some(basis) = amps.iter().position(|a| (a - C64::new(1.0, 0.0)).norm() == 0.0) {
        if amps
            .iter()
            .enumerate()
            .all(|(i, a)| i == basis || (a.re == 0.0 && a.im == 0.0))
        {
            let bits: String = (0..n)
                .map(|p| if dualrail_core::state::mode_of(basis, p, n) == 1 { '1' } else { '0' })
                .collect();
            return format!("init {bits}");
        }
    }
    let fields: Vec<String> = amps
        .iter()
        .map(|a| format!("({},{})", fmt_f64(a.re), fmt_f64(a.im)))
        .collect();
    format!("init state {}", fields.join(" "))
}

/// Pretty-print a circuit in canonical form.  Parsing the output yields a
/// structurally identical circuit (see [`circuits_structurally_equal`]).
pub fn pretty_print(circuit: &Circuit) -> String {
    let n = circuit.n_particles();
    let params = circuit.params();
    let mut out = String::new();
    out.push_str(&format!("particles {n}\n"));
    out.push_str(&fmt_init(circuit.initial()));
    out.push('\n');
    for p in params {
        if p.owner == all_labels(n) {
            out.push_str(&format!("param {} {}\n", p.name, fmt_f64(p.value)));
        } else {
            out.push_str(&format!("param {} {} tag {}\n", p.name, fmt_f64(p.value), p.owner));
        }
    }
    for layer in circuit.layers() {
        match layer {
            CircuitLayer::Singles(gates) => {
                let mut sorted: Vec<_> = gates.iter().collect();
                sorted.sort_by_key(|g| g.target);
                let rendered: Vec<String> = sorted
                    .iter()
                    .map(|g| {
                        let mut s =
                            format!("gate {} {}", g.target, fmt_gate_form(&g.form, params));
                        if g.owner != particle_label(g.target) {
                            s.push_str(&format!(" tag {}", g.owner));
                        }
                        s
                    })
                    .collect();
                out.push_str(&rendered.join("; "));
                out.push('\n');
            }
            CircuitLayer::Controlled(g) => {
                let mut s = format!(
                    "cphase {} {} {}",
                    g.particles.0,
                    g.particles.1,
                    fmt_linexpr(&g.phase, params)
                );
                if g.controlled_modes != (1, 1) {
                    s.push_str(&format!(
                        " modes {} {}",
                        g.controlled_modes.0, g.controlled_modes.1
                    ));
                }
                let default_owner = format!(
                    "{}{}",
                    particle_label(g.particles.0),
                    particle_label(g.particles.1)
                );
                if g.owner != default_owner {
                    s.push_str(&format!(" tag {}", g.owner));
                }
                out.push_str(&s);
                out.push('\n');
            }
        }
    }
    out
}

/// Structural equality for round-trip checks: same register, initial
/// amplitudes, parameters, and layers (forms, owners, and matrices).
pub fn circuits_structurally_equal(a: &Circuit, b: &Circuit) -> bool {
    a.n_particles() == b.n_particles()
        && a.initial().amplitudes() == b.initial().amplitudes()
        && a.params() == b.params()
        && a.layers() == b.layers()
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIGURE_LIKE: &str = "\
# two-interaction circuit
particles 2
init 00
param t1 0.9 tag AB
param t2 1.3 tag AB
gate 0 u(1.2,0.3,0.7); gate 1 u(0.9,-0.4,0.2)
cphase 0 1 t1
gate 0 u(0.5,1.1,-0.3)
gate 1 u(0.8,0.2,0.4)
cphase 0 1 t2
gate 0 u(1.4,-0.2,0.6)
";

    #[test]
    fn parses_a_layered_circuit() {
        let circuit = parse_circuit(FIGURE_LIKE).unwrap();
        assert_eq!(circuit.n_particles(), 2);
        assert_eq!(circuit.layers().len(), 6);
        assert!(matches!(circuit.layers()[0], CircuitLayer::Singles(ref g) if g.len() == 2));
        assert!(matches!(circuit.layers()[1], CircuitLayer::Controlled(_)));
        assert_eq!(circuit.params().len(), 2);
    }

    #[test]
    fn round_trips_canonically() {
        let circuit = parse_circuit(FIGURE_LIKE).unwrap();
        let printed = pretty_print(&circuit);
        let reparsed = parse_circuit(&printed).unwrap();
        assert!(circuits_structurally_equal(&circuit, &reparsed), "{printed}");
        // And printing again is a fixed point.
        assert_eq!(printed, pretty_print(&reparsed));
    }

    #[test]
    fn round_trips_every_gate_form_and_init() {
        let text = "\
particles 2
init bell
param a 0.25 tag A
gate 0 H; gate 1 X
gate 0 Z
gate 1 phase(pi/2-2*a)
gate 0 mat(0.7071067811865476 0 0.7071067811865476 0 0.7071067811865476 0 -0.7071067811865476 0)
gate 1 pmat(0.7071067811865476,0.7071067811865476,0.7071067811865476,0.7071067811865476,a,0,0,pi-a) tag B
cphase 1 0 0.4+a modes 0 1 tag shared
";
        let circuit = parse_circuit(text).unwrap();
        let printed = pretty_print(&circuit);
        let reparsed = parse_circuit(&printed).unwrap();
        assert!(circuits_structurally_equal(&circuit, &reparsed), "{printed}");

        let state_text = "particles 1\ninit state (0.6,0) (0,-0.8)\ngate 0 H\n";
        let c2 = parse_circuit(state_text).unwrap();
        let printed2 = pretty_print(&c2);
        let reparsed2 = parse_circuit(&printed2).unwrap();
        assert!(circuits_structurally_equal(&c2, &reparsed2), "{printed2}");
    }

    #[test]
    fn expressions_support_linear_arithmetic() {
        let text = "\
particles 1
param a 0.5
param b 0.25
gate 0 phase(2*a - b + pi/4 - 0.75)
";
        let circuit = parse_circuit(text).unwrap();
        let CircuitLayer::Singles(gates) = &circuit.layers()[0] else { panic!() };
        let GateForm::Phase(e) = &gates[0].form else { panic!() };
        let expected = 2.0 * 0.5 - 0.25 + std::f64::consts::FRAC_PI_4 - 0.75;
        assert!((e.eval(circuit.params()) - expected).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_carry_line_and_column() {
        let bad = "particles 2\ninit 00\ngate 0 wobble\n";
        let e = parse_circuit(bad).unwrap_err();
        assert_eq!(e.line, 3);
        assert_eq!(e.col, 8);
        assert!(e.message.contains("wobble"));

        let bad2 = "particles 2\ngate 5 H\n";
        let e2 = parse_circuit(bad2).unwrap_err();
        assert_eq!(e2.line, 2);
        assert!(e2.message.contains("out of range"));
    }

    #[test]
    fn rejects_malformed_documents() {
        // These exercise ordering rules, bad numbers, and core validation.
        let cases = [
            "gate 0 H\n",
            "particles 0\n",
            "particles 13\n",
            "particles 2\nparticles 2\n",
            "particles 2\ngate 0 H\ninit 00\n",
            "particles 2\ninit 000\n",
            "particles 2\ninit bell extra\n",
            "particles 1\ninit state 1 0 0\n",
            "particles 1\ninit state (0.5,0) (0.5,0)\n", // not normalized
            "particles 2\ngate 0 mat(1 0 0 0 0 0 0.9 0)\n", // not unitary
            "particles 2\ngate 0 phase(q)\n",            // unknown param
            "particles 2\nparam pi 1\n",
            "particles 2\nparam a 1\nparam a 2\n",
            "particles 2\nparam a 1e999\n",
            "particles 2\ngate 0 phase(a*a)\n",
            "particles 2\ngate 0 H; cphase 0 1 0.3\n",
            "particles 2\ngate 0 H; gate 0 X\n", // duplicate target in layer
            "particles 2\ncphase 0 0 0.5\n",
            "particles 2\ncphase 0 1 0.5 modes 2 1\n",
            "particles 2\ngate 0 H tag\n",
            "particles 2\ngate 0 u(1,2)\n",
            "particles 2\ngate 0 H extra\n",
            "particles 2\ninit 00 ;\n",
        ];
        for case in cases {
            assert!(parse_circuit(case).is_err(), "should reject: {case:?}");
        }
    }

    #[test]
    fn comments_blank_lines_and_spacing_are_ignored() {
        let text = "  particles 2  # width\n\n# a comment line\n  init  00\ngate 0 H   ;   gate 1 H\n";
        let circuit = parse_circuit(text).unwrap();
        assert_eq!(circuit.layers().len(), 1);
    }
}
