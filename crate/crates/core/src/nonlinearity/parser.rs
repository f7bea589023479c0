//! Text format for system specs.
//!
//! ```text
//! [system]
//! dimension = 1
//! p = 2
//! alpha = [1.0, 1.0]
//! gamma = [1.0, 0.5]
//! beta  = [0.0, 0.0]
//!
//! [potential]
//! # one line per monomial: coeff_re coeff_im : a1 b1 | a2 b2 | ...
//! term = 1.0 0.0 : 0 2 | 1 0
//! ```

use super::{Monomial, Potential, SystemSpec};
use crate::error::CoreError;
use crate::Complex;

struct Cursor<'a> {
    line_no: usize,
    text: &'a str,
}

impl Cursor<'_> {
    fn err(&self, col: usize, msg: impl Into<String>) -> CoreError {
        CoreError::Syntax {
            line: self.line_no,
            col,
            msg: msg.into(),
        }
    }

    fn col_of(&self, token: &str) -> usize {
        // Byte offset of the token within the line, 1-based; falls back to 1.
        match self.text.find(token) {
            Some(off) => off + 1,
            None => 1,
        }
    }
}

fn parse_float_list(cur: &Cursor, value: &str) -> Result<Vec<f64>, CoreError> {
    let trimmed = value.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| cur.err(cur.col_of(trimmed), "expected a bracketed list [a, b, ...]"))?;
    inner
        .split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| cur.err(cur.col_of(tok), format!("invalid float: {tok:?}")))
        })
        .collect()
}

fn parse_term(cur: &Cursor, value: &str) -> Result<(Complex, Vec<(u32, u32)>), CoreError> {
    let (coeff_part, exps_part) = value
        .split_once(':')
        .ok_or_else(|| cur.err(1, "term needs the form: coeff_re coeff_im : a1 b1 | ..."))?;
    let coeffs: Vec<&str> = coeff_part.split_whitespace().collect();
    if coeffs.len() != 2 {
        return Err(cur.err(
            cur.col_of(coeff_part.trim()),
            "expected exactly two coefficient values (re im) before ':'",
        ));
    }
    let re: f64 = coeffs[0]
        .parse()
        .map_err(|_| cur.err(cur.col_of(coeffs[0]), format!("invalid float: {:?}", coeffs[0])))?;
    let im: f64 = coeffs[1]
        .parse()
        .map_err(|_| cur.err(cur.col_of(coeffs[1]), format!("invalid float: {:?}", coeffs[1])))?;
    let mut exps = Vec::new();
    for pair in exps_part.split('|') {
        let toks: Vec<&str> = pair.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(cur.err(
                cur.col_of(pair.trim()),
                "each exponent pair needs two nonnegative integers: a b",
            ));
        }
        let a: u32 = toks[0]
            .parse()
            .map_err(|_| cur.err(cur.col_of(toks[0]), format!("invalid exponent: {:?}", toks[0])))?;
        let b: u32 = toks[1]
            .parse()
            .map_err(|_| cur.err(cur.col_of(toks[1]), format!("invalid exponent: {:?}", toks[1])))?;
        exps.push((a, b));
    }
    Ok((Complex::new(re, im), exps))
}

/// Parse the text format into a fully populated spec (f and sigma derived).
pub fn parse_spec(text: &str) -> Result<SystemSpec, CoreError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        System,
        Potential,
    }
    let mut section = Section::None;
    let mut dimension: Option<usize> = None;
    let mut p: Option<u32> = None;
    let mut alpha: Option<Vec<f64>> = None;
    let mut gamma: Option<Vec<f64>> = None;
    let mut beta: Option<Vec<f64>> = None;
    let mut terms: Vec<(Complex, Vec<(u32, u32)>)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let cur = Cursor {
            line_no: idx + 1,
            text: raw,
        };
        let line = match raw.split_once('#') {
            Some((before, _)) => before,
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "system" => Section::System,
                "potential" => Section::Potential,
                other => return Err(cur.err(1, format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| cur.err(1, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();
        match section {
            Section::None => return Err(cur.err(1, "key outside any section")),
            Section::System => match key {
                "dimension" => {
                    let n: usize = value.parse().map_err(|_| {
                        cur.err(cur.col_of(value), format!("invalid dimension: {value:?}"))
                    })?;
                    dimension = Some(n);
                }
                "p" => {
                    let v: u32 = value.parse().map_err(|_| {
                        cur.err(cur.col_of(value), format!("invalid integer p: {value:?}"))
                    })?;
                    p = Some(v);
                }
                "alpha" => alpha = Some(parse_float_list(&cur, value)?),
                "gamma" => gamma = Some(parse_float_list(&cur, value)?),
                "beta" => beta = Some(parse_float_list(&cur, value)?),
                other => return Err(cur.err(cur.col_of(other), format!("unknown key {other:?}"))),
            },
            Section::Potential => match key {
                "term" => terms.push(parse_term(&cur, value)?),
                other => return Err(cur.err(cur.col_of(other), format!("unknown key {other:?}"))),
            },
        }
    }

    let missing = |what: &str| CoreError::Syntax {
        line: 0,
        col: 0,
        msg: format!("missing required field: {what}"),
    };
    let n = dimension.ok_or_else(|| missing("dimension"))?;
    let p = p.ok_or_else(|| missing("p"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let gamma = gamma.ok_or_else(|| missing("gamma"))?;
    let beta = beta.ok_or_else(|| missing("beta"))?;
    if terms.is_empty() {
        return Err(CoreError::EmptyPotential);
    }
    let l = alpha.len();
    let monomials: Vec<Monomial> = terms
        .into_iter()
        .map(|(coeff, exps)| Monomial { coeff, exps })
        .collect();
    for m in &monomials {
        if m.exps.len() != l {
            return Err(CoreError::DimensionMismatch(format!(
                "term has {} exponent pairs but alpha has length {}",
                m.exps.len(),
                l
            )));
        }
    }
    let potential = Potential::new(l, p, monomials)?;
    SystemSpec::new(n, p, alpha, gamma, beta, potential)
}

/// Render a spec back into the text format; parse(serialize(s)) == s.
pub fn serialize_spec(spec: &SystemSpec) -> String {
    let list = |v: &[f64]| {
        let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
        format!("[{}]", parts.join(", "))
    };
    let mut out = String::new();
    out.push_str("[system]\n");
    out.push_str(&format!("dimension = {}\n", spec.n));
    out.push_str(&format!("p = {}\n", spec.p));
    out.push_str(&format!("alpha = {}\n", list(&spec.alpha)));
    out.push_str(&format!("gamma = {}\n", list(&spec.gamma)));
    out.push_str(&format!("beta = {}\n", list(&spec.beta)));
    out.push_str("\n[potential]\n");
    for t in &spec.potential.terms {
        let exps: Vec<String> = t
            .exps
            .iter()
            .map(|&(a, b)| format!("{a} {b}"))
            .collect();
        out.push_str(&format!(
            "term = {} {} : {}\n",
            t.coeff.re,
            t.coeff.im,
            exps.join(" | ")
        ));
    }
    out
}
