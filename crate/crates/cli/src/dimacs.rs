//! DIMACS CNF input, with the QDIMACS `a` line for a universal prefix.
//!
//! ```text
//! c x1 is universal
//! p cnf 2 2
//! a 1 0
//! e 2 0
//! 1 2 2 0
//! -1 -2 -2 0
//! ```
//!
//! Clauses with fewer than three literals are padded by repeating the last
//! one. The universal variables must be exactly 1..=k.

use thiserror::Error;

use tas_core::reductions::Formula;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("SyntaxError at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("ValidationError: {0}")]
    Validation(String),
}

pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses: Vec<[i64; 3]> = Vec::new();
    let mut universal: Vec<i64> = Vec::new();
    let mut pending: Vec<i64> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let err = |column: usize, message: String| FormulaError::Syntax { line: ln + 1, column, message };
        let trimmed = line.trim_start();
        let indent = line.len() - trimmed.len();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('p') {
            let f: Vec<&str> = rest.split_whitespace().collect();
            let parsed = match f[..] {
                ["cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| err(indent + 1, "expected `p cnf <vars> <clauses>`".into()))?);
            continue;
        }
        let (quant, body, offset) = match trimmed.as_bytes()[0] {
            b'a' | b'e' => (Some(trimmed.as_bytes()[0]), &trimmed[1..], indent + 1),
            _ => (None, trimmed, indent),
        };
        if header.is_none() {
            return Err(err(indent + 1, "clause before the `p cnf` header".into()));
        }
        let mut col = offset;
        let mut lits = Vec::new();
        for tok in body.split(' ') {
            col += 1;
            if tok.is_empty() {
                continue;
            }
            let v: i64 = tok.parse().map_err(|_| err(col, format!("`{tok}` is not an integer")))?;
            lits.push(v);
            col += tok.len();
        }
        match quant {
            Some(b'a') => universal.extend(lits.into_iter().take_while(|&v| v != 0)),
            Some(_) => {}
            None => {
                for v in lits {
                    if v != 0 {
                        pending.push(v);
                        continue;
                    }
                    clauses.push(pad(&pending).ok_or_else(|| err(1, "clauses hold one to three literals".into()))?);
                    pending.clear();
                }
            }
        }
    }
    if !pending.is_empty() {
        clauses.push(pad(&pending).ok_or_else(|| FormulaError::Validation("clauses hold one to three literals".into()))?);
    }
    let (vars, count) = header.ok_or_else(|| FormulaError::Validation("MissingHeader: no `p cnf` line".into()))?;
    if count != clauses.len() {
        return Err(FormulaError::Validation(format!(
            "ClauseCount: header declares {count} clauses, found {}",
            clauses.len()
        )));
    }
    let mut sorted = universal.clone();
    sorted.sort();
    let k = sorted.len();
    if sorted.iter().zip(1..).any(|(&v, i)| v != i) {
        return Err(FormulaError::Validation("UniversalPrefix: universal variables must be 1..=k".into()));
    }
    Formula::from_ints(vars, &clauses, k).map_err(|e| FormulaError::Validation(e.to_string()))
}

fn pad(lits: &[i64]) -> Option<[i64; 3]> {
    match *lits {
        [a] => Some([a, a, a]),
        [a, b] => Some([a, b, b]),
        [a, b, c] => Some([a, b, c]),
        _ => None,
    }
}

/// The formula in DIMACS form, with an `a` line when it has a universal prefix.
pub fn write_formula(f: &Formula) -> String {
    let mut out = format!("p cnf {} {}\n", f.num_vars, f.clauses.len());
    if f.forall_prefix > 0 {
        let vars: Vec<String> = (1..=f.forall_prefix).map(|v| v.to_string()).collect();
        out += &format!("a {} 0\n", vars.join(" "));
    }
    for c in &f.clauses {
        let lits: Vec<String> = c.iter().map(|l| l.to_int().to_string()).collect();
        out += &format!("{} 0\n", lits.join(" "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_prefix_and_pads() {
        let f = parse_formula("c demo\np cnf 2 2\na 1 0\ne 2 0\n1 2 0\n-1 -2 -2 0\n").unwrap();
        assert_eq!(f.forall_prefix, 1);
        assert_eq!(f.clauses.len(), 2);
        assert_eq!(f.clauses[0].map(|l| l.to_int()), [1, 2, 2]);
        assert_eq!(parse_formula(&write_formula(&f)).unwrap(), f);
    }

    #[test]
    fn bad_token_has_position() {
        let err = parse_formula("p cnf 1 1\n1 x 0\n").unwrap_err();
        assert_eq!(err, FormulaError::Syntax { line: 2, column: 3, message: "`x` is not an integer".into() });
    }

    #[test]
    fn out_of_range_variable() {
        let err = parse_formula("p cnf 1 1\n1 2 1 0\n").unwrap_err();
        assert!(err.to_string().contains("MalformedFormula"));
    }
}
