//! Built-in source descriptions: `[coef*]mode:m` terms joined by `+`,
//! for example `mode:2+0.5i*mode:-9` or `(1-2i)*mode:3`.

use anyhow::{bail, Context, Result};
use num_complex::Complex64;

pub fn parse_modes(spec: &str) -> Result<Vec<(i64, Complex64)>> {
    let mut terms = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in spec.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            '+' if depth == 0 && i > start => {
                terms.push(&spec[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    terms.push(&spec[start..]);
    terms.into_iter().map(parse_term).collect()
}

fn parse_term(term: &str) -> Result<(i64, Complex64)> {
    let term = term.trim();
    let (coef, mode) = match term.rsplit_once('*') {
        Some((c, m)) => (parse_coef(c)?, m.trim()),
        None => (Complex64::new(1.0, 0.0), term),
    };
    let Some(m) = mode.strip_prefix("mode:") else {
        bail!("source term {term:?} must look like [coef*]mode:<integer>");
    };
    let m = m
        .trim()
        .parse()
        .with_context(|| format!("bad mode index in {term:?}"))?;
    Ok((m, coef))
}

fn parse_coef(c: &str) -> Result<Complex64> {
    let c = c.trim();
    let c = c
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(c);
    c.parse()
        .map_err(|_| anyhow::anyhow!("bad coefficient {c:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sums_of_modes() {
        let m = parse_modes("mode:2+0.5i*mode:-9").unwrap();
        assert_eq!(
            m,
            vec![
                (2, Complex64::new(1.0, 0.0)),
                (-9, Complex64::new(0.0, 0.5))
            ]
        );
        let m = parse_modes("(1-2i)*mode:3").unwrap();
        assert_eq!(m, vec![(3, Complex64::new(1.0, -2.0))]);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_modes("gauss").is_err());
        assert!(parse_modes("x*mode:1").is_err());
        assert!(parse_modes("mode:1.5").is_err());
    }
}
