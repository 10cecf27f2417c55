//! `.um` text matrices: a dimension line followed by rows of `a+bj` entries.

use super::{Matrix, NumericsError, Result, C64};

/// Formats `z` as `a+bj` / `a-bj` using the shortest round-trip decimal.
pub fn format_complex(z: C64) -> String {
    if z.im.is_sign_negative() {
        format!("{}-{}j", z.re, -z.im)
    } else {
        format!("{}+{}j", z.re, z.im)
    }
}

/// Parses `a+bj`, `a-bj`, `bj`, a bare real, optionally wrapped in parentheses.
pub fn parse_complex(token: &str) -> Option<C64> {
    let t = token.trim();
    let t = t
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .unwrap_or(t);
    if t.is_empty() {
        return None;
    }
    let Some(body) = t.strip_suffix(['j', 'J']) else {
        return t.parse::<f64>().ok().map(|re| C64::new(re, 0.0));
    };
    // Split at the last sign that is not a leading sign or an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (body[..i].parse::<f64>().ok()?, parse_imag(&body[i..])?),
        None => (0.0, parse_imag(body)?),
    };
    Some(C64::new(re, im))
}

fn parse_imag(s: &str) -> Option<f64> {
    match s {
        "" | "+" => Some(1.0),
        "-" => Some(-1.0),
        _ => s.parse::<f64>().ok(),
    }
}

/// Parses a `.um` document. Line numbers in errors are 1-based.
pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first_no, first) = lines.next().ok_or(NumericsError::Parse {
        line: 1,
        msg: "empty input".into(),
    })?;
    let n: usize = first.parse().map_err(|_| NumericsError::Parse {
        line: first_no,
        msg: format!("expected dimension, found `{first}`"),
    })?;
    if n == 0 {
        return Err(NumericsError::Parse {
            line: first_no,
            msg: "dimension must be positive".into(),
        });
    }
    let mut data = Vec::with_capacity(n * n);
    let mut last_line = first_no;
    for row in 0..n {
        let (no, line) = lines.next().ok_or(NumericsError::Parse {
            line: last_line + 1,
            msg: format!("expected {n} rows, found {row}"),
        })?;
        last_line = no;
        let entries: Vec<&str> = line.split_whitespace().collect();
        if entries.len() != n {
            return Err(NumericsError::Parse {
                line: no,
                msg: format!("expected {n} entries, found {}", entries.len()),
            });
        }
        for tok in entries {
            let z = parse_complex(tok).ok_or_else(|| NumericsError::Parse {
                line: no,
                msg: format!("bad complex entry `{tok}`"),
            })?;
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(NumericsError::Parse {
                    line: no,
                    msg: format!("non-finite entry `{tok}`"),
                });
            }
            data.push(z);
        }
    }
    if let Some((no, _)) = lines.next() {
        return Err(NumericsError::Parse {
            line: no,
            msg: format!("trailing content after {n} rows"),
        });
    }
    Matrix::from_vec(n, n, data)
}

pub fn write_matrix(m: &Matrix) -> String {
    let mut out = format!("{}\n", m.rows());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_python_style_entries() {
        assert_eq!(parse_complex("0.3125+0.5j"), Some(C64::new(0.3125, 0.5)));
        assert_eq!(
            parse_complex("-0.75-0.0625j"),
            Some(C64::new(-0.75, -0.0625))
        );
        assert_eq!(parse_complex("0.125+0.375j"), Some(C64::new(0.125, 0.375)));
        assert_eq!(parse_complex("1"), Some(C64::new(1.0, 0.0)));
        assert_eq!(parse_complex("-2.5"), Some(C64::new(-2.5, 0.0)));
        assert_eq!(parse_complex("1e-3+2E-4j"), Some(C64::new(1e-3, 2e-4)));
        assert_eq!(parse_complex("-1.5e+2-3e-1j"), Some(C64::new(-150.0, -0.3)));
        assert_eq!(parse_complex("-1j"), Some(C64::new(0.0, -1.0)));
        assert_eq!(parse_complex("j"), Some(C64::new(0.0, 1.0)));
        assert_eq!(parse_complex("(0.5-0.5j)"), Some(C64::new(0.5, -0.5)));
        assert_eq!(parse_complex("abc"), None);
        assert_eq!(parse_complex("1+xj"), None);
    }

    #[test]
    fn format_round_trips() {
        for z in [
            C64::new(0.1, -0.2),
            C64::new(-1.0 / 3.0, 2.0f64.sqrt()),
            C64::new(0.0, -0.0),
            C64::new(1e-300, 5e300),
        ] {
            let s = format_complex(z);
            let back = parse_complex(&s).unwrap();
            assert_eq!(back.re.to_bits(), z.re.to_bits(), "{s}");
            assert_eq!(back.im.to_bits(), z.im.to_bits(), "{s}");
        }
        assert_eq!(format_complex(C64::new(1.0, 0.0)), "1+0j");
        assert_eq!(format_complex(C64::new(0.5, -0.25)), "0.5-0.25j");
    }

    #[test]
    fn matrix_document_round_trip() {
        let m = Matrix::from_rows(&[
            [C64::new(0.0, 1.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)],
        ])
        .unwrap();
        let text = write_matrix(&m);
        assert_eq!(text, "2\n0+1j 0+0j\n0+0j -1+0j\n");
        assert_eq!(parse_matrix(&text).unwrap(), m);
    }

    #[test]
    fn reports_line_numbers() {
        let err = parse_matrix("2\n1 0\n0 1 0\n").unwrap_err();
        assert!(matches!(err, NumericsError::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix("2\n1 0\n").unwrap_err();
        assert!(matches!(err, NumericsError::Parse { line: 3, .. }), "{err}");
        let err = parse_matrix("x\n").unwrap_err();
        assert!(matches!(err, NumericsError::Parse { line: 1, .. }));
        let err = parse_matrix("1\n1\n1\n").unwrap_err();
        assert!(matches!(err, NumericsError::Parse { line: 3, .. }));
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n1 0\n0 nan\n").is_err());
    }
}
