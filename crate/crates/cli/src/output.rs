use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context};

/// Fixed 17-significant-digit formatting.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// CSV text with a header line and `\n` line endings.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// Writes `text` to `out` and, if requested, to stdout.
pub fn emit(text: &str, out: Option<&Path>, stdout: bool) -> anyhow::Result<()> {
    if out.is_none() && !stdout {
        bail!("no output selected; pass --out <file> or --stdout");
    }
    if let Some(path) = out {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    if stdout {
        std::io::stdout().lock().write_all(text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_is_fixed() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(f64::INFINITY), "inf");
        assert_eq!(csv(&["a", "b"], &[vec!["1".into(), "2".into()]]), "a,b\n1,2\n");
    }
}
