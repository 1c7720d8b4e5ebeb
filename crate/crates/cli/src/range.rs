use crate::error::{usage, Result};

/// Longest sweep accepted from the command line.
pub const MAX_POINTS: u64 = 100_000;

/// Parses `A:B:C` (inclusive `A..=B` in steps of `C`) or a single `N`.
pub fn parse_n_range(s: &str) -> Result<Vec<u32>> {
    let parts: Vec<&str> = s.trim().split(':').collect();
    let num = |t: &str, what: &str| -> Result<u32> {
        t.trim()
            .parse::<u32>()
            .or_else(|_| usage(format!("n range {s:?}: bad {what} {t:?}")))
    };
    let (a, b, c) = match parts.as_slice() {
        [n] => {
            let n = num(n, "value")?;
            (n, n, 1)
        }
        [a, b, c] => (num(a, "start")?, num(b, "stop")?, num(c, "step")?),
        _ => return usage(format!("n range {s:?}: expected A:B:C or N")),
    };
    if c == 0 {
        return usage(format!("n range {s:?}: step must be at least 1"));
    }
    if a == 0 {
        return usage(format!("n range {s:?}: blocklengths start at 1"));
    }
    if a > b {
        return usage(format!("n range {s:?} is empty"));
    }
    let count = (b - a) as u64 / c as u64 + 1;
    if count > MAX_POINTS {
        return usage(format!(
            "n range {s:?} has {count} points, limit {MAX_POINTS}"
        ));
    }
    Ok((0..count).map(|i| a + (i * c as u64) as u32).collect())
}
