//! Flag value parsers.

use partinv::LRule;

/// Accepts `p/q` or a decimal in `(0, 1]`.
pub fn ratio(text: &str) -> Result<f64, String> {
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {text:?}"));
            }
            p / q
        }
        None => text.trim().parse().map_err(|_| format!("not a number: {text:?}"))?,
    };
    if !(value > 0.0 && value <= 1.0) {
        return Err(format!("{text} is outside (0, 1]"));
    }
    Ok(value)
}

/// `k` (L = K), `maxNN` (L = max(K, N.N M), e.g. `max08`) or `lN` (fixed L = N).
pub fn l_rule(text: &str) -> Result<LRule, String> {
    if text == "k" {
        return Ok(LRule::Sparsity);
    }
    if let Some(digits) = text.strip_prefix("max") {
        // implied decimal point after the first digit: 08 -> 0.8, 075 -> 0.75
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("expected maxNN, got {text:?}"));
        }
        let fraction: f64 = format!("{}.{}", &digits[..1], &digits[1..])
            .parse()
            .map_err(|_| format!("bad fraction in {text:?}"))?;
        if !(fraction > 0.0 && fraction <= 1.0) {
            return Err(format!("{text}: fraction must be in (0, 1]"));
        }
        return Ok(LRule::MaxOfSparsityAnd(fraction));
    }
    if let Some(n) = text.strip_prefix('l') {
        let l: usize = n.parse().map_err(|_| format!("expected lN, got {text:?}"))?;
        return Ok(LRule::Fixed(l));
    }
    Err(format!("unknown L rule {text:?}; use k, maxNN or lN"))
}

pub fn kernel(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("bad kernel tap {t:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios() {
        assert_eq!(ratio("14/16").unwrap(), 0.875);
        assert_eq!(ratio("0.9").unwrap(), 0.9);
        assert!(ratio("0").is_err());
        assert!(ratio("3/2").is_err());
        assert!(ratio("1/0").is_err());
        assert!(ratio("x").is_err());
    }

    #[test]
    fn l_rules() {
        assert_eq!(l_rule("k").unwrap(), LRule::Sparsity);
        assert_eq!(l_rule("max08").unwrap(), LRule::MaxOfSparsityAnd(0.8));
        assert_eq!(l_rule("max075").unwrap(), LRule::MaxOfSparsityAnd(0.75));
        assert_eq!(l_rule("max1").unwrap(), LRule::MaxOfSparsityAnd(1.0));
        assert!(l_rule("max8").is_err());
        assert_eq!(l_rule("l40").unwrap(), LRule::Fixed(40));
        assert!(l_rule("max").is_err());
        assert!(l_rule("half").is_err());
    }

    #[test]
    fn kernels() {
        assert_eq!(kernel("1").unwrap(), vec![1.0]);
        assert_eq!(kernel("0.1, 0.8,0.1").unwrap(), vec![0.1, 0.8, 0.1]);
        assert!(kernel("a").is_err());
    }
}
