//! Numeric list arguments: `a,b,c` or `lo:hi:n` (n evenly spaced points,
//! both ends included).

pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("grid is empty".into());
    }
    if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected lo:hi:n, got {s:?}"));
        };
        let lo = parse_number(lo)?;
        let hi = parse_number(hi)?;
        let n: usize = n
            .trim()
            .parse()
            .map_err(|_| format!("point count must be a positive integer, got {n:?}"))?;
        if n == 0 {
            return Err("grid needs at least one point".into());
        }
        if n == 1 {
            return Ok(vec![lo]);
        }
        let step = (hi - lo) / (n - 1) as f64;
        return Ok((0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect());
    }
    s.split(',').map(parse_number).collect()
}

fn parse_number(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(v)
}

pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("list is empty".into());
    }
    s.split(',')
        .map(|p| p.trim().parse().map_err(|_| format!("not a nonnegative integer: {p:?}")))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_and_ranges() {
        assert_eq!(parse_grid("1, 2.5,3").unwrap(), vec![1.0, 2.5, 3.0]);
        assert_eq!(parse_grid("0:1:5").unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("-5:35:9").unwrap()[8], 35.0);
        assert_eq!(parse_grid("2:9:1").unwrap(), vec![2.0]);
        assert_eq!(parse_usize_list("2,5,10").unwrap(), vec![2, 5, 10]);
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "  ", "1,,2", "0:1", "0:1:0", "a:1:2", "nan", "1:2:x"] {
            assert!(parse_grid(bad).is_err(), "{bad:?}");
        }
        assert!(parse_usize_list("").is_err());
        assert!(parse_usize_list("-1").is_err());
    }
}
