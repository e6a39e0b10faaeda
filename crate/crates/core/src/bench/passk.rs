use super::BenchError;

/// Unbiased pass@k: `1 - C(n-c, k) / C(n, k)`, evaluated as the product
/// `1 - prod_{i<k} (n-c-i)/(n-i)` so it stays finite for large `n`.
pub fn pass_at_k(n: u64, c: u64, k: u64) -> Result<f64, BenchError> {
    if c > n || k == 0 || k > n {
        return Err(BenchError::InvalidArgs(format!("pass_at_k needs 0 <= c <= n and 1 <= k <= n, got n={n} c={c} k={k}")));
    }
    if n - c < k {
        return Ok(1.0);
    }
    let mut miss = 1.0f64;
    for i in 0..k {
        miss *= (n - c - i) as f64 / (n - i) as f64;
    }
    Ok(1.0 - miss)
}
