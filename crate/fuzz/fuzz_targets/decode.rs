#![no_main]

//! Input: two shape bytes, a p byte, then little-endian f64s filling A
//! (row-major) and y. Decoding may fail but must not panic, and a
//! returned objective must match the returned iterate.

use libfuzzer_sys::fuzz_target;
use lpdecode::decoder::{decode, lp_objective, DecoderConfig};
use lpdecode::SeedSpec;
use nalgebra::{DMatrix, DVector};

fuzz_target!(|data: &[u8]| {
    if data.len() < 3 {
        return;
    }
    let n = 1 + data[0] as usize % 3;
    let m = n + data[1] as usize % 6;
    let p = (1 + data[2] as usize % 20) as f64 / 20.0;
    let values: Vec<f64> = data[3..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .filter(|v| v.is_finite() && v.abs() < 1e6)
        .collect();
    if values.len() < m * n + m {
        return;
    }
    let a = DMatrix::from_row_slice(m, n, &values[..m * n]);
    let y = DVector::from_column_slice(&values[m * n..m * n + m]);
    let cfg = DecoderConfig { max_outer: 6, max_inner: 20, ..DecoderConfig::with_p(p) };
    if let Ok(res) = decode(&a, &y, &cfg, SeedSpec::new(0, 1)) {
        let r = &y - &a * DVector::from_column_slice(&res.x_hat);
        assert_eq!(res.objective, lp_objective(r.as_slice(), p));
    }
});
