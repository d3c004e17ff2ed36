//! wasm-bindgen entry points for the static demo page in `www/`.
//!
//! Every function returns CSV text, so the page only splits lines. Errors come
//! back as strings, which keeps the crate callable from native tests.

use polylab::enumerate::enumerate_counts;
use polylab::limitlaws::{airy_mgf, law_moment, universal_ratio, LimitLaw};
use polylab::scaling::scaling_error_scan;
use polylab::PolygonClass;
use wasm_bindgen::prelude::*;

/// Largest perimeter the page enumerates; beyond this a browser tab stalls.
pub const MAX_DEMO_M: u32 = 24;

fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',').map(|t| t.trim().parse::<f64>().map_err(|_| format!("not a number: {t:?}"))).collect()
}

/// `m,count` with the number of polygons of each half-perimeter.
#[wasm_bindgen]
pub fn row_sums(model: &str, max_m: u32) -> Result<String, String> {
    let class: PolygonClass = model.parse().map_err(|e| format!("{e}"))?;
    if max_m > MAX_DEMO_M {
        return Err(format!("max m is capped at {MAX_DEMO_M} in the demo"));
    }
    let table = enumerate_counts(class, max_m).map_err(|e| e.to_string())?;
    let mut out = String::from("m,count\n");
    for m in 0..=max_m {
        out.push_str(&format!("{m},{}\n", table.row_sum(m)));
    }
    Ok(out)
}

/// `k,moment,ratio,mgf` for the Airy law: `E[Y^k]`, `E[Y^k]/E[Y]^k` and
/// `E[e^{−tY}]` at `t = k/4`.
#[wasm_bindgen]
pub fn airy_table(k_max: u32) -> Result<String, String> {
    if k_max > 40 {
        return Err("k_max is capped at 40".into());
    }
    let mut out = String::from("k,moment,ratio,mgf\n");
    for k in 0..=k_max {
        let mgf = airy_mgf(k as f64 / 4.0).map_err(|e| e.to_string())?.value;
        let moment = law_moment(&LimitLaw::Airy, k).to_f64();
        out.push_str(&format!("{k},{moment:.12e},{:.12e},{mgf:.12e}\n", universal_ratio(k).to_f64()));
    }
    Ok(out)
}

/// Scaling-function error scan over comma-separated `s` and `ε` grids.
#[wasm_bindgen]
pub fn scaling_scan(model: &str, s: &str, eps: &str) -> Result<String, String> {
    let class: PolygonClass = model.parse().map_err(|e| format!("{e}"))?;
    let (s, eps) = (parse_list(s)?, parse_list(eps)?);
    if s.len() * eps.len() > 64 {
        return Err("at most 64 grid points".into());
    }
    scaling_error_scan(class, &s, &eps).map(|t| t.to_csv()).map_err(|e| e.to_string())
}
