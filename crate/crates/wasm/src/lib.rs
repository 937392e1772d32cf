//! Browser bindings. Each export runs the matching `rrcheck` command and
//! returns its output; usage errors come back as `Err` with the message.

use oriented_rr::cli::run_cli;
use wasm_bindgen::prelude::*;

fn run(args: &[&str]) -> Result<String, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run_cli(std::iter::once("rrcheck").chain(args.iter().copied()), &mut out, &mut err);
    match code {
        // 1 is a failed verification, which still carries a report
        0 | 1 => Ok(String::from_utf8_lossy(&out).into_owned()),
        _ => Err(String::from_utf8_lossy(&err).trim().to_owned()),
    }
}

/// Associated series of `phi` (e.g. `psi:2`, `ch`, `ch-eps:3`) probed on `P^order`.
#[wasm_bindgen]
pub fn associated_series(phi: &str, order: usize, p: usize) -> Result<String, String> {
    run(&["assoc", "--phi", phi, "--order", &order.to_string(), "--p", &p.to_string()])
}

/// `chi(P^d, O(n))` for `n_min <= n <= n_max` as a JSON table.
#[wasm_bindgen]
pub fn chi_table(d: u32, n_min: i32, n_max: i32) -> Result<String, String> {
    let (d, lo, hi) = (d.to_string(), n_min.to_string(), n_max.to_string());
    run(&["--format", "json", "table", "chi", "--d", &d, "--n-min", &lo, "--n-max", &hi])
}

/// Text report of the five cube faces on `space` (e.g. `2,1`).
#[wasm_bindgen]
pub fn verify_cube(space: &str, j: i32) -> Result<String, String> {
    run(&["verify", "cube", "--space", space, "--j", &j.to_string()])
}
