// Split the naturals into two halves that both stay large for a small
// family of enumerations, then audit the halves.

use std::sync::Arc;
use thinht::largeness::{make_g, split, BinaryFn, LargeSet, Pairing};
use thinht::lll::{LllParams, Ratio};
use thinht::oracle::{EnumFamily, OracleTrace};

pub fn main() {
    let window = 1024;
    let fam = EnumFamily::new(vec![
        OracleTrace::new(window - 1, [(3, 0), (10, 4), (11, 9)]).unwrap(),
        OracleTrace::new(window - 1, [(7, 100)]).unwrap(),
    ]);
    let params = LllParams::minimal(Ratio::HALF, 1_000_000, 4).unwrap();
    let g = Arc::new(make_g(params.m as u64, Pairing::Cantor));
    println!("g(0,1) = {}, g(1,1) = {}", g.eval(0, 1), g.eval(1, 1));

    let out = split(
        &LargeSet::Naturals,
        &Arc::new(BinaryFn::Identity),
        &g,
        &fam,
        &params,
        window,
        2,
    )
    .unwrap();
    let half0 = (0..window).filter(|&n| out.d0.contains(n)).count();
    println!(
        "{} blocks, |D0| = {half0}, |D1| = {}",
        out.blocks.len(),
        window as usize - half0
    );
    for c in &out.audit.cells {
        println!(
            "  cell (e={}, k={}): {} audited stages, min hits {:?}",
            c.e, c.k, c.audited_stages, c.min_hits
        );
    }
    println!("audit passes: {}", out.audit.pass);
}
