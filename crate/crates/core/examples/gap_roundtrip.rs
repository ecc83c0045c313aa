// Encode a staged enumeration with the gap coloring and read membership
// back out of a solution window.

use thinht::binum::{BinNum, FsQuery};
use thinht::gap;
use thinht::oracle::OracleTrace;

pub fn main() {
    // 0 enters at stage 3, 2 at stage 9, 5 at stage 1.
    let trace = OracleTrace::new(16, [(0, 3), (2, 9), (5, 1)]).unwrap();

    let x = BinNum::from_exponents(vec![1, 4, 6, 7, 9]).unwrap();
    let counts = gap::gap_counts(&x, &trace);
    println!(
        "x = {:?}: {:?}, color {}",
        x.exponents(),
        counts,
        gap::encode_color(&x, &trace)
    );

    let cand = gap::harness_candidate(&trace, 5, 4);
    let verdict = gap::verify_candidate(&cand, &trace, &FsQuery::new(4).unwrap()).unwrap();
    println!("candidate passes on its full window: {}", verdict.pass);
    for n in 0..=5 {
        let got = gap::decode_membership(n, &cand, &trace).unwrap();
        println!("  {n}: decoded {got}, actual {}", trace.contains(n));
        assert_eq!(got, trace.contains(n));
    }
}
