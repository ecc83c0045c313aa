// Iterate the splitting to depth 2, color the window, and run the
// immunity audit on a planted set and on a control.

use thinht::largeness::{immunity_audit, iterate};
use thinht::lll::{LllParams, Ratio};
use thinht::oracle::{stable_approximant, EnumFamily, OracleTrace};

pub fn main() {
    let window = 1024;
    let h = window - 1;
    let dense: Vec<(u64, u64)> = (0..300).map(|m| (2 * m, 0)).collect();
    let fam = EnumFamily::new(vec![
        OracleTrace::new(h, dense).unwrap(),
        OracleTrace::new(h, [(1, 5), (9, 40)]).unwrap(),
    ]);
    let params = LllParams::minimal(Ratio::HALF, 10_000_000, 7).unwrap();
    let inst = iterate(1, &fam, &params, window, 2).unwrap();
    let hist = (0..window).fold([0u64; 2], |mut h, x| {
        h[inst.color(x).unwrap() as usize] += 1;
        h
    });
    println!("color histogram on [0, {window}): {hist:?}");

    // Contains a whole stable approximant of the dense enumeration.
    let bound = inst.stack.fns[1].eval(0, 1);
    let (e, _) = stable_approximant(&fam, 0, bound as usize).unwrap();
    let mut planted = e.sorted();
    planted.push(1001);
    let v = immunity_audit(&planted, 0, &inst, &fam).unwrap();
    println!("planted (|S| = {}): flagged {}", planted.len(), v.flagged);

    let control: Vec<u64> = (0..40).map(|i| 2 * i + 601).collect();
    let v = immunity_audit(&control, 0, &inst, &fam).unwrap();
    println!("odd control: flagged {}", v.flagged);
}
