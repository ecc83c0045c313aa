// Brute-force solvers on small colorings: thin sets, thin finite-sums
// windows, the simultaneous reduction and the rainbow variant.

use thinht::search::{self, ColoringSpec, FsGoal, FsMode, Generator};

pub fn main() {
    let pairs = ColoringSpec::generated(2, 10, Generator::SumMod { modulus: 2 })
        .build()
        .unwrap();
    println!(
        "thin for (x+y) mod 2: {:?}",
        search::find_thin(&pairs, 4, 1 << 20).outcome
    );

    let unary = ColoringSpec::generated(1, 24, Generator::Random { colors: 3, seed: 5 })
        .build()
        .unwrap();
    for mode in [FsMode::Exact2, FsMode::Upto { m: 2 }, FsMode::Full] {
        let r = search::find_fs_solution(&unary, mode, FsGoal::Thin, 3, 1 << 24).unwrap();
        println!("{mode:?}: {:?} ({} nodes)", r.outcome, r.stats.nodes);
    }

    let derived = search::sum_colorings(&unary, 2).unwrap();
    let r = search::simultaneous_thin(&derived, 3, 1 << 24).unwrap();
    println!("simultaneous thin for the sum colorings: {:?}", r.outcome);

    let injective = ColoringSpec::generated(
        2,
        8,
        Generator::Random {
            colors: 1_000_000,
            seed: 1,
        },
    )
    .build()
    .unwrap();
    println!(
        "rainbow set: {:?}",
        search::rrt_solve(&injective, 4, 1 << 20).unwrap().outcome
    );

    let f = search::AdditionLike::new(search::PairOp::Max, 2);
    let v = search::addition_like_validate(&f, 16, 16, None);
    println!(
        "max as an addition-like function: pass {}, {} violations",
        v.pass, v.violation_count
    );
}
