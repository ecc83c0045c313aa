// Exponent-set numbers: exact addition, lambda/mu, finite sums and
// thinning a stream to a 2-apart set.

use thinht::binum::{fs_enumerate, is_two_apart, thin_to_apart, BinNum, FsQuery, NumSet};

pub fn main() {
    // 2^200 + 2^3 and 2^200 + 2^3 + 2^1 fit nowhere in a u128.
    let a = BinNum::from_exponents(vec![3, 200]).unwrap();
    let b = BinNum::from_exponents(vec![1, 3, 200]).unwrap();
    let s = a.add(&b);
    println!("a + b has exponents {:?}", s.exponents());
    println!("lambda = {}, mu = {}", s.lambda(), s.mu());

    let set = NumSet::from_values(&[1, 4, 16]).unwrap();
    let sums = fs_enumerate(&set, &FsQuery::new(3).unwrap()).unwrap();
    println!("FS({{1,4,16}}) = {:?}", sums.to_values().unwrap());

    let stream = (1u128..).map(|v| BinNum::from_value(v).unwrap());
    let thin = thin_to_apart(stream, 3).unwrap();
    println!(
        "2-apart from 1,2,3,...: {:?} (2-apart: {})",
        thin.to_values().unwrap(),
        is_two_apart(&thin)
    );
}
