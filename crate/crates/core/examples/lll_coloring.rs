// Two-color a sparse family of 13-sets with Moser-Tardos resampling, then
// extend the coloring without touching committed bits.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thinht::lll::{self, ExplicitFamily, LllParams, PartialColoring, Ratio};

pub fn main() {
    let params = LllParams::minimal(Ratio::HALF, 100_000, 1).unwrap();
    println!("minimal set size for q = 1/2: {}", params.m);

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fam = ExplicitFamily::new(params.m, Vec::new()).unwrap();
    for i in 0..40 {
        let top = if i % 2 == 0 { 200 } else { 400 };
        fam.push(
            sample(&mut rng, top, params.m)
                .into_iter()
                .map(|x| x as u64)
                .collect(),
        )
        .unwrap();
    }
    let audit = lll::occurrence_audit(&fam, &params, params.m, 399);
    println!("occurrence audit: {}", audit.pass);

    let first = lll::two_color(&fam, &params, &PartialColoring::empty(), 200).unwrap();
    let second = lll::two_color(&fam, &params, &first, 400).unwrap();
    println!(
        "monochromatic sets: {} then {}; prefix kept: {}",
        lll::monochromatic_sets(&fam, &first, 200).len(),
        lll::monochromatic_sets(&fam, &second, 400).len(),
        second.bits().starts_with(first.bits())
    );
}
