use serde::{Deserialize, Serialize};

/// Bijections `N x N -> N` used to order `(e, k)` pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    Cantor,
    Szudzik,
}

impl Pairing {
    pub fn encode(&self, e: u64, k: u64) -> u64 {
        match self {
            Pairing::Cantor => {
                let s = e.saturating_add(k);
                (s.saturating_mul(s.saturating_add(1)) / 2).saturating_add(k)
            }
            Pairing::Szudzik => {
                if e < k {
                    k.saturating_mul(k).saturating_add(e)
                } else {
                    e.saturating_mul(e).saturating_add(e).saturating_add(k)
                }
            }
        }
    }

    pub fn decode(&self, code: u64) -> (u64, u64) {
        match self {
            Pairing::Cantor => {
                let mut s = ((((8 * code as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
                while (s + 1) * (s + 2) / 2 <= code {
                    s += 1;
                }
                while s * (s + 1) / 2 > code {
                    s -= 1;
                }
                let k = code - s * (s + 1) / 2;
                (s - k, k)
            }
            Pairing::Szudzik => {
                let mut r = (code as f64).sqrt() as u64;
                while (r + 1) * (r + 1) <= code {
                    r += 1;
                }
                while r * r > code {
                    r -= 1;
                }
                let rest = code - r * r;
                if rest < r {
                    (rest, r)
                } else {
                    (r, rest - r)
                }
            }
        }
    }
}

/// `k * m <= 2^{m/2}`.
pub fn g_inequality(k: u64, m: u64) -> bool {
    if k == 0 {
        return true;
    }
    let km = k as u128 * m as u128;
    match km.checked_mul(km) {
        Some(sq) if m < 128 => sq <= 1u128 << m,
        Some(_) => true,
        None => 2.0 * (km as f64).log2() <= m as f64,
    }
}

const TABLE_CODES: usize = 1 << 16;

/// An injective `g(e, k)` with decidable image, `g >= M` and
/// `k * g(e,k) <= 2^{g(e,k)/2}`.
///
/// Pairs are visited in pairing-code order and each gets the least value
/// above every earlier one that is at least `M` and satisfies the
/// inequality. The values are strictly increasing in the code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GFunction {
    min_value: u64,
    pairing: Pairing,
    table: Vec<u64>,
}

pub fn make_g(min_value: u64, pairing: Pairing) -> GFunction {
    GFunction::new(min_value, pairing)
}

impl GFunction {
    pub fn new(min_value: u64, pairing: Pairing) -> Self {
        let mut table = Vec::with_capacity(TABLE_CODES);
        let mut prev: Option<u64> = None;
        for code in 0..TABLE_CODES as u64 {
            let (_, k) = pairing.decode(code);
            let mut m = prev.map_or(min_value, |p| (p + 1).max(min_value));
            while !g_inequality(k, m) {
                m += 1;
            }
            table.push(m);
            prev = Some(m);
        }
        GFunction {
            min_value,
            pairing,
            table,
        }
    }

    pub fn min_value(&self) -> u64 {
        self.min_value
    }

    pub fn pairing(&self) -> Pairing {
        self.pairing
    }

    /// `g` at a pairing code.
    ///
    /// Past the table every value is at least `2^16 > k` (both pairings
    /// have `code >= k`), and `m >= 16` with `k <= m` gives
    /// `k m <= m^2 <= 2^{m/2}`, so the greedy step is always `+1` there.
    pub fn at_code(&self, code: u64) -> u64 {
        let last = self.table.len() as u64 - 1;
        if code <= last {
            self.table[code as usize]
        } else {
            self.table[last as usize].saturating_add(code - last)
        }
    }

    pub fn eval(&self, e: u64, k: u64) -> u64 {
        self.at_code(self.pairing.encode(e, k))
    }

    /// The unique `(e, k)` with `g(e, k) = m`, if any.
    pub fn image_member(&self, m: u64) -> Option<(u64, u64)> {
        let last_code = self.table.len() as u64 - 1;
        let last = self.table[last_code as usize];
        let code = if m <= last {
            self.table.binary_search(&m).ok()? as u64
        } else {
            last_code + (m - last)
        };
        Some(self.pairing.decode(code))
    }
}
