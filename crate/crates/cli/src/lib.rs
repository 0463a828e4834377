//! Batch front door for the time-bin GHZ simulator: config ingestion,
//! pipeline orchestration (simulate → tomograph → report), count-file I/O
//! and plot-data emission.

pub mod files;
pub mod pipeline;

/// Expands the single user-supplied master seed into independent
/// per-purpose streams: the domain tag is hashed with FNV-1a and the result
/// mixed into the master via a SplitMix64 finalizer. Every stochastic stage
/// derives its seed this way, so one master seed pins the whole run.
pub fn derive_seed(master: u64, domain: &str) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for &b in domain.as_bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(master ^ h)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
