//! Counter-based deterministic pseudo-randomness.
//!
//! Every random quantity in this crate is derived by hashing a
//! `(seed, purpose, index)` triple, so draws are reproducible and independent
//! of evaluation order: growing a sample extends the underlying sequence
//! instead of reshuffling it, and parallel schedules cannot change results.

/// Purpose tags keep independent random streams from colliding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Coord,
    EdgeCoin,
    PowerLaw,
    CutRestart,
    OverlayRestart,
    FalsifyRestart,
    Doubling,
    Chernoff,
    Trial,
    Derive,
}

impl Tag {
    fn code(self) -> u64 {
        match self {
            Tag::Coord => 0x636f6f7264,
            Tag::EdgeCoin => 0x65646765,
            Tag::PowerLaw => 0x706c6177,
            Tag::CutRestart => 0x63757472,
            Tag::OverlayRestart => 0x6f766572,
            Tag::FalsifyRestart => 0x66616c73,
            Tag::Doubling => 0x64626c67,
            Tag::Chernoff => 0x63686572,
            Tag::Trial => 0x7472696c,
            Tag::Derive => 0x64657276,
        }
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Hash of a keyed counter; the workhorse behind every draw.
pub fn counter_u64(seed: u64, tag: Tag, index: u64) -> u64 {
    let a = mix(seed ^ GOLDEN);
    let b = mix(a ^ tag.code().wrapping_mul(GOLDEN));
    mix(b ^ index.wrapping_mul(0xd134_2543_de82_ef95))
}

/// Uniform draw in [0,1) from a keyed counter.
pub fn counter_f64(seed: u64, tag: Tag, index: u64) -> f64 {
    // 53 mantissa bits.
    (counter_u64(seed, tag, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Derive an independent child seed, e.g. one per restart or per trial.
pub fn derive(seed: u64, tag: Tag, index: u64) -> u64 {
    counter_u64(seed, tag, index)
}

/// Sequential splitmix stream for places where a cheap ordered source is fine
/// (shuffles, local-search proposals). Seed it from [`derive`].
#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { state: seed ^ GOLDEN }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..bound` (bound > 0), by rejection-free modulo of a wide product.
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        ((self.next_u64() as u128 * bound as u128) >> 64) as usize
    }

    pub fn next_bool(&mut self) -> bool {
        self.next_u64() & 1 == 1
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}
