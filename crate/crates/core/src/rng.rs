//! Deterministic generator streams.
//!
//! Every random draw comes from a ChaCha8 stream keyed by an explicit seed and
//! a stream tag, so one operation's draws never depend on how many numbers an
//! unrelated operation consumed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug)]
#[repr(u64)]
pub(crate) enum Stream {
    Erase = 1,
    Lsb = 2,
    Msb = 3,
    OneShot = 4,
    Scramble = 5,
    Data = 6,
}

pub(crate) fn stream(seed: u64, kind: Stream, epoch: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tag = ((kind as u64) << 56) ^ ((epoch & 0xff_ffff) << 32) ^ (index & 0xffff_ffff);
    rng.set_stream(tag);
    rng
}

/// splitmix64 finalizer, used to derive sub-seeds.
pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub(crate) fn derive(seed: u64, salt: u64) -> u64 {
    mix(seed ^ mix(salt))
}
