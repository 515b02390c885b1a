//! Address-keyed data scrambler.

use crate::array::{PageAddress, PageData};
use crate::rng::{derive, stream, Stream};

/// XOR with a keystream keyed by `(seed, addr)`. Applying it twice restores
/// the input.
pub fn scramble(data: &PageData, addr: PageAddress, seed: u64) -> PageData {
    data.xor(&keystream(data.len(), addr, seed))
}

pub fn keystream(len: usize, addr: PageAddress, seed: u64) -> PageData {
    let mut rng = stream(derive(seed, addr.block_id), Stream::Scramble, 0, addr.page_index as u64);
    PageData::random(len, &mut rng)
}
