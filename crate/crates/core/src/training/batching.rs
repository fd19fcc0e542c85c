use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

// Keeps the shuffle stream apart from model initialization, which seeds
// ChaCha8 with the raw run seed.
const SHUFFLE_SALT: u64 = 0x5eed_ba7c_4e5f_0001;

/// Shuffled mini-batches for one epoch (`epoch` is 0-based). Always
/// `ceil(n / batch_size)` batches; only the last may be short.
pub fn epoch_batches(n: usize, batch_size: usize, seed: u64, epoch: usize) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ SHUFFLE_SALT);
    rng.set_stream(epoch as u64);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    order.chunks(batch_size.max(1)).map(<[usize]>::to_vec).collect()
}

pub fn gather_labels(labels: &[usize], indices: &[usize]) -> Vec<usize> {
    indices.iter().map(|&i| labels[i]).collect()
}
