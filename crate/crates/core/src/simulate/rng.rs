use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for replication `rep`: the master seed keys ChaCha8 and the
/// replication index selects the stream.
pub fn rep_rng(master_seed: u64, rep: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep);
    rng
}
