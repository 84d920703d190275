use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Domino, PcpInstance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub num_dominoes: usize,
    pub max_string_len: usize,
    /// Reject dominoes whose numerator equals their denominator.
    pub ensure_nontrivial: bool,
}

/// Uniform string lengths in `1..=max_string_len`, uniform digits in `1..=4`.
pub fn random_instance(params: GeneratorParams, seed: u64) -> Result<PcpInstance> {
    if params.num_dominoes == 0 || params.max_string_len == 0 {
        return Err(Error::InvalidParams("num_dominoes and max_string_len must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_string = |rng: &mut ChaCha8Rng| -> String {
        let len = rng.random_range(1..=params.max_string_len);
        (0..len).map(|_| char::from(b'0' + rng.random_range(1..=4u8))).collect()
    };
    let mut dominoes = Vec::with_capacity(params.num_dominoes);
    while dominoes.len() < params.num_dominoes {
        let num = random_string(&mut rng);
        let den = random_string(&mut rng);
        if params.ensure_nontrivial && num == den {
            continue;
        }
        dominoes.push(Domino::new(num, den)?);
    }
    PcpInstance::new(dominoes)
}
