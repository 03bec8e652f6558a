//! Heat-bath Gibbs sampling and the two-chain protocol for zero-field
//! ferromagnets.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::ising::{Configuration, IsingModel};
use crate::metrics::SampleSet;
use crate::rng::rng_from_seed;

/// p(x_v = +1 | rest) for local field `h`.
#[inline]
pub fn heat_bath_probability(h: f64) -> f64 {
    1.0 / (1.0 + (-2.0 * h).exp())
}

/// Runs `burn_in` unrecorded sweeps, then records one configuration every
/// sweep until `recorded` configurations are collected. Sites are updated in
/// ascending node order.
pub fn gibbs_chain(
    m: &IsingModel,
    init: &Configuration,
    recorded: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SampleSet> {
    gibbs_chain_thinned(m, init, recorded, burn_in, 1, seed)
}

/// As [`gibbs_chain`], recording every `thin`-th sweep.
pub fn gibbs_chain_thinned(
    m: &IsingModel,
    init: &Configuration,
    recorded: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<SampleSet> {
    let n = m.node_count();
    if init.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: init.len(),
        });
    }
    if thin == 0 {
        return Err(Error::InvalidArgument("thinning interval must be positive".into()));
    }
    let mut rng = rng_from_seed(seed);
    let mut x = init.spins().to_vec();
    let mut sweep = |x: &mut [i8]| {
        for v in 0..n {
            let p = heat_bath_probability(m.local_field(v, x));
            x[v] = if rng.random::<f64>() < p { 1 } else { -1 };
        }
    };
    for _ in 0..burn_in {
        sweep(&mut x);
    }
    let mut out = SampleSet::with_capacity(n, recorded);
    for _ in 0..recorded {
        for _ in 0..thin {
            sweep(&mut x);
        }
        out.push_unchecked(&x, 1.0);
    }
    Ok(out)
}

/// Two independent chains started from all +1 (seed `seed ^ 1`) and all −1
/// (seed `seed ^ 2`), each contributing `total / 2` recorded sweeps after
/// burn-in. Output is the +1 chain block followed by the −1 chain block.
pub fn two_chain_ferro(
    m: &IsingModel,
    total: usize,
    burn_in: usize,
    seed: u64,
) -> Result<SampleSet> {
    two_chain_ferro_thinned(m, total, burn_in, 1, seed)
}

pub fn two_chain_ferro_thinned(
    m: &IsingModel,
    total: usize,
    burn_in: usize,
    thin: usize,
    seed: u64,
) -> Result<SampleSet> {
    if total % 2 != 0 {
        return Err(Error::InvalidArgument(format!(
            "two-chain sampling needs an even sample count, got {total}"
        )));
    }
    let n = m.node_count();
    let half = total / 2;
    let (up, down) = rayon::join(
        || gibbs_chain_thinned(m, &Configuration::uniform(n, 1), half, burn_in, thin, seed ^ 1),
        || gibbs_chain_thinned(m, &Configuration::uniform(n, -1), half, burn_in, thin, seed ^ 2),
    );
    let mut out = up?;
    out.extend_from(&down?)?;
    Ok(out)
}
