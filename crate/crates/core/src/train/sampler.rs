use rand::Rng;

use crate::error::{Error, Result};
use crate::kg::{EntityId, Triplet};

/// `n` corruptions of `positive`, each replacing the head or the tail (chosen
/// with equal probability) by a different entity drawn uniformly from
/// `0..num_entities`.
pub fn sample_negatives<R: Rng + ?Sized>(
    rng: &mut R,
    positive: Triplet,
    n: usize,
    num_entities: usize,
) -> Result<Vec<Triplet>> {
    corrupt(rng, positive, n, num_entities, |i| i as EntityId)
}

/// Like [`sample_negatives`] but draws replacements from `pool`.
pub fn sample_negatives_from<R: Rng + ?Sized>(
    rng: &mut R,
    positive: Triplet,
    n: usize,
    pool: &[EntityId],
) -> Result<Vec<Triplet>> {
    corrupt(rng, positive, n, pool.len(), |i| pool[i])
}

fn corrupt<R: Rng + ?Sized>(
    rng: &mut R,
    positive: Triplet,
    n: usize,
    pool_len: usize,
    pick: impl Fn(usize) -> EntityId,
) -> Result<Vec<Triplet>> {
    if pool_len < 2 {
        return Err(Error::Input("negative sampling needs at least two entities".into()));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let corrupt_head = rng.gen_bool(0.5);
        let original = if corrupt_head { positive.head } else { positive.tail };
        let replacement = loop {
            let e = pick(rng.gen_range(0..pool_len));
            if e != original {
                break e;
            }
        };
        let mut neg = positive;
        if corrupt_head {
            neg.head = replacement;
        } else {
            neg.tail = replacement;
        }
        out.push(neg);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream_rng, Stream};

    #[test]
    fn two_entity_outcomes() {
        let mut rng = stream_rng(1, Stream::Negatives);
        let pos = Triplet::new(0, 0, 1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..100 {
            let neg = sample_negatives(&mut rng, pos, 1, 2).unwrap();
            assert_eq!(neg.len(), 1);
            seen.insert(neg[0]);
        }
        let expected: std::collections::HashSet<_> =
            [Triplet::new(1, 0, 1), Triplet::new(0, 0, 0)].into_iter().collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn one_slot_differs() {
        let mut rng = stream_rng(2, Stream::Negatives);
        let pos = Triplet::new(3, 2, 7);
        let negs = sample_negatives(&mut rng, pos, 256, 50).unwrap();
        assert_eq!(negs.len(), 256);
        for n in negs {
            assert_eq!(n.relation, pos.relation);
            let diffs = (n.head != pos.head) as u8 + (n.tail != pos.tail) as u8;
            assert_eq!(diffs, 1);
        }
    }

    #[test]
    fn reproducible_stream() {
        let pos = Triplet::new(3, 2, 7);
        let a = sample_negatives(&mut stream_rng(5, Stream::Negatives), pos, 32, 50).unwrap();
        let b = sample_negatives(&mut stream_rng(5, Stream::Negatives), pos, 32, 50).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pool_sampling_stays_in_pool() {
        let mut rng = stream_rng(3, Stream::Negatives);
        let pool = [4, 9, 11];
        let negs = sample_negatives_from(&mut rng, Triplet::new(4, 0, 9), 64, &pool).unwrap();
        assert!(negs.iter().all(|n| pool.contains(&n.head) && pool.contains(&n.tail)));
        assert!(sample_negatives(&mut rng, Triplet::new(0, 0, 0), 1, 1).is_err());
    }
}
