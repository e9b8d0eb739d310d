//! Greedy hitting set with seeded tie-breaking.

use rand::Rng;

/// Repeatedly picks the element hitting the most not-yet-hit sets until
/// every set is hit; returns picks in selection order.
///
/// `excluded` is never picked; sets whose only members are excluded stay
/// unhit and cost nothing. Ties among equally good elements go to `rng`.
pub fn greedy_hitting_set<R: Rng + ?Sized>(
    sets: &[&[usize]],
    excluded: Option<usize>,
    rng: &mut R,
) -> Vec<usize> {
    let universe = sets.iter().flat_map(|s| s.iter()).copied().max().map_or(0, |m| m + 1);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); universe];
    let mut count = vec![0usize; universe];
    let sets: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut s = s.to_vec();
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    for (i, s) in sets.iter().enumerate() {
        for &x in s {
            members[x].push(i);
            count[x] += 1;
        }
    }
    if let Some(x) = excluded.filter(|&x| x < universe) {
        count[x] = 0;
    }
    let mut hit = vec![false; sets.len()];
    let mut picks = Vec::new();
    let mut ties = Vec::new();
    loop {
        let best = count.iter().copied().max().unwrap_or(0);
        if best == 0 {
            break;
        }
        ties.clear();
        ties.extend((0..universe).filter(|&x| count[x] == best));
        let pick = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
        picks.push(pick);
        for &i in &members[pick] {
            if std::mem::replace(&mut hit[i], true) {
                continue;
            }
            for &x in &sets[i] {
                if count[x] > 0 && Some(x) != excluded {
                    count[x] -= 1;
                }
            }
        }
        count[pick] = 0;
    }
    picks
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_common_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sets: Vec<&[usize]> = vec![&[1, 2], &[1, 3], &[1, 4]];
        assert_eq!(greedy_hitting_set(&sets, None, &mut rng), vec![1]);
        assert_eq!(greedy_hitting_set(&sets, Some(1), &mut rng).len(), 3);
    }

    #[test]
    fn only_excluded_member_costs_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sets: Vec<&[usize]> = vec![&[5], &[5, 5]];
        assert!(greedy_hitting_set(&sets, Some(5), &mut rng).is_empty());
    }
}
