//! Test machines for end-to-end checks of the ATM reduction.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::atm::{Atm, Move, Transition};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FamilyMember {
    pub machine: Atm,
    pub word: Vec<usize>,
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn alphabet(t: usize) -> Vec<String> {
    let mut a = vec!["<".to_string()];
    a.extend((1..t - 1).map(|i| ((b'a' + i as u8 - 1) as char).to_string()));
    a.push(">".to_string());
    a
}

/// The forced write and move on an end marker, if `a` is one.
fn marker_move(a: usize, t: usize) -> Option<(usize, Move)> {
    if a == 0 {
        Some((0, Move::Right))
    } else if a == t - 1 {
        Some((a, Move::Left))
    } else {
        None
    }
}

/// Every machine with at most two states over the end markers alone, on the
/// empty word, and every one-state machine over one inner symbol on each
/// word of length at most two.
pub fn systematic_machines() -> Vec<FamilyMember> {
    let mut out = Vec::new();
    for nq in 1..=2usize {
        let cells = 2 * nq * 2;
        for code in 0..nq.pow(cells as u32) {
            let mut digits = (0..cells).map(|i| code / nq.pow(i as u32) % nq);
            let delta = [(); 2].map(|_| {
                (0..nq)
                    .map(|_| {
                        (0..2)
                            .map(|a| {
                                let (write, dir) = marker_move(a, 2).expect("marker");
                                Transition { next: digits.next().expect("digit"), write, dir }
                            })
                            .collect()
                    })
                    .collect()
            });
            for univ in 0..1usize << nq {
                for accepting in [BTreeSet::new(), (1..nq).collect()] {
                    let universal = (0..nq).map(|q| univ & (1 << q) != 0).collect();
                    let m = Atm::new(names("q", nq), universal, alphabet(2), delta.clone(), 0, accepting);
                    out.push(FamilyMember { machine: m.expect("valid by construction"), word: vec![] });
                    if nq == 1 {
                        break;
                    }
                }
            }
        }
    }
    let inner =
        [(0, Move::Left), (0, Move::Right), (1, Move::Left), (1, Move::Right), (2, Move::Left), (2, Move::Right)];
    for (w1, d1) in inner {
        for (w2, d2) in inner {
            for universal in [false, true] {
                let row = |write, dir| {
                    vec![
                        Transition { next: 0, write: 0, dir: Move::Right },
                        Transition { next: 0, write, dir },
                        Transition { next: 0, write: 2, dir: Move::Left },
                    ]
                };
                let delta = [vec![row(w1, d1)], vec![row(w2, d2)]];
                let m = Atm::new(names("q", 1), vec![universal], alphabet(3), delta, 0, BTreeSet::new())
                    .expect("valid by construction");
                for word in [vec![], vec![1], vec![1, 1]] {
                    out.push(FamilyMember { machine: m.clone(), word });
                }
            }
        }
    }
    out
}

/// `count` machines with at most three states and three symbols, each with
/// a word of length at most two, drawn deterministically from `seed`.
pub fn sampled_machines(seed: u64, count: usize) -> Vec<FamilyMember> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let nq = rng.gen_range(1..=3);
            let t = rng.gen_range(2..=3);
            let n = if t == 3 { rng.gen_range(0..=2) } else { 0 };
            let delta = [(); 2].map(|_| {
                (0..nq)
                    .map(|_| {
                        (0..t)
                            .map(|a| {
                                let (write, dir) = marker_move(a, t).unwrap_or_else(|| {
                                    (rng.gen_range(0..t), if rng.gen() { Move::Left } else { Move::Right })
                                });
                                Transition { next: rng.gen_range(0..nq), write, dir }
                            })
                            .collect()
                    })
                    .collect()
            });
            let universal = (0..nq).map(|_| rng.gen()).collect();
            let accepting = (1..nq).filter(|_| rng.gen_bool(0.5)).collect();
            let machine = Atm::new(names("q", nq), universal, alphabet(t), delta, 0, accepting).expect("valid");
            let word = (0..n).map(|_| rng.gen_range(1..t - 1)).collect();
            FamilyMember { machine, word }
        })
        .collect()
}

/// The systematic machines followed by a seeded sample.
pub fn machine_family(seed: u64, sampled: usize) -> Vec<FamilyMember> {
    let mut out = systematic_machines();
    out.extend(sampled_machines(seed, sampled));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_sizes_and_determinism() {
        // Two states: 2^8 tables, 4 kinds, 2 accepting sets; one state: 2 kinds.
        // One inner symbol: 36 tables, 2 kinds, 3 words.
        assert_eq!(systematic_machines().len(), 2 + 2048 + 216);
        assert_eq!(sampled_machines(7, 20), sampled_machines(7, 20));
        assert!(sampled_machines(7, 50).iter().all(|m| m.word.len() <= 2 && m.machine.states.len() <= 3));
    }
}
