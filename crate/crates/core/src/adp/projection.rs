//! Monotone projection of a single observed value onto the state lattice.

use crate::exact::StateSpace;
use crate::model::{CapIdx, State};

/// Set the visited state's value to `z` and repair the componentwise order
/// around it: comparable states above are raised to at least `z`, comparable
/// states below are lowered to at most `z`. Incomparable states and the
/// absorbing capacity level (pinned at zero) are untouched.
pub fn monotone_projection(table: &mut [f64], space: StateSpace, visited: State, z: f64) {
    debug_assert!(!visited.cap.is_absorbing(), "cannot project onto the absorbing level");
    let m = space.m();
    let cap_max = space.cap_max();
    table[space.index(visited)] = z;
    for full in visited.full..=m {
        for cap in visited.cap.0..=cap_max {
            let i = space.index(State::new(full, CapIdx(cap)));
            if table[i] < z {
                table[i] = z;
            }
        }
    }
    for full in 0..=visited.full {
        for cap in 1..=visited.cap.0 {
            let i = space.index(State::new(full, CapIdx(cap)));
            if table[i] > z {
                table[i] = z;
            }
        }
    }
}

/// Make a per-epoch table monotone under the componentwise order by a single
/// raising sweep: each cell becomes the running maximum over its lower
/// neighbors. The absorbing level stays pinned.
pub fn monotone_raising_sweep(table: &mut [f64], space: StateSpace) {
    let m = space.m();
    let cap_max = space.cap_max();
    for full in 0..=m {
        for cap in 1..=cap_max {
            let i = space.index(State::new(full, CapIdx(cap)));
            let mut v = table[i];
            if cap > 1 {
                v = v.max(table[space.index(State::new(full, CapIdx(cap - 1)))]);
            }
            if full > 0 {
                v = v.max(table[space.index(State::new(full - 1, CapIdx(cap)))]);
            }
            table[i] = v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space() -> StateSpace {
        StateSpace::raw(2, 3) // full 0..=2, cap 0..=3 (0 absorbing)
    }

    #[test]
    fn projection_raises_above_and_lowers_below() {
        let sp = space();
        let mut table = vec![0.0; sp.len()];
        // state (2, cap 3) holds 4 (above visited, too low); (0, cap 1)
        // holds 6 (below visited, too high); (0, cap 3) is incomparable.
        table[sp.index(State::new(2, CapIdx(3)))] = 4.0;
        table[sp.index(State::new(0, CapIdx(1)))] = 6.0;
        table[sp.index(State::new(0, CapIdx(3)))] = -1.0;
        monotone_projection(&mut table, sp, State::new(1, CapIdx(2)), 5.0);
        assert_eq!(table[sp.index(State::new(1, CapIdx(2)))], 5.0);
        assert_eq!(table[sp.index(State::new(2, CapIdx(3)))], 5.0);
        assert_eq!(table[sp.index(State::new(0, CapIdx(1)))], 5.0);
        assert_eq!(table[sp.index(State::new(0, CapIdx(3)))], -1.0);
        // Absorbing entries never move.
        assert_eq!(table[sp.index(State::new(0, CapIdx(0)))], 0.0);
    }

    #[test]
    fn projection_is_idempotent_and_fixes_nothing_when_monotone() {
        let sp = space();
        let mut table: Vec<f64> = (0..sp.len()).map(|i| i as f64).collect();
        // Flat index order is lattice-compatible here, so the table is
        // already monotone.
        let visited = State::new(1, CapIdx(2));
        let z = table[sp.index(visited)];
        let before = table.clone();
        monotone_projection(&mut table, sp, visited, z);
        assert_eq!(table, before);

        monotone_projection(&mut table, sp, visited, 20.0);
        let once = table.clone();
        monotone_projection(&mut table, sp, visited, 20.0);
        assert_eq!(table, once);
    }

    #[test]
    fn raising_sweep_produces_a_monotone_table() {
        let sp = space();
        let mut table = vec![0.0; sp.len()];
        let mut x = 31.0f64;
        for v in table.iter_mut() {
            // Arbitrary deterministic scramble.
            x = (x * 7.13).rem_euclid(17.0);
            *v = x;
        }
        for i in 0..sp.len() {
            if sp.state(i).cap.is_absorbing() {
                table[i] = 0.0;
            }
        }
        monotone_raising_sweep(&mut table, sp);
        for i in 0..sp.len() {
            for j in 0..sp.len() {
                let (a, b) = (sp.state(i), sp.state(j));
                if !a.cap.is_absorbing() && !b.cap.is_absorbing() && b.dominates(a) {
                    assert!(table[sp.index(b)] >= table[sp.index(a)]);
                }
            }
        }
    }
}
