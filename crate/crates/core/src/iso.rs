//! Isomorphism search for finite quantales (order, product, involution,
//! unit) and finite groupoids (with a homeomorphism on units),
//! producing self-verifying certificates.
//!
//! The quantale search seeds a backtracking assignment with iterated
//! partition refinement; the groupoid search enumerates homeomorphisms
//! of the unit spaces first and extends them fiberwise.

use crate::bits;
use crate::groupoid::FiniteGroupoid;
use crate::quantale::{partial_units, FiniteQuantale};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Distinguisher {
    ElementCount(usize, usize),
    UnitDownsetSize(usize, usize),
    PartialUnitCount(usize, usize),
    /// Iterated refinement produced different color multisets.
    RefinedPartition,
    PointCount(usize, usize),
    ArrowCount(usize, usize),
    /// No bijection of points carries opens onto opens.
    OpenLattice,
    /// Backtracking exhausted every candidate assignment.
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome<T> {
    Found(T),
    NotIsomorphic(Distinguisher),
    Budget,
}

/// A bijection of element indices preserving all quantale structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuantaleIso {
    pub map: Vec<usize>,
}

/// A pair of bijections (points, arrows) with the point map a
/// homeomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupoidIso {
    pub point_map: Vec<usize>,
    pub arrow_map: Vec<usize>,
}

/// Re-apply a certificate and confirm it reproduces the target tables.
pub fn verify_quantale_iso(a: &FiniteQuantale, b: &FiniteQuantale, iso: &QuantaleIso) -> bool {
    let n = a.n();
    if b.n() != n || iso.map.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &y in &iso.map {
        if y >= n || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    let m = &iso.map;
    if m[a.unit()] != b.unit() {
        return false;
    }
    for x in 0..n {
        if m[a.star(x)] != b.star(m[x]) {
            return false;
        }
        for y in 0..n {
            if a.leq(x, y) != b.leq(m[x], m[y]) {
                return false;
            }
            if m[a.product(x, y)] != b.product(m[x], m[y]) {
                return false;
            }
            if m[a.join2(x, y)] != b.join2(m[x], m[y]) {
                return false;
            }
        }
    }
    true
}

fn initial_colors(q: &FiniteQuantale) -> Vec<u64> {
    let pu = partial_units(q);
    (0..q.n())
        .map(|x| {
            let mut sig = 0u64;
            sig |= (x == q.unit()) as u64;
            sig |= ((x == q.bottom()) as u64) << 1;
            sig |= ((x == q.top()) as u64) << 2;
            sig |= ((q.product(x, x) == x) as u64) << 3;
            sig |= ((q.star(x) == x) as u64) << 4;
            sig |= (pu.functionals.contains(&x) as u64) << 5;
            sig |= (pu.partial_units.contains(&x) as u64) << 6;
            sig |= (q.leq(x, q.unit()) as u64) << 7;
            sig | ((q.upset(x).count() as u64) << 8) | ((q.downset(x).count() as u64) << 20)
        })
        .collect()
}

type RefineSig = (u64, Vec<(u64, u64, u64, u64)>);

fn refine_signatures(q: &FiniteQuantale, colors: &[u64]) -> Vec<RefineSig> {
    (0..q.n())
        .map(|x| {
            let mut row: Vec<(u64, u64, u64, u64)> = (0..q.n())
                .map(|y| {
                    (
                        colors[y],
                        colors[q.product(x, y)],
                        colors[q.product(y, x)],
                        colors[q.join2(x, y)],
                    )
                })
                .collect();
            row.sort_unstable();
            (colors[x], row)
        })
        .collect()
}

/// Iterated partition refinement run jointly, so color identifiers are
/// comparable across the two quantales.
fn refine_colors_joint(a: &FiniteQuantale, b: &FiniteQuantale) -> (Vec<u64>, Vec<u64>) {
    let mut ca = initial_colors(a);
    let mut cb = initial_colors(b);
    for _ in 0..a.n().max(b.n()) {
        let sa = refine_signatures(a, &ca);
        let sb = refine_signatures(b, &cb);
        let mut table: BTreeMap<&RefineSig, u64> = BTreeMap::new();
        for sig in sa.iter().chain(sb.iter()) {
            table.insert(sig, 0);
        }
        for (next, (_, id)) in table.iter_mut().enumerate() {
            *id = next as u64;
        }
        let na: Vec<u64> = sa.iter().map(|s| table[s]).collect();
        let nb: Vec<u64> = sb.iter().map(|s| table[s]).collect();
        if na == ca && nb == cb {
            break;
        }
        ca = na;
        cb = nb;
    }
    (ca, cb)
}

pub fn quantale_isomorphic(
    a: &FiniteQuantale,
    b: &FiniteQuantale,
    budget: u64,
) -> SearchOutcome<QuantaleIso> {
    if a.n() != b.n() {
        return SearchOutcome::NotIsomorphic(Distinguisher::ElementCount(a.n(), b.n()));
    }
    let (qa, qb) = (a.qe().len(), b.qe().len());
    if qa != qb {
        return SearchOutcome::NotIsomorphic(Distinguisher::UnitDownsetSize(qa, qb));
    }
    let (pa, pb) = (
        partial_units(a).partial_units.len(),
        partial_units(b).partial_units.len(),
    );
    if pa != pb {
        return SearchOutcome::NotIsomorphic(Distinguisher::PartialUnitCount(pa, pb));
    }
    let (ca, cb) = refine_colors_joint(a, b);
    let mut ma: Vec<u64> = ca.clone();
    let mut mb: Vec<u64> = cb.clone();
    ma.sort_unstable();
    mb.sort_unstable();
    if ma != mb {
        return SearchOutcome::NotIsomorphic(Distinguisher::RefinedPartition);
    }

    let n = a.n();
    // Assign rare colors first.
    let mut order: Vec<usize> = (0..n).collect();
    let class_size = |c: u64| ca.iter().filter(|&&x| x == c).count();
    order.sort_by_key(|&x| (class_size(ca[x]), x));

    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut nodes: u64 = 0;

    fn consistent(
        a: &FiniteQuantale,
        b: &FiniteQuantale,
        map: &[usize],
        x: usize,
    ) -> bool {
        let y = map[x];
        if (x == a.unit()) != (y == b.unit()) {
            return false;
        }
        let sx = a.star(x);
        if map[sx] != usize::MAX && map[sx] != b.star(y) {
            return false;
        }
        for z in 0..a.n() {
            let w = map[z];
            if w == usize::MAX {
                continue;
            }
            if a.leq(x, z) != b.leq(y, w) || a.leq(z, x) != b.leq(w, y) {
                return false;
            }
            for (p, q) in [
                (a.product(x, z), b.product(y, w)),
                (a.product(z, x), b.product(w, y)),
                (a.join2(x, z), b.join2(y, w)),
            ] {
                if map[p] != usize::MAX && map[p] != q {
                    return false;
                }
            }
        }
        // Products that land on x must land on y.
        for z in 0..a.n() {
            let w = map[z];
            if w == usize::MAX {
                continue;
            }
            for v in 0..a.n() {
                let u = map[v];
                if u == usize::MAX {
                    continue;
                }
                if a.product(z, v) == x && b.product(w, u) != y {
                    return false;
                }
                if a.join2(z, v) == x && b.join2(w, u) != y {
                    return false;
                }
            }
        }
        true
    }

    fn backtrack(
        a: &FiniteQuantale,
        b: &FiniteQuantale,
        ca: &[u64],
        cb: &[u64],
        order: &[usize],
        depth: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        nodes: &mut u64,
        budget: u64,
    ) -> Result<bool, ()> {
        if depth == order.len() {
            return Ok(true);
        }
        let x = order[depth];
        for y in 0..b.n() {
            if used[y] || cb[y] != ca[x] {
                continue;
            }
            *nodes += 1;
            if *nodes > budget {
                return Err(());
            }
            map[x] = y;
            used[y] = true;
            if consistent(a, b, map, x)
                && backtrack(a, b, ca, cb, order, depth + 1, map, used, nodes, budget)?
            {
                return Ok(true);
            }
            map[x] = usize::MAX;
            used[y] = false;
        }
        Ok(false)
    }

    match backtrack(
        a, b, &ca, &cb, &order, 0, &mut map, &mut used, &mut nodes, budget,
    ) {
        Err(()) => SearchOutcome::Budget,
        Ok(true) => {
            let iso = QuantaleIso { map };
            debug_assert!(verify_quantale_iso(a, b, &iso));
            SearchOutcome::Found(iso)
        }
        Ok(false) => SearchOutcome::NotIsomorphic(Distinguisher::Exhausted),
    }
}

pub fn verify_groupoid_iso(a: &FiniteGroupoid, b: &FiniteGroupoid, iso: &GroupoidIso) -> bool {
    let np = a.space().n_points();
    let na = a.n_arrows();
    if b.space().n_points() != np || b.n_arrows() != na {
        return false;
    }
    let (pm, am) = (&iso.point_map, &iso.arrow_map);
    if pm.len() != np || am.len() != na {
        return false;
    }
    let mut seen = vec![false; np];
    for &p in pm {
        if p >= np || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    let mut seen = vec![false; na];
    for &x in am {
        if x >= na || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    // Homeomorphism: images of opens are opens, bijectively.
    let image = |mask: u64| bits::ones(mask).fold(0u64, |acc, p| acc | bits::bit(pm[p]));
    let mut mapped: Vec<u64> = a.space().opens().iter().map(|&u| image(u)).collect();
    mapped.sort_unstable_by_key(|&m| (m.count_ones(), m));
    if mapped != b.space().opens() {
        return false;
    }
    for x in 0..na {
        if pm[a.source(x)] != b.source(am[x]) || pm[a.target(x)] != b.target(am[x]) {
            return false;
        }
        if am[a.inverse(x)] != b.inverse(am[x]) {
            return false;
        }
        for y in 0..na {
            let lhs = a.compose(x, y).map(|z| am[z]);
            let rhs = b.compose(am[x], am[y]);
            if lhs != rhs {
                return false;
            }
        }
    }
    for p in 0..np {
        if am[a.unit(p)] != b.unit(pm[p]) {
            return false;
        }
    }
    true
}

pub fn groupoid_isomorphic(
    a: &FiniteGroupoid,
    b: &FiniteGroupoid,
    budget: u64,
) -> SearchOutcome<GroupoidIso> {
    let np = a.space().n_points();
    if b.space().n_points() != np {
        return SearchOutcome::NotIsomorphic(Distinguisher::PointCount(
            np,
            b.space().n_points(),
        ));
    }
    let na = a.n_arrows();
    if b.n_arrows() != na {
        return SearchOutcome::NotIsomorphic(Distinguisher::ArrowCount(na, b.n_arrows()));
    }

    // Candidate point maps: permutations carrying opens onto opens.
    let mut point_maps = Vec::new();
    let mut perm = vec![usize::MAX; np];
    let mut used = vec![false; np];
    fn extend_points(
        a: &FiniteGroupoid,
        b: &FiniteGroupoid,
        depth: usize,
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let np = a.space().n_points();
        if depth == np {
            let image =
                |mask: u64| bits::ones(mask).fold(0u64, |acc, p| acc | bits::bit(perm[p]));
            let mut mapped: Vec<u64> = a.space().opens().iter().map(|&u| image(u)).collect();
            mapped.sort_unstable_by_key(|&m| (m.count_ones(), m));
            if mapped == b.space().opens() {
                out.push(perm.clone());
            }
            return;
        }
        for q in 0..np {
            if used[q] {
                continue;
            }
            // Fiber profile must match: loop counts and degrees.
            let loops_a = a.arrows_between(depth, depth).len();
            let loops_b = b.arrows_between(q, q).len();
            let deg_a = (0..a.n_arrows()).filter(|&x| a.source(x) == depth).count();
            let deg_b = (0..b.n_arrows()).filter(|&x| b.source(x) == q).count();
            if loops_a != loops_b || deg_a != deg_b {
                continue;
            }
            perm[depth] = q;
            used[q] = true;
            extend_points(a, b, depth + 1, perm, used, out);
            used[q] = false;
        }
        perm[depth] = usize::MAX;
    }
    extend_points(a, b, 0, &mut perm, &mut used, &mut point_maps);
    if point_maps.is_empty() {
        return SearchOutcome::NotIsomorphic(Distinguisher::OpenLattice);
    }

    let mut nodes: u64 = 0;
    for pm in &point_maps {
        // Extend fiberwise over arrows.
        let mut am = vec![usize::MAX; na];
        let mut used_arrows = vec![false; na];
        // Units are forced.
        let mut feasible = true;
        for p in 0..np {
            let target = b.unit(pm[p]);
            am[a.unit(p)] = target;
            if used_arrows[target] {
                feasible = false;
                break;
            }
            used_arrows[target] = true;
        }
        if !feasible {
            continue;
        }
        fn extend_arrows(
            a: &FiniteGroupoid,
            b: &FiniteGroupoid,
            pm: &[usize],
            x: usize,
            am: &mut Vec<usize>,
            used: &mut Vec<bool>,
            nodes: &mut u64,
            budget: u64,
        ) -> Result<bool, ()> {
            let na = a.n_arrows();
            let x = (x..na).find(|&x| am[x] == usize::MAX);
            let Some(x) = x else { return Ok(true) };
            for y in 0..na {
                if used[y]
                    || b.source(y) != pm[a.source(x)]
                    || b.target(y) != pm[a.target(x)]
                {
                    continue;
                }
                *nodes += 1;
                if *nodes > budget {
                    return Err(());
                }
                am[x] = y;
                used[y] = true;
                let inv_ok = {
                    let xi = a.inverse(x);
                    am[xi] == usize::MAX || am[xi] == b.inverse(y)
                };
                let prod_ok = inv_ok
                    && (0..na).all(|z| {
                        if am[z] == usize::MAX {
                            return true;
                        }
                        let w = am[z];
                        [(x, z, y, w), (z, x, w, y)].into_iter().all(
                            |(x1, z1, y1, w1)| match (a.compose(x1, z1), b.compose(y1, w1)) {
                                (Some(c), Some(c2)) => am[c] == usize::MAX || am[c] == c2,
                                (None, None) => true,
                                _ => false,
                            },
                        )
                    });
                if prod_ok {
                    let xi = a.inverse(x);
                    let forced = am[xi] == usize::MAX && xi != x;
                    if forced {
                        let yi = b.inverse(y);
                        if !used[yi] {
                            am[xi] = yi;
                            used[yi] = true;
                            if extend_arrows(a, b, pm, x + 1, am, used, nodes, budget)? {
                                return Ok(true);
                            }
                            am[xi] = usize::MAX;
                            used[yi] = false;
                        }
                    } else if extend_arrows(a, b, pm, x + 1, am, used, nodes, budget)? {
                        return Ok(true);
                    }
                }
                am[x] = usize::MAX;
                used[y] = false;
            }
            Ok(false)
        }
        match extend_arrows(a, b, pm, 0, &mut am, &mut used_arrows, &mut nodes, budget) {
            Err(()) => return SearchOutcome::Budget,
            Ok(true) => {
                let iso = GroupoidIso {
                    point_map: pm.clone(),
                    arrow_map: am,
                };
                debug_assert!(verify_groupoid_iso(a, b, &iso));
                return SearchOutcome::Found(iso);
            }
            Ok(false) => continue,
        }
    }
    SearchOutcome::NotIsomorphic(Distinguisher::Exhausted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gq::{build_gq, validate_selection_base, DEFAULT_SIZE_BUDGET};
    use crate::groupoid::fixtures::*;

    fn fixture_quantale(which: u8) -> crate::quantale::FiniteQuantale {
        let g = if which == 1 { groupoid_81() } else { groupoid_82() };
        let fam: Vec<u64> = g
            .enumerate_bisection_images(1 << 20)
            .unwrap()
            .iter()
            .map(|b| b.carrier)
            .collect();
        let base = validate_selection_base(&g, &fam).unwrap();
        build_gq(&g, &base, DEFAULT_SIZE_BUDGET)
            .unwrap()
            .quantale
            .quantale
    }

    #[test]
    fn quantale_self_iso_is_identity() {
        let q = fixture_quantale(2);
        match quantale_isomorphic(&q, &q, 1 << 20) {
            SearchOutcome::Found(iso) => {
                assert_eq!(iso.map, (0..q.n()).collect::<Vec<_>>());
                assert!(verify_quantale_iso(&q, &q, &iso));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixture_quantales_are_distinguished_by_size() {
        let q1 = fixture_quantale(1);
        let q2 = fixture_quantale(2);
        match quantale_isomorphic(&q1, &q2, 1 << 20) {
            SearchOutcome::NotIsomorphic(Distinguisher::ElementCount(17, 23)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn groupoid_self_iso_verifies() {
        let g = groupoid_81();
        match groupoid_isomorphic(&g, &g, 1 << 20) {
            SearchOutcome::Found(iso) => {
                assert!(verify_groupoid_iso(&g, &g, &iso));
                assert_eq!(iso.point_map, vec![0, 1, 2]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn fixture_groupoids_differ_in_unit_topology() {
        let g1 = groupoid_81();
        let g2 = groupoid_82();
        match groupoid_isomorphic(&g1, &g2, 1 << 20) {
            SearchOutcome::NotIsomorphic(Distinguisher::OpenLattice) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn frame_quantales_of_the_two_spaces_are_not_isomorphic() {
        // Same size and unit downset, different order structure.
        let qa = crate::quantale::FiniteQuantale::from_frame(&space_81());
        let qb = crate::quantale::FiniteQuantale::from_frame(&space_82());
        match quantale_isomorphic(&qa, &qb, 1 << 20) {
            SearchOutcome::NotIsomorphic(_) => {}
            other => panic!("unexpected {other:?}"),
        }
    }
}
