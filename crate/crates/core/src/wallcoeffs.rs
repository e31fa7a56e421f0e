//! Combinatorial wall-crossing coefficients S and U, and their rewriting as
//! coefficients of left-nested Lie brackets.
//!
//! For a multiset of classes the word sum `P = sum_w U(w) w` over distinct
//! orderings is a Lie element of the free associative algebra. Applying the
//! left-bracketing map `rho` to a Lie element of degree `n` multiplies it by
//! `n`, so `U(w)/n` are valid Lie coefficients. [`coeff_utilde`] checks this
//! before returning them.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::classlat::Additive;
use crate::error::{bail, Result};
use crate::rat::{factorial, int};
use crate::stability::{ExtendedRational, SlopeMap};
use crate::Q;
use num_rational::BigRational;
use num_traits::{One, Zero};

fn sum_of<C: Additive>(items: &[C]) -> C {
    let mut acc = items[0].clone();
    for c in &items[1..] {
        acc = acc.plus(c);
    }
    acc
}

fn s_with_slopes<C: Additive, T: SlopeMap<C>>(
    items: &[C],
    tau_vals: &[ExtendedRational],
    tau_t: &T,
) -> Result<i32> {
    let n = items.len();
    let mut prefix = Vec::with_capacity(n);
    let mut acc = items[0].clone();
    prefix.push(acc.clone());
    for c in &items[1..] {
        acc = acc.plus(c);
        prefix.push(acc.clone());
    }
    let mut suffix = vec![items[n - 1].clone(); n];
    for i in (0..n - 1).rev() {
        suffix[i] = items[i].plus(&suffix[i + 1]);
    }
    let mut r = 0;
    for i in 0..n - 1 {
        let left = tau_t.slope(&prefix[i])?;
        let right = tau_t.slope(&suffix[i + 1])?;
        if tau_vals[i] <= tau_vals[i + 1] && left > right {
            r += 1;
        } else if tau_vals[i] > tau_vals[i + 1] && left <= right {
        } else {
            return Ok(0);
        }
    }
    Ok(if r % 2 == 0 { 1 } else { -1 })
}

/// The sign coefficient `S(seq; tau, tau_t)` in `{-1, 0, 1}`.
pub fn coeff_s<C: Additive, T1: SlopeMap<C>, T2: SlopeMap<C>>(
    seq: &[C],
    tau: &T1,
    tau_t: &T2,
) -> Result<i32> {
    if seq.is_empty() {
        bail!(Input, "empty class sequence");
    }
    let tau_vals = seq
        .iter()
        .map(|c| tau.slope(c))
        .collect::<Result<Vec<_>>>()?;
    s_with_slopes(seq, &tau_vals, tau_t)
}

/// Cut positions of a composition of `n` encoded by a bitmask over the
/// `n - 1` gaps, as the list `0 = a_0 < ... < a_m = n`.
fn cuts(mask: u32, n: usize) -> Vec<usize> {
    let mut out = vec![0];
    for i in 0..n - 1 {
        if mask & (1 << i) != 0 {
            out.push(i + 1);
        }
    }
    out.push(n);
    out
}

/// The coefficient `U(seq; tau, tau_t)`.
pub fn coeff_u<C: Additive, T1: SlopeMap<C>, T2: SlopeMap<C>>(
    seq: &[C],
    tau: &T1,
    tau_t: &T2,
) -> Result<Q> {
    let n = seq.len();
    if n == 0 {
        bail!(Input, "empty class sequence");
    }
    if n > 20 {
        bail!(Input, "sequence of length {n} is too long");
    }
    let total_t = tau_t.slope(&sum_of(seq))?;
    let alpha_t = seq
        .iter()
        .map(|c| tau.slope(c))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Q::zero();
    for amask in 0..(1u32 << (n - 1)) {
        let a = cuts(amask, n);
        let m = a.len() - 1;
        let mut betas = Vec::with_capacity(m);
        let mut beta_t = Vec::with_capacity(m);
        let mut ok = true;
        let mut fact = Q::one();
        for w in a.windows(2) {
            let b = sum_of(&seq[w[0]..w[1]]);
            let tb = tau.slope(&b)?;
            if alpha_t[w[0]..w[1]].iter().any(|t| *t != tb) {
                ok = false;
                break;
            }
            fact /= Q::from_integer(factorial((w[1] - w[0]) as u64));
            betas.push(b);
            beta_t.push(tb);
        }
        if !ok {
            continue;
        }
        let mut s_cache: BTreeMap<(usize, usize), i32> = BTreeMap::new();
        for bmask in 0..(1u32 << (m - 1)) {
            let b = cuts(bmask, m);
            let l = b.len() - 1;
            let mut prod = 1i32;
            for w in b.windows(2) {
                let g = sum_of(&betas[w[0]..w[1]]);
                if tau_t.slope(&g)? != total_t {
                    prod = 0;
                    break;
                }
                let s = match s_cache.get(&(w[0], w[1])) {
                    Some(s) => *s,
                    None => {
                        let s = s_with_slopes(&betas[w[0]..w[1]], &beta_t[w[0]..w[1]], tau_t)?;
                        s_cache.insert((w[0], w[1]), s);
                        s
                    }
                };
                prod *= s;
                if prod == 0 {
                    break;
                }
            }
            if prod == 0 {
                continue;
            }
            let sign = if (l - 1).is_multiple_of(2) { 1 } else { -1 };
            acc += BigRational::new((sign * prod).into(), (l as i64).into()) * &fact;
        }
    }
    Ok(acc)
}

/// Lie coefficient of a single word, `U(word) / len(word)`.
pub fn utilde_word<C: Additive, T1: SlopeMap<C>, T2: SlopeMap<C>>(
    word: &[C],
    tau: &T1,
    tau_t: &T2,
) -> Result<Q> {
    Ok(coeff_u(word, tau, tau_t)? / int(word.len() as i64))
}

/// Linear combination of words in the free associative algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorWordSum<C: Ord>(pub BTreeMap<Vec<C>, Q>);

/// Linear combination of left-nested brackets `[..[[w1,w2],w3],..,wn]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LieWordSum<C: Ord>(pub BTreeMap<Vec<C>, Q>);

fn add_into<C: Ord>(map: &mut BTreeMap<Vec<C>, Q>, word: Vec<C>, c: Q) {
    if c.is_zero() {
        return;
    }
    *map.entry(word).or_insert_with(Q::zero) += c;
}

fn prune<C: Ord>(map: &mut BTreeMap<Vec<C>, Q>) {
    map.retain(|_, v| !v.is_zero());
}

impl<C: Ord + Clone> TensorWordSum<C> {
    pub fn new() -> Self {
        Self(BTreeMap::new())
    }

    pub fn add(&mut self, word: Vec<C>, c: Q) {
        add_into(&mut self.0, word, c);
        prune(&mut self.0);
    }

    pub fn scaled(&self, c: &Q) -> Self {
        let mut out = Self::new();
        for (w, v) in &self.0 {
            out.add(w.clone(), v * c);
        }
        out
    }

    /// Restriction to words of length `len`.
    pub fn graded_piece(&self, len: usize) -> Self {
        Self(
            self.0
                .iter()
                .filter(|(w, _)| w.len() == len)
                .map(|(w, v)| (w.clone(), v.clone()))
                .collect(),
        )
    }

    pub fn lengths(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.0.keys().map(|w| w.len()).collect();
        v.sort();
        v.dedup();
        v
    }
}

impl<C: Ord + Clone> Default for TensorWordSum<C> {
    fn default() -> Self {
        Self::new()
    }
}

impl<C: Ord + Clone> LieWordSum<C> {
    pub fn new() -> Self {
        Self(BTreeMap::new())
    }

    pub fn add(&mut self, word: Vec<C>, c: Q) {
        add_into(&mut self.0, word, c);
        prune(&mut self.0);
    }
}

impl<C: Ord + Clone> Default for LieWordSum<C> {
    fn default() -> Self {
        Self::new()
    }
}

/// Expansion of one left-nested bracket into signed words.
fn expand_word<C: Clone>(word: &[C]) -> Vec<(Vec<C>, i32)> {
    let mut cur: Vec<(Vec<C>, i32)> = vec![(vec![word[0].clone()], 1)];
    for x in &word[1..] {
        let mut next = Vec::with_capacity(cur.len() * 2);
        for (w, s) in &cur {
            let mut right = w.clone();
            right.push(x.clone());
            next.push((right, *s));
            let mut left = Vec::with_capacity(w.len() + 1);
            left.push(x.clone());
            left.extend(w.iter().cloned());
            next.push((left, -s));
        }
        cur = next;
    }
    cur
}

/// Expands every bracket via `[f,g] = fg - gf`.
pub fn lie_expand<C: Ord + Clone>(lws: &LieWordSum<C>) -> TensorWordSum<C> {
    let mut out = BTreeMap::new();
    for (w, c) in &lws.0 {
        for (word, s) in expand_word(w) {
            add_into(&mut out, word, c * int(s as i64));
        }
    }
    prune(&mut out);
    TensorWordSum(out)
}

/// The left-bracketing map `rho(w1...wn) = [..[w1,w2],..,wn]`, expanded.
pub fn left_bracketing<C: Ord + Clone>(p: &TensorWordSum<C>) -> TensorWordSum<C> {
    lie_expand(&LieWordSum(p.0.clone()))
}

/// Distinct orderings of a multiset, in lexicographic order.
pub fn distinct_orderings<C: Ord + Clone>(multiset: &[C]) -> Vec<Vec<C>> {
    let mut cur: Vec<C> = multiset.to_vec();
    cur.sort();
    let mut out = vec![cur.clone()];
    loop {
        let n = cur.len();
        if n < 2 {
            return out;
        }
        let mut i = n - 1;
        while i > 0 && cur[i - 1] >= cur[i] {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        let mut j = n - 1;
        while cur[j] <= cur[i - 1] {
            j -= 1;
        }
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(cur.clone());
    }
}

/// `P = sum over distinct orderings w of U(w) w`.
pub fn word_sum<C: Additive, T1: SlopeMap<C>, T2: SlopeMap<C>>(
    multiset: &[C],
    tau: &T1,
    tau_t: &T2,
) -> Result<TensorWordSum<C>> {
    let mut p = TensorWordSum::new();
    for w in distinct_orderings(multiset) {
        let u = coeff_u(&w, tau, tau_t)?;
        p.add(w, u);
    }
    Ok(p)
}

/// Checks `rho(P) = n P` on every word-length piece of `p`.
pub fn check_dynkin<C: Ord + Clone>(p: &TensorWordSum<C>) -> Result<()> {
    for len in p.lengths() {
        let piece = p.graded_piece(len);
        if left_bracketing(&piece) != piece.scaled(&int(len as i64)) {
            bail!(NotLie, "word sum of length {len} is not primitive");
        }
    }
    Ok(())
}

/// Lie coefficients `U(w)/n` for all orderings of `multiset`, after checking
/// that the word sum is primitive.
pub fn coeff_utilde<C: Additive, T1: SlopeMap<C>, T2: SlopeMap<C>>(
    multiset: &[C],
    tau: &T1,
    tau_t: &T2,
) -> Result<LieWordSum<C>> {
    if multiset.is_empty() {
        bail!(Input, "empty multiset");
    }
    let p = word_sum(multiset, tau, tau_t)?;
    check_dynkin(&p)?;
    let n = int(multiset.len() as i64);
    Ok(LieWordSum(
        p.0.iter().map(|(w, c)| (w.clone(), c / &n)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classlat::{CurveClass, KClass};
    use crate::rat::frac;
    use crate::stability::{MuSlope, PairSlope};

    fn slope_by_n(c: &CurveClass) -> Result<ExtendedRational> {
        Ok(ExtendedRational::Finite(int(c.n) / int(c.beta[0])))
    }

    fn flat(_: &CurveClass) -> Result<ExtendedRational> {
        Ok(ExtendedRational::Finite(int(0)))
    }

    fn cc(b: i64, n: i64) -> CurveClass {
        CurveClass::new(vec![b], n)
    }

    #[test]
    fn singleton_values() {
        let x = [cc(1, 3)];
        assert_eq!(coeff_s(&x, &slope_by_n, &flat).unwrap(), 1);
        assert_eq!(coeff_u(&x, &slope_by_n, &flat).unwrap(), int(1));
    }

    #[test]
    fn two_term_sign_cases() {
        let seq = [cc(1, 0), cc(1, 1)];
        let rev = |c: &CurveClass| Ok(ExtendedRational::Finite(-int(c.n) / int(c.beta[0])));
        assert_eq!(coeff_s(&seq, &slope_by_n, &rev).unwrap(), -1);
        let seq2 = [cc(1, 1), cc(1, 0)];
        assert_eq!(coeff_s(&seq2, &slope_by_n, &slope_by_n).unwrap(), 0);
    }

    #[test]
    fn equal_slopes_give_zero_for_two_terms() {
        let seq = [cc(1, 1), cc(1, 1)];
        assert_eq!(coeff_u(&seq, &slope_by_n, &slope_by_n).unwrap(), int(0));
        assert_eq!(coeff_u(&seq, &flat, &flat).unwrap(), int(0));
    }

    #[test]
    fn bracket_expansion() {
        let mut l = LieWordSum::new();
        l.add(vec!['x', 'y'], int(1));
        let t = lie_expand(&l);
        assert_eq!(t.0.get(&vec!['x', 'y']), Some(&int(1)));
        assert_eq!(t.0.get(&vec!['y', 'x']), Some(&int(-1)));
        let mut l3 = LieWordSum::new();
        l3.add(vec!['x', 'y', 'z'], int(1));
        let t3 = lie_expand(&l3);
        let expect: BTreeMap<Vec<char>, Q> = [
            (vec!['x', 'y', 'z'], int(1)),
            (vec!['y', 'x', 'z'], int(-1)),
            (vec!['z', 'x', 'y'], int(-1)),
            (vec!['z', 'y', 'x'], int(1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(t3.0, expect);
        let mut single = LieWordSum::new();
        single.add(vec!['x'], int(2));
        assert_eq!(lie_expand(&single).0, single.0);
    }

    #[test]
    fn repeated_letters_cancel() {
        let mut l = LieWordSum::new();
        l.add(vec!['x', 'x'], int(1));
        assert!(lie_expand(&l).0.is_empty());
    }

    #[test]
    fn orderings_of_multiset() {
        assert_eq!(
            distinct_orderings(&[1, 1, 2]),
            vec![vec![1, 1, 2], vec![1, 2, 1], vec![2, 1, 1]]
        );
        assert_eq!(distinct_orderings(&[3]).len(), 1);
        assert_eq!(distinct_orderings(&[1, 2, 3, 4]).len(), 24);
    }

    #[test]
    fn pair_singleton_is_one() {
        let tau = PairSlope {
            omega: vec![int(1)],
            c: int(50),
        };
        let tau_t = PairSlope {
            omega: vec![int(1)],
            c: frac(5, 2),
        };
        let lws = coeff_utilde(&[KClass::pair(vec![1], 3)], &tau, &tau_t).unwrap();
        assert_eq!(lws.0.get(&vec![KClass::pair(vec![1], 3)]), Some(&int(1)));
    }

    #[test]
    fn pair_with_sheaf_gives_bracket() {
        let tau = PairSlope {
            omega: vec![int(1)],
            c: int(50),
        };
        let tau_t = PairSlope {
            omega: vec![int(1)],
            c: frac(5, 2),
        };
        let x = KClass::sheaf(vec![1], 3);
        let y = KClass::pair(vec![0], 0);
        let lws = coeff_utilde(&[x.clone(), y.clone()], &tau, &tau_t).unwrap();
        assert_eq!(lws.0.get(&vec![x.clone(), y.clone()]), Some(&frac(-1, 2)));
        assert_eq!(lws.0.get(&vec![y.clone(), x.clone()]), Some(&frac(1, 2)));
        let p = word_sum(&[x.clone(), y.clone()], &tau, &tau_t).unwrap();
        assert_eq!(lie_expand(&lws), p);
    }

    #[test]
    fn identical_stabilities_kill_longer_words() {
        let mu = MuSlope {
            omega: vec![int(1), int(2)],
        };
        let a = CurveClass::new(vec![1, 0], 1);
        let b = CurveClass::new(vec![0, 1], 2);
        let c = CurveClass::new(vec![1, 1], 3);
        for w in distinct_orderings(&[a.clone(), b.clone(), c.clone()]) {
            assert_eq!(coeff_u(&w, &mu, &mu).unwrap(), int(0));
        }
        assert_eq!(coeff_u(&[a.clone(), a.clone()], &mu, &mu).unwrap(), int(0));
    }
}
