//! Wall-crossing engine: DT classes under a change of Kähler vector, the
//! stable-pair recursion, and certified rational generating functions.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::classlat::{
    factors, is_superpositive, is_zero_vec, ordered_splittings, split_count, GeometryModel, KClass,
};
use crate::error::{bail, Result};
use crate::quasipoly::{solve_difference, QuasiPoly, Value, Vector};
use crate::rat::{ceil_q, floor_q, int, lcm, show, to_i64};
use crate::ratgen::{qp_tail_to_gf, PoleLocation, RationalGF};
use crate::stability::{MuSlope, PairSlope};
use crate::vertexmodel::{
    nested_lifted, op_r, proj_e0, CoeffRing, ModeElement, Monomial, RingElem, TermKey, VertexConfig,
};
use crate::wallcoeffs::utilde_word;
use crate::Q;

/// Basis vector `s^spow * m * t^tdeg` of the symbol module, with `m` spelled by symbol names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Basis {
    pub mono: Vec<(String, u32)>,
    pub tdeg: u32,
    pub spow: u32,
}

impl Basis {
    pub fn symbol(name: &str) -> Self {
        Self {
            mono: vec![(name.into(), 1)],
            tdeg: 0,
            spow: 0,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.mono.is_empty() {
            write!(f, "1")?;
        }
        for (i, (name, e)) in self.mono.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if *e == 1 {
                write!(f, "{name}")?;
            } else {
                write!(f, "{name}^{e}")?;
            }
        }
        if self.tdeg > 0 {
            write!(f, " t^{}", self.tdeg)?;
        }
        if self.spow > 0 {
            write!(f, " s^{}", self.spow)?;
        }
        Ok(())
    }
}

/// Values of invariants: finite rational combinations of [`Basis`] vectors.
pub type ModVal = Vector<Basis>;

/// Places a module value in class `class` of the vertex model.
pub fn to_element(v: &ModVal, class: &KClass, cfg: &VertexConfig) -> Result<ModeElement> {
    let mut out = ModeElement::zero();
    for (b, q) in v.entries() {
        let mut mono = Monomial::one();
        for (name, e) in &b.mono {
            let Some(id) = cfg.symbols.find(name) else {
                bail!(Config, "unknown symbol `{name}`");
            };
            for _ in 0..*e {
                mono = mono.mul(&Monomial::single(id));
            }
        }
        if cfg.ring.truncation() < b.spow && b.spow > 0 {
            continue;
        }
        let key = TermKey {
            class: class.clone(),
            mono,
            tdeg: b.tdeg,
        };
        out.add_term(key, RingElem::monomial(q.clone(), b.spow));
    }
    Ok(out)
}

/// Reads back a module value; every term must carry class `class`.
pub fn from_element(e: &ModeElement, class: &KClass, cfg: &VertexConfig) -> Result<ModVal> {
    let mut out = ModVal::new();
    for (k, c) in e.terms() {
        if k.class != *class {
            bail!(
                Invariant,
                "term in class {} where {} was expected",
                k.class,
                class
            );
        }
        let mono = k
            .mono
            .factors()
            .iter()
            .map(|&(id, e)| {
                (
                    cfg.symbols
                        .get(id)
                        .map_or_else(|| alloc::format!("#{id}"), |s| s.name.clone()),
                    e,
                )
            })
            .collect::<Vec<_>>();
        for (p, q) in c.coeffs().iter().enumerate() {
            out.add_entry(
                Basis {
                    mono: mono.clone(),
                    tdeg: k.tdeg,
                    spow: p as u32,
                },
                q.clone(),
            );
        }
    }
    Ok(out)
}

/// Input data attached to one curve class.
#[derive(Debug, Clone, PartialEq)]
pub struct DtEntry {
    /// `n -> DT(beta, n)` as a quasi-polynomial in the symbol module.
    pub values: QuasiPoly<ModVal>,
    /// `C_beta`: the recursion applies when `n / (omega . beta) > C_beta`.
    pub threshold: Q,
    /// `M_beta`: stable pair classes vanish for `n <= M_beta`.
    pub vanish_below: i64,
    /// Stable pair classes in the window between the two bounds.
    pub middle: BTreeMap<i64, ModVal>,
}

/// Everything the engine needs for one geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vertex: VertexConfig,
    pub point: String,
    pub dt: BTreeMap<Vec<i64>, DtEntry>,
}

impl Scenario {
    pub fn new(vertex: VertexConfig, point: &str, dt: BTreeMap<Vec<i64>, DtEntry>) -> Result<Self> {
        let sc = Self {
            vertex,
            point: point.into(),
            dt,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn geometry(&self) -> &GeometryModel {
        &self.vertex.geometry
    }

    pub fn ring(&self) -> &CoeffRing {
        &self.vertex.ring
    }

    /// Per-residue degree bound for DT inputs: 6, or `(N+1)(3(2+N)+1)-1` when truncated.
    pub fn degree_bound(&self) -> usize {
        let n = self.vertex.ring.truncation() as usize;
        if n == 0 {
            6
        } else {
            (n + 1) * (3 * (2 + n) + 1) - 1
        }
    }

    fn validate(&self) -> Result<()> {
        let geom = self.geometry();
        let Some(pid) = self.vertex.symbols.find(&self.point) else {
            bail!(Config, "point symbol `{}` is not declared", self.point);
        };
        let psym = self.vertex.symbols.get(pid).expect("found symbol");
        if psym.class != KClass::pair(geom.zero_class(), 0) {
            bail!(
                Config,
                "point symbol `{}` must live in class (1,0,0)",
                self.point
            );
        }
        for (beta, e) in &self.dt {
            let what = alloc::format!("class {beta:?}");
            if !is_superpositive(geom, beta)? {
                bail!(Config, "{what} is not superpositive");
            }
            let d = geom.degree(beta);
            if d <= 0 || !(d as u64).is_multiple_of(e.values.period()) {
                bail!(
                    Config,
                    "{what}: DT period {} does not divide {d}",
                    e.values.period()
                );
            }
            if e.values.degree() > self.degree_bound() {
                bail!(
                    Config,
                    "{what}: DT degree {} exceeds {}",
                    e.values.degree(),
                    self.degree_bound()
                );
            }
            for p in e.values.polys() {
                for c in p.coeffs() {
                    self.check_value(c, &what)?;
                    if c.entries().any(|(b, _)| b.tdeg != 0) {
                        bail!(Config, "{what}: DT values must have t-degree 0");
                    }
                }
            }
            let top = self.window_top(beta, e);
            if e.vanish_below > top {
                bail!(
                    Config,
                    "{what}: vanishing bound {} lies above the recursion window start {}",
                    e.vanish_below,
                    top + 1
                );
            }
            for (n, v) in &e.middle {
                if *n <= e.vanish_below || *n > top {
                    bail!(
                        Config,
                        "{what}: middle value at n = {n} outside ({}, {top}]",
                        e.vanish_below
                    );
                }
                self.check_value(v, &what)?;
            }
        }
        Ok(())
    }

    fn check_value(&self, v: &ModVal, what: &str) -> Result<()> {
        for (b, _) in v.entries() {
            for (name, _) in &b.mono {
                if self.vertex.symbols.find(name).is_none() {
                    bail!(Config, "{what}: unknown symbol `{name}`");
                }
            }
            if b.spow > self.vertex.ring.truncation() {
                bail!(
                    Config,
                    "{what}: power s^{} exceeds truncation {}",
                    b.spow,
                    self.vertex.ring.truncation()
                );
            }
        }
        Ok(())
    }

    /// Largest `n` with `n <= C_beta * (omega . beta)`.
    fn window_top(&self, beta: &[i64], e: &DtEntry) -> i64 {
        let w = self.geometry().omega_dot(beta);
        to_i64(&floor_q(&(&e.threshold * w))).unwrap_or(i64::MAX)
    }

    pub fn entry(&self, beta: &[i64]) -> Result<&DtEntry> {
        match self.dt.get(beta) {
            Some(e) => Ok(e),
            None => bail!(Config, "no DT data for class {beta:?}"),
        }
    }

    pub fn dt_value(&self, beta: &[i64], n: i64) -> Result<ModVal> {
        Ok(self.entry(beta)?.values.eval(n))
    }

    pub fn point_value(&self) -> ModVal {
        ModVal::basis(Basis::symbol(&self.point))
    }

    /// First `n` at which the recursion is valid.
    pub fn recursion_start(&self, beta: &[i64]) -> Result<i64> {
        let e = self.entry(beta)?;
        Ok(self.window_top(beta, e) + 1)
    }
}

/// Cache of stable pair classes keyed by `(beta, n)`.
pub trait Memo {
    fn get(&self, key: &(Vec<i64>, i64)) -> Option<ModVal>;
    /// Stores `v` unless a value is already present; returns the stored value.
    fn put(&self, key: (Vec<i64>, i64), v: ModVal) -> ModVal;
}

/// Single-threaded cache.
#[derive(Debug, Default)]
pub struct LocalMemo(RefCell<BTreeMap<(Vec<i64>, i64), ModVal>>);

impl LocalMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.0.borrow().len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.borrow().is_empty()
    }
}

impl Memo for LocalMemo {
    fn get(&self, key: &(Vec<i64>, i64)) -> Option<ModVal> {
        self.0.borrow().get(key).cloned()
    }
    fn put(&self, key: (Vec<i64>, i64), v: ModVal) -> ModVal {
        self.0.borrow_mut().entry(key).or_insert(v).clone()
    }
}

/// No caching at all.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoMemo;

impl Memo for NoMemo {
    fn get(&self, _: &(Vec<i64>, i64)) -> Option<ModVal> {
        None
    }
    fn put(&self, _: (Vec<i64>, i64), v: ModVal) -> ModVal {
        v
    }
}

/// Wall levels `(c_minus, c_plus)` around `mu = n / (omega . beta)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallLevels {
    pub mu: Q,
    pub c_minus: Q,
    pub c_plus: Q,
}

/// Lower level `c_minus`: below `mu`, above `C_beta`, and above every class slope in `[., mu)`.
pub fn lower_level(sc: &Scenario, beta: &[i64], n: i64) -> Result<(Q, Q)> {
    let geom = sc.geometry();
    let e = sc.entry(beta)?;
    let w = geom.omega_dot(beta);
    let mu = int(n) / &w;
    if mu <= e.threshold {
        bail!(
            NotApplicable,
            "n = {n} lies at or below the recursion window for class {beta:?}"
        );
    }
    let mut l = num_bigint::BigInt::one();
    for f in factors(geom, beta)? {
        let wf = geom.omega_dot(&f);
        l = num_integer::Integer::lcm(&l, wf.numer());
    }
    let eps = Q::one() / Q::from_integer(l * 2);
    let half = (&e.threshold + &mu) / int(2);
    let c_minus = if &mu - &eps > half { &mu - &eps } else { half };
    Ok((mu, c_minus))
}

/// One enumerated term of the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecursionTerm {
    pub pair_pos: usize,
    pub classes: Vec<KClass>,
}

/// The `k >= 2` part of the stable-pair identity at `(beta, n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecursionSum {
    pub levels: WallLevels,
    /// `sum over k >= 2 of Utilde * bracket`, before the overall sign.
    pub sum: ModeElement,
    pub enumerated: usize,
    pub nonzero: usize,
    pub log: Vec<String>,
}

/// Integer tuples with `lo[i] <= x[i] (<= hi[i])` and `sum x = total`.
fn tuples(lo: &[i64], hi: &[Option<i64>], total: i64) -> Vec<Vec<i64>> {
    let k = lo.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(
        i: usize,
        lo: &[i64],
        hi: &[Option<i64>],
        rest: i64,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let k = lo.len();
        if i + 1 == k {
            if rest >= lo[i] && hi[i].is_none_or(|h| rest <= h) {
                cur.push(rest);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        let tail_lo: i64 = lo[i + 1..].iter().sum();
        let mut top = rest - tail_lo;
        if let Some(h) = hi[i] {
            top = top.min(h);
        }
        for x in lo[i]..=top {
            cur.push(x);
            go(i + 1, lo, hi, rest - x, cur, out);
            cur.pop();
        }
    }
    if k > 0 {
        go(0, lo, hi, total, &mut cur, &mut out);
    }
    out
}

/// Enumerates the decompositions of `(beta, n)` entering the recursion.
///
/// Sheaf pieces satisfy `n_i >= ceil(c_minus * (omega . beta_i)) - margin`;
/// pair pieces with nonzero class satisfy `n_j > M_{beta_j}`.
pub fn recursion_decompositions(
    sc: &Scenario,
    beta: &[i64],
    n: i64,
    c_minus: &Q,
    margin: i64,
) -> Result<Vec<RecursionTerm>> {
    let geom = sc.geometry();
    let kmax = split_count(geom, beta)? as usize + 1;
    let zero = geom.zero_class();
    let mut out = Vec::new();
    for k in 2..=kmax {
        for j in 0..k {
            for split in ordered_splittings(beta, k, Some(j)) {
                let mut lo = Vec::with_capacity(k);
                let mut hi = Vec::with_capacity(k);
                for (i, b) in split.iter().enumerate() {
                    if i == j {
                        if *b == zero {
                            lo.push(0);
                            hi.push(Some(0));
                        } else {
                            lo.push(sc.entry(b)?.vanish_below + 1);
                            hi.push(None);
                        }
                    } else {
                        let w = geom.omega_dot(b);
                        let bound =
                            to_i64(&ceil_q(&(c_minus * w))).unwrap_or(i64::MIN / 4) - margin;
                        lo.push(bound);
                        hi.push(None);
                    }
                }
                for ns in tuples(&lo, &hi, n) {
                    let classes = split
                        .iter()
                        .zip(&ns)
                        .enumerate()
                        .map(|(i, (b, m))| {
                            if i == j {
                                KClass::pair(b.clone(), *m)
                            } else {
                                KClass::sheaf(b.clone(), *m)
                            }
                        })
                        .collect();
                    out.push(RecursionTerm {
                        pair_pos: j,
                        classes,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Stable pair class at `(beta, n)`, dispatching between vanishing, the
/// configured window values and the recursion.
pub fn pt_value<M: Memo + ?Sized>(sc: &Scenario, memo: &M, beta: &[i64], n: i64) -> Result<ModVal> {
    if is_zero_vec(beta) {
        return Ok(if n == 0 {
            sc.point_value()
        } else {
            ModVal::new()
        });
    }
    let e = sc.entry(beta)?;
    if n <= e.vanish_below {
        return Ok(ModVal::new());
    }
    if n < sc.recursion_start(beta)? {
        return match e.middle.get(&n) {
            Some(v) => Ok(v.clone()),
            None => bail!(NotApplicable, "recursion does not apply at n = {n} for class {beta:?} and no window value is configured"),
        };
    }
    let key = (beta.to_vec(), n);
    if let Some(v) = memo.get(&key) {
        return Ok(v);
    }
    let v = pt_recursion_step(sc, memo, beta, n)?;
    Ok(memo.put(key, v))
}

/// Right-hand side of the recursion at `(beta, n)`.
pub fn pt_recursion_step<M: Memo + ?Sized>(
    sc: &Scenario,
    memo: &M,
    beta: &[i64],
    n: i64,
) -> Result<ModVal> {
    let rs = recursion_sum(sc, memo, beta, n, 0)?;
    let class = KClass::pair(beta.to_vec(), n);
    from_element(&rs.sum.scale(&-Q::one()), &class, &sc.vertex)
}

/// Evaluates the `k >= 2` sum. With `margin > 0` the sheaf ranges are widened
/// and every term in the widened layer must have vanishing coefficient.
pub fn recursion_sum<M: Memo + ?Sized>(
    sc: &Scenario,
    memo: &M,
    beta: &[i64],
    n: i64,
    margin: i64,
) -> Result<RecursionSum> {
    let geom = sc.geometry();
    let cfg = &sc.vertex;
    let (mu, c_minus) = lower_level(sc, beta, n)?;
    let terms = recursion_decompositions(sc, beta, n, &c_minus, margin)?;
    let mut top = mu.clone();
    for t in &terms {
        for (i, c) in t.classes.iter().enumerate() {
            if i != t.pair_pos {
                let s = int(c.n) / geom.omega_dot(&c.beta);
                if s > top {
                    top = s;
                }
            }
        }
    }
    let c_plus = top + Q::one();
    let omega = geom.omega().to_vec();
    let tau = PairSlope {
        omega: omega.clone(),
        c: c_plus.clone(),
    };
    let tau_t = PairSlope {
        omega,
        c: c_minus.clone(),
    };
    let own_split = split_count(geom, beta)?;
    let mut log = vec![alloc::format!(
        "class {beta:?}, n = {n}: mu = {}, c- = {}, c+ = {}, {} decompositions",
        show(&mu),
        show(&c_minus),
        show(&c_plus),
        terms.len()
    )];
    let mut sum = ModeElement::zero();
    let mut nonzero = 0;
    for t in &terms {
        let coeff = utilde_word(&t.classes, &tau, &tau_t)?;
        let outside = t
            .classes
            .iter()
            .enumerate()
            .any(|(i, c)| i != t.pair_pos && int(c.n) < &c_minus * geom.omega_dot(&c.beta));
        if coeff.is_zero() {
            continue;
        }
        if outside {
            bail!(
                Invariant,
                "decomposition {:?} below the lower wall has nonzero coefficient {}",
                t.classes,
                show(&coeff)
            );
        }
        let pair = &t.classes[t.pair_pos];
        if !is_zero_vec(&pair.beta) && split_count(geom, &pair.beta)? >= own_split {
            bail!(
                Invariant,
                "recursive call on {:?} does not lower the split count of {beta:?}",
                pair.beta
            );
        }
        let pv = pt_value(sc, memo, &pair.beta, pair.n)?;
        if pv.is_nil() {
            continue;
        }
        let mut items = Vec::with_capacity(t.classes.len());
        let mut ranks = Vec::with_capacity(t.classes.len());
        for (i, c) in t.classes.iter().enumerate() {
            let v = if i == t.pair_pos {
                pv.clone()
            } else {
                sc.dt_value(&c.beta, c.n)?
            };
            items.push(to_element(&v, c, cfg)?);
            ranks.push(c.d);
        }
        let br = nested_lifted(&items, &ranks, cfg)?;
        if !br.is_zero() {
            nonzero += 1;
            sum.add_assign(&br.scale(&coeff));
        }
    }
    log.push(alloc::format!("{nonzero} nonzero terms"));
    Ok(RecursionSum {
        levels: WallLevels {
            mu,
            c_minus,
            c_plus,
        },
        sum,
        enumerated: terms.len(),
        nonzero,
        log,
    })
}

/// `Utilde((1,beta,n)) * PT + (k >= 2 sum)`, which vanishes when `pt` is correct.
pub fn eq_residual<M: Memo + ?Sized>(
    sc: &Scenario,
    memo: &M,
    beta: &[i64],
    n: i64,
    pt: &ModVal,
) -> Result<ModeElement> {
    let rs = recursion_sum(sc, memo, beta, n, 0)?;
    let class = KClass::pair(beta.to_vec(), n);
    let tau = PairSlope {
        omega: sc.geometry().omega().to_vec(),
        c: rs.levels.c_plus.clone(),
    };
    let tau_t = PairSlope {
        omega: sc.geometry().omega().to_vec(),
        c: rs.levels.c_minus.clone(),
    };
    let single = utilde_word(core::slice::from_ref(&class), &tau, &tau_t)?;
    Ok(to_element(pt, &class, &sc.vertex)?
        .scale(&single)
        .add(&rs.sum))
}

/// Result of a DT wall-crossing evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct WallcrossOutcome {
    pub value: ModVal,
    pub enumerated: usize,
    pub nonzero: usize,
    pub log: Vec<String>,
}

/// DT class at `(beta, n)` for the Kähler vector `omega_new`, from the DT data at the scenario's vector.
///
/// Each summand `n_i` ranges over `[min - width, max + width]` where min and
/// max are the proportional shares `n (w_i / w)` under the two vectors; a
/// nonzero term on the edge of that box is reported as a configuration error.
pub fn dt_wallcross(
    sc: &Scenario,
    beta: &[i64],
    n: i64,
    omega_new: &[Q],
    width: i64,
) -> Result<WallcrossOutcome> {
    let geom = sc.geometry();
    if omega_new.len() != geom.rank() {
        bail!(
            Input,
            "Kähler vector has length {}, geometry rank is {}",
            omega_new.len(),
            geom.rank()
        );
    }
    if omega_new.iter().any(|w| !w.is_positive()) {
        bail!(Input, "new Kähler vector must be componentwise positive");
    }
    if !is_superpositive(geom, beta)? {
        bail!(Input, "class {beta:?} is not superpositive");
    }
    let dot = |o: &[Q], b: &[i64]| -> Q { o.iter().zip(b).map(|(x, y)| x * int(*y)).sum() };
    let (a, b) = (geom.omega_dot(beta), dot(omega_new, beta));
    let tau = MuSlope {
        omega: geom.omega().to_vec(),
    };
    let tau_t = MuSlope {
        omega: omega_new.to_vec(),
    };
    let cfg = &sc.vertex;
    let mut total = ModeElement::zero();
    let mut enumerated = 0;
    let mut nonzero = 0;
    let mut log = Vec::new();
    for k in 1..=split_count(geom, beta)? as usize {
        for split in ordered_splittings(beta, k, None) {
            let mut skip = false;
            for p in &split {
                if !is_superpositive(geom, p)? {
                    skip = true;
                }
            }
            if skip {
                continue;
            }
            let mut lo = Vec::with_capacity(k);
            let mut hi = Vec::with_capacity(k);
            for p in &split {
                let x = int(n) * geom.omega_dot(p) / &a;
                let y = int(n) * dot(omega_new, p) / &b;
                let (l, h) = if x < y { (x, y) } else { (y, x) };
                lo.push(to_i64(&floor_q(&l)).unwrap_or(0) - width);
                hi.push(Some(to_i64(&ceil_q(&h)).unwrap_or(0) + width));
            }
            log.push(alloc::format!("split {split:?}: ranges {lo:?}..{hi:?}"));
            for ns in tuples(&lo, &hi, n) {
                enumerated += 1;
                let classes: Vec<KClass> = split
                    .iter()
                    .zip(&ns)
                    .map(|(p, m)| KClass::sheaf(p.clone(), *m))
                    .collect();
                let word: Vec<_> = classes.iter().map(KClass::curve).collect();
                let coeff = utilde_word(&word, &tau, &tau_t)?;
                if coeff.is_zero() {
                    continue;
                }
                if k > 1
                    && ns
                        .iter()
                        .enumerate()
                        .any(|(i, m)| *m == lo[i] || Some(*m) == hi[i])
                {
                    bail!(Config, "nonzero wall-crossing term {:?} on the edge of the search box; increase the width", ns);
                }
                let items = classes
                    .iter()
                    .map(|c| to_element(&sc.dt_value(&c.beta, c.n)?, c, cfg))
                    .collect::<Result<Vec<_>>>()?;
                let ranks = vec![0; k];
                let br = nested_lifted(&items, &ranks, cfg)?;
                if !br.is_zero() {
                    nonzero += 1;
                    total.add_assign(&br.scale(&coeff));
                }
            }
        }
    }
    let class = KClass::sheaf(beta.to_vec(), n);
    let projected = proj_e0(&total, &a)?;
    Ok(WallcrossOutcome {
        value: from_element(&projected, &class, cfg)?,
        enumerated,
        nonzero,
        log,
    })
}

/// Knobs for [`pt_series`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtOptions {
    /// Extra annihilator windows required beyond the fitting points, per residue.
    pub holdout: usize,
    /// Largest difference order tried; defaults to one more than the degree bound.
    pub max_order: Option<usize>,
    /// How far past the recursion start the tail may begin.
    pub tail_search: i64,
    /// Points beyond the fitted range checked against fresh recursion values.
    pub extrapolate: i64,
}

impl Default for PtOptions {
    fn default() -> Self {
        Self {
            holdout: 3,
            max_order: None,
            tail_search: 8,
            extrapolate: 4,
        }
    }
}

/// Certificate accompanying a generating function.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesCertificate {
    pub vanish_below: i64,
    pub recursion_start: i64,
    pub tail_start: i64,
    pub period_bound: u64,
    pub period: u64,
    pub order: usize,
    pub degrees: Vec<usize>,
    pub sampled: (i64, i64),
    pub extrapolated: (i64, i64),
    pub poles: BTreeMap<PoleLocation, u32>,
    /// Whether every computed value lies in the kernel of `R`.
    pub kernel_of_r: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PtSeries {
    pub gf: RationalGF<ModVal>,
    pub tail: QuasiPoly<ModVal>,
    pub values: BTreeMap<i64, ModVal>,
    pub certificate: SeriesCertificate,
}

/// Period bound for the stable-pair sequence of `beta`: lcm of the DT periods,
/// the degrees and the numerators of `omega . beta'` over factors `beta'`.
pub fn series_period_bound(sc: &Scenario, beta: &[i64]) -> Result<u64> {
    let geom = sc.geometry();
    let mut l = 1u64;
    for f in factors(geom, beta)? {
        l = lcm(l, geom.degree(&f).unsigned_abs());
        let w = geom.omega_dot(&f);
        l = lcm(l, to_i64(w.numer()).map_or(1, |v| v.unsigned_abs()));
        if let Some(e) = sc.dt.get(&f) {
            l = lcm(l, e.values.period());
        }
    }
    Ok(l)
}

/// Stable-pair generating function of `beta` with its certificate.
pub fn pt_series<M: Memo + ?Sized>(
    sc: &Scenario,
    memo: &M,
    beta: &[i64],
    opts: &PtOptions,
) -> Result<PtSeries> {
    let e = sc.entry(beta)?;
    let m_bound = e.vanish_below;
    let start = sc.recursion_start(beta)?.max(m_bound + 1);
    let period_bound = series_period_bound(sc, beta)?;
    let max_order = opts.max_order.unwrap_or(sc.degree_bound() + 1);
    let p = period_bound as i64;
    let span = opts.tail_search + p * (max_order + opts.holdout) as i64;
    let end = start + span - 1;
    let mut values = BTreeMap::new();
    for n in m_bound + 1..=end {
        values.insert(n, pt_value(sc, memo, beta, n)?);
    }
    let mut found = None;
    let mut last_err = None;
    'search: for tail_start in start..=start + opts.tail_search {
        let samples: BTreeMap<i64, ModVal> = values
            .range(tail_start..)
            .map(|(k, v)| (*k, v.clone()))
            .collect();
        for order in 1..=max_order {
            let per_residue = samples.len() / period_bound as usize;
            if per_residue < order + opts.holdout {
                continue;
            }
            match solve_difference(order, period_bound, &samples) {
                Ok(qp) => {
                    found = Some((tail_start, order, qp));
                    break 'search;
                }
                Err(err) => last_err = Some(err),
            }
        }
    }
    let Some((tail_start, order, tail)) = found else {
        let why = last_err.map_or_else(
            || String::from("not enough samples"),
            |e| alloc::format!("{e}"),
        );
        bail!(Certification, "no quasi-polynomial tail of order <= {max_order} and period dividing {period_bound} for class {beta:?}: {why}");
    };
    let exceptional: BTreeMap<i64, ModVal> = values
        .range(..tail_start)
        .map(|(k, v)| (*k, v.clone()))
        .collect();
    let gf = qp_tail_to_gf(m_bound, &exceptional, &tail, tail_start)?;
    for (n, v) in &values {
        if gf.coefficient(*n) != *v {
            bail!(
                Certification,
                "generating function disagrees with computed value at n = {n}"
            );
        }
    }
    for n in m_bound - p..=m_bound {
        if !gf.coefficient(n).is_nil() {
            bail!(
                Certification,
                "generating function has a nonzero coefficient at n = {n} <= {m_bound}"
            );
        }
    }
    for n in end + 1..=end + opts.extrapolate {
        let fresh = pt_value(sc, memo, beta, n)?;
        if gf.coefficient(n) != fresh {
            bail!(
                Certification,
                "extrapolated coefficient disagrees with the recursion at n = {n}"
            );
        }
        let res = eq_residual(sc, memo, beta, n, &gf.coefficient(n))?;
        if !res.is_zero() {
            bail!(Invariant, "stable-pair identity fails at n = {n}");
        }
    }
    let poles = gf.pole_locations();
    for loc in poles.keys() {
        if let PoleLocation::RootOfUnity { m, .. } = loc {
            if period_bound % m != 0 {
                bail!(Invariant, "pole at a primitive {m}-th root of unity is not allowed by period {period_bound}");
            }
        }
    }
    let class = KClass::pair(beta.to_vec(), 0);
    let kernel_of_r = values.iter().all(|(n, v)| {
        let c = KClass {
            n: *n,
            ..class.clone()
        };
        to_element(v, &c, &sc.vertex)
            .map(|el| op_r(&el, &Q::one()).is_zero())
            .unwrap_or(false)
    });
    let degrees = tail.polys().iter().map(|p| p.degree()).collect();
    let certificate = SeriesCertificate {
        vanish_below: m_bound,
        recursion_start: start,
        tail_start,
        period_bound,
        period: tail.period(),
        order,
        degrees,
        sampled: (m_bound + 1, end),
        extrapolated: (end + 1, end + opts.extrapolate),
        poles,
        kernel_of_r,
    };
    Ok(PtSeries {
        gf,
        tail,
        values,
        certificate,
    })
}

/// Linear functional on the symbol module with a cohomological degree tag.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct InsertionFunctional {
    pub weights: BTreeMap<Basis, Q>,
    pub degree: u32,
}

impl InsertionFunctional {
    pub fn coordinate(b: Basis, degree: u32) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(b, Q::one());
        Self { weights, degree }
    }

    pub fn apply(&self, v: &ModVal) -> Q {
        v.entries()
            .map(|(b, q)| self.weights.get(b).map_or_else(Q::zero, |w| w * q))
            .sum()
    }

    fn check(&self, ring: &CoeffRing) -> Result<()> {
        if ring.truncation() > 0 && self.degree > ring.truncation() {
            bail!(
                Input,
                "functional of degree {} needs truncation at least {}",
                self.degree,
                self.degree
            );
        }
        Ok(())
    }
}

/// Applies `f` coefficientwise to a generating function.
pub fn apply_insertion(
    f: &InsertionFunctional,
    series: &RationalGF<ModVal>,
    ring: &CoeffRing,
) -> Result<RationalGF<Q>> {
    f.check(ring)?;
    Ok(series.map(|v| f.apply(v)))
}

/// Applies `f` to a table of values.
pub fn apply_insertion_values(
    f: &InsertionFunctional,
    values: &BTreeMap<i64, ModVal>,
    ring: &CoeffRing,
) -> Result<BTreeMap<i64, Q>> {
    f.check(ring)?;
    Ok(values.iter().map(|(n, v)| (*n, f.apply(v))).collect())
}
