use super::model::ModelSpec;
use super::poly::GammaPolynomial;
use super::trace::{MatrixTrace, PsiAtom, TraceFunctional};
#[cfg(test)]
use super::trace::ScalarTrace;
use crate::error::{Error, Result};
use crate::ncpart::{enumerate_noncrossing, kreweras_complement};
use crate::scalar::{catalan, rat_int, Rat, Scalar};
#[cfg(test)]
use crate::scalar::rat;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

/// Moments of the standard semicircle variable: Catalan numbers at even
/// order, zero at odd order.
pub fn semicircle_moment(k: usize) -> Rat {
    if k % 2 == 1 {
        rat_int(0)
    } else {
        rat_int(catalan((k / 2) as u64) as i128)
    }
}

/// State on the lag-symbol algebra: a word of c-subscripts evaluates to
/// (1+y)^{-1} when the subscripts sum to zero, else 0. The empty word is the
/// unit and evaluates to 1.
pub fn c_state(subscripts: &[i32], y: &Rat) -> Rat {
    if subscripts.is_empty() {
        return rat_int(1);
    }
    let j: i64 = subscripts.iter().map(|&s| s as i64).sum();
    if j == 0 {
        rat_int(1) / (rat_int(1) + *y)
    } else {
        rat_int(0)
    }
}

/// State on the coefficient-symbol algebra: y/(1+y) times the trace-limit of
/// the psi-word. The empty word is the unit and evaluates to 1.
pub fn a_state<S: Scalar>(
    word: &[PsiAtom],
    tau: &dyn TraceFunctional<S>,
    y: &Rat,
) -> Result<S> {
    if word.is_empty() {
        return Ok(S::one());
    }
    let factor = *y / (rat_int(1) + *y);
    Ok(S::from_rat(&factor) * tau.trace(word)?)
}

/// An alternating word d_0 s b_1 s d_1 ... s b_n s d_n with a scalar
/// prefactor: `c_subs` holds the subscripts of the c-symbols b_1..b_n and
/// `a_words` the coefficient words d_0..d_n (so `a_words.len() ==
/// c_subs.len() + 1`).
#[derive(Clone, Debug)]
pub struct FreeWord {
    pub prefactor: Rat,
    pub c_subs: Vec<i32>,
    pub a_words: Vec<Vec<PsiAtom>>,
}

/// Capacity limits for the expansion of polynomial powers.
#[derive(Clone, Debug)]
pub struct EvalOptions {
    /// Largest total gamma-degree of any monomial after raising to the
    /// requested power.
    pub max_gamma_degree: usize,
    /// Largest model order accepted by the expander.
    pub max_q: usize,
    /// Cap on the number of words evaluated by a streaming moment
    /// computation.
    pub max_words_enumerated: u128,
    /// Cap on the number of words a materializing expansion may return.
    pub max_words_materialized: u128,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            max_gamma_degree: 8,
            max_q: 3,
            max_words_enumerated: 200_000_000,
            max_words_materialized: 2_000_000,
        }
    }
}

/// Parameterized polynomial shapes used by the lag-coincidence check and the
/// order-determination procedures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolyShape {
    /// G(u) G(u)*
    LagProduct,
    /// (G(u) + G(u)*)/2
    SymmetrizedHalf,
}

impl PolyShape {
    pub fn at(&self, u: u32) -> GammaPolynomial {
        match self {
            PolyShape::LagProduct => GammaPolynomial::lag_product(u),
            PolyShape::SymmetrizedHalf => GammaPolynomial::symmetrized_half(u),
        }
    }
}

// ---------------------------------------------------------------------------
// NC(n) tables with precomputed Kreweras complements
// ---------------------------------------------------------------------------

struct NcTable {
    /// (pi blocks, K(pi) blocks), elements 1-based.
    entries: Vec<(Vec<Vec<u8>>, Vec<Vec<u8>>)>,
}

fn nc_table(n: usize) -> Result<Arc<NcTable>> {
    static TABLES: OnceLock<Mutex<HashMap<usize, Arc<NcTable>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = tables.lock().expect("nc table lock poisoned");
    if let Some(t) = guard.get(&n) {
        return Ok(t.clone());
    }
    let mut entries = Vec::new();
    for pi in enumerate_noncrossing(n)? {
        let k = kreweras_complement(&pi)?;
        let conv =
            |p: &crate::ncpart::SetPartition| -> Vec<Vec<u8>> {
                p.blocks()
                    .iter()
                    .map(|b| b.iter().map(|&x| x as u8).collect())
                    .collect()
            };
        entries.push((conv(&pi), conv(&k)));
    }
    let table = Arc::new(NcTable { entries });
    guard.insert(n, table.clone());
    Ok(table)
}

// ---------------------------------------------------------------------------
// Expansion of polynomial powers into free words
// ---------------------------------------------------------------------------

/// Predicted number of words for a fully expanded polynomial: each degree-r
/// monomial contributes (q+1)^{2r} index assignments.
fn predicted_word_count(poly: &GammaPolynomial, q: usize) -> u128 {
    let base = (q + 1) as u128;
    poly.terms()
        .map(|(_, w)| base.saturating_pow(2 * w.len() as u32))
        .fold(0u128, |a, b| a.saturating_add(b))
}

fn check_capacity(poly: &GammaPolynomial, model: &ModelSpec, opts: &EvalOptions, cap: u128) -> Result<u128> {
    if model.q() > opts.max_q {
        return Err(Error::Capacity(format!(
            "model order q={} exceeds cap {}",
            model.q(),
            opts.max_q
        )));
    }
    let deg = poly.degree();
    if deg > opts.max_gamma_degree {
        return Err(Error::Capacity(format!(
            "expanded gamma-degree {deg} exceeds cap {}",
            opts.max_gamma_degree
        )));
    }
    let count = predicted_word_count(poly, model.q());
    if count > cap {
        return Err(Error::Capacity(format!(
            "expansion would produce {count} words, cap is {cap}"
        )));
    }
    Ok(count)
}

/// Streams the expansion of an already-raised polynomial, reusing one
/// scratch word. The visitor sees each word exactly once.
fn visit_words(
    poly: &GammaPolynomial,
    model: &ModelSpec,
    mut visit: impl FnMut(&FreeWord) -> Result<()>,
) -> Result<()> {
    let q = model.q();
    let one_plus_y = rat_int(1) + model.y();
    let mut scratch = FreeWord {
        prefactor: rat_int(0),
        c_subs: Vec::new(),
        a_words: Vec::new(),
    };
    for (coeff, word) in poly.terms() {
        let r = word.len();
        if r == 0 {
            // Constant monomials ride on the embedded identity; their word
            // is the single coefficient symbol psi_0 with no c-symbols.
            scratch.prefactor = *coeff;
            scratch.c_subs.clear();
            scratch.a_words.clear();
            scratch.a_words.push(vec![PsiAtom::plain(0)]);
            visit(&scratch)?;
            continue;
        }
        scratch.prefactor = *coeff * num_traits::pow(one_plus_y, r);
        scratch.c_subs.resize(r, 0);
        scratch.a_words.clear();
        scratch.a_words.push(vec![PsiAtom::plain(0)]);
        for k in 1..r {
            scratch
                .a_words
                .push(vec![PsiAtom::star(0), PsiAtom::plain(0)]);
            let _ = k;
        }
        scratch.a_words.push(vec![PsiAtom::star(0)]);
        // Odometer over the 2r coefficient indices (j_1, j'_1, .., j_r, j'_r).
        let mut digits = vec![0usize; 2 * r];
        loop {
            for k in 0..r {
                let j = digits[2 * k];
                let jp = digits[2 * k + 1];
                let a = word[k];
                let shift = if a.is_star() {
                    -(a.lag() as i32)
                } else {
                    a.lag() as i32
                };
                scratch.c_subs[k] = jp as i32 - j as i32 + shift;
                // d_{k-1} ends with a_{j_k}; d_k starts with a_{j'_k}^*
                let d_prev = &mut scratch.a_words[k];
                let last = d_prev.len() - 1;
                d_prev[last] = PsiAtom::plain(j);
                scratch.a_words[k + 1][0] = PsiAtom::star(jp);
            }
            visit(&scratch)?;
            // advance odometer
            let mut pos = 0;
            loop {
                if pos == digits.len() {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] <= q {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == digits.len() {
                break;
            }
        }
    }
    Ok(())
}

/// Fully distributes `poly^power` over the coefficient indices, returning
/// every free word of the expansion. Each degree-r monomial yields
/// (q+1)^{2r} words with prefactor (1+y)^r times the monomial coefficient.
pub fn expand_gamma_polynomial(
    poly: &GammaPolynomial,
    model: &ModelSpec,
    power: usize,
    opts: &EvalOptions,
) -> Result<Vec<FreeWord>> {
    if power == 0 {
        return Err(Error::Domain("power must be >= 1".into()));
    }
    poly.require_symmetric()?;
    let expanded = poly.pow(power);
    let count = check_capacity(&expanded, model, opts, opts.max_words_materialized)?;
    let mut out = Vec::with_capacity(count as usize);
    visit_words(&expanded, model, |w| {
        out.push(w.clone());
        Ok(())
    })?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct EvalContext<S: Scalar> {
    /// ((1+y)^{-1})^k for k = 0..=n_max
    c_pows: Vec<S>,
}

impl<S: Scalar> EvalContext<S> {
    fn new(y: &Rat, n_max: usize) -> Self {
        let c1 = rat_int(1) / (rat_int(1) + *y);
        let mut c_pows = Vec::with_capacity(n_max + 1);
        let mut acc = rat_int(1);
        for _ in 0..=n_max {
            c_pows.push(S::from_rat(&acc));
            acc *= c1;
        }
        EvalContext { c_pows }
    }
}

/// Core of the moment formula: phi of one alternating word, as the sum over
/// non-crossing partitions of the c-positions of the product of the c-state
/// over blocks and the a-state over the Kreweras-complement blocks, with
/// d_n d_0 merged cyclically into the last slot.
fn eval_word<S: Scalar>(
    w: &FreeWord,
    tau: &dyn TraceFunctional<S>,
    y: &Rat,
    ctx: &EvalContext<S>,
    table: Option<&NcTable>,
    concat: &mut Vec<PsiAtom>,
) -> Result<S> {
    let n = w.c_subs.len();
    if w.a_words.len() != n + 1 {
        return Err(Error::Domain(format!(
            "malformed free word: {} c-symbols but {} coefficient words",
            n,
            w.a_words.len()
        )));
    }
    let pre = S::from_rat(&w.prefactor);
    if n == 0 {
        return Ok(pre * a_state(&w.a_words[0], tau, y)?);
    }
    let table = table.expect("table provided for n >= 1");
    let mut acc = S::zero();
    'entries: for (pi, kpi) in &table.entries {
        for block in pi {
            let mut sum = 0i64;
            for &x in block {
                sum += w.c_subs[x as usize - 1] as i64;
            }
            if sum != 0 {
                continue 'entries;
            }
        }
        let mut term = ctx.c_pows[pi.len()].clone();
        for block in kpi {
            concat.clear();
            for &slot in block {
                let s = slot as usize;
                concat.extend_from_slice(&w.a_words[s]);
                if s == n {
                    // cyclic merge: the last slot carries d_n d_0
                    concat.extend_from_slice(&w.a_words[0]);
                }
            }
            term = term * a_state(concat, tau, y)?;
        }
        acc = acc + term;
    }
    Ok(pre * acc)
}

/// Evaluates one free word under the limit state.
pub fn evaluate_free_word<S: Scalar>(
    w: &FreeWord,
    tau: &dyn TraceFunctional<S>,
    y: &Rat,
) -> Result<S> {
    let n = w.c_subs.len();
    let ctx = EvalContext::new(y, n);
    let table = if n > 0 { Some(nc_table(n)?) } else { None };
    let mut concat = Vec::new();
    eval_word(w, tau, y, &ctx, table.as_deref(), &mut concat)
}

/// The h-th limit moment of a symmetric polynomial in the autocovariance
/// symbols: y^{-1}(1+y) times the state applied to the fully expanded h-th
/// power.
pub fn limit_moment<S: Scalar>(
    poly: &GammaPolynomial,
    model: &ModelSpec,
    tau: &dyn TraceFunctional<S>,
    h: usize,
    opts: &EvalOptions,
) -> Result<S> {
    if h == 0 {
        return Err(Error::Domain("moment order h must be >= 1".into()));
    }
    poly.require_symmetric()?;
    let expanded = poly.pow(h);
    check_capacity(&expanded, model, opts, opts.max_words_enumerated)?;
    let n_max = expanded.degree();
    let y = model.y();
    let ctx = EvalContext::new(&y, n_max);
    let mut tables: Vec<Option<Arc<NcTable>>> = vec![None; n_max + 1];
    for r in 1..=n_max {
        tables[r] = Some(nc_table(r)?);
    }
    let mut concat = Vec::new();
    let mut total = S::zero();
    visit_words(&expanded, model, |w| {
        let t = tables[w.c_subs.len()].as_deref();
        total = total.clone() + eval_word(w, tau, &y, &ctx, t, &mut concat)?;
        Ok(())
    })?;
    let outer = (rat_int(1) + y) / y;
    Ok(S::from_rat(&outer) * total)
}

/// Exact limit moment for scalar-coefficient models.
///
/// Same sum as [`limit_moment`] with the scalar trace, regrouped: because
/// the scalar trace of a coefficient word is the plain product of its
/// lambdas, each position's (j, j') pair enters only through the subscript
/// difference d = j' - j with total weight w(d) = sum_{j'-j=d} lambda_j
/// lambda_{j'}, and the partition sum depends only on the subscript vector.
/// This turns (q+1)^{2r} index assignments into (2q+1)^r subscript patterns
/// with a memoized partition sum, which is what makes order-4 moments at
/// q = 2 affordable.
pub fn limit_moment_exact(
    poly: &GammaPolynomial,
    model: &ModelSpec,
    h: usize,
    opts: &EvalOptions,
) -> Result<Rat> {
    let lambdas = model.scalar_lambdas().ok_or_else(|| {
        Error::Config("exact limit moments need scalar coefficients".into())
    })?;
    if h == 0 {
        return Err(Error::Domain("moment order h must be >= 1".into()));
    }
    poly.require_symmetric()?;
    let q = model.q();
    if q > opts.max_q {
        return Err(Error::Capacity(format!(
            "model order q={q} exceeds cap {}",
            opts.max_q
        )));
    }
    let expanded = poly.pow(h);
    if expanded.degree() > opts.max_gamma_degree {
        return Err(Error::Capacity(format!(
            "expanded gamma-degree {} exceeds cap {}",
            expanded.degree(),
            opts.max_gamma_degree
        )));
    }
    let patterns: u128 = expanded
        .terms()
        .map(|(_, w)| ((2 * q + 1) as u128).saturating_pow(w.len() as u32))
        .sum();
    if patterns > opts.max_words_enumerated {
        return Err(Error::Capacity(format!(
            "grouped expansion would visit {patterns} subscript patterns, cap is {}",
            opts.max_words_enumerated
        )));
    }

    let y = model.y();
    let one_plus_y = rat_int(1) + y;
    // w[d + q] = sum over j' - j = d of lambda_j lambda_{j'}
    let mut w = vec![rat_int(0); 2 * q + 1];
    for (j, lj) in lambdas.iter().enumerate() {
        for (jp, ljp) in lambdas.iter().enumerate() {
            w[jp + q - j] += *lj * *ljp;
        }
    }
    // S(svec) = sum over NC(r) of prod_blocks I(sum=0) (1+y)^{-|pi|}
    //           (y/(1+y))^{r+1-|pi|}
    let n_max = expanded.degree();
    let c1 = rat_int(1) / one_plus_y;
    let a1 = y / one_plus_y;
    let mut c_pows = vec![rat_int(1); n_max + 2];
    let mut a_pows = vec![rat_int(1); n_max + 2];
    for k in 1..=n_max + 1 {
        c_pows[k] = c_pows[k - 1] * c1;
        a_pows[k] = a_pows[k - 1] * a1;
    }
    let mut s_cache: HashMap<Vec<i32>, Rat> = HashMap::new();
    let mut total = rat_int(0);
    for (coeff, word) in expanded.terms() {
        let r = word.len();
        if r == 0 {
            // constant monomials ride on the embedded identity
            total += *coeff * a_pows[1];
            continue;
        }
        let table = nc_table(r)?;
        let shifts: Vec<i32> = word
            .iter()
            .map(|a| {
                if a.is_star() {
                    -(a.lag() as i32)
                } else {
                    a.lag() as i32
                }
            })
            .collect();
        let pre = *coeff * num_traits::pow(one_plus_y, r);
        let qi = q as i32;
        let mut deltas = vec![-qi; r]; // each in -q..=q
        let mut svec = vec![0i32; r];
        loop {
            let mut weight = pre;
            for (k, &d) in deltas.iter().enumerate() {
                weight *= w[(d + qi) as usize];
                svec[k] = d + shifts[k];
            }
            if !num_traits::Zero::is_zero(&weight) {
                let s = match s_cache.get(&svec) {
                    Some(v) => *v,
                    None => {
                        let mut acc = rat_int(0);
                        'entries: for (pi, _) in &table.entries {
                            for block in pi {
                                let mut sum = 0i64;
                                for &x in block {
                                    sum += svec[x as usize - 1] as i64;
                                }
                                if sum != 0 {
                                    continue 'entries;
                                }
                            }
                            acc += c_pows[pi.len()] * a_pows[r + 1 - pi.len()];
                        }
                        s_cache.insert(svec.clone(), acc);
                        acc
                    }
                };
                total += weight * s;
            }
            // advance the delta odometer
            let mut pos = 0;
            loop {
                if pos == r {
                    break;
                }
                deltas[pos] += 1;
                if deltas[pos] <= qi {
                    break;
                }
                deltas[pos] = -qi;
                pos += 1;
            }
            if pos == r {
                break;
            }
        }
    }
    Ok(one_plus_y / y * total)
}

/// Whether the limit moments of the shape at lags u1 and u2 agree for all
/// moment orders 1..=h_max (exact in rational mode, relative 1e-10
/// otherwise).
///
/// Coincidence is guaranteed once both lags exceed h_max * q: below that,
/// non-crossing blocks with unbalanced star pattern can still satisfy the
/// zero-subscript-sum constraint and contribute lag-dependent terms. The
/// differences are tiny in practice (which is why ECDF plots of lags just
/// beyond q look identical), but they are nonzero, so "beyond q" must be
/// read at the resolution of the moment order being tested. For u1, u2 <= q
/// with nonzero coefficients the moments genuinely differ.
pub fn lsd_equal_beyond_q_check(
    shape: PolyShape,
    model: &ModelSpec,
    u1: u32,
    u2: u32,
    h_max: usize,
    opts: &EvalOptions,
) -> Result<bool> {
    if model.scalar_lambdas().is_some() {
        for h in 1..=h_max {
            let m1 = limit_moment_exact(&shape.at(u1), model, h, opts)?;
            let m2 = limit_moment_exact(&shape.at(u2), model, h, opts)?;
            if m1 != m2 {
                return Ok(false);
            }
        }
        return Ok(true);
    }
    let tau = MatrixTrace::from_model(model, DEFAULT_TAU_DIMENSION)?;
    for h in 1..=h_max {
        let m1: f64 = limit_moment(&shape.at(u1), model, &tau, h, opts)?;
        let m2: f64 = limit_moment(&shape.at(u2), model, &tau, h, opts)?;
        let scale = m1.abs().max(m2.abs()).max(1.0);
        if (m1 - m2).abs() > 1e-10 * scale {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Default dimension at which numeric trace functionals are evaluated.
pub const DEFAULT_TAU_DIMENSION: usize = 4096;
