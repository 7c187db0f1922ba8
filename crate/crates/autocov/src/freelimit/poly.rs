use crate::error::{Error, Result};
use crate::scalar::{rat, rat_int, Rat};
use num_traits::Zero;
use std::collections::BTreeMap;

/// One autocovariance symbol: `G(u)` or its adjoint `G(u)*`.
///
/// The lag-0 symbol is self-adjoint, so `star` is canonically `false` when
/// `lag == 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Atom {
    lag: u32,
    star: bool,
}

impl Atom {
    pub fn gamma(lag: u32) -> Atom {
        Atom { lag, star: false }
    }

    pub fn gamma_star(lag: u32) -> Atom {
        Atom {
            lag,
            star: lag != 0,
        }
    }

    pub fn lag(&self) -> u32 {
        self.lag
    }

    pub fn is_star(&self) -> bool {
        self.star
    }

    pub fn adjoint(&self) -> Atom {
        if self.lag == 0 {
            *self
        } else {
            Atom {
                lag: self.lag,
                star: !self.star,
            }
        }
    }
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "G{}{}", self.lag, if self.star { "t" } else { "" })
    }
}

/// Formal real-coefficient polynomial in the symbols `G(u)`, `G(u)*`;
/// canonical form merges equal words and drops zero terms.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct GammaPolynomial {
    terms: BTreeMap<Vec<Atom>, Rat>,
}

impl GammaPolynomial {
    pub fn zero() -> Self {
        GammaPolynomial {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        Self::from_terms(vec![(c, Vec::new())])
    }

    /// Single symbol `G(u)`.
    pub fn gamma(u: u32) -> Self {
        Self::from_terms(vec![(rat_int(1), vec![Atom::gamma(u)])])
    }

    /// Single symbol `G(u)*`.
    pub fn gamma_star(u: u32) -> Self {
        Self::from_terms(vec![(rat_int(1), vec![Atom::gamma_star(u)])])
    }

    /// `G(u) G(u)*`, the Gram form of the lag-u autocovariance.
    pub fn lag_product(u: u32) -> Self {
        Self::from_terms(vec![(rat_int(1), vec![Atom::gamma(u), Atom::gamma_star(u)])])
    }

    /// `(G(u) + G(u)*)/2`, the additive symmetrization.
    pub fn symmetrized_half(u: u32) -> Self {
        Self::from_terms(vec![
            (rat(1, 2), vec![Atom::gamma(u)]),
            (rat(1, 2), vec![Atom::gamma_star(u)]),
        ])
    }

    pub fn from_terms(terms: Vec<(Rat, Vec<Atom>)>) -> Self {
        let mut map: BTreeMap<Vec<Atom>, Rat> = BTreeMap::new();
        for (c, word) in terms {
            if c.is_zero() {
                continue;
            }
            let entry = map.entry(word).or_insert_with(|| rat_int(0));
            *entry += c;
        }
        map.retain(|_, c| !c.is_zero());
        GammaPolynomial { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &[Atom])> {
        self.terms.iter().map(|(w, c)| (c, w.as_slice()))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest lag appearing in any term (0 for constants).
    pub fn u_max(&self) -> u32 {
        self.terms
            .keys()
            .flat_map(|w| w.iter().map(|a| a.lag()))
            .max()
            .unwrap_or(0)
    }

    /// Largest word length over the terms.
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|w| w.len()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &GammaPolynomial) -> GammaPolynomial {
        let mut terms: Vec<(Rat, Vec<Atom>)> = Vec::new();
        for (w, c) in &self.terms {
            terms.push((*c, w.clone()));
        }
        for (w, c) in &other.terms {
            terms.push((*c, w.clone()));
        }
        Self::from_terms(terms)
    }

    pub fn scale(&self, s: Rat) -> GammaPolynomial {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(w, c)| (*c * s, w.clone()))
                .collect(),
        )
    }

    pub fn mul(&self, other: &GammaPolynomial) -> GammaPolynomial {
        let mut terms: Vec<(Rat, Vec<Atom>)> = Vec::new();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                terms.push((*c1 * *c2, w));
            }
        }
        Self::from_terms(terms)
    }

    pub fn pow(&self, h: usize) -> GammaPolynomial {
        let mut out = GammaPolynomial::constant(rat_int(1));
        for _ in 0..h {
            out = out.mul(self);
        }
        out
    }

    /// Adjoint: reverse each word, swap `G(u) <-> G(u)*` (coefficients are
    /// real, so they are unchanged).
    pub fn star(&self) -> GammaPolynomial {
        Self::from_terms(
            self.terms
                .iter()
                .map(|(w, c)| (*c, w.iter().rev().map(|a| a.adjoint()).collect()))
                .collect(),
        )
    }

    /// Self-adjointness of the formal polynomial.
    pub fn is_symmetric(&self) -> bool {
        *self == self.star()
    }

    pub fn require_symmetric(&self) -> Result<()> {
        if self.is_symmetric() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "polynomial is not symmetric (self-adjoint): {self}"
            )))
        }
    }
}

impl std::fmt::Display for GammaPolynomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (word, coeff) in &self.terms {
            let (sign, mag) = if *coeff < rat_int(0) {
                ("-", -*coeff)
            } else {
                ("+", *coeff)
            };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
                first = false;
            } else {
                write!(f, " {sign} ")?;
            }
            let show_coeff = mag != rat_int(1) || word.is_empty();
            if show_coeff {
                write!(f, "{mag}")?;
            }
            for (k, a) in word.iter().enumerate() {
                if k > 0 || show_coeff {
                    write!(f, "*")?;
                }
                write!(f, "{a}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lag_zero_star_is_canonical() {
        assert_eq!(Atom::gamma_star(0), Atom::gamma(0));
        assert_eq!(GammaPolynomial::gamma_star(0), GammaPolynomial::gamma(0));
        assert!(GammaPolynomial::gamma(0).is_symmetric());
    }

    #[test]
    fn symmetry_checks() {
        assert!(GammaPolynomial::lag_product(3).is_symmetric());
        assert!(GammaPolynomial::symmetrized_half(2).is_symmetric());
        assert!(!GammaPolynomial::gamma(1).is_symmetric());
        assert!(GammaPolynomial::gamma(1).require_symmetric().is_err());
        let sum = GammaPolynomial::lag_product(1).add(&GammaPolynomial::lag_product(2));
        assert!(sum.is_symmetric());
        // G1*G2 is not symmetric, G1*G2 + G2t*G1t is
        let a = GammaPolynomial::gamma(1).mul(&GammaPolynomial::gamma(2));
        assert!(!a.is_symmetric());
        let sym = a.add(&a.star());
        assert!(sym.is_symmetric());
    }

    #[test]
    fn like_terms_merge_and_cancel() {
        let p = GammaPolynomial::gamma(1)
            .add(&GammaPolynomial::gamma(1))
            .add(&GammaPolynomial::gamma(1).scale(rat_int(-2)));
        assert!(p.is_zero());
        let q = GammaPolynomial::symmetrized_half(1).scale(rat_int(2));
        let direct =
            GammaPolynomial::gamma(1).add(&GammaPolynomial::gamma_star(1));
        assert_eq!(q, direct);
    }

    #[test]
    fn powers_expand() {
        let p = GammaPolynomial::symmetrized_half(1);
        let p2 = p.pow(2);
        // (1/2 G1 + 1/2 G1t)^2 has 4 words with coefficient 1/4: G1G1,
        // G1G1t, G1tG1, G1tG1t
        assert_eq!(p2.term_count(), 4);
        for (c, w) in p2.terms() {
            assert_eq!(*c, rat(1, 4));
            assert_eq!(w.len(), 2);
        }
        assert_eq!(p.pow(0), GammaPolynomial::constant(rat_int(1)));
    }

    #[test]
    fn display_round_trippable_format() {
        let p = GammaPolynomial::lag_product(1)
            .add(&GammaPolynomial::constant(rat(-1, 2)))
            .add(&GammaPolynomial::gamma(2).scale(rat_int(3)));
        let s = format!("{p}");
        assert!(s.contains("G1*G1t"));
        assert!(s.contains("1/2"));
        assert!(s.contains("3*G2"));
    }

    #[test]
    fn u_max_and_degree() {
        let p = GammaPolynomial::lag_product(4).add(&GammaPolynomial::gamma(2));
        assert_eq!(p.u_max(), 4);
        assert_eq!(p.degree(), 2);
        assert_eq!(GammaPolynomial::constant(rat_int(2)).degree(), 0);
    }
}
