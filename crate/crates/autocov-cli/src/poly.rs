//! The polynomial mini-language: atoms `G<u>` and `G<u>t` (adjoint),
//! operators `*`, `+`, `-`, parentheses and real literals (integers,
//! decimals, fractions `a/b`). Parsing errors carry the byte position.

use autocov::freelimit::GammaPolynomial;
use autocov::scalar::{rat_int, Rat};
use autocov::{Error, Result};

pub fn parse_poly(src: &str) -> Result<GammaPolynomial> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> Error {
        Error::Domain(format!(
            "polynomial parse error at byte {}: {msg} (input: {:?})",
            self.pos,
            String::from_utf8_lossy(self.src)
        ))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<GammaPolynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.add(&self.term()?.scale(rat_int(-1)));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<GammaPolynomial> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<GammaPolynomial> {
        if self.eat(b'-') {
            return Ok(self.factor()?.scale(rat_int(-1)));
        }
        if self.eat(b'(') {
            let inner = self.expr()?;
            if !self.eat(b')') {
                return Err(self.err("expected ')'"));
            }
            return Ok(inner);
        }
        match self.peek() {
            Some(b'G') => {
                self.pos += 1;
                let lag = self.integer()? as u32;
                let star = if self.peek() == Some(b't') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                self.skip_ws();
                Ok(if star {
                    GammaPolynomial::gamma_star(lag)
                } else {
                    GammaPolynomial::gamma(lag)
                })
            }
            Some(c) if c.is_ascii_digit() => {
                let r = self.number()?;
                Ok(GammaPolynomial::constant(r))
            }
            _ => Err(self.err("expected an atom G<u>[t], a number, or '('")),
        }
    }

    fn integer(&mut self) -> Result<i128> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected digits"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse::<i128>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn number(&mut self) -> Result<Rat> {
        let whole = self.integer()?;
        match self.peek() {
            Some(b'/') => {
                self.pos += 1;
                let den = self.integer()?;
                self.skip_ws();
                if den == 0 {
                    return Err(self.err("zero denominator"));
                }
                Ok(Rat::new(whole, den))
            }
            Some(b'.') => {
                self.pos += 1;
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
                if self.pos == start {
                    return Err(self.err("expected digits after decimal point"));
                }
                let frac_str = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let digits = frac_str.len() as u32;
                let frac: i128 = frac_str
                    .parse()
                    .map_err(|_| self.err("decimal fraction out of range"))?;
                self.skip_ws();
                let den = 10i128
                    .checked_pow(digits)
                    .ok_or_else(|| self.err("decimal fraction too long"))?;
                Ok(rat_int(whole) + Rat::new(frac, den))
            }
            _ => {
                self.skip_ws();
                Ok(rat_int(whole))
            }
        }
    }
}

/// Parses a rational literal on its own (used for --y and --lambda flags).
pub fn parse_rat(src: &str) -> Result<Rat> {
    let negative = src.trim().starts_with('-');
    let body = src.trim().trim_start_matches('-');
    let mut p = Parser {
        src: body.as_bytes(),
        pos: 0,
    };
    let r = p.number()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Domain(format!("bad rational literal {src:?}")));
    }
    Ok(if negative { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use autocov::scalar::rat;

    #[test]
    fn parses_basic_shapes() {
        assert_eq!(parse_poly("G1*G1t").unwrap(), GammaPolynomial::lag_product(1));
        assert_eq!(parse_poly("G0").unwrap(), GammaPolynomial::gamma(0));
        assert_eq!(
            parse_poly("1/2*G2 + 1/2*G2t").unwrap(),
            GammaPolynomial::symmetrized_half(2)
        );
        assert_eq!(
            parse_poly("0.5*G2 + 0.5*G2t").unwrap(),
            GammaPolynomial::symmetrized_half(2)
        );
        let sum = parse_poly("G1*G1t + G2*G2t").unwrap();
        assert_eq!(
            sum,
            GammaPolynomial::lag_product(1).add(&GammaPolynomial::lag_product(2))
        );
    }

    #[test]
    fn precedence_and_grouping() {
        // (G1 + G1t)*(G1 + G1t) == expanded square
        let sq = parse_poly("(G1 + G1t)*(G1 + G1t)").unwrap();
        let direct = GammaPolynomial::gamma(1)
            .add(&GammaPolynomial::gamma_star(1))
            .pow(2);
        assert_eq!(sq, direct);
        let withconst = parse_poly("G0*G0 - 2*G0 + 1").unwrap();
        let direct = GammaPolynomial::gamma(0)
            .pow(2)
            .add(&GammaPolynomial::gamma(0).scale(rat_int(-2)))
            .add(&GammaPolynomial::constant(rat_int(1)));
        assert_eq!(withconst, direct);
        // unary minus binds to the factor
        assert_eq!(
            parse_poly("-G1*G1t").unwrap(),
            GammaPolynomial::lag_product(1).scale(rat_int(-1))
        );
    }

    #[test]
    fn errors_carry_positions() {
        for bad in ["G", "G1 *", "2 +", "(G1", "G1)", "1/0", "Gx", ""] {
            let err = parse_poly(bad).unwrap_err();
            let msg = err.to_string();
            assert!(msg.contains("parse error at byte"), "{bad}: {msg}");
        }
    }

    #[test]
    fn print_parse_round_trip_on_canonical_forms() {
        let polys = vec![
            GammaPolynomial::lag_product(1),
            GammaPolynomial::symmetrized_half(3),
            GammaPolynomial::lag_product(1).add(&GammaPolynomial::lag_product(2)),
            GammaPolynomial::gamma(0)
                .pow(2)
                .add(&GammaPolynomial::constant(rat(-7, 3))),
            GammaPolynomial::gamma(2)
                .mul(&GammaPolynomial::gamma_star(1))
                .scale(rat(2, 5)),
        ];
        for p in polys {
            let printed = format!("{p}");
            let reparsed = parse_poly(&printed).unwrap();
            assert_eq!(reparsed, p, "printed: {printed}");
        }
    }

    #[test]
    fn parse_rat_literals() {
        assert_eq!(parse_rat("1").unwrap(), rat_int(1));
        assert_eq!(parse_rat("0.5").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("2/3").unwrap(), rat(2, 3));
        assert_eq!(parse_rat("-1/3").unwrap(), rat(-1, 3));
        assert!(parse_rat("x").is_err());
        assert!(parse_rat("1.2.3").is_err());
    }
}
