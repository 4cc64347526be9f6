//! Combinatorics of level-structured stable-map strata relative to a divisor,
//! together with Novikov-ring homological algebra for Floer-type complexes.
//!
//! The homological-algebra layers ([`linalg`], [`novikov`], [`spectral`]) are
//! generic over a scalar type through `num-traits`; the aliases below fix the
//! scalar to exact rationals, which is what every other module uses.

pub mod divisor_trees;
pub mod dot;
pub mod floer;
pub mod io;
pub mod linalg;
pub mod novikov;
pub mod palette;
pub mod selftest;
pub mod spectral;
pub mod strata;
pub mod trees;

use num_bigint::BigInt;
use num_rational::BigRational;

/// Exact rational scalar.
pub type Q = BigRational;
/// Dense rational matrix.
pub type QMatrix = linalg::Matrix<Q>;
/// Novikov series with rational coefficients.
pub type NovikovQ = novikov::Novikov<Q>;
/// Gapped partial complex over rational coefficients.
pub type QGappedComplex = novikov::GappedComplex<Q>;
/// Filtered complex over the rationals.
pub type QFilteredComplex = spectral::FilteredComplex<Q>;

/// Version tag carried by every JSON document this crate reads or writes.
pub const SCHEMA: &str = "rgw/1";

pub use palette::{ClassAtom, ClassExpr, Palette, Space};

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qr(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `"3"`, `"-3/4"` or `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Q> {
    let t = s.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    t.parse::<BigInt>().ok().map(Q::from_integer)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_parsing() {
        assert_eq!(parse_rational("3/6"), Some(qr(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(qr(-1, 4)));
        assert_eq!(parse_rational("7"), Some(q(7)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }
}
