use num_traits::{Signed, Zero};

use crate::coeff::Coefficient;

/// Joins `(coefficient, monomial)` pairs into `"a + b*m - c*m2"` form.
///
/// `sep` goes between a non-unit coefficient and its monomial. Coefficients
/// with more than one nonzero `e`-part are parenthesised when a monomial
/// follows them.
pub(crate) fn join_terms<'a, I>(terms: I, sep: &str) -> String
where
    I: IntoIterator<Item = (&'a Coefficient, String)>,
{
    let mut out = String::new();
    for (c, mono) in terms {
        if c.is_zero() {
            continue;
        }
        let nonzero = c.parts().iter().filter(|r| !r.is_zero()).count();
        let negative = nonzero == 1 && c.parts().iter().any(|r| r.is_negative());
        let magnitude = if negative { -c } else { c.clone() };
        let body = if mono.is_empty() {
            magnitude.to_string()
        } else if magnitude.is_one() {
            mono
        } else if nonzero > 1 {
            format!("({magnitude}){sep}{mono}")
        } else {
            format!("{magnitude}{sep}{mono}")
        };
        if out.is_empty() {
            if negative {
                out.push('-');
            }
        } else {
            out.push_str(if negative { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

pub(crate) fn power(var: &str, e: u32) -> String {
    match e {
        0 => String::new(),
        1 => var.to_string(),
        _ => format!("{var}^{e}"),
    }
}
