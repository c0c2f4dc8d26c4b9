//! Display in the concrete syntax. Plain references print re-parsably;
//! tagged copies print as `x_pre`, `x_cur`, `x₀`.

use std::fmt;

use num_rational::BigRational;
use num_traits::One;

use super::{CompOp, ConstraintAtom, Expression, Formula, Tag, VarRef};

pub fn fmt_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.tag {
            Tag::Plain(k) => write!(f, "{}{}", self.base, "'".repeat(k as usize)),
            Tag::Pre => write!(f, "{}_pre", self.base),
            Tag::Cur => write!(f, "{}_cur", self.base),
            Tag::Initial => write!(f, "{}₀", self.base),
            Tag::Bound(i) => write!(f, "_u{}_{}", i, self.base),
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Const(c) => write!(f, "{}", fmt_rational(c)),
            Expression::Var(v) => write!(f, "{v}"),
            Expression::Add(a, b) => match **b {
                Expression::Add(_, _) => write!(f, "{a} + ({b})"),
                _ => write!(f, "{a} + {b}"),
            },
            Expression::Scale(k, e) => {
                if k.is_one() {
                    return write!(f, "1*({e})");
                }
                match **e {
                    Expression::Var(_) | Expression::Const(_) => write!(f, "{}*{e}", fmt_rational(k)),
                    _ => write!(f, "{}*({e})", fmt_rational(k)),
                }
            }
        }
    }
}

impl fmt::Display for CompOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompOp::Eq => write!(f, "="),
            CompOp::Ne => write!(f, "!="),
            CompOp::Lt => write!(f, "<"),
            CompOp::Le => write!(f, "<="),
            CompOp::Cong(n) => write!(f, "=_{n}"),
            CompOp::NCong(n) => write!(f, "!=_{n}"),
        }
    }
}

impl fmt::Display for ConstraintAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.lhs, self.op, self.rhs)
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(c) => write!(f, "{c}"),
            Formula::NegAtom(c) => write!(f, "!({c})"),
            Formula::Not(a) => write!(f, "!({a})"),
            Formula::And(a, b) => write!(f, "({a} && {b})"),
            Formula::Or(a, b) => write!(f, "({a} || {b})"),
            Formula::Next(a) => write!(f, "X ({a})"),
            Formula::WeakNext(a) => write!(f, "wX ({a})"),
            Formula::Until(a, b) => write!(f, "(({a}) U ({b}))"),
            Formula::Globally(a) => write!(f, "G ({a})"),
            Formula::Eventually(a) => write!(f, "F ({a})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_property, Declarations, Sort};

    #[test]
    fn round_trip_examples() {
        let d = Declarations::from_pairs([("x", Sort::Int), ("y", Sort::Int), ("z", Sort::Int)]);
        for src in [
            "G(x' >= x) && F(x = 2)",
            "(x =_7 y+1) U (x = z)",
            "!(x < 2*(y - 3)) -> wX X (y != 1/2*z)",
            "strict(x'' > x) || F G (x !=_3 -y + 1)",
            "true U false",
        ] {
            let f = parse_property(src, &d).unwrap();
            let again = parse_property(&f.to_string(), &d).unwrap();
            assert_eq!(f, again, "{src} printed as {f}");
        }
    }
}
