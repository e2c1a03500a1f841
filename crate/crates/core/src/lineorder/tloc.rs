use std::fmt;

use num_traits::Signed;

use super::{Rat, SemilinearOpen, SemilinearSet};
use crate::error::{Error, Result};
use crate::exactla::format_rational;

/// An open set whose intersection with every bounded semilinear open is
/// again bounded semilinear. Besides finite unions (possibly unbounded), the
/// locally finite union of all translates of a bounded pattern by integer
/// multiples of a period is supported.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TlocOpen {
    Finite(SemilinearOpen),
    Periodic { pattern: SemilinearOpen, period: Rat },
}

impl TlocOpen {
    pub fn periodic(pattern: SemilinearOpen, period: Rat) -> Result<Self> {
        let t = TlocOpen::Periodic { pattern, period };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TlocOpen::Finite(_) => Ok(()),
            TlocOpen::Periodic { pattern, period } => {
                if !period.is_positive() {
                    return Err(Error::MalformedPeriodic(format!("period {period} is not positive")));
                }
                if !pattern.is_t_open() {
                    return Err(Error::MalformedPeriodic(format!("pattern {pattern} is unbounded")));
                }
                Ok(())
            }
        }
    }

    /// The intersection with a bounded open `w`.
    pub fn restrict(&self, w: &SemilinearOpen) -> Result<SemilinearOpen> {
        if !w.is_t_open() {
            return Err(Error::NotRepresentable(format!("{w} is unbounded")));
        }
        self.validate()?;
        match self {
            TlocOpen::Finite(u) => Ok(u.intersect(w)),
            TlocOpen::Periodic { pattern, period } => {
                let (Some((plo, phi)), Some((wlo, whi))) = (pattern.hull(), w.hull()) else {
                    return Ok(SemilinearOpen::empty());
                };
                let (plo, phi) = (plo.finite().unwrap().clone(), phi.finite().unwrap().clone());
                let (wlo, whi) = (wlo.finite().unwrap().clone(), whi.finite().unwrap().clone());
                let lo = ((wlo - phi) / period).floor().to_integer();
                let hi = ((whi - plo) / period).ceil().to_integer();
                let mut acc = SemilinearSet::empty();
                let mut k = lo;
                while k <= hi {
                    let shift = Rat::from_integer(k.clone()) * period;
                    acc = acc.union(&pattern.shift(&shift));
                    k += 1;
                }
                Ok(SemilinearOpen::new(acc).unwrap().intersect(w))
            }
        }
    }

    /// `U ∩ (−n, n)`.
    pub fn stage(&self, n: i64) -> Result<SemilinearOpen> {
        self.restrict(&SemilinearOpen::interval(-n, n))
    }

    pub fn is_bounded(&self) -> bool {
        match self {
            TlocOpen::Finite(u) => u.is_t_open(),
            TlocOpen::Periodic { pattern, .. } => pattern.is_empty(),
        }
    }

    pub fn contains(&self, x: &Rat) -> bool {
        match self {
            TlocOpen::Finite(u) => u.contains(x),
            TlocOpen::Periodic { period, .. } => {
                let w = SemilinearOpen::open_q(x - period, x + period);
                self.restrict(&w).is_ok_and(|u| u.contains(x))
            }
        }
    }

    /// Parses either a set (`"(0,+inf)"`) or `"periodic((0,1/2);1)"`.
    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if let Some(inner) = t.strip_prefix("periodic(").and_then(|r| r.strip_suffix(')')) {
            let (pat, per) = inner
                .rsplit_once(';')
                .ok_or_else(|| Error::Parse(format!("expected periodic(<pattern>;<period>) in {t:?}")))?;
            let pattern = SemilinearOpen::parse(pat)?;
            let period = crate::exactla::parse_rational(per)?;
            return TlocOpen::periodic(pattern, period);
        }
        Ok(TlocOpen::Finite(SemilinearOpen::parse(t)?))
    }

    /// Endpoints of the representation within `[−n, n]`.
    pub fn endpoints_within(&self, n: i64) -> Result<Vec<Rat>> {
        let st = self.stage(n)?;
        Ok(st.endpoints())
    }
}

/// Validates a description of a locally-T open. Finite unions are always
/// valid; periodic ones need a bounded pattern and a positive period.
pub fn is_tloc_open(u: &TlocOpen) -> Result<bool> {
    u.validate()?;
    Ok(true)
}

impl From<SemilinearOpen> for TlocOpen {
    fn from(u: SemilinearOpen) -> Self {
        TlocOpen::Finite(u)
    }
}

impl fmt::Display for TlocOpen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TlocOpen::Finite(u) => u.fmt(f),
            TlocOpen::Periodic { pattern, period } => {
                write!(f, "periodic({pattern};{})", format_rational(period))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{int, rat};
    use super::*;

    #[test]
    fn whole_line_and_bounded_are_tloc() {
        assert!(is_tloc_open(&TlocOpen::Finite(SemilinearOpen::line())).unwrap());
        assert!(is_tloc_open(&TlocOpen::Finite(SemilinearOpen::interval(0, 1))).unwrap());
    }

    #[test]
    fn periodic_half_intervals() {
        let u = TlocOpen::parse("periodic((0,1/2);1)").unwrap();
        assert!(is_tloc_open(&u).unwrap());
        let st = u.stage(2).unwrap();
        assert_eq!(st.to_string(), "(-2,-3/2)+(-1,-1/2)+(0,1/2)+(1,3/2)");
        assert!(u.contains(&rat(41, 4)));
        assert!(!u.contains(&rat(3, 4)));
        assert!(!u.contains(&int(0)));
    }

    #[test]
    fn malformed_periodic_descriptions() {
        let pat = SemilinearOpen::interval(0, 1);
        assert!(matches!(TlocOpen::periodic(pat.clone(), int(0)), Err(Error::MalformedPeriodic(_))));
        let unb = SemilinearOpen::parse("(0,+inf)").unwrap();
        assert!(matches!(TlocOpen::periodic(unb, int(1)), Err(Error::MalformedPeriodic(_))));
        assert!(TlocOpen::periodic(pat, rat(-1, 2)).is_err());
    }
}
