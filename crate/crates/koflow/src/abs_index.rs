//! ABS classes of ungraded Clifford modules and forgetful maps.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::clifford::{decompose, CliffordRep, Multiplicity};
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Group {
    Z,
    Z2,
    Trivial,
}

/// `A_{a,b}` by degree `(b − a) mod 8`.
pub fn group_of(degree: u8) -> Group {
    match degree % 8 {
        0 | 4 => Group::Z,
        1 | 2 => Group::Z2,
        _ => Group::Trivial,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KOClass {
    pub degree: u8,
    pub group: Group,
    pub value: i64,
}

impl KOClass {
    /// Reduces `value` into the group of `degree`.
    pub fn new(degree: u8, value: i64) -> Self {
        let degree = degree % 8;
        let group = group_of(degree);
        let value = match group {
            Group::Z => value,
            Group::Z2 => value.rem_euclid(2),
            Group::Trivial => 0,
        };
        KOClass {
            degree,
            group,
            value,
        }
    }

    pub fn zero(degree: u8) -> Self {
        Self::new(degree, 0)
    }

    pub fn is_zero(&self) -> bool {
        self.value == 0
    }

    pub fn plus(&self, other: &KOClass) -> Result<KOClass> {
        if self.degree != other.degree {
            return invalid(format!(
                "cannot add classes of degree {} and {}",
                self.degree, other.degree
            ));
        }
        Ok(KOClass::new(self.degree, self.value + other.value))
    }

    pub fn negate(&self) -> KOClass {
        KOClass::new(self.degree, -self.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct serializes")
    }
}

impl fmt::Display for KOClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = match self.group {
            Group::Z => "Z",
            Group::Z2 => "Z/2",
            Group::Trivial => "0",
        };
        write!(f, "{} in {g} (degree {})", self.value, self.degree)
    }
}

/// Class of a Cl_{a,b} module in `A_{a,b+1}`, of degree `(b + 1 − a) mod 8`.
///
/// Degrees 0 and 4 count the two irreducibles with signs `m₊ − m₋`; degrees 1 and 2
/// count irreducible summands mod 2. The divisor is always the irreducible dimension.
pub fn abs_class(module: &CliffordRep) -> Result<KOClass> {
    let sig = module.sig();
    let degree = ((sig.s as i64 + 1 - sig.r as i64).rem_euclid(8)) as u8;
    let value = match (group_of(degree), decompose(module)?) {
        (Group::Z, Multiplicity::Pair { plus, minus }) => plus as i64 - minus as i64,
        (Group::Z2, Multiplicity::Single { m }) => m as i64,
        (Group::Trivial, _) => 0,
        (g, m) => unreachable!("group {g:?} with multiplicity {m:?}"),
    };
    Ok(KOClass::new(degree, value))
}

/// Drop the symmetric generator at index `drop`.
pub fn forgetful(module: &CliffordRep, drop: usize) -> Result<CliffordRep> {
    let r = module.sig().r;
    if r == 0 {
        return invalid("forgetful map needs at least one symmetric generator");
    }
    if drop >= r {
        return invalid(format!("E index {drop} out of range (r = {r})"));
    }
    let mut e = module.e().to_vec();
    e.remove(drop);
    CliffordRep::unchecked(module.n(), e, module.f().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{direct_sum, k1, k2, l1};
    use crate::linalg::eye;

    #[test]
    fn groups_by_degree() {
        use Group::*;
        let table = [Z, Z2, Z2, Trivial, Z, Trivial, Trivial, Trivial];
        for (d, g) in table.into_iter().enumerate() {
            assert_eq!(group_of(d as u8), g);
        }
    }

    #[test]
    fn class_arithmetic() {
        assert_eq!(KOClass::new(1, 3).value, 1);
        assert_eq!(KOClass::new(2, -1).value, 1);
        assert_eq!(KOClass::new(5, 7).value, 0);
        assert_eq!(KOClass::new(8, 2), KOClass::new(0, 2));
        let a = KOClass::new(4, 3);
        assert_eq!(a.plus(&a.negate()).unwrap(), KOClass::zero(4));
        assert!(a.plus(&KOClass::zero(0)).is_err());
        assert_eq!(
            KOClass::new(2, 1).to_json(),
            r#"{"degree":2,"group":"Z2","value":1}"#
        );
    }

    #[test]
    fn hand_computed_modules() {
        // (ℝ, E₁ = +1): ω = +1, one copy of the positive irreducible.
        let plus = CliffordRep::new(1, vec![eye(1)], Vec::new()).unwrap();
        assert_eq!(abs_class(&plus).unwrap(), KOClass::new(0, 1));
        let minus = CliffordRep::new(1, vec![-eye(1)], Vec::new()).unwrap();
        assert_eq!(abs_class(&minus).unwrap(), KOClass::new(0, -1));
        // (ℝ², L₁) is one copy of ℂ.
        let c = CliffordRep::new(2, Vec::new(), vec![l1()]).unwrap();
        assert_eq!(abs_class(&c).unwrap(), KOClass::new(2, 1));
        assert_eq!(abs_class(&direct_sum(&c, &c).unwrap()).unwrap(), KOClass::new(2, 0));
        // (ℝ², K₁, L₁) is the irreducible of Cl_{1,1}.
        let m = CliffordRep::new(2, vec![k1()], vec![l1()]).unwrap();
        assert_eq!(abs_class(&m).unwrap(), KOClass::new(1, 1));
        // (ℝ², K₁, K₂) has degree 7.
        let t = CliffordRep::new(2, vec![k1(), k2()], Vec::new()).unwrap();
        assert_eq!(abs_class(&t).unwrap(), KOClass::zero(7));
        // No generators: ℝⁿ in degree 1.
        assert_eq!(abs_class(&CliffordRep::trivial(3)).unwrap(), KOClass::new(1, 1));
    }

    #[test]
    fn forgetful_drops_a_generator() {
        let m = CliffordRep::new(2, vec![k1(), k2()], vec![]).unwrap();
        let f = forgetful(&m, 0).unwrap();
        assert_eq!(f.e(), &[k2()]);
        assert!(forgetful(&m, 2).is_err());
        assert!(forgetful(&CliffordRep::trivial(2), 0).is_err());
    }
}
