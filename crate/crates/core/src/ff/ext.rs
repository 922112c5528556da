use std::collections::HashMap;

use super::{Fe, Field};
use crate::error::{Error, Result};

/// `F_{q^2}` together with an explicit embedding of `F_q`.
///
/// The big field carries its own lexicographically first modulus of degree
/// `2e`; the embedding sends the generator of `F_q` to the first root (in enc
/// order) of the base modulus inside `F_{q^2}`.
#[derive(Clone, Debug)]
pub struct QuadraticExtension {
    base: Field,
    ext: Field,
    image: Vec<Fe>,
    preimage: HashMap<Fe, Fe>,
}

impl QuadraticExtension {
    pub fn new(base: &Field) -> Result<Self> {
        let ext = Field::new(base.p(), 2 * base.e())?;
        let generator = if base.e() == 1 {
            // the prime subfield embeds by n -> n * 1; the generator is unused
            ext.one()
        } else {
            let modulus = base.modulus();
            ext.iter()
                .find(|&z| {
                    let value = modulus.iter().rev().fold(ext.zero(), |acc, &c| {
                        ext.add(ext.mul(acc, z), ext.from_int(c as i64))
                    });
                    value.is_zero()
                })
                .ok_or_else(|| Error::Internal("base modulus has no root in F_{q^2}".into()))?
        };
        let image: Vec<Fe> = base
            .iter()
            .map(|x| {
                base.coeffs(x).iter().rev().fold(ext.zero(), |acc, &c| {
                    ext.add(ext.mul(acc, generator), ext.from_int(c as i64))
                })
            })
            .collect();
        let preimage = base.iter().map(|x| (image[x.enc() as usize], x)).collect();
        Ok(QuadraticExtension { base: base.clone(), ext, image, preimage })
    }

    pub fn base(&self) -> &Field {
        &self.base
    }

    pub fn field(&self) -> &Field {
        &self.ext
    }

    #[inline]
    pub fn embed(&self, x: Fe) -> Fe {
        self.image[x.enc() as usize]
    }

    /// Inverse of [`embed`](Self::embed) on its image.
    pub fn restrict(&self, y: Fe) -> Option<Fe> {
        self.preimage.get(&y).copied()
    }
}
