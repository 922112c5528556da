//! Dense polynomials over the prime field `Z/p`, little-endian coefficients.
//!
//! Only what the field constructor needs: multiplication modulo a monic
//! polynomial, gcd, and Rabin's irreducibility test.

pub(crate) type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

/// Remainder of `a` modulo `f` (f need not be monic, but must be nonzero).
pub(crate) fn rem(a: &[u64], f: &[u64], p: u64) -> Poly {
    let f = trim(f.to_vec());
    let mut r = trim(a.to_vec());
    let df = f.len() - 1;
    let lead_inv = inv_mod(f[df], p);
    while r.len() > df {
        let dr = r.len() - 1;
        let factor = r[dr] * lead_inv % p;
        if factor != 0 {
            for (i, &fi) in f.iter().enumerate() {
                let idx = dr - df + i;
                r[idx] = (r[idx] + p - factor * fi % p) % p;
            }
        }
        r.pop();
        r = trim(r);
    }
    r
}

pub(crate) fn mul_mod(a: &[u64], b: &[u64], f: &[u64], p: u64) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + ai * bj) % p;
        }
    }
    rem(&prod, f, p)
}

fn pow_poly_mod(base: &[u64], mut exp: u64, f: &[u64], p: u64) -> Poly {
    let mut acc: Poly = vec![1];
    let mut b = rem(base, f, p);
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(&acc, &b, f, p);
        }
        b = mul_mod(&b, &b, f, p);
        exp >>= 1;
    }
    acc
}

fn sub(a: &[u64], b: &[u64], p: u64) -> Poly {
    let n = a.len().max(b.len());
    let out = (0..n)
        .map(|i| {
            let x = a.get(i).copied().unwrap_or(0);
            let y = b.get(i).copied().unwrap_or(0);
            (x + p - y) % p
        })
        .collect();
    trim(out)
}

fn gcd(a: &[u64], b: &[u64], p: u64) -> Poly {
    let mut x = trim(a.to_vec());
    let mut y = trim(b.to_vec());
    while !y.is_empty() {
        let r = rem(&x, &y, p);
        x = y;
        y = r;
    }
    x
}

/// `x^(p^k) mod f`.
fn frobenius_x(k: u64, f: &[u64], p: u64) -> Poly {
    let mut h: Poly = rem(&[0, 1], f, p);
    for _ in 0..k {
        h = pow_poly_mod(&h, p, f, p);
    }
    h
}

/// Rabin's test for a monic `f` of degree `e >= 1` over `Z/p`.
pub(crate) fn is_irreducible(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    if f.len() < 2 || f[f.len() - 1] != 1 {
        return false;
    }
    let e = (f.len() - 1) as u64;
    if e == 1 {
        return true;
    }
    let x: Poly = vec![0, 1];
    if !sub(&frobenius_x(e, &f, p), &x, p).is_empty() {
        return false;
    }
    for r in super::prime_factors(e) {
        let h = sub(&frobenius_x(e / r, &f, p), &x, p);
        if gcd(&f, &h, p).len() != 1 {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rabin_matches_factor_search_over_f2_and_f3() {
        // brute force: f reducible iff some monic g of degree 1..=e/2 divides it
        for p in [2u64, 3] {
            for e in 2..=4usize {
                let total = p.pow(e as u32);
                for k in 0..total {
                    let mut f: Poly = (0..e).map(|i| (k / p.pow(i as u32)) % p).collect();
                    f.push(1);
                    let mut reducible = false;
                    for dg in 1..=e / 2 {
                        for kg in 0..p.pow(dg as u32) {
                            let mut g: Poly =
                                (0..dg).map(|i| (kg / p.pow(i as u32)) % p).collect();
                            g.push(1);
                            if rem(&f, &g, p).is_empty() {
                                reducible = true;
                            }
                        }
                    }
                    assert_eq!(is_irreducible(&f, p), !reducible, "p={p} f={f:?}");
                }
            }
        }
    }
}
