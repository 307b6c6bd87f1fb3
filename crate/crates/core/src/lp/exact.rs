//! Exact solver for square rational linear systems via p-adic (Dixon)
//! lifting: LU mod a word-size prime, digit-by-digit lifting of the
//! solution, rational reconstruction, and a final exact verification.
//!
//! This is what turns a floating-point simplex basis into an exact
//! certificate without ever running exact Gaussian elimination.

use crate::lin::SparseVec;
use crate::scalar::Rat;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

// Largest primes below 2^31; products of two residues fit in u64.
const PRIMES: [u64; 3] = [2_147_483_647, 2_147_483_629, 2_147_483_587];

const MAX_DIGITS: usize = 4096;

/// Solve R x = rhs for a square system given by rows. Returns None when the
/// matrix is singular (or resists lifting within the digit budget).
pub fn solve_rows(rows: &[SparseVec<Rat>], rhs: &[Rat]) -> Option<Vec<Rat>> {
    let n = rows.len();
    assert_eq!(rhs.len(), n, "dimension mismatch");
    if n == 0 {
        return Some(Vec::new());
    }

    // Clear denominators: (c R) x = c rhs shares the solution for any c != 0.
    let mut c = BigInt::one();
    for r in rows {
        for (_, v) in r.iter() {
            c = c.lcm(v.denom());
        }
    }
    for v in rhs {
        c = c.lcm(v.denom());
    }
    let int_rows: Vec<Vec<(usize, BigInt)>> = rows
        .iter()
        .map(|r| {
            r.iter()
                .map(|(j, v)| (j, v.numer() * (&c / v.denom())))
                .collect()
        })
        .collect();
    let int_rhs: Vec<BigInt> = rhs.iter().map(|v| v.numer() * (&c / v.denom())).collect();

    for &p in &PRIMES {
        if let Some(sol) = dixon(&int_rows, &int_rhs, p) {
            return Some(sol);
        }
    }
    None
}

/// Rank analysis of a square system mod the first prime: returns the
/// dependent column positions and the rows no pivot landed in (equal
/// counts), or None when the matrix is nonsingular mod p.
pub fn singular_structure(rows: &[SparseVec<Rat>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = rows.len();
    let p = PRIMES[0];
    let mut a = vec![0u64; n * n];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r.iter() {
            // v = num/den; reduce exactly mod p
            let num = mod_big(v.numer(), p);
            let den = mod_big(v.denom(), p);
            if den == 0 {
                // denominator divisible by p: give up on this analysis
                return None;
            }
            a[i * n + j] = mul_mod(num, inv_mod(den, p), p);
        }
    }
    let mut row_used = vec![false; n];
    let mut dependent = Vec::new();
    for k in 0..n {
        let pivot = (0..n).find(|&i| !row_used[i] && a[i * n + k] != 0);
        let Some(r) = pivot else {
            dependent.push(k);
            continue;
        };
        row_used[r] = true;
        let inv = inv_mod(a[r * n + k], p);
        for i in 0..n {
            if row_used[i] || a[i * n + k] == 0 {
                continue;
            }
            let f = mul_mod(a[i * n + k], inv, p);
            for j in k..n {
                let t = mul_mod(f, a[r * n + j], p);
                let cur = a[i * n + j];
                a[i * n + j] = if cur >= t { cur - t } else { cur + p - t };
            }
        }
    }
    if dependent.is_empty() {
        return None;
    }
    let uncovered: Vec<usize> = (0..n).filter(|&i| !row_used[i]).collect();
    debug_assert_eq!(uncovered.len(), dependent.len());
    Some((dependent, uncovered))
}

fn dixon(rows: &[Vec<(usize, BigInt)>], rhs: &[BigInt], p: u64) -> Option<Vec<Rat>> {
    let n = rows.len();
    let big_p = BigInt::from(p);

    // Dense LU of the matrix mod p.
    let mut lu = vec![0u64; n * n];
    for (i, r) in rows.iter().enumerate() {
        for (j, v) in r {
            lu[i * n + *j] = mod_big(v, p);
        }
    }
    let perm = lu_factor(&mut lu, n, p)?;

    let mut residual: Vec<BigInt> = rhs.to_vec();
    let mut acc = vec![BigInt::zero(); n];
    let mut pk = BigInt::one();
    let mut next_attempt = 8usize;

    for digit in 0..MAX_DIGITS {
        let r_mod: Vec<u64> = residual.iter().map(|v| mod_big(v, p)).collect();
        let x_mod = lu_solve(&lu, &perm, &r_mod, n, p);

        for i in 0..n {
            acc[i] += BigInt::from(x_mod[i]) * &pk;
        }
        // residual <- (residual - M x_digit) / p, exactly divisible
        let mut all_zero = true;
        for (i, r) in rows.iter().enumerate() {
            let mut t = std::mem::take(&mut residual[i]);
            for (j, v) in r {
                t -= v * BigInt::from(x_mod[*j]);
            }
            debug_assert!((&t % &big_p).is_zero());
            residual[i] = t / &big_p;
            if !residual[i].is_zero() {
                all_zero = false;
            }
        }
        pk *= &big_p;

        if all_zero {
            // exact integer solution
            let sol: Vec<Rat> = acc.iter().map(|v| Rat::from(v.clone())).collect();
            return Some(sol);
        }
        if digit + 1 >= next_attempt {
            next_attempt = next_attempt * 3 / 2 + 1;
            if let Some(sol) = reconstruct_all(&acc, &pk) {
                if verify(rows, rhs, &sol) {
                    return Some(sol);
                }
            }
        }
    }
    None
}

fn reconstruct_all(acc: &[BigInt], modulus: &BigInt) -> Option<Vec<Rat>> {
    acc.iter()
        .map(|v| rational_reconstruct(&v.mod_floor(modulus), modulus))
        .collect()
}

fn verify(rows: &[Vec<(usize, BigInt)>], rhs: &[BigInt], x: &[Rat]) -> bool {
    rows.iter().zip(rhs).all(|(r, b)| {
        let mut acc = Rat::zero();
        for (j, v) in r {
            acc += Rat::from(v.clone()) * &x[*j];
        }
        acc == Rat::from(b.clone())
    })
}

/// Reconstruct n/d from u mod N with |n|, d <= sqrt(N/2), via the
/// half-extended Euclidean algorithm.
fn rational_reconstruct(u: &BigInt, modulus: &BigInt) -> Option<Rat> {
    let bound = (modulus / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (modulus.clone(), u.clone());
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        r0 = std::mem::replace(&mut r1, r2);
        let t2 = &t0 - &q * &t1;
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound {
        return None;
    }
    if t1.is_negative() {
        r1 = -r1;
        t1 = -t1;
    }
    // gcd(n, d) must be 1 for the reconstruction to be canonical
    if !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Rat::new(r1, t1))
}

fn mod_big(v: &BigInt, p: u64) -> u64 {
    let m = v.mod_floor(&BigInt::from(p));
    m.to_u64().expect("reduced residue fits")
}

#[inline]
fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // Fermat: a^(p-2) mod p
    let mut base = a % p;
    let mut e = p - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        e >>= 1;
    }
    acc
}

/// In-place LU with row pivoting; returns the row permutation or None when
/// singular mod p.
fn lu_factor(a: &mut [u64], n: usize, p: u64) -> Option<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| a[i * n + k] != 0)?;
        if pivot_row != k {
            perm.swap(k, pivot_row);
            for j in 0..n {
                a.swap(k * n + j, pivot_row * n + j);
            }
        }
        let inv = inv_mod(a[k * n + k], p);
        for i in (k + 1)..n {
            let f = mul_mod(a[i * n + k], inv, p);
            if f == 0 {
                continue;
            }
            a[i * n + k] = f;
            for j in (k + 1)..n {
                let t = mul_mod(f, a[k * n + j], p);
                let cur = a[i * n + j];
                a[i * n + j] = if cur >= t { cur - t } else { cur + p - t };
            }
        }
    }
    Some(perm)
}

fn lu_solve(a: &[u64], perm: &[usize], b: &[u64], n: usize, p: u64) -> Vec<u64> {
    // forward: L y = P b (unit lower triangle)
    let mut y = vec![0u64; n];
    for i in 0..n {
        // terms are < p^2 < 2^62, so u128 absorbs n of them without overflow
        let mut acc = b[perm[i]] as u128;
        for j in 0..i {
            acc += (p as u128) * (p as u128) - (a[i * n + j] as u128) * (y[j] as u128);
        }
        y[i] = (acc % p as u128) as u64;
    }
    // backward: U x = y
    let mut x = vec![0u64; n];
    for i in (0..n).rev() {
        let mut acc = y[i] as u128;
        for j in (i + 1)..n {
            let t = (a[i * n + j] as u128) * (x[j] as u128) % p as u128;
            acc += p as u128 - t;
        }
        let inv = inv_mod(a[i * n + i], p);
        x[i] = mul_mod((acc % p as u128) as u64, inv, p);
    }
    x
}
