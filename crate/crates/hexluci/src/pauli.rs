//! Bit-packed Pauli operators with exact phase tracking.

use std::fmt;

/// Pauli basis used by resets, measurements and CSS checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    X,
    Z,
}

impl Basis {
    pub fn other(self) -> Basis {
        match self {
            Basis::X => Basis::Z,
            Basis::Z => Basis::X,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Basis::X => "X",
            Basis::Z => "Z",
        })
    }
}

/// Single-qubit Pauli.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }
}

/// Pauli product `i^phase * prod_q X_q^x_q Z_q^z_q` over a fixed number of qubits.
///
/// Hermitian operators are the ones with `phase ≡ popcount(x & z) (mod 2)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    num_qubits: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

#[inline]
fn words(n: usize) -> usize {
    n.div_ceil(64)
}

impl PauliString {
    pub fn identity(num_qubits: usize) -> Self {
        PauliString { num_qubits, x: vec![0; words(num_qubits)], z: vec![0; words(num_qubits)], phase: 0 }
    }

    /// Single-qubit Pauli of the given basis.
    pub fn single(num_qubits: usize, qubit: usize, basis: Basis) -> Self {
        Self::from_support(num_qubits, [qubit], basis)
    }

    /// CSS-type product of `basis` on every listed qubit.
    pub fn from_support<I: IntoIterator<Item = usize>>(num_qubits: usize, support: I, basis: Basis) -> Self {
        let mut p = Self::identity(num_qubits);
        for q in support {
            match basis {
                Basis::X => p.x[q / 64] ^= 1 << (q % 64),
                Basis::Z => p.z[q / 64] ^= 1 << (q % 64),
            }
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn get(&self, q: usize) -> Pauli {
        let (w, b) = (q / 64, q % 64);
        Pauli::from_bits((self.x[w] >> b) & 1 == 1, (self.z[w] >> b) & 1 == 1)
    }

    /// Overwrites qubit `q` with `p`, keeping the operator Hermitian.
    pub fn set(&mut self, q: usize, p: Pauli) {
        let old_y = self.get(q) == Pauli::Y;
        let (w, b) = (q / 64, q % 64);
        let (xb, zb) = p.bits();
        self.x[w] = (self.x[w] & !(1 << b)) | ((xb as u64) << b);
        self.z[w] = (self.z[w] & !(1 << b)) | ((zb as u64) << b);
        let new_y = p == Pauli::Y;
        if old_y != new_y {
            self.phase = (self.phase + if new_y { 1 } else { 3 }) % 4;
        }
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().chain(&self.z).all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    /// Qubits acted on non-trivially, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut out = Vec::new();
        for (w, (a, b)) in self.x.iter().zip(&self.z).enumerate() {
            let mut m = a | b;
            while m != 0 {
                let t = m.trailing_zeros() as usize;
                out.push(w * 64 + t);
                m &= m - 1;
            }
        }
        out
    }

    pub fn x_bits(&self) -> &[u64] {
        &self.x
    }

    pub fn z_bits(&self) -> &[u64] {
        &self.z
    }

    fn y_count(&self) -> u32 {
        self.x.iter().zip(&self.z).map(|(a, b)| (a & b).count_ones()).sum()
    }

    /// +1 or -1 for Hermitian operators written with explicit Y factors.
    pub fn sign(&self) -> i8 {
        let k = (self.phase as u32 + 4 - self.y_count() % 4) % 4;
        debug_assert!(k.is_multiple_of(2), "non-Hermitian Pauli product");
        if k == 0 {
            1
        } else {
            -1
        }
    }

    pub fn is_negative(&self) -> bool {
        self.sign() < 0
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    /// Drops the sign so that `sign() == +1`.
    pub fn make_positive(&mut self) {
        if self.is_negative() {
            self.negate();
        }
    }

    /// Basis of a CSS operator, or `None` for identity or mixed operators.
    pub fn css_basis(&self) -> Option<Basis> {
        let has_x = self.x.iter().any(|&w| w != 0);
        let has_z = self.z.iter().any(|&w| w != 0);
        match (has_x, has_z) {
            (true, false) => Some(Basis::X),
            (false, true) => Some(Basis::Z),
            _ => None,
        }
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc += ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc.is_multiple_of(2)
    }

    /// In-place right multiplication `self <- self * other`.
    pub fn mul_assign(&mut self, other: &PauliString) {
        debug_assert_eq!(self.num_qubits, other.num_qubits);
        let mut swaps = 0u32;
        for i in 0..self.x.len() {
            swaps += (self.z[i] & other.x[i]).count_ones();
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.phase = ((self.phase as u32 + other.phase as u32 + 2 * swaps) % 4) as u8;
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.mul_assign(other);
        out
    }

    /// Equality ignoring sign.
    pub fn same_up_to_sign(&self, other: &PauliString) -> bool {
        self.x == other.x && self.z == other.z
    }

    /// Conjugation by CX with control `c` and target `t`.
    pub fn apply_cx(&mut self, c: usize, t: usize) {
        let xc = self.bit_x(c);
        let zt = self.bit_z(t);
        if xc {
            self.flip_x(t);
        }
        if zt {
            self.flip_z(c);
        }
    }

    /// Conjugation by Hadamard.
    pub fn apply_h(&mut self, q: usize) {
        let (xb, zb) = (self.bit_x(q), self.bit_z(q));
        if xb != zb {
            self.flip_x(q);
            self.flip_z(q);
        }
        if xb && zb {
            self.phase = (self.phase + 2) % 4;
        }
    }

    /// Conjugation by the phase gate S.
    pub fn apply_s(&mut self, q: usize) {
        if self.bit_x(q) {
            self.flip_z(q);
            self.phase = (self.phase + 1) % 4;
        }
    }

    #[inline]
    pub fn bit_x(&self, q: usize) -> bool {
        (self.x[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    pub fn bit_z(&self, q: usize) -> bool {
        (self.z[q / 64] >> (q % 64)) & 1 == 1
    }

    #[inline]
    fn flip_x(&mut self, q: usize) {
        self.x[q / 64] ^= 1 << (q % 64);
    }

    #[inline]
    fn flip_z(&mut self, q: usize) {
        self.z[q / 64] ^= 1 << (q % 64);
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.is_negative() { "-" } else { "+" })?;
        let support = self.support();
        if support.is_empty() {
            return f.write_str("I");
        }
        for (k, q) in support.into_iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            let c = match self.get(q) {
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
                Pauli::I => unreachable!(),
            };
            write!(f, "{c}{q}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_track_sign() {
        let x = PauliString::single(2, 0, Basis::X);
        let z = PauliString::single(2, 0, Basis::Z);
        // XZ = -iY, ZX = iY
        let xz = x.mul(&z);
        let zx = z.mul(&x);
        assert_eq!(xz.get(0), Pauli::Y);
        assert_ne!(xz.phase, zx.phase);
        let mut y = PauliString::identity(2);
        y.set(0, Pauli::Y);
        assert_eq!(y.sign(), 1);
        assert!(y.mul(&y).is_identity());
        assert_eq!(y.mul(&y).sign(), 1);
    }

    #[test]
    fn cx_conjugation() {
        let mut p = PauliString::single(2, 0, Basis::X);
        p.apply_cx(0, 1);
        assert_eq!(p.support(), vec![0, 1]);
        let mut q = PauliString::single(2, 1, Basis::Z);
        q.apply_cx(0, 1);
        assert_eq!(q.css_basis(), Some(Basis::Z));
        assert_eq!(q.weight(), 2);
        let mut r = PauliString::single(2, 0, Basis::Z);
        r.apply_cx(0, 1);
        assert_eq!(r, PauliString::single(2, 0, Basis::Z));
    }

    #[test]
    fn hadamard_flips_y_sign() {
        let mut y = PauliString::identity(1);
        y.set(0, Pauli::Y);
        y.apply_h(0);
        assert_eq!(y.get(0), Pauli::Y);
        assert_eq!(y.sign(), -1);
    }

    #[test]
    fn s_maps_x_to_y() {
        let mut p = PauliString::single(1, 0, Basis::X);
        p.apply_s(0);
        assert_eq!(p.get(0), Pauli::Y);
        assert_eq!(p.sign(), 1);
    }
}
