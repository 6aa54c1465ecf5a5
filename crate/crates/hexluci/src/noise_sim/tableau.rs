//! Dense stabilizer tableau (Aaronson-Gottesman), used as the reference
//! simulator and as an oracle for the faster paths.

use crate::circuit_ir::{Circuit, Instruction};
use crate::pauli::{Basis, Pauli};

#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    /// Rows 0..n destabilizers, n..2n stabilizers, 2n scratch.
    x: Vec<Vec<u64>>,
    z: Vec<Vec<u64>>,
    r: Vec<bool>,
}

impl Tableau {
    /// All qubits in |0>.
    pub fn new(n: usize) -> Tableau {
        let words = n.div_ceil(64).max(1);
        let mut x = vec![vec![0u64; words]; 2 * n + 1];
        let mut z = vec![vec![0u64; words]; 2 * n + 1];
        for i in 0..n {
            x[i][i / 64] |= 1 << (i % 64);
            z[n + i][i / 64] |= 1 << (i % 64);
        }
        Tableau { n, words, x, z, r: vec![false; 2 * n + 1] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    #[inline]
    fn bit(v: &[u64], q: usize) -> bool {
        v[q / 64] >> (q % 64) & 1 == 1
    }

    pub fn cx(&mut self, a: usize, b: usize) {
        let (wa, ma, wb, mb) = (a / 64, 1u64 << (a % 64), b / 64, 1u64 << (b % 64));
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i][wa] & ma != 0, self.z[i][wa] & ma != 0);
            let (xb, zb) = (self.x[i][wb] & mb != 0, self.z[i][wb] & mb != 0);
            if xa && zb && (xb == za) {
                self.r[i] ^= true;
            }
            if xa {
                self.x[i][wb] ^= mb;
            }
            if zb {
                self.z[i][wa] ^= ma;
            }
        }
    }

    pub fn h(&mut self, a: usize) {
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i][w] & m != 0, self.z[i][w] & m != 0);
            if xa && za {
                self.r[i] ^= true;
            }
            if xa != za {
                self.x[i][w] ^= m;
                self.z[i][w] ^= m;
            }
        }
    }

    pub fn s(&mut self, a: usize) {
        let (w, m) = (a / 64, 1u64 << (a % 64));
        for i in 0..2 * self.n {
            let (xa, za) = (self.x[i][w] & m != 0, self.z[i][w] & m != 0);
            if xa && za {
                self.r[i] ^= true;
            }
            if xa {
                self.z[i][w] ^= m;
            }
        }
    }

    /// Applies a Pauli error to the state.
    pub fn apply_pauli(&mut self, q: usize, p: Pauli) {
        let (px, pz) = match p {
            Pauli::I => return,
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        };
        for i in 0..2 * self.n {
            // Anticommutes when the symplectic product is odd.
            let anti = (px && Self::bit(&self.z[i], q)) ^ (pz && Self::bit(&self.x[i], q));
            if anti {
                self.r[i] ^= true;
            }
        }
    }

    fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => z2 as i32 * (2 * x2 as i32 - 1),
            (false, true) => x2 as i32 * (1 - 2 * z2 as i32),
        }
    }

    /// Row h <- row h * row i.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut e = 2 * (self.r[h] as i32) + 2 * (self.r[i] as i32);
        for q in 0..self.n {
            e += Self::g(Self::bit(&self.x[i], q), Self::bit(&self.z[i], q), Self::bit(&self.x[h], q), Self::bit(&self.z[h], q));
        }
        self.r[h] = e.rem_euclid(4) == 2;
        for w in 0..self.words {
            let (xi, zi) = (self.x[i][w], self.z[i][w]);
            self.x[h][w] ^= xi;
            self.z[h][w] ^= zi;
        }
    }

    /// Measures Z on `a`. Random outcomes are taken from `choose`.
    /// Returns the outcome and whether it was random.
    pub fn measure_z(&mut self, a: usize, choose: &mut dyn FnMut() -> bool) -> (bool, bool) {
        let n = self.n;
        if let Some(p) = (n..2 * n).find(|&i| Self::bit(&self.x[i], a)) {
            for i in 0..2 * n {
                if i != p && Self::bit(&self.x[i], a) {
                    self.rowsum(i, p);
                }
            }
            self.x[p - n] = self.x[p].clone();
            self.z[p - n] = self.z[p].clone();
            self.r[p - n] = self.r[p];
            self.x[p] = vec![0; self.words];
            self.z[p] = vec![0; self.words];
            self.z[p][a / 64] |= 1 << (a % 64);
            let out = choose();
            self.r[p] = out;
            (out, true)
        } else {
            let s = 2 * n;
            self.x[s] = vec![0; self.words];
            self.z[s] = vec![0; self.words];
            self.r[s] = false;
            for i in 0..n {
                if Self::bit(&self.x[i], a) {
                    self.rowsum(s, i + n);
                }
            }
            (self.r[s], false)
        }
    }

    pub fn measure(&mut self, a: usize, basis: Basis, choose: &mut dyn FnMut() -> bool) -> (bool, bool) {
        match basis {
            Basis::Z => self.measure_z(a, choose),
            Basis::X => {
                self.h(a);
                let out = self.measure_z(a, choose);
                self.h(a);
                out
            }
        }
    }

    pub fn reset(&mut self, a: usize, basis: Basis) {
        let (m, _) = self.measure(a, basis, &mut || false);
        if m {
            self.apply_pauli(a, if basis == Basis::Z { Pauli::X } else { Pauli::Z });
        }
    }
}

/// Noiseless measurement record with every random outcome resolved to 0.
pub fn reference_sample(circuit: &Circuit) -> Vec<bool> {
    let mut t = Tableau::new(circuit.num_qubits());
    let mut out = Vec::with_capacity(circuit.num_measurements());
    let mut zero = || false;
    for ins in &circuit.instructions {
        match ins {
            Instruction::Cx { targets } => targets.chunks(2).for_each(|p| t.cx(p[0], p[1])),
            Instruction::H { targets } => targets.iter().for_each(|&q| t.h(q)),
            Instruction::S { targets } => targets.iter().for_each(|&q| t.s(q)),
            Instruction::Reset { basis, targets } => targets.iter().for_each(|&q| t.reset(q, *basis)),
            Instruction::Measure { basis, targets } => {
                for &q in targets {
                    out.push(t.measure(q, *basis, &mut zero).0);
                }
            }
            _ => {}
        }
    }
    out
}
