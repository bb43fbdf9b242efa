//! Hamilton products, conjugation and norms.

use qpca_eeg::Quaternion;

fn main() {
    let (i, j, k) = (Quaternion::I, Quaternion::J, Quaternion::K);
    println!("ij = {}, ji = {}", i * j, j * i);
    println!("i^2 = {}, ijk = {}", i * i, i * j * k);

    let a = Quaternion::new(1.0, 2.0, 3.0, 4.0);
    let b = Quaternion::new(0.5, -1.0, 0.0, 2.0);
    println!("a = {a}, b = {b}");
    println!("ab = {}, ba = {}", a * b, b * a);
    println!("conj(ab) = {}, conj(b) conj(a) = {}", (a * b).conj(), b.conj() * a.conj());
    println!("|ab| = {:.6}, |a||b| = {:.6}", (a * b).norm(), a.norm() * b.norm());
}
