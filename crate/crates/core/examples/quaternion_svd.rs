//! Singular value decomposition of a quaternion matrix.

use qpca_eeg::qlinalg::{hermitian_transpose, matmul, qsvd};
use qpca_eeg::{Quaternion, QuaternionMatrix};

fn main() -> qpca_eeg::Result<()> {
    let a = QuaternionMatrix::from_fn(4, 3, |r, c| {
        let t = (r * 3 + c) as f64;
        Quaternion::new(t.cos(), (0.7 * t).sin(), 0.1 * t, 1.0 / (1.0 + t))
    });
    let svd = qsvd(&a)?;
    println!("singular values: {:?}", svd.singular_values);

    let err = svd.reconstruct().sub(&a)?.frobenius_norm() / a.frobenius_norm();
    let u = &svd.u;
    let gram = matmul(&hermitian_transpose(u), u)?;
    let unitarity = gram.sub(&QuaternionMatrix::identity(u.rows()))?.frobenius_norm();
    println!("relative reconstruction error {err:.2e}");
    println!("||U^H U - I|| = {unitarity:.2e}");
    Ok(())
}
