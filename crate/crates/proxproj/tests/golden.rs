use proxproj::gen::{gen_bp, gen_emd_pair, gen_smc, gen_spcp, EmdKind};
use proxproj::linalg::DenseMatrix;
use sha2::{Digest, Sha256};

fn digest(parts: &[&DenseMatrix]) -> String {
    let mut h = Sha256::new();
    for m in parts {
        h.update((m.nrows() as u64).to_le_bytes());
        h.update((m.ncols() as u64).to_le_bytes());
        for v in m.iter() {
            h.update(v.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn col(v: &proxproj::linalg::DenseVector) -> DenseMatrix {
    DenseMatrix::from_column_slice(v.len(), 1, v.as_slice())
}

#[test]
fn generators_are_bit_stable() {
    let bp = gen_bp(8, 20, 0.2, 7).unwrap();
    let smc = gen_smc(12, 2, 3.0, Some(0.1), 7).unwrap();
    let spcp = gen_spcp(9, 6, 2, 0.1, 1e-3, 7).unwrap();
    let emd = gen_emd_pair(&EmdKind::Blobs { count: 2 }, 6, 7).unwrap();
    let got = [
        digest(&[bp.problem.a(), &col(bp.problem.b()), &col(&bp.x_star)]),
        digest(&[&smc.m, &smc.noise, smc.problem.m_obs()]),
        digest(&[&spcp.l_star, &spcp.s_star, &spcp.noise, spcp.problem.m()]),
        digest(&[emd.rho0(), emd.rho1()]),
    ];
    let want = [
        "d4f6fafb1bf2870a0abd26fc6c21a100d3a173e86774a1833024139aee002d82",
        "614ab94a528ddfa0904807fe9b2f37d42425dadd77ffe2f86a66f7a9f660b48b",
        "228803bb12bbe8f1e8763f0b23e179057f0531df97996cd1738d511f306a44a8",
        "d7310fc138e26a4cb68e418d9ddf9ddda70e7d563a3f371d5a7a3581eb54dd44",
    ];
    assert_eq!(got, want);
}
