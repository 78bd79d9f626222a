use approx::assert_abs_diff_eq;
use gaugegap::blocks::{build_block, oracle_comparison, BlockOperator, SectorLabel};
use gaugegap::code::CssCode;
use gaugegap::eigen::dense_spectrum;
use gaugegap::f2::solve;
use gaugegap::{decompose, verify, BitMatrix, BitVec};
use proptest::prelude::*;

fn bit_matrix(rows: usize, cols: usize) -> impl Strategy<Value = BitMatrix> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), cols), rows).prop_map(move |rs| {
        let rows: Vec<BitVec> = rs.iter().map(|r| BitVec::from_bools(r)).collect();
        BitMatrix::from_rows(cols, &rows).unwrap()
    })
}

/// Random CSS gauge code on `n` qubits with non-zero generators.
fn css_code(max_n: usize) -> impl Strategy<Value = CssCode> {
    (3..=max_n, 1..=4usize, 1..=4usize)
        .prop_flat_map(|(n, nx, nz)| (Just(n), bit_matrix(nx, n), bit_matrix(nz, n)))
        .prop_filter_map("zero or repeated generator", |(n, gx, gz)| {
            CssCode::new("random", n, gx, gz).ok()
        })
}

fn sector(dec: &gaugegap::LstrDecomposition, a: u64, b: u64) -> SectorLabel {
    let (mx, mz) = (dec.m_x(), dec.m_z());
    let mask = |m: usize| if m >= 64 { u64::MAX } else { (1u64 << m) - 1 };
    SectorLabel::new(BitVec::from_u64(mz, a & mask(mz)), BitVec::from_u64(mx, b & mask(mx)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_nullity(m in (1..8usize, 1..12usize).prop_flat_map(|(r, c)| bit_matrix(r, c))) {
        let ker = m.kernel();
        prop_assert_eq!(m.rank() + ker.rows(), m.cols());
        prop_assert_eq!(m.rank(), m.transpose().rank());
        for v in ker.iter_rows() {
            prop_assert!(m.mul_vec(&v).is_zero());
        }
    }

    #[test]
    fn row_reduce_keeps_span(m in (1..8usize, 1..12usize).prop_flat_map(|(r, c)| bit_matrix(r, c))) {
        let ech = m.row_reduce();
        prop_assert!(ech.matrix.echelon_pivots().is_ok());
        // each original row is a combination of the echelon rows and back
        prop_assert!(solve(&ech.matrix.transpose(), &m.transpose()).is_ok());
        prop_assert!(solve(&m.transpose(), &ech.matrix.transpose()).is_ok());
    }

    #[test]
    fn solve_round_trip(
        (a, x) in (1..8usize, 1..10usize, 1..4usize)
            .prop_flat_map(|(r, c, k)| (bit_matrix(r, c), bit_matrix(k, c)))
    ) {
        let rhs = a.mul_transpose(&x).unwrap();
        let y = solve(&a, &rhs).unwrap();
        prop_assert_eq!(a.mul_transpose(&y).unwrap(), rhs);
    }

    #[test]
    fn decomposition_invariants(code in css_code(8)) {
        let dec = decompose(&code).unwrap();
        let report = verify(&dec, &code);
        prop_assert!(report.passed(), "{}", report);
        let d = dec.dims();
        prop_assert_eq!(d.n, d.k + d.m_x + d.m_z + d.r);
    }

    #[test]
    fn text_format_round_trip(code in css_code(10)) {
        let back = CssCode::parse(&code.to_text()).unwrap();
        prop_assert_eq!(back.g_x, code.g_x);
        prop_assert_eq!(back.g_z, code.g_z);
    }

    #[test]
    fn sectors_reproduce_dense_spectrum(code in css_code(7)) {
        let dec = decompose(&code).unwrap();
        let cmp = oracle_comparison(&code, &dec).unwrap();
        prop_assert!(cmp.agrees(1e-9), "max diff {}", cmp.max_abs_diff);
    }

    #[test]
    fn apply_matches_dense(code in css_code(10), a in any::<u64>(), b in any::<u64>(), seed in any::<u64>()) {
        let dec = decompose(&code).unwrap();
        let s = sector(&dec, a, b);
        let block: BlockOperator<f64> = build_block(&code, &dec, &s).unwrap();
        let m = block.dense().unwrap();
        let dim = block.dimension();
        let x: Vec<f64> = (0..dim).map(|i| (((seed ^ i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 40) as f64) / 1e7 - 0.8).collect();
        let mut y = vec![0.0; dim];
        block.apply(&x, &mut y).unwrap();
        for (i, &yi) in y.iter().enumerate() {
            let want: f64 = (0..dim).map(|j| m.get(i, j) * x[j]).sum();
            assert_abs_diff_eq!(yi, want, epsilon = 1e-10);
        }
    }

    #[test]
    fn single_precision_tracks_double(code in css_code(8), a in any::<u64>(), b in any::<u64>()) {
        let dec = decompose(&code).unwrap();
        let s = sector(&dec, a, b);
        let b64: BlockOperator<f64> = build_block(&code, &dec, &s).unwrap();
        let b32: BlockOperator<f32> = build_block(&code, &dec, &s).unwrap();
        let s64 = dense_spectrum(&b64.dense().unwrap()).unwrap();
        let s32 = dense_spectrum(&b32.dense().unwrap()).unwrap();
        for (x, y) in s64.iter().zip(&s32) {
            assert_abs_diff_eq!(*x, *y as f64, epsilon = 1e-4);
        }
    }
}
