use std::io::Cursor;

use proptest::prelude::*;

use dq_core::transforms::io::{read_binary, read_csv, write_binary, write_csv};
use dq_core::transforms::{partial_fourier, Axis, AxisRole};
use dq_core::{Complex64, Error, GridFunction, GridSpec, Space};

fn n1_spec() -> GridSpec {
    GridSpec::new(vec![
        Axis::new(AxisRole::A, -3.0, 3.0, 8).unwrap(),
        Axis::new(AxisRole::V(0), -2.0, 2.5, 8).unwrap(),
        Axis::new(AxisRole::V(1), -4.0, 4.0, 16).unwrap(),
        Axis::new(AxisRole::L, -5.0, 5.0, 8).unwrap(),
    ])
    .unwrap()
}

fn bits(f: &GridFunction) -> Vec<(u64, u64)> {
    f.values().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

fn csv_round_trip(f: &GridFunction) -> GridFunction {
    let mut buf = Vec::new();
    write_csv(f, &mut buf).unwrap();
    read_csv(Cursor::new(buf)).unwrap()
}

fn bin_round_trip(f: &GridFunction) -> GridFunction {
    let mut buf = Vec::new();
    write_binary(f, &mut buf).unwrap();
    read_binary(Cursor::new(buf)).unwrap()
}

#[test]
fn binary_is_bit_exact_for_position_and_fourier_data() {
    let spec = n1_spec();
    let u = GridFunction::from_fn(&spec, |c| Complex64::new((c[0] - 0.1 * c[3]).sin() / 3.0, c[1] * c[2] + 1e-300));
    let back = bin_round_trip(&u);
    assert_eq!(back.spec(), u.spec());
    assert_eq!(back.space(), Space::Position);
    assert_eq!(bits(&back), bits(&u));
    let uh = partial_fourier(&u).unwrap();
    let back = bin_round_trip(&uh);
    assert_eq!(back.space(), Space::Fourier);
    assert_eq!(bits(&back), bits(&uh));
}

#[test]
fn csv_header_and_round_trip() {
    let spec = n1_spec();
    let u = GridFunction::from_fn(&spec, |c| Complex64::new(c[0] * 0.1 + c[3], -c[2] / 7.0));
    let mut buf = Vec::new();
    write_csv(&u, &mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert_eq!(text.lines().next().unwrap(), "a[-3:3],v1[-2:2.5],v2[-4:4],l[-5:5],re,im");
    assert_eq!(text.lines().count(), spec.len() + 1);
    let back = read_csv(Cursor::new(buf)).unwrap();
    assert_eq!(back.spec(), u.spec());
    // shortest round-trip formatting keeps the values exact
    assert_eq!(bits(&back), bits(&u));
}

#[test]
fn csv_fourier_tag_survives() {
    let spec = GridSpec::cube(0, -4.0, 4.0, 16).unwrap();
    let u = GridFunction::gaussian(&spec, &[0.0, 0.5], 0.7, Complex64::new(1.0, 0.0)).unwrap();
    let uh = partial_fourier(&u).unwrap();
    let back = csv_round_trip(&uh);
    assert_eq!(back.space(), Space::Fourier);
    assert_eq!(bits(&back), bits(&uh));
}

#[test]
fn malformed_inputs_are_rejected() {
    assert!(matches!(read_binary(Cursor::new(b"NOTAGRID".to_vec())), Err(Error::Format(_))));
    let spec = GridSpec::cube(0, -1.0, 1.0, 8).unwrap();
    let mut buf = Vec::new();
    write_binary(&GridFunction::zeros(&spec, Space::Position), &mut buf).unwrap();
    buf.truncate(buf.len() - 3);
    assert!(matches!(read_binary(Cursor::new(buf)), Err(Error::Format(_))));
    assert!(read_csv(Cursor::new(b"a[-1:1],l[-1:1],re\n".to_vec())).is_err());
    assert!(read_csv(Cursor::new(b"a[-1:1],q[-1:1],re,im\n0,0,0,0\n".to_vec())).is_err());
    let mut buf = Vec::new();
    write_csv(&GridFunction::zeros(&spec, Space::Position), &mut buf).unwrap();
    let mut text = String::from_utf8(buf).unwrap();
    text.push_str("0,0,0\n");
    assert!(read_csv(Cursor::new(text.into_bytes())).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_values_round_trip(vals in proptest::collection::vec((any::<f64>(), any::<f64>()), 64), lo in -10.0..-0.5f64, hi in 0.5..10.0f64) {
        let spec = GridSpec::cube(0, lo, hi, 8).unwrap();
        let vals: Vec<Complex64> = vals.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let u = GridFunction::new(spec, Space::Position, vals).unwrap();
        prop_assert_eq!(bits(&bin_round_trip(&u)), bits(&u));
        let finite = u.values().iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if finite {
            prop_assert_eq!(bits(&csv_round_trip(&u)), bits(&u));
        }
    }
}
