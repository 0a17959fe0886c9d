use std::ffi::CStr;
use std::ptr;

use sectkit_ffi::*;

fn last_error() -> String {
    let p = sectkit_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

unsafe fn family_fields(epsilon: f64, seed: u64) -> *mut SectkitFields {
    let mut shape = ptr::null_mut();
    assert_eq!(sectkit_shape_family(epsilon, seed, 40, &mut shape), SectkitStatus::Ok);
    let mut fields = ptr::null_mut();
    assert_eq!(sectkit_compute_fields(shape, 4, 1, 30, &mut fields), SectkitStatus::Ok);
    sectkit_shape_free(shape);
    fields
}

#[test]
fn builtin_fields_and_distance() {
    unsafe {
        let mut k1 = ptr::null_mut();
        let mut k2 = ptr::null_mut();
        assert_eq!(sectkit_shape_builtin(1, 100, &mut k1), SectkitStatus::Ok);
        assert_eq!(sectkit_shape_builtin(2, 100, &mut k2), SectkitStatus::Ok);
        let (mut f1, mut f2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sectkit_compute_fields(k1, 8, 0, 50, &mut f1), SectkitStatus::Ok);
        assert_eq!(sectkit_compute_fields(k2, 8, 0, 50, &mut f2), SectkitStatus::Ok);

        let (mut gamma, mut delta) = (0, 0);
        assert_eq!(sectkit_fields_dims(f1, &mut gamma, &mut delta), SectkitStatus::Ok);
        assert_eq!((gamma, delta), (8, 50));

        let mut sect = vec![f64::NAN; 400];
        assert_eq!(sectkit_fields_sect(f1, sect.as_mut_ptr(), sect.len()), SectkitStatus::Ok);
        for p in 0..8 {
            assert!(sect[p * 50 + 49].abs() <= 1e-9);
        }
        let mut ect = vec![0i64; 400];
        assert_eq!(sectkit_fields_ect(f2, ect.as_mut_ptr(), ect.len()), SectkitStatus::Ok);
        assert_eq!(ect[49], -1);
        assert_eq!(
            sectkit_fields_ect(f2, ect.as_mut_ptr(), 10),
            SectkitStatus::InvalidArgument
        );

        let (mut d12, mut d21) = (0.0, 0.0);
        assert_eq!(sectkit_fields_distance(f1, f2, &mut d12), SectkitStatus::Ok);
        assert_eq!(sectkit_fields_distance(f2, f1, &mut d21), SectkitStatus::Ok);
        assert!(d12 > 0.0);
        assert_eq!(d12, d21);

        sectkit_fields_free(f1);
        sectkit_fields_free(f2);
        sectkit_shape_free(k1);
        sectkit_shape_free(k2);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        let mut shape = ptr::null_mut();
        assert_eq!(sectkit_shape_builtin(7, 100, &mut shape), SectkitStatus::InvalidArgument);
        assert!(last_error().contains('7'));
        assert!(shape.is_null());

        assert_eq!(sectkit_shape_builtin(1, 100, ptr::null_mut()), SectkitStatus::NullPointer);

        let path = c"/nonexistent/shape.off";
        assert_eq!(sectkit_shape_from_off(path.as_ptr(), &mut shape), SectkitStatus::Io);
        assert!(last_error().contains("nonexistent"));

        let mut fields = ptr::null_mut();
        assert_eq!(
            sectkit_compute_fields(ptr::null(), 4, 1, 50, &mut fields),
            SectkitStatus::NullPointer
        );
        sectkit_shape_free(ptr::null_mut());
        sectkit_fields_free(ptr::null_mut());
        sectkit_group_free(ptr::null_mut());
    }
}

#[test]
fn tests_through_groups() {
    unsafe {
        let (mut g1, mut g2) = (ptr::null_mut(), ptr::null_mut());
        assert_eq!(sectkit_group_new(&mut g1), SectkitStatus::Ok);
        assert_eq!(sectkit_group_new(&mut g2), SectkitStatus::Ok);
        for i in 0..20 {
            let a = family_fields(0.0, i);
            let b = family_fields(0.1, 1000 + i);
            assert_eq!(sectkit_group_push(g1, a), SectkitStatus::Ok);
            assert_eq!(sectkit_group_push(g2, b), SectkitStatus::Ok);
            sectkit_fields_free(a);
            sectkit_fields_free(b);
        }
        let mut len = 0;
        assert_eq!(sectkit_group_len(g1, &mut len), SectkitStatus::Ok);
        assert_eq!(len, 20);

        let mut same = std::mem::zeroed::<SectkitReport>();
        assert_eq!(
            sectkit_test(g1, g1, SectkitMethod::Chi2, 0.05, 0, 0, &mut same),
            SectkitStatus::Ok
        );
        assert_eq!(same.statistic, 0.0);
        assert_eq!(same.reject, 0);
        assert_eq!(same.k_star, -1);

        let mut perm = std::mem::zeroed::<SectkitReport>();
        assert_eq!(
            sectkit_test(g1, g2, SectkitMethod::Permutation, 0.05, 99, 3, &mut perm),
            SectkitStatus::Ok
        );
        assert_eq!(perm.k_star, 94);
        assert!(perm.l_hat >= 1 && (0..4).contains(&perm.direction_index));

        let mut nhst = std::mem::zeroed::<SectkitReport>();
        assert_eq!(
            sectkit_test(g1, g2, SectkitMethod::Nhst, 0.05, 99, 3, &mut nhst),
            SectkitStatus::Ok
        );
        assert_eq!(nhst.k_star, 4);
        assert_eq!(nhst.l_hat, -1);

        // A field on another grid is refused.
        let mut k1 = ptr::null_mut();
        let mut other = ptr::null_mut();
        assert_eq!(sectkit_shape_builtin(1, 50, &mut k1), SectkitStatus::Ok);
        assert_eq!(sectkit_compute_fields(k1, 4, 1, 20, &mut other), SectkitStatus::Ok);
        assert_eq!(sectkit_group_push(g1, other), SectkitStatus::GridMismatch);

        sectkit_fields_free(other);
        sectkit_shape_free(k1);
        sectkit_group_free(g1);
        sectkit_group_free(g2);
    }
}
