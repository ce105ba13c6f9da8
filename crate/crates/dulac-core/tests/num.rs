use dulac_core::num::{Cx, Qd};

fn q(s: &str) -> Qd {
    Qd::parse(s).unwrap()
}

fn close(got: Qd, want: &str) {
    let w = q(want);
    let err = ((got - w) / w).abs().to_f64();
    assert!(err < 1e-58, "got {:?} want {} (rel err {:e})", got, want, err);
}

// reference digits from an 80-digit evaluation
#[test]
fn elementary_functions_match_reference_digits() {
    close(Qd::ONE / q("3"), "3.33333333333333333333333333333333333333333333333333333333333333333e-1");
    close(q("2").sqrt(), "1.41421356237309504880168872420969807856967187537694807317667973799");
    close(q("1.234567").exp(), "3.43689002508821671103439514204251860128236560773317743304850098536");
    close(q("-20.5").exp(), "1.25015286638674262893755311923122218227159464207656584933822467744e-9");
    close(q("7.5").ln(), "2.01490302054226475657877244869053677609759177773101191952666221562");
    close(q("0.001").ln(), "-6.9077552789821370520539743640530926228033044658863189280999837029");
    let (s, c) = q("2.5").sin_cos();
    close(s, "5.98472144103956494051854702186162271703597171577223573302627032639e-1");
    close(c, "-8.01143615546933714833502790467351664428567848767820135074597991662e-1");
    close(q("100.3").sin_cos().0, "-2.2891692244520395815942306169517275655182394354822507325216161157e-1");
    close(Qd::atan2(q("0.3"), q("-0.7")), "2.73670086730470981515057045427006026764528276318943020330751406656");
    close(Qd::PI, "3.14159265358979323846264338327950288419716939937510582097494459231");
}

#[test]
fn exp_of_two_pi_i_is_one() {
    let e = Cx::two_pi_i().exp();
    assert!((e - Cx::ONE).abs().to_f64() < 1e-60);
    let h = (Cx::two_pi_i().scale(Qd::from_f64(0.5))).exp();
    assert!((h + Cx::ONE).abs().to_f64() < 1e-60);
}

#[test]
fn complex_log_inverts_exp() {
    let z = Cx::from_f64(0.7, -2.9);
    let w = z.exp().ln();
    assert!((w - z).abs().to_f64() < 1e-60);
}

#[test]
fn printing_round_trips() {
    let x = q("-1.2345678901234567890123456789012345678901234567890123e-7");
    let mut s = String::new();
    x.write_sci(&mut s, 55).unwrap();
    assert_eq!(s, "-1.2345678901234567890123456789012345678901234567890123e-7");
    let y = Qd::parse(&s).unwrap();
    assert!(((x - y) / x).abs().to_f64() < 1e-60);
    let mut t = String::new();
    Qd::from_f64(0.5).write_sci(&mut t, 10).unwrap();
    assert_eq!(t, "5e-1");
}
