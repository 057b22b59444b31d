use herglotz::coeffs::{parse_expr, sample_field, CoefficientField, EvalError};
use proptest::prelude::*;

/// Test-side expression tree, printed fully parenthesized and evaluated independently of the
/// library.
#[derive(Debug, Clone)]
enum Ref {
    Num(f64),
    X,
    Pi,
    Neg(Box<Ref>),
    Add(Box<Ref>, Box<Ref>),
    Sub(Box<Ref>, Box<Ref>),
    Mul(Box<Ref>, Box<Ref>),
    Div(Box<Ref>, Box<Ref>),
    Pow(Box<Ref>, Box<Ref>),
    Call(&'static str, Box<Ref>),
}

const FUNCS: [&str; 8] = ["sin", "cos", "tan", "exp", "log", "sqrt", "abs", "tanh"];

impl Ref {
    fn text(&self) -> String {
        match self {
            Ref::Num(v) => format!("{v:?}"),
            Ref::X => "x".into(),
            Ref::Pi => "pi".into(),
            Ref::Neg(a) => format!("-({})", a.text()),
            Ref::Add(a, b) => format!("({}) + ({})", a.text(), b.text()),
            Ref::Sub(a, b) => format!("({}) - ({})", a.text(), b.text()),
            Ref::Mul(a, b) => format!("({})*({})", a.text(), b.text()),
            Ref::Div(a, b) => format!("({})/({})", a.text(), b.text()),
            Ref::Pow(a, b) => format!("({})^({})", a.text(), b.text()),
            Ref::Call(f, a) => format!("{f}({})", a.text()),
        }
    }

    /// `None` where the value is undefined or not finite at some node.
    fn eval(&self, x: f64) -> Option<f64> {
        let v = match self {
            Ref::Num(v) => *v,
            Ref::X => x,
            Ref::Pi => std::f64::consts::PI,
            Ref::Neg(a) => -a.eval(x)?,
            Ref::Add(a, b) => a.eval(x)? + b.eval(x)?,
            Ref::Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Ref::Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Ref::Div(a, b) => a.eval(x)? / b.eval(x)?,
            Ref::Pow(a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                if a < 0.0 && b.fract() != 0.0 {
                    return None;
                }
                a.powf(b)
            }
            Ref::Call(f, a) => {
                let a = a.eval(x)?;
                match *f {
                    "sin" => a.sin(),
                    "cos" => a.cos(),
                    "tan" => a.tan(),
                    "exp" => a.exp(),
                    "log" if a > 0.0 => a.ln(),
                    "sqrt" if a >= 0.0 => a.sqrt(),
                    "abs" => a.abs(),
                    "tanh" => a.tanh(),
                    _ => return None,
                }
            }
        };
        v.is_finite().then_some(v)
    }
}

fn leaf() -> impl Strategy<Value = Ref> {
    prop_oneof![
        (0u32..80).prop_map(|k| Ref::Num(k as f64 / 8.0)),
        Just(Ref::X),
        Just(Ref::Pi),
    ]
}

fn expr() -> impl Strategy<Value = Ref> {
    leaf().prop_recursive(5, 40, 2, |inner| {
        let b = |f: fn(Box<Ref>, Box<Ref>) -> Ref| (inner.clone(), inner.clone()).prop_map(move |(a, c)| f(Box::new(a), Box::new(c)));
        prop_oneof![
            inner.clone().prop_map(|a| Ref::Neg(Box::new(a))),
            b(Ref::Add),
            b(Ref::Sub),
            b(Ref::Mul),
            b(Ref::Div),
            // small integer or half-integer exponents keep values finite
            (inner.clone(), 0u32..7).prop_map(|(a, k)| Ref::Pow(Box::new(a), Box::new(Ref::Num(k as f64 / 2.0)))),
            (inner.clone(), 0usize..FUNCS.len()).prop_map(|(a, i)| Ref::Call(FUNCS[i], Box::new(a))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eval_matches_reference(e in expr(), x in -3.0f64..3.0) {
        let text = e.text();
        let parsed = parse_expr(&text).map_err(|err| TestCaseError::fail(format!("{text}: {err}")))?;
        match (parsed.eval(x), e.eval(x)) {
            (Ok(got), Some(want)) => prop_assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{text} at {x}: {got} vs {want}"),
            (Err(EvalError::Domain { .. } | EvalError::NonFinite { .. }), None) => {}
            (got, want) => prop_assert!(false, "{text} at {x}: {got:?} vs {want:?}"),
        }
    }

    #[test]
    fn parse_print_round_trip(e in expr()) {
        let first = parse_expr(&e.text()).unwrap();
        let printed = first.to_string();
        let second = parse_expr(&printed).map_err(|err| TestCaseError::fail(format!("{printed}: {err}")))?;
        prop_assert_eq!(&second, &first, "printed as {}", printed);
        prop_assert_eq!(second.to_string(), printed);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn sampled_interpolation_is_second_order(a in 0.5f64..4.0, b in -2.0f64..2.0, c in 0.1f64..1.5) {
        let src = format!("sin({a}*x) + {b}*x^2 + exp({c}*x)");
        let f = CoefficientField::parse(&src, 0.0, 1.0).unwrap();
        let err = |n: usize| {
            let s = sample_field(&f, n).unwrap().detached();
            (0..=997)
                .map(|i| {
                    let x = i as f64 / 997.0;
                    (s.eval(x).unwrap() - f.eval(x).unwrap()).abs()
                })
                .fold(0.0, f64::max)
        };
        for n in [16, 32, 64] {
            let ratio = err(n) / err(2 * n);
            prop_assert!(ratio >= 3.0, "{src}, n = {n}: ratio {ratio}");
        }
    }

    #[test]
    fn affine_fields_serialize_to_equivalent_expressions(scale in -5.0f64..5.0, shift in -5.0f64..5.0, x in 0.0f64..2.0) {
        let base = CoefficientField::parse("1 + x*cos(x)", 0.0, 2.0).unwrap();
        let f = CoefficientField::affine(base, scale, shift);
        let back = CoefficientField::parse(&f.to_expression().unwrap(), 0.0, 2.0).unwrap();
        let (u, v): (f64, f64) = (f.eval(x).unwrap(), back.eval(x).unwrap());
        prop_assert!((u - v).abs() <= 1e-14 * u.abs().max(1.0));
    }
}
