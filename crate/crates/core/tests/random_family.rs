mod common;

use corec_core::analysis::{analyze, Analysis};
use corec_core::ast::Program;
use corec_core::eval::{check_equation, EquationVerdict, EvalError, Machine, Sem};
use corec_core::guard::{classify_function, Verdict};
use corec_core::syntax::{parse_args, parse_program};
use proptest::prelude::*;

fn load(seed: u64) -> (common::Generated, Program, Analysis) {
    let g = common::generate(seed);
    let prog = parse_program(&g.src).unwrap_or_else(|e| panic!("seed {seed}: {e}\n{}", g.src));
    let analysis = analyze(&prog);
    (g, prog, analysis)
}

#[test]
fn generated_functions_are_transformable() {
    for seed in 0..300 {
        let (g, _, a) = load(seed);
        assert_eq!(a.verdict(&g.fun), Some(Verdict::TransformableUnguarded), "seed {seed}\n{}", g.src);
        assert!(a.artifacts(&g.fun).is_some(), "seed {seed}: {:?}", a.artifacts[&g.fun]);
    }
}

#[test]
fn erased_guarded_bodies_reclassify_as_guarded() {
    for seed in 0..300 {
        let (g, _, a) = load(seed);
        let erased = a.artifacts(&g.fun).unwrap().guarded.erased();
        assert_eq!(classify_function(&erased).verdict, Verdict::Guarded, "seed {seed}");
    }
}

#[test]
fn recursive_equation_holds_on_generated_programs() {
    for seed in 0..60 {
        let (g, prog, a) = load(seed);
        for args in &g.args {
            let args = parse_args(&prog, &g.fun, args).unwrap();
            let v = check_equation(&prog, &a, &g.fun, &args, 12, 20_000).unwrap();
            assert!(!matches!(v, EquationVerdict::Counterexample { .. }), "seed {seed}: {v}\n{}", g.src);
        }
    }
}

fn pre_fingerprint(prog: &Program, a: &Analysis, fun: &str, args: &str, fuel: u64) -> Result<String, EvalError> {
    let m = Machine::new(prog, a, fuel);
    let args = m.closed_args(&parse_args(prog, fun, args).unwrap(), Sem::Transformed)?;
    let out = m.run_pre(fun, args)?;
    Ok(out.fingerprint(&m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn run_pre_is_monotone_in_fuel(seed in 0u64..10_000, which in 0usize..4, low in 1u64..400, extra in 0u64..4000) {
        let (g, prog, a) = load(seed);
        let small = pre_fingerprint(&prog, &a, &g.fun, &g.args[which], low);
        let large = pre_fingerprint(&prog, &a, &g.fun, &g.args[which], low + extra);
        match small {
            Ok(s) => prop_assert_eq!(Ok(s), large.map_err(|e| e.to_string())),
            Err(EvalError::FuelExhausted) => {}
            Err(e) => prop_assert_eq!(e.to_string(), large.unwrap_err().to_string()),
        }
    }
}
