use std::sync::Arc;

use gurarii_core::amalgam::amalgamate_auto;
use gurarii_core::engine::*;
use gurarii_core::linalg::Matrix;
use gurarii_core::operators::LinearMap;
use gurarii_core::rational::rat;
use gurarii_core::spaces::{PolyhedralSpace, SpaceRef};
use gurarii_core::trace::{verify_trace, Trace};
use serde_json::Value;

fn line() -> SpaceRef {
    Arc::new(PolyhedralSpace::line())
}

fn passes(trace: &Trace) -> bool {
    matches!(verify_trace(trace), Ok(checks) if checks.iter().all(|c| c.pass))
}

/// Every string leaf holding a rational, by JSON pointer.
fn rational_leaves(v: &Value, path: String, out: &mut Vec<String>) {
    match v {
        Value::String(s) if gurarii_core::rational::parse_rational(s).is_some() => out.push(path),
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                rational_leaves(x, format!("{path}/{i}"), out);
            }
        }
        Value::Object(map) => {
            for (k, x) in map {
                rational_leaves(x, format!("{path}/{k}"), out);
            }
        }
        _ => {}
    }
}

fn tamper_survivors(trace: &Trace) -> Vec<String> {
    let json = serde_json::to_value(trace).unwrap();
    let mut leaves = Vec::new();
    rational_leaves(&json, String::new(), &mut leaves);
    let mut survivors = Vec::new();
    for p in leaves {
        let mut t = json.clone();
        let slot = t.pointer_mut(&p).unwrap();
        let q = gurarii_core::rational::parse_rational(slot.as_str().unwrap()).unwrap();
        *slot = Value::String(gurarii_core::rational::format_rational(&(q + rat(1, 7))));
        let Ok(parsed) = serde_json::from_value::<Trace>(t) else { continue };
        if passes(&parsed) {
            survivors.push(p);
        }
    }
    survivors
}

#[test]
fn amalgam_trace_round_trip_and_tamper() {
    let f = LinearMap::new(line(), line(), Matrix::scalar(1, &rat(3, 2))).unwrap();
    let cert = amalgamate_auto(&f, &rat(3, 5)).unwrap();
    let trace = Trace::amalgam(&f, &cert);
    let text = serde_json::to_string_pretty(&trace).unwrap();
    let back: Trace = serde_json::from_str(&text).unwrap();
    assert_eq!(back, trace);
    assert!(passes(&back));
    assert_eq!(tamper_survivors(&trace), Vec::<String>::new());
}

#[test]
fn back_and_forth_trace_tamper() {
    let mut e = constant_chain("e", PolyhedralSpace::line(), 3);
    let mut f = constant_chain("f", PolyhedralSpace::line(), 3);
    let seed = LinearMap::new(line(), line(), Matrix::scalar(1, &rat(3, 2))).unwrap();
    let target = rat(3, 5);
    let s = schedule_make(&target, &default_eps0(&target, &rat(1, 2)), &rat(1, 50), 2).unwrap();
    let bf = back_and_forth(&mut e, &mut f, &LinearMap::identity(line()), &seed, &s).unwrap();
    let trace = Trace::back_and_forth(&bf);
    assert!(passes(&trace));
    assert_eq!(tamper_survivors(&trace), Vec::<String>::new());
}

#[test]
fn embed_trace_tamper() {
    let zero = Arc::new(PolyhedralSpace::zero());
    let plane = Arc::new(PolyhedralSpace::l1(2));
    let x = ChainSpace::from_stages("x", vec![zero, plane], vec![Matrix::zeros(2, 0)]).unwrap();
    let mut g = constant_chain("g", PolyhedralSpace::line(), 1);
    let trace = Trace::embed(&embed_universal(&x, &mut g, 3).unwrap());
    assert!(passes(&trace));
    assert_eq!(tamper_survivors(&trace), Vec::<String>::new());
}
