//! JSON mirrors of the text formats, all versioned with `"format": 1`.
//!
//! Series serialize as lists of `[exp_num, exp_den, coeff]` with rational
//! coefficients as `"num/den"` strings; rationals as `"num/den"`; algebraic
//! numbers as `{minpoly, root}`.

use mahler_core::matrix::Matrix;
use mahler_core::scalar::{Q, Scalar};
use mahler_core::series::{Prec, TruncatedPuiseux};
use mahler_core::xi::{GeneralizedSeries, XiExpr, XiIndex};
use mahler_core::MahlerOperator;

use num_bigint::BigInt;
use serde_json::{json, Value};

pub fn q_to_string(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn q_from_string(s: &str) -> Result<Q, String> {
    match s.split_once('/') {
        None => {
            let n: BigInt = s.trim().parse().map_err(|_| "bad integer")?;
            Ok(Q::from_integer(n))
        }
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| "bad numerator")?;
            let d: BigInt = b.trim().parse().map_err(|_| "bad denominator")?;
            if d == BigInt::from(0) {
                return Err("zero denominator".into());
            }
            Ok(Q::new(n, d))
        }
    }
}

pub fn scalar_json(s: &Scalar) -> Value {
    match s {
        Scalar::Rat(q) => json!(q_to_string(q)),
        Scalar::Ext(f, c) => json!({
            "minpoly": f.min_poly().iter().map(q_to_string).collect::<Vec<_>>(),
            "coords": c.iter().map(q_to_string).collect::<Vec<_>>(),
        }),
    }
}

pub fn series_json(f: &TruncatedPuiseux) -> Value {
    let terms: Vec<Value> = f
        .terms()
        .map(|(e, c)| json!([e.numer().to_string(), e.denom().to_string(), scalar_json(c)]))
        .collect();
    let prec = match f.prec() {
        Prec::Exact => Value::Null,
        Prec::At(n) => json!(q_to_string(n)),
    };
    json!({ "terms": terms, "precision": prec })
}

pub fn operator_json(op: &MahlerOperator) -> Value {
    json!({
        "format": 1,
        "p": op.p,
        "coefficients": (0..=op.order()).map(|i| series_json(&op.coeff(i))).collect::<Vec<_>>(),
    })
}

pub fn xi_index_json(i: &XiIndex) -> Value {
    json!({
        "alpha": i.alpha.clone(),
        "lambda": i.lambda.iter().map(scalar_json).collect::<Vec<_>>(),
        "a": i.a.iter().map(q_to_string).collect::<Vec<_>>(),
    })
}

pub fn xi_expr_json(e: &XiExpr) -> Value {
    let terms: Vec<Value> = e
        .terms()
        .map(|(i, c)| json!({ "index": xi_index_json(i), "coefficient": series_json(c) }))
        .collect();
    json!({ "terms": terms, "standard": e.is_marked_standard() })
}

pub fn generalized_json(g: &GeneralizedSeries) -> Value {
    let terms: Vec<Value> = g
        .terms()
        .map(|((c, j), e)| {
            json!({ "c": scalar_json(c), "l_power": j, "xi": xi_expr_json(e) })
        })
        .collect();
    json!({ "format": 1, "terms": terms })
}

pub fn series_matrix_json(m: &Matrix<TruncatedPuiseux>) -> Value {
    let rows: Vec<Value> = (0..m.rows)
        .map(|i| {
            let row: Vec<Value> = (0..m.cols).map(|j| series_json(&m[(i, j)])).collect();
            json!(row)
        })
        .collect();
    json!(rows)
}

pub fn xi_matrix_json(m: &Matrix<XiExpr>) -> Value {
    let rows: Vec<Value> = (0..m.rows)
        .map(|i| {
            let row: Vec<Value> = (0..m.cols).map(|j| xi_expr_json(&m[(i, j)])).collect();
            json!(row)
        })
        .collect();
    json!(rows)
}

pub fn scalar_matrix_json(m: &Matrix<Scalar>) -> Value {
    let rows: Vec<Value> = (0..m.rows)
        .map(|i| {
            let row: Vec<Value> = (0..m.cols).map(|j| scalar_json(&m[(i, j)])).collect();
            json!(row)
        })
        .collect();
    json!(rows)
}
