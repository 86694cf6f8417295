use num_complex::Complex;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::mep::{MepProblem, MepSolution};
use crate::polyroots::{MultiplicationFamily, Polynomial, PolynomialSystem};
use crate::rjea::{CommutingFamily, JointEigenResult};
use crate::scalar::Real;

/// Parses JSON text, reporting syntax errors with their position.
pub fn parse_json(text: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Finite reals become JSON numbers; infinities and NaN become the strings
/// `"inf"`, `"-inf"` and `"NaN"`.
pub fn real_value(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else if x.is_nan() {
        json!("NaN")
    } else if x > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

pub fn complex_value<T: Real>(z: Complex<T>) -> Value {
    json!([real_value(z.re.to_f64_lossy()), real_value(z.im.to_f64_lossy())])
}

pub fn vector_value<T: Real>(v: &[Complex<T>]) -> Value {
    Value::Array(v.iter().map(|&z| complex_value(z)).collect())
}

pub fn matrix_value<T: Real>(m: &Matrix<T>) -> Value {
    Value::Array((0..m.rows()).map(|i| vector_value(m.row(i))).collect())
}

fn parse_real(v: &Value, path: &str) -> Result<f64> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| Error::Schema(format!("{path}: number out of range"))),
        Value::String(s) => match s.as_str() {
            "NaN" | "nan" => Ok(f64::NAN),
            "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
            "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
            _ => Err(Error::Schema(format!("{path}: expected a number, found \"{s}\""))),
        },
        _ => Err(Error::Schema(format!("{path}: expected a number"))),
    }
}

fn parse_entry<T: Real>(v: &Value, path: &str) -> Result<Complex<T>> {
    let (re, im) = match v {
        Value::Array(pair) if pair.len() == 2 => (
            parse_real(&pair[0], &format!("{path}[0]"))?,
            parse_real(&pair[1], &format!("{path}[1]"))?,
        ),
        Value::Array(_) => return Err(Error::Schema(format!("{path}: expected a [re, im] pair"))),
        other => (parse_real(other, path)?, 0.0),
    };
    if !re.is_finite() || !im.is_finite() {
        return Err(Error::Schema(format!("{path}: non-finite entry")));
    }
    Ok(Complex::new(T::of(re), T::of(im)))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| Error::Schema(format!("{path}: expected an array")))
}

pub fn parse_vector<T: Real>(v: &Value, path: &str) -> Result<Vec<Complex<T>>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, e)| parse_entry(e, &format!("{path}[{i}]")))
        .collect()
}

/// A square or rectangular matrix given as row-major rows.
pub fn parse_matrix<T: Real>(v: &Value, path: &str) -> Result<Matrix<T>> {
    let rows = as_array(v, path)?;
    let parsed: Vec<Vec<Complex<T>>> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| parse_vector(r, &format!("{path}[{i}]")))
        .collect::<Result<_>>()?;
    let cols = parsed.first().map_or(0, Vec::len);
    if let Some(i) = parsed.iter().position(|r| r.len() != cols) {
        return Err(Error::Schema(format!(
            "{path}[{i}]: row has {} entries, expected {cols}",
            parsed[i].len()
        )));
    }
    Matrix::from_vec(parsed.len(), cols, parsed.into_iter().flatten().collect())
        .map_err(|e| Error::Schema(format!("{path}: {e}")))
}

fn object<'a>(v: &'a Value) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| Error::Schema("top level must be an object".into()))
}

fn check_kind(obj: &Map<String, Value>, expected: &str) -> Result<()> {
    match obj.get("kind") {
        None => Ok(()),
        Some(Value::String(k)) if k == expected => Ok(()),
        Some(Value::String(k)) => Err(Error::KindMismatch {
            expected: expected.into(),
            found: k.clone(),
        }),
        Some(_) => Err(Error::Schema("\"kind\" must be a string".into())),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| Error::Schema(format!("missing field \"{key}\"")))
}

fn optional_count(obj: &Map<String, Value>, key: &str) -> Result<Option<usize>> {
    match obj.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| Error::Schema(format!("\"{key}\" must be a nonnegative integer"))),
    }
}

fn expect_count(obj: &Map<String, Value>, key: &str, actual: usize) -> Result<()> {
    match optional_count(obj, key)? {
        Some(x) if x != actual => Err(Error::Schema(format!("\"{key}\" is {x} but the data has {actual}"))),
        _ => Ok(()),
    }
}

fn schema(e: Error) -> Error {
    match e {
        Error::DimensionMismatch(m) | Error::ShapeMismatch(m) => Error::Schema(m),
        Error::NonFinite => Error::Schema("non-finite entry".into()),
        other => other,
    }
}

fn parse_matrix_list<T: Real>(v: &Value, path: &str) -> Result<Vec<Matrix<T>>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(k, m)| parse_matrix(m, &format!("{path}[{k}]")))
        .collect()
}

/// `{"kind": "family", "d", "n", "matrices": [A_1, …, A_d]}`; only
/// `matrices` is required.
pub fn family_from_json<T: Real>(text: &str) -> Result<CommutingFamily<T>> {
    let v = parse_json(text)?;
    let obj = object(&v)?;
    check_kind(obj, "family")?;
    let matrices = parse_matrix_list(field(obj, "matrices")?, "matrices")?;
    expect_count(obj, "d", matrices.len())?;
    if let Some(first) = matrices.first() {
        expect_count(obj, "n", first.rows())?;
    }
    CommutingFamily::new(matrices).map_err(schema)
}

pub fn family_to_json<T: Real>(family: &CommutingFamily<T>) -> String {
    let v = json!({
        "kind": "family",
        "d": family.d(),
        "n": family.n(),
        "matrices": family.matrices().iter().map(matrix_value).collect::<Vec<_>>(),
    });
    format!("{v}\n")
}

/// As [`family_to_json`] with the known joint eigenvalues under `"ground_truth"`.
pub fn family_with_truth_to_json<T: Real>(family: &CommutingFamily<T>, truth: &[Vec<Complex<T>>]) -> String {
    let v = json!({
        "kind": "family",
        "d": family.d(),
        "n": family.n(),
        "matrices": family.matrices().iter().map(matrix_value).collect::<Vec<_>>(),
        "ground_truth": truth.iter().map(|t| vector_value(t)).collect::<Vec<_>>(),
    });
    format!("{v}\n")
}

/// `{"kind": "mep", "d", "sizes", "matrices": [[A_10, …, A_1d], …]}`.
pub fn mep_from_json<T: Real>(text: &str) -> Result<MepProblem<T>> {
    let v = parse_json(text)?;
    let obj = object(&v)?;
    check_kind(obj, "mep")?;
    let rows: Vec<Vec<Matrix<T>>> = as_array(field(obj, "matrices")?, "matrices")?
        .iter()
        .enumerate()
        .map(|(i, r)| parse_matrix_list(r, &format!("matrices[{i}]")))
        .collect::<Result<_>>()?;
    expect_count(obj, "d", rows.len())?;
    if let Some(sizes) = obj.get("sizes") {
        let sizes: Vec<usize> = as_array(sizes, "sizes")?
            .iter()
            .map(|s| s.as_u64().map(|x| x as usize))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::Schema("\"sizes\" must hold nonnegative integers".into()))?;
        let actual: Vec<usize> = rows.iter().map(|r| r.first().map_or(0, Matrix::rows)).collect();
        if sizes != actual {
            return Err(Error::Schema(format!("\"sizes\" is {sizes:?} but the blocks have {actual:?}")));
        }
    }
    MepProblem::new(rows).map_err(schema)
}

pub fn mep_to_json<T: Real>(problem: &MepProblem<T>) -> String {
    let v = json!({
        "kind": "mep",
        "d": problem.d(),
        "sizes": problem.sizes(),
        "matrices": problem
            .matrices()
            .iter()
            .map(|row| row.iter().map(matrix_value).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    });
    format!("{v}\n")
}

/// `{"kind": "mult", "s", "m", "basis_note", "matrices": [M_{x_1}, …]}`.
pub fn mult_from_json<T: Real>(text: &str) -> Result<MultiplicationFamily<T>> {
    let v = parse_json(text)?;
    let obj = object(&v)?;
    check_kind(obj, "mult")?;
    let matrices = parse_matrix_list(field(obj, "matrices")?, "matrices")?;
    expect_count(obj, "s", matrices.len())?;
    if let Some(first) = matrices.first() {
        expect_count(obj, "m", first.rows())?;
    }
    let note = match obj.get("basis_note") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(_) => return Err(Error::Schema("\"basis_note\" must be a string".into())),
    };
    MultiplicationFamily::new(matrices, note).map_err(schema)
}

pub fn mult_to_json<T: Real>(fam: &MultiplicationFamily<T>) -> String {
    let v = json!({
        "kind": "mult",
        "s": fam.s(),
        "m": fam.m(),
        "basis_note": fam.basis_note,
        "matrices": fam.family.matrices().iter().map(matrix_value).collect::<Vec<_>>(),
    });
    format!("{v}\n")
}

/// `{"kind": "system", "s", "polynomials": [[{"coef": [re, im], "exp": [..]}, …], …]}`.
pub fn system_from_json(text: &str) -> Result<PolynomialSystem> {
    let v = parse_json(text)?;
    let obj = object(&v)?;
    check_kind(obj, "system")?;
    let s = optional_count(obj, "s")?.ok_or_else(|| Error::Schema("missing field \"s\"".into()))?;
    let polys = as_array(field(obj, "polynomials")?, "polynomials")?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let terms = as_array(p, &format!("polynomials[{i}]"))?
                .iter()
                .enumerate()
                .map(|(k, t)| {
                    let path = format!("polynomials[{i}][{k}]");
                    let coef = parse_entry::<f64>(
                        t.get("coef")
                            .ok_or_else(|| Error::Schema(format!("{path}: missing \"coef\"")))?,
                        &format!("{path}.coef"),
                    )?;
                    let exp = t
                        .get("exp")
                        .and_then(Value::as_array)
                        .and_then(|e| e.iter().map(|x| x.as_u64().map(|y| y as u32)).collect::<Option<Vec<_>>>())
                        .ok_or_else(|| Error::Schema(format!("{path}.exp: expected nonnegative integers")))?;
                    Ok((coef, exp))
                })
                .collect::<Result<_>>()?;
            Ok(Polynomial { terms })
        })
        .collect::<Result<_>>()?;
    PolynomialSystem::new(s, polys).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::Schema(m),
        other => schema(other),
    })
}

pub fn system_to_json(system: &PolynomialSystem) -> String {
    let polys: Vec<Value> = system
        .polynomials
        .iter()
        .map(|p| {
            Value::Array(
                p.terms
                    .iter()
                    .map(|(c, e)| json!({"coef": complex_value(*c), "exp": e}))
                    .collect(),
            )
        })
        .collect();
    format!("{}\n", json!({"kind": "system", "s": system.s, "polynomials": polys}))
}

fn reals(v: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(v.into_iter().map(real_value).collect())
}

pub fn joint_result_value<T: Real>(result: &JointEigenResult<T>, commutator_residual: T) -> Value {
    json!({
        "kind": "joint-eigen",
        "mode": result.mode.to_string(),
        "seed": result.combination.seed,
        "mu": vector_value(&result.combination.mu),
        "defective": result.defective_flag,
        "condition_estimate": real_value(result.condition_estimate.to_f64_lossy()),
        "commutator_residual": real_value(commutator_residual.to_f64_lossy()),
        "tuples": result.tuples.iter().map(|t| vector_value(t)).collect::<Vec<_>>(),
        "combination_values": vector_value(&result.combination_values),
        "left_norms": reals(result.left_norms.iter().map(|x| x.to_f64_lossy())),
    })
}

pub fn mep_solution_value<T: Real>(sol: &MepSolution<T>) -> Value {
    json!({
        "kind": "mep-solution",
        "mode": sol.mode.to_string(),
        "strategy": sol.strategy.map_or("right-definite".to_string(), |s| s.to_string()),
        "seed": sol.combination.seed,
        "mu": vector_value(&sol.combination.mu),
        "defective": sol.defective_flag,
        "condition_estimate": real_value(sol.condition_estimate.to_f64_lossy()),
        "max_residual": real_value(sol.max_residual().to_f64_lossy()),
        "eigenvalues": sol.eigenvalues.iter().map(|t| vector_value(t)).collect::<Vec<_>>(),
        "residuals": sol
            .residuals
            .iter()
            .map(|r| reals(r.iter().map(|x| x.to_f64_lossy())))
            .collect::<Vec<_>>(),
        "factors": sol.factors.as_ref().map(|f| {
            f.iter()
                .map(|xs| xs.iter().map(|x| vector_value(x)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        }),
    })
}

/// Pretty JSON with a trailing newline.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializing a Value cannot fail");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{complex_gaussian_matrix, rng_from_seed};

    #[test]
    fn minimal_family() {
        let f = family_from_json::<f64>(r#"{"matrices":[[[[2,0]]]]}"#).unwrap();
        assert_eq!(f.d(), 1);
        assert_eq!(f.matrices()[0][(0, 0)], Complex::new(2.0, 0.0));
    }

    #[test]
    fn family_round_trip_is_exact() {
        let mut rng = rng_from_seed(3);
        let ms: Vec<Matrix<f64>> = (0..3).map(|_| complex_gaussian_matrix(5, 5, &mut rng)).collect();
        let f = CommutingFamily::new(ms).unwrap();
        let text = family_to_json(&f);
        let back = family_from_json::<f64>(&text).unwrap();
        for (a, b) in f.matrices().iter().zip(back.matrices()) {
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                assert_eq!(x.re.to_bits(), y.re.to_bits());
                assert_eq!(x.im.to_bits(), y.im.to_bits());
            }
        }
        assert_eq!(family_to_json(&back), text);
    }

    #[test]
    fn errors_are_classified() {
        match family_from_json::<f64>("{\"matrices\": [\n [[[1, 0]]],\n oops]}") {
            Err(Error::Parse { line, column, .. }) => {
                assert_eq!(line, 3);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
        match family_from_json::<f64>(r#"{"matrices":[[[[1,0],[2,0]],[[3,0],["NaN",0]]]]}"#) {
            Err(Error::Schema(m)) => assert!(m.contains("matrices[0][1][1]"), "{m}"),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            family_from_json::<f64>(r#"{"kind":"mep","matrices":[[[[1,0]]]]}"#),
            Err(Error::KindMismatch { .. })
        ));
        assert!(matches!(
            family_from_json::<f64>(r#"{"matrices":[[[[1,0],[2,0]]]]}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(
            family_from_json::<f64>(r#"{"d":2,"matrices":[[[[1,0]]]]}"#),
            Err(Error::Schema(_))
        ));
        assert!(matches!(family_from_json::<f64>("[1]"), Err(Error::Schema(_))));
    }

    #[test]
    fn mep_and_mult_round_trip() {
        let p = crate::mep::three_param_random_problem::<f64>(2, 1).unwrap();
        let text = mep_to_json(&p);
        assert_eq!(mep_from_json::<f64>(&text).unwrap(), p);
        assert!(matches!(mult_from_json::<f64>(&text), Err(Error::KindMismatch { .. })));

        let fam = crate::polyroots::grid_multiplication_matrices::<f64>(&[vec![
            Complex::new(2.0, 0.0),
            Complex::new(-3.0, 0.0),
            Complex::new(1.0, 0.0),
        ]])
        .unwrap();
        let back = mult_from_json::<f64>(&mult_to_json(&fam)).unwrap();
        assert_eq!(back, fam);
    }

    #[test]
    fn system_round_trip() {
        let sys = crate::polyroots::sigma_system(0.1, [[1.0, 2.0], [3.0, -4.0]]);
        assert_eq!(system_from_json(&system_to_json(&sys)).unwrap(), sys);
        assert!(system_from_json(r#"{"s":1,"polynomials":[[{"coef":[1,0],"exp":[1,1]}]]}"#).is_err());
    }

    #[test]
    fn non_finite_reals_are_strings() {
        assert_eq!(real_value(f64::INFINITY), json!("inf"));
        assert_eq!(parse_real(&json!("-inf"), "x").unwrap(), f64::NEG_INFINITY);
        assert!(parse_real(&json!("abc"), "x").is_err());
    }
}
