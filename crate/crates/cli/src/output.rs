use photon_position::{Mat3C, Vec3C, Vec3R, C64};
use serde_json::{json, Map, Value};

/// A finite number, or its name as a string (JSON has no NaN).
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(x.to_string())
    }
}

pub fn complex(z: C64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn vec3(v: &Vec3R) -> Value {
    Value::Array(v.0.iter().map(|x| num(*x)).collect())
}

pub fn cvec3(v: &Vec3C) -> Value {
    Value::Array(v.0.iter().map(|z| complex(*z)).collect())
}

pub fn mat3(m: &Mat3C) -> Value {
    Value::Array(m.0.iter().map(|row| Value::Array(row.iter().map(|z| complex(*z)).collect())).collect())
}

/// Top-level report object with the schema version and command name.
pub fn report(command: &str, body: Map<String, Value>) -> String {
    let mut obj = Map::new();
    obj.insert("schema".into(), json!(1));
    obj.insert("command".into(), json!(command));
    obj.extend(body);
    let mut s = serde_json::to_string_pretty(&Value::Object(obj)).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_becomes_string() {
        assert_eq!(num(f64::NAN), json!("NaN"));
        assert_eq!(num(f64::INFINITY), json!("inf"));
        assert_eq!(num(1.5), json!(1.5));
    }

    #[test]
    fn report_carries_schema() {
        let v: Value = serde_json::from_str(&report("x", Map::new())).unwrap();
        assert_eq!(v["schema"], json!(1));
        assert_eq!(v["command"], json!("x"));
    }
}
