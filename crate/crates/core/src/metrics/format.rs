use serde::Serializer;
use serde_json::value::RawValue;

/// Six-decimal rendering used for every float written to disk.
pub fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

/// Serializes a float as a six-decimal JSON number.
pub fn serialize_fixed6<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    if !x.is_finite() {
        return s.serialize_none();
    }
    let raw = RawValue::from_string(fixed6(*x)).map_err(serde::ser::Error::custom)?;
    serde::Serialize::serialize(&raw, s)
}

pub fn serialize_fixed6_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => serialize_fixed6(v, s),
        None => s.serialize_none(),
    }
}

pub fn serialize_fixed6_map<S: Serializer>(
    m: &std::collections::BTreeMap<String, f64>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(m.len()))?;
    for (k, v) in m {
        map.serialize_entry(k, &Fixed6(*v))?;
    }
    map.end()
}

/// Wrapper that serializes its float with [`fixed6`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Fixed6(pub f64);

impl serde::Serialize for Fixed6 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        serialize_fixed6(&self.0, s)
    }
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("value serializes to JSON");
    out.push(b'\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_decimals() {
        assert_eq!(fixed6(0.5), "0.500000");
        assert_eq!(fixed6(-1e-9), "0.000000");
        assert_eq!(fixed6(2.0 / 3.0), "0.666667");
        assert_eq!(
            serde_json::to_string(&vec![Fixed6(1.0), Fixed6(-12.5)]).unwrap(),
            "[1.000000,-12.500000]"
        );
    }
}
