//! Rejects reports containing NaN or infinities before they are written.
//!
//! serde_json writes non-finite floats as `null`, indistinguishable from a
//! missing optional value, so the check walks the `Serialize` impl itself.

use std::fmt;

use serde::ser::{self, Serialize};

#[derive(Debug)]
pub struct NonFinite(pub String);

impl fmt::Display for NonFinite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for NonFinite {}

impl ser::Error for NonFinite {
    fn custom<T: fmt::Display>(msg: T) -> Self {
        NonFinite(msg.to_string())
    }
}

/// Errors with the path of the first non-finite number in `value`.
pub fn check_finite<T: Serialize + ?Sized>(value: &T) -> Result<(), NonFinite> {
    value.serialize(&mut Scan { path: Vec::new() })
}

struct Scan {
    path: Vec<String>,
}

impl Scan {
    fn float(&self, v: f64) -> Result<(), NonFinite> {
        if v.is_finite() {
            Ok(())
        } else {
            Err(NonFinite(format!("non-finite number {v} at /{}", self.path.join("/"))))
        }
    }

    fn nested<T: Serialize + ?Sized>(&mut self, key: String, value: &T) -> Result<(), NonFinite> {
        self.path.push(key);
        value.serialize(&mut *self)?;
        self.path.pop();
        Ok(())
    }
}

type R = Result<(), NonFinite>;

impl<'a> ser::Serializer for &'a mut Scan {
    type Ok = ();
    type Error = NonFinite;
    type SerializeSeq = Indexed<'a>;
    type SerializeTuple = Indexed<'a>;
    type SerializeTupleStruct = Indexed<'a>;
    type SerializeTupleVariant = Indexed<'a>;
    type SerializeMap = Keyed<'a>;
    type SerializeStruct = Keyed<'a>;
    type SerializeStructVariant = Keyed<'a>;

    fn serialize_bool(self, _: bool) -> R {
        Ok(())
    }
    fn serialize_i8(self, _: i8) -> R {
        Ok(())
    }
    fn serialize_i16(self, _: i16) -> R {
        Ok(())
    }
    fn serialize_i32(self, _: i32) -> R {
        Ok(())
    }
    fn serialize_i64(self, _: i64) -> R {
        Ok(())
    }
    fn serialize_u8(self, _: u8) -> R {
        Ok(())
    }
    fn serialize_u16(self, _: u16) -> R {
        Ok(())
    }
    fn serialize_u32(self, _: u32) -> R {
        Ok(())
    }
    fn serialize_u64(self, _: u64) -> R {
        Ok(())
    }
    fn serialize_f32(self, v: f32) -> R {
        self.float(v.into())
    }
    fn serialize_f64(self, v: f64) -> R {
        self.float(v)
    }
    fn serialize_char(self, _: char) -> R {
        Ok(())
    }
    fn serialize_str(self, _: &str) -> R {
        Ok(())
    }
    fn serialize_bytes(self, _: &[u8]) -> R {
        Ok(())
    }
    fn serialize_none(self) -> R {
        Ok(())
    }
    fn serialize_some<T: Serialize + ?Sized>(self, value: &T) -> R {
        value.serialize(self)
    }
    fn serialize_unit(self) -> R {
        Ok(())
    }
    fn serialize_unit_struct(self, _: &'static str) -> R {
        Ok(())
    }
    fn serialize_unit_variant(self, _: &'static str, _: u32, _: &'static str) -> R {
        Ok(())
    }
    fn serialize_newtype_struct<T: Serialize + ?Sized>(self, _: &'static str, value: &T) -> R {
        value.serialize(self)
    }
    fn serialize_newtype_variant<T: Serialize + ?Sized>(self, _: &'static str, _: u32, variant: &'static str, value: &T) -> R {
        self.nested(variant.to_string(), value)
    }
    fn serialize_seq(self, _: Option<usize>) -> Result<Indexed<'a>, NonFinite> {
        Ok(Indexed { scan: self, index: 0 })
    }
    fn serialize_tuple(self, _: usize) -> Result<Indexed<'a>, NonFinite> {
        Ok(Indexed { scan: self, index: 0 })
    }
    fn serialize_tuple_struct(self, _: &'static str, _: usize) -> Result<Indexed<'a>, NonFinite> {
        Ok(Indexed { scan: self, index: 0 })
    }
    fn serialize_tuple_variant(self, _: &'static str, _: u32, _: &'static str, _: usize) -> Result<Indexed<'a>, NonFinite> {
        Ok(Indexed { scan: self, index: 0 })
    }
    fn serialize_map(self, _: Option<usize>) -> Result<Keyed<'a>, NonFinite> {
        Ok(Keyed { scan: self, key: String::new() })
    }
    fn serialize_struct(self, _: &'static str, _: usize) -> Result<Keyed<'a>, NonFinite> {
        Ok(Keyed { scan: self, key: String::new() })
    }
    fn serialize_struct_variant(self, _: &'static str, _: u32, _: &'static str, _: usize) -> Result<Keyed<'a>, NonFinite> {
        Ok(Keyed { scan: self, key: String::new() })
    }
}

pub struct Indexed<'a> {
    scan: &'a mut Scan,
    index: usize,
}

impl Indexed<'_> {
    fn element<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        let key = self.index.to_string();
        self.index += 1;
        self.scan.nested(key, value)
    }
}

impl ser::SerializeSeq for Indexed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_element<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        self.element(value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTuple for Indexed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_element<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        self.element(value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTupleStruct for Indexed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        self.element(value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeTupleVariant for Indexed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        self.element(value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

pub struct Keyed<'a> {
    scan: &'a mut Scan,
    key: String,
}

impl ser::SerializeMap for Keyed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_key<T: Serialize + ?Sized>(&mut self, key: &T) -> R {
        // keys may be floats too
        key.serialize(&mut *self.scan)?;
        self.key = serde_json::to_string(key).unwrap_or_default().trim_matches('"').to_string();
        Ok(())
    }
    fn serialize_value<T: Serialize + ?Sized>(&mut self, value: &T) -> R {
        let key = std::mem::take(&mut self.key);
        self.scan.nested(key, value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeStruct for Keyed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, key: &'static str, value: &T) -> R {
        self.scan.nested(key.to_string(), value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

impl ser::SerializeStructVariant for Keyed<'_> {
    type Ok = ();
    type Error = NonFinite;
    fn serialize_field<T: Serialize + ?Sized>(&mut self, key: &'static str, value: &T) -> R {
        self.scan.nested(key.to_string(), value)
    }
    fn end(self) -> R {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[derive(serde::Serialize)]
    struct Row {
        a: f64,
        b: Option<f64>,
        c: Vec<[f64; 2]>,
    }

    #[test]
    fn finds_nan_with_path() {
        let ok = Row { a: 1.0, b: None, c: vec![[0.0, 1.0]] };
        assert!(check_finite(&ok).is_ok());
        let bad = Row { a: 1.0, b: None, c: vec![[0.0, 1.0], [f64::NAN, 0.0]] };
        let err = check_finite(&bad).unwrap_err();
        assert!(err.0.ends_with("/c/1/0"), "{err}");
        let inf = Row { a: 1.0, b: Some(f64::INFINITY), c: vec![] };
        assert!(check_finite(&inf).unwrap_err().0.ends_with("/b"));
        let mut m = BTreeMap::new();
        m.insert("x", f64::NEG_INFINITY);
        assert!(check_finite(&m).unwrap_err().0.ends_with("/x"));
    }
}
