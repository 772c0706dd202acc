//! Hand-rolled request decoding, so every rejection names the offending
//! field.

use musae_core::tokens::{N_TOKENS, N_TRACKS};
use musae_core::PianoRoll;
use serde_json::{Map, Value};

use crate::error::ApiError;

pub struct Body {
    fields: Map<String, Value>,
}

impl Body {
    pub fn parse(bytes: &[u8], allowed: &[&str]) -> Result<Self, ApiError> {
        let value: Value = serde_json::from_slice(bytes)
            .map_err(|e| ApiError::BadRequest { field: None, message: format!("body is not valid JSON: {e}") })?;
        let Value::Object(fields) = value else {
            return Err(ApiError::BadRequest { field: None, message: "body must be a JSON object".into() });
        };
        if let Some(k) = fields.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(ApiError::bad(k.clone(), format!("unknown field `{k}`; expected one of {allowed:?}")));
        }
        Ok(Self { fields })
    }

    fn required(&self, field: &str) -> Result<&Value, ApiError> {
        self.fields.get(field).ok_or_else(|| ApiError::bad(field, format!("missing field `{field}`")))
    }

    fn optional(&self, field: &str) -> Option<&Value> {
        self.fields.get(field).filter(|v| !v.is_null())
    }

    pub fn tokens(&self, field: &str, timesteps: usize) -> Result<PianoRoll, ApiError> {
        grid(self.required(field)?, field, timesteps)
    }

    pub fn vector(&self, field: &str, dim: usize) -> Result<Vec<f32>, ApiError> {
        vector(self.required(field)?, field, dim)
    }

    pub fn alphas(&self, field: &str) -> Result<Vec<f64>, ApiError> {
        let Value::Array(items) = self.required(field)? else {
            return Err(ApiError::bad(field, "expected an array of numbers"));
        };
        if items.is_empty() {
            return Err(ApiError::bad(field, "at least one alpha is required"));
        }
        items
            .iter()
            .enumerate()
            .map(|(i, v)| match v.as_f64() {
                Some(a) if (0.0..=1.0).contains(&a) => Ok(a),
                Some(a) => Err(ApiError::bad(format!("{field}[{i}]"), format!("{a} is outside [0, 1]"))),
                None => Err(ApiError::bad(format!("{field}[{i}]"), "expected a number")),
            })
            .collect()
    }

    pub fn opt_u64(&self, field: &str) -> Result<Option<u64>, ApiError> {
        self.optional(field)
            .map(|v| v.as_u64().ok_or_else(|| ApiError::bad(field, "expected a non-negative integer")))
            .transpose()
    }

    pub fn opt_f64(&self, field: &str) -> Result<Option<f64>, ApiError> {
        self.optional(field).map(|v| v.as_f64().ok_or_else(|| ApiError::bad(field, "expected a number"))).transpose()
    }
}

fn grid(value: &Value, field: &str, timesteps: usize) -> Result<PianoRoll, ApiError> {
    let Value::Array(rows) = value else {
        return Err(ApiError::bad(field, "expected an array of timesteps, each an array of 4 tokens"));
    };
    let mut cells = Vec::with_capacity(rows.len() * N_TRACKS);
    for (t, row) in rows.iter().enumerate() {
        let at = || format!("{field}[{t}]");
        let Value::Array(row) = row else {
            return Err(ApiError::bad(at(), "expected an array of 4 tokens"));
        };
        if row.len() != N_TRACKS {
            return Err(ApiError::bad(at(), format!("expected {N_TRACKS} tokens, got {}", row.len())));
        }
        for (k, v) in row.iter().enumerate() {
            match v.as_u64() {
                Some(tok) if tok < N_TOKENS as u64 => cells.push(tok as u8),
                _ => return Err(ApiError::bad(format!("{field}[{t}][{k}]"), format!("{v} is not a token in 0..=129"))),
            }
        }
    }
    if rows.len() != timesteps {
        return Err(ApiError::unprocessable(field, format!("model expects {timesteps} timesteps, got {}", rows.len())));
    }
    PianoRoll::new(timesteps, cells).map_err(|e| ApiError::bad(field, e.to_string()))
}

fn vector(value: &Value, field: &str, dim: usize) -> Result<Vec<f32>, ApiError> {
    let Value::Array(items) = value else {
        return Err(ApiError::bad(field, "expected an array of numbers"));
    };
    let out = items
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_f64()
                .filter(|x| x.is_finite())
                .map(|x| x as f32)
                .ok_or_else(|| ApiError::bad(format!("{field}[{i}]"), "expected a finite number"))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if out.len() != dim {
        return Err(ApiError::unprocessable(field, format!("latent dimension is {dim}, got {}", out.len())));
    }
    Ok(out)
}

/// Time-major token rows, as sent over the wire.
pub fn rows(roll: &PianoRoll) -> Vec<[u8; N_TRACKS]> {
    roll.rows()
}
