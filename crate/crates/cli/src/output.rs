use std::fs;

use fidmoments::moments::SweepTable;
use serde::Serialize;
use serde_json::Value;

use crate::args::OutputArgs;
use crate::Failure;

pub const SIGNIFICANT_DIGITS: usize = 15;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses")
}

fn round_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            if let Some(x) = n
                .as_f64()
                .and_then(|x| serde_json::Number::from_f64(round_sig(x)))
            {
                *n = x;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_numbers),
        Value::Object(map) => map.values_mut().for_each(round_numbers),
        _ => {}
    }
}

fn write(text: String, out: &OutputArgs) -> Result<(), Failure> {
    match &out.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json<T: Serialize>(value: &T, out: &OutputArgs) -> Result<(), Failure> {
    let mut v = serde_json::to_value(value).expect("report types serialize");
    round_numbers(&mut v);
    let mut text = serde_json::to_string_pretty(&v).expect("json value serializes");
    text.push('\n');
    write(text, out)
}

pub fn emit_sweep_csv(table: &SweepTable, out: &OutputArgs) -> Result<(), Failure> {
    let mut text = String::from("d,mean_var,max_var,d_times_max_var\n");
    for r in &table.rows {
        text.push_str(&format!(
            "{},{},{},{}\n",
            r.d,
            round_sig(r.mean_var),
            round_sig(r.max_var),
            round_sig(r.d_times_max_var)
        ));
    }
    write(text, out)
}
